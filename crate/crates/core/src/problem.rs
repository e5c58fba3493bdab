//! Problem data `y^(n) + sum (a_i + r_i(t)) y^(i) = 0` and the per-root
//! bundle (shifted spectrum, kernel, numeric right-hand side) that the
//! downstream stages share.

use thiserror::Error;

use crate::expr::{EvalError, Expression};
use crate::green::{build_kernel, GreenError, GreenKernel};
use crate::reduction::{build_reduced_rhs, CompiledRhs, OmegaTable, Param, ReductionError};
use crate::spectral::{
    find_roots, reduced_linear_coefficients, root_gap_product, shift_spectrum, ShiftedSpectrum,
    SpectralError, Spectrum,
};

#[derive(Debug, Error)]
pub enum ProblemError {
    #[error("order must be at least 2, got {0}")]
    Order(usize),
    #[error("field `{field}` has {got} entries, expected {expected}")]
    Length {
        field: &'static str,
        expected: usize,
        got: usize,
    },
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Reduction(#[from] ReductionError),
    #[error(transparent)]
    Green(#[from] GreenError),
    #[error("evaluating r{index} at t = {t}: {source}")]
    Eval {
        index: usize,
        t: f64,
        source: EvalError,
    },
}

#[derive(Debug, Clone)]
pub struct Problem {
    pub n: usize,
    pub a: Vec<f64>,
    pub r: Vec<Expression>,
    pub t0: f64,
}

impl Problem {
    pub fn new(a: Vec<f64>, r: Vec<Expression>, t0: f64) -> Result<Self, ProblemError> {
        let n = a.len();
        if n < 2 {
            return Err(ProblemError::Order(n));
        }
        if r.len() != n {
            return Err(ProblemError::Length {
                field: "r",
                expected: n,
                got: r.len(),
            });
        }
        Ok(Problem { n, a, r, t0 })
    }

    /// Convenience constructor from expression sources.
    pub fn from_sources(
        a: &[f64],
        r: &[&str],
        t0: f64,
    ) -> Result<Self, Box<dyn std::error::Error>> {
        let r = r
            .iter()
            .map(|s| Expression::parse(s))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Problem::new(a.to_vec(), r, t0)?)
    }

    pub fn unperturbed(a: &[f64], t0: f64) -> Self {
        Problem {
            n: a.len(),
            a: a.to_vec(),
            r: vec![Expression::zero(); a.len()],
            t0,
        }
    }

    pub fn is_unperturbed(&self) -> bool {
        self.r.iter().all(Expression::is_identically_zero)
    }

    pub fn r_values(&self, t: f64) -> Result<Vec<f64>, ProblemError> {
        let mut out = vec![0.0; self.n];
        self.r_values_into(t, &mut out)?;
        Ok(out)
    }

    pub fn r_values_into(&self, t: f64, out: &mut [f64]) -> Result<(), ProblemError> {
        for (i, (e, o)) in self.r.iter().zip(out.iter_mut()).enumerate() {
            *o = e.eval(t).map_err(|source| ProblemError::Eval {
                index: i,
                t,
                source,
            })?;
        }
        Ok(())
    }

    /// `r` at `t`, with evaluation failures mapped to NaN so that quadrature
    /// callbacks stay infallible; callers check finiteness of the result.
    pub fn r_values_lossy(&self, t: f64) -> Vec<f64> {
        self.r
            .iter()
            .map(|e| e.eval(t).unwrap_or(f64::NAN))
            .collect()
    }

    /// `|sum_l mu^l r_l(s)|`, the forcing mass of the envelopes.
    pub fn forcing_mass(&self, mu: f64, s: f64) -> f64 {
        let r = self.r_values_lossy(s);
        r.iter()
            .enumerate()
            .map(|(l, v)| mu.powi(l as i32) * v)
            .sum::<f64>()
            .abs()
    }

    pub fn spectrum(&self) -> Result<Spectrum, ProblemError> {
        Ok(find_roots(&self.a)?)
    }

    pub fn omega_table(&self) -> Result<OmegaTable, ProblemError> {
        Ok(build_reduced_rhs(
            self.n,
            Param::Value(&self.a),
            Param::Symbolic,
        )?)
    }
}

/// Everything tied to one root `mu = lambda_i`.
#[derive(Debug, Clone)]
pub struct RootSystem {
    /// 1-based root index.
    pub index: usize,
    pub mu: f64,
    pub shifted: ShiftedSpectrum,
    pub kernel: GreenKernel,
    pub rhs: CompiledRhs,
    /// `b_0..b_{n-2}` of the reduced linear part.
    pub linear: Vec<f64>,
    /// `pi_i = prod_{j != i} (lambda_j - lambda_i)`.
    pub pi: f64,
}

impl RootSystem {
    pub fn build(
        problem: &Problem,
        spectrum: &Spectrum,
        table: &OmegaTable,
        index: usize,
    ) -> Result<Self, ProblemError> {
        let mu = spectrum.lambda[index - 1];
        let shifted = shift_spectrum(spectrum, index);
        let kernel = build_kernel(&shifted)?;
        Ok(RootSystem {
            index,
            mu,
            shifted,
            kernel,
            rhs: table.compile(mu, None),
            linear: reduced_linear_coefficients(&problem.a, mu),
            pi: root_gap_product(spectrum, index),
        })
    }

    /// Jet length `n - 1` (z, z', ..., z^(n-2)).
    pub fn jet_len(&self) -> usize {
        self.shifted.dim()
    }
}

/// All `n` root systems of a problem, in root order.
pub fn root_systems(
    problem: &Problem,
) -> Result<(Spectrum, OmegaTable, Vec<RootSystem>), ProblemError> {
    let spectrum = problem.spectrum()?;
    let table = problem.omega_table()?;
    let systems = (1..=problem.n)
        .map(|i| RootSystem::build(problem, &spectrum, &table, i))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((spectrum, table, systems))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn e1_root_systems() {
        let p = Problem::from_sources(&[-6.0, 11.0, -6.0], &["(1+t)^(-3)", "0", "0"], 0.0).unwrap();
        let (s, _, systems) = root_systems(&p).unwrap();
        assert_eq!(s.lambda.len(), 3);
        assert_eq!(systems[1].pi, -1.0);
        for sys in &systems {
            // the kernel inverts exactly the reduced linear part
            let op = sys.kernel.operator();
            for (x, y) in op.iter().zip(&sys.linear) {
                assert!((x - y).abs() < 1e-10);
            }
        }
        assert_eq!(p.r_values(1.0).unwrap(), vec![0.125, 0.0, 0.0]);
        assert!(!p.is_unperturbed());
    }

    #[test]
    fn length_mismatch() {
        let err = Problem::new(vec![1.0, 2.0, 3.0], vec![Expression::zero(); 2], 0.0).unwrap_err();
        assert!(err.to_string().contains("`r`"));
    }
}
