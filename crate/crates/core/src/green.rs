//! Green kernel of the reduced linear operator `L = d^(n-1) + sum b_i d^i`
//! whose characteristic roots are the shifted spectrum `gamma_1 > ... > gamma_d`
//! (`d = n - 1`).
//!
//! The kernel is a sum of one-sided exponentials `w_l e^{gamma_l (t-s)}`.
//! Each term sits on the side where it decays: negative rates are
//! integrated forward (`s <= t`), positive rates backward (`s >= t`). The
//! weights come from the products `Upsilon_0`, `Upsilon_l` and are
//! normalized at construction so that the `(d-1)`-th derivative jumps by
//! exactly `+1` across `t = s`.

use thiserror::Error;

use crate::spectral::{poly_from_roots, ShiftedSpectrum};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GreenError {
    #[error("degenerate shifted spectrum: {0}")]
    Degenerate(String),
}

/// `Upsilon_0 = prod_{i<j} (y_j - y_i)`; for `ell >= 1` the same product
/// over pairs not involving index `ell` (1-based). Empty products are 1.
pub fn upsilon(values: &[f64], ell: usize) -> f64 {
    let mut p = 1.0;
    for i in 0..values.len() {
        for j in i + 1..values.len() {
            if ell != 0 && (i + 1 == ell || j + 1 == ell) {
                continue;
            }
            p *= values[j] - values[i];
        }
    }
    p
}

/// `(ln |Upsilon_ell|, sign)` accumulated in log space.
pub fn log_upsilon(values: &[f64], ell: usize) -> (f64, f64) {
    let mut log = 0.0;
    let mut sign = 1.0;
    for i in 0..values.len() {
        for j in i + 1..values.len() {
            if ell != 0 && (i + 1 == ell || j + 1 == ell) {
                continue;
            }
            let d = values[j] - values[i];
            log += d.abs().ln();
            if d < 0.0 {
                sign = -sign;
            }
        }
    }
    (log, sign)
}

/// Which side of the diagonal a term is supported on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// `H(t - s)`: contributes for `s <= t`.
    Forward,
    /// `H(s - t)`: contributes for `s > t`.
    Backward,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelTerm {
    pub rate: f64,
    pub weight: f64,
    pub side: Side,
}

#[derive(Debug, Clone)]
pub struct GreenKernel {
    pub gamma: ShiftedSpectrum,
    pub upsilon0: f64,
    /// `G_l = (-1)^l Upsilon_l`, as printed.
    pub printed_weights: Vec<f64>,
    pub terms: Vec<KernelTerm>,
    /// Sign applied after the jump check; `+1` when the Upsilon formula
    /// already gave a unit jump.
    pub jump_sign: f64,
    /// Whether the printed orientation (`e^{-gamma (t-s)}` with the printed
    /// Heaviside split and weights `-G_l / Upsilon_0`) is itself a Green
    /// kernel of `L` with unit jump.
    pub printed_convention_matches: bool,
}

const LOG_SPACE_DIM: usize = 4;

fn coefficient(gamma: &[f64], ell: usize) -> f64 {
    // Upsilon_0 / Upsilon_l = (-1)^{d-l} prod_{m != l} (gamma_l - gamma_m)
    let d = gamma.len();
    let parity = if (d - ell).is_multiple_of(2) {
        1.0
    } else {
        -1.0
    };
    if d > LOG_SPACE_DIM {
        let (l0, s0) = log_upsilon(gamma, 0);
        let (ll, sl) = log_upsilon(gamma, ell);
        parity * s0 * sl * (ll - l0).exp()
    } else {
        parity * upsilon(gamma, ell) / upsilon(gamma, 0)
    }
}

pub fn build_kernel(gamma: &ShiftedSpectrum) -> Result<GreenKernel, GreenError> {
    let g = &gamma.gamma;
    let d = g.len();
    if d == 0 {
        return Err(GreenError::Degenerate("empty spectrum".into()));
    }
    if g.iter().any(|x| *x == 0.0 || !x.is_finite()) {
        return Err(GreenError::Degenerate("zero or non-finite rate".into()));
    }
    if g.windows(2).any(|w| w[0] <= w[1]) {
        return Err(GreenError::Degenerate(
            "rates not strictly decreasing".into(),
        ));
    }
    let upsilon0 = upsilon(g, 0);
    let printed_weights: Vec<f64> = (1..=d)
        .map(|l| if l % 2 == 0 { 1.0 } else { -1.0 } * upsilon(g, l))
        .collect();
    let mut terms: Vec<KernelTerm> = (1..=d)
        .map(|l| {
            let c = coefficient(g, l);
            let rate = g[l - 1];
            if rate < 0.0 {
                KernelTerm {
                    rate,
                    weight: c,
                    side: Side::Forward,
                }
            } else {
                KernelTerm {
                    rate,
                    weight: -c,
                    side: Side::Backward,
                }
            }
        })
        .collect();
    let jump = raw_jump(&terms, d);
    if !jump.is_finite() || (jump.abs() - 1.0).abs() > 1e-8 {
        return Err(GreenError::Degenerate(format!(
            "jump of the highest derivative is {jump}, expected magnitude 1"
        )));
    }
    let jump_sign = jump.signum();
    if jump_sign < 0.0 {
        for t in &mut terms {
            t.weight = -t.weight;
        }
    }
    let printed_convention_matches = printed_is_green(gamma, upsilon0, &printed_weights);
    Ok(GreenKernel {
        gamma: gamma.clone(),
        upsilon0,
        printed_weights,
        terms,
        jump_sign,
        printed_convention_matches,
    })
}

fn raw_jump(terms: &[KernelTerm], d: usize) -> f64 {
    terms
        .iter()
        .map(|t| {
            let v = t.weight * t.rate.powi(d as i32 - 1);
            match t.side {
                Side::Forward => v,
                Side::Backward => -v,
            }
        })
        .sum()
}

/// Check the literal printed kernel against `L` at one point on each side.
fn printed_is_green(gamma: &ShiftedSpectrum, upsilon0: f64, printed: &[f64]) -> bool {
    let g = &gamma.gamma;
    let d = g.len();
    let k = gamma.case_index;
    let terms: Vec<KernelTerm> = (0..d)
        .map(|l| KernelTerm {
            rate: -g[l],
            weight: -printed[l] / upsilon0,
            side: if l + 1 < k {
                Side::Forward
            } else {
                Side::Backward
            },
        })
        .collect();
    let op = poly_from_roots(g);
    let scale = 1.0 + g.iter().map(|x| x.abs()).fold(0.0, f64::max).powi(d as i32);
    let residual = |u: f64| -> f64 {
        let deriv = |j: usize| -> f64 {
            terms
                .iter()
                .filter(|t| match t.side {
                    Side::Forward => u >= 0.0,
                    Side::Backward => u < 0.0,
                })
                .map(|t| t.weight * t.rate.powi(j as i32) * (t.rate * u).exp())
                .sum()
        };
        (0..d).map(|i| op[i] * deriv(i)).sum::<f64>() + deriv(d)
    };
    let ok_residual = residual(0.25).abs() < 1e-9 * scale && residual(-0.25).abs() < 1e-9 * scale;
    let jump = raw_jump(&terms, d);
    ok_residual && (jump - 1.0).abs() < 1e-9
}

impl GreenKernel {
    pub fn dim(&self) -> usize {
        self.terms.len()
    }

    pub fn case_index(&self) -> usize {
        self.gamma.case_index
    }

    /// Whether `term` contributes at offset `u = t - s`. At `u = 0` the
    /// `t > s` side is used.
    pub fn active(term: &KernelTerm, u: f64) -> bool {
        match term.side {
            Side::Forward => u >= 0.0,
            Side::Backward => u < 0.0,
        }
    }

    /// `d^j g / dt^j (t, s)` in closed form.
    pub fn derivative(&self, t: f64, s: f64, j: usize) -> f64 {
        let u = t - s;
        self.terms
            .iter()
            .filter(|term| Self::active(term, u))
            .map(|term| term.weight * term.rate.powi(j as i32) * (term.rate * u).exp())
            .sum()
    }

    pub fn value(&self, t: f64, s: f64) -> f64 {
        self.derivative(t, s, 0)
    }

    /// `sum_j |d^j g/dt^j|` for `j = 0..=max_j`.
    pub fn abs_derivative_sum(&self, t: f64, s: f64, max_j: usize) -> f64 {
        (0..=max_j).map(|j| self.derivative(t, s, j).abs()).sum()
    }

    /// Jump `d^j g(s+, s) - d^j g(s-, s)`.
    pub fn jump(&self, j: usize) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                let v = t.weight * t.rate.powi(j as i32);
                match t.side {
                    Side::Forward => v,
                    Side::Backward => -v,
                }
            })
            .sum()
    }

    /// Coefficients `(b_0..b_{d-1})` of the operator this kernel inverts.
    pub fn operator(&self) -> Vec<f64> {
        poly_from_roots(&self.gamma.gamma)
    }

    /// Slowest decay rate among the terms, `min |gamma_l|`.
    pub fn slowest_rate(&self) -> f64 {
        self.terms
            .iter()
            .map(|t| t.rate.abs())
            .fold(f64::INFINITY, f64::min)
    }

    pub fn has_side(&self, side: Side) -> bool {
        self.terms.iter().any(|t| t.side == side)
    }
}

pub fn kernel_derivative(k: &GreenKernel, t: f64, s: f64, j: usize) -> f64 {
    k.derivative(t, s, j)
}
