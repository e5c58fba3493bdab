//! Fundamental system `y_i = exp(lambda_i (t - t0) + int z_i)`, derivative
//! ratios, Wronskian asymptote, envelope checks and the refined estimate.
//! Everything is kept in log space: only ratios `y^(j)/y` are ever formed.

use nalgebra::DMatrix;
use thiserror::Error;

use crate::problem::{Problem, ProblemError, RootSystem};
use crate::quadrature::{gauss_legendre, integrate, integrate_to_infinity, Tolerance};
use crate::reduction::{build_derivative_polynomials, DerivativePolynomials};
use crate::solver::IterateGrid;
use crate::spectral::{vandermonde_product, Spectrum};

#[derive(Debug, Error)]
pub enum AsymptoticsError {
    #[error("beta = {beta} outside the admissible interval {interval} for root {index}")]
    BetaOutOfRange {
        index: usize,
        beta: f64,
        interval: String,
    },
    #[error("envelope underflows in the diagnostic window near t = {t}")]
    EnvelopeUnderflow { t: f64 },
    #[error("expected {expected} solutions, got {got}")]
    MissingSolve { expected: usize, got: usize },
    #[error("window [{0}, {1}] is not inside the solution grid")]
    Window(f64, f64),
    #[error(transparent)]
    Problem(#[from] ProblemError),
}

/// Admissible `beta` interval for root `i` as `(low, high, low_closed, high_closed)`.
pub fn beta_interval(spectrum: &Spectrum, i: usize) -> (f64, f64, bool, bool) {
    let l = &spectrum.lambda;
    let n = l.len();
    if i == n {
        // closed right endpoint gamma_{n-1} = lambda_{n-1} - lambda_n
        (0.0, l[n - 2] - l[n - 1], false, true)
    } else {
        (l[i] - l[i - 1], 0.0, true, false)
    }
}

pub fn beta_midpoint(spectrum: &Spectrum, i: usize) -> f64 {
    let (a, b, _, _) = beta_interval(spectrum, i);
    0.5 * (a + b)
}

fn check_beta(spectrum: &Spectrum, i: usize, beta: f64) -> Result<(), AsymptoticsError> {
    let (lo, hi, lc, hc) = beta_interval(spectrum, i);
    let above = if lc { beta >= lo } else { beta > lo };
    let below = if hc { beta <= hi } else { beta < hi };
    if above && below && beta.is_finite() {
        Ok(())
    } else {
        Err(AsymptoticsError::BetaOutOfRange {
            index: i,
            beta,
            interval: format!(
                "{}{lo}, {hi}{}",
                if lc { '[' } else { ']' },
                if hc { ']' } else { '[' }
            ),
        })
    }
}

/// The case integral `int e^{-beta (t - s)} |sum_l lambda_i^l r_l(s)| ds` over
/// `(t, inf)` for `i = 1`, `(t0, inf)` for middle roots and `(t0, t)` for `i = n`.
pub fn envelope(
    problem: &Problem,
    spectrum: &Spectrum,
    i: usize,
    beta: f64,
    t: f64,
    tol: Tolerance,
) -> Result<f64, AsymptoticsError> {
    check_beta(spectrum, i, beta)?;
    if problem.is_unperturbed() {
        return Ok(0.0);
    }
    let n = spectrum.lambda.len();
    let mu = spectrum.lambda[i - 1];
    let f = |s: f64| (-beta * (t - s)).exp() * problem.forcing_mass(mu, s);
    let t0 = problem.t0;
    let value = if i == n {
        integrate(f, t0, t, tol).value
    } else {
        let head = if i == 1 {
            0.0
        } else {
            integrate(f, t0, t, tol).value
        };
        head + integrate_to_infinity(f, t, -beta, tol).value
    };
    Ok(value)
}

#[derive(Debug, Clone)]
pub struct EnvelopeCheck {
    pub i: usize,
    pub beta: f64,
    pub window: (f64, f64),
    pub extended: (f64, f64),
    /// `sup sum_j |z^(j)| / envelope` on the window and on the extended window.
    pub sup_window: f64,
    pub sup_extended: f64,
    /// Same sups for each derivative order separately.
    pub per_order_window: Vec<f64>,
    pub per_order_extended: Vec<f64>,
    pub samples: Vec<(f64, f64)>,
    pub pass: bool,
}

impl EnvelopeCheck {
    pub fn growth(&self) -> f64 {
        if self.sup_window == 0.0 {
            if self.sup_extended == 0.0 {
                1.0
            } else {
                f64::INFINITY
            }
        } else {
            self.sup_extended / self.sup_window
        }
    }
}

/// Sup of `sum_j |z^(j)| / envelope` over grid nodes in `window` and in the
/// window with its right end doubled; pass if the sup is finite and grows by
/// less than 3x.
pub fn check_envelope(
    problem: &Problem,
    spectrum: &Spectrum,
    z: &IterateGrid,
    i: usize,
    beta: f64,
    window: (f64, f64),
    tol: Tolerance,
) -> Result<EnvelopeCheck, AsymptoticsError> {
    check_beta(spectrum, i, beta)?;
    let extended = (window.0, 2.0 * window.1);
    if window.0 < z.grid.start()
        || extended.1 > z.grid.end() * (1.0 + 1e-12)
        || window.1 <= window.0
    {
        return Err(AsymptoticsError::Window(extended.0, extended.1));
    }
    let d = z.jet_len();
    let mut samples = Vec::new();
    let mut per_window = vec![0.0f64; d];
    let mut per_ext = vec![0.0f64; d];
    let (mut sup_w, mut sup_e) = (0.0f64, 0.0f64);
    for (k, &t) in z.nodes().iter().enumerate() {
        if t < extended.0 || t > extended.1 {
            continue;
        }
        let jet: Vec<f64> = z.values.iter().map(|v| v[k].abs()).collect();
        let total: f64 = jet.iter().sum();
        if total == 0.0 {
            samples.push((t, 0.0));
            continue;
        }
        let env = envelope(problem, spectrum, i, beta, t, tol)?;
        if env < 1e-300 {
            return Err(AsymptoticsError::EnvelopeUnderflow { t });
        }
        let ratio = total / env;
        samples.push((t, ratio));
        sup_e = sup_e.max(ratio);
        for j in 0..d {
            per_ext[j] = per_ext[j].max(jet[j] / env);
        }
        if t <= window.1 {
            sup_w = sup_w.max(ratio);
            for j in 0..d {
                per_window[j] = per_window[j].max(jet[j] / env);
            }
        }
    }
    let mut check = EnvelopeCheck {
        i,
        beta,
        window,
        extended,
        sup_window: sup_w,
        sup_extended: sup_e,
        per_order_window: per_window,
        per_order_extended: per_ext,
        samples,
        pass: false,
    };
    check.pass = sup_e.is_finite() && check.growth() < 3.0;
    Ok(check)
}

/// Reconstructed solutions `y_1..y_n`.
#[derive(Debug, Clone)]
pub struct FundamentalSystem {
    pub lambda: Vec<f64>,
    pub t0: f64,
    pub solutions: Vec<IterateGrid>,
    /// `int_{t0}^{t_k} z_i` at every node of solution `i`.
    pub cumulative: Vec<Vec<f64>>,
    pub polys: DerivativePolynomials,
    gl: (Vec<f64>, Vec<f64>),
}

pub fn build_fundamental_system(
    spectrum: &Spectrum,
    t0: f64,
    solutions: Vec<IterateGrid>,
) -> Result<FundamentalSystem, AsymptoticsError> {
    let n = spectrum.lambda.len();
    if solutions.len() != n {
        return Err(AsymptoticsError::MissingSolve {
            expected: n,
            got: solutions.len(),
        });
    }
    let polys = build_derivative_polynomials(n).map_err(ProblemError::from)?;
    let gl = gauss_legendre(16);
    let cumulative = solutions
        .iter()
        .map(|z| {
            let nodes = z.nodes();
            let mut acc = vec![0.0; nodes.len()];
            for k in 0..nodes.len() - 1 {
                acc[k + 1] = acc[k] + panel_integral(z, &gl, nodes[k], nodes[k + 1]);
            }
            acc
        })
        .collect();
    Ok(FundamentalSystem {
        lambda: spectrum.lambda.clone(),
        t0,
        solutions,
        cumulative,
        polys,
        gl,
    })
}

fn panel_integral(z: &IterateGrid, gl: &(Vec<f64>, Vec<f64>), a: f64, b: f64) -> f64 {
    let half = 0.5 * (b - a);
    gl.0.iter()
        .zip(&gl.1)
        .map(|(x, w)| w * half * z.grid.interpolate(&z.values[0], a + half * (x + 1.0)))
        .sum()
}

impl FundamentalSystem {
    pub fn order(&self) -> usize {
        self.lambda.len()
    }

    /// `int_{t0}^t z_i`; zero tail beyond the grid.
    pub fn integral_of_z(&self, i: usize, t: f64) -> f64 {
        let z = &self.solutions[i - 1];
        let nodes = z.nodes();
        if t <= nodes[0] {
            return 0.0;
        }
        let last = nodes.len() - 1;
        if t >= nodes[last] {
            return self.cumulative[i - 1][last];
        }
        let k = nodes.partition_point(|&x| x <= t) - 1;
        self.cumulative[i - 1][k] + panel_integral(z, &self.gl, nodes[k], t)
    }

    pub fn log_y(&self, i: usize, t: f64) -> f64 {
        self.lambda[i - 1] * (t - self.t0) + self.integral_of_z(i, t)
    }

    /// `y_i^(j)/y_i` for `j = 0..n-1`.
    pub fn ratios(&self, i: usize, t: f64) -> Vec<f64> {
        let jet = self.solutions[i - 1].jet(t);
        let mu = self.lambda[i - 1];
        (0..self.order())
            .map(|j| self.polys.ratio(j, mu, &jet))
            .collect()
    }

    /// Initial jet `(y, y', ..., y^(n-1))(t0)` of solution `i`.
    pub fn initial_jet(&self, i: usize) -> Vec<f64> {
        self.ratios(i, self.t0)
    }
}

/// `(W / prod y_i, prod_{k<l} (lambda_l - lambda_k))` at `t`.
pub fn wronskian_diagnostic(fs: &FundamentalSystem, t: f64) -> (f64, f64) {
    let n = fs.order();
    let mut m = DMatrix::<f64>::zeros(n, n);
    for i in 1..=n {
        for (j, r) in fs.ratios(i, t).into_iter().enumerate() {
            m[(j, i - 1)] = r;
        }
    }
    (m.determinant(), vandermonde_product(&fs.lambda))
}

/// Refined estimate in log space:
/// `lambda_i (t - t0) + (1/pi_i) int_{t0}^t F(s) ds`, `F` from the Omega table.
pub fn refined_log_estimate(
    problem: &Problem,
    system: &RootSystem,
    z: &IterateGrid,
    t: f64,
    tol: Tolerance,
) -> f64 {
    let f = |s: f64| system.rhs.evaluate(&problem.r_values_lossy(s), &z.jet(s));
    let integral = integrate(f, problem.t0, t, tol).value;
    system.mu * (t - problem.t0) + integral / system.pi
}

#[derive(Debug, Clone, Copy)]
pub struct RatioLimit {
    pub i: usize,
    pub j: usize,
    pub deviation: f64,
    pub envelope: f64,
    pub pass: bool,
}

/// `|y_i^(j)/y_i - lambda_i^j|` at `t` against `10 x` the envelope there.
pub fn ratio_limits(
    problem: &Problem,
    spectrum: &Spectrum,
    fs: &FundamentalSystem,
    t: f64,
    tol: Tolerance,
) -> Result<Vec<RatioLimit>, AsymptoticsError> {
    let n = fs.order();
    let mut out = Vec::new();
    for i in 1..=n {
        let beta = beta_midpoint(spectrum, i);
        let env = envelope(problem, spectrum, i, beta, t, tol)?;
        let ratios = fs.ratios(i, t);
        let lambda = fs.lambda[i - 1];
        for (j, r) in ratios.iter().enumerate().skip(1) {
            let deviation = (r - lambda.powi(j as i32)).abs();
            out.push(RatioLimit {
                i,
                j,
                deviation,
                envelope: env,
                pass: deviation <= 10.0 * env
                    || deviation < 1e-12 * lambda.abs().powi(j as i32).max(1.0),
            });
        }
    }
    Ok(out)
}
