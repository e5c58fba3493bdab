//! Picard iteration for `z = Tz`, where
//! `(Tz)^(j)(t) = int d^j g/dt^j (t, s) P(s, z(s), ..., z^(n-2)(s)) ds`.
//!
//! Every kernel term is a one-sided exponential, so each application of `T`
//! reduces to recursions over the panels of a Chebyshev-Lobatto grid:
//! forward for decaying-forward terms, backward from `T_max` for the others,
//! with Gauss-Legendre quadrature inside each panel. Beyond `T_max` the tail
//! model is `z = 0`, so only `Omega_0` remains there and is integrated
//! separately on the half line.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::chebyshev::ChebyshevGrid;
use crate::green::Side;
use crate::problem::{Problem, ProblemError, RootSystem};
use crate::quadrature::{gauss_legendre, integrate_to_infinity, Tolerance};

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("iterate left the ball D_eta at iteration {iteration}: norm {norm:e} > eta = {eta}")]
    InvarianceViolated {
        iteration: usize,
        norm: f64,
        eta: f64,
    },
    #[error("contraction ratio >= 1 for 3 consecutive iterations (last ratios {ratios:?})")]
    DivergenceDetected { iteration: usize, ratios: Vec<f64> },
    #[error("no convergence after {iterations} iterations (last step {last_step:e})")]
    MaxIterations { iterations: usize, last_step: f64 },
    #[error("non-finite value in the right-hand side at t = {t}")]
    NonFinite { t: f64 },
    #[error("invalid solver options: {0}")]
    Options(String),
    #[error(transparent)]
    Problem(#[from] ProblemError),
}

#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    pub t_max: f64,
    pub grid_points: usize,
    pub tol: f64,
    pub eta: f64,
    pub max_iter: usize,
    /// Gauss-Legendre points per panel.
    pub panel_order: usize,
}

impl SolverOptions {
    pub fn new(t_max: f64) -> Self {
        SolverOptions {
            t_max,
            grid_points: 128,
            tol: 1e-10,
            eta: 0.5,
            max_iter: 200,
            panel_order: 12,
        }
    }
}

/// Sampled `z, z', ..., z^(n-2)` on a Chebyshev grid; zero beyond the grid.
#[derive(Debug, Clone)]
pub struct IterateGrid {
    pub grid: ChebyshevGrid,
    /// `values[j][k] = z^(j)(nodes[k])`.
    pub values: Vec<Vec<f64>>,
    pub norm0: f64,
    /// Slowest kernel rate, used to bound what lies beyond the grid.
    pub tail_rate: f64,
}

impl IterateGrid {
    pub fn zero(grid: ChebyshevGrid, jet: usize, tail_rate: f64) -> Self {
        let values = vec![vec![0.0; grid.len()]; jet];
        IterateGrid {
            grid,
            values,
            norm0: 0.0,
            tail_rate,
        }
    }

    pub fn from_values(grid: ChebyshevGrid, values: Vec<Vec<f64>>, tail_rate: f64) -> Self {
        let norm0 = norm0(&values);
        IterateGrid {
            grid,
            values,
            norm0,
            tail_rate,
        }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.grid.nodes
    }

    pub fn jet_len(&self) -> usize {
        self.values.len()
    }

    /// Jet at node `k`.
    pub fn jet_at_node(&self, k: usize) -> Vec<f64> {
        self.values.iter().map(|v| v[k]).collect()
    }

    /// Interpolated jet; the tail model (zero) outside the grid.
    pub fn jet(&self, t: f64) -> Vec<f64> {
        if !self.grid.contains(t) {
            return vec![0.0; self.jet_len()];
        }
        self.values
            .iter()
            .map(|v| self.grid.interpolate(v, t))
            .collect()
    }

    /// `sup_t sum_j |z^(j)(t) - w^(j)(t)|` over the nodes.
    pub fn distance(&self, other: &IterateGrid) -> f64 {
        (0..self.grid.len())
            .map(|k| {
                self.values
                    .iter()
                    .zip(&other.values)
                    .map(|(a, b)| (a[k] - b[k]).abs())
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }
}

/// `||z||_0` over the nodes.
pub fn norm0(values: &[Vec<f64>]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    (0..values[0].len())
        .map(|k| values.iter().map(|v| v[k].abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

struct TermData {
    rate: f64,
    weight: f64,
    side: Side,
    /// `e^{-|rate| h_k}` per panel.
    decay: Vec<f64>,
    /// Quadrature weight times the exponential factor to the panel's far end.
    factors: Vec<f64>,
    /// `int_{T}^inf e^{rate (T - s)} Omega_0(s) ds` for backward terms.
    tail: f64,
}

/// Everything about one `(problem, root)` pair that does not change between
/// Picard iterations.
pub struct Discretization {
    pub system: RootSystem,
    pub grid: ChebyshevGrid,
    pub options: SolverOptions,
    panel_order: usize,
    quad_points: Vec<f64>,
    interp: DMatrix<f64>,
    /// Per nonzero Omega term: exponents and coefficient at every quad point.
    coeff_quad: Vec<(Vec<u16>, Vec<f64>)>,
    coeff_nodes: Vec<(Vec<u16>, Vec<f64>)>,
    terms: Vec<TermData>,
    /// `sum_{|alpha| = k} |Omega_alpha|` at `T_max`, for the tail estimate.
    mass_at_end: Vec<f64>,
    tail_error: f64,
}

fn eval_terms(coeffs: &[(Vec<u16>, Vec<f64>)], q: usize, jet: &[f64]) -> f64 {
    coeffs
        .iter()
        .map(|(alpha, c)| {
            alpha.iter().zip(jet).fold(
                c[q],
                |acc, (&e, z)| if e == 0 { acc } else { acc * z.powi(e as i32) },
            )
        })
        .sum()
}

impl Discretization {
    pub fn new(
        problem: &Problem,
        system: RootSystem,
        options: SolverOptions,
    ) -> Result<Self, SolverError> {
        if options.grid_points < 16 {
            return Err(SolverError::Options(
                "grid_points must be at least 16".into(),
            ));
        }
        if !(options.t_max > problem.t0) {
            return Err(SolverError::Options("t_max must exceed t0".into()));
        }
        if !(options.eta > 0.0 && options.eta < 1.0) {
            return Err(SolverError::Options("eta must lie in ]0, 1[".into()));
        }
        if !(options.tol > 0.0) {
            return Err(SolverError::Options("tol must be positive".into()));
        }
        let grid = ChebyshevGrid::new(problem.t0, options.t_max, options.grid_points);
        let (gx, gw) = gauss_legendre(options.panel_order);
        let q = options.panel_order;
        let panels = grid.len() - 1;
        let mut quad_points = Vec::with_capacity(panels * q);
        let mut quad_weights = Vec::with_capacity(panels * q);
        for k in 0..panels {
            let (a, b) = (grid.nodes[k], grid.nodes[k + 1]);
            let half = 0.5 * (b - a);
            for (x, w) in gx.iter().zip(&gw) {
                quad_points.push(a + half * (x + 1.0));
                quad_weights.push(half * w);
            }
        }
        let m = quad_points.len();
        let mut interp = DMatrix::<f64>::zeros(m, grid.len());
        for (row, &s) in quad_points.iter().enumerate() {
            for (col, v) in grid.row(s).into_iter().enumerate() {
                interp[(row, col)] = v;
            }
        }

        let rvals_at = |t: f64| -> Result<Vec<f64>, SolverError> {
            let r = problem.r_values(t)?;
            if r.iter().any(|v| !v.is_finite()) {
                return Err(SolverError::NonFinite { t });
            }
            Ok(r)
        };
        let r_quad = quad_points
            .iter()
            .map(|&s| rvals_at(s))
            .collect::<Result<Vec<_>, _>>()?;
        let r_nodes = grid
            .nodes
            .iter()
            .map(|&s| rvals_at(s))
            .collect::<Result<Vec<_>, _>>()?;
        let sample = |rs: &[Vec<f64>]| -> Vec<(Vec<u16>, Vec<f64>)> {
            system
                .rhs
                .terms
                .iter()
                .map(|term| {
                    (
                        term.alpha.clone(),
                        rs.iter().map(|r| term.coefficient(r)).collect::<Vec<f64>>(),
                    )
                })
                .filter(|(_, c)| c.iter().any(|v| *v != 0.0))
                .collect()
        };
        let coeff_quad = sample(&r_quad);
        let coeff_nodes = sample(&r_nodes);

        let t_end = options.t_max;
        let rhs = &system.rhs;
        let mut tail_error = 0.0;
        let terms = system
            .kernel
            .terms
            .iter()
            .map(|term| {
                let rate = term.rate;
                let decay = (0..panels)
                    .map(|k| (-(rate.abs()) * (grid.nodes[k + 1] - grid.nodes[k])).exp())
                    .collect();
                let factors = (0..m)
                    .map(|p| {
                        let panel = p / q;
                        let anchor = match term.side {
                            Side::Forward => grid.nodes[panel + 1],
                            Side::Backward => grid.nodes[panel],
                        };
                        quad_weights[p] * (rate * (anchor - quad_points[p])).exp()
                    })
                    .collect();
                let tail = if term.side == Side::Backward {
                    let res = integrate_to_infinity(
                        |s| {
                            rate_weighted(rate, t_end, s)
                                * rhs.omega_zero(&problem.r_values_lossy(s))
                        },
                        t_end,
                        rate,
                        Tolerance::new(1e-16, 1e-13),
                    );
                    tail_error += term.weight.abs() * res.error;
                    if res.value.is_finite() {
                        res.value
                    } else {
                        f64::NAN
                    }
                } else {
                    0.0
                };
                TermData {
                    rate,
                    weight: term.weight,
                    side: term.side,
                    decay,
                    factors,
                    tail,
                }
            })
            .collect::<Vec<_>>();
        if terms.iter().any(|t| !t.tail.is_finite()) {
            return Err(SolverError::NonFinite { t: t_end });
        }
        let mass_at_end = rhs.mass_by_degree(r_nodes.last().unwrap());
        Ok(Discretization {
            system,
            grid,
            options,
            panel_order: q,
            quad_points,
            interp,
            coeff_quad,
            coeff_nodes,
            terms,
            mass_at_end,
            tail_error,
        })
    }

    pub fn jet_len(&self) -> usize {
        self.system.jet_len()
    }

    pub fn zero(&self) -> IterateGrid {
        IterateGrid::zero(
            self.grid.clone(),
            self.jet_len(),
            self.system.kernel.slowest_rate(),
        )
    }

    /// Right-hand side `P` at every quad point for the iterate `z`.
    fn rhs_at_quad(&self, z: &IterateGrid) -> Vec<f64> {
        let d = self.jet_len();
        let jets: Vec<DVector<f64>> = z
            .values
            .iter()
            .map(|v| &self.interp * DVector::from_column_slice(v))
            .collect();
        let mut jet = vec![0.0; d];
        (0..self.quad_points.len())
            .map(|p| {
                for j in 0..d {
                    jet[j] = jets[j][p];
                }
                eval_terms(&self.coeff_quad, p, &jet)
            })
            .collect()
    }

    /// `P` at node `k` for the iterate `z`.
    pub fn rhs_at_node(&self, z: &IterateGrid, k: usize) -> f64 {
        eval_terms(&self.coeff_nodes, k, &z.jet_at_node(k))
    }

    /// The one-sided exponential integrals `I_l(t_k)` of `P[z]`.
    fn term_integrals(&self, z: &IterateGrid) -> Vec<Vec<f64>> {
        let p = self.rhs_at_quad(z);
        let q = self.panel_order;
        let nodes = self.grid.len();
        self.terms
            .iter()
            .map(|term| {
                let mut out = vec![0.0; nodes];
                let panel_sum = |k: usize| -> f64 {
                    (k * q..(k + 1) * q)
                        .map(|i| term.factors[i] * p[i])
                        .sum::<f64>()
                };
                match term.side {
                    Side::Forward => {
                        for k in 0..nodes - 1 {
                            out[k + 1] = term.decay[k] * out[k] + panel_sum(k);
                        }
                    }
                    Side::Backward => {
                        out[nodes - 1] = term.tail;
                        for k in (0..nodes - 1).rev() {
                            out[k] = term.decay[k] * out[k + 1] + panel_sum(k);
                        }
                    }
                }
                out
            })
            .collect()
    }

    fn combine(&self, integrals: &[Vec<f64>], j: usize) -> Vec<f64> {
        let nodes = self.grid.len();
        let mut out = vec![0.0; nodes];
        for (term, i) in self.terms.iter().zip(integrals) {
            let c = term.weight * term.rate.powi(j as i32);
            for k in 0..nodes {
                out[k] += c * i[k];
            }
        }
        out
    }

    /// One application of `T`.
    pub fn apply_t(&self, z: &IterateGrid) -> IterateGrid {
        let integrals = self.term_integrals(z);
        let values = (0..self.jet_len())
            .map(|j| self.combine(&integrals, j))
            .collect();
        IterateGrid::from_values(self.grid.clone(), values, z.tail_rate)
    }

    /// Pointwise residual of the reduced equation for `w = Tz` at interior
    /// nodes, with `w^(n-1)` taken from the analytic derivative of the
    /// integral form (kernel jump `+1` times `P[z]`).
    pub fn ode_residual(&self, z: &IterateGrid) -> Vec<(f64, f64)> {
        let d = self.jet_len();
        let integrals = self.term_integrals(z);
        let top = self.combine(&integrals, d);
        let w = self.apply_t(z);
        let b = &self.system.linear;
        (1..self.grid.len() - 1)
            .map(|k| {
                let highest = top[k] + self.rhs_at_node(z, k);
                let lin: f64 = (0..d).map(|i| b[i] * w.values[i][k]).sum();
                (self.grid.nodes[k], highest + lin - self.rhs_at_node(&w, k))
            })
            .collect()
    }

    /// Same residual with `z^(n-1)` from spectral differentiation of the
    /// grid values instead of the kernel; an independent consistency check.
    pub fn spectral_ode_residual(&self, z: &IterateGrid) -> Vec<(f64, f64)> {
        let d = self.jet_len();
        let top = self.grid.differentiate(&z.values[d - 1]);
        let b = &self.system.linear;
        (1..self.grid.len() - 1)
            .map(|k| {
                let lin: f64 = (0..d).map(|i| b[i] * z.values[i][k]).sum();
                (self.grid.nodes[k], top[k] + lin - self.rhs_at_node(z, k))
            })
            .collect()
    }

    /// Bound on what the `z = 0` tail model neglects: nonlinear forcing beyond
    /// `T_max`, scaled by the kernel's derivative weights, plus the error of
    /// the half-line integrals of `Omega_0`.
    pub fn tail_bound(&self, z: &IterateGrid) -> f64 {
        let last = z.grid.len() - 1;
        let zmax: f64 = z.values.iter().map(|v| v[last].abs()).sum();
        let d = self.jet_len();
        let kernel_weight: f64 = self
            .terms
            .iter()
            .filter(|t| t.side == Side::Backward)
            .map(|t| {
                t.weight.abs() * (0..d).map(|j| t.rate.abs().powi(j as i32)).sum::<f64>()
                    / t.rate.abs()
            })
            .sum();
        let forcing: f64 = self
            .mass_at_end
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, m)| m * zmax.powi(k as i32))
            .sum();
        kernel_weight * forcing + self.tail_error
    }
}

fn rate_weighted(rate: f64, anchor: f64, s: f64) -> f64 {
    (rate * (anchor - s)).exp()
}

#[derive(Debug, Clone)]
pub struct ContractionCertificate {
    pub index: usize,
    pub mu: f64,
    pub eta: f64,
    /// Whether `eta < 1/n`, the smaller ball used for the sharper asymptotics.
    pub eta_below_inverse_order: bool,
    pub steps: Vec<f64>,
    pub ratios: Vec<f64>,
    pub norms: Vec<f64>,
    /// `||Tz - z||_0` for the returned grid.
    pub final_residual: f64,
    pub iterations: usize,
    pub tail_bound: f64,
    pub converged: bool,
    pub retried: bool,
}

impl ContractionCertificate {
    pub fn max_ratio(&self) -> f64 {
        self.ratios.iter().copied().fold(0.0, f64::max)
    }

    pub fn is_valid(&self, tol: f64) -> bool {
        self.converged && self.ratios.iter().all(|r| *r < 1.0) && self.final_residual <= tol
    }

    pub fn render(&self) -> String {
        use std::fmt::Write;
        let mut s = String::new();
        let _ = writeln!(s, "root_index = {}", self.index);
        let _ = writeln!(s, "mu = {:?}", self.mu);
        let _ = writeln!(s, "eta = {:?}", self.eta);
        let _ = writeln!(
            s,
            "eta_below_inverse_order = {}",
            self.eta_below_inverse_order
        );
        let _ = writeln!(s, "retried_with_larger_eta = {}", self.retried);
        let _ = writeln!(s, "converged = {}", self.converged);
        let _ = writeln!(s, "iterations = {}", self.iterations);
        let _ = writeln!(s, "max_ratio = {:?}", self.max_ratio());
        let _ = writeln!(s, "final_residual = {:?}", self.final_residual);
        let _ = writeln!(s, "tail_bound = {:?}", self.tail_bound);
        let _ = writeln!(s, "# iteration, step, ratio, norm");
        for (m, step) in self.steps.iter().enumerate() {
            let ratio = if m == 0 { f64::NAN } else { self.ratios[m - 1] };
            let _ = writeln!(s, "{}, {:?}, {:?}, {:?}", m + 1, step, ratio, self.norms[m]);
        }
        s
    }
}

/// Picard iteration from `omega_0 = 0` with stopping rule
/// `step < tol (1 - L) / L` on the measured ratio `L`.
pub fn picard_solve(
    disc: &Discretization,
    eta: f64,
) -> Result<(IterateGrid, ContractionCertificate), SolverError> {
    let opts = disc.options;
    let n = disc.system.rhs.n;
    let mut current = disc.zero();
    let mut steps = Vec::new();
    let mut ratios = Vec::new();
    let mut norms = Vec::new();
    let mut above_one = 0;
    for iteration in 1..=opts.max_iter {
        let next = disc.apply_t(&current);
        if !next.norm0.is_finite() {
            return Err(SolverError::NonFinite { t: f64::NAN });
        }
        if next.norm0 > eta {
            return Err(SolverError::InvarianceViolated {
                iteration,
                norm: next.norm0,
                eta,
            });
        }
        let step = next.distance(&current);
        steps.push(step);
        norms.push(next.norm0);
        let mut done = step == 0.0 || step <= 64.0 * f64::EPSILON * next.norm0.max(1e-300);
        if let Some(prev) = steps.iter().rev().nth(1).copied() {
            let ratio = if prev > 0.0 { step / prev } else { 0.0 };
            ratios.push(ratio);
            if ratio >= 1.0 && !done {
                above_one += 1;
                if above_one >= 3 {
                    return Err(SolverError::DivergenceDetected {
                        iteration,
                        ratios: ratios.iter().rev().take(3).rev().copied().collect(),
                    });
                }
            } else {
                above_one = 0;
            }
            if ratio < 1.0 && ratio > 0.0 && step <= opts.tol * (1.0 - ratio) / ratio {
                done = true;
            }
        }
        current = next;
        if done {
            let check = disc.apply_t(&current);
            let final_residual = check.distance(&current);
            let tail_bound = disc.tail_bound(&current);
            let cert = ContractionCertificate {
                index: disc.system.index,
                mu: disc.system.mu,
                eta,
                eta_below_inverse_order: eta < 1.0 / n as f64,
                steps,
                ratios,
                norms,
                final_residual,
                iterations: iteration,
                tail_bound,
                converged: true,
                retried: false,
            };
            return Ok((current, cert));
        }
    }
    Err(SolverError::MaxIterations {
        iterations: opts.max_iter,
        last_step: steps.last().copied().unwrap_or(f64::NAN),
    })
}

/// `picard_solve` at the configured eta, retrying once at `eta = 0.9` if the
/// iterates leave the smaller ball.
pub fn solve_with_retry(
    disc: &Discretization,
) -> Result<(IterateGrid, ContractionCertificate), SolverError> {
    let eta = disc.options.eta;
    match picard_solve(disc, eta) {
        Err(SolverError::InvarianceViolated { .. }) if eta < 0.9 => {
            let (z, mut cert) = picard_solve(disc, 0.9)?;
            cert.retried = true;
            Ok((z, cert))
        }
        other => other,
    }
}

/// Convenience: build the discretization and solve.
pub fn solve_root(
    problem: &Problem,
    system: RootSystem,
    options: SolverOptions,
) -> Result<(Discretization, IterateGrid, ContractionCertificate), SolverError> {
    let disc = Discretization::new(problem, system, options)?;
    let (z, cert) = solve_with_retry(&disc)?;
    Ok((disc, z, cert))
}
