//! Numerical evidence for the hypotheses behind the fixed-point argument:
//! the forcing size `R(t)`, the coefficient masses `L_k(t)`, the constant
//! `Phi_1` and the exponentially weighted sups `sigma`.
//!
//! Limits cannot be machine-decided; they are judged on a geometric grid of
//! sample times, and a limit judged that way is at best "pass (numerical)".

use std::fmt;

use crate::green::{GreenKernel, Side};
use crate::problem::{Problem, RootSystem};
use crate::quadrature::{integrate, integrate_to_infinity, Tolerance};
use crate::spectral::ShiftedSpectrum;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    /// Judged from finite samples only.
    PassNumerical,
    Fail,
    Indeterminate,
    /// Not evaluated because a prerequisite failed.
    Suppressed,
}

impl Verdict {
    pub fn is_pass(self) -> bool {
        matches!(self, Verdict::Pass | Verdict::PassNumerical)
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::PassNumerical => "pass (numerical)",
            Verdict::Fail => "fail",
            Verdict::Indeterminate => "indeterminate",
            Verdict::Suppressed => "suppressed",
        })
    }
}

/// A value produced by quadrature, with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub converged: bool,
}

impl Estimate {
    fn exact(value: f64) -> Self {
        Estimate {
            value,
            error: 0.0,
            converged: true,
        }
    }
}

/// Threshold below which a sampled limit counts as zero.
pub const LIMIT_ZERO: f64 = 1e-6;

/// `t0, t0 + 1, t0 + 2, t0 + 4, ...` capped by `t_max` (always included).
pub fn geometric_grid(t0: f64, t_max: f64) -> Vec<f64> {
    let mut out = vec![t0];
    let mut step = 1.0;
    while t0 + step < t_max {
        out.push(t0 + step);
        step *= 2.0;
    }
    if t_max > t0 {
        out.push(t_max);
    }
    out
}

/// Integrate `w(s) f(s)` over `[t0, t]` and `[t, inf)` where `w` is supported
/// forward or backward of `t`. `rate` is the slowest decay rate of the
/// backward part.
fn split_integral<F: Fn(f64) -> f64>(
    f: F,
    t0: f64,
    t: f64,
    forward: bool,
    backward_rate: Option<f64>,
    tol: Tolerance,
) -> Estimate {
    let mut est = Estimate::exact(0.0);
    if forward && t > t0 {
        let r = integrate(&f, t0, t, tol);
        est.value += r.value;
        est.error += r.error;
        est.converged &= r.converged;
    }
    if let Some(rate) = backward_rate {
        let r = integrate_to_infinity(&f, t, rate, tol);
        est.value += r.value;
        est.error += r.error;
        est.converged &= r.converged;
    }
    est.converged &= est.value.is_finite();
    est
}

fn backward_rate(kernel: &GreenKernel) -> Option<f64> {
    kernel
        .terms
        .iter()
        .filter(|t| t.side == Side::Backward)
        .map(|t| t.rate)
        .reduce(f64::min)
}

/// `sum_j |int d^j g/dt^j (t, s) f(s) ds|` over the kernel support.
pub fn kernel_moment<F: Fn(f64) -> f64>(
    kernel: &GreenKernel,
    t0: f64,
    t: f64,
    f: F,
    tol: Tolerance,
) -> Estimate {
    let d = kernel.dim();
    let mut per_term = Vec::with_capacity(kernel.terms.len());
    let mut error = 0.0;
    let mut converged = true;
    for term in &kernel.terms {
        let rate = term.rate;
        let weight = |s: f64| (rate * (t - s)).exp() * f(s);
        let est = match term.side {
            Side::Forward => split_integral(weight, t0, t, true, None, tol),
            Side::Backward => split_integral(weight, t0, t, false, Some(rate), tol),
        };
        error +=
            term.weight.abs() * (0..d).map(|j| rate.abs().powi(j as i32)).sum::<f64>() * est.error;
        converged &= est.converged;
        per_term.push(est.value);
    }
    let value = (0..d)
        .map(|j| {
            kernel
                .terms
                .iter()
                .zip(&per_term)
                .map(|(term, v)| term.weight * term.rate.powi(j as i32) * v)
                .sum::<f64>()
                .abs()
        })
        .sum();
    Estimate {
        value,
        error,
        converged,
    }
}

/// `int [sum_j |d^j g/dt^j (t, s)|] m(s) ds` over the kernel support.
pub fn kernel_mass<F: Fn(f64) -> f64>(
    kernel: &GreenKernel,
    t0: f64,
    t: f64,
    m: F,
    tol: Tolerance,
) -> Estimate {
    let d = kernel.dim();
    let f = |s: f64| kernel.abs_derivative_sum(t, s, d - 1) * m(s);
    split_integral(
        f,
        t0,
        t,
        kernel.has_side(Side::Forward),
        backward_rate(kernel),
        tol,
    )
}

pub fn compute_r(system: &RootSystem, problem: &Problem, t: f64, tol: Tolerance) -> Estimate {
    if problem.is_unperturbed() {
        // Omega_0 vanishes identically, so does every integral of it.
        return Estimate::exact(0.0);
    }
    kernel_moment(
        &system.kernel,
        problem.t0,
        t,
        |s| system.rhs.omega_zero(&problem.r_values_lossy(s)),
        tol,
    )
}

/// `L_k(t)`, `k = 1..=n`.
pub fn compute_l(
    system: &RootSystem,
    problem: &Problem,
    t: f64,
    k: usize,
    tol: Tolerance,
) -> Estimate {
    let has_terms = system
        .rhs
        .terms
        .iter()
        .any(|term| term.degree == k && (term.constant != 0.0 || !problem.is_unperturbed()));
    if !has_terms {
        return Estimate::exact(0.0);
    }
    kernel_mass(
        &system.kernel,
        problem.t0,
        t,
        |s| system.rhs.mass_by_degree(&problem.r_values_lossy(s))[k],
        tol,
    )
}

/// `Phi_1 = |Upsilon_0|^{-1} sum_l |Upsilon_l| sum_{j<n-1} |gamma_l|^j`.
pub fn compute_phi1(gamma: &ShiftedSpectrum) -> f64 {
    let g = &gamma.gamma;
    let u0 = crate::green::upsilon(g, 0).abs();
    (1..=g.len())
        .map(|l| {
            let powers: f64 = (0..g.len()).map(|j| g[l - 1].abs().powi(j as i32)).sum();
            crate::green::upsilon(g, l).abs() * powers
        })
        .sum::<f64>()
        / u0
}

#[derive(Debug, Clone, PartialEq)]
pub struct SigmaEstimate {
    pub gamma: f64,
    /// Largest sampled value of the weighted integral on `[t0, t_max]`.
    pub sampled_sup: f64,
    pub argmax: f64,
    /// Bound for `t > t_max` from the mass observed at and beyond `t_max`.
    pub tail_sup_bound: f64,
    /// `max(sampled_sup, tail_sup_bound)`.
    pub sigma: f64,
    pub certified_to: f64,
    pub converged: bool,
}

/// `sup_t int e^{gamma (t - s)} m(s) ds` with the integral taken on the side
/// where the exponential decays (`s <= t` for `gamma < 0`, `s >= t` for
/// `gamma > 0`), sampled on `t_grid` and refined around the maximizer.
pub fn estimate_sigma<F: Fn(f64) -> f64>(
    gamma: f64,
    m: F,
    t0: f64,
    t_grid: &[f64],
    tol: Tolerance,
) -> SigmaEstimate {
    let integral = |t: f64| -> Estimate {
        let w = |s: f64| (gamma * (t - s)).exp() * m(s);
        if gamma < 0.0 {
            split_integral(w, t0, t, true, None, tol)
        } else {
            split_integral(w, t0, t, false, Some(gamma), tol)
        }
    };
    let mut converged = true;
    let samples: Vec<(f64, f64)> = t_grid
        .iter()
        .map(|&t| {
            let e = integral(t);
            converged &= e.converged;
            (t, e.value)
        })
        .collect();
    let (mut best_idx, mut best) = (0, f64::NEG_INFINITY);
    for (k, (_, v)) in samples.iter().enumerate() {
        if *v > best {
            best = *v;
            best_idx = k;
        }
    }
    let mut argmax = samples[best_idx].0;
    // Golden-section refinement between the neighbours of the sampled peak.
    let lo = samples[best_idx.saturating_sub(1)].0;
    let hi = samples[(best_idx + 1).min(samples.len() - 1)].0;
    if hi > lo {
        let phi = 0.5 * (5f64.sqrt() - 1.0);
        let (mut a, mut b) = (lo, hi);
        let mut c = b - phi * (b - a);
        let mut d = a + phi * (b - a);
        let mut fc = integral(c).value;
        let mut fd = integral(d).value;
        for _ in 0..40 {
            if fc > fd {
                b = d;
                d = c;
                fd = fc;
                c = b - phi * (b - a);
                fc = integral(c).value;
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + phi * (b - a);
                fd = integral(d).value;
            }
            if b - a < 1e-8 * (1.0 + b.abs()) {
                break;
            }
        }
        for (t, v) in [(c, fc), (d, fd)] {
            if v > best {
                best = v;
                argmax = t;
            }
        }
    }
    let t_end = *t_grid.last().unwrap();
    let end_value = samples.last().unwrap().1;
    let span = (t_end - t0).max(1.0);
    let mass_beyond = [0.0, 0.5, 1.0, 3.0, 7.0]
        .iter()
        .map(|f| m(t_end + f * span).abs())
        .fold(0.0, f64::max);
    // For t > t_max the forward integral is a convex combination of its value
    // at t_max and at most `mass / |gamma|`; the backward one is bounded by the latter.
    let tail_sup_bound = if gamma < 0.0 { end_value } else { 0.0 }.max(mass_beyond / gamma.abs());
    converged &= best.is_finite() && tail_sup_bound.is_finite();
    SigmaEstimate {
        gamma,
        sampled_sup: best,
        argmax,
        tail_sup_bound,
        sigma: best.max(tail_sup_bound),
        certified_to: t_end,
        converged,
    }
}

/// One row of the machine-readable report.
#[derive(Debug, Clone, PartialEq)]
pub struct VerdictRow {
    pub hypothesis: String,
    pub quantity: String,
    pub value: f64,
    pub threshold: f64,
    pub verdict: Verdict,
}

#[derive(Debug, Clone)]
pub struct HypothesisReport {
    pub index: usize,
    pub mu: f64,
    pub h1: Verdict,
    pub phi1: f64,
    pub t_grid: Vec<f64>,
    pub r_samples: Vec<(f64, f64)>,
    /// `l_samples[k - 1]` holds `(t, L_k(t))`.
    pub l_samples: Vec<Vec<(f64, f64)>>,
    /// Whether each `L_k` was nonincreasing on the sampled grid.
    pub l_monotone: Vec<bool>,
    pub l_tail_sum: f64,
    pub sigma_r3: Vec<SigmaEstimate>,
    pub sigma_h3: Vec<SigmaEstimate>,
    pub verdicts: Vec<VerdictRow>,
    pub quadrature_converged: bool,
}

impl HypothesisReport {
    pub fn verdict(&self, hypothesis: &str) -> Option<Verdict> {
        let rows: Vec<&VerdictRow> = self
            .verdicts
            .iter()
            .filter(|r| r.hypothesis == hypothesis)
            .collect();
        if rows.is_empty() {
            return None;
        }
        Some(combine(rows.iter().map(|r| r.verdict)))
    }

    pub fn render(&self) -> String {
        use std::fmt::Write;
        let mut s = String::new();
        let _ = writeln!(s, "root {} (mu = {:?})", self.index, self.mu);
        let _ = writeln!(s, "  H1: {}", self.h1);
        if self.h1 != Verdict::Pass {
            return s;
        }
        let _ = writeln!(s, "  Phi1 = {:?}", self.phi1);
        for (t, v) in &self.r_samples {
            let _ = writeln!(s, "  R({t:?}) = {v:?}");
        }
        for (k, samples) in self.l_samples.iter().enumerate() {
            if let Some((t, v)) = samples.last() {
                let _ = writeln!(s, "  L{}({t:?}) = {v:?}", k + 1);
            }
        }
        for sig in &self.sigma_r3 {
            let _ = writeln!(
                s,
                "  sigma(gamma = {:?}) = {:?} (sampled sup at t = {:?}, certified on [t0, {:?}] plus tail bound)",
                sig.gamma, sig.sigma, sig.argmax, sig.certified_to
            );
        }
        for row in &self.verdicts {
            let _ = writeln!(
                s,
                "  {} {}: {:?} vs {:?} -> {}",
                row.hypothesis, row.quantity, row.value, row.threshold, row.verdict
            );
        }
        s
    }
}

fn combine(verdicts: impl Iterator<Item = Verdict>) -> Verdict {
    let mut out = Verdict::Pass;
    for v in verdicts {
        out = match (out, v) {
            (Verdict::Fail, _) | (_, Verdict::Fail) => Verdict::Fail,
            (Verdict::Suppressed, _) | (_, Verdict::Suppressed) => Verdict::Suppressed,
            (Verdict::Indeterminate, _) | (_, Verdict::Indeterminate) => Verdict::Indeterminate,
            (Verdict::PassNumerical, _) | (_, Verdict::PassNumerical) => Verdict::PassNumerical,
            _ => Verdict::Pass,
        };
    }
    out
}

/// Judge `lim_{t->inf} f(t) = 0` from samples.
pub fn judge_zero_limit(samples: &[(f64, f64)], exact_zero: bool) -> Verdict {
    if exact_zero {
        return Verdict::Pass;
    }
    let last = samples.last().map(|s| s.1).unwrap_or(f64::NAN);
    if !last.is_finite() {
        return Verdict::Indeterminate;
    }
    if last < LIMIT_ZERO {
        return Verdict::PassNumerical;
    }
    let tail: Vec<f64> = samples.iter().rev().take(3).map(|s| s.1).collect();
    if tail.windows(2).all(|w| w[0] < w[1]) {
        Verdict::Indeterminate
    } else {
        Verdict::Fail
    }
}

/// Judge `lim f(t) < bound` from samples.
pub fn judge_limit_below(samples: &[(f64, f64)], bound: f64) -> Verdict {
    let tail: Vec<f64> = samples.iter().rev().take(3).map(|s| s.1).collect();
    let last = tail[0];
    if !last.is_finite() {
        return Verdict::Indeterminate;
    }
    let settled = tail.len() < 2 || (tail[0] - tail[1]).abs() <= 0.1 * tail[0].abs().max(1e-300);
    if last < bound {
        if settled || tail.windows(2).all(|w| w[0] <= w[1]) {
            Verdict::PassNumerical
        } else {
            Verdict::Indeterminate
        }
    } else if tail.windows(2).all(|w| w[0] < w[1]) && !settled {
        Verdict::Indeterminate
    } else {
        Verdict::Fail
    }
}

#[derive(Debug, Clone, Copy)]
pub struct HypothesisOptions {
    pub t_max: f64,
    pub tol: Tolerance,
}

impl HypothesisOptions {
    pub fn new(t_max: f64) -> Self {
        HypothesisOptions {
            t_max,
            tol: Tolerance::new(1e-12, 1e-10),
        }
    }
}

/// Report for a failed spectrum: only H1 is decided.
pub fn failed_h1_report(index: usize) -> HypothesisReport {
    HypothesisReport {
        index,
        mu: f64::NAN,
        h1: Verdict::Fail,
        phi1: f64::NAN,
        t_grid: Vec::new(),
        r_samples: Vec::new(),
        l_samples: Vec::new(),
        l_monotone: Vec::new(),
        l_tail_sum: f64::NAN,
        sigma_r3: Vec::new(),
        sigma_h3: Vec::new(),
        verdicts: ["R1", "R2", "R3", "H2", "H3"]
            .iter()
            .map(|h| VerdictRow {
                hypothesis: h.to_string(),
                quantity: "-".into(),
                value: f64::NAN,
                threshold: f64::NAN,
                verdict: Verdict::Suppressed,
            })
            .chain(std::iter::once(VerdictRow {
                hypothesis: "H1".into(),
                quantity: "real simple roots".into(),
                value: 0.0,
                threshold: 1.0,
                verdict: Verdict::Fail,
            }))
            .collect(),
        quadrature_converged: true,
    }
}

/// All hypothesis quantities and verdicts for root `system.index`.
pub fn evaluate_hypotheses(
    problem: &Problem,
    system: &RootSystem,
    opts: HypothesisOptions,
) -> HypothesisReport {
    let t0 = problem.t0;
    let tol = opts.tol;
    let grid = geometric_grid(t0, opts.t_max);
    let n = problem.n;
    let unperturbed = problem.is_unperturbed();
    let mut converged = true;
    let mut track = |e: Estimate| {
        converged &= e.converged;
        e.value
    };

    let r_samples: Vec<(f64, f64)> = grid
        .iter()
        .map(|&t| (t, track(compute_r(system, problem, t, tol))))
        .collect();
    let l_samples: Vec<Vec<(f64, f64)>> = (1..=n)
        .map(|k| {
            grid.iter()
                .map(|&t| (t, track(compute_l(system, problem, t, k, tol))))
                .collect()
        })
        .collect();
    let l_monotone = l_samples
        .iter()
        .map(|s| {
            s.windows(2)
                .all(|w| w[1].1 <= w[0].1 * (1.0 + 1e-9) + 1e-15)
        })
        .collect();
    let tail_sum_samples: Vec<(f64, f64)> = grid
        .iter()
        .enumerate()
        .map(|(idx, &t)| (t, l_samples[1..].iter().map(|s| s[idx].1).sum()))
        .collect();
    let l_tail_sum = tail_sum_samples.last().map(|s| s.1).unwrap_or(0.0);

    // (H2): each r_j alone, then the combined forcing mass.
    let h2_each: Vec<Vec<(f64, f64)>> = (0..n)
        .map(|j| {
            grid.iter()
                .map(|&t| {
                    let v = if problem.r[j].is_identically_zero() {
                        0.0
                    } else {
                        track(kernel_moment(
                            &system.kernel,
                            t0,
                            t,
                            |s| problem.r_values_lossy(s)[j],
                            tol,
                        ))
                    };
                    (t, v)
                })
                .collect()
        })
        .collect();
    let h2_mass: Vec<(f64, f64)> = grid
        .iter()
        .map(|&t| {
            let v = if unperturbed {
                0.0
            } else {
                track(kernel_mass(
                    &system.kernel,
                    t0,
                    t,
                    |s| problem.forcing_mass(system.mu, s),
                    tol,
                ))
            };
            (t, v)
        })
        .collect();

    let phi1 = compute_phi1(&system.shifted);
    let sigma_r3: Vec<SigmaEstimate> = system
        .shifted
        .gamma
        .iter()
        .map(|&g| {
            estimate_sigma(
                g,
                |s| system.rhs.nonconstant_mass(&problem.r_values_lossy(s)),
                t0,
                &grid,
                tol,
            )
        })
        .collect();
    let sigma_h3: Vec<SigmaEstimate> = system
        .shifted
        .gamma
        .iter()
        .map(|&g| {
            estimate_sigma(
                g,
                |s| system.rhs.h_hat(&problem.r_values_lossy(s)).abs(),
                t0,
                &grid,
                tol,
            )
        })
        .collect();
    converged &= sigma_r3.iter().chain(&sigma_h3).all(|s| s.converged);

    let last = |s: &[(f64, f64)]| s.last().map(|x| x.1).unwrap_or(f64::NAN);
    let mut verdicts = vec![
        VerdictRow {
            hypothesis: "H1".into(),
            quantity: "real simple roots".into(),
            value: 1.0,
            threshold: 1.0,
            verdict: Verdict::Pass,
        },
        VerdictRow {
            hypothesis: "R1".into(),
            quantity: "real distinct shifted roots".into(),
            value: system.shifted.dim() as f64,
            threshold: (n - 1) as f64,
            verdict: Verdict::Pass,
        },
        VerdictRow {
            hypothesis: "R2".into(),
            quantity: "lim R".into(),
            value: last(&r_samples),
            threshold: LIMIT_ZERO,
            verdict: judge_zero_limit(&r_samples, unperturbed),
        },
        VerdictRow {
            hypothesis: "R2".into(),
            quantity: "lim L1".into(),
            value: last(&l_samples[0]),
            threshold: LIMIT_ZERO,
            verdict: judge_zero_limit(&l_samples[0], l_samples[0].iter().all(|s| s.1 == 0.0)),
        },
        VerdictRow {
            hypothesis: "R2".into(),
            quantity: "lim sum_{k>=2} L_k".into(),
            value: l_tail_sum,
            threshold: 1.0,
            verdict: judge_limit_below(&tail_sum_samples, 1.0),
        },
    ];
    for sig in &sigma_r3 {
        verdicts.push(sigma_row("R3", sig, phi1));
    }
    for (j, samples) in h2_each.iter().enumerate() {
        verdicts.push(VerdictRow {
            hypothesis: "H2".into(),
            quantity: format!("lim kernel moment of r{j}"),
            value: last(samples),
            threshold: LIMIT_ZERO,
            verdict: judge_zero_limit(samples, problem.r[j].is_identically_zero()),
        });
    }
    verdicts.push(VerdictRow {
        hypothesis: "H2".into(),
        quantity: "lim kernel mass of sum mu^l r_l".into(),
        value: last(&h2_mass),
        threshold: LIMIT_ZERO,
        verdict: judge_zero_limit(&h2_mass, unperturbed),
    });
    for sig in &sigma_h3 {
        verdicts.push(sigma_row("H3", sig, phi1));
    }
    if !converged {
        for row in verdicts.iter_mut() {
            if row.verdict.is_pass() && row.hypothesis != "H1" && row.hypothesis != "R1" {
                row.verdict = Verdict::Indeterminate;
            }
        }
    }

    HypothesisReport {
        index: system.index,
        mu: system.mu,
        h1: Verdict::Pass,
        phi1,
        t_grid: grid,
        r_samples,
        l_samples,
        l_monotone,
        l_tail_sum,
        sigma_r3,
        sigma_h3,
        verdicts,
        quadrature_converged: converged,
    }
}

fn sigma_row(hypothesis: &str, sig: &SigmaEstimate, phi1: f64) -> VerdictRow {
    let product = sig.sigma * phi1;
    let verdict = if !sig.converged || !product.is_finite() {
        Verdict::Indeterminate
    } else if product < 1.0 {
        Verdict::PassNumerical
    } else {
        Verdict::Fail
    };
    VerdictRow {
        hypothesis: hypothesis.into(),
        quantity: format!("sigma*Phi1 (gamma = {:?})", sig.gamma),
        value: product,
        threshold: 1.0,
        verdict,
    }
}
