//! Independent ground truth: adaptive Verner 6(5) integration of the
//! original equation written as a first-order companion system.

use thiserror::Error;

use crate::asymptotics::FundamentalSystem;
use crate::problem::Problem;

#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepUnderflow { t: f64, h: f64 },
    #[error("non-finite state at t = {t}")]
    NonFinite { t: f64 },
    #[error("initial state has {got} entries, expected {expected}")]
    Dimension { expected: usize, got: usize },
    #[error("output times must be increasing and start at or after t0")]
    Times,
    #[error("step budget of {0} exhausted")]
    StepBudget(usize),
}

/// Verner's efficient 6(5) pair (9 stages; the last stage reuses the
/// propagated solution, so its row equals the 6th-order weights).
pub mod tableau {
    pub const STAGES: usize = 9;
    pub const C: [f64; STAGES] = [
        0.0,
        0.6e-1,
        9.593_333_333_333_333e-2,
        0.1439,
        0.4973,
        0.9725,
        0.9995,
        1.0,
        1.0,
    ];
    pub const A: [[f64; STAGES]; STAGES] = [
        [0.0; STAGES],
        [0.6e-1, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [
            1.923_996_296_296_296_2e-2,
            7.669_337_037_037_037e-2,
            0.0,
            0.0,
            0.0,
            0.0,
            0.0,
            0.0,
            0.0,
        ],
        [0.35975e-1, 0.0, 0.107925, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [
            1.318_683_415_233_148_4,
            0.0,
            -5.042_058_063_628_562,
            4.220_674_648_395_414,
            0.0,
            0.0,
            0.0,
            0.0,
            0.0,
        ],
        [
            -41.872_591_664_327_516,
            0.0,
            159.432_562_163_137_5,
            -122.119_213_565_010_03,
            5.531_743_066_200_054,
            0.0,
            0.0,
            0.0,
            0.0,
        ],
        [
            -54.430_156_935_316_504,
            0.0,
            207.067_251_365_018_48,
            -158.610_813_784_59,
            6.991_816_585_950_242,
            -1.859_723_106_220_323_4e-2,
            0.0,
            0.0,
            0.0,
        ],
        [
            -54.663_741_787_281_98,
            0.0,
            207.952_806_255_389_36,
            -159.288_957_474_499_5,
            7.018_743_740_796_944,
            -1.833_878_590_504_572_2e-2,
            -5.119_484_997_882_099e-4,
            0.0,
            0.0,
        ],
        [
            3.438_957_868_357_036e-2,
            0.0,
            0.0,
            0.258_262_455_563_350_3,
            0.420_937_118_967_353_7,
            4.405_396_469_669_31,
            -176.483_119_024_298_65,
            172.364_133_401_415_07,
            0.0,
        ],
    ];
    /// 6th-order weights.
    pub const B: [f64; STAGES] = [
        3.438_957_868_357_036e-2,
        0.0,
        0.0,
        0.258_262_455_563_350_3,
        0.420_937_118_967_353_7,
        4.405_396_469_669_31,
        -176.483_119_024_298_65,
        172.364_133_401_415_07,
        0.0,
    ];
    /// Embedded 5th-order weights.
    pub const B_HAT: [f64; STAGES] = [
        4.909_967_648_382_49e-2,
        0.0,
        0.0,
        0.225_111_222_951_652_42,
        0.469_468_225_302_956_2,
        0.806_579_224_998_886_8,
        0.0,
        -0.607_119_489_177_796,
        5.686_113_944_047_569_6e-2,
    ];
    pub const ORDER: i32 = 6;
}

#[derive(Debug, Clone, Copy)]
pub struct OracleOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions {
            rtol: 1e-10,
            atol: 1e-10,
            max_steps: 2_000_000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrajectorySample {
    pub times: Vec<f64>,
    /// `states[k]` is `(y, y', ..., y^(n-1))` at `times[k]`.
    pub states: Vec<Vec<f64>>,
    pub steps: usize,
    pub rejected: usize,
    pub rtol: f64,
    pub atol: f64,
}

/// Integrate `y' = f(t, y)` from `(t0, y0)`, landing exactly on each output time.
pub fn integrate_system<F>(
    f: F,
    t0: f64,
    y0: &[f64],
    times: &[f64],
    opts: OracleOptions,
) -> Result<TrajectorySample, OracleError>
where
    F: Fn(f64, &[f64], &mut [f64]),
{
    use tableau::*;
    if times.windows(2).any(|w| w[1] < w[0]) || times.first().is_some_and(|&t| t < t0) {
        return Err(OracleError::Times);
    }
    let dim = y0.len();
    let mut y = y0.to_vec();
    let mut t = t0;
    let mut k = vec![vec![0.0; dim]; STAGES];
    let mut stage = vec![0.0; dim];
    let mut y_new = vec![0.0; dim];
    let mut out_states = Vec::with_capacity(times.len());
    let (mut steps, mut rejected) = (0usize, 0usize);
    let span = times.last().map(|&e| e - t0).unwrap_or(0.0);
    let mut h = if span > 0.0 {
        (span * 1e-3).min(1e-2)
    } else {
        1e-2
    };
    for &target in times {
        while t < target {
            if steps + rejected >= opts.max_steps {
                return Err(OracleError::StepBudget(opts.max_steps));
            }
            let last = t + h >= target;
            let h_try = if last { target - t } else { h };
            for s in 0..STAGES {
                for i in 0..dim {
                    stage[i] = y[i] + h_try * (0..s).map(|j| A[s][j] * k[j][i]).sum::<f64>();
                }
                f(t + C[s] * h_try, &stage, &mut k[s]);
            }
            let mut err: f64 = 0.0;
            for i in 0..dim {
                let mut hi = 0.0;
                let mut lo = 0.0;
                for s in 0..STAGES {
                    hi += B[s] * k[s][i];
                    lo += B_HAT[s] * k[s][i];
                }
                y_new[i] = y[i] + h_try * hi;
                let scale = opts.atol + opts.rtol * y[i].abs().max(y_new[i].abs());
                err = err.max((h_try * (hi - lo)).abs() / scale);
            }
            if !err.is_finite() || y_new.iter().any(|v| !v.is_finite()) {
                if h_try.abs() < 1e-14 * (1.0 + t.abs()) {
                    return Err(OracleError::NonFinite { t });
                }
                h = 0.25 * h_try;
                rejected += 1;
                continue;
            }
            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-1.0 / ORDER as f64)).clamp(0.2, 5.0)
            };
            if err <= 1.0 {
                t = if last { target } else { t + h_try };
                y.copy_from_slice(&y_new);
                steps += 1;
                // Keep the regular step when the last one was only clipped.
                if !last || factor < 1.0 {
                    h = h_try * factor;
                }
            } else {
                rejected += 1;
                h = h_try * factor;
            }
            if h < 1e-14 * (1.0 + t.abs()) {
                return Err(OracleError::StepUnderflow { t, h });
            }
        }
        out_states.push(y.clone());
    }
    Ok(TrajectorySample {
        times: times.to_vec(),
        states: out_states,
        steps,
        rejected,
        rtol: opts.rtol,
        atol: opts.atol,
    })
}

/// The original `n`-th order equation from `y0 = (y, ..., y^(n-1))(t0)`.
pub fn integrate_original(
    problem: &Problem,
    y0: &[f64],
    times: &[f64],
    opts: OracleOptions,
) -> Result<TrajectorySample, OracleError> {
    let n = problem.n;
    if y0.len() != n {
        return Err(OracleError::Dimension {
            expected: n,
            got: y0.len(),
        });
    }
    let rhs = |t: f64, y: &[f64], dy: &mut [f64]| {
        let r = problem.r_values_lossy(t);
        dy[..n - 1].copy_from_slice(&y[1..n]);
        dy[n - 1] = -(0..n).map(|i| (problem.a[i] + r[i]) * y[i]).sum::<f64>();
    };
    integrate_system(rhs, problem.t0, y0, times, opts)
}

pub fn uniform_times(t0: f64, t_end: f64, count: usize) -> Vec<f64> {
    (0..count)
        .map(|k| t0 + (t_end - t0) * k as f64 / (count - 1) as f64)
        .collect()
}

#[derive(Debug, Clone)]
pub struct OracleComparison {
    pub i: usize,
    pub t_end: f64,
    /// `max |y_oracle - y_fixed_point| / |y_oracle|`, formed in log space.
    pub value_error: f64,
    /// `max |y'/y (oracle) - y'/y (fixed point)|`.
    pub log_derivative_error: f64,
    pub steps: usize,
}

/// Integrate from the jet `(P_0, ..., P_{n-1})` of the fixed-point solution
/// at `t0` and compare on `[t0, t_end]`.
pub fn compare_to_fixed_point(
    problem: &Problem,
    fs: &FundamentalSystem,
    i: usize,
    t_end: f64,
    opts: OracleOptions,
) -> Result<OracleComparison, OracleError> {
    let y0 = fs.initial_jet(i);
    let times = uniform_times(problem.t0, t_end, 201);
    let traj = integrate_original(problem, &y0, &times, opts)?;
    let mut value_error: f64 = 0.0;
    let mut log_derivative_error: f64 = 0.0;
    for (t, state) in traj.times.iter().zip(&traj.states) {
        let y = state[0];
        if y <= 0.0 {
            // y_i never vanishes; a sign change means the oracle lost it.
            value_error = f64::INFINITY;
            log_derivative_error = f64::INFINITY;
            continue;
        }
        let log_diff = fs.log_y(i, *t) - y.ln();
        value_error = value_error.max(log_diff.exp_m1().abs());
        let ratio = fs.ratios(i, *t)[1];
        log_derivative_error = log_derivative_error.max((state[1] / y - ratio).abs());
    }
    Ok(OracleComparison {
        i,
        t_end,
        value_error,
        log_derivative_error,
        steps: traj.steps,
    })
}

/// Largest relative deviation from Abel's identity
/// `W(t) = W(t0) exp(-int (a_{n-1} + r_{n-1}))` for oracle trajectories
/// started from the fixed-point jets.
pub fn abel_identity_error(
    problem: &Problem,
    fs: &FundamentalSystem,
    times: &[f64],
    opts: OracleOptions,
) -> Result<f64, OracleError> {
    use nalgebra::DMatrix;
    let n = problem.n;
    let trajectories = (1..=n)
        .map(|i| integrate_original(problem, &fs.initial_jet(i), times, opts))
        .collect::<Result<Vec<_>, _>>()?;
    let wronskian = |k: usize| {
        let mut m = DMatrix::<f64>::zeros(n, n);
        for (i, traj) in trajectories.iter().enumerate() {
            for j in 0..n {
                m[(j, i)] = traj.states[k][j];
            }
        }
        m.determinant()
    };
    let w0 = {
        let mut m = DMatrix::<f64>::zeros(n, n);
        for i in 1..=n {
            for (j, v) in fs.initial_jet(i).into_iter().enumerate() {
                m[(j, i - 1)] = v;
            }
        }
        m.determinant()
    };
    let top = |s: f64| problem.a[n - 1] + problem.r_values_lossy(s)[n - 1];
    let mut worst: f64 = 0.0;
    for (k, &t) in times.iter().enumerate() {
        let integral = crate::quadrature::integrate(top, problem.t0, t, Default::default()).value;
        let expected = w0 * (-integral).exp();
        worst = worst.max(((wronskian(k) - expected) / expected).abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::tableau::*;
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn tableau_consistency() {
        for s in 0..STAGES {
            assert_abs_diff_eq!(A[s].iter().sum::<f64>(), C[s], epsilon = 1e-12);
        }
        // quadrature order conditions sum b c^{k-1} = 1/k
        for k in 1..=6 {
            let v: f64 = (0..STAGES).map(|s| B[s] * C[s].powi(k - 1)).sum();
            assert_abs_diff_eq!(v, 1.0 / k as f64, epsilon = 1e-10);
        }
        for k in 1..=5 {
            let v: f64 = (0..STAGES).map(|s| B_HAT[s] * C[s].powi(k - 1)).sum();
            assert_abs_diff_eq!(v, 1.0 / k as f64, epsilon = 1e-10);
        }
        // one tree of order 3 and one of order 4 that involve A
        let ac: Vec<f64> = (0..STAGES)
            .map(|s| (0..STAGES).map(|j| A[s][j] * C[j]).sum())
            .collect();
        let v: f64 = (0..STAGES).map(|s| B[s] * ac[s]).sum();
        assert_abs_diff_eq!(v, 1.0 / 6.0, epsilon = 1e-10);
        let v: f64 = (0..STAGES).map(|s| B[s] * C[s] * ac[s]).sum();
        assert_abs_diff_eq!(v, 1.0 / 8.0, epsilon = 1e-10);
    }

    #[test]
    fn pure_exponential() {
        let p = Problem::unperturbed(&[-1.0, 0.0], 0.0);
        let traj =
            integrate_original(&p, &[1.0, 1.0], &[0.5, 1.0], OracleOptions::default()).unwrap();
        assert!((traj.states[1][0] - 1f64.exp()).abs() < 1e-9);
        let p = Problem::unperturbed(&[-6.0, 11.0, -6.0], 0.0);
        let traj = integrate_original(
            &p,
            &[1.0, 3.0, 9.0],
            &[0.999, 1.0],
            OracleOptions::default(),
        )
        .unwrap();
        let ratio = traj.states[1][0] / traj.states[0][0];
        assert!((ratio - (3.0f64 * 0.001).exp()).abs() < 1e-8);
    }

    #[test]
    fn error_drops_with_tolerance() {
        // y'' = -y: reference is exact; halving rtol must cut the error a lot
        let p = Problem::unperturbed(&[1.0, 0.0], 0.0);
        let err = |tol: f64| {
            let o = OracleOptions {
                rtol: tol,
                atol: tol,
                ..Default::default()
            };
            let traj = integrate_original(&p, &[0.0, 1.0], &[10.0], o).unwrap();
            (traj.states[0][0] - 10f64.sin()).abs()
        };
        let (coarse, fine) = (err(1e-6), err(1e-8));
        assert!(fine * 4.0 < coarse, "{coarse} {fine}");
    }

    #[test]
    fn input_validation() {
        let p = Problem::unperturbed(&[-1.0, 0.0], 0.0);
        assert!(matches!(
            integrate_original(&p, &[1.0], &[1.0], OracleOptions::default()),
            Err(OracleError::Dimension { .. })
        ));
        assert_eq!(
            integrate_original(&p, &[1.0, 1.0], &[1.0, 0.5], OracleOptions::default()).unwrap_err(),
            OracleError::Times
        );
    }
}
