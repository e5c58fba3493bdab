//! Adaptive Gauss-Kronrod quadrature on finite intervals and on half lines
//! with an exponentially decaying integrand.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;

// 15-point Kronrod abscissae (positive half) and weights; the odd-indexed
// abscissae are the 7-point Gauss nodes.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_5,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_48,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_56,
    0.104_790_010_322_250_19,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_42,
    0.204_432_940_075_298_89,
    0.209_482_141_084_727_82,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_64,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
    pub converged: bool,
}

impl QuadResult {
    fn zero() -> Self {
        QuadResult {
            value: 0.0,
            error: 0.0,
            evaluations: 0,
            converged: true,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_subdivisions: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            abs: 1e-12,
            rel: 1e-10,
            max_subdivisions: 2000,
        }
    }
}

impl Tolerance {
    pub fn new(abs: f64, rel: f64) -> Self {
        Tolerance {
            abs,
            rel,
            ..Default::default()
        }
    }

    pub fn tightened(self, factor: f64) -> Self {
        Tolerance {
            abs: self.abs / factor,
            rel: self.rel / factor,
            max_subdivisions: self.max_subdivisions * 4,
        }
    }
}

/// One 15-point Kronrod rule on `[a, b]`; returns `(value, error estimate)`.
pub fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let sum = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * sum;
        if j % 2 == 1 {
            gauss += WG[j / 2] * sum;
        }
    }
    let value = kronrod * half;
    let err = ((kronrod - gauss) * half).abs();
    (value, err)
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Globally adaptive bisection on `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: Tolerance) -> QuadResult {
    if a == b {
        return QuadResult::zero();
    }
    if b < a {
        let r = integrate(f, b, a, tol);
        return QuadResult {
            value: -r.value,
            ..r
        };
    }
    let (v, e) = gk15(&f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Segment {
        a,
        b,
        value: v,
        error: e,
    });
    let mut total = v;
    let mut total_err = e;
    let mut evaluations = 15;
    let mut subdivisions = 1;
    loop {
        let target = tol.abs.max(tol.rel * total.abs());
        if total_err <= target {
            return QuadResult {
                value: total,
                error: total_err,
                evaluations,
                converged: true,
            };
        }
        if subdivisions >= tol.max_subdivisions {
            break;
        }
        let worst = heap.pop().expect("non-empty heap");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            heap.push(worst);
            break;
        }
        let (v1, e1) = gk15(&f, worst.a, mid);
        let (v2, e2) = gk15(&f, mid, worst.b);
        evaluations += 30;
        subdivisions += 1;
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.error;
        heap.push(Segment {
            a: worst.a,
            b: mid,
            value: v1,
            error: e1,
        });
        heap.push(Segment {
            a: mid,
            b: worst.b,
            value: v2,
            error: e2,
        });
    }
    // Resum to shed accumulated cancellation in the running totals.
    let value = heap.iter().map(|s| s.value).sum();
    let error: f64 = heap.iter().map(|s| s.error).sum();
    QuadResult {
        value,
        error,
        evaluations,
        converged: error <= tol.abs.max(tol.rel * f64::abs(value)),
    }
}

/// Result of a half-line integral, with the bound used for the neglected tail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailResult {
    pub value: f64,
    pub error: f64,
    pub tail_bound: f64,
    /// Point beyond which the integral was replaced by the tail bound.
    pub truncated_at: f64,
    pub converged: bool,
}

/// `int_a^inf f(s) ds` for an integrand whose envelope decays at least like
/// `e^{-rate (s - a)}` once any slowly varying factor has settled.
///
/// Panels of length `~ 1/rate` are added until the exponential tail bound
/// `|f(T)| / rate` (checked at the panel end and at its midpoint) drops below
/// `0.01 * tol.abs`. Failure to get there within `max_panels` marks the
/// result unconverged.
pub fn integrate_to_infinity<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    rate: f64,
    tol: Tolerance,
) -> TailResult {
    assert!(rate > 0.0, "decay rate must be positive");
    let max_panels = 400;
    let panel = (2.0 / rate).max(0.5);
    let mut value = 0.0;
    let mut error = 0.0;
    let mut left = a;
    let mut converged = true;
    for _ in 0..max_panels {
        let right = left + panel;
        let r = integrate(&f, left, right, tol);
        value += r.value;
        error += r.error;
        converged &= r.converged;
        let probe = f(right)
            .abs()
            .max(f(0.5 * (left + right)).abs() * (-0.5 * rate * panel).exp());
        let tail_bound = probe / rate;
        left = right;
        if tail_bound <= 0.01 * tol.abs.max(tol.rel * value.abs()) {
            return TailResult {
                value,
                error: error + tail_bound,
                tail_bound,
                truncated_at: left,
                converged,
            };
        }
    }
    let tail_bound = f(left).abs() / rate;
    TailResult {
        value,
        error: error + tail_bound,
        tail_bound,
        truncated_at: left,
        converged: false,
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(q: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(q >= 1);
    let mut nodes = vec![0.0; q];
    let mut weights = vec![0.0; q];
    for i in 0..q.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (q as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(q, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(q, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[q - 1 - i] = x;
        weights[i] = w;
        weights[q - 1 - i] = w;
    }
    if q % 2 == 1 {
        nodes[q / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre(q: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=q {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = q as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}
