//! Chebyshev-Lobatto grids and barycentric interpolation.

use std::f64::consts::PI;

/// `N + 1` Chebyshev-Lobatto points on `[a, b]`, increasing, endpoints included.
pub fn lobatto_nodes(a: f64, b: f64, n: usize) -> Vec<f64> {
    assert!(n >= 1 && b > a);
    let mut nodes: Vec<f64> = (0..=n)
        .map(|k| {
            let x = -(PI * k as f64 / n as f64).cos();
            a + 0.5 * (b - a) * (x + 1.0)
        })
        .collect();
    nodes[0] = a;
    nodes[n] = b;
    nodes
}

/// Barycentric weights for Lobatto points: `(-1)^k`, halved at the ends.
pub fn barycentric_weights(n: usize) -> Vec<f64> {
    (0..=n)
        .map(|k| {
            let s = if k % 2 == 0 { 1.0 } else { -1.0 };
            if k == 0 || k == n {
                0.5 * s
            } else {
                s
            }
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct ChebyshevGrid {
    pub nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl ChebyshevGrid {
    /// `points` is the number of nodes, including both endpoints.
    pub fn new(a: f64, b: f64, points: usize) -> Self {
        assert!(points >= 2);
        let n = points - 1;
        ChebyshevGrid {
            nodes: lobatto_nodes(a, b, n),
            weights: barycentric_weights(n),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn start(&self) -> f64 {
        self.nodes[0]
    }

    pub fn end(&self) -> f64 {
        *self.nodes.last().unwrap()
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.start() && t <= self.end()
    }

    /// Row of interpolation coefficients at `t`: `p(t) = sum_k row[k] values[k]`.
    pub fn row(&self, t: f64) -> Vec<f64> {
        let mut row = vec![0.0; self.len()];
        if let Some(k) = self.nodes.iter().position(|&x| x == t) {
            row[k] = 1.0;
            return row;
        }
        let mut denom = 0.0;
        for (k, (&x, &w)) in self.nodes.iter().zip(&self.weights).enumerate() {
            let c = w / (t - x);
            row[k] = c;
            denom += c;
        }
        row.iter_mut().for_each(|c| *c /= denom);
        row
    }

    /// Derivative of the interpolant at the nodes (barycentric differentiation matrix).
    #[allow(clippy::needless_range_loop)]
    pub fn differentiate(&self, values: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut acc = 0.0;
                let mut diag = 0.0;
                for j in 0..n {
                    if j == i {
                        continue;
                    }
                    let d = (self.weights[j] / self.weights[i]) / (self.nodes[i] - self.nodes[j]);
                    acc += d * values[j];
                    diag -= d;
                }
                acc + diag * values[i]
            })
            .collect()
    }

    pub fn interpolate(&self, values: &[f64], t: f64) -> f64 {
        debug_assert_eq!(values.len(), self.len());
        let mut num = 0.0;
        let mut denom = 0.0;
        for (k, (&x, &w)) in self.nodes.iter().zip(&self.weights).enumerate() {
            let d = t - x;
            if d == 0.0 {
                return values[k];
            }
            let c = w / d;
            num += c * values[k];
            denom += c;
        }
        num / denom
    }
}
