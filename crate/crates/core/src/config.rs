//! Run configuration: a flat TOML file with the problem data and solver knobs.
//!
//! ```toml
//! n = 3
//! a = [-6.0, 11.0, -6.0]
//! r = ["(1+t)^(-3)", "0", "0"]
//! t0 = 0.0
//! t_max = 200.0
//! grid_points = 257
//! tol = 1e-13
//! beta = { "3" = 0.5 }
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;

use crate::expr::Expression;
use crate::problem::Problem;
use crate::solver::SolverOptions;
use crate::spectral::find_roots;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid `{field}`: {message}")]
    Invalid { field: String, message: String },
}

fn invalid(field: impl Into<String>, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        field: field.into(),
        message: message.into(),
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    n: i64,
    a: Vec<f64>,
    r: Vec<String>,
    #[serde(default)]
    t0: f64,
    t_max: Option<f64>,
    grid_points: Option<i64>,
    tol: Option<f64>,
    eta: Option<f64>,
    max_iter: Option<i64>,
    #[serde(default)]
    beta: BTreeMap<String, f64>,
    output_dir: Option<PathBuf>,
    envelope_window: Option<[f64; 2]>,
    oracle_t_end: Option<f64>,
    ratio_t: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct Config {
    pub n: usize,
    pub a: Vec<f64>,
    pub r: Vec<Expression>,
    pub t0: f64,
    pub t_max: f64,
    pub grid_points: usize,
    pub tol: f64,
    pub eta: f64,
    pub max_iter: usize,
    /// `beta` overrides keyed by root index `1..=n`.
    pub beta: BTreeMap<usize, f64>,
    pub output_dir: PathBuf,
    /// Window `[a, b]` for the envelope check; the extended window is `[a, 2b]`.
    pub envelope_window: (f64, f64),
    /// End of the oracle comparison interval.
    pub oracle_t_end: f64,
    /// Where derivative ratios and the Wronskian are checked.
    pub ratio_t: f64,
}

/// `t0 + 40 / min gap` so the slowest kernel decays by `e^{-40}` on the grid.
fn default_t_max(a: &[f64], t0: f64) -> f64 {
    let gap = find_roots(a)
        .ok()
        .map(|s| {
            s.lambda
                .windows(2)
                .map(|w| (w[0] - w[1]).abs())
                .fold(f64::INFINITY, f64::min)
        })
        .filter(|g| g.is_finite() && *g > 0.0)
        .unwrap_or(1.0);
    t0 + 40.0 / gap
}

impl Config {
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        Self::validate(raw)
    }

    fn validate(raw: RawConfig) -> Result<Self, ConfigError> {
        if raw.n < 2 {
            return Err(invalid(
                "n",
                format!("order must be at least 2, got {}", raw.n),
            ));
        }
        let n = raw.n as usize;
        if raw.a.len() != n {
            return Err(invalid(
                "a",
                format!("expected {n} coefficients, got {}", raw.a.len()),
            ));
        }
        if let Some(k) = raw.a.iter().position(|v| !v.is_finite()) {
            return Err(invalid("a", format!("a[{k}] is not finite")));
        }
        if raw.r.len() != n {
            return Err(invalid(
                "r",
                format!("expected {n} expressions, got {}", raw.r.len()),
            ));
        }
        let r = raw
            .r
            .iter()
            .enumerate()
            .map(|(k, src)| {
                Expression::parse(src).map_err(|e| invalid(format!("r[{k}]"), e.to_string()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        if !raw.t0.is_finite() {
            return Err(invalid("t0", "must be finite"));
        }
        let t0 = raw.t0;
        let t_max = raw.t_max.unwrap_or_else(|| default_t_max(&raw.a, t0));
        if !(t_max > t0) || !t_max.is_finite() {
            return Err(invalid("t_max", format!("must exceed t0 = {t0}")));
        }
        let grid_points = raw.grid_points.unwrap_or(128);
        if grid_points < 16 {
            return Err(invalid("grid_points", "must be at least 16"));
        }
        let tol = raw.tol.unwrap_or(1e-10);
        if !(tol > 0.0) || !tol.is_finite() {
            return Err(invalid("tol", "must be positive"));
        }
        let eta = raw.eta.unwrap_or(0.5);
        if !(eta > 0.0 && eta < 1.0) {
            return Err(invalid("eta", "must lie in ]0, 1["));
        }
        let max_iter = raw.max_iter.unwrap_or(200);
        if max_iter < 1 {
            return Err(invalid("max_iter", "must be at least 1"));
        }
        let mut beta = BTreeMap::new();
        for (key, value) in raw.beta {
            let i: usize = key
                .parse()
                .ok()
                .filter(|i| (1..=n).contains(i))
                .ok_or_else(|| {
                    invalid(
                        "beta",
                        format!("key `{key}` is not a root index in 1..={n}"),
                    )
                })?;
            if !value.is_finite() {
                return Err(invalid("beta", format!("beta[{i}] is not finite")));
            }
            beta.insert(i, value);
        }
        let span = t_max - t0;
        let envelope_window = match raw.envelope_window {
            Some([a, b]) => (a, b),
            None => (t0 + 0.05 * span, t0 + 0.5 * span),
        };
        let (wa, wb) = envelope_window;
        if !(t0 <= wa && wa < wb && 2.0 * wb - t0 <= t_max + 1e-9 * span) {
            return Err(invalid(
                "envelope_window",
                "need t0 <= a < b with the extended window [a, 2b] inside [t0, t_max]",
            ));
        }
        let oracle_t_end = raw.oracle_t_end.unwrap_or((t0 + 10.0).min(t_max));
        if !(oracle_t_end > t0 && oracle_t_end <= t_max) {
            return Err(invalid("oracle_t_end", "must lie in ]t0, t_max]"));
        }
        let ratio_t = raw.ratio_t.unwrap_or(t0 + 0.25 * span);
        if !(ratio_t >= t0 && ratio_t <= t_max) {
            return Err(invalid("ratio_t", "must lie in [t0, t_max]"));
        }
        Ok(Config {
            n,
            a: raw.a,
            r,
            t0,
            t_max,
            grid_points: grid_points as usize,
            tol,
            eta,
            max_iter: max_iter as usize,
            beta,
            output_dir: raw.output_dir.unwrap_or_else(|| PathBuf::from("out")),
            envelope_window,
            oracle_t_end,
            ratio_t,
        })
    }

    pub fn problem(&self) -> Problem {
        Problem::new(self.a.clone(), self.r.clone(), self.t0).expect("validated lengths")
    }

    pub fn solver_options(&self) -> SolverOptions {
        SolverOptions {
            grid_points: self.grid_points,
            tol: self.tol,
            eta: self.eta,
            max_iter: self.max_iter,
            ..SolverOptions::new(self.t_max)
        }
    }
}

pub fn load_config(path: &Path) -> Result<Config, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Config::from_toml_str(&text)
}
