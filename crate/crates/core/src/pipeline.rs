//! Stage orchestration behind the command line: `roots`, `reduce`, `check`,
//! `solve`, `verify` and `all`. Every stage writes its artifacts into the
//! configured output directory and returns an exit status.
//!
//! Output is deterministic: per-root work runs in parallel but results are
//! collected in root order, and floats are written in shortest round-trip form.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use thiserror::Error;

use crate::asymptotics::{
    beta_midpoint, build_fundamental_system, check_envelope, ratio_limits, refined_log_estimate,
    wronskian_diagnostic, FundamentalSystem,
};
use crate::config::Config;
use crate::hypotheses::{evaluate_hypotheses, HypothesisOptions, HypothesisReport, Verdict};
use crate::oracle::{abel_identity_error, compare_to_fixed_point, uniform_times, OracleOptions};
use crate::problem::{root_systems, Problem, RootSystem};
use crate::quadrature::Tolerance;
use crate::reduction::{cross_check_printed_f, cross_check_printed_h, OmegaTable};
use crate::solver::{solve_root, ContractionCertificate, Discretization, IterateGrid};
use crate::spectral::Spectrum;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Roots,
    Reduce,
    Check,
    Solve,
    Verify,
    All,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::Roots => "roots",
            Stage::Reduce => "reduce",
            Stage::Check => "check",
            Stage::Solve => "solve",
            Stage::Verify => "verify",
            Stage::All => "all",
        }
    }
}

impl std::str::FromStr for Stage {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "roots" => Stage::Roots,
            "reduce" => Stage::Reduce,
            "check" => Stage::Check,
            "solve" => Stage::Solve,
            "verify" => Stage::Verify,
            "all" => Stage::All,
            other => return Err(format!("unknown stage `{other}`")),
        })
    }
}

/// Process exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Exit {
    Success = 0,
    Usage = 1,
    Failure = 2,
    Indeterminate = 3,
}

impl Exit {
    pub fn code(self) -> i32 {
        self as i32
    }

    /// Failure dominates indeterminate, which dominates success.
    fn worst(self, other: Exit) -> Exit {
        let rank = |e: Exit| match e {
            Exit::Success => 0,
            Exit::Indeterminate => 1,
            Exit::Failure => 2,
            Exit::Usage => 3,
        };
        if rank(other) > rank(self) {
            other
        } else {
            self
        }
    }
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("[{stage}] {message}")]
    Stage {
        stage: &'static str,
        message: String,
    },
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

fn stage_err(stage: Stage, err: impl std::fmt::Display) -> PipelineError {
    PipelineError::Stage {
        stage: stage.name(),
        message: err.to_string(),
    }
}

/// Exit status plus the human-readable summary printed by the CLI.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub exit: Exit,
    pub log: String,
    pub files: Vec<PathBuf>,
}

impl Outcome {
    fn new() -> Self {
        Outcome {
            exit: Exit::Success,
            log: String::new(),
            files: Vec::new(),
        }
    }

    fn absorb(&mut self, other: Outcome) {
        self.exit = self.exit.worst(other.exit);
        self.log.push_str(&other.log);
        self.files.extend(other.files);
    }
}

/// Verdict column of `diagnostics.csv`. `Info` rows never affect the exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Indeterminate,
    Info,
}

impl Status {
    fn from_bool(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Indeterminate => "indeterminate",
            Status::Info => "info",
        }
    }
}

#[derive(Debug, Clone)]
pub struct DiagnosticRow {
    pub quantity: &'static str,
    pub i: Option<usize>,
    pub j: Option<usize>,
    pub t: Option<f64>,
    pub value: f64,
    pub reference: f64,
    pub status: Status,
}

/// Shortest decimal that round-trips to the same `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

fn opt<T: ToString>(x: Option<T>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

/// Artifacts of a successful `solve` stage.
pub struct Solved {
    pub spectrum: Spectrum,
    pub systems: Vec<RootSystem>,
    pub discretizations: Vec<Discretization>,
    pub solutions: Vec<IterateGrid>,
    pub certificates: Vec<ContractionCertificate>,
}

pub struct Pipeline {
    pub config: Config,
    pub problem: Problem,
}

impl Pipeline {
    pub fn new(config: Config) -> Self {
        let problem = config.problem();
        Pipeline { config, problem }
    }

    pub fn output_dir(&self) -> &Path {
        &self.config.output_dir
    }

    fn quad_tol(&self) -> Tolerance {
        Tolerance::new(self.config.tol.min(1e-12), 1e-10)
    }

    fn write(
        &self,
        name: &str,
        contents: &[u8],
        outcome: &mut Outcome,
    ) -> Result<(), PipelineError> {
        let dir = self.output_dir();
        fs::create_dir_all(dir).map_err(|source| PipelineError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        let path = dir.join(name);
        fs::write(&path, contents).map_err(|source| PipelineError::Io {
            path: path.clone(),
            source,
        })?;
        outcome.files.push(path);
        Ok(())
    }

    fn write_csv(
        &self,
        name: &str,
        header: &[&str],
        rows: &[Vec<String>],
        outcome: &mut Outcome,
    ) -> Result<(), PipelineError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| PipelineError::Io {
            path: self.output_dir().join(name),
            source: std::io::Error::other(e),
        };
        w.write_record(header).map_err(io)?;
        for row in rows {
            w.write_record(row).map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| PipelineError::Io {
            path: self.output_dir().join(name),
            source: std::io::Error::other(e.to_string()),
        })?;
        self.write(name, &bytes, outcome)
    }

    pub fn run(&self, stage: Stage) -> Result<Outcome, PipelineError> {
        match stage {
            Stage::Roots => self.roots().map(|(o, _)| o),
            Stage::Reduce => self.reduce().map(|(o, _)| o),
            Stage::Check => self.check().map(|(o, _)| o),
            Stage::Solve => self.solve().map(|(o, _)| o),
            Stage::Verify => {
                let (mut out, solved) = self.solve()?;
                match solved {
                    Some(solved) => {
                        out.absorb(self.verify(&solved)?);
                        Ok(out)
                    }
                    None => Ok(out),
                }
            }
            Stage::All => self.all(),
        }
    }

    /// Every stage in order, stopping at the first hard failure. Hypothesis
    /// verdicts are sufficient conditions only, so a failed hypothesis is
    /// reported but does not stop the run or change the exit status.
    fn all(&self) -> Result<Outcome, PipelineError> {
        let mut out = Outcome::new();
        let (roots, spectrum) = self.roots()?;
        out.absorb(roots);
        if spectrum.is_none() {
            return Ok(out);
        }
        let (reduce, _) = self.reduce()?;
        out.absorb(reduce);
        let (check, _) = self.check()?;
        out.log.push_str(&check.log);
        out.files.extend(check.files);
        let (solve, solved) = self.solve()?;
        out.absorb(solve);
        if let Some(solved) = solved {
            out.absorb(self.verify(&solved)?);
        }
        Ok(out)
    }

    pub fn roots(&self) -> Result<(Outcome, Option<Spectrum>), PipelineError> {
        let mut out = Outcome::new();
        match self.problem.spectrum() {
            Ok(s) => {
                let rounded: Vec<String> = s.lambda.iter().map(|l| round_display(*l)).collect();
                let exact: Vec<String> = s.lambda.iter().map(|l| fmt_f64(*l)).collect();
                let _ = writeln!(out.log, "Lambda = {}", rounded.join(", "));
                let _ = writeln!(out.log, "Lambda (full precision) = {}", exact.join(", "));
                let _ = writeln!(out.log, "separation = {}", fmt_f64(s.separation));
                let _ = writeln!(out.log, "H1: pass");
                Ok((out, Some(s)))
            }
            Err(e) => {
                let _ = writeln!(out.log, "H1: fail ({e})");
                out.exit = Exit::Failure;
                Ok((out, None))
            }
        }
    }

    pub fn reduce(&self) -> Result<(Outcome, OmegaTable), PipelineError> {
        let mut out = Outcome::new();
        let table = self
            .problem
            .omega_table()
            .map_err(|e| stage_err(Stage::Reduce, e))?;
        self.write("omega_table.txt", table.render().as_bytes(), &mut out)?;
        let _ = writeln!(
            out.log,
            "Omega table: {} multi-indices",
            table.entries.len()
        );
        if (3..=4).contains(&self.problem.n) {
            let n = self.problem.n;
            let f = cross_check_printed_f(n).map_err(|e| stage_err(Stage::Reduce, e))?;
            let h = cross_check_printed_h(n).map_err(|e| stage_err(Stage::Reduce, e))?;
            let report = format!("{}\n{}", f.render(), h.render());
            self.write("printed_crosscheck.txt", report.as_bytes(), &mut out)?;
            let _ = writeln!(
                out.log,
                "printed F: {} mismatching monomial(s); printed H: {}",
                f.mismatches.len(),
                h.mismatches.len()
            );
        }
        Ok((out, table))
    }

    fn systems(&self, stage: Stage) -> Result<(Spectrum, Vec<RootSystem>), PipelineError> {
        let (spectrum, _, systems) =
            root_systems(&self.problem).map_err(|e| stage_err(stage, e))?;
        Ok((spectrum, systems))
    }

    pub fn check(&self) -> Result<(Outcome, Vec<HypothesisReport>), PipelineError> {
        let mut out = Outcome::new();
        let (_, systems) = self.systems(Stage::Check)?;
        let opts = HypothesisOptions {
            t_max: self.config.t_max,
            tol: self.quad_tol(),
        };
        let reports: Vec<HypothesisReport> = systems
            .par_iter()
            .map(|sys| evaluate_hypotheses(&self.problem, sys, opts))
            .collect();
        let mut rows = Vec::new();
        for rep in &reports {
            out.log.push_str(&rep.render());
            for row in &rep.verdicts {
                rows.push(vec![
                    rep.index.to_string(),
                    row.hypothesis.clone(),
                    row.quantity.clone(),
                    fmt_f64(row.value),
                    fmt_f64(row.threshold),
                    row.verdict.to_string(),
                ]);
                out.exit = out.exit.worst(match row.verdict {
                    Verdict::Fail => Exit::Failure,
                    Verdict::Indeterminate | Verdict::Suppressed => Exit::Indeterminate,
                    _ => Exit::Success,
                });
            }
        }
        self.write_csv(
            "hypotheses.csv",
            &[
                "i",
                "hypothesis",
                "quantity",
                "value",
                "threshold",
                "verdict",
            ],
            &rows,
            &mut out,
        )?;
        Ok((out, reports))
    }

    /// Solve every root. A failed solve is a hard failure: its certificate file
    /// records the error and no `Solved` is returned.
    pub fn solve(&self) -> Result<(Outcome, Option<Solved>), PipelineError> {
        let mut out = Outcome::new();
        let (spectrum, systems) = match self.problem.spectrum() {
            Ok(_) => self.systems(Stage::Solve)?,
            Err(e) => {
                let _ = writeln!(out.log, "[solve] H1 fails, nothing to solve: {e}");
                out.exit = Exit::Failure;
                return Ok((out, None));
            }
        };
        let opts = self.config.solver_options();
        let results: Vec<_> = systems
            .par_iter()
            .map(|sys| solve_root(&self.problem, sys.clone(), opts))
            .collect();
        let mut discretizations = Vec::new();
        let mut solutions = Vec::new();
        let mut certificates = Vec::new();
        let n = self.problem.n;
        for (sys, result) in systems.iter().zip(results) {
            let i = sys.index;
            match result {
                Ok((disc, z, cert)) => {
                    self.write(
                        &format!("certificate_{i}.txt"),
                        cert.render().as_bytes(),
                        &mut out,
                    )?;
                    let mut header = vec!["t".to_string(), "z".to_string()];
                    header.extend((1..n - 1).map(|j| format!("z{j}")));
                    let header: Vec<&str> = header.iter().map(String::as_str).collect();
                    let rows: Vec<Vec<String>> = (0..z.grid.len())
                        .map(|k| {
                            std::iter::once(fmt_f64(z.nodes()[k]))
                                .chain(z.values.iter().map(|v| fmt_f64(v[k])))
                                .collect()
                        })
                        .collect();
                    self.write_csv(&format!("z_lambda_{i}.csv"), &header, &rows, &mut out)?;
                    let _ = writeln!(
                        out.log,
                        "root {i}: converged in {} iteration(s), max ratio {}, residual {}",
                        cert.iterations,
                        fmt_f64(cert.max_ratio()),
                        fmt_f64(cert.final_residual)
                    );
                    discretizations.push(disc);
                    solutions.push(z);
                    certificates.push(cert);
                }
                Err(e) => {
                    let text = format!("root_index = {i}\nconverged = false\nerror = {e}\n");
                    self.write(&format!("certificate_{i}.txt"), text.as_bytes(), &mut out)?;
                    let _ = writeln!(out.log, "root {i}: {e}");
                    out.exit = Exit::Failure;
                }
            }
        }
        if out.exit != Exit::Success {
            return Ok((out, None));
        }
        Ok((
            out,
            Some(Solved {
                spectrum,
                systems,
                discretizations,
                solutions,
                certificates,
            }),
        ))
    }

    /// Diagnostics over a successful solve; writes `diagnostics.csv`.
    pub fn verify(&self, solved: &Solved) -> Result<Outcome, PipelineError> {
        let mut out = Outcome::new();
        let rows = self.diagnostics(solved)?;
        let mut failed = 0;
        let mut undecided = 0;
        for row in &rows {
            match row.status {
                Status::Fail => failed += 1,
                Status::Indeterminate => undecided += 1,
                _ => {}
            }
        }
        out.exit = if failed > 0 {
            Exit::Failure
        } else if undecided > 0 {
            Exit::Indeterminate
        } else {
            Exit::Success
        };
        let csv_rows: Vec<Vec<String>> = rows
            .iter()
            .map(|r| {
                vec![
                    r.quantity.to_string(),
                    opt(r.i),
                    opt(r.j),
                    r.t.map(fmt_f64).unwrap_or_default(),
                    fmt_f64(r.value),
                    fmt_f64(r.reference),
                    r.status.as_str().to_string(),
                ]
            })
            .collect();
        self.write_csv(
            "diagnostics.csv",
            &["quantity", "i", "j", "t", "value", "reference", "verdict"],
            &csv_rows,
            &mut out,
        )?;
        for r in rows
            .iter()
            .filter(|r| matches!(r.status, Status::Fail | Status::Indeterminate))
        {
            let _ = writeln!(
                out.log,
                "{}: {} i={} j={} value={} reference={}",
                r.status.as_str(),
                r.quantity,
                opt(r.i),
                opt(r.j),
                fmt_f64(r.value),
                fmt_f64(r.reference)
            );
        }
        let _ = writeln!(
            out.log,
            "verify: {} diagnostics, {failed} failed, {undecided} indeterminate",
            rows.len()
        );
        Ok(out)
    }

    pub fn diagnostics(&self, solved: &Solved) -> Result<Vec<DiagnosticRow>, PipelineError> {
        let c = &self.config;
        let p = &self.problem;
        let n = p.n;
        let tol = self.quad_tol();
        let oracle = OracleOptions {
            rtol: c.tol.max(1e-13),
            atol: c.tol.max(1e-13),
            ..OracleOptions::default()
        };
        let fs = build_fundamental_system(&solved.spectrum, p.t0, solved.solutions.clone())
            .map_err(|e| stage_err(Stage::Verify, e))?;

        let per_root: Vec<Vec<DiagnosticRow>> = (1..=n)
            .into_par_iter()
            .map(|i| self.root_diagnostics(solved, &fs, i, tol, oracle))
            .collect();
        let mut rows: Vec<DiagnosticRow> = per_root.into_iter().flatten().collect();
        rows.extend(self.ratio_limit_rows(solved, &fs));

        let (ratio, vandermonde) = wronskian_diagnostic(&fs, c.ratio_t);
        rows.push(DiagnosticRow {
            quantity: "wronskian_ratio",
            i: None,
            j: None,
            t: Some(c.ratio_t),
            value: ratio,
            reference: vandermonde,
            status: Status::from_bool(((ratio - vandermonde) / vandermonde).abs() < 0.02),
        });
        let fraction = wronskian_monotone_fraction(&fs, c.ratio_t, c.t_max, vandermonde);
        rows.push(DiagnosticRow {
            quantity: "wronskian_monotone_fraction",
            i: None,
            j: None,
            t: None,
            value: fraction,
            reference: 0.8,
            status: Status::from_bool(fraction >= 0.8),
        });
        let times = uniform_times(p.t0, c.oracle_t_end, 11);
        let (value, status) = match abel_identity_error(p, &fs, &times, oracle) {
            Ok(e) => (e, Status::from_bool(e < 1e-6)),
            Err(_) => (f64::NAN, Status::Indeterminate),
        };
        rows.push(DiagnosticRow {
            quantity: "abel_identity_error",
            i: None,
            j: None,
            t: Some(c.oracle_t_end),
            value,
            reference: 1e-6,
            status,
        });
        Ok(rows)
    }

    fn root_diagnostics(
        &self,
        solved: &Solved,
        fs: &FundamentalSystem,
        i: usize,
        tol: Tolerance,
        oracle: OracleOptions,
    ) -> Vec<DiagnosticRow> {
        let c = &self.config;
        let p = &self.problem;
        let k = i - 1;
        let cert = &solved.certificates[k];
        let z = &solved.solutions[k];
        let disc = &solved.discretizations[k];
        let mut rows = Vec::new();
        let mut push = |quantity, j, t, value, reference, status| {
            rows.push(DiagnosticRow {
                quantity,
                i: Some(i),
                j,
                t,
                value,
                reference,
                status,
            })
        };

        push(
            "contraction_ratio",
            None,
            None,
            cert.max_ratio(),
            1.0,
            Status::from_bool(cert.max_ratio() < 1.0),
        );
        push(
            "fixed_point_residual",
            None,
            None,
            cert.final_residual,
            1e-8,
            Status::from_bool(cert.final_residual < 1e-8),
        );
        push(
            "tail_bound",
            None,
            None,
            cert.tail_bound,
            1e-8,
            Status::Info,
        );
        let ode = disc
            .ode_residual(z)
            .iter()
            .map(|(_, r)| r.abs())
            .fold(0.0, f64::max);
        push(
            "ode_residual",
            None,
            None,
            ode,
            1e-6,
            Status::from_bool(ode < 1e-6),
        );

        let beta = c
            .beta
            .get(&i)
            .copied()
            .unwrap_or_else(|| beta_midpoint(&solved.spectrum, i));
        match check_envelope(p, &solved.spectrum, z, i, beta, c.envelope_window, tol) {
            Ok(check) => {
                push("envelope_beta", None, None, beta, f64::NAN, Status::Info);
                push(
                    "envelope_sup",
                    None,
                    Some(c.envelope_window.1),
                    check.sup_window,
                    check.sup_extended,
                    Status::Info,
                );
                push(
                    "envelope_growth",
                    None,
                    None,
                    check.growth(),
                    3.0,
                    Status::from_bool(check.pass),
                );
            }
            Err(_) => push(
                "envelope_growth",
                None,
                None,
                f64::NAN,
                3.0,
                Status::Indeterminate,
            ),
        }

        let (quantity, limit) = if i == 1 {
            ("oracle_value_error", 1e-4)
        } else {
            ("oracle_log_derivative_error", 1e-3)
        };
        let t_end = oracle_horizon(
            p.t0,
            c.oracle_t_end,
            fs.lambda[0] - fs.lambda[k],
            c.tol.max(oracle.rtol),
        );
        match compare_to_fixed_point(p, fs, i, t_end, oracle) {
            Ok(cmp) => {
                let value = if i == 1 {
                    cmp.value_error
                } else {
                    cmp.log_derivative_error
                };
                push(
                    quantity,
                    None,
                    Some(t_end),
                    value,
                    limit,
                    Status::from_bool(value < limit),
                );
            }
            Err(_) => push(
                quantity,
                None,
                Some(t_end),
                f64::NAN,
                limit,
                Status::Indeterminate,
            ),
        }

        let lambda = fs.lambda[k];
        let ratios = fs.ratios(i, c.ratio_t);
        for (j, r) in ratios.iter().enumerate().skip(1) {
            let reference = lambda.powi(j as i32);
            let allowed = 0.01 * lambda.abs().powi(j as i32 - 1).max(1.0);
            push(
                "derivative_ratio",
                Some(j),
                Some(c.ratio_t),
                *r,
                reference,
                Status::from_bool((r - reference).abs() < allowed),
            );
        }

        let t_refined = (p.t0 + 20.0).min(c.t_max);
        let log_est = refined_log_estimate(p, &solved.systems[k], z, t_refined, tol);
        push(
            "refined_log_factor",
            None,
            Some(t_refined),
            log_est - fs.log_y(i, t_refined),
            0.0,
            Status::Info,
        );
        rows
    }
}

impl Pipeline {
    /// Ratio limits at `t_max` against ten times the envelope, one row per `(i, j)`.
    fn ratio_limit_rows(&self, solved: &Solved, fs: &FundamentalSystem) -> Vec<DiagnosticRow> {
        let pipeline = self;
        match ratio_limits(
            &pipeline.problem,
            &solved.spectrum,
            fs,
            pipeline.config.t_max,
            pipeline.quad_tol(),
        ) {
            Ok(limits) => limits
                .into_iter()
                .map(|l| DiagnosticRow {
                    quantity: "ratio_limit_deviation",
                    i: Some(l.i),
                    j: Some(l.j),
                    t: Some(pipeline.config.t_max),
                    value: l.deviation,
                    reference: 10.0 * l.envelope,
                    status: Status::from_bool(l.pass),
                })
                .collect(),
            Err(_) => vec![DiagnosticRow {
                quantity: "ratio_limit_deviation",
                i: None,
                j: None,
                t: Some(pipeline.config.t_max),
                value: f64::NAN,
                reference: f64::NAN,
                status: Status::Indeterminate,
            }],
        }
    }
}

/// Forward integration of a dominated solution amplifies the initial-jet error
/// `eps` by `e^{gap (t - t0)}`; stop where that reaches `1e-4`.
pub fn oracle_horizon(t0: f64, t_end: f64, gap: f64, eps: f64) -> f64 {
    if gap <= 0.0 {
        return t_end;
    }
    let reach = (1e-4 / eps).ln().max(1.0) / gap;
    t_end.min(t0 + reach)
}

/// Fraction of consecutive sample pairs on `[from, to]` where
/// `|W/prod y - V|` does not increase, with a rounding allowance.
fn wronskian_monotone_fraction(
    fs: &FundamentalSystem,
    from: f64,
    to: f64,
    vandermonde: f64,
) -> f64 {
    let samples = 21;
    let dev: Vec<f64> = uniform_times(from, to, samples)
        .into_iter()
        .map(|t| (wronskian_diagnostic(fs, t).0 - vandermonde).abs())
        .collect();
    let slack = 1e-9 * vandermonde.abs();
    let good = dev.windows(2).filter(|w| w[1] <= w[0] + slack).count();
    good as f64 / (samples - 1) as f64
}

/// Rounded to 12 significant digits for display, so `2.9999999999999996` prints as `3`.
fn round_display(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return fmt_f64(x);
    }
    let s = format!("{x:.11e}");
    let rounded: f64 = s.parse().unwrap_or(x);
    let mut out = format!("{rounded}");
    if out.contains('.') {
        out = out.trim_end_matches('0').trim_end_matches('.').to_string();
    }
    out
}

/// Load, run and report, for the binary.
pub fn run(stage: Stage, config: Config) -> Result<Outcome, PipelineError> {
    Pipeline::new(config).run(stage)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip_in_shortest_form() {
        for x in [0.1, 1e-7, -2.5, 3.0, 1.0 / 3.0, 6.02e23] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(fmt_f64(0.1), "0.1");
        assert_eq!(fmt_f64(3.0), "3.0");
    }

    #[test]
    fn display_rounding() {
        assert_eq!(round_display(2.9999999999999996), "3");
        assert_eq!(round_display(0.9999999999999999), "1");
        assert_eq!(round_display(-1.5), "-1.5");
    }

    #[test]
    fn horizon_only_shrinks_for_dominated_roots() {
        assert_eq!(oracle_horizon(0.0, 10.0, 0.0, 1e-13), 10.0);
        assert_eq!(oracle_horizon(0.0, 10.0, 2.0, 1e-13), 10.0);
        let h = oracle_horizon(0.0, 10.0, 2.0, 1e-10);
        assert!((h - 1e6f64.ln() / 2.0).abs() < 1e-12);
    }

    #[test]
    fn exit_severity() {
        assert_eq!(
            Exit::Success.worst(Exit::Indeterminate),
            Exit::Indeterminate
        );
        assert_eq!(Exit::Indeterminate.worst(Exit::Failure), Exit::Failure);
        assert_eq!(Exit::Failure.worst(Exit::Success), Exit::Failure);
        assert_eq!(Exit::Failure.code(), 2);
    }

    #[test]
    fn stage_names_parse() {
        for s in ["roots", "reduce", "check", "solve", "verify", "all"] {
            assert_eq!(s.parse::<Stage>().unwrap().name(), s);
        }
        assert!("plot".parse::<Stage>().is_err());
    }
}
