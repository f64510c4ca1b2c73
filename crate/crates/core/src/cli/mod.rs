//! Batch front end: single feasibility tests, visibility bisection and
//! parameter grids over lossy entanglement swapping.

mod scan;

pub use scan::{find_incompatible, grid, rows_to_csv, scan_grid, Axis, ScanRow, SwapAxes};

use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use crate::algebra::Mode;
use crate::dist::DistributionTable;
use crate::error::Error;
use crate::moment::{
    assemble, instantiate, problem_stats, InstantiatedProblem, SymbolicMomentMatrix,
};
use crate::par::Execution;
use crate::qsim::DistributionSpec;
use crate::scenario::{LevelSpec, Scenario};
use crate::sdp::{solve, SolveOptions, SolveReport, SolveStatus};

/// Optimum below `-EPSILON` refutes the hypothesis.
pub const EPSILON: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    #[serde(rename = "incompatible")]
    Incompatible,
    #[serde(rename = "not refuted at this level")]
    NotRefuted,
    #[serde(rename = "inconclusive")]
    Inconclusive,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Incompatible => "incompatible",
            Verdict::NotRefuted => "not refuted at this level",
            Verdict::Inconclusive => "inconclusive",
        }
    }

    /// Verdict and the objective value supporting it.
    pub fn classify(report: &SolveReport, eps: f64) -> (Verdict, f64) {
        let lower = report.lower_bound();
        let upper = report.upper_bound.filter(|u| *u < -eps);
        match report.status {
            SolveStatus::Optimal if report.t_star < -eps => (Verdict::Incompatible, report.t_star),
            SolveStatus::Optimal => (Verdict::NotRefuted, report.t_star),
            SolveStatus::SignDecided
            | SolveStatus::MaxIterations
            | SolveStatus::NumericalFailure => {
                if let Some(u) = upper {
                    (Verdict::Incompatible, u)
                } else if lower >= -eps {
                    (Verdict::NotRefuted, lower)
                } else {
                    (Verdict::Inconclusive, report.t_star)
                }
            }
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Outcome of one feasibility test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Evaluation {
    pub t_star: f64,
    pub gap: f64,
    pub status: SolveStatus,
    pub verdict: Verdict,
    pub dimension: usize,
    pub variables: usize,
    pub iterations: usize,
}

/// Scenario plus its symbolic moment matrix, reused across distributions.
#[derive(Debug, Clone)]
pub struct Program {
    pub scenario: Scenario,
    pub symbolic: SymbolicMomentMatrix,
}

impl Program {
    pub fn new(scenario: Scenario, level: &LevelSpec, exec: Execution) -> Result<Self, Error> {
        scenario.check()?;
        let generators = scenario.generators(level)?;
        let symbolic = assemble(&generators, &scenario, exec)?;
        log::debug!("moment matrix: {:?}", problem_stats(&symbolic));
        Ok(Program { scenario, symbolic })
    }

    pub fn dimension(&self) -> usize {
        self.symbolic.dimension()
    }

    pub fn instantiate(&self, dist: &DistributionTable) -> Result<InstantiatedProblem, Error> {
        instantiate(&self.symbolic, dist, &self.scenario)
    }

    pub fn evaluate(
        &self,
        dist: &DistributionTable,
        opts: &SolveOptions,
        eps: f64,
    ) -> Result<Evaluation, Error> {
        let inst = self.instantiate(dist)?;
        let problem = inst.to_sdp()?;
        let report = solve(&problem, opts);
        let (verdict, t_star) = Verdict::classify(&report, eps);
        Ok(Evaluation {
            t_star,
            gap: report.gap,
            status: report.status,
            verdict,
            dimension: inst.n,
            variables: inst.variables.len(),
            iterations: report.iterations,
        })
    }
}

/// Everything needed for a single run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub scenario: Scenario,
    pub level: LevelSpec,
    pub distribution: DistributionSpec,
    /// Directory against which `file` distributions resolve.
    pub base_dir: PathBuf,
    pub solver: SolveOptions,
    pub epsilon: f64,
    /// Configuration summary copied into reports.
    pub echo: Value,
}

impl RunConfig {
    /// Loads the three configuration files; `mode` overrides the scenario's.
    pub fn load(
        scenario: &Path,
        level: &Path,
        distribution: &Path,
        mode: Option<Mode>,
    ) -> Result<Self, Error> {
        let mut sc = Scenario::load(scenario)?;
        if let Some(m) = mode {
            sc = sc.with_mode(m);
        }
        let lv = LevelSpec::load(level)?;
        let ds = DistributionSpec::load(distribution)?;
        let echo = json!({
            "scenario": scenario.display().to_string(),
            "level": level.display().to_string(),
            "distribution": distribution.display().to_string(),
        });
        let base_dir = distribution
            .parent()
            .map(Path::to_path_buf)
            .unwrap_or_default();
        Ok(RunConfig::new(sc, lv, ds, base_dir).with_echo(echo))
    }

    pub fn new(
        scenario: Scenario,
        level: LevelSpec,
        distribution: DistributionSpec,
        base_dir: PathBuf,
    ) -> Self {
        RunConfig {
            scenario,
            level,
            distribution,
            base_dir,
            solver: SolveOptions::default(),
            epsilon: EPSILON,
            echo: json!({}),
        }
    }

    pub fn with_echo(mut self, echo: Value) -> Self {
        self.echo = echo;
        self
    }

    /// Full echo: file summary, effective mode, distribution and solver
    /// settings.
    pub fn config_echo(&self) -> Value {
        let mut echo = self.echo.clone();
        if !echo.is_object() {
            echo = json!({});
        }
        let obj = echo.as_object_mut().expect("object");
        obj.insert(
            "mode".into(),
            serde_json::to_value(self.scenario.mode).unwrap_or(Value::Null),
        );
        obj.insert(
            "distribution_spec".into(),
            serde_json::to_value(&self.distribution).unwrap_or(Value::Null),
        );
        obj.insert("gap_tol".into(), json!(self.solver.gap_tol));
        obj.insert("max_iter".into(), json!(self.solver.max_iter));
        obj.insert("epsilon".into(), json!(self.epsilon));
        echo
    }

    pub fn program(&self) -> Result<Program, Error> {
        Program::new(self.scenario.clone(), &self.level, self.solver.exec)
    }

    pub fn distribution(&self) -> Result<DistributionTable, Error> {
        self.distribution.build(&self.base_dir)
    }
}

/// Report of `run_solve`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveOutput {
    pub t_star: f64,
    pub gap: f64,
    pub status: SolveStatus,
    pub verdict: Verdict,
    pub dimension: usize,
    pub variables: usize,
    pub config_echo: Value,
}

pub fn run_solve(config: &RunConfig) -> Result<SolveOutput, Error> {
    let program = config.program()?;
    let dist = config.distribution()?;
    let e = program.evaluate(&dist, &config.solver, config.epsilon)?;
    Ok(SolveOutput {
        t_star: e.t_star,
        gap: e.gap,
        status: e.status,
        verdict: e.verdict,
        dimension: e.dimension,
        variables: e.variables,
        config_echo: config.config_echo(),
    })
}

/// Result of a visibility bisection. The threshold lies in `[lo, hi]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Bisection {
    pub lo: f64,
    pub hi: f64,
    pub threshold: f64,
    pub tol: f64,
    /// `(v, t_star)` for every evaluated visibility, in evaluation order.
    pub evaluations: Vec<(f64, f64)>,
}

/// Bisects on the visibility until the bracket is at most `tol` wide.
/// Requires `lo` not refuted and `hi` incompatible.
pub fn bisect_visibility<F>(
    program: &Program,
    family: F,
    lo: f64,
    hi: f64,
    tol: f64,
    opts: &SolveOptions,
    eps: f64,
) -> Result<Bisection, Error>
where
    F: Fn(f64) -> Result<DistributionTable, Error>,
{
    let ordered = lo < hi && tol > 0.0;
    if !ordered {
        return Err(Error::Config(format!(
            "bisection needs lo < hi and tol > 0, got lo={lo}, hi={hi}, tol={tol}"
        )));
    }
    let opts = SolveOptions {
        decide_sign: Some(eps),
        ..*opts
    };
    let mut evaluations = Vec::new();
    let mut verdict_at = |v: f64| -> Result<Verdict, Error> {
        let e = program.evaluate(&family(v)?, &opts, eps)?;
        log::info!("v = {v:.6}: t* = {:.3e} ({})", e.t_star, e.verdict);
        evaluations.push((v, e.t_star));
        match e.verdict {
            Verdict::Inconclusive => Err(Error::Numerical(format!(
                "inconclusive solve at v = {v} ({:?})",
                e.status
            ))),
            v => Ok(v),
        }
    };
    if verdict_at(lo)? != Verdict::NotRefuted {
        return Err(Error::Config(format!(
            "lower end v = {lo} is already incompatible"
        )));
    }
    if verdict_at(hi)? != Verdict::Incompatible {
        return Err(Error::Config(format!("upper end v = {hi} is not refuted")));
    }
    let (mut a, mut b) = (lo, hi);
    while b - a > tol {
        let mid = 0.5 * (a + b);
        if verdict_at(mid)? == Verdict::Incompatible {
            b = mid;
        } else {
            a = mid;
        }
    }
    Ok(Bisection {
        lo: a,
        hi: b,
        threshold: 0.5 * (a + b),
        tol,
        evaluations,
    })
}
