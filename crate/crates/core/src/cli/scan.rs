use serde::{Deserialize, Serialize};

use super::{Program, Verdict};
use crate::error::Error;
use crate::par::{map_slice, Execution};
use crate::qsim::{swap_distribution, SwapConfig};
use crate::sdp::SolveOptions;

/// Values of one scanned parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Axis {
    Fixed(f64),
    List(Vec<f64>),
    /// `steps` equally spaced values from `start` to `stop` inclusive.
    Range {
        start: f64,
        stop: f64,
        steps: usize,
    },
}

impl Axis {
    pub fn values(&self) -> Vec<f64> {
        match self {
            Axis::Fixed(v) => vec![*v],
            Axis::List(v) => v.clone(),
            Axis::Range { start, stop, steps } => match steps {
                0 => Vec::new(),
                1 => vec![*start],
                n => (0..*n)
                    .map(|k| start + (stop - start) * k as f64 / (n - 1) as f64)
                    .collect(),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwapAxes {
    pub eta_a: Axis,
    pub eta_c: Axis,
    pub theta_ab: Axis,
    pub theta_bc: Axis,
    pub alpha0: Axis,
    pub alpha1: Axis,
}

/// Grid points in axis-major order, `eta_a` outermost and `alpha1`
/// innermost.
pub fn grid(axes: &SwapAxes) -> Vec<SwapConfig> {
    let mut out = Vec::new();
    for eta_a in axes.eta_a.values() {
        for eta_c in axes.eta_c.values() {
            for theta_ab in axes.theta_ab.values() {
                for theta_bc in axes.theta_bc.values() {
                    for alpha0 in axes.alpha0.values() {
                        for alpha1 in axes.alpha1.values() {
                            out.push(SwapConfig {
                                theta_ab,
                                theta_bc,
                                alpha0,
                                alpha1,
                                eta_a,
                                eta_c,
                            });
                        }
                    }
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanRow {
    pub config: SwapConfig,
    pub t_star: f64,
    /// Solver status, or `error: …` when the point could not be solved.
    pub status: String,
    pub verdict: Verdict,
}

fn evaluate_point(program: &Program, cfg: &SwapConfig, opts: &SolveOptions, eps: f64) -> ScanRow {
    let result = swap_distribution(cfg).and_then(|d| program.evaluate(&d, opts, eps));
    match result {
        Ok(e) => ScanRow {
            config: *cfg,
            t_star: e.t_star,
            status: serde_json::to_value(e.status)
                .ok()
                .and_then(|v| v.as_str().map(str::to_string))
                .unwrap_or_default(),
            verdict: e.verdict,
        },
        Err(err) => ScanRow {
            config: *cfg,
            t_star: f64::NAN,
            status: format!("error: {err}"),
            verdict: Verdict::Inconclusive,
        },
    }
}

/// Evaluates every point; rows keep the order of `points`.
pub fn scan_grid(
    program: &Program,
    points: &[SwapConfig],
    opts: &SolveOptions,
    eps: f64,
    exec: Execution,
) -> Vec<ScanRow> {
    map_slice(exec, points, |cfg| evaluate_point(program, cfg, opts, eps))
}

/// First incompatible point in order, evaluating `batch` points at a time.
pub fn find_incompatible(
    program: &Program,
    points: &[SwapConfig],
    opts: &SolveOptions,
    eps: f64,
    exec: Execution,
    batch: usize,
) -> Option<ScanRow> {
    for chunk in points.chunks(batch.max(1)) {
        let rows = scan_grid(program, chunk, opts, eps, exec);
        if let Some(row) = rows
            .into_iter()
            .find(|r| r.verdict == Verdict::Incompatible)
        {
            return Some(row);
        }
    }
    None
}

#[derive(Serialize)]
struct CsvRow<'a> {
    eta_a: f64,
    eta_c: f64,
    theta_ab: f64,
    theta_bc: f64,
    alpha0: f64,
    alpha1: f64,
    t_star: f64,
    verdict: &'a str,
}

/// CSV with header `eta_a,eta_c,theta_ab,theta_bc,alpha0,alpha1,t_star,verdict`.
pub fn rows_to_csv(rows: &[ScanRow]) -> Result<String, Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        let c = r.config;
        w.serialize(CsvRow {
            eta_a: c.eta_a,
            eta_c: c.eta_c,
            theta_ab: c.theta_ab,
            theta_bc: c.theta_bc,
            alpha0: c.alpha0,
            alpha1: c.alpha1,
            t_star: r.t_star,
            verdict: r.verdict.as_str(),
        })
        .map_err(|e| Error::Config(format!("csv: {e}")))?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::Config(format!("csv: {e}")))?;
    String::from_utf8(bytes).map_err(|e| Error::Config(format!("csv: {e}")))
}
