//! Dense primal-dual interior-point method for the max-min-eigenvalue
//! program.
//!
//! The program `max t s.t. C₀ + Σ y_k B_k − t·I ⪰ 0` is the dual of
//!
//! ```text
//! minimize ⟨C₀, X⟩  s.t.  ⟨B_k, X⟩ = 0 (all k),  tr X = 1,  X ⪰ 0.
//! ```
//!
//! Internally the dual is written `S = C₀ − Σ z_k B_k − z_t·I`, so
//! `y = −z` and `t = z_t`. Search directions are HKM directions with a
//! Mehrotra predictor-corrector; the Schur complement is assembled densely
//! one basis matrix at a time.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};
use serde::Serialize;

use super::problem::SdpProblem;
use crate::par::{map_range, Execution};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    /// Absolute primal-dual objective gap.
    pub gap_tol: f64,
    pub max_iter: usize,
    /// Relative primal and dual infeasibility.
    pub feas_tol: f64,
    /// Stop as soon as the sign of the optimum relative to `-margin` is
    /// certified by a feasible point or a projected primal bound.
    pub decide_sign: Option<f64>,
    /// Fraction of the distance to the cone boundary taken per step.
    pub step_fraction: f64,
    pub exec: Execution,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            gap_tol: 1e-9,
            max_iter: 200,
            feas_tol: 1e-8,
            decide_sign: None,
            step_fraction: 0.98,
            exec: Execution::Parallel,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveStatus {
    Optimal,
    /// Stopped early with the sign of the optimum certified.
    SignDecided,
    MaxIterations,
    NumericalFailure,
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub status: SolveStatus,
    /// Dual objective of the final iterate.
    pub t_star: f64,
    pub y: Vec<f64>,
    /// Final `|⟨C₀,X⟩ − t|`.
    pub gap: f64,
    pub iterations: usize,
    /// Smallest eigenvalue of `C₀ + Σ y_k B_k`; always attainable, so a
    /// lower bound on the optimum.
    pub min_eig_check: f64,
    /// Objective of the projected primal iterate, an upper bound on the
    /// optimum when available.
    pub upper_bound: Option<f64>,
    /// Final primal iterate `X`.
    pub primal: DMatrix<f64>,
}

impl SolveReport {
    /// Best certified lower bound on the optimum.
    pub fn lower_bound(&self) -> f64 {
        self.min_eig_check
    }
}

type Column = (usize, Vec<(usize, f64)>);

struct Constraints {
    n: usize,
    m: usize,
    /// Flat oriented entries `p + q*n` per basis matrix.
    idx: Vec<usize>,
    coef: Vec<f64>,
    offsets: Vec<usize>,
    /// Per basis matrix: distinct column indices and, for each, the
    /// `(row, coef)` pairs in that column.
    columns: Vec<Vec<Column>>,
    norms_sq: Vec<f64>,
    disjoint: bool,
}

impl Constraints {
    fn new(problem: &SdpProblem) -> Self {
        let n = problem.n;
        let m = problem.basis.len();
        let mut idx = Vec::new();
        let mut coef = Vec::new();
        let mut offsets = vec![0];
        let mut columns = Vec::with_capacity(m);
        for b in &problem.basis {
            let oriented = b.oriented();
            let mut cols: Vec<(usize, Vec<(usize, f64)>)> = Vec::new();
            for &(p, q, c) in &oriented {
                idx.push(p + q * n);
                coef.push(c);
                match cols.iter_mut().find(|(s, _)| *s == q) {
                    Some((_, v)) => v.push((p, c)),
                    None => cols.push((q, vec![(p, c)])),
                }
            }
            offsets.push(idx.len());
            columns.push(cols);
        }
        Constraints {
            n,
            m,
            idx,
            coef,
            offsets,
            columns,
            norms_sq: problem.basis.iter().map(|b| b.frobenius_sq()).collect(),
            disjoint: problem.check_disjoint().is_ok(),
        }
    }

    /// `⟨B_k, Y⟩` for every k, then `tr Y`. `Y` need not be symmetric.
    fn apply(&self, y: &DMatrix<f64>) -> DVector<f64> {
        let data = y.as_slice();
        let mut out = DVector::zeros(self.m + 1);
        for k in 0..self.m {
            let (a, b) = (self.offsets[k], self.offsets[k + 1]);
            out[k] = self.idx[a..b]
                .iter()
                .zip(&self.coef[a..b])
                .map(|(&i, &c)| c * data[i])
                .sum();
        }
        out[self.m] = y.trace();
        out
    }

    /// `Σ_k z_k B_k + z_t I`.
    fn adjoint(&self, z: &DVector<f64>) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.n, self.n);
        let data = out.as_mut_slice();
        for k in 0..self.m {
            for e in self.offsets[k]..self.offsets[k + 1] {
                data[self.idx[e]] += z[k] * self.coef[e];
            }
        }
        for i in 0..self.n {
            out[(i, i)] += z[self.m];
        }
        out
    }

    /// `M_ij = ⟨A_i, X A_j W⟩` with `A_t = I`.
    fn schur(&self, x: &DMatrix<f64>, w: &DMatrix<f64>, exec: Execution) -> DMatrix<f64> {
        let n = self.n;
        let size = self.m + 1;
        let cols: Vec<DVector<f64>> = map_range(exec, size, |j| {
            let g = if j == self.m {
                x * w
            } else {
                let cols = &self.columns[j];
                let mut yx = DMatrix::zeros(n, cols.len());
                let mut wsub = DMatrix::zeros(cols.len(), n);
                for (t, (s, entries)) in cols.iter().enumerate() {
                    for &(r, c) in entries {
                        yx.column_mut(t).axpy(c, &x.column(r), 1.0);
                    }
                    wsub.row_mut(t).copy_from(&w.row(*s));
                }
                yx * wsub
            };
            self.apply(&g)
        });
        let mut m = DMatrix::zeros(size, size);
        for (j, c) in cols.iter().enumerate() {
            m.set_column(j, c);
        }
        let mt = m.transpose();
        (m + mt) * 0.5
    }

    /// Projects `X` onto `⟨B_k, X⟩ = 0`, `tr X = 1`. Returns the objective
    /// when the projection stays positive semidefinite.
    fn projected_objective(&self, x: &DMatrix<f64>, c: &DMatrix<f64>) -> Option<f64> {
        if !self.disjoint {
            return None;
        }
        let r = self.apply(x);
        let mut xp = x.clone();
        {
            let data = xp.as_mut_slice();
            for k in 0..self.m {
                let s = r[k] / self.norms_sq[k];
                for e in self.offsets[k]..self.offsets[k + 1] {
                    data[self.idx[e]] -= s * self.coef[e];
                }
            }
        }
        let xp = (&xp + xp.transpose()) * 0.5;
        if min_eigenvalue(&xp) < 0.0 {
            return None;
        }
        let tr = xp.trace();
        if tr <= 0.0 {
            return None;
        }
        Some(c.dot(&xp) / tr)
    }
}

pub fn min_eigenvalue(a: &DMatrix<f64>) -> f64 {
    SymmetricEigen::new(a.clone())
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

fn sym(a: &DMatrix<f64>) -> DMatrix<f64> {
    (a + a.transpose()) * 0.5
}

/// Largest `α` with `X + α ΔX ⪰ 0`, given the Cholesky factor of `X`.
fn max_step(chol: &Cholesky<f64, Dyn>, dx: &DMatrix<f64>) -> f64 {
    let l = chol.l();
    let Some(y) = l.solve_lower_triangular(dx) else {
        return 0.0;
    };
    let Some(z) = l.solve_lower_triangular(&y.transpose()) else {
        return 0.0;
    };
    let lam = min_eigenvalue(&sym(&z));
    if lam >= 0.0 {
        f64::INFINITY
    } else {
        -1.0 / lam
    }
}

fn factor_regularized(m: &DMatrix<f64>) -> Option<Cholesky<f64, Dyn>> {
    if let Some(c) = Cholesky::new(m.clone()) {
        return Some(c);
    }
    let scale = m.diagonal().amax().max(1e-300);
    let mut delta = 1e-14 * scale;
    for _ in 0..8 {
        let mut reg = m.clone();
        for i in 0..reg.nrows() {
            reg[(i, i)] += delta;
        }
        if let Some(c) = Cholesky::new(reg) {
            return Some(c);
        }
        delta *= 100.0;
    }
    None
}

/// Cholesky solve followed by two steps of iterative refinement against
/// the unregularized matrix.
fn refined_solve(chol: &Cholesky<f64, Dyn>, m: &DMatrix<f64>, rhs: &DVector<f64>) -> DVector<f64> {
    let mut x = chol.solve(rhs);
    for _ in 0..2 {
        let r = rhs - m * &x;
        x += chol.solve(&r);
    }
    x
}

struct Direction {
    dx: DMatrix<f64>,
    ds: DMatrix<f64>,
    dz: DVector<f64>,
}

/// Solves the max-min-eigenvalue program.
pub fn solve(problem: &SdpProblem, opts: &SolveOptions) -> SolveReport {
    let n = problem.n;
    let cons = Constraints::new(problem);
    let m = cons.m;
    let c = &problem.constant;
    let c_norm = c.norm();
    let mut b = DVector::zeros(m + 1);
    b[m] = 1.0;

    // start: X = I/n satisfies the trace row; S = τI with z_t chosen so the
    // dual residual is the centered part of C₀
    let lam_c = min_eigenvalue(c);
    let tau = 1.0f64.max(c_norm / (n as f64).sqrt());
    let mut x = DMatrix::identity(n, n) / n as f64;
    let mut z = DVector::zeros(m + 1);
    z[m] = lam_c - tau;
    let mut s = c - cons.adjoint(&z);
    let mut iterations = 0;
    let mut status = SolveStatus::MaxIterations;
    let mut upper = None;
    let mut stalls = 0;

    let y_of = |z: &DVector<f64>| -> Vec<f64> { z.iter().take(m).map(|v| -v).collect() };

    while iterations < opts.max_iter {
        let rp = &b - cons.apply(&x);
        let rd = c - &s - cons.adjoint(&z);
        let pobj = c.dot(&x);
        let dobj = z[m];
        let gap = (pobj - dobj).abs();
        let mu = x.dot(&s) / n as f64;
        let pinf = rp.norm() / (1.0 + b.norm());
        let dinf = rd.norm() / (1.0 + c_norm);

        if gap <= opts.gap_tol && pinf <= opts.feas_tol && dinf <= opts.feas_tol {
            status = SolveStatus::Optimal;
            break;
        }
        if let Some(margin) = opts.decide_sign {
            if problem_lower(problem, &y_of(&z)) >= -margin {
                status = SolveStatus::SignDecided;
                break;
            }
            if pinf <= opts.feas_tol {
                if let Some(u) = cons.projected_objective(&x, c) {
                    if u < -margin {
                        upper = Some(u);
                        status = SolveStatus::SignDecided;
                        break;
                    }
                }
            }
        }

        let (Some(xc), Some(sc)) = (Cholesky::new(x.clone()), Cholesky::new(s.clone())) else {
            status = SolveStatus::NumericalFailure;
            break;
        };
        let w = sc.inverse();
        let schur = cons.schur(&x, &w, opts.exec);
        let Some(mc) = factor_regularized(&schur) else {
            status = SolveStatus::NumericalFailure;
            break;
        };
        let xrdw = cons.apply(&(&x * &rd * &w));

        let direction = |rc: &DMatrix<f64>| -> Direction {
            let rhs = &rp - cons.apply(rc) + &xrdw;
            let dz = refined_solve(&mc, &schur, &rhs);
            let ds = &rd - cons.adjoint(&dz);
            let dx = rc - sym(&(&x * &ds * &w));
            Direction { dx, ds, dz }
        };

        // predictor
        let pred = direction(&(-&x));
        let ap = max_step(&xc, &pred.dx).min(1.0);
        let ad = max_step(&sc, &pred.ds).min(1.0);
        let mu_aff = (&x + &pred.dx * ap).dot(&(&s + &pred.ds * ad)) / n as f64;
        let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);

        // corrector
        let rc = &w * (sigma * mu) - &x - sym(&(&pred.dx * &pred.ds * &w));
        let corr = direction(&rc);
        let gamma = opts.step_fraction;
        let ap = (gamma * max_step(&xc, &corr.dx)).min(1.0);
        let ad = (gamma * max_step(&sc, &corr.ds)).min(1.0);
        if ap < 1e-10 && ad < 1e-10 {
            stalls += 1;
            if stalls >= 3 {
                status = SolveStatus::NumericalFailure;
                break;
            }
        } else {
            stalls = 0;
        }
        x += &corr.dx * ap;
        x = sym(&x);
        s += &corr.ds * ad;
        s = sym(&s);
        z += &corr.dz * ad;
        iterations += 1;
        log::trace!(
            "iter {iterations}: pobj {pobj:.10e} dobj {dobj:.10e} pinf {pinf:.2e} dinf {dinf:.2e} mu {mu:.2e} ap {ap:.3} ad {ad:.3}"
        );
    }

    let y = y_of(&z);
    let min_eig_check = problem_lower(problem, &y);
    if upper.is_none() {
        upper = cons.projected_objective(&x, c);
    }
    log::debug!("final: status {status:?} lower {min_eig_check:.10e} upper {upper:?}");
    SolveReport {
        status,
        t_star: z[m],
        gap: (c.dot(&x) - z[m]).abs(),
        y,
        iterations,
        min_eig_check,
        upper_bound: upper,
        primal: x,
    }
}

fn problem_lower(problem: &SdpProblem, y: &[f64]) -> f64 {
    min_eigenvalue(&problem.affine(y))
}
