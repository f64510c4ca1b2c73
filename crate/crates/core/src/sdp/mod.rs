//! Max-min-eigenvalue semidefinite programs: solver, certificates and
//! SDPA interchange.

mod problem;
mod sdpa;
mod solver;

pub use problem::{SdpProblem, SymSparse};
pub use sdpa::{read_sdpa, read_sdpa_solution, write_sdpa};
pub use solver::{min_eigenvalue, solve, SolveOptions, SolveReport, SolveStatus};

use serde::Serialize;

/// Independent recheck of a solver claim.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Certificate {
    /// Smallest eigenvalue of `C₀ + Σ y_k B_k`.
    pub min_eig: f64,
    /// `|⟨C₀, X⟩ − min_eig|` for the stored primal iterate.
    pub gap: f64,
    /// Largest violation of `⟨B_k, X⟩ = 0`, `tr X = 1`, `X ⪰ 0`.
    pub dual_feasibility: f64,
    /// Objective of the projected primal iterate, when it stays feasible.
    pub upper_bound: Option<f64>,
}

pub fn residuals(report: &SolveReport, problem: &SdpProblem) -> Certificate {
    let x = &report.primal;
    let min_eig = min_eigenvalue(&problem.affine(&report.y));
    let mut infeas = (x.trace() - 1.0).abs();
    for b in &problem.basis {
        infeas = infeas.max(b.inner(x).abs());
    }
    infeas = infeas.max(-min_eigenvalue(x));
    Certificate {
        min_eig,
        gap: (problem.constant.dot(x) - min_eig).abs(),
        dual_feasibility: infeas,
        upper_bound: report.upper_bound,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    #[test]
    fn identity_certificate() {
        let p = SdpProblem::new(DMatrix::identity(3, 3), vec![]).unwrap();
        let r = solve(&p, &SolveOptions::default());
        let cert = residuals(&r, &p);
        assert!((cert.min_eig - 1.0).abs() < 1e-12);
        assert!(cert.gap <= 1e-9);
        assert!(cert.dual_feasibility <= 1e-8);
    }

    #[test]
    fn infeasible_certificate() {
        let c = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        let p = SdpProblem::new(c, vec![]).unwrap();
        let cert = residuals(&solve(&p, &SolveOptions::default()), &p);
        assert!((cert.min_eig + 1.0).abs() < 1e-12);
        assert!(cert.gap <= 1e-9);
    }
}
