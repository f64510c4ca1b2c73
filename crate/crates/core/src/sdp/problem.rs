use nalgebra::DMatrix;

use crate::error::Error;

/// Symmetric sparse matrix stored as its upper triangle.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SymSparse {
    /// `(i, j, value)` with `i <= j`; `(j, i)` carries the same value.
    pub entries: Vec<(usize, usize, f64)>,
}

impl SymSparse {
    pub fn new(entries: Vec<(usize, usize, f64)>) -> Self {
        let entries = entries
            .into_iter()
            .map(|(i, j, v)| if i <= j { (i, j, v) } else { (j, i, v) })
            .collect();
        SymSparse { entries }
    }

    /// Both orientations of every off-diagonal entry.
    pub fn oriented(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::with_capacity(2 * self.entries.len());
        for &(i, j, v) in &self.entries {
            out.push((i, j, v));
            if i != j {
                out.push((j, i, v));
            }
        }
        out
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.entries
            .iter()
            .map(|&(i, j, v)| if i == j { v * v } else { 2.0 * v * v })
            .sum()
    }

    /// `⟨self, Y⟩` for a dense symmetric `Y`.
    pub fn inner(&self, y: &DMatrix<f64>) -> f64 {
        self.entries
            .iter()
            .map(|&(i, j, v)| {
                if i == j {
                    v * y[(i, i)]
                } else {
                    v * (y[(i, j)] + y[(j, i)])
                }
            })
            .sum()
    }

    pub fn add_to(&self, target: &mut DMatrix<f64>, scale: f64) {
        for &(i, j, v) in &self.entries {
            target[(i, j)] += scale * v;
            if i != j {
                target[(j, i)] += scale * v;
            }
        }
    }
}

/// `maximize t  s.t.  C₀ + Σ_k y_k B_k − t·I ⪰ 0`, `y` free.
#[derive(Debug, Clone, PartialEq)]
pub struct SdpProblem {
    pub n: usize,
    pub constant: DMatrix<f64>,
    pub basis: Vec<SymSparse>,
}

impl SdpProblem {
    pub fn new(constant: DMatrix<f64>, basis: Vec<SymSparse>) -> Result<Self, Error> {
        let p = SdpProblem {
            n: constant.nrows(),
            constant,
            basis,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn variables(&self) -> usize {
        self.basis.len()
    }

    /// Checks dimensions, symmetry, finiteness and disjoint supports.
    pub fn validate(&self) -> Result<(), Error> {
        self.validate_structure()?;
        self.check_disjoint()
    }

    /// Dimension, symmetry and finiteness checks only.
    pub fn validate_structure(&self) -> Result<(), Error> {
        let n = self.n;
        if n == 0 || self.constant.nrows() != n || self.constant.ncols() != n {
            return Err(Error::Problem(
                "constant must be a non-empty square matrix".into(),
            ));
        }
        for i in 0..n {
            for j in 0..i {
                if self.constant[(i, j)] != self.constant[(j, i)] {
                    return Err(Error::Problem(format!(
                        "constant not symmetric at ({i},{j})"
                    )));
                }
            }
        }
        if self.constant.iter().any(|v| !v.is_finite()) {
            return Err(Error::Problem("non-finite constant entry".into()));
        }
        for (k, b) in self.basis.iter().enumerate() {
            if b.entries.is_empty() {
                return Err(Error::Problem(format!("basis matrix {k} is empty")));
            }
            for &(i, j, v) in &b.entries {
                if i > j || j >= n {
                    return Err(Error::Problem(format!("basis {k}: bad index ({i},{j})")));
                }
                if !v.is_finite() || v == 0.0 {
                    return Err(Error::Problem(format!("basis {k}: bad coefficient {v}")));
                }
            }
        }
        Ok(())
    }

    /// Basis matrices must have pairwise disjoint supports.
    pub fn check_disjoint(&self) -> Result<(), Error> {
        let n = self.n;
        let mut owner = vec![usize::MAX; n * n];
        for (k, b) in self.basis.iter().enumerate() {
            for &(i, j, _) in &b.entries {
                if owner[i * n + j] != usize::MAX {
                    return Err(Error::Problem(format!(
                        "basis {k} overlaps basis {} at ({i},{j})",
                        owner[i * n + j]
                    )));
                }
                owner[i * n + j] = k;
            }
        }
        Ok(())
    }

    /// `C₀ + Σ_k y_k B_k`.
    pub fn affine(&self, y: &[f64]) -> DMatrix<f64> {
        let mut m = self.constant.clone();
        for (b, &yk) in self.basis.iter().zip(y) {
            b.add_to(&mut m, yk);
        }
        m
    }

    /// Same program with every matrix conjugated by the orthogonal `q`.
    /// Basis supports become dense and generally overlap.
    pub fn rotated(&self, q: &DMatrix<f64>) -> SdpProblem {
        let conj = |m: &DMatrix<f64>| q.transpose() * m * q;
        let basis = self
            .basis
            .iter()
            .map(|b| {
                let mut d = DMatrix::zeros(self.n, self.n);
                b.add_to(&mut d, 1.0);
                let r = conj(&d);
                let mut entries = Vec::new();
                for j in 0..self.n {
                    for i in 0..=j {
                        if r[(i, j)] != 0.0 {
                            entries.push((i, j, 0.5 * (r[(i, j)] + r[(j, i)])));
                        }
                    }
                }
                SymSparse { entries }
            })
            .collect();
        let c = conj(&self.constant);
        SdpProblem {
            n: self.n,
            constant: (&c + c.transpose()) * 0.5,
            basis,
        }
    }

    pub fn scaled(&self, s: f64) -> SdpProblem {
        SdpProblem {
            n: self.n,
            constant: &self.constant * s,
            basis: self
                .basis
                .iter()
                .map(|b| SymSparse {
                    entries: b.entries.iter().map(|&(i, j, v)| (i, j, v * s)).collect(),
                })
                .collect(),
        }
    }
}
