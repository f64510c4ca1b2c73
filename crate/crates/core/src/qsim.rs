//! Generators of tripartite-line distributions: the noisy `P22` family,
//! lossy entanglement swapping and random bilocal / biquantum samples.
//!
//! Systems are ordered `(A, B1, B2, C)` with big-endian basis indices.

use std::path::{Path, PathBuf};

use nalgebra::{Complex, DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::dist::DistributionTable;
use crate::error::Error;

pub type C64 = Complex<f64>;
pub type Operator = DMatrix<C64>;

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// `P_v = v·P22 + (1 − v)·P_0` with `P22(abc|xyz) = [1 + (−1)^{a+b+c+xy+yz}]/8`.
pub fn p22_family(v: f64) -> DistributionTable {
    DistributionTable::from_fn(vec![2, 2, 2], vec![2, 2, 2], |i, o| {
        let parity = o[0] + o[1] + o[2] + i[0] * i[1] + i[1] * i[2];
        let p22 = if parity % 2 == 0 { 0.25 } else { 0.0 };
        v * p22 + (1.0 - v) / 8.0
    })
}

/// `cosθ|00⟩ + sinθ|11⟩`.
pub fn entangled_pair(theta: f64) -> DVector<f64> {
    DVector::from_vec(vec![theta.cos(), 0.0, 0.0, theta.sin()])
}

/// `{η·Π₊, η·Π₋, (1 − η)·𝟙}` for the observable `cosα·Z + x_sign·sinα·X`.
pub fn lossy_povm(alpha: f64, x_sign: f64, eta: f64) -> Vec<Operator> {
    let (z, x) = (alpha.cos(), x_sign * alpha.sin());
    let plus = DMatrix::from_row_slice(2, 2, &[1.0 + z, x, x, 1.0 - z]) * 0.5;
    let minus = DMatrix::<f64>::identity(2, 2) - &plus;
    let fail = DMatrix::<f64>::identity(2, 2) * (1.0 - eta);
    [plus * eta, minus * eta, fail]
        .into_iter()
        .map(|m| m.map(c))
        .collect()
}

/// Bell-state measurement, outcomes `φ+, φ−, ψ+, ψ−`.
pub fn bsm() -> Vec<Operator> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let states = [
        [s, 0.0, 0.0, s],
        [s, 0.0, 0.0, -s],
        [0.0, s, s, 0.0],
        [0.0, s, -s, 0.0],
    ];
    states
        .iter()
        .map(|v| {
            let v = DVector::from_row_slice(v).map(c);
            &v * v.adjoint()
        })
        .collect()
}

/// Two independent pure sources measured by `A`, `B` (on both halves) and `C`.
#[derive(Debug, Clone)]
pub struct BiquantumModel {
    /// State of `(A, B1)`.
    pub psi_ab: DVector<C64>,
    /// State of `(B2, C)`.
    pub psi_bc: DVector<C64>,
    /// `a[x][o]`: qubit POVM elements of party A.
    pub a: Vec<Vec<Operator>>,
    /// `b[y][o]`: POVM elements on `B1 ⊗ B2`.
    pub b: Vec<Vec<Operator>>,
    pub c: Vec<Vec<Operator>>,
}

/// `Tr_A[(E ⊗ 𝟙)·|ψ⟩⟨ψ|]` on the partner qubit.
fn steer_first(psi: &DVector<C64>, e: &Operator) -> Operator {
    let mut out = Operator::zeros(2, 2);
    for b in 0..2 {
        for bp in 0..2 {
            let mut acc = c(0.0);
            for a in 0..2 {
                for ap in 0..2 {
                    acc += e[(ap, a)] * psi[2 * a + b] * psi[2 * ap + bp].conj();
                }
            }
            out[(b, bp)] = acc;
        }
    }
    out
}

/// `Tr_C[(𝟙 ⊗ E)·|ψ⟩⟨ψ|]` on the partner qubit.
fn steer_second(psi: &DVector<C64>, e: &Operator) -> Operator {
    let mut out = Operator::zeros(2, 2);
    for b in 0..2 {
        for bp in 0..2 {
            let mut acc = c(0.0);
            for k in 0..2 {
                for kp in 0..2 {
                    acc += e[(kp, k)] * psi[2 * b + k] * psi[2 * bp + kp].conj();
                }
            }
            out[(b, bp)] = acc;
        }
    }
    out
}

impl BiquantumModel {
    pub fn distribution(&self) -> DistributionTable {
        let arity = |ops: &Vec<Vec<Operator>>| ops.first().map_or(0, Vec::len);
        let inputs = vec![self.a.len(), self.b.len(), self.c.len()];
        let outputs = vec![arity(&self.a), arity(&self.b), arity(&self.c)];
        let ra: Vec<Vec<Operator>> = self
            .a
            .iter()
            .map(|povm| povm.iter().map(|e| steer_first(&self.psi_ab, e)).collect())
            .collect();
        let rc: Vec<Vec<Operator>> = self
            .c
            .iter()
            .map(|povm| povm.iter().map(|e| steer_second(&self.psi_bc, e)).collect())
            .collect();
        DistributionTable::from_fn(inputs, outputs, |i, o| {
            let sigma = ra[i[0]][o[0]].kronecker(&rc[i[2]][o[2]]);
            let b = &self.b[i[1]][o[1]];
            let mut p = c(0.0);
            for r in 0..4 {
                for s in 0..4 {
                    p += b[(r, s)] * sigma[(s, r)];
                }
            }
            p.re.max(0.0)
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SwapConfig {
    pub theta_ab: f64,
    pub theta_bc: f64,
    pub alpha0: f64,
    pub alpha1: f64,
    pub eta_a: f64,
    pub eta_c: f64,
}

impl SwapConfig {
    pub fn validate(&self) -> Result<(), Error> {
        let quarter = std::f64::consts::FRAC_PI_4 + 1e-12;
        for (name, v) in [("theta_ab", self.theta_ab), ("theta_bc", self.theta_bc)] {
            if !(0.0..=quarter).contains(&v) {
                return Err(Error::Config(format!("{name} = {v} outside [0, π/4]")));
            }
        }
        for (name, v) in [("eta_a", self.eta_a), ("eta_c", self.eta_c)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Config(format!("{name} = {v} outside [0, 1]")));
            }
        }
        if !self.alpha0.is_finite() || !self.alpha1.is_finite() {
            return Err(Error::Config("non-finite measurement angle".into()));
        }
        Ok(())
    }

    pub fn model(&self) -> BiquantumModel {
        let alpha = [self.alpha0, self.alpha1];
        let sign_a = [-1.0, 1.0];
        let sign_c = [1.0, -1.0];
        BiquantumModel {
            psi_ab: entangled_pair(self.theta_ab).map(c),
            psi_bc: entangled_pair(self.theta_bc).map(c),
            a: (0..2)
                .map(|x| lossy_povm(alpha[x], sign_a[x], self.eta_a))
                .collect(),
            b: vec![bsm()],
            c: (0..2)
                .map(|z| lossy_povm(alpha[z], sign_c[z], self.eta_c))
                .collect(),
        }
    }
}

/// Lossy entanglement swapping; inputs `(2, 1, 2)`, outputs `(3, 4, 3)`.
pub fn swap_distribution(cfg: &SwapConfig) -> Result<DistributionTable, Error> {
    cfg.validate()?;
    Ok(cfg.model().distribution())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LineArities {
    pub inputs: [usize; 3],
    pub outputs: [usize; 3],
}

impl LineArities {
    pub fn binary() -> Self {
        LineArities {
            inputs: [2, 2, 2],
            outputs: [2, 2, 2],
        }
    }

    pub fn swap() -> Self {
        LineArities {
            inputs: [2, 1, 2],
            outputs: [3, 4, 3],
        }
    }
}

fn simplex(rng: &mut impl Rng, k: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..k)
        .map(|_| -rng.random::<f64>().max(1e-300).ln())
        .collect();
    let total: f64 = w.iter().sum();
    w.into_iter().map(|x| x / total).collect()
}

/// Half deterministic, half uniformly random stochastic response.
fn response(rng: &mut impl Rng, outputs: usize) -> Vec<f64> {
    if rng.random_bool(0.5) {
        let mut r = vec![0.0; outputs];
        r[rng.random_range(0..outputs)] = 1.0;
        r
    } else {
        simplex(rng, outputs)
    }
}

/// Finite bilocal mixture
/// `Σ_{λ1,λ2} q1(λ1) q2(λ2) p(a|x,λ1) p(b|y,λ1,λ2) p(c|z,λ2)`
/// with at most four values per hidden variable.
pub fn random_bilocal(seed: u64, arities: LineArities) -> DistributionTable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k1 = rng.random_range(1..=4);
    let k2 = rng.random_range(1..=4);
    let q1 = simplex(&mut rng, k1);
    let q2 = simplex(&mut rng, k2);
    let [ia, ib, ic] = arities.inputs;
    let [oa, ob, oc] = arities.outputs;
    let ra: Vec<Vec<Vec<f64>>> = (0..k1)
        .map(|_| (0..ia).map(|_| response(&mut rng, oa)).collect())
        .collect();
    let rb: Vec<Vec<Vec<Vec<f64>>>> = (0..k1)
        .map(|_| {
            (0..k2)
                .map(|_| (0..ib).map(|_| response(&mut rng, ob)).collect())
                .collect()
        })
        .collect();
    let rc: Vec<Vec<Vec<f64>>> = (0..k2)
        .map(|_| (0..ic).map(|_| response(&mut rng, oc)).collect())
        .collect();
    DistributionTable::from_fn(arities.inputs.to_vec(), arities.outputs.to_vec(), |i, o| {
        let mut p = 0.0;
        for l1 in 0..k1 {
            for l2 in 0..k2 {
                p += q1[l1]
                    * q2[l2]
                    * ra[l1][i[0]][o[0]]
                    * rb[l1][l2][i[1]][o[1]]
                    * rc[l2][i[2]][o[2]];
            }
        }
        p
    })
}

fn gaussian(rng: &mut impl Rng) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

fn random_state(rng: &mut impl Rng, dim: usize) -> DVector<C64> {
    let v = DVector::from_fn(dim, |_, _| gaussian(rng));
    let norm = v.norm();
    v / c(norm)
}

fn random_unitary(rng: &mut impl Rng, dim: usize) -> Operator {
    Operator::from_fn(dim, dim, |_, _| gaussian(rng)).qr().q()
}

/// Two-outcome projective measurement; the first element projects onto
/// `rank` columns of a random unitary.
fn random_projective(rng: &mut impl Rng, dim: usize, rank: usize) -> Vec<Operator> {
    let u = random_unitary(rng, dim);
    let cols = u.columns(0, rank);
    let p = cols * cols.adjoint();
    let q = Operator::identity(dim, dim) - &p;
    vec![p, q]
}

/// Random pure states and random binary projective measurements on the
/// binary line (two inputs per party).
pub fn random_biquantum(seed: u64) -> DistributionTable {
    random_biquantum_model(seed).distribution()
}

pub fn random_biquantum_model(seed: u64) -> BiquantumModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let psi_ab = random_state(&mut rng, 4);
    let psi_bc = random_state(&mut rng, 4);
    let a = (0..2).map(|_| random_projective(&mut rng, 2, 1)).collect();
    let b = (0..2)
        .map(|_| {
            let rank = rng.random_range(1..=3);
            random_projective(&mut rng, 4, rank)
        })
        .collect();
    let c = (0..2).map(|_| random_projective(&mut rng, 2, 1)).collect();
    BiquantumModel {
        psi_ab,
        psi_bc,
        a,
        b,
        c,
    }
}

/// Distribution source as written in configuration files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family")]
pub enum DistributionSpec {
    P22 {
        v: f64,
    },
    #[serde(rename = "swap")]
    Swap(SwapConfig),
    #[serde(rename = "file")]
    File {
        path: PathBuf,
    },
}

impl DistributionSpec {
    pub fn from_json(text: &str) -> Result<Self, Error> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self, Error> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    /// Replaces the visibility of a `P22` spec.
    pub fn with_visibility(&self, v: f64) -> Result<Self, Error> {
        match self {
            DistributionSpec::P22 { .. } => Ok(DistributionSpec::P22 { v }),
            _ => Err(Error::Config(
                "visibility applies to the P22 family only".into(),
            )),
        }
    }

    /// Builds the table; relative file paths resolve against `base`.
    pub fn build(&self, base: &Path) -> Result<DistributionTable, Error> {
        match self {
            DistributionSpec::P22 { v } => {
                if !(0.0..=1.0).contains(v) {
                    return Err(Error::Config(format!("visibility {v} outside [0, 1]")));
                }
                Ok(p22_family(*v))
            }
            DistributionSpec::Swap(cfg) => swap_distribution(cfg),
            DistributionSpec::File { path } => DistributionTable::load(&base.join(path)),
        }
    }
}
