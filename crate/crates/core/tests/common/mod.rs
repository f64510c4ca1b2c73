#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use netsdp::algebra::{Letter, LetterKind, Mode, Reduced, Word};
use netsdp::qsim::{BiquantumModel, Operator, C64};
use netsdp::sdp::{SdpProblem, SymSparse};
use netsdp::DistributionTable;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Rewrites by applying one randomly chosen applicable rule at a time until
/// none applies: adjacent commutations toward the target order and
/// reductions of adjacent letters of one input.
pub fn rewrite_random_order(letters: &[Letter], mode: Mode, rng: &mut impl Rng) -> Reduced {
    let mut w = letters.to_vec();
    loop {
        let mut moves = Vec::new();
        for k in 0..w.len().saturating_sub(1) {
            let (a, b) = (w[k], w[k + 1]);
            let swap = match mode {
                Mode::Quantum => a.party > b.party,
                Mode::Classical => (a.party, a.input) > (b.party, b.input),
            };
            let same = a.party == b.party && a.input == b.input;
            if swap || same {
                moves.push(k);
            }
        }
        if moves.is_empty() {
            return Reduced::Word(Word::from_letters(w));
        }
        let k = moves[rng.random_range(0..moves.len())];
        let (a, b) = (w[k], w[k + 1]);
        if a.party == b.party && a.input == b.input {
            match (a.kind, b.kind) {
                (LetterKind::Projector(x), LetterKind::Projector(y)) if x != y => {
                    return Reduced::Zero
                }
                (LetterKind::Projector(_), LetterKind::Projector(_)) => {
                    w.remove(k + 1);
                }
                _ => {
                    w.drain(k..k + 2);
                }
            }
        } else {
            w.swap(k, k + 1);
        }
    }
}

/// Random letters over three parties: inputs 0 and 1 are binary
/// observables, input 2 carries projectors onto outcomes 0 and 1.
pub fn random_letters(rng: &mut impl Rng, max_len: usize) -> Vec<Letter> {
    let len = rng.random_range(0..=max_len);
    (0..len)
        .map(|_| {
            let party = rng.random_range(0..3u16);
            let input = rng.random_range(0..3u16);
            if input == 2 {
                Letter::projector(party, input, rng.random_range(0..2))
            } else {
                Letter::observable(party, input)
            }
        })
        .collect()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn kron(a: &Operator, b: &Operator) -> Operator {
    let (ra, ca) = a.shape();
    let (rb, cb) = b.shape();
    Operator::from_fn(ra * rb, ca * cb, |i, j| {
        a[(i / rb, j / cb)] * b[(i % rb, j % cb)]
    })
}

/// Born rule on the full 16-dimensional space `(A, B1, B2, C)`.
pub fn dense_distribution(model: &BiquantumModel) -> DistributionTable {
    let psi_ab = &model.psi_ab;
    let psi_bc = &model.psi_bc;
    let psi = DVector::from_fn(16, |k, _| psi_ab[k / 4] * psi_bc[k % 4]);
    let arity = |ops: &Vec<Vec<Operator>>| ops[0].len();
    DistributionTable::from_fn(
        vec![model.a.len(), model.b.len(), model.c.len()],
        vec![arity(&model.a), arity(&model.b), arity(&model.c)],
        |i, o| {
            let op = kron(
                &kron(&model.a[i[0]][o[0]], &model.b[i[1]][o[1]]),
                &model.c[i[2]][o[2]],
            );
            let v = &op * &psi;
            psi.iter()
                .zip(v.iter())
                .map(|(x, y)| x.conj() * y)
                .sum::<C64>()
                .re
        },
    )
}

/// Largest entrywise difference.
pub fn max_diff(p: &DistributionTable, q: &DistributionTable) -> f64 {
    p.values()
        .iter()
        .zip(q.values())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}

pub fn min_eig(m: &DMatrix<f64>) -> f64 {
    m.clone().symmetric_eigen().eigenvalues.min()
}

/// `max_y λmin(C + Σ y_k B_k)` by a coarse grid followed by shrinking
/// coordinate refinement. Only meant for one or two variables.
pub fn brute_force_optimum(problem: &SdpProblem, radius: f64) -> f64 {
    let m = problem.basis.len();
    let value = |y: &[f64]| min_eig(&problem.affine(y));
    if m == 0 {
        return value(&[]);
    }
    let steps = 40;
    let mut best = vec![0.0; m];
    let mut best_v = value(&best);
    let mut idx = vec![0usize; m];
    loop {
        let y: Vec<f64> = idx
            .iter()
            .map(|&k| -radius + 2.0 * radius * k as f64 / steps as f64)
            .collect();
        let v = value(&y);
        if v > best_v {
            best_v = v;
            best = y;
        }
        let mut d = 0;
        while d < m {
            idx[d] += 1;
            if idx[d] <= steps {
                break;
            }
            idx[d] = 0;
            d += 1;
        }
        if d == m {
            break;
        }
    }
    let mut h = radius / steps as f64;
    while h > 1e-11 {
        let mut improved = false;
        for k in 0..m {
            for s in [-1.0, 1.0] {
                let mut y = best.clone();
                y[k] += s * h;
                let v = value(&y);
                if v > best_v {
                    best_v = v;
                    best = y;
                    improved = true;
                }
            }
        }
        if !improved {
            h *= 0.5;
        }
    }
    best_v
}

/// Correlator-only CHSH moment matrix at level 1 with unknown same-party
/// correlators `⟨A0A1⟩`, `⟨B0B1⟩` and zero marginals; `t* = 1 − v`.
pub fn chsh_problem(v: f64) -> SdpProblem {
    let e = v / std::f64::consts::SQRT_2;
    let mut c = DMatrix::identity(5, 5);
    let corr = [[e, e], [e, -e]];
    for x in 0..2 {
        for y in 0..2 {
            c[(1 + x, 3 + y)] = corr[x][y];
            c[(3 + y, 1 + x)] = corr[x][y];
        }
    }
    SdpProblem::new(
        c,
        vec![
            SymSparse::new(vec![(1, 2, 1.0)]),
            SymSparse::new(vec![(3, 4, 1.0)]),
        ],
    )
    .unwrap()
}

/// Ten small programs with independently known optima where available.
pub fn solver_suite() -> Vec<(&'static str, SdpProblem, Option<f64>)> {
    let sym = |n: usize, v: &[f64]| DMatrix::from_row_slice(n, n, v);
    let mut out = vec![
        (
            "identity3",
            SdpProblem::new(DMatrix::identity(3, 3), vec![]).unwrap(),
            Some(1.0),
        ),
        (
            "free-offdiag",
            SdpProblem::new(
                DMatrix::identity(2, 2),
                vec![SymSparse::new(vec![(0, 1, 1.0)])],
            )
            .unwrap(),
            Some(1.0),
        ),
        (
            "fixed-indefinite",
            SdpProblem::new(sym(2, &[1.0, 2.0, 2.0, 1.0]), vec![]).unwrap(),
            Some(-1.0),
        ),
        (
            "diag",
            SdpProblem::new(
                DMatrix::from_diagonal(&DVector::from_vec(vec![3.0, 1.0, 2.0])),
                vec![],
            )
            .unwrap(),
            Some(1.0),
        ),
        (
            "diagonal-tradeoff",
            SdpProblem::new(
                sym(3, &[1.0, 0.5, 0.0, 0.5, 0.0, 0.0, 0.0, 0.0, 2.0]),
                vec![SymSparse::new(vec![(1, 1, 1.0), (2, 2, -1.0)])],
            )
            .unwrap(),
            None,
        ),
        ("chsh-0.5", chsh_problem(0.5), Some(0.5)),
        ("chsh-1.0", chsh_problem(1.0), Some(0.0)),
        ("chsh-1.2", chsh_problem(1.2), Some(-0.2)),
    ];
    let completion = |a: f64, b: f64| {
        SdpProblem::new(
            sym(3, &[1.0, a, 0.0, a, 1.0, b, 0.0, b, 1.0]),
            vec![SymSparse::new(vec![(0, 2, 1.0)])],
        )
        .unwrap()
    };
    out.push(("completion-0.9", completion(0.9, 0.9), None));
    out.push(("completion-mixed", completion(0.8, -0.95), None));
    out
}
