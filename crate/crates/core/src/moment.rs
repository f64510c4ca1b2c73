//! Scalar-extended moment matrices.
//!
//! Entries are pooled by key class: two entries with the same canonical
//! symbol multiset share one unknown. This pooling is the only mechanism
//! that imposes linear identifications, including the factorization
//! constraints introduced by scalar extension.

use std::collections::HashMap;

use nalgebra::DMatrix;

use crate::algebra::{EntryKey, ExtendedGenerator, LetterKind, Mode, SymbolMultiset, Word};
use crate::dist::{DistributionTable, Factor};
use crate::error::Error;
use crate::par::{map_range, Execution};
use crate::scenario::Scenario;
use crate::sdp::{SdpProblem, SymSparse};

/// Coefficients of known factors below this magnitude pin the entry to 0.
const ZERO_COEF: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Entry {
    Zero,
    Class(usize),
}

#[derive(Debug, Clone)]
pub struct SymbolicMomentMatrix {
    pub generators: Vec<ExtendedGenerator>,
    /// Upper triangle, row-major: `(0,0), (0,1), …, (0,n-1), (1,1), …`.
    entries: Vec<Entry>,
    pub classes: Vec<SymbolMultiset>,
    pub mode: Mode,
}

fn packed(n: usize, i: usize, j: usize) -> usize {
    i * n - i * (i + 1) / 2 + j
}

impl SymbolicMomentMatrix {
    pub fn dimension(&self) -> usize {
        self.generators.len()
    }

    pub fn entry(&self, i: usize, j: usize) -> Entry {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        self.entries[packed(self.dimension(), i, j)]
    }

    pub fn class(&self, id: usize) -> &SymbolMultiset {
        &self.classes[id]
    }
}

/// Builds the symbolic matrix of a generating set. The first generator must
/// be the plain identity.
pub fn assemble(
    generators: &[ExtendedGenerator],
    scenario: &Scenario,
    exec: Execution,
) -> Result<SymbolicMomentMatrix, Error> {
    match generators.first() {
        Some(g) if g.word.is_identity() && g.tags.is_empty() => {}
        _ => {
            return Err(Error::Config(
                "generating set must start with the identity".into(),
            ))
        }
    }
    let n = generators.len();
    let algebra = scenario.algebra();
    let rows: Vec<Result<Vec<EntryKey>, Error>> = map_range(exec, n, |i| {
        (i..n)
            .map(|j| {
                algebra
                    .entry_key(&generators[i], &generators[j])
                    .map_err(Error::from)
            })
            .collect()
    });
    let mut pool: HashMap<SymbolMultiset, usize> = HashMap::new();
    let mut classes = Vec::new();
    let mut entries = Vec::with_capacity(n * (n + 1) / 2);
    for row in rows {
        for key in row? {
            entries.push(match key {
                EntryKey::Zero => Entry::Zero,
                EntryKey::Symbols(s) => {
                    let next = classes.len();
                    let id = *pool.entry(s.clone()).or_insert(next);
                    if id == next {
                        classes.push(s);
                    }
                    Entry::Class(id)
                }
            });
        }
    }
    Ok(SymbolicMomentMatrix {
        generators: generators.to_vec(),
        entries,
        classes,
        mode: scenario.mode,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProblemStats {
    pub dimension: usize,
    /// Non-constant key classes.
    pub variables: usize,
    pub structural_zeros: usize,
}

pub fn problem_stats(symbolic: &SymbolicMomentMatrix) -> ProblemStats {
    ProblemStats {
        dimension: symbolic.dimension(),
        variables: symbolic.classes.iter().filter(|c| !c.is_empty()).count(),
        structural_zeros: symbolic
            .entries
            .iter()
            .filter(|e| **e == Entry::Zero)
            .count(),
    }
}

/// Value of a single symbol `⟨w⟩`, if the distribution determines it.
///
/// A symbol is known when its word uses at most one input per party; such a
/// canonical word has one letter per party.
pub fn symbol_value(word: &Word, dist: &DistributionTable) -> Result<Option<f64>, Error> {
    if !word.single_input_per_party() {
        return Ok(None);
    }
    let factors: Vec<Factor> = word
        .letters()
        .iter()
        .map(|l| match l.kind {
            LetterKind::Observable => Factor::Sign {
                party: l.party as usize,
                input: l.input as usize,
            },
            LetterKind::Projector(o) => Factor::Outcome {
                party: l.party as usize,
                input: l.input as usize,
                outcome: o as usize,
            },
        })
        .collect();
    let (value, spread) = dist.local_expectation(&factors)?;
    if spread > 1e-6 {
        return Err(Error::Signaling(format!(
            "⟨{word}⟩ varies by {spread:.3e} across inputs of absent parties"
        )));
    }
    if spread > 1e-9 {
        log::warn!("⟨{word}⟩ varies by {spread:.3e} across inputs of absent parties");
    }
    Ok(Some(value))
}

/// Value of a symbol class, if every symbol in it is known.
pub fn known_value(class: &SymbolMultiset, dist: &DistributionTable) -> Result<Option<f64>, Error> {
    let mut value = 1.0;
    for w in class.symbols() {
        match symbol_value(w, dist)? {
            Some(v) => value *= v,
            None => return Ok(None),
        }
    }
    Ok(Some(value))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    /// Unknown part of the entry keys, up to conjugation.
    pub key: SymbolMultiset,
    /// `(i, j, coefficient)` with `i <= j`.
    pub positions: Vec<(usize, usize, f64)>,
}

/// Moment matrix with known entries substituted:
/// `Γ = constant + Σ_k x_k · (positions of k, scaled by their coefficients)`.
#[derive(Debug, Clone, PartialEq)]
pub struct InstantiatedProblem {
    pub n: usize,
    pub constant: DMatrix<f64>,
    pub variables: Vec<Variable>,
}

impl InstantiatedProblem {
    pub fn to_sdp(&self) -> Result<SdpProblem, Error> {
        SdpProblem::new(
            self.constant.clone(),
            self.variables
                .iter()
                .map(|v| SymSparse::new(v.positions.clone()))
                .collect(),
        )
    }
}

#[derive(Debug, Clone)]
enum ClassValue {
    Constant(f64),
    Scaled { coef: f64, var: usize },
}

fn check_arities(scenario: &Scenario, dist: &DistributionTable) -> Result<(), Error> {
    if dist.parties() != scenario.parties.len() {
        return Err(Error::Distribution(format!(
            "{} parties in the distribution, {} in the scenario",
            dist.parties(),
            scenario.parties.len()
        )));
    }
    for (k, p) in scenario.parties.iter().enumerate() {
        if dist.inputs()[k] != p.inputs || p.outputs.iter().any(|&o| o != dist.outputs()[k]) {
            return Err(Error::Distribution(format!(
                "party {:?}: arities differ between scenario and distribution",
                p.name
            )));
        }
    }
    Ok(())
}

/// Substitutes every entry the distribution determines. Known factors of a
/// partially known entry become its coefficient on the remaining unknown.
pub fn instantiate(
    symbolic: &SymbolicMomentMatrix,
    dist: &DistributionTable,
    scenario: &Scenario,
) -> Result<InstantiatedProblem, Error> {
    check_arities(scenario, dist)?;
    dist.validate(1e-9)?;
    let mode = symbolic.mode;
    let mut cache: HashMap<Word, Option<f64>> = HashMap::new();
    let mut var_ids: HashMap<SymbolMultiset, usize> = HashMap::new();
    let mut variables: Vec<Variable> = Vec::new();
    let mut values = Vec::with_capacity(symbolic.classes.len());
    for class in &symbolic.classes {
        let mut coef = 1.0;
        let mut unknown = Vec::new();
        for w in class.symbols() {
            let v = match cache.get(w) {
                Some(v) => *v,
                None => {
                    let v = symbol_value(w, dist)?;
                    cache.insert(w.clone(), v);
                    v
                }
            };
            match v {
                Some(v) => coef *= v,
                None => unknown.push(w.clone()),
            }
        }
        if unknown.is_empty() || coef.abs() <= ZERO_COEF {
            values.push(ClassValue::Constant(if unknown.is_empty() {
                coef
            } else {
                0.0
            }));
            continue;
        }
        let key = SymbolMultiset::from_words(unknown).representative(mode);
        let next = variables.len();
        let var = *var_ids.entry(key.clone()).or_insert(next);
        if var == next {
            variables.push(Variable {
                key,
                positions: Vec::new(),
            });
        }
        values.push(ClassValue::Scaled { coef, var });
    }

    let n = symbolic.dimension();
    let mut constant = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let Entry::Class(id) = symbolic.entry(i, j) else {
                continue;
            };
            match values[id] {
                ClassValue::Constant(v) => {
                    constant[(i, j)] = v;
                    constant[(j, i)] = v;
                }
                ClassValue::Scaled { coef, var } => variables[var].positions.push((i, j, coef)),
            }
        }
    }
    Ok(InstantiatedProblem {
        n,
        constant,
        variables,
    })
}
