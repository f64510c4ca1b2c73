//! Noncommutative measurement-operator algebra.
//!
//! Letters are the atomic measurement operators of a scenario: projectors
//! `Π_{o|i}` for multi-outcome inputs (the last outcome is eliminated through
//! completeness) and dichotomic observables `Π_0 - Π_1` for binary inputs.
//! Words are products of letters kept in a canonical form. All letters are
//! self-adjoint, so the adjoint of a word is its reversal.
//!
//! Entry keys of a moment matrix are multisets of expectation symbols
//! `⟨w⟩`, built by splitting words into factors that belong to causally
//! disconnected groups of parties.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Index of a party in declaration order.
pub type PartyId = u16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgebraError {
    #[error("party {party} input {input} mixes projector and observable letters")]
    MixedKinds { party: PartyId, input: u16 },
    #[error("party {0} is not covered by the independence structure")]
    UnknownParty(PartyId),
}

/// Operator algebra variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Operators of the same party need not commute.
    #[default]
    Quantum,
    /// All operators commute (relaxation of hidden-variable models).
    Classical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LetterKind {
    /// Dichotomic observable, squares to the identity.
    Observable,
    /// Projector onto the given outcome.
    Projector(u16),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter {
    pub party: PartyId,
    pub input: u16,
    pub kind: LetterKind,
}

impl Letter {
    pub fn observable(party: PartyId, input: u16) -> Self {
        Letter {
            party,
            input,
            kind: LetterKind::Observable,
        }
    }

    pub fn projector(party: PartyId, input: u16, outcome: u16) -> Self {
        Letter {
            party,
            input,
            kind: LetterKind::Projector(outcome),
        }
    }

    fn same_slot(&self, other: &Letter) -> bool {
        self.party == other.party && self.input == other.input
    }
}

/// A product of letters. The empty word is the identity operator.
///
/// Words order by length first, then lexicographically by letters.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Word(Vec<Letter>);

impl Word {
    pub fn identity() -> Self {
        Word(Vec::new())
    }

    /// Wraps letters without canonicalizing them.
    pub fn from_letters(letters: Vec<Letter>) -> Self {
        Word(letters)
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.0.is_empty()
    }

    /// Reversed product, regrouped by party.
    ///
    /// Letters of different parties commute, so reversing a canonical word
    /// and stably re-sorting it by party yields the canonical form of the
    /// adjoint in quantum mode. Classical callers re-canonicalize.
    pub fn adjoint(&self) -> Word {
        let mut letters: Vec<Letter> = self.0.iter().rev().copied().collect();
        letters.sort_by_key(|l| l.party);
        Word(letters)
    }

    /// Parties touched by the word, in ascending order.
    pub fn parties(&self) -> Vec<PartyId> {
        let mut parties: Vec<PartyId> = self.0.iter().map(|l| l.party).collect();
        parties.sort_unstable();
        parties.dedup();
        parties
    }

    /// True when no party contributes letters from two different inputs.
    pub fn single_input_per_party(&self) -> bool {
        let mut seen: Vec<(PartyId, u16)> = Vec::new();
        self.0
            .iter()
            .all(|l| match seen.iter().find(|(p, _)| *p == l.party) {
                Some((_, i)) => *i == l.input,
                None => {
                    seen.push((l.party, l.input));
                    true
                }
            })
    }

    /// Formats the word with the given party names, e.g. `A:0 C:1:0`.
    pub fn to_text(&self, names: &[String]) -> String {
        if self.0.is_empty() {
            return "1".to_string();
        }
        self.0
            .iter()
            .map(|l| {
                let name = names
                    .get(l.party as usize)
                    .map(String::as_str)
                    .unwrap_or("?");
                match l.kind {
                    LetterKind::Observable => format!("{name}:{}", l.input),
                    LetterKind::Projector(o) => format!("{name}:{}:{o}", l.input),
                }
            })
            .collect::<Vec<_>>()
            .join(" ")
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .len()
            .cmp(&other.0.len())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        for (k, l) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, " ")?;
            }
            match l.kind {
                LetterKind::Observable => write!(f, "{}:{}", l.party, l.input)?,
                LetterKind::Projector(o) => write!(f, "{}:{}:{}", l.party, l.input, o)?,
            }
        }
        Ok(())
    }
}

/// Result of canonicalization.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Reduced {
    Zero,
    Word(Word),
}

impl Reduced {
    pub fn into_word(self) -> Option<Word> {
        match self {
            Reduced::Zero => None,
            Reduced::Word(w) => Some(w),
        }
    }
}

fn check_kinds(letters: &[Letter]) -> Result<(), AlgebraError> {
    for (k, a) in letters.iter().enumerate() {
        for b in &letters[k + 1..] {
            if a.same_slot(b)
                && matches!(a.kind, LetterKind::Observable)
                    != matches!(b.kind, LetterKind::Observable)
            {
                return Err(AlgebraError::MixedKinds {
                    party: a.party,
                    input: a.input,
                });
            }
        }
    }
    Ok(())
}

/// Rewrites a product of letters to its canonical form.
///
/// Letters of different parties commute and are grouped in party order.
/// Within a party, adjacent letters of the same input reduce: projectors are
/// idempotent and mutually orthogonal, observables square to the identity.
/// In classical mode all letters commute and are sorted by input and outcome
/// before reduction.
pub fn canonicalize(letters: &[Letter], mode: Mode) -> Result<Reduced, AlgebraError> {
    check_kinds(letters)?;
    let mut sorted = letters.to_vec();
    match mode {
        Mode::Quantum => sorted.sort_by_key(|l| l.party),
        Mode::Classical => sorted.sort(),
    }
    let mut out: Vec<Letter> = Vec::with_capacity(sorted.len());
    for l in sorted {
        match out.last() {
            Some(top) if top.same_slot(&l) => match (top.kind, l.kind) {
                (LetterKind::Projector(a), LetterKind::Projector(b)) => {
                    if a != b {
                        return Ok(Reduced::Zero);
                    }
                }
                _ => {
                    out.pop();
                }
            },
            _ => out.push(l),
        }
    }
    Ok(Reduced::Word(Word(out)))
}

/// Canonical form of `w1 · w2`.
pub fn concat(w1: &Word, w2: &Word, mode: Mode) -> Result<Reduced, AlgebraError> {
    let mut letters = Vec::with_capacity(w1.len() + w2.len());
    letters.extend_from_slice(w1.letters());
    letters.extend_from_slice(w2.letters());
    canonicalize(&letters, mode)
}

/// Canonical adjoint of a canonical word.
pub fn adjoint(word: &Word, mode: Mode) -> Word {
    match mode {
        Mode::Quantum => word.adjoint(),
        // canonical classical words are sorted products of self-adjoint letters
        Mode::Classical => word.clone(),
    }
}

/// Sources of a network: each source feeds a set of parties.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndependenceStructure {
    pub sources: Vec<Vec<PartyId>>,
}

impl IndependenceStructure {
    pub fn new(sources: Vec<Vec<PartyId>>) -> Self {
        IndependenceStructure { sources }
    }

    /// The tripartite line `A - B - C`.
    pub fn line(parties: usize) -> Self {
        let sources = (0..parties.saturating_sub(1))
            .map(|p| vec![p as PartyId, p as PartyId + 1])
            .collect();
        IndependenceStructure { sources }
    }

    /// A single source feeding every party (a Bell scenario).
    pub fn global(parties: usize) -> Self {
        IndependenceStructure {
            sources: vec![(0..parties as PartyId).collect()],
        }
    }

    fn covers(&self, party: PartyId) -> bool {
        self.sources.iter().any(|s| s.contains(&party))
    }

    fn shares_source(&self, p: PartyId, q: PartyId) -> bool {
        p == q
            || self
                .sources
                .iter()
                .any(|s| s.contains(&p) && s.contains(&q))
    }

    /// Groups the given parties into connected components of the
    /// "shares a source" relation. Components are listed by their smallest
    /// party.
    pub fn party_components(&self, parties: &[PartyId]) -> Result<Vec<Vec<PartyId>>, AlgebraError> {
        for &p in parties {
            if !self.covers(p) {
                return Err(AlgebraError::UnknownParty(p));
            }
        }
        let mut label: Vec<usize> = (0..parties.len()).collect();
        fn find(label: &mut [usize], mut x: usize) -> usize {
            while label[x] != x {
                label[x] = label[label[x]];
                x = label[x];
            }
            x
        }
        for a in 0..parties.len() {
            for b in a + 1..parties.len() {
                if self.shares_source(parties[a], parties[b]) {
                    let (ra, rb) = (find(&mut label, a), find(&mut label, b));
                    if ra != rb {
                        label[ra.max(rb)] = ra.min(rb);
                    }
                }
            }
        }
        let mut groups: Vec<(usize, Vec<PartyId>)> = Vec::new();
        for (k, &p) in parties.iter().enumerate() {
            let root = find(&mut label, k);
            match groups.iter_mut().find(|(r, _)| *r == root) {
                Some((_, g)) => g.push(p),
                None => groups.push((root, vec![p])),
            }
        }
        let mut out: Vec<Vec<PartyId>> = groups.into_iter().map(|(_, g)| g).collect();
        for g in &mut out {
            g.sort_unstable();
        }
        out.sort();
        Ok(out)
    }

    /// Restricts a canonical word to each independent group of parties.
    ///
    /// For every state compatible with the structure, the expectation of the
    /// word is the product of the expectations of the returned sub-words.
    pub fn components(&self, word: &Word) -> Result<Vec<Word>, AlgebraError> {
        let groups = self.party_components(&word.parties())?;
        Ok(groups
            .iter()
            .map(|g| {
                Word(
                    word.letters()
                        .iter()
                        .filter(|l| g.contains(&l.party))
                        .copied()
                        .collect(),
                )
            })
            .collect())
    }
}

/// A sorted multiset of expectation symbols `⟨w⟩`, none of them the identity.
///
/// The value it stands for is the product of the symbols. The empty multiset
/// is the constant 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct SymbolMultiset(Vec<Word>);

impl SymbolMultiset {
    pub fn empty() -> Self {
        SymbolMultiset(Vec::new())
    }

    /// Builds a multiset from arbitrary symbols, dropping identities.
    pub fn from_words(words: impl IntoIterator<Item = Word>) -> Self {
        let mut v: Vec<Word> = words.into_iter().filter(|w| !w.is_identity()).collect();
        v.sort();
        SymbolMultiset(v)
    }

    pub fn symbols(&self) -> &[Word] {
        &self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    /// Elementwise complex conjugate: `⟨w⟩* = ⟨w†⟩`.
    pub fn conjugate(&self, mode: Mode) -> Self {
        SymbolMultiset::from_words(self.0.iter().map(|w| adjoint(w, mode)))
    }

    /// Smaller of `{K, K*}`; keys are identified up to conjugation.
    pub fn representative(self, mode: Mode) -> Self {
        let conj = self.conjugate(mode);
        if conj < self {
            conj
        } else {
            self
        }
    }
}

/// A generating operator `w ⟨S_1⟩⟨S_2⟩…`: a word times scalar expectation
/// factors.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ExtendedGenerator {
    pub word: Word,
    pub tags: SymbolMultiset,
}

impl ExtendedGenerator {
    pub fn plain(word: Word) -> Self {
        ExtendedGenerator {
            word,
            tags: SymbolMultiset::empty(),
        }
    }

    pub fn scalar(symbol: Word) -> Self {
        ExtendedGenerator {
            word: Word::identity(),
            tags: SymbolMultiset::from_words([symbol]),
        }
    }
}

/// Canonical algebraic value of a moment-matrix entry.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum EntryKey {
    /// Structural zero (orthogonal projectors).
    Zero,
    Symbols(SymbolMultiset),
}

/// Operator algebra bound to a mode and a network structure.
#[derive(Debug, Clone)]
pub struct Algebra {
    pub mode: Mode,
    pub structure: IndependenceStructure,
}

impl Algebra {
    pub fn new(mode: Mode, structure: IndependenceStructure) -> Self {
        Algebra { mode, structure }
    }

    pub fn canonicalize(&self, letters: &[Letter]) -> Result<Reduced, AlgebraError> {
        canonicalize(letters, self.mode)
    }

    pub fn concat(&self, w1: &Word, w2: &Word) -> Result<Reduced, AlgebraError> {
        concat(w1, w2, self.mode)
    }

    pub fn adjoint(&self, word: &Word) -> Word {
        adjoint(word, self.mode)
    }

    fn split_into(&self, word: &Word, out: &mut Vec<Word>) -> Result<(), AlgebraError> {
        if word.is_identity() {
            return Ok(());
        }
        out.extend(self.structure.components(word)?);
        Ok(())
    }

    /// Key of the entry `⟨row† · col⟩ · conj(row tags) · col tags`.
    pub fn entry_key(
        &self,
        row: &ExtendedGenerator,
        col: &ExtendedGenerator,
    ) -> Result<EntryKey, AlgebraError> {
        let word = match self.concat(&self.adjoint(&row.word), &col.word)? {
            Reduced::Zero => return Ok(EntryKey::Zero),
            Reduced::Word(w) => w,
        };
        let mut symbols = Vec::new();
        self.split_into(&word, &mut symbols)?;
        for tag in row.tags.symbols() {
            self.split_into(&self.adjoint(tag), &mut symbols)?;
        }
        for tag in col.tags.symbols() {
            self.split_into(tag, &mut symbols)?;
        }
        Ok(EntryKey::Symbols(
            SymbolMultiset::from_words(symbols).representative(self.mode),
        ))
    }
}
