//! Network hypotheses and generating sets.

use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

pub use crate::algebra::ExtendedGenerator;
use crate::algebra::{
    canonicalize, Algebra, AlgebraError, IndependenceStructure, Letter, Mode, PartyId, Reduced,
    Word,
};
use crate::error::Error;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartySpec {
    pub name: String,
    pub inputs: usize,
    /// Number of outcomes of each input.
    pub outputs: Vec<usize>,
}

/// Parties, the sources feeding them and the algebra mode.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Scenario {
    pub parties: Vec<PartySpec>,
    pub sources: Vec<Vec<String>>,
    #[serde(default)]
    pub mode: Mode,
}

impl Scenario {
    /// Tripartite line with two binary inputs and outputs per party.
    pub fn binary_line(mode: Mode) -> Self {
        let party = |name: &str| PartySpec {
            name: name.to_string(),
            inputs: 2,
            outputs: vec![2, 2],
        };
        Scenario {
            parties: vec![party("A"), party("B"), party("C")],
            sources: vec![vec!["A".into(), "B".into()], vec!["B".into(), "C".into()]],
            mode,
        }
    }

    /// Entanglement swapping with lossy extreme parties: two ternary inputs
    /// for A and C, a single four-outcome measurement for B.
    pub fn lossy_swap(mode: Mode) -> Self {
        Scenario {
            parties: vec![
                PartySpec {
                    name: "A".into(),
                    inputs: 2,
                    outputs: vec![3, 3],
                },
                PartySpec {
                    name: "B".into(),
                    inputs: 1,
                    outputs: vec![4],
                },
                PartySpec {
                    name: "C".into(),
                    inputs: 2,
                    outputs: vec![3, 3],
                },
            ],
            sources: vec![vec!["A".into(), "B".into()], vec!["B".into(), "C".into()]],
            mode,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, Error> {
        let scenario: Scenario = serde_json::from_str(text)?;
        scenario.check()?;
        Ok(scenario)
    }

    pub fn load(path: &Path) -> Result<Self, Error> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Scenario::from_json(&text)
    }

    pub fn with_mode(mut self, mode: Mode) -> Self {
        self.mode = mode;
        self
    }

    /// Every invariant violation, in declaration order.
    pub fn validate(&self) -> Vec<String> {
        let mut errors = Vec::new();
        if self.parties.is_empty() {
            errors.push("no parties declared".to_string());
        }
        let mut names = HashSet::new();
        for p in &self.parties {
            if !names.insert(p.name.as_str()) {
                errors.push(format!("duplicate party name {:?}", p.name));
            }
            if p.inputs < 1 {
                errors.push(format!("party {:?}: inputs < 1", p.name));
            }
            if p.outputs.len() != p.inputs {
                errors.push(format!(
                    "party {:?}: {} inputs but {} output counts",
                    p.name,
                    p.inputs,
                    p.outputs.len()
                ));
            }
            for (i, &o) in p.outputs.iter().enumerate() {
                if o < 2 {
                    errors.push(format!("party {:?} input {i}: outputs < 2", p.name));
                }
            }
        }
        for (k, s) in self.sources.iter().enumerate() {
            if s.is_empty() {
                errors.push(format!("source {k} is empty"));
            }
            for name in s {
                if !names.contains(name.as_str()) {
                    errors.push(format!("source {k} references undeclared party {name:?}"));
                }
            }
        }
        errors
    }

    pub fn check(&self) -> Result<(), Error> {
        let errors = self.validate();
        if errors.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidScenario(errors))
        }
    }

    pub fn names(&self) -> Vec<String> {
        self.parties.iter().map(|p| p.name.clone()).collect()
    }

    pub fn party_id(&self, name: &str) -> Option<PartyId> {
        self.parties
            .iter()
            .position(|p| p.name == name)
            .map(|p| p as PartyId)
    }

    /// Source incidence by party id. Parties fed by no declared source get a
    /// private one.
    pub fn structure(&self) -> IndependenceStructure {
        let mut sources: Vec<Vec<PartyId>> = self
            .sources
            .iter()
            .map(|s| s.iter().filter_map(|n| self.party_id(n)).collect())
            .collect();
        for p in 0..self.parties.len() as PartyId {
            if !sources.iter().any(|s| s.contains(&p)) {
                sources.push(vec![p]);
            }
        }
        IndependenceStructure::new(sources)
    }

    pub fn algebra(&self) -> Algebra {
        Algebra::new(self.mode, self.structure())
    }

    /// Per party and input: one observable for binary inputs, otherwise a
    /// projector for every outcome but the last.
    pub fn letters(&self) -> Vec<Letter> {
        let mut out = Vec::new();
        for (p, spec) in self.parties.iter().enumerate() {
            out.extend(party_letters(p as PartyId, spec));
        }
        out
    }

    fn party_letters(&self, party: PartyId) -> Vec<Letter> {
        party_letters(party, &self.parties[party as usize])
    }

    /// All distinct canonical words of length at most `level`, identity
    /// included, ordered by length then lexicographically.
    pub fn npa_words(&self, level: usize) -> Vec<Word> {
        let mut words = enumerate_words(&self.letters(), level, Mode::Quantum);
        if self.mode == Mode::Classical {
            let mut seen = HashSet::new();
            words = words
                .into_iter()
                .filter_map(|w| canonicalize(w.letters(), Mode::Classical).ok()?.into_word())
                .filter(|w| seen.insert(w.clone()))
                .collect();
            words.sort();
        }
        words
    }

    /// Parses `A:0 A:1` (observables), `C:0:1` (projectors) or `1`.
    pub fn parse_word(&self, text: &str) -> Result<Word, Error> {
        let fail = |reason: String| Error::WordSyntax {
            text: text.to_string(),
            reason,
        };
        let tokens: Vec<&str> = text.split_whitespace().collect();
        if tokens.is_empty() {
            return Err(fail("empty word".into()));
        }
        if tokens == ["1"] {
            return Ok(Word::identity());
        }
        let mut letters = Vec::with_capacity(tokens.len());
        for tok in tokens {
            let parts: Vec<&str> = tok.split(':').collect();
            if parts.len() < 2 || parts.len() > 3 {
                return Err(fail(format!("malformed letter {tok:?}")));
            }
            let party = self
                .party_id(parts[0])
                .ok_or_else(|| fail(format!("unknown party {:?}", parts[0])))?;
            let spec = &self.parties[party as usize];
            let input: usize = parts[1]
                .parse()
                .map_err(|_| fail(format!("bad input index in {tok:?}")))?;
            if input >= spec.inputs {
                return Err(fail(format!("input {input} out of range in {tok:?}")));
            }
            let outcomes = spec.outputs[input];
            let letter = match parts.get(2) {
                None => {
                    if outcomes != 2 {
                        return Err(fail(format!(
                            "{tok:?}: input has {outcomes} outcomes, projector syntax needs an outcome"
                        )));
                    }
                    Letter::observable(party, input as u16)
                }
                Some(o) => {
                    let outcome: usize = o
                        .parse()
                        .map_err(|_| fail(format!("bad outcome index in {tok:?}")))?;
                    if outcomes == 2 {
                        return Err(fail(format!(
                            "{tok:?}: binary inputs are written as observables"
                        )));
                    }
                    if outcome + 1 >= outcomes {
                        return Err(fail(format!(
                            "{tok:?}: outcome {outcome} out of range (last outcome is eliminated)"
                        )));
                    }
                    Letter::projector(party, input as u16, outcome as u16)
                }
            };
            letters.push(letter);
        }
        match canonicalize(&letters, self.mode)? {
            Reduced::Zero => Err(fail("word is zero".into())),
            Reduced::Word(w) => Ok(w),
        }
    }

    /// Scalar symbols requested by the level spec, deduplicated by canonical
    /// form in request order.
    pub fn scalar_symbols(&self, spec: &LevelSpec) -> Result<Vec<Word>, Error> {
        let mut symbols = Vec::new();
        for text in &spec.scalar_symbols {
            symbols.push(self.parse_word(text)?);
        }
        for preset in &spec.presets {
            match preset {
                Preset::AWords { party, min, max } => {
                    let id = self
                        .party_id(party)
                        .ok_or_else(|| Error::UnknownParty(party.clone()))?;
                    let words = enumerate_words(&self.party_letters(id), *max, self.mode);
                    symbols.extend(
                        words
                            .into_iter()
                            .filter(|w| w.len() >= *min && w.len() <= *max),
                    );
                }
                Preset::OutcomePairs(party) => {
                    symbols.extend(self.outcome_pairs(party)?);
                }
            }
        }
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for s in symbols {
            if s.is_identity() {
                return Err(Error::BadSymbol(
                    "identity cannot be a scalar symbol".into(),
                ));
            }
            if seen.insert(s.clone()) {
                out.push(s);
            }
        }
        Ok(out)
    }

    /// Products `Π_{c1|0} Π_{c2|1}` of one party over the non-eliminated
    /// outcomes of its first two inputs.
    pub fn outcome_pairs(&self, party: &str) -> Result<Vec<Word>, Error> {
        let id = self
            .party_id(party)
            .ok_or_else(|| Error::UnknownParty(party.to_string()))?;
        let spec = &self.parties[id as usize];
        if spec.inputs < 2 || spec.outputs[0] < 3 || spec.outputs[1] < 3 {
            return Err(Error::BadSymbol(format!(
                "outcome_pairs({party}) needs two inputs with at least three outcomes"
            )));
        }
        let mut out = Vec::new();
        for c1 in 0..spec.outputs[0] - 1 {
            for c2 in 0..spec.outputs[1] - 1 {
                let letters = [
                    Letter::projector(id, 0, c1 as u16),
                    Letter::projector(id, 1, c2 as u16),
                ];
                if let Reduced::Word(w) = canonicalize(&letters, self.mode)? {
                    out.push(w);
                }
            }
        }
        Ok(out)
    }

    /// Base words followed by one `⟨S⟩·1` generator per requested symbol.
    pub fn extend_with_scalars(
        &self,
        base: &[Word],
        spec: &LevelSpec,
    ) -> Result<Vec<ExtendedGenerator>, Error> {
        let mut gens: Vec<ExtendedGenerator> =
            base.iter().cloned().map(ExtendedGenerator::plain).collect();
        gens.extend(
            self.scalar_symbols(spec)?
                .into_iter()
                .map(ExtendedGenerator::scalar),
        );
        Ok(gens)
    }

    /// Full generating set of a level spec: NPA words, extra words, then
    /// scalar generators. The identity always comes first.
    pub fn generators(&self, spec: &LevelSpec) -> Result<Vec<ExtendedGenerator>, Error> {
        if spec.npa_level < 1 {
            return Err(Error::Config("npa_level must be at least 1".into()));
        }
        let mut base = self.npa_words(spec.npa_level);
        let mut seen: HashSet<Word> = base.iter().cloned().collect();
        for text in &spec.extra_words {
            let w = self.parse_word(text)?;
            if seen.insert(w.clone()) {
                base.push(w);
            }
        }
        self.extend_with_scalars(&base, spec)
    }
}

fn party_letters(party: PartyId, spec: &PartySpec) -> Vec<Letter> {
    let mut out = Vec::new();
    for (input, &outcomes) in spec.outputs.iter().enumerate() {
        if outcomes == 2 {
            out.push(Letter::observable(party, input as u16));
        } else {
            for o in 0..outcomes.saturating_sub(1) {
                out.push(Letter::projector(party, input as u16, o as u16));
            }
        }
    }
    out
}

/// Canonical non-zero words of length at most `max_len` over `letters`.
///
/// Every canonical word of length `l` is its length `l - 1` prefix times
/// its last letter, so extending the previous layer by one letter reaches
/// every word.
fn enumerate_words(letters: &[Letter], max_len: usize, mode: Mode) -> Vec<Word> {
    let mut seen: HashSet<Word> = HashSet::new();
    let mut all = vec![Word::identity()];
    seen.insert(Word::identity());
    let mut layer = vec![Word::identity()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for w in &layer {
            for l in letters {
                let mut seq = w.letters().to_vec();
                seq.push(*l);
                let Ok(Reduced::Word(c)) = canonicalize(&seq, mode) else {
                    continue;
                };
                if c.len() == w.len() + 1 && seen.insert(c.clone()) {
                    next.push(c);
                }
            }
        }
        all.extend(next.iter().cloned());
        layer = next;
    }
    all.sort();
    all
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    /// All words over one party's letters with lengths in `[min, max]`.
    AWords {
        party: String,
        min: usize,
        max: usize,
    },
    /// The four `Π_{c1|0} Π_{c2|1}` products of a party.
    OutcomePairs(String),
}

/// Which generating set to build.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelSpec {
    pub npa_level: usize,
    #[serde(default)]
    pub extra_words: Vec<String>,
    #[serde(default)]
    pub scalar_symbols: Vec<String>,
    #[serde(default)]
    pub presets: Vec<Preset>,
}

impl LevelSpec {
    pub fn npa(level: usize) -> Self {
        LevelSpec {
            npa_level: level,
            extra_words: Vec::new(),
            scalar_symbols: Vec::new(),
            presets: Vec::new(),
        }
    }

    pub fn with_symbol(mut self, text: &str) -> Self {
        self.scalar_symbols.push(text.to_string());
        self
    }

    pub fn with_preset(mut self, preset: Preset) -> Self {
        self.presets.push(preset);
        self
    }

    pub fn from_json(text: &str) -> Result<Self, Error> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self, Error> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        LevelSpec::from_json(&text)
    }
}

impl From<AlgebraError> for Error {
    fn from(e: AlgebraError) -> Self {
        Error::Algebra(e)
    }
}
