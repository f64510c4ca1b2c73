//! Observed conditional distributions `p(o_1 … o_n | i_1 … i_n)`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Dense table of a conditional distribution. Party 0 is the most
/// significant index for both inputs and outcomes.
#[derive(Debug, Clone, PartialEq)]
pub struct DistributionTable {
    inputs: Vec<usize>,
    outputs: Vec<usize>,
    p: Vec<f64>,
}

/// One factor of a local expectation value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Factor {
    /// Indicator of `outcome` for `input`.
    Outcome {
        party: usize,
        input: usize,
        outcome: usize,
    },
    /// `+1` on outcome 0, `-1` on outcome 1 (binary inputs only).
    Sign { party: usize, input: usize },
}

impl Factor {
    fn party(&self) -> usize {
        match *self {
            Factor::Outcome { party, .. } | Factor::Sign { party, .. } => party,
        }
    }

    fn input(&self) -> usize {
        match *self {
            Factor::Outcome { input, .. } | Factor::Sign { input, .. } => input,
        }
    }

    fn weight(&self, outcome: usize) -> f64 {
        match *self {
            Factor::Outcome { outcome: o, .. } => (o == outcome) as u8 as f64,
            Factor::Sign { .. } => match outcome {
                0 => 1.0,
                1 => -1.0,
                _ => 0.0,
            },
        }
    }
}

fn radix_count(radix: &[usize]) -> usize {
    radix.iter().product()
}

fn decode(mut index: usize, radix: &[usize], out: &mut [usize]) {
    for k in (0..radix.len()).rev() {
        out[k] = index % radix[k];
        index /= radix[k];
    }
}

fn encode(digits: &[usize], radix: &[usize]) -> usize {
    digits.iter().zip(radix).fold(0, |acc, (d, r)| acc * r + d)
}

impl DistributionTable {
    pub fn zeros(inputs: Vec<usize>, outputs: Vec<usize>) -> Self {
        let size = radix_count(&inputs) * radix_count(&outputs);
        DistributionTable {
            inputs,
            outputs,
            p: vec![0.0; size],
        }
    }

    /// Fills the table from `f(inputs, outcomes)`.
    pub fn from_fn(
        inputs: Vec<usize>,
        outputs: Vec<usize>,
        mut f: impl FnMut(&[usize], &[usize]) -> f64,
    ) -> Self {
        let mut t = DistributionTable::zeros(inputs, outputs);
        let n = t.parties();
        let (mut i, mut o) = (vec![0; n], vec![0; n]);
        let n_out = t.outcome_count();
        for ctx in 0..t.context_count() {
            decode(ctx, &t.inputs, &mut i);
            for out in 0..n_out {
                decode(out, &t.outputs, &mut o);
                t.p[ctx * n_out + out] = f(&i, &o);
            }
        }
        t
    }

    pub fn parties(&self) -> usize {
        self.inputs.len()
    }

    pub fn inputs(&self) -> &[usize] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[usize] {
        &self.outputs
    }

    pub fn context_count(&self) -> usize {
        radix_count(&self.inputs)
    }

    pub fn outcome_count(&self) -> usize {
        radix_count(&self.outputs)
    }

    pub fn values(&self) -> &[f64] {
        &self.p
    }

    fn index(&self, i: &[usize], o: &[usize]) -> usize {
        encode(i, &self.inputs) * self.outcome_count() + encode(o, &self.outputs)
    }

    pub fn get(&self, i: &[usize], o: &[usize]) -> f64 {
        self.p[self.index(i, o)]
    }

    pub fn set(&mut self, i: &[usize], o: &[usize], v: f64) {
        let k = self.index(i, o);
        self.p[k] = v;
    }

    /// `w * self + (1 - w) * other`.
    pub fn mix(&self, other: &DistributionTable, w: f64) -> Result<Self, Error> {
        if self.inputs != other.inputs || self.outputs != other.outputs {
            return Err(Error::Distribution("arity mismatch in mixture".into()));
        }
        Ok(DistributionTable {
            inputs: self.inputs.clone(),
            outputs: self.outputs.clone(),
            p: self
                .p
                .iter()
                .zip(&other.p)
                .map(|(a, b)| w * a + (1.0 - w) * b)
                .collect(),
        })
    }

    /// Largest deviation of a context sum from 1.
    pub fn normalization_error(&self) -> f64 {
        let n_out = self.outcome_count();
        self.p
            .chunks(n_out)
            .map(|c| (c.iter().sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Checks non-negativity and normalization of every input context.
    pub fn validate(&self, tol: f64) -> Result<(), Error> {
        if self.inputs.len() != self.outputs.len() {
            return Err(Error::Distribution("inputs/outputs length mismatch".into()));
        }
        if self.inputs.iter().chain(&self.outputs).any(|&r| r == 0) {
            return Err(Error::Distribution("zero arity".into()));
        }
        if let Some(v) = self.p.iter().find(|v| !v.is_finite() || **v < -tol) {
            return Err(Error::Distribution(format!("invalid probability {v}")));
        }
        let err = self.normalization_error();
        if err > tol {
            return Err(Error::Distribution(format!(
                "context not normalized (off by {err:.3e})"
            )));
        }
        Ok(())
    }

    /// Marginal over the parties in `keep` for one full input context.
    fn marginal(&self, keep: &[usize], ctx: &[usize]) -> Vec<f64> {
        let radix: Vec<usize> = keep.iter().map(|&k| self.outputs[k]).collect();
        let mut out = vec![0.0; radix_count(&radix)];
        let n_out = self.outcome_count();
        let base = encode(ctx, &self.inputs) * n_out;
        let mut o = vec![0; self.parties()];
        let mut sub = vec![0; keep.len()];
        for k in 0..n_out {
            decode(k, &self.outputs, &mut o);
            for (s, &party) in sub.iter_mut().zip(keep) {
                *s = o[party];
            }
            out[encode(&sub, &radix)] += self.p[base + k];
        }
        out
    }

    /// Largest change of any marginal when inputs of the discarded parties
    /// vary.
    pub fn no_signaling_violation(&self) -> f64 {
        let n = self.parties();
        let mut worst: f64 = 0.0;
        let mut ctx = vec![0; n];
        for mask in 1..(1usize << n) - 1 {
            let keep: Vec<usize> = (0..n).filter(|k| mask >> k & 1 == 1).collect();
            let kept_inputs: Vec<usize> = keep.iter().map(|&k| self.inputs[k]).collect();
            // reference marginal per kept-input context
            let mut reference: Vec<Option<Vec<f64>>> = vec![None; radix_count(&kept_inputs)];
            for c in 0..self.context_count() {
                decode(c, &self.inputs, &mut ctx);
                let kept: Vec<usize> = keep.iter().map(|&k| ctx[k]).collect();
                let slot = encode(&kept, &kept_inputs);
                let m = self.marginal(&keep, &ctx);
                match &reference[slot] {
                    None => reference[slot] = Some(m),
                    Some(r) => {
                        for (a, b) in r.iter().zip(&m) {
                            worst = worst.max((a - b).abs());
                        }
                    }
                }
            }
        }
        worst
    }

    /// Largest `|p(o_L o_R | i_L i_R) - p(o_L | i_L) p(o_R | i_R)|` after
    /// discarding every party outside `left ∪ right`.
    pub fn factorization_violation(&self, left: &[usize], right: &[usize]) -> f64 {
        let both: Vec<usize> = left.iter().chain(right).copied().collect();
        let mut ctx = vec![0; self.parties()];
        let mut worst: f64 = 0.0;
        let lr: Vec<usize> = left.iter().map(|&k| self.outputs[k]).collect();
        let rr: Vec<usize> = right.iter().map(|&k| self.outputs[k]).collect();
        let (nl, nr) = (radix_count(&lr), radix_count(&rr));
        for c in 0..self.context_count() {
            decode(c, &self.inputs, &mut ctx);
            let joint = self.marginal(&both, &ctx);
            let ml = self.marginal(left, &ctx);
            let mr = self.marginal(right, &ctx);
            for a in 0..nl {
                for b in 0..nr {
                    worst = worst.max((joint[a * nr + b] - ml[a] * mr[b]).abs());
                }
            }
        }
        worst
    }

    /// Expectation of a product of local factors, averaged over the inputs
    /// of parties that carry no factor. Returns `(mean, spread)` where the
    /// spread is the largest deviation of a single input context from the
    /// mean.
    pub fn local_expectation(&self, factors: &[Factor]) -> Result<(f64, f64), Error> {
        let n = self.parties();
        for f in factors {
            if f.party() >= n || f.input() >= self.inputs[f.party()] {
                return Err(Error::Distribution(format!(
                    "factor {f:?} outside the table arities"
                )));
            }
            if matches!(f, Factor::Sign { .. }) && self.outputs[f.party()] != 2 {
                return Err(Error::Distribution(format!(
                    "sign factor on a party with {} outputs",
                    self.outputs[f.party()]
                )));
            }
        }
        let mut fixed: Vec<Option<usize>> = vec![None; n];
        for f in factors {
            match fixed[f.party()] {
                Some(i) if i != f.input() => {
                    return Err(Error::Distribution(
                        "two inputs of one party in a local expectation".into(),
                    ))
                }
                _ => fixed[f.party()] = Some(f.input()),
            }
        }
        let present: Vec<usize> = (0..n).filter(|&k| fixed[k].is_some()).collect();
        let free: Vec<usize> = (0..n).filter(|&k| fixed[k].is_none()).collect();
        let free_radix: Vec<usize> = free.iter().map(|&k| self.inputs[k]).collect();
        let mut ctx = vec![0; n];
        let mut free_ctx = vec![0; free.len()];
        let mut values = Vec::with_capacity(radix_count(&free_radix));
        for fc in 0..radix_count(&free_radix) {
            decode(fc, &free_radix, &mut free_ctx);
            for (&k, &i) in free.iter().zip(&free_ctx) {
                ctx[k] = i;
            }
            for &k in &present {
                ctx[k] = fixed[k].unwrap_or(0);
            }
            let m = self.marginal(&present, &ctx);
            let radix: Vec<usize> = present.iter().map(|&k| self.outputs[k]).collect();
            let mut sub = vec![0; present.len()];
            let mut v = 0.0;
            for (idx, pm) in m.iter().enumerate() {
                decode(idx, &radix, &mut sub);
                let mut w = *pm;
                for f in factors {
                    let slot = present.iter().position(|&k| k == f.party()).unwrap_or(0);
                    w *= f.weight(sub[slot]);
                }
                v += w;
            }
            values.push(v);
        }
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        let spread = values.iter().map(|v| (v - mean).abs()).fold(0.0, f64::max);
        Ok((mean, spread))
    }

    pub fn from_json(text: &str) -> Result<Self, Error> {
        let file: DistributionFile = serde_json::from_str(text)?;
        let mut t = DistributionTable::zeros(file.inputs.clone(), file.outputs.clone());
        if file.inputs.len() != file.outputs.len() {
            return Err(Error::Distribution("inputs/outputs length mismatch".into()));
        }
        for r in &file.p {
            let ok = r.i.len() == file.inputs.len()
                && r.o.len() == file.outputs.len()
                && r.i.iter().zip(&file.inputs).all(|(a, b)| a < b)
                && r.o.iter().zip(&file.outputs).all(|(a, b)| a < b);
            if !ok {
                return Err(Error::Distribution(format!(
                    "record {:?}/{:?} out of range",
                    r.i, r.o
                )));
            }
            t.set(&r.i, &r.o, r.v);
        }
        t.validate(1e-9)?;
        Ok(t)
    }

    pub fn load(path: &Path) -> Result<Self, Error> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        DistributionTable::from_json(&text)
    }

    /// Serializes the non-zero entries.
    pub fn to_json(&self) -> String {
        let n = self.parties();
        let n_out = self.outcome_count();
        let (mut i, mut o) = (vec![0; n], vec![0; n]);
        let mut records = Vec::new();
        for (k, &v) in self.p.iter().enumerate() {
            if v == 0.0 {
                continue;
            }
            decode(k / n_out, &self.inputs, &mut i);
            decode(k % n_out, &self.outputs, &mut o);
            records.push(Record {
                i: i.clone(),
                o: o.clone(),
                v,
            });
        }
        let file = DistributionFile {
            inputs: self.inputs.clone(),
            outputs: self.outputs.clone(),
            p: records,
        };
        serde_json::to_string(&file).expect("distribution serializes")
    }
}

#[derive(Serialize, Deserialize)]
struct Record {
    i: Vec<usize>,
    o: Vec<usize>,
    v: f64,
}

#[derive(Serialize, Deserialize)]
struct DistributionFile {
    inputs: Vec<usize>,
    outputs: Vec<usize>,
    p: Vec<Record>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform() -> DistributionTable {
        DistributionTable::from_fn(vec![2, 2, 2], vec![2, 2, 2], |_, _| 0.125)
    }

    #[test]
    fn uniform_is_valid() {
        let t = uniform();
        t.validate(1e-12).unwrap();
        assert!(t.no_signaling_violation() < 1e-15);
        assert!(t.factorization_violation(&[0], &[2]) < 1e-15);
    }

    #[test]
    fn local_expectations() {
        let t = uniform();
        let (v, s) = t
            .local_expectation(&[Factor::Outcome {
                party: 0,
                input: 0,
                outcome: 0,
            }])
            .unwrap();
        assert!((v - 0.5).abs() < 1e-15 && s < 1e-15);
        let (v, _) = t
            .local_expectation(&[
                Factor::Sign { party: 0, input: 1 },
                Factor::Sign { party: 2, input: 0 },
            ])
            .unwrap();
        assert!(v.abs() < 1e-15);
        assert!(t
            .local_expectation(&[
                Factor::Sign { party: 0, input: 0 },
                Factor::Sign { party: 0, input: 1 }
            ])
            .is_err());
    }

    #[test]
    fn signaling_is_detected() {
        // A's outcome copies B's input
        let t = DistributionTable::from_fn(vec![1, 2], vec![2, 2], |i, o| {
            if o[0] == i[1] {
                0.5
            } else {
                0.0
            }
        });
        t.validate(1e-12).unwrap();
        assert!((t.no_signaling_violation() - 1.0).abs() < 1e-15);
        let (mean, spread) = t
            .local_expectation(&[Factor::Sign { party: 0, input: 0 }])
            .unwrap();
        assert!(mean.abs() < 1e-15);
        assert!((spread - 1.0).abs() < 1e-15);
    }

    #[test]
    fn json_round_trip() {
        let text = r#"{"inputs":[1,2],"outputs":[2,3],"p":[
            {"i":[0,0],"o":[0,0],"v":0.5},{"i":[0,0],"o":[1,2],"v":0.5},
            {"i":[0,1],"o":[0,1],"v":1.0}]}"#;
        let t = DistributionTable::from_json(text).unwrap();
        assert_eq!(t.get(&[0, 0], &[1, 2]), 0.5);
        assert_eq!(DistributionTable::from_json(&t.to_json()).unwrap(), t);
        let bad = text.replace("\"v\":1.0", "\"v\":0.9");
        assert!(DistributionTable::from_json(&bad).is_err());
    }
}
