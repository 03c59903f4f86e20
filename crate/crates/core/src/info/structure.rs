use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{pairwise_sum, PROB_TOL};
use crate::signal_set::SignalSet;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignalSpec {
    pub name: String,
    pub outcomes: Vec<String>,
}

/// One positive-probability atom of the prior, by outcome index.
#[derive(Clone, Debug, PartialEq)]
pub struct PriorEntry {
    pub e: usize,
    /// Position of the signal realization in the support.
    pub gamma: usize,
    pub p: f64,
}

/// Joint prior over an event `E` and base signals `A_1..A_n`, stored
/// sparsely: only atoms with positive mass are kept.
#[derive(Clone, Debug)]
pub struct InformationStructure {
    event_outcomes: Vec<String>,
    signals: Vec<SignalSpec>,
    support: Vec<Vec<usize>>,
    joint: Vec<Vec<f64>>,
    mass: Vec<f64>,
    entries: Vec<PriorEntry>,
}

impl InformationStructure {
    /// Build from `(e, realization, p)` atoms given by outcome index.
    pub fn new(
        event_outcomes: Vec<String>,
        signals: Vec<SignalSpec>,
        atoms: Vec<(usize, Vec<usize>, f64)>,
    ) -> Result<Self> {
        let bad = |m: String| Err(Error::InvalidStructure(m));
        if event_outcomes.is_empty() {
            return bad("event needs at least one outcome".into());
        }
        if signals.len() > 63 {
            return bad(format!("{} signals, at most 63 supported", signals.len()));
        }
        for s in &signals {
            if s.outcomes.is_empty() {
                return bad(format!("signal {:?} has no outcomes", s.name));
            }
        }
        let mut by_real: BTreeMap<Vec<usize>, Vec<(usize, f64)>> = BTreeMap::new();
        for (e, a, p) in atoms {
            if e >= event_outcomes.len() {
                return bad(format!("event outcome index {e} out of range"));
            }
            if a.len() != signals.len() {
                return bad(format!("realization {a:?} has {} coordinates, expected {}", a.len(), signals.len()));
            }
            for (i, &x) in a.iter().enumerate() {
                if x >= signals[i].outcomes.len() {
                    return bad(format!("signal {} outcome index {x} out of range", i + 1));
                }
            }
            if !(p.is_finite() && p > 0.0) {
                return bad(format!("probability {p} for realization {a:?} is not strictly positive"));
            }
            let slot = by_real.entry(a.clone()).or_default();
            if slot.iter().any(|&(e2, _)| e2 == e) {
                return bad(format!("duplicate entry for e={e}, a={a:?}"));
            }
            slot.push((e, p));
        }
        if by_real.is_empty() {
            return bad("prior has no entries".into());
        }
        let k = event_outcomes.len();
        let mut support = Vec::with_capacity(by_real.len());
        let mut joint = Vec::with_capacity(by_real.len());
        let mut entries = Vec::new();
        for (gamma, (a, mut es)) in by_real.into_iter().enumerate() {
            es.sort_by_key(|&(e, _)| e);
            let mut row = vec![0.0; k];
            for (e, p) in es {
                row[e] = p;
                entries.push(PriorEntry { e, gamma, p });
            }
            support.push(a);
            joint.push(row);
        }
        let mass: Vec<f64> = joint.iter().map(|r| pairwise_sum(r)).collect();
        let total = pairwise_sum(&mass);
        if (total - 1.0).abs() > PROB_TOL {
            return bad(format!("probabilities sum to {total}, not 1"));
        }
        Ok(Self { event_outcomes, signals, support, joint, mass, entries })
    }

    /// Build with generated labels `0..k` for the event and each signal.
    pub fn from_atoms(
        n_event: usize,
        signal_sizes: &[usize],
        atoms: Vec<(usize, Vec<usize>, f64)>,
    ) -> Result<Self> {
        let ev = (0..n_event).map(|i| i.to_string()).collect();
        let sigs = signal_sizes
            .iter()
            .enumerate()
            .map(|(i, &m)| SignalSpec {
                name: format!("A{}", i + 1),
                outcomes: (0..m).map(|x| x.to_string()).collect(),
            })
            .collect();
        Self::new(ev, sigs, atoms)
    }

    pub fn event_outcomes(&self) -> &[String] {
        &self.event_outcomes
    }

    pub fn n_outcomes(&self) -> usize {
        self.event_outcomes.len()
    }

    pub fn signals(&self) -> &[SignalSpec] {
        &self.signals
    }

    pub fn n_signals(&self) -> usize {
        self.signals.len()
    }

    pub fn all_signals(&self) -> SignalSet {
        SignalSet::full(self.n_signals())
    }

    /// Γ: realization tuples with positive mass, lexicographic.
    pub fn support(&self) -> &[Vec<usize>] {
        &self.support
    }

    pub fn support_len(&self) -> usize {
        self.support.len()
    }

    /// `P(E = e, A = support[gamma])`.
    pub fn joint(&self, gamma: usize) -> &[f64] {
        &self.joint[gamma]
    }

    pub fn mass(&self, gamma: usize) -> f64 {
        self.mass[gamma]
    }

    pub fn entries(&self) -> &[PriorEntry] {
        &self.entries
    }

    /// Marginal distribution of `E`.
    pub fn prior_marginal(&self) -> Vec<f64> {
        (0..self.n_outcomes())
            .map(|e| pairwise_sum(&self.joint.iter().map(|r| r[e]).collect::<Vec<_>>()))
            .collect()
    }

    pub fn check_subset(&self, s: SignalSet) -> Result<()> {
        match s.max_index() {
            Some(i) if i >= self.n_signals() => Err(Error::SignalIndex { index: i + 1, n: self.n_signals() }),
            _ => Ok(()),
        }
    }

    /// Projection of a realization onto the coordinates in `s`.
    pub fn project(&self, gamma: usize, s: SignalSet) -> Vec<usize> {
        s.iter().map(|i| self.support[gamma][i]).collect()
    }

    /// Prior conditioned on the signals in `s` taking the values `a_s`
    /// (given in increasing signal order). `None` if that has zero mass.
    pub fn condition(&self, s: SignalSet, a_s: &[usize]) -> Option<Self> {
        let keep: Vec<usize> = (0..self.support_len())
            .filter(|&g| self.project(g, s) == a_s)
            .collect();
        let total = pairwise_sum(&keep.iter().map(|&g| self.mass[g]).collect::<Vec<_>>());
        if total <= 0.0 {
            return None;
        }
        let support: Vec<Vec<usize>> = keep.iter().map(|&g| self.support[g].clone()).collect();
        let joint: Vec<Vec<f64>> = keep
            .iter()
            .map(|&g| self.joint[g].iter().map(|x| x / total).collect())
            .collect();
        let mass = joint.iter().map(|r: &Vec<f64>| pairwise_sum(r)).collect();
        let entries = joint
            .iter()
            .enumerate()
            .flat_map(|(gamma, r)| {
                r.iter()
                    .enumerate()
                    .filter(|(_, &p)| p > 0.0)
                    .map(move |(e, &p)| PriorEntry { e, gamma, p })
            })
            .collect();
        Some(Self {
            event_outcomes: self.event_outcomes.clone(),
            signals: self.signals.clone(),
            support,
            joint,
            mass,
            entries,
        })
    }

    /// Index of a realization tuple in the support.
    pub fn gamma_of(&self, a: &[usize]) -> Option<usize> {
        self.support.binary_search_by(|x| x.as_slice().cmp(a)).ok()
    }

    pub fn to_file(&self) -> StructureFile {
        StructureFile {
            event_outcomes: self.event_outcomes.iter().cloned().map(Label::Text).collect(),
            signals: self.signals.clone(),
            prior: self
                .entries
                .iter()
                .map(|en| FileEntry {
                    e: Label::Text(self.event_outcomes[en.e].clone()),
                    a: self.support[en.gamma]
                        .iter()
                        .enumerate()
                        .map(|(i, &x)| Label::Text(self.signals[i].outcomes[x].clone()))
                        .collect(),
                    p: en.p,
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("structure serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let f: StructureFile = serde_json::from_str(s)?;
        f.try_into()
    }
}

/// An outcome label in a file: strings, numbers and booleans are accepted.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Label {
    Text(String),
    Number(serde_json::Number),
    Bool(bool),
}

impl Label {
    fn text(&self) -> String {
        match self {
            Label::Text(s) => s.clone(),
            Label::Number(n) => n.to_string(),
            Label::Bool(b) => b.to_string(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FileEntry {
    pub e: Label,
    pub a: Vec<Label>,
    pub p: f64,
}

/// On-disk JSON form of an [`InformationStructure`].
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StructureFile {
    pub event_outcomes: Vec<Label>,
    pub signals: Vec<SignalSpec>,
    pub prior: Vec<FileEntry>,
}

impl TryFrom<StructureFile> for InformationStructure {
    type Error = Error;

    fn try_from(f: StructureFile) -> Result<Self> {
        let ev: Vec<String> = f.event_outcomes.iter().map(Label::text).collect();
        let ev_idx: HashMap<&str, usize> = ev.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
        if ev_idx.len() != ev.len() {
            return Err(Error::InvalidStructure("duplicate event outcome labels".into()));
        }
        let sig_idx: Vec<HashMap<&str, usize>> = f
            .signals
            .iter()
            .map(|s| s.outcomes.iter().enumerate().map(|(i, o)| (o.as_str(), i)).collect())
            .collect();
        let mut atoms = Vec::with_capacity(f.prior.len());
        for (row, en) in f.prior.iter().enumerate() {
            let el = en.e.text();
            let e = *ev_idx
                .get(el.as_str())
                .ok_or_else(|| Error::InvalidStructure(format!("prior[{row}].e: unknown event outcome {el:?}")))?;
            if en.a.len() != f.signals.len() {
                return Err(Error::InvalidStructure(format!(
                    "prior[{row}].a: {} values for {} signals",
                    en.a.len(),
                    f.signals.len()
                )));
            }
            let mut a = Vec::with_capacity(en.a.len());
            for (i, l) in en.a.iter().enumerate() {
                let t = l.text();
                let x = *sig_idx[i].get(t.as_str()).ok_or_else(|| {
                    Error::InvalidStructure(format!("prior[{row}].a[{i}]: unknown outcome {t:?} of signal {:?}", f.signals[i].name))
                })?;
                a.push(x);
            }
            atoms.push((e, a, en.p));
        }
        InformationStructure::new(ev, f.signals.clone(), atoms)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bit() -> InformationStructure {
        InformationStructure::from_atoms(2, &[2], vec![(0, vec![0], 0.5), (1, vec![1], 0.5)]).unwrap()
    }

    #[test]
    fn rejects_bad_priors() {
        assert!(InformationStructure::from_atoms(2, &[2], vec![(0, vec![0], 0.5)]).is_err());
        assert!(InformationStructure::from_atoms(2, &[2], vec![(0, vec![0], 0.5), (0, vec![0], 0.5)]).is_err());
        assert!(InformationStructure::from_atoms(2, &[2], vec![(0, vec![0], 1.0), (1, vec![1], 0.0)]).is_err());
        assert!(InformationStructure::from_atoms(2, &[2], vec![(0, vec![2], 1.0)]).is_err());
    }

    #[test]
    fn json_round_trip() {
        let s = bit();
        let back = InformationStructure::from_json(&s.to_json()).unwrap();
        assert_eq!(back.support(), s.support());
        assert_eq!(back.prior_marginal(), s.prior_marginal());
    }

    #[test]
    fn numeric_labels_accepted() {
        let js = r#"{"event_outcomes":[0,1],"signals":[{"name":"x","outcomes":["0","1"]}],
            "prior":[{"e":0,"a":[0],"p":0.25},{"e":1,"a":[1],"p":0.75}]}"#;
        let s = InformationStructure::from_json(js).unwrap();
        assert_eq!(s.prior_marginal(), vec![0.25, 0.75]);
    }

    #[test]
    fn unknown_label_names_the_field() {
        let js = r#"{"event_outcomes":[0,1],"signals":[{"name":"x","outcomes":["0"]}],
            "prior":[{"e":0,"a":[5],"p":1.0}]}"#;
        let err = InformationStructure::from_json(js).unwrap_err().to_string();
        assert!(err.contains("prior[0].a[0]"), "{err}");
    }
}
