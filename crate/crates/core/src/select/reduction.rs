use std::sync::Arc;

use serde::Serialize;

use crate::decision::ExpectedScoreFunction;
use crate::error::{Error, Result};
use crate::info::{InformationStructure, SignalSpec};
use crate::signal_set::SignalSet;
use crate::value::ValueContext;

use super::SetFunction;

/// Largest `n` accepted by the reduction (the event has `2^n` outcomes).
pub const MAX_REDUCTION_SIGNALS: usize = 10;

/// Scoring rule on the hypercube `{0,1}^n` built from a set function.
///
/// A report is summarized by its mean `mu`; the coordinates where `mu` is
/// 0 or 1 form the report's face. A corner on that face scores `f(face)`,
/// any other corner scores `-inf`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HypercubeScore {
    n: usize,
    f: Vec<f64>,
}

impl HypercubeScore {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn f(&self, s: SignalSet) -> f64 {
        self.f[s.0 as usize]
    }

    /// Coordinate `i` of corner `e`.
    pub fn bit(e: usize, i: usize) -> usize {
        e >> i & 1
    }

    /// Mean of a distribution over corners.
    pub fn mean(&self, q: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| q.iter().enumerate().filter(|(e, _)| Self::bit(*e, i) == 1).map(|(_, &p)| p).sum())
            .collect()
    }

    /// Fixed coordinates of a point of `[0,1]^n`.
    pub fn face(point: &[f64]) -> SignalSet {
        SignalSet::from_indices(point.iter().enumerate().filter(|(_, &x)| x == 0.0 || x == 1.0).map(|(i, _)| i))
    }

    /// `R(d, e)` for a report point `d` in `[0,1]^n`.
    pub fn score_point(&self, d: &[f64], e: usize) -> f64 {
        let face = Self::face(d);
        if face.iter().all(|i| Self::bit(e, i) as f64 == d[i]) {
            self.f(face)
        } else {
            f64::NEG_INFINITY
        }
    }

    /// Score of a reported distribution: the report point is its mean.
    pub fn score(&self, report: &[f64], e: usize) -> f64 {
        self.score_point(&self.mean(report), e)
    }

    /// `G(q)`: the expected score of reporting the mean of `q`, which is
    /// `f` of the face fixed by `q`.
    pub fn value(&self, q: &[f64]) -> f64 {
        self.f(Self::face(&self.mean(q)))
    }
}

/// A signal-selection instance whose value function equals a given
/// monotone set function: signals are independent uniform bits and the
/// event is the whole bit vector.
#[derive(Clone, Debug)]
pub struct ReducedInstance {
    n: usize,
    score: Arc<HypercubeScore>,
    ctx: ValueContext,
}

/// Build the reduced instance for a monotone `f` on `n` elements.
pub fn reduce_from_set_function(f: &dyn SetFunction, n: usize) -> Result<ReducedInstance> {
    if n > MAX_REDUCTION_SIGNALS {
        return Err(Error::CapExceeded {
            what: "reduction",
            size: n,
            cap: MAX_REDUCTION_SIGNALS,
            cost: format!("event with 2^{n} outcomes"),
        });
    }
    if f.n() != n {
        return Err(Error::InvalidConstraint(format!("set function has {} elements, expected {n}", f.n())));
    }
    let table: Vec<f64> = SignalSet::all(n).map(|s| f.eval(s)).collect();
    if let Some(s) = table.iter().position(|v| !v.is_finite()) {
        return Err(Error::Refused(format!("f({}) is not finite", SignalSet(s as u64))));
    }
    for s in SignalSet::all(n) {
        for i in (0..n).filter(|&i| !s.contains(i)) {
            if table[s.0 as usize] > table[s.insert(i).0 as usize] {
                return Err(Error::NotMonotone { subset: s.to_string(), element: i + 1 });
            }
        }
    }
    let corners = 1usize << n;
    let event: Vec<String> = (0..corners)
        .map(|e| (0..n).map(|i| char::from(b'0' + HypercubeScore::bit(e, i) as u8)).collect())
        .collect();
    let signals = (0..n)
        .map(|i| SignalSpec { name: format!("A{}", i + 1), outcomes: vec!["0".into(), "1".into()] })
        .collect();
    let p = 1.0 / corners as f64;
    let atoms = (0..corners).map(|e| (e, (0..n).map(|i| HypercubeScore::bit(e, i)).collect(), p)).collect();
    let structure = InformationStructure::new(event, signals, atoms)?;
    let score = Arc::new(HypercubeScore { n, f: table });
    let ctx = ValueContext::new(structure, ExpectedScoreFunction::HypercubeF(score.clone()))?;
    Ok(ReducedInstance { n, score, ctx })
}

impl ReducedInstance {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn ctx(&self) -> &ValueContext {
        &self.ctx
    }

    pub fn score_rule(&self) -> &HypercubeScore {
        &self.score
    }

    pub fn f(&self, s: SignalSet) -> f64 {
        self.score.f(s)
    }

    /// `F(r) = f({i : r_i in {0, 1}})`.
    pub fn big_f(&self, r: &[f64]) -> f64 {
        self.score.f(HypercubeScore::face(r))
    }

    /// `R(d, e)`.
    pub fn score(&self, d: &[f64], e: usize) -> f64 {
        self.score.score_point(d, e)
    }

    /// Posterior mean after observing bits `S` of corner `e`.
    pub fn mu(&self, s: SignalSet, e: usize) -> Vec<f64> {
        (0..self.n).map(|i| if s.contains(i) { HypercubeScore::bit(e, i) as f64 } else { 0.5 }).collect()
    }

    pub fn value(&self, s: SignalSet) -> Result<f64> {
        self.ctx.value_subset(s)
    }

    /// Subsets where `V(S) != f(S)`, with both values.
    pub fn verify(&self) -> Result<Vec<(SignalSet, f64, f64)>> {
        let mut bad = Vec::new();
        for s in SignalSet::all(self.n) {
            let v = self.value(s)?;
            if v != self.f(s) {
                bad.push((s, v, self.f(s)));
            }
        }
        Ok(bad)
    }
}

impl SetFunction for ReducedInstance {
    fn n(&self) -> usize {
        self.n
    }

    fn eval(&self, s: SignalSet) -> f64 {
        self.value(s).expect("subset in range")
    }
}
