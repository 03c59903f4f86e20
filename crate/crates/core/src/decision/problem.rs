use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A finite decision problem: `utility[d][e]` is the payoff of decision
/// `d` when the event takes outcome `e`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecisionProblem {
    pub decisions: Vec<String>,
    pub utility: Vec<Vec<f64>>,
}

impl DecisionProblem {
    pub fn new(decisions: Vec<String>, utility: Vec<Vec<f64>>) -> Result<Self> {
        if decisions.is_empty() {
            return Err(Error::InvalidDecision("at least one decision is required".into()));
        }
        if decisions.len() != utility.len() {
            return Err(Error::InvalidDecision(format!(
                "{} decisions but {} utility rows",
                decisions.len(),
                utility.len()
            )));
        }
        let k = utility[0].len();
        if k == 0 {
            return Err(Error::InvalidDecision("utility rows are empty".into()));
        }
        for (d, row) in utility.iter().enumerate() {
            if row.len() != k {
                return Err(Error::InvalidDecision(format!("utility row {d} has {} entries, expected {k}", row.len())));
            }
            if row.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidDecision(format!("utility row {d} is not finite")));
            }
        }
        Ok(Self { decisions, utility })
    }

    /// Unlabelled problem from a utility matrix.
    pub fn from_matrix(utility: Vec<Vec<f64>>) -> Result<Self> {
        let decisions = (0..utility.len()).map(|d| format!("d{d}")).collect();
        Self::new(decisions, utility)
    }

    /// Guess the outcome; payoff 1 when right.
    pub fn guess(k: usize) -> Self {
        let utility = (0..k).map(|d| (0..k).map(|e| f64::from(u8::from(d == e))).collect()).collect();
        Self { decisions: (0..k).map(|d| format!("guess {d}")).collect(), utility }
    }

    /// Utilities uniform in `[0, 1)`.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, decisions: usize, outcomes: usize) -> Self {
        let utility = (0..decisions).map(|_| (0..outcomes).map(|_| rng.gen::<f64>()).collect()).collect();
        Self::from_matrix(utility).expect("random utilities are finite")
    }

    pub fn n_outcomes(&self) -> usize {
        self.utility[0].len()
    }

    pub fn expected_utility(&self, d: usize, q: &[f64]) -> f64 {
        self.utility[d].iter().zip(q).map(|(u, p)| u * p).sum()
    }

    /// Optimal decision under belief `q`; ties go to the lowest index.
    pub fn best_decision(&self, q: &[f64]) -> usize {
        let mut best = 0;
        let mut best_v = self.expected_utility(0, q);
        for d in 1..self.utility.len() {
            let v = self.expected_utility(d, q);
            if v > best_v {
                best = d;
                best_v = v;
            }
        }
        best
    }

    pub fn range(&self) -> f64 {
        let it = self.utility.iter().flatten();
        let hi = it.clone().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = it.copied().fold(f64::INFINITY, f64::min);
        hi - lo
    }
}

/// Which component of the pair event is worth the bonus.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairWeighting {
    First,
    Second,
}

/// Predict both bits of `E = (Eb, Ec)` (outcome `2*Eb + Ec`), one point
/// per correct bit, with `1 + eps` for the weighted component.
pub fn pair_problem(eps: f64, weighting: PairWeighting) -> DecisionProblem {
    let (wb, wc) = match weighting {
        PairWeighting::First => (1.0 + eps, 1.0),
        PairWeighting::Second => (1.0, 1.0 + eps),
    };
    let mut utility = Vec::new();
    let mut decisions = Vec::new();
    for d in 0..4usize {
        decisions.push(format!("{}{}", d >> 1, d & 1));
        utility.push(
            (0..4usize)
                .map(|e| {
                    let b = if d >> 1 == e >> 1 { wb } else { 0.0 };
                    let c = if d & 1 == e & 1 { wc } else { 0.0 };
                    b + c
                })
                .collect(),
        );
    }
    DecisionProblem { decisions, utility }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(DecisionProblem::from_matrix(vec![]).is_err());
        assert!(DecisionProblem::from_matrix(vec![vec![1.0], vec![1.0, 2.0]]).is_err());
        assert!(DecisionProblem::from_matrix(vec![vec![f64::NAN]]).is_err());
    }

    #[test]
    fn ties_take_lowest_index() {
        let g = DecisionProblem::guess(2);
        assert_eq!(g.best_decision(&[0.5, 0.5]), 0);
        assert_eq!(g.best_decision(&[0.4, 0.6]), 1);
    }

    #[test]
    fn pair_utilities() {
        let p = pair_problem(0.1, PairWeighting::First);
        assert_eq!(p.utility[3], vec![0.0, 1.0, 1.1, 2.1]);
    }
}
