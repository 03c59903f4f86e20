//! Decision problems as convex expected-score functions `G`, with the
//! scoring rules, Bregman divergences and entropies they induce.

mod custom;
mod hull;
mod problem;
mod spec;

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

pub use custom::Custom1D;
pub use hull::{HullDistance, MAX_HULL_POINTS};
pub use problem::{pair_problem, DecisionProblem, PairWeighting};
pub use spec::{parse_rule, RuleFile, RULES};

use crate::error::{Error, Result};
use crate::numeric::{ext_add, ext_mul, pairwise_sum, random_simplex};
use crate::select::HypercubeScore;

/// The convex function `G` with `G(q)` the optimal expected utility
/// under belief `q`.
#[derive(Clone, Debug)]
pub enum ExpectedScoreFunction {
    /// `max_d <q, u_d>`.
    PiecewiseMax(DecisionProblem),
    /// `sum_e q(e) log2 q(e)`.
    Log,
    /// `sum_e q(e)^2`.
    Quadratic,
    /// Piecewise-linear in `q(E = second outcome)`; binary events only.
    Custom1D(Custom1D),
    /// The hypercube scoring rule built from a monotone set function.
    HypercubeF(Arc<HypercubeScore>),
    /// Distance to the convex hull of a point set.
    HullDistance(Arc<HullDistance>),
}

/// A chord along which convexity (or the chosen subgradient) fails.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChordViolation {
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    pub lambda: f64,
    /// How far the inequality is violated.
    pub excess: f64,
}

/// Build the scoring function whose truthful report reproduces the
/// optimal decision of `dp`.
pub fn revelation(dp: DecisionProblem) -> ExpectedScoreFunction {
    ExpectedScoreFunction::PiecewiseMax(dp)
}

fn log2_or_neg_inf(x: f64) -> f64 {
    if x > 0.0 {
        x.log2()
    } else {
        f64::NEG_INFINITY
    }
}

impl ExpectedScoreFunction {
    pub fn name(&self) -> String {
        match self {
            Self::PiecewiseMax(dp) => format!("piecewise-max({} decisions)", dp.utility.len()),
            Self::Log => "log".into(),
            Self::Quadratic => "quadratic".into(),
            Self::Custom1D(c) => {
                let pts: Vec<String> = c.breakpoints().iter().map(|(x, y)| format!("({x},{y})")).collect();
                format!("custom1d[{}]", pts.join(","))
            }
            Self::HypercubeF(h) => format!("hypercube(n={})", h.n()),
            Self::HullDistance(h) => format!("hull-distance({} points)", h.points().len()),
        }
    }

    /// Required number of event outcomes, if the rule fixes it.
    pub fn n_outcomes(&self) -> Option<usize> {
        match self {
            Self::PiecewiseMax(dp) => Some(dp.n_outcomes()),
            Self::Log | Self::Quadratic => None,
            Self::Custom1D(_) => Some(2),
            Self::HypercubeF(h) => Some(1 << h.n()),
            Self::HullDistance(h) => Some(h.dim()),
        }
    }

    /// Whether truthful reporting is the unique best response.
    pub fn is_strictly_proper(&self) -> bool {
        matches!(self, Self::Log | Self::Quadratic)
    }

    pub fn value(&self, q: &[f64]) -> f64 {
        match self {
            Self::PiecewiseMax(dp) => dp.expected_utility(dp.best_decision(q), q),
            Self::Log => pairwise_sum(&q.iter().map(|&x| if x > 0.0 { x * x.log2() } else { 0.0 }).collect::<Vec<_>>()),
            Self::Quadratic => pairwise_sum(&q.iter().map(|x| x * x).collect::<Vec<_>>()),
            Self::Custom1D(c) => c.eval(q[1]),
            Self::HypercubeF(h) => h.value(q),
            Self::HullDistance(h) => h.distance(q),
        }
    }

    /// A subgradient of `G` at `q`. Ties at kinks go to the lowest active
    /// decision (piecewise max) or the right slope (custom1d); zero
    /// coordinates of the log rule carry `-inf`.
    pub fn subgradient(&self, q: &[f64]) -> Vec<f64> {
        match self {
            Self::PiecewiseMax(dp) => dp.utility[dp.best_decision(q)].clone(),
            Self::Log => q.iter().map(|&x| log2_or_neg_inf(x)).collect(),
            Self::Quadratic => q.iter().map(|x| 2.0 * x).collect(),
            Self::Custom1D(c) => vec![0.0, c.slope(q[1])],
            Self::HypercubeF(h) => (0..q.len()).map(|e| h.score(q, e)).collect(),
            Self::HullDistance(h) => h.subgradient(q),
        }
    }

    /// `S(report, e) = G(report) + <G'(report), delta_e - report>`.
    pub fn score(&self, report: &[f64], e: usize) -> f64 {
        match self {
            Self::PiecewiseMax(dp) => dp.utility[dp.best_decision(report)][e],
            Self::Log => log2_or_neg_inf(report[e]),
            Self::Quadratic => 2.0 * report[e] - pairwise_sum(&report.iter().map(|x| x * x).collect::<Vec<_>>()),
            Self::HypercubeF(h) => h.score(report, e),
            _ => {
                let g = self.subgradient(report);
                let inner = pairwise_sum(
                    &g.iter()
                        .enumerate()
                        .map(|(i, &gi)| ext_mul(f64::from(u8::from(i == e)) - report[i], gi))
                        .collect::<Vec<_>>(),
                );
                ext_add(self.value(report), inner)
            }
        }
    }

    /// `S(report; belief) = E_{e ~ belief} S(report, e)`.
    pub fn expected_score(&self, report: &[f64], belief: &[f64]) -> f64 {
        let terms: Vec<f64> = belief
            .iter()
            .enumerate()
            .map(|(e, &b)| if b == 0.0 { 0.0 } else { ext_mul(b, self.score(report, e)) })
            .collect();
        pairwise_sum(&terms)
    }

    /// `D_G(p, q) = G(p) - G(q) - <G'(q), p - q>`.
    pub fn bregman(&self, p: &[f64], q: &[f64]) -> f64 {
        match self {
            Self::Log => {
                let terms: Vec<f64> = p
                    .iter()
                    .zip(q)
                    .map(|(&a, &b)| match (a > 0.0, b > 0.0) {
                        (false, _) => 0.0,
                        (true, false) => f64::INFINITY,
                        (true, true) => a * (a / b).log2(),
                    })
                    .collect();
                if terms.iter().any(|t| t.is_infinite()) {
                    f64::INFINITY
                } else {
                    pairwise_sum(&terms).max(0.0)
                }
            }
            Self::Quadratic => pairwise_sum(&p.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).collect::<Vec<_>>()),
            _ => {
                let g = self.subgradient(q);
                let lin: Vec<f64> = g.iter().zip(p.iter().zip(q)).map(|(&gi, (a, b))| ext_mul(a - b, gi)).collect();
                let lin = pairwise_sum(&lin);
                if lin == f64::NEG_INFINITY {
                    return f64::INFINITY;
                }
                (self.value(p) - self.value(q) - lin).max(0.0)
            }
        }
    }

    /// Generalized entropy `h = -G`.
    pub fn entropy(&self, q: &[f64]) -> f64 {
        -self.value(q)
    }

    /// Probe `G(l p + (1-l) q) <= l G(p) + (1-l) G(q)` on random chords.
    pub fn probe_convexity(&self, k: usize, samples: usize, seed: u64) -> Result<(), ChordViolation> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..samples {
            let p = random_simplex(&mut rng, k);
            let q = random_simplex(&mut rng, k);
            let l: f64 = rng.gen();
            let mid: Vec<f64> = p.iter().zip(&q).map(|(a, b)| l * a + (1.0 - l) * b).collect();
            let excess = self.value(&mid) - (l * self.value(&p) + (1.0 - l) * self.value(&q));
            if excess > 1e-9 {
                return Err(ChordViolation { p, q, lambda: l, excess });
            }
        }
        Ok(())
    }

    /// Probe `G(p) >= G(q) + <G'(q), p - q>` at random pairs.
    pub fn probe_subgradient(&self, k: usize, samples: usize, seed: u64) -> Result<(), ChordViolation> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..samples {
            let p = random_simplex(&mut rng, k);
            let q = random_simplex(&mut rng, k);
            let g = self.subgradient(&q);
            let lin: f64 = g.iter().zip(p.iter().zip(&q)).map(|(&gi, (a, b))| ext_mul(a - b, gi)).sum();
            let excess = self.value(&q) + lin - self.value(&p);
            if excess > 1e-9 {
                return Err(ChordViolation { p, q, lambda: 0.0, excess });
            }
        }
        Ok(())
    }

    /// Check the rule against an event with `k` outcomes and probe its
    /// convexity. Hull-distance rules are convex by construction and
    /// hypercube rules are only evaluated at posterior means of their own
    /// structure, so neither is probed.
    pub fn validate_for(&self, k: usize) -> Result<()> {
        if let Some(r) = self.n_outcomes() {
            if r != k {
                return Err(Error::OutcomeMismatch { structure: k, rule: r });
            }
        }
        if matches!(self, Self::HypercubeF(_) | Self::HullDistance(_)) {
            return Ok(());
        }
        self.probe_convexity(k, 1000, 0x5eed)
            .map_err(|c| Error::NotConvex(format!("chord excess {:.3e} at lambda {:.3}", c.excess, c.lambda)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn log_scores() {
        let g = ExpectedScoreFunction::Log;
        assert_eq!(g.score(&[0.5, 0.5], 0), -1.0);
        assert_eq!(g.score(&[1.0, 0.0], 1), f64::NEG_INFINITY);
        assert_eq!(g.expected_score(&[0.5, 0.5], &[0.5, 0.5]), -1.0);
        assert_abs_diff_eq!(g.expected_score(&[0.25, 0.75], &[0.5, 0.5]), -1.207_518_749_639_422, epsilon = 1e-12);
        assert_eq!(g.expected_score(&[1.0, 0.0], &[1.0, 0.0]), 0.0);
    }

    #[test]
    fn quadratic_scores() {
        let g = ExpectedScoreFunction::Quadratic;
        assert_eq!(g.score(&[1.0, 0.0], 0), 1.0);
        assert_eq!(g.bregman(&[1.0, 0.0], &[0.0, 1.0]), 2.0);
        assert_eq!(g.entropy(&[0.5, 0.5]), -0.5);
    }

    #[test]
    fn kl_divergence() {
        let g = ExpectedScoreFunction::Log;
        assert_eq!(g.bregman(&[1.0, 0.0], &[0.5, 0.5]), 1.0);
        assert_eq!(g.bregman(&[0.5, 0.5], &[1.0, 0.0]), f64::INFINITY);
        assert_eq!(g.bregman(&[0.3, 0.7], &[0.3, 0.7]), 0.0);
        assert_eq!(g.entropy(&[0.5, 0.5]), 1.0);
        assert_eq!(g.entropy(&[1.0, 0.0]), 0.0);
    }

    #[test]
    fn revelation_guess() {
        let g = revelation(DecisionProblem::guess(2));
        assert_eq!(g.value(&[0.3, 0.7]), 0.7);
        assert_eq!(g.score(&[0.3, 0.7], 1), 1.0);
        let single = revelation(DecisionProblem::from_matrix(vec![vec![1.0, 3.0]]).unwrap());
        assert_eq!(single.bregman(&[1.0, 0.0], &[0.0, 1.0]), 0.0);
    }

    #[test]
    fn custom1d_convexity_and_score() {
        let g = ExpectedScoreFunction::Custom1D(Custom1D::kink075());
        assert!(g.probe_convexity(2, 1000, 1).is_ok());
        assert!(g.probe_subgradient(2, 1000, 1).is_ok());
        for q in [[0.5, 0.5], [0.1, 0.9], [0.25, 0.75]] {
            assert_abs_diff_eq!(g.expected_score(&q, &q), g.value(&q), epsilon = 1e-12);
        }
    }

    #[test]
    fn outcome_mismatch() {
        let g = ExpectedScoreFunction::Custom1D(Custom1D::kink075());
        assert!(matches!(g.validate_for(3), Err(Error::OutcomeMismatch { .. })));
        assert!(ExpectedScoreFunction::Log.validate_for(5).is_ok());
    }
}
