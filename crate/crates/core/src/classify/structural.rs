use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{classify_moderate, classify_weak, ClassificationReport, ModerateOptions, Witness};
use crate::decision::{ExpectedScoreFunction, HullDistance};
use crate::error::{Error, Result};
use crate::info::{ci, InformationStructure, Posterior};
use crate::numeric::{linf, random_simplex, PROB_TOL};
use crate::signal_set::SignalSet;
use crate::value::ValueContext;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Triviality {
    /// Each single signal already pins down the full posterior.
    TrivialSubstitutes,
    /// Any `n - 1` signals leave the prior unchanged.
    TrivialComplements,
    /// Both hold at once (for example a single signal, or an uninformative
    /// structure).
    Both,
    Neither,
}

fn posteriors(st: &InformationStructure, s: SignalSet) -> Result<Vec<(usize, Posterior)>> {
    let p = st.subset_signal(s)?;
    (0..st.support_len())
        .map(|g| Ok((g, st.posterior(&p, p.cell_of(g))?)))
        .collect()
}

pub fn check_trivial(st: &InformationStructure) -> Result<Triviality> {
    let n = st.n_signals();
    let full = posteriors(st, st.all_signals())?;
    let prior = st.prior_marginal();
    let mut subs = true;
    let mut comps = true;
    for i in 0..n {
        let single = posteriors(st, SignalSet::singleton(i))?;
        subs &= single.iter().zip(&full).all(|((_, a), (_, b))| linf(&a.dist, &b.dist) <= PROB_TOL);
        let rest = posteriors(st, SignalSet::full(n).remove(i))?;
        comps &= rest.iter().all(|(_, a)| linf(&a.dist, &prior) <= PROB_TOL);
    }
    Ok(match (subs, comps) {
        (true, true) => Triviality::Both,
        (true, false) => Triviality::TrivialSubstitutes,
        (false, true) => Triviality::TrivialComplements,
        (false, false) => Triviality::Neither,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GeometricTest {
    pub holds: bool,
    /// Largest distance from the prior to a single-signal posterior.
    pub r: f64,
    /// Smallest distance from the prior to a joint posterior.
    pub min_joint_distance: f64,
}

/// Sufficient condition for complements under every decision problem:
/// binary event, two signals, and every joint posterior at least `2r` away
/// from the prior (sup-norm) while single signals stay within `r`.
pub fn universal_complements_geometric(st: &InformationStructure) -> Result<GeometricTest> {
    if st.n_outcomes() != 2 || st.n_signals() != 2 {
        return Err(Error::Refused(format!(
            "geometric test needs a binary event and two signals, got {} outcomes and {} signals",
            st.n_outcomes(),
            st.n_signals()
        )));
    }
    let prior = st.prior_marginal();
    let dist = |ps: Vec<(usize, Posterior)>| -> Vec<f64> {
        ps.into_iter().map(|(_, p)| linf(&p.dist, &prior)).collect()
    };
    let mut r: f64 = 0.0;
    for i in 0..2 {
        r = dist(posteriors(st, SignalSet::singleton(i))?).into_iter().fold(r, f64::max);
    }
    let min_joint_distance =
        dist(posteriors(st, st.all_signals())?).into_iter().fold(f64::INFINITY, f64::min);
    Ok(GeometricTest { holds: min_joint_distance >= 2.0 * r - PROB_TOL, r, min_joint_distance })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct JointChord {
    pub p: [Vec<f64>; 2],
    pub q: [Vec<f64>; 2],
    pub lambda: f64,
    pub excess: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct JointConvexity {
    pub holds: bool,
    pub samples: usize,
    pub worst: Option<JointChord>,
}

/// Random chords in `(p, q)` space testing joint convexity of the Bregman
/// divergence of `g`. Passing is evidence, not proof.
pub fn probe_joint_convexity(g: &ExpectedScoreFunction, k: usize, samples: usize, seed: u64) -> JointConvexity {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: Option<JointChord> = None;
    for _ in 0..samples {
        let p = [random_simplex(&mut rng, k), random_simplex(&mut rng, k)];
        let q = [random_simplex(&mut rng, k), random_simplex(&mut rng, k)];
        let lambda: f64 = rng.gen_range(0.05..0.95);
        let mix = |a: &[f64], b: &[f64]| -> Vec<f64> {
            a.iter().zip(b).map(|(x, y)| lambda * x + (1.0 - lambda) * y).collect()
        };
        let lhs = g.bregman(&mix(&p[0], &p[1]), &mix(&q[0], &q[1]));
        let rhs = lambda * g.bregman(&p[0], &q[0]) + (1.0 - lambda) * g.bregman(&p[1], &q[1]);
        let excess = lhs - rhs;
        if !excess.is_finite() {
            continue;
        }
        if excess > 1e-9 * rhs.abs().max(1.0) && worst.as_ref().is_none_or(|w| excess > w.excess) {
            worst = Some(JointChord { p, q, lambda, excess });
        }
    }
    JointConvexity { holds: worst.is_none(), samples, worst }
}

#[derive(Clone, Debug, Serialize)]
pub struct SeparatingProblem {
    #[serde(skip)]
    pub rule: ExpectedScoreFunction,
    /// Single-signal posteriors spanning the hull.
    pub hull_points: Vec<Vec<f64>>,
    /// Largest distance from a multi-signal posterior to the hull.
    pub max_distance: f64,
    /// A strictly increasing marginal under the returned rule.
    pub witness: Witness,
}

/// Distance-to-hull rule that makes the structure strict complements at
/// some comparison. Refuses when every multi-signal posterior already lies
/// in the hull of the single-signal posteriors.
pub fn separating_decision_problem(st: &InformationStructure, tol: f64) -> Result<SeparatingProblem> {
    let n = st.n_signals();
    let mut points = Vec::new();
    for i in 0..n {
        for (_, p) in posteriors(st, SignalSet::singleton(i))? {
            points.push(p.dist);
        }
    }
    let hull = HullDistance::new(points)?;
    let mut max_distance: f64 = 0.0;
    for s in SignalSet::all(n).filter(|s| s.len() >= 2) {
        for (_, p) in posteriors(st, s)? {
            max_distance = max_distance.max(hull.distance(&p.dist));
        }
    }
    if max_distance <= tol {
        return Err(Error::Refused(
            "every multi-signal posterior lies in the hull of the single-signal posteriors".into(),
        ));
    }
    let hull_points = hull.points().to_vec();
    let rule = ExpectedScoreFunction::HullDistance(Arc::new(hull));
    let ctx = ValueContext::new(st.clone(), rule.clone())?;
    let weak = classify_weak(&ctx, tol, super::DEFAULT_SIGNAL_CAP)?;
    let witness = weak
        .substitutes_witness
        .filter(|w| w.margin() < -tol)
        .ok_or_else(|| Error::CheckFailed("hull-distance rule produced no increasing marginal".into()))?;
    Ok(SeparatingProblem { rule, hull_points, max_distance, witness })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LogCiCheck {
    pub weak: ClassificationReport,
    pub moderate: ClassificationReport,
}

/// Conditionally independent signals under the log rule are substitutes at
/// both levels; anything else is an error.
pub fn verify_log_ci_substitutes(r: f64, s: &[f64], tol: f64) -> Result<LogCiCheck> {
    let ctx = ValueContext::new(ci(r, s), ExpectedScoreFunction::Log)?;
    let weak = classify_weak(&ctx, tol, super::DEFAULT_SIGNAL_CAP)?;
    let moderate = classify_moderate(&ctx, ModerateOptions { tol, ..Default::default() })?;
    for rep in [&weak, &moderate] {
        if !rep.substitutes {
            let w = rep.substitutes_witness.as_ref().map(|w| w.margin()).unwrap_or(f64::NAN);
            return Err(Error::CheckFailed(format!(
                "CI(r={r}, s={s:?}) under log is not {:?} substitutes (margin {w})",
                rep.level
            )));
        }
    }
    Ok(LogCiCheck { weak, moderate })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decision::Custom1D;
    use crate::info::{dup2, xor2};

    #[test]
    fn trivial_classes() {
        assert_eq!(check_trivial(&dup2()).unwrap(), Triviality::TrivialSubstitutes);
        assert_eq!(check_trivial(&xor2(0.5)).unwrap(), Triviality::TrivialComplements);
        assert_eq!(check_trivial(&xor2(0.6)).unwrap(), Triviality::Neither);
    }

    #[test]
    fn geometric_examples() {
        let t = universal_complements_geometric(&xor2(0.6)).unwrap();
        assert!(t.holds);
        assert!((t.r - 0.12).abs() < 1e-12 && (t.min_joint_distance - 0.48).abs() < 1e-12);
        assert!(!universal_complements_geometric(&dup2()).unwrap().holds);
        assert!(universal_complements_geometric(&xor2(0.5)).unwrap().holds);
    }

    #[test]
    fn joint_convexity() {
        assert!(probe_joint_convexity(&ExpectedScoreFunction::Log, 3, 2000, 1).holds);
        assert!(probe_joint_convexity(&ExpectedScoreFunction::Quadratic, 3, 2000, 1).holds);
        let kink = ExpectedScoreFunction::Custom1D(Custom1D::kink075());
        assert!(!probe_joint_convexity(&kink, 2, 5000, 1).holds);
    }

    #[test]
    fn separating() {
        let sp = separating_decision_problem(&xor2(0.5), 1e-9).unwrap();
        assert!((sp.max_distance - 0.5f64.sqrt()).abs() < 1e-9);
        assert!(matches!(separating_decision_problem(&dup2(), 1e-9), Err(Error::Refused(_))));
        assert!(separating_decision_problem(&ci(0.9, &[0.8, 0.8]), 1e-9).is_ok());
    }

    #[test]
    fn log_ci() {
        verify_log_ci_substitutes(0.6, &[0.8, 0.7, 0.65], 1e-9).unwrap();
    }
}
