use serde::Serialize;

use crate::decision::ExpectedScoreFunction;
use crate::error::{Error, Result};
use crate::info::InformationStructure;
use crate::numeric::pairwise_sum;
use crate::signal_set::SignalSet;
use crate::value::ValueContext;

/// Largest signal count accepted by the exact policy search.
pub const MAX_POLICY_SIGNALS: usize = 8;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AdaptiveRun {
    /// Signals in the order they were observed.
    pub chosen: Vec<usize>,
    pub observed: Vec<usize>,
    pub belief: Vec<f64>,
    /// Final decision, when the rule comes from an explicit decision problem.
    pub decision: Option<usize>,
    pub utility: f64,
}

fn check(ctx: &ValueContext, k: usize) -> Result<()> {
    if k > ctx.n_signals() {
        return Err(Error::InvalidConstraint(format!("k = {k} exceeds {} signals", ctx.n_signals())));
    }
    Ok(())
}

/// Signal with the largest value under the current belief; ties to the
/// lowest index.
fn greedy_pick(ctx: &ValueContext, cond: &InformationStructure, taken: SignalSet) -> usize {
    let local = ctx.with_structure(cond.clone());
    let mut best: Option<(usize, f64)> = None;
    for j in (0..ctx.n_signals()).filter(|&j| !taken.contains(j)) {
        let v = local.value_subset(SignalSet::singleton(j)).expect("signal in range");
        if best.is_none_or(|(_, b)| v > b) {
            best = Some((j, v));
        }
    }
    best.expect("a signal remains").0
}

/// Outcomes of signal `j` with positive mass under `cond`, with their
/// probabilities.
fn outcomes(cond: &InformationStructure, j: usize) -> Vec<(usize, f64)> {
    let mut acc: Vec<(usize, f64)> = Vec::new();
    for g in 0..cond.support_len() {
        let a = cond.support()[g][j];
        match acc.iter_mut().find(|(x, _)| *x == a) {
            Some(slot) => slot.1 += cond.mass(g),
            None => acc.push((a, cond.mass(g))),
        }
    }
    acc.sort_by_key(|&(a, _)| a);
    acc
}

/// Run the adaptive greedy policy on one realization: repeatedly observe
/// the signal of highest value under the current posterior, then act
/// optimally on the final belief.
pub fn adaptive_greedy(ctx: &ValueContext, k: usize, realization: &[usize], e: usize) -> Result<AdaptiveRun> {
    check(ctx, k)?;
    let st = ctx.structure();
    if st.gamma_of(realization).is_none() {
        return Err(Error::InvalidStructure(format!("realization {realization:?} is not in the support")));
    }
    let mut cond = st.clone();
    let mut taken = SignalSet::EMPTY;
    let mut chosen = Vec::with_capacity(k);
    let mut observed = Vec::with_capacity(k);
    for _ in 0..k {
        let j = greedy_pick(ctx, &cond, taken);
        taken = taken.insert(j);
        chosen.push(j);
        observed.push(realization[j]);
        cond = cond.condition(SignalSet::singleton(j), &[realization[j]]).expect("true realization has mass");
    }
    let belief = cond.prior_marginal();
    let decision = match ctx.rule() {
        ExpectedScoreFunction::PiecewiseMax(dp) => Some(dp.best_decision(&belief)),
        _ => None,
    };
    let utility = ctx.rule().score(&belief, e);
    Ok(AdaptiveRun { chosen, observed, belief, decision, utility })
}

/// Exact expected utility of the adaptive greedy policy, by walking its
/// decision tree.
pub fn adaptive_greedy_expected(ctx: &ValueContext, k: usize) -> Result<f64> {
    check(ctx, k)?;
    fn walk(ctx: &ValueContext, cond: &InformationStructure, taken: SignalSet, left: usize) -> f64 {
        if left == 0 {
            return ctx.rule().value(&cond.prior_marginal());
        }
        let j = greedy_pick(ctx, cond, taken);
        let terms: Vec<f64> = outcomes(cond, j)
            .into_iter()
            .map(|(a, p)| {
                let next = cond.condition(SignalSet::singleton(j), &[a]).expect("outcome has mass");
                p * walk(ctx, &next, taken.insert(j), left - 1)
            })
            .collect();
        pairwise_sum(&terms)
    }
    Ok(walk(ctx, ctx.structure(), SignalSet::EMPTY, k))
}

/// Optimal expected utility over all adaptive policies observing at most
/// `k` signals, by backward induction.
pub fn brute_force_policy(ctx: &ValueContext, k: usize) -> Result<f64> {
    check(ctx, k)?;
    if ctx.n_signals() > MAX_POLICY_SIGNALS {
        return Err(Error::CapExceeded {
            what: "adaptive policy search",
            size: ctx.n_signals(),
            cap: MAX_POLICY_SIGNALS,
            cost: "n!/(n-k)! observation orders times outcome branches".into(),
        });
    }
    fn best(ctx: &ValueContext, cond: &InformationStructure, taken: SignalSet, left: usize) -> f64 {
        let stop = ctx.rule().value(&cond.prior_marginal());
        if left == 0 {
            return stop;
        }
        (0..ctx.n_signals())
            .filter(|&j| !taken.contains(j))
            .map(|j| {
                let terms: Vec<f64> = outcomes(cond, j)
                    .into_iter()
                    .map(|(a, p)| {
                        let next = cond.condition(SignalSet::singleton(j), &[a]).expect("outcome has mass");
                        p * best(ctx, &next, taken.insert(j), left - 1)
                    })
                    .collect();
                pairwise_sum(&terms)
            })
            .fold(stop, f64::max)
    }
    Ok(best(ctx, ctx.structure(), SignalSet::EMPTY, k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decision::{revelation, DecisionProblem};
    use crate::info::{ci, dup2};

    fn guess(s: InformationStructure) -> ValueContext {
        ValueContext::new(s, revelation(DecisionProblem::guess(2))).unwrap()
    }

    #[test]
    fn dup2_perfect_signal() {
        let ctx = guess(dup2());
        for (a, e) in [(vec![0, 0], 0), (vec![1, 1], 1)] {
            let run = adaptive_greedy(&ctx, 1, &a, e).unwrap();
            assert_eq!(run.chosen, vec![0]);
            assert_eq!(run.decision, Some(e));
            assert_eq!(run.utility, 1.0);
        }
        assert_eq!(adaptive_greedy_expected(&ctx, 1).unwrap(), 1.0);
        assert_eq!(brute_force_policy(&ctx, 1).unwrap(), 1.0);
    }

    #[test]
    fn picks_accurate_signal() {
        let ctx = guess(ci(0.5, &[0.9, 0.6]));
        let run = adaptive_greedy(&ctx, 1, &[0, 0], 0).unwrap();
        assert_eq!(run.chosen, vec![0]);
        assert!((adaptive_greedy_expected(&ctx, 1).unwrap() - 0.9).abs() < 1e-12);
    }

    #[test]
    fn extremes() {
        let ctx = guess(ci(0.5, &[0.9, 0.7, 0.6]));
        let top = ctx.value_subset(SignalSet::full(3)).unwrap();
        let bot = ctx.value_subset(SignalSet::EMPTY).unwrap();
        assert!((adaptive_greedy_expected(&ctx, 3).unwrap() - top).abs() < 1e-12);
        assert!((brute_force_policy(&ctx, 3).unwrap() - top).abs() < 1e-12);
        assert_eq!(brute_force_policy(&ctx, 0).unwrap(), bot);
    }
}
