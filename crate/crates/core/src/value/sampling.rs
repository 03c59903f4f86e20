use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::decision::DecisionProblem;
use crate::error::{Error, Result};
use crate::info::{InformationStructure, Posterior};
use crate::signal_set::SignalSet;

use super::ValueContext;

/// Largest support for which the score range is probed exactly.
const MAX_PROBED_SUPPORT: usize = 1 << 16;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SamplingOptions {
    /// Known range `K` of the sampled quantity; probed when absent.
    pub range: Option<f64>,
    /// Floor applied to posterior probabilities before evaluating `G`.
    pub clamp: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SampledValue {
    pub estimate: f64,
    pub samples: usize,
    pub range: f64,
    pub clamped: bool,
}

/// Hoeffding sample size `ceil(K^2 ln(2/delta) / (2 eps^2))`.
pub fn hoeffding_samples(range: f64, eps: f64, delta: f64) -> usize {
    (range * range * (2.0 / delta).ln() / (2.0 * eps * eps)).ceil() as usize
}

fn check_eps_delta(eps: f64, delta: f64) -> Result<()> {
    if eps > 0.0 && eps < 1.0 && delta > 0.0 && delta < 1.0 {
        Ok(())
    } else {
        Err(Error::Refused(format!("epsilon={eps} and delta={delta} must lie in (0, 1)")))
    }
}

/// Draws `(e, realization index)` from the prior.
#[derive(Clone, Debug)]
pub struct PriorSampler {
    cumulative: Vec<f64>,
    atoms: Vec<(usize, usize)>,
}

impl PriorSampler {
    pub fn new(s: &InformationStructure) -> Self {
        let mut acc = 0.0;
        let mut cumulative = Vec::with_capacity(s.entries().len());
        let mut atoms = Vec::with_capacity(s.entries().len());
        for en in s.entries() {
            acc += en.p;
            cumulative.push(acc);
            atoms.push((en.e, en.gamma));
        }
        Self { cumulative, atoms }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (usize, usize) {
        let u = rng.gen::<f64>() * self.cumulative.last().copied().unwrap_or(1.0);
        let i = self.cumulative.partition_point(|&c| c <= u).min(self.atoms.len() - 1);
        self.atoms[i]
    }
}

/// Prior-probability oracle `p(e, a_S)` for a fixed subset `S`.
struct MarginalOracle {
    table: HashMap<Vec<usize>, Vec<f64>>,
}

impl MarginalOracle {
    fn new(s: &InformationStructure, subset: SignalSet) -> Self {
        let mut table: HashMap<Vec<usize>, Vec<f64>> = HashMap::new();
        for g in 0..s.support_len() {
            let row = table.entry(s.project(g, subset)).or_insert_with(|| vec![0.0; s.n_outcomes()]);
            for (x, y) in row.iter_mut().zip(s.joint(g)) {
                *x += y;
            }
        }
        Self { table }
    }

    /// `p(e | a_S) = p(e, a_S) / p(a_S)`.
    fn posterior(&self, a_s: &[usize]) -> Vec<f64> {
        Posterior::from_joint(&self.table[a_s]).dist
    }
}

fn clamp_posterior(q: &mut [f64], floor: f64) {
    q.iter_mut().for_each(|x| *x = x.max(floor));
    let t: f64 = q.iter().sum();
    q.iter_mut().for_each(|x| *x /= t);
}

/// Estimate `V(S)` from `m` prior samples, each valued at `G` of its exact
/// posterior. With probability at least `1 - delta` the estimate is
/// within `eps` of the exact value.
pub fn value_sampled(
    ctx: &ValueContext,
    subset: SignalSet,
    eps: f64,
    delta: f64,
    seed: u64,
    opts: SamplingOptions,
) -> Result<SampledValue> {
    check_eps_delta(eps, delta)?;
    let st = ctx.structure();
    st.check_subset(subset)?;
    let g = ctx.rule();
    let eval = |mut q: Vec<f64>| {
        if let Some(f) = opts.clamp {
            clamp_posterior(&mut q, f);
        }
        g.value(&q)
    };
    if subset.is_empty() {
        return Ok(SampledValue { estimate: eval(st.prior_marginal()), samples: 0, range: 0.0, clamped: opts.clamp.is_some() });
    }
    let oracle = MarginalOracle::new(st, subset);
    let range = match opts.range {
        Some(k) if k.is_finite() && k >= 0.0 => k,
        Some(k) => return Err(Error::Unbounded(format!("supplied range {k} is not a finite nonnegative number"))),
        None => {
            if st.support_len() > MAX_PROBED_SUPPORT {
                return Err(Error::Refused("support too large to probe the score range; supply it".into()));
            }
            let vals: Vec<f64> = oracle.table.keys().map(|k| eval(oracle.posterior(k))).collect();
            if let Some(bad) = vals.iter().find(|v| !v.is_finite()) {
                return Err(Error::Unbounded(format!(
                    "G takes the value {bad} on a reachable posterior; configure a clamp floor"
                )));
            }
            let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
            hi - lo
        }
    };
    let m = hoeffding_samples(range, eps, delta).max(1);
    let sampler = PriorSampler::new(st);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut total = 0.0;
    for _ in 0..m {
        let (_, gamma) = sampler.sample(&mut rng);
        let v = eval(oracle.posterior(&st.project(gamma, subset)));
        if !v.is_finite() {
            return Err(Error::Unbounded(format!("sampled G value {v}; configure a clamp floor")));
        }
        total += v;
    }
    Ok(SampledValue { estimate: total / m as f64, samples: m, range, clamped: opts.clamp.is_some() })
}

/// Oracles for the decision-oracle model, backed by a known structure:
/// a decision maker for observed `a_S`, the utility `u(d, e)`, and a
/// prior sampler.
pub struct DecisionOracles<'a> {
    structure: &'a InformationStructure,
    problem: &'a DecisionProblem,
    sampler: PriorSampler,
    cache: HashMap<(SignalSet, Vec<usize>), usize>,
}

impl<'a> DecisionOracles<'a> {
    pub fn new(structure: &'a InformationStructure, problem: &'a DecisionProblem) -> Result<Self> {
        if problem.n_outcomes() != structure.n_outcomes() {
            return Err(Error::OutcomeMismatch { structure: structure.n_outcomes(), rule: problem.n_outcomes() });
        }
        Ok(Self { structure, problem, sampler: PriorSampler::new(structure), cache: HashMap::new() })
    }

    /// Optimal decision after observing `a_S`.
    pub fn decide(&mut self, subset: SignalSet, a_s: &[usize]) -> usize {
        let key = (subset, a_s.to_vec());
        if let Some(&d) = self.cache.get(&key) {
            return d;
        }
        let st = self.structure;
        let mut joint = vec![0.0; st.n_outcomes()];
        for g in (0..st.support_len()).filter(|&g| st.project(g, subset) == a_s) {
            joint.iter_mut().zip(st.joint(g)).for_each(|(x, y)| *x += y);
        }
        let d = self.problem.best_decision(&Posterior::from_joint(&joint).dist);
        self.cache.insert(key, d);
        d
    }

    pub fn utility(&self, d: usize, e: usize) -> f64 {
        self.problem.utility[d][e]
    }

    pub fn sample(&self, rng: &mut ChaCha8Rng) -> (usize, Vec<usize>) {
        let (e, gamma) = self.sampler.sample(rng);
        (e, self.structure.support()[gamma].clone())
    }

    pub fn range(&self) -> f64 {
        self.problem.range()
    }
}

/// Estimate `V(S)` by averaging `u(decide(a_S), e)` over prior samples,
/// without computing any posterior.
#[allow(clippy::too_many_arguments)]
pub fn value_sampled_decision<D, U, S>(
    mut decide: D,
    utility: U,
    mut sample: S,
    range: f64,
    subset: SignalSet,
    eps: f64,
    delta: f64,
    seed: u64,
) -> Result<SampledValue>
where
    D: FnMut(SignalSet, &[usize]) -> usize,
    U: Fn(usize, usize) -> f64,
    S: FnMut(&mut ChaCha8Rng) -> (usize, Vec<usize>),
{
    check_eps_delta(eps, delta)?;
    if !(range.is_finite() && range >= 0.0) {
        return Err(Error::Unbounded(format!("utility range {range} is not finite")));
    }
    let m = hoeffding_samples(range, eps, delta).max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut total = 0.0;
    for _ in 0..m {
        let (e, a) = sample(&mut rng);
        let a_s: Vec<usize> = subset.iter().map(|i| a[i]).collect();
        let u = utility(decide(subset, &a_s), e);
        if !u.is_finite() {
            return Err(Error::Unbounded(format!("utility oracle returned {u}")));
        }
        total += u;
    }
    Ok(SampledValue { estimate: total / m as f64, samples: m, range, clamped: false })
}

impl ValueContext {
    /// Convenience wrapper around [`value_sampled_decision`] for a
    /// decision problem evaluated on this context's structure.
    pub fn value_sampled_decision(
        &self,
        problem: &DecisionProblem,
        subset: SignalSet,
        eps: f64,
        delta: f64,
        seed: u64,
    ) -> Result<SampledValue> {
        let oracles = std::cell::RefCell::new(DecisionOracles::new(self.structure(), problem)?);
        let range = oracles.borrow().range();
        value_sampled_decision(
            |s, a| oracles.borrow_mut().decide(s, a),
            |d, e| problem.utility[d][e],
            |rng| oracles.borrow().sample(rng),
            range,
            subset,
            eps,
            delta,
            seed,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decision::{pair_problem, ExpectedScoreFunction as G, PairWeighting};
    use crate::info::{dup2, pair, xor2};

    #[test]
    fn sample_size() {
        assert_eq!(hoeffding_samples(1.0, 0.05, 0.05), 738);
        assert_eq!(hoeffding_samples(0.0, 0.05, 0.05), 0);
    }

    #[test]
    fn quadratic_point_masses() {
        let ctx = ValueContext::new(xor2(0.5), G::Quadratic).unwrap();
        let r = value_sampled(&ctx, SignalSet::full(2), 0.05, 0.05, 1, SamplingOptions::default()).unwrap();
        assert!((r.estimate - 1.0).abs() <= 0.05);
        let ctx = ValueContext::new(dup2(), G::Quadratic).unwrap();
        let r = value_sampled(&ctx, SignalSet::singleton(0), 0.05, 0.05, 2, SamplingOptions::default()).unwrap();
        assert!((r.estimate - 1.0).abs() <= 0.05);
    }

    #[test]
    fn empty_subset_is_exact() {
        let ctx = ValueContext::new(xor2(0.6), G::Log).unwrap();
        let r = value_sampled(&ctx, SignalSet::EMPTY, 0.05, 0.05, 1, SamplingOptions::default()).unwrap();
        assert_eq!(r.samples, 0);
        assert_eq!(r.estimate, ctx.value_subset(SignalSet::EMPTY).unwrap());
    }

    #[test]
    fn bad_parameters_refused() {
        let ctx = ValueContext::new(xor2(0.6), G::Log).unwrap();
        assert!(value_sampled(&ctx, SignalSet::EMPTY, 0.0, 0.05, 1, SamplingOptions::default()).is_err());
        let opts = SamplingOptions { range: Some(f64::INFINITY), clamp: None };
        assert!(value_sampled(&ctx, SignalSet::singleton(0), 0.1, 0.05, 1, opts).is_err());
    }

    #[test]
    fn decision_oracle_examples() {
        let dup = dup2();
        let ctx = ValueContext::new(dup.clone(), G::Log).unwrap();
        let guess = DecisionProblem::guess(2);
        let r = ctx.value_sampled_decision(&guess, SignalSet::singleton(0), 0.05, 0.05, 4).unwrap();
        assert!((r.estimate - 1.0).abs() <= 0.05);
        let r = ctx.value_sampled_decision(&guess, SignalSet::EMPTY, 0.05, 0.05, 5).unwrap();
        assert!((r.estimate - 0.5).abs() <= 0.05);
        let pctx = ValueContext::new(pair(), G::Log).unwrap();
        let pp = pair_problem(0.1, PairWeighting::First);
        let r = pctx.value_sampled_decision(&pp, SignalSet::full(2), 0.05, 0.05, 6).unwrap();
        assert!((r.estimate - 2.1).abs() <= 0.05, "{}", r.estimate);
    }
}
