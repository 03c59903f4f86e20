use std::collections::HashMap;

use serde::Serialize;

use crate::error::Result;
use crate::signal_set::SignalSet;
use crate::value::ValueContext;

/// Realizations `a` of `A` and `a' = a|A'` where `B` is worth more after
/// `a` than after `a'`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PointwiseWitness {
    pub a_prime: SignalSet,
    pub a: SignalSet,
    pub b: SignalSet,
    pub a_prime_realization: Vec<usize>,
    pub a_realization: Vec<usize>,
    /// Marginal value of `B` under the prior conditioned on `a'`.
    pub lhs: f64,
    /// Marginal value of `B` under the prior conditioned on `a`.
    pub rhs: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PointwiseReport {
    pub holds: bool,
    pub witness: Option<PointwiseWitness>,
    pub comparisons: usize,
}

/// Pointwise substitutes: for every `A' ⊊ A`, realization `a` of `A` and
/// nonempty `B` disjoint from `A`, conditioning on `a'` leaves `B` at least
/// as valuable as conditioning on `a` does.
pub fn check_pointwise_substitutes(ctx: &ValueContext, tol: f64) -> Result<PointwiseReport> {
    super::check_signal_cap(ctx, super::DEFAULT_SIGNAL_CAP)?;
    let st = ctx.structure();
    let n = ctx.n_signals();
    let full = SignalSet::full(n);
    let mut cache: HashMap<(SignalSet, Vec<usize>, SignalSet), f64> = HashMap::new();
    let mut marginal = |s: SignalSet, a_s: Vec<usize>, b: SignalSet| -> Result<f64> {
        if let Some(v) = cache.get(&(s, a_s.clone(), b)) {
            return Ok(*v);
        }
        let q = st.condition(s, &a_s).expect("realization taken from the support");
        let cq = ctx.with_structure(q);
        let v = cq.value_subset(b)? - cq.value_subset(SignalSet::EMPTY)?;
        cache.insert((s, a_s, b), v);
        Ok(v)
    };
    let mut worst: Option<PointwiseWitness> = None;
    let mut comparisons = 0;
    for a in SignalSet::all(n).filter(|a| !a.is_empty() && *a != full) {
        let mut reals: Vec<Vec<usize>> = (0..st.support_len()).map(|g| st.project(g, a)).collect();
        reals.sort();
        reals.dedup();
        for real in reals {
            for b in full.difference(a).subsets().filter(|b| !b.is_empty()) {
                let rhs = marginal(a, real.clone(), b)?;
                for ap in a.subsets().filter(|&s| s != a) {
                    let a_prime_real: Vec<usize> =
                        a.iter().zip(&real).filter(|(i, _)| ap.contains(*i)).map(|(_, &x)| x).collect();
                    let lhs = marginal(ap, a_prime_real.clone(), b)?;
                    comparisons += 1;
                    if lhs < rhs - tol && worst.as_ref().is_none_or(|w| lhs - rhs < w.lhs - w.rhs) {
                        worst = Some(PointwiseWitness {
                            a_prime: ap,
                            a,
                            b,
                            a_prime_realization: a_prime_real,
                            a_realization: real.clone(),
                            lhs,
                            rhs,
                        });
                    }
                }
            }
        }
    }
    Ok(PointwiseReport { holds: worst.is_none(), witness: worst, comparisons })
}
