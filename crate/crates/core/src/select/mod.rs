//! Signal selection: choose a feasible set of signals with maximal value.

mod adaptive;
mod greedy;
mod hardness;
mod reduction;

use std::cell::RefCell;
use std::collections::HashMap;

use serde::{Deserialize, Serialize};

pub use adaptive::{adaptive_greedy, adaptive_greedy_expected, brute_force_policy, AdaptiveRun, MAX_POLICY_SIGNALS};
pub use greedy::{greedy_select, greedy_select_naive, knapsack_select, KnapsackMode};
pub use hardness::{supermodular_hardness_instance, HardnessInstance};
pub use reduction::{reduce_from_set_function, HypercubeScore, ReducedInstance, MAX_REDUCTION_SIGNALS};

use crate::error::{Error, Result};
use crate::signal_set::SignalSet;
use crate::value::ValueContext;

/// Largest ground set for brute-force selection.
pub const MAX_BRUTE_FORCE_SIGNALS: usize = 20;

/// A value oracle over subsets of `{0..n}`.
pub trait SetFunction {
    fn n(&self) -> usize;
    fn eval(&self, s: SignalSet) -> f64;
}

/// A set function given by its full table, indexed by bitmask.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableFunction {
    pub n: usize,
    pub values: Vec<f64>,
}

impl TableFunction {
    pub fn from_fn(n: usize, f: impl Fn(SignalSet) -> f64) -> Self {
        Self { n, values: SignalSet::all(n).map(f).collect() }
    }
}

impl SetFunction for TableFunction {
    fn n(&self) -> usize {
        self.n
    }

    fn eval(&self, s: SignalSet) -> f64 {
        self.values[s.0 as usize]
    }
}

/// Memoized `S -> V(S)` for a value context.
pub struct ValueOracle<'a> {
    ctx: &'a ValueContext,
    cache: RefCell<HashMap<SignalSet, f64>>,
}

impl<'a> ValueOracle<'a> {
    pub fn new(ctx: &'a ValueContext) -> Self {
        Self { ctx, cache: RefCell::new(HashMap::new()) }
    }
}

impl SetFunction for ValueOracle<'_> {
    fn n(&self) -> usize {
        self.ctx.n_signals()
    }

    fn eval(&self, s: SignalSet) -> f64 {
        if let Some(&v) = self.cache.borrow().get(&s) {
            return v;
        }
        let v = self.ctx.value_subset(s).expect("subset within the structure");
        self.cache.borrow_mut().insert(s, v);
        v
    }
}

/// Feasible sets for selection.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Constraint {
    Cardinality(usize),
    Knapsack { costs: Vec<f64>, budget: f64 },
    Family(Vec<SignalSet>),
}

impl Constraint {
    pub fn validate(&self, n: usize) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConstraint(m));
        match self {
            Constraint::Cardinality(k) if *k > n => bad(format!("cardinality {k} exceeds {n} signals")),
            Constraint::Knapsack { costs, .. } if costs.len() != n => {
                bad(format!("{} costs for {n} signals", costs.len()))
            }
            Constraint::Knapsack { costs, budget } => {
                if costs.iter().any(|c| !(c.is_finite() && *c >= 0.0)) {
                    bad("costs must be finite and nonnegative".into())
                } else if !(budget.is_finite() && *budget >= 0.0) {
                    bad(format!("budget {budget} must be finite and nonnegative"))
                } else {
                    Ok(())
                }
            }
            Constraint::Family(f) if f.is_empty() => bad("family is empty".into()),
            Constraint::Family(f) => match f.iter().find(|s| s.max_index().is_some_and(|i| i >= n)) {
                Some(s) => bad(format!("family member {s} mentions a signal beyond {n}")),
                None => Ok(()),
            },
            _ => Ok(()),
        }
    }

    pub fn feasible(&self, s: SignalSet) -> bool {
        match self {
            Constraint::Cardinality(k) => s.len() <= *k,
            Constraint::Knapsack { costs, budget } => s.iter().map(|i| costs[i]).sum::<f64>() <= *budget + 1e-12,
            Constraint::Family(f) => f.contains(&s),
        }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Selection {
    pub subset: SignalSet,
    pub value: f64,
}

/// Exact best feasible subset. Ties go to the larger subset, then to the
/// lexicographically smallest (compared as sorted index lists).
pub fn brute_force_select(f: &dyn SetFunction, c: &Constraint) -> Result<Selection> {
    let n = f.n();
    c.validate(n)?;
    if n > MAX_BRUTE_FORCE_SIGNALS {
        return Err(Error::CapExceeded {
            what: "brute-force selection",
            size: n,
            cap: MAX_BRUTE_FORCE_SIGNALS,
            cost: format!("2^{n} subsets"),
        });
    }
    let mut best: Option<(Vec<usize>, Selection)> = None;
    for s in SignalSet::all(n).filter(|&s| c.feasible(s)) {
        let v = f.eval(s);
        let key: Vec<usize> = s.iter().collect();
        let better = match &best {
            None => true,
            Some((k, b)) => v > b.value || (v == b.value && (key.len(), std::cmp::Reverse(&key)) > (k.len(), std::cmp::Reverse(k))),
        };
        if better {
            best = Some((key, Selection { subset: s, value: v }));
        }
    }
    best.map(|(_, s)| s).ok_or_else(|| Error::InvalidConstraint("no feasible subset".into()))
}

/// `1 - (1 - 1/k)^k`, the greedy guarantee for `k` picks.
pub fn greedy_bound(k: usize) -> f64 {
    if k == 0 {
        1.0
    } else {
        1.0 - (1.0 - 1.0 / k as f64).powi(k as i32)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decision::ExpectedScoreFunction as G;
    use crate::info::{ci, dup2, xor2};

    #[test]
    fn brute_force_examples() {
        let d = ValueContext::new(dup2(), G::Log).unwrap();
        let r = brute_force_select(&ValueOracle::new(&d), &Constraint::Cardinality(1)).unwrap();
        assert_eq!((r.subset, r.value), (SignalSet::singleton(0), 0.0));
        let x = ValueContext::new(xor2(0.5), G::Log).unwrap();
        let r = brute_force_select(&ValueOracle::new(&x), &Constraint::Cardinality(1)).unwrap();
        assert_eq!((r.subset, r.value), (SignalSet::singleton(0), -1.0));
        let c = ValueContext::new(ci(0.5, &[0.8, 0.8]), G::Log).unwrap();
        let fam = Constraint::Family(vec![SignalSet::singleton(1), SignalSet::singleton(0)]);
        assert_eq!(brute_force_select(&ValueOracle::new(&c), &fam).unwrap().subset, SignalSet::singleton(0));
    }

    #[test]
    fn constraint_validation() {
        assert!(Constraint::Cardinality(3).validate(2).is_err());
        assert!(Constraint::Knapsack { costs: vec![1.0], budget: 1.0 }.validate(2).is_err());
        assert!(Constraint::Knapsack { costs: vec![-1.0, 1.0], budget: 1.0 }.validate(2).is_err());
        assert!(Constraint::Family(vec![]).validate(2).is_err());
        assert!(Constraint::Family(vec![SignalSet::singleton(4)]).validate(2).is_err());
    }

    #[test]
    fn constraint_files() {
        assert_eq!(Constraint::from_json(r#"{"cardinality":2}"#).unwrap(), Constraint::Cardinality(2));
        let k = Constraint::from_json(r#"{"knapsack":{"costs":[1,1,3],"budget":3}}"#).unwrap();
        assert!(k.feasible(SignalSet::from_indices([0, 1])));
        assert!(!k.feasible(SignalSet::from_indices([0, 2])));
        let f = Constraint::from_json(r#"{"family":[[1],[2]]}"#).unwrap();
        assert!(f.feasible(SignalSet::singleton(1)));
    }

    #[test]
    fn bound_values() {
        assert_eq!(greedy_bound(1), 1.0);
        assert_eq!(greedy_bound(2), 0.75);
    }
}
