use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal_set::SignalSet;

use super::{Constraint, SetFunction, Selection};

#[derive(Clone, Copy, Debug, PartialEq)]
struct Candidate {
    gain: f64,
    idx: usize,
    round: usize,
}

impl Eq for Candidate {}

impl Ord for Candidate {
    fn cmp(&self, o: &Self) -> Ordering {
        self.gain.total_cmp(&o.gain).then_with(|| o.idx.cmp(&self.idx))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

fn check_k(n: usize, k: usize) -> Result<()> {
    if k > n {
        Err(Error::InvalidConstraint(format!("k = {k} exceeds {n} signals")))
    } else {
        Ok(())
    }
}

/// `k` rounds of best marginal gain, ties to the lowest index.
pub fn greedy_select_naive(f: &dyn SetFunction, k: usize) -> Result<Selection> {
    check_k(f.n(), k)?;
    let mut s = SignalSet::EMPTY;
    let mut cur = f.eval(s);
    for _ in 0..k {
        let mut best: Option<(usize, f64, f64)> = None;
        for i in (0..f.n()).filter(|&i| !s.contains(i)) {
            let v = f.eval(s.insert(i));
            let gain = v - cur;
            if best.is_none_or(|(_, g, _)| gain > g) {
                best = Some((i, gain, v));
            }
        }
        let (i, _, v) = best.expect("k <= n leaves a candidate");
        s = s.insert(i);
        cur = v;
    }
    Ok(Selection { subset: s, value: cur })
}

/// Lazy greedy: stale marginal gains are kept in a max-heap and only
/// refreshed when they reach the top. Requires diminishing returns; on
/// such functions it returns exactly what [`greedy_select_naive`] does.
pub fn greedy_select(f: &dyn SetFunction, k: usize) -> Result<Selection> {
    check_k(f.n(), k)?;
    let mut s = SignalSet::EMPTY;
    let mut cur = f.eval(s);
    let mut heap: BinaryHeap<Candidate> =
        (0..f.n()).map(|idx| Candidate { gain: f.eval(s.insert(idx)) - cur, idx, round: 0 }).collect();
    for round in 0..k {
        loop {
            let top = heap.pop().expect("k <= n leaves a candidate");
            if top.round == round {
                s = s.insert(top.idx);
                cur = f.eval(s);
                break;
            }
            let gain = f.eval(s.insert(top.idx)) - cur;
            heap.push(Candidate { gain, idx: top.idx, round });
        }
    }
    Ok(Selection { subset: s, value: cur })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KnapsackMode {
    /// Better of cost-benefit greedy and the best singleton.
    #[default]
    Greedy,
    /// Cost-benefit greedy completed from every feasible seed of size <= 3.
    PartialEnumeration,
}

fn ratio_greedy(f: &dyn SetFunction, costs: &[f64], budget: f64, seed: SignalSet) -> Selection {
    let mut s = seed;
    let mut spent: f64 = s.iter().map(|i| costs[i]).sum();
    let mut cur = f.eval(s);
    loop {
        let mut best: Option<(usize, f64, f64)> = None;
        for i in (0..f.n()).filter(|&i| !s.contains(i) && spent + costs[i] <= budget + 1e-12) {
            let v = f.eval(s.insert(i));
            let gain = v - cur;
            if gain <= 0.0 {
                continue;
            }
            let ratio = if costs[i] == 0.0 { f64::INFINITY } else { gain / costs[i] };
            if best.is_none_or(|(_, r, _)| ratio > r) {
                best = Some((i, ratio, v));
            }
        }
        match best {
            Some((i, _, v)) => {
                s = s.insert(i);
                spent += costs[i];
                cur = v;
            }
            None => return Selection { subset: s, value: cur },
        }
    }
}

/// Budgeted selection. The default mode guarantees half of the
/// `1 - 1/e` factor on submodular inputs; partial enumeration restores
/// the full factor at `O(n^3)` extra greedy runs.
pub fn knapsack_select(f: &dyn SetFunction, costs: &[f64], budget: f64, mode: KnapsackMode) -> Result<Selection> {
    let c = Constraint::Knapsack { costs: costs.to_vec(), budget };
    c.validate(f.n())?;
    let better = |a: Selection, b: Selection| if b.value > a.value { b } else { a };
    match mode {
        KnapsackMode::Greedy => {
            let g = ratio_greedy(f, costs, budget, SignalSet::EMPTY);
            let single = (0..f.n())
                .filter(|&i| costs[i] <= budget + 1e-12)
                .map(|i| Selection { subset: SignalSet::singleton(i), value: f.eval(SignalSet::singleton(i)) })
                .fold(None, |acc: Option<Selection>, s| Some(match acc { None => s, Some(a) => better(a, s) }));
            Ok(match single {
                Some(s) => better(g, s),
                None => g,
            })
        }
        KnapsackMode::PartialEnumeration => {
            let mut best = ratio_greedy(f, costs, budget, SignalSet::EMPTY);
            for seed in SignalSet::all(f.n()).filter(|s| (1..=3).contains(&s.len()) && c.feasible(*s)) {
                best = better(best, ratio_greedy(f, costs, budget, seed));
            }
            Ok(best)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decision::ExpectedScoreFunction as G;
    use crate::info::ci3;
    use crate::select::{brute_force_select, TableFunction, ValueOracle};
    use crate::value::ValueContext;

    #[test]
    fn ci3_greedy_picks_best_first() {
        let ctx = ValueContext::new(ci3(), G::Log).unwrap();
        let o = ValueOracle::new(&ctx);
        let one = greedy_select(&o, 1).unwrap();
        assert_eq!(one.subset, SignalSet::singleton(0));
        let two = greedy_select(&o, 2).unwrap();
        assert!(two.subset.contains(0));
        assert_eq!(two, greedy_select_naive(&o, 2).unwrap());
    }

    #[test]
    fn modular_top_weights() {
        let w = [1.0, 5.0, 3.0, 4.0];
        let f = TableFunction::from_fn(4, |s| s.iter().map(|i| w[i]).sum());
        assert_eq!(greedy_select(&f, 2).unwrap().subset, SignalSet::from_indices([1, 3]));
    }

    #[test]
    fn knapsack_cases() {
        let ctx = ValueContext::new(ci3(), G::Log).unwrap();
        let o = ValueOracle::new(&ctx);
        assert_eq!(knapsack_select(&o, &[1.0; 3], 0.0, KnapsackMode::Greedy).unwrap().subset, SignalSet::EMPTY);
        let unit = knapsack_select(&o, &[1.0; 3], 2.0, KnapsackMode::Greedy).unwrap();
        assert!(unit.value >= greedy_select(&o, 2).unwrap().value);
        let costs = [1.0, 1.0, 3.0];
        let opt = brute_force_select(&o, &Constraint::Knapsack { costs: costs.to_vec(), budget: 3.0 }).unwrap();
        let v0 = ctx.value_subset(SignalSet::EMPTY).unwrap();
        for mode in [KnapsackMode::Greedy, KnapsackMode::PartialEnumeration] {
            let got = knapsack_select(&o, &costs, 3.0, mode).unwrap();
            assert!((got.value - v0) >= 0.316 * (opt.value - v0));
        }
    }
}
