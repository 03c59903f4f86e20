use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{expected_payoffs, MarketGame, ReportRule, StrategyProfile};
use crate::classify::{refute_strong, Mode, SignalRef, StrongOptions};
use crate::error::{Error, Result};
use crate::info::{Distinguishability, Garbling};
use crate::signal_set::SignalSet;
use crate::value::ValueContext;

/// `(trader, final slot)` sorted by final slot.
pub(super) fn final_slot_order(game: &MarketGame) -> Vec<(usize, usize)> {
    let mut v: Vec<(usize, usize)> =
        (0..game.n_traders()).map(|i| (i, *game.slots_of(i).last().unwrap())).collect();
    v.sort_by_key(|&(_, t)| t);
    v
}

/// Every trader reports truthfully at some slot before the next trader
/// (by first appearance) gets to move.
pub fn is_all_rush(game: &MarketGame, profile: &StrategyProfile) -> bool {
    if profile.validate(game).is_err() {
        return false;
    }
    let mut firsts: Vec<(usize, usize)> = (0..game.n_traders()).map(|i| (i, game.slots_of(i)[0])).collect();
    firsts.sort_by_key(|&(_, t)| t);
    firsts.iter().enumerate().all(|(k, &(i, _))| {
        let deadline = firsts.get(k + 1).map_or(usize::MAX, |&(_, t)| t);
        game.slots_of(i)
            .iter()
            .zip(&profile.rules[i])
            .any(|(&t, r)| t < deadline && *r == ReportRule::Truthful)
    })
}

/// Ordering traders by final slot, each is silent through the previous
/// trader's final slot and truthful at their own final slot.
pub fn is_all_delay(game: &MarketGame, profile: &StrategyProfile) -> bool {
    if profile.validate(game).is_err() {
        return false;
    }
    let mut prev: Option<usize> = None;
    for (i, last) in final_slot_order(game) {
        let slots = game.slots_of(i);
        let rules = &profile.rules[i];
        if *rules.last().unwrap() != ReportRule::Truthful {
            return false;
        }
        if let Some(p) = prev {
            if slots.iter().zip(rules).any(|(&t, r)| t <= p && *r != ReportRule::Silent) {
                return false;
            }
        }
        prev = Some(last);
    }
    true
}

/// Alternatives a single trader may switch to.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DeviationClass {
    pub truthful: bool,
    pub silent: bool,
    /// Every strict coarsening of the trader's own signal.
    pub coarsenings: bool,
    /// Random garblings of the trader's own signal, one per seed.
    pub garbled_seeds: usize,
    pub seed: u64,
    pub cell_cap: usize,
    /// Above this many combinations, only one slot is changed at a time.
    pub max_profiles: usize,
}

impl Default for DeviationClass {
    fn default() -> Self {
        Self {
            truthful: true,
            silent: true,
            coarsenings: true,
            garbled_seeds: 20,
            seed: 0,
            cell_cap: 8,
            max_profiles: 50_000,
        }
    }
}

impl DeviationClass {
    fn describe(&self) -> String {
        let mut parts = Vec::new();
        if self.truthful {
            parts.push("truthful".to_string());
        }
        if self.silent {
            parts.push("silent".to_string());
        }
        if self.coarsenings {
            parts.push("coarsened".to_string());
        }
        if self.garbled_seeds > 0 {
            parts.push(format!("garbled({} seeds)", self.garbled_seeds));
        }
        parts.join("+")
    }

    fn slot_options(&self, game: &MarketGame, trader: usize, k: usize) -> Result<Vec<ReportRule>> {
        let own = game.own_partition(trader);
        let mut out = Vec::new();
        if self.truthful {
            out.push(ReportRule::Truthful);
        }
        if self.silent {
            out.push(ReportRule::Silent);
        }
        if self.coarsenings && own.n_cells() <= self.cell_cap {
            out.extend(own.coarsenings(self.cell_cap)?.filter(|p| p != own).map(ReportRule::Coarsened));
        }
        for s in 0..self.garbled_seeds {
            let mix = self.seed ^ ((trader as u64) << 40) ^ ((k as u64) << 20) ^ s as u64;
            let mut rng = ChaCha8Rng::seed_from_u64(mix);
            out.push(ReportRule::Garbled(Garbling::random(own.clone(), own.n_cells().max(2), &mut rng)));
        }
        Ok(out)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraderCheck {
    /// 0-based.
    pub trader: usize,
    pub payoff: f64,
    pub best_deviation_payoff: f64,
    /// Profile payoff minus best deviation payoff.
    pub margin: f64,
    /// Rules of the best deviation, one per slot of the trader.
    pub best_deviation: Vec<ReportRule>,
    pub deviations_checked: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EquilibriumReport {
    /// All margins are at least `-tol`: deviation-proof within the class.
    pub verified: bool,
    pub class: String,
    pub traders: Vec<TraderCheck>,
    /// Some trader had too many slot combinations and was checked one slot
    /// at a time.
    pub single_slot_fallback: bool,
    pub distinguishability: Distinguishability,
    pub tol: f64,
}

impl EquilibriumReport {
    pub fn verdict(&self) -> &'static str {
        if self.verified {
            "deviation-proof within class"
        } else {
            "profitable deviation found"
        }
    }

    /// Trader with the most negative margin.
    pub fn worst(&self) -> Option<&TraderCheck> {
        self.traders.iter().min_by(|a, b| a.margin.total_cmp(&b.margin))
    }
}

/// Necessary-condition check: no single trader gains more than `tol` by
/// switching to any combination of rules from the class.
pub fn verify_equilibrium(
    game: &MarketGame,
    profile: &StrategyProfile,
    class: &DeviationClass,
    tol: f64,
) -> Result<EquilibriumReport> {
    let base = expected_payoffs(game, profile)?;
    if base.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidProfile(format!("profile has non-finite expected payoffs {base:?}")));
    }
    let mut fallback = false;
    let mut traders = Vec::new();
    for i in 0..game.n_traders() {
        let slots = game.slots_of(i).len();
        let options: Vec<Vec<ReportRule>> =
            (0..slots).map(|k| class.slot_options(game, i, k)).collect::<Result<_>>()?;
        let product = options.iter().try_fold(1usize, |acc, o| acc.checked_mul(o.len()));
        let combos: Vec<Vec<ReportRule>> = match product {
            Some(p) if p <= class.max_profiles => cartesian(&options),
            _ => {
                fallback = true;
                let own = &profile.rules[i];
                options
                    .iter()
                    .enumerate()
                    .flat_map(|(k, opts)| {
                        opts.iter().map(move |r| {
                            let mut v = own.clone();
                            v[k] = r.clone();
                            v
                        })
                    })
                    .collect()
            }
        };
        let payoffs = combos
            .par_iter()
            .map(|rules| {
                let mut p = profile.clone();
                p.rules[i] = rules.clone();
                expected_payoffs(game, &p).map(|v| v[i])
            })
            .collect::<Result<Vec<f64>>>()?;
        // Highest payoff, first in enumeration order on ties.
        let (best, &best_payoff) = payoffs
            .iter()
            .enumerate()
            .fold(None, |acc: Option<(usize, &f64)>, (k, x)| match acc {
                Some((_, b)) if x.total_cmp(b).is_le() => acc,
                _ => Some((k, x)),
            })
            .expect("truthful or silent deviation always present");
        traders.push(TraderCheck {
            trader: i,
            payoff: base[i],
            best_deviation_payoff: best_payoff,
            margin: base[i] - best_payoff,
            best_deviation: combos[best].clone(),
            deviations_checked: combos.len(),
        });
    }
    Ok(EquilibriumReport {
        verified: traders.iter().all(|t| t.margin >= -tol),
        class: class.describe(),
        traders,
        single_slot_fallback: fallback,
        distinguishability: game.ctx().structure().is_distinguishable(),
        tol,
    })
}

fn cartesian(options: &[Vec<ReportRule>]) -> Vec<Vec<ReportRule>> {
    options.iter().fold(vec![Vec::new()], |acc, opts| {
        acc.iter()
            .flat_map(|prefix| {
                opts.iter().map(move |r| {
                    let mut v = prefix.clone();
                    v.push(r.clone());
                    v
                })
            })
            .collect()
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RefutationKind {
    Rush,
    Delay,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RefutationStatus {
    Found,
    NotFound,
    /// The structure is not distinguishable, so the market theorems do not
    /// apply; any witness is still reported.
    Skipped,
}

/// Alice holds `A`, Bob holds `B`, and Alice replaces `A` by `A'` at her
/// first move.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RefutationWitness {
    pub a: SignalSet,
    pub b: SignalSet,
    pub a_prime: SignalRef,
    /// Bob's expected payoff when Alice reports `A'`: `V(A' v B) - V(A')`.
    pub bob_after_deviation: f64,
    /// Bob's expected payoff when Alice reports `A`: `V(A v B) - V(A)`.
    pub bob_after_truthful: f64,
    /// What Alice gains by the deviation (payoffs sum to a constant).
    pub alice_gain: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MarketRefutation {
    pub kind: RefutationKind,
    pub status: RefutationStatus,
    pub distinguishability: Distinguishability,
    pub witness: Option<RefutationWitness>,
}

fn refutation(
    ctx: &ValueContext,
    kind: RefutationKind,
    tol: f64,
    garbled_seeds: usize,
    seed: u64,
) -> Result<MarketRefutation> {
    let distinguishability = ctx.structure().is_distinguishable();
    let mode = match kind {
        RefutationKind::Rush => Mode::Substitutes,
        RefutationKind::Delay => Mode::Complements,
    };
    let found = refute_strong(ctx, mode, StrongOptions { budget: garbled_seeds, seed, tol, ..Default::default() })?;
    let witness = found.witness.map(|w| {
        let sign = if kind == RefutationKind::Rush { 1.0 } else { -1.0 };
        RefutationWitness {
            a: w.a,
            b: w.b,
            a_prime: w.a_prime.clone(),
            bob_after_deviation: w.lhs,
            bob_after_truthful: w.rhs,
            alice_gain: sign * (w.rhs - w.lhs),
        }
    });
    let status = match (&witness, distinguishability.holds()) {
        (_, false) => RefutationStatus::Skipped,
        (Some(_), true) => RefutationStatus::Found,
        (None, true) => RefutationStatus::NotFound,
    };
    Ok(MarketRefutation { kind, status, distinguishability, witness })
}

/// Signals `A, B` and `A' ⪯ A` where revealing `A'` instead of `A` first
/// leaves Bob less to gain, so Alice prefers not to rush.
pub fn rush_refutation(ctx: &ValueContext, tol: f64, garbled_seeds: usize, seed: u64) -> Result<MarketRefutation> {
    refutation(ctx, RefutationKind::Rush, tol, garbled_seeds, seed)
}

/// Mirror image: revealing the coarser `A'` early gives Bob more to gain
/// than the full `A`, so delaying is not optimal.
pub fn delay_refutation(ctx: &ValueContext, tol: f64, garbled_seeds: usize, seed: u64) -> Result<MarketRefutation> {
    refutation(ctx, RefutationKind::Delay, tol, garbled_seeds, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decision::ExpectedScoreFunction as G;
    use crate::info::{ci, xor2, InformationStructure};
    use crate::numeric::h2;

    fn game(st: InformationStructure) -> MarketGame {
        let ctx = ValueContext::new(st, G::Log).unwrap();
        MarketGame::new(ctx, vec![SignalSet::singleton(0), SignalSet::singleton(1)], vec![0, 1, 0]).unwrap()
    }

    #[test]
    fn syntactic_checks() {
        let g = game(xor2(0.6));
        assert!(is_all_rush(&g, &StrategyProfile::all_rush(&g)));
        let delay = StrategyProfile::all_delay(&g);
        assert_eq!(delay.rules[0], vec![ReportRule::Silent, ReportRule::Truthful]);
        assert!(is_all_delay(&g, &delay));
        assert!(!is_all_rush(&g, &delay));
        let silent = StrategyProfile::all_silent(&g);
        assert!(!is_all_rush(&g, &silent) && !is_all_delay(&g, &silent));
    }

    #[test]
    fn xor_prefers_delay() {
        let g = game(xor2(0.6));
        let class = DeviationClass { garbled_seeds: 5, ..Default::default() };
        let rush = verify_equilibrium(&g, &StrategyProfile::all_rush(&g), &class, 1e-9).unwrap();
        assert!(!rush.verified);
        let t = &rush.traders[0];
        assert!((-t.margin - (2.0 * h2(0.6) - h2(0.48))).abs() < 1e-9);
        let delay = verify_equilibrium(&g, &StrategyProfile::all_delay(&g), &class, 1e-9).unwrap();
        assert!(delay.verified);
    }

    #[test]
    fn ci_prefers_rush() {
        let g = game(ci(0.5, &[0.8, 0.8]));
        let class = DeviationClass { garbled_seeds: 5, ..Default::default() };
        assert!(verify_equilibrium(&g, &StrategyProfile::all_rush(&g), &class, 1e-9).unwrap().verified);
        assert!(!verify_equilibrium(&g, &StrategyProfile::all_delay(&g), &class, 1e-9).unwrap().verified);
    }

    #[test]
    fn refutations() {
        let c = ValueContext::new(xor2(0.6), G::Log).unwrap();
        let r = rush_refutation(&c, 1e-9, 20, 0).unwrap();
        assert_eq!(r.status, RefutationStatus::Found);
        let w = r.witness.unwrap();
        assert!(matches!(&w.a_prime, SignalRef::Coarsening { partition, .. } if partition.n_cells() == 1));
        assert!((w.alice_gain - (2.0 * h2(0.6) - h2(0.48))).abs() < 1e-9);
        assert_eq!(delay_refutation(&c, 1e-9, 20, 0).unwrap().status, RefutationStatus::NotFound);
        let c = ValueContext::new(ci(0.5, &[0.8, 0.8]), G::Log).unwrap();
        assert_eq!(rush_refutation(&c, 1e-9, 20, 0).unwrap().status, RefutationStatus::NotFound);
        let d = delay_refutation(&c, 1e-9, 20, 0).unwrap();
        assert_eq!(d.status, RefutationStatus::Found);
        assert!(d.witness.unwrap().alice_gain > 0.0);
        let c = ValueContext::new(xor2(0.5), G::Log).unwrap();
        assert_eq!(delay_refutation(&c, 1e-9, 20, 0).unwrap().status, RefutationStatus::Skipped);
    }
}
