//! Finite market-scoring-rule games: exact replay of a trading order under
//! a strategy profile, expected payoffs, and equilibrium checks.
//!
//! Prices are public. After each report every later trader updates a
//! public likelihood over the support, assuming the reporting rule that was
//! actually played (so a deviation is understood by the others).

mod verify;

pub use verify::{
    delay_refutation, is_all_delay, is_all_rush, rush_refutation, verify_equilibrium, DeviationClass,
    EquilibriumReport, MarketRefutation, RefutationKind, RefutationStatus, RefutationWitness, TraderCheck,
};

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::decision::RuleFile;
use crate::error::{Error, Result};
use crate::info::{Garbling, InformationStructure, Partition, StructureFile};
use crate::numeric::{ext_add, ext_mul, linf, pairwise_sum, REPORT_TOL};
use crate::signal_set::SignalSet;
use crate::value::ValueContext;

#[derive(Clone, Debug)]
pub struct MarketGame {
    ctx: ValueContext,
    traders: Vec<SignalSet>,
    order: Vec<usize>,
    partitions: Vec<Partition>,
    /// For each slot, how many times its trader moved before.
    occurrence: Vec<usize>,
}

impl MarketGame {
    /// Traders are 0-based indices into `traders`.
    pub fn new(ctx: ValueContext, traders: Vec<SignalSet>, order: Vec<usize>) -> Result<Self> {
        if traders.is_empty() || order.is_empty() {
            return Err(Error::InvalidGame("need at least one trader and one slot".into()));
        }
        for (t, &i) in order.iter().enumerate() {
            if i >= traders.len() {
                return Err(Error::InvalidGame(format!("slot {} names trader {} of {}", t + 1, i + 1, traders.len())));
            }
            if t > 0 && order[t - 1] == i {
                return Err(Error::InvalidGame(format!("trader {} moves twice in a row at slot {}", i + 1, t + 1)));
            }
        }
        for (i, _) in traders.iter().enumerate() {
            if !order.contains(&i) {
                return Err(Error::InvalidGame(format!("trader {} never trades", i + 1)));
            }
        }
        let partitions =
            traders.iter().map(|&s| ctx.structure().subset_signal(s)).collect::<Result<Vec<_>>>()?;
        let mut seen = vec![0; traders.len()];
        let occurrence = order
            .iter()
            .map(|&i| {
                seen[i] += 1;
                seen[i] - 1
            })
            .collect();
        Ok(Self { ctx, traders, order, partitions, occurrence })
    }

    pub fn from_file(file: GameFile) -> Result<Self> {
        let structure = InformationStructure::try_from(file.structure)?;
        let rule = file.rule.into_rule(structure.n_outcomes())?;
        let ctx = ValueContext::new(structure, rule)?;
        let order = file
            .order
            .iter()
            .map(|&i| i.checked_sub(1).ok_or_else(|| Error::InvalidGame("trader ids are 1-based".into())))
            .collect::<Result<_>>()?;
        Self::new(ctx, file.traders, order)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Self::from_file(serde_json::from_str(s)?)
    }

    pub fn ctx(&self) -> &ValueContext {
        &self.ctx
    }

    pub fn traders(&self) -> &[SignalSet] {
        &self.traders
    }

    pub fn n_traders(&self) -> usize {
        self.traders.len()
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn horizon(&self) -> usize {
        self.order.len()
    }

    pub fn own_partition(&self, trader: usize) -> &Partition {
        &self.partitions[trader]
    }

    /// Slots (0-based) at which `trader` moves.
    pub fn slots_of(&self, trader: usize) -> Vec<usize> {
        (0..self.order.len()).filter(|&t| self.order[t] == trader).collect()
    }

    /// Whether each signal changes some posterior given all the others.
    /// Reported as a precondition of the equilibrium theorems, not enforced.
    pub fn nontrivial_signals(&self) -> Result<Vec<bool>> {
        let st = self.ctx.structure();
        let all = st.subset_signal(st.all_signals())?;
        (0..st.n_signals())
            .map(|i| {
                let rest = st.subset_signal(st.all_signals().remove(i))?;
                for g in 0..st.support_len() {
                    let a = st.posterior(&all, all.cell_of(g))?;
                    let b = st.posterior(&rest, rest.cell_of(g))?;
                    if linf(&a.dist, &b.dist) > REPORT_TOL {
                        return Ok(true);
                    }
                }
                Ok(false)
            })
            .collect()
    }
}

/// Game file: 1-based signal indices and trader ids.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameFile {
    pub structure: StructureFile,
    pub rule: RuleFile,
    pub traders: Vec<SignalSet>,
    pub order: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportRule {
    /// Posterior given own signal and everything inferable from history.
    Truthful,
    /// Leave the price where it is.
    Silent,
    /// Posterior given the cell of a coarsening of own signal.
    Coarsened(Partition),
    /// Posterior given the output of a garbling of own signal.
    Garbled(Garbling),
}

impl fmt::Display for ReportRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReportRule::Truthful => write!(f, "truthful"),
            ReportRule::Silent => write!(f, "silent"),
            ReportRule::Coarsened(p) => write!(f, "coarsened({} cells)", p.n_cells()),
            ReportRule::Garbled(g) => write!(f, "garbled({} outputs)", g.n_outputs()),
        }
    }
}

/// `rules[trader][k]` is the rule at the trader's `k`-th slot.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrategyProfile {
    pub rules: Vec<Vec<ReportRule>>,
}

impl StrategyProfile {
    pub fn uniform(game: &MarketGame, rule: ReportRule) -> Self {
        let rules = (0..game.n_traders()).map(|i| vec![rule.clone(); game.slots_of(i).len()]).collect();
        Self { rules }
    }

    pub fn all_truthful(game: &MarketGame) -> Self {
        Self::uniform(game, ReportRule::Truthful)
    }

    pub fn all_silent(game: &MarketGame) -> Self {
        Self::uniform(game, ReportRule::Silent)
    }

    /// Truthful at every slot, which in particular reveals before the next
    /// trader's first move.
    pub fn all_rush(game: &MarketGame) -> Self {
        Self::all_truthful(game)
    }

    /// Ordering traders by final slot, each stays silent through the
    /// previous trader's final slot and is truthful afterwards.
    pub fn all_delay(game: &MarketGame) -> Self {
        let finals = verify::final_slot_order(game);
        let mut rules = vec![Vec::new(); game.n_traders()];
        let mut prev_final: Option<usize> = None;
        for (i, last) in finals {
            rules[i] = game
                .slots_of(i)
                .into_iter()
                .map(|t| if prev_final.is_some_and(|p| t <= p) { ReportRule::Silent } else { ReportRule::Truthful })
                .collect();
            prev_final = Some(last);
        }
        Self { rules }
    }

    pub fn rule(&self, game: &MarketGame, slot: usize) -> &ReportRule {
        &self.rules[game.order[slot]][game.occurrence[slot]]
    }

    pub fn validate(&self, game: &MarketGame) -> Result<()> {
        if self.rules.len() != game.n_traders() {
            return Err(Error::InvalidProfile(format!(
                "profile has {} traders, game has {}",
                self.rules.len(),
                game.n_traders()
            )));
        }
        for (i, rs) in self.rules.iter().enumerate() {
            let slots = game.slots_of(i).len();
            if rs.len() != slots {
                return Err(Error::InvalidProfile(format!(
                    "trader {} has {} rules for {} slots",
                    i + 1,
                    rs.len(),
                    slots
                )));
            }
            let own = game.own_partition(i);
            for r in rs {
                let src = match r {
                    ReportRule::Coarsened(p) => p,
                    ReportRule::Garbled(g) => g.source(),
                    _ => continue,
                };
                if !own.refines(src) {
                    return Err(Error::InvalidProfile(format!(
                        "trader {} uses a {} not computable from signals {}",
                        i + 1,
                        r,
                        game.traders[i]
                    )));
                }
            }
        }
        Ok(())
    }
}

/// A realized state of the world plus the garbling outputs drawn at each
/// slot (only read where the rule is garbled).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Realization {
    pub signals: Vec<usize>,
    pub e: usize,
    #[serde(default)]
    pub draws: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MarketRun {
    pub realization: Realization,
    /// `p^(0)` through `p^(T)`.
    pub prices: Vec<Vec<f64>>,
    pub payoffs: Vec<f64>,
}

impl MarketRun {
    /// `S(p^(T), e) - S(p^(0), e)`, which the payoffs sum to.
    pub fn total_score_change(&self, game: &MarketGame) -> f64 {
        let g = game.ctx.rule();
        let e = self.realization.e;
        score_change(g.score(self.prices.last().unwrap(), e), g.score(&self.prices[0], e))
    }
}

/// Score difference with the conventions used for payoffs: a `-inf` new
/// score loses everything, escaping a `-inf` old score gains everything.
fn score_change(new: f64, old: f64) -> f64 {
    if new == f64::NEG_INFINITY {
        f64::NEG_INFINITY
    } else if old == f64::NEG_INFINITY {
        f64::INFINITY
    } else {
        new - old
    }
}

/// Possible reports at one slot given the public likelihood `w`.
struct SlotOutcome {
    reports: Vec<Vec<f64>>,
    /// `lik[j][gamma]`: probability that `gamma` produces report `j`.
    lik: Vec<Vec<f64>>,
    /// Report index of each raw output.
    group: Vec<Option<usize>>,
}

impl MarketGame {
    /// Raw outputs of a rule as a row-stochastic map from support points.
    fn raw_channel(&self, trader: usize, rule: &ReportRule) -> Option<Vec<Vec<f64>>> {
        let n = self.ctx.structure().support_len();
        let from_partition = |p: &Partition| {
            let mut m = vec![vec![0.0; p.n_cells()]; n];
            for (g, row) in m.iter_mut().enumerate() {
                row[p.cell_of(g)] = 1.0;
            }
            m
        };
        match rule {
            ReportRule::Silent => None,
            ReportRule::Truthful => Some(from_partition(&self.partitions[trader])),
            ReportRule::Coarsened(p) => Some(from_partition(p)),
            ReportRule::Garbled(gb) => Some(
                (0..n).map(|g| (0..gb.n_outputs()).map(|o| gb.prob(gb.source().cell_of(g), o)).collect()).collect(),
            ),
        }
    }

    fn outcomes(&self, trader: usize, rule: &ReportRule, w: &[f64], price: &[f64]) -> SlotOutcome {
        let st = self.ctx.structure();
        let n = st.support_len();
        let Some(chan) = self.raw_channel(trader, rule) else {
            return SlotOutcome { reports: vec![price.to_vec()], lik: vec![vec![1.0; n]], group: vec![Some(0)] };
        };
        let n_out = chan.first().map_or(0, Vec::len);
        let mut reports: Vec<Vec<f64>> = Vec::new();
        let mut lik: Vec<Vec<f64>> = Vec::new();
        let mut group = vec![None; n_out];
        for o in 0..n_out {
            let k = st.n_outcomes();
            let cols: Vec<Vec<f64>> = (0..k)
                .map(|e| (0..n).map(|g| ext_mul(w[g] * chan[g][o], st.joint(g)[e])).collect())
                .collect();
            let mut q: Vec<f64> = cols.iter().map(|c| pairwise_sum(c)).collect();
            let total = pairwise_sum(&q);
            if total <= 0.0 {
                continue;
            }
            q.iter_mut().for_each(|x| *x /= total);
            let j = match reports.iter().position(|r| linf(r, &q) <= REPORT_TOL) {
                Some(j) => j,
                None => {
                    reports.push(q);
                    lik.push(vec![0.0; n]);
                    reports.len() - 1
                }
            };
            group[o] = Some(j);
            for g in 0..n {
                lik[j][g] += chan[g][o];
            }
        }
        SlotOutcome { reports, lik, group }
    }

    fn true_output(&self, trader: usize, rule: &ReportRule, gamma: usize, slot: usize, draws: &[usize]) -> Result<usize> {
        Ok(match rule {
            ReportRule::Silent => 0,
            ReportRule::Truthful => self.partitions[trader].cell_of(gamma),
            ReportRule::Coarsened(p) => p.cell_of(gamma),
            ReportRule::Garbled(g) => {
                let o = *draws.get(slot).ok_or_else(|| {
                    Error::InvalidProfile(format!("garbled rule at slot {} needs a draw", slot + 1))
                })?;
                if o >= g.n_outputs() || g.prob(g.source().cell_of(gamma), o) <= 0.0 {
                    return Err(Error::InvalidProfile(format!("draw {o} at slot {} is impossible", slot + 1)));
                }
                o
            }
        })
    }
}

/// Replay one realization exactly.
pub fn run_market(game: &MarketGame, profile: &StrategyProfile, realization: &Realization) -> Result<MarketRun> {
    profile.validate(game)?;
    let st = game.ctx.structure();
    let gamma = st
        .gamma_of(&realization.signals)
        .filter(|&g| st.joint(g).get(realization.e).is_some_and(|&p| p > 0.0))
        .ok_or_else(|| Error::InvalidProfile("realization is not in the support".into()))?;
    let g = game.ctx.rule();
    let mut w = vec![1.0; st.support_len()];
    let mut prices = vec![st.prior_marginal()];
    let mut payoffs = vec![0.0; game.n_traders()];
    for (t, &i) in game.order.iter().enumerate() {
        let rule = profile.rule(game, t);
        let price = prices.last().unwrap().clone();
        let out = game.outcomes(i, rule, &w, &price);
        let raw = game.true_output(i, rule, gamma, t, &realization.draws)?;
        let j = out.group[raw].expect("true output has positive mass");
        for (x, l) in w.iter_mut().zip(&out.lik[j]) {
            *x *= l;
        }
        let q = out.reports[j].clone();
        payoffs[i] = ext_add(payoffs[i], score_change(g.score(&q, realization.e), g.score(&price, realization.e)));
        prices.push(q);
    }
    Ok(MarketRun { realization: realization.clone(), prices, payoffs })
}

/// Exact expected payoff of every trader under the prior.
pub fn expected_payoffs(game: &MarketGame, profile: &StrategyProfile) -> Result<Vec<f64>> {
    profile.validate(game)?;
    let st = game.ctx.structure();
    let mut acc = vec![Vec::new(); game.n_traders()];
    descend(game, profile, 0, vec![1.0; st.support_len()], st.prior_marginal(), &mut acc);
    Ok(acc.iter().map(|xs| pairwise_sum(xs)).collect())
}

fn descend(game: &MarketGame, profile: &StrategyProfile, t: usize, w: Vec<f64>, price: Vec<f64>, acc: &mut [Vec<f64>]) {
    if t == game.horizon() {
        return;
    }
    let st = game.ctx.structure();
    let g = game.ctx.rule();
    let i = game.order[t];
    let out = game.outcomes(i, profile.rule(game, t), &w, &price);
    let old: Vec<f64> = (0..st.n_outcomes()).map(|e| g.score(&price, e)).collect();
    for (q, lik) in out.reports.into_iter().zip(out.lik) {
        let wj: Vec<f64> = w.iter().zip(&lik).map(|(a, b)| a * b).collect();
        for (e, &before) in old.iter().enumerate() {
            let mass = pairwise_sum(&(0..st.support_len()).map(|gm| wj[gm] * st.joint(gm)[e]).collect::<Vec<_>>());
            if mass > 0.0 {
                acc[i].push(ext_mul(mass, score_change(g.score(&q, e), before)));
            }
        }
        descend(game, profile, t + 1, wj, q, acc);
    }
}
