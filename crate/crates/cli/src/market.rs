use std::fs;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::ValueEnum;
use serde_json::json;

use infosubs_core::market::{
    delay_refutation, expected_payoffs, is_all_delay, is_all_rush, run_market, rush_refutation, verify_equilibrium,
    DeviationClass, MarketGame, MarketRefutation, Realization, RefutationStatus, StrategyProfile,
};
use infosubs_core::SignalSet;

use crate::input::{parse_list, parse_subset, List, Source};
use crate::output::{fmt_num, fmt_vec, Report};

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum Refute {
    Rush,
    Delay,
}

#[derive(clap::Args, Debug)]
pub struct Args {
    #[command(flatten)]
    source: Source,

    /// Game file (JSON) instead of --fixture/--rule/--traders/--order.
    #[arg(long, conflicts_with_all = ["fixture", "structure"])]
    game: Option<PathBuf>,

    /// Signals held by each trader, `;`-separated, e.g. `1;2`. Default: trader i holds signal i.
    #[arg(long)]
    traders: Option<String>,

    /// Trading order as 1-based trader ids, e.g. `1,2,1`.
    #[arg(long, value_parser = parse_list::<usize>)]
    order: Option<List<usize>>,

    /// `all-rush`, `all-delay`, `truthful`, `silent`, or a profile file (JSON).
    #[arg(long, default_value = "truthful")]
    profile: String,

    /// Check the profile against single-trader deviations.
    #[arg(long)]
    verify: bool,

    /// Search for a signal configuration that breaks all-rush or all-delay.
    #[arg(long, value_enum)]
    refute: Option<Refute>,

    /// Replay one realization: signal outcome indices, comma-separated.
    #[arg(long, value_parser = parse_list::<usize>, requires = "event")]
    realization: Option<List<usize>>,

    /// Event outcome index for --realization.
    #[arg(long)]
    event: Option<usize>,

    /// Garbling outputs drawn at each slot for --realization.
    #[arg(long, value_parser = parse_list::<usize>, default_value = "")]
    draws: List<usize>,

    /// Random garbled deviations per slot.
    #[arg(long, default_value_t = 20)]
    garbled_seeds: usize,

    /// Skip coarsened deviations.
    #[arg(long)]
    no_coarsenings: bool,

    #[arg(long, default_value_t = 0)]
    seed: u64,

    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
}

fn build_game(args: &Args) -> Result<MarketGame> {
    if let Some(path) = &args.game {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        return MarketGame::from_json(&text).with_context(|| format!("in {}", path.display()));
    }
    let ctx = args.source.ctx()?;
    let n = ctx.n_signals();
    let traders: Vec<SignalSet> = match &args.traders {
        Some(t) => t.split(';').map(parse_subset).collect::<Result<_, _>>().map_err(anyhow::Error::msg)?,
        None => (0..n).map(SignalSet::singleton).collect(),
    };
    let order = match &args.order {
        Some(o) => o.iter().map(|&i| i.checked_sub(1).context("trader ids are 1-based")).collect::<Result<_>>()?,
        None => (0..traders.len()).collect(),
    };
    Ok(MarketGame::new(ctx, traders, order)?)
}

fn build_profile(game: &MarketGame, spec: &str) -> Result<StrategyProfile> {
    Ok(match spec {
        "all-rush" => StrategyProfile::all_rush(game),
        "all-delay" => StrategyProfile::all_delay(game),
        "truthful" => StrategyProfile::all_truthful(game),
        "silent" => StrategyProfile::all_silent(game),
        path => {
            let text = fs::read_to_string(path).with_context(|| format!("reading profile {path}"))?;
            serde_json::from_str(&text).with_context(|| format!("in {path}"))?
        }
    })
}

fn refutation_report(found: &MarketRefutation) -> Report {
    let mut r = Report::new(found);
    let what = format!("{:?}", found.kind).to_lowercase();
    if found.status == RefutationStatus::Skipped {
        r.push(format!("skipped: structure is not distinguishable ({:?})", found.distinguishability));
    }
    match &found.witness {
        Some(w) => r.push(format!(
            "{what} refuted: A = {}, B = {}, A' = {}; Bob earns {} after A' vs {} after A; Alice gains {}",
            w.a,
            w.b,
            w.a_prime.describe(),
            fmt_num(w.bob_after_deviation),
            fmt_num(w.bob_after_truthful),
            fmt_num(w.alice_gain)
        )),
        None => r.push(format!("no {what} refutation found within the enumerated class")),
    }
    r
}

pub fn run(args: Args) -> Result<Report> {
    if let Some(kind) = args.refute {
        let ctx = match &args.game {
            Some(_) => build_game(&args)?.ctx().clone(),
            None => args.source.ctx()?,
        };
        let found = match kind {
            Refute::Rush => rush_refutation(&ctx, args.tol, args.garbled_seeds, args.seed)?,
            Refute::Delay => delay_refutation(&ctx, args.tol, args.garbled_seeds, args.seed)?,
        };
        return Ok(refutation_report(&found));
    }
    let game = build_game(&args)?;
    let profile = build_profile(&game, &args.profile)?;
    profile.validate(&game)?;

    if let Some(signals) = &args.realization {
        let real = Realization { signals: signals.clone(), e: args.event.unwrap_or(0), draws: args.draws.clone() };
        let run = run_market(&game, &profile, &real)?;
        let mut r = Report::new(&run);
        for (t, p) in run.prices.iter().enumerate() {
            r.push(format!("p{t} = {}", fmt_vec(p)));
        }
        r.push(format!("payoffs {}", fmt_vec(&run.payoffs)));
        return Ok(r);
    }

    if args.verify {
        let class = DeviationClass {
            coarsenings: !args.no_coarsenings,
            garbled_seeds: args.garbled_seeds,
            seed: args.seed,
            ..Default::default()
        };
        let rep = verify_equilibrium(&game, &profile, &class, args.tol)?;
        let mut r = Report::new(&rep);
        if !rep.distinguishability.holds() {
            r.push("warning: structure is not distinguishable; the market theorems do not apply");
        }
        for t in &rep.traders {
            let rules: Vec<String> = t.best_deviation.iter().map(ToString::to_string).collect();
            r.push(format!(
                "trader {}: payoff {}, best deviation {} ({}), margin {}",
                t.trader + 1,
                fmt_num(t.payoff),
                fmt_num(t.best_deviation_payoff),
                rules.join(" then "),
                fmt_num(t.margin)
            ));
        }
        if rep.single_slot_fallback {
            r.push("note: too many slot combinations; deviations changed one slot at a time");
        }
        r.push(format!("{} (class: {})", rep.verdict(), rep.class));
        let failed = !rep.verified;
        return Ok(r.fail_if(failed));
    }

    let pay = expected_payoffs(&game, &profile)?;
    let (rush, delay) = (is_all_rush(&game, &profile), is_all_delay(&game, &profile));
    if pay.iter().any(|x| x.is_nan()) {
        bail!("expected payoffs are undefined");
    }
    let mut r = Report::new(json!({ "payoffs": pay, "all_rush": rush, "all_delay": delay }));
    for (i, p) in pay.iter().enumerate() {
        r.push(format!("trader {}: expected payoff {}", i + 1, fmt_num(*p)));
    }
    r.push(format!("all-rush: {rush}, all-delay: {delay}"));
    Ok(r)
}
