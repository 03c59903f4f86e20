use std::fs;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::ValueEnum;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use infosubs_core::select::{
    adaptive_greedy, adaptive_greedy_expected, brute_force_policy, brute_force_select, greedy_bound,
    greedy_select, greedy_select_naive, knapsack_select, reduce_from_set_function,
    supermodular_hardness_instance, Constraint, KnapsackMode, SetFunction, TableFunction, ValueOracle,
};
use infosubs_core::SignalSet;

use crate::input::{parse_list, List, Source};
use crate::output::{fmt_num, fmt_vec, Report};

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq)]
pub enum Algorithm {
    /// Lazy greedy for cardinality, ratio greedy for knapsack.
    Greedy,
    /// Plain greedy, re-evaluating every candidate each round.
    Naive,
    /// Knapsack greedy seeded from every set of up to three signals.
    PartialEnumeration,
    BruteForce,
}

#[derive(clap::Args, Debug)]
pub struct Args {
    #[command(flatten)]
    source: Source,

    /// Choose at most this many signals.
    #[arg(long, group = "limit")]
    cardinality: Option<usize>,

    /// Per-signal costs for a knapsack constraint, e.g. `1,2,1.5`.
    #[arg(long, group = "limit", requires = "budget", value_parser = parse_list::<f64>)]
    costs: Option<List<f64>>,

    #[arg(long)]
    budget: Option<f64>,

    /// Constraint file (JSON).
    #[arg(long, group = "limit")]
    constraint: Option<PathBuf>,

    #[arg(long, value_enum, default_value = "greedy")]
    algorithm: Algorithm,

    /// Compare against brute force and check the approximation guarantee.
    #[arg(long)]
    check_ratio: bool,
}

#[derive(Serialize)]
struct SelectOutput {
    constraint: Constraint,
    algorithm: String,
    subset: SignalSet,
    value: f64,
    /// `V(S) - V(empty)`.
    gain: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    ratio_check: Option<RatioCheck>,
}

#[derive(Serialize)]
struct RatioCheck {
    optimum: SignalSet,
    optimum_gain: f64,
    ratio: f64,
    guarantee: f64,
    holds: bool,
}

pub fn run(args: Args) -> Result<Report> {
    let ctx = args.source.ctx()?;
    let n = ctx.n_signals();
    let constraint = match (args.cardinality, &args.costs, &args.constraint) {
        (Some(k), _, _) => Constraint::Cardinality(k),
        (_, Some(costs), _) => Constraint::Knapsack { costs: costs.clone(), budget: args.budget.unwrap_or(0.0) },
        (_, _, Some(path)) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            Constraint::from_json(&text).with_context(|| format!("in {}", path.display()))?
        }
        _ => bail!("give --cardinality, --costs/--budget or --constraint"),
    };
    constraint.validate(n)?;
    let f = ValueOracle::new(&ctx);
    let (sel, guarantee, name) = match (&constraint, args.algorithm) {
        (_, Algorithm::BruteForce) => (brute_force_select(&f, &constraint)?, 1.0, "brute force"),
        (Constraint::Cardinality(k), Algorithm::Naive) => (greedy_select_naive(&f, *k)?, greedy_bound(*k), "naive greedy"),
        (Constraint::Cardinality(k), _) => (greedy_select(&f, *k)?, greedy_bound(*k), "lazy greedy"),
        (Constraint::Knapsack { costs, budget }, Algorithm::PartialEnumeration) => (
            knapsack_select(&f, costs, *budget, KnapsackMode::PartialEnumeration)?,
            1.0 - (-1.0f64).exp(),
            "knapsack partial enumeration",
        ),
        (Constraint::Knapsack { costs, budget }, _) => (
            knapsack_select(&f, costs, *budget, KnapsackMode::Greedy)?,
            0.5 * (1.0 - (-1.0f64).exp()),
            "knapsack greedy",
        ),
        (Constraint::Family(_), _) => (brute_force_select(&f, &constraint)?, 1.0, "brute force"),
    };
    let v0 = f.eval(SignalSet::EMPTY);
    let ratio_check = if args.check_ratio {
        let opt = brute_force_select(&f, &constraint)?;
        let optimum_gain = opt.value - v0;
        let gain = sel.value - v0;
        let ratio = if optimum_gain > 0.0 { gain / optimum_gain } else { 1.0 };
        Some(RatioCheck {
            optimum: opt.subset,
            optimum_gain,
            ratio,
            guarantee,
            holds: gain >= guarantee * optimum_gain - 1e-12,
        })
    } else {
        None
    };
    let out = SelectOutput {
        constraint,
        algorithm: name.into(),
        subset: sel.subset,
        value: sel.value,
        gain: sel.value - v0,
        ratio_check,
    };
    let mut r = Report::new(&out);
    r.push(format!("{name}: {} with V = {} (gain {})", out.subset, fmt_num(out.value), fmt_num(out.gain)));
    let mut failed = false;
    if let Some(c) = &out.ratio_check {
        r.push(format!(
            "brute force: {} with gain {}; ratio {} (guarantee {}) {}",
            c.optimum,
            fmt_num(c.optimum_gain),
            fmt_num(c.ratio),
            fmt_num(c.guarantee),
            if c.holds { "ok" } else { "VIOLATED" }
        ));
        failed = !c.holds;
    }
    Ok(r.fail_if(failed))
}

#[derive(clap::Args, Debug)]
pub struct AdaptiveArgs {
    #[command(flatten)]
    source: Source,

    /// Number of signals to observe.
    #[arg(long)]
    k: usize,

    /// Replay one realization (signal outcome labels or indices, comma-separated).
    #[arg(long, requires = "event")]
    realization: Option<String>,

    /// Event outcome (label or index) for the replayed realization.
    #[arg(long)]
    event: Option<String>,

    /// Also compute the optimal adaptive policy by backward induction.
    #[arg(long)]
    compare: bool,
}

fn lookup(labels: &[String], s: &str, what: &str) -> Result<usize> {
    let s = s.trim();
    if let Some(i) = labels.iter().position(|l| l == s) {
        return Ok(i);
    }
    match s.parse::<usize>() {
        Ok(i) if i < labels.len() => Ok(i),
        _ => bail!("{what}: unknown outcome {s:?} (have {labels:?})"),
    }
}

pub fn run_adaptive(args: AdaptiveArgs) -> Result<Report> {
    let ctx = args.source.ctx()?;
    let st = ctx.structure();
    let v0 = ctx.value_subset(SignalSet::EMPTY)?;
    if let Some(real) = &args.realization {
        let parts: Vec<&str> = real.split(',').collect();
        if parts.len() != st.n_signals() {
            bail!("realization has {} entries for {} signals", parts.len(), st.n_signals());
        }
        let a = parts
            .iter()
            .zip(st.signals())
            .map(|(p, sig)| lookup(&sig.outcomes, p, &sig.name))
            .collect::<Result<Vec<_>>>()?;
        let e = lookup(st.event_outcomes(), args.event.as_deref().unwrap_or_default(), "event")?;
        let run = adaptive_greedy(&ctx, args.k, &a, e)?;
        let mut r = Report::new(&run);
        for (j, o) in run.chosen.iter().zip(&run.observed) {
            r.push(format!("observe A{} = {}", j + 1, st.signals()[*j].outcomes[*o]));
        }
        r.push(format!("belief {}", fmt_vec(&run.belief)));
        if let Some(d) = run.decision {
            r.push(format!("decision {d}"));
        }
        r.push(format!("utility {}", fmt_num(run.utility)));
        return Ok(r);
    }
    let alg = adaptive_greedy_expected(&ctx, args.k)?;
    let opt = if args.compare { Some(brute_force_policy(&ctx, args.k)?) } else { None };
    let json = serde_json::json!({ "k": args.k, "adaptive_greedy": alg, "optimal_policy": opt, "prior_value": v0 });
    let mut r = Report::new(json);
    r.push(format!("adaptive greedy expected value {} (gain {})", fmt_num(alg), fmt_num(alg - v0)));
    if let Some(o) = opt {
        let ratio = if o - v0 > 0.0 { (alg - v0) / (o - v0) } else { 1.0 };
        r.push(format!(
            "optimal policy {} (gain {}); ratio {} (guarantee {})",
            fmt_num(o),
            fmt_num(o - v0),
            fmt_num(ratio),
            fmt_num(greedy_bound(args.k))
        ));
    }
    Ok(r)
}

#[derive(clap::Args, Debug)]
pub struct ReduceArgs {
    /// Set function: `modular:w1,w2,..`, `or:n`, `table:v0,v1,..` (2^n values by bitmask),
    /// `random:n,seed` or `hardness:n,k,seed`.
    #[arg(long)]
    setfn: String,

    /// Check V(S) = f(S) on every subset.
    #[arg(long)]
    verify: bool,
}

fn set_function(spec: &str) -> Result<TableFunction> {
    let (name, rest) = spec.split_once(':').unwrap_or((spec, ""));
    let nums = |s: &str| parse_list::<f64>(s).map_err(anyhow::Error::msg);
    let ints = |s: &str| parse_list::<u64>(s).map_err(anyhow::Error::msg);
    Ok(match name {
        "modular" => {
            let w = nums(rest)?;
            TableFunction::from_fn(w.len(), |s| s.iter().map(|i| w[i]).sum())
        }
        "or" => {
            let n = ints(rest)?.first().copied().unwrap_or(2) as usize;
            TableFunction::from_fn(n, |s| if s.is_empty() { 0.0 } else { 1.0 })
        }
        "table" => {
            let values = nums(rest)?;
            if !values.len().is_power_of_two() {
                bail!("table needs 2^n values, got {}", values.len());
            }
            TableFunction { n: values.len().trailing_zeros() as usize, values }
        }
        "random" => {
            let v = ints(rest)?;
            let (n, seed) = (v.first().copied().unwrap_or(3) as usize, v.get(1).copied().unwrap_or(0));
            if n > 16 {
                bail!("random set functions are limited to 16 elements");
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            // Nonnegative Moebius weights give a monotone function.
            let w: Vec<f64> =
                (0..1usize << n).map(|_| if rng.gen_bool(0.5) { rng.gen::<f64>() } else { 0.0 }).collect();
            TableFunction::from_fn(n, |s| s.subsets().map(|t| w[t.0 as usize]).sum())
        }
        "hardness" => {
            let v = ints(rest)?;
            let (n, k, seed) = match v[..] {
                [n, k, seed] => (n as usize, k as usize, seed),
                _ => bail!("hardness needs n,k,seed"),
            };
            if k > n || n > 16 {
                bail!("hardness needs k <= n <= 16");
            }
            let inst = supermodular_hardness_instance(n, k, seed);
            TableFunction::from_fn(n, |s| inst.eval(s))
        }
        _ => bail!("unknown set function {name:?}"),
    })
}

#[derive(Serialize)]
struct Mismatch {
    subset: SignalSet,
    value: f64,
    f: f64,
}

pub fn run_reduce(args: ReduceArgs) -> Result<Report> {
    let f = set_function(&args.setfn)?;
    let n = f.n();
    let red = reduce_from_set_function(&f, n)?;
    let rows: Vec<(SignalSet, f64, f64)> =
        SignalSet::all(n).map(|s| Ok((s, red.value(s)?, f.eval(s)))).collect::<Result<_>>()?;
    let mismatches: Vec<Mismatch> =
        rows.iter().filter(|r| r.1 != r.2).map(|&(subset, value, f)| Mismatch { subset, value, f }).collect();
    let json = serde_json::json!({
        "n": n,
        "event_outcomes": 1usize << n,
        "values": rows.iter().map(|r| serde_json::json!({ "subset": r.0, "value": r.1, "f": r.2 })).collect::<Vec<_>>(),
        "mismatches": if args.verify { Some(&mismatches) } else { None },
    });
    let mut r = Report::new(json);
    r.push(format!("reduced instance: {n} binary signals, event with {} outcomes", 1usize << n));
    for (s, v, fv) in &rows {
        r.push(format!("V({s}) = {}  f = {}", fmt_num(*v), fmt_num(*fv)));
    }
    if args.verify {
        if mismatches.is_empty() {
            r.push(format!("V(S)=f(S) for all {} subsets", rows.len()));
        } else {
            r.push(format!("{} subsets differ", mismatches.len()));
        }
    }
    Ok(r.fail_if(args.verify && !mismatches.is_empty()))
}
