use anyhow::{bail, Result};
use serde::Serialize;

use infosubs_core::value::{value_sampled, SamplingOptions};
use infosubs_core::{ExpectedScoreFunction, SignalSet};

use crate::input::{parse_subset, Source};
use crate::output::{fmt_num, Report};

#[derive(clap::Args, Debug)]
pub struct Args {
    #[command(flatten)]
    source: Source,

    /// Signal subset, 1-based (`1,2`; `""` for none). Repeatable; default all subsets.
    #[arg(long, value_parser = parse_subset)]
    subset: Vec<SignalSet>,

    /// Estimate by sampling instead of computing exactly.
    #[arg(long)]
    sample: bool,

    /// Sample through decision and utility oracles (needs a decision-problem rule).
    #[arg(long, requires = "sample")]
    decision_oracle: bool,

    #[arg(long, default_value_t = 0.05)]
    eps: f64,

    #[arg(long, default_value_t = 0.05)]
    delta: f64,

    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Known range of G over reachable posteriors (probed when absent).
    #[arg(long)]
    range: Option<f64>,

    /// Clamp posteriors to this floor before evaluating G (needed for an unbounded G).
    #[arg(long)]
    clamp: Option<f64>,
}

#[derive(Serialize)]
struct Row {
    subset: SignalSet,
    value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    range: Option<f64>,
}

#[derive(Serialize)]
struct Output {
    rule: String,
    method: &'static str,
    values: Vec<Row>,
}

pub fn run(args: Args) -> Result<Report> {
    let ctx = args.source.ctx()?;
    let n = ctx.n_signals();
    let subsets = if args.subset.is_empty() {
        if n > 12 {
            bail!("{n} signals: pass --subset explicitly");
        }
        SignalSet::all(n).collect()
    } else {
        args.subset.clone()
    };
    let mut rows = Vec::new();
    for s in subsets {
        ctx.structure().check_subset(s)?;
        let row = if !args.sample {
            Row { subset: s, value: ctx.value_subset(s)?, samples: None, range: None }
        } else if args.decision_oracle {
            let ExpectedScoreFunction::PiecewiseMax(dp) = ctx.rule() else {
                bail!("--decision-oracle needs a decision-problem rule, got {}", ctx.rule().name());
            };
            let est = ctx.value_sampled_decision(dp, s, args.eps, args.delta, args.seed)?;
            Row { subset: s, value: est.estimate, samples: Some(est.samples), range: Some(est.range) }
        } else {
            let opts = SamplingOptions { range: args.range, clamp: args.clamp };
            let est = value_sampled(&ctx, s, args.eps, args.delta, args.seed, opts)?;
            Row { subset: s, value: est.estimate, samples: Some(est.samples), range: Some(est.range) }
        };
        rows.push(row);
    }
    let method = match (args.sample, args.decision_oracle) {
        (false, _) => "exact",
        (true, false) => "sampled",
        (true, true) => "sampled-decision-oracle",
    };
    let out = Output { rule: ctx.rule().name(), method, values: rows };
    let mut r = Report::new(&out);
    for row in &out.values {
        let extra = row.samples.map(|m| format!("  ({m} samples)")).unwrap_or_default();
        r.push(format!("V({}) = {}{extra}", row.subset, fmt_num(row.value)));
    }
    Ok(r)
}
