use anyhow::Result;
use clap::ValueEnum;
use serde_json::json;

use infosubs_core::classify::{
    check_pointwise_substitutes, check_trivial, classify_moderate, classify_weak, probe_joint_convexity,
    refute_strong, separating_decision_problem, universal_complements_geometric, ClassificationReport, Mode,
    ModerateOptions, StrongOptions, Witness, DEFAULT_MODERATE_CELL_CAP, DEFAULT_SIGNAL_CAP, DEFAULT_TOL,
};
use infosubs_core::Error;

use crate::input::Source;
use crate::output::{fmt_num, fmt_vec, Report};

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum Level {
    Weak,
    Moderate,
    Strong,
    Pointwise,
    Trivial,
    UniversalComplements,
    Separating,
    JointConvexity,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum Target {
    Substitutes,
    Complements,
}

#[derive(clap::Args, Debug)]
pub struct Args {
    #[command(flatten)]
    source: Source,

    #[arg(long, value_enum, default_value = "weak")]
    level: Level,

    /// Inequality the strong-level search tries to violate.
    #[arg(long, value_enum, default_value = "substitutes")]
    target: Target,

    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,

    /// Largest signal count for subset enumeration.
    #[arg(long, default_value_t = DEFAULT_SIGNAL_CAP)]
    signal_cap: usize,

    /// Largest cell count whose coarsenings are enumerated.
    #[arg(long, default_value_t = DEFAULT_MODERATE_CELL_CAP)]
    cell_cap: usize,

    /// Only compare coarsenings that still refine the meet of A and B.
    #[arg(long)]
    meet_bound: bool,

    /// Random restarts for the strong-level search.
    #[arg(long, default_value_t = 50)]
    budget: usize,

    /// Random chords for the joint-convexity probe.
    #[arg(long, default_value_t = 10_000)]
    samples: usize,

    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn describe(w: &Witness) -> String {
    format!(
        "A' = {}, A = {}, B = {}: V(A' v B) - V(A') = {} vs V(A v B) - V(A) = {}",
        w.a_prime.describe(),
        w.a,
        w.b,
        fmt_num(w.lhs),
        fmt_num(w.rhs)
    )
}

fn classification(rep: &ClassificationReport) -> Report {
    let mut r = Report::new(rep);
    r.push(format!("level: {:?} ({} comparisons, tol {:e})", rep.level, rep.comparisons, rep.tol).to_lowercase());
    r.push(format!("verdict: {}", rep.verdict()));
    if rep.bounded {
        r.push("note: coarsening enumeration was bounded by the cell cap");
    }
    if !rep.substitutes {
        if let Some(w) = &rep.substitutes_witness {
            r.push(format!("not substitutes: {}", describe(w)));
        }
    }
    if !rep.complements {
        if let Some(w) = &rep.complements_witness {
            r.push(format!("not complements: {}", describe(w)));
        }
    }
    r
}

pub fn run(args: Args) -> Result<Report> {
    match args.level {
        Level::Weak => Ok(classification(&classify_weak(&args.source.ctx()?, args.tol, args.signal_cap)?)),
        Level::Moderate => {
            let opts = ModerateOptions {
                tol: args.tol,
                signal_cap: args.signal_cap,
                cell_cap: args.cell_cap,
                meet_lower_bound: args.meet_bound,
            };
            Ok(classification(&classify_moderate(&args.source.ctx()?, opts)?))
        }
        Level::Strong => {
            let mode = match args.target {
                Target::Substitutes => Mode::Substitutes,
                Target::Complements => Mode::Complements,
            };
            let opts = StrongOptions { budget: args.budget, seed: args.seed, tol: args.tol, ..Default::default() };
            let found = refute_strong(&args.source.ctx()?, mode, opts)?;
            let mut r = Report::new(&found);
            match &found.witness {
                Some(w) => r.push(format!("{mode:?} violated: {}", describe(w)).to_lowercase()),
                None => r.push(format!(
                    "no violation found ({} garblings evaluated; not a certificate)",
                    found.evaluated
                )),
            }
            Ok(r)
        }
        Level::Pointwise => {
            let rep = check_pointwise_substitutes(&args.source.ctx()?, args.tol)?;
            let mut r = Report::new(&rep);
            match &rep.witness {
                None => r.push(format!("pointwise substitutes ({} comparisons)", rep.comparisons)),
                Some(w) => r.push(format!(
                    "not pointwise substitutes: B = {} is worth {} after {} = {:?} but {} after {} = {:?}",
                    w.b,
                    fmt_num(w.lhs),
                    w.a_prime,
                    w.a_prime_realization,
                    fmt_num(w.rhs),
                    w.a,
                    w.a_realization
                )),
            }
            Ok(r)
        }
        Level::Trivial => {
            let t = check_trivial(&args.source.structure()?)?;
            Ok(Report::new(json!({ "triviality": t })).line(format!("{t:?}")))
        }
        Level::UniversalComplements => {
            let t = universal_complements_geometric(&args.source.structure()?)?;
            let verdict = if t.holds { "universal complements" } else { "test inconclusive" };
            Ok(Report::new(&t).line(format!(
                "{verdict}: r = {}, min joint distance = {}",
                fmt_num(t.r),
                fmt_num(t.min_joint_distance)
            )))
        }
        Level::Separating => match separating_decision_problem(&args.source.structure()?, args.tol) {
            Ok(sp) => {
                let mut r = Report::new(&sp);
                r.push(format!("separating rule: {}", sp.rule.name()));
                for p in &sp.hull_points {
                    r.push(format!("  hull point {}", fmt_vec(p)));
                }
                r.push(format!("max distance to hull: {}", fmt_num(sp.max_distance)));
                r.push(format!("increasing marginal: {}", describe(&sp.witness)));
                Ok(r)
            }
            Err(Error::Refused(why)) => {
                Ok(Report::new(json!({ "refused": why })).line(format!("refused: {why}")).fail_if(true))
            }
            Err(e) => Err(e.into()),
        },
        Level::JointConvexity => {
            let st = args.source.structure()?;
            let g = args.source.rule(st.n_outcomes())?;
            let t = probe_joint_convexity(&g, st.n_outcomes(), args.samples, args.seed);
            let mut r = Report::new(&t);
            match &t.worst {
                None => r.push(format!("no violation in {} chords", t.samples)),
                Some(c) => r.push(format!(
                    "not jointly convex: excess {} at p = {} / {}, q = {} / {}, lambda = {}",
                    fmt_num(c.excess),
                    fmt_vec(&c.p[0]),
                    fmt_vec(&c.p[1]),
                    fmt_vec(&c.q[0]),
                    fmt_vec(&c.q[1]),
                    fmt_num(c.lambda)
                )),
            }
            Ok(r)
        }
    }
}
