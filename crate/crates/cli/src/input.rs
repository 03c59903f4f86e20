use std::fs;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use serde::Serialize;

use infosubs_core::decision::{parse_rule, RuleFile, RULES};
use infosubs_core::info::{fixture, FIXTURES};
use infosubs_core::{ExpectedScoreFunction, InformationStructure, SignalSet, ValueContext};

use crate::output::Report;

/// Where the structure and the decision problem come from.
#[derive(clap::Args, Debug, Clone)]
pub struct Source {
    /// Built-in fixture, e.g. `xor2?q=0.6` (see `fixtures`).
    #[arg(long, conflicts_with = "structure")]
    pub fixture: Option<String>,

    /// Structure file (JSON).
    #[arg(long)]
    pub structure: Option<PathBuf>,

    /// Scoring rule or decision problem, e.g. `log`, `quadratic`, `custom1d:kink075`.
    #[arg(long, default_value = "log", conflicts_with = "rule_file")]
    pub rule: String,

    /// Decision-problem file (JSON).
    #[arg(long)]
    pub rule_file: Option<PathBuf>,
}

impl Source {
    pub fn structure(&self) -> Result<InformationStructure> {
        match (&self.fixture, &self.structure) {
            (Some(spec), _) => fixture(spec).with_context(|| format!("fixture {spec:?}")),
            (None, Some(path)) => {
                let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                InformationStructure::from_json(&text).with_context(|| format!("in {}", path.display()))
            }
            (None, None) => bail!("give --fixture or --structure"),
        }
    }

    pub fn rule(&self, k: usize) -> Result<ExpectedScoreFunction> {
        match &self.rule_file {
            Some(path) => {
                let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                let file: RuleFile =
                    serde_json::from_str(&text).with_context(|| format!("in {}", path.display()))?;
                Ok(file.into_rule(k)?)
            }
            None => parse_rule(&self.rule, k).with_context(|| format!("rule {:?}", self.rule)),
        }
    }

    pub fn ctx(&self) -> Result<ValueContext> {
        let st = self.structure()?;
        let g = self.rule(st.n_outcomes())?;
        Ok(ValueContext::new(st, g)?)
    }
}

/// Parse a 1-based list such as `1,3`; the empty string is the empty set.
pub fn parse_subset(s: &str) -> Result<SignalSet, String> {
    SignalSet::parse_one_based(s)
}

/// A comma-separated list taken as one argument value.
pub type List<T> = Vec<T>;

pub fn parse_list<T: std::str::FromStr>(s: &str) -> Result<Vec<T>, String> {
    s.split(',')
        .filter(|x| !x.trim().is_empty())
        .map(|x| x.trim().parse().map_err(|_| format!("bad list item {x:?}")))
        .collect()
}

#[derive(clap::Args, Debug)]
pub struct FixturesArgs {
    /// Print this fixture as a structure file instead of listing.
    #[arg(long)]
    show: Option<String>,
}

#[derive(Serialize)]
struct Listing {
    fixtures: Vec<Entry>,
    rules: Vec<Entry>,
}

#[derive(Serialize)]
struct Entry {
    spec: &'static str,
    description: &'static str,
}

pub fn run_fixtures(args: FixturesArgs) -> Result<Report> {
    if let Some(spec) = args.show {
        let st = fixture(&spec).with_context(|| format!("fixture {spec:?}"))?;
        return Ok(Report::new(st.to_file()).line(st.to_json()));
    }
    let entries = |xs: &'static [(&'static str, &'static str)]| {
        xs.iter().map(|&(spec, description)| Entry { spec, description }).collect::<Vec<_>>()
    };
    let listing = Listing { fixtures: entries(FIXTURES), rules: entries(RULES) };
    let mut r = Report::new(&listing);
    r.push("fixtures:");
    for e in &listing.fixtures {
        r.push(format!("  {:<42} {}", e.spec, e.description));
    }
    r.push("rules:");
    for e in &listing.rules {
        r.push(format!("  {:<42} {}", e.spec, e.description));
    }
    Ok(r)
}
