use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::info::{param_f64, parse_spec};

use super::{pair_problem, revelation, Custom1D, DecisionProblem, ExpectedScoreFunction, PairWeighting};

/// Names and syntax of the built-in rules.
pub const RULES: &[(&str, &str)] = &[
    ("log", "logarithmic scoring rule, base 2"),
    ("quadratic", "quadratic (Brier) scoring rule"),
    ("custom1d:kink075", "piecewise-linear G with breakpoints (0,0) (0.75,0) (1,0.25)"),
    ("custom1d:0,0;0.5,0;1,1", "piecewise-linear G from x,y breakpoints"),
    ("guess", "guess the event outcome, payoff 1 if right"),
    ("pair?eps=0.1,weight=first", "predict both bits of the pair event, weighted component worth 1+eps"),
];

/// Decision-problem file: a utility matrix, a named rule, or custom1d
/// breakpoints.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RuleFile {
    Problem { decisions: Vec<String>, utility: Vec<Vec<f64>> },
    Named { rule: String },
    Custom { custom1d: CustomFile },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CustomFile {
    pub breakpoints: Vec<(f64, f64)>,
}

impl RuleFile {
    pub fn into_rule(self, k: usize) -> Result<ExpectedScoreFunction> {
        match self {
            RuleFile::Problem { decisions, utility } => Ok(revelation(DecisionProblem::new(decisions, utility)?)),
            RuleFile::Named { rule } => parse_rule(&rule, k),
            RuleFile::Custom { custom1d } => Ok(ExpectedScoreFunction::Custom1D(Custom1D::new(custom1d.breakpoints)?)),
        }
    }
}

/// Parse a rule spec for an event with `k` outcomes.
pub fn parse_rule(spec: &str, k: usize) -> Result<ExpectedScoreFunction> {
    let spec = spec.trim();
    if let Some(rest) = spec.strip_prefix("custom1d:") {
        if rest == "kink075" {
            return Ok(ExpectedScoreFunction::Custom1D(Custom1D::kink075()));
        }
        let pts = rest
            .split(';')
            .map(|pt| {
                let (x, y) = pt
                    .split_once(',')
                    .ok_or_else(|| Error::Parse(format!("custom1d breakpoint {pt:?} is not x,y")))?;
                let num = |s: &str| s.trim().parse::<f64>().map_err(|_| Error::Parse(format!("bad number {s:?}")));
                Ok((num(x)?, num(y)?))
            })
            .collect::<Result<Vec<_>>>()?;
        return Ok(ExpectedScoreFunction::Custom1D(Custom1D::new(pts)?));
    }
    let (name, params) = parse_spec(spec)?;
    match name.as_str() {
        "log" => Ok(ExpectedScoreFunction::Log),
        "quadratic" | "brier" => Ok(ExpectedScoreFunction::Quadratic),
        "guess" => Ok(revelation(DecisionProblem::guess(k))),
        "pair" => {
            let eps = param_f64(&params, "eps", Some(0.1))?;
            let w = match params.get("weight").map(String::as_str) {
                None | Some("first") => PairWeighting::First,
                Some("second") => PairWeighting::Second,
                Some(o) => return Err(Error::Parse(format!("pair weight {o:?} is not first|second"))),
            };
            Ok(revelation(pair_problem(eps, w)))
        }
        other => Err(Error::Parse(format!("unknown rule {other:?}"))),
    }
}
