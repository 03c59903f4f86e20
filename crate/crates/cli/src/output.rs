use std::fmt::Write as _;
use std::process::ExitCode;

use serde::Serialize;
use serde_json::Value;

/// A finished command: human text, the same content as JSON, and whether
/// the verdict counts as a failure for the exit code.
pub struct Report {
    text: String,
    json: Value,
    failed: bool,
}

impl Report {
    pub fn new(json: impl Serialize) -> Self {
        Self { text: String::new(), json: serde_json::to_value(json).expect("report serializes"), failed: false }
    }

    pub fn line(mut self, s: impl AsRef<str>) -> Self {
        self.push(s);
        self
    }

    pub fn push(&mut self, s: impl AsRef<str>) {
        let _ = writeln!(self.text, "{}", s.as_ref());
    }

    pub fn fail_if(mut self, failed: bool) -> Self {
        self.failed |= failed;
        self
    }

    pub fn emit(self, json: bool) -> ExitCode {
        if json {
            println!("{}", serde_json::to_string_pretty(&self.json).expect("json value prints"));
        } else {
            print!("{}", self.text);
        }
        if self.failed {
            ExitCode::from(1)
        } else {
            ExitCode::SUCCESS
        }
    }
}

pub fn fmt_num(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let s = format!("{x:.10}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    match s {
        "-0" => "0".into(),
        _ => s.into(),
    }
}

pub fn fmt_vec(v: &[f64]) -> String {
    let items: Vec<String> = v.iter().map(|&x| fmt_num(x)).collect();
    format!("({})", items.join(", "))
}
