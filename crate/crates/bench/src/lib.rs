//! Shared inputs for the benchmarks.

use infosubs_core::info::ci;
use infosubs_core::{ExpectedScoreFunction, ValueContext};

/// Conditionally independent signals with accuracies spread over `[0.6, 0.9]`.
pub fn ci_context(n: usize, rule: ExpectedScoreFunction) -> ValueContext {
    let s: Vec<f64> = (0..n).map(|i| 0.6 + 0.3 * i as f64 / n.max(2).saturating_sub(1) as f64).collect();
    ValueContext::new(ci(0.4, &s), rule).expect("valid benchmark context")
}
