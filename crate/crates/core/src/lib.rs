//! Value of information on finite Bayesian decision problems: signal
//! lattices, scoring rules, substitutes/complements classification,
//! signal selection and exact market-scoring-rule games.

pub mod classify;
pub mod decision;
pub mod error;
pub mod info;
pub mod market;
pub mod numeric;
pub mod select;
pub mod signal_set;
pub mod value;

pub use error::{Error, Result};
pub use info::{Garbling, InformationStructure, Partition, Posterior};
pub use decision::{DecisionProblem, ExpectedScoreFunction};
pub use signal_set::SignalSet;
pub use value::ValueContext;
