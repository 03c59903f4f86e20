//! Substitutes and complements: weak and moderate classification with
//! strictness grading, strong-level refutation search, and structural
//! tests.

mod pointwise;
mod strong;
mod structural;

use std::collections::HashMap;

use rayon::prelude::*;
use serde::Serialize;

pub use pointwise::{check_pointwise_substitutes, PointwiseReport, PointwiseWitness};
pub use strong::{refute_strong, StrongOptions, StrongRefutation};
pub use structural::{
    check_trivial, probe_joint_convexity, separating_decision_problem, universal_complements_geometric,
    verify_log_ci_substitutes, GeometricTest, JointChord, JointConvexity, LogCiCheck, SeparatingProblem,
    Triviality,
};

use crate::error::{Error, Result};
use crate::info::{Garbling, Partition};
use crate::signal_set::SignalSet;
use crate::value::ValueContext;

pub const DEFAULT_TOL: f64 = 1e-9;
/// Default signal cap for subset enumeration.
pub const DEFAULT_SIGNAL_CAP: usize = 10;
/// Default cell cap for coarsening enumeration at the moderate level.
pub const DEFAULT_MODERATE_CELL_CAP: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Level {
    Weak,
    Moderate,
    StrongRefutation,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Strictness {
    /// Every comparison is strict.
    Strict,
    /// No comparison goes the wrong way and at least one is strict.
    SomewhatStrict,
    NonStrict,
}

/// Which inequality a search targets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Substitutes,
    Complements,
}

/// The less informative signal `A'` in a comparison.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SignalRef {
    Subset { subset: SignalSet },
    Coarsening { of: SignalSet, partition: Partition },
    Garbling { of: SignalSet, garbling: Garbling },
}

impl SignalRef {
    /// `V(A')` and `V(A' v B)`.
    pub fn values(&self, ctx: &ValueContext, b: SignalSet) -> Result<(f64, f64)> {
        let st = ctx.structure();
        let pb = st.subset_signal(b)?;
        match self {
            SignalRef::Subset { subset } => {
                let p = st.subset_signal(*subset)?;
                Ok((ctx.value_exact(&p)?, ctx.value_exact(&p.join(&pb)?)?))
            }
            SignalRef::Coarsening { partition, .. } => {
                Ok((ctx.value_exact(partition)?, ctx.value_exact(&partition.join(&pb)?)?))
            }
            SignalRef::Garbling { garbling, .. } => {
                Ok((ctx.value_garbled(garbling, None)?, ctx.value_garbled(garbling, Some(&pb))?))
            }
        }
    }

    pub fn describe(&self) -> String {
        match self {
            SignalRef::Subset { subset } => format!("subset {subset}"),
            SignalRef::Coarsening { of, partition } => {
                format!("coarsening of {of} into {} cells {:?}", partition.n_cells(), partition.cells())
            }
            SignalRef::Garbling { of, garbling } => {
                format!("garbling of {of} with {} outputs", garbling.n_outputs())
            }
        }
    }
}

/// One comparison `V(A' v B) - V(A')` (lhs) against `V(A v B) - V(A)` (rhs).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Witness {
    pub a_prime: SignalRef,
    pub a: SignalSet,
    pub b: SignalSet,
    pub lhs: f64,
    pub rhs: f64,
}

impl Witness {
    /// Positive when the less informed signal gains more (substitutes
    /// direction), negative in the complements direction.
    pub fn margin(&self) -> f64 {
        self.lhs - self.rhs
    }

    /// Recompute both margins through the value module.
    pub fn replay(&self, ctx: &ValueContext) -> Result<(f64, f64)> {
        let (va_p, va_pb) = self.a_prime.values(ctx, self.b)?;
        let va = ctx.value_subset(self.a)?;
        let vab = ctx.value_subset(self.a.union(self.b))?;
        Ok((va_pb - va_p, vab - va))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClassificationReport {
    pub level: Level,
    pub substitutes: bool,
    pub complements: bool,
    pub substitutes_strictness: Option<Strictness>,
    pub complements_strictness: Option<Strictness>,
    /// Most negative-margin comparison: the strongest evidence against
    /// substitutes (or the tightest one when substitutes hold).
    pub substitutes_witness: Option<Witness>,
    /// Most positive-margin comparison, dually.
    pub complements_witness: Option<Witness>,
    pub comparisons: usize,
    /// Some coarsening enumerations were skipped because of the cell cap.
    pub bounded: bool,
    pub tol: f64,
}

impl ClassificationReport {
    /// Human summary such as "complements (strict)".
    pub fn verdict(&self) -> String {
        let grade = |s: Option<Strictness>| match s {
            Some(Strictness::Strict) => " (strict)",
            Some(Strictness::SomewhatStrict) => " (somewhat strict)",
            _ => " (non-strict)",
        };
        match (self.substitutes, self.complements) {
            (true, true) => "substitutes and complements (all comparisons equal)".into(),
            (true, false) => format!("substitutes{}", grade(self.substitutes_strictness)),
            (false, true) => format!("complements{}", grade(self.complements_strictness)),
            (false, false) => "neither substitutes nor complements".into(),
        }
    }

    pub fn witnesses(&self) -> impl Iterator<Item = &Witness> {
        self.substitutes_witness.iter().chain(self.complements_witness.iter())
    }
}

/// Running summary of margins; merged in enumeration order so results do
/// not depend on scheduling.
#[derive(Clone, Debug, Default)]
struct Tally {
    count: usize,
    pos: usize,
    neg: usize,
    min: Option<Witness>,
    max: Option<Witness>,
}

impl Tally {
    fn push(&mut self, w: Witness, tol: f64) {
        let m = w.margin();
        self.count += 1;
        if m > tol {
            self.pos += 1;
        }
        if m < -tol {
            self.neg += 1;
        }
        if self.min.as_ref().is_none_or(|x| m < x.margin()) {
            self.min = Some(w.clone());
        }
        if self.max.as_ref().is_none_or(|x| m > x.margin()) {
            self.max = Some(w);
        }
    }

    fn merge(mut self, o: Tally) -> Tally {
        self.count += o.count;
        self.pos += o.pos;
        self.neg += o.neg;
        if let Some(w) = o.min {
            if self.min.as_ref().is_none_or(|x| w.margin() < x.margin()) {
                self.min = Some(w);
            }
        }
        if let Some(w) = o.max {
            if self.max.as_ref().is_none_or(|x| w.margin() > x.margin()) {
                self.max = Some(w);
            }
        }
        self
    }

    fn report(self, level: Level, tol: f64, bounded: bool) -> ClassificationReport {
        let grade = |strict: usize, wrong: usize| {
            if wrong > 0 {
                None
            } else if self.count > 0 && strict == self.count {
                Some(Strictness::Strict)
            } else if strict > 0 {
                Some(Strictness::SomewhatStrict)
            } else {
                Some(Strictness::NonStrict)
            }
        };
        let subs = grade(self.pos, self.neg);
        let comps = grade(self.neg, self.pos);
        ClassificationReport {
            level,
            substitutes: subs.is_some(),
            complements: comps.is_some(),
            substitutes_strictness: subs,
            complements_strictness: comps,
            substitutes_witness: self.min,
            complements_witness: self.max,
            comparisons: self.count,
            bounded,
            tol,
        }
    }
}

fn check_signal_cap(ctx: &ValueContext, cap: usize) -> Result<()> {
    let n = ctx.n_signals();
    if n > cap {
        return Err(Error::CapExceeded { what: "subset enumeration", size: n, cap, cost: format!("2^{n} subsets") });
    }
    Ok(())
}

/// Subset partitions and values, with ids that identify equal partitions.
struct SubsetTable {
    values: Vec<f64>,
    ids: Vec<usize>,
}

impl SubsetTable {
    fn new(ctx: &ValueContext) -> Result<Self> {
        let st = ctx.structure();
        let parts: Vec<Partition> =
            SignalSet::all(ctx.n_signals()).map(|s| st.subset_signal(s)).collect::<Result<_>>()?;
        let values = parts.par_iter().map(|p| ctx.value_exact(p)).collect::<Result<Vec<_>>>()?;
        let mut seen: HashMap<&Partition, usize> = HashMap::new();
        let ids = parts
            .iter()
            .map(|p| {
                let next = seen.len();
                *seen.entry(p).or_insert(next)
            })
            .collect();
        Ok(Self { values, ids })
    }

    fn v(&self, s: SignalSet) -> f64 {
        self.values[s.0 as usize]
    }

    fn same(&self, a: SignalSet, b: SignalSet) -> bool {
        self.ids[a.0 as usize] == self.ids[b.0 as usize]
    }
}

/// Diminishing (increasing) marginal value of each single signal `i`
/// against every `S' ⊊ S` with `i ∉ S`. Comparisons where `S'` and `S`
/// induce the same partition are tautological and skipped.
pub fn classify_weak(ctx: &ValueContext, tol: f64, cap: usize) -> Result<ClassificationReport> {
    check_signal_cap(ctx, cap)?;
    let n = ctx.n_signals();
    let t = SubsetTable::new(ctx)?;
    let tally = SignalSet::all(n)
        .collect::<Vec<_>>()
        .par_iter()
        .map(|&s| {
            let mut tally = Tally::default();
            for i in (0..n).filter(|&i| !s.contains(i)) {
                let rhs = t.v(s.insert(i)) - t.v(s);
                for sp in s.subsets().filter(|&sp| sp != s && !t.same(sp, s)) {
                    let lhs = t.v(sp.insert(i)) - t.v(sp);
                    let w = Witness {
                        a_prime: SignalRef::Subset { subset: sp },
                        a: s,
                        b: SignalSet::singleton(i),
                        lhs,
                        rhs,
                    };
                    tally.push(w, tol);
                }
            }
            tally
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(Tally::default(), Tally::merge);
    Ok(tally.report(Level::Weak, tol, false))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModerateOptions {
    pub tol: f64,
    pub signal_cap: usize,
    pub cell_cap: usize,
    /// Only compare coarsenings `A'` that still refine `A ∧ B`.
    pub meet_lower_bound: bool,
}

impl Default for ModerateOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            signal_cap: DEFAULT_SIGNAL_CAP,
            cell_cap: DEFAULT_MODERATE_CELL_CAP,
            meet_lower_bound: false,
        }
    }
}

/// Every coarsening of `A`'s partition (other than `A` itself) against
/// every nonempty `B` disjoint from nonempty `A`. When `A` has more cells
/// than the cap, only its subset-lattice coarsenings are compared and the
/// report is flagged as bounded.
pub fn classify_moderate(ctx: &ValueContext, opts: ModerateOptions) -> Result<ClassificationReport> {
    check_signal_cap(ctx, opts.signal_cap)?;
    let n = ctx.n_signals();
    let st = ctx.structure();
    let t = SubsetTable::new(ctx)?;
    let full = SignalSet::full(n);
    let a_sets: Vec<SignalSet> = SignalSet::all(n).filter(|a| !a.is_empty() && *a != full).collect();
    let parts = a_sets
        .par_iter()
        .map(|&a| -> Result<(Tally, bool)> {
            let pa = st.subset_signal(a)?;
            let mut tally = Tally::default();
            let bs: Vec<SignalSet> = full.difference(a).subsets().filter(|b| !b.is_empty()).collect();
            let pbs: Vec<Partition> = bs.iter().map(|&b| st.subset_signal(b)).collect::<Result<_>>()?;
            let candidates: Vec<SignalRef> = match pa.coarsenings(opts.cell_cap) {
                Ok(it) => it
                    .filter(|p| *p != pa)
                    .map(|partition| SignalRef::Coarsening { of: a, partition })
                    .collect(),
                Err(_) => a
                    .subsets()
                    .filter(|&sp| sp != a && !t.same(sp, a))
                    .map(|subset| SignalRef::Subset { subset })
                    .collect(),
            };
            let bounded = pa.n_cells() > opts.cell_cap;
            for cand in candidates {
                let pc = match &cand {
                    SignalRef::Coarsening { partition, .. } => partition.clone(),
                    SignalRef::Subset { subset } => st.subset_signal(*subset)?,
                    SignalRef::Garbling { .. } => unreachable!("no garblings at the moderate level"),
                };
                let vc = ctx.value_exact(&pc)?;
                for (&b, pb) in bs.iter().zip(&pbs) {
                    if opts.meet_lower_bound && !pc.refines(&pa.meet(pb)?) {
                        continue;
                    }
                    let lhs = ctx.value_exact(&pc.join(pb)?)? - vc;
                    let rhs = t.v(a.union(b)) - t.v(a);
                    tally.push(Witness { a_prime: cand.clone(), a, b, lhs, rhs }, opts.tol);
                }
            }
            Ok((tally, bounded))
        })
        .collect::<Result<Vec<_>>>()?;
    let bounded = parts.iter().any(|(_, b)| *b);
    let tally = parts.into_iter().map(|(t, _)| t).fold(Tally::default(), Tally::merge);
    Ok(tally.report(Level::Moderate, opts.tol, bounded))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decision::{pair_problem, revelation, ExpectedScoreFunction as G, PairWeighting};
    use crate::info::{ci, dup2, pair, xor2};

    fn ctx(s: crate::info::InformationStructure, g: G) -> ValueContext {
        ValueContext::new(s, g).unwrap()
    }

    #[test]
    fn weak_examples() {
        let r = classify_weak(&ctx(xor2(0.5), G::Log), DEFAULT_TOL, 10).unwrap();
        assert!(r.complements && !r.substitutes);
        assert_eq!(r.complements_strictness, Some(Strictness::Strict));
        let w = r.complements_witness.unwrap();
        assert_eq!((w.lhs, w.rhs), (0.0, 1.0));
        let r = classify_weak(&ctx(dup2(), G::Log), DEFAULT_TOL, 10).unwrap();
        assert!(r.substitutes && !r.complements);
        let c = ctx(ci(0.9, &[0.8, 0.8]), G::Quadratic);
        let r = classify_weak(&c, DEFAULT_TOL, 10).unwrap();
        assert!(!r.substitutes);
        let w = r.substitutes_witness.unwrap();
        let (l, rr) = w.replay(&c).unwrap();
        assert!((l - w.lhs).abs() < 1e-12 && (rr - w.rhs).abs() < 1e-12);
    }

    #[test]
    fn moderate_examples() {
        let r = classify_moderate(&ctx(xor2(0.5), G::Log), ModerateOptions::default()).unwrap();
        assert!(r.complements && !r.substitutes);
        assert_eq!(r.verdict(), "complements (strict)");
        let r = classify_moderate(&ctx(dup2(), G::Log), ModerateOptions::default()).unwrap();
        assert!(r.substitutes);
    }

    #[test]
    fn pair_is_neither_at_moderate_level() {
        for w in [PairWeighting::First, PairWeighting::Second] {
            let c = ctx(pair(), revelation(pair_problem(0.1, w)));
            let weak = classify_weak(&c, DEFAULT_TOL, 10).unwrap();
            assert_eq!(weak.substitutes, w == PairWeighting::First);
            assert_eq!(weak.complements, w == PairWeighting::Second);
            let m = classify_moderate(&c, ModerateOptions::default()).unwrap();
            assert!(!m.substitutes && !m.complements);
        }
    }

    #[test]
    fn cap_exceeded() {
        let c = ctx(ci(0.5, &[0.8; 4]), G::Log);
        assert!(classify_weak(&c, DEFAULT_TOL, 3).is_err());
        let opts = ModerateOptions { cell_cap: 2, ..Default::default() };
        let r = classify_moderate(&c, opts).unwrap();
        assert!(r.bounded);
    }
}
