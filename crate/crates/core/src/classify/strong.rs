use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{classify_moderate, Mode, ModerateOptions, SignalRef, Witness};
use crate::error::Result;
use crate::info::{Garbling, Partition};
use crate::signal_set::SignalSet;
use crate::value::ValueContext;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StrongOptions {
    /// Random restarts of the garbling search.
    pub budget: usize,
    /// Coordinate-ascent sweeps per restart.
    pub sweeps: usize,
    pub seed: u64,
    pub tol: f64,
}

impl Default for StrongOptions {
    fn default() -> Self {
        Self { budget: 50, sweeps: 20, seed: 0, tol: super::DEFAULT_TOL }
    }
}

/// Result of a refutation search. No witness means "not refuted within
/// budget", never "holds".
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StrongRefutation {
    pub mode: Mode,
    pub witness: Option<Witness>,
    /// Garbling candidates evaluated by the random search.
    pub evaluated: usize,
    /// The witness came from the deterministic coarsening pass.
    pub from_coarsening: bool,
}

fn violation(mode: Mode, lhs: f64, rhs: f64) -> f64 {
    match mode {
        Mode::Substitutes => rhs - lhs,
        Mode::Complements => lhs - rhs,
    }
}

/// Search for a garbling `A'` of some `A` and a disjoint `B` violating the
/// chosen inequality. Deterministic coarsenings are garblings, so any
/// moderate-level violation is returned first as is.
pub fn refute_strong(ctx: &ValueContext, mode: Mode, opts: StrongOptions) -> Result<StrongRefutation> {
    let moderate =
        classify_moderate(ctx, ModerateOptions { tol: opts.tol, ..Default::default() })?;
    let found = match mode {
        Mode::Substitutes => moderate.substitutes_witness.filter(|_| !moderate.substitutes),
        Mode::Complements => moderate.complements_witness.filter(|_| !moderate.complements),
    };
    if let Some(w) = found {
        return Ok(StrongRefutation { mode, witness: Some(w), evaluated: 0, from_coarsening: true });
    }

    let st = ctx.structure();
    let n = ctx.n_signals();
    let full = SignalSet::full(n);
    let mut pairs = Vec::new();
    for a in SignalSet::all(n).filter(|a| !a.is_empty() && *a != full) {
        let pa = st.subset_signal(a)?;
        if pa.n_cells() < 2 {
            continue;
        }
        let va = ctx.value_subset(a)?;
        for b in full.difference(a).subsets().filter(|b| !b.is_empty()) {
            let rhs = ctx.value_subset(a.union(b))? - va;
            pairs.push((a, pa.clone(), b, st.subset_signal(b)?, rhs));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut evaluated = 0;
    if pairs.is_empty() {
        return Ok(StrongRefutation { mode, witness: None, evaluated, from_coarsening: false });
    }
    for restart in 0..opts.budget {
        let (a, pa, b, pb, rhs) = &pairs[restart % pairs.len()];
        let outputs = rng.gen_range(2..=pa.n_cells().max(2));
        let mut g = Garbling::random(pa.clone(), outputs, &mut rng);
        let eval = |g: &Garbling| -> Result<f64> {
            Ok(ctx.value_garbled(g, Some(pb))? - ctx.value_garbled(g, None)?)
        };
        let mut lhs = eval(&g)?;
        evaluated += 1;
        let mut best = violation(mode, lhs, *rhs);
        for _ in 0..opts.sweeps {
            let mut improved = false;
            let mut rows: Vec<usize> = (0..pa.n_cells()).collect();
            rows.shuffle(&mut rng);
            for r in rows {
                let o = rng.gen_range(0..outputs);
                for t in [1.0, 0.5, 0.2] {
                    let cand = nudge(&g, r, o, t)?;
                    let l = eval(&cand)?;
                    evaluated += 1;
                    let v = violation(mode, l, *rhs);
                    if v > best {
                        best = v;
                        lhs = l;
                        g = cand;
                        improved = true;
                        break;
                    }
                }
            }
            if best > opts.tol || !improved {
                break;
            }
        }
        if best > opts.tol {
            let witness = Witness {
                a_prime: SignalRef::Garbling { of: *a, garbling: g },
                a: *a,
                b: *b,
                lhs,
                rhs: *rhs,
            };
            return Ok(StrongRefutation { mode, witness: Some(witness), evaluated, from_coarsening: false });
        }
    }
    Ok(StrongRefutation { mode, witness: None, evaluated, from_coarsening: false })
}

/// Move a fraction `t` of row `r`'s mass onto output `o`.
fn nudge(g: &Garbling, r: usize, o: usize, t: f64) -> Result<Garbling> {
    let mut m = g.matrix().to_vec();
    for (j, x) in m[r].iter_mut().enumerate() {
        *x = (1.0 - t) * *x + if j == o { t } else { 0.0 };
    }
    let s: f64 = m[r].iter().sum();
    m[r].iter_mut().for_each(|x| *x /= s);
    Garbling::new(Partition::clone(g.source()), m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decision::{pair_problem, revelation, ExpectedScoreFunction as G, PairWeighting};
    use crate::info::{dup2, pair};

    #[test]
    fn dup2_not_refuted() {
        let c = ValueContext::new(dup2(), G::Log).unwrap();
        let r = refute_strong(&c, Mode::Substitutes, StrongOptions::default()).unwrap();
        assert!(r.witness.is_none());
        assert!(r.evaluated >= 50);
    }

    #[test]
    fn pair_refuted_by_coarsening() {
        let c = ValueContext::new(pair(), revelation(pair_problem(0.1, PairWeighting::First))).unwrap();
        let r = refute_strong(&c, Mode::Complements, StrongOptions::default()).unwrap();
        assert!(r.from_coarsening);
        let w = r.witness.unwrap();
        assert!(w.lhs > w.rhs);
    }
}
