//! Information structures and the signal lattices built over them.

mod fixtures;
mod garbling;
mod partition;
mod structure;

pub use fixtures::*;
pub use garbling::Garbling;
pub use partition::{Coarsenings, Partition, DEFAULT_COARSENING_CAP};
pub use structure::{FileEntry, InformationStructure, Label, PriorEntry, SignalSpec, StructureFile};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::{linf, pairwise_sum, PROB_TOL};
use crate::signal_set::SignalSet;

/// A conditional distribution on `E` together with the conditioning mass.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Posterior {
    pub dist: Vec<f64>,
    pub mass: f64,
}

impl Posterior {
    /// Normalize an unnormalized joint row.
    pub fn from_joint(joint: &[f64]) -> Self {
        let mass = pairwise_sum(joint);
        let dist = if mass > 0.0 { joint.iter().map(|x| x / mass).collect() } else { joint.to_vec() };
        Self { dist, mass }
    }
}

/// Joint table indexed `[garbled output][b cell][e]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GarbledJoint {
    pub table: Vec<Vec<Vec<f64>>>,
}

impl GarbledJoint {
    pub fn total(&self) -> f64 {
        pairwise_sum(&self.table.iter().flatten().flatten().copied().collect::<Vec<_>>())
    }

    /// Nonzero `(output, b cell)` rows of the table.
    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.table.iter().flatten().map(Vec::as_slice).filter(|r| r.iter().any(|&x| x > 0.0))
    }
}

/// Outcome of the distinguishability check.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Distinguishability {
    Distinguishable,
    Indistinguishable {
        subset: SignalSet,
        /// Two realizations of `subset` (outcome indices, in signal order).
        left: Vec<usize>,
        right: Vec<usize>,
    },
}

impl Distinguishability {
    pub fn holds(&self) -> bool {
        matches!(self, Distinguishability::Distinguishable)
    }
}

impl InformationStructure {
    /// Partition of Γ induced by observing the signals in `s`.
    pub fn subset_signal(&self, s: SignalSet) -> Result<Partition> {
        self.check_subset(s)?;
        let keys: Vec<Vec<usize>> = (0..self.support_len()).map(|g| self.project(g, s)).collect();
        Ok(Partition::from_labels(&keys.iter().collect::<Vec<_>>()))
    }

    /// Partition of Γ induced by an arbitrary function of the realization.
    pub fn partition_by<K, F>(&self, f: F) -> Partition
    where
        K: Eq + std::hash::Hash + Clone,
        F: Fn(&[usize]) -> K,
    {
        let keys: Vec<K> = self.support().iter().map(|a| f(a)).collect();
        let refs: Vec<&K> = keys.iter().collect();
        Partition::from_labels(&refs)
    }

    fn check_partition(&self, p: &Partition) -> Result<()> {
        if p.len() == self.support_len() {
            Ok(())
        } else {
            Err(Error::SupportMismatch { left: p.len(), right: self.support_len() })
        }
    }

    /// Unnormalized joint `P(E = e, cell)` for every cell.
    pub fn cell_joints(&self, p: &Partition) -> Result<Vec<Vec<f64>>> {
        self.check_partition(p)?;
        let k = self.n_outcomes();
        let mut members: Vec<Vec<usize>> = vec![Vec::new(); p.n_cells()];
        for g in 0..self.support_len() {
            members[p.cell_of(g)].push(g);
        }
        Ok(members
            .iter()
            .map(|gs| {
                (0..k)
                    .map(|e| pairwise_sum(&gs.iter().map(|&g| self.joint(g)[e]).collect::<Vec<_>>()))
                    .collect()
            })
            .collect())
    }

    pub fn posterior(&self, p: &Partition, cell: usize) -> Result<Posterior> {
        self.check_partition(p)?;
        if cell >= p.n_cells() {
            return Err(Error::InvalidPartition(format!("cell {cell} of {}", p.n_cells())));
        }
        let k = self.n_outcomes();
        let gs: Vec<usize> = (0..self.support_len()).filter(|&g| p.cell_of(g) == cell).collect();
        let joint: Vec<f64> = (0..k)
            .map(|e| pairwise_sum(&gs.iter().map(|&g| self.joint(g)[e]).collect::<Vec<_>>()))
            .collect();
        Ok(Posterior::from_joint(&joint))
    }

    /// Joint of a garbled signal, the cells of `b`, and `E`.
    pub fn garbled_joint(&self, g: &Garbling, b: &Partition) -> Result<GarbledJoint> {
        self.check_partition(g.source())?;
        self.check_partition(b)?;
        let k = self.n_outcomes();
        let outs = g.n_outputs();
        let mut terms: Vec<Vec<Vec<Vec<f64>>>> = vec![vec![vec![Vec::new(); k]; b.n_cells()]; outs];
        for gamma in 0..self.support_len() {
            let bc = b.cell_of(gamma);
            for (o, slot) in terms.iter_mut().enumerate() {
                let w = g.prob(gamma, o);
                if w == 0.0 {
                    continue;
                }
                for (e, &pe) in self.joint(gamma).iter().enumerate() {
                    if pe > 0.0 {
                        slot[bc][e].push(pe * w);
                    }
                }
            }
        }
        let table = terms
            .into_iter()
            .map(|per_b| per_b.into_iter().map(|per_e| per_e.iter().map(|t| pairwise_sum(t)).collect()).collect())
            .map(|v: Vec<Vec<f64>>| v)
            .collect();
        Ok(GarbledJoint { table })
    }

    /// Whether changing one coordinate of any observed realization always
    /// moves the posterior on `E`. On failure, the first violating pair in
    /// (subset bitmask, lexicographic) order.
    pub fn is_distinguishable(&self) -> Distinguishability {
        for s in SignalSet::all(self.n_signals()).skip(1) {
            let p = self.subset_signal(s).expect("subset in range");
            let joints = self.cell_joints(&p).expect("same support");
            let mut reps: Vec<(Vec<usize>, Vec<f64>)> = vec![(Vec::new(), Vec::new()); p.n_cells()];
            for g in 0..self.support_len() {
                let c = p.cell_of(g);
                if reps[c].0.is_empty() {
                    reps[c] = (self.project(g, s), Posterior::from_joint(&joints[c]).dist);
                }
            }
            reps.sort_by(|a, b| a.0.cmp(&b.0));
            for i in 0..reps.len() {
                for j in i + 1..reps.len() {
                    let diff = reps[i].0.iter().zip(&reps[j].0).filter(|(x, y)| x != y).count();
                    if diff == 1 && linf(&reps[i].1, &reps[j].1) <= PROB_TOL {
                        return Distinguishability::Indistinguishable {
                            subset: s,
                            left: reps[i].0.clone(),
                            right: reps[j].0.clone(),
                        };
                    }
                }
            }
        }
        Distinguishability::Distinguishable
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dup2_support_and_signals() {
        let s = dup2();
        assert_eq!(s.support(), &[vec![0, 0], vec![1, 1]]);
        let a1 = s.subset_signal(SignalSet::singleton(0)).unwrap();
        assert_eq!(a1, Partition::top(2));
        let post = s.posterior(&a1, 0).unwrap();
        assert_eq!(post.dist, vec![1.0, 0.0]);
        assert_eq!(post.mass, 0.5);
    }

    #[test]
    fn xor2_signals() {
        let s = xor2(0.5);
        assert_eq!(s.support_len(), 4);
        let a1 = s.subset_signal(SignalSet::singleton(0)).unwrap();
        assert_eq!(a1.cells(), vec![vec![0, 1], vec![2, 3]]);
        assert_eq!(s.posterior(&a1, 0).unwrap().dist, vec![0.5, 0.5]);
        assert_eq!(s.subset_signal(SignalSet::EMPTY).unwrap(), Partition::bottom(4));
        assert!(s.subset_signal(SignalSet::singleton(2)).is_err());
    }

    #[test]
    fn bottom_posterior_is_prior() {
        let s = ci(0.9, &[0.8, 0.8]);
        let post = s.posterior(&Partition::bottom(s.support_len()), 0).unwrap();
        assert!(linf(&post.dist, &s.prior_marginal()) < 1e-15);
        assert!((post.mass - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_outcome_signal() {
        let s = InformationStructure::from_atoms(2, &[1], vec![(0, vec![0], 0.3), (1, vec![0], 0.7)]).unwrap();
        assert_eq!(s.support(), &[vec![0]]);
    }

    #[test]
    fn identity_and_constant_garblings() {
        let s = xor2(0.6);
        let a = s.subset_signal(SignalSet::singleton(0)).unwrap();
        let b = s.subset_signal(SignalSet::singleton(1)).unwrap();
        let id = s.garbled_joint(&Garbling::identity(a.clone()), &b).unwrap();
        let ab = a.join(&b).unwrap();
        let joints = s.cell_joints(&ab).unwrap();
        for g in 0..s.support_len() {
            let row = &id.table[a.cell_of(g)][b.cell_of(g)];
            assert_eq!(row, &joints[ab.cell_of(g)]);
        }
        let c = s.garbled_joint(&Garbling::constant(a), &b).unwrap();
        assert_eq!(c.table.len(), 1);
        assert_eq!(c.table[0], s.cell_joints(&b).unwrap());
        assert!((c.total() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn happy_sad_perfect_channel_relabels() {
        let s = dup2();
        let a = s.subset_signal(SignalSet::singleton(0)).unwrap();
        let g = Garbling::new(a.clone(), vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let j = s.garbled_joint(&g, &Partition::bottom(2)).unwrap();
        assert_eq!(j.table, vec![vec![vec![0.5, 0.0]], vec![vec![0.0, 0.5]]]);
    }

    #[test]
    fn distinguishability_examples() {
        match xor2(0.5).is_distinguishable() {
            Distinguishability::Indistinguishable { subset, left, right } => {
                assert_eq!(subset, SignalSet::singleton(0));
                assert_eq!((left, right), (vec![0], vec![1]));
            }
            d => panic!("{d:?}"),
        }
        assert!(xor2(0.6).is_distinguishable().holds());
        assert!(dup2().is_distinguishable().holds());
        assert!(ci(0.5, &[0.8, 0.8]).is_distinguishable().holds());
    }
}
