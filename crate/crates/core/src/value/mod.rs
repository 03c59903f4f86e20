//! The value function `V` and marginal values, computed directly, through
//! generalized entropy, through Bregman divergences, and by sampling.

mod sampling;

pub use sampling::{
    value_sampled, value_sampled_decision, hoeffding_samples, DecisionOracles, PriorSampler, SampledValue,
    SamplingOptions,
};

use crate::decision::ExpectedScoreFunction;
use crate::error::{Error, Result};
use crate::info::{Garbling, InformationStructure, Partition, Posterior};
use crate::numeric::{ext_mul, pairwise_sum};
use crate::signal_set::SignalSet;

/// Largest signal count for which all `2^n` subset values are tabulated.
pub const MAX_TABULATED_SIGNALS: usize = 20;

/// A structure paired with the decision problem that values it.
#[derive(Clone, Debug)]
pub struct ValueContext {
    structure: InformationStructure,
    g: ExpectedScoreFunction,
}

impl ValueContext {
    pub fn new(structure: InformationStructure, g: ExpectedScoreFunction) -> Result<Self> {
        g.validate_for(structure.n_outcomes())?;
        Ok(Self { structure, g })
    }

    pub fn structure(&self) -> &InformationStructure {
        &self.structure
    }

    pub fn rule(&self) -> &ExpectedScoreFunction {
        &self.g
    }

    pub fn n_signals(&self) -> usize {
        self.structure.n_signals()
    }

    /// Same decision problem on a different prior.
    pub fn with_structure(&self, structure: InformationStructure) -> Self {
        Self { structure, g: self.g.clone() }
    }

    fn weighted(&self, joints: impl Iterator<Item = Vec<f64>>, f: impl Fn(&[f64]) -> f64) -> f64 {
        let terms: Vec<f64> = joints
            .map(|j| Posterior::from_joint(&j))
            .filter(|p| p.mass > 0.0)
            .map(|p| ext_mul(p.mass, f(&p.dist)))
            .collect();
        pairwise_sum(&terms)
    }

    /// `V(A) = sum_cells P(cell) G(posterior)`.
    pub fn value_exact(&self, p: &Partition) -> Result<f64> {
        let joints = self.structure.cell_joints(p)?;
        Ok(self.weighted(joints.into_iter(), |q| self.g.value(q)))
    }

    /// `V` through the entropy: `-E_cells h(posterior)`.
    pub fn value_entropy(&self, p: &Partition) -> Result<f64> {
        let joints = self.structure.cell_joints(p)?;
        Ok(-self.weighted(joints.into_iter(), |q| self.g.entropy(q)))
    }

    pub fn value_subset(&self, s: SignalSet) -> Result<f64> {
        self.value_exact(&self.structure.subset_signal(s)?)
    }

    /// `V(A')` or `V(A' v B)` for a garbled signal `A'`.
    pub fn value_garbled(&self, g: &Garbling, b: Option<&Partition>) -> Result<f64> {
        let bottom = Partition::bottom(self.structure.support_len());
        let joint = self.structure.garbled_joint(g, b.unwrap_or(&bottom))?;
        Ok(self.weighted(joint.rows().map(<[f64]>::to_vec), |q| self.g.value(q)))
    }

    /// `V(a v b) - V(a)`.
    pub fn marginal(&self, a: &Partition, b: &Partition) -> Result<f64> {
        Ok(self.value_exact(&a.join(b)?)? - self.value_exact(a)?)
    }

    /// `E_{(a, b)} D_G(p_ab, p_a)`.
    pub fn marginal_bregman(&self, a: &Partition, b: &Partition) -> Result<f64> {
        let ab = a.join(b)?;
        let a_post: Vec<Posterior> = self.structure.cell_joints(a)?.iter().map(|j| Posterior::from_joint(j)).collect();
        let mut a_of = vec![0; ab.n_cells()];
        for g in 0..ab.len() {
            a_of[ab.cell_of(g)] = a.cell_of(g);
        }
        let terms: Vec<f64> = self
            .structure
            .cell_joints(&ab)?
            .iter()
            .enumerate()
            .map(|(c, j)| {
                let p = Posterior::from_joint(j);
                ext_mul(p.mass, self.g.bregman(&p.dist, &a_post[a_of[c]].dist))
            })
            .collect();
        Ok(pairwise_sum(&terms))
    }

    /// `V(S)` for every subset, indexed by bitmask.
    pub fn subset_values(&self) -> Result<Vec<f64>> {
        let n = self.n_signals();
        if n > MAX_TABULATED_SIGNALS {
            return Err(Error::CapExceeded {
                what: "subset enumeration",
                size: n,
                cap: MAX_TABULATED_SIGNALS,
                cost: format!("2^{n} value evaluations"),
            });
        }
        SignalSet::all(n).map(|s| self.value_subset(s)).collect()
    }
}
