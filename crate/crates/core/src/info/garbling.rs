use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{pairwise_sum, random_simplex, PROB_TOL};

use super::Partition;

/// A randomized function of a partition: row `c` is the output
/// distribution when the realization falls in source cell `c`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Garbling {
    source: Partition,
    matrix: Vec<Vec<f64>>,
}

impl Garbling {
    pub fn new(source: Partition, matrix: Vec<Vec<f64>>) -> Result<Self> {
        if matrix.len() != source.n_cells() {
            return Err(Error::InvalidGarbling(format!(
                "{} rows for {} source cells",
                matrix.len(),
                source.n_cells()
            )));
        }
        let width = matrix.first().map_or(0, Vec::len);
        if width == 0 && source.n_cells() > 0 {
            return Err(Error::InvalidGarbling("no output columns".into()));
        }
        for (r, row) in matrix.iter().enumerate() {
            if row.len() != width {
                return Err(Error::InvalidGarbling(format!("row {r} has {} columns, expected {width}", row.len())));
            }
            if row.iter().any(|&x| !(x.is_finite() && x >= 0.0)) {
                return Err(Error::InvalidGarbling(format!("row {r} has a negative or non-finite entry")));
            }
            let s = pairwise_sum(row);
            if (s - 1.0).abs() > PROB_TOL {
                return Err(Error::InvalidGarbling(format!("row {r} sums to {s}")));
            }
        }
        Ok(Self { source, matrix })
    }

    pub fn identity(source: Partition) -> Self {
        let k = source.n_cells();
        let matrix = (0..k).map(|i| (0..k).map(|j| f64::from(u8::from(i == j))).collect()).collect();
        Self { source, matrix }
    }

    /// Every cell maps to the single output.
    pub fn constant(source: Partition) -> Self {
        let matrix = vec![vec![1.0]; source.n_cells()];
        Self { source, matrix }
    }

    /// The deterministic garbling that reports which cell of `coarse`
    /// the realization lies in. `coarse` must be a coarsening of `source`.
    pub fn from_coarsening(source: Partition, coarse: &Partition) -> Result<Self> {
        if !source.refines(coarse) {
            return Err(Error::InvalidGarbling("target is not a coarsening of the source".into()));
        }
        let mut matrix = vec![vec![0.0; coarse.n_cells()]; source.n_cells()];
        for g in 0..source.len() {
            matrix[source.cell_of(g)][coarse.cell_of(g)] = 1.0;
        }
        Ok(Self { source, matrix })
    }

    /// Rows drawn uniformly from the simplex over `outputs` columns.
    pub fn random<R: Rng + ?Sized>(source: Partition, outputs: usize, rng: &mut R) -> Self {
        let outputs = outputs.max(1);
        let matrix = (0..source.n_cells()).map(|_| random_simplex(rng, outputs)).collect();
        Self { source, matrix }
    }

    pub fn source(&self) -> &Partition {
        &self.source
    }

    pub fn matrix(&self) -> &[Vec<f64>] {
        &self.matrix
    }

    pub fn n_outputs(&self) -> usize {
        self.matrix.first().map_or(0, Vec::len)
    }

    /// `P(output = o | support point g)`.
    pub fn prob(&self, g: usize, o: usize) -> f64 {
        self.matrix[self.source.cell_of(g)][o]
    }

    /// If every row is a point mass, the induced partition of Γ.
    pub fn as_partition(&self) -> Option<Partition> {
        let mut out = Vec::with_capacity(self.matrix.len());
        for row in &self.matrix {
            let o = row.iter().position(|&x| x == 1.0)?;
            out.push(o);
        }
        let raw: Vec<usize> = self.source.labels().iter().map(|&c| out[c]).collect();
        Some(Partition::from_labels(&raw))
    }
}

#[derive(Deserialize)]
struct GarblingRepr {
    source: Partition,
    matrix: Vec<Vec<f64>>,
}

impl<'de> Deserialize<'de> for Garbling {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let r = GarblingRepr::deserialize(d)?;
        Garbling::new(r.source, r.matrix).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn validation() {
        let p = Partition::top(2);
        assert!(Garbling::new(p.clone(), vec![vec![0.5, 0.5], vec![1.0, 0.0]]).is_ok());
        assert!(Garbling::new(p.clone(), vec![vec![0.5, 0.6], vec![1.0, 0.0]]).is_err());
        assert!(Garbling::new(p.clone(), vec![vec![1.0]]).is_err());
        assert!(Garbling::new(p, vec![vec![-0.5, 1.5], vec![1.0, 0.0]]).is_err());
    }

    #[test]
    fn coarsening_round_trip() {
        let src = Partition::from_labels(&[0, 1, 2, 3]);
        let coarse = Partition::from_labels(&[0, 0, 1, 1]);
        let g = Garbling::from_coarsening(src, &coarse).unwrap();
        assert_eq!(g.as_partition().unwrap(), coarse);
    }

    #[test]
    fn random_rows_are_stochastic() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let g = Garbling::random(Partition::top(4), 3, &mut rng);
        assert!(Garbling::new(g.source().clone(), g.matrix().to_vec()).is_ok());
    }
}
