use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::bell;

/// Default cap on the number of cells whose coarsenings may be enumerated.
pub const DEFAULT_COARSENING_CAP: usize = 12;

/// A partition of the support Γ, stored as a restricted-growth label
/// vector: `labels[g]` is the cell of support point `g`, and cells are
/// numbered in order of first appearance.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Partition {
    labels: Vec<usize>,
    n_cells: usize,
}

impl Partition {
    /// Canonicalize arbitrary labels.
    pub fn from_labels<T: Copy + Eq + std::hash::Hash>(raw: &[T]) -> Self {
        let mut seen = std::collections::HashMap::new();
        let labels = raw
            .iter()
            .map(|x| {
                let next = seen.len();
                *seen.entry(*x).or_insert(next)
            })
            .collect();
        Self { labels, n_cells: seen.len() }
    }

    pub fn from_cells(len: usize, cells: &[Vec<usize>]) -> Result<Self> {
        let mut raw = vec![usize::MAX; len];
        for (c, cell) in cells.iter().enumerate() {
            if cell.is_empty() {
                return Err(Error::InvalidPartition(format!("cell {c} is empty")));
            }
            for &g in cell {
                if g >= len {
                    return Err(Error::InvalidPartition(format!("point {g} outside support of size {len}")));
                }
                if raw[g] != usize::MAX {
                    return Err(Error::InvalidPartition(format!("point {g} in two cells")));
                }
                raw[g] = c;
            }
        }
        if let Some(g) = raw.iter().position(|&x| x == usize::MAX) {
            return Err(Error::InvalidPartition(format!("point {g} not covered")));
        }
        Ok(Self::from_labels(&raw))
    }

    /// ⊥: one cell.
    pub fn bottom(len: usize) -> Self {
        Self { labels: vec![0; len], n_cells: usize::from(len > 0) }
    }

    /// ⊤: all singletons.
    pub fn top(len: usize) -> Self {
        Self { labels: (0..len).collect(), n_cells: len }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn cell_of(&self, g: usize) -> usize {
        self.labels[g]
    }

    pub fn cells(&self) -> Vec<Vec<usize>> {
        let mut cells = vec![Vec::new(); self.n_cells];
        for (g, &c) in self.labels.iter().enumerate() {
            cells[c].push(g);
        }
        cells
    }

    fn same_support(&self, o: &Self) -> Result<()> {
        if self.len() == o.len() {
            Ok(())
        } else {
            Err(Error::SupportMismatch { left: self.len(), right: o.len() })
        }
    }

    /// Coarsest common refinement.
    pub fn join(&self, o: &Self) -> Result<Self> {
        self.same_support(o)?;
        let pairs: Vec<(usize, usize)> = self.labels.iter().copied().zip(o.labels.iter().copied()).collect();
        Ok(Self::from_labels(&pairs))
    }

    /// Finest common coarsening: components of the cell-overlap graph.
    pub fn meet(&self, o: &Self) -> Result<Self> {
        self.same_support(o)?;
        let mut uf = UnionFind::new(self.n_cells + o.n_cells);
        for (&a, &b) in self.labels.iter().zip(&o.labels) {
            uf.union(a, self.n_cells + b);
        }
        let raw: Vec<usize> = self.labels.iter().map(|&a| uf.find(a)).collect();
        Ok(Self::from_labels(&raw))
    }

    /// True if every cell of `self` lies inside a cell of `o`
    /// (`self` is at least as informative as `o`).
    pub fn refines(&self, o: &Self) -> bool {
        if self.len() != o.len() {
            return false;
        }
        let mut map = vec![usize::MAX; self.n_cells];
        for (&a, &b) in self.labels.iter().zip(&o.labels) {
            if map[a] == usize::MAX {
                map[a] = b;
            } else if map[a] != b {
                return false;
            }
        }
        true
    }

    /// Merge cells: `group[c]` is the new cell of old cell `c`.
    pub fn merge(&self, group: &[usize]) -> Self {
        assert_eq!(group.len(), self.n_cells, "one group label per cell");
        let raw: Vec<usize> = self.labels.iter().map(|&c| group[c]).collect();
        Self::from_labels(&raw)
    }

    /// Every coarsening of `self`, from ⊥ up to `self`; there are
    /// `Bell(n_cells)` of them.
    pub fn coarsenings(&self, cap: usize) -> Result<Coarsenings<'_>> {
        if self.n_cells > cap {
            return Err(Error::CapExceeded {
                what: "coarsening enumeration",
                size: self.n_cells,
                cap,
                cost: format!("Bell({}) = {} partitions", self.n_cells, bell(self.n_cells)),
            });
        }
        Ok(Coarsenings { base: self, rgs: Some(vec![0; self.n_cells]) })
    }
}

/// Iterator over restricted-growth strings of the base cells.
pub struct Coarsenings<'a> {
    base: &'a Partition,
    rgs: Option<Vec<usize>>,
}

impl Iterator for Coarsenings<'_> {
    type Item = Partition;

    fn next(&mut self) -> Option<Partition> {
        let cur = self.rgs.take()?;
        let out = self.base.merge(&cur);
        self.rgs = next_rgs(cur);
        Some(out)
    }
}

fn next_rgs(mut a: Vec<usize>) -> Option<Vec<usize>> {
    let k = a.len();
    if k == 0 {
        return None;
    }
    let mut prefix_max = vec![0usize; k];
    for i in 1..k {
        prefix_max[i] = prefix_max[i - 1].max(a[i - 1]);
    }
    for i in (1..k).rev() {
        if a[i] <= prefix_max[i] {
            a[i] += 1;
            for x in a.iter_mut().skip(i + 1) {
                *x = 0;
            }
            return Some(a);
        }
    }
    None
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self { parent: (0..n).collect() }
    }

    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.parent[r] != r {
            r = self.parent[r];
        }
        let mut c = x;
        while self.parent[c] != r {
            let next = self.parent[c];
            self.parent[c] = r;
            c = next;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

#[derive(Serialize, Deserialize)]
struct PartitionRepr {
    cells: Vec<Vec<usize>>,
    #[serde(default)]
    support_len: Option<usize>,
}

impl Serialize for Partition {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        PartitionRepr { cells: self.cells(), support_len: Some(self.len()) }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Partition {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let r = PartitionRepr::deserialize(d)?;
        let len = r
            .support_len
            .unwrap_or_else(|| r.cells.iter().flatten().copied().max().map_or(0, |m| m + 1));
        Partition::from_cells(len, &r.cells).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(labels: &[usize]) -> Partition {
        Partition::from_labels(labels)
    }

    #[test]
    fn dice_join_and_meet() {
        // Γ = {1..6} at positions 0..5
        let a = p(&[0, 0, 0, 1, 1, 1]);
        let b = p(&[0, 1, 0, 1, 0, 1]);
        let j = a.join(&b).unwrap();
        assert_eq!(j.cells(), vec![vec![0, 2], vec![1], vec![3, 5], vec![4]]);
        assert_eq!(a.meet(&b).unwrap(), Partition::bottom(6));
        assert_eq!(a.join(&a).unwrap(), a);
    }

    #[test]
    fn coarsening_counts() {
        for k in 0..=6 {
            let top = Partition::top(k);
            assert_eq!(top.coarsenings(12).unwrap().count() as u128, bell(k));
        }
        let two = p(&[0, 1, 1]);
        let cs: Vec<_> = two.coarsenings(12).unwrap().collect();
        assert_eq!(cs, vec![Partition::bottom(3), two.clone()]);
    }

    #[test]
    fn cap_refusal_mentions_bell() {
        let err = Partition::top(13).coarsenings(12).err().unwrap().to_string();
        assert!(err.contains("Bell(13)"), "{err}");
    }

    #[test]
    fn mismatched_support() {
        assert!(Partition::top(3).join(&Partition::top(4)).is_err());
        assert!(Partition::top(3).meet(&Partition::top(4)).is_err());
    }

    #[test]
    fn refinement_order() {
        let a = p(&[0, 0, 1, 1]);
        assert!(Partition::top(4).refines(&a));
        assert!(a.refines(&Partition::bottom(4)));
        assert!(!a.refines(&p(&[0, 1, 1, 0])));
    }

    #[test]
    fn serde_round_trip() {
        let a = p(&[0, 1, 0, 2]);
        let js = serde_json::to_string(&a).unwrap();
        let b: Partition = serde_json::from_str(&js).unwrap();
        assert_eq!(a, b);
    }
}
