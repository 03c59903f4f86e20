use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::l2;

/// Largest point set accepted by the exact projection.
pub const MAX_HULL_POINTS: usize = 24;

/// `G(q)` = Euclidean distance from `q` to the convex hull of a finite
/// point set.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HullDistance {
    points: Vec<Vec<f64>>,
}

impl HullDistance {
    pub fn new(points: Vec<Vec<f64>>) -> Result<Self> {
        let mut uniq: Vec<Vec<f64>> = Vec::new();
        for p in points {
            if !uniq.iter().any(|u| l2(u, &p) <= 1e-13) {
                uniq.push(p);
            }
        }
        if uniq.is_empty() {
            return Err(Error::InvalidDecision("hull needs at least one point".into()));
        }
        let dim = uniq[0].len();
        if uniq.iter().any(|p| p.len() != dim) {
            return Err(Error::InvalidDecision("hull points differ in dimension".into()));
        }
        if uniq.len() > MAX_HULL_POINTS {
            return Err(Error::CapExceeded {
                what: "hull projection",
                size: uniq.len(),
                cap: MAX_HULL_POINTS,
                cost: "active-set enumeration over point subsets".into(),
            });
        }
        Ok(Self { points: uniq })
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }

    /// Closest point of the hull to `q`. The optimum lies on a face
    /// spanned by at most `dim` affinely independent vertices, so it is
    /// found by solving the equality-constrained least-squares problem
    /// on every such subset and keeping the best feasible solution.
    pub fn project(&self, q: &[f64]) -> Vec<f64> {
        let m = self.points.len();
        let max_size = self.dim().min(m);
        let mut best: Option<(f64, Vec<f64>)> = None;
        let mut idx = Vec::with_capacity(max_size);
        for size in 1..=max_size {
            combos(m, size, &mut idx, 0, &mut |set| {
                if let Some(x) = self.face_projection(set, q) {
                    let d = l2(&x, q);
                    if best.as_ref().is_none_or(|(bd, _)| d < *bd - 1e-15) {
                        best = Some((d, x));
                    }
                }
            });
        }
        best.map(|(_, x)| x).unwrap_or_else(|| self.points[0].clone())
    }

    fn face_projection(&self, set: &[usize], q: &[f64]) -> Option<Vec<f64>> {
        let s = set.len();
        let dim = self.dim();
        if s == 1 {
            return Some(self.points[set[0]].clone());
        }
        let mut kkt = DMatrix::<f64>::zeros(s + 1, s + 1);
        let mut rhs = DVector::<f64>::zeros(s + 1);
        for (a, &i) in set.iter().enumerate() {
            for (b, &j) in set.iter().enumerate() {
                kkt[(a, b)] = (0..dim).map(|t| self.points[i][t] * self.points[j][t]).sum();
            }
            kkt[(a, s)] = 1.0;
            kkt[(s, a)] = 1.0;
            rhs[a] = (0..dim).map(|t| self.points[i][t] * q[t]).sum();
        }
        rhs[s] = 1.0;
        let sol = kkt.clone().lu().solve(&rhs)?;
        if (&kkt * &sol - &rhs).amax() > 1e-9 {
            return None;
        }
        let lambda: Vec<f64> = (0..s).map(|a| sol[a]).collect();
        if lambda.iter().any(|&l| l < -1e-12 || !l.is_finite()) {
            return None;
        }
        Some(
            (0..dim)
                .map(|t| set.iter().zip(&lambda).map(|(&i, &l)| l.max(0.0) * self.points[i][t]).sum())
                .collect(),
        )
    }

    pub fn distance(&self, q: &[f64]) -> f64 {
        l2(&self.project(q), q)
    }

    /// Unit vector away from the hull, or zero inside it.
    pub fn subgradient(&self, q: &[f64]) -> Vec<f64> {
        let p = self.project(q);
        let d = l2(&p, q);
        if d <= 1e-14 {
            vec![0.0; q.len()]
        } else {
            q.iter().zip(&p).map(|(a, b)| (a - b) / d).collect()
        }
    }
}

fn combos(m: usize, size: usize, cur: &mut Vec<usize>, start: usize, f: &mut dyn FnMut(&[usize])) {
    if cur.len() == size {
        f(cur);
        return;
    }
    for i in start..m {
        cur.push(i);
        combos(m, size, cur, i + 1, f);
        cur.pop();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn segment_projection() {
        let h = HullDistance::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let p = h.project(&[1.0, 1.0]);
        assert!(l2(&p, &[0.5, 0.5]) < 1e-12);
        assert!((h.distance(&[1.0, 1.0]) - 0.5f64.sqrt()).abs() < 1e-12);
        assert_eq!(h.distance(&[0.3, 0.7]), 0.0);
    }

    #[test]
    fn single_point() {
        let h = HullDistance::new(vec![vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap();
        assert_eq!(h.points().len(), 1);
        assert!((h.distance(&[1.0, 0.0]) - 0.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn triangle_interior_and_vertex() {
        let h = HullDistance::new(vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]]).unwrap();
        assert!(h.distance(&[0.2, 0.3, 0.5]) < 1e-12);
        let h2 = HullDistance::new(vec![vec![0.6, 0.2, 0.2], vec![0.2, 0.6, 0.2]]).unwrap();
        let p = h2.project(&[0.0, 0.0, 1.0]);
        assert!(l2(&p, &[0.4, 0.4, 0.2]) < 1e-12);
        let p = h2.project(&[1.0, 0.0, 0.0]);
        assert!(l2(&p, &[0.6, 0.2, 0.2]) < 1e-12);
    }
}
