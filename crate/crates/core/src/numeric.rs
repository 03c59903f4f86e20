//! Floating-point helpers shared by every module.
//!
//! Probabilities are plain `f64`. Scores may be `-inf` (log rule, off-face
//! reports), so sums and products follow extended-real conventions:
//! `0 * inf = 0`, and any `-inf` term makes the whole sum `-inf`.

/// Default tolerance for probability equality.
pub const PROB_TOL: f64 = 1e-12;

/// Tolerance used to decide whether two reported prices are the same.
pub const REPORT_TOL: f64 = 1e-10;

/// Extended-real product where a zero weight annihilates an infinity.
#[inline]
pub fn ext_mul(w: f64, x: f64) -> f64 {
    if w == 0.0 {
        0.0
    } else {
        w * x
    }
}

/// Extended-real addition with `-inf` dominating `+inf`.
#[inline]
pub fn ext_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY || b == f64::NEG_INFINITY {
        f64::NEG_INFINITY
    } else {
        a + b
    }
}

/// Pairwise (cascade) summation with a fixed split, so the result does
/// not depend on evaluation order and equal dyadic terms add exactly.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.contains(&f64::NEG_INFINITY) {
        return f64::NEG_INFINITY;
    }
    fn go(xs: &[f64]) -> f64 {
        match xs.len() {
            0 => 0.0,
            1 => xs[0],
            2 => xs[0] + xs[1],
            n => {
                let mid = n / 2;
                go(&xs[..mid]) + go(&xs[mid..])
            }
        }
    }
    go(xs)
}

/// Weighted sum `sum w_i x_i` with extended-real conventions.
pub fn weighted_sum(ws: &[f64], xs: &[f64]) -> f64 {
    let terms: Vec<f64> = ws.iter().zip(xs).map(|(&w, &x)| ext_mul(w, x)).collect();
    pairwise_sum(&terms)
}

/// Scale a nonnegative vector to sum to one. Returns the original mass.
pub fn normalize(v: &mut [f64]) -> f64 {
    let mass = pairwise_sum(v);
    if mass > 0.0 {
        v.iter_mut().for_each(|x| *x /= mass);
    }
    mass
}

pub fn linf(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn l2(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Binary entropy in bits.
pub fn h2(p: f64) -> f64 {
    let t = |x: f64| if x <= 0.0 { 0.0 } else { -x * x.log2() };
    t(p) + t(1.0 - p)
}

/// `n!`-free Bell number via the Bell triangle. Saturates at `u128::MAX`.
pub fn bell(n: usize) -> u128 {
    let mut row = vec![1u128];
    for _ in 0..n {
        let mut next = Vec::with_capacity(row.len() + 1);
        next.push(*row.last().unwrap());
        for &x in &row {
            let last = *next.last().unwrap();
            next.push(last.saturating_add(x));
        }
        row = next;
    }
    row[0]
}

/// A uniformly random point of the probability simplex.
pub fn random_simplex<R: rand::Rng + ?Sized>(rng: &mut R, k: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..k)
        .map(|_| -(1.0 - rng.gen::<f64>()).ln())
        .collect();
    normalize(&mut v);
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bell_numbers() {
        let expect = [1u128, 1, 2, 5, 15, 52, 203, 877, 4140, 21147];
        for (n, &b) in expect.iter().enumerate() {
            assert_eq!(bell(n), b);
        }
    }

    #[test]
    fn neg_inf_dominates() {
        assert_eq!(pairwise_sum(&[1.0, f64::INFINITY, f64::NEG_INFINITY]), f64::NEG_INFINITY);
        assert_eq!(ext_mul(0.0, f64::NEG_INFINITY), 0.0);
        assert_eq!(weighted_sum(&[0.0, 1.0], &[f64::NEG_INFINITY, 2.0]), 2.0);
    }

    #[test]
    fn dyadic_sums_are_exact() {
        let xs = vec![0.125 * 3.0; 8];
        assert_eq!(pairwise_sum(&xs), 3.0);
    }

    #[test]
    fn binary_entropy() {
        assert_eq!(h2(0.5), 1.0);
        assert_eq!(h2(0.0), 0.0);
        assert!((h2(0.2) - 0.7219280948873623).abs() < 1e-15);
    }
}
