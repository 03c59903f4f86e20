use std::sync::atomic::{AtomicUsize, Ordering};

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::signal_set::SignalSet;

use super::SetFunction;

/// Monotone supermodular function that is zero on every set of size at
/// most `k` except one hidden set `S*` of size `k`, where it is 0.5, and
/// `|S| - k` above size `k`. Counts its queries.
#[derive(Debug)]
pub struct HardnessInstance {
    n: usize,
    k: usize,
    planted: SignalSet,
    queries: AtomicUsize,
}

pub fn supermodular_hardness_instance(n: usize, k: usize, seed: u64) -> HardnessInstance {
    assert!(k <= n && n <= 63, "need k <= n <= 63");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let planted = SignalSet::from_indices(sample(&mut rng, n, k));
    HardnessInstance { n, k, planted, queries: AtomicUsize::new(0) }
}

impl HardnessInstance {
    pub fn k(&self) -> usize {
        self.k
    }

    /// The hidden optimum; exposed for verification only.
    pub fn planted(&self) -> SignalSet {
        self.planted
    }

    pub fn queries(&self) -> usize {
        self.queries.load(Ordering::Relaxed)
    }
}

impl SetFunction for HardnessInstance {
    fn n(&self) -> usize {
        self.n
    }

    fn eval(&self, s: SignalSet) -> f64 {
        self.queries.fetch_add(1, Ordering::Relaxed);
        if s.len() > self.k {
            (s.len() - self.k) as f64
        } else if s == self.planted {
            0.5
        } else {
            0.0
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn values_and_supermodularity() {
        let h = supermodular_hardness_instance(8, 3, 1);
        assert_eq!(h.planted().len(), 3);
        assert_eq!(h.eval(h.planted()), 0.5);
        assert_eq!(h.eval(SignalSet::from_indices(0..5)), 2.0);
        // marginals never decrease along a chain away from S*
        let other = (0..8).find(|&i| !h.planted().contains(i)).unwrap();
        let mut s = SignalSet::singleton(other);
        let mut last = 0.0;
        for i in (0..8).filter(|&i| i != other) {
            let gain = h.eval(s.insert(i)) - h.eval(s);
            assert!(gain >= last, "{gain} < {last}");
            last = gain;
            s = s.insert(i);
        }
        assert!(h.queries() > 0);
    }
}
