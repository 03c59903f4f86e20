use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A convex piecewise-linear function of `x = q(E = second outcome)` on a
/// binary event, given by breakpoints from `x = 0` to `x = 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Custom1D {
    breakpoints: Vec<(f64, f64)>,
}

impl Custom1D {
    pub fn new(breakpoints: Vec<(f64, f64)>) -> Result<Self> {
        let bad = |m: &str| Err(Error::InvalidDecision(format!("custom1d: {m}")));
        if breakpoints.len() < 2 {
            return bad("need at least two breakpoints");
        }
        if breakpoints.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
            return bad("breakpoints must be finite");
        }
        if breakpoints[0].0 != 0.0 || breakpoints.last().unwrap().0 != 1.0 {
            return bad("breakpoints must start at x = 0 and end at x = 1");
        }
        if breakpoints.windows(2).any(|w| w[1].0 <= w[0].0) {
            return bad("breakpoint x values must increase");
        }
        let c = Self { breakpoints };
        let slopes: Vec<f64> = (0..c.breakpoints.len() - 1).map(|i| c.segment_slope(i)).collect();
        if slopes.windows(2).any(|w| w[1] < w[0] - 1e-12) {
            return Err(Error::NotConvex("custom1d slopes must be nondecreasing".into()));
        }
        Ok(c)
    }

    /// Flat until 0.75, then rising to 0.25 at 1.
    pub fn kink075() -> Self {
        Self::new(vec![(0.0, 0.0), (0.75, 0.0), (1.0, 0.25)]).expect("kink075 is convex")
    }

    pub fn breakpoints(&self) -> &[(f64, f64)] {
        &self.breakpoints
    }

    fn segment_slope(&self, i: usize) -> f64 {
        let (x0, y0) = self.breakpoints[i];
        let (x1, y1) = self.breakpoints[i + 1];
        (y1 - y0) / (x1 - x0)
    }

    /// Index of the segment `[x_i, x_{i+1})` holding `x`; the last one for `x = 1`.
    fn segment(&self, x: f64) -> usize {
        let last = self.breakpoints.len() - 2;
        (0..=last).find(|&i| x < self.breakpoints[i + 1].0).unwrap_or(last)
    }

    pub fn eval(&self, x: f64) -> f64 {
        let x = x.clamp(0.0, 1.0);
        let i = self.segment(x);
        let (x0, y0) = self.breakpoints[i];
        if x == x0 {
            return y0;
        }
        let (x1, y1) = self.breakpoints[i + 1];
        if x == x1 {
            return y1;
        }
        y0 + self.segment_slope(i) * (x - x0)
    }

    /// Right derivative (left derivative at `x = 1`).
    pub fn slope(&self, x: f64) -> f64 {
        self.segment_slope(self.segment(x.clamp(0.0, 1.0)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kink_values() {
        let c = Custom1D::kink075();
        assert_eq!(c.eval(0.5), 0.0);
        assert_eq!(c.eval(0.75), 0.0);
        assert_eq!(c.eval(1.0), 0.25);
        assert_eq!(c.slope(0.75), 1.0);
        assert_eq!(c.slope(0.2), 0.0);
        assert_eq!(c.slope(1.0), 1.0);
    }

    #[test]
    fn rejects_concave() {
        assert!(Custom1D::new(vec![(0.0, 0.0), (0.5, 1.0), (1.0, 0.0)]).is_err());
        assert!(Custom1D::new(vec![(0.1, 0.0), (1.0, 0.0)]).is_err());
    }
}
