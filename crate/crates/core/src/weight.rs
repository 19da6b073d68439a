//! Convex C¹ weights `β` with their derivatives.

use std::fmt;
use std::sync::Arc;

type Scalar = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Regularization used by [`ConvexWeight::smoothed_four_thirds`].
pub const SMOOTHING_DELTA: f64 = 1e-6;

#[derive(Clone)]
pub struct ConvexWeight {
    eval: Scalar,
    deriv: Scalar,
    label: String,
}

impl fmt::Debug for ConvexWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ConvexWeight").field("label", &self.label).finish()
    }
}

impl ConvexWeight {
    pub fn new<E, D>(label: impl Into<String>, eval: E, deriv: D) -> Self
    where
        E: Fn(f64) -> f64 + Send + Sync + 'static,
        D: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            eval: Arc::new(eval),
            deriv: Arc::new(deriv),
            label: label.into(),
        }
    }

    /// `β(r) = r²`
    pub fn quadratic() -> Self {
        Self::new("quadratic", |r| r * r, |r| 2.0 * r)
    }

    /// `β(r) = |r|^q` for `q > 1`.
    pub fn power(q: f64) -> Self {
        assert!(q > 1.0, "power weight needs q > 1");
        Self::new(
            format!("power_{q}"),
            move |r: f64| r.abs().powf(q),
            move |r: f64| q * r.signum() * r.abs().powf(q - 1.0),
        )
    }

    /// `β(r) = (r² + δ²)^{2/3} − δ^{4/3}`, a C¹ stand-in for `|r|^{4/3}`.
    pub fn smoothed_four_thirds() -> Self {
        let d2 = SMOOTHING_DELTA * SMOOTHING_DELTA;
        let offset = d2.powf(2.0 / 3.0);
        Self::new(
            "smoothed_four_thirds",
            move |r: f64| (r * r + d2).powf(2.0 / 3.0) - offset,
            move |r: f64| (4.0 / 3.0) * r * (r * r + d2).powf(-1.0 / 3.0),
        )
    }

    #[inline]
    pub fn eval(&self, r: f64) -> f64 {
        (self.eval)(r)
    }

    #[inline]
    pub fn deriv(&self, r: f64) -> f64 {
        (self.deriv)(r)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Largest violation of `β(λa+(1−λ)b) ≤ λβ(a)+(1−λ)β(b)` over all sample
    /// pairs and the given λ values (zero or negative means convex).
    pub fn convexity_defect(&self, samples: &[f64], lambdas: &[f64]) -> f64 {
        let mut worst = f64::NEG_INFINITY;
        for (i, &a) in samples.iter().enumerate() {
            for &b in &samples[i + 1..] {
                for &l in lambdas {
                    let mid = self.eval(l * a + (1.0 - l) * b);
                    let chord = l * self.eval(a) + (1.0 - l) * self.eval(b);
                    worst = worst.max(mid - chord);
                }
            }
        }
        worst
    }

    /// Largest `|β'(r) − centered difference|`, relative to `max(1, |β'(r)|)`.
    pub fn derivative_defect(&self, samples: &[f64]) -> f64 {
        samples
            .iter()
            .map(|&r| {
                let h = 1e-5 * r.abs().max(1.0);
                let fd = (self.eval(r + h) - self.eval(r - h)) / (2.0 * h);
                let d = self.deriv(r);
                (d - fd).abs() / d.abs().max(1.0)
            })
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn samples() -> Vec<f64> {
        (-40..=40).map(|i| i as f64 * 0.25).chain([1e-7, -3e-7, 123.0]).collect()
    }

    #[test]
    fn supplied_weights_are_convex() {
        let lambdas = [0.1, 0.25, 0.5, 0.9];
        for w in [ConvexWeight::quadratic(), ConvexWeight::power(1.5), ConvexWeight::smoothed_four_thirds()] {
            assert!(w.convexity_defect(&samples(), &lambdas) <= 1e-12, "{}", w.label());
        }
    }

    #[test]
    fn nonconvex_weight_is_detected() {
        let w = ConvexWeight::new("sin", f64::sin, f64::cos);
        assert!(w.convexity_defect(&samples(), &[0.5]) > 1e-3);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let pts: Vec<f64> = (-20..=20).map(|i| i as f64 * 0.37 + 0.01).collect();
        for w in [ConvexWeight::quadratic(), ConvexWeight::power(1.5), ConvexWeight::smoothed_four_thirds()] {
            assert!(w.derivative_defect(&pts) < 1e-6, "{}", w.label());
        }
        let bad = ConvexWeight::new("bad", |r| r * r, |r| r);
        assert!(bad.derivative_defect(&pts) > 0.1);
    }

    #[test]
    fn smoothed_weight_vanishes_at_zero() {
        let w = ConvexWeight::smoothed_four_thirds();
        assert_eq!(w.eval(0.0), 0.0);
        assert_eq!(w.deriv(0.0), 0.0);
        assert!((w.eval(2.0) - 2f64.powf(4.0 / 3.0)).abs() < 2e-8);
    }
}
