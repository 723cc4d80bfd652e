//! Real numbers carried together with an absolute error bound.
//!
//! Propagation is first-order and conservative: every operation widens the
//! bound by the propagated input error plus one rounding unit of the result.
//! This is not interval arithmetic; it is enough for the tolerances used here.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

const ULP: f64 = f64::EPSILON;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundedReal {
    pub estimate: f64,
    pub bound: f64,
}

impl BoundedReal {
    pub fn new(estimate: f64, bound: f64) -> Self {
        debug_assert!(bound >= 0.0 || bound.is_nan(), "negative bound {bound}");
        BoundedReal { estimate, bound: bound.abs() }
    }

    /// A value known to be exact.
    pub fn exact(estimate: f64) -> Self {
        BoundedReal { estimate, bound: 0.0 }
    }

    /// A value correct up to rounding of its last operation.
    pub fn rounded(estimate: f64) -> Self {
        BoundedReal { estimate, bound: ULP * estimate.abs() }
    }

    pub fn lower(&self) -> f64 {
        self.estimate - self.bound
    }

    pub fn upper(&self) -> f64 {
        self.estimate + self.bound
    }

    pub fn contains(&self, x: f64) -> bool {
        (x - self.estimate).abs() <= self.bound
    }

    /// True when `self` and `other` are compatible with a common true value.
    pub fn overlaps(&self, other: &BoundedReal) -> bool {
        (self.estimate - other.estimate).abs() <= self.bound + other.bound
    }

    pub fn relative_bound(&self) -> f64 {
        self.bound / self.estimate.abs()
    }

    pub fn ln(self) -> BoundedReal {
        let est = self.estimate.ln();
        // d ln x = dx / x, evaluated at the worst end of the interval
        let lo = self.lower();
        let prop = if lo > 0.0 { self.bound / lo } else { f64::INFINITY };
        BoundedReal::new(est, prop + ULP * est.abs())
    }

    pub fn exp(self) -> BoundedReal {
        let est = self.estimate.exp();
        let prop = self.upper().exp() - est;
        BoundedReal::new(est, prop.max(0.0) + 2.0 * ULP * est)
    }

    pub fn sqrt(self) -> BoundedReal {
        let est = self.estimate.sqrt();
        let lo = self.lower().max(0.0);
        let prop = est - lo.sqrt();
        let prop = prop.max(self.upper().sqrt() - est);
        BoundedReal::new(est, prop + ULP * est)
    }

    pub fn powf(self, p: f64) -> BoundedReal {
        let est = self.estimate.powf(p);
        let a = (self.lower().max(0.0)).powf(p);
        let b = self.upper().powf(p);
        let prop = (a - est).abs().max((b - est).abs());
        BoundedReal::new(est, prop + 4.0 * ULP * est.abs())
    }

    pub fn scale(self, c: f64) -> BoundedReal {
        let est = self.estimate * c;
        BoundedReal::new(est, self.bound * c.abs() + ULP * est.abs())
    }

    pub fn abs(self) -> BoundedReal {
        BoundedReal::new(self.estimate.abs(), self.bound)
    }
}

impl Add for BoundedReal {
    type Output = BoundedReal;
    fn add(self, rhs: BoundedReal) -> BoundedReal {
        let est = self.estimate + rhs.estimate;
        BoundedReal::new(est, self.bound + rhs.bound + ULP * est.abs())
    }
}

impl Sub for BoundedReal {
    type Output = BoundedReal;
    fn sub(self, rhs: BoundedReal) -> BoundedReal {
        let est = self.estimate - rhs.estimate;
        BoundedReal::new(est, self.bound + rhs.bound + ULP * est.abs())
    }
}

impl Neg for BoundedReal {
    type Output = BoundedReal;
    fn neg(self) -> BoundedReal {
        BoundedReal::new(-self.estimate, self.bound)
    }
}

impl Mul for BoundedReal {
    type Output = BoundedReal;
    fn mul(self, rhs: BoundedReal) -> BoundedReal {
        let est = self.estimate * rhs.estimate;
        let prop = self.estimate.abs() * rhs.bound
            + rhs.estimate.abs() * self.bound
            + self.bound * rhs.bound;
        BoundedReal::new(est, prop + ULP * est.abs())
    }
}

impl Div for BoundedReal {
    type Output = BoundedReal;
    fn div(self, rhs: BoundedReal) -> BoundedReal {
        let est = self.estimate / rhs.estimate;
        let den = rhs.estimate.abs() - rhs.bound;
        let prop = if den > 0.0 {
            (self.bound + est.abs() * rhs.bound) / den
        } else {
            f64::INFINITY
        };
        BoundedReal::new(est, prop + ULP * est.abs())
    }
}

impl From<f64> for BoundedReal {
    fn from(x: f64) -> Self {
        BoundedReal::exact(x)
    }
}

impl fmt::Display for BoundedReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ± {:e}", self.estimate, self.bound)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn addition_sums_bounds() {
        let a = BoundedReal::new(1.0, 1e-10);
        let b = BoundedReal::new(2.0, 2e-10);
        let c = a + b;
        assert_eq!(c.estimate, 3.0);
        assert!(c.bound >= 3e-10);
        assert!(c.bound < 3e-10 + 1e-15);
    }

    #[test]
    fn ln_contains_true_value() {
        let x = BoundedReal::new(2.0, 1e-6);
        let y = x.ln();
        assert!(y.contains((2.0f64 + 1e-6).ln()));
        assert!(y.contains((2.0f64 - 1e-6).ln()));
    }

    #[test]
    fn division_by_interval_straddling_zero_is_unbounded() {
        let x = BoundedReal::exact(1.0) / BoundedReal::new(0.0, 1.0);
        assert!(x.bound.is_infinite());
    }

    #[test]
    fn overlaps_is_symmetric() {
        let a = BoundedReal::new(1.0, 0.1);
        let b = BoundedReal::new(1.15, 0.05);
        assert!(a.overlaps(&b) && b.overlaps(&a));
        assert!(!a.overlaps(&BoundedReal::new(1.2, 0.05)));
    }
}
