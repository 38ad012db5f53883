//! Inversion of strictly monotone functions: bracketing bisection with
//! safeguarded Newton steps.

use super::{linspace, FnError, Interval, RealFn};

/// Points used to check monotonicity and to bracket roots.
pub const MONOTONE_SAMPLES: usize = 64;
/// Iteration cap for the bracketed search.
pub const INVERSION_CAP: usize = 80;

/// Precomputed inverse of a sampled-monotone function.
#[derive(Clone, Debug)]
pub struct MonotoneInverse {
    f: RealFn,
    xs: Vec<f64>,
    ys: Vec<f64>,
    increasing: bool,
}

impl MonotoneInverse {
    pub fn new(f: &RealFn) -> Result<Self, FnError> {
        let (a, b) = f.domain().sampling_bounds();
        let xs = linspace(a, b, MONOTONE_SAMPLES);
        let mut ys = Vec::with_capacity(xs.len());
        for &x in &xs {
            let y = f.eval(x);
            if !y.is_finite() {
                return Err(FnError::NonFinite { x });
            }
            ys.push(y);
        }
        let increasing = ys[1] > ys[0];
        let ok = ys.windows(2).all(|w| if increasing { w[1] > w[0] } else { w[1] < w[0] });
        if !ok {
            return Err(FnError::NotMonotone);
        }
        Ok(MonotoneInverse { f: f.clone(), xs, ys, increasing })
    }

    pub fn increasing(&self) -> bool {
        self.increasing
    }

    /// Sampled image as an open interval.
    pub fn image(&self) -> Interval {
        let (a, b) = (self.ys[0], *self.ys.last().unwrap());
        Interval::new(a.min(b), a.max(b)).expect("strictly monotone samples")
    }

    pub fn function(&self) -> &RealFn {
        &self.f
    }

    /// `x` with `|f(x) - y| <= tol (1 + |y|)`.
    pub fn invert(&self, y: f64, tol: f64) -> Result<f64, FnError> {
        let slack = tol * (1.0 + y.abs());
        let n = self.ys.len();
        let (ymin, ymax) = if self.increasing { (self.ys[0], self.ys[n - 1]) } else { (self.ys[n - 1], self.ys[0]) };
        if !(y >= ymin - slack && y <= ymax + slack) {
            return Err(FnError::OutOfRange { y, lo: ymin, hi: ymax });
        }
        // index i with y between ys[i] and ys[i+1]
        let above = |v: f64| if self.increasing { v <= y } else { v >= y };
        let i = self.ys.partition_point(|&v| above(v)).clamp(1, n - 1) - 1;
        let (mut a, mut b) = (self.xs[i], self.xs[i + 1]);
        let mut fa = self.ys[i] - y;
        let fb = self.ys[i + 1] - y;
        if fa.abs() <= slack {
            return Ok(a);
        }
        if fb.abs() <= slack {
            return Ok(b);
        }
        let newton = self.f.analytic_order() >= 1;
        let mut x = 0.5 * (a + b);
        let mut last = f64::INFINITY;
        for _ in 0..INVERSION_CAP {
            let fx = self.f.eval(x) - y;
            if !fx.is_finite() {
                return Err(FnError::NonFinite { x });
            }
            if fx.abs() <= slack {
                return Ok(x);
            }
            if (fx < 0.0) == (fa < 0.0) {
                a = x;
                fa = fx;
            } else {
                b = x;
            }
            let mid = 0.5 * (a + b);
            if mid <= a || mid >= b {
                // bracket collapsed to adjacent floats
                return Ok(x);
            }
            let mut next = mid;
            // Newton only while it keeps halving the residual
            if newton && fx.abs() < 0.5 * last {
                let d = self.f.analytic(1, x).unwrap_or(0.0);
                let t = x - fx / d;
                if t > a && t < b {
                    next = t;
                }
            }
            last = fx.abs();
            x = next;
        }
        Err(FnError::NoConvergence { iterations: INVERSION_CAP })
    }
}

/// One-shot inversion; checks monotonicity on every call.
pub fn invert_monotone(f: &RealFn, y: f64, tol: f64) -> Result<f64, FnError> {
    MonotoneInverse::new(f)?.invert(y, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fncore::Expr;

    fn iv(a: f64, b: f64) -> Interval {
        Interval::new(a, b).unwrap()
    }

    #[test]
    fn exp_inverse() {
        let f = RealFn::new(iv(-5.0, 5.0), f64::exp);
        let x = invert_monotone(&f, 1.0, 1e-14).unwrap();
        assert!(x.abs() < 1e-13);
    }

    #[test]
    fn cubic_inverse_with_newton() {
        let f = RealFn::from_expr(iv(-3.0, 3.0), Expr::x().powi(3) + Expr::x());
        let x = invert_monotone(&f, 2.0, 1e-14).unwrap();
        assert!((x - 1.0).abs() < 1e-13);
    }

    #[test]
    fn ln_inverse() {
        let f = RealFn::new(iv(0.1, 10.0), f64::ln);
        let x = invert_monotone(&f, 0.0, 1e-14).unwrap();
        assert!((x - 1.0).abs() < 1e-13);
    }

    #[test]
    fn decreasing_function() {
        let f = RealFn::new(iv(0.5, 4.0), |x| -1.0 / x);
        let x = invert_monotone(&f, -0.5, 1e-14).unwrap();
        assert!((x - 2.0).abs() < 1e-12);
        let g = RealFn::new(iv(0.0, 3.0), |x| -x);
        assert!((invert_monotone(&g, -1.2, 1e-14).unwrap() - 1.2).abs() < 1e-13);
    }

    #[test]
    fn out_of_range() {
        let f = RealFn::new(iv(-5.0, 5.0), f64::exp);
        assert!(matches!(invert_monotone(&f, -1.0, 1e-12), Err(FnError::OutOfRange { .. })));
    }

    #[test]
    fn not_monotone() {
        let f = RealFn::new(iv(-1.0, 1.0), |x| x * x);
        assert_eq!(invert_monotone(&f, 0.5, 1e-12), Err(FnError::NotMonotone));
    }

    #[test]
    fn image_of_increasing() {
        let f = RealFn::new(iv(0.0, 1.0), |x| 2.0 * x);
        let im = MonotoneInverse::new(&f).unwrap().image();
        assert!((im.lo() - 2e-6).abs() < 1e-15 && (im.hi() - (2.0 - 2e-6)).abs() < 1e-15);
    }
}
