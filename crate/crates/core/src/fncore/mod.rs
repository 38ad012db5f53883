//! Numeric substrate: intervals, scalar functions, grids, inversion,
//! finite differences and the Schwarzian derivative.

mod diff;
mod expr;
mod invert;
mod safe;

use std::fmt;
use std::sync::Arc;

use num_dual::Dual3_64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use diff::{derive_num, schwarzian_num, SCHWARZIAN_FLOOR};
pub use expr::{Expr, Op};
pub use invert::{invert_monotone, MonotoneInverse, INVERSION_CAP, MONOTONE_SAMPLES};
pub use safe::{safe_subinterval, safe_subinterval_with_guards};

/// Sampling bound used in place of an infinite endpoint.
pub const INFINITY_CLAMP: f64 = 1e8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FnError {
    #[error("invalid interval ]{lo}, {hi}[")]
    InvalidInterval { lo: f64, hi: f64 },
    #[error("value {y} outside sampled image [{lo}, {hi}]")]
    OutOfRange { y: f64, lo: f64, hi: f64 },
    #[error("function is not strictly monotone on its domain")]
    NotMonotone,
    #[error("no convergence after {iterations} iterations")]
    NoConvergence { iterations: usize },
    #[error("point {x} too close to the domain boundary for step {h}")]
    TooCloseToBoundary { x: f64, h: f64 },
    #[error("first derivative {value} at {x} below floor")]
    VanishingFirstDerivative { x: f64, value: f64 },
    #[error("function not finite at seed {seed}")]
    SeedInvalid { seed: f64 },
    #[error("non-finite value at {x}")]
    NonFinite { x: f64 },
    #[error("point {x} outside domain")]
    OutsideDomain { x: f64 },
    #[error("derivative order {0} not supported")]
    BadOrder(usize),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
}

/// Open interval `]lo, hi[`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 2]", into = "[f64; 2]")]
pub struct Interval {
    lo: f64,
    hi: f64,
}

impl TryFrom<[f64; 2]> for Interval {
    type Error = FnError;
    fn try_from(v: [f64; 2]) -> Result<Self, FnError> {
        Interval::new(v[0], v[1])
    }
}

impl From<Interval> for [f64; 2] {
    fn from(i: Interval) -> [f64; 2] {
        [i.lo, i.hi]
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "]{}, {}[", self.lo, self.hi)
    }
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self, FnError> {
        if lo.is_nan() || hi.is_nan() || lo >= hi || lo == f64::INFINITY || hi == f64::NEG_INFINITY {
            return Err(FnError::InvalidInterval { lo, hi });
        }
        Ok(Interval { lo, hi })
    }

    pub fn real_line() -> Self {
        Interval { lo: f64::NEG_INFINITY, hi: f64::INFINITY }
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn is_bounded(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        x > self.lo && x < self.hi
    }

    /// Margin kept away from the endpoints when sampling.
    pub fn margin(&self) -> f64 {
        if self.is_bounded() {
            1e-6 * self.width()
        } else {
            1e-6
        }
    }

    /// Closed sampling window `[lo+eps, hi-eps]` with infinite ends clamped.
    pub fn sampling_bounds(&self) -> (f64, f64) {
        let eps = self.margin();
        let lo = self.lo.max(-INFINITY_CLAMP);
        let hi = self.hi.min(INFINITY_CLAMP);
        (lo + eps, hi - eps)
    }

    pub fn midpoint(&self) -> f64 {
        let (a, b) = self.sampling_bounds();
        0.5 * (a + b)
    }

    /// `other ⊆ self`, allowing `slack` at each end.
    pub fn contains_interval(&self, other: &Interval, slack: f64) -> bool {
        other.lo >= self.lo - slack && other.hi <= self.hi + slack
    }

    pub fn intersect(&self, other: &Interval) -> Result<Interval, FnError> {
        Interval::new(self.lo.max(other.lo), self.hi.min(other.hi))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Monotonicity {
    Increasing,
    Decreasing,
    Unknown,
}

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Scalar function on an open interval, optionally with analytic
/// derivatives of order 1, 2, 3 (in that order).
#[derive(Clone)]
pub struct RealFn {
    domain: Interval,
    eval: ScalarFn,
    derivs: Vec<ScalarFn>,
    monotonicity: Monotonicity,
    expr: Option<Expr>,
}

impl fmt::Debug for RealFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RealFn")
            .field("domain", &self.domain)
            .field("analytic_order", &self.derivs.len())
            .field("monotonicity", &self.monotonicity)
            .field("expr", &self.expr.as_ref().map(|e| e.to_string()))
            .finish()
    }
}

impl RealFn {
    pub fn new(domain: Interval, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        RealFn {
            domain,
            eval: Arc::new(f),
            derivs: Vec::new(),
            monotonicity: Monotonicity::Unknown,
            expr: None,
        }
    }

    /// Function with exact derivatives up to third order, computed by
    /// forward-mode dual numbers over `expr`.
    pub fn from_expr(domain: Interval, expr: Expr) -> Self {
        let e0 = expr.clone();
        let eval: ScalarFn = Arc::new(move |x| e0.value(x));
        let derivs: Vec<ScalarFn> = (1..=3)
            .map(|k| {
                let e = expr.clone();
                let d: ScalarFn = Arc::new(move |x| {
                    let j = e.eval(Dual3_64::new(x, 1.0, 0.0, 0.0));
                    match k {
                        1 => j.v1,
                        2 => j.v2,
                        _ => j.v3,
                    }
                });
                d
            })
            .collect();
        RealFn { domain, eval, derivs, monotonicity: Monotonicity::Unknown, expr: Some(expr) }
    }

    pub fn with_derivatives(mut self, derivs: Vec<ScalarFn>) -> Self {
        assert!(derivs.len() <= 3, "at most three analytic derivatives");
        self.derivs = derivs;
        self
    }

    pub fn with_monotonicity(mut self, m: Monotonicity) -> Self {
        self.monotonicity = m;
        self
    }

    /// Same function on a different domain.
    pub fn restrict(&self, domain: Interval) -> Self {
        let mut r = self.clone();
        r.domain = domain;
        r
    }

    pub fn domain(&self) -> Interval {
        self.domain
    }

    pub fn eval(&self, x: f64) -> f64 {
        (self.eval)(x)
    }

    pub fn monotonicity(&self) -> Monotonicity {
        self.monotonicity
    }

    pub fn expr(&self) -> Option<&Expr> {
        self.expr.as_ref()
    }

    /// Number of analytic derivatives available.
    pub fn analytic_order(&self) -> usize {
        self.derivs.len()
    }

    pub fn analytic(&self, order: usize, x: f64) -> Option<f64> {
        if order == 0 {
            return Some(self.eval(x));
        }
        self.derivs.get(order - 1).map(|d| d(x))
    }

    /// Strip analytic derivatives (forces finite differences).
    pub fn without_derivatives(&self) -> Self {
        let mut r = self.clone();
        r.derivs.clear();
        r
    }

    pub(crate) fn deriv_fn(&self, order: usize) -> ScalarFn {
        if order == 0 {
            self.eval.clone()
        } else {
            self.derivs[order - 1].clone()
        }
    }

    /// Pointwise sum; analytic derivatives are kept up to the shorter list.
    pub fn add(&self, other: &RealFn) -> RealFn {
        let domain = self.domain.intersect(&other.domain).unwrap_or(self.domain);
        if let (Some(a), Some(b)) = (&self.expr, &other.expr) {
            return RealFn::from_expr(domain, a.clone() + b);
        }
        let (f, g) = (self.eval.clone(), other.eval.clone());
        let n = self.derivs.len().min(other.derivs.len());
        let derivs = (0..n)
            .map(|k| {
                let (a, b) = (self.derivs[k].clone(), other.derivs[k].clone());
                let d: ScalarFn = Arc::new(move |x| a(x) + b(x));
                d
            })
            .collect();
        RealFn::new(domain, move |x| f(x) + g(x)).with_derivatives(derivs)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GridKind {
    Chebyshev,
    Uniform,
    Custom,
}

/// Serializable description of a grid.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GridSpec {
    pub kind: GridKind,
    pub n: usize,
    pub lo: f64,
    pub hi: f64,
}

/// Strictly increasing sample points inside `]lo+margin, hi-margin[`.
#[derive(Clone, Debug)]
pub struct Grid {
    interval: Interval,
    points: Vec<f64>,
    margin: f64,
    kind: GridKind,
}

impl Grid {
    /// Chebyshev nodes of the first kind, clustered near both ends.
    pub fn chebyshev(interval: Interval, n: usize) -> Result<Grid, FnError> {
        if n == 0 {
            return Err(FnError::InvalidGrid("need at least one point".into()));
        }
        let (a, b) = interval.sampling_bounds();
        let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
        let mut points: Vec<f64> = (0..n)
            .map(|j| {
                let t = ((2 * j + 1) as f64 * std::f64::consts::PI / (2 * n) as f64).cos();
                mid - half * t
            })
            .collect();
        points.dedup();
        Ok(Grid { interval, points, margin: interval.margin(), kind: GridKind::Chebyshev })
    }

    /// Evenly spaced points including both ends of the sampling window.
    pub fn uniform(interval: Interval, n: usize) -> Result<Grid, FnError> {
        if n < 2 {
            return Err(FnError::InvalidGrid("need at least two points".into()));
        }
        let (a, b) = interval.sampling_bounds();
        let h = (b - a) / (n - 1) as f64;
        let points = (0..n).map(|i| if i == n - 1 { b } else { a + h * i as f64 }).collect();
        Ok(Grid { interval, points, margin: interval.margin(), kind: GridKind::Uniform })
    }

    pub fn from_points(interval: Interval, points: Vec<f64>) -> Result<Grid, FnError> {
        let margin = interval.margin();
        if points.is_empty() {
            return Err(FnError::InvalidGrid("empty point list".into()));
        }
        if points.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(FnError::InvalidGrid("points not strictly increasing".into()));
        }
        let (a, b) = interval.sampling_bounds();
        if points[0] < a || *points.last().unwrap() > b {
            return Err(FnError::InvalidGrid("points outside the sampling window".into()));
        }
        Ok(Grid { interval, points, margin, kind: GridKind::Custom })
    }

    pub fn interval(&self) -> Interval {
        self.interval
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn margin(&self) -> f64 {
        self.margin
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn spec(&self) -> GridSpec {
        GridSpec { kind: self.kind, n: self.points.len(), lo: self.interval.lo, hi: self.interval.hi }
    }
}

pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    let h = (b - a) / (n - 1) as f64;
    (0..n).map(|i| if i == n - 1 { b } else { a + h * i as f64 }).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interval_rejects_empty() {
        assert!(Interval::new(1.0, 1.0).is_err());
        assert!(Interval::new(2.0, 1.0).is_err());
        assert!(Interval::new(f64::NAN, 1.0).is_err());
        assert!(Interval::new(f64::NEG_INFINITY, 0.0).is_ok());
    }

    #[test]
    fn margins() {
        let i = Interval::new(0.0, 2.0).unwrap();
        assert_eq!(i.margin(), 2e-6);
        let r = Interval::real_line();
        assert_eq!(r.margin(), 1e-6);
        let (a, b) = r.sampling_bounds();
        assert_eq!(a, -1e8 + 1e-6);
        assert_eq!(b, 1e8 - 1e-6);
    }

    #[test]
    fn interval_json_is_a_pair() {
        let i = Interval::new(-1.0, 0.5).unwrap();
        assert_eq!(serde_json::to_string(&i).unwrap(), "[-1.0,0.5]");
        let j: Interval = serde_json::from_str("[0.5, 4]").unwrap();
        assert_eq!(j, Interval::new(0.5, 4.0).unwrap());
        assert!(serde_json::from_str::<Interval>("[4, 0.5]").is_err());
    }

    #[test]
    fn chebyshev_grid_inside_margins() {
        let i = Interval::new(0.5, 4.0).unwrap();
        let g = Grid::chebyshev(i, 50).unwrap();
        assert_eq!(g.len(), 50);
        let p = g.points();
        assert!(p.windows(2).all(|w| w[1] > w[0]));
        assert!(p[0] > 0.5 + g.margin() && p[49] < 4.0 - g.margin());
        // clustering: first gap smaller than a middle gap
        assert!(p[1] - p[0] < p[25] - p[24]);
    }

    #[test]
    fn uniform_grid_endpoints() {
        let i = Interval::new(0.0, 1.0).unwrap();
        let g = Grid::uniform(i, 11).unwrap();
        assert_eq!(g.points()[0], 1e-6);
        assert_eq!(g.points()[10], 1.0 - 1e-6);
    }

    #[test]
    fn from_expr_has_three_derivatives() {
        let f = RealFn::from_expr(Interval::new(0.0, 3.0).unwrap(), Expr::x().powi(3));
        assert_eq!(f.analytic_order(), 3);
        assert_eq!(f.analytic(1, 2.0), Some(12.0));
        assert_eq!(f.analytic(2, 2.0), Some(12.0));
        assert_eq!(f.analytic(3, 2.0), Some(6.0));
    }

    #[test]
    fn sum_keeps_expressions() {
        let i = Interval::new(0.1, 3.0).unwrap();
        let f = RealFn::from_expr(i, Expr::x().ln());
        let g = RealFn::from_expr(i, Expr::x());
        let s = f.add(&g);
        assert_eq!(s.analytic_order(), 3);
        assert!((s.analytic(1, 2.0).unwrap() - 1.5).abs() < 1e-15);
    }
}
