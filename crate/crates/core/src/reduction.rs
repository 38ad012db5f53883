//! Reduction of a solution tuple to the derivative system
//! `(phi, psi1, psi2, Psi1, Psi2)` and reconstruction from it.
//!
//! With `phi = F'/2`, `psi_k = 1/g1' + (-1)^k / g2'` and
//! `Psi_k = -f1'/g1' + (-1)^(k-1) f2'/g2'` every regular solution satisfies
//!
//! ```text
//! phi((x+y)/2) (psi1(x) + psi1(y)) = Psi1(x) + Psi1(y)
//! phi((x+y)/2) (psi2(x) - psi2(y)) = Psi2(x) - Psi2(y)
//! ```

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fncore::{derive_num, linspace, FnError, Grid, Interval, Monotonicity, RealFn, ScalarFn};
use crate::means::{ResidualReport, SolutionTuple, TupleMeta};

/// Smallest sampled `|g_k'|` accepted as regular.
pub const REGULARITY_FLOOR: f64 = 1e-8;
/// Absolute tolerance of the adaptive Simpson rule.
pub const QUAD_TOL: f64 = 1e-10;
/// Points per axis of the `G` tabulation.
pub const G_TABLE_N: usize = 200;
/// `u` values closer than this are merged.
pub const G_DEDUP: f64 = 1e-9;
/// Merged `G` values differing by more than this are a conflict.
pub const G_CONFLICT: f64 = 1e-6;

const REGULARITY_SAMPLES: usize = 64;
const CHECKPOINTS: usize = 65;
const MAX_DEPTH: usize = 50;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ReductionError {
    #[error("g{k}' vanishes at x = {x} (value {value:e})")]
    VanishingDerivative { k: usize, x: f64, value: f64 },
    #[error("quadrature failed on [{a}, {b}]")]
    QuadratureFailure { a: f64, b: f64 },
    #[error("tabulated G is not a function: values at u = {u} differ by {spread:e}")]
    NonFunctionG { u: f64, spread: f64 },
    #[error("anchor x0 = {0} outside the interval")]
    AnchorOutside(f64),
    #[error(transparent)]
    Fn(#[from] FnError),
}

/// `(phi, psi1, psi2, Psi1, Psi2)` on `I`.
#[derive(Clone, Debug)]
pub struct ReducedSystem {
    pub phi: RealFn,
    pub psi1: RealFn,
    pub psi2: RealFn,
    pub big_psi1: RealFn,
    pub big_psi2: RealFn,
    pub i: Interval,
}

fn deriv(f: &RealFn, order: usize) -> impl Fn(f64) -> f64 + Send + Sync + 'static {
    let f = f.clone();
    move |x| derive_num(&f, x, order).unwrap_or(f64::NAN)
}

/// Build the derivative system of `t`, checking regularity on 64 samples.
pub fn derive_system(t: &SolutionTuple) -> Result<ReducedSystem, ReductionError> {
    let i = t.i;
    let (a, b) = i.sampling_bounds();
    for (k, g) in [(1, &t.g1), (2, &t.g2)] {
        for x in linspace(a, b, REGULARITY_SAMPLES) {
            let v = derive_num(g, x, 1)?;
            if !(v.abs() >= REGULARITY_FLOOR) {
                return Err(ReductionError::VanishingDerivative { k, x, value: v });
            }
        }
    }
    // phi keeps whatever analytic derivatives F has beyond the first
    let big_f = t.big_f.clone();
    let half = |d: ScalarFn| -> ScalarFn { Arc::new(move |x| 0.5 * d(x)) };
    let phi_derivs: Vec<ScalarFn> =
        (2..=big_f.analytic_order()).map(|k| half(Arc::new(deriv(&big_f, k)))).collect();
    let phi = RealFn::new(i, {
        let d = deriv(&big_f, 1);
        move |x| 0.5 * d(x)
    })
    .with_derivatives(phi_derivs);

    let (f1, f2, g1, g2) = (deriv(&t.f1, 1), deriv(&t.f2, 1), deriv(&t.g1, 1), deriv(&t.g2, 1));
    let parts = Arc::new(move |x: f64| (f1(x), f2(x), g1(x), g2(x)));
    let mk = |h: fn((f64, f64, f64, f64)) -> f64| {
        let p = parts.clone();
        RealFn::new(i, move |x| h(p(x)))
    };
    Ok(ReducedSystem {
        phi,
        psi1: mk(|(_, _, a, b)| 1.0 / a - 1.0 / b),
        psi2: mk(|(_, _, a, b)| 1.0 / a + 1.0 / b),
        big_psi1: mk(|(f, g, a, b)| -f / a + g / b),
        big_psi2: mk(|(f, g, a, b)| -f / a - g / b),
        i,
    })
}

/// Residuals of the plus and the minus equation over `grid x grid`.
pub fn system_residual(s: &ReducedSystem, grid: &Grid) -> Result<(ResidualReport, ResidualReport), ReductionError> {
    let pts = grid.points();
    if let Some(&x) = pts.iter().find(|&&x| !s.i.contains(x)) {
        return Err(FnError::OutsideDomain { x }.into());
    }
    let ev = |f: &RealFn| -> Vec<f64> { pts.iter().map(|&x| f.eval(x)).collect() };
    let (p1, p2, q1, q2) = (ev(&s.psi1), ev(&s.psi2), ev(&s.big_psi1), ev(&s.big_psi2));
    let n = pts.len();
    let mut plus = Vec::with_capacity(n * n);
    let mut minus = Vec::with_capacity(n * n);
    for a in 0..n {
        for b in 0..n {
            let phi = s.phi.eval(0.5 * (pts[a] + pts[b]));
            let (x, y) = (pts[a], pts[b]);
            plus.push((x, y, phi * (p1[a] + p1[b]) - (q1[a] + q1[b])));
            minus.push((x, y, phi * (p2[a] - p2[b]) - (q2[a] - q2[b])));
        }
    }
    for &(x, y, r) in plus.iter().chain(&minus) {
        if !r.is_finite() {
            return Err(FnError::NonFinite { x: if x.is_finite() { x } else { y } }.into());
        }
    }
    let spec = grid.spec();
    Ok((ResidualReport::from_points(plus, spec.clone()), ResidualReport::from_points(minus, spec)))
}

/// Base point and member values there; they fix the additive gauges.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Anchors {
    pub x0: f64,
    pub big_f0: f64,
    pub f10: f64,
    pub f20: f64,
    pub g10: f64,
    pub g20: f64,
}

impl Anchors {
    /// Midpoint of `i` with all values 0.
    pub fn zero(i: Interval) -> Self {
        Anchors { x0: i.midpoint(), big_f0: 0.0, f10: 0.0, f20: 0.0, g10: 0.0, g20: 0.0 }
    }
}

/// Anchors matching `t` at `x0`.
pub fn anchors_from(t: &SolutionTuple, x0: f64) -> Anchors {
    Anchors {
        x0,
        big_f0: t.big_f.eval(x0),
        f10: t.f1.eval(x0),
        f20: t.f2.eval(x0),
        g10: t.g1.eval(x0),
        g20: t.g2.eval(x0),
    }
}

fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> Result<f64, ReductionError> {
    fn rec(
        f: &dyn Fn(f64) -> f64,
        (a, fa): (f64, f64),
        (m, fm): (f64, f64),
        (b, fb): (f64, f64),
        whole: f64,
        tol: f64,
        depth: usize,
    ) -> Result<f64, ReductionError> {
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        if !flm.is_finite() || !frm.is_finite() {
            return Err(ReductionError::QuadratureFailure { a, b });
        }
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if delta.abs() <= 15.0 * tol {
            return Ok(left + right + delta / 15.0);
        }
        if depth == 0 {
            return Err(ReductionError::QuadratureFailure { a, b });
        }
        Ok(rec(f, (a, fa), (lm, flm), (m, fm), left, 0.5 * tol, depth - 1)?
            + rec(f, (m, fm), (rm, frm), (b, fb), right, 0.5 * tol, depth - 1)?)
    }
    if a == b {
        return Ok(0.0);
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    if !fa.is_finite() || !fm.is_finite() || !fb.is_finite() {
        return Err(ReductionError::QuadratureFailure { a, b });
    }
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, (a, fa), (m, fm), (b, fb), whole, QUAD_TOL, MAX_DEPTH)
}

/// `v0 + int_{x0}^x d`, evaluated from the nearest of a set of
/// precomputed checkpoints.
struct Primitive {
    d: ScalarFn,
    xs: Vec<f64>,
    vs: Vec<f64>,
}

impl Primitive {
    fn new(d: ScalarFn, i: Interval, x0: f64, v0: f64) -> Result<Self, ReductionError> {
        let (a, b) = i.sampling_bounds();
        let mut xs = linspace(a, b, CHECKPOINTS);
        xs.push(x0);
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        let k0 = xs.iter().position(|&x| x == x0).unwrap();
        let mut vs = vec![0.0; xs.len()];
        vs[k0] = v0;
        for k in k0 + 1..xs.len() {
            vs[k] = vs[k - 1] + simpson(&*d, xs[k - 1], xs[k])?;
        }
        for k in (0..k0).rev() {
            vs[k] = vs[k + 1] - simpson(&*d, xs[k], xs[k + 1])?;
        }
        Ok(Primitive { d, xs, vs })
    }

    fn eval(&self, x: f64) -> Result<f64, ReductionError> {
        let k = self.xs.partition_point(|&c| c <= x);
        let k = if k == 0 {
            0
        } else if k == self.xs.len() || x - self.xs[k - 1] <= self.xs[k] - x {
            k - 1
        } else {
            k
        };
        Ok(self.vs[k] + simpson(&*self.d, self.xs[k], x)?)
    }

    fn into_fn(self, i: Interval) -> RealFn {
        let d = self.d.clone();
        let p = Arc::new(self);
        RealFn::new(i, move |x| p.eval(x).unwrap_or(f64::NAN)).with_derivatives(vec![d])
    }
}

/// Monotone piecewise-cubic (Fritsch-Carlson) interpolant.
#[derive(Clone, Debug)]
pub struct Pchip {
    xs: Vec<f64>,
    ys: Vec<f64>,
    ds: Vec<f64>,
}

impl Pchip {
    /// `xs` strictly increasing, at least two points.
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Self {
        let n = xs.len();
        assert!(n >= 2 && ys.len() == n);
        let h: Vec<f64> = xs.windows(2).map(|w| w[1] - w[0]).collect();
        let del: Vec<f64> = (0..n - 1).map(|k| (ys[k + 1] - ys[k]) / h[k]).collect();
        let mut ds = vec![0.0; n];
        if n == 2 {
            ds = vec![del[0]; 2];
        } else {
            for k in 1..n - 1 {
                if del[k - 1] * del[k] > 0.0 {
                    let (w1, w2) = (2.0 * h[k] + h[k - 1], h[k] + 2.0 * h[k - 1]);
                    ds[k] = (w1 + w2) / (w1 / del[k - 1] + w2 / del[k]);
                }
            }
            let end = |h0: f64, h1: f64, d0: f64, d1: f64| {
                let d = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
                if d * d0 <= 0.0 {
                    0.0
                } else if d0 * d1 <= 0.0 && d.abs() > 3.0 * d0.abs() {
                    3.0 * d0
                } else {
                    d
                }
            };
            ds[0] = end(h[0], h[1], del[0], del[1]);
            ds[n - 1] = end(h[n - 2], h[n - 3], del[n - 2], del[n - 3]);
        }
        Pchip { xs, ys, ds }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        let k = self.xs.partition_point(|&c| c <= x).clamp(1, n - 1) - 1;
        let h = self.xs[k + 1] - self.xs[k];
        let t = (x - self.xs[k]) / h;
        let (t2, t3) = (t * t, t * t * t);
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * self.ys[k] + h10 * h * self.ds[k] + h01 * self.ys[k + 1] + h11 * h * self.ds[k + 1]
    }
}

/// Recover the tuple from `s` by integrating
/// `F' = 2 phi`, `g_j' = 2/(psi2 +- psi1)`, `f_j' = -(Psi2 +- Psi1)/(psi2 +- psi1)`
/// from the anchors, then tabulating `G` over a 200x200 grid.
pub fn reconstruct_tuple(s: &ReducedSystem, anchors: &Anchors) -> Result<SolutionTuple, ReductionError> {
    let i = s.i;
    let (a, b) = i.sampling_bounds();
    if !(anchors.x0 >= a && anchors.x0 <= b) {
        return Err(ReductionError::AnchorOutside(anchors.x0));
    }
    let (phi, p1, p2, q1, q2) = (s.phi.clone(), s.psi1.clone(), s.psi2.clone(), s.big_psi1.clone(), s.big_psi2.clone());
    let df: ScalarFn = Arc::new(move |x| 2.0 * phi.eval(x));
    let dg = |sg: f64| -> ScalarFn {
        let (p1, p2) = (p1.clone(), p2.clone());
        Arc::new(move |x| 2.0 / (p2.eval(x) + sg * p1.eval(x)))
    };
    let dfj = |sg: f64| -> ScalarFn {
        let (p1, p2, q1, q2) = (p1.clone(), p2.clone(), q1.clone(), q2.clone());
        Arc::new(move |x| -(q2.eval(x) + sg * q1.eval(x)) / (p2.eval(x) + sg * p1.eval(x)))
    };
    let x0 = anchors.x0;
    let big_f = Primitive::new(df, i, x0, anchors.big_f0)?;
    let f1 = Primitive::new(dfj(1.0), i, x0, anchors.f10)?;
    let f2 = Primitive::new(dfj(-1.0), i, x0, anchors.f20)?;
    let g1 = Primitive::new(dg(1.0), i, x0, anchors.g10)?;
    let g2 = Primitive::new(dg(-1.0), i, x0, anchors.g20)?;

    // uniform points, so the midpoints fall on the half-step grid
    let xs = linspace(a, b, G_TABLE_N);
    let tab = |p: &Primitive, pts: &[f64]| pts.iter().map(|&x| p.eval(x)).collect::<Result<Vec<_>, _>>();
    let mids: Vec<f64> = (0..2 * G_TABLE_N - 1)
        .map(|k| if k % 2 == 0 { xs[k / 2] } else { 0.5 * (xs[k / 2] + xs[k / 2 + 1]) })
        .collect();
    let fm = tab(&big_f, &mids)?;
    let (v1, v2, w1, w2) = (tab(&f1, &xs)?, tab(&f2, &xs)?, tab(&g1, &xs)?, tab(&g2, &xs)?);
    let mut pairs = Vec::with_capacity(G_TABLE_N * G_TABLE_N);
    for p in 0..G_TABLE_N {
        for q in 0..G_TABLE_N {
            pairs.push((w1[p] + w2[q], fm[p + q] + v1[p] + v2[q]));
        }
    }
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut us: Vec<f64> = Vec::new();
    let mut gs: Vec<f64> = Vec::new();
    let mut group: Vec<(f64, f64)> = Vec::new();
    let mut flush = |group: &mut Vec<(f64, f64)>| -> Result<(), ReductionError> {
        let (lo, hi) = group.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &(_, g)| (l.min(g), h.max(g)));
        if hi - lo > G_CONFLICT {
            return Err(ReductionError::NonFunctionG { u: group[0].0, spread: hi - lo });
        }
        let n = group.len() as f64;
        us.push(group.iter().map(|p| p.0).sum::<f64>() / n);
        gs.push(group.iter().map(|p| p.1).sum::<f64>() / n);
        group.clear();
        Ok(())
    };
    for pr in pairs {
        if let Some(&(u0, _)) = group.first() {
            if pr.0 - u0 > G_DEDUP {
                flush(&mut group)?;
            }
        }
        group.push(pr);
    }
    flush(&mut group)?;
    if us.len() < 2 {
        return Err(ReductionError::NonFunctionG { u: us[0], spread: 0.0 });
    }
    let sum_domain = Interval::new(us[0], *us.last().unwrap())?;
    let pchip = Arc::new(Pchip::new(us, gs));
    let big_g = RealFn::new(sum_domain, move |u| pchip.eval(u));

    let mono = |f: RealFn| {
        let up = f.analytic(1, i.midpoint()).unwrap_or(0.0) > 0.0;
        f.with_monotonicity(if up { Monotonicity::Increasing } else { Monotonicity::Decreasing })
    };
    Ok(SolutionTuple {
        big_f: big_f.into_fn(i),
        f1: f1.into_fn(i),
        f2: f2.into_fn(i),
        g1: mono(g1.into_fn(i)),
        g2: mono(g2.into_fn(i)),
        big_g,
        i,
        sum_domain,
        meta: TupleMeta { label: Some("reconstructed".into()), ..Default::default() },
    })
}

/// Sup-distance between the members of two tuples on `grid` (and of `G`
/// on the images of the grid diagonal inside both sum domains).
pub fn tuple_distance(a: &SolutionTuple, b: &SolutionTuple, grid: &Grid) -> f64 {
    let mut worst: f64 = 0.0;
    for &x in grid.points() {
        for (f, g) in a.members_on_i().into_iter().zip(b.members_on_i()) {
            let d = (f.eval(x) - g.eval(x)).abs();
            worst = if d.is_nan() { f64::INFINITY } else { worst.max(d) };
        }
        let u = a.g1.eval(x) + a.g2.eval(x);
        if a.sum_domain.contains(u) && b.sum_domain.contains(u) {
            let d = (a.big_g.eval(u) - b.big_g.eval(u)).abs();
            worst = if d.is_nan() { f64::INFINITY } else { worst.max(d) };
        }
    }
    worst
}
