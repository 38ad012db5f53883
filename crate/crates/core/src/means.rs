//! Matkowski means, the invariance residual, generator composition and the
//! residual of the main equation.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::fncore::{
    linspace, Expr, FnError, Grid, GridSpec, Interval, MonotoneInverse, Monotonicity, RealFn, MONOTONE_SAMPLES,
};

/// Tolerance used for the inverses realized inside composed tuples.
pub const COMPOSE_TOL: f64 = 1e-14;
/// Relative agreement required between `k1(J)` and `k2(J)`.
pub const DOMAIN_MATCH_TOL: f64 = 1e-3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeanError {
    #[error(transparent)]
    Fn(#[from] FnError),
    #[error("generator pair invalid: {0}")]
    InvalidPair(String),
    #[error("domain mismatch: {0}")]
    DomainMismatch(String),
    #[error("grid interval {grid} not inside {domain}")]
    GridOutsideDomain { grid: Interval, domain: Interval },
    #[error("non-finite evaluation at ({x}, {y})")]
    Evaluation { x: f64, y: f64 },
}

/// Generators `(f, g)` on a common domain `J`, strictly monotone in the
/// same sense, with `f + g` strictly monotone.
#[derive(Clone, Debug)]
pub struct GeneratorPair {
    f: RealFn,
    g: RealFn,
    domain: Interval,
    sum_inv: MonotoneInverse,
}

fn sampled_direction(f: &RealFn, domain: Interval) -> Result<bool, MeanError> {
    let (a, b) = domain.sampling_bounds();
    let ys: Vec<f64> = linspace(a, b, MONOTONE_SAMPLES).into_iter().map(|x| f.eval(x)).collect();
    if ys.iter().any(|y| !y.is_finite()) {
        return Err(MeanError::InvalidPair("generator not finite on the domain".into()));
    }
    let up = ys[1] > ys[0];
    if ys.windows(2).all(|w| if up { w[1] > w[0] } else { w[1] < w[0] }) {
        Ok(up)
    } else {
        Err(MeanError::InvalidPair("generator not strictly monotone".into()))
    }
}

impl GeneratorPair {
    pub fn new(f: RealFn, g: RealFn, domain: Interval) -> Result<Self, MeanError> {
        if !f.domain().contains_interval(&domain, 0.0) || !g.domain().contains_interval(&domain, 0.0) {
            return Err(MeanError::InvalidPair("generators not defined on the whole domain".into()));
        }
        let (f, g) = (f.restrict(domain), g.restrict(domain));
        let (df, dg) = (sampled_direction(&f, domain)?, sampled_direction(&g, domain)?);
        if df != dg {
            return Err(MeanError::InvalidPair("generators monotone in opposite senses".into()));
        }
        let sum = f.add(&g).restrict(domain);
        let sum_inv = MonotoneInverse::new(&sum)?;
        Ok(GeneratorPair { f, g, domain, sum_inv })
    }

    /// Quasi-arithmetic pair `(f, f)`.
    pub fn symmetric(f: RealFn, domain: Interval) -> Result<Self, MeanError> {
        GeneratorPair::new(f.clone(), f, domain)
    }

    pub fn f(&self) -> &RealFn {
        &self.f
    }

    pub fn g(&self) -> &RealFn {
        &self.g
    }

    pub fn domain(&self) -> Interval {
        self.domain
    }

    pub fn increasing(&self) -> bool {
        self.sum_inv.increasing()
    }
}

/// `(f+g)^{-1}(f(u) + g(v))`.
pub fn matkowski_eval(p: &GeneratorPair, u: f64, v: f64, tol: f64) -> Result<f64, MeanError> {
    if !p.domain.contains(u) || !p.domain.contains(v) {
        return Err(FnError::OutsideDomain { x: if p.domain.contains(u) { v } else { u } }.into());
    }
    Ok(p.sum_inv.invert(p.f.eval(u) + p.g.eval(v), tol)?)
}

/// Aggregated absolute residual over a product grid.
#[derive(Clone, Debug, Serialize)]
pub struct ResidualReport {
    pub max_abs: f64,
    pub rms: f64,
    pub n_points: usize,
    pub argmax_point: (f64, f64),
    pub grid_spec: GridSpec,
    /// Every `(x, y, residual)` triple in row-major order.
    #[serde(skip)]
    pub points: Vec<(f64, f64, f64)>,
}

impl ResidualReport {
    pub fn from_points(points: Vec<(f64, f64, f64)>, grid_spec: GridSpec) -> Self {
        assert!(!points.is_empty());
        let mut max_abs = 0.0;
        let mut argmax_point = (points[0].0, points[0].1);
        let mut sq = 0.0;
        for &(x, y, r) in &points {
            let a = r.abs();
            sq += a * a;
            if a > max_abs {
                max_abs = a;
                argmax_point = (x, y);
            }
        }
        let rms = (sq / points.len() as f64).sqrt();
        ResidualReport { max_abs, rms, n_points: points.len(), argmax_point, grid_spec, points }
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.max_abs < tol
    }
}

fn check_grid(grid: &Grid, domain: Interval) -> Result<(), MeanError> {
    let p = grid.points();
    if p.iter().all(|&x| domain.contains(x)) {
        Ok(())
    } else {
        Err(MeanError::GridOutsideDomain { grid: grid.interval(), domain })
    }
}

/// `|M(N(u,v), K(u,v)) - M(u,v)|` over `grid x grid`.
pub fn invariance_residual(
    m: &GeneratorPair,
    n: &GeneratorPair,
    k: &GeneratorPair,
    grid: &Grid,
) -> Result<ResidualReport, MeanError> {
    for p in [m, n, k] {
        check_grid(grid, p.domain)?;
    }
    let tol = COMPOSE_TOL;
    let pts = grid.points();
    let mut out = Vec::with_capacity(pts.len() * pts.len());
    for &u in pts {
        for &v in pts {
            let a = matkowski_eval(n, u, v, tol)?;
            let b = matkowski_eval(k, u, v, tol)?;
            let lhs = matkowski_eval(m, a, b, tol)?;
            let rhs = matkowski_eval(m, u, v, tol)?;
            out.push((u, v, lhs - rhs));
        }
    }
    Ok(ResidualReport::from_points(out, grid.spec()))
}

/// The sextuple `(F, f1, f2, G, g1, g2)` with domain `I` and sum domain
/// `g1(I) + g2(I)`.
#[derive(Clone, Debug)]
pub struct SolutionTuple {
    pub big_f: RealFn,
    pub f1: RealFn,
    pub f2: RealFn,
    pub g1: RealFn,
    pub g2: RealFn,
    pub big_g: RealFn,
    pub i: Interval,
    pub sum_domain: Interval,
    /// Family label, derived constants and build choices.
    pub meta: TupleMeta,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct TupleMeta {
    pub label: Option<String>,
    pub derived: BTreeMap<String, f64>,
    pub notes: Vec<String>,
}

impl SolutionTuple {
    /// Members in the order F, f1, f2, g1, g2 (all on `I`).
    pub fn members_on_i(&self) -> [&RealFn; 5] {
        [&self.big_f, &self.f1, &self.f2, &self.g1, &self.g2]
    }

    /// Sampled image of `g1(I) + g2(I)` for monotone `g1`, `g2`.
    pub fn sampled_sum_domain(g1: &RealFn, g2: &RealFn, i: Interval) -> Result<Interval, FnError> {
        let (a, b) = i.sampling_bounds();
        let (p, q) = (g1.eval(a), g1.eval(b));
        let (r, s) = (g2.eval(a), g2.eval(b));
        if ![p, q, r, s].iter().all(|v| v.is_finite()) {
            return Err(FnError::NonFinite { x: a });
        }
        Interval::new(p.min(q) + r.min(s), p.max(q) + r.max(s))
    }

    /// Copy of the tuple with `G` replaced.
    pub fn with_g(&self, big_g: RealFn) -> SolutionTuple {
        let mut t = self.clone();
        t.big_g = big_g;
        t
    }
}

/// Solution tuple induced by three generator pairs:
/// `F = -m2 o ((k1+k2)/2)^{-1}`, `fk = mk o kk^{-1}`,
/// `G = m1 o (n1+n2)^{-1}`, `gk = nk o kk^{-1}`.
pub fn compose_generators(
    m: &GeneratorPair,
    n: &GeneratorPair,
    k: &GeneratorPair,
    tol: f64,
) -> Result<SolutionTuple, MeanError> {
    let j = m.domain;
    for p in [n, k] {
        let d = p.domain;
        let s = 1e-12 * (1.0 + j.lo().abs().max(j.hi().abs()));
        if (d.lo() - j.lo()).abs() > s || (d.hi() - j.hi()).abs() > s {
            return Err(MeanError::DomainMismatch(format!("generator domains {j} and {d} differ")));
        }
    }
    let k1 = Arc::new(MonotoneInverse::new(&k.f)?);
    let k2 = Arc::new(MonotoneInverse::new(&k.g)?);
    let (im1, im2) = (k1.image(), k2.image());
    let close = |a: f64, b: f64| (a - b).abs() <= DOMAIN_MATCH_TOL * 1f64.max(a.abs()).max(b.abs());
    if !close(im1.lo(), im2.lo()) || !close(im1.hi(), im2.hi()) {
        return Err(MeanError::DomainMismatch(format!("k1(J) = {im1}, k2(J) = {im2}")));
    }
    let i = im1.intersect(&im2).map_err(|_| MeanError::DomainMismatch("empty image intersection".into()))?;

    let ksum = Arc::new(MonotoneInverse::new(&k.f.add(&k.g).restrict(j))?);
    let nsum = Arc::new(MonotoneInverse::new(&n.f.add(&n.g).restrict(j))?);

    let lazy = |outer: &RealFn, inv: &Arc<MonotoneInverse>, scale: f64, sign: f64, dom: Interval| {
        let (outer, inv) = (outer.clone(), inv.clone());
        RealFn::new(dom, move |x| match inv.invert(scale * x, tol) {
            Ok(t) => sign * outer.eval(t),
            Err(_) => f64::NAN,
        })
    };
    let big_f = lazy(&m.g, &ksum, 2.0, -1.0, i);
    let f1 = lazy(&m.f, &k1, 1.0, 1.0, i);
    let f2 = lazy(&m.g, &k2, 1.0, 1.0, i);
    let g1 = lazy(&n.f, &k1, 1.0, 1.0, i);
    let g2 = lazy(&n.g, &k2, 1.0, 1.0, i);
    let big_g = lazy(&m.f, &nsum, 1.0, 1.0, nsum.image());
    let dir = if n.increasing() == k.increasing() { Monotonicity::Increasing } else { Monotonicity::Decreasing };
    let (g1, g2) = (g1.with_monotonicity(dir), g2.with_monotonicity(dir));
    let sum_domain = SolutionTuple::sampled_sum_domain(&g1, &g2, i)?;
    Ok(SolutionTuple {
        big_f,
        f1,
        f2,
        g1,
        g2,
        big_g,
        i,
        sum_domain,
        meta: TupleMeta { label: Some("composed".into()), ..Default::default() },
    })
}

/// `|F((x+y)/2) + f1(x) + f2(y) - G(g1(x) + g2(y))|` over `grid x grid`.
pub fn eq1_residual(t: &SolutionTuple, grid: &Grid) -> Result<ResidualReport, MeanError> {
    check_grid(grid, t.i)?;
    let pts = grid.points();
    let n = pts.len();
    let f1: Vec<f64> = pts.iter().map(|&x| t.f1.eval(x)).collect();
    let f2: Vec<f64> = pts.iter().map(|&x| t.f2.eval(x)).collect();
    let g1: Vec<f64> = pts.iter().map(|&x| t.g1.eval(x)).collect();
    let g2: Vec<f64> = pts.iter().map(|&x| t.g2.eval(x)).collect();
    // F at midpoints is symmetric in (i, j)
    let mut mid = vec![0.0; n * n];
    for a in 0..n {
        for b in a..n {
            let v = t.big_f.eval(0.5 * (pts[a] + pts[b]));
            mid[a * n + b] = v;
            mid[b * n + a] = v;
        }
    }
    let mut out = Vec::with_capacity(n * n);
    for a in 0..n {
        for b in 0..n {
            let lhs = mid[a * n + b] + f1[a] + f2[b];
            let rhs = t.big_g.eval(g1[a] + g2[b]);
            let r = lhs - rhs;
            if !r.is_finite() {
                return Err(MeanError::Evaluation { x: pts[a], y: pts[b] });
            }
            out.push((pts[a], pts[b], r));
        }
    }
    Ok(ResidualReport::from_points(out, grid.spec()))
}

/// Named generators for fixtures and the command line.
pub fn catalog_generator(name: &str) -> Option<Expr> {
    let x = Expr::x();
    Some(match name {
        "id" => x,
        "ln" => x.ln(),
        "neg_reciprocal" => -x.recip(),
        "exp" => x.exp(),
        "neg_exp" => -(-x).exp(),
        "square" => x.powi(2),
        "cube" => x.powi(3),
        "sqrt" => x.sqrt(),
        "atan" => x.atan(),
        "sinh" => x.sinh(),
        "tanh" => x.tanh(),
        _ => return None,
    })
}

pub const CATALOG_GENERATORS: [&str; 11] =
    ["id", "ln", "neg_reciprocal", "exp", "neg_exp", "square", "cube", "sqrt", "atan", "sinh", "tanh"];

/// The classical fixture: geometric mean, arithmetic mean, harmonic mean.
pub fn classical_triple(domain: Interval) -> Result<(GeneratorPair, GeneratorPair, GeneratorPair), MeanError> {
    let pair = |name: &str| {
        let e = catalog_generator(name).unwrap();
        GeneratorPair::symmetric(RealFn::from_expr(domain, e), domain)
    };
    Ok((pair("ln")?, pair("id")?, pair("neg_reciprocal")?))
}
