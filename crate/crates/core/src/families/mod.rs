//! Constructors for the 18 closed-form solution families, parameter
//! validation and safe-domain computation.

mod catalog;
mod forms;
pub mod sampling;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fncore::{
    derive_num, safe_subinterval_with_guards, FnError, Grid, Interval, Monotonicity, RealFn,
};
use crate::means::{eq1_residual, MeanError, SolutionTuple, TupleMeta};

pub use catalog::{catalog_f, catalog_g_pair, F_CATALOG, G_PAIR_CATALOG};
pub use forms::FamilyForms;

/// Absolute tolerance for equality constraints.
pub const EQ_TOL: f64 = 1e-12;
/// Tolerance for `beta1 + beta2 - beta` in `pi Z`.
pub const PI_Z_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FamilyTag {
    #[serde(rename = "Main1_AffineF")]
    Main1AffineF,
    #[serde(rename = "Main1_AffineG")]
    Main1AffineG,
    T1,
    T2,
    T3,
    #[serde(rename = "P1_1")]
    P1_1,
    #[serde(rename = "P1_2")]
    P1_2,
    #[serde(rename = "P1_3")]
    P1_3,
    #[serde(rename = "P1_4")]
    P1_4,
    #[serde(rename = "P2_1")]
    P2_1,
    #[serde(rename = "P2_2")]
    P2_2,
    #[serde(rename = "H1_1")]
    H1_1,
    #[serde(rename = "H1_2")]
    H1_2,
    #[serde(rename = "H2_1")]
    H2_1,
    #[serde(rename = "H2_2")]
    H2_2,
    #[serde(rename = "H2_3")]
    H2_3,
    #[serde(rename = "H2_4")]
    H2_4,
    #[serde(rename = "H2_5")]
    H2_5,
}

/// Top-level grouping of the tags.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FamilyGroup {
    AffineF,
    AffineG,
    Trig,
    Poly,
    Hyper,
}

impl FamilyTag {
    pub const ALL: [FamilyTag; 18] = [
        FamilyTag::Main1AffineF,
        FamilyTag::Main1AffineG,
        FamilyTag::T1,
        FamilyTag::T2,
        FamilyTag::T3,
        FamilyTag::P1_1,
        FamilyTag::P1_2,
        FamilyTag::P1_3,
        FamilyTag::P1_4,
        FamilyTag::P2_1,
        FamilyTag::P2_2,
        FamilyTag::H1_1,
        FamilyTag::H1_2,
        FamilyTag::H2_1,
        FamilyTag::H2_2,
        FamilyTag::H2_3,
        FamilyTag::H2_4,
        FamilyTag::H2_5,
    ];

    pub fn as_str(self) -> &'static str {
        use FamilyTag::*;
        match self {
            Main1AffineF => "Main1_AffineF",
            Main1AffineG => "Main1_AffineG",
            T1 => "T1",
            T2 => "T2",
            T3 => "T3",
            P1_1 => "P1_1",
            P1_2 => "P1_2",
            P1_3 => "P1_3",
            P1_4 => "P1_4",
            P2_1 => "P2_1",
            P2_2 => "P2_2",
            H1_1 => "H1_1",
            H1_2 => "H1_2",
            H2_1 => "H2_1",
            H2_2 => "H2_2",
            H2_3 => "H2_3",
            H2_4 => "H2_4",
            H2_5 => "H2_5",
        }
    }

    pub fn group(self) -> FamilyGroup {
        use FamilyTag::*;
        match self {
            Main1AffineF => FamilyGroup::AffineF,
            Main1AffineG => FamilyGroup::AffineG,
            T1 | T2 | T3 => FamilyGroup::Trig,
            P1_1 | P1_2 | P1_3 | P1_4 | P2_1 | P2_2 => FamilyGroup::Poly,
            _ => FamilyGroup::Hyper,
        }
    }

    /// Constants that must be present.
    pub fn required(self) -> &'static [&'static str] {
        use FamilyTag::*;
        match self {
            Main1AffineF => &["A", "B"],
            Main1AffineG => &["C", "D"],
            T1 | T2 | T3 => &["A", "B", "C", "D", "T", "alpha", "beta", "beta1", "beta2"],
            P1_1 | P1_2 | P1_3 => &["A", "B", "C", "D", "alpha", "beta", "beta1", "beta2"],
            P1_4 => &["A", "B", "D", "alpha", "beta", "beta1", "beta2", "A1", "A2"],
            P2_1 => &["A", "B", "C", "A1", "A2", "B1", "B2", "D1", "D2"],
            P2_2 => &["A", "B", "C", "D", "beta", "beta1", "beta2"],
            H1_1 => &["A", "B", "C", "D", "kappa", "q", "alpha", "beta1", "beta2", "A1", "A2"],
            H1_2 => &["A", "B", "C", "D", "kappa", "q", "p", "A1", "A2", "C1", "C2", "D1", "D2"],
            H2_1 | H2_2 => &["A", "B", "C", "D", "kappa", "alpha", "beta", "alpha1", "alpha2", "gamma"],
            H2_3 => &["A", "B", "D", "kappa", "alpha", "beta", "alpha1", "alpha2", "gamma1", "gamma2", "A1", "A2"],
            H2_4 => &["A", "B", "D", "kappa", "alpha", "beta", "p", "gamma", "beta1", "beta2", "A1", "A2", "B1", "B2"],
            H2_5 => &["A", "B", "C", "D", "kappa", "alpha", "beta", "p", "B1", "B2", "C1", "C2", "D1", "D2"],
        }
    }

    /// Constants that default to 0 when absent.
    pub fn optional(self) -> &'static [&'static str] {
        use FamilyTag::*;
        match self {
            Main1AffineF => &["lambda", "lambda1", "lambda2"],
            Main1AffineG => &["lambda1", "lambda2", "mu1", "mu2"],
            H1_2 => &["lambda", "lambda1", "lambda2", "mu1", "mu2", "psi1_zero"],
            _ => &["lambda", "lambda1", "lambda2", "mu1", "mu2"],
        }
    }

    pub fn uses_free_fn(self) -> bool {
        matches!(self, FamilyTag::Main1AffineF | FamilyTag::Main1AffineG)
    }
}

impl fmt::Display for FamilyTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FamilyTag {
    type Err = FamilyError;
    fn from_str(s: &str) -> Result<Self, FamilyError> {
        FamilyTag::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| FamilyError::UnknownTag(s.to_string()))
    }
}

/// Family tag, constants, optional free-function catalog name and the
/// requested interval.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyParams {
    pub tag: FamilyTag,
    pub constants: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub free_fn: Option<String>,
    pub interval: Interval,
}

impl FamilyParams {
    pub fn new(tag: FamilyTag, interval: Interval) -> Self {
        FamilyParams { tag, constants: BTreeMap::new(), free_fn: None, interval }
    }

    pub fn with(mut self, name: &str, v: f64) -> Self {
        self.constants.insert(name.to_string(), v);
        self
    }

    pub fn with_free_fn(mut self, name: &str) -> Self {
        self.free_fn = Some(name.to_string());
        self
    }

    pub fn set(&mut self, name: &str, v: f64) {
        self.constants.insert(name.to_string(), v);
    }

    /// Value of a constant, 0 when absent.
    pub fn get(&self, name: &str) -> f64 {
        self.constants.get(name).copied().unwrap_or(0.0)
    }

    pub fn from_json(s: &str) -> Result<Self, FamilyError> {
        let v: serde_json::Value = serde_json::from_str(s).map_err(|e| FamilyError::Parse(e.to_string()))?;
        if let Some(tag) = v.get("tag").and_then(|t| t.as_str()) {
            tag.parse::<FamilyTag>()?;
        }
        serde_json::from_value(v).map_err(|e| FamilyError::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("params serialize")
    }

    fn psi1_zero(&self) -> bool {
        self.get("psi1_zero") != 0.0
    }

    /// `(p*, q1, q2)` for H1_2.
    pub fn h12_factors(&self) -> (f64, f64, f64) {
        if self.psi1_zero() {
            (1.0, 1.0, 1.0)
        } else {
            let (p, q) = (self.get("p"), self.get("q"));
            (1.0 - p * p, q + p, q - p)
        }
    }

    /// Derived constants, recomputed from the primaries.
    pub fn derived(&self) -> BTreeMap<String, f64> {
        use FamilyTag::*;
        let mut d = BTreeMap::new();
        let g = |n: &str| self.get(n);
        match self.tag {
            Main1AffineF => {
                d.insert("Lambda".into(), g("lambda1") + g("lambda2"));
            }
            Main1AffineG => {
                d.insert("Lambda".into(), g("lambda1") + g("lambda2"));
                d.insert("mu".into(), g("mu1") + g("mu2"));
            }
            _ => {
                d.insert("Lambda".into(), g("lambda") + g("lambda1") + g("lambda2"));
                d.insert("mu".into(), g("mu1") + g("mu2"));
            }
        }
        let t = g("T");
        match self.tag {
            T1 => {
                d.insert("tau".into(), ((1.0 - t) / (1.0 + t)).sqrt());
                d.insert("Tstar".into(), (t * t - 1.0).abs().powf(-0.5));
            }
            T3 => {
                d.insert("tau".into(), ((t - 1.0) / (t + 1.0)).sqrt());
                d.insert("Tstar".into(), (t * t - 1.0).abs().powf(-0.5));
            }
            H1_2 => {
                let (ps, q1, q2) = self.h12_factors();
                d.insert("pstar".into(), ps);
                d.insert("q1".into(), q1);
                d.insert("q2".into(), q2);
            }
            _ => {}
        }
        d
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Violation {
    pub constraint: String,
    pub magnitude: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidationOutcome {
    pub ok: bool,
    pub violations: Vec<Violation>,
}

impl fmt::Display for ValidationOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v: Vec<String> = self.violations.iter().map(|v| format!("{} ({:e})", v.constraint, v.magnitude)).collect();
        write!(f, "{}", v.join(", "))
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FamilyError {
    #[error("unknown family tag {0:?}")]
    UnknownTag(String),
    #[error("cannot parse family parameters: {0}")]
    Parse(String),
    #[error("unknown free function {0:?}")]
    UnknownFreeFn(String),
    #[error("constraint violated: {0}")]
    ConstraintViolated(ValidationOutcome),
    #[error("no safe subinterval of width >= {min_width}: {reason}")]
    UnsafeDomain { min_width: f64, reason: String },
    #[error("self-check residual {max_abs:e} exceeds {tol:e}")]
    SelfCheckFailed { max_abs: f64, tol: f64 },
    #[error(transparent)]
    Mean(#[from] MeanError),
    #[error(transparent)]
    Fn(#[from] FnError),
}

struct Checks {
    v: Vec<Violation>,
}

impl Checks {
    fn fail(&mut self, name: impl Into<String>, magnitude: f64) {
        self.v.push(Violation { constraint: name.into(), magnitude });
    }
    fn eq(&mut self, name: &str, lhs: f64, rhs: f64) {
        let d = (lhs - rhs).abs();
        if !(d <= EQ_TOL) {
            self.fail(name, d);
        }
    }
    fn nonzero(&mut self, name: &str, v: f64) {
        if v == 0.0 || !v.is_finite() {
            self.fail(name, v.abs());
        }
    }
    fn positive(&mut self, name: &str, v: f64) {
        if !(v > 0.0) {
            self.fail(name, v);
        }
    }
    fn unit(&mut self, name: &str, v: f64) {
        self.eq(name, v.abs(), 1.0);
    }
}

/// Check every constraint of the tag: equalities to [`EQ_TOL`], strict
/// inequalities exactly.
pub fn validate_params(p: &FamilyParams) -> ValidationOutcome {
    use FamilyTag::*;
    let mut c = Checks { v: Vec::new() };
    let tag = p.tag;
    for name in tag.required() {
        if !p.constants.contains_key(*name) {
            c.fail(format!("missing constant {name}"), f64::NAN);
        }
    }
    for (name, v) in &p.constants {
        if !tag.required().contains(&name.as_str()) && !tag.optional().contains(&name.as_str()) {
            let what = if ["tau", "Tstar", "mu", "Lambda", "pstar"].contains(&name.as_str()) {
                "derived constant supplied"
            } else {
                "unknown constant"
            };
            c.fail(format!("{what} {name}"), v.abs());
        }
        if !v.is_finite() {
            c.fail(format!("non-finite constant {name}"), f64::NAN);
        }
    }
    if !c.v.is_empty() {
        return ValidationOutcome { ok: false, violations: c.v };
    }
    let g = |n: &str| p.get(n);
    let (a, d) = (g("A"), g("D"));
    match tag {
        Main1AffineF => {}
        Main1AffineG => c.nonzero("D != 0", d),
        T1 | T2 | T3 => {
            c.nonzero("A*D != 0", a * d);
            c.nonzero("alpha != 0", g("alpha"));
            let r = (g("beta1") + g("beta2") - g("beta")).rem_euclid(std::f64::consts::PI);
            let r = r.min(std::f64::consts::PI - r);
            if !(r < PI_Z_TOL) {
                c.fail("beta1 + beta2 in pi Z + beta", r);
            }
            let t2 = g("T") * g("T");
            match tag {
                T1 if !(t2 < 1.0) => c.fail("T^2 < 1", t2 - 1.0),
                T2 => c.eq("T^2 = 1", t2, 1.0),
                T3 if !(t2 > 1.0) => c.fail("T^2 > 1", 1.0 - t2),
                _ => {}
            }
        }
        P1_1 | P1_2 | P1_3 | P1_4 => {
            c.nonzero("A*D != 0", a * d);
            c.nonzero("alpha != 0", g("alpha"));
            c.eq("beta1 + beta2 = beta", g("beta1") + g("beta2"), g("beta"));
            if tag == P1_4 {
                c.eq("(A1 + A2)/2 = A", 0.5 * (g("A1") + g("A2")), a);
            }
        }
        P2_1 => {
            c.nonzero("A != 0", a);
            let (d1, d2) = (g("D1"), g("D2"));
            c.nonzero("D1*D2 != 0", d1 * d2);
            for (k, dk) in [(1, d1), (2, d2)] {
                let ak = g(&format!("A{k}"));
                let bk = g(&format!("B{k}"));
                c.eq(&format!("D1*D2*(A + 4*A{k}) = D{k}^2*A"), d1 * d2 * (a + 4.0 * ak), dk * dk * a);
                c.eq(&format!("B + 2*B{k} = 2*D{k}*C"), g("B") + 2.0 * bk, 2.0 * dk * g("C"));
            }
        }
        P2_2 => {
            c.nonzero("A*D != 0", a * d);
            c.eq("beta1 + beta2 = beta", g("beta1") + g("beta2"), g("beta"));
        }
        H1_1 | H1_2 => {
            c.nonzero("A*D != 0", a * d);
            c.positive("kappa > 0", g("kappa"));
            c.unit("|q| = 1", g("q"));
            let q = g("q");
            if tag == H1_1 {
                let al = g("alpha");
                c.nonzero("alpha*beta1*A1 != 0", al * g("beta1") * g("A1"));
                c.nonzero("alpha*beta2*A2 != 0", al * g("beta2") * g("A2"));
                c.eq("beta2*A = alpha*q*A1", g("beta2") * a, al * q * g("A1"));
                c.eq("beta1*A = alpha*q*A2", g("beta1") * a, al * q * g("A2"));
            } else {
                let z = g("psi1_zero");
                if z != 0.0 && z != 1.0 {
                    c.fail("psi1_zero in {0, 1}", z);
                }
                if z == 0.0 {
                    let ap = g("p").abs();
                    if ap == 0.0 || (ap - 1.0).abs() <= EQ_TOL {
                        c.fail("|p| not in {0, 1}", ap);
                    }
                }
                let (ps, q1, q2) = p.h12_factors();
                for (k, qk) in [(1, q1), (2, q2)] {
                    c.eq(&format!("-p*A/2 = q{k}^2*A{k}"), -0.5 * ps * a, qk * qk * g(&format!("A{k}")));
                    c.eq(&format!("p*C = q{k}*C{k}"), ps * g("C"), qk * g(&format!("C{k}")));
                    c.eq(&format!("p*D = q{k}*D{k}"), ps * d, qk * g(&format!("D{k}")));
                }
            }
        }
        H2_1 | H2_2 | H2_3 | H2_4 | H2_5 => {
            c.nonzero("A*D != 0", a * d);
            c.positive("kappa > 0", g("kappa"));
            let (al, be) = (g("alpha"), g("beta"));
            c.nonzero("alpha*beta != 0", al * be);
            match tag {
                H2_1 | H2_2 => {
                    c.eq("alpha1*alpha2 = alpha", g("alpha1") * g("alpha2"), al);
                    let gm = g("gamma");
                    if tag == H2_1 {
                        c.eq("gamma^2 = beta", gm * gm, be);
                    } else {
                        c.nonzero("gamma != 0", gm);
                        c.eq("gamma^2 + 1 = beta", gm * gm + 1.0, be);
                    }
                }
                H2_3 => {
                    c.eq("alpha1*alpha2 = alpha", g("alpha1") * g("alpha2"), al);
                    c.eq("gamma1*gamma2 = beta", g("gamma1") * g("gamma2"), be);
                    c.eq("(A1 + A2)/2 = A", 0.5 * (g("A1") + g("A2")), a);
                    c.nonzero("gamma2 - gamma1 != 0", g("gamma2") - g("gamma1"));
                }
                H2_4 => {
                    let pp = g("p");
                    c.unit("|p| = 1", pp);
                    c.eq("(A1 + A2)/2 = A", 0.5 * (g("A1") + g("A2")), a);
                    let k = g("kappa");
                    let (hp, hm) = ((1.0 + pp) / 2.0, (1.0 - pp) / 2.0);
                    let b = g("B");
                    c.eq("B1 coupling", g("B1"), hp * (2.0 * k * a + b) + hm * b);
                    c.eq("B2 coupling", g("B2"), hp * b + hm * (2.0 * k * a + b));
                    let gm = g("gamma");
                    c.nonzero("gamma != 0", gm);
                    c.eq("gamma*beta1 coupling", gm * g("beta1"), hp * al + hm * be);
                    c.eq("gamma*beta2 coupling", gm * g("beta2"), hp * be + hm * al);
                }
                H2_5 => {
                    let pp = g("p");
                    c.unit("|p| = 1", pp);
                    let k = g("kappa");
                    c.eq("-(p/2kappa)(B2 - B1) = A", -(pp / (2.0 * k)) * (g("B2") - g("B1")), a);
                    let (hp, hm) = ((1.0 + pp) / 2.0, (1.0 - pp) / 2.0);
                    c.eq("B = (1+p)/2 B2 + (1-p)/2 B1", g("B"), hp * g("B2") + hm * g("B1"));
                    for name in ["C", "D"] {
                        let v = g(name);
                        let (v1, v2) = (g(&format!("{name}1")), g(&format!("{name}2")));
                        let lhs = al * be * v;
                        c.eq(&format!("alpha*beta*{name} = -alpha part"), lhs, -hp * al * v1 - hm * al * v2);
                        c.eq(&format!("alpha*beta*{name} = beta part"), lhs, hp * be * v2 + hm * be * v1);
                    }
                }
                _ => unreachable!(),
            }
        }
    }
    if tag.uses_free_fn() {
        if let Some(name) = &p.free_fn {
            let known = match tag {
                Main1AffineF => catalog_g_pair(name).is_some(),
                _ => catalog_f(name).is_some(),
            };
            if !known {
                c.fail(format!("unknown free function {name}"), f64::NAN);
            }
        }
    }
    ValidationOutcome { ok: c.v.is_empty(), violations: c.v }
}

/// Options for [`build_family_with`].
#[derive(Clone, Debug)]
pub struct BuildOptions {
    /// Seed of the safe-domain scan; defaults to the interval midpoint.
    pub seed: Option<f64>,
    /// Smallest acceptable safe width.
    pub min_width: f64,
    /// Points per axis of the self-check grid.
    pub grid_n: usize,
    /// Run the residual self-check.
    pub self_check: bool,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions { seed: None, min_width: 1e-3, grid_n: 50, self_check: true }
    }
}

/// Build the tuple with the default options; the returned tuple satisfies
/// the main equation to `tol` on a 50x50 Chebyshev grid.
pub fn build_family(p: &FamilyParams, tol: f64) -> Result<SolutionTuple, FamilyError> {
    build_family_with(p, tol, &BuildOptions::default())
}

/// Safe subinterval of `p.interval` for the family's members and guards.
pub fn safe_domain(p: &FamilyParams, forms: &FamilyForms, seed: f64) -> Result<Interval, FnError> {
    let line = Interval::real_line();
    let mut fs: Vec<RealFn> = vec![
        RealFn::from_expr(line, forms.big_f.clone()),
        RealFn::from_expr(line, forms.f[0].clone()),
        RealFn::from_expr(line, forms.f[1].clone()),
    ];
    for g in &forms.g {
        fs.push(RealFn::from_expr(line, g.clone()).with_monotonicity(Monotonicity::Increasing));
    }
    let guards: Vec<RealFn> = forms.guards.iter().map(|e| RealFn::from_expr(line, e.clone())).collect();
    safe_subinterval_with_guards(&fs, &guards, seed, p.interval)
}

pub fn build_family_with(p: &FamilyParams, tol: f64, opts: &BuildOptions) -> Result<SolutionTuple, FamilyError> {
    let v = validate_params(p);
    if !v.ok {
        return Err(FamilyError::ConstraintViolated(v));
    }
    let forms = FamilyForms::new(p)?;
    let seed = opts.seed.unwrap_or_else(|| p.interval.midpoint());
    let unsafe_domain = |reason: String| FamilyError::UnsafeDomain { min_width: opts.min_width, reason };
    let i = safe_domain(p, &forms, seed).map_err(|e| unsafe_domain(e.to_string()))?;
    if i.width() < opts.min_width {
        return Err(unsafe_domain(format!("safe interval {i} too narrow")));
    }
    let mk = |e: &crate::fncore::Expr| RealFn::from_expr(i, e.clone());
    let mono = |f: RealFn| {
        let d = derive_num(&f, i.midpoint(), 1).unwrap_or(0.0);
        let m = if d > 0.0 { Monotonicity::Increasing } else { Monotonicity::Decreasing };
        f.with_monotonicity(m)
    };
    let g1 = mono(mk(&forms.g[0]));
    let g2 = mono(mk(&forms.g[1]));
    let sum_domain = SolutionTuple::sampled_sum_domain(&g1, &g2, i)?;
    let mut meta = TupleMeta { label: Some(p.tag.as_str().into()), derived: p.derived(), notes: Vec::new() };
    let mut t = SolutionTuple {
        big_f: mk(&forms.big_f),
        f1: mk(&forms.f[0]),
        f2: mk(&forms.f[1]),
        g1,
        g2,
        big_g: RealFn::from_expr(sum_domain, forms.big_g[0].1.clone()),
        i,
        sum_domain,
        meta: TupleMeta::default(),
    };
    // several displayed variants of G differ by a sign resolution; keep
    // the one that satisfies the equation on this domain
    if forms.big_g.len() > 1 {
        let probe = Grid::chebyshev(i, 9)?;
        let mut best: Option<(f64, usize)> = None;
        let mut scores = Vec::new();
        for (k, (name, e)) in forms.big_g.iter().enumerate() {
            let cand = t.with_g(RealFn::from_expr(sum_domain, e.clone()));
            let r = eq1_residual(&cand, &probe).map(|r| r.max_abs).unwrap_or(f64::INFINITY);
            scores.push(format!("{name}: {r:.3e}"));
            if best.is_none_or(|(b, _)| r < b) {
                best = Some((r, k));
            }
        }
        let k = best.unwrap().1;
        t.big_g = RealFn::from_expr(sum_domain, forms.big_g[k].1.clone());
        meta.notes.push(format!("G variant {} (probe residuals {})", forms.big_g[k].0, scores.join(", ")));
    }
    t.meta = meta;
    if opts.self_check {
        let grid = Grid::chebyshev(i, opts.grid_n)?;
        let r = eq1_residual(&t, &grid)?;
        if !(r.max_abs < tol) {
            return Err(FamilyError::SelfCheckFailed { max_abs: r.max_abs, tol });
        }
    }
    Ok(t)
}

#[cfg(test)]
mod tests;
