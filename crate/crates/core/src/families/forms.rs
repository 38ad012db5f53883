//! Closed-form members of each family as expressions.

use super::catalog::{catalog_f, catalog_g_pair};
use super::{FamilyError, FamilyParams, FamilyTag};
use crate::fncore::Expr;

/// Expressions for `F, f1, f2, g1, g2` in `x`, the candidate forms of `G`
/// in `u`, and the guard expressions whose sign must not change on `I`.
#[derive(Clone, Debug)]
pub struct FamilyForms {
    pub big_f: Expr,
    pub f: [Expr; 2],
    pub g: [Expr; 2],
    /// Named variants; sign choices that depend on the domain give more
    /// than one.
    pub big_g: Vec<(String, Expr)>,
    pub guards: Vec<Expr>,
}

fn x() -> Expr {
    Expr::x()
}

impl FamilyForms {
    pub fn new(p: &FamilyParams) -> Result<Self, FamilyError> {
        use FamilyTag::*;
        let k = |n: &str| p.get(n);
        let (a, b, cc, d) = (k("A"), k("B"), k("C"), k("D"));
        let (lam, lam1, lam2) = (k("lambda"), k("lambda1"), k("lambda2"));
        let (mu1, mu2) = (k("mu1"), k("mu2"));
        let big_lam = p.derived()["Lambda"];
        let mu = mu1 + mu2;
        let lams = [lam1, lam2];
        let mus = [mu1, mu2];
        // w = (u - mu)/D
        let w = (x() - mu) / d;
        let mut guards = Vec::new();
        let out = match p.tag {
            Main1AffineF => {
                let name = p.free_fn.as_deref().unwrap_or("exp_sin2x");
                let (g1, g2) = catalog_g_pair(name).ok_or_else(|| FamilyError::UnknownFreeFn(name.into()))?;
                let big_f = a * x() + lam;
                let f = [
                    -0.5 * big_f.clone() + b * g1.clone() + lam1,
                    -0.5 * big_f.clone() + b * g2.clone() + lam2,
                ];
                let g = [g1 + mu1, g2 + mu2];
                let big_g = b * (x() - mu) + (lam1 + lam2);
                FamilyForms { big_f, f, g, big_g: vec![("affine".into(), big_g)], guards }
            }
            Main1AffineG => {
                let name = p.free_fn.as_deref().unwrap_or("exp");
                let fe = catalog_f(name).ok_or_else(|| FamilyError::UnknownFreeFn(name.into()))?;
                let f = [cc * x() + lam1, cc * x() + lam2];
                let g = [d * x() + mu1, d * x() + mu2];
                let big_g = fe.compose(&((x() - mu) / (2.0 * d))) + cc * (x() - mu) / d + (lam1 + lam2);
                FamilyForms { big_f: fe, f, g, big_g: vec![("composed".into(), big_g)], guards }
            }
            T1 | T2 | T3 => {
                let (t, al) = (k("T"), k("alpha"));
                let arg = 2.0 * al * x() + k("beta");
                guards.push(arg.sin());
                let big_f = 2.0 * a * arg.sin().ln_abs() + 2.0 * b * x() + lam;
                let tau = ((1.0 - t).abs() / (1.0 + t).abs()).sqrt();
                let tstar = (t * t - 1.0).abs().powf(-0.5);
                let mut f = Vec::new();
                let mut g = Vec::new();
                for j in 0..2 {
                    let z = al * x() + k(&format!("beta{}", j + 1));
                    let cos2 = (2.0 * z.clone()).cos() + t;
                    guards.push(cos2.clone());
                    let h = match p.tag {
                        T1 => {
                            let s = tau * z.tan();
                            guards.push(z.cos());
                            guards.push(s.clone() - 1.0);
                            guards.push(s.clone() + 1.0);
                            ((s.clone() - 1.0) / (s + 1.0)).ln_abs()
                        }
                        T2 if t > 0.0 => {
                            guards.push(z.cos());
                            z.tan()
                        }
                        T2 => {
                            guards.push(z.sin());
                            z.cot()
                        }
                        _ => {
                            guards.push(z.cos());
                            (tau * z.tan()).atan()
                        }
                    };
                    f.push(-a * cos2.ln_abs() - b * x() + cc * h.clone() + lams[j]);
                    g.push(d * h + mus[j]);
                }
                let tail = cc * w.clone() + big_lam;
                let big_g = match p.tag {
                    T1 => vec![
                        ("sinh".into(), 2.0 * a * (tstar * (0.5 * w.clone()).sinh()).ln_abs() + tail.clone()),
                        ("cosh".into(), 2.0 * a * (tstar * (0.5 * w.clone()).cosh()).ln_abs() + tail),
                    ],
                    T2 => vec![("log".into(), 2.0 * a * (0.5 * w).ln_abs() + tail)],
                    _ => vec![("sin".into(), 2.0 * a * (tstar * w.sin()).ln_abs() + tail)],
                };
                FamilyForms { big_f, f: pair(f), g: pair(g), big_g, guards }
            }
            P1_1 | P1_2 | P1_3 | P1_4 => {
                let al = k("alpha");
                let arg = 2.0 * al * x() + k("beta");
                guards.push(arg.clone());
                let big_f = 2.0 * a * arg.ln_abs() + 2.0 * b * x() + lam;
                let mut f = Vec::new();
                let mut g = Vec::new();
                for j in 0..2 {
                    let z = al * x() + k(&format!("beta{}", j + 1));
                    let (fj, h) = match p.tag {
                        P1_1 => (-a * (z.powi(2) + 1.0).ln_abs(), z.atan()),
                        P1_2 => {
                            guards.push(z.clone());
                            (-2.0 * a * z.ln_abs(), z.recip())
                        }
                        P1_3 => {
                            guards.push(z.clone() - 1.0);
                            guards.push(z.clone() + 1.0);
                            (-a * (z.powi(2) - 1.0).ln_abs(), ((z.clone() - 1.0) / (z + 1.0)).ln_abs())
                        }
                        _ => {
                            guards.push(z.clone());
                            let aj = k(&format!("A{}", j + 1));
                            let sg = if j == 0 { 1.0 } else { -1.0 };
                            (-aj * z.ln_abs(), sg * z.ln_abs())
                        }
                    };
                    if p.tag == P1_4 {
                        f.push(fj - b * x() + lams[j]);
                    } else {
                        f.push(fj - b * x() + cc * h.clone() + lams[j]);
                    }
                    g.push(d * h + mus[j]);
                }
                let tail = cc * w.clone() + big_lam;
                let big_g = match p.tag {
                    P1_1 => vec![("sin".into(), 2.0 * a * w.sin().ln_abs() + tail)],
                    P1_2 => vec![("log".into(), 2.0 * a * w.ln_abs() + tail)],
                    P1_3 => vec![
                        ("sinh".into(), 2.0 * a * (0.5 * w.clone()).sinh().ln_abs() + tail.clone()),
                        ("cosh".into(), 2.0 * a * (0.5 * w.clone()).cosh().ln_abs() + tail),
                    ],
                    _ => {
                        let a1 = k("A1");
                        signed(|s| 2.0 * a * (s * w.exp() + 1.0).ln_abs() - a1 * w.clone() + big_lam)
                    }
                };
                FamilyForms { big_f, f: pair(f), g: pair(g), big_g, guards }
            }
            P2_1 => {
                let big_f = a * x().powi(2) + b * x() + lam;
                let (d1, d2) = (k("D1"), k("D2"));
                let f = [
                    k("A1") * x().powi(2) + k("B1") * x() + lam1,
                    k("A2") * x().powi(2) + k("B2") * x() + lam2,
                ];
                let g = [d1 * x() + mu1, d2 * x() + mu2];
                let v = x() - mu;
                let big_g = a / (4.0 * d1 * d2) * v.powi(2) + cc * v + big_lam;
                FamilyForms { big_f, f, g, big_g: vec![("quadratic".into(), big_g)], guards }
            }
            P2_2 => {
                let big_f = a * (2.0 * x() + k("beta")).powi(2) + 2.0 * b * x() + lam;
                let mut f = Vec::new();
                let mut g = Vec::new();
                for j in 0..2 {
                    let z = x() + k(&format!("beta{}", j + 1));
                    guards.push(z.clone());
                    f.push(-a * z.powi(2) - b * x() + cc * z.ln_abs() + lams[j]);
                    g.push(d * z.ln_abs() + mus[j]);
                }
                let big_g = signed(|s| 2.0 * a * s * w.exp() + cc * w.clone() + big_lam);
                FamilyForms { big_f, f: pair(f), g: pair(g), big_g, guards }
            }
            H1_1 | H1_2 => {
                let (kap, q) = (k("kappa"), k("q"));
                let xx = (-q * kap * x()).exp();
                let big_f = a * xx.powi(2) + 2.0 * b * x() + lam;
                let mut f = Vec::new();
                let mut g = Vec::new();
                let tail = cc * w.clone() + big_lam;
                let big_g = if p.tag == H1_1 {
                    let al = k("alpha");
                    for j in 0..2 {
                        let n = j + 1;
                        let lin = al * xx.clone() + k(&format!("beta{n}"));
                        guards.push(lin.clone());
                        f.push(q * k(&format!("A{n}")) * xx.clone() - b * x() + cc * lin.ln_abs() + lams[j]);
                        g.push(d * lin.ln_abs() + mus[j]);
                    }
                    let b12 = k("beta1") * k("beta2");
                    signed(|s| a / (al * al) * (s * w.exp() - b12) + tail.clone())
                } else {
                    for j in 0..2 {
                        let n = j + 1;
                        let (an, cn, dn) = (k(&format!("A{n}")), k(&format!("C{n}")), k(&format!("D{n}")));
                        f.push(-an * xx.powi(2) - b * x() + q * cn * xx.clone() + lams[j]);
                        g.push(q * dn * xx.clone() + mus[j]);
                    }
                    let (ps, _, _) = p.h12_factors();
                    vec![("quadratic".into(), a / (2.0 * ps) * w.powi(2) + tail)]
                };
                FamilyForms { big_f, f: pair(f), g: pair(g), big_g, guards }
            }
            H2_1 | H2_2 | H2_3 | H2_4 | H2_5 => {
                let (kap, al, be) = (k("kappa"), k("alpha"), k("beta"));
                let lin = al * (2.0 * kap * x()).exp() - be;
                guards.push(lin.clone());
                let big_f = 2.0 * a * lin.ln_abs() + 2.0 * b * x() + lam;
                let e = (kap * x()).exp();
                let mut f = Vec::new();
                let mut g = Vec::new();
                let tail = cc * w.clone() + big_lam;
                let big_g = match p.tag {
                    H2_1 | H2_2 => {
                        let gm = k("gamma");
                        for j in 0..2 {
                            let xi = k(&format!("alpha{}", j + 1)) * e.clone() + gm;
                            guards.push(xi.clone());
                            let (fj, h) = if p.tag == H2_1 {
                                (-2.0 * a * xi.ln_abs(), xi.recip())
                            } else {
                                (-a * (xi.powi(2) + 1.0).ln_abs(), xi.atan())
                            };
                            f.push(fj - b * x() + cc * h.clone() + lams[j]);
                            g.push(d * h + mus[j]);
                        }
                        if p.tag == H2_1 {
                            vec![("log".into(), 2.0 * a * (1.0 - gm * w).ln_abs() + tail)]
                        } else {
                            vec![("sincos".into(), 2.0 * a * (gm * w.sin() + w.cos()).ln_abs() + tail)]
                        }
                    }
                    H2_3 => {
                        let (g1, g2) = (k("gamma1"), k("gamma2"));
                        let (a1, a2) = (k("A1"), k("A2"));
                        for j in 0..2 {
                            let ae = k(&format!("alpha{}", j + 1)) * e.clone();
                            let (l1, l2) = (ae.clone() + g1, ae + g2);
                            guards.push(l1.clone());
                            guards.push(l2.clone());
                            f.push(-a1 * l1.ln_abs() - a2 * l2.ln_abs() - b * x() + lams[j]);
                            g.push(d * (l1 / l2).ln_abs() + mus[j]);
                        }
                        let (r2, r1) = (g2 / (g2 - g1), g1 / (g2 - g1));
                        signed(|s| 2.0 * a * (r2 * s * w.exp() - r1).ln_abs() - a1 * w.clone() + big_lam)
                    }
                    H2_4 => {
                        let (pp, gm) = (k("p"), k("gamma"));
                        for j in 0..2 {
                            let n = j + 1;
                            let sg = if n == 1 { -1.0 } else { 1.0 };
                            let lin = gm * (sg * pp * kap * x()).exp() + k(&format!("beta{n}"));
                            guards.push(lin.clone());
                            f.push(-k(&format!("A{n}")) * lin.ln_abs() - k(&format!("B{n}")) * x() + lams[j]);
                            g.push(sg * d * lin.ln_abs() + mus[j]);
                        }
                        let (b1, b2, a2) = (k("beta1"), k("beta2"), k("A2"));
                        signed(|s| 2.0 * a * (b1 * s * w.exp() - b2).ln_abs() - a2 * w.clone() + big_lam)
                    }
                    _ => {
                        let pp = k("p");
                        for j in 0..2 {
                            let n = j + 1;
                            let sg = if n == 1 { -1.0 } else { 1.0 };
                            let ex = (sg * pp * kap * x()).exp();
                            f.push(k(&format!("C{n}")) * ex.clone() - k(&format!("B{n}")) * x() + lams[j]);
                            g.push(k(&format!("D{n}")) * ex + mus[j]);
                        }
                        vec![("log".into(), 2.0 * a * w.ln_abs() + tail)]
                    }
                };
                FamilyForms { big_f, f: pair(f), g: pair(g), big_g, guards }
            }
        };
        Ok(out)
    }
}

fn pair(v: Vec<Expr>) -> [Expr; 2] {
    let [a, b]: [Expr; 2] = v.try_into().expect("two members");
    [a, b]
}

// G variants for s = +1 and s = -1
fn signed(mut f: impl FnMut(f64) -> Expr) -> Vec<(String, Expr)> {
    vec![("s=+1".into(), f(1.0)), ("s=-1".into(), f(-1.0))]
}
