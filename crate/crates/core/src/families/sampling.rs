//! Random valid parameter draws for each family.

use std::f64::consts::PI;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::catalog::{F_CATALOG, G_PAIR_CATALOG};
use super::{safe_domain, validate_params, FamilyForms, FamilyParams, FamilyTag};
use crate::fncore::Interval;

/// Smallest safe width accepted for a draw.
pub const MIN_SAFE_WIDTH: f64 = 0.2;
/// Fraction of the safe width trimmed from each finite end.
pub const TRIM: f64 = 0.05;
const MAX_TRIES: usize = 10_000;

fn nz<R: Rng>(rng: &mut R, hi: f64) -> f64 {
    let m = rng.random_range(0.1..hi);
    if rng.random_bool(0.5) {
        m
    } else {
        -m
    }
}

fn sign<R: Rng>(rng: &mut R) -> f64 {
    if rng.random_bool(0.5) {
        1.0
    } else {
        -1.0
    }
}

fn draw<R: Rng>(tag: FamilyTag, rng: &mut R) -> FamilyParams {
    use FamilyTag::*;
    let c = rng.random_range(-1.0..1.0);
    let mut p = FamilyParams::new(tag, Interval::new(c - 1.0, c + 1.0).unwrap());
    let a = nz(rng, 2.0);
    let b = rng.random_range(-2.0..2.0);
    let cc = rng.random_range(-2.0..2.0);
    let d = nz(rng, 2.0);
    match tag {
        Main1AffineF => {
            p = p.with("A", a).with("B", b);
            p.free_fn = Some(G_PAIR_CATALOG.choose(rng).unwrap().to_string());
        }
        Main1AffineG => {
            p = p.with("C", cc).with("D", d);
            // quadratic F is the linear-phi case and belongs to P2_1
            let names: Vec<&str> = F_CATALOG.iter().copied().filter(|n| *n != "square").collect();
            p.free_fn = Some(names.choose(rng).unwrap().to_string());
        }
        T1 | T2 | T3 => {
            let t = match tag {
                T1 => rng.random_range(-0.95f64.sqrt()..0.95f64.sqrt()),
                T2 => sign(rng),
                _ => sign(rng) * rng.random_range(1.05f64.sqrt()..3.0),
            };
            let beta = rng.random_range(-PI..PI);
            let beta1 = rng.random_range(-PI..PI);
            let k = rng.random_range(-1..=1) as f64;
            p = p.with("A", a).with("B", b).with("C", cc).with("D", d).with("T", t);
            p = p.with("alpha", nz(rng, 1.5)).with("beta", beta).with("beta1", beta1);
            p = p.with("beta2", beta - beta1 + k * PI);
        }
        P1_1 | P1_2 | P1_3 | P1_4 => {
            let beta = rng.random_range(-2.0..2.0);
            let beta1 = rng.random_range(-2.0..2.0);
            p = p.with("A", a).with("B", b).with("D", d).with("alpha", nz(rng, 2.0));
            p = p.with("beta", beta).with("beta1", beta1).with("beta2", beta - beta1);
            if tag == P1_4 {
                let a1 = rng.random_range(-2.0..2.0);
                p = p.with("A1", a1).with("A2", 2.0 * a - a1);
            } else {
                p = p.with("C", cc);
            }
        }
        P2_1 => {
            let (d1, d2) = (nz(rng, 2.0), nz(rng, 2.0));
            p = p.with("A", a).with("B", b).with("C", cc).with("D1", d1).with("D2", d2);
            for (n, dk) in [(1, d1), (2, d2)] {
                p.set(&format!("A{n}"), (dk * dk * a / (d1 * d2) - a) / 4.0);
                p.set(&format!("B{n}"), (2.0 * dk * cc - b) / 2.0);
            }
        }
        P2_2 => {
            let beta = rng.random_range(-2.0..2.0);
            let beta1 = rng.random_range(-2.0..2.0);
            p = p.with("A", a).with("B", b).with("C", cc).with("D", d);
            p = p.with("beta", beta).with("beta1", beta1).with("beta2", beta - beta1);
        }
        H1_1 => {
            let (kap, q, al) = (rng.random_range(0.2..1.5), sign(rng), nz(rng, 2.0));
            let (a1, a2) = (nz(rng, 2.0), nz(rng, 2.0));
            p = p.with("A", a).with("B", b).with("C", cc).with("D", d).with("kappa", kap).with("q", q);
            p = p.with("alpha", al).with("A1", a1).with("A2", a2);
            p = p.with("beta2", al * q * a1 / a).with("beta1", al * q * a2 / a);
        }
        H1_2 => {
            let (kap, q) = (rng.random_range(0.2..1.5), sign(rng));
            let zero = rng.random_bool(0.25);
            let pp = if rng.random_bool(0.5) { nz(rng, 0.9) } else { sign(rng) * rng.random_range(1.1..2.0) };
            p = p.with("A", a).with("B", b).with("C", cc).with("D", d).with("kappa", kap).with("q", q);
            p = p.with("p", pp);
            if zero {
                p.set("psi1_zero", 1.0);
            }
            let (ps, q1, q2) = p.h12_factors();
            for (n, qk) in [(1, q1), (2, q2)] {
                p.set(&format!("A{n}"), -ps * a / (2.0 * qk * qk));
                p.set(&format!("C{n}"), ps * cc / qk);
                p.set(&format!("D{n}"), ps * d / qk);
            }
        }
        H2_1 | H2_2 | H2_3 => {
            let kap = rng.random_range(0.2..1.5);
            let (a1, a2) = (nz(rng, 2.0), nz(rng, 2.0));
            p = p.with("A", a).with("B", b).with("D", d).with("kappa", kap);
            p = p.with("alpha1", a1).with("alpha2", a2).with("alpha", a1 * a2);
            if tag == H2_3 {
                let g1 = nz(rng, 2.0);
                let mut g2 = nz(rng, 2.0);
                while (g2 - g1).abs() < 0.1 {
                    g2 = nz(rng, 2.0);
                }
                let aa1 = rng.random_range(-2.0..2.0);
                p = p.with("gamma1", g1).with("gamma2", g2).with("beta", g1 * g2);
                p = p.with("A1", aa1).with("A2", 2.0 * a - aa1);
            } else {
                let gm = nz(rng, 2.0);
                let beta = if tag == H2_1 { gm * gm } else { gm * gm + 1.0 };
                p = p.with("C", cc).with("gamma", gm).with("beta", beta);
            }
        }
        H2_4 => {
            let (kap, pp, gm) = (rng.random_range(0.2..1.5), sign(rng), nz(rng, 2.0));
            let (b1, b2) = (nz(rng, 2.0), nz(rng, 2.0));
            let (al, be) = if pp > 0.0 { (gm * b1, gm * b2) } else { (gm * b2, gm * b1) };
            let aa1 = rng.random_range(-2.0..2.0);
            p = p.with("A", a).with("B", b).with("D", d).with("kappa", kap).with("p", pp);
            p = p.with("gamma", gm).with("beta1", b1).with("beta2", b2).with("alpha", al).with("beta", be);
            p = p.with("A1", aa1).with("A2", 2.0 * a - aa1);
            let shifted = 2.0 * kap * a + b;
            let (bb1, bb2) = if pp > 0.0 { (shifted, b) } else { (b, shifted) };
            p = p.with("B1", bb1).with("B2", bb2);
        }
        H2_5 => {
            let (kap, pp) = (rng.random_range(0.2..1.5), sign(rng));
            let (al, be) = (nz(rng, 2.0), nz(rng, 2.0));
            p = p.with("A", a).with("B", b).with("C", cc).with("D", d).with("kappa", kap).with("p", pp);
            p = p.with("alpha", al).with("beta", be);
            let shifted = b + 2.0 * kap * a;
            let (bb1, bb2) = if pp > 0.0 { (shifted, b) } else { (b, shifted) };
            p = p.with("B1", bb1).with("B2", bb2);
            let (s1, s2) = if pp > 0.0 { (-be, al) } else { (al, -be) };
            p = p.with("C1", s1 * cc).with("D1", s1 * d).with("C2", s2 * cc).with("D2", s2 * d);
        }
    }
    if !tag.uses_free_fn() || tag == Main1AffineF {
        p.set("lambda", rng.random_range(-1.0..1.0));
    }
    p.set("lambda1", rng.random_range(-1.0..1.0));
    p.set("lambda2", rng.random_range(-1.0..1.0));
    if tag != Main1AffineF {
        p.set("mu1", rng.random_range(-1.0..1.0));
        p.set("mu2", rng.random_range(-1.0..1.0));
    }
    p
}

/// Random parameters that pass validation, with `interval` replaced by a
/// trimmed safe subinterval of width at least [`MIN_SAFE_WIDTH`].
pub fn random_params<R: Rng>(tag: FamilyTag, rng: &mut R) -> FamilyParams {
    for _ in 0..MAX_TRIES {
        let mut p = draw(tag, rng);
        if !validate_params(&p).ok {
            continue;
        }
        let Ok(forms) = FamilyForms::new(&p) else { continue };
        let Ok(i) = safe_domain(&p, &forms, p.interval.midpoint()) else { continue };
        let w = i.width();
        if w < MIN_SAFE_WIDTH {
            continue;
        }
        let lo = if i.lo() > p.interval.lo() { i.lo() + TRIM * w } else { i.lo() };
        let hi = if i.hi() < p.interval.hi() { i.hi() - TRIM * w } else { i.hi() };
        p.interval = Interval::new(lo, hi).unwrap();
        return p;
    }
    panic!("no valid draw for {tag} after {MAX_TRIES} tries");
}

/// [`random_params`] with a ChaCha8 generator seeded by `seed`.
pub fn random_params_seeded(tag: FamilyTag, seed: u64) -> FamilyParams {
    random_params(tag, &mut ChaCha8Rng::seed_from_u64(seed))
}
