//! Acceptance run: one PASS/FAIL line per criterion.

use std::time::{Duration, Instant};

use matkowski::classify::{affine_fraction, classify_tuple, fit_fraction, Branch};
use matkowski::families::sampling::random_params_seeded;
use matkowski::families::{build_family, FamilyGroup, FamilyTag};
use matkowski::fncore::{linspace, schwarzian_num};
use matkowski::means::{
    catalog_generator, classical_triple, compose_generators, eq1_residual, invariance_residual, GeneratorPair,
    COMPOSE_TOL,
};
use matkowski::reduction::{anchors_from, derive_system, reconstruct_tuple, system_residual, tuple_distance};
use matkowski::{Expr, Grid, Interval, RealFn, SolutionTuple};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 42;

const C1_TOL: f64 = 1e-9;
const C1_TIME: Duration = Duration::from_secs(1);
const C2_TOL: f64 = 1e-7;
const C3_TOL: f64 = 1e-8;
const C3_DRAWS: u64 = 100;
const C3_TIME: Duration = Duration::from_secs(300);
const C4_TOL: f64 = 1e-6;
const C5_TOL: f64 = 1e-5;
const C5_PER_CLASS: usize = 5;
const C6_TOL: f64 = 1e-4;
const C7_TOL: f64 = 1e-4;
const C8_TOL: f64 = 1e-10;
const C9_B2_RATE: f64 = 0.95;
const C10_B2_MAX: f64 = 0.05;
const GRID_N: usize = 50;

struct Line {
    ok: bool,
    text: String,
}

fn line(n: usize, ok: bool, text: String) -> Line {
    println!("{} C{n:<2} {text}", if ok { "PASS" } else { "FAIL" });
    Line { ok, text }
}

fn iv(a: f64, b: f64) -> Interval {
    Interval::new(a, b).unwrap()
}

fn gen(name: &str) -> Expr {
    catalog_generator(name).unwrap()
}

fn criterion1() -> Line {
    let dom = iv(0.5, 4.0);
    let start = Instant::now();
    let (m, n, k) = classical_triple(dom).unwrap();
    let r = invariance_residual(&m, &n, &k, &Grid::uniform(dom, GRID_N).unwrap()).unwrap();
    let dt = start.elapsed();
    line(
        1,
        r.max_abs < C1_TOL && dt < C1_TIME,
        format!("classical invariance fixture: max_abs {:.2e} (< {C1_TOL:e}), {:.3} s (< 1 s)", r.max_abs, dt.as_secs_f64()),
    )
}

/// `a h + b` with the same image of `dom` as `f`.
fn image_matched(h: &Expr, f: &Expr, dom: Interval) -> Expr {
    let (lo, hi) = dom.sampling_bounds();
    let (f0, f1) = (f.value(lo), f.value(hi));
    let (h0, h1) = (h.value(lo), h.value(hi));
    let a = (f1 - f0) / (h1 - h0);
    a * h.clone() + (f0 - a * h0)
}

struct Triple {
    label: String,
    pairs: [(Expr, Expr); 3],
    dom: Interval,
}

fn invariant_triples() -> Vec<Triple> {
    let mut out = Vec::new();
    // conjugates of the geometric/arithmetic/harmonic fixture by phi: J' = phi^{-1}(]0.5, 4[)
    let x = Expr::x();
    let conj = [
        ("id", x.clone(), iv(0.5, 4.0)),
        ("exp", x.exp(), iv(0.5f64.ln(), 4f64.ln())),
        ("square", x.powi(2), iv(0.5f64.sqrt(), 2.0)),
        ("sqrt", x.sqrt(), iv(0.25, 16.0)),
        ("shift", x.clone() + 1.0, iv(-0.5, 3.0)),
        ("scale", 2.0 * x.clone(), iv(0.25, 2.0)),
    ];
    for (name, phi, dom) in conj {
        let p = |g: &str| (gen(g).compose(&phi), gen(g).compose(&phi));
        out.push(Triple { label: format!("classical conjugated by {name}"), pairs: [p("ln"), p("id"), p("neg_reciprocal")], dom });
    }
    // M(M, M) = M for any Matkowski mean M
    let dom = iv(0.5, 2.0);
    for (f, h) in [("exp", "ln"), ("id", "cube"), ("sqrt", "atan"), ("neg_reciprocal", "tanh")] {
        let pair = (gen(f), image_matched(&gen(h), &gen(f), dom));
        out.push(Triple { label: format!("reflexive ({f}, {h})"), pairs: [pair.clone(), pair.clone(), pair], dom });
    }
    out
}

fn generic_triples(rng: &mut ChaCha8Rng) -> Vec<Triple> {
    let names = ["id", "ln", "neg_reciprocal", "exp", "sqrt", "cube", "atan", "tanh", "sinh"];
    let dom = iv(0.5, 2.0);
    let pick = |rng: &mut ChaCha8Rng| {
        let f = names[rng.random_range(0..names.len())];
        let h = names[rng.random_range(0..names.len())];
        (format!("({f},{h})"), (gen(f), image_matched(&gen(h), &gen(f), dom)))
    };
    (0..10)
        .map(|_| {
            let (a, m) = pick(rng);
            let (b, n) = pick(rng);
            let (c, k) = pick(rng);
            Triple { label: format!("generic {a} {b} {c}"), pairs: [m, n, k], dom }
        })
        .collect()
}

fn criterion2() -> Line {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut triples = invariant_triples();
    triples.extend(generic_triples(&mut rng));
    let mut agree = 0;
    let mut invariant = 0;
    let mut bad = Vec::new();
    for t in &triples {
        let pair = |(f, g): &(Expr, Expr)| {
            GeneratorPair::new(RealFn::from_expr(t.dom, f.clone()), RealFn::from_expr(t.dom, g.clone()), t.dom)
        };
        let outcome = (|| {
            let (m, n, k) = (pair(&t.pairs[0])?, pair(&t.pairs[1])?, pair(&t.pairs[2])?);
            let inv = invariance_residual(&m, &n, &k, &Grid::chebyshev(t.dom, 20)?)?;
            let s = compose_generators(&m, &n, &k, COMPOSE_TOL)?;
            let eq = eq1_residual(&s, &Grid::chebyshev(s.i, 20)?)?;
            Ok::<_, Box<dyn std::error::Error>>((inv.max_abs, eq.max_abs))
        })();
        match outcome {
            Ok((a, b)) => {
                invariant += (a < C2_TOL) as usize;
                if (a < C2_TOL) == (b < C2_TOL) {
                    agree += 1;
                } else {
                    bad.push(format!("{}: invariance {a:.1e}, eq1 {b:.1e}", t.label));
                }
            }
            Err(e) => bad.push(format!("{}: {e}", t.label)),
        }
    }
    for b in &bad {
        println!("     {b}");
    }
    line(
        2,
        agree == triples.len() && triples.len() == 20,
        format!("invariance / main-equation equivalence: {agree}/{} agree at {C2_TOL:e} ({invariant} invariant)", triples.len()),
    )
}

struct Entry {
    tag: FamilyTag,
    seed: u64,
    tuple: SolutionTuple,
    eq1: f64,
}

fn corpus() -> (Vec<Entry>, Vec<String>, Duration) {
    let start = Instant::now();
    let mut out = Vec::new();
    let mut errors = Vec::new();
    for tag in FamilyTag::ALL {
        for seed in 0..C3_DRAWS {
            let p = random_params_seeded(tag, SEED + seed);
            match build_family(&p, C3_TOL) {
                Ok(t) => {
                    let r = eq1_residual(&t, &Grid::chebyshev(t.i, GRID_N).unwrap()).unwrap();
                    out.push(Entry { tag, seed, tuple: t, eq1: r.max_abs });
                }
                Err(e) => errors.push(format!("{tag} seed {seed}: {e}")),
            }
        }
    }
    (out, errors, start.elapsed())
}

fn criterion3(c: &[Entry], errors: &[String], dt: Duration) -> Line {
    let over: Vec<&Entry> = c.iter().filter(|e| !(e.eq1 < C3_TOL)).collect();
    for e in errors {
        println!("     {e}");
    }
    for e in &over {
        println!("     {} seed {}: eq1 {:.2e}", e.tag, e.seed, e.eq1);
    }
    let worst = c.iter().map(|e| e.eq1).fold(0.0, f64::max);
    let min_per_tag = FamilyTag::ALL.iter().map(|t| c.iter().filter(|e| e.tag == *t).count()).min().unwrap();
    line(
        3,
        errors.is_empty() && over.is_empty() && min_per_tag as u64 >= C3_DRAWS && dt < C3_TIME,
        format!(
            "family sweep: {} tuples ({min_per_tag} per tag), worst eq1 {worst:.2e} (< {C3_TOL:e}), {:.1} s (< 300 s)",
            c.len(),
            dt.as_secs_f64()
        ),
    )
}

fn criterion4(c: &[Entry]) -> Line {
    let mut worst: f64 = 0.0;
    let mut bad = 0;
    for e in c {
        let res = derive_system(&e.tuple)
            .map_err(|x| x.to_string())
            .and_then(|s| system_residual(&s, &Grid::chebyshev(e.tuple.i, GRID_N).unwrap()).map_err(|x| x.to_string()));
        match res {
            Ok((p, m)) => {
                let v = p.max_abs.max(m.max_abs);
                worst = worst.max(v);
                if !(v < C4_TOL) {
                    bad += 1;
                    println!("     {} seed {}: system residual {v:.2e}", e.tag, e.seed);
                }
            }
            Err(x) => {
                bad += 1;
                println!("     {} seed {}: {x}", e.tag, e.seed);
            }
        }
    }
    line(4, bad == 0, format!("derivative system on the sweep: worst {worst:.2e} (< {C4_TOL:e}), {bad} failures"))
}

fn gamma_class(tag: FamilyTag) -> &'static str {
    match tag.group() {
        FamilyGroup::AffineF => "constant",
        FamilyGroup::AffineG => "affine-g",
        FamilyGroup::Trig => "trig",
        FamilyGroup::Poly => "linear",
        FamilyGroup::Hyper => "hyperbolic",
    }
}

fn criterion5(c: &[Entry]) -> Line {
    let mut worst: f64 = 0.0;
    let mut counts = Vec::new();
    let mut ok = true;
    for class in ["trig", "linear", "hyperbolic"] {
        let mut n = 0;
        // spread the picks over the tags of the class
        let tags: Vec<FamilyTag> = FamilyTag::ALL.into_iter().filter(|t| gamma_class(*t) == class).collect();
        let picks = (0..C5_PER_CLASS).filter_map(|j| {
            let (tag, seed) = (tags[j % tags.len()], (13 * j as u64) % C3_DRAWS);
            c.iter().find(|e| e.tag == tag && e.seed == seed)
        });
        for e in picks {
            let t = &e.tuple;
            let w = t.i.width();
            let inner = iv(t.i.lo() + 0.1 * w, t.i.hi() - 0.1 * w);
            let d = derive_system(t)
                .and_then(|s| reconstruct_tuple(&s, &anchors_from(t, t.i.midpoint())))
                .map(|r| tuple_distance(t, &r, &Grid::uniform(inner, 25).unwrap()))
                .unwrap_or(f64::INFINITY);
            worst = worst.max(d);
            if !(d < C5_TOL) {
                ok = false;
                println!("     {} seed {}: round trip {d:.2e}", e.tag, e.seed);
            }
            n += 1;
        }
        ok &= n == C5_PER_CLASS;
        counts.push(format!("{class} {n}"));
    }
    line(5, ok, format!("reconstruction round trip ({}): worst {worst:.2e} (< {C5_TOL:e})", counts.join(", ")))
}

fn criterion6() -> Line {
    // analytic derivatives, then finite differences only
    let mut worst = [0.0f64; 2];
    for (j, w) in worst.iter_mut().enumerate() {
        let prep = |f: RealFn| if j == 0 { f } else { f.without_derivatives() };
        for k in [0.5, 1.0, 2.0, 3.0] {
            let h = 0.8 * std::f64::consts::FRAC_PI_2 / k;
            let tan = prep(RealFn::from_expr(iv(-h / 0.8, h / 0.8), (k * Expr::x()).tan()));
            let tanh = prep(RealFn::from_expr(iv(-2.0 / k, 2.0 / k), (k * Expr::x()).tanh()));
            for x in linspace(-h, h, 10) {
                let s = schwarzian_num(&tan, x).unwrap();
                *w = w.max((s - 2.0 * k * k).abs() / (2.0 * k * k));
            }
            for x in linspace(-1.5 / k, 1.5 / k, 10) {
                let s = schwarzian_num(&tanh, x).unwrap();
                *w = w.max((s + 2.0 * k * k).abs() / (2.0 * k * k));
            }
        }
    }
    line(
        6,
        worst[0] < C6_TOL && worst[1] < C6_TOL,
        format!(
            "Schwarzian of tan and tanh: worst relative error {:.2e} analytic, {:.2e} finite-difference (< {C6_TOL:e})",
            worst[0], worst[1]
        ),
    )
}

fn criterion7() -> Line {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let x = Expr::x();
    let fs = [("tan", x.tan()), ("tanh", x.tanh()), ("id", x.clone()), ("exp", x.exp())];
    let i = iv(-0.7, 0.7);
    let grid = linspace(-0.6, 0.6, 13);
    let mut worst = [0.0f64; 2];
    let mut checked = 0;
    for _ in 0..50 {
        let (a, b, c, d) = loop {
            let v: [f64; 4] = std::array::from_fn(|_| rng.random_range(-2.0..2.0));
            if (v[0] * v[3] - v[1] * v[2]).abs() > 0.1 {
                break (v[0], v[1], v[2], v[3]);
            }
        };
        for (_, f) in &fs {
            let g = (a * f.clone() + b) / (c * f.clone() + d);
            let (rf, rg) = (RealFn::from_expr(i, f.clone()), RealFn::from_expr(i, g));
            let (nf, ng) = (rf.without_derivatives(), rg.without_derivatives());
            // keep away from the pole of the Mobius map
            for &p in grid.iter().filter(|&&p| (c * f.value(p) + d).abs() > 0.05) {
                for (w, (a, b)) in worst.iter_mut().zip([(&rf, &rg), (&nf, &ng)]) {
                    let sf = schwarzian_num(a, p).unwrap();
                    let sg = schwarzian_num(b, p).unwrap();
                    *w = w.max((sg - sf).abs() / (1.0 + sf.abs()));
                }
                checked += 1;
            }
        }
    }
    line(
        7,
        worst[0] < C7_TOL && worst[1] < C7_TOL,
        format!(
            "Mobius invariance of the Schwarzian: {checked} points, worst {:.2e} analytic, {:.2e} finite-difference (< {C7_TOL:e})",
            worst[0], worst[1]
        ),
    )
}

fn criterion8() -> Line {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst: f64 = 0.0;
    let mut n = 0;
    for gamma in [-1.0, 0.0, 0.5] {
        let i = iv(0.1, 1.2);
        let grid = Grid::chebyshev(i, 24).unwrap();
        let mut done = 0;
        while done < 10 {
            let v: [f64; 4] = std::array::from_fn(|_| rng.random_range(-2.0..2.0));
            let p = rng.random_range(0.1..3.0) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            let (s, co) = match gamma {
                g if g < 0.0 => (Expr::x().sin(), Expr::x().cos()),
                g if g > 0.0 => ((0.5f64.sqrt() * Expr::x()).sinh(), (0.5f64.sqrt() * Expr::x()).cosh()),
                _ => (Expr::x(), Expr::num(1.0)),
            };
            let den = v[0] * s.clone() + v[1] * co.clone();
            if (v[0] * v[3] - v[1] * v[2]).abs() < 0.2 || grid.points().iter().any(|&x| den.value(x).abs() < 0.1) {
                continue;
            }
            let frac = |q: f64| {
                let e = (q * v[2] * s.clone() + q * v[3] * co.clone()) / (q * v[0] * s.clone() + q * v[1] * co.clone());
                fit_fraction(&RealFn::from_expr(i, e), gamma, &grid).unwrap()
            };
            let (u, w) = (frac(1.0), frac(p));
            for (a, b) in u.coefficients().iter().zip(w.coefficients()) {
                worst = worst.max((a - b).abs());
            }
            done += 1;
            n += 1;
        }
    }
    line(8, worst < C8_TOL, format!("fraction-fit normalization under scaling: {n} fits, worst {worst:.2e} (< {C8_TOL:e})"))
}

fn expected_branch(tag: FamilyTag) -> Option<Branch> {
    match tag.group() {
        FamilyGroup::AffineF => Some(Branch::A),
        FamilyGroup::AffineG => Some(Branch::B1),
        _ => None,
    }
}

fn criterion9_10(c: &[Entry]) -> (Line, Line) {
    let (mut ab_total, mut ab_ok, mut b2_total, mut b2_ok) = (0, 0, 0, 0);
    let mut a_fracs_ok = true;
    let mut b2_worst: f64 = 0.0;
    let mut d_bad = 0;
    for e in c {
        let got = classify_tuple(&e.tuple);
        let grid = Grid::chebyshev(e.tuple.i, GRID_N).unwrap();
        let frac = affine_fraction(&e.tuple.big_f, &grid).unwrap();
        match expected_branch(e.tag) {
            Some(b) => {
                ab_total += 1;
                match &got {
                    Ok(r) if r.branch == b => ab_ok += 1,
                    Ok(r) => println!("     {} seed {}: branch {:?}", e.tag, e.seed, r.branch),
                    Err(x) => println!("     {} seed {}: {x}", e.tag, e.seed),
                }
                if b == Branch::A && frac != 1.0 {
                    a_fracs_ok = false;
                    println!("     {} seed {}: affine fraction {frac}", e.tag, e.seed);
                }
            }
            None => {
                b2_total += 1;
                match &got {
                    Ok(r) if r.family_guess.as_ref().map(|p| p.tag) == Some(e.tag) => b2_ok += 1,
                    Ok(r) => println!("     {} seed {}: got {:?}", e.tag, e.seed, r.family_guess.as_ref().map(|p| p.tag)),
                    Err(x) => println!("     {} seed {}: {x}", e.tag, e.seed),
                }
                b2_worst = b2_worst.max(frac);
                if !(frac < C10_B2_MAX) {
                    d_bad += 1;
                    println!("     {} seed {}: affine fraction {frac}", e.tag, e.seed);
                }
            }
        }
    }
    let rate = b2_ok as f64 / b2_total as f64;
    let l9 = line(
        9,
        ab_ok == ab_total && rate >= C9_B2_RATE,
        format!("classification: A/B1 branch {ab_ok}/{ab_total}, B2 tag {b2_ok}/{b2_total} ({:.1}% >= 95%)", 100.0 * rate),
    );
    let l10 = line(
        10,
        a_fracs_ok && d_bad == 0,
        format!("dichotomy: branch A all affine = {a_fracs_ok}, B2 worst affine fraction {b2_worst:.3} (< {C10_B2_MAX})"),
    );
    (l9, l10)
}

fn main() {
    let mut lines = vec![criterion1(), criterion2()];
    let (c, errors, dt) = corpus();
    lines.push(criterion3(&c, &errors, dt));
    lines.push(criterion4(&c));
    lines.push(criterion5(&c));
    lines.push(criterion6());
    lines.push(criterion7());
    lines.push(criterion8());
    let (l9, l10) = criterion9_10(&c);
    lines.push(l9);
    lines.push(l10);
    let failed: Vec<&str> = lines.iter().filter(|l| !l.ok).map(|l| l.text.as_str()).collect();
    println!("{}/{} criteria pass", lines.len() - failed.len(), lines.len());
    if !failed.is_empty() {
        std::process::exit(1);
    }
}
