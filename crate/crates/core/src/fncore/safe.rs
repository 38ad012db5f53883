//! Largest subinterval around a seed on which a set of functions stays
//! finite, monotone-flagged functions stay monotone, and guard
//! expressions keep their sign.

use super::{FnError, Interval, Monotonicity, RealFn};

const SCAN_STEPS: usize = 2048;
const BISECT_STEPS: usize = 64;

struct Checker<'a> {
    fs: &'a [RealFn],
    guards: &'a [RealFn],
    guard_signs: Vec<bool>,
}

impl Checker<'_> {
    fn values(&self, x: f64) -> Vec<f64> {
        self.fs.iter().map(|f| f.eval(x)).collect()
    }

    // finite values and guards on their seed side
    fn point_ok(&self, x: f64) -> bool {
        self.fs.iter().all(|f| f.eval(x).is_finite())
            && self.guards.iter().zip(&self.guard_signs).all(|(g, &pos)| {
                let v = g.eval(x);
                v.is_finite() && v != 0.0 && (v > 0.0) == pos
            })
    }
}

fn bisect_point(ch: &Checker, mut good: f64, mut bad: f64) -> f64 {
    for _ in 0..BISECT_STEPS {
        let m = 0.5 * (good + bad);
        if m == good || m == bad {
            break;
        }
        if ch.point_ok(m) {
            good = m;
        } else {
            bad = m;
        }
    }
    bad
}

// Locate a sign change of f in [a, b] and decide whether it is a pole.
fn is_pole(f: &RealFn, a: f64, b: f64) -> Option<f64> {
    let (fa0, fb0) = (f.eval(a), f.eval(b));
    let (mut lo, mut hi, mut flo) = (a, b, fa0);
    for _ in 0..BISECT_STEPS {
        let m = 0.5 * (lo + hi);
        if m == lo || m == hi {
            break;
        }
        let fm = f.eval(m);
        if !fm.is_finite() {
            return Some(m);
        }
        if (fm > 0.0) == (flo > 0.0) {
            lo = m;
            flo = fm;
        } else {
            hi = m;
        }
    }
    let near = f.eval(lo).abs().min(f.eval(hi).abs());
    if near > fa0.abs().max(fb0.abs()) {
        Some(0.5 * (lo + hi))
    } else {
        None
    }
}

fn scan(ch: &Checker, seed: f64, end: f64) -> f64 {
    let step = (end - seed) / SCAN_STEPS as f64;
    let mut prev_x = seed;
    let mut prev = ch.values(seed);
    let mut mono_dir: Vec<Option<bool>> = vec![None; ch.fs.len()];
    for i in 1..=SCAN_STEPS {
        let x = if i == SCAN_STEPS { end } else { seed + step * i as f64 };
        if !ch.point_ok(x) {
            return bisect_point(ch, prev_x, x);
        }
        let cur = ch.values(x);
        for (k, f) in ch.fs.iter().enumerate() {
            let (p, c) = (prev[k], cur[k]);
            if f.monotonicity() != Monotonicity::Unknown {
                let up = c > p;
                if c == p {
                    return prev_x;
                }
                // direction along the scan, compared with the first step
                match mono_dir[k] {
                    None => mono_dir[k] = Some(up),
                    Some(d) if d != up => return prev_x,
                    _ => {}
                }
            }
            if (p > 0.0) != (c > 0.0) && p != 0.0 && c != 0.0 {
                if let Some(pole) = is_pole(f, prev_x, x) {
                    return pole;
                }
            }
        }
        prev_x = x;
        prev = cur;
    }
    end
}

/// [`safe_subinterval`] with extra guard functions that must keep the sign
/// they have at `seed` (arguments of `|.|`, denominators, `cos` under `tan`).
pub fn safe_subinterval_with_guards(
    f_list: &[RealFn],
    guards: &[RealFn],
    seed: f64,
    request: Interval,
) -> Result<Interval, FnError> {
    let mut window = request;
    for f in f_list.iter().chain(guards) {
        window = window.intersect(&f.domain()).map_err(|_| FnError::SeedInvalid { seed })?;
    }
    if !window.contains(seed) {
        return Err(FnError::SeedInvalid { seed });
    }
    let guard_signs: Vec<bool> = guards.iter().map(|g| g.eval(seed) > 0.0).collect();
    let ch = Checker { fs: f_list, guards, guard_signs };
    if !ch.point_ok(seed) {
        return Err(FnError::SeedInvalid { seed });
    }
    let (a, b) = window.sampling_bounds();
    if !(seed > a && seed < b) {
        return Err(FnError::SeedInvalid { seed });
    }
    let eps = request.margin();
    let right = scan(&ch, seed, b);
    let left = scan(&ch, seed, a);
    let hi = if right >= b { window.hi() } else { (right - eps).max(0.5 * (seed + right)) };
    let lo = if left <= a { window.lo() } else { (left + eps).min(0.5 * (seed + left)) };
    Interval::new(lo, hi)
}

/// Largest subinterval of `request` containing `seed` on which every
/// function is finite and every monotone-flagged function stays monotone.
///
/// Found by outward scanning from the seed; a failing step is refined by
/// bisection. Sign changes that blow up under bisection count as poles.
pub fn safe_subinterval(f_list: &[RealFn], seed: f64, request: Interval) -> Result<Interval, FnError> {
    safe_subinterval_with_guards(f_list, &[], seed, request)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn iv(a: f64, b: f64) -> Interval {
        Interval::new(a, b).unwrap()
    }

    #[test]
    fn no_singularity() {
        let f = RealFn::new(Interval::real_line(), |x| x * x);
        let s = safe_subinterval(&[f], 0.0, iv(-1.0, 1.0)).unwrap();
        assert_eq!(s, iv(-1.0, 1.0));
    }

    #[test]
    fn tan_poles() {
        let f = RealFn::new(Interval::real_line(), f64::tan);
        let s = safe_subinterval(&[f], 0.0, iv(-3.0, 3.0)).unwrap();
        assert!((s.lo() + FRAC_PI_2).abs() < 1e-4 && s.lo() > -FRAC_PI_2);
        assert!((s.hi() - FRAC_PI_2).abs() < 1e-4 && s.hi() < FRAC_PI_2);
    }

    #[test]
    fn log_left_boundary() {
        let f = RealFn::new(Interval::real_line(), |x| (x - 1.0).ln());
        let s = safe_subinterval(&[f], 2.0, iv(0.0, 5.0)).unwrap();
        assert!(s.lo() > 1.0 && s.lo() < 1.0 + 1e-4);
        assert_eq!(s.hi(), 5.0);
    }

    #[test]
    fn roots_are_not_poles() {
        let f = RealFn::new(Interval::real_line(), f64::sin);
        let s = safe_subinterval(&[f], 1.0, iv(-4.0, 4.0)).unwrap();
        assert_eq!(s, iv(-4.0, 4.0));
    }

    #[test]
    fn guard_sign_change() {
        let f = RealFn::new(Interval::real_line(), |x| x);
        let g = RealFn::new(Interval::real_line(), |x| x - 0.5);
        let s = safe_subinterval_with_guards(&[f], &[g], 1.0, iv(-2.0, 2.0)).unwrap();
        assert!(s.lo() > 0.5 && s.lo() < 0.5 + 1e-4);
    }

    #[test]
    fn monotone_flag() {
        let f = RealFn::new(Interval::real_line(), f64::sin).with_monotonicity(Monotonicity::Increasing);
        let s = safe_subinterval(&[f], 0.0, iv(-3.0, 3.0)).unwrap();
        assert!((s.hi() - FRAC_PI_2).abs() < 0.01 && s.hi() <= FRAC_PI_2);
        assert!((s.lo() + FRAC_PI_2).abs() < 0.01);
    }

    #[test]
    fn bad_seed() {
        let f = RealFn::new(Interval::real_line(), |x| x.ln());
        assert!(matches!(safe_subinterval(&[f], -1.0, iv(-2.0, 2.0)), Err(FnError::SeedInvalid { .. })));
    }
}
