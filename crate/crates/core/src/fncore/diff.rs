//! Central finite differences with Ridders-style Richardson extrapolation,
//! and the Schwarzian derivative built on top of them.

use super::{FnError, RealFn};

/// Smallest |f'| accepted by [`schwarzian_num`].
pub const SCHWARZIAN_FLOOR: f64 = 1e-8;

const SHRINK: f64 = 1.4;
const TABLEAU: usize = 15;

// Smallest usable starting step per order, relative to max(1, |x|);
// below it roundoff (eps/h^k) swamps the estimate.
fn min_step(order: usize) -> f64 {
    match order {
        1 => 1e-5,
        2 => 1e-4,
        _ => 1e-3,
    }
}

// Second-order central stencils; `reach` is the widest offset in units of h.
fn stencil(g: &dyn Fn(f64) -> f64, x: f64, h: f64, order: usize) -> f64 {
    match order {
        1 => (g(x + h) - g(x - h)) / (2.0 * h),
        2 => (g(x + h) - 2.0 * g(x) + g(x - h)) / (h * h),
        _ => (g(x + 2.0 * h) - 2.0 * g(x + h) + 2.0 * g(x - h) - g(x - 2.0 * h)) / (2.0 * h * h * h),
    }
}

fn reach(order: usize) -> f64 {
    if order == 3 {
        2.0
    } else {
        1.0
    }
}

fn richardson(g: &dyn Fn(f64) -> f64, lo: f64, hi: f64, x: f64, order: usize) -> Result<f64, FnError> {
    let scale = x.abs().max(1.0);
    let room = 0.9 * (x - lo).min(hi - x) / reach(order);
    let h0 = room.min(0.1 * scale);
    if h0 < min_step(order) * scale {
        return Err(FnError::TooCloseToBoundary { x, h: min_step(order) * scale });
    }
    let c2 = SHRINK * SHRINK;
    let mut prev: Vec<f64> = Vec::with_capacity(TABLEAU);
    let mut best = f64::NAN;
    let mut err = f64::INFINITY;
    let mut h = h0;
    for i in 0..TABLEAU {
        let mut row = Vec::with_capacity(i + 1);
        row.push(stencil(g, x, h, order));
        let mut fac = c2;
        for j in 1..=i {
            let v = (row[j - 1] * fac - prev[j - 1]) / (fac - 1.0);
            fac *= c2;
            let e = (v - row[j - 1]).abs().max((v - prev[j - 1]).abs());
            if e <= err && v.is_finite() {
                err = e;
                best = v;
            }
            row.push(v);
        }
        if i == 0 && row[0].is_finite() {
            best = row[0];
        }
        prev = row;
        h /= SHRINK;
    }
    if best.is_finite() {
        Ok(best)
    } else {
        Err(FnError::NonFinite { x })
    }
}

/// Derivative of order 1..=3 at `x`.
///
/// Uses the analytic derivative when `f` carries one of that order;
/// otherwise differentiates the highest available analytic derivative
/// (or `f` itself) numerically.
pub fn derive_num(f: &RealFn, x: f64, order: usize) -> Result<f64, FnError> {
    if !(1..=3).contains(&order) {
        return Err(FnError::BadOrder(order));
    }
    let dom = f.domain();
    if !dom.contains(x) {
        return Err(FnError::OutsideDomain { x });
    }
    let m = f.analytic_order().min(order);
    if m == order {
        let v = f.analytic(order, x).unwrap();
        return if v.is_finite() { Ok(v) } else { Err(FnError::NonFinite { x }) };
    }
    let base = f.deriv_fn(m);
    richardson(&*base, dom.lo(), dom.hi(), x, order - m)
}

/// `f'''/f' - 1.5 (f''/f')^2`.
pub fn schwarzian_num(f: &RealFn, x: f64) -> Result<f64, FnError> {
    let d1 = derive_num(f, x, 1)?;
    if d1.abs() < SCHWARZIAN_FLOOR {
        return Err(FnError::VanishingFirstDerivative { x, value: d1 });
    }
    let d2 = derive_num(f, x, 2)?;
    let d3 = derive_num(f, x, 3)?;
    let r = d2 / d1;
    Ok(d3 / d1 - 1.5 * r * r)
}
