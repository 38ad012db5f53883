//! Free functions for the two affine families.

use crate::fncore::Expr;

/// Names accepted as `free_fn` for `Main1_AffineG`.
pub const F_CATALOG: [&str; 5] = ["exp", "cosh", "cube", "sin", "square"];
/// Names accepted as `free_fn` for `Main1_AffineF`.
pub const G_PAIR_CATALOG: [&str; 4] = ["exp_sin2x", "cube_atan", "sinh_tanh", "id_exp"];

pub fn catalog_f(name: &str) -> Option<Expr> {
    let x = Expr::x();
    Some(match name {
        "exp" => x.exp(),
        "cosh" => x.cosh(),
        "cube" => x.powi(3) - x,
        "sin" => x.sin(),
        "square" => x.powi(2),
        _ => return None,
    })
}

/// Strictly increasing pair `(g1, g2)`.
pub fn catalog_g_pair(name: &str) -> Option<(Expr, Expr)> {
    let x = Expr::x();
    Some(match name {
        "exp_sin2x" => (x.exp(), x.sin() + 2.0 * x.clone()),
        "cube_atan" => (x.powi(3) + x.clone(), x.atan()),
        "sinh_tanh" => (x.sinh(), x.tanh()),
        "id_exp" => (x.clone(), x.exp()),
        _ => return None,
    })
}
