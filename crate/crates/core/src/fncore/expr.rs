//! Small expression trees in one variable.
//!
//! An [`Expr`] can be evaluated on plain `f64` or on any dual number type
//! from `num_dual`, which gives exact first to third derivatives without
//! finite differences.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::Arc;

use num_dual::DualNum;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Op {
    Ln,
    LnAbs,
    Exp,
    Sin,
    Cos,
    Tan,
    Cot,
    Atan,
    Sinh,
    Cosh,
    Tanh,
    Abs,
    Sqrt,
}

impl Op {
    fn name(self) -> &'static str {
        match self {
            Op::Ln => "ln",
            Op::LnAbs => "ln|.|",
            Op::Exp => "exp",
            Op::Sin => "sin",
            Op::Cos => "cos",
            Op::Tan => "tan",
            Op::Cot => "cot",
            Op::Atan => "atan",
            Op::Sinh => "sinh",
            Op::Cosh => "cosh",
            Op::Tanh => "tanh",
            Op::Abs => "abs",
            Op::Sqrt => "sqrt",
        }
    }
}

#[derive(Debug)]
enum Node {
    X,
    Const(f64),
    Add(Expr, Expr),
    Sub(Expr, Expr),
    Mul(Expr, Expr),
    Div(Expr, Expr),
    Neg(Expr),
    Powi(Expr, i32),
    Apply(Op, Expr),
}

/// Immutable, cheaply clonable expression in the variable `x`.
#[derive(Clone, Debug)]
pub struct Expr(Arc<Node>);

impl Expr {
    pub fn x() -> Expr {
        Expr(Arc::new(Node::X))
    }

    pub fn num(v: f64) -> Expr {
        Expr(Arc::new(Node::Const(v)))
    }

    fn node(n: Node) -> Expr {
        Expr(Arc::new(n))
    }

    fn as_const(&self) -> Option<f64> {
        match *self.0 {
            Node::Const(v) => Some(v),
            _ => None,
        }
    }

    fn apply(&self, op: Op) -> Expr {
        Expr::node(Node::Apply(op, self.clone()))
    }

    pub fn ln(&self) -> Expr {
        self.apply(Op::Ln)
    }
    /// `ln|self|`
    pub fn ln_abs(&self) -> Expr {
        self.apply(Op::LnAbs)
    }
    pub fn exp(&self) -> Expr {
        self.apply(Op::Exp)
    }
    pub fn sin(&self) -> Expr {
        self.apply(Op::Sin)
    }
    pub fn cos(&self) -> Expr {
        self.apply(Op::Cos)
    }
    pub fn tan(&self) -> Expr {
        self.apply(Op::Tan)
    }
    pub fn cot(&self) -> Expr {
        self.apply(Op::Cot)
    }
    pub fn atan(&self) -> Expr {
        self.apply(Op::Atan)
    }
    pub fn sinh(&self) -> Expr {
        self.apply(Op::Sinh)
    }
    pub fn cosh(&self) -> Expr {
        self.apply(Op::Cosh)
    }
    pub fn tanh(&self) -> Expr {
        self.apply(Op::Tanh)
    }
    pub fn abs(&self) -> Expr {
        self.apply(Op::Abs)
    }
    pub fn sqrt(&self) -> Expr {
        self.apply(Op::Sqrt)
    }
    pub fn powi(&self, n: i32) -> Expr {
        match n {
            0 => Expr::num(1.0),
            1 => self.clone(),
            _ => Expr::node(Node::Powi(self.clone(), n)),
        }
    }
    pub fn recip(&self) -> Expr {
        Expr::num(1.0) / self.clone()
    }

    /// Substitute `inner` for `x`.
    pub fn compose(&self, inner: &Expr) -> Expr {
        match &*self.0 {
            Node::X => inner.clone(),
            Node::Const(_) => self.clone(),
            Node::Add(a, b) => a.compose(inner) + b.compose(inner),
            Node::Sub(a, b) => a.compose(inner) - b.compose(inner),
            Node::Mul(a, b) => a.compose(inner) * b.compose(inner),
            Node::Div(a, b) => a.compose(inner) / b.compose(inner),
            Node::Neg(a) => -a.compose(inner),
            Node::Powi(a, n) => a.compose(inner).powi(*n),
            Node::Apply(op, a) => a.compose(inner).apply(*op),
        }
    }

    /// Evaluate on `f64` or a dual number.
    pub fn eval<D: DualNum<Primitive = f64> + Copy>(&self, x: D) -> D {
        match &*self.0 {
            Node::X => x,
            Node::Const(v) => D::from(*v),
            Node::Add(a, b) => a.eval(x) + b.eval(x),
            Node::Sub(a, b) => a.eval(x) - b.eval(x),
            Node::Mul(a, b) => a.eval(x) * b.eval(x),
            Node::Div(a, b) => a.eval(x) / b.eval(x),
            Node::Neg(a) => -a.eval(x),
            Node::Powi(a, n) => a.eval(x).powi(*n),
            Node::Apply(op, a) => {
                let v = a.eval(x);
                match op {
                    Op::Ln => v.ln(),
                    Op::LnAbs => {
                        if v.re() < 0.0 {
                            (-v).ln()
                        } else {
                            v.ln()
                        }
                    }
                    Op::Exp => v.exp(),
                    Op::Sin => v.sin(),
                    Op::Cos => v.cos(),
                    Op::Tan => v.tan(),
                    Op::Cot => v.tan().recip(),
                    Op::Atan => v.atan(),
                    Op::Sinh => v.sinh(),
                    Op::Cosh => v.cosh(),
                    Op::Tanh => v.tanh(),
                    Op::Abs => {
                        if v.re() < 0.0 {
                            -v
                        } else {
                            v
                        }
                    }
                    Op::Sqrt => v.sqrt(),
                }
            }
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        self.eval(x)
    }

    fn precedence(&self) -> u8 {
        match &*self.0 {
            Node::Add(..) | Node::Sub(..) => 1,
            Node::Mul(..) | Node::Div(..) => 2,
            Node::Neg(_) => 3,
            Node::Powi(..) => 4,
            Node::Const(v) if *v < 0.0 => 3,
            _ => 5,
        }
    }

    fn fmt_child(&self, f: &mut fmt::Formatter<'_>, min_prec: u8) -> fmt::Result {
        if self.precedence() < min_prec {
            write!(f, "({self})")
        } else {
            write!(f, "{self}")
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &*self.0 {
            Node::X => write!(f, "x"),
            Node::Const(v) => write!(f, "{v}"),
            Node::Add(a, b) => {
                a.fmt_child(f, 1)?;
                write!(f, " + ")?;
                b.fmt_child(f, 2)
            }
            Node::Sub(a, b) => {
                a.fmt_child(f, 1)?;
                write!(f, " - ")?;
                b.fmt_child(f, 2)
            }
            Node::Mul(a, b) => {
                a.fmt_child(f, 2)?;
                write!(f, "*")?;
                b.fmt_child(f, 3)
            }
            Node::Div(a, b) => {
                a.fmt_child(f, 2)?;
                write!(f, "/")?;
                b.fmt_child(f, 3)
            }
            Node::Neg(a) => {
                write!(f, "-")?;
                a.fmt_child(f, 3)
            }
            Node::Powi(a, n) => {
                a.fmt_child(f, 5)?;
                write!(f, "^{n}")
            }
            Node::Apply(Op::LnAbs, a) => write!(f, "ln|{a}|"),
            Node::Apply(Op::Abs, a) => write!(f, "|{a}|"),
            Node::Apply(op, a) => write!(f, "{}({a})", op.name()),
        }
    }
}

impl Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        match (self.as_const(), rhs.as_const()) {
            (Some(a), Some(b)) => Expr::num(a + b),
            (Some(a), None) if a == 0.0 => rhs,
            (None, Some(b)) if b == 0.0 => self,
            _ => Expr::node(Node::Add(self, rhs)),
        }
    }
}

impl Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        match (self.as_const(), rhs.as_const()) {
            (Some(a), Some(b)) => Expr::num(a - b),
            (None, Some(b)) if b == 0.0 => self,
            (Some(a), None) if a == 0.0 => -rhs,
            _ => Expr::node(Node::Sub(self, rhs)),
        }
    }
}

impl Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        match (self.as_const(), rhs.as_const()) {
            (Some(a), Some(b)) => Expr::num(a * b),
            (Some(a), None) if a == 1.0 => rhs,
            (None, Some(b)) if b == 1.0 => self,
            (Some(a), None) if a == -1.0 => -rhs,
            (None, Some(b)) if b == -1.0 => -self,
            _ => Expr::node(Node::Mul(self, rhs)),
        }
    }
}

impl Div for Expr {
    type Output = Expr;
    fn div(self, rhs: Expr) -> Expr {
        match (self.as_const(), rhs.as_const()) {
            (Some(a), Some(b)) => Expr::num(a / b),
            (None, Some(b)) if b == 1.0 => self,
            _ => Expr::node(Node::Div(self, rhs)),
        }
    }
}

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        match &*self.0 {
            Node::Const(v) => Expr::num(-v),
            Node::Neg(a) => a.clone(),
            _ => Expr::node(Node::Neg(self)),
        }
    }
}

macro_rules! scalar_ops {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr<f64> for Expr {
            type Output = Expr;
            fn $m(self, rhs: f64) -> Expr {
                $tr::$m(self, Expr::num(rhs))
            }
        }
        impl $tr<Expr> for f64 {
            type Output = Expr;
            fn $m(self, rhs: Expr) -> Expr {
                $tr::$m(Expr::num(self), rhs)
            }
        }
        impl $tr<&Expr> for Expr {
            type Output = Expr;
            fn $m(self, rhs: &Expr) -> Expr {
                $tr::$m(self, rhs.clone())
            }
        }
        impl $tr<&Expr> for f64 {
            type Output = Expr;
            fn $m(self, rhs: &Expr) -> Expr {
                $tr::$m(Expr::num(self), rhs.clone())
            }
        }
    )*};
}
scalar_ops!(Add add, Sub sub, Mul mul, Div div);
