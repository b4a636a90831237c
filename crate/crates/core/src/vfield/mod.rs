//! Scalar vector fields `f(t, x)` written as small expressions.
//!
//! Grammar, loosest binding first: `+ -`, `* /`, unary `-`, `^` with an
//! integer literal exponent. Atoms are decimal literals, the variables `t` and
//! `x`, parenthesised expressions and `sin`, `cos`, `exp`, `tanh`, `abs`
//! applied to a parenthesised argument.
//!
//! ```
//! use funnelsync_core::VectorField;
//! let f = VectorField::parse("(-1+0.1)*x + 10*sin(t)").unwrap();
//! let p = f.eval_with_partials(0.0, 1.0).unwrap();
//! assert!((p.value + 0.9).abs() < 1e-15);
//! assert_eq!(p.df_dt, 10.0);
//! ```

mod analysis;
mod parse;

pub use analysis::Structure;

use alloc::boxed::Box;
use alloc::string::String;
use core::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum VfError {
    Parse {
        offset: usize,
        message: String,
    },
    UnknownIdentifier {
        name: String,
        offset: usize,
    },
    /// Evaluation produced an infinite or NaN value; `node` is the printed
    /// innermost offending subexpression.
    NonFinite {
        node: String,
    },
}

impl fmt::Display for VfError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VfError::Parse { offset, message } => write!(f, "parse error at byte {offset}: {message}"),
            VfError::UnknownIdentifier { name, offset } => {
                write!(f, "unknown identifier '{name}' at byte {offset}")
            }
            VfError::NonFinite { node } => write!(f, "non-finite value while evaluating {node}"),
        }
    }
}

impl core::error::Error for VfError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Tanh,
    Abs,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Tanh => "tanh",
            Func::Abs => "abs",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    T,
    X,
    Neg(Box<Expr>),
    Func(Func, Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i32),
}

/// Fully parenthesised canonical form; parsing it yields the same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v:?}"),
            Expr::T => f.write_str("t"),
            Expr::X => f.write_str("x"),
            Expr::Neg(e) => write!(f, "(-{e})"),
            Expr::Func(g, e) => write!(f, "{}({e})", g.name()),
            Expr::Bin(op, a, b) => write!(f, "({a} {} {b})", op.symbol()),
            Expr::Pow(b, k) => write!(f, "({b}^{k})"),
        }
    }
}

/// Value and first partial derivatives of `f` at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Partials {
    pub value: f64,
    pub df_dt: f64,
    pub df_dx: f64,
}

#[derive(Debug, Clone, Copy)]
struct Dual {
    v: f64,
    dt: f64,
    dx: f64,
}

impl Dual {
    fn constant(v: f64) -> Dual {
        Dual { v, dt: 0.0, dx: 0.0 }
    }

    fn chain(self, v: f64, d: f64) -> Dual {
        Dual { v, dt: d * self.dt, dx: d * self.dx }
    }

    fn is_finite(&self) -> bool {
        self.v.is_finite() && self.dt.is_finite() && self.dx.is_finite()
    }
}

/// A parsed vector field together with its source text.
#[derive(Debug, Clone)]
pub struct VectorField {
    source: String,
    expr: Expr,
}

/// Two fields are equal when their trees are equal, whatever the spelling.
impl PartialEq for VectorField {
    fn eq(&self, other: &Self) -> bool {
        self.expr == other.expr
    }
}

impl VectorField {
    pub fn parse(source: &str) -> Result<VectorField, VfError> {
        let expr = parse::parse_expr(source)?;
        Ok(VectorField { source: String::from(source), expr })
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    /// Canonical fully parenthesised text.
    pub fn canonical(&self) -> String {
        alloc::format!("{}", self.expr)
    }

    pub fn eval(&self, t: f64, x: f64) -> Result<f64, VfError> {
        eval(&self.expr, t, x)
    }

    pub fn eval_with_partials(&self, t: f64, x: f64) -> Result<Partials, VfError> {
        let d = eval_dual(&self.expr, t, x)?;
        Ok(Partials { value: d.v, df_dt: d.dt, df_dx: d.dx })
    }

    pub fn structure(&self) -> Structure {
        analysis::structure(&self.expr)
    }
}

fn non_finite(e: &Expr) -> VfError {
    VfError::NonFinite { node: alloc::format!("{e}") }
}

fn eval(e: &Expr, t: f64, x: f64) -> Result<f64, VfError> {
    let v = match e {
        Expr::Num(v) => *v,
        Expr::T => t,
        Expr::X => x,
        Expr::Neg(a) => -eval(a, t, x)?,
        Expr::Func(g, a) => {
            let a = eval(a, t, x)?;
            match g {
                Func::Sin => libm::sin(a),
                Func::Cos => libm::cos(a),
                Func::Exp => libm::exp(a),
                Func::Tanh => libm::tanh(a),
                Func::Abs => a.abs(),
            }
        }
        Expr::Bin(op, a, b) => {
            let a = eval(a, t, x)?;
            let b = eval(b, t, x)?;
            match op {
                BinOp::Add => a + b,
                BinOp::Sub => a - b,
                BinOp::Mul => a * b,
                BinOp::Div => a / b,
            }
        }
        Expr::Pow(b, k) => powi(eval(b, t, x)?, *k),
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(non_finite(e))
    }
}

fn powi(b: f64, k: i32) -> f64 {
    let mut result = 1.0;
    let mut base = b;
    let mut n = k.unsigned_abs();
    while n > 0 {
        if n & 1 == 1 {
            result *= base;
        }
        base *= base;
        n >>= 1;
    }
    if k < 0 {
        1.0 / result
    } else {
        result
    }
}

fn eval_dual(e: &Expr, t: f64, x: f64) -> Result<Dual, VfError> {
    let d = match e {
        Expr::Num(v) => Dual::constant(*v),
        Expr::T => Dual { v: t, dt: 1.0, dx: 0.0 },
        Expr::X => Dual { v: x, dt: 0.0, dx: 1.0 },
        Expr::Neg(a) => {
            let a = eval_dual(a, t, x)?;
            Dual { v: -a.v, dt: -a.dt, dx: -a.dx }
        }
        Expr::Func(g, a) => {
            let a = eval_dual(a, t, x)?;
            match g {
                Func::Sin => a.chain(libm::sin(a.v), libm::cos(a.v)),
                Func::Cos => a.chain(libm::cos(a.v), -libm::sin(a.v)),
                Func::Exp => {
                    let ev = libm::exp(a.v);
                    a.chain(ev, ev)
                }
                Func::Tanh => {
                    let th = libm::tanh(a.v);
                    a.chain(th, (1.0 - th) * (1.0 + th))
                }
                Func::Abs => {
                    let s = if a.v > 0.0 {
                        1.0
                    } else if a.v < 0.0 {
                        -1.0
                    } else {
                        0.0
                    };
                    a.chain(a.v.abs(), s)
                }
            }
        }
        Expr::Bin(op, a, b) => {
            let a = eval_dual(a, t, x)?;
            let b = eval_dual(b, t, x)?;
            match op {
                BinOp::Add => Dual { v: a.v + b.v, dt: a.dt + b.dt, dx: a.dx + b.dx },
                BinOp::Sub => Dual { v: a.v - b.v, dt: a.dt - b.dt, dx: a.dx - b.dx },
                BinOp::Mul => Dual { v: a.v * b.v, dt: a.dt * b.v + a.v * b.dt, dx: a.dx * b.v + a.v * b.dx },
                BinOp::Div => {
                    let q = a.v / b.v;
                    Dual { v: q, dt: (a.dt - q * b.dt) / b.v, dx: (a.dx - q * b.dx) / b.v }
                }
            }
        }
        Expr::Pow(b, k) => {
            let b = eval_dual(b, t, x)?;
            if *k == 0 {
                Dual::constant(1.0)
            } else {
                b.chain(powi(b.v, *k), *k as f64 * powi(b.v, k - 1))
            }
        }
    };
    if d.is_finite() {
        Ok(d)
    } else {
        Err(non_finite(e))
    }
}
