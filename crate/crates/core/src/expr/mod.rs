//! Scalar expression language for potentials.
//!
//! Expressions are immutable trees over real constants, named variables,
//! the arithmetic operators `+ - * / ^` and the functions `sin cos exp ln
//! sqrt`. Exponents are always numeric constants, which keeps the
//! derivative of every expression expressible in the same language.
//!
//! ```
//! use topoquant::expr::{parse, Bindings};
//!
//! let v = parse("0.5*k*q1^2").unwrap();
//! let b = Bindings::from_iter([("k", 1.0), ("q1", 2.0)]);
//! assert_eq!(v.evaluate(&b).unwrap(), 2.0);
//! ```

mod calculus;
mod eval;
mod parser;

use std::collections::BTreeSet;
use std::fmt;

pub use eval::{Bindings, EvalError, Point2, VarSource};
pub use parser::{parse, ParseError};

/// Binary arithmetic operator. Powers are a separate node kind because
/// their exponent is a number, not an expression.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    pub fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
        }
    }
}

/// Elementary functions understood by the parser.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Ln,
    Sqrt,
}

impl Func {
    pub const ALL: [Func; 5] = [Func::Sin, Func::Cos, Func::Exp, Func::Ln, Func::Sqrt];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sqrt => "sqrt",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }
}

/// Expression tree node.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(String),
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    /// `base ^ exponent` with a constant exponent.
    Pow(Box<Expr>, f64),
    Call(Func, Box<Expr>),
}

impl Expr {
    pub fn constant(value: f64) -> Expr {
        Expr::Const(value)
    }

    pub fn var(name: impl Into<String>) -> Expr {
        Expr::Var(name.into())
    }

    pub fn binary(op: BinOp, lhs: Expr, rhs: Expr) -> Expr {
        Expr::Binary(op, Box::new(lhs), Box::new(rhs))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn add(lhs: Expr, rhs: Expr) -> Expr {
        Expr::binary(BinOp::Add, lhs, rhs)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn sub(lhs: Expr, rhs: Expr) -> Expr {
        Expr::binary(BinOp::Sub, lhs, rhs)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn mul(lhs: Expr, rhs: Expr) -> Expr {
        Expr::binary(BinOp::Mul, lhs, rhs)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn div(lhs: Expr, rhs: Expr) -> Expr {
        Expr::binary(BinOp::Div, lhs, rhs)
    }

    pub fn pow(base: Expr, exponent: f64) -> Expr {
        Expr::Pow(Box::new(base), exponent)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn neg(inner: Expr) -> Expr {
        Expr::Neg(Box::new(inner))
    }

    pub fn call(func: Func, arg: Expr) -> Expr {
        Expr::Call(func, Box::new(arg))
    }

    pub fn as_const(&self) -> Option<f64> {
        match self {
            Expr::Const(c) => Some(*c),
            _ => None,
        }
    }

    /// Names of all variables appearing in the expression.
    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Expr::Const(_) => {}
            Expr::Var(name) => {
                out.insert(name.clone());
            }
            Expr::Neg(inner) | Expr::Pow(inner, _) | Expr::Call(_, inner) => {
                inner.collect_vars(out)
            }
            Expr::Binary(_, lhs, rhs) => {
                lhs.collect_vars(out);
                rhs.collect_vars(out);
            }
        }
    }

    pub fn contains_var(&self, name: &str) -> bool {
        match self {
            Expr::Const(_) => false,
            Expr::Var(v) => v == name,
            Expr::Neg(inner) | Expr::Pow(inner, _) | Expr::Call(_, inner) => {
                inner.contains_var(name)
            }
            Expr::Binary(_, lhs, rhs) => lhs.contains_var(name) || rhs.contains_var(name),
        }
    }

    /// Replaces every bound variable with its value. Unbound variables are
    /// left in place. The result is not simplified.
    pub fn substitute(&self, bindings: &Bindings) -> Expr {
        match self {
            Expr::Const(c) => Expr::Const(*c),
            Expr::Var(name) => match bindings.get(name) {
                Some(value) => Expr::Const(value),
                None => Expr::Var(name.clone()),
            },
            Expr::Neg(inner) => Expr::neg(inner.substitute(bindings)),
            Expr::Binary(op, lhs, rhs) => {
                Expr::binary(*op, lhs.substitute(bindings), rhs.substitute(bindings))
            }
            Expr::Pow(base, c) => Expr::pow(base.substitute(bindings), *c),
            Expr::Call(f, arg) => Expr::call(*f, arg.substitute(bindings)),
        }
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        match self {
            Expr::Const(_) | Expr::Var(_) => 1,
            Expr::Neg(inner) | Expr::Pow(inner, _) | Expr::Call(_, inner) => 1 + inner.size(),
            Expr::Binary(_, lhs, rhs) => 1 + lhs.size() + rhs.size(),
        }
    }
}

/// Formats a float as the shortest decimal string that parses back to the
/// same value. Large and tiny magnitudes use exponent notation.
pub fn format_number(value: f64) -> String {
    let magnitude = value.abs();
    if magnitude == 0.0 || (1e-5..1e16).contains(&magnitude) {
        format!("{value}")
    } else {
        format!("{value:e}")
    }
}

/// Fully parenthesized printing. Negative constants print as `(-c)` so
/// that the output re-parses to the same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => {
                if c.is_sign_negative() {
                    write!(f, "(-{})", format_number(-c))
                } else {
                    write!(f, "{}", format_number(*c))
                }
            }
            Expr::Var(name) => write!(f, "{name}"),
            Expr::Neg(inner) => write!(f, "(-{inner})"),
            Expr::Binary(op, lhs, rhs) => write!(f, "({lhs}{}{rhs})", op.symbol()),
            Expr::Pow(base, c) => {
                if c.is_sign_negative() {
                    write!(f, "({base}^(-{}))", format_number(-c))
                } else {
                    write!(f, "({base}^{})", format_number(*c))
                }
            }
            Expr::Call(func, arg) => {
                // `arg` already carries its own parentheses unless it is a leaf.
                write!(f, "{}({arg})", func.name())
            }
        }
    }
}
