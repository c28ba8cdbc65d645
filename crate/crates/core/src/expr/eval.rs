use std::collections::BTreeMap;

use super::{BinOp, Expr, Func};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("unbound variable `{0}`")]
    Unbound(String),
    #[error("{func}({arg}) is outside the function's domain")]
    Domain { func: &'static str, arg: f64 },
    #[error("division by zero")]
    DivisionByZero,
}

/// Source of variable values during evaluation.
pub trait VarSource {
    fn lookup(&self, name: &str) -> Option<f64>;
}

/// Map from variable name to value.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Bindings(BTreeMap<String, f64>);

impl Bindings {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, name: impl Into<String>, value: f64) -> &mut Self {
        self.0.insert(name.into(), value);
        self
    }

    pub fn with(mut self, name: impl Into<String>, value: f64) -> Self {
        self.set(name, value);
        self
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.0.get(name).copied()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.0.contains_key(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.0.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl<K: Into<String>> FromIterator<(K, f64)> for Bindings {
    fn from_iter<T: IntoIterator<Item = (K, f64)>>(iter: T) -> Self {
        Bindings(iter.into_iter().map(|(k, v)| (k.into(), v)).collect())
    }
}

impl VarSource for Bindings {
    fn lookup(&self, name: &str) -> Option<f64> {
        self.get(name)
    }
}

/// A point of the two-dimensional base space, bound to `q1` and `q2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point2(pub [f64; 2]);

impl VarSource for Point2 {
    #[inline]
    fn lookup(&self, name: &str) -> Option<f64> {
        match name {
            "q1" => Some(self.0[0]),
            "q2" => Some(self.0[1]),
            _ => None,
        }
    }
}

pub(crate) fn apply_func(func: Func, x: f64) -> Result<f64, EvalError> {
    let domain = || EvalError::Domain {
        func: func.name(),
        arg: x,
    };
    match func {
        Func::Sin => Ok(x.sin()),
        Func::Cos => Ok(x.cos()),
        Func::Exp => Ok(x.exp()),
        Func::Ln if x > 0.0 => Ok(x.ln()),
        Func::Ln => Err(domain()),
        Func::Sqrt if x >= 0.0 => Ok(x.sqrt()),
        Func::Sqrt => Err(domain()),
    }
}

pub(crate) fn apply_binary(op: BinOp, a: f64, b: f64) -> Result<f64, EvalError> {
    match op {
        BinOp::Add => Ok(a + b),
        BinOp::Sub => Ok(a - b),
        BinOp::Mul => Ok(a * b),
        BinOp::Div if b == 0.0 => Err(EvalError::DivisionByZero),
        BinOp::Div => Ok(a / b),
    }
}

pub(crate) fn apply_pow(base: f64, exponent: f64) -> Result<f64, EvalError> {
    if base == 0.0 && exponent < 0.0 {
        return Err(EvalError::DivisionByZero);
    }
    let value = base.powf(exponent);
    if value.is_nan() && !base.is_nan() {
        return Err(EvalError::Domain {
            func: "pow",
            arg: base,
        });
    }
    Ok(value)
}

impl Expr {
    /// Evaluates in IEEE double precision. Domain violations are errors
    /// rather than NaN.
    pub fn evaluate(&self, vars: &impl VarSource) -> Result<f64, EvalError> {
        match self {
            Expr::Const(c) => Ok(*c),
            Expr::Var(name) => vars
                .lookup(name)
                .ok_or_else(|| EvalError::Unbound(name.clone())),
            Expr::Neg(inner) => Ok(-inner.evaluate(vars)?),
            Expr::Binary(op, lhs, rhs) => {
                apply_binary(*op, lhs.evaluate(vars)?, rhs.evaluate(vars)?)
            }
            Expr::Pow(base, c) => apply_pow(base.evaluate(vars)?, *c),
            Expr::Call(func, arg) => apply_func(*func, arg.evaluate(vars)?),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::parse;
    use super::*;

    #[test]
    fn direct_arithmetic() {
        let e = parse("0.5*k*q1^2").unwrap();
        let b = Bindings::from_iter([("k", 1.0), ("q1", 2.0)]);
        assert_eq!(e.evaluate(&b).unwrap(), 2.0);
        assert_eq!(parse("exp(0)").unwrap().evaluate(&Bindings::new()).unwrap(), 1.0);
    }

    #[test]
    fn ln_of_negative_is_domain_error() {
        let e = parse("ln(q1)").unwrap();
        let err = e.evaluate(&Bindings::from_iter([("q1", -1.0)])).unwrap_err();
        assert!(matches!(err, EvalError::Domain { func: "ln", .. }));
        let err = e.evaluate(&Bindings::from_iter([("q1", 0.0)])).unwrap_err();
        assert!(matches!(err, EvalError::Domain { func: "ln", .. }));
    }

    #[test]
    fn sqrt_domain() {
        let e = parse("sqrt(x)").unwrap();
        assert_eq!(e.evaluate(&Bindings::from_iter([("x", 0.0)])).unwrap(), 0.0);
        assert!(matches!(
            e.evaluate(&Bindings::from_iter([("x", -1e-300)])),
            Err(EvalError::Domain { func: "sqrt", .. })
        ));
    }

    #[test]
    fn division_by_zero() {
        let e = parse("1/(x-1)").unwrap();
        assert_eq!(
            e.evaluate(&Bindings::from_iter([("x", 1.0)])),
            Err(EvalError::DivisionByZero)
        );
        let e = parse("x^-2").unwrap();
        assert_eq!(
            e.evaluate(&Bindings::from_iter([("x", 0.0)])),
            Err(EvalError::DivisionByZero)
        );
    }

    #[test]
    fn fractional_power_of_negative_base() {
        let e = parse("x^0.5").unwrap();
        assert!(matches!(
            e.evaluate(&Bindings::from_iter([("x", -4.0)])),
            Err(EvalError::Domain { func: "pow", .. })
        ));
        let e = parse("x^3").unwrap();
        assert_eq!(e.evaluate(&Bindings::from_iter([("x", -2.0)])).unwrap(), -8.0);
    }

    #[test]
    fn unbound_variable() {
        let e = parse("k*q").unwrap();
        assert_eq!(
            e.evaluate(&Bindings::from_iter([("q", 1.0)])),
            Err(EvalError::Unbound("k".into()))
        );
    }

    #[test]
    fn point_source_binds_q1_q2() {
        let e = parse("q1 - 2*q2").unwrap();
        assert_eq!(e.evaluate(&Point2([3.0, 1.0])).unwrap(), 1.0);
    }
}
