//! Local simplification and symbolic differentiation.
//!
//! Both are built on the same smart constructors, so every derivative comes
//! out already folded. Rewrites are purely local and sound:
//! constant folding (only when the result is finite), `x+0`, `0+x`, `x-0`,
//! `0-x`, `x*1`, `1*x`, `x*0`, `0*x`, `x/1`, `--x`, `x^1`, `x^0`.

use super::eval::{apply_binary, apply_func, apply_pow};
use super::{BinOp, Expr, Func};

fn fold(value: Result<f64, super::EvalError>) -> Option<Expr> {
    match value {
        // `+ 0.0` turns a negative zero into a positive one.
        Ok(v) if v.is_finite() => Some(Expr::Const(v + 0.0)),
        _ => None,
    }
}

fn is(e: &Expr, value: f64) -> bool {
    e.as_const() == Some(value)
}

fn mk_neg(inner: Expr) -> Expr {
    match inner {
        Expr::Const(c) => Expr::Const(-c + 0.0),
        Expr::Neg(x) => *x,
        other => Expr::neg(other),
    }
}

fn mk_binary(op: BinOp, lhs: Expr, rhs: Expr) -> Expr {
    if let (Some(a), Some(b)) = (lhs.as_const(), rhs.as_const()) {
        if let Some(folded) = fold(apply_binary(op, a, b)) {
            return folded;
        }
    }
    match op {
        BinOp::Add if is(&rhs, 0.0) => lhs,
        BinOp::Add if is(&lhs, 0.0) => rhs,
        BinOp::Sub if is(&rhs, 0.0) => lhs,
        BinOp::Sub if is(&lhs, 0.0) => mk_neg(rhs),
        BinOp::Mul if is(&lhs, 0.0) || is(&rhs, 0.0) => Expr::Const(0.0),
        BinOp::Mul if is(&rhs, 1.0) => lhs,
        BinOp::Mul if is(&lhs, 1.0) => rhs,
        BinOp::Div if is(&rhs, 1.0) => lhs,
        _ => Expr::binary(op, lhs, rhs),
    }
}

fn mk_pow(base: Expr, exponent: f64) -> Expr {
    if let Some(b) = base.as_const() {
        if let Some(folded) = fold(apply_pow(b, exponent)) {
            return folded;
        }
    }
    if exponent == 1.0 {
        base
    } else if exponent == 0.0 {
        Expr::Const(1.0)
    } else {
        Expr::pow(base, exponent)
    }
}

fn mk_call(func: Func, arg: Expr) -> Expr {
    if let Some(a) = arg.as_const() {
        if let Some(folded) = fold(apply_func(func, a)) {
            return folded;
        }
    }
    Expr::call(func, arg)
}

fn add(a: Expr, b: Expr) -> Expr {
    mk_binary(BinOp::Add, a, b)
}

fn sub(a: Expr, b: Expr) -> Expr {
    mk_binary(BinOp::Sub, a, b)
}

fn mul(a: Expr, b: Expr) -> Expr {
    mk_binary(BinOp::Mul, a, b)
}

fn div(a: Expr, b: Expr) -> Expr {
    mk_binary(BinOp::Div, a, b)
}

impl Expr {
    /// Bottom-up local simplification. Idempotent.
    pub fn simplify(&self) -> Expr {
        match self {
            Expr::Const(c) => Expr::Const(*c + 0.0),
            Expr::Var(name) => Expr::Var(name.clone()),
            Expr::Neg(inner) => mk_neg(inner.simplify()),
            Expr::Binary(op, lhs, rhs) => mk_binary(*op, lhs.simplify(), rhs.simplify()),
            Expr::Pow(base, c) => mk_pow(base.simplify(), *c),
            Expr::Call(func, arg) => mk_call(*func, arg.simplify()),
        }
    }

    /// Exact partial derivative with respect to `var`, simplified.
    pub fn differentiate(&self, var: &str) -> Expr {
        self.derive(var).simplify()
    }

    fn derive(&self, var: &str) -> Expr {
        if !self.contains_var(var) {
            return Expr::Const(0.0);
        }
        match self {
            Expr::Const(_) => Expr::Const(0.0),
            Expr::Var(name) => Expr::Const(if name == var { 1.0 } else { 0.0 }),
            Expr::Neg(inner) => mk_neg(inner.derive(var)),
            Expr::Binary(op, u, v) => {
                let du = u.derive(var);
                let dv = v.derive(var);
                let (u, v) = (u.simplify(), v.simplify());
                match op {
                    BinOp::Add => add(du, dv),
                    BinOp::Sub => sub(du, dv),
                    BinOp::Mul => add(mul(du, v), mul(u, dv)),
                    BinOp::Div => div(sub(mul(du, v.clone()), mul(u, dv)), mk_pow(v, 2.0)),
                }
            }
            Expr::Pow(u, c) => {
                let du = u.derive(var);
                let u = u.simplify();
                mul(mul(Expr::Const(*c), mk_pow(u, *c - 1.0)), du)
            }
            Expr::Call(func, u) => {
                let du = u.derive(var);
                let u = u.simplify();
                match func {
                    Func::Sin => mul(mk_call(Func::Cos, u), du),
                    Func::Cos => mul(mk_neg(mk_call(Func::Sin, u)), du),
                    Func::Exp => mul(mk_call(Func::Exp, u), du),
                    Func::Ln => div(du, u),
                    Func::Sqrt => div(du, mul(Expr::Const(2.0), mk_call(Func::Sqrt, u))),
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::{parse, Bindings};
    use super::*;

    fn eval(e: &Expr, vars: &[(&str, f64)]) -> f64 {
        e.evaluate(&Bindings::from_iter(vars.iter().copied())).unwrap()
    }

    #[test]
    fn identity_and_absorbing_elements() {
        let q1 = Expr::var("q1");
        assert_eq!(Expr::mul(Expr::Const(1.0), q1.clone()).simplify(), q1);
        assert_eq!(
            Expr::add(Expr::Const(2.0), Expr::Const(3.0)).simplify(),
            Expr::Const(5.0)
        );
        assert_eq!(
            Expr::mul(Expr::Const(0.0), Expr::call(Func::Sin, q1.clone())).simplify(),
            Expr::Const(0.0)
        );
        assert_eq!(Expr::add(q1.clone(), Expr::Const(0.0)).simplify(), q1);
        assert_eq!(Expr::pow(q1.clone(), 1.0).simplify(), q1);
        assert_eq!(Expr::neg(Expr::neg(q1.clone())).simplify(), q1);
    }

    #[test]
    fn folding_never_produces_non_finite_constants() {
        let e = parse("1/0").unwrap().simplify();
        assert_eq!(e, Expr::div(Expr::Const(1.0), Expr::Const(0.0)));
        let e = parse("ln(0 - 1)").unwrap().simplify();
        assert_eq!(e, Expr::call(Func::Ln, Expr::Const(-1.0)));
    }

    #[test]
    fn simplify_is_idempotent_on_examples() {
        for text in [
            "0*x + 1*(y - 0)",
            "-(-(x))^1",
            "0 - (0 - x)",
            "(x+0)*(1*y)/1",
            "sin(0)*x + exp(0)",
        ] {
            let once = parse(text).unwrap().simplify();
            assert_eq!(once.simplify(), once, "{text}");
        }
    }

    #[test]
    fn derivative_of_polynomial_potential() {
        let e = parse("E - 0.5*k*q^2").unwrap();
        let d = e.differentiate("q");
        for (k, q) in [(1.0, 0.3), (2.5, -1.2), (0.1, 4.0)] {
            let got = eval(&d, &[("E", 1.0), ("k", k), ("q", q)]);
            assert!((got + k * q).abs() <= 1e-15 * (k * q).abs().max(1.0));
        }
        assert!(!d.contains_var("E"));
    }

    #[test]
    fn derivative_of_constant_is_zero() {
        assert_eq!(parse("c").unwrap().differentiate("q"), Expr::Const(0.0));
        assert_eq!(
            parse("sin(k)*E").unwrap().differentiate("q"),
            Expr::Const(0.0)
        );
    }

    #[test]
    fn second_derivative_of_log_factor() {
        let e = parse("ln(E - 0.5*k*q^2)").unwrap();
        let d2 = e.differentiate("q").differentiate("q");
        let symbolic = eval(&d2, &[("E", 1.0), ("k", 1.0), ("q", 0.0)]);
        // central difference of ln(1 - q^2/2) at 0 with step 1e-5
        let f = |q: f64| (1.0 - 0.5 * q * q).ln();
        let h = 1e-5;
        let fd = (f(h) - 2.0 * f(0.0) + f(-h)) / (h * h);
        assert!((symbolic + 1.0).abs() < 1e-14, "{symbolic}");
        assert!((fd - symbolic).abs() < 1e-5, "{fd} vs {symbolic}");
    }

    #[test]
    fn function_rules() {
        let pts = [0.3, 1.1, 2.0];
        type Case = (&'static str, fn(f64) -> f64);
        let cases: [Case; 6] = [
            ("sin(x)", f64::cos),
            ("cos(x)", |x| -x.sin()),
            ("exp(2*x)", |x| 2.0 * (2.0 * x).exp()),
            ("ln(x)", |x| 1.0 / x),
            ("sqrt(x)", |x| 0.5 / x.sqrt()),
            ("1/x", |x| -1.0 / (x * x)),
        ];
        for (text, exact) in cases {
            let d = parse(text).unwrap().differentiate("x");
            for &x in &pts {
                let got = eval(&d, &[("x", x)]);
                assert!((got - exact(x)).abs() <= 1e-14 * exact(x).abs().max(1.0), "{text}");
            }
        }
    }

    #[test]
    fn mixed_partials_commute_on_example() {
        let e = parse("sin(q1*q2) + q1^3*exp(q2) - ln(1 + q1^2*q2^2)").unwrap();
        let a = e.differentiate("q1").differentiate("q2");
        let b = e.differentiate("q2").differentiate("q1");
        for (x, y) in [(0.2, 0.7), (-1.3, 0.4), (2.0, -0.9)] {
            let va = eval(&a, &[("q1", x), ("q2", y)]);
            let vb = eval(&b, &[("q1", x), ("q2", y)]);
            assert!((va - vb).abs() <= 1e-12 * va.abs().max(1.0));
        }
    }
}
