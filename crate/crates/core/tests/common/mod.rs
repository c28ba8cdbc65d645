#![allow(dead_code)]

use proptest::prelude::*;
use topoquant::expr::{BinOp, Expr, Func};

pub const VARS: [&str; 4] = ["x", "y", "q1", "q2"];

fn arb_const() -> impl Strategy<Value = f64> {
    prop_oneof![
        -10.0f64..10.0,
        Just(0.0),
        Just(1.0),
        Just(-1.0),
        prop::num::f64::NORMAL,
        (1u32..50).prop_map(|n| n as f64 * 0.25),
    ]
}

fn arb_leaf() -> impl Strategy<Value = Expr> {
    prop_oneof![
        arb_const().prop_map(Expr::Const),
        prop::sample::select(VARS.to_vec()).prop_map(Expr::var),
    ]
}

fn arb_binop() -> impl Strategy<Value = BinOp> {
    prop::sample::select(vec![BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::Div])
}

fn arb_func() -> impl Strategy<Value = Func> {
    prop::sample::select(Func::ALL.to_vec())
}

/// Any expression of the language, depth at most `depth`.
pub fn arb_expr(depth: u32) -> impl Strategy<Value = Expr> {
    arb_leaf().prop_recursive(depth, 64, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(Expr::neg),
            (arb_binop(), inner.clone(), inner.clone()).prop_map(|(op, a, b)| Expr::binary(op, a, b)),
            (inner.clone(), prop::sample::select(vec![-1.0, 0.0, 0.5, 1.0, 1.5, 2.0, 3.0, -2.5]))
                .prop_map(|(b, c)| Expr::pow(b, c)),
            (arb_func(), inner).prop_map(|(f, a)| Expr::call(f, a)),
        ]
    })
}

/// Polynomial and trigonometric compositions in `x`, depth at most `depth`.
pub fn arb_smooth(depth: u32) -> impl Strategy<Value = Expr> {
    arb_smooth_in(depth, vec!["x"])
}

/// Polynomial and trigonometric compositions in the given variables.
pub fn arb_smooth_in(depth: u32, vars: Vec<&'static str>) -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        1 => (-2.0f64..2.0).prop_map(Expr::Const),
        2 => prop::sample::select(vars).prop_map(Expr::var),
    ];
    leaf.prop_recursive(depth, 48, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(Expr::neg),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::add(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::sub(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::mul(a, b)),
            (inner.clone(), prop::sample::select(vec![2.0, 3.0])).prop_map(|(b, c)| Expr::pow(b, c)),
            inner.clone().prop_map(|a| Expr::call(Func::Sin, a)),
            inner.prop_map(|a| Expr::call(Func::Cos, a)),
        ]
    })
}

/// Fourth-order five-point second difference along one axis.
pub fn second_difference(f: impl Fn([f64; 2]) -> f64, q: [f64; 2], axis: usize, h: f64) -> f64 {
    let at = |s: f64| {
        let mut p = q;
        p[axis] += s * h;
        f(p)
    };
    (-at(2.0) + 16.0 * at(1.0) - 30.0 * at(0.0) + 16.0 * at(-1.0) - at(-2.0)) / (12.0 * h * h)
}

/// Five-point finite-difference Laplacian of `f` at `q`.
pub fn fd_laplacian(f: impl Fn([f64; 2]) -> f64, q: [f64; 2], h: f64) -> f64 {
    second_difference(&f, q, 0, h) + second_difference(&f, q, 1, h)
}
