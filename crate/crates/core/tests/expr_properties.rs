mod common;

use common::{arb_expr, arb_smooth_in};
use proptest::prelude::*;
use topoquant::expr::{parse, Bindings, Expr};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn simplify_is_idempotent(e in arb_expr(6)) {
        let once = e.simplify();
        prop_assert_eq!(once.simplify(), once);
    }

    #[test]
    fn simplified_print_reparses_to_same_tree(e in arb_expr(6)) {
        let s = e.simplify();
        prop_assert_eq!(parse(&s.to_string()).unwrap(), s);
    }

    #[test]
    fn reparse_then_simplify_matches(e in arb_expr(5)) {
        let reparsed = parse(&e.to_string()).unwrap();
        prop_assert_eq!(reparsed.simplify(), e.simplify());
    }

    #[test]
    fn simplify_preserves_value(e in arb_expr(5), x in -3.0f64..3.0, y in -3.0f64..3.0) {
        let b = Bindings::from_iter([("x", x), ("y", y), ("q1", y), ("q2", x)]);
        if let (Ok(a), Ok(s)) = (e.evaluate(&b), e.simplify().evaluate(&b)) {
            if a.is_finite() && s.is_finite() {
                prop_assert!((a - s).abs() <= 1e-9 * a.abs().max(1.0), "{} vs {}", a, s);
            }
        }
    }

    #[test]
    fn free_vars_of_derivative_are_a_subset(e in arb_expr(5)) {
        let d = e.differentiate("x");
        prop_assert!(d.free_vars().is_subset(&e.free_vars()));
        if !e.contains_var("x") {
            prop_assert_eq!(d, Expr::Const(0.0));
        }
    }

    #[test]
    fn mixed_partials_commute(
        e in arb_smooth_in(5, vec!["q1", "q2"]),
        q1 in -1.5f64..1.5,
        q2 in -1.5f64..1.5,
    ) {
        let a = e.differentiate("q1").differentiate("q2");
        let b = e.differentiate("q2").differentiate("q1");
        let p = Bindings::from_iter([("q1", q1), ("q2", q2)]);
        let (va, vb) = (a.evaluate(&p).unwrap(), b.evaluate(&p).unwrap());
        let scale = va.abs().max(vb.abs()).max(1.0);
        prop_assert!((va - vb).abs() <= 1e-9 * scale, "{} vs {} for {}", va, vb, e);
    }
}
