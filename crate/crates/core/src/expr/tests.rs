use std::collections::HashMap;

use proptest::prelude::*;

use super::*;
use crate::space::{MultiIndex, Space};

fn space() -> Space {
    let mut s = Space::new(&["x", "t"], &["u", "v"]).with_arbs(&["g"]).with_consts(&["mu"]);
    s.declare_opaque(OpaqueFn::new("Psi"));
    s.declare_unknown("q", 2);
    s
}

fn p(src: &str) -> Expr {
    parse_expr(src, &space(), &HashMap::new()).unwrap()
}

#[test]
fn cancellation_and_normal_form() {
    assert!(p("u_x + u_x - 2*u_x").is_zero());
    assert!(p("exp(2*u - v)*exp(v - 2*u)").is_one());
    assert!(p("(u_x^2 + u_t^2)/(u_x^2 + u_t^2)").is_one());
    assert_eq!(p("(u^2 - 1)/(u - 1)"), p("u + 1"));
    assert_eq!(p("1/u + 1/v"), p("(u + v)/(u*v)"));
}

#[test]
fn partials() {
    let s = space();
    let ux = Atom::Jet(JetVar::new(Field::Dep(0), MultiIndex::from_counts(vec![1, 0])));
    assert_eq!(p("u_x*u_t").partial(&ux), p("u_t"));
    let u = Atom::Jet(JetVar::base(Field::Dep(0), 2));
    assert_eq!(p("exp(2*u - v)").partial(&u), p("2*exp(2*u - v)"));
    assert_eq!(p("Psi(u_x)").partial(&ux), p("Psi'(u_x)"));
    assert_eq!(p("q(x, u)").partial(&u).show(&s), "q[0,1](x, u)");
}

#[test]
fn total_derivatives_from_syntax() {
    assert_eq!(p("D_t(exp(2*u - v))"), p("(2*u_t - v_t)*exp(2*u - v)"));
    assert_eq!(p("D_xt(u*v)"), p("u_xt*v + u_x*v_t + u_t*v_x + u*v_xt"));
    assert_eq!(p("D_x(g)"), p("g_x"));
    assert_eq!(p("D_x(mu*x)"), p("mu"));
}

#[test]
fn print_parse_round_trip() {
    let s = space();
    for src in [
        "u_x^2",
        "-3/2*u*v_t + 1",
        "exp(2*u - v)",
        "atan(u_x/u_t)",
        "sqrt(1 + u_x^2)",
        "(1 + u_x^2)^(3/2)*u",
        "Psi''(u_x)*mu",
        "q[1,0](x, u)/(u + v)^2",
        "ln(u)*u_x - u^-2",
        "sin(u)^2 + cos(u)",
    ] {
        let e = p(src);
        let printed = e.show(&s);
        let again = p(&printed);
        assert_eq!(again, e, "{src} printed as {printed}");
        assert_eq!(again.show(&s), printed);
    }
}

#[test]
fn parse_errors() {
    let s = space();
    let l = HashMap::new();
    assert_eq!(parse_expr("w + 1", &s, &l), Err(ParseError::UndeclaredSymbol("w".into())));
    assert!(matches!(parse_expr("u +", &s, &l), Err(ParseError::Syntax { .. })));
    assert!(matches!(parse_expr("u^v", &s, &l), Err(ParseError::Syntax { .. })));
    assert!(matches!(parse_expr("1/(u - u)", &s, &l), Err(ParseError::Syntax { .. })));
}

#[test]
fn substitution_examples() {
    let s = space();
    let ux = Atom::Jet(JetVar::new(Field::Dep(0), MultiIndex::from_counts(vec![1, 0])));
    let uxt = Atom::Jet(JetVar::new(Field::Dep(0), MultiIndex::from_counts(vec![1, 1])));
    let b: HashMap<_, _> = [(ux, p("1/v"))].into_iter().collect();
    assert_eq!(substitute(&p("u_x^2"), &b).unwrap(), p("1/v^2"));
    let b: HashMap<_, _> = [(uxt, p("exp(2*u - v)"))].into_iter().collect();
    assert_eq!(substitute(&p("u_xt"), &b).unwrap().show(&s), "exp(2*u - v)");
}

fn gen_space() -> Space {
    Space::new(&["x", "t"], &["u", "v"])
}

const LEAVES: [&str; 9] = ["u", "v", "u_x", "v_t", "u_xt", "x", "t", "2", "1/3"];

fn arb_src() -> impl Strategy<Value = String> {
    let leaf = prop::sample::select(LEAVES.to_vec()).prop_map(str::to_string);
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a}) + ({b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a})*({b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a})/(2 + ({b})^2)")),
            inner.clone().prop_map(|a| format!("exp({a})")),
            inner.clone().prop_map(|a| format!("atan({a})")),
            inner.clone().prop_map(|a| format!("sqrt(1 + ({a})^2)")),
            (inner, 1i64..4).prop_map(|(a, k)| format!("({a})^{k}")),
        ]
    })
}

fn g(src: &str) -> Expr {
    parse_expr(src, &gen_space(), &HashMap::new()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn canonical_form_is_idempotent(src in arb_src()) {
        let e = g(&src);
        prop_assert_eq!(e.canonicalize(), e.clone());
        prop_assert!(e.sub(&e).is_zero());
        let s = gen_space();
        prop_assert_eq!(g(&e.show(&s)), e);
    }

    #[test]
    fn leibniz_and_commutation(a in arb_src(), b in arb_src()) {
        let (e, f) = (g(&a), g(&b));
        let lhs = e.mul(&f).total_derivative(0);
        let rhs = e.total_derivative(0).mul(&f).add(&e.mul(&f.total_derivative(0)));
        prop_assert!(lhs.sub(&rhs).is_zero());
        let xt = e.total_derivative(0).total_derivative(1);
        let tx = e.total_derivative(1).total_derivative(0);
        prop_assert!(xt.sub(&tx).is_zero());
    }
}
