use std::collections::HashMap;

use super::*;
use crate::expr::{parse_expr, OpaqueFn};
use crate::variational::euler;

fn p(s: &Space, src: &str) -> Expr {
    parse_expr(src, s, &HashMap::new()).unwrap()
}

fn lead(s: &Space, src: &str) -> JetVar {
    p(s, src).as_jet().unwrap().clone()
}

fn zt() -> ZeroTest {
    ZeroTest::default()
}

fn pseudoparabolic_w() -> Space {
    let mut s = Space::new(&["x", "t"], &["w"]);
    s.declare_opaque(OpaqueFn::new("Psi"));
    s.declare_opaque(OpaqueFn::new("g"));
    s.declare_unknown("F", 4);
    s
}

#[test]
fn prolongation_and_point_characteristics() {
    let s = Space::new(&["x", "t"], &["u"]);
    let tx = characteristic_from_point(&[Expr::one(), Expr::zero()], &[Expr::zero()]);
    assert_eq!(tx.components[0], p(&s, "-u_x"));
    let e = p(&s, "u_xx*u_t");
    assert_eq!(apply_prolonged(&tx, &e), p(&s, "-(u_xxx*u_t + u_xx*u_xt)"));

    let q1 = Characteristic::new(vec![p(&s, "u_x")]);
    let q2 = Characteristic::new(vec![p(&s, "u_t")]);
    assert!(bracket(&q1, &q2).is_zero());
    let scale = Characteristic::new(vec![p(&s, "x*u_x")]);
    assert_eq!(bracket(&q1, &scale).components[0], p(&s, "-u_x"));
    assert_eq!(bracket(&scale, &q1).components[0], p(&s, "u_x"));
}

#[test]
fn translations_are_symmetries_of_heat() {
    let s = Space::new(&["x", "t"], &["u"]);
    let mut sys = PdeSystem::new(s.clone(), Ranking::graded_lex(&s));
    sys.push_component(lead(&s, "u_xx"), p(&s, "u_xx - u_t"));
    for q in ["u_x", "u_t", "u", "2*t*u_x + x*u"] {
        let q = Characteristic::new(vec![p(&s, q)]);
        assert!(check_symmetry(&sys, &q, &zt()).unwrap().holds());
    }
    let q = Characteristic::new(vec![p(&s, "u^2")]);
    assert_eq!(check_symmetry(&sys, &q, &zt()).unwrap(), Verdict::ProvedNonzero);
}

#[test]
fn pseudoparabolic_lagrangian() {
    let s = pseudoparabolic_w();
    let l = p(&s, "w_x*w_t/2 + Psi'(w_x)^2*w_xx*w_xt/2");
    let a = p(&s, "-w_xt + D_x(Psi'(w_x)*D_xt(Psi(w_x)))");
    assert_eq!(euler(&l, Field::Dep(0)).sub(&a), Expr::zero());

    let sys = euler_lagrange_system(&s, Ranking::graded_lex(&s), &l, None);
    assert_eq!(sys.equations[0].lead, lead(&s, "w_xxxt"));

    let q = Characteristic::new(vec![p(&s, "w_x")]);
    let r = check_noether1(&sys, &l, &q, &zt()).unwrap();
    assert!(r.variational.holds() && r.multiplier.holds() && r.agree());

    let q = Characteristic::new(vec![p(&s, "g(t)*w_t")]);
    assert!(check_symmetry(&sys, &q, &zt()).unwrap().holds());
    assert!(check_variational(&s, &l, &q, &zt()).holds());
}

#[test]
fn raised_equation_point_shift() {
    let s = pseudoparabolic_w();
    let mut sys = PdeSystem::new(s.clone(), Ranking::graded_lex(&s));
    sys.push_component(lead(&s, "w_xt"), p(&s, "-w_xt + D_x(F(x, t, w_x, w_xx))"));
    let q = Characteristic::new(vec![p(&s, "g(t)")]);
    assert_eq!(check_symmetry(&sys, &q, &zt()).unwrap(), Verdict::ProvedZero);
}

/// `(−1)^j` alternating sum that closes the hierarchy first integral.
fn hierarchy_lambda(s: &Space, k: u32) -> Expr {
    let dx = |e: &Expr, r: u32| (0..r).fold(e.clone(), |acc, _| acc.total_derivative(0));
    let uy = p(s, "u_y");
    let mut lam = dx(&p(s, "u_yy"), 2 * k).neg();
    for j in 0..k {
        let sign = if j % 2 == 0 { 1 } else { -1 };
        lam = lam.add(&dx(&uy, j).mul(&dx(&uy, 2 * k - j)).scale_int(sign));
    }
    let sign = if k % 2 == 0 { 1 } else { -1 };
    lam.add(&dx(&uy, k).pow_int(2).mul(&Expr::frac(sign, 2)))
}

#[test]
fn liouville_hierarchy() {
    let mut s = Space::new(&["x", "y"], &["u"]);
    s.declare_opaque(OpaqueFn::new("g"));
    for k in 0..3u32 {
        let dx = |e: &Expr| (0..2 * k).fold(e.clone(), |acc, _| acc.total_derivative(0));
        let l = dx(&p(&s, "u")).mul(&p(&s, "u_xy")).mul(&Expr::frac(1, 2)).sub(&p(&s, "exp(u)"));
        let a = dx(&p(&s, "u_xy")).sub(&p(&s, "exp(u)"));
        assert_eq!(euler(&l, Field::Dep(0)), a);
        let sys = euler_lagrange_system(&s, Ranking::graded_lex(&s), &l, None);
        let q = Characteristic::new(vec![p(&s, "g'(y) + g(y)*u_y")]);
        let r = check_noether1(&sys, &l, &q, &zt()).unwrap();
        assert_eq!((r.variational, r.multiplier), (Verdict::ProvedZero, Verdict::ProvedZero), "k = {k}");
        let lam = hierarchy_lambda(&s, k);
        assert_eq!(sys.restricted_is_zero(&lam.total_derivative(0), &zt()).unwrap(), Verdict::ProvedZero, "k = {k}");
    }
    assert_eq!(hierarchy_lambda(&s, 0), p(&s, "-u_yy + u_y^2/2"));
    assert_eq!(hierarchy_lambda(&s, 1), p(&s, "-u_xxyy + u_y*u_xxy - u_xy^2/2"));
}

#[test]
fn non_symmetry_fails_both_paths() {
    let s = Space::new(&["x"], &["u"]);
    let l = p(&s, "u_x^2/2");
    let sys = euler_lagrange_system(&s, Ranking::graded_lex(&s), &l, None);
    let q = Characteristic::new(vec![p(&s, "u")]);
    let r = check_noether1(&sys, &l, &q, &zt()).unwrap();
    assert!(!r.variational.holds() && !r.multiplier.holds() && r.agree());
    let q = Characteristic::new(vec![p(&s, "u_x")]);
    let r = check_noether1(&sys, &l, &q, &zt()).unwrap();
    assert!(r.variational.holds() && r.multiplier.holds());
}
