use std::collections::HashMap;

use super::*;
use crate::expr::parse_expr;
use crate::space::Space;

fn xt() -> Space {
    Space::new(&["x", "t"], &["u", "v"])
}

fn p(s: &Space, src: &str) -> Expr {
    parse_expr(src, s, &HashMap::new()).unwrap()
}

const U: Field = Field::Dep(0);
const V: Field = Field::Dep(1);

#[test]
fn euler_of_dirichlet_energy() {
    let s = xt();
    assert_eq!(euler(&p(&s, "u_x^2/2"), U), p(&s, "-u_xx"));
    let d = p(&s, "D_x(u*exp(v_t)*u_xt/(1+u^2))");
    assert!(euler(&d, U).is_zero());
    assert!(euler(&d, V).is_zero());
}

#[test]
fn adjoint_of_first_order_terms() {
    let s = xt();
    let dx = LinDiffOp::d(2, 0, Expr::one());
    assert_eq!(dx.adjoint(), dx.neg());
    let a = p(&s, "x^2*t");
    let op = LinDiffOp::d(2, 0, a.clone());
    let f = p(&s, "u");
    let want = p(&s, "-x^2*t*u_x - 2*x*t*u");
    assert_eq!(op.adjoint().apply(&f), want);
    assert_eq!(op.adjoint().adjoint(), op);
}

#[test]
fn adjoint_pairing_is_a_divergence() {
    let s = xt();
    let op = LinDiffOp::new(
        2,
        vec![
            (p(&s, "x*t"), MultiIndex::from_counts(vec![2, 1])),
            (p(&s, "exp(x)"), MultiIndex::from_counts(vec![0, 1])),
            (p(&s, "3"), MultiIndex::zero(2)),
        ],
    );
    let (f, g) = (p(&s, "u"), p(&s, "v"));
    let pairing = f.mul(&op.apply(&g)).sub(&op.adjoint().apply(&f).mul(&g));
    assert_eq!(is_divergence(&pairing, &[U, V], &ZeroTest::default()), Verdict::ProvedZero);
}

#[test]
fn divergence_detection() {
    let s = xt();
    let zt = ZeroTest::default();
    assert_eq!(is_divergence(&p(&s, "u_x*u_xt + u_t*u_xx"), &[U], &zt), Verdict::ProvedZero);
    assert_eq!(is_divergence(&p(&s, "u^2"), &[U], &zt), Verdict::ProvedNonzero);
}

#[test]
fn homotopy_reconstructs_fluxes() {
    let s = xt();
    for src in ["u_x*u_xt + u_t*u_xx", "0", "D_t(u_x^2 - u_x*v_x + v_x^2)", "2*x*t + D_x(u*v_t)"] {
        let e = p(&s, src);
        let f = homotopy_fluxes(&e, &[U, V], 2).unwrap();
        assert_eq!(f.divergence(), e, "{src}");
    }
    assert!(homotopy_fluxes(&Expr::zero(), &[U], 2).unwrap().is_zero());
    assert!(matches!(homotopy_fluxes(&p(&s, "u^2"), &[U], 2), Err(Error::NotExactDerivative(_))));
}

#[test]
fn singular_integrands_and_shifted_basepoint() {
    let s = xt();
    let e = p(&s, "D_x(ln(u))");
    assert!(matches!(homotopy_fluxes(&e, &[U], 2), Err(Error::HomotopySingular(_))));
    let e = p(&s, "D_x(u^3 + x*u) + D_t(u*u_x)");
    let base = Basepoint::shifted([(U, Expr::int(2))]);
    let f = homotopy_fluxes_at(&e, &[U], 2, &base).unwrap();
    assert_eq!(f.divergence(), e);
}

#[test]
fn inverse_total_derivative() {
    let s = xt();
    let lam = invert_total_derivative(&p(&s, "2*u_x*u_xt"), 1, &[U], 2).unwrap();
    assert_eq!(lam, p(&s, "u_x^2"));
    let r = invert_total_derivative(&p(&s, "u_x"), 1, &[U], 2);
    assert!(matches!(r, Err(Error::NotExactDerivative(_))));
}

#[test]
fn liouville_lambda_by_inversion() {
    let s = xt();
    let a1 = p(&s, "u_xt - exp(2*u - v)");
    let a2 = p(&s, "v_xt - exp(2*v - u)");
    let e = p(&s, "2*u_x - v_x").mul(&a1).sub(&a1.total_derivative(0))
        .add(&p(&s, "2*v_x - u_x").mul(&a2))
        .sub(&a2.total_derivative(0));
    let lam = invert_total_derivative(&e, 1, &[U, V], 2).unwrap();
    let paper = p(&s, "u_x^2 - u_x*v_x + v_x^2 - u_xx - v_xx");
    assert!(lam.sub(&paper).total_derivative(1).is_zero());
    assert_eq!(lam, paper);
}
