use super::*;
use crate::expr::Verdict;

const LIOUVILLE: &str = "\
# Liouville-type system with a family depending on g(x)
[vars]
indep = x, t
dep = u, v
arb = g

[system]
u_xt = exp(2*u - v)
v_xt = exp(2*v - u)

[constraints]
c1 = g_t

[claw]
x = -g*(exp(2*u - v) + exp(2*v - u))
t = g*(u_x^2 - u_x*v_x + v_x^2) + g_x*(u_x + v_x)

[lambda]
c1 = u_x^2 - u_x*v_x + v_x^2 - u_xx - v_xx

[checks]
first-integral lam1 @ t = c1
";

const EVERYTHING: &str = "\
[vars]
indep = x, y, t
dep = phi, p
arb = g1, g2
const = mu

[functions]
Psi
M
Q2' = Psi'($0)/M($0)
kappa(x, y)

[ranking]
weight = 0, 0, 1
fields = phi, p
order
lex = x, y, t

[system]
p_x : phi_xt + phi_x*phi_xx + phi_y*phi_xy + p_x
p_y : phi_yt + phi_x*phi_xy + phi_y*phi_yy + p_y
phi_xx = -phi_yy

[constraints]
c1 = g1_x + g2_y

[claw]
expect = nontrivial
x = g1*Q2(phi)
y = g2*kappa(x, y)*mu

[multiplier]
p = 1/2

[lambda]
c1 = phi_t + p

[symmetry]
xi_x = 1
eta_p = t

[hodograph]
swap = p <-> y
order = 2
p = phi_x*y

[checks]
syzygy s1 = D_x(A2) - D_y(A1)
multiplier m = 0; 1
first-integral f @ t = Psi''(phi)
";

#[test]
fn liouville_file() {
    let p = parse_problem(LIOUVILLE).unwrap();
    let sys = p.system().unwrap();
    assert_eq!(sys.len(), 2);
    assert_eq!(p.space.jet_name(&sys.equations[0].lead), "u_xt");
    let cons = p.constraint_set().unwrap();
    let cl = p.conservation_law().unwrap();
    let zt = crate::expr::ZeroTest::default();
    assert_eq!(crate::claws::verify_cl(&sys, &cl, &cons, &zt).unwrap(), Verdict::ProvedZero);
    let lam = p.lambda_solution().unwrap();
    assert_eq!(crate::claws::bridge_verify(&sys, &cl, &cons, &lam, &zt).unwrap(), Verdict::ProvedZero);
    assert_eq!(p.checks[0].kind, CheckKind::FirstIntegral(1));
    assert_eq!(p.checks[0].exprs[0], lam.components[0]);
}

#[test]
fn print_is_canonical() {
    for src in [LIOUVILLE, EVERYTHING] {
        let once = parse_problem(src).unwrap().print();
        let twice = parse_problem(&once).unwrap().print();
        assert_eq!(once, twice);
    }
    let p = parse_problem(EVERYTHING).unwrap();
    let q = parse_problem(&p.print()).unwrap();
    assert_eq!(p.system, q.system);
    assert_eq!(p.claw, q.claw);
    assert_eq!(p.checks, q.checks);
    assert_eq!(p.hodograph, q.hodograph);
    assert_eq!(p.ranking, q.ranking);
    assert!(matches!(p.symmetry, Some(SymmetrySpec::Point { .. })));
    assert_eq!(p.expect, Some(Expectation::Nontrivial));
    assert_eq!(p.system[2].component(), q.system[2].component());
}

#[test]
fn diagnostics() {
    assert_eq!(parse_problem("").unwrap_err(), ProblemError::MissingVars);
    assert_eq!(parse_problem("# nothing\n[system]\n").unwrap_err(), ProblemError::MissingVars);
    let e = parse_problem("[vars]\nindep = x\ndep = u\n[system]\nu_x = w + 1\n").unwrap_err();
    assert_eq!(e, ProblemError::UndeclaredSymbol { line: 5, col: 7, name: "w".into() });
    let e = parse_problem("[vars]\nindep = x\ndep = u\n[bogus]\n").unwrap_err();
    assert_eq!(e, ProblemError::UnknownSection { line: 4, name: "bogus".into() });
    let e = parse_problem("[vars]\nindep = x\n[vars]\n").unwrap_err();
    assert!(matches!(e, ProblemError::DuplicateSection { line: 3, .. }));
    let e = parse_problem("[vars]\nindep = x\ndep = u\n[claw]\nx = u*(1 +\n").unwrap_err();
    assert!(matches!(e, ProblemError::Syntax { line: 5, .. }), "{e:?}");
    let e = parse_problem("[vars]\nindep = x\ndep = u\n[lambda]\nc9 = u\n").unwrap_err();
    assert!(matches!(e, ProblemError::Syntax { line: 5, .. }));
    let e = parse_problem("x = 1\n[vars]\nindep = x\n").unwrap_err();
    assert!(matches!(e, ProblemError::Syntax { line: 1, .. }));
}

#[test]
fn lagrangian_supplies_the_system() {
    let p = parse_problem("[vars]\nindep = x\ndep = u\n[lagrangian]\nL = u_x^2/2\n").unwrap();
    let sys = p.system().unwrap();
    assert_eq!(sys.components()[0], crate::expr::parse_expr("-u_xx", &p.space, &Default::default()).unwrap());
}
