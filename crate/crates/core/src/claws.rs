//! Conservation laws, multipliers, and constrained families of them.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::expr::{map_atoms, substitute, Atom, Expr, Verdict, ZeroTest};
use crate::jet::{Equation, PdeSystem, Ranking};
use crate::space::{Field, JetVar, MultiIndex, Space};
use crate::variational::{
    combine, directional_fluxes, euler, integrate_slot, invert_total_derivative, FluxVector, LinDiffOp,
    HOMOTOPY_T,
};

/// `Div F`, with the fluxes when they are known.
#[derive(Clone, Debug)]
pub struct ConservationLaw {
    pub fluxes: Option<FluxVector>,
    divergence: Expr,
}

impl ConservationLaw {
    pub fn from_fluxes(f: FluxVector) -> Self {
        let divergence = f.divergence();
        ConservationLaw { fluxes: Some(f), divergence }
    }

    /// A law known only through its divergence expression.
    pub fn from_divergence(e: Expr) -> Self {
        ConservationLaw { fluxes: None, divergence: e }
    }

    pub fn zero(n: usize) -> Self {
        ConservationLaw::from_fluxes(FluxVector::zero(n))
    }

    pub fn divergence(&self) -> &Expr {
        &self.divergence
    }

    pub fn sub(&self, other: &ConservationLaw) -> Self {
        match (&self.fluxes, &other.fluxes) {
            (Some(a), Some(b)) => ConservationLaw::from_fluxes(a.sub(b)),
            _ => ConservationLaw::from_divergence(self.divergence.sub(&other.divergence)),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Multiplier {
    pub components: Vec<Expr>,
}

impl Multiplier {
    pub fn new(components: Vec<Expr>) -> Self {
        Multiplier { components }
    }

    /// `Q^µ A_µ`.
    pub fn dot(&self, sys: &PdeSystem) -> Expr {
        Expr::sum(self.components.iter().zip(sys.components()).map(|(q, a)| q.mul(&a)))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LambdaSolution {
    pub components: Vec<Expr>,
}

/// Rows `Σ_r 𝒟ˡ_r gʳ = 0` over the arbitrary functions of a space.
#[derive(Clone, Debug)]
pub struct ConstraintSet {
    pub n: usize,
    pub arbs: usize,
    pub rows: Vec<Vec<LinDiffOp>>,
}

impl ConstraintSet {
    pub fn none(space: &Space) -> Self {
        ConstraintSet { n: space.n(), arbs: space.arbs.len(), rows: Vec::new() }
    }

    /// Read rows from expressions linear in the `g` jets with `x`-only coefficients.
    pub fn from_rows(space: &Space, rows: &[Expr]) -> Result<Self> {
        let n = space.n();
        let mut out = ConstraintSet::none(space);
        for (l, row) in rows.iter().enumerate() {
            let mut ops = vec![Vec::new(); out.arbs];
            let mut rest = row.clone();
            for j in row.jets() {
                let Field::Arb(r) = j.field else {
                    return Err(Error::InvalidSystem(format!("constraint {} involves [u]", l + 1)));
                };
                let c = row.partial(&Atom::Jet(j.clone()));
                if !c.jets().is_empty() {
                    return Err(Error::InvalidSystem(format!("constraint {} is not linear", l + 1)));
                }
                rest = rest.sub(&c.mul(&Expr::jet(j.clone())));
                ops[r].push((c, j.idx.clone()));
            }
            if !rest.is_zero() {
                return Err(Error::InvalidSystem(format!("constraint {} is not homogeneous", l + 1)));
            }
            out.rows.push(ops.into_iter().map(|t| LinDiffOp::new(n, t)).collect());
        }
        Ok(out)
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// `gʳ` appears in no row.
    pub fn is_free(&self, r: usize) -> bool {
        self.rows.iter().all(|row| row[r].is_zero())
    }

    pub fn row_expr(&self, l: usize) -> Expr {
        Expr::sum(self.rows[l].iter().enumerate().map(|(r, op)| op.apply(&arb(r, self.n))))
    }

    /// The rows as an orthonomic system in `g`, leads chosen by the ranking.
    pub fn equations(&self, ranking: &Ranking) -> Vec<Equation> {
        (0..self.rows.len())
            .map(|l| {
                let e = self.row_expr(l);
                let jets = e.jets();
                let lead = ranking.max(&jets).expect("non-empty constraint").clone();
                Equation { lead, component: e }
            })
            .collect()
    }
}

fn arb(r: usize, n: usize) -> Expr {
    Expr::jet(JetVar::base(Field::Arb(r), n))
}

/// The system with the constraints on `g` appended.
pub fn constrained(sys: &PdeSystem, cons: &ConstraintSet) -> PdeSystem {
    sys.extended(&cons.equations(&sys.ranking))
}

/// Only the constraints, for reducing derivatives of `g`.
pub fn constraint_system(sys: &PdeSystem, cons: &ConstraintSet) -> PdeSystem {
    let mut g = PdeSystem::new(sys.space.clone(), sys.ranking.clone());
    for eq in cons.equations(&sys.ranking) {
        g.push_component(eq.lead, eq.component);
    }
    g
}

pub fn verify_cl(sys: &PdeSystem, cl: &ConservationLaw, cons: &ConstraintSet, zt: &ZeroTest) -> Result<Verdict> {
    constrained(sys, cons).restricted_is_zero(cl.divergence(), zt)
}

fn aux_of(j: &JetVar) -> Option<usize> {
    match j.field {
        Field::Aux(mu) => Some(mu),
        _ => None,
    }
}

/// Integrate a `[A]`-representation of `Div F` by parts into `Q^µ A_µ`.
pub fn characteristic_form(sys: &PdeSystem, cl: &ConservationLaw, cons: &ConstraintSet) -> Result<Multiplier> {
    let full = constrained(sys, cons);
    let m = sys.len();
    let e = full.to_aux(cl.divergence())?;
    let e = map_atoms(&e, &mut |a| match a.as_jet().and_then(aux_of) {
        Some(mu) if mu >= m => Some(Expr::zero()),
        _ => None,
    })
    .ok_or_else(|| Error::DivisionByZero("imposing the constraints".into()))?;
    let aux: Vec<JetVar> = e.jets().into_iter().filter(|j| aux_of(j).is_some()).collect();
    let t = Expr::slot(HOMOTOPY_T);
    let scaled: HashMap<Atom, Expr> =
        aux.iter().map(|j| (Atom::Jet(j.clone()), t.mul(&Expr::jet(j.clone())))).collect();
    let linear = aux.iter().all(|j| {
        let p = e.partial(&Atom::Jet(j.clone()));
        aux.iter().all(|k| !p.depends_on(&Atom::Jet(k.clone())))
    });
    let mut q = vec![Expr::zero(); m];
    for j in &aux {
        let mu = aux_of(j).expect("aux");
        let p = e.partial(&Atom::Jet(j.clone()));
        // f^{µ,K} = ∫₀¹ ∂E/∂(D_K A_µ) at t·[A].
        let f = if linear {
            p
        } else {
            let pt = substitute(&p, &scaled).ok_or_else(|| Error::DivisionByZero("scaling [A]".into()))?;
            integrate_slot(&pt, HOMOTOPY_T).ok_or_else(|| {
                Error::HomotopySingular("divergence is not polynomial in the system components".into())
            })?
        };
        let f = full.expand_aux(&f)?;
        let d = f.total_derivative_multi(&j.idx);
        q[mu] = if j.order() % 2 == 0 { q[mu].add(&d) } else { q[mu].sub(&d) };
    }
    let gsys = constraint_system(sys, cons);
    let q = q.iter().map(|c| gsys.normal_form(c)).collect::<Result<Vec<_>>>()?;
    Ok(Multiplier::new(q))
}

/// Euler variables for multiplier tests: every dependent field, plus free `g`.
fn euler_vars(space: &Space, cons: &ConstraintSet) -> Vec<Field> {
    let mut v = space.dep_fields();
    v.extend((0..space.arbs.len()).filter(|&r| cons.is_free(r)).map(Field::Arb));
    v
}

pub fn verify_multiplier(sys: &PdeSystem, q: &Multiplier, cons: &ConstraintSet, zt: &ZeroTest) -> Result<Verdict> {
    let e = q.dot(sys);
    let gsys = constraint_system(sys, cons);
    let mut vs = Vec::new();
    for v in euler_vars(&sys.space, cons) {
        vs.push(zt.check(&gsys.normal_form(&euler(&e, v))?));
    }
    Ok(combine(vs))
}

/// Linear relation `Σ S^µ A_µ` read off an expression in the `Aux` jets.
pub fn syzygy_ops(rel: &Expr, m: usize, n: usize) -> Option<Vec<LinDiffOp>> {
    let mut ops = vec![Vec::new(); m];
    for j in rel.jets() {
        let mu = aux_of(&j)?;
        let c = rel.partial(&Atom::Jet(j.clone()));
        if c.jets().iter().any(|k| aux_of(k).is_some()) {
            return None;
        }
        ops.get_mut(mu)?.push((c, j.idx.clone()));
    }
    Some(ops.into_iter().map(|t| LinDiffOp::new(n, t)).collect())
}

/// `Σ ops^µ(A_µ)` as an expression in the `Aux` jets.
pub fn relation_from_ops(ops: &[LinDiffOp], n: usize) -> Expr {
    Expr::sum(ops.iter().enumerate().map(|(mu, op)| op.apply(&Expr::jet(JetVar::base(Field::Aux(mu), n)))))
}

/// The relation expands to an identity in `(x, [u])`.
pub fn verify_syzygy(sys: &PdeSystem, rel: &Expr, zt: &ZeroTest) -> Result<Verdict> {
    Ok(zt.check(&sys.expand_aux(rel)?))
}

/// Multiplier triviality `Q|₀ = 0`, modulo `S†h` for each linear syzygy `S`.
///
/// `ProvedZero` means trivial, `ProvedNonzero` means not trivial.
pub fn is_trivial(
    sys: &PdeSystem,
    cl: &ConservationLaw,
    cons: &ConstraintSet,
    syzygies: &[Vec<LinDiffOp>],
    zt: &ZeroTest,
) -> Result<Verdict> {
    let q = characteristic_form(sys, cl, cons)?;
    multiplier_is_trivial(sys, &q, cons, syzygies, zt)
}

pub fn multiplier_is_trivial(
    sys: &PdeSystem,
    q: &Multiplier,
    cons: &ConstraintSet,
    syzygies: &[Vec<LinDiffOp>],
    zt: &ZeroTest,
) -> Result<Verdict> {
    let full = constrained(sys, cons);
    let n = sys.n();
    let q0 = q.components.iter().map(|c| full.normal_form(c)).collect::<Result<Vec<_>>>()?;
    let plain = combine(q0.iter().map(|c| zt.check(c)));
    if plain.holds() || syzygies.is_empty() {
        return Ok(plain);
    }
    let vars = sys.space.all_fields();
    for s in syzygies {
        let adj: Vec<LinDiffOp> = s.iter().map(LinDiffOp::adjoint).collect();
        // A component where S† is c·D_i lets us solve for h directly.
        let pick = adj.iter().enumerate().find_map(|(mu, op)| match op.terms.as_slice() {
            [(c, k)] if k.order() == 1 && c.as_rational().is_some() => {
                Some((mu, c.clone(), k.counts().iter().position(|&x| x == 1)?))
            }
            _ => None,
        });
        let Some((mu, c, i)) = pick else { continue };
        let target = q0[mu].div(&c).expect("non-zero coefficient");
        let Ok(h) = invert_total_derivative(&target, i, &vars, n) else { continue };
        let mut rs = Vec::new();
        for (nu, op) in adj.iter().enumerate() {
            rs.push(zt.check(&full.normal_form(&q.components[nu].sub(&op.apply(&h)))?));
        }
        let r = combine(rs);
        if r.holds() {
            return Ok(r);
        }
    }
    Ok(plain)
}

pub fn equivalent(
    sys: &PdeSystem,
    a: &ConservationLaw,
    b: &ConservationLaw,
    cons: &ConstraintSet,
    syzygies: &[Vec<LinDiffOp>],
    zt: &ZeroTest,
) -> Result<Verdict> {
    is_trivial(sys, &a.sub(b), cons, syzygies, zt)
}

/// Replace an unknown function by `body`, written in `Slot(0..k)`.
pub fn instantiate_unknown(e: &Expr, name: &str, body: &Expr) -> Option<Expr> {
    map_atoms(e, &mut |a| match a {
        Atom::Unknown(f, partials, args) if &**f == name => {
            let mut d = body.clone();
            for (i, &p) in partials.iter().enumerate() {
                for _ in 0..p {
                    d = d.partial(&Atom::Slot(i));
                }
            }
            let args: Vec<Expr> = args.iter().map(|x| instantiate_unknown(x, name, body)).collect::<Option<_>>()?;
            let b: HashMap<Atom, Expr> = args.into_iter().enumerate().map(|(i, x)| (Atom::Slot(i), x)).collect();
            substitute(&d, &b)
        }
        _ => None,
    })
}

/// `E_{u^α}(Q·A)` split by monomials in the jet coordinates it is polynomial in.
pub fn determining_equations(sys: &PdeSystem, q: &Multiplier, cons: &ConstraintSet) -> Result<Vec<Expr>> {
    let e = q.dot(sys);
    let gsys = constraint_system(sys, cons);
    let mut out = Vec::new();
    for v in euler_vars(&sys.space, cons) {
        let ev = gsys.normal_form(&euler(&e, v))?;
        out.extend(split_by_jets(&ev));
    }
    out.retain(|e| !e.is_zero());
    Ok(out)
}

/// Coefficients of the numerator by monomials in the top-level jet atoms
/// that do not also occur inside function arguments.
fn split_by_jets(e: &Expr) -> Vec<Expr> {
    use crate::expr::{Mono, Poly};
    let num = e.numerator();
    let nested: Vec<Atom> = num
        .atoms()
        .into_iter()
        .filter(|a| !a.is_coordinate())
        .flat_map(|a| Expr::atom(a).coordinates())
        .collect();
    let free = |a: &Atom| matches!(a, Atom::Jet(_)) && !nested.contains(a);
    let mut groups: Vec<(Mono, Poly)> = Vec::new();
    for (m, c) in num.numer().terms() {
        let key = Mono::from_factors(m.factors().iter().filter(|(a, _)| free(a)).cloned());
        let rest = Mono::from_factors(m.factors().iter().filter(|(a, _)| !free(a)).cloned());
        match groups.iter_mut().find(|(k, _)| *k == key) {
            Some((_, p)) => p.add_term(rest, c.clone()),
            None => groups.push((key, Poly::term(rest, c.clone()))),
        }
    }
    groups.into_iter().map(|(_, p)| Expr::from_poly(p)).collect()
}

/// `E_{gʳ}(Q·A) + Σ_l (𝒟ˡ_r)†λ_l` for each `r`.
pub fn bridge_residuals(sys: &PdeSystem, q: &Multiplier, cons: &ConstraintSet, lam: &LambdaSolution) -> Vec<Expr> {
    let e = q.dot(sys);
    (0..cons.arbs)
        .map(|r| {
            let mut res = euler(&e, Field::Arb(r));
            for (l, row) in cons.rows.iter().enumerate() {
                if let Some(lam_l) = lam.components.get(l) {
                    res = res.add(&row[r].adjoint().apply(lam_l));
                }
            }
            res
        })
        .collect()
}

pub fn bridge_verify_multiplier(
    sys: &PdeSystem,
    q: &Multiplier,
    cons: &ConstraintSet,
    lam: &LambdaSolution,
    zt: &ZeroTest,
) -> Verdict {
    combine(bridge_residuals(sys, q, cons, lam).iter().map(|r| zt.check(r)))
}

/// The λ-condition for a law, taken on its characteristic form.
pub fn bridge_verify(
    sys: &PdeSystem,
    cl: &ConservationLaw,
    cons: &ConstraintSet,
    lam: &LambdaSolution,
    zt: &ZeroTest,
) -> Result<Verdict> {
    let q = characteristic_form(sys, cl, cons)?;
    Ok(bridge_verify_multiplier(sys, &q, cons, lam, zt))
}

/// `(coefficient, direction)` of a row `a(x)·D_i gʳ`, or `None`.
fn single_derivative(op: &LinDiffOp) -> Option<(Expr, usize)> {
    match op.terms.as_slice() {
        [(a, k)] if k.order() == 1 => Some((a.clone(), k.counts().iter().position(|&c| c == 1)?)),
        _ => None,
    }
}

pub fn solve_lambda(sys: &PdeSystem, cl: &ConservationLaw, cons: &ConstraintSet) -> Result<LambdaSolution> {
    let q = characteristic_form(sys, cl, cons)?;
    solve_lambda_multiplier(sys, &q, cons)
}

/// Solve the λ-condition when every row is `a(x)·D_i gʳ` for a single `r`.
pub fn solve_lambda_multiplier(sys: &PdeSystem, q: &Multiplier, cons: &ConstraintSet) -> Result<LambdaSolution> {
    let n = sys.n();
    let unsupported = |l: usize, why: &str| Error::UnsupportedConstraintShape(format!("row {}: {why}", l + 1));
    let mut shape = Vec::new();
    for (l, row) in cons.rows.iter().enumerate() {
        let touched: Vec<usize> = (0..cons.arbs).filter(|&r| !row[r].is_zero()).collect();
        let [r] = touched[..] else {
            return Err(unsupported(l, "must involve exactly one function"));
        };
        let (a, i) = single_derivative(&row[r]).ok_or_else(|| unsupported(l, "must be a(x)·D_i g"))?;
        shape.push((r, a, i));
    }
    let e = q.dot(sys);
    let vars = sys.space.all_fields();
    let mut lam = vec![Expr::zero(); cons.rows.len()];
    for r in 0..cons.arbs {
        let rows: Vec<usize> = (0..shape.len()).filter(|&l| shape[l].0 == r).collect();
        if rows.is_empty() {
            continue;
        }
        let dirs: Vec<usize> = rows.iter().map(|&l| shape[l].2).collect();
        if (1..dirs.len()).any(|k| dirs[..k].contains(&dirs[k])) {
            return Err(unsupported(rows[0], "repeated direction for one function"));
        }
        // −Σ D_i(a λ) + E_g(Q·A) = 0.
        let eg = euler(&e, Field::Arb(r));
        let f = directional_fluxes(&eg, &dirs, &vars, n)?;
        for &l in &rows {
            let (_, a, i) = &shape[l];
            lam[l] = f.components[*i]
                .div(a)
                .ok_or_else(|| Error::DivisionByZero("dividing by a constraint coefficient".into()))?;
        }
    }
    Ok(LambdaSolution { components: lam })
}

/// `C_λ = λ_l 𝒟ˡ_r gʳ − gʳ (𝒟ˡ_r)†λ_l`, with fluxes from integration by parts.
pub fn construct_c_lambda(cons: &ConstraintSet, lam: &LambdaSolution) -> ConservationLaw {
    let n = cons.n;
    let mut flux = vec![Expr::zero(); n];
    for (l, row) in cons.rows.iter().enumerate() {
        let Some(lam_l) = lam.components.get(l) else { continue };
        for (r, op) in row.iter().enumerate() {
            for (a, k) in &op.terms {
                let mut f = a.mul(lam_l);
                let mut k = k.clone();
                while let Some(i) = k.counts().iter().position(|&c| c > 0) {
                    k = k.checked_sub(&MultiIndex::unit(n, i)).expect("positive count");
                    let g = Expr::jet(JetVar::new(Field::Arb(r), k.clone()));
                    flux[i] = flux[i].add(&f.mul(&g));
                    f = f.total_derivative(i).neg();
                }
            }
        }
    }
    ConservationLaw::from_fluxes(FluxVector::new(flux))
}

#[derive(Clone, Debug)]
pub struct FirstIntegral {
    pub lambda: Expr,
    pub direction: usize,
    /// `D_i λ` vanishes on solutions.
    pub verdict: Verdict,
}

/// Read `λ` off a law `D_i(g·λ)` and check that `D_i λ` vanishes on solutions.
pub fn first_integral(sys: &PdeSystem, cl: &ConservationLaw, zt: &ZeroTest) -> Result<FirstIntegral> {
    let shape = |m: &str| Error::ShapeMismatch(m.to_string());
    let f = cl.fluxes.as_ref().ok_or_else(|| shape("law has no fluxes"))?;
    let nz: Vec<usize> = (0..f.n()).filter(|&i| !f.components[i].is_zero()).collect();
    let [i] = nz[..] else {
        return Err(shape("expected exactly one non-zero flux component"));
    };
    let fi = &f.components[i];
    let gs: Vec<JetVar> = fi.jets().into_iter().filter(|j| matches!(j.field, Field::Arb(_))).collect();
    let [g] = &gs[..] else {
        return Err(shape("flux must involve a single arbitrary function"));
    };
    if !g.idx.is_zero() {
        return Err(shape("flux must be g·λ with g undifferentiated"));
    }
    let ge = Expr::jet(g.clone());
    let lambda = fi.div(&ge).expect("g is not zero");
    if lambda.depends_on(&Atom::Jet(g.clone())) {
        return Err(shape("flux is not linear in g"));
    }
    let verdict = sys.restricted_is_zero(&lambda.total_derivative(i), zt)?;
    Ok(FirstIntegral { lambda, direction: i, verdict })
}

#[cfg(test)]
mod tests;
