//! Euler operators, formal adjoints and flux reconstruction.

use std::collections::HashMap;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::expr::{exp_to_coeff, substitute, Atom, Coeff, Exp, Expr, Mono, Poly, Verdict, ZeroTest};
use crate::space::{Field, JetVar, MultiIndex};

/// Slot used for the homotopy parameter.
pub(crate) const HOMOTOPY_T: usize = 1 << 20;

/// `Σ a_K · D_K`, coefficients in `(x, [u])`.
#[derive(Clone, Debug)]
pub struct LinDiffOp {
    pub n: usize,
    pub terms: Vec<(Expr, MultiIndex)>,
}

impl LinDiffOp {
    pub fn new(n: usize, terms: Vec<(Expr, MultiIndex)>) -> Self {
        LinDiffOp { n, terms }.normalized()
    }

    pub fn zero(n: usize) -> Self {
        LinDiffOp { n, terms: Vec::new() }
    }

    pub fn identity(n: usize) -> Self {
        LinDiffOp::scalar(n, Expr::one())
    }

    pub fn scalar(n: usize, a: Expr) -> Self {
        LinDiffOp::new(n, vec![(a, MultiIndex::zero(n))])
    }

    /// `a · D_i`.
    pub fn d(n: usize, i: usize, a: Expr) -> Self {
        LinDiffOp::new(n, vec![(a, MultiIndex::unit(n, i))])
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Merge equal multi-indices and drop zero coefficients.
    pub fn normalized(&self) -> Self {
        let mut acc: Vec<(Expr, MultiIndex)> = Vec::new();
        for (a, k) in &self.terms {
            match acc.iter_mut().find(|(_, j)| j == k) {
                Some(slot) => slot.0 = slot.0.add(a),
                None => acc.push((a.clone(), k.clone())),
            }
        }
        acc.retain(|(a, _)| !a.is_zero());
        acc.sort_by(|x, y| x.1.cmp(&y.1));
        LinDiffOp { n: self.n, terms: acc }
    }

    pub fn apply(&self, e: &Expr) -> Expr {
        Expr::sum(self.terms.iter().map(|(a, k)| a.mul(&e.total_derivative_multi(k))))
    }

    /// `(a D_K)† = (−D)_K ∘ a`, expanded by Leibniz into `Σ b_L D_L`.
    pub fn adjoint(&self) -> Self {
        let mut out = Vec::new();
        for (a, k) in &self.terms {
            let sign = if k.order() % 2 == 0 { 1 } else { -1 };
            for l in k.sub_indices() {
                let rest = k.checked_sub(&l).expect("sub-index");
                let c = sign * k.binomial(&l) as i64;
                out.push((a.total_derivative_multi(&rest).scale_int(c), l));
            }
        }
        LinDiffOp::new(self.n, out)
    }

    pub fn add(&self, other: &LinDiffOp) -> Self {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        LinDiffOp::new(self.n, terms)
    }

    pub fn neg(&self) -> Self {
        let terms = self.terms.iter().map(|(a, k)| (a.neg(), k.clone())).collect();
        LinDiffOp { n: self.n, terms }
    }

    /// Highest total order among the terms.
    pub fn order(&self) -> u32 {
        self.terms.iter().map(|(_, k)| k.order()).max().unwrap_or(0)
    }
}

impl PartialEq for LinDiffOp {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.add(&other.neg()).is_zero()
    }
}

/// `(F¹, …, Fᴺ)`.
#[derive(Clone, Debug, PartialEq)]
pub struct FluxVector {
    pub components: Vec<Expr>,
}

impl FluxVector {
    pub fn new(components: Vec<Expr>) -> Self {
        FluxVector { components }
    }

    pub fn zero(n: usize) -> Self {
        FluxVector { components: vec![Expr::zero(); n] }
    }

    pub fn n(&self) -> usize {
        self.components.len()
    }

    pub fn divergence(&self) -> Expr {
        Expr::sum(self.components.iter().enumerate().map(|(i, f)| f.total_derivative(i)))
    }

    pub fn add(&self, other: &FluxVector) -> Self {
        let c = self.components.iter().zip(&other.components).map(|(a, b)| a.add(b)).collect();
        FluxVector { components: c }
    }

    pub fn sub(&self, other: &FluxVector) -> Self {
        let c = self.components.iter().zip(&other.components).map(|(a, b)| a.sub(b)).collect();
        FluxVector { components: c }
    }

    pub fn scale(&self, k: &Expr) -> Self {
        FluxVector { components: self.components.iter().map(|f| f.mul(k)).collect() }
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(Expr::is_zero)
    }
}

/// `E_v(e) = Σ_J (−D)_J ∂e/∂v_J`.
pub fn euler(e: &Expr, v: Field) -> Expr {
    let mut out = Expr::zero();
    for j in e.jets().into_iter().filter(|j| j.field == v) {
        let p = e.partial(&Atom::Jet(j.clone()));
        let d = p.total_derivative_multi(&j.idx);
        out = if j.order() % 2 == 0 { out.add(&d) } else { out.sub(&d) };
    }
    out
}

/// Combine per-component verdicts: any refutation wins, exactness needs all.
pub fn combine(verdicts: impl IntoIterator<Item = Verdict>) -> Verdict {
    let mut all_exact = true;
    let mut all_hold = true;
    for v in verdicts {
        if v == Verdict::ProvedNonzero {
            return v;
        }
        all_exact &= v == Verdict::ProvedZero;
        all_hold &= v.holds();
    }
    if all_exact {
        Verdict::ProvedZero
    } else if all_hold {
        Verdict::ProbablyZero
    } else {
        Verdict::Unknown
    }
}

/// Divergence test by the Euler criterion in every listed variable.
pub fn is_divergence(e: &Expr, vars: &[Field], zt: &ZeroTest) -> Verdict {
    combine(vars.iter().map(|v| zt.check(&euler(e, *v))))
}

/// Where the homotopy starts.
#[derive(Clone, Debug, Default)]
pub struct Basepoint {
    /// Constant value of each undifferentiated field; absent fields start at 0.
    pub shift: HashMap<Field, Expr>,
}

impl Basepoint {
    pub fn origin() -> Self {
        Basepoint::default()
    }

    pub fn shifted(shift: impl IntoIterator<Item = (Field, Expr)>) -> Self {
        Basepoint { shift: shift.into_iter().collect() }
    }

    fn value(&self, f: Field) -> Expr {
        self.shift.get(&f).cloned().unwrap_or_else(Expr::zero)
    }
}

/// Flux reconstruction by the scale homotopy `v ↦ v₀ + t(v − v₀)`.
pub fn homotopy_fluxes(e: &Expr, vars: &[Field], n: usize) -> Result<FluxVector> {
    homotopy_fluxes_at(e, vars, n, &Basepoint::origin())
}

pub fn homotopy_fluxes_at(e: &Expr, vars: &[Field], n: usize, base: &Basepoint) -> Result<FluxVector> {
    let all: Vec<usize> = (0..n).collect();
    directional_fluxes_at(e, &all, vars, n, base)
}

/// Fluxes with non-zero components only in the listed directions.
pub fn directional_fluxes(e: &Expr, dirs: &[usize], vars: &[Field], n: usize) -> Result<FluxVector> {
    directional_fluxes_at(e, dirs, vars, n, &Basepoint::origin())
}

pub fn directional_fluxes_at(
    e: &Expr,
    dirs: &[usize],
    vars: &[Field],
    n: usize,
    base: &Basepoint,
) -> Result<FluxVector> {
    let f = FluxVector::new(homotopy(e, vars, n, dirs, base)?);
    if !f.divergence().sub(e).is_zero() {
        return Err(Error::NotExactDerivative(format!(
            "expression is not a total divergence in directions {dirs:?}"
        )));
    }
    Ok(f)
}

/// `λ` with `D_i λ = e`, by the homotopy restricted to the `i` direction.
pub fn invert_total_derivative(e: &Expr, i: usize, vars: &[Field], n: usize) -> Result<Expr> {
    invert_total_derivative_at(e, i, vars, n, &Basepoint::origin())
}

pub fn invert_total_derivative_at(
    e: &Expr,
    i: usize,
    vars: &[Field],
    n: usize,
    base: &Basepoint,
) -> Result<Expr> {
    let not_exact = || Error::NotExactDerivative(format!("not a total derivative in direction {i}"));
    let lam = match homotopy(e, vars, n, &[i], base) {
        Ok(mut f) => f.swap_remove(i),
        Err(Error::HomotopySingular(msg)) => return Err(Error::HomotopySingular(msg)),
        Err(_) => return Err(not_exact()),
    };
    if lam.total_derivative(i).sub(e).is_zero() {
        Ok(lam)
    } else {
        Err(not_exact())
    }
}

fn homotopy(e: &Expr, vars: &[Field], n: usize, dirs: &[usize], base: &Basepoint) -> Result<Vec<Expr>> {
    let t = Expr::slot(HOMOTOPY_T);
    let jets: Vec<JetVar> = e.jets().into_iter().filter(|j| vars.contains(&j.field)).collect();
    let mut scaled = HashMap::new();
    let mut origin = HashMap::new();
    for j in &jets {
        let (s, o) = if j.idx.is_zero() {
            let c = base.value(j.field);
            (c.add(&t.mul(&Expr::jet(j.clone()).sub(&c))), c)
        } else {
            (t.mul(&Expr::jet(j.clone())), Expr::zero())
        };
        scaled.insert(Atom::Jet(j.clone()), s);
        origin.insert(Atom::Jet(j.clone()), o);
    }
    let singular = |what: &str| Error::HomotopySingular(what.to_string());

    let mut flux = vec![Expr::zero(); n];
    for j in &jets {
        let p = substitute(&e.partial(&Atom::Jet(j.clone())), &scaled)
            .ok_or_else(|| singular("integrand divides by zero"))?;
        // Split the derivative into the part carried by `w` and the part moved by parts.
        let mut wc = j.idx.counts().to_vec();
        let mut kc = vec![0; n];
        for &i in dirs {
            kc[i] = std::mem::take(&mut wc[i]);
        }
        let (w_jet, mut k) = (JetVar::new(j.field, MultiIndex::from_counts(wc)), MultiIndex::from_counts(kc));
        let w0 = base.value(j.field);
        let mut f = p;
        while let Some(i) = k.counts().iter().position(|c| *c > 0) {
            k = k.checked_sub(&MultiIndex::unit(n, i)).expect("positive count");
            let v = w_jet.shift(&k);
            let w = if v.idx.is_zero() { Expr::jet(v).sub(&w0) } else { Expr::jet(v) };
            flux[i] = flux[i].add(&f.mul(&w));
            f = f.total_derivative(i).neg();
        }
    }
    let mut out = Vec::with_capacity(n);
    for g in flux {
        out.push(integrate_slot(&g, HOMOTOPY_T).ok_or_else(|| singular("non-polynomial dependence on t"))?);
    }
    let rest = substitute(e, &origin).ok_or_else(|| singular("expression is singular at the basepoint"))?;
    if !rest.is_zero() {
        let (i, prim) = dirs
            .iter()
            .copied()
            .find_map(|i| integrate_indep(&rest, i).map(|p| (i, p)))
            .ok_or_else(|| singular("basepoint term has no closed-form antiderivative"))?;
        out[i] = out[i].add(&prim);
    }
    Ok(out)
}

/// `∫₀¹ e dt` for `e` polynomial in the slot.
pub(crate) fn integrate_slot(e: &Expr, slot: usize) -> Option<Expr> {
    let t = Atom::Slot(slot);
    if e.denom().iter().any(|(f, _)| f.atoms().iter().any(|a| atom_mentions(a, &t))) {
        return None;
    }
    let mut num = Poly::zero();
    for (m, c) in e.numer().terms() {
        let k = m.exponent(&t);
        if !k.is_integer() || k.is_negative() {
            return None;
        }
        let rest = Mono::from_factors(m.factors().iter().filter(|(a, _)| *a != t).cloned());
        if rest.factors().iter().any(|(a, _)| atom_mentions(a, &t)) {
            return None;
        }
        let w = Coeff::new(One::one(), (k.to_integer() + 1).into());
        num.add_term(rest, c * w);
    }
    Expr::from_poly(num).div(&e.denominator())
}

/// An antiderivative in `x_i`, when one exists in closed form by term.
pub fn integrate_indep(e: &Expr, i: usize) -> Option<Expr> {
    let x = Atom::Indep(i);
    let xe = Expr::indep(i);
    if e.denom().iter().any(|(f, _)| f.atoms().iter().any(|a| atom_mentions(a, &x))) {
        return None;
    }
    let mut out = Expr::zero();
    for (m, c) in e.numer().terms() {
        let k = m.exponent(&x);
        let mut rate = Exp::zero();
        let mut rest = Vec::new();
        for (a, p) in m.factors() {
            if *a == x {
                continue;
            }
            match a {
                Atom::Exp(arg) if arg.as_atom() == Some(&x) => rate = *p,
                _ if atom_mentions(a, &x) => return None,
                _ => rest.push((a.clone(), *p)),
            }
        }
        let mut term = Expr::from_mono(Mono::from_factors(rest)).scale(c);
        if rate.is_zero() {
            if k == -Exp::one() {
                term = term.mul(&xe.ln());
            } else {
                let k1 = k + Exp::one();
                term = term.mul(&xe.pow(k1)).scale(&exp_to_coeff(k1.recip()));
            }
        } else if k.is_zero() {
            let g = Expr::from_mono(Mono::single(Atom::Exp(xe.clone()), rate));
            term = term.mul(&g).scale(&exp_to_coeff(rate.recip()));
        } else {
            return None;
        }
        out = out.add(&term);
    }
    out.div(&e.denominator())
}

fn atom_mentions(a: &Atom, target: &Atom) -> bool {
    a == target || (!a.is_coordinate() && Expr::atom(a.clone()).depends_on(target))
}

#[cfg(test)]
mod tests;
