//! Generalized symmetries in characteristic form.

use crate::claws::{verify_multiplier, ConstraintSet, Multiplier};
use crate::error::Result;
use crate::expr::{Atom, Expr, Verdict, ZeroTest};
use crate::jet::{PdeSystem, Ranking};
use crate::space::{Field, JetVar, Space};
use crate::variational::{combine, euler, is_divergence};

/// `Q = (Q¹, …, Qᴹ)`, one component per dependent variable.
#[derive(Clone, Debug, PartialEq)]
pub struct Characteristic {
    pub components: Vec<Expr>,
}

impl Characteristic {
    pub fn new(components: Vec<Expr>) -> Self {
        Characteristic { components }
    }

    pub fn zero(m: usize) -> Self {
        Characteristic { components: vec![Expr::zero(); m] }
    }

    pub fn sub(&self, other: &Characteristic) -> Self {
        Characteristic::new(self.components.iter().zip(&other.components).map(|(a, b)| a.sub(b)).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(Expr::is_zero)
    }
}

/// `X(e) = Σ D_J Q^α · ∂e/∂u^α_J`.
pub fn apply_prolonged(q: &Characteristic, e: &Expr) -> Expr {
    let mut out = Expr::zero();
    for v in e.jets() {
        let Field::Dep(alpha) = v.field else { continue };
        let Some(qa) = q.components.get(alpha) else { continue };
        if qa.is_zero() {
            continue;
        }
        let p = e.partial(&Atom::Jet(v.clone()));
        out = out.add(&qa.total_derivative_multi(&v.idx).mul(&p));
    }
    out
}

/// Linearized symmetry condition on every component.
pub fn check_symmetry(sys: &PdeSystem, q: &Characteristic, zt: &ZeroTest) -> Result<Verdict> {
    let mut vs = Vec::new();
    for a in sys.components() {
        vs.push(sys.restricted_is_zero(&apply_prolonged(q, &a), zt)?);
    }
    Ok(combine(vs))
}

/// `Q^α = η^α − ξⁱ u^α_i`.
pub fn characteristic_from_point(xi: &[Expr], eta: &[Expr]) -> Characteristic {
    let n = xi.len();
    let comps = eta
        .iter()
        .enumerate()
        .map(|(alpha, h)| {
            let base = JetVar::base(Field::Dep(alpha), n);
            xi.iter().enumerate().fold(h.clone(), |acc, (i, x)| acc.sub(&x.mul(&Expr::jet(base.bump(i)))))
        })
        .collect();
    Characteristic::new(comps)
}

/// `[Q₁, Q₂]^α = X₁(Q₂^α) − X₂(Q₁^α)`.
pub fn bracket(q1: &Characteristic, q2: &Characteristic) -> Characteristic {
    let comps = q1
        .components
        .iter()
        .zip(&q2.components)
        .map(|(a, b)| apply_prolonged(q1, b).sub(&apply_prolonged(q2, a)))
        .collect();
    Characteristic::new(comps)
}

/// `X(L)` is a divergence.
pub fn check_variational(space: &Space, l: &Expr, q: &Characteristic, zt: &ZeroTest) -> Verdict {
    is_divergence(&apply_prolonged(q, l), &space.dep_fields(), zt)
}

/// The Euler–Lagrange system `E_{u^α}(L) = 0`.
///
/// Leads default to the highest-ranked jet of each component.
pub fn euler_lagrange_system(space: &Space, ranking: Ranking, l: &Expr, leads: Option<&[JetVar]>) -> PdeSystem {
    let mut sys = PdeSystem::new(space.clone(), ranking);
    for (alpha, f) in space.dep_fields().into_iter().enumerate() {
        let c = euler(l, f);
        let lead = match leads {
            Some(ls) => ls[alpha].clone(),
            None => {
                let jets: Vec<JetVar> = c.jets().into_iter().filter(|j| matches!(j.field, Field::Dep(_))).collect();
                match sys.ranking.max(&jets) {
                    Some(j) => j.clone(),
                    None => JetVar::base(f, space.n()),
                }
            }
        };
        sys.push_component(lead, c);
    }
    sys
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Noether1 {
    pub variational: Verdict,
    pub multiplier: Verdict,
}

impl Noether1 {
    /// Both paths reach the same conclusion.
    pub fn agree(&self) -> bool {
        self.variational.holds() == self.multiplier.holds()
    }
}

/// Compare the variational-symmetry test with the multiplier test on the
/// Euler–Lagrange system.
pub fn check_noether1(sys: &PdeSystem, l: &Expr, q: &Characteristic, zt: &ZeroTest) -> Result<Noether1> {
    let variational = check_variational(&sys.space, l, q, zt);
    let mult = Multiplier::new(q.components.clone());
    let multiplier = verify_multiplier(sys, &mult, &ConstraintSet::none(&sys.space), zt)?;
    Ok(Noether1 { variational, multiplier })
}

#[cfg(test)]
mod tests;
