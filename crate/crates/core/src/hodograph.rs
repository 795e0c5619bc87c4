//! Exchange of one dependent and one independent variable.

use std::collections::HashMap;

use crate::claws::ConservationLaw;
use crate::error::{Error, Result};
use crate::expr::{map_atoms, Atom, Expr};
use crate::jet::{PdeSystem, Ranking};
use crate::space::{Field, JetVar, Space};
use crate::variational::{homotopy_fluxes, FluxVector};

pub const DEFAULT_ORDER: u32 = 3;
pub const ORDER_CAP: u32 = 4;

/// Swap `u^α ↔ x^s`. Indices are kept: the new independent variable `s` is
/// the old `u^α`, the new dependent variable `α` is the old `x^s`.
#[derive(Clone, Debug)]
pub struct HodographMap {
    pub old: Space,
    pub new: Space,
    pub dep: usize,
    pub indep: usize,
    pub max_order: u32,
    /// Old `u^β_J` in new jet coordinates.
    table: HashMap<JetVar, Expr>,
}

impl HodographMap {
    /// Regions where the map is a valid change of variables. Not checked.
    pub fn side_conditions(&self) -> Vec<String> {
        let v = JetVar::base(Field::Dep(self.dep), self.old.n()).bump(self.indep);
        vec![format!("{} != 0", self.old.jet_name(&v))]
    }

    /// Table entry for an old jet variable.
    pub fn entry(&self, v: &JetVar) -> Option<&Expr> {
        self.table.get(v)
    }

    pub fn inverse(&self) -> Result<HodographMap> {
        build_map(&self.new, self.dep, self.indep, self.max_order)
    }
}

fn swapped_space(space: &Space, dep: usize, indep: usize) -> Space {
    let mut s = space.clone();
    std::mem::swap(&mut s.indep[indep], &mut s.deps[dep]);
    s
}

/// Build the substitution table by implicit differentiation:
/// `D_s = x_u⁻¹ D̃_s` and `D_j = D̃_j − x_j x_u⁻¹ D̃_s` for passive `j`.
pub fn build_map(space: &Space, dep: usize, indep: usize, max_order: u32) -> Result<HodographMap> {
    if max_order > ORDER_CAP {
        return Err(Error::OrderTooHigh { requested: max_order, cap: ORDER_CAP });
    }
    let n = space.n();
    if dep >= space.deps.len() || indep >= n {
        return Err(Error::InvalidSystem("hodograph swap names an undeclared variable".into()));
    }
    let x = JetVar::base(Field::Dep(dep), n);
    let xu = Expr::jet(x.bump(indep));
    let inv_xu = xu.inv().expect("jet is nonzero");
    let old_d = |e: &Expr, i: usize| -> Expr {
        let ds = e.total_derivative(indep).mul(&inv_xu);
        if i == indep {
            ds
        } else {
            e.total_derivative(i).sub(&Expr::jet(x.bump(i)).mul(&ds))
        }
    };

    let mut table = HashMap::new();
    for beta in 0..space.deps.len() {
        let base = JetVar::base(Field::Dep(beta), n);
        let start = if beta == dep { Expr::indep(indep) } else { Expr::jet(base.clone()) };
        table.insert(base.clone(), start);
        let mut layer = vec![base];
        for _ in 0..max_order {
            let mut next = Vec::new();
            for v in &layer {
                // extend along directions not below the first nonzero count
                let first = v.idx.counts().iter().position(|&c| c > 0).unwrap_or(n);
                for i in 0..n.min(first + 1) {
                    let w = v.bump(i);
                    let e = old_d(&table[v], i);
                    table.insert(w.clone(), e);
                    next.push(w);
                }
            }
            layer = next;
        }
    }
    Ok(HodographMap { old: space.clone(), new: swapped_space(space, dep, indep), dep, indep, max_order, table })
}

/// Rewrite an old-coordinate expression in the new jet coordinates.
pub fn transform_expr(map: &HodographMap, e: &Expr) -> Result<Expr> {
    let n = map.old.n();
    let mut err = None;
    let out = map_atoms(e, &mut |a| match a {
        Atom::Indep(i) if *i == map.indep => Some(Expr::jet(JetVar::base(Field::Dep(map.dep), n))),
        Atom::Jet(v) => match v.field {
            Field::Dep(_) => match map.table.get(v) {
                Some(t) => Some(t.clone()),
                None => {
                    err.get_or_insert(Error::OrderTooHigh { requested: v.order(), cap: map.max_order });
                    Some(Expr::zero())
                }
            },
            _ => {
                err.get_or_insert(Error::ShapeMismatch(
                    "arbitrary functions must be written as declared functions before a hodograph swap".into(),
                ));
                Some(Expr::zero())
            }
        },
        _ => None,
    });
    if let Some(e) = err {
        return Err(e);
    }
    out.ok_or_else(|| Error::DivisionByZero("hodograph substitution".into()))
}

/// `𝒥 = det(D_j x̃ⁱ) = u^α_s`, in old coordinates.
pub fn jacobian(map: &HodographMap) -> Expr {
    Expr::jet(JetVar::base(Field::Dep(map.dep), map.old.n()).bump(map.indep))
}

/// Transform every component; leads are the highest-ranked jets.
pub fn transform_system(map: &HodographMap, sys: &PdeSystem, ranking: Ranking) -> Result<PdeSystem> {
    let mut out = PdeSystem::new(map.new.clone(), ranking);
    for a in sys.components() {
        let c = transform_expr(map, &a)?;
        let jets: Vec<JetVar> = c.jets().into_iter().filter(|v| matches!(v.field, Field::Dep(_))).collect();
        let lead = out
            .ranking
            .max(&jets)
            .cloned()
            .ok_or_else(|| Error::InvalidSystem("transformed component has no dependent jets".into()))?;
        out.push_component(lead, c);
    }
    Ok(out)
}

/// `C̃ = 𝒥⁻¹ C` in new coordinates.
///
/// Fluxes come from the Piola form `F̃ⁱ = 𝒥⁻¹ D_j(x̃ⁱ) F^j`, falling back to
/// the homotopy in new variables, then to the bare divergence.
pub fn transform_cl(map: &HodographMap, cl: &ConservationLaw) -> Result<ConservationLaw> {
    let n = map.old.n();
    let inv_j = jacobian(map).inv().expect("jet is nonzero");
    let target = transform_expr(map, &cl.divergence().mul(&inv_j))?;
    if let Some(f) = &cl.fluxes {
        let u = JetVar::base(Field::Dep(map.dep), n);
        let mut comps = Vec::with_capacity(n);
        for i in 0..n {
            let raw = if i == map.indep {
                Expr::sum((0..n).map(|j| Expr::jet(u.bump(j)).mul(&f.components[j])))
            } else {
                f.components[i].clone()
            };
            comps.push(transform_expr(map, &raw.mul(&inv_j))?);
        }
        let ft = FluxVector::new(comps);
        if ft.divergence().sub(&target).is_zero() {
            return Ok(ConservationLaw::from_fluxes(ft));
        }
    }
    match homotopy_fluxes(&target, &map.new.dep_fields(), n) {
        Ok(ft) => Ok(ConservationLaw::from_fluxes(ft)),
        Err(_) => Ok(ConservationLaw::from_divergence(target)),
    }
}
