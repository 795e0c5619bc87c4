//! Rankings, orthonomic systems and reduction to normal form on solutions.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use crate::error::{Error, Result};
use crate::expr::{map_atoms, Atom, Expr, Verdict, ZeroTest};
use crate::space::{Field, JetVar, MultiIndex, Space};

/// One comparison stage of a ranking; later stages break ties.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Criterion {
    /// Weighted order `Σ wᵢ jⁱ` (non-negative weights).
    Weight(Vec<u32>),
    /// Field priority listed from lowest to highest; unlisted fields rank
    /// below all listed ones.
    Fields(Vec<Field>),
    /// Total order `|J|`.
    Order,
    /// Counts compared variable by variable, most significant first.
    Lex(Vec<usize>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ranking {
    pub criteria: Vec<Criterion>,
}

impl Ranking {
    /// Graded lexicographic: order, then field, then counts with the last
    /// declared independent variable most significant.
    pub fn graded_lex(space: &Space) -> Ranking {
        let fields = space.all_fields();
        let lex = (0..space.n()).rev().collect();
        Ranking { criteria: vec![Criterion::Order, Criterion::Fields(fields), Criterion::Lex(lex)] }
    }

    pub fn new(criteria: Vec<Criterion>) -> Ranking {
        Ranking { criteria }
    }

    pub fn compare(&self, a: &JetVar, b: &JetVar) -> Ordering {
        for c in &self.criteria {
            let o = match c {
                Criterion::Weight(w) => {
                    let f = |v: &JetVar| -> u64 {
                        v.idx.counts().iter().zip(w).map(|(j, w)| *j as u64 * *w as u64).sum()
                    };
                    f(a).cmp(&f(b))
                }
                Criterion::Fields(list) => {
                    let pos = |v: &JetVar| list.iter().position(|f| *f == v.field).map(|p| p + 1);
                    pos(a).cmp(&pos(b))
                }
                Criterion::Order => a.order().cmp(&b.order()),
                Criterion::Lex(vars) => vars
                    .iter()
                    .map(|&i| a.idx.get(i).cmp(&b.idx.get(i)))
                    .find(|o| o.is_ne())
                    .unwrap_or(Ordering::Equal),
            };
            if o.is_ne() {
                return o;
            }
        }
        a.cmp(b)
    }

    pub fn max<'a>(&self, vars: impl IntoIterator<Item = &'a JetVar>) -> Option<&'a JetVar> {
        vars.into_iter().max_by(|a, b| self.compare(a, b))
    }
}

/// `lead` with component `A_µ`, linear in `lead` (typically `lead − ω_µ`).
#[derive(Clone, Debug)]
pub struct Equation {
    pub lead: JetVar,
    pub component: Expr,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Class {
    Principal,
    Parametric,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    /// Which orthonomic condition (1, 2 or 3) fails.
    pub condition: u8,
    pub equation: usize,
    pub term: JetVar,
    pub message: String,
}

#[derive(Clone, Debug, Default)]
pub struct Validation {
    pub violations: Vec<Violation>,
}

impl Validation {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn fails(&self, condition: u8) -> bool {
        self.violations.iter().any(|v| v.condition == condition)
    }
}

#[derive(Default)]
struct Cache {
    dk: HashMap<(usize, MultiIndex), Expr>,
    rep: HashMap<(JetVar, bool), Expr>,
}

/// An orthonomic PDE system `A = 0`.
#[derive(Clone)]
pub struct PdeSystem {
    pub space: Space,
    pub ranking: Ranking,
    pub equations: Vec<Equation>,
    pub max_depth: usize,
    cache: Arc<Mutex<Cache>>,
}

impl std::fmt::Debug for PdeSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PdeSystem")
            .field("ranking", &self.ranking)
            .field("equations", &self.equations)
            .finish()
    }
}

impl PdeSystem {
    pub fn new(space: Space, ranking: Ranking) -> Self {
        PdeSystem { space, ranking, equations: Vec::new(), max_depth: 64, cache: Arc::default() }
    }

    /// Add `lead = rhs`.
    pub fn push_solved(&mut self, lead: JetVar, rhs: Expr) {
        let c = Expr::jet(lead.clone()).sub(&rhs);
        self.push_component(lead, c);
    }

    pub fn push_component(&mut self, lead: JetVar, component: Expr) {
        self.equations.push(Equation { lead, component });
        self.space.components = self.equations.len();
        self.cache = Arc::default();
    }

    pub fn len(&self) -> usize {
        self.equations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.equations.is_empty()
    }

    pub fn n(&self) -> usize {
        self.space.n()
    }

    pub fn components(&self) -> Vec<Expr> {
        self.equations.iter().map(|e| e.component.clone()).collect()
    }

    /// A copy with additional equations appended (e.g. constraints on `g`).
    pub fn extended(&self, extra: &[Equation]) -> PdeSystem {
        let mut s = self.clone();
        for e in extra {
            s.push_component(e.lead.clone(), e.component.clone());
        }
        s
    }

    /// `(µ, K)` with `v = lead_µ + K`, first matching equation.
    pub fn principal(&self, v: &JetVar) -> Option<(usize, MultiIndex)> {
        self.equations.iter().enumerate().find_map(|(mu, eq)| {
            if eq.lead.field != v.field {
                return None;
            }
            v.idx.checked_sub(&eq.lead.idx).map(|k| (mu, k))
        })
    }

    pub fn classify(&self, v: &JetVar) -> Class {
        if self.principal(v).is_some() {
            Class::Principal
        } else {
            Class::Parametric
        }
    }

    pub fn validate(&self) -> Validation {
        let mut out = Validation::default();
        for (mu, eq) in self.equations.iter().enumerate() {
            let lead = Atom::Jet(eq.lead.clone());
            let c = eq.component.partial(&lead);
            if c.is_zero() || c.depends_on(&lead) {
                out.violations.push(Violation {
                    condition: 1,
                    equation: mu,
                    term: eq.lead.clone(),
                    message: "component is not linear in its leading term".into(),
                });
            }
            for v in eq.component.jets() {
                if v == eq.lead {
                    continue;
                }
                if v.field == eq.lead.field || matches!(v.field, Field::Dep(_)) {
                    if self.ranking.compare(&v, &eq.lead) != Ordering::Less {
                        out.violations.push(Violation {
                            condition: 1,
                            equation: mu,
                            term: v.clone(),
                            message: "term does not rank below the leading term".into(),
                        });
                    }
                }
                if self.principal(&v).is_some() {
                    out.violations.push(Violation {
                        condition: 3,
                        equation: mu,
                        term: v.clone(),
                        message: "right-hand side contains a principal derivative".into(),
                    });
                }
            }
            for (nu, other) in self.equations.iter().enumerate() {
                if nu != mu
                    && other.lead.field == eq.lead.field
                    && eq.lead.idx.divides(&other.lead.idx)
                {
                    out.violations.push(Violation {
                        condition: 2,
                        equation: nu,
                        term: other.lead.clone(),
                        message: format!("leading term is a derivative of the lead of equation {}", mu + 1),
                    });
                }
            }
        }
        out
    }

    /// Replace every principal derivative by its value on solutions.
    pub fn normal_form(&self, e: &Expr) -> Result<Expr> {
        Reducer::new(self, false).reduce(e)
    }

    /// Rewrite in coordinates `(x, parametric derivatives, [A])`, with
    /// `D_K A_µ` as the `Aux(µ)` jet coordinate.
    pub fn to_aux(&self, e: &Expr) -> Result<Expr> {
        Reducer::new(self, true).reduce(e)
    }

    pub fn restricted_is_zero(&self, e: &Expr, zt: &ZeroTest) -> Result<Verdict> {
        Ok(zt.check(&self.normal_form(e)?))
    }

    /// `D_K A_µ`, memoized.
    pub fn component_derivative(&self, mu: usize, k: &MultiIndex) -> Expr {
        if let Some(e) = self.cache.lock().unwrap().dk.get(&(mu, k.clone())) {
            return e.clone();
        }
        let e = match k.counts().iter().position(|&j| j > 0) {
            None => self.equations[mu].component.clone(),
            Some(i) => {
                let mut lower = k.clone().counts().to_vec();
                lower[i] -= 1;
                self.component_derivative(mu, &MultiIndex::from_counts(lower)).total_derivative(i)
            }
        };
        self.cache.lock().unwrap().dk.insert((mu, k.clone()), e.clone());
        e
    }

    /// Substitute `D_K A_µ` for each `Aux(µ)` jet coordinate.
    pub fn expand_aux(&self, e: &Expr) -> Result<Expr> {
        map_atoms(e, &mut |a| match a {
            Atom::Jet(JetVar { field: Field::Aux(mu), idx }) => Some(self.component_derivative(*mu, idx)),
            _ => None,
        })
        .ok_or_else(|| Error::DivisionByZero("expanding system components".into()))
    }

    /// Set every `Aux` coordinate to zero.
    pub fn drop_aux(e: &Expr) -> Result<Expr> {
        map_atoms(e, &mut |a| match a {
            Atom::Jet(JetVar { field: Field::Aux(_), .. }) => Some(Expr::zero()),
            _ => None,
        })
        .ok_or_else(|| Error::DivisionByZero("evaluating on solutions".into()))
    }
}

struct Reducer<'a> {
    sys: &'a PdeSystem,
    aux: bool,
    depth: usize,
}

impl<'a> Reducer<'a> {
    fn new(sys: &'a PdeSystem, aux: bool) -> Self {
        Reducer { sys, aux, depth: 0 }
    }

    fn reduce(&mut self, e: &Expr) -> Result<Expr> {
        let mut bind = HashMap::new();
        for v in e.jets() {
            if self.sys.principal(&v).is_some() {
                let r = self.rep(&v)?;
                bind.insert(Atom::Jet(v), r);
            }
        }
        if bind.is_empty() {
            return Ok(e.clone());
        }
        map_atoms(e, &mut |a| bind.get(a).cloned())
            .ok_or_else(|| Error::DivisionByZero("reducing to normal form".into()))
    }

    fn rep(&mut self, v: &JetVar) -> Result<Expr> {
        let key = (v.clone(), self.aux);
        if let Some(r) = self.sys.cache.lock().unwrap().rep.get(&key) {
            return Ok(r.clone());
        }
        self.depth += 1;
        if self.depth > self.sys.max_depth {
            return Err(Error::InvalidSystem(format!(
                "reduction exceeded depth {} at {}",
                self.sys.max_depth,
                self.sys.space.jet_name(v)
            )));
        }
        let (mu, k) = self.sys.principal(v).expect("caller checked principal");
        let p = self.sys.component_derivative(mu, &k);
        let va = Atom::Jet(v.clone());
        let c = p.partial(&va);
        if c.is_zero() || c.depends_on(&va) {
            return Err(Error::InvalidSystem(format!(
                "D_K A_{} is not linear in {}",
                mu + 1,
                self.sys.space.jet_name(v)
            )));
        }
        let rest = p.sub(&c.mul(&Expr::jet(v.clone())));
        let a = if self.aux { Expr::jet(JetVar::new(Field::Aux(mu), k)) } else { Expr::zero() };
        let raw = a.sub(&rest).div(&c).expect("checked non-zero");
        let r = self.reduce(&raw)?;
        self.depth -= 1;
        self.sys.cache.lock().unwrap().rep.insert(key, r.clone());
        Ok(r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expr;

    fn liouville() -> PdeSystem {
        let s = Space::new(&["x", "t"], &["u", "v"]);
        let r = Ranking::graded_lex(&s);
        let mut sys = PdeSystem::new(s.clone(), r);
        let p = |src: &str| parse_expr(src, &s, &HashMap::new()).unwrap();
        sys.push_solved(p("u_xt").as_jet().unwrap().clone(), p("exp(2*u - v)"));
        sys.push_solved(p("v_xt").as_jet().unwrap().clone(), p("exp(2*v - u)"));
        sys
    }

    fn jet(sys: &PdeSystem, name: &str) -> JetVar {
        parse_expr(name, &sys.space, &HashMap::new()).unwrap().as_jet().unwrap().clone()
    }

    #[test]
    fn graded_lex_positivity() {
        let sys = liouville();
        let r = &sys.ranking;
        let (u, ux, ut, vxx, uxx) =
            (jet(&sys, "u"), jet(&sys, "u_x"), jet(&sys, "u_t"), jet(&sys, "v_xx"), jet(&sys, "u_xx"));
        assert_eq!(r.compare(&u, &ux), Ordering::Less);
        assert_eq!(r.compare(&ux, &ut), Ordering::Less);
        assert_eq!(r.compare(&jet(&sys, "u"), &jet(&sys, "v")), Ordering::Less);
        assert_eq!(r.compare(&uxx, &vxx), Ordering::Less);
    }

    #[test]
    fn liouville_is_orthonomic_and_reduces() {
        let sys = liouville();
        assert!(sys.validate().is_valid());
        assert_eq!(sys.classify(&jet(&sys, "u_xxt")), Class::Principal);
        assert_eq!(sys.classify(&jet(&sys, "u_xx")), Class::Parametric);
        assert_eq!(sys.classify(&jet(&sys, "u")), Class::Parametric);
        let p = |src: &str| parse_expr(src, &sys.space, &HashMap::new()).unwrap();
        assert_eq!(sys.normal_form(&p("u_xt")).unwrap(), p("exp(2*u - v)"));
        assert_eq!(sys.normal_form(&p("u_x")).unwrap(), p("u_x"));
        let lam1 = p("D_t(u_x^2 - u_x*v_x + v_x^2 - u_xx - v_xx)");
        assert!(sys.normal_form(&lam1).unwrap().is_zero());
        for a in sys.components() {
            assert!(sys.normal_form(&a.total_derivative(0).total_derivative(1)).unwrap().is_zero());
        }
    }

    #[test]
    fn aux_coordinates_round_trip() {
        let sys = liouville();
        let p = |src: &str| parse_expr(src, &sys.space, &HashMap::new()).unwrap();
        let e = p("u_xxt*v + u_xt^2");
        let a = sys.to_aux(&e).unwrap();
        assert!(a.jets().iter().any(|v| matches!(v.field, Field::Aux(_))));
        let back = sys.expand_aux(&a).unwrap();
        assert!(back.sub(&e).is_zero());
        assert_eq!(PdeSystem::drop_aux(&a).unwrap(), sys.normal_form(&e).unwrap());
    }

    #[test]
    fn invalid_systems_are_reported() {
        let s = Space::new(&["x", "t"], &["u"]);
        let p = |src: &str| parse_expr(src, &s, &HashMap::new()).unwrap();
        let j = |src: &str| p(src).as_jet().unwrap().clone();
        let mut a = PdeSystem::new(s.clone(), Ranking::graded_lex(&s));
        a.push_solved(j("u_x"), p("u_t"));
        a.push_solved(j("u_t"), p("u"));
        assert!(a.validate().fails(3));
        let mut b = PdeSystem::new(s.clone(), Ranking::graded_lex(&s));
        b.push_solved(j("u_xx"), p("u"));
        b.push_solved(j("u_xxx"), p("u_x"));
        assert!(b.validate().fails(2));
        let mut c = PdeSystem::new(s.clone(), Ranking::graded_lex(&s));
        c.push_solved(j("u_x"), p("u_x + u_t"));
        c.max_depth = 8;
        assert!(matches!(c.normal_form(&p("u_x")), Err(Error::InvalidSystem(_))));
    }
}
