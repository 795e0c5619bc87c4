//! Differentiation and substitution.
//!
//! Both walk the atom structure once, memoizing composite atoms, and rebuild
//! through the canonicalizing arithmetic.

use std::collections::HashMap;

use super::{Atom, Expr, Func, Poly};
use crate::space::MultiIndex;

/// Derivation extending `base` (its values on coordinate atoms) by the chain
/// rule through every kernel.
pub struct Deriver<'a> {
    base: &'a mut dyn FnMut(&Atom) -> Expr,
    memo: HashMap<Atom, Expr>,
}

impl<'a> Deriver<'a> {
    pub fn new(base: &'a mut dyn FnMut(&Atom) -> Expr) -> Self {
        Deriver { base, memo: HashMap::new() }
    }

    pub fn apply(&mut self, e: &Expr) -> Expr {
        let mut out = self.poly(e.numer());
        if e.denom().is_empty() {
            return out;
        }
        let mut log_d = Expr::zero();
        for (f, k) in e.denom() {
            let df = self.poly(f);
            if df.is_zero() {
                continue;
            }
            let fe = Expr::from_poly(f.clone());
            let term = df.div(&fe).expect("denominator factor is non-zero");
            log_d = log_d.add(&term.scale_int(*k as i64));
        }
        let den = e.denominator();
        out = out.div(&den).expect("denominator is non-zero");
        out.sub(&e.mul(&log_d))
    }

    fn poly(&mut self, p: &Poly) -> Expr {
        let mut out = Expr::zero();
        for a in p.atoms() {
            let da = self.atom(&a);
            if da.is_zero() {
                continue;
            }
            out = out.add(&Expr::from_poly(p.partial_atom(&a)).mul(&da));
        }
        out
    }

    fn atom(&mut self, a: &Atom) -> Expr {
        if let Some(d) = self.memo.get(a) {
            return d.clone();
        }
        let d = match a {
            Atom::Indep(_) | Atom::Jet(_) | Atom::Const(_) | Atom::Slot(_) => (self.base)(a),
            Atom::Exp(m) => self.apply(m).mul(&Expr::atom(a.clone())),
            Atom::Pow(p) => self.apply(p),
            Atom::Apply(f, z) => {
                let dz = self.apply(z);
                if dz.is_zero() {
                    Expr::zero()
                } else {
                    let outer = match f {
                        Func::Ln => z.inv().expect("ln argument is non-zero"),
                        Func::Sin => z.cos(),
                        Func::Cos => z.sin().neg(),
                        Func::Tan => Expr::one().add(&z.tan().pow_int(2)),
                        Func::Atan => Expr::one()
                            .add(&z.pow_int(2))
                            .inv()
                            .expect("1 + z² is non-zero"),
                    };
                    outer.mul(&dz)
                }
            }
            Atom::Opaque(f, k, z) => {
                let dz = self.apply(z);
                if dz.is_zero() {
                    Expr::zero()
                } else {
                    Expr::opaque(&f.0, k + 1, z).mul(&dz)
                }
            }
            Atom::Unknown(name, partials, args) => {
                let mut out = Expr::zero();
                for (l, arg) in args.iter().enumerate() {
                    let da = self.apply(arg);
                    if da.is_zero() {
                        continue;
                    }
                    let mut p = partials.clone();
                    p[l] += 1;
                    out = out.add(&Expr::unknown(name, p, args.clone()).mul(&da));
                }
                out
            }
        };
        self.memo.insert(a.clone(), d.clone());
        d
    }
}

impl Expr {
    /// Apply the derivation determined by its values on coordinate atoms.
    pub fn derive_with(&self, base: &mut dyn FnMut(&Atom) -> Expr) -> Expr {
        Deriver::new(base).apply(self)
    }

    /// Formal partial derivative in a coordinate atom.
    pub fn partial(&self, v: &Atom) -> Expr {
        self.derive_with(&mut |a| if a == v { Expr::one() } else { Expr::zero() })
    }

    /// Total derivative `D_i`.
    pub fn total_derivative(&self, i: usize) -> Expr {
        self.derive_with(&mut |a| total_base(a, i))
    }

    pub fn total_derivative_multi(&self, j: &MultiIndex) -> Expr {
        let mut e = self.clone();
        for i in j.steps() {
            e = e.total_derivative(i);
        }
        e
    }
}

pub(crate) fn total_base(a: &Atom, i: usize) -> Expr {
    match a {
        Atom::Indep(j) => {
            if *j == i {
                Expr::one()
            } else {
                Expr::zero()
            }
        }
        Atom::Jet(v) => Expr::jet(v.bump(i)),
        _ => Expr::zero(),
    }
}

/// Replace atoms by expressions, rebuilding kernels around mapped arguments.
///
/// `f` is consulted first for every atom; `None` means "keep, but map inside".
/// Returns `None` if a denominator becomes zero.
pub fn map_atoms(e: &Expr, f: &mut dyn FnMut(&Atom) -> Option<Expr>) -> Option<Expr> {
    Mapper { f, memo: HashMap::new() }.expr(e)
}

struct Mapper<'a> {
    f: &'a mut dyn FnMut(&Atom) -> Option<Expr>,
    memo: HashMap<Atom, Expr>,
}

impl Mapper<'_> {
    fn expr(&mut self, e: &Expr) -> Option<Expr> {
        let mut out = self.poly(e.numer())?;
        for (p, k) in e.denom() {
            let d = self.poly(p)?.pow_int(*k as i64);
            out = out.div(&d)?;
        }
        Some(out)
    }

    fn poly(&mut self, p: &Poly) -> Option<Expr> {
        let mut out = Expr::zero();
        for (m, c) in p.terms() {
            let mut t = Expr::rational(c.clone());
            for (a, e) in m.factors() {
                let v = self.atom(a)?;
                if e.is_integer() {
                    t = t.mul(&v.pow_int(e.to_integer()));
                } else {
                    t = t.mul(&v.pow(*e));
                }
            }
            out = out.add(&t);
        }
        Some(out)
    }

    fn atom(&mut self, a: &Atom) -> Option<Expr> {
        if let Some(v) = self.memo.get(a) {
            return Some(v.clone());
        }
        let v = match (self.f)(a) {
            Some(v) => v,
            None => match a {
                Atom::Indep(_) | Atom::Jet(_) | Atom::Const(_) | Atom::Slot(_) => {
                    Expr::atom(a.clone())
                }
                Atom::Exp(m) => self.expr(m)?.exp(),
                Atom::Pow(p) => self.expr(p)?,
                Atom::Apply(func, z) => Expr::apply(*func, &self.expr(z)?),
                Atom::Opaque(f, k, z) => Expr::opaque(&f.0, *k, &self.expr(z)?),
                Atom::Unknown(name, partials, args) => {
                    let args = args.iter().map(|x| self.expr(x)).collect::<Option<Vec<_>>>()?;
                    Expr::unknown(name, partials.clone(), args)
                }
            },
        };
        self.memo.insert(a.clone(), v.clone());
        Some(v)
    }
}

/// Simultaneous substitution of atoms.
pub fn substitute(e: &Expr, bindings: &HashMap<Atom, Expr>) -> Option<Expr> {
    if bindings.is_empty() {
        return Some(e.canonicalize());
    }
    map_atoms(e, &mut |a| bindings.get(a).cloned())
}
