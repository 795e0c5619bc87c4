//! Constructors for transcendental kernels.

use std::sync::Arc;

use num_traits::One;

use super::poly::coeff_to_exp;
use super::{Atom, Exp, Expr, Func, Mono, OpaqueFn, OpaqueRef};

impl Expr {
    /// `exp`, merged into unit-monomial kernels so that
    /// `exp(a)·exp(b) = exp(a+b)` holds structurally.
    pub fn exp(&self) -> Expr {
        if !self.is_polynomial() {
            let lc = self.numer().leading().map(|(_, c)| c.clone()).unwrap();
            if let Some(c) = coeff_to_exp(&lc) {
                if !c.is_one() {
                    let base = self.scale(&lc.recip());
                    return Expr::from_mono(Mono::single(Atom::Exp(base), c));
                }
            }
            return Expr::atom(Atom::Exp(self.clone()));
        }
        let mut out = Expr::one();
        for (m, c) in self.numer().terms() {
            if let [(Atom::Apply(Func::Ln, z), e)] = m.factors() {
                if e.is_one() {
                    if let Some(ce) = coeff_to_exp(c) {
                        out = out.mul(&z.pow(ce));
                        continue;
                    }
                }
            }
            let arg = Expr::from_mono(m.clone());
            let factor = match coeff_to_exp(c) {
                Some(ce) => Expr::from_mono(Mono::single(Atom::Exp(arg), ce)),
                None => Expr::atom(Atom::Exp(arg.scale(c))),
            };
            out = out.mul(&factor);
        }
        out
    }

    pub fn ln(&self) -> Expr {
        if self.is_one() {
            return Expr::zero();
        }
        if self.is_polynomial() && self.numer().len() == 1 {
            let (m, c) = self.numer().terms().next().unwrap();
            if c.is_one() {
                if let [(Atom::Exp(a), e)] = m.factors() {
                    return a.scale(&super::poly::exp_to_coeff(*e));
                }
            }
        }
        Expr::atom(Atom::Apply(Func::Ln, self.clone()))
    }

    pub fn apply(f: Func, arg: &Expr) -> Expr {
        match f {
            Func::Ln => arg.ln(),
            Func::Cos => {
                if arg.is_zero() {
                    return Expr::one();
                }
                let arg = if arg.looks_negative() { arg.neg() } else { arg.clone() };
                Expr::atom(Atom::Apply(f, arg))
            }
            Func::Sin | Func::Tan | Func::Atan => {
                if arg.is_zero() {
                    return Expr::zero();
                }
                if arg.looks_negative() {
                    return Expr::atom(Atom::Apply(f, arg.neg())).neg();
                }
                Expr::atom(Atom::Apply(f, arg.clone()))
            }
        }
    }

    pub fn sin(&self) -> Expr {
        Expr::apply(Func::Sin, self)
    }

    pub fn cos(&self) -> Expr {
        Expr::apply(Func::Cos, self)
    }

    pub fn tan(&self) -> Expr {
        Expr::apply(Func::Tan, self)
    }

    pub fn atan(&self) -> Expr {
        Expr::apply(Func::Atan, self)
    }

    /// `f^(k)(arg)`, expanding through the derivative rule when `f` has one.
    pub fn opaque(f: &Arc<OpaqueFn>, k: u32, arg: &Expr) -> Expr {
        if k >= 1 {
            if let Some(rule) = &f.rule {
                let slot = Atom::Slot(0);
                let mut d = rule.clone();
                for _ in 1..k {
                    d = d.partial(&slot);
                }
                return super::diff::substitute(&d, &[(slot, arg.clone())].into_iter().collect())
                    .unwrap_or_else(Expr::zero);
            }
        }
        Expr::atom(Atom::Opaque(OpaqueRef(f.clone()), k, arg.clone()))
    }

    pub fn unknown(name: &str, partials: Vec<u32>, args: Vec<Expr>) -> Expr {
        Expr::atom(Atom::Unknown(Arc::from(name), partials, args))
    }

    /// `ln|x|`-free helper: `x^r` with a small rational exponent.
    pub fn powf(&self, num: i64, den: i64) -> Expr {
        self.pow(Exp::new(num, den))
    }

    pub fn is_constant_kernel(&self) -> bool {
        self.coordinates().is_empty() && !self.is_zero()
    }
}
