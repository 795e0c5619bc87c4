//! Symbolic expressions in canonical rational form over atomic kernels.
//!
//! An [`Expr`] is a quotient `N / ∏ fᵏ` of polynomials in atoms. Atoms are
//! coordinates (independent variables, jet coordinates, constants) or
//! transcendental kernels (`exp`, fractional powers, `ln`, trig, opaque and
//! unknown functions) whose arguments are themselves canonical.

mod diff;
mod eval;
mod kernels;
mod parse;
mod poly;
mod print;

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::Ratio;
use num_traits::{One, Signed, Zero};

pub use diff::{map_atoms, substitute};
pub use eval::{Assignment, EvalError, Instances, Verdict, ZeroTest};
pub use parse::{parse_expr, ParseError};
pub use poly::{exp_to_coeff, Coeff, Mono, Poly};
pub use print::Printer;

use crate::space::{Field, JetVar};

/// Exponent of an atom inside a monomial.
pub type Exp = Ratio<i64>;

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Func {
    Ln,
    Sin,
    Cos,
    Tan,
    Atan,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Ln => "ln",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Atan => "atan",
        }
    }
}

/// A declared unary function symbol.
///
/// `rule`, if set, is the first derivative written in terms of `Slot(0)`.
#[derive(Debug)]
pub struct OpaqueFn {
    pub name: String,
    pub rule: Option<Expr>,
}

impl OpaqueFn {
    pub fn new(name: &str) -> Self {
        OpaqueFn { name: name.to_string(), rule: None }
    }

    pub fn with_rule(name: &str, rule: Expr) -> Self {
        OpaqueFn { name: name.to_string(), rule: Some(rule) }
    }
}

/// Shared handle compared by name.
#[derive(Clone, Debug)]
pub struct OpaqueRef(pub Arc<OpaqueFn>);

impl PartialEq for OpaqueRef {
    fn eq(&self, other: &Self) -> bool {
        self.0.name == other.0.name
    }
}
impl Eq for OpaqueRef {}
impl PartialOrd for OpaqueRef {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for OpaqueRef {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.name.cmp(&other.0.name)
    }
}
impl Hash for OpaqueRef {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.0.name.hash(state);
    }
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Atom {
    Indep(usize),
    Jet(JetVar),
    Const(Arc<str>),
    /// Placeholder variable, invisible to total derivatives.
    Slot(usize),
    /// `exp(arg)`: `arg` is a coefficient-one monomial, or a non-polynomial
    /// expression with unit leading coefficient.
    Exp(Expr),
    /// Base of a fractional power, kept with exponent in `[0, 1)`.
    Pow(Expr),
    Apply(Func, Expr),
    /// `f^(k)(arg)`.
    Opaque(OpaqueRef, u32, Expr),
    /// Multi-argument unknown with partial-derivative counts per argument.
    Unknown(Arc<str>, Vec<u32>, Vec<Expr>),
}

impl Atom {
    pub fn is_coordinate(&self) -> bool {
        matches!(self, Atom::Indep(_) | Atom::Jet(_) | Atom::Const(_) | Atom::Slot(_))
    }

    pub fn as_jet(&self) -> Option<&JetVar> {
        match self {
            Atom::Jet(v) => Some(v),
            _ => None,
        }
    }
}

/// Canonical quotient: numerator over normalized, pairwise distinct factors.
///
/// Each denominator factor has several terms, leading coefficient one and no
/// monomial content; the numerator is not divisible by any of them.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Rat {
    pub(crate) num: Poly,
    pub(crate) den: Vec<(Poly, u32)>,
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Expr(Arc<Rat>);

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", Printer::bare().print(self))
    }
}

fn int(n: i64) -> Coeff {
    Coeff::from_integer(BigInt::from(n))
}

fn expand_den(den: &[(Poly, u32)]) -> Poly {
    den.iter().fold(Poly::one(), |acc, (f, k)| acc.mul(&f.pow(*k)))
}

fn root_in_range(e: &Exp) -> bool {
    *e >= Exp::zero() && *e < Exp::one()
}

fn has_bad_roots(p: &Poly) -> bool {
    p.terms().any(|(m, _)| {
        m.factors()
            .iter()
            .any(|(a, e)| matches!(a, Atom::Pow(_)) && !root_in_range(e))
    })
}

/// Rewrite every `Pow(P)^e` with `e ∉ [0,1)` as `P^⌊e⌋ · Pow(P)^{e−⌊e⌋}`.
fn fix_roots(p: &Poly) -> Rat {
    let mut plain = Poly::zero();
    let mut acc = Rat::zero();
    for (m, c) in p.terms() {
        let mut keep = Vec::new();
        let mut extra = Rat::one();
        for (a, e) in m.factors() {
            match a {
                Atom::Pow(base) if !root_in_range(e) => {
                    let fl = e.floor();
                    let frac = e - fl;
                    if !frac.is_zero() {
                        keep.push((a.clone(), frac));
                    }
                    extra = Rat::mul(&extra, &base.0.pow_int(fl.to_integer()));
                }
                _ => keep.push((a.clone(), *e)),
            }
        }
        let head = Poly::term(Mono(keep), c.clone());
        if extra.is_one() {
            plain.add_term(head.terms().next().unwrap().0.clone(), c.clone());
        } else {
            acc = Rat::add(&acc, &Rat::mul(&Rat::build(head, vec![]), &extra));
        }
    }
    Rat::add(&acc, &Rat::build(plain, vec![]))
}

impl Rat {
    pub fn zero() -> Rat {
        Rat { num: Poly::zero(), den: vec![] }
    }

    pub fn one() -> Rat {
        Rat { num: Poly::one(), den: vec![] }
    }

    pub fn is_one(&self) -> bool {
        self.den.is_empty() && self.num.is_one()
    }

    /// Assemble `num / den` from a numerator and normalized factors.
    fn build(num: Poly, den: Vec<(Poly, u32)>) -> Rat {
        if num.is_zero() {
            return Rat::zero();
        }
        if has_bad_roots(&num) {
            let fixed = fix_roots(&num);
            if den.is_empty() {
                return fixed;
            }
            return Rat::mul(&fixed, &Rat { num: Poly::one(), den });
        }
        let mut num = num;
        let den = if den.len() > 1 { refine(den) } else { den };
        let mut out = Vec::with_capacity(den.len());
        for (f, k) in den {
            let mut k = k;
            while k > 0 {
                match num.div_exact(&f) {
                    Some(q) => {
                        num = q;
                        k -= 1;
                    }
                    None => break,
                }
            }
            if k > 0 {
                out.push((f, k));
            }
        }
        if has_bad_roots(&num) {
            return Rat::build(num, out);
        }
        Rat { num, den: out }
    }

    fn add(a: &Rat, b: &Rat) -> Rat {
        if a.num.is_zero() {
            return b.clone();
        }
        if b.num.is_zero() {
            return a.clone();
        }
        if a.den.is_empty() && b.den.is_empty() {
            return Rat { num: a.num.add(&b.num), den: vec![] };
        }
        let mut lcm: Vec<(Poly, u32)> = a.den.clone();
        for (f, k) in &b.den {
            match lcm.iter_mut().find(|(g, _)| g == f) {
                Some(entry) => entry.1 = entry.1.max(*k),
                None => lcm.push((f.clone(), *k)),
            }
        }
        lcm.sort();
        let lift = |r: &Rat| {
            let mut p = r.num.clone();
            for (f, k) in &lcm {
                let have = r.den.iter().find(|(g, _)| g == f).map_or(0, |e| e.1);
                if *k > have {
                    p = p.mul(&f.pow(*k - have));
                }
            }
            p
        };
        let num = lift(a).add(&lift(b));
        Rat::build(num, lcm)
    }

    fn mul(a: &Rat, b: &Rat) -> Rat {
        if a.num.is_zero() || b.num.is_zero() {
            return Rat::zero();
        }
        if a.den.is_empty() && b.den.is_empty() {
            return Rat::build(a.num.mul(&b.num), vec![]);
        }
        // Cancel crosswise before multiplying out.
        let (na, db) = cancel_against(&a.num, &b.den);
        let (nb, da) = cancel_against(&b.num, &a.den);
        let mut den = da;
        for (f, k) in db {
            match den.iter_mut().find(|(g, _)| *g == f) {
                Some(entry) => entry.1 += k,
                None => den.push((f, k)),
            }
        }
        den.sort();
        Rat::build(na.mul(&nb), den)
    }

    fn neg(&self) -> Rat {
        Rat { num: self.num.neg(), den: self.den.clone() }
    }

    fn inv(&self) -> Option<Rat> {
        if self.num.is_zero() {
            return None;
        }
        let (c, m, p) = self.num.content_split();
        let num = expand_den(&self.den).mul_term(&Mono::one().div(&m), &c.recip());
        let den = if p.len() <= 1 { vec![] } else { vec![perfect_power(p)] };
        Some(Rat::build(num, den))
    }

    fn pow_int(&self, n: i64) -> Rat {
        if n == 0 {
            return Rat::one();
        }
        let base = if n < 0 { self.inv().unwrap_or_else(Rat::zero) } else { self.clone() };
        let k = n.unsigned_abs() as u32;
        if base.num.len() == 1 {
            let num = base.num.pow(k);
            let den = base.den.iter().map(|(f, e)| (f.clone(), e * k)).collect();
            return Rat::build(num, den);
        }
        let mut acc = Rat::one();
        for _ in 0..k {
            acc = Rat::mul(&acc, &base);
        }
        acc
    }
}

/// Write a normalized factor as `Q^k` with `k` maximal among small powers.
fn perfect_power(p: Poly) -> (Poly, u32) {
    if p.len() >= 3 {
        for k in [2u32, 3, 5] {
            if let Some(r) = p.root(k) {
                let (q, j) = perfect_power(r);
                return (q, j * k);
            }
        }
    }
    (p, 1)
}

/// Replace factors that divide one another by a coarser common basis.
fn refine(mut den: Vec<(Poly, u32)>) -> Vec<(Poly, u32)> {
    fn push(den: &mut Vec<(Poly, u32)>, f: Poly, k: u32) {
        match den.iter_mut().find(|(g, _)| *g == f) {
            Some(e) => e.1 += k,
            None => den.push((f, k)),
        }
    }
    'again: loop {
        for i in 0..den.len() {
            for j in 0..den.len() {
                if i == j || den[i].0.len() > den[j].0.len() {
                    continue;
                }
                if let Some(h) = den[j].0.div_exact(&den[i].0) {
                    let f = den[i].0.clone();
                    let (_, k) = den.remove(j);
                    push(&mut den, f, k);
                    if h.len() > 1 {
                        push(&mut den, h, k);
                    }
                    continue 'again;
                }
            }
        }
        break;
    }
    den.sort();
    den
}

fn cancel_against(num: &Poly, den: &[(Poly, u32)]) -> (Poly, Vec<(Poly, u32)>) {
    let mut num = num.clone();
    let mut out = Vec::with_capacity(den.len());
    for (f, k) in den {
        let mut k = *k;
        while k > 0 {
            match num.div_exact(f) {
                Some(q) => {
                    num = q;
                    k -= 1;
                }
                None => break,
            }
        }
        if k > 0 {
            out.push((f.clone(), k));
        }
    }
    (num, out)
}

/// `c^r` for a positive rational `c`, as an expression.
fn coeff_pow(c: &Coeff, r: Exp) -> Expr {
    if r.is_integer() {
        return Expr::rational(pow_coeff(c, r.to_integer()));
    }
    if c.is_negative() {
        if r.denom() % 2 == 1 {
            let mag = coeff_pow(&-c, r);
            return if r.numer() % 2 == 0 { mag } else { -mag };
        }
        // Outside the real domain; keep as an opaque power.
        return Expr::from_mono(Mono::single(Atom::Pow(Expr::rational(c.clone())), r));
    }
    if c.is_one() {
        return Expr::one();
    }
    let q = *r.denom() as u32;
    let exact = |n: &BigInt| {
        let root = num_integer::Roots::nth_root(n, q);
        (num_traits::pow(root.clone(), q as usize) == *n).then_some(root)
    };
    if let (Some(a), Some(b)) = (exact(c.numer()), exact(c.denom())) {
        let base = Coeff::new(a, b);
        return Expr::rational(pow_coeff(&base, *r.numer()));
    }
    Expr::from_mono(Mono::single(Atom::Pow(Expr::rational(c.clone())), r))
}

fn pow_coeff(c: &Coeff, n: i64) -> Coeff {
    let base = if n < 0 { c.recip() } else { c.clone() };
    num_traits::pow(base, n.unsigned_abs() as usize)
}

/// `P^r` for a polynomial `P` and non-integer `r`.
fn poly_pow_frac(p: &Poly, r: Exp) -> Expr {
    let (c, m, q) = p.content_split();
    let mut out = coeff_pow(&c, r).mul(&Expr::from_mono(m.pow(r)));
    if q.len() > 1 {
        let base = Expr(Arc::new(Rat { num: q, den: vec![] }));
        out = out.mul(&Expr::from_mono(Mono::single(Atom::Pow(base), r)));
    }
    out
}

impl Expr {
    fn wrap(r: Rat) -> Expr {
        Expr(Arc::new(r))
    }

    pub fn zero() -> Expr {
        Expr::wrap(Rat::zero())
    }

    pub fn one() -> Expr {
        Expr::wrap(Rat::one())
    }

    pub fn int(n: i64) -> Expr {
        Expr::rational(int(n))
    }

    pub fn frac(n: i64, d: i64) -> Expr {
        Expr::rational(Coeff::new(BigInt::from(n), BigInt::from(d)))
    }

    pub fn rational(c: Coeff) -> Expr {
        Expr::wrap(Rat { num: Poly::constant(c), den: vec![] })
    }

    pub fn atom(a: Atom) -> Expr {
        Expr::from_mono(Mono::single(a, Exp::one()))
    }

    pub fn from_mono(m: Mono) -> Expr {
        Expr::wrap(Rat::build(Poly::term(m, Coeff::one()), vec![]))
    }

    pub fn from_poly(p: Poly) -> Expr {
        Expr::wrap(Rat::build(p, vec![]))
    }

    pub fn indep(i: usize) -> Expr {
        Expr::atom(Atom::Indep(i))
    }

    pub fn jet(v: JetVar) -> Expr {
        Expr::atom(Atom::Jet(v))
    }

    pub fn field(f: Field, n: usize) -> Expr {
        Expr::jet(JetVar::base(f, n))
    }

    pub fn constant(name: &str) -> Expr {
        Expr::atom(Atom::Const(Arc::from(name)))
    }

    pub fn slot(i: usize) -> Expr {
        Expr::atom(Atom::Slot(i))
    }

    pub fn numer(&self) -> &Poly {
        &self.0.num
    }

    pub fn denom(&self) -> &[(Poly, u32)] {
        &self.0.den
    }

    /// The numerator as an expression, dropping the denominator.
    pub fn numerator(&self) -> Expr {
        Expr::wrap(Rat { num: self.0.num.clone(), den: vec![] })
    }

    pub fn denominator(&self) -> Expr {
        Expr::wrap(Rat { num: expand_den(&self.0.den), den: vec![] })
    }

    pub fn is_zero(&self) -> bool {
        self.0.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_one()
    }

    pub fn is_polynomial(&self) -> bool {
        self.0.den.is_empty()
    }

    pub fn as_rational(&self) -> Option<Coeff> {
        if self.0.den.is_empty() {
            self.0.num.as_constant()
        } else {
            None
        }
    }

    pub fn as_atom(&self) -> Option<&Atom> {
        if !self.0.den.is_empty() || self.0.num.len() != 1 {
            return None;
        }
        let (m, c) = self.0.num.terms().next()?;
        match m.factors() {
            [(a, e)] if e.is_one() && c.is_one() => Some(a),
            _ => None,
        }
    }

    pub fn as_jet(&self) -> Option<&JetVar> {
        self.as_atom().and_then(Atom::as_jet)
    }

    /// Sign of the leading numerator coefficient is negative.
    pub fn looks_negative(&self) -> bool {
        self.0.num.is_negative()
    }

    /// Every atom occurring at top level (not inside kernel arguments).
    pub fn atoms(&self) -> Vec<Atom> {
        let mut v = self.0.num.atoms();
        for (f, _) in &self.0.den {
            v.extend(f.atoms());
        }
        v.sort();
        v.dedup();
        v
    }

    /// Every coordinate atom, including those inside kernel arguments.
    pub fn coordinates(&self) -> Vec<Atom> {
        let mut out = Vec::new();
        self.walk_coordinates(&mut out);
        out.sort();
        out.dedup();
        out
    }

    fn walk_coordinates(&self, out: &mut Vec<Atom>) {
        for a in self.atoms() {
            match &a {
                Atom::Exp(e) | Atom::Pow(e) | Atom::Apply(_, e) | Atom::Opaque(_, _, e) => {
                    e.walk_coordinates(out)
                }
                Atom::Unknown(_, _, args) => args.iter().for_each(|e| e.walk_coordinates(out)),
                _ => out.push(a),
            }
        }
    }

    /// Jet coordinates occurring anywhere in the expression.
    pub fn jets(&self) -> Vec<JetVar> {
        self.coordinates()
            .into_iter()
            .filter_map(|a| match a {
                Atom::Jet(v) => Some(v),
                _ => None,
            })
            .collect()
    }

    pub fn depends_on(&self, a: &Atom) -> bool {
        self.coordinates().iter().any(|b| b == a)
    }

    /// Re-normalize; a no-op on values built through the public API.
    pub fn canonicalize(&self) -> Expr {
        let den = self.0.den.clone();
        let mut e = Expr::wrap(Rat::build(self.0.num.clone(), vec![]));
        for (f, k) in den {
            let d = Expr::wrap(Rat::build(f, vec![])).pow_int(k as i64);
            e = e.div(&d).unwrap_or_else(Expr::zero);
        }
        e
    }

    pub fn add(&self, other: &Expr) -> Expr {
        Expr::wrap(Rat::add(&self.0, &other.0))
    }

    pub fn sub(&self, other: &Expr) -> Expr {
        Expr::wrap(Rat::add(&self.0, &other.0.neg()))
    }

    pub fn mul(&self, other: &Expr) -> Expr {
        Expr::wrap(Rat::mul(&self.0, &other.0))
    }

    pub fn neg(&self) -> Expr {
        Expr::wrap(self.0.neg())
    }

    pub fn scale_int(&self, k: i64) -> Expr {
        self.scale(&int(k))
    }

    pub fn scale(&self, c: &Coeff) -> Expr {
        if c.is_zero() {
            return Expr::zero();
        }
        Expr::wrap(Rat { num: self.0.num.scale(c), den: self.0.den.clone() })
    }

    pub fn inv(&self) -> Option<Expr> {
        self.0.inv().map(Expr::wrap)
    }

    /// `self / other`; `None` when `other` is zero.
    pub fn div(&self, other: &Expr) -> Option<Expr> {
        other.inv().map(|i| self.mul(&i))
    }

    pub fn pow_int(&self, n: i64) -> Expr {
        Expr::wrap(self.0.pow_int(n))
    }

    /// Real power. Fractional powers split off monomial content, taking the
    /// branch on which every atom under the root is positive.
    pub fn pow(&self, r: Exp) -> Expr {
        if r.is_integer() {
            return self.pow_int(r.to_integer());
        }
        if self.is_zero() {
            return Expr::zero();
        }
        let mut out = poly_pow_frac(&self.0.num, r);
        for (f, k) in &self.0.den {
            out = out.mul(&poly_pow_frac(f, -r * (*k as i64)));
        }
        out
    }

    pub fn sqrt(&self) -> Expr {
        self.pow(Exp::new(1, 2))
    }

    pub fn sum<I: IntoIterator<Item = Expr>>(items: I) -> Expr {
        items.into_iter().fold(Expr::zero(), |a, b| a.add(&b))
    }

    pub fn product<I: IntoIterator<Item = Expr>>(items: I) -> Expr {
        items.into_iter().fold(Expr::one(), |a, b| a.mul(&b))
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident) => {
        impl std::ops::$tr<Expr> for Expr {
            type Output = Expr;
            fn $m(self, o: Expr) -> Expr {
                Expr::$m(&self, &o)
            }
        }
        impl std::ops::$tr<&Expr> for &Expr {
            type Output = Expr;
            fn $m(self, o: &Expr) -> Expr {
                Expr::$m(self, o)
            }
        }
        impl std::ops::$tr<&Expr> for Expr {
            type Output = Expr;
            fn $m(self, o: &Expr) -> Expr {
                Expr::$m(&self, o)
            }
        }
        impl std::ops::$tr<Expr> for &Expr {
            type Output = Expr;
            fn $m(self, o: Expr) -> Expr {
                Expr::$m(self, &o)
            }
        }
    };
}

binop!(Add, add);
binop!(Sub, sub);
binop!(Mul, mul);

impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(&self)
    }
}

impl std::ops::Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(self)
    }
}

impl From<i64> for Expr {
    fn from(n: i64) -> Expr {
        Expr::int(n)
    }
}

#[cfg(test)]
mod tests;
