//! Monomials with rational exponents and sparse polynomials over them.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::{Atom, Exp};

pub type Coeff = BigRational;

/// Product of atoms with non-zero rational exponents, sorted by atom.
///
/// Ordered lexicographically by exponent vector with the smallest atom most
/// significant, which is compatible with multiplication.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct Mono(pub(crate) Vec<(Atom, Exp)>);

impl Ord for Mono {
    fn cmp(&self, other: &Self) -> Ordering {
        let (a, b) = (&self.0, &other.0);
        let (mut i, mut j) = (0, 0);
        let zero = Exp::zero();
        loop {
            let next = match (a.get(i), b.get(j)) {
                (None, None) => return Ordering::Equal,
                (Some((x, ex)), None) => {
                    i += 1;
                    let _ = x;
                    ex.cmp(&zero)
                }
                (None, Some((_, ey))) => {
                    j += 1;
                    zero.cmp(ey)
                }
                (Some((x, ex)), Some((y, ey))) => match x.cmp(y) {
                    Ordering::Equal => {
                        i += 1;
                        j += 1;
                        ex.cmp(ey)
                    }
                    Ordering::Less => {
                        i += 1;
                        ex.cmp(&zero)
                    }
                    Ordering::Greater => {
                        j += 1;
                        zero.cmp(ey)
                    }
                },
            };
            if next != Ordering::Equal {
                return next;
            }
        }
    }
}

impl PartialOrd for Mono {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Mono {
    pub fn one() -> Self {
        Mono(Vec::new())
    }

    pub fn single(a: Atom, e: Exp) -> Self {
        if e.is_zero() {
            Mono::one()
        } else {
            Mono(vec![(a, e)])
        }
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn from_factors(fs: impl IntoIterator<Item = (Atom, Exp)>) -> Self {
        fs.into_iter().fold(Mono::one(), |m, (a, e)| m.mul(&Mono::single(a, e)))
    }

    pub fn factors(&self) -> &[(Atom, Exp)] {
        &self.0
    }

    pub fn exponent(&self, a: &Atom) -> Exp {
        self.0
            .binary_search_by(|(x, _)| x.cmp(a))
            .map(|k| self.0[k].1)
            .unwrap_or_else(|_| Exp::zero())
    }

    fn merge(&self, other: &Mono, sign: i64) -> Mono {
        let (a, b) = (&self.0, &other.0);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() || j < b.len() {
            match (a.get(i), b.get(j)) {
                (Some(x), None) => {
                    out.push(x.clone());
                    i += 1;
                }
                (None, Some((y, ey))) => {
                    out.push((y.clone(), ey * sign));
                    j += 1;
                }
                (Some((x, ex)), Some((y, ey))) => match x.cmp(y) {
                    Ordering::Less => {
                        out.push((x.clone(), *ex));
                        i += 1;
                    }
                    Ordering::Greater => {
                        out.push((y.clone(), ey * sign));
                        j += 1;
                    }
                    Ordering::Equal => {
                        let e = ex + ey * sign;
                        if !e.is_zero() {
                            out.push((x.clone(), e));
                        }
                        i += 1;
                        j += 1;
                    }
                },
                (None, None) => unreachable!(),
            }
        }
        Mono(out)
    }

    pub fn mul(&self, other: &Mono) -> Mono {
        self.merge(other, 1)
    }

    pub fn div(&self, other: &Mono) -> Mono {
        self.merge(other, -1)
    }

    pub fn pow(&self, r: Exp) -> Mono {
        if r.is_zero() {
            return Mono::one();
        }
        Mono(self.0.iter().map(|(a, e)| (a.clone(), e * r)).collect())
    }

    /// Componentwise minimum of exponents, absent atoms counting as zero.
    pub fn min_with(&self, other: &Mono) -> Mono {
        let zero = Exp::zero();
        let mut out = Vec::new();
        let (a, b) = (&self.0, &other.0);
        let (mut i, mut j) = (0, 0);
        while i < a.len() || j < b.len() {
            match (a.get(i), b.get(j)) {
                (Some((x, ex)), None) => {
                    if *ex < zero {
                        out.push((x.clone(), *ex));
                    }
                    i += 1;
                }
                (None, Some((y, ey))) => {
                    if *ey < zero {
                        out.push((y.clone(), *ey));
                    }
                    j += 1;
                }
                (Some((x, ex)), Some((y, ey))) => match x.cmp(y) {
                    Ordering::Less => {
                        if *ex < zero {
                            out.push((x.clone(), *ex));
                        }
                        i += 1;
                    }
                    Ordering::Greater => {
                        if *ey < zero {
                            out.push((y.clone(), *ey));
                        }
                        j += 1;
                    }
                    Ordering::Equal => {
                        out.push((x.clone(), (*ex).min(*ey)));
                        i += 1;
                        j += 1;
                    }
                },
                (None, None) => unreachable!(),
            }
        }
        out.retain(|(_, e)| !e.is_zero());
        Mono(out)
    }

    /// Remove one power of `a`, multiplying by its exponent: `∂m/∂a = e·m/a`.
    pub fn lower(&self, a: &Atom) -> Option<(Exp, Mono)> {
        let e = self.exponent(a);
        if e.is_zero() {
            return None;
        }
        Some((e, self.div(&Mono::single(a.clone(), Exp::one()))))
    }
}

/// Sparse polynomial: monomial → non-zero rational coefficient.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct Poly(pub(crate) BTreeMap<Mono, Coeff>);

impl Poly {
    pub fn zero() -> Self {
        Poly(BTreeMap::new())
    }

    pub fn constant(c: Coeff) -> Self {
        let mut p = Poly::zero();
        p.add_term(Mono::one(), c);
        p
    }

    pub fn one() -> Self {
        Poly::constant(Coeff::one())
    }

    pub fn term(m: Mono, c: Coeff) -> Self {
        let mut p = Poly::zero();
        p.add_term(m, c);
        p
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn terms(&self) -> std::collections::btree_map::Iter<'_, Mono, Coeff> {
        self.0.iter()
    }

    pub fn as_constant(&self) -> Option<Coeff> {
        match self.0.len() {
            0 => Some(Coeff::zero()),
            1 => {
                let (m, c) = self.0.iter().next().unwrap();
                m.is_one().then(|| c.clone())
            }
            _ => None,
        }
    }

    pub fn is_one(&self) -> bool {
        self.as_constant().is_some_and(|c| c.is_one())
    }

    pub fn add_term(&mut self, m: Mono, c: Coeff) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.0.entry(m) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let (big, small) = if self.len() >= other.len() { (self, other) } else { (other, self) };
        let mut out = big.clone();
        for (m, c) in &small.0 {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> Poly {
        Poly(self.0.iter().map(|(m, c)| (m.clone(), -c)).collect())
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &other.0 {
            out.add_term(m.clone(), -c);
        }
        out
    }

    pub fn scale(&self, k: &Coeff) -> Poly {
        if k.is_zero() {
            return Poly::zero();
        }
        Poly(self.0.iter().map(|(m, c)| (m.clone(), c * k)).collect())
    }

    pub fn mul_term(&self, m: &Mono, k: &Coeff) -> Poly {
        if k.is_zero() {
            return Poly::zero();
        }
        Poly(self.0.iter().map(|(x, c)| (x.mul(m), c * k)).collect())
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (m1, c1) in &self.0 {
            for (m2, c2) in &other.0 {
                out.add_term(m1.mul(m2), c1 * c2);
            }
        }
        out
    }

    pub fn pow(&self, n: u32) -> Poly {
        let mut result = Poly::one();
        let mut base = self.clone();
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                result = result.mul(&base);
            }
            n >>= 1;
            if n > 0 {
                base = base.mul(&base);
            }
        }
        result
    }

    pub fn leading(&self) -> Option<(&Mono, &Coeff)> {
        self.0.iter().next_back()
    }

    pub fn trailing(&self) -> Option<(&Mono, &Coeff)> {
        self.0.iter().next()
    }

    /// Split into `c · m · P` with `P` having leading coefficient one and no
    /// monomial content.
    pub fn content_split(&self) -> (Coeff, Mono, Poly) {
        let Some((_, lc)) = self.leading() else {
            return (Coeff::zero(), Mono::one(), Poly::zero());
        };
        let lc = lc.clone();
        let mut iter = self.0.keys();
        let mut content = iter.next().unwrap().clone();
        for m in iter {
            content = content.min_with(m);
        }
        let inv = lc.recip();
        let p = Poly(
            self.0
                .iter()
                .map(|(m, c)| (m.div(&content), c * &inv))
                .collect(),
        );
        (lc, content, p)
    }

    /// Exact quotient `self / f`, or `None` if `f` does not divide `self`.
    pub fn div_exact(&self, f: &Poly) -> Option<Poly> {
        if f.is_zero() {
            return None;
        }
        if self.is_zero() {
            return Some(Poly::zero());
        }
        let (lf, lfc) = f.leading().map(|(m, c)| (m.clone(), c.clone()))?;
        let (tf, _) = f.trailing().map(|(m, c)| (m.clone(), c.clone()))?;
        if f.len() == 1 {
            let inv = lfc.recip();
            return Some(Poly(
                self.0.iter().map(|(m, c)| (m.div(&lf), c * &inv)).collect(),
            ));
        }
        // Every quotient exponent lies between the differences of the
        // extreme exponents of `self` and `f`.
        let mut bounds = Vec::new();
        for a in f.atoms() {
            let (lo_f, hi_f) = f.span(&a);
            let (lo_n, hi_n) = self.span(&a);
            if hi_n - lo_n < hi_f - lo_f {
                return None;
            }
            bounds.push((a, lo_n - lo_f, hi_n - hi_f));
        }
        let floor = self.trailing().unwrap().0.div(&tf);
        let mut rem = self.clone();
        let mut quo = Poly::zero();
        let limit = 64 * (self.len() + f.len()) + 256;
        for _ in 0..limit {
            let Some((lm, lc)) = rem.leading().map(|(m, c)| (m.clone(), c.clone())) else {
                return Some(quo);
            };
            let qm = lm.div(&lf);
            if qm < floor {
                return None;
            }
            for (a, lo, hi) in &bounds {
                let e = qm.exponent(a);
                if e < *lo || e > *hi {
                    return None;
                }
            }
            let qc = lc / &lfc;
            for (m, c) in &f.0 {
                rem.add_term(m.mul(&qm), -(c * &qc));
            }
            quo.add_term(qm, qc);
        }
        None
    }

    /// `R` with `R^k = self`, found term by term from the leading term.
    pub fn root(&self, k: u32) -> Option<Poly> {
        let (lm, lc) = self.leading()?;
        let (tm, tc) = self.trailing()?;
        let kk = Exp::new(1, k as i64);
        let lc_root = coeff_root(lc, k)?;
        coeff_root(tc, k)?;
        let floor = tm.pow(kk);
        let mut r = Poly::term(lm.pow(kk), lc_root);
        let denom_lm = lm.pow(kk).pow(Exp::from_integer(k as i64 - 1));
        let denom_c = r.leading().unwrap().1.pow(k as i32 - 1) * Coeff::from_integer(BigInt::from(k));
        let bounds: Vec<(Atom, Exp, Exp)> = self
            .atoms()
            .into_iter()
            .map(|a| {
                let (lo, hi) = self.span(&a);
                (a, lo * kk, hi * kk)
            })
            .collect();
        for _ in 0..(4 * self.len() + 8) {
            let resid = self.sub(&r.pow(k));
            let Some((m, c)) = resid.leading() else {
                return Some(r);
            };
            let t = m.div(&denom_lm);
            if t < floor {
                return None;
            }
            for (a, lo, hi) in &bounds {
                let e = t.exponent(a);
                if e < *lo || e > *hi {
                    return None;
                }
            }
            r.add_term(t, c / &denom_c);
        }
        None
    }

    /// Smallest and largest exponent of `a` over all terms.
    pub fn span(&self, a: &Atom) -> (Exp, Exp) {
        let mut it = self.0.keys().map(|m| m.exponent(a));
        let first = it.next().unwrap_or_else(Exp::zero);
        it.fold((first, first), |(lo, hi), e| (lo.min(e), hi.max(e)))
    }

    /// Formal derivative with respect to one atom treated as a variable.
    pub fn partial_atom(&self, a: &Atom) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.0 {
            if let Some((e, rest)) = m.lower(a) {
                out.add_term(rest, c * Coeff::new(BigInt::from(*e.numer()), BigInt::from(*e.denom())));
            }
        }
        out
    }

    pub fn atoms(&self) -> Vec<Atom> {
        let mut v: Vec<Atom> = self
            .0
            .keys()
            .flat_map(|m| m.factors().iter().map(|(a, _)| a.clone()))
            .collect();
        v.sort();
        v.dedup();
        v
    }

    /// Leading coefficient is negative.
    pub fn is_negative(&self) -> bool {
        self.leading().is_some_and(|(_, c)| c.is_negative())
    }
}

/// Exact rational `k`-th root, if one exists.
pub fn coeff_root(c: &Coeff, k: u32) -> Option<Coeff> {
    if c.is_negative() && k % 2 == 0 {
        return None;
    }
    let exact = |n: &BigInt| {
        let r = num_integer::Roots::nth_root(n, k);
        (num_traits::pow(r.clone(), k as usize) == *n).then_some(r)
    };
    Some(Coeff::new(exact(c.numer())?, exact(c.denom())?))
}

pub fn exp_to_coeff(e: Exp) -> Coeff {
    Coeff::new(BigInt::from(*e.numer()), BigInt::from(*e.denom()))
}

/// Convert a small rational coefficient into an exponent, if it fits.
pub fn coeff_to_exp(c: &Coeff) -> Option<Exp> {
    use num_traits::ToPrimitive;
    let n = c.numer().to_i64()?;
    let d = c.denom().to_i64()?;
    if n.unsigned_abs() > 1 << 40 || d > 1 << 40 {
        return None;
    }
    Some(Exp::new(n, d))
}
