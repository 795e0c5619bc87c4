//! Jet coordinates and the symbol table that names them.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::expr::OpaqueFn;

/// Per-variable derivative counts `(j¹,…,jᴺ)`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn zero(n: usize) -> Self {
        MultiIndex(vec![0; n])
    }

    pub fn unit(n: usize, i: usize) -> Self {
        let mut v = vec![0; n];
        v[i] = 1;
        MultiIndex(v)
    }

    pub fn from_counts(counts: Vec<u32>) -> Self {
        MultiIndex(counts)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn counts(&self) -> &[u32] {
        &self.0
    }

    pub fn get(&self, i: usize) -> u32 {
        self.0[i]
    }

    /// Total order `|J|`.
    pub fn order(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&j| j == 0)
    }

    pub fn bump(&self, i: usize) -> Self {
        let mut v = self.0.clone();
        v[i] += 1;
        MultiIndex(v)
    }

    pub fn add(&self, other: &MultiIndex) -> Self {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// `self − other`, if every entry stays non-negative.
    pub fn checked_sub(&self, other: &MultiIndex) -> Option<Self> {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a.checked_sub(*b))
            .collect::<Option<Vec<_>>>()
            .map(MultiIndex)
    }

    /// Componentwise `self ≤ other`.
    pub fn divides(&self, other: &MultiIndex) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    /// The derivative directions of `D_J`, one entry per single derivative.
    pub fn steps(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.order() as usize);
        for (i, &j) in self.0.iter().enumerate() {
            for _ in 0..j {
                out.push(i);
            }
        }
        out
    }

    /// Every `K` with `K ≤ self` componentwise.
    pub fn sub_indices(&self) -> Vec<MultiIndex> {
        let mut out = vec![MultiIndex(Vec::new())];
        for &j in &self.0 {
            let mut next = Vec::with_capacity(out.len() * (j as usize + 1));
            for prefix in &out {
                for k in 0..=j {
                    let mut p = prefix.0.clone();
                    p.push(k);
                    next.push(MultiIndex(p));
                }
            }
            out = next;
        }
        out
    }

    /// Product of binomial coefficients `∏ C(self_i, k_i)`.
    pub fn binomial(&self, k: &MultiIndex) -> u64 {
        self.0
            .iter()
            .zip(&k.0)
            .map(|(&n, &r)| binom(n as u64, r as u64))
            .product()
    }
}

fn binom(n: u64, r: u64) -> u64 {
    if r > n {
        return 0;
    }
    let r = r.min(n - r);
    (0..r).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// Which family a jet coordinate belongs to.
///
/// `Aux(µ)` stands for the system component `A_µ` itself; `D_K` of it is the
/// coordinate `D_K A_µ` used when rewriting expressions as functions of `[A]`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Field {
    Dep(usize),
    Arb(usize),
    Aux(usize),
}

/// A jet coordinate `u^α_J` (or `D_J g^r`, or `D_J A_µ`).
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct JetVar {
    pub field: Field,
    pub idx: MultiIndex,
}

impl JetVar {
    pub fn new(field: Field, idx: MultiIndex) -> Self {
        JetVar { field, idx }
    }

    pub fn base(field: Field, n: usize) -> Self {
        JetVar { field, idx: MultiIndex::zero(n) }
    }

    pub fn bump(&self, i: usize) -> Self {
        JetVar { field: self.field, idx: self.idx.bump(i) }
    }

    pub fn shift(&self, k: &MultiIndex) -> Self {
        JetVar { field: self.field, idx: self.idx.add(k) }
    }

    pub fn order(&self) -> u32 {
        self.idx.order()
    }
}

/// How a declared function symbol behaves.
#[derive(Clone, Debug)]
pub enum FunctionDecl {
    /// Unary function with an optional derivative rule.
    Opaque(Arc<OpaqueFn>),
    /// Unknown function of several arguments, differentiated by partials.
    Unknown { arity: usize },
}

/// Names for every coordinate family, constants and function symbols.
#[derive(Clone, Debug, Default)]
pub struct Space {
    pub indep: Vec<String>,
    pub deps: Vec<String>,
    pub arbs: Vec<String>,
    pub consts: Vec<String>,
    pub functions: BTreeMap<String, FunctionDecl>,
    /// Number of system components; `A1..Am` are valid names when non-zero.
    pub components: usize,
}

impl Space {
    pub fn new<S: AsRef<str>>(indep: &[S], deps: &[S]) -> Self {
        Space {
            indep: indep.iter().map(|s| s.as_ref().to_string()).collect(),
            deps: deps.iter().map(|s| s.as_ref().to_string()).collect(),
            ..Space::default()
        }
    }

    pub fn with_arbs<S: AsRef<str>>(mut self, arbs: &[S]) -> Self {
        self.arbs = arbs.iter().map(|s| s.as_ref().to_string()).collect();
        self
    }

    pub fn with_consts<S: AsRef<str>>(mut self, consts: &[S]) -> Self {
        self.consts = consts.iter().map(|s| s.as_ref().to_string()).collect();
        self
    }

    pub fn n(&self) -> usize {
        self.indep.len()
    }

    pub fn indep_index(&self, name: &str) -> Option<usize> {
        self.indep.iter().position(|s| s == name)
    }

    pub fn dep_index(&self, name: &str) -> Option<usize> {
        self.deps.iter().position(|s| s == name)
    }

    pub fn arb_index(&self, name: &str) -> Option<usize> {
        self.arbs.iter().position(|s| s == name)
    }

    /// Resolve a field name (`u`, `g1`, `A2`).
    pub fn field(&self, name: &str) -> Option<Field> {
        if let Some(i) = self.dep_index(name) {
            return Some(Field::Dep(i));
        }
        if let Some(i) = self.arb_index(name) {
            return Some(Field::Arb(i));
        }
        let k = name.strip_prefix('A')?.parse::<usize>().ok()?;
        (k >= 1 && k <= self.components).then_some(Field::Aux(k - 1))
    }

    pub fn field_name(&self, f: Field) -> String {
        match f {
            Field::Dep(i) => self.deps[i].clone(),
            Field::Arb(i) => self.arbs[i].clone(),
            Field::Aux(i) => format!("A{}", i + 1),
        }
    }

    /// All dependent and arbitrary-function fields.
    pub fn all_fields(&self) -> Vec<Field> {
        (0..self.deps.len())
            .map(Field::Dep)
            .chain((0..self.arbs.len()).map(Field::Arb))
            .collect()
    }

    pub fn dep_fields(&self) -> Vec<Field> {
        (0..self.deps.len()).map(Field::Dep).collect()
    }

    /// Suffix letters for a multi-index, in declaration order of the variables.
    pub fn suffix(&self, idx: &MultiIndex) -> String {
        let mut s = String::new();
        for (i, name) in self.indep.iter().enumerate() {
            for _ in 0..idx.get(i) {
                s.push_str(name);
            }
        }
        s
    }

    /// Parse a suffix such as `xxt` into a multi-index.
    pub fn parse_suffix(&self, suffix: &str) -> Option<MultiIndex> {
        let mut counts = vec![0u32; self.n()];
        for ch in suffix.chars() {
            let i = self.indep.iter().position(|s| s.len() == 1 && s.starts_with(ch))?;
            counts[i] += 1;
        }
        Some(MultiIndex(counts))
    }

    pub fn jet_name(&self, v: &JetVar) -> String {
        let base = self.field_name(v.field);
        if v.idx.is_zero() {
            base
        } else {
            format!("{}_{}", base, self.suffix(&v.idx))
        }
    }

    pub fn opaque(&self, name: &str) -> Option<&Arc<OpaqueFn>> {
        match self.functions.get(name) {
            Some(FunctionDecl::Opaque(f)) => Some(f),
            _ => None,
        }
    }

    pub fn declare_opaque(&mut self, f: OpaqueFn) -> Arc<OpaqueFn> {
        let f = Arc::new(f);
        self.functions.insert(f.name.clone(), FunctionDecl::Opaque(f.clone()));
        f
    }

    pub fn declare_unknown(&mut self, name: &str, arity: usize) {
        self.functions.insert(name.to_string(), FunctionDecl::Unknown { arity });
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|j| j.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn multi_index_arithmetic() {
        let j = MultiIndex::from_counts(vec![2, 1]);
        let k = MultiIndex::from_counts(vec![1, 1]);
        assert_eq!(j.add(&k).checked_sub(&k), Some(j.clone()));
        assert_eq!(j.order(), 3);
        assert!(k.divides(&j));
        assert_eq!(k.checked_sub(&j), None);
        assert_eq!(j.sub_indices().len(), 6);
        assert_eq!(j.binomial(&k), 2);
        assert_eq!(j.steps(), vec![0, 0, 1]);
    }

    #[test]
    fn suffix_round_trip() {
        let s = Space::new(&["x", "t"], &["u"]);
        let j = s.parse_suffix("xtx").unwrap();
        assert_eq!(j.counts(), &[2, 1]);
        assert_eq!(s.suffix(&j), "xxt");
        assert_eq!(s.parse_suffix("y"), None);
    }
}
