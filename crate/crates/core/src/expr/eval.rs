//! Numeric evaluation with outward-rounded intervals, and zero testing.

use std::collections::HashMap;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Atom, Coeff, Exp, Expr, Func, Poly};

pub type Assignment = HashMap<Atom, f64>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("no value assigned to {0}")]
    MissingAssignment(String),
    #[error("domain error: {0}")]
    DomainError(String),
}

type Custom = Arc<dyn Fn(u32, f64) -> f64 + Send + Sync>;

/// A concrete function standing in for a declared symbol.
#[derive(Clone)]
pub enum Instance {
    /// `Σ a_j exp(b_j · z)`; derivatives are exact.
    ExpSum(Vec<(f64, Vec<f64>)>),
    /// `f(k, z)` returns the k-th derivative at z.
    Custom(Custom),
}

/// Concrete functions for opaque and unknown symbols.
///
/// Symbols without an explicit instance get a seeded random sum of
/// exponentials, so derivatives stay mutually consistent.
#[derive(Clone)]
pub struct Instances {
    seed: u64,
    table: HashMap<String, Instance>,
}

impl Instances {
    pub fn seeded(seed: u64) -> Self {
        Instances { seed, table: HashMap::new() }
    }

    pub fn set(&mut self, name: &str, inst: Instance) {
        self.table.insert(name.to_string(), inst);
    }

    pub fn set_fn(&mut self, name: &str, f: impl Fn(u32, f64) -> f64 + Send + Sync + 'static) {
        self.set(name, Instance::Custom(Arc::new(f)));
    }

    fn lookup(&self, name: &str, arity: usize) -> Instance {
        if let Some(i) = self.table.get(name) {
            return i.clone();
        }
        let mut h = std::collections::hash_map::DefaultHasher::new();
        name.hash(&mut h);
        self.seed.hash(&mut h);
        let mut rng = ChaCha8Rng::seed_from_u64(h.finish());
        let terms = (0..3)
            .map(|_| {
                let a = rng.gen_range(0.5..1.5);
                let b = (0..arity).map(|_| rng.gen_range(-1.0..1.0)).collect();
                (a, b)
            })
            .collect();
        Instance::ExpSum(terms)
    }
}

/// Closed interval with outward rounding.
#[derive(Clone, Copy, Debug)]
struct Iv {
    lo: f64,
    hi: f64,
}

fn down(x: f64, n: u32) -> f64 {
    (0..n).fold(x, |v, _| v.next_down())
}

fn up(x: f64, n: u32) -> f64 {
    (0..n).fold(x, |v, _| v.next_up())
}

impl Iv {
    fn point(x: f64) -> Iv {
        Iv { lo: x, hi: x }
    }

    fn widen(lo: f64, hi: f64, ulps: u32) -> Iv {
        Iv { lo: down(lo, ulps), hi: up(hi, ulps) }
    }

    fn mid(self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    fn contains_zero(self) -> bool {
        self.lo <= 0.0 && self.hi >= 0.0
    }

    fn add(self, o: Iv) -> Iv {
        Iv::widen(self.lo + o.lo, self.hi + o.hi, 1)
    }

    fn neg(self) -> Iv {
        Iv { lo: -self.hi, hi: -self.lo }
    }

    fn mul(self, o: Iv) -> Iv {
        let c = [self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi];
        let lo = c.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = c.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        Iv::widen(lo, hi, 1)
    }

    fn recip(self) -> Result<Iv, EvalError> {
        if self.contains_zero() {
            return Err(EvalError::DomainError("division by zero".into()));
        }
        Ok(Iv::widen(1.0 / self.hi, 1.0 / self.lo, 1))
    }

    fn monotone(self, f: impl Fn(f64) -> f64, increasing: bool) -> Iv {
        let (a, b) = (f(self.lo), f(self.hi));
        if increasing {
            Iv::widen(a, b, 4)
        } else {
            Iv::widen(b, a, 4)
        }
    }

    fn exp(self) -> Iv {
        self.monotone(f64::exp, true)
    }

    fn ln(self) -> Result<Iv, EvalError> {
        if self.lo <= 0.0 {
            return Err(EvalError::DomainError("ln of a non-positive value".into()));
        }
        Ok(self.monotone(f64::ln, true))
    }

    fn lipschitz(self, f: impl Fn(f64) -> f64) -> Iv {
        let m = self.mid();
        let r = 0.5 * (self.hi - self.lo);
        let v = f(m);
        Iv::widen(v - r, v + r, 4)
    }

    fn powi(self, n: i64) -> Result<Iv, EvalError> {
        if n < 0 {
            return self.powi(-n)?.recip();
        }
        let mut acc = Iv::point(1.0);
        for _ in 0..n {
            acc = acc.mul(self);
        }
        Ok(acc)
    }

    fn powr(self, e: Exp) -> Result<Iv, EvalError> {
        if e.is_integer() {
            return self.powi(e.to_integer());
        }
        if self.lo <= 0.0 {
            if self.hi < 0.0 && e.denom() % 2 == 1 {
                let m = self.neg().powr(e)?;
                return Ok(if e.numer() % 2 == 0 { m } else { m.neg() });
            }
            return Err(EvalError::DomainError("fractional power of a non-positive value".into()));
        }
        let r = *e.numer() as f64 / *e.denom() as f64;
        Ok(self.ln()?.mul(Iv::point(r)).exp())
    }
}

fn coeff_iv(c: &Coeff) -> Iv {
    let v = c.to_f64().unwrap_or(f64::NAN);
    Iv::widen(v, v, 2)
}

struct Evaluator<'a> {
    assign: &'a Assignment,
    inst: &'a Instances,
    memo: HashMap<Atom, Iv>,
}

impl Evaluator<'_> {
    fn expr(&mut self, e: &Expr) -> Result<Iv, EvalError> {
        let mut v = self.poly(e.numer())?;
        for (f, k) in e.denom() {
            v = v.mul(self.poly(f)?.powi(*k as i64)?.recip()?);
        }
        Ok(v)
    }

    fn poly(&mut self, p: &Poly) -> Result<Iv, EvalError> {
        let mut acc = Iv::point(0.0);
        for (m, c) in p.terms() {
            acc = acc.add(self.term(m.factors(), c)?);
        }
        Ok(acc)
    }

    fn term(&mut self, factors: &[(Atom, Exp)], c: &Coeff) -> Result<Iv, EvalError> {
        let mut t = coeff_iv(c);
        for (a, e) in factors {
            t = t.mul(self.atom(a)?.powr(*e)?);
        }
        Ok(t)
    }

    fn instance(&self, name: &str, partials: &[u32], args: &[Iv]) -> Result<Iv, EvalError> {
        match self.inst.lookup(name, args.len()) {
            Instance::ExpSum(terms) => {
                let mut acc = Iv::point(0.0);
                for (a, b) in terms {
                    let mut lin = Iv::point(0.0);
                    let mut coef = a;
                    for (l, z) in args.iter().enumerate() {
                        lin = lin.add(z.mul(Iv::point(b[l])));
                        coef *= b[l].powi(partials[l] as i32);
                    }
                    acc = acc.add(Iv::widen(coef, coef, 2).mul(lin.exp()));
                }
                Ok(acc)
            }
            Instance::Custom(f) => {
                let v = f(partials[0], args[0].mid());
                if !v.is_finite() {
                    return Err(EvalError::DomainError(format!("{name} is not finite")));
                }
                let r = 1e-12 * v.abs().max(1.0);
                Ok(Iv { lo: v - r, hi: v + r })
            }
        }
    }

    fn atom(&mut self, a: &Atom) -> Result<Iv, EvalError> {
        if let Some(v) = self.memo.get(a) {
            return Ok(*v);
        }
        let v = match a {
            Atom::Indep(_) | Atom::Jet(_) | Atom::Const(_) | Atom::Slot(_) => {
                let x = self
                    .assign
                    .get(a)
                    .ok_or_else(|| EvalError::MissingAssignment(format!("{a:?}")))?;
                Iv::point(*x)
            }
            Atom::Exp(m) => self.expr(m)?.exp(),
            Atom::Pow(p) => self.expr(p)?,
            Atom::Apply(f, z) => {
                let z = self.expr(z)?;
                match f {
                    Func::Ln => z.ln()?,
                    Func::Sin => z.lipschitz(f64::sin),
                    Func::Cos => z.lipschitz(f64::cos),
                    Func::Atan => z.monotone(f64::atan, true),
                    Func::Tan => {
                        let (a, b) = (z.lo.cos(), z.hi.cos());
                        if a * b <= 0.0 || z.hi - z.lo > 1.0 {
                            return Err(EvalError::DomainError("tan near a pole".into()));
                        }
                        z.monotone(f64::tan, true)
                    }
                }
            }
            Atom::Opaque(f, k, z) => {
                let z = self.expr(z)?;
                self.instance(&f.0.name, &[*k], &[z])?
            }
            Atom::Unknown(name, partials, args) => {
                let args = args.iter().map(|x| self.expr(x)).collect::<Result<Vec<_>, _>>()?;
                self.instance(name, partials, &args)?
            }
        };
        if !(v.lo.is_finite() && v.hi.is_finite()) {
            return Err(EvalError::DomainError("non-finite value".into()));
        }
        self.memo.insert(a.clone(), v);
        Ok(v)
    }
}

impl Expr {
    pub fn eval(&self, assign: &Assignment, inst: &Instances) -> Result<f64, EvalError> {
        let mut ev = Evaluator { assign, inst, memo: HashMap::new() };
        Ok(ev.expr(self)?.mid())
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Hash)]
pub enum Verdict {
    ProvedZero,
    ProvedNonzero,
    ProbablyZero,
    Unknown,
}

impl Verdict {
    /// Zero, exactly or up to probing.
    pub fn holds(self) -> bool {
        matches!(self, Verdict::ProvedZero | Verdict::ProbablyZero)
    }

    pub fn is_exact(self) -> bool {
        matches!(self, Verdict::ProvedZero | Verdict::ProvedNonzero)
    }

    pub fn name(self) -> &'static str {
        match self {
            Verdict::ProvedZero => "ProvedZero",
            Verdict::ProvedNonzero => "ProvedNonzero",
            Verdict::ProbablyZero => "ProbablyZero",
            Verdict::Unknown => "Unknown",
        }
    }
}

/// Zero-testing policy: exact structural test, then numeric probes.
#[derive(Clone, Copy, Debug)]
pub struct ZeroTest {
    pub seed: u64,
    pub probes: usize,
    pub tol: f64,
}

impl Default for ZeroTest {
    fn default() -> Self {
        ZeroTest { seed: 0, probes: 16, tol: 1e-9 }
    }
}

fn sample(rng: &mut ChaCha8Rng, positive: bool) -> f64 {
    let m = rng.gen_range(0.1..2.0);
    if positive || rng.gen_bool(0.5) {
        m
    } else {
        -m
    }
}

impl ZeroTest {
    pub fn check(&self, e: &Expr) -> Verdict {
        if e.is_zero() {
            return Verdict::ProvedZero;
        }
        let coords = e.coordinates();
        let inst = Instances::seeded(self.seed);
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let num = e.numerator();
        let (mut tried, mut small) = (0, 0);
        for _ in 0..self.probes {
            for attempt in 0..4 {
                let assign: Assignment =
                    coords.iter().map(|a| (a.clone(), sample(&mut rng, attempt > 0))).collect();
                let mut ev = Evaluator { assign: &assign, inst: &inst, memo: HashMap::new() };
                let Ok(v) = ev.expr(&num) else { continue };
                let mut scale = 0.0;
                let mut ok = true;
                for (m, c) in num.numer().terms() {
                    match ev.term(m.factors(), c) {
                        Ok(t) => scale += t.mid().abs(),
                        Err(_) => ok = false,
                    }
                }
                if !ok {
                    continue;
                }
                tried += 1;
                if !v.contains_zero() && v.mid().abs() > self.tol * scale {
                    return Verdict::ProvedNonzero;
                }
                if v.mid().abs() <= self.tol * scale.max(f64::MIN_POSITIVE) {
                    small += 1;
                }
                break;
            }
        }
        if tried > 0 && small == tried {
            Verdict::ProbablyZero
        } else {
            Verdict::Unknown
        }
    }
}
