//! Seeded random expressions for property checks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::expr::{substitute, Atom, Expr, Instances};
use crate::space::{Field, JetVar, MultiIndex, Space};
use crate::variational::{FluxVector, LinDiffOp};

pub struct Gen {
    rng: ChaCha8Rng,
    pub space: Space,
    pub max_order: u32,
}

impl Gen {
    pub fn new(seed: u64, space: Space) -> Self {
        Gen { rng: ChaCha8Rng::seed_from_u64(seed), space, max_order: 2 }
    }

    fn index(&mut self, max: u32) -> MultiIndex {
        let n = self.space.n();
        let order = self.rng.gen_range(0..=max);
        let mut c = vec![0u32; n];
        for _ in 0..order {
            c[self.rng.gen_range(0..n)] += 1;
        }
        MultiIndex::from_counts(c)
    }

    pub fn jet(&mut self) -> Expr {
        let a = self.rng.gen_range(0..self.space.deps.len());
        let k = self.index(self.max_order);
        Expr::jet(JetVar::new(Field::Dep(a), k))
    }

    pub fn small_int(&mut self) -> Expr {
        let k = self.rng.gen_range(1..=3);
        Expr::int(if self.rng.gen_bool(0.3) { -k } else { k })
    }

    /// Coefficient depending on the independent variables only.
    pub fn coefficient(&mut self) -> Expr {
        let i = self.rng.gen_range(0..self.space.n());
        let x = Expr::indep(i);
        match self.rng.gen_range(0..4) {
            0 => self.small_int(),
            1 => x.mul(&self.small_int()),
            2 => x.pow_int(2),
            _ => x.mul(&Expr::int(self.rng.gen_range(1..=2))).exp(),
        }
    }

    /// Polynomial in the jets with independent-variable coefficients.
    pub fn poly(&mut self, terms: usize) -> Expr {
        let mut out = Expr::zero();
        for _ in 0..terms {
            let mut t = self.coefficient();
            for _ in 0..self.rng.gen_range(1..=2) {
                t = t.mul(&self.jet());
            }
            out = out.add(&t);
        }
        out
    }

    pub fn atom(&mut self) -> Expr {
        match self.rng.gen_range(0..6) {
            0 => self.small_int(),
            1 => Expr::indep(self.rng.gen_range(0..self.space.n())),
            _ => self.jet(),
        }
    }

    /// Rational functions with `exp` and `sin` kernels.
    pub fn expr(&mut self, depth: u32) -> Expr {
        if depth == 0 {
            return self.atom();
        }
        let a = self.expr(depth - 1);
        match self.rng.gen_range(0..7) {
            0 | 1 => a.add(&self.expr(depth - 1)),
            2 | 3 => a.mul(&self.expr(depth - 1)),
            4 => a.exp(),
            5 => a.sin(),
            _ => a.div(&Expr::one().add(&self.jet().pow_int(2))).expect("positive denominator"),
        }
    }

    pub fn flux(&mut self, depth: u32) -> FluxVector {
        FluxVector::new((0..self.space.n()).map(|_| self.expr(depth)).collect())
    }

    pub fn poly_flux(&mut self, terms: usize) -> FluxVector {
        FluxVector::new((0..self.space.n()).map(|_| self.poly(terms)).collect())
    }

    pub fn linop(&mut self, terms: usize) -> LinDiffOp {
        let n = self.space.n();
        let t = (0..terms)
            .map(|_| {
                let c = self.expr(1);
                (c, self.index(3))
            })
            .collect();
        LinDiffOp::new(n, t)
    }

    /// An explicit smooth function of the independent variables.
    pub fn solution(&mut self) -> Expr {
        let n = self.space.n();
        let mut phase = Expr::zero();
        for i in 0..n {
            phase = phase.add(&Expr::indep(i).mul(&Expr::frac(self.rng.gen_range(-3..=3), 2)));
        }
        let k = self.rng.gen_range(0..n);
        phase.sin().add(&Expr::indep(k).mul(&Expr::frac(self.rng.gen_range(1..=3), 4)).exp())
    }
}

/// `e` along explicit solutions, as a function of the independent variables.
pub fn along(e: &Expr, sol: &[Expr]) -> Option<Expr> {
    let bindings = e
        .jets()
        .into_iter()
        .filter_map(|v| match v.field {
            Field::Dep(a) => Some((Atom::Jet(v.clone()), sol[a].total_derivative_multi(&v.idx))),
            _ => None,
        })
        .collect();
    substitute(e, &bindings)
}

/// Evaluate an expression in the independent variables at a point.
pub fn eval_at(e: &Expr, point: &[f64]) -> Option<f64> {
    let assign = point.iter().enumerate().map(|(i, v)| (Atom::Indep(i), *v)).collect();
    e.eval(&assign, &Instances::seeded(0)).ok()
}

/// Fourth-order central difference of `f` along `xⁱ`.
pub fn central_difference(f: &Expr, point: &[f64], i: usize, h: f64) -> Option<f64> {
    let at = |d: f64| {
        let mut p = point.to_vec();
        p[i] += d;
        eval_at(f, &p)
    };
    Some((8.0 * (at(h)? - at(-h)?) - (at(2.0 * h)? - at(-2.0 * h)?)) / (12.0 * h))
}
