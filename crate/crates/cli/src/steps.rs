//! Checks run against a parsed problem. Each returns the steps it produced.

use jetlaw::claws::{
    bridge_verify, bridge_verify_multiplier, characteristic_form, construct_c_lambda, equivalent, first_integral,
    is_trivial, solve_lambda, solve_lambda_multiplier, syzygy_ops, verify_cl, verify_multiplier, verify_syzygy,
    ConservationLaw, ConstraintSet, LambdaSolution,
};
use jetlaw::expr::Printer;
use jetlaw::hodograph::{transform_cl, transform_system};
use jetlaw::jet::{PdeSystem, Ranking};
use jetlaw::problem::{CheckKind, ClawSpec, Expectation, Problem};
use jetlaw::symmetry::{check_noether1, check_symmetry, check_variational};
use jetlaw::variational::{euler, FluxVector, LinDiffOp};
use jetlaw::{Error, Field, Verdict, ZeroTest};

use crate::report::{Outcome, Report, Step};

pub struct Job<'a> {
    pub p: &'a Problem,
    pub zt: ZeroTest,
    pub report: &'a mut Report,
}

fn err(e: Error) -> Outcome {
    Outcome::Error(e.to_string())
}

/// Shapes a check does not cover are skipped rather than failed.
fn soft(e: Error) -> Outcome {
    match e {
        Error::UnsupportedConstraintShape(_) | Error::HomotopySingular(_) | Error::ShapeMismatch(_) => {
            Outcome::Skipped(e.to_string())
        }
        e => err(e),
    }
}

impl<'a> Job<'a> {
    fn pr(&self) -> Printer<'a> {
        Printer::new(&self.p.space)
    }

    fn push(&mut self, name: &str, r: Result<Verdict, Error>) -> Option<Verdict> {
        match r {
            Ok(v) => {
                self.report.push(Step::verdict(name, v));
                Some(v)
            }
            Err(e) => {
                self.report.push(Step::new(name, err(e)));
                None
            }
        }
    }

    fn fail(&mut self, name: &str, o: Outcome) {
        self.report.push(Step::new(name, o));
    }

    pub fn system(&mut self) -> Option<PdeSystem> {
        let s = self.p.system();
        if s.is_none() {
            self.fail("system", Outcome::Error("no [system] or [lagrangian] section".into()));
        }
        s
    }

    pub fn constraints(&mut self) -> Option<ConstraintSet> {
        match self.p.constraint_set() {
            Ok(c) => Some(c),
            Err(e) => {
                self.fail("constraints", err(e));
                None
            }
        }
    }

    fn claw(&mut self) -> Option<ConservationLaw> {
        let c = self.p.conservation_law();
        if c.is_none() {
            self.fail("claw", Outcome::Error("no [claw] section".into()));
        }
        c
    }

    /// Linear syzygies named in `[checks]`, as operator rows.
    fn syzygies(&self, sys: &PdeSystem) -> Vec<Vec<LinDiffOp>> {
        self.p
            .checks
            .iter()
            .filter(|c| c.kind == CheckKind::Syzygy)
            .filter_map(|c| syzygy_ops(&c.exprs[0], sys.len(), sys.n()))
            .collect()
    }

    fn witness_law(&mut self, key: &str, cl: &ConservationLaw) {
        let pr = self.pr();
        let text = match &cl.fluxes {
            Some(f) => f.components.iter().map(|e| pr.print(e)).collect::<Vec<_>>().join("; "),
            None => format!("div {}", pr.print(cl.divergence())),
        };
        self.report.witness(key, text);
    }

    fn witness_lambda(&mut self, key: &str, lam: &LambdaSolution) {
        let pr = self.pr();
        let text = lam.components.iter().map(|e| pr.print(e)).collect::<Vec<_>>().join("; ");
        self.report.witness(key, text);
    }

    pub fn euler(&mut self) {
        let Some(l) = self.p.lagrangian.clone() else {
            self.fail("euler", Outcome::Error("no [lagrangian] section".into()));
            return;
        };
        let pr = self.pr();
        let el: Vec<_> = (0..self.p.space.deps.len()).map(|a| euler(&l, Field::Dep(a))).collect();
        for (a, e) in el.iter().enumerate() {
            self.report.witness(format!("E_{}", self.p.space.deps[a]), pr.print(e));
        }
        if self.p.system.len() == el.len() {
            let v: Vec<Verdict> = self.p.system.iter().zip(&el).map(|(s, e)| self.zt.check(&s.component().sub(e))).collect();
            self.push("euler", Ok(jetlaw::variational::combine(v)));
        } else if !self.p.system.is_empty() {
            self.fail("euler", Outcome::Error("system and Euler operator differ in length".into()));
        }
    }

    pub fn verify_cl(&mut self) {
        let (Some(sys), Some(cons), Some(cl)) = (self.system(), self.constraints(), self.claw()) else { return };
        self.push("verify-cl", verify_cl(&sys, &cl, &cons, &self.zt));
        if let Some(e) = self.p.expect {
            let syz = self.syzygies(&sys);
            match is_trivial(&sys, &cl, &cons, &syz, &self.zt) {
                Ok(v) => {
                    let o = match e {
                        Expectation::Trivial => Outcome::from_verdict(v),
                        Expectation::Nontrivial => Outcome::from_nonzero(v),
                    };
                    let name = if e == Expectation::Trivial { "trivial" } else { "nontrivial" };
                    self.report.push(Step { name: name.into(), outcome: o, verdict: Some(v) });
                }
                Err(x) => self.fail("trivial", err(x)),
            }
        }
    }

    pub fn char_form(&mut self) {
        let (Some(sys), Some(cons), Some(cl)) = (self.system(), self.constraints(), self.claw()) else { return };
        match characteristic_form(&sys, &cl, &cons) {
            Ok(q) => {
                let pr = self.pr();
                for (a, c) in q.components.iter().enumerate() {
                    self.report.witness(format!("Q{}", a + 1), pr.print(c));
                }
                self.fail("char-form", Outcome::Verified);
            }
            Err(e) => self.fail("char-form", err(e)),
        }
    }

    pub fn verify_multiplier(&mut self) {
        let Some(q) = self.p.multiplier() else {
            self.fail("verify-multiplier", Outcome::Error("no [multiplier] section".into()));
            return;
        };
        let (Some(sys), Some(cons)) = (self.system(), self.constraints()) else { return };
        self.push("verify-multiplier", verify_multiplier(&sys, &q, &cons, &self.zt));
    }

    pub fn det_eqs(&mut self) {
        let Some(q) = self.p.multiplier() else {
            self.fail("det-eqs", Outcome::Error("no [multiplier] section".into()));
            return;
        };
        let (Some(sys), Some(cons)) = (self.system(), self.constraints()) else { return };
        match jetlaw::claws::determining_equations(&sys, &q, &cons) {
            Ok(eqs) => {
                let pr = self.pr();
                for (k, e) in eqs.iter().enumerate() {
                    self.report.witness(format!("eq{}", k + 1), pr.print(e));
                }
                let v = jetlaw::variational::combine(eqs.iter().map(|e| self.zt.check(e)));
                self.push("det-eqs", Ok(v));
            }
            Err(e) => self.fail("det-eqs", err(e)),
        }
    }

    /// The λ-condition with the given `[lambda]`, and `C_λ` against the law.
    pub fn bridge(&mut self) {
        let Some(lam) = self.p.lambda_solution() else {
            self.fail("bridge", Outcome::Error("no [lambda] section".into()));
            return;
        };
        let (Some(sys), Some(cons)) = (self.system(), self.constraints()) else { return };
        if let Some(cl) = self.p.conservation_law() {
            self.push("bridge", bridge_verify(&sys, &cl, &cons, &lam, &self.zt));
        } else if let Some(q) = self.p.multiplier() {
            self.push("bridge", Ok(bridge_verify_multiplier(&sys, &q, &cons, &lam, &self.zt)));
        } else {
            self.fail("bridge", Outcome::Error("needs a [claw] or [multiplier]".into()));
        }
    }

    pub fn clambda(&mut self) {
        let (Some(sys), Some(cons)) = (self.system(), self.constraints()) else { return };
        let lam = match self.p.lambda_solution() {
            Some(l) => l,
            None => match self.solved_lambda(&sys, &cons) {
                Ok(l) => l,
                Err(o) => return self.fail("clambda", o),
            },
        };
        let c = construct_c_lambda(&cons, &lam);
        self.witness_law("C_lambda", &c);
        if let Some(cl) = self.p.conservation_law() {
            let syz = self.syzygies(&sys);
            self.push("clambda-equiv", equivalent(&sys, &cl, &c, &cons, &syz, &self.zt));
        } else {
            self.push("clambda", verify_cl(&sys, &c, &cons, &self.zt));
        }
    }

    fn solved_lambda(&self, sys: &PdeSystem, cons: &ConstraintSet) -> Result<LambdaSolution, Outcome> {
        if cons.is_empty() {
            return Err(Outcome::Skipped("no constraints".into()));
        }
        let r = match (self.p.conservation_law(), self.p.multiplier()) {
            (Some(cl), _) => solve_lambda(sys, &cl, cons),
            (None, Some(q)) => solve_lambda_multiplier(sys, &q, cons),
            _ => return Err(Outcome::Skipped("needs a [claw] or [multiplier]".into())),
        };
        r.map_err(soft)
    }

    /// Solve for λ, check it, and compare the rebuilt law with the given one.
    pub fn solve_lambda(&mut self) -> Option<LambdaSolution> {
        let (sys, cons) = (self.system()?, self.constraints()?);
        let lam = match self.solved_lambda(&sys, &cons) {
            Ok(l) => l,
            Err(o) => {
                self.fail("solve-lambda", o);
                return None;
            }
        };
        self.witness_lambda("lambda", &lam);
        let v = match self.p.conservation_law() {
            Some(cl) => bridge_verify(&sys, &cl, &cons, &lam, &self.zt),
            None => Ok(bridge_verify_multiplier(&sys, &self.p.multiplier()?, &cons, &lam, &self.zt)),
        };
        self.push("solve-lambda", v);
        let c = construct_c_lambda(&cons, &lam);
        if let Some(cl) = self.p.conservation_law() {
            let syz = self.syzygies(&sys);
            self.push("solved-clambda-equiv", equivalent(&sys, &cl, &c, &cons, &syz, &self.zt));
        }
        if let Some(given) = self.p.lambda_solution() {
            let g = construct_c_lambda(&cons, &given);
            self.push("clambda-agree", equivalent(&sys, &g, &c, &cons, &[], &self.zt));
        }
        Some(lam)
    }

    /// First integral of the law, or of `C_λ` when the law's shape does not fit.
    pub fn first_integral(&mut self, explicit: bool) {
        let Some(sys) = self.system() else { return };
        let mut candidates: Vec<ConservationLaw> = self.p.conservation_law().into_iter().collect();
        if let Some(cons) = self.p.constraint_set().ok().filter(|c| !c.is_empty()) {
            let lam = self.p.lambda_solution().map(Ok).unwrap_or_else(|| self.solved_lambda(&sys, &cons));
            if let Ok(l) = lam {
                candidates.push(construct_c_lambda(&cons, &l));
            }
        }
        let mut last = None;
        for cl in &candidates {
            match first_integral(&sys, cl, &self.zt) {
                Ok(fi) => {
                    let pr = self.pr();
                    self.report.witness("first_integral", pr.print(&fi.lambda));
                    self.report.witness("direction", self.p.space.indep[fi.direction].clone());
                    self.push("first-integral", Ok(fi.verdict));
                    return;
                }
                Err(e) => last = Some(e),
            }
        }
        let o = match last {
            Some(e) if explicit => err(e),
            Some(e) => soft(e),
            None if explicit => Outcome::Error("no law to read a first integral from".into()),
            None => return,
        };
        self.fail("first-integral", o);
    }

    pub fn symmetry(&mut self) {
        let Some(q) = self.p.characteristic() else {
            self.fail("symmetry", Outcome::Error("no [symmetry] section".into()));
            return;
        };
        let Some(sys) = self.system() else { return };
        self.push("symmetry", check_symmetry(&sys, &q, &self.zt));
    }

    pub fn variational(&mut self) {
        let (Some(q), Some(l)) = (self.p.characteristic(), self.p.lagrangian.clone()) else {
            self.fail("variational", Outcome::Error("needs [symmetry] and [lagrangian]".into()));
            return;
        };
        self.push("variational", Ok(check_variational(&self.p.space, &l, &q, &self.zt)));
    }

    pub fn noether(&mut self) {
        let (Some(q), Some(l)) = (self.p.characteristic(), self.p.lagrangian.clone()) else {
            self.fail("noether", Outcome::Error("needs [symmetry] and [lagrangian]".into()));
            return;
        };
        let Some(sys) = self.system() else { return };
        match check_noether1(&sys, &l, &q, &self.zt) {
            Ok(n) => {
                self.report.witness("noether.variational", n.variational.name());
                self.report.witness("noether.multiplier", n.multiplier.name());
                let o = if !n.agree() {
                    Outcome::Refuted
                } else {
                    crate::report::combine(&[Outcome::from_verdict(n.variational), Outcome::from_verdict(n.multiplier)])
                };
                self.fail("noether", o);
            }
            Err(e) => self.fail("noether", err(e)),
        }
    }

    pub fn hodograph(&mut self) {
        let Some(map) = self.p.hodograph_map() else {
            self.fail("hodograph", Outcome::Error("no [hodograph] section".into()));
            return;
        };
        let map = match map {
            Ok(m) => m,
            Err(e) => return self.fail("hodograph", err(e)),
        };
        let Some(sys) = self.system() else { return };
        for c in map.side_conditions() {
            self.report.witness("assume", c);
        }
        let new_sys = match transform_system(&map, &sys, Ranking::graded_lex(&map.new)) {
            Ok(s) => s,
            Err(e) => return self.fail("hodograph", err(e)),
        };
        let npr = Printer::new(&map.new);
        for (k, eq) in new_sys.equations.iter().enumerate() {
            self.report.witness(format!("A{}", k + 1), format!("{} : {}", map.new.jet_name(&eq.lead), npr.print(&eq.component)));
        }
        let Some(cl) = self.p.conservation_law() else {
            return self.fail("hodograph", Outcome::Verified);
        };
        let t = match transform_cl(&map, &cl) {
            Ok(t) => t,
            Err(e) => return self.fail("hodograph", err(e)),
        };
        let none = ConstraintSet::none(&map.new);
        if let Some(f) = &t.fluxes {
            let text = f.components.iter().map(|e| npr.print(e)).collect::<Vec<_>>().join("; ");
            self.report.witness("flux", text);
        }
        self.push("hodograph-verify-cl", verify_cl(&new_sys, &t, &none, &self.zt));
        if let Some(target) = self.p.hodograph.as_ref().and_then(|h| h.target.clone()) {
            let target = ConservationLaw::from_fluxes(FluxVector::new(target));
            self.push("hodograph-target", equivalent(&new_sys, &t, &target, &none, &[], &self.zt));
        }
    }

    pub fn syzygy(&mut self, explicit: bool) {
        let rels: Vec<_> = self.p.checks.iter().filter(|c| c.kind == CheckKind::Syzygy).cloned().collect();
        if rels.is_empty() {
            if explicit {
                self.fail("syzygy", Outcome::Error("no syzygy entries in [checks]".into()));
            }
            return;
        }
        let Some(sys) = self.system() else { return };
        for c in rels {
            self.push(&format!("syzygy.{}", c.name), verify_syzygy(&sys, &c.exprs[0], &self.zt));
        }
    }

    /// Every `[checks]` entry other than syzygies.
    pub fn checks(&mut self) {
        let checks: Vec<_> = self.p.checks.iter().filter(|c| c.kind != CheckKind::Syzygy).cloned().collect();
        if checks.is_empty() {
            return;
        }
        let (Some(sys), Some(cons)) = (self.system(), self.constraints()) else { return };
        for c in checks {
            let name = format!("check.{}", c.name);
            let e = match sys.expand_aux(&c.exprs[0]) {
                Ok(e) => e,
                Err(x) => {
                    self.fail(&name, err(x));
                    continue;
                }
            };
            let e = &e;
            let v = match c.kind {
                CheckKind::Identity => Ok(self.zt.check(e)),
                CheckKind::Vanishes => sys.restricted_is_zero(e, &self.zt),
                CheckKind::FirstIntegral(i) => sys.restricted_is_zero(&e.total_derivative(i), &self.zt),
                CheckKind::Multiplier => {
                    let q = jetlaw::claws::Multiplier::new(c.exprs.clone());
                    verify_multiplier(&sys, &q, &cons, &self.zt)
                }
                CheckKind::Syzygy => unreachable!(),
            };
            self.push(&name, v);
        }
    }

    /// Everything the file supports, in a fixed order.
    pub fn all(&mut self) {
        let p = self.p;
        if p.lagrangian.is_some() && !p.system.is_empty() {
            self.euler();
        }
        if self.system().is_none() {
            return;
        }
        if matches!(p.claw, Some(ClawSpec::Fluxes(_)) | Some(ClawSpec::Divergence(_))) {
            self.verify_cl();
        }
        if p.multiplier.is_some() {
            self.verify_multiplier();
        }
        if !p.lambda.is_empty() {
            self.bridge();
            if p.claw.is_some() {
                self.clambda();
            }
        }
        if !p.constraints.is_empty() {
            self.solve_lambda();
        }
        self.first_integral(false);
        if p.symmetry.is_some() {
            self.symmetry();
            if p.lagrangian.is_some() {
                self.variational();
                self.noether();
            }
        }
        if p.hodograph.is_some() {
            self.hodograph();
        }
        self.syzygy(false);
        self.checks();
    }
}
