use std::fmt::Write;

use super::*;
use crate::expr::Printer;
use crate::hodograph::build_map;

impl Problem {
    /// Canonical text; `parse_problem(p.print())` reproduces `p`.
    pub fn print(&self) -> String {
        let pr = Printer::new(&self.space);
        let s = &self.space;
        let mut blocks: Vec<(&str, Vec<String>)> = Vec::new();

        let mut vars = vec![format!("indep = {}", s.indep.join(", ")), format!("dep = {}", s.deps.join(", "))];
        if !s.arbs.is_empty() {
            vars.push(format!("arb = {}", s.arbs.join(", ")));
        }
        if !s.consts.is_empty() {
            vars.push(format!("const = {}", s.consts.join(", ")));
        }
        blocks.push(("vars", vars));

        blocks.push((
            "functions",
            self.functions
                .iter()
                .map(|f| match f {
                    FunctionEntry::Opaque { name, rule: None } => name.clone(),
                    FunctionEntry::Opaque { name, rule: Some(r) } => format!("{name}' = {}", pr.print(r)),
                    FunctionEntry::Unknown { name, args } => format!("{name}({})", args.join(", ")),
                })
                .collect(),
        ));

        if let Some(r) = &self.ranking {
            blocks.push(("ranking", r.criteria.iter().map(|c| criterion(s, c)).collect()));
        }

        blocks.push((
            "system",
            self.system
                .iter()
                .map(|l| {
                    let sep = if l.solved { "=" } else { ":" };
                    format!("{} {sep} {}", s.jet_name(&l.lead), pr.print(&l.expr))
                })
                .collect(),
        ));

        if let Some(l) = &self.lagrangian {
            blocks.push(("lagrangian", vec![format!("L = {}", pr.print(l))]));
        }
        blocks.push(("constraints", self.constraints.iter().map(|(n, e)| format!("{n} = {}", pr.print(e))).collect()));

        let mut claw = Vec::new();
        if let Some(e) = self.expect {
            claw.push(format!("expect = {}", if e == Expectation::Trivial { "trivial" } else { "nontrivial" }));
        }
        match &self.claw {
            Some(ClawSpec::Fluxes(f)) => claw.extend(keyed_lines(&pr, &s.indep, f)),
            Some(ClawSpec::Divergence(d)) => claw.push(format!("div = {}", pr.print(d))),
            None => {}
        }
        blocks.push(("claw", claw));

        if let Some(q) = &self.multiplier {
            blocks.push(("multiplier", keyed_lines(&pr, &s.deps, q)));
        }
        blocks.push(("lambda", self.lambda.iter().map(|(n, e)| format!("{n} = {}", pr.print(e))).collect()));

        match &self.symmetry {
            Some(SymmetrySpec::Characteristic(q)) => blocks.push(("symmetry", keyed_lines(&pr, &s.deps, q))),
            Some(SymmetrySpec::Point { xi, eta }) => {
                let xk: Vec<String> = s.indep.iter().map(|x| format!("xi_{x}")).collect();
                let ek: Vec<String> = s.deps.iter().map(|u| format!("eta_{u}")).collect();
                let mut lines: Vec<String> = xi.iter().zip(&xk).filter(|(e, _)| !e.is_zero()).map(|(e, k)| format!("{k} = {}", pr.print(e))).collect();
                lines.extend(eta.iter().zip(&ek).filter(|(e, _)| !e.is_zero()).map(|(e, k)| format!("{k} = {}", pr.print(e))));
                if lines.is_empty() {
                    lines.push(format!("{} = 0", xk[0]));
                }
                blocks.push(("symmetry", lines));
            }
            None => {}
        }

        if let Some(h) = &self.hodograph {
            let mut lines = vec![format!("swap = {} <-> {}", s.deps[h.dep], s.indep[h.indep]), format!("order = {}", h.order)];
            if let (Some(t), Ok(map)) = (&h.target, build_map(s, h.dep, h.indep, h.order)) {
                lines.extend(keyed_lines(&Printer::new(&map.new), &map.new.indep, t));
            }
            blocks.push(("hodograph", lines));
        }

        blocks.push(("checks", self.checks.iter().map(|c| check_line(s, &pr, c)).collect()));

        let mut out = String::new();
        for (name, lines) in blocks.into_iter().filter(|(_, l)| !l.is_empty()) {
            if !out.is_empty() {
                out.push('\n');
            }
            writeln!(out, "[{name}]").unwrap();
            for l in lines {
                writeln!(out, "{l}").unwrap();
            }
        }
        out
    }
}

/// Nonzero entries; an all-zero vector keeps its first entry.
fn keyed_lines(pr: &Printer, keys: &[String], vals: &[Expr]) -> Vec<String> {
    let mut lines: Vec<String> =
        keys.iter().zip(vals).filter(|(_, e)| !e.is_zero()).map(|(k, e)| format!("{k} = {}", pr.print(e))).collect();
    if lines.is_empty() && !keys.is_empty() {
        lines.push(format!("{} = 0", keys[0]));
    }
    lines
}

fn criterion(s: &Space, c: &Criterion) -> String {
    match c {
        Criterion::Weight(w) => {
            format!("weight = {}", w.iter().map(u32::to_string).collect::<Vec<_>>().join(", "))
        }
        Criterion::Fields(fs) => {
            format!("fields = {}", fs.iter().map(|f| s.field_name(*f)).collect::<Vec<_>>().join(", "))
        }
        Criterion::Order => "order".to_string(),
        Criterion::Lex(v) => format!("lex = {}", v.iter().map(|&i| s.indep[i].clone()).collect::<Vec<_>>().join(", ")),
    }
}

fn check_line(s: &Space, pr: &Printer, c: &Check) -> String {
    let head = match c.kind {
        CheckKind::Identity => format!("identity {}", c.name),
        CheckKind::Vanishes => format!("vanishes {}", c.name),
        CheckKind::Syzygy => format!("syzygy {}", c.name),
        CheckKind::Multiplier => format!("multiplier {}", c.name),
        CheckKind::FirstIntegral(i) => format!("first-integral {} @ {}", c.name, s.indep[i]),
    };
    let body: Vec<String> = c.exprs.iter().map(|e| pr.print(e)).collect();
    format!("{head} = {}", body.join("; "))
}
