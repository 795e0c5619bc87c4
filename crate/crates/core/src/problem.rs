//! The `.clw` problem format.
//!
//! ```text
//! # comment
//! [vars]
//! indep = x, t
//! dep = u, v
//! arb = g
//!
//! [system]
//! u_xt = exp(2*u - v)          # solved form: lead = rhs
//! v_xt : v_xt - exp(2*v - u)   # component form: lead : component
//! ```
//!
//! Sections may appear in any order; each at most once.

use std::collections::HashMap;

use crate::claws::{ConservationLaw, ConstraintSet, LambdaSolution, Multiplier};
use crate::error::Result as CoreResult;
use crate::expr::{parse_expr, Expr, OpaqueFn, ParseError};
use crate::hodograph::{build_map, HodographMap, DEFAULT_ORDER};
use crate::jet::{Criterion, PdeSystem, Ranking};
use crate::space::{Field, JetVar, Space};
use crate::symmetry::{characteristic_from_point, euler_lagrange_system, Characteristic};
use crate::variational::FluxVector;

mod print;

pub const SECTIONS: [&str; 12] = [
    "vars",
    "functions",
    "ranking",
    "system",
    "lagrangian",
    "constraints",
    "claw",
    "multiplier",
    "lambda",
    "symmetry",
    "hodograph",
    "checks",
];

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ProblemError {
    #[error("missing [vars] section")]
    MissingVars,
    #[error("line {line}: unknown section [{name}]")]
    UnknownSection { line: usize, name: String },
    #[error("line {line}: section [{name}] appears twice")]
    DuplicateSection { line: usize, name: String },
    #[error("line {line}, column {col}: undeclared symbol `{name}`")]
    UndeclaredSymbol { line: usize, col: usize, name: String },
    #[error("line {line}, column {col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
}

#[derive(Clone, Debug, PartialEq)]
pub enum FunctionEntry {
    Opaque { name: String, rule: Option<Expr> },
    Unknown { name: String, args: Vec<String> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct SystemLine {
    pub lead: JetVar,
    pub expr: Expr,
    /// `lead = rhs` rather than `lead : component`.
    pub solved: bool,
}

impl SystemLine {
    pub fn component(&self) -> Expr {
        if self.solved {
            Expr::jet(self.lead.clone()).sub(&self.expr)
        } else {
            self.expr.clone()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Expectation {
    Trivial,
    Nontrivial,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ClawSpec {
    Fluxes(Vec<Expr>),
    Divergence(Expr),
}

#[derive(Clone, Debug, PartialEq)]
pub enum SymmetrySpec {
    Characteristic(Vec<Expr>),
    Point { xi: Vec<Expr>, eta: Vec<Expr> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct HodographSpec {
    pub dep: usize,
    pub indep: usize,
    pub order: u32,
    /// Expected fluxes in the new variables, if given.
    pub target: Option<Vec<Expr>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CheckKind {
    /// Zero as an expression.
    Identity,
    /// Zero on solutions.
    Vanishes,
    /// A relation among `A1, A2, …` that expands to zero.
    Syzygy,
    /// `D_i` of the expression vanishes on solutions.
    FirstIntegral(usize),
    /// `;`-separated multiplier components.
    Multiplier,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub kind: CheckKind,
    pub name: String,
    pub exprs: Vec<Expr>,
}

#[derive(Clone, Debug)]
pub struct Problem {
    pub space: Space,
    pub functions: Vec<FunctionEntry>,
    pub ranking: Option<Ranking>,
    pub system: Vec<SystemLine>,
    pub lagrangian: Option<Expr>,
    pub constraints: Vec<(String, Expr)>,
    pub claw: Option<ClawSpec>,
    pub expect: Option<Expectation>,
    pub multiplier: Option<Vec<Expr>>,
    pub lambda: Vec<(String, Expr)>,
    pub symmetry: Option<SymmetrySpec>,
    pub hodograph: Option<HodographSpec>,
    pub checks: Vec<Check>,
}

type Lines = Vec<(usize, String)>;

fn syntax(line: usize, col: usize, msg: impl Into<String>) -> ProblemError {
    ProblemError::Syntax { line, col, msg: msg.into() }
}

/// `key = value`, with the 1-based column of the value.
fn key_value(line: usize, text: &str) -> Result<(String, String, usize), ProblemError> {
    let eq = text.find('=').ok_or_else(|| syntax(line, 1, "expected `name = value`"))?;
    let key = text[..eq].trim();
    if key.is_empty() {
        return Err(syntax(line, 1, "missing name before `=`"));
    }
    let rest = &text[eq + 1..];
    let lead_ws = rest.len() - rest.trim_start().len();
    Ok((key.to_string(), rest.trim().to_string(), eq + 2 + lead_ws))
}

fn names(list: &str) -> Vec<String> {
    list.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect()
}

struct Ctx<'a> {
    space: &'a Space,
    locals: HashMap<String, Expr>,
}

impl Ctx<'_> {
    fn expr(&self, line: usize, col: usize, src: &str) -> Result<Expr, ProblemError> {
        parse_expr(src, self.space, &self.locals).map_err(|e| match e {
            ParseError::Syntax { col: c, msg } => syntax(line, col + c - 1, msg),
            ParseError::UndeclaredSymbol(name) => {
                let at = find_token(src, &name).unwrap_or(0);
                ProblemError::UndeclaredSymbol { line, col: col + at, name }
            }
        })
    }

    fn jet(&self, line: usize, col: usize, src: &str) -> Result<JetVar, ProblemError> {
        let e = self.expr(line, col, src)?;
        e.as_jet().cloned().ok_or_else(|| syntax(line, col, format!("`{src}` is not a jet variable")))
    }
}

/// Byte offset of `name` as a whole token.
fn find_token(src: &str, name: &str) -> Option<usize> {
    let is_word = |c: char| c.is_alphanumeric() || c == '_' || c == '\'' || c == '$';
    src.match_indices(name).map(|(i, _)| i).find(|&i| {
        let before = src[..i].chars().next_back().is_none_or(|c| !is_word(c));
        let after = src[i + name.len()..].chars().next().is_none_or(|c| !is_word(c));
        before && after
    })
}

fn split_sections(text: &str) -> Result<HashMap<String, (usize, Lines)>, ProblemError> {
    let mut out: HashMap<String, (usize, Lines)> = HashMap::new();
    let mut current: Option<String> = None;
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let body = raw.split('#').next().unwrap_or("").trim_end();
        if body.trim().is_empty() {
            continue;
        }
        let t = body.trim();
        if let Some(name) = t.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            let name = name.trim().to_string();
            if !SECTIONS.contains(&name.as_str()) {
                return Err(ProblemError::UnknownSection { line, name });
            }
            if out.contains_key(&name) {
                return Err(ProblemError::DuplicateSection { line, name });
            }
            out.insert(name.clone(), (line, Vec::new()));
            current = Some(name);
            continue;
        }
        let Some(sec) = &current else {
            return Err(syntax(line, 1, "content before the first section header"));
        };
        out.get_mut(sec).unwrap().1.push((line, body.to_string()));
    }
    Ok(out)
}

pub fn parse_problem(text: &str) -> Result<Problem, ProblemError> {
    let mut secs = split_sections(text)?;
    let mut take = |name: &str| secs.remove(name).map(|(_, l)| l).unwrap_or_default();
    let vars = take("vars");
    if vars.is_empty() {
        return Err(ProblemError::MissingVars);
    }
    let mut space = parse_vars(&vars)?;
    let functions = parse_functions(&mut space, &take("functions"))?;
    let ranking_lines = take("ranking");
    let ranking = if ranking_lines.is_empty() { None } else { Some(parse_ranking(&space, &ranking_lines)?) };

    let system = {
        let cx = Ctx { space: &space, locals: HashMap::new() };
        take("system").iter().map(|(l, t)| parse_system_line(&cx, *l, t)).collect::<Result<Vec<_>, _>>()?
    };
    space.components = system.len();

    let mut p = Problem {
        space: space.clone(),
        functions,
        ranking,
        system,
        lagrangian: None,
        constraints: Vec::new(),
        claw: None,
        expect: None,
        multiplier: None,
        lambda: Vec::new(),
        symmetry: None,
        hodograph: None,
        checks: Vec::new(),
    };
    let mut cx = Ctx { space: &space, locals: HashMap::new() };

    for (l, t) in take("lagrangian") {
        let (k, v, c) = key_value(l, &t)?;
        if k != "L" || p.lagrangian.is_some() {
            return Err(syntax(l, 1, "expected a single `L = expr`"));
        }
        p.lagrangian = Some(cx.expr(l, c, &v)?);
    }
    for (l, t) in take("constraints") {
        let (k, v, c) = key_value(l, &t)?;
        p.constraints.push((k, cx.expr(l, c, &v)?));
    }
    parse_claw(&cx, &mut p, &take("claw"))?;
    let mult = take("multiplier");
    if !mult.is_empty() {
        p.multiplier = Some(keyed(&cx, &mult, &space.deps, "dependent variable")?);
    }
    for (l, t) in take("lambda") {
        let (k, v, c) = key_value(l, &t)?;
        if !p.constraints.iter().any(|(n, _)| *n == k) {
            return Err(syntax(l, 1, format!("`{k}` does not name a constraint")));
        }
        let e = cx.expr(l, c, &v)?;
        cx.locals.insert(k.clone(), e.clone());
        p.lambda.push((k, e));
    }
    parse_symmetry(&cx, &mut p, &take("symmetry"))?;
    parse_hodograph(&space, &mut p, &take("hodograph"))?;
    for (l, t) in take("checks") {
        let ch = parse_check(&cx, l, &t)?;
        if ch.exprs.len() == 1 {
            cx.locals.insert(ch.name.clone(), ch.exprs[0].clone());
        }
        p.checks.push(ch);
    }
    Ok(p)
}

fn parse_vars(lines: &Lines) -> Result<Space, ProblemError> {
    let (mut indep, mut deps, mut arbs, mut consts) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for (l, t) in lines {
        let (k, v, _) = key_value(*l, t)?;
        let slot = match k.as_str() {
            "indep" => &mut indep,
            "dep" => &mut deps,
            "arb" => &mut arbs,
            "const" => &mut consts,
            _ => return Err(syntax(*l, 1, format!("unknown key `{k}` in [vars]"))),
        };
        slot.extend(names(&v));
    }
    if indep.is_empty() {
        return Err(ProblemError::MissingVars);
    }
    Ok(Space::new(&indep, &deps).with_arbs(&arbs).with_consts(&consts))
}

fn parse_functions(space: &mut Space, lines: &Lines) -> Result<Vec<FunctionEntry>, ProblemError> {
    let mut out = Vec::new();
    for (l, t) in lines {
        let t = t.trim();
        if let Some((head, _)) = t.split_once('=') {
            let (_, v, c) = key_value(*l, t)?;
            let name = head.trim().strip_suffix('\'').map(str::trim).ok_or_else(|| {
                syntax(*l, 1, "a derivative rule is written `f' = expr`")
            })?;
            let rule = Ctx { space, locals: HashMap::new() }.expr(*l, c, &v)?;
            space.declare_opaque(OpaqueFn::with_rule(name, rule.clone()));
            out.push(FunctionEntry::Opaque { name: name.to_string(), rule: Some(rule) });
        } else if let Some((name, rest)) = t.split_once('(') {
            let args = names(rest.trim_end_matches(')'));
            space.declare_unknown(name.trim(), args.len());
            out.push(FunctionEntry::Unknown { name: name.trim().to_string(), args });
        } else {
            space.declare_opaque(OpaqueFn::new(t));
            out.push(FunctionEntry::Opaque { name: t.to_string(), rule: None });
        }
    }
    Ok(out)
}

fn parse_ranking(space: &Space, lines: &Lines) -> Result<Ranking, ProblemError> {
    let mut crit = Vec::new();
    for (l, t) in lines {
        let t = t.trim();
        match t {
            "grlex" => crit.extend(Ranking::graded_lex(space).criteria),
            "order" => crit.push(Criterion::Order),
            _ => {
                let (k, v, _) = key_value(*l, t)?;
                let list = names(&v);
                let c = match k.as_str() {
                    "weight" => Criterion::Weight(
                        list.iter()
                            .map(|w| w.parse().map_err(|_| syntax(*l, 1, format!("bad weight `{w}`"))))
                            .collect::<Result<_, _>>()?,
                    ),
                    "fields" => Criterion::Fields(
                        list.iter()
                            .map(|f| space.field(f).ok_or_else(|| undeclared(*l, t, f)))
                            .collect::<Result<_, _>>()?,
                    ),
                    "lex" => Criterion::Lex(
                        list.iter()
                            .map(|x| space.indep_index(x).ok_or_else(|| undeclared(*l, t, x)))
                            .collect::<Result<_, _>>()?,
                    ),
                    _ => return Err(syntax(*l, 1, format!("unknown ranking criterion `{k}`"))),
                };
                crit.push(c);
            }
        }
    }
    Ok(Ranking::new(crit))
}

/// A ranking from `;`-separated `[ranking]` lines, e.g. `weight = 0, 1; order`.
pub fn ranking_from_spec(space: &Space, spec: &str) -> Result<Ranking, ProblemError> {
    let lines: Lines = spec.split(';').map(str::trim).filter(|t| !t.is_empty()).map(|t| (1, t.to_string())).collect();
    parse_ranking(space, &lines)
}

fn undeclared(line: usize, text: &str, name: &str) -> ProblemError {
    let col = find_token(text, name).map_or(1, |i| i + 1);
    ProblemError::UndeclaredSymbol { line, col, name: name.to_string() }
}

fn parse_system_line(cx: &Ctx, l: usize, t: &str) -> Result<SystemLine, ProblemError> {
    let (pos, solved) = match (t.find('='), t.find(':')) {
        (Some(e), Some(c)) if c < e => (c, false),
        (Some(e), _) => (e, true),
        (None, Some(c)) => (c, false),
        (None, None) => return Err(syntax(l, 1, "expected `lead = rhs` or `lead : component`")),
    };
    let lead_src = t[..pos].trim();
    let lead = cx.jet(l, 1 + t.find(lead_src).unwrap_or(0), lead_src)?;
    let rest = &t[pos + 1..];
    let col = pos + 2 + (rest.len() - rest.trim_start().len());
    Ok(SystemLine { lead, expr: cx.expr(l, col, rest.trim())?, solved })
}

/// Entries keyed by names from `keys`; missing ones are zero.
fn keyed(cx: &Ctx, lines: &Lines, keys: &[String], what: &str) -> Result<Vec<Expr>, ProblemError> {
    let mut out = vec![Expr::zero(); keys.len()];
    for (l, t) in lines {
        let (k, v, c) = key_value(*l, t)?;
        let i = keys.iter().position(|n| *n == k).ok_or_else(|| syntax(*l, 1, format!("`{k}` is not a {what}")))?;
        out[i] = cx.expr(*l, c, &v)?;
    }
    Ok(out)
}

fn parse_claw(cx: &Ctx, p: &mut Problem, lines: &Lines) -> Result<(), ProblemError> {
    let mut fluxes: Vec<(usize, String)> = Vec::new();
    let mut div = None;
    for (l, t) in lines {
        let (k, v, c) = key_value(*l, t)?;
        match k.as_str() {
            "expect" => {
                p.expect = Some(match v.as_str() {
                    "trivial" => Expectation::Trivial,
                    "nontrivial" => Expectation::Nontrivial,
                    _ => return Err(syntax(*l, c, "expected `trivial` or `nontrivial`")),
                })
            }
            "div" => div = Some(cx.expr(*l, c, &v)?),
            _ => fluxes.push((*l, t.clone())),
        }
    }
    if div.is_some() && !fluxes.is_empty() {
        return Err(syntax(lines[0].0, 1, "give either fluxes or `div`, not both"));
    }
    if let Some(d) = div {
        p.claw = Some(ClawSpec::Divergence(d));
    } else if !fluxes.is_empty() {
        p.claw = Some(ClawSpec::Fluxes(keyed(cx, &fluxes, &cx.space.indep, "independent variable")?));
    }
    Ok(())
}

fn parse_symmetry(cx: &Ctx, p: &mut Problem, lines: &Lines) -> Result<(), ProblemError> {
    if lines.is_empty() {
        return Ok(());
    }
    let point = lines.iter().any(|(_, t)| t.trim_start().starts_with("xi_") || t.trim_start().starts_with("eta_"));
    if !point {
        p.symmetry = Some(SymmetrySpec::Characteristic(keyed(cx, lines, &cx.space.deps, "dependent variable")?));
        return Ok(());
    }
    let xi_keys: Vec<String> = cx.space.indep.iter().map(|x| format!("xi_{x}")).collect();
    let eta_keys: Vec<String> = cx.space.deps.iter().map(|u| format!("eta_{u}")).collect();
    let (xs, es): (Lines, Lines) = lines.iter().cloned().partition(|(_, t)| t.trim_start().starts_with("xi_"));
    p.symmetry = Some(SymmetrySpec::Point {
        xi: keyed(cx, &xs, &xi_keys, "xi component")?,
        eta: keyed(cx, &es, &eta_keys, "eta component")?,
    });
    Ok(())
}

fn parse_hodograph(space: &Space, p: &mut Problem, lines: &Lines) -> Result<(), ProblemError> {
    if lines.is_empty() {
        return Ok(());
    }
    let mut swap = None;
    let mut order = DEFAULT_ORDER;
    let mut targets = Vec::new();
    for (l, t) in lines {
        let (k, v, c) = key_value(*l, t)?;
        match k.as_str() {
            "swap" => {
                let (a, b) = v.split_once("<->").ok_or_else(|| syntax(*l, c, "expected `u <-> x`"))?;
                let (a, b) = (a.trim(), b.trim());
                let dep = space.dep_index(a).ok_or_else(|| undeclared(*l, t, a))?;
                let indep = space.indep_index(b).ok_or_else(|| undeclared(*l, t, b))?;
                swap = Some((dep, indep));
            }
            "order" => order = v.parse().map_err(|_| syntax(*l, c, "expected an integer order"))?,
            _ => targets.push((*l, t.clone())),
        }
    }
    let (dep, indep) = swap.ok_or_else(|| syntax(lines[0].0, 1, "missing `swap = u <-> x`"))?;
    let target = if targets.is_empty() {
        None
    } else {
        let map = build_map(space, dep, indep, order).map_err(|e| syntax(lines[0].0, 1, e.to_string()))?;
        let cx = Ctx { space: &map.new, locals: HashMap::new() };
        Some(keyed(&cx, &targets, &map.new.indep, "new independent variable")?)
    };
    p.hodograph = Some(HodographSpec { dep, indep, order, target });
    Ok(())
}

fn parse_check(cx: &Ctx, l: usize, t: &str) -> Result<Check, ProblemError> {
    let (head, v, c) = key_value(l, t)?;
    let mut words = head.split_whitespace();
    let kind_s = words.next().unwrap_or("");
    let name = words.next().ok_or_else(|| syntax(l, 1, "expected `kind name = expr`"))?.to_string();
    let kind = match kind_s {
        "identity" => CheckKind::Identity,
        "vanishes" => CheckKind::Vanishes,
        "syzygy" => CheckKind::Syzygy,
        "multiplier" => CheckKind::Multiplier,
        "first-integral" => {
            let (Some("@"), Some(var)) = (words.next(), words.next()) else {
                return Err(syntax(l, 1, "expected `first-integral name @ var = expr`"));
            };
            CheckKind::FirstIntegral(cx.space.indep_index(var).ok_or_else(|| undeclared(l, t, var))?)
        }
        _ => return Err(syntax(l, 1, format!("unknown check kind `{kind_s}`"))),
    };
    let exprs = if kind == CheckKind::Multiplier {
        let mut out = Vec::new();
        let mut col = c;
        for part in v.split(';') {
            let lead = part.len() - part.trim_start().len();
            out.push(cx.expr(l, col + lead, part.trim())?);
            col += part.len() + 1;
        }
        out
    } else {
        vec![cx.expr(l, c, &v)?]
    };
    Ok(Check { kind, name, exprs })
}

impl Problem {
    pub fn ranking(&self) -> Ranking {
        self.ranking.clone().unwrap_or_else(|| Ranking::graded_lex(&self.space))
    }

    /// The `[system]` section, or the Euler–Lagrange system of `L`.
    pub fn system(&self) -> Option<PdeSystem> {
        if self.system.is_empty() {
            let l = self.lagrangian.as_ref()?;
            return Some(euler_lagrange_system(&self.space, self.ranking(), l, None));
        }
        let mut sys = PdeSystem::new(self.space.clone(), self.ranking());
        for line in &self.system {
            sys.push_component(line.lead.clone(), line.component());
        }
        Some(sys)
    }

    pub fn constraint_set(&self) -> CoreResult<ConstraintSet> {
        let rows: Vec<Expr> = self.constraints.iter().map(|(_, e)| e.clone()).collect();
        if rows.is_empty() {
            Ok(ConstraintSet::none(&self.space))
        } else {
            ConstraintSet::from_rows(&self.space, &rows)
        }
    }

    pub fn conservation_law(&self) -> Option<ConservationLaw> {
        Some(match self.claw.as_ref()? {
            ClawSpec::Fluxes(f) => ConservationLaw::from_fluxes(FluxVector::new(f.clone())),
            ClawSpec::Divergence(d) => ConservationLaw::from_divergence(d.clone()),
        })
    }

    pub fn multiplier(&self) -> Option<Multiplier> {
        self.multiplier.as_ref().map(|q| Multiplier::new(q.clone()))
    }

    /// `[lambda]` entries in constraint order; missing ones are zero.
    pub fn lambda_solution(&self) -> Option<LambdaSolution> {
        if self.lambda.is_empty() {
            return None;
        }
        let components = self
            .constraints
            .iter()
            .map(|(n, _)| self.lambda.iter().find(|(k, _)| k == n).map_or_else(Expr::zero, |(_, e)| e.clone()))
            .collect();
        Some(LambdaSolution { components })
    }

    pub fn characteristic(&self) -> Option<Characteristic> {
        Some(match self.symmetry.as_ref()? {
            SymmetrySpec::Characteristic(q) => Characteristic::new(q.clone()),
            SymmetrySpec::Point { xi, eta } => characteristic_from_point(xi, eta),
        })
    }

    pub fn hodograph_map(&self) -> Option<CoreResult<HodographMap>> {
        let h = self.hodograph.as_ref()?;
        Some(build_map(&self.space, h.dep, h.indep, h.order))
    }

    /// Highest jet order in the system, Lagrangian and fluxes.
    pub fn max_jet_order(&self) -> u32 {
        let mut all: Vec<&Expr> = self.system.iter().map(|l| &l.expr).collect();
        all.extend(self.lagrangian.iter());
        if let Some(ClawSpec::Fluxes(f)) = &self.claw {
            all.extend(f.iter());
        }
        all.iter()
            .flat_map(|e| e.jets())
            .filter(|v| !matches!(v.field, Field::Aux(_)))
            .map(|v| v.order())
            .max()
            .unwrap_or(0)
    }
}

#[cfg(test)]
mod tests;
