//! Expression surface syntax.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := primary ('^' unary)?
//! primary := number | name | name '(' args ')' | '(' expr ')'
//! ```
//!
//! Names resolve against a [`Space`]: `u_xt` is a jet coordinate,
//! `D_xxt(e)` a total derivative, `Psi''(z)` a declared function.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::Zero;

use super::{Coeff, Exp, Expr};
use crate::space::{FunctionDecl, JetVar, Space};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ParseError {
    #[error("column {col}: {msg}")]
    Syntax { col: usize, msg: String },
    #[error("undeclared symbol `{0}`")]
    UndeclaredSymbol(String),
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(Coeff),
    Name(String),
    Op(char),
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            let text: String = chars[start..i].iter().collect();
            out.push((start, Tok::Num(decimal(&text).ok_or_else(|| syntax(start, "bad number"))?)));
        } else if c.is_alphabetic() || c == '$' {
            let start = i;
            i += 1;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            while i < chars.len() && chars[i] == '\'' {
                i += 1;
            }
            out.push((start, Tok::Name(chars[start..i].iter().collect())));
        } else if "+-*/^(),[]".contains(c) {
            out.push((i, Tok::Op(c)));
            i += 1;
        } else {
            return Err(syntax(i, &format!("unexpected character `{c}`")));
        }
    }
    Ok(out)
}

fn decimal(text: &str) -> Option<Coeff> {
    let (int, frac) = match text.split_once('.') {
        Some((a, b)) => (a, b),
        None => (text, ""),
    };
    if frac.contains('.') {
        return None;
    }
    let digits = format!("{int}{frac}");
    let n: BigInt = if digits.is_empty() { return None } else { digits.parse().ok()? };
    let d = num_traits::pow(BigInt::from(10), frac.len());
    Some(Coeff::new(n, d))
}

fn syntax(col: usize, msg: &str) -> ParseError {
    ParseError::Syntax { col: col + 1, msg: msg.to_string() }
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
    space: &'a Space,
    locals: &'a HashMap<String, Expr>,
}

/// Parse with `locals` naming extra bound variables (rule parameters).
pub fn parse_expr(src: &str, space: &Space, locals: &HashMap<String, Expr>) -> Result<Expr, ParseError> {
    let toks = lex(src)?;
    let mut p = Parser { toks, pos: 0, end: src.chars().count(), space, locals };
    let e = p.expr()?;
    if let Some((col, t)) = p.toks.get(p.pos) {
        return Err(syntax(*col, &format!("unexpected {t:?}")));
    }
    Ok(e)
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn col(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(c, _)| *c)
    }

    fn eat(&mut self, op: char) -> bool {
        if self.peek() == Some(&Tok::Op(op)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, op: char) -> Result<(), ParseError> {
        if self.eat(op) {
            Ok(())
        } else {
            Err(syntax(self.col(), &format!("expected `{op}`")))
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.term()?;
        loop {
            if self.eat('+') {
                e = e.add(&self.term()?);
            } else if self.eat('-') {
                e = e.sub(&self.term()?);
            } else {
                return Ok(e);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.unary()?;
        loop {
            if self.eat('*') {
                e = e.mul(&self.unary()?);
            } else if self.peek() == Some(&Tok::Op('/')) {
                let col = self.col();
                self.pos += 1;
                let d = self.unary()?;
                e = e.div(&d).ok_or_else(|| syntax(col, "division by zero"))?;
            } else {
                return Ok(e);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.eat('-') {
            return Ok(self.unary()?.neg());
        }
        if self.eat('+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.primary()?;
        if !self.eat('^') {
            return Ok(base);
        }
        let col = self.col();
        let ex = self.unary()?;
        let r = ex
            .as_rational()
            .and_then(|c| super::poly::coeff_to_exp(&c))
            .ok_or_else(|| syntax(col, "exponent must be a rational constant"))?;
        if base.is_zero() && r <= Exp::zero() {
            return Err(syntax(col, "zero to a non-positive power"));
        }
        Ok(base.pow(r))
    }

    fn args(&mut self) -> Result<Vec<Expr>, ParseError> {
        self.expect('(')?;
        let mut out = vec![self.expr()?];
        while self.eat(',') {
            out.push(self.expr()?);
        }
        self.expect(')')?;
        Ok(out)
    }

    fn one_arg(&mut self, name: &str) -> Result<Expr, ParseError> {
        let col = self.col();
        let mut a = self.args()?;
        if a.len() != 1 {
            return Err(syntax(col, &format!("`{name}` takes one argument")));
        }
        Ok(a.pop().unwrap())
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let col = self.col();
        let Some((_, tok)) = self.toks.get(self.pos).cloned() else {
            return Err(syntax(col, "unexpected end of input"));
        };
        self.pos += 1;
        match tok {
            Tok::Num(c) => Ok(Expr::rational(c)),
            Tok::Op('(') => {
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::Op(c) => Err(syntax(col, &format!("unexpected `{c}`"))),
            Tok::Name(name) => self.name(&name, col),
        }
    }

    fn name(&mut self, name: &str, col: usize) -> Result<Expr, ParseError> {
        let call = self.peek() == Some(&Tok::Op('('));
        let bracket = self.peek() == Some(&Tok::Op('['));
        let primes = name.chars().rev().take_while(|c| *c == '\'').count();
        let bare = &name[..name.len() - primes];
        if let Some(v) = self.locals.get(name) {
            return Ok(v.clone());
        }
        if let Some(i) = name.strip_prefix('$').and_then(|s| s.parse().ok()) {
            return Ok(Expr::slot(i));
        }
        if call && primes == 0 {
            match name {
                "exp" => return Ok(self.one_arg(name)?.exp()),
                "sqrt" => return Ok(self.one_arg(name)?.sqrt()),
                "ln" | "log" => {
                    let a = self.one_arg(name)?;
                    if a.is_zero() {
                        return Err(syntax(col, "ln of zero"));
                    }
                    return Ok(a.ln());
                }
                "sin" => return Ok(self.one_arg(name)?.sin()),
                "cos" => return Ok(self.one_arg(name)?.cos()),
                "tan" => return Ok(self.one_arg(name)?.tan()),
                "atan" => return Ok(self.one_arg(name)?.atan()),
                _ => {}
            }
            if let Some(suffix) = name.strip_prefix("D_") {
                let j = self
                    .space
                    .parse_suffix(suffix)
                    .ok_or_else(|| syntax(col, &format!("bad derivative `{name}`")))?;
                return Ok(self.one_arg(name)?.total_derivative_multi(&j));
            }
        }
        match self.space.functions.get(bare) {
            Some(FunctionDecl::Opaque(f)) if call => {
                let f = f.clone();
                let a = self.one_arg(bare)?;
                return Ok(Expr::opaque(&f, primes as u32, &a));
            }
            Some(FunctionDecl::Unknown { arity }) if (call || bracket) && primes == 0 => {
                let arity = *arity;
                let mut partials = vec![0u32; arity];
                if self.eat('[') {
                    for (k, p) in partials.iter_mut().enumerate() {
                        if k > 0 {
                            self.expect(',')?;
                        }
                        let c = self.col();
                        match self.toks.get(self.pos).cloned() {
                            Some((_, Tok::Num(n))) if n.is_integer() => {
                                *p = n.to_integer().try_into().map_err(|_| syntax(c, "bad partial count"))?;
                                self.pos += 1;
                            }
                            _ => return Err(syntax(c, "expected a partial count")),
                        }
                    }
                    self.expect(']')?;
                }
                let c = self.col();
                let args = self.args()?;
                if args.len() != arity {
                    return Err(syntax(c, &format!("`{bare}` takes {arity} arguments")));
                }
                return Ok(Expr::unknown(bare, partials, args));
            }
            _ => {}
        }
        if call || primes > 0 {
            return Err(ParseError::UndeclaredSymbol(bare.to_string()));
        }
        self.plain(name).ok_or_else(|| ParseError::UndeclaredSymbol(name.to_string()))
    }

    fn plain(&self, name: &str) -> Option<Expr> {
        let s = self.space;
        if let Some(i) = s.indep_index(name) {
            return Some(Expr::indep(i));
        }
        if s.consts.iter().any(|c| c == name) {
            return Some(Expr::constant(name));
        }
        if let Some(f) = s.field(name) {
            return Some(Expr::field(f, s.n()));
        }
        for (k, _) in name.match_indices('_').collect::<Vec<_>>().into_iter().rev() {
            let (base, suffix) = (&name[..k], &name[k + 1..]);
            if let (Some(f), Some(j)) = (s.field(base), s.parse_suffix(suffix)) {
                if j.is_zero() {
                    continue;
                }
                return Some(Expr::jet(JetVar::new(f, j)));
            }
        }
        None
    }
}
