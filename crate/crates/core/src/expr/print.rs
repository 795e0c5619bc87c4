//! Canonical text form, readable back by the parser.

use num_traits::{One, Signed};

use super::poly::exp_to_coeff;
use super::{Atom, Coeff, Exp, Expr, Mono, Poly};
use crate::space::{Field, Space};

/// Renders expressions using the names of a [`Space`].
pub struct Printer<'a> {
    space: Option<&'a Space>,
}

impl<'a> Printer<'a> {
    pub fn new(space: &'a Space) -> Self {
        Printer { space: Some(space) }
    }

    /// Positional names (`x0`, `u0[1,0]`) for debugging without a space.
    pub fn bare() -> Printer<'static> {
        Printer { space: None }
    }

    pub fn print(&self, e: &Expr) -> String {
        let num = self.poly(e.numer());
        if e.denom().is_empty() {
            return num;
        }
        let mut out = if e.numer().len() > 1 { format!("({num})") } else { num };
        // One division per factor, so that parsing rebuilds the same factors.
        for (f, k) in e.denom() {
            out.push_str(&format!("/({})", self.poly(f)));
            if *k > 1 {
                out.push_str(&format!("^{k}"));
            }
        }
        out
    }

    fn poly(&self, p: &Poly) -> String {
        if p.is_zero() {
            return "0".into();
        }
        let mut out = String::new();
        for (i, (m, c)) in p.terms().rev().enumerate() {
            let neg = c.is_negative();
            if i == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            out.push_str(&self.term(m, &c.abs()));
        }
        out
    }

    fn term(&self, m: &Mono, c: &Coeff) -> String {
        let mut parts = Vec::new();
        let mut exp_arg = Poly::zero();
        for (a, e) in m.factors() {
            match a {
                Atom::Exp(arg) if arg.is_polynomial() => {
                    exp_arg = exp_arg.add(&arg.numer().scale(&exp_to_coeff(*e)));
                }
                _ => parts.push(self.power(a, *e)),
            }
        }
        if !exp_arg.is_zero() {
            parts.push(format!("exp({})", self.poly(&exp_arg)));
        }
        if parts.is_empty() {
            return coeff_str(c);
        }
        if !c.is_one() {
            parts.insert(0, coeff_str(c));
        }
        parts.join("*")
    }

    fn power(&self, a: &Atom, e: Exp) -> String {
        if let Atom::Pow(base) = a {
            let b = self.print(base);
            if e == Exp::new(1, 2) {
                return format!("sqrt({b})");
            }
            return format!("({b})^({}/{})", e.numer(), e.denom());
        }
        let s = self.atom(a);
        if e.is_one() {
            s
        } else if e.is_integer() {
            format!("{s}^{}", e.numer())
        } else {
            format!("{s}^({}/{})", e.numer(), e.denom())
        }
    }

    pub fn atom(&self, a: &Atom) -> String {
        match a {
            Atom::Indep(i) => match self.space {
                Some(s) => s.indep[*i].clone(),
                None => format!("x{i}"),
            },
            Atom::Jet(v) => match self.space {
                Some(s) => s.jet_name(v),
                None => {
                    let base = match v.field {
                        Field::Dep(i) => format!("u{i}"),
                        Field::Arb(i) => format!("g{i}"),
                        Field::Aux(i) => format!("A{}", i + 1),
                    };
                    if v.idx.is_zero() {
                        base
                    } else {
                        format!("{base}{}", v.idx)
                    }
                }
            },
            Atom::Const(c) => c.to_string(),
            Atom::Slot(i) => format!("${i}"),
            Atom::Exp(arg) => format!("exp({})", self.print(arg)),
            Atom::Pow(base) => format!("({})", self.print(base)),
            Atom::Apply(f, z) => format!("{}({})", f.name(), self.print(z)),
            Atom::Opaque(f, k, z) => {
                format!("{}{}({})", f.0.name, "'".repeat(*k as usize), self.print(z))
            }
            Atom::Unknown(name, partials, args) => {
                let args: Vec<String> = args.iter().map(|x| self.print(x)).collect();
                if partials.iter().all(|p| *p == 0) {
                    format!("{name}({})", args.join(", "))
                } else {
                    let ps: Vec<String> = partials.iter().map(|p| p.to_string()).collect();
                    format!("{name}[{}]({})", ps.join(","), args.join(", "))
                }
            }
        }
    }
}

fn coeff_str(c: &Coeff) -> String {
    if c.denom().is_one() {
        c.numer().to_string()
    } else {
        format!("{}/{}", c.numer(), c.denom())
    }
}

impl Expr {
    pub fn show(&self, space: &Space) -> String {
        Printer::new(space).print(self)
    }
}

impl std::fmt::Display for Expr {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&Printer::bare().print(self))
    }
}
