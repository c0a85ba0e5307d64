//! Line-oriented text form: one inequality per line, e.g.
//! `Rhat + Rc + R1 <= I(U,V,X2;Y) - I(U;S|V,X2)`. Blank lines and lines
//! starting with `#` are ignored; rate-free lines are side conditions.

use std::fmt;
use std::str::FromStr;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::info::Atom;

use super::{Expr, InequalitySystem, LinearInequality, RateVar, Q};

fn push_term(out: &mut String, q: Q, name: &str) {
    let mag = q.abs();
    if out.is_empty() {
        if q.is_negative() {
            out.push('-');
        }
    } else {
        out.push_str(if q.is_negative() { " - " } else { " + " });
    }
    if name.is_empty() {
        out.push_str(&mag.to_string());
    } else if mag.is_one() {
        out.push_str(name);
    } else {
        out.push_str(&format!("{mag} {name}"));
    }
}

pub(crate) fn format_expr(e: &Expr) -> String {
    let mut out = String::new();
    for (a, q) in &e.atoms {
        push_term(&mut out, *q, &a.to_string());
    }
    if !e.constant.is_zero() {
        push_term(&mut out, e.constant, "");
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

impl fmt::Display for LinearInequality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut lhs = String::new();
        for (v, q) in &self.coeffs {
            push_term(&mut lhs, *q, v.name());
        }
        if lhs.is_empty() {
            lhs.push('0');
        }
        write!(f, "{lhs} {} {}", if self.strict { "<" } else { "<=" }, format_expr(&self.rhs))
    }
}

impl fmt::Display for InequalitySystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in self.rows.iter().chain(&self.side_conditions) {
            writeln!(f, "{r}")?;
        }
        Ok(())
    }
}

enum Name {
    Rate(RateVar),
    Atom(Atom),
    Constant,
}

/// Splits a linear expression into signed `(coefficient, name)` terms.
fn terms(text: &str) -> Result<Vec<(Q, Name)>> {
    let bad = |why: &str| Error::Parse(format!("{why} in `{text}`"));
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0;
    let mut out = Vec::new();
    let skip_ws = |i: &mut usize| {
        while *i < chars.len() && chars[*i].is_whitespace() {
            *i += 1;
        }
    };
    loop {
        skip_ws(&mut i);
        if i >= chars.len() {
            break;
        }
        let mut sign = Q::one();
        if chars[i] == '+' || chars[i] == '-' {
            if chars[i] == '-' {
                sign = -sign;
            }
            i += 1;
            skip_ws(&mut i);
        } else if !out.is_empty() {
            return Err(bad("missing operator"));
        }
        let start = i;
        while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '/') {
            i += 1;
        }
        let number: String = chars[start..i].iter().collect();
        let coeff = if number.is_empty() {
            Q::one()
        } else {
            Q::from_str(&number).map_err(|_| bad("bad coefficient"))?
        };
        skip_ws(&mut i);
        if i < chars.len() && chars[i] == '*' {
            i += 1;
            skip_ws(&mut i);
        }
        let name_start = i;
        while i < chars.len() && chars[i].is_ascii_alphanumeric() {
            i += 1;
        }
        let word: String = chars[name_start..i].iter().collect();
        let name = if word.is_empty() {
            if number.is_empty() {
                return Err(bad("missing term"));
            }
            Name::Constant
        } else if (word == "I" || word == "H") && i < chars.len() && chars[i] == '(' {
            let close = chars[i..].iter().position(|&c| c == ')').ok_or_else(|| bad("unclosed atom"))? + i;
            let atom: String = chars[name_start..=close].iter().collect();
            i = close + 1;
            Name::Atom(atom.parse()?)
        } else {
            Name::Rate(word.parse()?)
        };
        out.push((sign * coeff, name));
    }
    if out.is_empty() {
        return Err(bad("empty expression"));
    }
    Ok(out)
}

impl FromStr for LinearInequality {
    type Err = Error;

    fn from_str(line: &str) -> Result<Self> {
        let (lhs, rhs, strict) = if let Some((l, r)) = line.split_once("<=") {
            (l, r, false)
        } else if let Some((l, r)) = line.split_once('<') {
            (l, r, true)
        } else {
            return Err(Error::Parse(format!("no `<=` or `<` in `{line}`")));
        };
        let mut row = LinearInequality { coeffs: Default::default(), rhs: Expr::zero(), strict };
        for (q, name) in terms(lhs)? {
            match name {
                Name::Rate(v) => row.add_coeff(v, q),
                Name::Constant if q.is_zero() => {}
                _ => return Err(Error::Parse(format!("left side of `{line}` must only hold rates"))),
            }
        }
        for (q, name) in terms(rhs)? {
            match name {
                Name::Atom(a) => row.rhs.add_atom(a, q),
                Name::Constant => row.rhs.constant += q,
                Name::Rate(_) => return Err(Error::Parse(format!("right side of `{line}` holds a rate"))),
            }
        }
        Ok(row)
    }
}

impl FromStr for InequalitySystem {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut s = InequalitySystem::default();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let row: LinearInequality = line.parse().map_err(|e| match e {
                Error::Parse(m) => Error::Parse(format!("line {}: {m}", n + 1)),
                other => other,
            })?;
            s.push(row);
        }
        Ok(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fme::{region_bound_system, scheme_constraint_system};

    #[test]
    fn systems_round_trip() {
        for s in [scheme_constraint_system(), region_bound_system()] {
            let text = s.to_string();
            let back: InequalitySystem = text.parse().unwrap();
            assert_eq!(back, s, "{text}");
        }
    }

    #[test]
    fn printing_is_readable() {
        let t = scheme_constraint_system().to_string();
        assert!(t.contains("-Rhat < -I(V;S|X2)"), "{t}");
        assert!(t.contains("R0 < I(X2;Y)"), "{t}");
    }

    #[test]
    fn coefficients_and_constants() {
        let r: LinearInequality = "2 Rc - 1/2*R1 <= 3/4 I(U;Y) + 1".parse().unwrap();
        assert_eq!(r.coeff(RateVar::Rc), Q::from_integer(2));
        assert_eq!(r.coeff(RateVar::R1), Q::new(-1, 2));
        assert_eq!(r.rhs.constant, Q::one());
        let again: LinearInequality = r.to_string().parse().unwrap();
        assert_eq!(again, r);
    }

    #[test]
    fn malformed_lines_are_parse_errors() {
        for bad in ["Rc + R1", "Rc + I(U;Y) <= 0", "Rc <= R1", "Rc R1 <= 0", "Rx <= 0", "Rc <= I(U;Y", "<= 1"] {
            assert!(matches!(bad.parse::<LinearInequality>(), Err(Error::Parse(_))), "{bad}");
        }
        let err = "Rc <= 1\nfoo".parse::<InequalitySystem>().unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
    }
}
