//! Problem files:
//!
//! ```text
//! # comment
//! field 5
//! vars x1 x2 x3 x4
//! poly P = x1^2*x2^2 + 2*x1*x2*x3*x4 + x3^2*x4^2
//! eps 1/2
//! ```
//!
//! Optional parameter lines: `eps`, `t` (rationals), `u`, `max_rank`,
//! `budget` (naturals).

use crate::error::{Error, Result};
use crate::ffpoly::{parse_poly_named, tuple_degree, FieldSpec, Poly};
use crate::rational::{format_rational, parse_rational, Rational};

#[derive(Clone, Debug, PartialEq)]
pub struct Problem {
    pub field: FieldSpec,
    pub vars: Vec<String>,
    pub names: Vec<String>,
    pub polys: Vec<Poly>,
    pub eps: Option<Rational>,
    pub t: Option<Rational>,
    pub u: Option<u32>,
    pub max_rank: Option<u32>,
    pub budget: Option<u64>,
}

fn line_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { col: 1, msg: format!("line {line}: {}", msg.into()) }
}

fn nat<T: std::str::FromStr>(line: usize, key: &str, v: &str) -> Result<T> {
    v.trim().parse().map_err(|_| line_err(line, format!("{key} expects a natural number, got {v:?}")))
}

pub fn parse_problem(text: &str) -> Result<Problem> {
    let mut p: Option<u32> = None;
    let mut vars: Option<Vec<String>> = None;
    let mut polys_src: Vec<(usize, String, String)> = Vec::new();
    let (mut eps, mut t, mut u, mut max_rank, mut budget) = (None, None, None, None, None);

    for (i, raw) in text.lines().enumerate() {
        let ln = i + 1;
        let line = raw.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let (key, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
        let rest = rest.trim();
        match key {
            "field" => {
                if p.is_some() {
                    return Err(line_err(ln, "field declared twice"));
                }
                p = Some(nat(ln, key, rest)?);
            }
            "vars" => {
                if vars.is_some() {
                    return Err(line_err(ln, "vars declared twice"));
                }
                vars = Some(rest.split_whitespace().map(str::to_string).collect());
            }
            "poly" => {
                let (name, expr) = rest.split_once('=').ok_or_else(|| line_err(ln, "expected `poly NAME = expr`"))?;
                polys_src.push((ln, name.trim().to_string(), expr.trim().to_string()));
            }
            "eps" => eps = Some(parse_rational(rest).map_err(|e| line_err(ln, e.to_string()))?),
            "t" => t = Some(parse_rational(rest).map_err(|e| line_err(ln, e.to_string()))?),
            "u" => u = Some(nat(ln, key, rest)?),
            "max_rank" => max_rank = Some(nat(ln, key, rest)?),
            "budget" => budget = Some(nat(ln, key, rest)?),
            other => return Err(line_err(ln, format!("unknown directive {other:?}"))),
        }
    }
    let p = p.ok_or_else(|| line_err(1, "missing `field` line"))?;
    let field = match budget {
        Some(b) => FieldSpec::with_budget(p, b)?,
        None => FieldSpec::new(p)?,
    };
    let vars = vars.ok_or_else(|| line_err(1, "missing `vars` line"))?;
    if polys_src.is_empty() {
        return Err(line_err(1, "no `poly` lines"));
    }
    let mut seen = std::collections::BTreeSet::new();
    for name in vars.iter().chain(polys_src.iter().map(|(_, n, _)| n)) {
        let valid = name.chars().next().is_some_and(|c| c.is_alphabetic() || c == '_')
            && name.chars().all(|c| c.is_alphanumeric() || c == '_');
        if !valid {
            return Err(line_err(1, format!("invalid name {name:?}")));
        }
        if !seen.insert(name.clone()) {
            return Err(line_err(1, format!("name {name} is used twice")));
        }
    }
    let mut names = Vec::new();
    let mut polys = Vec::new();
    for (ln, name, expr) in polys_src {
        polys.push(parse_poly_named(&expr, field, &vars).map_err(|e| line_err(ln, e.to_string()))?);
        names.push(name);
    }
    Ok(Problem { field, vars, names, polys, eps, t, u, max_rank, budget })
}

impl Problem {
    pub fn degree(&self) -> u32 {
        tuple_degree(&self.polys)
    }

    /// Pipelines need deg P < p.
    pub fn check_pipeline(&self) -> Result<()> {
        let d = self.degree();
        if d >= self.field.p() {
            return Err(Error::CharTooSmall { degree: d, p: self.field.p() });
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("field {}\nvars {}\n", self.field.p(), self.vars.join(" "));
        for (name, q) in self.names.iter().zip(&self.polys) {
            s += &format!("poly {name} = {}\n", q.display_with(&self.vars));
        }
        if let Some(e) = &self.eps {
            s += &format!("eps {}\n", format_rational(e));
        }
        if let Some(t) = &self.t {
            s += &format!("t {}\n", format_rational(t));
        }
        if let Some(u) = self.u {
            s += &format!("u {u}\n");
        }
        if let Some(r) = self.max_rank {
            s += &format!("max_rank {r}\n");
        }
        if let Some(b) = self.budget {
            s += &format!("budget {b}\n");
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SQUARE: &str = "# square of a rank-2 quadric\nfield 5\nvars a b c d\npoly P = a^2*b^2 + 2*a*b*c*d + c^2*d^2\neps 1/2\nu 2\n";

    #[test]
    fn parses_and_round_trips() {
        let pr = parse_problem(SQUARE).unwrap();
        assert_eq!(pr.field.p(), 5);
        assert_eq!(pr.vars.len(), 4);
        assert_eq!(pr.degree(), 4);
        assert_eq!(pr.eps, Some(Rational::new(1, 2)));
        assert_eq!(pr.u, Some(2));
        assert!(pr.check_pipeline().is_ok());
        assert_eq!(parse_problem(&pr.to_text()).unwrap(), pr);
    }

    #[test]
    fn rejects_bad_files() {
        assert!(parse_problem("vars x\npoly P = x\n").is_err());
        assert!(parse_problem("field 5\nvars x x\npoly P = x\n").is_err());
        assert!(parse_problem("field 5\nvars x\npoly x = x\n").is_err());
        assert!(parse_problem("field 5\nvars x\npoly P = y\n").is_err());
        assert!(parse_problem("field 6\nvars x\npoly P = x\n").is_err());
        assert!(parse_problem("field 5\nvars x\nfoo 3\npoly P = x\n").is_err());
        let big = parse_problem("field 3\nvars x y\npoly P = x^2*y\n").unwrap();
        assert_eq!(big.check_pipeline(), Err(Error::CharTooSmall { degree: 3, p: 3 }));
    }
}
