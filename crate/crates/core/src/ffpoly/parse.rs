//! Text syntax for polynomials: `expr ::= term (('+'|'-') term)*`, where a
//! term is a `*`-separated product of integers and `var` or `var^nat`.

use crate::error::{Error, Result};
use crate::field::FieldSpec;

use super::poly::{default_names, Monomial, Poly};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(u128),
    Ident(String),
    Plus,
    Minus,
    Star,
    Caret,
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>> {
    let bytes: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let col = i + 1;
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let s: String = bytes[start..i].iter().collect();
            let v = s.parse::<u128>().map_err(|_| Error::Parse { col, msg: format!("number {s} too large") })?;
            out.push((col, Tok::Num(v)));
        } else if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_alphanumeric() || bytes[i] == '_') {
                i += 1;
            }
            out.push((col, Tok::Ident(bytes[start..i].iter().collect())));
        } else {
            let t = match c {
                '+' => Tok::Plus,
                '-' => Tok::Minus,
                '*' => Tok::Star,
                '^' => Tok::Caret,
                _ => return Err(Error::Parse { col, msg: format!("unexpected character '{c}'") }),
            };
            out.push((col, t));
            i += 1;
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    field: FieldSpec,
    names: &'a [String],
    end_col: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn col(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end_col, |(c, _)| *c)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Parse { col: self.col(), msg: msg.into() })
    }

    fn expr(&mut self) -> Result<Poly> {
        let n = self.names.len();
        let mut acc = Poly::zero(self.field, n);
        let mut sign = 1u32;
        if self.peek() == Some(&Tok::Minus) {
            self.pos += 1;
            sign = self.field.p() - 1;
        } else if self.peek() == Some(&Tok::Plus) {
            self.pos += 1;
        }
        loop {
            let t = self.term()?;
            acc.add_scaled_assign(&t, sign);
            match self.peek() {
                None => return Ok(acc),
                Some(Tok::Plus) => sign = 1,
                Some(Tok::Minus) => sign = self.field.p() - 1,
                Some(_) => return self.err("expected '+' or '-'"),
            }
            self.pos += 1;
        }
    }

    fn term(&mut self) -> Result<Poly> {
        let f = self.field;
        let n = self.names.len();
        let mut coeff = 1u32;
        let mut exps = vec![0u64; n];
        loop {
            match self.peek().cloned() {
                Some(Tok::Num(v)) => {
                    self.pos += 1;
                    coeff = f.mul(coeff, (v % f.p() as u128) as u32);
                }
                Some(Tok::Ident(name)) => {
                    let idx = match self.names.iter().position(|s| *s == name) {
                        Some(i) => i,
                        None => return Err(Error::VariableOutOfRange { name, nvars: n }),
                    };
                    self.pos += 1;
                    let mut e = 1u64;
                    if self.peek() == Some(&Tok::Caret) {
                        self.pos += 1;
                        match self.peek().cloned() {
                            Some(Tok::Num(v)) => {
                                self.pos += 1;
                                e = u64::try_from(v).or_else(|_| self.err("exponent too large"))?;
                            }
                            _ => return self.err("expected exponent"),
                        }
                    }
                    exps[idx] = exps[idx].saturating_add(e);
                }
                _ => return self.err("expected a number or a variable"),
            }
            if self.peek() == Some(&Tok::Star) {
                self.pos += 1;
            } else {
                break;
            }
        }
        let reduced: Vec<u16> = exps.iter().map(|&e| f.reduce_exp(e)).collect();
        let mut p = Poly::zero(f, n);
        p.add_term(Monomial::new(reduced), coeff);
        Ok(p)
    }
}

/// Parse with the default variable names `x1 .. xn`.
pub fn parse_poly(text: &str, field: FieldSpec, nvars: usize) -> Result<Poly> {
    let names = default_names("x", nvars);
    parse_poly_named(text, field, &names)
}

pub fn parse_poly_named(text: &str, field: FieldSpec, names: &[String]) -> Result<Poly> {
    let toks = lex(text)?;
    if toks.is_empty() {
        return Err(Error::Parse { col: 1, msg: "empty expression".into() });
    }
    let mut parser = Parser { toks, pos: 0, field, names, end_col: text.chars().count() + 1 };
    parser.expr()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f5() -> FieldSpec {
        FieldSpec::new(5).unwrap()
    }

    #[test]
    fn reads_terms() {
        let p = parse_poly("x1*x2 + 3", f5(), 2).unwrap();
        assert_eq!(p.num_terms(), 2);
        assert_eq!(p.eval(&[2, 3]).unwrap(), 4);
        assert_eq!(p.to_string(), "x1*x2 + 3");
    }

    #[test]
    fn frobenius_on_parse() {
        assert_eq!(parse_poly("x1^5", f5(), 1).unwrap(), parse_poly("x1", f5(), 1).unwrap());
    }

    #[test]
    fn cancellation_gives_zero() {
        assert!(parse_poly("2*x1 + 3*x1", f5(), 1).unwrap().is_zero());
    }

    #[test]
    fn negatives_and_leading_minus() {
        let p = parse_poly("-x1 - 2*x2^2", f5(), 2).unwrap();
        assert_eq!(p.eval(&[1, 1]).unwrap(), 2);
    }

    #[test]
    fn errors() {
        assert!(matches!(parse_poly("x7", f5(), 6), Err(Error::VariableOutOfRange { .. })));
        assert!(matches!(parse_poly("x1 +", f5(), 2), Err(Error::Parse { .. })));
        assert!(matches!(parse_poly("x1 $ x2", f5(), 2), Err(Error::Parse { .. })));
        assert!(matches!(parse_poly("x1^", f5(), 2), Err(Error::Parse { .. })));
    }
}
