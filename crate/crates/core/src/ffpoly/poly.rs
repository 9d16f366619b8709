use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::field::FieldSpec;

/// Exponent vector. Ordering is graded lexicographic: total degree first,
/// then the exponent of x1, then x2, and so on.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial {
    deg: u32,
    exps: Vec<u16>,
}

impl Monomial {
    pub fn new(exps: Vec<u16>) -> Self {
        let deg = exps.iter().map(|&e| e as u32).sum();
        Monomial { deg, exps }
    }

    pub fn one(nvars: usize) -> Self {
        Monomial { deg: 0, exps: vec![0; nvars] }
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut exps = vec![0; nvars];
        exps[i] = 1;
        Monomial { deg: 1, exps }
    }

    pub fn degree(&self) -> u32 {
        self.deg
    }

    pub fn exps(&self) -> &[u16] {
        &self.exps
    }

    pub fn nvars(&self) -> usize {
        self.exps.len()
    }

    pub fn divides(&self, other: &Monomial) -> bool {
        self.exps.iter().zip(&other.exps).all(|(a, b)| a <= b)
    }

    /// Ring product without Frobenius reduction.
    pub fn mul_raw(&self, other: &Monomial) -> Monomial {
        Monomial::new(self.exps.iter().zip(&other.exps).map(|(a, b)| a + b).collect())
    }

    pub fn div_raw(&self, other: &Monomial) -> Option<Monomial> {
        if !other.divides(self) {
            return None;
        }
        Some(Monomial::new(self.exps.iter().zip(&other.exps).map(|(a, b)| a - b).collect()))
    }

    pub fn is_reduced(&self, p: u32) -> bool {
        self.exps.iter().all(|&e| (e as u32) < p)
    }
}

/// A reduced polynomial function F_p^n -> F_p. Terms are kept in a map keyed
/// by monomial, so two polynomials are equal exactly when they define the same
/// function.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Poly {
    field: FieldSpec,
    nvars: usize,
    terms: BTreeMap<Monomial, u32>,
}

impl Poly {
    pub fn zero(field: FieldSpec, nvars: usize) -> Self {
        Poly { field, nvars, terms: BTreeMap::new() }
    }

    pub fn constant(field: FieldSpec, nvars: usize, c: u32) -> Self {
        let mut p = Poly::zero(field, nvars);
        let c = c % field.p();
        if c != 0 {
            p.terms.insert(Monomial::one(nvars), c);
        }
        p
    }

    pub fn var(field: FieldSpec, nvars: usize, i: usize) -> Self {
        let mut p = Poly::zero(field, nvars);
        p.terms.insert(Monomial::var(nvars, i), 1);
        p
    }

    /// Builds from arbitrary exponents and integer coefficients, reducing both.
    pub fn from_terms<I>(field: FieldSpec, nvars: usize, terms: I) -> Self
    where
        I: IntoIterator<Item = (Vec<u64>, i64)>,
    {
        let mut p = Poly::zero(field, nvars);
        for (exps, c) in terms {
            assert_eq!(exps.len(), nvars, "exponent vector length");
            let m = Monomial::new(exps.iter().map(|&e| field.reduce_exp(e)).collect());
            p.add_term(m, field.reduce(c));
        }
        p
    }

    /// Single reduced term c * x^exps.
    pub fn monomial(field: FieldSpec, exps: &[u16], c: u32) -> Self {
        let mut p = Poly::zero(field, exps.len());
        let m = Monomial::new(exps.iter().map(|&e| field.reduce_exp(e as u64)).collect());
        p.add_term(m, c % field.p());
        p
    }

    pub(crate) fn add_term(&mut self, m: Monomial, c: u32) {
        if c == 0 {
            return;
        }
        let f = self.field;
        match self.terms.get_mut(&m) {
            Some(v) => {
                *v = f.add(*v, c);
                if *v == 0 {
                    self.terms.remove(&m);
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    /// Terms in ascending monomial order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, u32)> + '_ {
        self.terms.iter().map(|(m, &c)| (m, c))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, m: &Monomial) -> u32 {
        self.terms.get(m).copied().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.deg() == 0
    }

    pub fn constant_term(&self) -> u32 {
        self.coeff(&Monomial::one(self.nvars))
    }

    /// Total degree; the zero polynomial has degree 0.
    pub fn deg(&self) -> u32 {
        self.terms.keys().next_back().map_or(0, |m| m.degree())
    }

    pub fn deg_in(&self, i: usize) -> u32 {
        self.terms.keys().map(|m| m.exps[i] as u32).max().unwrap_or(0)
    }

    pub fn is_homogeneous(&self) -> bool {
        let mut it = self.terms.keys();
        match it.next() {
            None => true,
            Some(first) => it.all(|m| m.degree() == first.degree()),
        }
    }

    /// Homogeneous of positive degree.
    pub fn is_form(&self) -> bool {
        !self.is_zero() && self.deg() >= 1 && self.is_homogeneous()
    }

    pub fn homogeneous_part(&self, e: u32) -> Poly {
        let terms = self.terms.iter().filter(|(m, _)| m.degree() == e).map(|(m, &c)| (m.clone(), c)).collect();
        Poly { field: self.field, nvars: self.nvars, terms }
    }

    pub fn top_part(&self) -> Poly {
        self.homogeneous_part(self.deg())
    }

    /// Nonzero homogeneous parts keyed by degree.
    pub fn homogeneous_parts(&self) -> BTreeMap<u32, Poly> {
        let mut out: BTreeMap<u32, Poly> = BTreeMap::new();
        for (m, &c) in &self.terms {
            out.entry(m.degree())
                .or_insert_with(|| Poly::zero(self.field, self.nvars))
                .terms
                .insert(m.clone(), c);
        }
        out
    }

    /// Indices of variables appearing in some term.
    pub fn support_vars(&self) -> Vec<usize> {
        (0..self.nvars).filter(|&i| self.terms.keys().any(|m| m.exps[i] > 0)).collect()
    }

    pub fn leading_term(&self) -> Option<(&Monomial, u32)> {
        self.terms.iter().next_back().map(|(m, &c)| (m, c))
    }

    pub fn trailing_term(&self) -> Option<(&Monomial, u32)> {
        self.terms.iter().next().map(|(m, &c)| (m, c))
    }

    pub fn leading_coeff(&self) -> u32 {
        self.leading_term().map_or(0, |(_, c)| c)
    }

    /// Scaled so the leading coefficient is 1; zero stays zero.
    pub fn monic(&self) -> Poly {
        match self.leading_term() {
            None => self.clone(),
            Some((_, c)) => self.scale(self.field.inv(c)),
        }
    }

    pub fn scale(&self, c: u32) -> Poly {
        let c = c % self.field.p();
        if c == 0 {
            return Poly::zero(self.field, self.nvars);
        }
        let f = self.field;
        let terms = self.terms.iter().map(|(m, &v)| (m.clone(), f.mul(v, c))).collect();
        Poly { field: self.field, nvars: self.nvars, terms }
    }

    fn check_compat(&self, other: &Poly) {
        assert_eq!(self.field.p(), other.field.p(), "field mismatch");
        assert_eq!(self.nvars, other.nvars, "nvars mismatch");
    }

    /// self + c * other
    pub fn add_scaled(&self, other: &Poly, c: u32) -> Poly {
        self.check_compat(other);
        let mut out = self.clone();
        out.add_scaled_assign(other, c);
        out
    }

    pub fn add_scaled_assign(&mut self, other: &Poly, c: u32) {
        self.check_compat(other);
        let c = c % self.field.p();
        if c == 0 {
            return;
        }
        for (m, &v) in &other.terms {
            let t = self.field.mul(v, c);
            self.add_term(m.clone(), t);
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        self.add_scaled(other, 1)
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add_scaled(other, self.field.p() - 1)
    }

    pub fn neg(&self) -> Poly {
        self.scale(self.field.p() - 1)
    }

    /// Product as functions: exponents are Frobenius-reduced.
    pub fn mul(&self, other: &Poly) -> Poly {
        self.check_compat(other);
        let f = self.field;
        let mut out = Poly::zero(f, self.nvars);
        for (a, &ca) in &self.terms {
            for (b, &cb) in &other.terms {
                let exps = a.exps.iter().zip(&b.exps).map(|(&x, &y)| f.reduce_exp(x as u64 + y as u64)).collect();
                out.add_term(Monomial::new(exps), f.mul(ca, cb));
            }
        }
        out
    }

    pub fn pow(&self, mut e: u32) -> Poly {
        let mut acc = Poly::constant(self.field, self.nvars, 1);
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    pub fn eval(&self, point: &[u32]) -> Result<u32> {
        if point.len() != self.nvars {
            return Err(Error::DimensionMismatch { expected: self.nvars, got: point.len() });
        }
        Ok(self.eval_unchecked(point))
    }

    pub fn eval_unchecked(&self, point: &[u32]) -> u32 {
        let f = self.field;
        let mut acc = 0u32;
        for (m, &c) in &self.terms {
            let mut v = c;
            for (i, &e) in m.exps.iter().enumerate() {
                if e > 0 {
                    v = f.mul(v, f.pow(point[i] % f.p(), e as u64));
                    if v == 0 {
                        break;
                    }
                }
            }
            acc = f.add(acc, v);
        }
        acc
    }

    /// Values at every point of F_p^n, indexed with x1 least significant.
    pub fn table(&self) -> Result<Vec<u32>> {
        let f = self.field;
        let size = f.points(self.nvars)?;
        let p = f.p() as usize;
        let mut data = vec![0u32; size];
        for (m, &c) in &self.terms {
            let idx = m.exps.iter().rev().fold(0usize, |acc, &e| acc * p + e as usize);
            data[idx] = c;
        }
        let vander: Vec<Vec<u32>> =
            (0..f.p()).map(|a| (0..f.p()).map(|j| if j == 0 { 1 } else { f.pow(a, j as u64) }).collect()).collect();
        axis_transform(&mut data, f, self.nvars, &vander);
        Ok(data)
    }

    /// Re-index variables: variable i becomes variable map[i] of a ring with
    /// `nvars` variables.
    pub fn embed(&self, nvars: usize, map: &[usize]) -> Poly {
        assert_eq!(map.len(), self.nvars);
        let mut out = Poly::zero(self.field, nvars);
        for (m, &c) in &self.terms {
            let mut exps = vec![0u16; nvars];
            for (i, &e) in m.exps.iter().enumerate() {
                exps[map[i]] += e;
            }
            let exps = exps.into_iter().map(|e| self.field.reduce_exp(e as u64)).collect();
            out.add_term(Monomial::new(exps), c);
        }
        out
    }

    /// Keep only the listed variables (which must cover the support).
    pub fn restrict(&self, vars: &[usize]) -> Poly {
        let mut out = Poly::zero(self.field, vars.len());
        for (m, &c) in &self.terms {
            let exps = vars.iter().map(|&v| m.exps[v]).collect();
            out.add_term(Monomial::new(exps), c);
        }
        out
    }

    /// Compare by terms from the leading monomial down; used wherever the
    /// crate needs a canonical order on polynomials.
    pub fn canonical_cmp(&self, other: &Poly) -> std::cmp::Ordering {
        let a = self.terms.iter().rev();
        let b = other.terms.iter().rev();
        a.cmp(b)
    }

    pub fn display_with(&self, names: &[String]) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut parts = Vec::new();
        for (m, &c) in self.terms.iter().rev() {
            let mut factors = Vec::new();
            for (i, &e) in m.exps.iter().enumerate() {
                match e {
                    0 => {}
                    1 => factors.push(names[i].clone()),
                    _ => factors.push(format!("{}^{}", names[i], e)),
                }
            }
            let s = if factors.is_empty() {
                c.to_string()
            } else if c == 1 {
                factors.join("*")
            } else {
                format!("{}*{}", c, factors.join("*"))
            };
            parts.push(s);
        }
        parts.join(" + ")
    }

    pub(crate) fn from_map(field: FieldSpec, nvars: usize, terms: BTreeMap<Monomial, u32>) -> Poly {
        Poly { field, nvars, terms }
    }
}

pub fn default_names(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("{prefix}{i}")).collect()
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display_with(&default_names("x", self.nvars)))
    }
}

/// Apply a p x p matrix along every axis of a dense tensor over F_p^n.
pub(crate) fn axis_transform(data: &mut [u32], f: FieldSpec, n: usize, mat: &[Vec<u32>]) {
    let p = f.p() as usize;
    let mut stride = 1usize;
    let mut buf = vec![0u32; p];
    let mut col = vec![0u32; p];
    for _ in 0..n {
        let block = stride * p;
        for base in (0..data.len()).step_by(block) {
            for off in 0..stride {
                for j in 0..p {
                    col[j] = data[base + off + j * stride];
                }
                for (a, row) in mat.iter().enumerate() {
                    let mut acc = 0u64;
                    for j in 0..p {
                        acc += row[j] as u64 * col[j] as u64;
                    }
                    buf[a] = (acc % f.p() as u64) as u32;
                }
                for a in 0..p {
                    data[base + off + a * stride] = buf[a];
                }
            }
        }
        stride = block;
    }
}

/// The polynomial F(X_1, ..., X_k) as a reduced function.
pub fn compose(outer: &Poly, inner: &[Poly]) -> Result<Poly> {
    if outer.nvars() != inner.len() {
        return Err(Error::DimensionMismatch { expected: outer.nvars(), got: inner.len() });
    }
    let nvars = match inner.first() {
        Some(x) => x.nvars(),
        None => 0,
    };
    let field = outer.field();
    for x in inner {
        if x.nvars() != nvars || x.field().p() != field.p() {
            return Err(Error::DimensionMismatch { expected: nvars, got: x.nvars() });
        }
    }
    if inner.is_empty() {
        return Ok(Poly::constant(field, 0, outer.constant_term()));
    }
    // powers[j][e] = X_j^e, built lazily
    let mut powers: Vec<Vec<Poly>> = inner.iter().map(|x| vec![Poly::constant(field, nvars, 1), x.clone()]).collect();
    let mut out = Poly::zero(field, nvars);
    for (m, c) in outer.terms() {
        let mut prod = Poly::constant(field, nvars, c);
        for (j, &e) in m.exps().iter().enumerate() {
            if e == 0 {
                continue;
            }
            while powers[j].len() <= e as usize {
                let next = powers[j].last().unwrap().mul(&inner[j]);
                powers[j].push(next);
            }
            prod = prod.mul(&powers[j][e as usize]);
        }
        out.add_scaled_assign(&prod, 1);
    }
    Ok(out)
}

/// Field and arity shared by a nonempty tuple.
pub fn tuple_context(tuple: &[Poly]) -> Result<(FieldSpec, usize)> {
    let first = tuple.first().ok_or_else(|| Error::Invalid("empty tuple".into()))?;
    for q in tuple {
        if q.nvars() != first.nvars() {
            return Err(Error::DimensionMismatch { expected: first.nvars(), got: q.nvars() });
        }
        if q.field().p() != first.field().p() {
            return Err(Error::Invalid("tuple components live over different fields".into()));
        }
    }
    Ok((first.field(), first.nvars()))
}

pub fn tuple_degree(tuple: &[Poly]) -> u32 {
    tuple.iter().map(Poly::deg).max().unwrap_or(0)
}

pub fn is_form_tuple(tuple: &[Poly]) -> bool {
    tuple.iter().all(Poly::is_form)
}
