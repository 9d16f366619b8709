//! Depth-4 sum-product-sum-product formulas built from decompositions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ffpoly::{compose, tuple_context, tuple_degree, FieldSpec, Poly};
use crate::field::next_point;
use crate::rankor::RktCertificate;
use crate::regularize::Decomposition;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fanin {
    /// top fan-in
    pub r: usize,
    /// most factors in one product
    pub a: usize,
    /// largest bottom degree
    pub b: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpspFormula {
    pub field: FieldSpec,
    pub nvars: usize,
    /// Size of the tuple X the formula was built from.
    pub k: usize,
    pub products: Vec<Vec<Poly>>,
    /// coefficients[c][i] multiplies products[i] in output c.
    pub coefficients: Vec<Vec<u32>>,
    pub fanin: Fanin,
}

impl SpspFormula {
    pub fn new(field: FieldSpec, nvars: usize, k: usize, products: Vec<Vec<Poly>>, coefficients: Vec<Vec<u32>>) -> Self {
        let fanin = Fanin {
            r: products.len(),
            a: products.iter().map(Vec::len).max().unwrap_or(0),
            b: products.iter().flatten().map(Poly::deg).max().unwrap_or(0),
        };
        SpspFormula { field, nvars, k, products, coefficients, fanin }
    }

    /// Values of every output at x.
    pub fn eval(&self, x: &[u32]) -> Vec<u32> {
        let f = self.field;
        let prods: Vec<u32> =
            self.products.iter().map(|fs| fs.iter().fold(1, |acc, g| f.mul(acc, g.eval_unchecked(x)))).collect();
        self.coefficients
            .iter()
            .map(|row| row.iter().zip(&prods).fold(0, |acc, (&c, &v)| f.add(acc, f.mul(c, v))))
            .collect()
    }

    /// Bottom polynomials become the factors of an rk_b certificate.
    pub fn to_rkt(&self) -> RktCertificate {
        RktCertificate { t: self.fanin.b, summands: self.products.clone(), coefficients: self.coefficients.clone() }
    }
}

/// One product per outer monomial, shared across outputs. The X_j of a
/// monomial are packed first-fit in order of descending degree into groups
/// of total degree at most ceil(d/u), and each group is multiplied out.
pub fn build_spsp(dec: &Decomposition, u: u32) -> Result<SpspFormula> {
    if u == 0 {
        return Err(Error::Invalid("u must be positive".into()));
    }
    let f = dec.field;
    let n = dec.nvars;
    let recomposed: Vec<Poly> = dec
        .outer
        .iter()
        .map(|g| if dec.x.is_empty() { Ok(Poly::constant(f, n, g.constant_term())) } else { compose(g, &dec.x) })
        .collect::<Result<_>>()?;
    let d = tuple_degree(&recomposed);
    let cap = d.div_ceil(u);

    let mut monos: Vec<_> = dec.outer.iter().flat_map(|g| g.terms().map(|(m, _)| m.clone())).collect();
    monos.sort();
    monos.dedup();

    let mut products = Vec::with_capacity(monos.len());
    for m in &monos {
        let mut factors: Vec<usize> =
            m.exps().iter().enumerate().flat_map(|(j, &e)| std::iter::repeat_n(j, e as usize)).collect();
        let xdeg: u32 = factors.iter().map(|&j| dec.x[j].deg()).sum();
        if xdeg > d {
            return Err(Error::DegreeOverflow { degree: xdeg, bound: d });
        }
        factors.sort_by_key(|&j| std::cmp::Reverse(dec.x[j].deg()));
        let mut bins: Vec<(u32, Poly)> = Vec::new();
        for j in factors {
            let dj = dec.x[j].deg();
            match bins.iter_mut().find(|(load, _)| load + dj <= cap) {
                Some((load, g)) => {
                    *load += dj;
                    *g = g.mul(&dec.x[j]);
                }
                None => bins.push((dj, dec.x[j].clone())),
            }
        }
        products.push(bins.into_iter().map(|(_, g)| g).collect());
    }
    let coefficients = dec.outer.iter().map(|g| monos.iter().map(|m| g.coeff(m)).collect()).collect();
    Ok(SpspFormula::new(f, n, dec.k(), products, coefficients))
}

/// Pointwise comparison on all of F_p^n.
pub fn equiv_check(phi: &SpspFormula, ps: &[Poly]) -> Result<bool> {
    let (f, n) = tuple_context(ps)?;
    if f != phi.field || n != phi.nvars || ps.len() != phi.coefficients.len() {
        return Ok(false);
    }
    f.points(n)?;
    let mut x = vec![0u32; n];
    loop {
        let want: Vec<u32> = ps.iter().map(|q| q.eval_unchecked(&x)).collect();
        if phi.eval(&x) != want {
            return Ok(false);
        }
        if !next_point(&mut x, f.p()) {
            return Ok(true);
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FaninReport {
    pub fanin: Fanin,
    pub m: usize,
    pub d: u32,
    pub u: u32,
    pub k: usize,
    pub b_target: u32,
    pub b_ok: bool,
    pub prod_fanin_exceeds_u: bool,
    /// sum_{i <= d} k^i, the number of X-monomials of degree <= d (saturating)
    pub monomial_count: u64,
    /// 2 k^d
    pub r_target: u64,
    pub r_ok: bool,
    /// log2 of (2m)^(2^d); the true bound has an unknown o(1) in the exponent.
    pub log2_f_leading: f64,
}

pub fn certify_fanin(phi: &SpspFormula, m: usize, d: u32, u: u32) -> FaninReport {
    let k = phi.k as u64;
    let monomial_count = (0..=d).fold(0u64, |acc, i| acc.saturating_add(k.saturating_pow(i)));
    let r_target = k.saturating_pow(d).saturating_mul(2);
    let b_target = d.div_ceil(u.max(1));
    FaninReport {
        fanin: phi.fanin,
        m,
        d,
        u,
        k: phi.k,
        b_target,
        b_ok: phi.fanin.b <= b_target,
        prod_fanin_exceeds_u: phi.fanin.a > u as usize,
        monomial_count,
        r_target,
        r_ok: phi.fanin.r as u64 <= r_target,
        log2_f_leading: 2f64.powi(d as i32) * ((2 * m.max(1)) as f64).log2(),
    }
}
