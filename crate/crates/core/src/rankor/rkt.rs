//! rk_t certificates: a tuple whose components all lie in the span of a few
//! products of polynomials of degree at most t.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::ffpoly::{tuple_context, Monomial, Poly};
use crate::linalg;

use super::divide::t_factor;
use super::{rank_bounded_search, rank_quadratic, RankWitness};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RktCertificate {
    pub t: u32,
    /// Each summand is a product of the listed factors; an empty list is 1.
    pub summands: Vec<Vec<Poly>>,
    /// coefficients[k][i] multiplies summand i in component k.
    pub coefficients: Vec<Vec<u32>>,
}

impl RktCertificate {
    pub fn r(&self) -> usize {
        self.summands.len()
    }

    pub fn products(&self, field: crate::ffpoly::FieldSpec, nvars: usize) -> Vec<Poly> {
        self.summands.iter().map(|fs| product(field, nvars, fs)).collect()
    }
}

fn product(field: crate::ffpoly::FieldSpec, nvars: usize, factors: &[Poly]) -> Poly {
    factors.iter().fold(Poly::constant(field, nvars, 1), |acc, g| acc.mul(g))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RktCheck {
    pub valid: bool,
    pub diagnosis: Option<String>,
}

impl RktCheck {
    fn fail(msg: String) -> Self {
        RktCheck { valid: false, diagnosis: Some(msg) }
    }
}

pub fn rkt_verify(ps: &[Poly], cert: &RktCertificate) -> RktCheck {
    let Ok((field, nvars)) = tuple_context(ps) else {
        return RktCheck::fail("empty tuple".into());
    };
    for (i, fs) in cert.summands.iter().enumerate() {
        for g in fs {
            if g.nvars() != nvars || g.field() != field {
                return RktCheck::fail(format!("summand {i}: factor lives in a different ring"));
            }
            if g.deg() > cert.t {
                return RktCheck::fail(format!("summand {i}: factor {g} has degree {} > t = {}", g.deg(), cert.t));
            }
        }
    }
    if cert.coefficients.len() != ps.len() {
        return RktCheck::fail(format!("{} coefficient rows for {} components", cert.coefficients.len(), ps.len()));
    }
    let prods = cert.products(field, nvars);
    for (k, (row, target)) in cert.coefficients.iter().zip(ps).enumerate() {
        if row.len() != prods.len() {
            return RktCheck::fail(format!("component {k}: {} coefficients for {} summands", row.len(), prods.len()));
        }
        let mut sum = Poly::zero(field, nvars);
        for (c, g) in row.iter().zip(&prods) {
            sum.add_scaled_assign(g, *c);
        }
        if sum != *target {
            return RktCheck::fail(format!("component {k}: combination gives {sum}, expected {target}"));
        }
    }
    RktCheck { valid: true, diagnosis: None }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RktSearch {
    pub certificate: Option<RktCertificate>,
    /// Proven: no certificate with fewer summands exists.
    pub lower: u32,
    pub budget_exceeded: bool,
}

/// Coefficients c with sum_i c_i * basis_i = target, if any.
fn coordinates(basis: &[Poly], target: &Poly) -> Option<Vec<u32>> {
    let f = target.field();
    let mut cols: Vec<Monomial> = basis.iter().chain(std::iter::once(target)).flat_map(|g| g.terms().map(|(m, _)| m.clone())).collect();
    cols.sort();
    cols.dedup();
    let a: Vec<Vec<u32>> = cols.iter().map(|m| basis.iter().map(|g| g.coeff(m)).collect()).collect();
    let b: Vec<u32> = cols.iter().map(|m| target.coeff(m)).collect();
    linalg::solve(&a, &b, basis.len(), f)
}

fn monomial_chunks(field: crate::ffpoly::FieldSpec, m: &Monomial, t: u32) -> Vec<Poly> {
    let n = m.nvars();
    let vars: Vec<usize> = m.exps().iter().enumerate().flat_map(|(i, &e)| std::iter::repeat_n(i, e as usize)).collect();
    vars.chunks(t.max(1) as usize)
        .map(|ch| {
            let mut exps = vec![0u16; n];
            for &i in ch {
                exps[i] += 1;
            }
            Poly::monomial(field, &exps, 1)
        })
        .collect()
}

/// Search for a small rk_t certificate.
///
/// One summand is decided exactly: the components must span a line through
/// some G, and G must factor into pieces of degree <= t. Larger r are tried
/// over a candidate pool (factorable homogeneous parts, split rank witnesses
/// of low-degree parts, and single monomials), so only r = 1 is ever proven
/// minimal.
pub fn rkt_search(ps: &[Poly], t: u32, r_max: u32, budget: u64) -> Result<RktSearch> {
    let (field, nvars) = tuple_context(ps)?;
    let nonzero: Vec<&Poly> = ps.iter().filter(|g| !g.is_zero()).collect();
    if nonzero.is_empty() {
        let cert = RktCertificate { t, summands: vec![], coefficients: vec![vec![]; ps.len()] };
        return Ok(RktSearch { certificate: Some(cert), lower: 0, budget_exceeded: false });
    }
    let mut budget_exceeded = false;
    let mut lower = 1u32;
    if r_max == 0 {
        return Ok(RktSearch { certificate: None, lower, budget_exceeded });
    }

    // level 1
    let g = nonzero[0].clone();
    let line = ps.iter().map(|q| coordinates(std::slice::from_ref(&g), q)).collect::<Option<Vec<_>>>();
    if let Some(coeffs) = line {
        match t_factor(&g, t, budget) {
            Ok(Some(factors)) => {
                let cert = RktCertificate { t, summands: vec![factors], coefficients: coeffs };
                return Ok(RktSearch { certificate: Some(cert), lower: 1, budget_exceeded });
            }
            Ok(None) => lower = 2,
            Err(_) => budget_exceeded = true,
        }
    } else {
        lower = 2;
    }

    // candidate pool
    let mut pool: Vec<Vec<Poly>> = Vec::new();
    let mut seen: Vec<Poly> = Vec::new();
    let mut push = |factors: Vec<Poly>, pool: &mut Vec<Vec<Poly>>| {
        let prod = product(field, nvars, &factors).monic();
        if !prod.is_zero() && !seen.contains(&prod) {
            seen.push(prod);
            pool.push(factors);
        }
    };
    for q in &nonzero {
        for h in q.homogeneous_parts().values() {
            if let Ok(Some(fs)) = t_factor(h, t, budget) {
                push(fs, &mut pool);
            }
            let d = h.deg();
            if d >= 2 && d <= 2 * t {
                let w: Option<RankWitness> = if d == 2 && field.p() % 2 == 1 {
                    rank_quadratic(h).ok().and_then(|b| b.witness)
                } else {
                    rank_bounded_search(h, r_max, budget).witness
                };
                for (a, b) in w.map(|w| w.summands).unwrap_or_default() {
                    let fa = t_factor(&a, t, budget).ok().flatten();
                    let fb = t_factor(&b, t, budget).ok().flatten();
                    if let (Some(mut fa), Some(fb)) = (fa, fb) {
                        fa.extend(fb);
                        push(fa, &mut pool);
                    }
                }
            }
        }
    }
    for q in &nonzero {
        for (m, _) in q.terms() {
            push(monomial_chunks(field, m, t), &mut pool);
        }
    }

    let prods: Vec<Poly> = pool.iter().map(|fs| product(field, nvars, fs)).collect();
    for r in lower.max(2)..=r_max {
        let r = r as usize;
        if r > pool.len() {
            break;
        }
        let combos = binomial(pool.len(), r);
        if combos > budget as u128 {
            budget_exceeded = true;
            break;
        }
        let mut idx: Vec<usize> = (0..r).collect();
        loop {
            let chosen: Vec<Poly> = idx.iter().map(|&i| prods[i].clone()).collect();
            if let Some(coeffs) = ps.iter().map(|q| coordinates(&chosen, q)).collect::<Option<Vec<_>>>() {
                let cert = RktCertificate { t, summands: idx.iter().map(|&i| pool[i].clone()).collect(), coefficients: coeffs };
                return Ok(RktSearch { certificate: Some(cert), lower, budget_exceeded });
            }
            if !next_combination(&mut idx, pool.len()) {
                break;
            }
        }
    }
    Ok(RktSearch { certificate: None, lower, budget_exceeded })
}

fn binomial(n: usize, k: usize) -> u128 {
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul((n - i) as u128) / (i as u128 + 1);
    }
    acc
}

fn next_combination(idx: &mut [usize], n: usize) -> bool {
    let k = idx.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if idx[i] < n - k + i {
            idx[i] += 1;
            for j in i + 1..k {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ffpoly::{parse_poly, FieldSpec};

    fn poly(s: &str, p: u32, n: usize) -> Poly {
        parse_poly(s, FieldSpec::new(p).unwrap(), n).unwrap()
    }

    #[test]
    fn square_has_rk2_one() {
        let q = poly("x1*x2 + x3*x4", 5, 4);
        let p = q.mul(&q);
        let cert = RktCertificate { t: 2, summands: vec![vec![q.clone(), q.clone()]], coefficients: vec![vec![1]] };
        assert!(rkt_verify(std::slice::from_ref(&p), &cert).valid);
        let bad = RktCertificate { t: 1, ..cert.clone() };
        assert!(!rkt_verify(std::slice::from_ref(&p), &bad).valid);
        let found = rkt_search(std::slice::from_ref(&p), 2, 2, 1 << 22).unwrap();
        let c = found.certificate.unwrap();
        assert_eq!(c.r(), 1);
        assert!(rkt_verify(&[p], &c).valid);
    }

    #[test]
    fn linear_sum_and_monomial() {
        let p = poly("x1 + x2", 5, 2);
        let cert = RktCertificate {
            t: 1,
            summands: vec![vec![poly("x1", 5, 2)], vec![poly("x2", 5, 2)]],
            coefficients: vec![vec![1, 1]],
        };
        assert!(rkt_verify(&[p], &cert).valid);
        let s = rkt_search(&[poly("x1*x2", 5, 2)], 1, 1, 1 << 20).unwrap();
        assert_eq!(s.certificate.unwrap().r(), 1);
    }

    #[test]
    fn rank_two_quadric_needs_two_linear_products() {
        let p = poly("x1*x2 + x3*x4", 3, 4);
        let s = rkt_search(std::slice::from_ref(&p), 1, 1, 1 << 20).unwrap();
        assert!(s.certificate.is_none());
        assert_eq!(s.lower, 2);
        let s = rkt_search(std::slice::from_ref(&p), 1, 2, 1 << 20).unwrap();
        let c = s.certificate.unwrap();
        assert_eq!(c.r(), 2);
        assert!(rkt_verify(&[p], &c).valid);
    }
}
