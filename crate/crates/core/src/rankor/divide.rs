//! Ring-level multiplication and exact division, plus a bounded search for
//! divisors of small degree. Reduced polynomials of degree below p are
//! ordinary ring elements, so factorization questions make sense for them.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::ffpoly::{Monomial, Poly};

/// Product in the polynomial ring, or None if some exponent would reach p
/// (at which point the ring product and the function product disagree).
pub fn mul_ring(a: &Poly, b: &Poly) -> Option<Poly> {
    let f = a.field();
    let p = f.p();
    let mut out: BTreeMap<Monomial, u32> = BTreeMap::new();
    for (ma, ca) in a.terms() {
        for (mb, cb) in b.terms() {
            let m = ma.mul_raw(mb);
            if !m.is_reduced(p) {
                return None;
            }
            let e = out.entry(m).or_insert(0);
            *e = f.add(*e, f.mul(ca, cb));
        }
    }
    out.retain(|_, c| *c != 0);
    Some(Poly::from_map(f, a.nvars(), out))
}

/// Quotient q with num = q * den in the ring, if den divides num.
pub fn divide_exact(num: &Poly, den: &Poly) -> Option<Poly> {
    let f = num.field();
    let (lm, lc) = den.leading_term()?;
    let lm = lm.clone();
    let lc_inv = f.inv(lc);
    let mut rem = num.clone();
    let mut quot = Poly::zero(f, num.nvars());
    while let Some((m, c)) = rem.leading_term() {
        let qm = m.div_raw(&lm)?;
        let qc = f.mul(c, lc_inv);
        let mut term = Poly::zero(f, num.nvars());
        term.add_term(qm, qc);
        let prod = mul_ring(&term, den)?;
        rem = rem.sub(&prod);
        quot = quot.add(&term);
    }
    Some(quot)
}

/// Monomials in the listed variables with degree exactly `a` (or at most `a`
/// when `upto`), ascending.
pub(crate) fn monomials_in(nvars: usize, vars: &[usize], a: u32, upto: bool, p: u32) -> Vec<Monomial> {
    let mut out = Vec::new();
    let mut exps = vec![0u16; nvars];
    fn rec(i: usize, left: u32, vars: &[usize], exps: &mut Vec<u16>, upto: bool, p: u32, out: &mut Vec<Monomial>) {
        if i == vars.len() {
            if left == 0 || upto {
                out.push(Monomial::new(exps.clone()));
            }
            return;
        }
        for e in 0..=left.min(p - 1) {
            exps[vars[i]] = e as u16;
            rec(i + 1, left - e, vars, exps, upto, p, out);
        }
        exps[vars[i]] = 0;
    }
    rec(0, a, vars, &mut exps, upto, p, &mut out);
    out.sort();
    out
}

/// First monic divisor A of degree `a` (with its cofactor), searching
/// candidates in canonical order. When g is homogeneous only forms are tried,
/// which loses nothing since factors of forms are forms.
///
/// Two cheap filters run before the division: lm(A) | lm(g) and tm(A) | tm(g)
/// for the graded order, and A must not vanish where g does not.
pub fn find_divisor(g: &Poly, a: u32, budget: u64) -> Result<Option<(Poly, Poly)>> {
    let f = g.field();
    let p = f.p();
    let n = g.nvars();
    if g.is_zero() || a == 0 || a > g.deg() {
        return Ok(None);
    }
    let (lm_g, _) = g.leading_term().unwrap();
    let (tm_g, _) = g.trailing_term().unwrap();
    let (lm_g, tm_g) = (lm_g.clone(), tm_g.clone());
    let vars = g.support_vars();
    let homogeneous = g.is_homogeneous();
    let pool = monomials_in(n, &vars, a, !homogeneous, p);

    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut samples: Vec<Vec<u32>> = Vec::new();
    for _ in 0..256 {
        if samples.len() == 24 {
            break;
        }
        let x: Vec<u32> = (0..n).map(|_| rng.gen_range(0..p)).collect();
        if g.eval_unchecked(&x) != 0 {
            samples.push(x);
        }
    }

    let mut spent: u64 = 0;
    for (li, lead) in pool.iter().enumerate() {
        if lead.degree() != a || !lead.divides(&lm_g) {
            continue;
        }
        let lower = &pool[..li];
        let count = (p as u128).checked_pow(lower.len() as u32).unwrap_or(u128::MAX);
        if spent as u128 + count > budget as u128 {
            return Err(Error::BudgetExceeded { needed: spent as u128 + count, budget });
        }
        spent += count as u64;
        let mut coeffs = vec![0u32; lower.len()];
        loop {
            let tm = lower.iter().zip(&coeffs).find(|(_, &c)| c != 0).map_or(lead, |(m, _)| m);
            if tm.divides(&tm_g) {
                let mut terms: BTreeMap<Monomial, u32> = BTreeMap::new();
                terms.insert(lead.clone(), 1);
                for (m, &c) in lower.iter().zip(&coeffs) {
                    if c != 0 {
                        terms.insert(m.clone(), c);
                    }
                }
                let cand = Poly::from_map(f, n, terms);
                if samples.iter().all(|x| cand.eval_unchecked(x) != 0) {
                    if let Some(q) = divide_exact(g, &cand) {
                        return Ok(Some((cand, q)));
                    }
                }
            }
            if !crate::field::next_point(&mut coeffs, p) {
                break;
            }
        }
    }
    Ok(None)
}

/// Splits g into factors of degree at most t, or None if some irreducible
/// factor is larger. Unique factorization makes the greedy choice of a
/// smallest-degree divisor complete. A constant factor is folded into the
/// first piece; a constant g is the empty product times itself.
pub fn t_factor(g: &Poly, t: u32, budget: u64) -> Result<Option<Vec<Poly>>> {
    if g.is_constant() {
        return Ok(Some(if g.constant_term() == 1 { vec![] } else { vec![g.clone()] }));
    }
    let mut pieces = Vec::new();
    let mut rest = g.clone();
    while rest.deg() > t {
        let mut found = None;
        for a in 1..=t.min(rest.deg() / 2).max(1) {
            if let Some(pair) = find_divisor(&rest, a, budget)? {
                found = Some(pair);
                break;
            }
        }
        // no divisor of degree <= t: any divisor's cofactor chain would need
        // an irreducible factor of degree > t
        let Some((a, q)) = found else {
            return Ok(None);
        };
        pieces.push(a);
        rest = q;
    }
    pieces.push(rest);
    // a degree-0 remainder is a scalar; fold it in
    if pieces.len() > 1 && pieces.last().unwrap().is_constant() {
        let c = pieces.pop().unwrap().constant_term();
        pieces[0] = pieces[0].scale(c);
    }
    Ok(Some(pieces))
}
