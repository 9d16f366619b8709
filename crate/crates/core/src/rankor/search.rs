//! Bounded witness search for the rank of forms of degree >= 2.
//!
//! Everything runs on the support variables of the form: if P = sum A_i B_i
//! uses other variables, setting them to zero keeps the identity (P does not
//! see them) and keeps each A_i, B_i a form or turns a product into zero, so a
//! witness of the same length exists on the support.
//!
//! Level r asks whether rk(P) <= r. For d = 2, and for d = 3 when d < p, every
//! reducible form has a linear factor, so rk(P) <= r iff P lies in the ideal of
//! r independent linear forms, iff P vanishes on their common kernel. The
//! search walks all r-dimensional row spaces in echelon form. For d >= 4 only
//! level 1 is complete: a linear factor, or a divisor of degree 2..=d/2.

use std::ops::ControlFlow;

use crate::ffpoly::{compose, Monomial, Poly};
use crate::field::{index_to_point, point_to_index};
use crate::linalg::{self, gaussian_binomial};

use super::divide::{find_divisor, mul_ring};
use super::{RankBound, RankStatus, RankValue, RankWitness};

/// Greedy cover of the monomials by variables: x_i times the monomials it
/// covers, divided by x_i. An upper bound on the rank of a form of degree >= 2.
pub fn hitting_set_witness(p: &Poly) -> RankWitness {
    let f = p.field();
    let n = p.nvars();
    let mut left: Vec<(Monomial, u32)> = p.terms().map(|(m, c)| (m.clone(), c)).collect();
    let mut summands = Vec::new();
    if p.deg() < 2 {
        return RankWitness { summands };
    }
    while !left.is_empty() {
        let best = (0..n).max_by_key(|&i| (left.iter().filter(|(m, _)| m.exps()[i] > 0).count(), std::cmp::Reverse(i))).unwrap();
        let xi = Monomial::var(n, best);
        let mut b = Poly::zero(f, n);
        left.retain(|(m, c)| {
            if m.exps()[best] > 0 {
                b.add_term(m.div_raw(&xi).unwrap(), *c);
                false
            } else {
                true
            }
        });
        summands.push((Poly::var(f, n, best), b));
    }
    RankWitness { summands }
}

/// Substitution matrices for a row space: T is invertible with first rows M,
/// and w = T x.
fn complete_basis(m: &[Vec<u32>], s: usize) -> Vec<Vec<u32>> {
    let mut t: Vec<Vec<u32>> = m.to_vec();
    let pivots: Vec<usize> = m.iter().map(|row| row.iter().position(|&c| c != 0).unwrap()).collect();
    for c in 0..s {
        if !pivots.contains(&c) {
            let mut e = vec![0u32; s];
            e[c] = 1;
            t.push(e);
        }
    }
    t
}

fn linear_form(f: crate::ffpoly::FieldSpec, coeffs: &[u32]) -> Poly {
    let n = coeffs.len();
    let mut out = Poly::zero(f, n);
    for (i, &c) in coeffs.iter().enumerate() {
        out.add_scaled_assign(&Poly::var(f, n, i), c);
    }
    out
}

/// Witness for a form of degree 2 vanishing on ker(M): with x = S w and
/// S = T^-1, q(Sw) = w^T (S^T A S) w as a ring identity, whatever p is.
fn quadratic_witness(q: &Poly, m: &[Vec<u32>]) -> Option<RankWitness> {
    let f = q.field();
    let s = q.nvars();
    let r = m.len();
    let t = complete_basis(m, s);
    let sinv = linalg::invert(&t, f)?;
    let mut a = vec![vec![0u32; s]; s];
    for (mono, c) in q.terms() {
        let idx: Vec<usize> = mono.exps().iter().enumerate().flat_map(|(i, &e)| std::iter::repeat_n(i, e as usize)).collect();
        if idx.len() != 2 {
            // x_i^2 reduced to x_i when p = 2: not a ring quadratic
            return None;
        }
        a[idx[0]][idx[1]] = c;
    }
    let mm = linalg::mat_mul(&linalg::mat_mul(&linalg::transpose(&sinv), &a, f), &sinv, f);
    let rows_w: Vec<Poly> = t.iter().map(|row| linear_form(f, row)).collect();
    let mut summands = Vec::new();
    for i in 0..s {
        let mut b = Poly::zero(f, s);
        b.add_scaled_assign(&rows_w[i], mm[i][i]);
        for j in i + 1..s {
            b.add_scaled_assign(&rows_w[j], f.add(mm[i][j], mm[j][i]));
        }
        if b.is_zero() {
            continue;
        }
        if i >= r {
            return None;
        }
        summands.push((rows_w[i].clone(), b));
    }
    Some(RankWitness { summands })
}

/// Witness for a form of degree d < p vanishing on ker(M), by composing with
/// T^-1 and grouping the terms of P(T^-1 w) by their first w_i, i < r.
fn composed_witness(q: &Poly, m: &[Vec<u32>]) -> Option<RankWitness> {
    let f = q.field();
    let s = q.nvars();
    let r = m.len();
    let t = complete_basis(m, s);
    let sinv = linalg::invert(&t, f)?;
    let x_of_w: Vec<Poly> = sinv.iter().map(|row| linear_form(f, row)).collect();
    let in_w = compose(q, &x_of_w).ok()?;
    let w_of_x: Vec<Poly> = t.iter().map(|row| linear_form(f, row)).collect();
    let mut groups: Vec<Poly> = vec![Poly::zero(f, s); r];
    for (mono, c) in in_w.terms() {
        let i = mono.exps().iter().position(|&e| e > 0)?;
        if i >= r {
            return None;
        }
        groups[i].add_term(mono.div_raw(&Monomial::var(s, i)).unwrap(), c);
    }
    let mut summands = Vec::new();
    for (i, g) in groups.iter().enumerate() {
        if g.is_zero() {
            continue;
        }
        let b = compose(g, &w_of_x).ok()?;
        summands.push((w_of_x[i].clone(), b));
    }
    Some(RankWitness { summands })
}

enum Level {
    Found(RankWitness),
    Exhausted,
    Incomplete,
}

/// Is q (on s = nvars variables, table given) in the ideal of r linear forms?
fn linear_level(q: &Poly, table: &[u32], r: usize, budget: u64) -> Level {
    let f = q.field();
    let p = f.p();
    let s = q.nvars();
    let spaces = gaussian_binomial(s, r, p);
    let per = (p as u128).pow((s - r) as u32);
    if spaces.saturating_mul(per) > budget as u128 {
        return Level::Incomplete;
    }
    let mut hit: Option<Vec<Vec<u32>>> = None;
    let mut coords = vec![0u32; s - r];
    let mut point = vec![0u32; s];
    let _ = linalg::for_each_rref(r, s, p, |m| {
        let ker = linalg::nullspace(m, s, f);
        coords.iter_mut().for_each(|c| *c = 0);
        loop {
            point.iter_mut().for_each(|x| *x = 0);
            for (c, v) in coords.iter().zip(&ker) {
                if *c != 0 {
                    for (x, &vi) in point.iter_mut().zip(v) {
                        *x = f.add(*x, f.mul(*c, vi));
                    }
                }
            }
            if table[point_to_index(&point, p)] != 0 {
                return ControlFlow::Continue(());
            }
            if !crate::field::next_point(&mut coords, p) {
                break;
            }
        }
        hit = Some(m.to_vec());
        ControlFlow::Break(())
    });
    match hit {
        None => Level::Exhausted,
        Some(m) => {
            let w = if q.deg() == 2 { quadratic_witness(q, &m) } else { composed_witness(q, &m) };
            match w {
                Some(w) if w.verify(q) => Level::Found(w),
                _ => Level::Incomplete,
            }
        }
    }
}

/// Rank by increasing levels up to r_max, with the variable cover as the
/// starting upper bound. Non-homogeneous input is replaced by its top part.
pub fn rank_bounded_search(poly: &Poly, r_max: u32, budget: u64) -> RankBound {
    let top = poly.top_part();
    let f = top.field();
    let n = top.nvars();
    if top.is_zero() {
        return RankBound::exact(RankValue::Finite(0), Some(RankWitness { summands: vec![] }));
    }
    let d = top.deg();
    if d == 1 {
        return RankBound::exact(RankValue::Infinite, None);
    }
    let vars = top.support_vars();
    let q = top.restrict(&vars);
    let s = vars.len();
    let lift = |w: RankWitness| RankWitness {
        summands: w.summands.into_iter().map(|(a, b)| (a.embed(n, &vars), b.embed(n, &vars))).collect(),
    };

    let cover = hitting_set_witness(&q);
    let mut upper = cover.len() as u32;
    let mut witness = cover;
    let mut lower = 1u32;
    let mut complete = true;
    let p = f.p();
    let linear_route = d == 2 || (d == 3 && d < p);
    let table = if linear_route || d < p { f.points(s).ok().filter(|&sz| sz as u64 <= budget).and_then(|_| q.table().ok()) } else { None };

    for r in 1..=r_max {
        if r >= upper {
            break;
        }
        let level = match (&table, linear_route) {
            (Some(t), true) => linear_level(&q, t, r as usize, budget),
            (Some(t), false) if r == 1 && d < p => {
                let mut lvl = linear_level(&q, t, 1, budget);
                if matches!(lvl, Level::Exhausted) {
                    for a in 2..=d / 2 {
                        match find_divisor(&q, a, budget) {
                            Ok(Some((x, y))) => {
                                let w = RankWitness { summands: vec![(x, y)] };
                                lvl = if w.verify(&q) && mul_ring(&w.summands[0].0, &w.summands[0].1).is_some() {
                                    Level::Found(w)
                                } else {
                                    Level::Incomplete
                                };
                                break;
                            }
                            Ok(None) => {}
                            Err(_) => {
                                lvl = Level::Incomplete;
                                break;
                            }
                        }
                    }
                }
                lvl
            }
            _ => Level::Incomplete,
        };
        match level {
            Level::Found(w) => {
                upper = r;
                witness = w;
                break;
            }
            Level::Exhausted => lower = r + 1,
            Level::Incomplete => {
                complete = false;
                break;
            }
        }
    }
    let status = if lower >= upper {
        RankStatus::Exact
    } else if complete {
        RankStatus::Bounded
    } else {
        RankStatus::Inconclusive
    };
    let lower = lower.min(upper);
    let _ = s;
    let _ = index_to_point;
    RankBound { lower: RankValue::Finite(lower), upper: RankValue::Finite(upper), witness: Some(lift(witness)), status }
}
