//! Decompositions P = F(X): the refinement step that trades a tuple of
//! low-rank forms for the factors of their witnesses, the rank-regularization
//! loop, and the weak-regularity pipeline built on top of it.

use num_traits::ToPrimitive;

use crate::error::{Error, Result};
use crate::ffpoly::{compose, tuple_context, tuple_degree, FieldSpec, Poly};
use crate::rankor::{RankOracle, RankVerdict, RankWitness};
use crate::rational::{ceil_nonneg, format_rational, Rational};
use crate::spaces::{express, low_rank_span, minimal_generating_subspace, tuple_member_fiber_test, FormSpace};
use crate::spectral::{bias, regularity_defect};

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Flags {
    /// No homogeneous strict subspace of Span(X) generates P.
    pub minimal: bool,
    /// Every outer monomial M satisfies deg M(X) <= deg P_i.
    pub pruned: bool,
    pub t_rank_regular: Option<Rational>,
    pub defect: Option<Rational>,
    pub epsilon: Option<Rational>,
    pub linearly_independent: bool,
    /// Every element of V \ U had |bias| <= eps * p^-k.
    pub bias_hypothesis: Option<bool>,
    /// |X| <= ((2t+1) d m)^(2^d) at the recorded t.
    pub size_bound_ok: Option<bool>,
}

/// One refinement: the top-degree forms of degree `degree` were replaced.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Round {
    pub index: usize,
    pub degree: u32,
    pub size_before: usize,
    pub size_after: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decomposition {
    pub field: FieldSpec,
    pub nvars: usize,
    pub x: Vec<Poly>,
    /// One outer map per component of P, each in |x| variables.
    pub outer: Vec<Poly>,
    pub flags: Flags,
    pub provenance: Vec<Round>,
}

impl Decomposition {
    pub fn k(&self) -> usize {
        self.x.len()
    }

    pub fn degree(&self) -> u32 {
        tuple_degree(&self.x)
    }

    /// compose(F_i, X) == P_i for every component.
    pub fn recomposes(&self, ps: &[Poly]) -> Result<bool> {
        if ps.len() != self.outer.len() {
            return Ok(false);
        }
        for (f, p) in self.outer.iter().zip(ps) {
            let q = if self.x.is_empty() { Poly::constant(self.field, self.nvars, f.constant_term()) } else { compose(f, &self.x)? };
            if q != *p {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Output of [`refine_step`]: X = L(B), B_i = Q_i(Y), X_k = F_k(Y).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Refinement {
    pub y: Vec<Poly>,
    pub basis: Vec<Poly>,
    pub l: Vec<Vec<u32>>,
    pub outer: Vec<Poly>,
}

/// Replaces a tuple of degree-d forms that is not t-rank-regular by the
/// factors of rank witnesses for a basis of low-rank elements.
pub fn refine_step(x: &[Poly], t: &Rational, oracle: &dyn RankOracle) -> Result<Refinement> {
    let (f, n) = tuple_context(x)?;
    if let Some(bad) = x.iter().find(|q| !q.is_form()) {
        return Err(Error::NotAForm(bad.to_string()));
    }
    let d = x[0].deg();
    if x.iter().any(|q| q.deg() != d) {
        return Err(Error::UnequalDegrees);
    }
    if d < 2 {
        return Err(Error::ActuallyRegular);
    }
    let r = x.len();
    let threshold = ceil_nonneg(&(t * Rational::from_integer(r as i128)));
    let v = FormSpace::span_of(f, n, x);
    let mut basis: Vec<Poly> = Vec::new();
    let mut witnesses: Vec<RankWitness> = Vec::new();
    for e in v.projective_elements()? {
        if basis.len() == v.dim() {
            break;
        }
        if FormSpace::span_of(f, n, &basis).contains(&e) {
            continue;
        }
        if let RankVerdict::Below(w) = oracle.rank_below(&e, threshold)? {
            if !w.verify(&e) {
                return Err(Error::VerificationFailed(format!("rank witness for {e} does not expand")));
            }
            basis.push(e);
            witnesses.push(w);
        }
    }
    if basis.len() < v.dim() {
        return Err(Error::ActuallyRegular);
    }
    let bspace = FormSpace::span_of(f, n, &basis);
    // coordinates of each X_k in terms of B: solve through the echelon basis
    let to_b: Vec<Vec<u32>> = basis.iter().map(|b| bspace.coordinates(b).unwrap()).collect();
    let inv = crate::linalg::invert(&crate::linalg::transpose(&to_b), f)
        .ok_or_else(|| Error::VerificationFailed("low-rank elements are not a basis".into()))?;
    let l: Vec<Vec<u32>> = x.iter().map(|xk| crate::linalg::mat_vec(&inv, &bspace.coordinates(xk).unwrap(), f)).collect();

    let mut y: Vec<Poly> = Vec::new();
    let mut slots: Vec<Vec<(usize, usize)>> = Vec::new();
    for w in &witnesses {
        let mut s = Vec::new();
        for (a, b) in &w.summands {
            s.push((y.len(), y.len() + 1));
            y.push(a.clone());
            y.push(b.clone());
        }
        slots.push(s);
    }
    let ry = y.len();
    let q: Vec<Poly> = slots
        .iter()
        .map(|s| {
            let mut qi = Poly::zero(f, ry);
            for &(a, b) in s {
                qi.add_scaled_assign(&Poly::var(f, ry, a).mul(&Poly::var(f, ry, b)), 1);
            }
            qi
        })
        .collect();
    let outer: Vec<Poly> = l
        .iter()
        .map(|row| {
            let mut fk = Poly::zero(f, ry);
            for (c, qi) in row.iter().zip(&q) {
                fk.add_scaled_assign(qi, *c);
            }
            fk
        })
        .collect();
    for (fk, xk) in outer.iter().zip(x) {
        if ry == 0 || compose(fk, &y)? != *xk {
            return Err(Error::VerificationFailed(format!("refined outer map does not recompose to {xk}")));
        }
    }
    if tuple_degree(&y) >= d {
        return Err(Error::VerificationFailed("refinement did not lower the degree".into()));
    }
    let bound = Rational::from_integer(2 * (r * r) as i128) * t;
    if Rational::from_integer(ry as i128) > bound {
        return Err(Error::VerificationFailed(format!("refinement produced {ry} forms, above 2 t r^2")));
    }
    Ok(Refinement { y, basis, l, outer })
}

fn constant_decomposition(ps: &[Poly], f: FieldSpec, n: usize) -> Decomposition {
    Decomposition {
        field: f,
        nvars: n,
        x: vec![],
        outer: ps.iter().map(|p| Poly::constant(f, 0, p.constant_term())).collect(),
        flags: Flags { minimal: true, pruned: true, linearly_independent: true, ..Flags::default() },
        provenance: vec![],
    }
}

fn check_char(ps: &[Poly], f: FieldSpec) -> Result<u32> {
    let d = tuple_degree(ps);
    if d >= f.p() {
        return Err(Error::CharTooSmall { degree: d, p: f.p() });
    }
    Ok(d)
}

/// log of ((2t+1) d m)^(2^d) compared with log |X|.
pub fn size_bound_holds(size: usize, t: &Rational, d: u32, m: usize) -> bool {
    if size <= 1 {
        return true;
    }
    let base = (2.0 * t.to_f64().unwrap_or(f64::INFINITY) + 1.0) * d as f64 * m as f64;
    if base <= 1.0 {
        return false;
    }
    (size as f64).ln() <= 2f64.powi(d as i32) * base.ln() + 1e-9
}

/// A minimal, t-rank-regular decomposition of P.
pub fn rank_regularize(ps: &[Poly], t: &Rational, oracle: &dyn RankOracle) -> Result<Decomposition> {
    let (f, n) = tuple_context(ps)?;
    let d = check_char(ps, f)?;
    if d == 0 {
        return Ok(constant_decomposition(ps, f, n));
    }
    let mut xi: Vec<Poly> = ps.iter().flat_map(|p| p.homogeneous_parts().into_iter().filter(|(e, _)| *e > 0).map(|(_, h)| h)).collect();
    let mut provenance: Vec<Round> = Vec::new();
    let y = loop {
        let v = FormSpace::span_of(f, n, &xi);
        let w = minimal_generating_subspace(ps, &v)?;
        let y: Vec<Poly> = w.basis().to_vec();
        if y.is_empty() {
            break y;
        }
        let ell = tuple_degree(&y);
        let threshold = ceil_nonneg(&(t * Rational::from_integer(y.len() as i128)));
        // top-degree test: U_R(V) = V exactly when U_R(V^top) = V^top
        let top = w.top();
        let u = low_rank_span(&top, threshold, oracle)?;
        if ell < 2 || u.dim() < top.dim() {
            break y;
        }
        let first_top = y.iter().find(|q| q.deg() == ell).unwrap().clone();
        let ystar: Vec<Poly> = y.iter().map(|q| if q.deg() == ell { q.clone() } else { first_top.clone() }).collect();
        let refined = refine_step(&ystar, t, oracle)?;
        let mut next = refined.y;
        next.extend(y.iter().filter(|q| q.deg() < ell).cloned());
        provenance.push(Round { index: provenance.len() + 1, degree: ell, size_before: y.len(), size_after: next.len() });
        if provenance.len() > d as usize {
            return Err(Error::RoundBoundViolated { bound: d });
        }
        xi = next;
    };
    let mut outer = Vec::with_capacity(ps.len());
    let mut pruned = true;
    for p in ps {
        let e = express(p, &y)?;
        pruned &= e.pruned;
        outer.push(e.outer);
    }
    let size_ok = size_bound_holds(y.len(), t, d, ps.len());
    let independent = FormSpace::span_of(f, n, &y).dim() == y.len();
    let dec = Decomposition {
        field: f,
        nvars: n,
        x: y,
        outer,
        flags: Flags {
            minimal: true,
            pruned,
            t_rank_regular: Some(*t),
            linearly_independent: independent,
            size_bound_ok: Some(size_ok),
            ..Flags::default()
        },
        provenance,
    };
    if !dec.recomposes(ps)? {
        return Err(Error::VerificationFailed("decomposition does not recompose".into()));
    }
    Ok(dec)
}

#[derive(Clone, Copy, Debug)]
pub struct WeakConfig {
    pub max_escalations: u32,
}

impl Default for WeakConfig {
    fn default() -> Self {
        WeakConfig { max_escalations: 6 }
    }
}

/// Orders a basis of V as (X_1, completion, basis of U) with X_1 the first
/// projective element of V^top outside U.
fn weak_basis(v: &FormSpace, u: &FormSpace) -> Result<Vec<Poly>> {
    let top = v.top();
    let x1 = top.projective_elements()?.into_iter().find(|e| !u.contains(e)).ok_or(Error::EmptyTop)?;
    let mut chosen = vec![x1.clone()];
    chosen.extend(u.basis().iter().cloned());
    let mut completion = Vec::new();
    for b in v.basis() {
        let mut all = chosen.clone();
        all.extend(completion.iter().cloned());
        if !FormSpace::span_of(v.field(), v.nvars(), &all).contains(b) {
            completion.push(b.clone());
        }
    }
    let mut out = vec![x1];
    out.extend(completion);
    out.extend(u.basis().iter().cloned());
    Ok(out)
}

/// Every projective element of V outside U, and every scalar multiple of
/// it, has |bias| <= eps * p^-k (with a float slack of 1e-12).
fn bias_hypothesis(v: &FormSpace, u: &FormSpace, eps: &Rational) -> Result<bool> {
    let f = v.field();
    let k = v.dim() as i32;
    let limit = eps.to_f64().unwrap_or(0.0) * (f.p() as f64).powi(-k) + 1e-12;
    for e in v.projective_elements()? {
        if u.contains(&e) {
            continue;
        }
        for c in 1..f.p() {
            if bias(&e.scale(c))?.norm() > limit {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// A weak eps-regular decomposition, certified by the exact defect and the
/// fiber test P not in F[X'], found by running the rank-regularity loop
/// with t = 1, 2, 4, ...
pub fn weak_regular_decompose(ps: &[Poly], eps: &Rational, config: &WeakConfig, oracle: &dyn RankOracle) -> Result<Decomposition> {
    let (f, n) = tuple_context(ps)?;
    if *eps <= Rational::from_integer(0) || *eps > Rational::from_integer(1) {
        return Err(Error::Invalid(format!("epsilon must lie in (0, 1], got {}", format_rational(eps))));
    }
    let d = check_char(ps, f)?;
    if d == 0 {
        let mut dec = constant_decomposition(ps, f, n);
        dec.flags.defect = Some(Rational::from_integer(0));
        dec.flags.epsilon = Some(*eps);
        return Ok(dec);
    }
    let mut best: Option<Rational> = None;
    let mut last_err: Option<Error> = None;
    for attempt in 0..=config.max_escalations {
        let t = Rational::from_integer(1i128 << attempt);
        let dec = match rank_regularize(ps, &t, oracle) {
            Ok(dec) => dec,
            Err(e @ Error::OracleInconclusive { .. }) => {
                last_err = Some(e);
                continue;
            }
            Err(e) => return Err(e),
        };
        let v = FormSpace::span_of(f, n, &dec.x);
        let k = v.dim();
        let u = match low_rank_span(&v, ceil_nonneg(&(t * Rational::from_integer(k as i128))), oracle) {
            Ok(u) => u,
            Err(e @ Error::OracleInconclusive { .. }) => {
                last_err = Some(e);
                continue;
            }
            Err(e) => return Err(e),
        };
        let basis = match weak_basis(&v, &u) {
            Ok(b) => b,
            Err(Error::EmptyTop) => {
                last_err = Some(Error::EmptyTop);
                continue;
            }
            Err(e) => return Err(e),
        };
        let hypothesis = bias_hypothesis(&v, &u, eps)?;
        let report = regularity_defect(&basis, eps)?;
        if best.is_none_or(|b| report.defect < b) {
            best = Some(report.defect);
        }
        if !report.verdict || tuple_member_fiber_test(ps, &basis[1..])? {
            continue;
        }
        let mut outer = Vec::with_capacity(ps.len());
        let mut pruned = true;
        for p in ps {
            let e = express(p, &basis)?;
            pruned &= e.pruned;
            outer.push(e.outer);
        }
        let out = Decomposition {
            field: f,
            nvars: n,
            x: basis,
            outer,
            flags: Flags {
                minimal: true,
                pruned,
                t_rank_regular: Some(t),
                defect: Some(report.defect),
                epsilon: Some(*eps),
                linearly_independent: !report.dependent,
                bias_hypothesis: Some(hypothesis),
                size_bound_ok: dec.flags.size_bound_ok,
            },
            provenance: dec.provenance,
        };
        if !out.recomposes(ps)? {
            return Err(Error::VerificationFailed("weak decomposition does not recompose".into()));
        }
        return Ok(out);
    }
    match (best, last_err) {
        (Some(b), _) => Err(Error::EscalationExhausted { attempts: config.max_escalations + 1, best_defect: format_rational(&b) }),
        (None, Some(e)) => Err(e),
        (None, None) => Err(Error::EscalationExhausted { attempts: config.max_escalations + 1, best_defect: "none".into() }),
    }
}
