//! Images of polynomial maps, lines and low-degree curves inside them, and
//! the curve that a weak regular decomposition produces.

use crate::error::{Error, Result};
use crate::ffpoly::{compose, tuple_context, tuple_degree, FieldSpec, Poly};
use crate::field::{index_to_point, next_point, point_to_index};
use crate::linalg;
use crate::regularize::Decomposition;
use crate::spectral::{joint_distribution, Line};

/// A subset of F_p^m stored as a membership table (first coordinate least
/// significant).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PointSet {
    pub p: u32,
    pub m: usize,
    member: Vec<bool>,
}

impl PointSet {
    pub fn from_points(f: FieldSpec, m: usize, points: &[Vec<u32>]) -> Result<Self> {
        let mut member = vec![false; f.points(m)?];
        for y in points {
            if y.len() != m {
                return Err(Error::DimensionMismatch { expected: m, got: y.len() });
            }
            member[point_to_index(y, f.p())] = true;
        }
        Ok(PointSet { p: f.p(), m, member })
    }

    pub fn contains(&self, y: &[u32]) -> bool {
        self.member[point_to_index(y, self.p)]
    }

    pub fn len(&self) -> usize {
        self.member.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn points(&self) -> Vec<Vec<u32>> {
        let mut y = vec![0u32; self.m];
        (0..self.member.len())
            .filter(|&i| self.member[i])
            .map(|i| {
                index_to_point(i, self.p, self.m, &mut y);
                y.clone()
            })
            .collect()
    }

    pub fn is_subset(&self, other: &PointSet) -> bool {
        self.member.iter().zip(&other.member).all(|(&a, &b)| !a || b)
    }
}

pub fn image(ps: &[Poly]) -> Result<PointSet> {
    let (f, _) = tuple_context(ps)?;
    let joint = joint_distribution(ps)?;
    Ok(PointSet { p: f.p(), m: ps.len(), member: joint.counts.iter().map(|&c| c > 0).collect() })
}

/// First line inside S, scanning projective directions and then offsets
/// normalized to 0 at the pivot of the direction.
pub fn contains_line(s: &PointSet) -> Result<Option<Line>> {
    let f = FieldSpec::new(s.p)?;
    let p = s.p;
    let m = s.m;
    if m == 0 {
        return Ok(None);
    }
    let work = linalg::projective_count(m, p) * (p as u128).pow(m as u32);
    f.check_budget(work)?;
    for dir in linalg::projective_vectors(m, p) {
        let j = dir.iter().position(|&c| c != 0).unwrap();
        let mut rest = vec![0u32; m - 1];
        loop {
            let mut offset = Vec::with_capacity(m);
            offset.extend_from_slice(&rest[..j]);
            offset.push(0);
            offset.extend_from_slice(&rest[j..]);
            let line = Line { direction: dir.clone(), offset };
            if line.points(f).iter().all(|y| s.contains(y)) {
                return Ok(Some(line));
            }
            if !next_point(&mut rest, p) {
                break;
            }
        }
    }
    Ok(None)
}

/// A univariate curve t -> (U_1(t), ..., U_m(t)).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Curve {
    pub coords: Vec<Poly>,
}

impl Curve {
    pub fn degree(&self) -> u32 {
        tuple_degree(&self.coords)
    }

    pub fn field(&self) -> FieldSpec {
        self.coords[0].field()
    }

    /// values()[t] is the point U(t).
    pub fn values(&self) -> Vec<Vec<u32>> {
        let p = self.field().p();
        (0..p).map(|t| self.coords.iter().map(|c| c.eval_unchecked(&[t])).collect()).collect()
    }

    /// Checked on all p values rather than by degree.
    pub fn is_nonconstant(&self) -> bool {
        let v = self.values();
        v.iter().any(|y| *y != v[0])
    }

    pub fn image(&self) -> Result<PointSet> {
        PointSet::from_points(self.field(), self.coords.len(), &self.values())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Udeg {
    /// None stands for infinity (constant maps).
    pub u: Option<u32>,
    pub witness: Option<Curve>,
}

impl std::fmt::Display for Udeg {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.u {
            Some(u) => write!(f, "{u}"),
            None => f.write_str("inf"),
        }
    }
}

fn univariate(f: FieldSpec, coeffs: &[u32]) -> Poly {
    let mut out = Poly::zero(f, 1);
    for (e, &c) in coeffs.iter().enumerate() {
        out.add_scaled_assign(&Poly::monomial(f, &[e as u16], 1), c);
    }
    out
}

/// Curve obtained by freezing every variable but x_i, at the first point
/// that leaves it nonconstant.
fn frozen_curve(ps: &[Poly], i: usize) -> Result<Option<Curve>> {
    let (f, n) = tuple_context(ps)?;
    f.check_budget(f.power_count(n).unwrap_or(u128::MAX))?;
    let mut rest = vec![0u32; n - 1];
    loop {
        let vars: Vec<Poly> = (0..n)
            .map(|v| match v.cmp(&i) {
                std::cmp::Ordering::Equal => Poly::var(f, 1, 0),
                std::cmp::Ordering::Less => Poly::constant(f, 1, rest[v]),
                std::cmp::Ordering::Greater => Poly::constant(f, 1, rest[v - 1]),
            })
            .collect();
        let coords = ps.iter().map(|q| compose(q, &vars)).collect::<Result<Vec<_>>>()?;
        let c = Curve { coords };
        if c.is_nonconstant() {
            return Ok(Some(c));
        }
        if !next_point(&mut rest, f.p()) {
            return Ok(None);
        }
    }
}

/// Least degree of a nonconstant curve inside the image, with the first
/// witness in enumeration order. Levels u = 1, 2, ... are searched up to the
/// cap min_i deg_i(P), where freezing all variables but one already gives a
/// witness. Within a level, coordinates are filled one at a time and a
/// prefix is dropped as soon as some U(t) leaves the projection of the image.
pub fn udeg(ps: &[Poly]) -> Result<Udeg> {
    let (f, _) = tuple_context(ps)?;
    let p = f.p();
    let m = ps.len();
    let img = image(ps)?;
    if img.len() <= 1 {
        return Ok(Udeg { u: None, witness: None });
    }
    let support: Vec<usize> = {
        let mut s: Vec<usize> = ps.iter().flat_map(|q| q.support_vars()).collect();
        s.sort_unstable();
        s.dedup();
        s
    };
    let (cap, cap_var) = support.iter().map(|&i| (ps.iter().map(|q| q.deg_in(i)).max().unwrap(), i)).min().unwrap();

    // prefix projections of the image
    let mut prefixes: Vec<std::collections::HashSet<Vec<u32>>> = vec![Default::default(); m];
    for y in img.points() {
        for j in 0..m {
            prefixes[j].insert(y[..=j].to_vec());
        }
    }
    let mut visits: u64 = 0;
    for u in 1..cap {
        // all univariate polynomials of degree <= u with their value tables
        f.check_budget((p as u128).pow(u + 1))?;
        let mut cands: Vec<(Vec<u32>, Vec<u32>)> = Vec::new();
        let mut c = vec![0u32; u as usize + 1];
        loop {
            let vals: Vec<u32> = (0..p).map(|t| c.iter().rev().fold(0, |acc, &a| f.add(f.mul(acc, t), a))).collect();
            cands.push((c.clone(), vals));
            if !next_point(&mut c, p) {
                break;
            }
        }
        let mut chosen: Vec<usize> = Vec::with_capacity(m);
        if let Some(found) = dfs(&cands, &prefixes, &mut chosen, m, p, &mut visits, f.budget())? {
            let coords = found.iter().map(|&i| univariate(f, &cands[i].0)).collect();
            let curve = Curve { coords };
            let u_found = curve.degree();
            return Ok(Udeg { u: Some(u_found), witness: Some(curve) });
        }
    }
    let curve = frozen_curve(ps, cap_var)?.ok_or_else(|| Error::VerificationFailed("no nonconstant frozen curve".into()))?;
    if !curve.image()?.is_subset(&img) {
        return Err(Error::VerificationFailed("frozen curve leaves the image".into()));
    }
    Ok(Udeg { u: Some(curve.degree()), witness: Some(curve) })
}

fn dfs(
    cands: &[(Vec<u32>, Vec<u32>)],
    prefixes: &[std::collections::HashSet<Vec<u32>>],
    chosen: &mut Vec<usize>,
    m: usize,
    p: u32,
    visits: &mut u64,
    budget: u64,
) -> Result<Option<Vec<usize>>> {
    let j = chosen.len();
    if j == m {
        let nonconstant = (1..p as usize).any(|t| chosen.iter().any(|&i| cands[i].1[t] != cands[i].1[0]));
        return Ok(nonconstant.then(|| chosen.clone()));
    }
    for i in 0..cands.len() {
        *visits += 1;
        if *visits > budget {
            return Err(Error::BudgetExceeded { needed: *visits as u128, budget });
        }
        chosen.push(i);
        let ok = (0..p as usize).all(|t| {
            let pre: Vec<u32> = chosen.iter().map(|&c| cands[c].1[t]).collect();
            prefixes[j].contains(&pre)
        });
        if ok {
            if let Some(found) = dfs(cands, prefixes, chosen, m, p, visits, budget)? {
                return Ok(Some(found));
            }
        }
        chosen.pop();
    }
    Ok(None)
}

/// Point y with F(y) != 0 maximizing Pr[X = y], with the counts needed to
/// check Pr[F != 0] * Pr[X = y] >= (1 - d/p) p^-k.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SzWitness {
    pub y: Vec<u32>,
    /// #{x : X(x) = y}
    pub count: u64,
    /// #{y : F(y) != 0}
    pub nonroots: u64,
    pub holds: bool,
}

pub fn sz_witness(p_poly: &Poly, outer: &Poly, x: &[Poly]) -> Result<SzWitness> {
    if p_poly.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    let f = p_poly.field();
    let n = p_poly.nvars();
    let k = x.len();
    if outer.nvars() != k {
        return Err(Error::DimensionMismatch { expected: k, got: outer.nvars() });
    }
    let d = p_poly.deg() as i128;
    let pp = f.p() as i128;
    let total = f.points(n)? as i128;
    if k == 0 {
        let nonroots = u64::from(outer.constant_term() != 0);
        let holds = nonroots as i128 * total * pp >= (pp - d) * total;
        return Ok(SzWitness { y: vec![], count: total as u64, nonroots, holds });
    }
    if compose(outer, x)? != *p_poly {
        return Err(Error::Invalid("outer map does not recompose to the polynomial".into()));
    }
    let joint = joint_distribution(x)?;
    let ftab = outer.table()?;
    let nonroots = ftab.iter().filter(|&&v| v != 0).count() as u64;
    let (best, count) = ftab
        .iter()
        .enumerate()
        .filter(|(_, &v)| v != 0)
        .map(|(i, _)| (i, joint.counts[i]))
        .fold((usize::MAX, 0u64), |acc, (i, c)| if acc.0 == usize::MAX || c > acc.1 { (i, c) } else { acc });
    let mut y = vec![0u32; k];
    index_to_point(best, f.p(), k, &mut y);
    let holds = nonroots as i128 * count as i128 * pp >= (pp - d) * total;
    Ok(SzWitness { y, count, nonroots, holds })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CurveExtraction {
    pub curve: Curve,
    /// Component j with deg_1(F_j) > 0 and the power i >= 1 of X_1 used.
    pub component: usize,
    pub power: u32,
    pub line: Line,
    pub sz: SzWitness,
    pub line_in_image: bool,
    pub image_contained: bool,
    /// deg U * deg X <= deg P
    pub degree_bound_ok: bool,
}

/// Splits F(t, y') = sum_i t^i C_i(y').
fn coefficients_in_first(outer: &Poly) -> Vec<Poly> {
    let f = outer.field();
    let k = outer.nvars();
    let mut out: Vec<Poly> = vec![Poly::zero(f, k - 1); outer.deg_in(0) as usize + 1];
    for (m, c) in outer.terms() {
        let e = m.exps()[0] as usize;
        out[e].add_scaled_assign(&Poly::monomial(f, &m.exps()[1..], 1), c);
    }
    out
}

/// The curve U(t) = F(t, y_0) from a certified decomposition: a component
/// depending on X_1, a power t^i whose coefficient C_i(X') is nonzero, and
/// y_0 maximizing Pr[X' = y_0] among non-roots of C_i.
pub fn extract_curve(dec: &Decomposition, ps: &[Poly]) -> Result<CurveExtraction> {
    let f = dec.field;
    let k = dec.x.len();
    if k == 0 {
        return Err(Error::NoDependentComponent);
    }
    let tail = &dec.x[1..];
    let mut pick = None;
    'outer: for (j, fj) in dec.outer.iter().enumerate() {
        if fj.deg_in(0) == 0 {
            continue;
        }
        let cs = coefficients_in_first(fj);
        for (i, c) in cs.iter().enumerate().skip(1) {
            if c.is_zero() {
                continue;
            }
            let cx = if tail.is_empty() { Poly::constant(f, dec.nvars, c.constant_term()) } else { compose(c, tail)? };
            if !cx.is_zero() {
                pick = Some((j, i as u32, c.clone(), cx));
                break 'outer;
            }
        }
    }
    let (component, power, c, cx) = pick.ok_or(Error::NoDependentComponent)?;
    let sz = sz_witness(&cx, &c, tail)?;
    let mut offset = vec![0u32];
    offset.extend_from_slice(&sz.y);
    let line = Line::axis(f, &offset);
    let subst: Vec<Poly> =
        std::iter::once(Poly::var(f, 1, 0)).chain(sz.y.iter().map(|&v| Poly::constant(f, 1, v))).collect();
    let coords = dec.outer.iter().map(|fo| compose(fo, &subst)).collect::<Result<Vec<_>>>()?;
    let curve = Curve { coords };
    if !curve.is_nonconstant() {
        return Err(Error::VerificationFailed("extracted curve is constant".into()));
    }
    let img_x = image(&dec.x)?;
    let line_in_image = line.points(f).iter().all(|y| img_x.contains(y));
    let image_contained = curve.image()?.is_subset(&image(ps)?);
    let degree_bound_ok = curve.degree() * dec.degree() <= tuple_degree(ps);
    Ok(CurveExtraction { curve, component, power, line, sz, line_in_image, image_contained, degree_bound_ok })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ffpoly::parse_poly;

    fn polys(ss: &[&str], p: u32, n: usize) -> Vec<Poly> {
        ss.iter().map(|s| parse_poly(s, FieldSpec::new(p).unwrap(), n).unwrap()).collect()
    }

    #[test]
    fn images() {
        assert_eq!(image(&polys(&["x1^2"], 5, 1)).unwrap().points(), vec![vec![0], vec![1], vec![4]]);
        assert_eq!(image(&polys(&["x1"], 5, 1)).unwrap().len(), 5);
        assert_eq!(image(&polys(&["3"], 5, 2)).unwrap().points(), vec![vec![3]]);
    }

    #[test]
    fn lines_in_sets() {
        let f = FieldSpec::new(5).unwrap();
        let axis: Vec<Vec<u32>> = (0..5).map(|t| vec![t, 0]).collect();
        let s = PointSet::from_points(f, 2, &axis).unwrap();
        assert_eq!(contains_line(&s).unwrap().unwrap().direction, vec![1, 0]);
        assert!(contains_line(&image(&polys(&["x1^2"], 5, 1)).unwrap()).unwrap().is_none());
        assert!(contains_line(&image(&polys(&["x1^2", "x1"], 5, 1)).unwrap()).unwrap().is_none());
    }

    #[test]
    fn udeg_examples() {
        assert_eq!(udeg(&polys(&["x1^2"], 5, 1)).unwrap().u, Some(2));
        assert_eq!(udeg(&polys(&["x1"], 5, 1)).unwrap().u, Some(1));
        let r = udeg(&polys(&["x1^4"], 5, 1)).unwrap();
        assert_eq!(r.u, Some(4));
        assert!(r.witness.unwrap().image().unwrap().is_subset(&image(&polys(&["x1^4"], 5, 1)).unwrap()));
        assert_eq!(udeg(&polys(&["2"], 5, 1)).unwrap().u, None);
    }

    #[test]
    fn sz_examples() {
        let p = polys(&["x1"], 5, 1);
        let w = sz_witness(&p[0], &polys(&["x1"], 5, 1)[0], &p).unwrap();
        assert!(w.holds && w.y != vec![0]);
        let z = Poly::zero(FieldSpec::new(5).unwrap(), 1);
        assert_eq!(sz_witness(&z, &z, &p), Err(Error::ZeroPolynomial));
    }

    #[test]
    fn curve_from_square_of_quadric() {
        use crate::rankor::StandardOracle;
        use crate::regularize::{weak_regular_decompose, WeakConfig};
        let q = polys(&["x1*x2 + x3*x4"], 5, 4).remove(0);
        let ps = vec![q.mul(&q)];
        let eps = crate::Rational::new(1, 2);
        let dec = weak_regular_decompose(&ps, &eps, &WeakConfig::default(), &StandardOracle::default()).unwrap();
        let ex = extract_curve(&dec, &ps).unwrap();
        assert_eq!(ex.curve.degree(), 2);
        assert!(ex.curve.is_nonconstant() && ex.image_contained && ex.degree_bound_ok && ex.line_in_image);
        assert_eq!(ex.curve.image().unwrap().points(), vec![vec![0], vec![1], vec![4]]);
    }
}
