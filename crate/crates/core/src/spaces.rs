//! Linear spaces of polynomials: canonical bases, functional membership
//! P ∈ F[X] via fibers, explicit outer maps, low-rank spans and minimal
//! generating subspaces.

use std::collections::{BTreeMap, HashMap};

use crate::error::{Error, Result};
use crate::ffpoly::{interpolate, tuple_degree, FieldSpec, Monomial, Poly};
use crate::linalg;
use crate::rankor::{RankOracle, RankVerdict};

/// A subspace of polynomials held by its reduced row echelon basis, where
/// columns are monomials in decreasing graded-lex order. The basis is
/// therefore canonical: equal spaces have identical bases.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FormSpace {
    field: FieldSpec,
    nvars: usize,
    basis: Vec<Poly>,
}

impl FormSpace {
    pub fn zero(field: FieldSpec, nvars: usize) -> Self {
        FormSpace { field, nvars, basis: Vec::new() }
    }

    /// Span of arbitrary polynomials (zeros are ignored).
    pub fn span_of(field: FieldSpec, nvars: usize, polys: &[Poly]) -> Self {
        let mut cols: Vec<Monomial> = polys.iter().flat_map(|q| q.terms().map(|(m, _)| m.clone())).collect();
        cols.sort_unstable_by(|a, b| b.cmp(a));
        cols.dedup();
        let index: HashMap<&Monomial, usize> = cols.iter().enumerate().map(|(i, m)| (m, i)).collect();
        let mut rows: Vec<Vec<u32>> = polys
            .iter()
            .filter(|q| !q.is_zero())
            .map(|q| {
                let mut r = vec![0u32; cols.len()];
                for (m, c) in q.terms() {
                    r[index[m]] = c;
                }
                r
            })
            .collect();
        linalg::rref(&mut rows, field);
        let basis = rows
            .iter()
            .map(|r| {
                let mut q = Poly::zero(field, nvars);
                for (j, &c) in r.iter().enumerate() {
                    if c != 0 {
                        q.add_term(cols[j].clone(), c);
                    }
                }
                q
            })
            .collect();
        FormSpace { field, nvars, basis }
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn basis(&self) -> &[Poly] {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn degree(&self) -> u32 {
        tuple_degree(&self.basis)
    }

    /// Every basis row homogeneous. For an echelon basis over graded columns
    /// this is the same as the space being the direct sum of its components.
    pub fn is_homogeneous(&self) -> bool {
        self.basis.iter().all(Poly::is_homogeneous)
    }

    /// Basis split by degree (meaningful for homogeneous spaces).
    pub fn per_degree(&self) -> BTreeMap<u32, Vec<Poly>> {
        let mut out: BTreeMap<u32, Vec<Poly>> = BTreeMap::new();
        for b in &self.basis {
            out.entry(b.deg()).or_default().push(b.clone());
        }
        out
    }

    pub fn component(&self, e: u32) -> FormSpace {
        let basis = self.basis.iter().filter(|b| b.deg() == e && b.is_homogeneous()).cloned().collect();
        FormSpace { field: self.field, nvars: self.nvars, basis }
    }

    /// The top-degree component V^↑.
    pub fn top(&self) -> FormSpace {
        self.component(self.degree())
    }

    /// Coordinates with respect to the basis, if the polynomial lies in the
    /// space. Pivot coefficients read off the coordinates directly.
    pub fn coordinates(&self, q: &Poly) -> Option<Vec<u32>> {
        let mut coords = Vec::with_capacity(self.basis.len());
        let mut rest = q.clone();
        for b in &self.basis {
            let (lm, _) = b.leading_term().expect("basis rows are nonzero");
            let c = q.coeff(lm);
            coords.push(c);
            rest.add_scaled_assign(b, self.field.neg(c));
        }
        rest.is_zero().then_some(coords)
    }

    pub fn contains(&self, q: &Poly) -> bool {
        self.coordinates(q).is_some()
    }

    pub fn contains_space(&self, other: &FormSpace) -> bool {
        other.basis.iter().all(|b| self.contains(b))
    }

    pub fn element(&self, coeffs: &[u32]) -> Poly {
        let mut out = Poly::zero(self.field, self.nvars);
        for (b, &c) in self.basis.iter().zip(coeffs) {
            out.add_scaled_assign(b, c);
        }
        out
    }

    /// One representative per line through the origin, in canonical order.
    pub fn projective_elements(&self) -> Result<Vec<Poly>> {
        self.field.check_budget(linalg::projective_count(self.dim(), self.field.p()))?;
        Ok(linalg::projective_vectors(self.dim(), self.field.p()).iter().map(|c| self.element(c)).collect())
    }

    pub fn tables(&self) -> Result<Vec<Vec<u32>>> {
        self.basis.iter().map(Poly::table).collect()
    }
}

/// Canonical basis of the span of a list of forms.
pub fn span_basis(forms: &[Poly]) -> Result<FormSpace> {
    let first = forms.first().ok_or_else(|| Error::Invalid("span of an empty list".into()))?;
    for q in forms {
        if !q.is_form() {
            return Err(Error::NotAForm(q.to_string()));
        }
    }
    Ok(FormSpace::span_of(first.field(), first.nvars(), forms))
}

/// Labels points of F_p^n by the value of a tuple seen so far; refining by
/// one more value table keeps the labels dense.
#[derive(Clone, Debug)]
pub struct Partition {
    ids: Vec<u32>,
    classes: u32,
}

impl Partition {
    pub fn trivial(points: usize) -> Self {
        Partition { ids: vec![0; points], classes: 1 }
    }

    pub fn from_tables(points: usize, tables: &[Vec<u32>], p: u32) -> Self {
        let mut part = Partition::trivial(points);
        for t in tables {
            part.refine(t, p);
        }
        part
    }

    pub fn refine(&mut self, values: &[u32], p: u32) {
        let mut relabel = vec![u32::MAX; self.classes as usize * p as usize];
        let mut next = 0u32;
        for (id, &v) in self.ids.iter_mut().zip(values) {
            let slot = &mut relabel[*id as usize * p as usize + v as usize];
            if *slot == u32::MAX {
                *slot = next;
                next += 1;
            }
            *id = *slot;
        }
        self.classes = next;
    }

    pub fn ids(&self) -> &[u32] {
        &self.ids
    }

    pub fn classes(&self) -> u32 {
        self.classes
    }

    /// True when the table is constant on every class.
    pub fn determines(&self, table: &[u32]) -> bool {
        let mut seen = vec![u32::MAX; self.classes as usize];
        for (&id, &v) in self.ids.iter().zip(table) {
            let s = &mut seen[id as usize];
            if *s == u32::MAX {
                *s = v;
            } else if *s != v {
                return false;
            }
        }
        true
    }
}

/// Whether P is a function of X: one pass over F_p^n bucketing by X-value.
pub fn member_fiber_test(p: &Poly, x: &[Poly]) -> Result<bool> {
    tuple_member_fiber_test(std::slice::from_ref(p), x)
}

pub fn tuple_member_fiber_test(ps: &[Poly], x: &[Poly]) -> Result<bool> {
    let Some(first) = ps.first() else {
        return Ok(true);
    };
    let f = first.field();
    let points = f.points(first.nvars())?;
    let tables = x.iter().map(Poly::table).collect::<Result<Vec<_>>>()?;
    let part = Partition::from_tables(points, &tables, f.p());
    for q in ps {
        if !part.determines(&q.table()?) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Outer map produced by [`express`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Expressed {
    pub outer: Poly,
    /// Every monomial M of `outer` satisfies deg M(X) <= deg P.
    pub pruned: bool,
}

/// Reduced monomials in k variables with sum_j m_j * weights[j] <= bound,
/// in increasing graded-lex order.
fn weighted_monomials(weights: &[u32], bound: u32, p: u32) -> Vec<Monomial> {
    fn rec(j: usize, weights: &[u32], left: u32, p: u32, cur: &mut Vec<u16>, out: &mut Vec<Monomial>) {
        if j == weights.len() {
            out.push(Monomial::new(cur.clone()));
            return;
        }
        let mut e = 0u32;
        while e < p && e * weights[j] <= left {
            cur.push(e as u16);
            rec(j + 1, weights, left - e * weights[j], p, cur, out);
            cur.pop();
            e += 1;
        }
    }
    let mut out = Vec::new();
    rec(0, weights, bound, p, &mut Vec::new(), &mut out);
    out.sort();
    out
}

/// Finds F with F(X) = P as functions.
///
/// For a form tuple X the outer map is solved for inside the monomials M
/// with deg M(X) <= deg P, so the result is pruned by construction. If no
/// such F exists (possible only when some deg M(X) reaches p and Frobenius
/// reduction mixes degrees), the plain interpolant is returned unpruned.
pub fn express(p: &Poly, x: &[Poly]) -> Result<Expressed> {
    let f = p.field();
    let n = p.nvars();
    let k = x.len();
    for xi in x {
        if xi.nvars() != n {
            return Err(Error::DimensionMismatch { expected: n, got: xi.nvars() });
        }
    }
    if p.is_constant() {
        return Ok(Expressed { outer: Poly::constant(f, k, p.constant_term()), pruned: true });
    }
    let points = f.points(n)?;
    let cells = f.points(k)?;
    let ptab = p.table()?;
    let xtabs = x.iter().map(Poly::table).collect::<Result<Vec<_>>>()?;
    let pw = f.p() as usize;
    let keys: Vec<usize> = (0..points)
        .map(|i| xtabs.iter().rev().fold(0usize, |acc, t| acc * pw + t[i] as usize))
        .collect();
    let mut fiber = vec![u32::MAX; cells];
    for (i, &key) in keys.iter().enumerate() {
        let slot = &mut fiber[key];
        if *slot == u32::MAX {
            *slot = ptab[i];
        } else if *slot != ptab[i] {
            return Err(Error::NotAMember);
        }
    }
    let recomposes = |outer: &Poly| -> Result<bool> {
        let otab = outer.table()?;
        Ok(keys.iter().zip(&ptab).all(|(&key, &v)| otab[key] == v))
    };

    if k > 0 && x.iter().all(Poly::is_form) {
        let weights: Vec<u32> = x.iter().map(Poly::deg).collect();
        let support = weighted_monomials(&weights, p.deg(), f.p());
        if let Some(outer) = solve_on_image(&fiber, &support, k, f) {
            if recomposes(&outer)? {
                return Ok(Expressed { outer, pruned: true });
            }
        }
    }
    let table: Vec<u32> = fiber.iter().map(|&v| if v == u32::MAX { 0 } else { v }).collect();
    let outer = interpolate(&table, k, f)?;
    if !recomposes(&outer)? {
        return Err(Error::PruneVerificationFailed);
    }
    Ok(Expressed { outer, pruned: false })
}

/// Least-support solution of sum_M c_M M(y) = value(y) over the image points,
/// by incremental elimination that stops once the system has full rank.
fn solve_on_image(fiber: &[u32], support: &[Monomial], k: usize, f: FieldSpec) -> Option<Poly> {
    let ncols = support.len();
    let mut echelon: Vec<(usize, Vec<u32>)> = Vec::new();
    let mut pt = vec![0u32; k];
    let pows: Vec<Vec<u32>> = (0..f.p()).map(|a| (0..f.p()).map(|e| f.pow(a, e as u64)).collect()).collect();
    for (idx, &v) in fiber.iter().enumerate() {
        if v == u32::MAX {
            continue;
        }
        if echelon.len() == ncols {
            break;
        }
        crate::field::index_to_point(idx, f.p(), k, &mut pt);
        let mut row: Vec<u32> = support
            .iter()
            .map(|m| m.exps().iter().zip(&pt).fold(1u32, |acc, (&e, &y)| f.mul(acc, pows[y as usize][e as usize])))
            .collect();
        row.push(v);
        for (pc, erow) in &echelon {
            let c = row[*pc];
            if c != 0 {
                for (a, &b) in row.iter_mut().zip(erow) {
                    *a = f.sub(*a, f.mul(c, b));
                }
            }
        }
        match row[..ncols].iter().position(|&c| c != 0) {
            Some(pc) => {
                let inv = f.inv(row[pc]);
                for a in row.iter_mut() {
                    *a = f.mul(*a, inv);
                }
                for (_, erow) in echelon.iter_mut() {
                    let c = erow[pc];
                    if c != 0 {
                        for (a, &b) in erow.iter_mut().zip(&row) {
                            *a = f.sub(*a, f.mul(c, b));
                        }
                    }
                }
                echelon.push((pc, row));
            }
            None if row[ncols] != 0 => return None,
            None => {}
        }
    }
    let mut out = Poly::zero(f, k);
    for (pc, row) in &echelon {
        out.add_term(support[*pc].clone(), row[ncols]);
    }
    Some(out)
}

/// The span of elements of V with rank below R. Ranks of elements are ranks
/// of their top-degree parts, so the oracle is consulted once per distinct
/// top part.
pub fn low_rank_span(v: &FormSpace, r: u64, oracle: &dyn RankOracle) -> Result<FormSpace> {
    let mut cache: HashMap<Poly, bool> = HashMap::new();
    let mut low = Vec::new();
    for elem in v.projective_elements()? {
        let top = elem.top_part().monic();
        let below = match cache.get(&top) {
            Some(&b) => b,
            None => {
                let b = matches!(oracle.rank_below(&top, r)?, RankVerdict::Below(_));
                cache.insert(top, b);
                b
            }
        };
        if below {
            low.push(elem);
        }
    }
    let u = FormSpace::span_of(v.field(), v.nvars(), &low);
    if v.is_homogeneous() && !u.is_homogeneous() {
        return Err(Error::VerificationFailed("low-rank span of a homogeneous space is not homogeneous".into()));
    }
    Ok(u)
}

fn encode(values: impl Iterator<Item = u32>, p: u32) -> u128 {
    values.fold(0u128, |acc, v| acc * p as u128 + v as u128)
}

/// A homogeneous subspace W of V with P ⊆ F[W] such that no homogeneous
/// hyperplane of W still generates P.
///
/// Descends one hyperplane at a time, trying the highest-degree component
/// first and hyperplanes in canonical order. A hyperplane ker(c) of the
/// degree-e component generates P exactly when no two cells (class of the
/// other components, value vector v of the component) carrying different P
/// values have v - v' on the line spanned by c.
pub fn minimal_generating_subspace(ps: &[Poly], v: &FormSpace) -> Result<FormSpace> {
    let f = v.field();
    let n = v.nvars();
    if !v.is_homogeneous() {
        return Err(Error::NotAForm("space is not homogeneous".into()));
    }
    if ps.iter().all(Poly::is_constant) {
        return Ok(FormSpace::zero(f, n));
    }
    if !tuple_member_fiber_test(ps, v.basis())? {
        return Err(Error::NotAMember);
    }
    let points = f.points(n)?;
    let pw = f.p();
    if (pw as u128).checked_pow(ps.len() as u32).is_none() {
        return Err(Error::BudgetExceeded { needed: u128::MAX, budget: f.budget() });
    }
    let ptabs = ps.iter().map(Poly::table).collect::<Result<Vec<_>>>()?;
    let pcode: Vec<u128> = (0..points).map(|i| encode(ptabs.iter().map(|t| t[i]), pw)).collect();

    let mut comps: BTreeMap<u32, Vec<Poly>> = v.per_degree();
    let mut tabs: BTreeMap<u32, Vec<Vec<u32>>> = BTreeMap::new();
    for (&e, basis) in &comps {
        tabs.insert(e, basis.iter().map(Poly::table).collect::<Result<Vec<_>>>()?);
    }

    'descent: loop {
        let degrees: Vec<u32> = comps.keys().rev().copied().collect();
        for &e in &degrees {
            let ke = comps[&e].len();
            if ke == 0 {
                continue;
            }
            if (pw as u128).checked_pow(ke as u32).is_none_or(|c| c >= 1u128 << 64) {
                return Err(Error::BudgetExceeded { needed: u128::MAX, budget: f.budget() });
            }
            f.check_budget(linalg::projective_count(ke, pw))?;
            let others: Vec<Vec<u32>> =
                tabs.iter().filter(|(&d, _)| d != e).flat_map(|(_, t)| t.iter().cloned()).collect();
            let rest = Partition::from_tables(points, &others, pw);
            let ctabs = &tabs[&e];
            // distinct cells
            let mut cell_index: HashMap<(u32, Vec<u32>), usize> = HashMap::new();
            let mut cells: Vec<(u32, Vec<u32>, u128)> = Vec::new();
            for i in 0..points {
                let vv: Vec<u32> = ctabs.iter().map(|t| t[i]).collect();
                let key = (rest.ids()[i], vv);
                if !cell_index.contains_key(&key) {
                    cell_index.insert(key.clone(), cells.len());
                    cells.push((key.0, key.1, pcode[i]));
                }
            }
            for c in linalg::projective_vectors(ke, pw) {
                let j = c.iter().position(|&x| x != 0).unwrap();
                let mut seen: HashMap<(u32, u64), u128> = HashMap::with_capacity(cells.len());
                let mut ok = true;
                for (rid, vv, pc) in &cells {
                    let vj = vv[j];
                    let reduced = vv.iter().zip(&c).map(|(&a, &b)| f.sub(a, f.mul(vj, b)));
                    let key = (*rid, encode(reduced, pw) as u64);
                    match seen.get(&key) {
                        Some(prev) if prev != pc => {
                            ok = false;
                            break;
                        }
                        Some(_) => {}
                        None => {
                            seen.insert(key, *pc);
                        }
                    }
                }
                if ok {
                    let kernel = linalg::nullspace(std::slice::from_ref(&c), ke, f);
                    let old = &comps[&e];
                    let new_basis: Vec<Poly> = kernel
                        .iter()
                        .map(|a| {
                            let mut q = Poly::zero(f, n);
                            for (b, &ai) in old.iter().zip(a) {
                                q.add_scaled_assign(b, ai);
                            }
                            q
                        })
                        .collect();
                    let new_tabs = kernel
                        .iter()
                        .map(|a| {
                            let mut t = vec![0u32; points];
                            for (bt, &ai) in ctabs.iter().zip(a) {
                                if ai != 0 {
                                    for (x, &y) in t.iter_mut().zip(bt) {
                                        *x = f.add(*x, f.mul(ai, y));
                                    }
                                }
                            }
                            t
                        })
                        .collect();
                    comps.insert(e, new_basis);
                    tabs.insert(e, new_tabs);
                    continue 'descent;
                }
            }
        }
        break;
    }
    let all: Vec<Poly> = comps.into_values().flatten().collect();
    Ok(FormSpace::span_of(f, n, &all))
}
