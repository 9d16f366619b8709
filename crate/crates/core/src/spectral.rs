//! Character sums, value distributions and the weak-regularity defect.
//!
//! Every sum is accumulated as integer counts per residue; complex numbers
//! only appear in the final conversion sum_j c_j * omega^j.

use num_complex::Complex64;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ffpoly::{tuple_context, tuple_degree, FieldSpec, Poly};
use crate::field::{index_to_point, next_point, point_to_index};
use crate::rational::{format_rational, Rational};
use crate::spaces::FormSpace;

/// sum_j counts[j] * omega^j / denom with omega = exp(2 pi i / p).
pub fn character_value(counts: &[u64], p: u32, denom: f64) -> Complex64 {
    let mut acc = Complex64::zero();
    for (j, &c) in counts.iter().enumerate() {
        if c != 0 {
            let theta = 2.0 * std::f64::consts::PI * j as f64 / p as f64;
            acc += Complex64::from_polar(c as f64, theta);
        }
    }
    acc / denom
}

/// Counts of a.v over all a in F_p^m, as a vector indexed by the value.
pub fn character_sum_counts(v: &[u32], p: u32) -> Vec<u64> {
    let mut counts = vec![0u64; p as usize];
    let mut a = vec![0u32; v.len()];
    loop {
        let s = a.iter().zip(v).fold(0u64, |acc, (&x, &y)| (acc + x as u64 * y as u64) % p as u64);
        counts[s as usize] += 1;
        if !next_point(&mut a, p) {
            break;
        }
    }
    counts
}

/// E_a chi(a.v) over a in F_p^m.
pub fn character_average(v: &[u32], p: u32) -> Complex64 {
    character_value(&character_sum_counts(v, p), p, (p as f64).powi(v.len() as i32))
}

/// Number of points taking each value in F_p.
pub fn value_counts(poly: &Poly) -> Result<Vec<u64>> {
    let p = poly.field().p();
    let mut counts = vec![0u64; p as usize];
    for v in poly.table()? {
        counts[v as usize] += 1;
    }
    Ok(counts)
}

pub fn bias(poly: &Poly) -> Result<Complex64> {
    let f = poly.field();
    let counts = value_counts(poly)?;
    let total: u64 = counts.iter().sum();
    Ok(character_value(&counts, f.p(), total as f64))
}

/// Exact counts of the values of a tuple over F_p^n, indexed by value with
/// the first component least significant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValueCounts {
    pub p: u32,
    pub k: usize,
    pub counts: Vec<u64>,
    pub total: u64,
}

impl ValueCounts {
    pub fn count(&self, y: &[u32]) -> u64 {
        self.counts[point_to_index(y, self.p)]
    }

    pub fn prob(&self, y: &[u32]) -> Rational {
        Rational::new(self.count(y) as i128, self.total as i128)
    }

    /// Counts of the tail (X_2, ..., X_k).
    pub fn tail(&self) -> Vec<u64> {
        let p = self.p as usize;
        let mut out = vec![0u64; self.counts.len() / p];
        for (i, &c) in self.counts.iter().enumerate() {
            out[i / p] += c;
        }
        out
    }

    /// Points with positive count.
    pub fn support(&self) -> Vec<Vec<u32>> {
        let mut out = Vec::new();
        let mut y = vec![0u32; self.k];
        for (i, &c) in self.counts.iter().enumerate() {
            if c > 0 {
                index_to_point(i, self.p, self.k, &mut y);
                out.push(y.clone());
            }
        }
        out
    }
}

pub fn joint_distribution(x: &[Poly]) -> Result<ValueCounts> {
    let (f, n) = tuple_context(x)?;
    let points = f.points(n)?;
    let cells = f.points(x.len())?;
    let tables = x.iter().map(Poly::table).collect::<Result<Vec<_>>>()?;
    let pw = f.p() as usize;
    let mut counts = vec![0u64; cells];
    for i in 0..points {
        let key = tables.iter().rev().fold(0usize, |acc, t| acc * pw + t[i] as usize);
        counts[key] += 1;
    }
    Ok(ValueCounts { p: f.p(), k: x.len(), counts, total: points as u64 })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegularityReport {
    /// p^k * max_y |Pr[X = y] - Pr[X' = y'] / p|
    #[serde(with = "rational_string")]
    pub defect: Rational,
    pub worst_point: Vec<u32>,
    #[serde(with = "rational_string")]
    pub epsilon: Rational,
    pub verdict: bool,
    /// The components are linearly dependent. The defect is still reported.
    pub dependent: bool,
}

pub(crate) mod rational_string {
    use serde::{Deserialize, Deserializer, Serializer};

    use crate::rational::{format_rational, parse_rational, Rational};

    pub fn serialize<S: Serializer>(x: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(serde::de::Error::custom)
    }
}

impl std::fmt::Display for RegularityReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "defect {} (~{:.6}) at {:?}, eps {}: {}",
            format_rational(&self.defect),
            crate::rational::to_f64(&self.defect),
            self.worst_point,
            format_rational(&self.epsilon),
            if self.verdict { "weak regular" } else { "not weak regular" }
        )
    }
}

/// The defect of a form tuple whose first component has maximal degree,
/// from one pass over F_p^n. Ties for the worst point go to the first in
/// index order.
pub fn regularity_defect(x: &[Poly], eps: &Rational) -> Result<RegularityReport> {
    let (f, n) = tuple_context(x)?;
    if let Some(bad) = x.iter().find(|q| !q.is_form()) {
        return Err(Error::NotAForm(bad.to_string()));
    }
    if x[0].deg() < tuple_degree(x) {
        return Err(Error::NotMaxDegreeFirst);
    }
    let p = f.p();
    let k = x.len();
    let joint = joint_distribution(x)?;
    let tail = joint.tail();
    let mut best = 0u128;
    let mut worst = 0usize;
    for (i, &c) in joint.counts.iter().enumerate() {
        let lhs = p as u128 * c as u128;
        let rhs = tail[i / p as usize] as u128;
        let diff = lhs.abs_diff(rhs);
        if diff > best {
            best = diff;
            worst = i;
        }
    }
    // defect = best * p^k / p^(n+1)
    let num = best as i128 * (p as i128).pow(k as u32);
    let den = (p as i128).pow(n as u32 + 1);
    let defect = Rational::new(num, den);
    let mut y = vec![0u32; k];
    index_to_point(worst, p, k, &mut y);
    let dependent = FormSpace::span_of(f, n, x).dim() < k;
    Ok(RegularityReport { verdict: defect <= *eps, defect, worst_point: y, epsilon: *eps, dependent })
}

/// Counts of a.X for every a in F_p^k: the data behind the Fourier side of
/// point and line probabilities.
#[derive(Clone, Debug)]
pub struct FourierTable {
    pub p: u32,
    pub k: usize,
    pub n: usize,
    /// counts[index(a)][v] = #{x : a.X(x) = v}
    pub counts: Vec<Vec<u64>>,
}

impl FourierTable {
    pub fn new(x: &[Poly]) -> Result<Self> {
        let (f, n) = tuple_context(x)?;
        let p = f.p();
        let k = x.len();
        let points = f.points(n)?;
        let combos = f.points(k)?;
        f.check_budget(points as u128 * combos as u128)?;
        let tables = x.iter().map(Poly::table).collect::<Result<Vec<_>>>()?;
        // moving a from (.., a_j, p-1, ..., p-1) to (.., a_j + 1, 0, ..., 0)
        // adds X_j + X_0 + ... + X_{j-1}
        let mut steps: Vec<Vec<u32>> = Vec::with_capacity(k);
        let mut prefix = vec![0u32; points];
        for t in &tables {
            let step: Vec<u32> = prefix.iter().zip(t).map(|(&a, &b)| f.add(a, b)).collect();
            prefix = step.clone();
            steps.push(step);
        }
        let mut cur = vec![0u32; points];
        let mut a = vec![0u32; k];
        let mut counts = Vec::with_capacity(combos);
        loop {
            let mut c = vec![0u64; p as usize];
            for &v in &cur {
                c[v as usize] += 1;
            }
            counts.push(c);
            let j = match a.iter().position(|&ai| ai != p - 1) {
                Some(j) => j,
                None => break,
            };
            next_point(&mut a, p);
            for (v, &s) in cur.iter_mut().zip(&steps[j]) {
                *v = f.add(*v, s);
            }
        }
        Ok(FourierTable { p, k, n, counts })
    }

    fn field(&self) -> FieldSpec {
        FieldSpec::new(self.p).expect("prime")
    }

    fn shifted(&self, filter: impl Fn(&[u32]) -> bool, shift: &[u32]) -> Vec<u64> {
        let f = self.field();
        let mut acc = vec![0u64; self.p as usize];
        let mut a = vec![0u32; self.k];
        for c in &self.counts {
            if filter(&a) {
                let ay = a.iter().zip(shift).fold(0, |s, (&x, &y)| f.add(s, f.mul(x, y)));
                for (v, &cv) in c.iter().enumerate() {
                    acc[f.sub(v as u32, ay) as usize] += cv;
                }
            }
            next_point(&mut a, self.p);
        }
        acc
    }

    /// E_a bias(a.(X - y)).
    pub fn prob_point(&self, y: &[u32]) -> f64 {
        let acc = self.shifted(|_| true, y);
        let denom = (self.p as f64).powi((self.k + self.n) as i32);
        character_value(&acc, self.p, denom).re
    }

    /// p^{-(k-1)} sum over a with a.v = 0 of bias(a.(X - z)).
    pub fn prob_line(&self, line: &Line) -> f64 {
        let f = self.field();
        let v = line.direction.clone();
        let acc = self.shifted(|a| a.iter().zip(&v).fold(0, |s, (&x, &y)| f.add(s, f.mul(x, y))) == 0, &line.offset);
        let denom = (self.p as f64).powi((self.k - 1 + self.n) as i32);
        character_value(&acc, self.p, denom).re
    }
}

pub fn prob_via_bias(x: &[Poly], y: &[u32]) -> Result<f64> {
    if y.len() != x.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), got: y.len() });
    }
    Ok(FourierTable::new(x)?.prob_point(y))
}

pub fn line_prob_via_bias(x: &[Poly], line: &Line) -> Result<f64> {
    if line.direction.len() != x.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), got: line.direction.len() });
    }
    Ok(FourierTable::new(x)?.prob_line(line))
}

/// {offset + t * direction : t in F_p}, normalized so the first nonzero
/// entry of the direction is 1 and the offset is 0 at that coordinate.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Line {
    pub direction: Vec<u32>,
    pub offset: Vec<u32>,
}

impl Line {
    pub fn new(f: FieldSpec, direction: &[u32], offset: &[u32]) -> Result<Self> {
        if direction.len() != offset.len() {
            return Err(Error::DimensionMismatch { expected: direction.len(), got: offset.len() });
        }
        let j = direction.iter().position(|&c| c % f.p() != 0).ok_or_else(|| Error::Invalid("zero direction".into()))?;
        let inv = f.inv(direction[j] % f.p());
        let dir: Vec<u32> = direction.iter().map(|&c| f.mul(c % f.p(), inv)).collect();
        let s = offset[j] % f.p();
        let off: Vec<u32> = offset.iter().zip(&dir).map(|(&o, &d)| f.sub(o % f.p(), f.mul(s, d))).collect();
        Ok(Line { direction: dir, offset: off })
    }

    /// Line through `offset` in direction e_1.
    pub fn axis(f: FieldSpec, offset: &[u32]) -> Self {
        let mut e1 = vec![0u32; offset.len()];
        e1[0] = 1;
        Line::new(f, &e1, offset).expect("e_1 is nonzero")
    }

    pub fn points(&self, f: FieldSpec) -> Vec<Vec<u32>> {
        (0..f.p()).map(|t| self.offset.iter().zip(&self.direction).map(|(&o, &d)| f.add(o, f.mul(t, d))).collect()).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LineReport {
    pub line: Line,
    pub hits: u64,
    pub popular: bool,
    pub contained: bool,
}

/// Every e_1-line, with the number of points of F_p^n mapped onto it; a line
/// is popular when hits / p^n > eps * p^-(k-1), compared exactly.
pub fn popular_line_containment(x: &[Poly], eps: &Rational) -> Result<Vec<LineReport>> {
    let (f, _) = tuple_context(x)?;
    let joint = joint_distribution(x)?;
    let p = f.p();
    let k = x.len();
    let mut out = Vec::new();
    let mut tail = vec![0u32; k - 1];
    loop {
        let mut offset = vec![0u32];
        offset.extend_from_slice(&tail);
        let line = Line::axis(f, &offset);
        let pts = line.points(f);
        let hits: u64 = pts.iter().map(|y| joint.count(y)).sum();
        let lhs = hits as i128 * (p as i128).pow(k as u32 - 1) * *eps.denom();
        let rhs = *eps.numer() * joint.total as i128;
        let contained = pts.iter().all(|y| joint.count(y) > 0);
        out.push(LineReport { line, hits, popular: lhs > rhs, contained });
        if !next_point(&mut tail, p) {
            break;
        }
    }
    Ok(out)
}
