//! Rank (strength) of forms: the least number of reducible forms A*B that sum
//! to a form, with witnesses. Linear forms have infinite rank; the rank of a
//! non-homogeneous polynomial is that of its top-degree part.

mod divide;
mod quadratic;
mod rkt;
mod search;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ffpoly::Poly;
use crate::rational::{ceil_nonneg, Rational};
use crate::spaces::{low_rank_span, span_basis, FormSpace};
use crate::spectral::bias;

pub use divide::{divide_exact, find_divisor, mul_ring, t_factor};
pub use quadratic::rank_quadratic;
pub use rkt::{rkt_search, rkt_verify, RktCertificate, RktCheck, RktSearch};
pub use search::{hitting_set_witness, rank_bounded_search};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RankValue {
    Finite(u32),
    Infinite,
}

impl RankValue {
    pub fn is_below(&self, threshold: u64) -> bool {
        matches!(self, RankValue::Finite(r) if (*r as u64) < threshold)
    }
}

impl fmt::Display for RankValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RankValue::Finite(r) => write!(f, "{r}"),
            RankValue::Infinite => f.write_str("inf"),
        }
    }
}

/// P = sum_i A_i * B_i with every factor a form of positive degree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RankWitness {
    pub summands: Vec<(Poly, Poly)>,
}

impl RankWitness {
    pub fn len(&self) -> usize {
        self.summands.len()
    }

    pub fn is_empty(&self) -> bool {
        self.summands.is_empty()
    }

    /// Checks factor shapes and that the products sum to `target`.
    pub fn verify(&self, target: &Poly) -> bool {
        let mut sum = Poly::zero(target.field(), target.nvars());
        for (a, b) in &self.summands {
            if !a.is_form() || !b.is_form() || a.deg() + b.deg() != target.deg() {
                return false;
            }
            sum = sum.add(&a.mul(b));
        }
        sum == *target
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RankStatus {
    Exact,
    Bounded,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RankBound {
    pub lower: RankValue,
    pub upper: RankValue,
    pub witness: Option<RankWitness>,
    pub status: RankStatus,
}

impl RankBound {
    pub fn exact(r: RankValue, witness: Option<RankWitness>) -> Self {
        RankBound { lower: r, upper: r, witness, status: RankStatus::Exact }
    }

    pub fn value(&self) -> Option<RankValue> {
        (self.status == RankStatus::Exact).then_some(self.lower)
    }
}

/// Answer to "is rk(P) < R?" with a witness when it is.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RankVerdict {
    Below(RankWitness),
    NotBelow,
}

pub trait RankOracle {
    /// Decides rk(top(P)) < threshold. The witness, if any, sums to top(P).
    fn rank_below(&self, poly: &Poly, threshold: u64) -> Result<RankVerdict>;
}

/// Exact quadratic rank for odd p, then a cheap variable-cover bound, then
/// bounded witness search. Refuses to guess when the search is incomplete.
#[derive(Clone, Copy, Debug)]
pub struct StandardOracle {
    pub max_rank: u32,
    pub budget: u64,
}

impl Default for StandardOracle {
    fn default() -> Self {
        StandardOracle { max_rank: 6, budget: 1 << 22 }
    }
}

impl RankOracle for StandardOracle {
    fn rank_below(&self, poly: &Poly, threshold: u64) -> Result<RankVerdict> {
        let top = poly.top_part();
        if top.deg() == 0 {
            return Ok(if threshold > 0 { RankVerdict::Below(RankWitness { summands: vec![] }) } else { RankVerdict::NotBelow });
        }
        if top.deg() == 1 || threshold <= 1 {
            return Ok(RankVerdict::NotBelow);
        }
        let p = top.field().p();
        if top.deg() == 2 && p % 2 == 1 {
            let b = rank_quadratic(&top)?;
            return Ok(match (b.upper.is_below(threshold), b.witness) {
                (true, Some(w)) => RankVerdict::Below(w),
                _ => RankVerdict::NotBelow,
            });
        }
        let cover = hitting_set_witness(&top);
        if (cover.len() as u64) < threshold {
            return Ok(RankVerdict::Below(cover));
        }
        let r_max = self.max_rank.min((threshold - 1).min(u32::MAX as u64) as u32);
        let b = rank_bounded_search(&top, r_max, self.budget);
        if b.upper.is_below(threshold) {
            if let Some(w) = b.witness {
                return Ok(RankVerdict::Below(w));
            }
        }
        if !b.lower.is_below(threshold) {
            return Ok(RankVerdict::NotBelow);
        }
        Err(Error::OracleInconclusive { poly: top.to_string(), threshold })
    }
}

/// rk(P) >= ceil(-log_p |bias(P)|), a heuristic-grade bound from the
/// analytic side. Zero bias gives no information and reports the cap.
pub fn bias_rank_lower_bound(p: &Poly, cap: u32) -> Result<u32> {
    let b = bias(p)?.norm();
    if b < 1e-12 {
        return Err(Error::ZeroBias { cap });
    }
    let x = -b.ln() / (p.field().p() as f64).ln();
    Ok((x - 1e-9).ceil().max(0.0).min(cap as f64) as u32)
}

/// Whether the form tuple X (length r) is t-rank-regular: the elements of
/// Span X with rank below t*r span a strict subspace. Also returns that span.
pub fn is_t_rank_regular(x: &[Poly], t: &Rational, oracle: &dyn RankOracle) -> Result<(bool, FormSpace)> {
    let v = span_basis(x)?;
    let threshold = ceil_nonneg(&(t * Rational::from_integer(x.len() as i128)));
    let u = low_rank_span(&v, threshold, oracle)?;
    Ok((u.dim() < v.dim(), u))
}
