//! The prime field F_p together with the enumeration budget that every
//! exhaustive loop in the crate checks against.

use crate::error::{Error, Result};

pub const DEFAULT_BUDGET: u64 = 1 << 24;

#[derive(Debug, Clone, Copy, Eq)]
pub struct FieldSpec {
    p: u32,
    budget: u64,
}

/// The budget is an execution knob, so equality only looks at the modulus.
impl PartialEq for FieldSpec {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p
    }
}

impl std::hash::Hash for FieldSpec {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.p.hash(state)
    }
}

fn is_prime(p: u32) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u32;
    while (d as u64) * (d as u64) <= p as u64 {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

impl FieldSpec {
    pub fn new(p: u32) -> Result<Self> {
        Self::with_budget(p, DEFAULT_BUDGET)
    }

    /// Moduli are capped at 2^16 so products of two residues fit in a u32
    /// after one widening multiply and exponents fit in a u16.
    pub fn with_budget(p: u32, budget: u64) -> Result<Self> {
        if !is_prime(p) || p >= 1 << 16 {
            return Err(Error::NotPrime(p));
        }
        if budget == 0 {
            return Err(Error::Invalid("enumeration budget must be positive".into()));
        }
        Ok(FieldSpec { p, budget })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn budget(&self) -> u64 {
        self.budget
    }

    pub fn with_new_budget(self, budget: u64) -> Self {
        FieldSpec { p: self.p, budget: budget.max(1) }
    }

    #[inline]
    pub fn add(&self, a: u32, b: u32) -> u32 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(&self, a: u32, b: u32) -> u32 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    #[inline]
    pub fn neg(&self, a: u32) -> u32 {
        if a == 0 {
            0
        } else {
            self.p - a
        }
    }

    #[inline]
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        ((a as u64 * b as u64) % self.p as u64) as u32
    }

    pub fn pow(&self, a: u32, mut e: u64) -> u32 {
        let mut base = a % self.p;
        let mut acc = 1 % self.p;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// Inverse of a nonzero residue.
    pub fn inv(&self, a: u32) -> u32 {
        assert!(!a.is_multiple_of(self.p), "inverse of zero");
        self.pow(a, (self.p - 2) as u64)
    }

    /// Reduce an arbitrary integer into [0, p).
    pub fn reduce(&self, v: i64) -> u32 {
        v.rem_euclid(self.p as i64) as u32
    }

    /// Frobenius reduction of an exponent: x^e and x^reduce_exp(e) agree as
    /// functions on F_p.
    pub fn reduce_exp(&self, e: u64) -> u16 {
        if e < self.p as u64 {
            e as u16
        } else {
            (((e - 1) % (self.p as u64 - 1)) + 1) as u16
        }
    }

    pub fn is_square(&self, a: u32) -> bool {
        let a = a % self.p;
        a == 0 || self.p == 2 || self.pow(a, ((self.p - 1) / 2) as u64) == 1
    }

    /// Some square root of `a`, if one exists.
    pub fn sqrt(&self, a: u32) -> Option<u32> {
        let a = a % self.p;
        (0..self.p).find(|&s| self.mul(s, s) == a)
    }

    /// p^k as u128, or None on overflow.
    pub fn power_count(&self, k: usize) -> Option<u128> {
        (self.p as u128).checked_pow(k as u32)
    }

    /// Fails unless `needed` items fit in the budget.
    pub fn check_budget(&self, needed: u128) -> Result<()> {
        if needed > self.budget as u128 {
            Err(Error::BudgetExceeded { needed, budget: self.budget })
        } else {
            Ok(())
        }
    }

    /// Number of points of F_p^k, checked against the budget.
    pub fn points(&self, k: usize) -> Result<usize> {
        match self.power_count(k) {
            Some(n) => {
                self.check_budget(n)?;
                Ok(n as usize)
            }
            None => Err(Error::BudgetExceeded { needed: u128::MAX, budget: self.budget }),
        }
    }
}

/// Decode a mixed-radix index into a point; coordinate 0 is least significant.
pub fn index_to_point(mut idx: usize, p: u32, k: usize, out: &mut [u32]) {
    for c in out.iter_mut().take(k) {
        *c = (idx % p as usize) as u32;
        idx /= p as usize;
    }
}

pub fn point_to_index(point: &[u32], p: u32) -> usize {
    point.iter().rev().fold(0usize, |acc, &c| acc * p as usize + c as usize)
}

/// Odometer over F_p^k in index order. Returns false after the last point.
pub fn next_point(point: &mut [u32], p: u32) -> bool {
    for c in point.iter_mut() {
        *c += 1;
        if *c < p {
            return true;
        }
        *c = 0;
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_composites() {
        assert!(FieldSpec::new(4).is_err());
        assert!(FieldSpec::new(1).is_err());
        assert!(FieldSpec::new(7).is_ok());
    }

    #[test]
    fn arithmetic_mod_five() {
        let f = FieldSpec::new(5).unwrap();
        assert_eq!(f.mul(3, 4), 2);
        assert_eq!(f.inv(2), 3);
        assert_eq!(f.sub(1, 3), 3);
        assert_eq!(f.reduce_exp(5), 1);
        assert_eq!(f.reduce_exp(8), 4);
        assert_eq!(f.reduce_exp(9), 1);
        assert!(f.is_square(4) && !f.is_square(2));
    }

    #[test]
    fn index_round_trip() {
        let mut pt = [0u32; 3];
        for i in 0..27 {
            index_to_point(i, 3, 3, &mut pt);
            assert_eq!(point_to_index(&pt, 3), i);
        }
        let mut pt = [0u32; 2];
        let mut count = 1;
        while next_point(&mut pt, 3) {
            count += 1;
        }
        assert_eq!(count, 9);
    }
}
