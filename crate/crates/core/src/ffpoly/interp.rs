//! Function tables to reduced polynomials, by inverting the Vandermonde
//! matrix along each coordinate axis (cost k * p^(k+1)).

use crate::error::{Error, Result};
use crate::field::FieldSpec;
use crate::linalg;

use super::poly::{axis_transform, Monomial, Poly};

/// Inverse of the p x p matrix (a^j) with rows indexed by points a.
fn inverse_vandermonde(f: FieldSpec) -> Vec<Vec<u32>> {
    let p = f.p();
    let v: Vec<Vec<u32>> = (0..p).map(|a| (0..p).map(|j| f.pow(a, j as u64)).collect()).collect();
    linalg::invert(&v, f).expect("Vandermonde matrix on distinct nodes is invertible")
}

/// The unique reduced polynomial in `k` variables with the given values.
/// `values[i]` is the value at the point whose mixed-radix index is `i`
/// (first coordinate least significant).
pub fn interpolate(values: &[u32], k: usize, field: FieldSpec) -> Result<Poly> {
    let size = field.points(k)?;
    if values.len() != size {
        return Err(Error::IncompleteTable { expected: size, got: values.len() });
    }
    let mut data: Vec<u32> = values.iter().map(|&v| v % field.p()).collect();
    let inv = inverse_vandermonde(field);
    axis_transform(&mut data, field, k, &inv);
    let p = field.p() as usize;
    let mut terms = std::collections::BTreeMap::new();
    let mut exps = vec![0u16; k];
    for (idx, &c) in data.iter().enumerate() {
        if c != 0 {
            let mut r = idx;
            for e in exps.iter_mut() {
                *e = (r % p) as u16;
                r /= p;
            }
            terms.insert(Monomial::new(exps.clone()), c);
        }
    }
    Ok(Poly::from_map(field, k, terms))
}

/// Interpolate a function given as a closure on points of F_p^k.
pub fn interpolate_fn(k: usize, field: FieldSpec, f: impl Fn(&[u32]) -> u32) -> Result<Poly> {
    let size = field.points(k)?;
    let mut values = Vec::with_capacity(size);
    let mut pt = vec![0u32; k];
    for idx in 0..size {
        crate::field::index_to_point(idx, field.p(), k, &mut pt);
        values.push(f(&pt));
    }
    interpolate(&values, k, field)
}
