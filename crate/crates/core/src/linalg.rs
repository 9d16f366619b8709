//! Dense linear algebra over F_p: row reduction, inverses, kernels, and the
//! enumerations (projective points, subspaces in echelon form) that the
//! searches are built on.

use std::ops::ControlFlow;

use crate::field::FieldSpec;

pub type Matrix = Vec<Vec<u32>>;

/// Reduced row echelon form in place. Zero rows are dropped; returns the
/// pivot column of each remaining row.
pub fn rref(rows: &mut Matrix, f: FieldSpec) -> Vec<usize> {
    let ncols = rows.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        let Some(sel) = (r..rows.len()).find(|&i| rows[i][c] != 0) else {
            continue;
        };
        rows.swap(r, sel);
        let inv = f.inv(rows[r][c]);
        for v in rows[r].iter_mut() {
            *v = f.mul(*v, inv);
        }
        let pivot_row = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i != r && row[c] != 0 {
                let m = row[c];
                for (x, &y) in row.iter_mut().zip(&pivot_row) {
                    *x = f.sub(*x, f.mul(m, y));
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    rows.truncate(r);
    pivots
}

pub fn rank(rows: &[Vec<u32>], f: FieldSpec) -> usize {
    let mut m = rows.to_vec();
    rref(&mut m, f).len()
}

pub fn invert(m: &[Vec<u32>], f: FieldSpec) -> Option<Matrix> {
    let n = m.len();
    let mut aug: Matrix = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| u32::from(i == j)));
            r
        })
        .collect();
    let piv = rref(&mut aug, f);
    if piv.len() != n || piv.iter().enumerate().any(|(i, &c)| c != i) {
        return None;
    }
    Some(aug.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// Basis of {x : rows * x = 0}, one vector per free column, in column order.
pub fn nullspace(rows: &[Vec<u32>], ncols: usize, f: FieldSpec) -> Matrix {
    let mut m = rows.to_vec();
    let piv = rref(&mut m, f);
    let mut out = Vec::new();
    for free in (0..ncols).filter(|c| !piv.contains(c)) {
        let mut v = vec![0u32; ncols];
        v[free] = 1;
        for (row, &pc) in m.iter().zip(&piv) {
            v[pc] = f.neg(row[free]);
        }
        out.push(v);
    }
    out
}

/// One solution of A x = b with free variables set to zero.
pub fn solve(a: &[Vec<u32>], b: &[u32], ncols: usize, f: FieldSpec) -> Option<Vec<u32>> {
    let mut aug: Matrix = a
        .iter()
        .zip(b)
        .map(|(row, &bi)| {
            let mut r = row.clone();
            r.push(bi);
            r
        })
        .collect();
    let piv = rref(&mut aug, f);
    if piv.contains(&ncols) {
        return None;
    }
    let mut x = vec![0u32; ncols];
    for (row, &pc) in aug.iter().zip(&piv) {
        x[pc] = row[ncols];
    }
    Some(x)
}

pub fn mat_vec(m: &[Vec<u32>], v: &[u32], f: FieldSpec) -> Vec<u32> {
    m.iter()
        .map(|row| {
            let s: u64 = row.iter().zip(v).map(|(&a, &b)| a as u64 * b as u64).sum();
            (s % f.p() as u64) as u32
        })
        .collect()
}

pub fn mat_mul(a: &[Vec<u32>], b: &[Vec<u32>], f: FieldSpec) -> Matrix {
    let cols = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| {
                    let s: u64 = row.iter().zip(b).map(|(&x, brow)| x as u64 * brow[j] as u64).sum();
                    (s % f.p() as u64) as u32
                })
                .collect()
        })
        .collect()
}

pub fn transpose(m: &[Vec<u32>]) -> Matrix {
    let cols = m.first().map_or(0, Vec::len);
    (0..cols).map(|j| m.iter().map(|r| r[j]).collect()).collect()
}

/// Nonzero vectors of F_p^k whose first nonzero coordinate is 1, in
/// increasing mixed-radix index (first coordinate least significant).
pub fn projective_vectors(k: usize, p: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut v = vec![0u32; k];
    while crate::field::next_point(&mut v, p) {
        if v.iter().find(|&&c| c != 0) == Some(&1) {
            out.push(v.clone());
        }
    }
    out
}

/// Number of projective points of F_p^k.
pub fn projective_count(k: usize, p: u32) -> u128 {
    ((p as u128).pow(k as u32) - 1) / (p as u128 - 1)
}

/// Number of r-dimensional subspaces of F_p^s, saturating.
pub fn gaussian_binomial(s: usize, r: usize, p: u32) -> u128 {
    if r > s {
        return 0;
    }
    let q = p as f64;
    let mut log = 0f64;
    for i in 0..r {
        log += (q.powi((s - i) as i32) - 1.0).ln() - (q.powi((i + 1) as i32) - 1.0).ln();
    }
    if log > 120.0 {
        return u128::MAX;
    }
    let mut num: u128 = 1;
    let mut den: u128 = 1;
    let pp = p as u128;
    for i in 0..r {
        num *= pp.pow((s - i) as u32) - 1;
        den *= pp.pow((i + 1) as u32) - 1;
        let g = gcd(num, den);
        num /= g;
        den /= g;
    }
    num / den
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Calls `visit` on every r x s matrix in reduced row echelon form of rank r,
/// i.e. on every r-dimensional subspace of F_p^s exactly once. Pivot sets are
/// visited in lexicographic order and free entries by odometer.
pub fn for_each_rref<F>(r: usize, s: usize, p: u32, mut visit: F) -> ControlFlow<()>
where
    F: FnMut(&[Vec<u32>]) -> ControlFlow<()>,
{
    if r > s {
        return ControlFlow::Continue(());
    }
    let mut pivots: Vec<usize> = (0..r).collect();
    loop {
        let mut slots = Vec::new();
        for (i, &pc) in pivots.iter().enumerate() {
            for c in pc + 1..s {
                if !pivots.contains(&c) {
                    slots.push((i, c));
                }
            }
        }
        let mut m = vec![vec![0u32; s]; r];
        for (i, &pc) in pivots.iter().enumerate() {
            m[i][pc] = 1;
        }
        let mut vals = vec![0u32; slots.len()];
        loop {
            for (&(i, c), &v) in slots.iter().zip(&vals) {
                m[i][c] = v;
            }
            visit(&m)?;
            if !crate::field::next_point(&mut vals, p) {
                break;
            }
        }
        // next combination of pivot columns
        let mut i = r;
        loop {
            if i == 0 {
                return ControlFlow::Continue(());
            }
            i -= 1;
            if pivots[i] < s - r + i {
                pivots[i] += 1;
                for j in i + 1..r {
                    pivots[j] = pivots[j - 1] + 1;
                }
                break;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(p: u32) -> FieldSpec {
        FieldSpec::new(p).unwrap()
    }

    #[test]
    fn inverse_round_trip() {
        let fl = f(7);
        let m = vec![vec![1, 2, 3], vec![0, 1, 4], vec![5, 6, 0]];
        let inv = invert(&m, fl).unwrap();
        let id = mat_mul(&m, &inv, fl);
        assert_eq!(id, vec![vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]]);
    }

    #[test]
    fn kernel_is_annihilated() {
        let fl = f(5);
        let m = vec![vec![1, 2, 3, 4], vec![2, 4, 1, 3]];
        let ker = nullspace(&m, 4, fl);
        assert_eq!(ker.len(), 4 - rank(&m, fl));
        for v in &ker {
            assert!(mat_vec(&m, v, fl).iter().all(|&x| x == 0));
        }
    }

    #[test]
    fn rref_enumeration_matches_gaussian_binomial() {
        for &(p, s, r) in &[(2u32, 4usize, 2usize), (3, 3, 1), (3, 4, 2), (5, 3, 2), (2, 3, 0), (3, 3, 3)] {
            let mut n = 0u128;
            let _ = for_each_rref(r, s, p, |_| {
                n += 1;
                ControlFlow::Continue(())
            });
            assert_eq!(n, gaussian_binomial(s, r, p), "p={p} s={s} r={r}");
        }
    }

    #[test]
    fn projective_points() {
        assert_eq!(projective_vectors(3, 3).len() as u128, projective_count(3, 3));
        assert_eq!(projective_count(2, 5), 6);
    }
}
