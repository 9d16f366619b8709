//! Seeded random instances. Every generator is a pure function of its seed.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ffpoly::{FieldSpec, Poly};
use crate::imagery::image;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn field(p: u32) -> FieldSpec {
    FieldSpec::new(p).expect("prime")
}

fn random_exps(rng: &mut ChaCha8Rng, n: usize, deg: u32, p: u32) -> Option<Vec<u16>> {
    let mut e = vec![0u16; n];
    for _ in 0..deg {
        let i = rng.gen_range(0..n);
        e[i] += 1;
    }
    e.iter().all(|&x| (x as u32) < p).then_some(e)
}

/// Sum of up to `terms` random monomials of degree exactly `deg`.
pub fn random_form(rng: &mut ChaCha8Rng, f: FieldSpec, n: usize, deg: u32, terms: usize) -> Poly {
    let mut q = Poly::zero(f, n);
    let mut added = 0;
    // over F_2 repeated monomials cancel, so keep adding until nonzero
    while added < terms || q.is_zero() {
        if let Some(e) = random_exps(rng, n, deg, f.p()) {
            q.add_scaled_assign(&Poly::monomial(f, &e, 1), rng.gen_range(1..f.p()));
            added += 1;
        }
    }
    q
}

pub fn random_linear_form(rng: &mut ChaCha8Rng, f: FieldSpec, n: usize) -> Poly {
    loop {
        let mut q = Poly::zero(f, n);
        for i in 0..n {
            q.add_scaled_assign(&Poly::var(f, n, i), rng.gen_range(0..f.p()));
        }
        if !q.is_zero() {
            return q;
        }
    }
}

/// Random polynomial of degree exactly `deg` with lower-degree noise.
pub fn random_poly(rng: &mut ChaCha8Rng, f: FieldSpec, n: usize, deg: u32, terms: usize) -> Poly {
    let mut q = random_form(rng, f, n, deg, terms.max(1));
    for _ in 0..terms / 2 {
        let e = rng.gen_range(0..deg);
        if let Some(ex) = random_exps(rng, n, e, f.p()) {
            q.add_scaled_assign(&Poly::monomial(f, &ex, 1), rng.gen_range(0..f.p()));
        }
    }
    q
}

/// Quadratic or cubic form of small rank: a sum of `r` products of a
/// linear form with a form of one degree less.
pub fn low_rank_form(rng: &mut ChaCha8Rng, f: FieldSpec, n: usize, deg: u32, r: usize) -> Poly {
    loop {
        let mut q = Poly::zero(f, n);
        for _ in 0..r {
            let l = random_linear_form(rng, f, n);
            let g = if deg == 2 { random_linear_form(rng, f, n) } else { random_form(rng, f, n, deg - 1, 2) };
            q = q.add(&l.mul(&g));
        }
        if q.deg() == deg {
            return q;
        }
    }
}

/// Tuples over F_2, F_3, F_5 with n <= 6 and k <= 3: even indices are form
/// tuples sorted by descending degree, odd indices arbitrary polynomials.
pub fn fourier_corpus(seed: u64, count: usize) -> Vec<Vec<Poly>> {
    let mut r = rng(seed);
    (0..count)
        .map(|i| {
            let p = *[2u32, 3, 5].choose(&mut r).unwrap();
            let f = field(p);
            let n = if p == 5 { r.gen_range(1..=5) } else { r.gen_range(1..=6) };
            let k = r.gen_range(1..=3);
            let max_deg = 3.min(n as u32 * (p - 1));
            let mut degs: Vec<u32> = (0..k).map(|_| r.gen_range(1..=max_deg)).collect();
            degs.sort_unstable_by(|a, b| b.cmp(a));
            degs.iter()
                .map(|&d| {
                    let terms = r.gen_range(1..=4);
                    if i % 2 == 0 { random_form(&mut r, f, n, d, terms) } else { random_poly(&mut r, f, n, d, terms) }
                })
                .collect()
        })
        .collect()
}

/// Bases of homogeneous spaces over F_3 in four variables with degrees 1
/// and 2 and dimension <= 3; quadrics are often of rank 1 or 2.
pub fn homogeneous_space_corpus(seed: u64, count: usize) -> Vec<Vec<Poly>> {
    let mut r = rng(seed);
    let f = field(3);
    let n = 4;
    (0..count)
        .map(|_| {
            let dim = r.gen_range(1..=3);
            (0..dim)
                .map(|_| match r.gen_range(0..4) {
                    0 => random_linear_form(&mut r, f, n),
                    1 => random_form(&mut r, f, n, 2, 3),
                    _ => {
                        let rank = r.gen_range(1..=2);
                        low_rank_form(&mut r, f, n, 2, rank)
                    }
                })
                .collect()
        })
        .collect()
}

/// Instances for rank regularization over F_5: d <= 3, m <= 2, n <= 6,
/// mixing generic polynomials with ones built from low-rank pieces.
pub fn regularize_corpus(seed: u64, count: usize) -> Vec<Vec<Poly>> {
    let mut r = rng(seed);
    let f = field(5);
    (0..count)
        .map(|_| {
            let n = r.gen_range(2..=6);
            let m = r.gen_range(1..=2);
            (0..m)
                .map(|_| {
                    let d = r.gen_range(2..=3);
                    match r.gen_range(0..3) {
                        0 => random_poly(&mut r, f, n, d, 3),
                        1 => {
                            let rank = r.gen_range(1..=2);
                            let mut q = low_rank_form(&mut r, f, n, d, rank);
                            if r.gen_bool(0.5) {
                                q = q.add(&random_linear_form(&mut r, f, n));
                            }
                            q
                        }
                        _ => random_form(&mut r, f, n, d, 2),
                    }
                })
                .collect()
        })
        .collect()
}

/// Single polynomials over F_5 of degree <= 4 that miss some value.
pub fn nonsurjective_corpus(seed: u64, count: usize) -> Vec<Poly> {
    let mut r = rng(seed);
    let f = field(5);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let n = r.gen_range(1..=4);
        let c = r.gen_range(1..5);
        let q = match r.gen_range(0..5) {
            // c * g^2 with deg g <= 2
            0 => {
                let d = r.gen_range(1..=2);
                let g = random_poly(&mut r, f, n, d, 3);
                g.mul(&g).scale(c)
            }
            // c * l^4
            1 => random_linear_form(&mut r, f, n).pow(4).scale(c),
            // l1^4 + l2^4 takes values in {0, 1, 2}
            2 => {
                let a = random_linear_form(&mut r, f, n);
                let b = random_linear_form(&mut r, f, n);
                a.pow(4).add(&b.pow(4))
            }
            // square of a form plus a constant
            3 => {
                let d = r.gen_range(1..=2);
                let g = random_form(&mut r, f, n, d, 3);
                g.mul(&g).add(&Poly::constant(f, n, c))
            }
            // product of two squares of linear forms
            _ => {
                let a = random_linear_form(&mut r, f, n);
                let b = random_linear_form(&mut r, f, n);
                a.mul(&b).pow(2)
            }
        };
        if q.deg() == 0 || q.deg() > 4 {
            continue;
        }
        if image(std::slice::from_ref(&q)).expect("small instance").len() < 5 {
            out.push(q);
        }
    }
    out
}

/// Small tuples for univariate-degree checks: p in {3, 5}, n <= 3, m <= 2.
pub fn udeg_corpus(seed: u64, count: usize) -> Vec<Vec<Poly>> {
    let mut r = rng(seed);
    (0..count)
        .map(|_| {
            let p = *[3u32, 5].choose(&mut r).unwrap();
            let f = field(p);
            let n = r.gen_range(1..=3);
            let m = r.gen_range(1..=2);
            (0..m)
                .map(|_| {
                    let d = r.gen_range(1..p.min(4));
                    let terms = r.gen_range(1..=3);
                    random_poly(&mut r, f, n, d, terms)
                })
                .collect()
        })
        .collect()
}
