//! End-to-end acceptance run. Each criterion prints one PASS/FAIL line; the
//! test fails if any criterion does. Reference values come from brute force
//! written here, independent of the library's own search routines.

use std::collections::HashMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use polyreg::certificate::{
    decomposition_payload, formula_payload, report_payload, rkt_payload, udeg_payload, verify, CertificateFile, Input,
};
use polyreg::corpus;
use polyreg::ffpoly::{compose, default_names, parse_poly, tuple_degree};
use polyreg::formula::{build_spsp, certify_fanin, equiv_check};
use polyreg::imagery::{contains_line, extract_curve, image, udeg};
use polyreg::rankor::{
    bias_rank_lower_bound, rank_bounded_search, rank_quadratic, rkt_search, rkt_verify, RankValue, StandardOracle,
};
use polyreg::regularize::{rank_regularize, weak_regular_decompose, Decomposition, WeakConfig};
use polyreg::spaces::{low_rank_span, span_basis};
use polyreg::spectral::{line_prob_via_bias, popular_line_containment, prob_via_bias, regularity_defect, FourierTable, Line};
use polyreg::{FieldSpec, Poly, Rational};

type Outcome = Result<String, String>;
type Criterion = fn(&mut Ctx) -> Outcome;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

// ---------- brute-force helpers ----------

fn odometer(x: &mut [u32], p: u32) -> bool {
    for v in x.iter_mut() {
        *v += 1;
        if *v < p {
            return true;
        }
        *v = 0;
    }
    false
}

/// All points of F_p^n, first coordinate fastest.
fn all_points(p: u32, n: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut x = vec![0u32; n];
    loop {
        out.push(x.clone());
        if !odometer(&mut x, p) {
            return out;
        }
    }
}

fn values(ps: &[Poly], x: &[u32]) -> Vec<u32> {
    ps.iter().map(|q| q.eval_unchecked(x)).collect()
}

fn joint_counts(ps: &[Poly]) -> HashMap<Vec<u32>, u64> {
    let f = ps[0].field();
    let mut h = HashMap::new();
    for x in all_points(f.p(), ps[0].nvars()) {
        *h.entry(values(ps, &x)).or_insert(0) += 1;
    }
    h
}

fn image_set(ps: &[Poly]) -> std::collections::HashSet<Vec<u32>> {
    joint_counts(ps).into_keys().collect()
}

/// Whether ps is a function of xs, by bucketing points on X-values.
fn determined_by(ps: &[Poly], xs: &[Poly]) -> bool {
    let f = ps[0].field();
    let mut seen: HashMap<Vec<u32>, Vec<u32>> = HashMap::new();
    for x in all_points(f.p(), ps[0].nvars()) {
        let key = values(xs, &x);
        let val = values(ps, &x);
        match seen.get(&key) {
            Some(v) if *v != val => return false,
            Some(_) => {}
            None => {
                seen.insert(key, val);
            }
        }
    }
    true
}

/// F(X(x)) == P(x) everywhere, evaluated pointwise.
fn recomposes_pointwise(dec: &Decomposition, ps: &[Poly]) -> bool {
    let f = dec.field;
    all_points(f.p(), dec.nvars).iter().all(|x| {
        let y = values(&dec.x, x);
        dec.outer.iter().zip(ps).all(|(g, q)| g.eval_unchecked(&y) == q.eval_unchecked(x))
    })
}

/// Defect p^k max_y |Pr[X = y] - Pr[X' = y'] / p| as an exact rational.
fn defect(x: &[Poly]) -> Rational {
    let f = x[0].field();
    let p = f.p() as i128;
    let n = x[0].nvars();
    let k = x.len();
    let joint = joint_counts(x);
    let mut tail: HashMap<Vec<u32>, i128> = HashMap::new();
    for (y, c) in &joint {
        *tail.entry(y[1..].to_vec()).or_insert(0) += *c as i128;
    }
    let mut worst = 0i128;
    for y in all_points(f.p(), k) {
        let c = *joint.get(&y).unwrap_or(&0) as i128;
        let t = *tail.get(&y[1..]).unwrap_or(&0);
        worst = worst.max((p * c - t).abs());
    }
    Rational::new(worst * p.pow(k as u32), p.pow(n as u32 + 1))
}

/// Degree of the function t -> v[t] on F_p, from its forward differences:
/// the Newton coefficient of C(t, j) is the j-th difference at 0.
fn univariate_degree(v: &[u32], p: u32) -> Option<u32> {
    let mut row: Vec<i64> = v.iter().map(|&a| a as i64).collect();
    let mut deg = None;
    for j in 0..v.len() {
        if row[0].rem_euclid(p as i64) != 0 {
            deg = Some(j as u32);
        }
        row = row.windows(2).map(|w| (w[1] - w[0]).rem_euclid(p as i64)).collect();
    }
    deg
}

/// udeg by enumerating every function F_p -> Image(P); None when the map is
/// constant or the enumeration would be too large.
fn udeg_oracle(ps: &[Poly]) -> Option<Option<u32>> {
    let p = ps[0].field().p();
    let img: Vec<Vec<u32>> = {
        let mut v: Vec<_> = image_set(ps).into_iter().collect();
        v.sort();
        v
    };
    if img.len() == 1 {
        return Some(None);
    }
    if (img.len() as f64).powi(p as i32) > 2e6 {
        return None;
    }
    let mut best = u32::MAX;
    let mut choice = vec![0u32; p as usize];
    loop {
        if choice.iter().any(|&c| c != choice[0]) {
            let d = (0..ps.len())
                .map(|j| {
                    let col: Vec<u32> = choice.iter().map(|&c| img[c as usize][j]).collect();
                    univariate_degree(&col, p).unwrap_or(0)
                })
                .max()
                .unwrap();
            best = best.min(d);
        }
        if !odometer(&mut choice, img.len() as u32) {
            break;
        }
    }
    Some(Some(best))
}

fn poly(s: &str, p: u32, n: usize) -> Poly {
    parse_poly(s, FieldSpec::new(p).unwrap(), n).unwrap()
}

fn rat(a: i128, b: i128) -> Rational {
    Rational::new(a, b)
}

/// Every line of F_p^k: normalized direction, offset zero at the pivot.
fn all_lines(f: FieldSpec, k: usize) -> Vec<Line> {
    let mut out = Vec::new();
    for dir in all_points(f.p(), k) {
        let Some(j) = dir.iter().position(|&c| c != 0) else { continue };
        if dir[j] != 1 {
            continue;
        }
        for off in all_points(f.p(), k) {
            if off[j] == 0 {
                out.push(Line::new(f, &dir, &off).unwrap());
            }
        }
    }
    out
}

fn line_points(f: FieldSpec, l: &Line) -> Vec<Vec<u32>> {
    let p = f.p();
    (0..p).map(|t| l.offset.iter().zip(&l.direction).map(|(&o, &d)| (o + t * d) % p).collect()).collect()
}

// ---------- shared state ----------

struct Certified {
    label: String,
    ps: Vec<Poly>,
    dec: Decomposition,
    u: u32,
}

#[derive(Default)]
struct Ctx {
    certified: Vec<Certified>,
}

const SEED_FOURIER: u64 = 0xF0;
const SEED_SPACES: u64 = 0x5A;
const SEED_REGULARIZE: u64 = 0x7E;
const SEED_SURJ: u64 = 0x51;
const SEED_UDEG: u64 = 0xDE;

// ---------- criteria ----------

fn c1_fourier(_: &mut Ctx) -> Outcome {
    let corpus = corpus::fourier_corpus(SEED_FOURIER, 200);
    let mut checks = 0u64;
    let mut worst = 0f64;
    for (i, x) in corpus.iter().enumerate() {
        let f = x[0].field();
        let n = x[0].nvars();
        let total = f.p().pow(n as u32) as f64;
        let joint = joint_counts(x);
        let table = FourierTable::new(x).map_err(|e| format!("instance {i}: {e}"))?;
        for y in all_points(f.p(), x.len()) {
            let want = *joint.get(&y).unwrap_or(&0) as f64 / total;
            let got = table.prob_point(&y);
            worst = worst.max((got - want).abs());
            ensure!((got - want).abs() < 1e-9, "instance {i}: Pr[X = {y:?}] = {want}, Fourier side {got}");
            checks += 1;
        }
        for l in all_lines(f, x.len()) {
            let want: f64 = line_points(f, &l).iter().map(|y| *joint.get(y).unwrap_or(&0) as f64).sum::<f64>() / total;
            let got = table.prob_line(&l);
            worst = worst.max((got - want).abs());
            ensure!((got - want).abs() < 1e-9, "instance {i}: Pr[X in {l:?}] = {want}, Fourier side {got}");
            checks += 1;
        }
        // the stand-alone entry points agree with the table
        let y0 = vec![0u32; x.len()];
        let a = prob_via_bias(x, &y0).map_err(|e| e.to_string())?;
        ensure!((a - table.prob_point(&y0)).abs() < 1e-12, "instance {i}: prob_via_bias disagrees with table");
        let l0 = Line::axis(f, &y0);
        let b = line_prob_via_bias(x, &l0).map_err(|e| e.to_string())?;
        ensure!((b - table.prob_line(&l0)).abs() < 1e-12, "instance {i}: line_prob_via_bias disagrees with table");
    }
    Ok(format!("{} tuples, {checks} point/line probabilities, max error {worst:.1e}", corpus.len()))
}

fn c2_contain_line(_: &mut Ctx) -> Outcome {
    let corpus = corpus::fourier_corpus(SEED_FOURIER, 200);
    let (mut certified, mut popular, mut runs) = (0, 0, 0);
    for (i, x) in corpus.iter().enumerate() {
        if !x.iter().all(Poly::is_form) || x[0].deg() < tuple_degree(x) {
            continue;
        }
        let f = x[0].field();
        let delta = defect(x);
        let lib = regularity_defect(x, &delta).map_err(|e| format!("instance {i}: {e}"))?;
        ensure!(lib.defect == delta, "instance {i}: library defect {} vs brute force {}", lib.defect, delta);
        let joint = joint_counts(x);
        let k = x.len() as u32;
        let total = f.p().pow(x[0].nvars() as u32) as i128;
        let mut counted = false;
        for eps in [delta, rat(1, 4), rat(1, 2), rat(1, 1)] {
            if delta > eps {
                continue;
            }
            counted = true;
            runs += 1;
            // every e_1-line: offset with first coordinate 0
            for tail in all_points(f.p(), k as usize - 1) {
                let mut off = vec![0u32];
                off.extend(&tail);
                let l = Line::axis(f, &off);
                let pts = line_points(f, &l);
                let hits: i128 = pts.iter().map(|y| *joint.get(y).unwrap_or(&0) as i128).sum();
                // hits / p^n > eps * p^-(k-1)
                let lhs = Rational::from_integer(hits * (f.p() as i128).pow(k - 1));
                if lhs > eps * Rational::from_integer(total) {
                    popular += 1;
                    ensure!(
                        pts.iter().all(|y| joint.contains_key(y)),
                        "instance {i}: popular line {l:?} not contained (eps {eps}, defect {delta})"
                    );
                }
            }
            let reports = popular_line_containment(x, &eps).map_err(|e| e.to_string())?;
            ensure!(reports.iter().all(|r| !r.popular || r.contained), "instance {i}: library flags an uncontained line");
        }
        if counted {
            certified += 1;
        }
    }
    ensure!(certified > 0, "no certified tuples in the corpus");
    Ok(format!("{certified} certified tuples, {runs} (tuple, eps) runs, {popular} popular lines, 0 violations"))
}

fn c3_low_rank_span(_: &mut Ctx) -> Outcome {
    let oracle = StandardOracle::default();
    let spaces = corpus::homogeneous_space_corpus(SEED_SPACES, 100);
    let mut checks = 0;
    for (i, gens) in spaces.iter().enumerate() {
        let v = span_basis(gens).map_err(|e| e.to_string())?;
        let f = v.field();
        let coeff_vectors = all_points(f.p(), v.dim());
        let elements: Vec<Poly> = coeff_vectors.iter().map(|c| v.element(c)).collect();
        for r in 1..=3u64 {
            let u = low_rank_span(&v, r, &oracle).map_err(|e| format!("space {i}: {e}"))?;
            // brute force: exact rank of every element via the quadratic formula
            let mut low = Vec::new();
            for e in &elements {
                let rk = match e.deg() {
                    0 => RankValue::Finite(0),
                    1 => RankValue::Infinite,
                    _ => rank_quadratic(&e.top_part()).map_err(|e| e.to_string())?.value().ok_or("inexact quadratic rank")?,
                };
                if rk.is_below(r) {
                    low.push(e.clone());
                }
            }
            let low_nonzero: Vec<Poly> = low.into_iter().filter(|e| !e.is_zero()).collect();
            let span_low = polyreg::spaces::FormSpace::span_of(f, v.nvars(), &low_nonzero);
            ensure!(
                span_low.dim() == u.dim() && span_low.basis().iter().all(|b| u.contains(b)),
                "space {i}, R = {r}: U has dim {} but brute force gives {}",
                u.dim(),
                span_low.dim()
            );
            // U is homogeneous
            for b in u.basis() {
                for h in b.homogeneous_parts().values() {
                    ensure!(u.contains(h), "space {i}, R = {r}: U is not homogeneous");
                }
            }
            // low-degree elements of V lie in U
            let du = u.degree();
            for e in &elements {
                if !e.is_zero() && e.deg() < du {
                    ensure!(u.contains(e), "space {i}, R = {r}: {e} has degree < deg U but is outside U");
                }
            }
            // U_R(V) = V iff U_R(V^top) = V^top
            let top = v.top();
            let ut = low_rank_span(&top, r, &oracle).map_err(|e| e.to_string())?;
            ensure!(
                (u.dim() == v.dim()) == (ut.dim() == top.dim()),
                "space {i}, R = {r}: top-component criterion disagrees"
            );
            checks += 1;
        }
    }
    Ok(format!("{} spaces x 3 thresholds, {checks} checks, 0 violations", spaces.len()))
}

fn c4_rank_oracles(_: &mut Ctx) -> Outcome {
    let f = FieldSpec::new(3).unwrap();
    let monos: Vec<[u16; 3]> = vec![[2, 0, 0], [1, 1, 0], [1, 0, 1], [0, 2, 0], [0, 1, 1], [0, 0, 2]];
    let mut forms = 0;
    let mut hist = [0usize; 4];
    for c in all_points(3, 6) {
        let Some(j) = c.iter().position(|&a| a != 0) else { continue };
        if c[j] != 1 {
            continue;
        }
        let mut q = Poly::zero(f, 3);
        for (m, &a) in monos.iter().zip(&c) {
            q.add_scaled_assign(&Poly::monomial(f, m, 1), a);
        }
        let exact = rank_quadratic(&q).map_err(|e| e.to_string())?.value().ok_or("quadratic rank not exact")?;
        let search = rank_bounded_search(&q, 3, 1 << 22);
        ensure!(search.value() == Some(exact), "{q}: quadratic rank {exact:?}, bounded search {:?}", search.value());
        let lb = bias_rank_lower_bound(&q, 16).map_err(|e| format!("{q}: {e}"))?;
        let RankValue::Finite(r) = exact else { return Err(format!("{q}: infinite rank for a quadratic")) };
        ensure!(lb <= r, "{q}: bias bound {lb} exceeds rank {r}");
        hist[r as usize] += 1;
        forms += 1;
    }
    ensure!(forms == 364, "expected 364 projective forms, saw {forms}");
    Ok(format!("{forms} forms, rank histogram {:?}, all agree", &hist[1..]))
}

fn c5_rank_regularize(ctx: &mut Ctx) -> Outcome {
    let oracle = StandardOracle::default();
    let t = Rational::from_integer(1);
    let corpus = corpus::regularize_corpus(SEED_REGULARIZE, 50);
    let mut max_rounds = 0;
    let mut max_size = 0;
    for (i, ps) in corpus.iter().enumerate() {
        let d = tuple_degree(ps);
        let m = ps.len();
        let dec = rank_regularize(ps, &t, &oracle).map_err(|e| format!("instance {i}: {e}"))?;
        ensure!(dec.provenance.len() as u32 <= d, "instance {i}: {} rounds for d = {d}", dec.provenance.len());
        ensure!(recomposes_pointwise(&dec, ps), "instance {i}: F(X) != P");
        ensure!(dec.x.iter().all(Poly::is_form), "instance {i}: X is not a form tuple");
        // minimality: every homogeneous hyperplane of Span X fails to generate P
        let mut by_deg: std::collections::BTreeMap<u32, Vec<Poly>> = Default::default();
        for xj in &dec.x {
            by_deg.entry(xj.deg()).or_default().push(xj.clone());
        }
        for (&e, comp) in &by_deg {
            let others: Vec<Poly> = dec.x.iter().filter(|q| q.deg() != e).cloned().collect();
            let s = comp.len();
            for a in all_points(dec.field.p(), s) {
                let Some(j0) = a.iter().position(|&c| c != 0) else { continue };
                if a[j0] != 1 {
                    continue;
                }
                let mut hyper = others.clone();
                for i2 in (0..s).filter(|&i2| i2 != j0) {
                    // e_i2 - a_i2 e_j0
                    let neg = (dec.field.p() - a[i2]) % dec.field.p();
                    hyper.push(comp[i2].add_scaled(&comp[j0], neg));
                }
                ensure!(!determined_by(ps, &hyper), "instance {i}: a hyperplane of degree {e} already generates P");
            }
        }
        // t-rank-regularity of the top component at ceil(t |X|)
        let dtop = tuple_degree(&dec.x);
        if dtop >= 2 {
            let top: Vec<Poly> = dec.x.iter().filter(|q| q.deg() == dtop).cloned().collect();
            let threshold = dec.x.len() as u32;
            let mut low_vectors: Vec<Vec<u32>> = Vec::new();
            for c in all_points(dec.field.p(), top.len()) {
                let Some(j) = c.iter().position(|&a| a != 0) else { continue };
                if c[j] != 1 {
                    continue;
                }
                let mut g = Poly::zero(dec.field, dec.nvars);
                for (q, &a) in top.iter().zip(&c) {
                    g.add_scaled_assign(q, a);
                }
                // decide rk(g) < threshold: a verified witness of size < threshold,
                // or an exhaustive search below it that finds none
                let rb = rank_bounded_search(&g, threshold - 1, 1 << 24);
                let low = match (&rb.upper, &rb.lower) {
                    (RankValue::Finite(u), _) if *u < threshold => {
                        ensure!(
                            rb.witness.as_ref().is_some_and(|w| w.len() as u32 == *u && w.verify(&g)),
                            "instance {i}: unverified rank witness for {g}"
                        );
                        true
                    }
                    (_, RankValue::Finite(l)) if *l >= threshold => false,
                    (_, RankValue::Infinite) => false,
                    _ => {
                        let lb = bias_rank_lower_bound(&g, 16).unwrap_or(0);
                        ensure!(lb >= threshold, "instance {i}: rk({g}) < {threshold} undecided within budget");
                        false
                    }
                };
                if low {
                    low_vectors.push(c);
                }
            }
            let dim_low = polyreg::linalg::rank(&low_vectors, dec.field);
            ensure!(dim_low < top.len(), "instance {i}: every top element outside no strict subspace has rank >= {threshold}");
        }
        // size bound ((2t+1) d m)^(2^d)
        let base = (3 * d as u128 * m as u128) as f64;
        ensure!(
            (dec.k() as f64).ln() <= 2f64.powi(d as i32) * base.ln(),
            "instance {i}: |X| = {} exceeds the size bound",
            dec.k()
        );
        max_rounds = max_rounds.max(dec.provenance.len());
        max_size = max_size.max(dec.k());
        ctx.certified.push(Certified { label: format!("c5/{i}"), ps: ps.clone(), dec, u: 1 });
    }
    Ok(format!("{} instances, max rounds {max_rounds}, max |X| {max_size}", corpus.len()))
}

fn c6_square(ctx: &mut Ctx) -> Outcome {
    let q = poly("x1*x2 + x3*x4", 5, 4);
    let ps = vec![q.mul(&q)];
    let eps = rat(1, 2);
    let dec = weak_regular_decompose(&ps, &eps, &WeakConfig::default(), &StandardOracle::default())
        .map_err(|e| e.to_string())?;
    ensure!(dec.k() == 1, "expected one form, got {}", dec.k());
    let x1 = &dec.x[0];
    let scale = x1.leading_coeff();
    ensure!(*x1 == q.scale(scale), "X = {x1} is not a multiple of x1*x2 + x3*x4");
    let f = FieldSpec::new(5).unwrap();
    let c = f.inv(f.mul(scale, scale));
    ensure!(dec.outer[0] == Poly::monomial(f, &[2], c), "F = {} is not a multiple of y1^2", dec.outer[0]);
    ensure!(recomposes_pointwise(&dec, &ps), "F(X) != P");
    let delta = defect(&dec.x);
    ensure!(delta <= eps, "defect {delta} > eps");
    ensure!(!determined_by(&ps, &[]), "P is constant");
    let ex = extract_curve(&dec, &ps).map_err(|e| e.to_string())?;
    let img = image_set(&ps);
    let curve_vals = ex.curve.values();
    ensure!(curve_vals.iter().any(|v| *v != curve_vals[0]), "curve is constant");
    ensure!(curve_vals.iter().all(|v| img.contains(v)), "curve leaves the image");
    ensure!(ex.curve.degree() == 2, "curve degree {}", ex.curve.degree());
    let oracle_u = udeg_oracle(&ps).ok_or("udeg oracle too large")?;
    ensure!(oracle_u == Some(2), "brute-force udeg {oracle_u:?}");
    let lib_u = udeg(&ps).map_err(|e| e.to_string())?;
    ensure!(lib_u.u == Some(2), "library udeg {:?}", lib_u.u);
    ensure!(dec.degree() * 2 <= 4, "deg X = {} > d / udeg", dec.degree());
    let phi = build_spsp(&dec, 2).map_err(|e| e.to_string())?;
    let cert = phi.to_rkt();
    ensure!(cert.t == 2 && cert.r() == 1 && rkt_verify(&ps, &cert).valid, "rk_2 certificate from the formula fails");
    let searched = rkt_search(&ps, 2, 1, 1 << 22).map_err(|e| e.to_string())?;
    let sc = searched.certificate.ok_or("rkt search found nothing at r = 1")?;
    ensure!(rkt_verify(&ps, &sc).valid, "searched rk_2 certificate fails");
    let summary = format!("X = ({x1}), F = {}, defect {delta}, udeg 2, rk_2 <= 1", dec.outer[0]);
    ctx.certified.push(Certified { label: "c6".into(), ps, dec, u: 2 });
    Ok(summary)
}

fn c7_surj(ctx: &mut Ctx) -> Outcome {
    let corpus = corpus::nonsurjective_corpus(SEED_SURJ, 20);
    let mut seen = Vec::new();
    for (i, p) in corpus.iter().enumerate() {
        let ps = vec![p.clone()];
        let d = p.deg();
        ensure!(image_set(&ps).len() < 5, "instance {i} is surjective");
        let eps = Rational::from_integer(1) - rat(d as i128, 5);
        let dec = weak_regular_decompose(&ps, &eps, &WeakConfig::default(), &StandardOracle::default())
            .map_err(|e| format!("instance {i} ({p}): {e}"))?;
        ensure!(recomposes_pointwise(&dec, &ps), "instance {i}: F(X) != P");
        if dec.k() > 0 {
            ensure!(defect(&dec.x) <= eps, "instance {i}: defect above eps");
            ensure!(!determined_by(&ps, &dec.x[1..]), "instance {i}: P is a function of X'");
        }
        ensure!(2 * dec.degree() <= d, "instance {i} ({p}): deg X = {} > d/2 = {d}/2", dec.degree());
        let u = udeg_oracle(&ps).ok_or("udeg oracle too large")?.ok_or("constant instance")?;
        ensure!(u >= 2, "instance {i}: non-surjective but udeg {u}");
        ensure!(dec.degree() * u <= d, "instance {i}: deg X * udeg = {} * {u} > {d}", dec.degree());
        seen.push(format!("{}/{}", dec.degree(), d));
        ctx.certified.push(Certified { label: format!("c7/{i}"), ps, dec, u });
    }
    Ok(format!("20 instances, deg X / d: {}", seen.join(" ")))
}

fn c8_udeg(_: &mut Ctx) -> Outcome {
    let f5 = FieldSpec::new(5).unwrap();
    for (s, want) in [("x1^2", 2), ("x1^4", 4)] {
        let ps = vec![poly(s, 5, 1)];
        let lib = udeg(&ps).map_err(|e| e.to_string())?;
        ensure!(lib.u == Some(want), "udeg({s}) = {:?}", lib.u);
        ensure!(udeg_oracle(&ps) == Some(Some(want)), "brute force udeg({s}) != {want}");
    }
    let corpus = corpus::udeg_corpus(SEED_UDEG, 50);
    let mut rng = corpus::rng(SEED_UDEG + 1);
    use rand::Rng;
    let mut checks = 0;
    let mut compared = 0;
    for (i, ps) in corpus.iter().enumerate() {
        let f = ps[0].field();
        let p = f.p();
        let n = ps[0].nvars();
        let res = udeg(ps).map_err(|e| format!("instance {i}: {e}"))?;
        if let Some(o) = udeg_oracle(ps) {
            ensure!(o == res.u, "instance {i}: udeg {:?} vs brute force {o:?}", res.u);
            compared += 1;
        }
        let Some(u) = res.u else { continue };
        // witness
        let w = res.witness.as_ref().unwrap();
        let img = image_set(ps);
        ensure!(w.values().iter().all(|v| img.contains(v)) && w.is_nonconstant(), "instance {i}: bad witness");
        // udeg <= min_i deg_i over variables that occur
        let min_deg = (0..n).map(|v| ps.iter().map(|q| q.deg_in(v)).max().unwrap()).filter(|&e| e > 0).min().unwrap();
        ensure!(u <= min_deg, "instance {i}: udeg {u} > min deg_i {min_deg}");
        ensure!(u < p, "instance {i}: udeg {u} >= p");
        // line iff udeg 1
        let line = contains_line(&image(ps).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        ensure!(line.is_some() == (u == 1), "instance {i}: line {line:?} but udeg {u}");
        // affine invariance: a P + b
        let a = rng.gen_range(1..p);
        let shifted: Vec<Poly> =
            ps.iter().map(|q| q.scale(a).add(&Poly::constant(f, n, rng.gen_range(0..p)))).collect();
        ensure!(udeg(&shifted).map_err(|e| e.to_string())?.u == Some(u), "instance {i}: udeg(aP+b) differs");
        // composition: udeg(F(X)) >= udeg(F), with equality for surjective X
        let k = ps.len().min(2);
        let inner: Vec<Poly> = (0..n)
            .map(|_| {
                let d = rng.gen_range(1..p.min(3));
                corpus::random_poly(&mut rng, f, k, d, 2)
            })
            .collect();
        let composed: Vec<Poly> = ps.iter().map(|q| compose(q, &inner)).collect::<Result<_, _>>().map_err(|e| e.to_string())?;
        let uc = udeg(&composed).map_err(|e| e.to_string())?.u;
        ensure!(uc.is_none_or(|c| c >= u), "instance {i}: udeg(F(X)) = {uc:?} < udeg(F) = {u}");
        if image_set(&inner).len() == (p as usize).pow(n as u32) {
            ensure!(uc == Some(u), "instance {i}: surjective X but udeg(F(X)) = {uc:?} != {u}");
        }
        // squares in odd characteristic
        if p > 2 {
            let q = &ps[0];
            let sq = vec![q.mul(q)];
            let us = udeg(&sq).map_err(|e| e.to_string())?.u;
            if let Some(us) = us {
                ensure!(us >= 2, "instance {i}: udeg(P^2) = {us}");
                if image_set(&ps[..1]).len() == p as usize {
                    ensure!(us == 2, "instance {i}: surjective P but udeg(P^2) = {us}");
                }
            }
            // powers of a surjective polynomial
            if image_set(&ps[..1]).len() == p as usize {
                for t in 1..p {
                    let ut = udeg(&[q.pow(t)]).map_err(|e| e.to_string())?.u;
                    ensure!(ut.is_some_and(|v| v <= t), "instance {i}: udeg(Q^{t}) = {ut:?}");
                }
            }
        }
        checks += 1;
    }
    // univariate maps: udeg(U) <= deg U
    for _ in 0..20 {
        let m = rng.gen_range(1..=2);
        let curve: Vec<Poly> = (0..m)
            .map(|_| {
                let d = rng.gen_range(1..5);
                corpus::random_poly(&mut rng, f5, 1, d, 3)
            })
            .collect();
        let r = udeg(&curve).map_err(|e| e.to_string())?;
        ensure!(r.u.is_some_and(|v| v <= tuple_degree(&curve)), "udeg of a curve exceeds its degree");
        checks += 1;
    }
    Ok(format!("ground truths 2 and 4; {checks} property checks, {compared} brute-force comparisons"))
}

fn c9_formula(ctx: &mut Ctx) -> Outcome {
    ensure!(!ctx.certified.is_empty(), "no certified decompositions from criteria 5-7");
    let mut max_r = 0;
    let mut r_violations = Vec::new();
    for c in &ctx.certified {
        let d = tuple_degree(&c.ps);
        let phi = build_spsp(&c.dec, c.u).map_err(|e| format!("{}: {e}", c.label))?;
        ensure!(equiv_check(&phi, &c.ps).map_err(|e| e.to_string())?, "{}: formula differs from P", c.label);
        // independent pointwise evaluation of the formula
        let f = c.dec.field;
        for x in all_points(f.p(), c.dec.nvars) {
            let prods: Vec<u32> =
                phi.products.iter().map(|fs| fs.iter().fold(1, |acc, g| f.mul(acc, g.eval_unchecked(&x)))).collect();
            for (row, q) in phi.coefficients.iter().zip(&c.ps) {
                let v = row.iter().zip(&prods).fold(0, |acc, (&a, &b)| f.add(acc, f.mul(a, b)));
                ensure!(v == q.eval_unchecked(&x), "{}: formula differs at {x:?}", c.label);
            }
        }
        let rep = certify_fanin(&phi, c.ps.len(), d, c.u);
        let b_target = d.div_ceil(c.u);
        ensure!(phi.fanin.b <= b_target, "{}: b = {} > ceil(d/u) = {b_target}", c.label, phi.fanin.b);
        let k = c.dec.k() as u128;
        let r_target = 2 * k.pow(d);
        let monomials: u128 = (0..=d).map(|i| k.pow(i)).sum();
        ensure!((phi.fanin.r as u128) <= monomials, "{}: r = {} exceeds the monomial count {monomials}", c.label, phi.fanin.r);
        ensure!(rep.b_ok, "{}: fan-in report disagrees on b", c.label);
        ensure!(rep.r_ok == ((phi.fanin.r as u128) <= r_target), "{}: fan-in report disagrees on r", c.label);
        if (phi.fanin.r as u128) > r_target {
            r_violations.push(format!(
                "{}: r = {} > 2k^d = {r_target} (k = {k}, d = {d}, F = {:?})",
                c.label,
                phi.fanin.r,
                c.dec.outer.iter().map(|g| g.to_string()).collect::<Vec<_>>()
            ));
        }
        max_r = max_r.max(phi.fanin.r);
    }
    ensure!(
        r_violations.is_empty(),
        "{} of {} formulas exceed r <= 2k^d: {}",
        r_violations.len(),
        ctx.certified.len(),
        r_violations.join("; ")
    );
    Ok(format!("{} formulas equivalent, max top fan-in {max_r}", ctx.certified.len()))
}

/// Certificates for a representative slice of the runs above.
fn certificate_batch() -> Result<Vec<String>, String> {
    let mut out = Vec::new();
    let oracle = StandardOracle::default();
    let err = |e: polyreg::Error| e.to_string();
    let input = |ps: &[Poly]| {
        let n = ps[0].nvars();
        let names: Vec<String> = (1..=ps.len()).map(|i| format!("P{i}")).collect();
        Input::new(&default_names("x", n), &names, ps).map_err(err)
    };
    // the square instance, every certificate kind
    let q = poly("x1*x2 + x3*x4", 5, 4);
    let ps = vec![q.mul(&q)];
    let dec = weak_regular_decompose(&ps, &rat(1, 2), &WeakConfig::default(), &oracle).map_err(err)?;
    let ex = extract_curve(&dec, &ps).map_err(err)?;
    out.push(CertificateFile::new(input(&ps)?, decomposition_payload("weak", &dec, None, Some(&ex))).to_json());
    let phi = build_spsp(&dec, 2).map_err(err)?;
    out.push(CertificateFile::new(input(&ps)?, rkt_payload(&phi.to_rkt())).to_json());
    out.push(CertificateFile::new(input(&ps)?, formula_payload(&phi, &certify_fanin(&phi, 1, 4, 2))).to_json());
    out.push(CertificateFile::new(input(&ps)?, udeg_payload(&udeg(&ps).map_err(err)?)).to_json());
    // analysis reports
    for x in corpus::fourier_corpus(SEED_FOURIER, 10) {
        let reg = if x.iter().all(Poly::is_form) && x[0].deg() == tuple_degree(&x) {
            Some(regularity_defect(&x, &rat(1, 2)).map_err(err)?)
        } else {
            None
        };
        out.push(CertificateFile::new(input(&x)?, report_payload(&x, reg).map_err(err)?).to_json());
    }
    // rank regularizations
    let t = Rational::from_integer(1);
    for ps in corpus::regularize_corpus(SEED_REGULARIZE, 5) {
        let dec = rank_regularize(&ps, &t, &oracle).map_err(err)?;
        out.push(CertificateFile::new(input(&ps)?, decomposition_payload("rank", &dec, Some(&t), None)).to_json());
    }
    // weak decompositions of non-surjective polynomials
    for p in corpus::nonsurjective_corpus(SEED_SURJ, 5) {
        let ps = vec![p];
        let eps = Rational::from_integer(1) - rat(ps[0].deg() as i128, 5);
        let dec = weak_regular_decompose(&ps, &eps, &WeakConfig::default(), &oracle).map_err(err)?;
        let ex = extract_curve(&dec, &ps).ok();
        out.push(CertificateFile::new(input(&ps)?, decomposition_payload("weak", &dec, None, ex.as_ref())).to_json());
    }
    Ok(out)
}

fn c10_determinism(_: &mut Ctx) -> Outcome {
    let a = certificate_batch()?;
    let b = certificate_batch()?;
    ensure!(a.len() == b.len(), "batch sizes differ");
    for (i, (x, y)) in a.iter().zip(&b).enumerate() {
        ensure!(x == y, "certificate {i} differs between runs");
        let cert = CertificateFile::from_json(x).map_err(|e| e.to_string())?;
        ensure!(cert.to_json() == *x, "certificate {i} does not re-serialize identically");
        verify(&cert, None).map_err(|e| format!("certificate {i}: {e}"))?;
    }
    let bytes: usize = a.iter().map(String::len).sum();
    Ok(format!("{} certificates, {bytes} bytes, byte-identical and verified", a.len()))
}

#[test]
fn acceptance() {
    let criteria: Vec<(&str, Criterion)> = vec![
        ("Fourier identities", c1_fourier),
        ("popular lines are contained", c2_contain_line),
        ("low-rank span structure", c3_low_rank_span),
        ("rank oracles agree", c4_rank_oracles),
        ("rank regularization", c5_rank_regularize),
        ("weak pipeline on (x1x2+x3x4)^2", c6_square),
        ("non-surjective polynomials", c7_surj),
        ("univariate degree", c8_udeg),
        ("formula synthesis", c9_formula),
        ("determinism", c10_determinism),
    ];
    let mut ctx = Ctx::default();
    let mut failed = Vec::new();
    for (i, (name, run)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let res = catch_unwind(AssertUnwindSafe(|| run(&mut ctx)))
            .unwrap_or_else(|e| Err(format!("panic: {}", e.downcast_ref::<String>().cloned().unwrap_or_default())));
        let secs = start.elapsed().as_secs_f64();
        match res {
            Ok(detail) => println!("criterion {:>2} PASS  {name} ({secs:.1}s): {detail}", i + 1),
            Err(why) => {
                println!("criterion {:>2} FAIL  {name} ({secs:.1}s): {why}", i + 1);
                failed.push(i + 1);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
