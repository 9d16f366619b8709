//! JSON certificates and their re-verification. Checks here only expand,
//! compose and evaluate; no search is ever re-run.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::ffpoly::{compose, tuple_context, tuple_degree, FieldSpec, Monomial, Poly};
use crate::formula::{certify_fanin, equiv_check, FaninReport, SpspFormula};
use crate::imagery::{image, Curve, CurveExtraction, Udeg};
use crate::rankor::{rkt_verify, RktCertificate};
use crate::rational::{format_rational, parse_rational};
use crate::regularize::Decomposition;
use crate::spaces::tuple_member_fiber_test;
use crate::spectral::{bias, joint_distribution, regularity_defect, Line, RegularityReport};

pub const SCHEMA: &str = "polyreg-cert/1";

/// A polynomial as its sorted list of (exponents, coefficient) pairs.
pub type Terms = Vec<(Vec<u16>, u32)>;

pub fn to_terms(q: &Poly) -> Terms {
    q.terms().map(|(m, c)| (m.exps().to_vec(), c)).collect()
}

pub fn from_terms(field: FieldSpec, nvars: usize, terms: &Terms) -> Result<Poly> {
    let mut q = Poly::zero(field, nvars);
    let mut prev: Option<Monomial> = None;
    for (exps, c) in terms {
        if exps.len() != nvars {
            return Err(Error::DimensionMismatch { expected: nvars, got: exps.len() });
        }
        let m = Monomial::new(exps.clone());
        if !m.is_reduced(field.p()) || *c == 0 || *c >= field.p() {
            return Err(Error::Invalid(format!("term {exps:?} * {c} is not reduced")));
        }
        if prev.as_ref().is_some_and(|pm| *pm >= m) {
            return Err(Error::Invalid("terms are not strictly sorted".into()));
        }
        q.add_scaled_assign(&Poly::monomial(field, exps, 1), *c);
        prev = Some(m);
    }
    Ok(q)
}

fn polys_from(field: FieldSpec, nvars: usize, list: &[Terms]) -> Result<Vec<Poly>> {
    list.iter().map(|t| from_terms(field, nvars, t)).collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Input {
    pub p: u32,
    pub vars: Vec<String>,
    pub names: Vec<String>,
    pub polys: Vec<Terms>,
}

impl Input {
    pub fn new(vars: &[String], names: &[String], ps: &[Poly]) -> Result<Self> {
        let (f, n) = tuple_context(ps)?;
        if vars.len() != n || names.len() != ps.len() {
            return Err(Error::DimensionMismatch { expected: n, got: vars.len() });
        }
        Ok(Input { p: f.p(), vars: vars.to_vec(), names: names.to_vec(), polys: ps.iter().map(to_terms).collect() })
    }

    pub fn digest(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("plain data serializes");
        hex::encode(Sha256::digest(bytes))
    }

    pub fn field(&self, budget: Option<u64>) -> Result<FieldSpec> {
        match budget {
            Some(b) => FieldSpec::with_budget(self.p, b),
            None => FieldSpec::new(self.p),
        }
    }

    pub fn polys(&self, field: FieldSpec) -> Result<Vec<Poly>> {
        polys_from(field, self.vars.len(), &self.polys)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveJson {
    pub coords: Vec<Terms>,
    pub line: Option<Line>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecompositionPayload {
    /// "weak" or "rank"
    pub method: String,
    pub x: Vec<Terms>,
    pub outer: Vec<Terms>,
    pub degree: u32,
    pub eps: Option<String>,
    pub defect: Option<String>,
    pub t: Option<String>,
    pub minimal: bool,
    pub pruned: bool,
    pub rounds: usize,
    pub curve: Option<CurveJson>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RktPayload {
    pub t: u32,
    pub summands: Vec<Vec<Terms>>,
    pub coefficients: Vec<Vec<u32>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FormulaPayload {
    pub k: usize,
    pub products: Vec<Vec<Terms>>,
    pub coefficients: Vec<Vec<u32>>,
    pub report: FaninReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UdegPayload {
    /// None stands for infinity.
    pub u: Option<u32>,
    pub witness: Option<Vec<Terms>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportPayload {
    /// Joint value counts of the tuple, first coordinate least significant.
    pub counts: Vec<u64>,
    /// Bias of each component as (re, im), 12 decimals.
    pub bias: Vec<(String, String)>,
    pub regularity: Option<RegularityReport>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload", rename_all = "lowercase")]
pub enum Payload {
    Decomposition(DecompositionPayload),
    Rkt(RktPayload),
    Formula(FormulaPayload),
    Udeg(UdegPayload),
    Report(ReportPayload),
}

impl Payload {
    pub fn kind(&self) -> &'static str {
        match self {
            Payload::Decomposition(_) => "decomposition",
            Payload::Rkt(_) => "rkt",
            Payload::Formula(_) => "formula",
            Payload::Udeg(_) => "udeg",
            Payload::Report(_) => "report",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateFile {
    pub schema: String,
    pub version: String,
    pub input_digest: String,
    pub input: Input,
    #[serde(flatten)]
    pub payload: Payload,
}

impl CertificateFile {
    pub fn new(input: Input, payload: Payload) -> Self {
        CertificateFile {
            schema: SCHEMA.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            input_digest: input.digest(),
            input,
            payload,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("plain data serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse { col: e.column(), msg: format!("line {}: {e}", e.line()) })
    }
}

pub fn decomposition_payload(method: &str, dec: &Decomposition, t: Option<&crate::Rational>, curve: Option<&CurveExtraction>) -> Payload {
    Payload::Decomposition(DecompositionPayload {
        method: method.into(),
        x: dec.x.iter().map(to_terms).collect(),
        outer: dec.outer.iter().map(to_terms).collect(),
        degree: dec.degree(),
        eps: dec.flags.epsilon.as_ref().map(format_rational),
        defect: dec.flags.defect.as_ref().map(format_rational),
        t: t.map(format_rational),
        minimal: dec.flags.minimal,
        pruned: dec.flags.pruned,
        rounds: dec.provenance.len(),
        curve: curve.map(|c| CurveJson { coords: c.curve.coords.iter().map(to_terms).collect(), line: Some(c.line.clone()) }),
    })
}

pub fn rkt_payload(cert: &RktCertificate) -> Payload {
    Payload::Rkt(RktPayload {
        t: cert.t,
        summands: cert.summands.iter().map(|fs| fs.iter().map(to_terms).collect()).collect(),
        coefficients: cert.coefficients.clone(),
    })
}

pub fn formula_payload(phi: &SpspFormula, report: &FaninReport) -> Payload {
    Payload::Formula(FormulaPayload {
        k: phi.k,
        products: phi.products.iter().map(|fs| fs.iter().map(to_terms).collect()).collect(),
        coefficients: phi.coefficients.clone(),
        report: report.clone(),
    })
}

pub fn udeg_payload(u: &Udeg) -> Payload {
    Payload::Udeg(UdegPayload { u: u.u, witness: u.witness.as_ref().map(|c| c.coords.iter().map(to_terms).collect()) })
}

pub fn report_payload(ps: &[Poly], regularity: Option<RegularityReport>) -> Result<Payload> {
    let counts = joint_distribution(ps)?.counts;
    let bias = ps
        .iter()
        .map(|q| bias(q).map(|b| (format!("{:.12}", b.re + 0.0), format!("{:.12}", b.im + 0.0))))
        .collect::<Result<_>>()?;
    Ok(Payload::Report(ReportPayload { counts, bias, regularity }))
}

fn fail(msg: impl Into<String>) -> Error {
    Error::VerificationFailed(msg.into())
}

fn check(cond: bool, msg: &str, done: &mut Vec<String>) -> Result<()> {
    if !cond {
        return Err(fail(format!("check does not hold: {msg}")));
    }
    done.push(msg.to_string());
    Ok(())
}

/// Re-checks a certificate against its inline input. Returns the list of
/// checks that passed, or the first that failed.
pub fn verify(cert: &CertificateFile, budget: Option<u64>) -> Result<Vec<String>> {
    let mut done = Vec::new();
    check(cert.schema == SCHEMA, "schema is polyreg-cert/1", &mut done)?;
    check(cert.input.digest() == cert.input_digest, "input digest matches", &mut done)?;
    let f = cert.input.field(budget)?;
    let n = cert.input.vars.len();
    let ps = cert.input.polys(f)?;
    match &cert.payload {
        Payload::Decomposition(d) => verify_decomposition(d, f, n, &ps, &mut done)?,
        Payload::Rkt(r) => {
            let summands = r.summands.iter().map(|fs| polys_from(f, n, fs)).collect::<Result<Vec<_>>>()?;
            let rc = RktCertificate { t: r.t, summands, coefficients: r.coefficients.clone() };
            let res = rkt_verify(&ps, &rc);
            if !res.valid {
                return Err(fail(res.diagnosis.unwrap_or_default()));
            }
            done.push(format!("rk_{} <= {} expansion", r.t, rc.r()));
        }
        Payload::Formula(fp) => {
            let products = fp.products.iter().map(|fs| polys_from(f, n, fs)).collect::<Result<Vec<_>>>()?;
            let phi = SpspFormula::new(f, n, fp.k, products, fp.coefficients.clone());
            check(equiv_check(&phi, &ps)?, "formula agrees with the input on every point", &mut done)?;
            let rep = certify_fanin(&phi, ps.len(), fp.report.d, fp.report.u);
            check(rep == fp.report, "fan-in report matches the formula", &mut done)?;
            check(fp.report.d == tuple_degree(&ps), "reported degree matches the input", &mut done)?;
        }
        Payload::Udeg(u) => {
            let img = image(&ps)?;
            match (&u.u, &u.witness) {
                (None, None) => check(img.len() == 1, "constant map has infinite udeg", &mut done)?,
                (Some(ud), Some(w)) => {
                    let curve = Curve { coords: polys_from(f, 1, w)? };
                    check(curve.coords.len() == ps.len(), "witness has one coordinate per component", &mut done)?;
                    check(curve.degree() == *ud, "witness degree equals u", &mut done)?;
                    check(curve.is_nonconstant(), "witness is nonconstant", &mut done)?;
                    check(curve.image()?.is_subset(&img), "witness image lies in the image", &mut done)?;
                }
                _ => return Err(fail("udeg value and witness disagree")),
            }
        }
        Payload::Report(r) => {
            check(joint_distribution(&ps)?.counts == r.counts, "value counts match", &mut done)?;
            if let Some(reg) = &r.regularity {
                check(regularity_defect(&ps, &reg.epsilon)? == *reg, "defect matches", &mut done)?;
            }
        }
    }
    Ok(done)
}

fn verify_decomposition(d: &DecompositionPayload, f: FieldSpec, n: usize, ps: &[Poly], done: &mut Vec<String>) -> Result<()> {
    let x = polys_from(f, n, &d.x)?;
    let k = x.len();
    let outer = polys_from(f, k, &d.outer)?;
    check(outer.len() == ps.len(), "one outer map per component", done)?;
    for (g, q) in outer.iter().zip(ps) {
        let back = if x.is_empty() { Poly::constant(f, n, g.constant_term()) } else { compose(g, &x)? };
        if back != *q {
            return Err(fail(format!("outer map {g} does not recompose to {q}")));
        }
    }
    done.push("F(X) = P".into());
    check(x.iter().all(Poly::is_form), "X consists of forms", done)?;
    check(tuple_degree(&x) == d.degree, "reported degree matches X", done)?;
    if d.pruned {
        let ok = outer.iter().zip(ps).all(|(g, q)| {
            g.terms().all(|(m, _)| m.exps().iter().zip(&x).map(|(&e, xj)| e as u32 * xj.deg()).sum::<u32>() <= q.deg())
        });
        check(ok, "outer maps are pruned", done)?;
    }
    if let Some(eps) = &d.eps {
        let eps = parse_rational(eps)?;
        if k > 0 {
            let rep = regularity_defect(&x, &eps)?;
            let claimed = d.defect.as_deref().map(parse_rational).transpose()?;
            check(claimed == Some(rep.defect), "defect matches", done)?;
            check(rep.verdict, "defect <= eps", done)?;
        }
    }
    if d.method == "weak" && k > 0 {
        check(!tuple_member_fiber_test(ps, &x[1..])?, "P is not a function of X'", done)?;
    }
    if d.minimal && k > 0 {
        for j in 0..k {
            let rest: Vec<Poly> = x.iter().enumerate().filter(|&(i, _)| i != j).map(|(_, q)| q.clone()).collect();
            if tuple_member_fiber_test(ps, &rest)? {
                return Err(fail(format!("P is a function of X without X_{}", j + 1)));
            }
        }
        done.push("no X_j is redundant".into());
    }
    if let Some(c) = &d.curve {
        let curve = Curve { coords: polys_from(f, 1, &c.coords)? };
        check(curve.is_nonconstant(), "curve is nonconstant", done)?;
        check(curve.image()?.is_subset(&image(ps)?), "curve image lies in the image of P", done)?;
        check(curve.degree() * d.degree <= tuple_degree(ps), "deg U * deg X <= deg P", done)?;
    }
    Ok(())
}
