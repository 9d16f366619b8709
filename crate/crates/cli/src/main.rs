use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use polyreg::certificate::{
    decomposition_payload, formula_payload, report_payload, rkt_payload, udeg_payload, verify, CertificateFile, Input,
};
use polyreg::ffpoly::{tuple_degree, Poly};
use polyreg::formula::{build_spsp, certify_fanin};
use polyreg::imagery::{extract_curve, udeg};
use polyreg::problem::{parse_problem, Problem};
use polyreg::rankor::{bias_rank_lower_bound, rank_bounded_search, rank_quadratic, rkt_search, RankValue, StandardOracle};
use polyreg::rational::{format_rational, parse_rational};
use polyreg::regularize::{rank_regularize, weak_regular_decompose, Decomposition, WeakConfig};
use polyreg::spectral::{bias, joint_distribution, regularity_defect};
use polyreg::{Error, Rational};

#[derive(Parser)]
#[command(name = "polyreg", version, about = "Regular decompositions of polynomial maps over small prime fields")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct Common {
    /// Problem file
    #[arg(short = 'f', long = "file")]
    file: PathBuf,
    /// Regularity parameter, e.g. 1/2
    #[arg(long, value_parser = rat)]
    eps: Option<Rational>,
    /// Rank-regularity parameter, or the factor degree for `rank`
    #[arg(short = 't', value_parser = rat)]
    t: Option<Rational>,
    /// Target product fan-in
    #[arg(short = 'u')]
    u: Option<u32>,
    #[arg(long)]
    max_rank: Option<u32>,
    /// Enumeration budget
    #[arg(long)]
    budget: Option<u64>,
    /// Write a JSON certificate here
    #[arg(long)]
    json: Option<PathBuf>,
    /// Seed for corpus generation; the commands here are deterministic and ignore it
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Bias, value distribution and regularity defect
    Analyze(Common),
    /// Rank bounds per component, and an rk_t certificate with -t
    Rank(Common),
    /// Weak regular decomposition (--eps) or rank regularization (-t)
    Regularize(Common),
    /// Univariate degree with a witness curve
    Udeg(Common),
    /// Depth-4 formula from a weak regular decomposition
    Formula(Common),
    /// Re-check a certificate
    Verify {
        cert: PathBuf,
        #[arg(long)]
        budget: Option<u64>,
    },
}

fn rat(s: &str) -> Result<Rational, String> {
    parse_rational(s).map_err(|e| e.to_string())
}

/// Outcome of a command: the certificate to write, if any, and whether the
/// run certified what it set out to.
struct Done {
    cert: Option<CertificateFile>,
    certified: bool,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn load(c: &Common) -> Result<Problem, Failure> {
    let text = std::fs::read_to_string(&c.file).map_err(|e| Failure::Usage(format!("{}: {e}", c.file.display())))?;
    let mut pr = parse_problem(&text)?;
    if let Some(b) = c.budget {
        pr.budget = Some(b);
        pr = parse_problem(&pr.to_text())?;
    }
    Ok(pr)
}

fn oracle(c: &Common, pr: &Problem) -> StandardOracle {
    let mut o = StandardOracle::default();
    if let Some(r) = c.max_rank.or(pr.max_rank) {
        o.max_rank = r;
    }
    if let Some(b) = c.budget.or(pr.budget) {
        o.budget = b;
    }
    o
}

fn input(pr: &Problem) -> Result<Input, Failure> {
    Ok(Input::new(&pr.vars, &pr.names, &pr.polys)?)
}

fn show(pr: &Problem, q: &Poly) -> String {
    q.display_with(&pr.vars)
}

fn show_outer(q: &Poly) -> String {
    q.display_with(&polyreg::ffpoly::default_names("y", q.nvars()))
}

fn print_decomposition(pr: &Problem, dec: &Decomposition) {
    println!("X ({} forms, degree {}):", dec.k(), dec.degree());
    for (j, x) in dec.x.iter().enumerate() {
        println!("  y{} = {}", j + 1, show(pr, x));
    }
    for (name, g) in pr.names.iter().zip(&dec.outer) {
        println!("{name} = {}", show_outer(g));
    }
    let fl = &dec.flags;
    println!("minimal: {}  pruned: {}  rounds: {}", fl.minimal, fl.pruned, dec.provenance.len());
    if let (Some(d), Some(e)) = (&fl.defect, &fl.epsilon) {
        println!("defect: {} <= eps {}", format_rational(d), format_rational(e));
    }
    if let Some(t) = &fl.t_rank_regular {
        println!("rank-regular at t = {}", format_rational(t));
    }
}

fn analyze(c: &Common) -> Result<Done, Failure> {
    let pr = load(c)?;
    let eps = c.eps.or(pr.eps).unwrap_or(Rational::new(1, 2));
    for (name, q) in pr.names.iter().zip(&pr.polys) {
        let b = bias(q)?;
        println!("{name}: degree {}, bias {:.6}{:+.6}i (|bias| = {:.6})", q.deg(), b.re + 0.0, b.im + 0.0, b.norm());
    }
    let joint = joint_distribution(&pr.polys)?;
    let support = joint.support();
    println!("image: {} of {} points", support.len(), joint.counts.len());
    let mut counts: Vec<u64> = joint.counts.iter().copied().filter(|&n| n > 0).collect();
    counts.sort_unstable();
    if let (Some(lo), Some(hi)) = (counts.first(), counts.last()) {
        println!("fiber sizes: min {lo}, max {hi}, total {}", joint.total);
    }
    let regular = pr.polys.iter().all(Poly::is_form) && pr.polys[0].deg() == tuple_degree(&pr.polys);
    let reg = if regular {
        let r = regularity_defect(&pr.polys, &eps)?;
        println!("{r}");
        Some(r)
    } else {
        println!("defect: not defined (components must be forms, first of maximal degree)");
        None
    };
    let cert = CertificateFile::new(input(&pr)?, report_payload(&pr.polys, reg)?);
    Ok(Done { cert: Some(cert), certified: true })
}

fn rank(c: &Common) -> Result<Done, Failure> {
    let pr = load(c)?;
    let o = oracle(c, &pr);
    let mut exact = true;
    for (name, q) in pr.names.iter().zip(&pr.polys) {
        let top = q.top_part();
        let bound = if top.deg() == 2 && pr.field.p() % 2 == 1 {
            rank_quadratic(&top)?
        } else {
            rank_bounded_search(&top, o.max_rank, o.budget)
        };
        let fmt = |v: RankValue| match v {
            RankValue::Finite(r) => r.to_string(),
            RankValue::Infinite => "inf".into(),
        };
        match bound.value() {
            Some(v) => println!("{name}: rank {}", fmt(v)),
            None => {
                exact = false;
                println!("{name}: rank in [{}, {}] (inconclusive)", fmt(bound.lower), fmt(bound.upper));
            }
        }
        if top.deg() >= 2 {
            match bias_rank_lower_bound(&top, 64) {
                Ok(lb) => println!("{name}: bias lower bound {lb}"),
                Err(Error::ZeroBias { .. }) => println!("{name}: bias is zero"),
                Err(e) => return Err(e.into()),
            }
        }
    }
    let Some(t) = c.t.or(pr.t) else {
        if c.json.is_some() {
            return Err(Failure::Usage("--json with `rank` needs -t".into()));
        }
        return Ok(Done { cert: None, certified: exact });
    };
    if !t.is_integer() || t <= Rational::from_integer(0) {
        return Err(Failure::Usage("-t must be a positive integer for `rank`".into()));
    }
    let t = *t.numer() as u32;
    let r_max = o.max_rank.max(pr.polys.len() as u32);
    let s = rkt_search(&pr.polys, t, r_max, o.budget)?;
    match s.certificate {
        Some(cert) => {
            println!("rk_{t} <= {} (proven lower bound {})", cert.r(), s.lower);
            for (i, fs) in cert.summands.iter().enumerate() {
                let parts: Vec<String> = fs.iter().map(|g| format!("({})", show(&pr, g))).collect();
                println!("  s{} = {}", i + 1, if parts.is_empty() { "1".into() } else { parts.join("*") });
            }
            let file = CertificateFile::new(input(&pr)?, rkt_payload(&cert));
            Ok(Done { cert: Some(file), certified: true })
        }
        None => {
            println!("no rk_{t} certificate with at most {r_max} summands (lower bound {})", s.lower);
            Ok(Done { cert: None, certified: false })
        }
    }
}

fn regularize(c: &Common) -> Result<Done, Failure> {
    let pr = load(c)?;
    pr.check_pipeline()?;
    let o = oracle(c, &pr);
    if let Some(eps) = c.eps.or(pr.eps) {
        let dec = weak_regular_decompose(&pr.polys, &eps, &WeakConfig::default(), &o)?;
        print_decomposition(&pr, &dec);
        let ex = match extract_curve(&dec, &pr.polys) {
            Ok(ex) => {
                let coords: Vec<String> = ex.curve.coords.iter().map(|g| g.display_with(&["t".to_string()])).collect();
                println!("curve U(t) = ({}) of degree {}", coords.join(", "), ex.curve.degree());
                Some(ex)
            }
            Err(Error::NoDependentComponent) => None,
            Err(e) => return Err(e.into()),
        };
        let payload = decomposition_payload("weak", &dec, None, ex.as_ref());
        return Ok(Done { cert: Some(CertificateFile::new(input(&pr)?, payload)), certified: true });
    }
    if let Some(t) = c.t.or(pr.t) {
        let dec = rank_regularize(&pr.polys, &t, &o)?;
        print_decomposition(&pr, &dec);
        let payload = decomposition_payload("rank", &dec, Some(&t), None);
        return Ok(Done { cert: Some(CertificateFile::new(input(&pr)?, payload)), certified: true });
    }
    Err(Failure::Usage("regularize needs --eps or -t".into()))
}

fn udeg_cmd(c: &Common) -> Result<Done, Failure> {
    let pr = load(c)?;
    let r = udeg(&pr.polys)?;
    println!("u={r}");
    if let Some(w) = &r.witness {
        let coords: Vec<String> = w.coords.iter().map(|g| g.display_with(&["x".to_string()])).collect();
        println!("witness: ({})", coords.join(", "));
    }
    Ok(Done { cert: Some(CertificateFile::new(input(&pr)?, udeg_payload(&r))), certified: true })
}

fn formula(c: &Common) -> Result<Done, Failure> {
    let pr = load(c)?;
    pr.check_pipeline()?;
    let o = oracle(c, &pr);
    let d = pr.degree();
    let p = pr.field.p();
    let eps = c.eps.or(pr.eps).unwrap_or(Rational::new(p as i128 - d as i128, p as i128));
    let dec = weak_regular_decompose(&pr.polys, &eps, &WeakConfig::default(), &o)?;
    let u = match c.u.or(pr.u) {
        Some(u) => u,
        None => udeg(&pr.polys)?.u.unwrap_or(1),
    };
    let phi = build_spsp(&dec, u)?;
    let rep = certify_fanin(&phi, pr.polys.len(), d, u);
    println!("decomposition: {} forms of degree {} (eps {})", dec.k(), dec.degree(), format_rational(&eps));
    println!("fan-in: r = {}, a = {}, b = {} (u = {u})", rep.fanin.r, rep.fanin.a, rep.fanin.b);
    println!("b <= ceil(d/u) = {}: {}", rep.b_target, rep.b_ok);
    println!("r <= 2k^d = {}: {}", rep.r_target, rep.r_ok);
    if rep.prod_fanin_exceeds_u {
        println!("product fan-in {} exceeds u = {u}", rep.fanin.a);
    }
    println!("log2 (2m)^(2^d) = {:.1} (leading term only)", rep.log2_f_leading);
    Ok(Done { cert: Some(CertificateFile::new(input(&pr)?, formula_payload(&phi, &rep))), certified: true })
}

fn verify_cmd(path: &Path, budget: Option<u64>) -> Result<Done, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    let cert = CertificateFile::from_json(&text)?;
    let checks = verify(&cert, budget)?;
    println!("{} certificate: {} checks passed", cert.payload.kind(), checks.len());
    for c in checks {
        println!("  ok  {c}");
    }
    Ok(Done { cert: None, certified: true })
}

fn write_json(path: &Path, body: &str) -> Result<(), String> {
    std::fs::write(path, body).map_err(|e| format!("{}: {e}", path.display()))
}

fn error_json(e: &Error) -> String {
    let esc: String = e
        .to_string()
        .chars()
        .flat_map(|c| match c {
            '"' => "\\\"".chars().collect::<Vec<_>>(),
            '\\' => "\\\\".chars().collect(),
            c if c.is_control() => format!("\\u{:04x}", c as u32).chars().collect(),
            c => vec![c],
        })
        .collect();
    format!(
        "{{\n  \"schema\": \"{}\",\n  \"error\": {{\n    \"code\": \"{}\",\n    \"message\": \"{esc}\"\n  }}\n}}\n",
        polyreg::certificate::SCHEMA,
        e.code(),
    )
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let json = match &cli.cmd {
        Cmd::Verify { .. } => None,
        Cmd::Analyze(c) | Cmd::Rank(c) | Cmd::Regularize(c) | Cmd::Udeg(c) | Cmd::Formula(c) => c.json.clone(),
    };
    let res = match &cli.cmd {
        Cmd::Analyze(c) => analyze(c),
        Cmd::Rank(c) => rank(c),
        Cmd::Regularize(c) => regularize(c),
        Cmd::Udeg(c) => udeg_cmd(c),
        Cmd::Formula(c) => formula(c),
        Cmd::Verify { cert, budget } => verify_cmd(cert, *budget),
    };
    match res {
        Ok(done) => {
            if let (Some(path), Some(cert)) = (&json, &done.cert) {
                if let Err(e) = write_json(path, &cert.to_json()) {
                    eprintln!("error: {e}");
                    return ExitCode::from(1);
                }
            }
            if done.certified {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            }
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error[{}]: {e}", e.code());
            if let Some(path) = &json {
                if let Err(w) = write_json(path, &error_json(&e)) {
                    eprintln!("error: {w}");
                }
            }
            if e.is_non_certification() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
