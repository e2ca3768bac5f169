//! The `unipotent` command line.
//!
//! Every subcommand reads one JSON document (a path, or `-` for stdin).
//! Series are either wire objects `{"nvars", "order", "terms"}` or
//! expressions such as `"x^2*(x - x1)^2"`, read with the document's
//! `nvars` and `order` (default `--order + 4`).

use std::io::{Read, Write};
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Deserialize;
use serde_json::{json, Value};

use crate::boundary::{Factor, FactoredBoundary};
use crate::classify::{
    build_conjugation, classify_pair, ClassifyOptions, ConjugationCertificate, Status, VerdictJson,
};
use crate::coeff::{parse_rational, Coefficient};
use crate::diffeo::{conjugate, exp_vertical, log_updiffeo, DiffeoJson, ParamDiffeo, VerticalField};
use crate::error::Error;
use crate::homeq::{
    evil_generators, free_of_residues, quaspe_search, special_solve, HomEquation,
};
use crate::residue::{
    residue_nonunipotent, residue_sample_unipotent, sample_grid, to_complex_point, SampleJson, SampleOptions,
};
use crate::series::{Monomial, MultiSeries, SeriesJson};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INTERNAL: i32 = 1;
pub const EXIT_MALFORMED: i32 = 2;
pub const EXIT_REFUTED: i32 = 3;
pub const EXIT_INCONCLUSIVE: i32 = 4;

#[derive(Parser, Debug)]
#[command(name = "unipotent", version, about = "Formal classification of unipotent parameterized diffeomorphisms")]
pub struct Cli {
    /// Truncation order N of the computation.
    #[arg(long, global = true, default_value_t = 8)]
    pub order: i32,
    /// Tolerance for numeric residue comparisons.
    #[arg(long, global = true, default_value_t = 1e-8)]
    pub tol: f64,
    /// Parameter points: a JSON file, or `auto` for the deterministic grid.
    #[arg(long, global = true, default_value = "auto")]
    pub samples: String,
    /// Offset into the deterministic sample grid.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// x∘exp(X) for a nilpotent vertical field (`field`).
    Exp { input: PathBuf },
    /// Logarithm of a unipotent diffeomorphism (`phi`).
    Log { input: PathBuf },
    /// Residue samples along the non-fibered factors.
    Residue { input: PathBuf },
    /// Homological equation `∂α/∂x = A/f`.
    Homeq {
        #[command(subcommand)]
        action: HomeqAction,
    },
    /// Classify a pair up to special conjugation.
    Classify { input: PathBuf },
    /// Build a conjugation of a special pair, or compute σ⁻¹∘φ∘σ.
    Conjugate { input: PathBuf },
    /// Run the golden cases.
    Selftest,
}

#[derive(Subcommand, Debug)]
pub enum HomeqAction {
    /// Sampled test of the vanishing of residues.
    Check { input: PathBuf },
    /// Truncated special solver, with an optional quasi-special search.
    Solve { input: PathBuf },
}

#[derive(Debug)]
enum Failure {
    Malformed(String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl Failure {
    fn exit_code(&self) -> i32 {
        match self {
            Failure::Malformed(_) => EXIT_MALFORMED,
            Failure::Lib(e) => match e {
                Error::NoSolution { .. } | Error::NotFreeOfResidues { .. } => EXIT_REFUTED,
                Error::PrecisionExhausted(_)
                | Error::PathNotExact(_)
                | Error::BoundExceeded { .. }
                | Error::SingularSample(_)
                | Error::NoRoot(_)
                | Error::ZeroGerm { .. } => EXIT_INCONCLUSIVE,
                Error::VerificationFailed(_) => EXIT_INTERNAL,
                _ => EXIT_MALFORMED,
            },
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Malformed(m) => write!(f, "malformed input: {m}"),
            Failure::Lib(e) => write!(f, "{e}"),
        }
    }
}

type Outcome = std::result::Result<(i32, Value, String), Failure>;

#[derive(Deserialize, Debug)]
#[serde(untagged)]
enum SeriesInput {
    Expr(String),
    Wire(SeriesJson),
}

#[derive(Deserialize, Debug)]
#[serde(untagged)]
enum Coord {
    Real(f64),
    Pair([f64; 2]),
    Text(String),
}

#[derive(Deserialize, Debug)]
struct FactorInput {
    poly: SeriesInput,
    mult: u32,
    #[serde(default)]
    fibered: bool,
}

/// A diffeomorphism given by its x-component, its logarithm, or the
/// cofactor `û` (or `1/û`) of its logarithm over `f`.
#[derive(Deserialize, Debug, Default)]
#[serde(deny_unknown_fields)]
struct DiffeoInput {
    phi: Option<SeriesInput>,
    field: Option<SeriesInput>,
    cofactor: Option<SeriesInput>,
    inverse_cofactor: Option<SeriesInput>,
}

#[derive(Deserialize, Debug, Default)]
#[serde(deny_unknown_fields)]
struct Document {
    nvars: Option<usize>,
    order: Option<i32>,
    #[serde(default, rename = "description")]
    _description: Option<String>,
    #[serde(default)]
    factors: Vec<FactorInput>,
    points: Option<Vec<Vec<Coord>>>,
    phi: Option<SeriesInput>,
    field: Option<SeriesInput>,
    sigma: Option<SeriesInput>,
    first: Option<DiffeoInput>,
    second: Option<DiffeoInput>,
    #[serde(rename = "A")]
    a: Option<SeriesInput>,
    h: Option<SeriesInput>,
    kmax: Option<u32>,
}

struct Ctx<'a> {
    cli: &'a Cli,
    doc: Document,
}

fn malformed(m: impl Into<String>) -> Failure {
    Failure::Malformed(m.into())
}

fn read_input(path: &PathBuf) -> std::result::Result<String, Failure> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| malformed(format!("stdin: {e}")))?;
        Ok(s)
    } else {
        std::fs::read_to_string(path).map_err(|e| malformed(format!("{}: {e}", path.display())))
    }
}

fn coord(c: &Coord) -> std::result::Result<Complex64, Failure> {
    match c {
        Coord::Real(r) => Ok(Complex64::new(*r, 0.0)),
        Coord::Pair([re, im]) => Ok(Complex64::new(*re, *im)),
        Coord::Text(s) => Ok(Coefficient::real(parse_rational(s)?).to_complex()),
    }
}

impl<'a> Ctx<'a> {
    fn load(cli: &'a Cli, path: &PathBuf) -> std::result::Result<Self, Failure> {
        let src = read_input(path)?;
        let doc: Document = serde_json::from_str(&src).map_err(|e| malformed(e.to_string()))?;
        Ok(Self { cli, doc })
    }

    fn order(&self) -> i32 {
        self.doc.order.unwrap_or(self.cli.order + 4)
    }

    fn series(&self, s: &SeriesInput) -> std::result::Result<MultiSeries, Failure> {
        match s {
            SeriesInput::Wire(w) => Ok(MultiSeries::try_from(w)?),
            SeriesInput::Expr(e) => {
                let nvars = self.doc.nvars.ok_or_else(|| malformed("expression series need \"nvars\""))?;
                Ok(MultiSeries::parse(nvars, self.order(), e)?)
            }
        }
    }

    fn required<'b>(&self, s: &'b Option<SeriesInput>, name: &str) -> std::result::Result<&'b SeriesInput, Failure> {
        s.as_ref().ok_or_else(|| malformed(format!("missing \"{name}\"")))
    }

    fn boundary(&self) -> std::result::Result<FactoredBoundary, Failure> {
        if self.doc.factors.is_empty() {
            return Err(malformed("missing \"factors\""));
        }
        let factors = self
            .doc
            .factors
            .iter()
            .map(|f| Ok(Factor::new(self.series(&f.poly)?, f.mult, f.fibered)))
            .collect::<std::result::Result<Vec<_>, Failure>>()?;
        Ok(FactoredBoundary::new(factors)?)
    }

    fn diffeo(&self, d: &DiffeoInput, boundary: Option<&FactoredBoundary>) -> std::result::Result<ParamDiffeo, Failure> {
        let given = [&d.phi, &d.field, &d.cofactor, &d.inverse_cofactor]
            .iter()
            .filter(|s| s.is_some())
            .count();
        if given != 1 {
            return Err(malformed(
                "a diffeomorphism needs exactly one of \"phi\", \"field\", \"cofactor\", \"inverse_cofactor\"",
            ));
        }
        if let Some(p) = &d.phi {
            return Ok(ParamDiffeo::new(self.series(p)?)?);
        }
        let field = if let Some(x) = &d.field {
            self.series(x)?
        } else {
            let f = boundary.ok_or_else(|| malformed("cofactors need \"factors\""))?.product();
            let f = f.with_order(self.order());
            match (&d.cofactor, &d.inverse_cofactor) {
                (Some(u), _) => self.series(u)?.mul(&f)?,
                (_, Some(v)) => self.series(v)?.unit_inverse()?.mul(&f)?,
                _ => unreachable!(),
            }
        };
        Ok(exp_vertical(&VerticalField::new(field)?))
    }

    fn pair(&self, b: &FactoredBoundary) -> std::result::Result<(ParamDiffeo, ParamDiffeo), Failure> {
        let first = self.doc.first.as_ref().ok_or_else(|| malformed("missing \"first\""))?;
        let second = self.doc.second.as_ref().ok_or_else(|| malformed("missing \"second\""))?;
        Ok((self.diffeo(first, Some(b))?, self.diffeo(second, Some(b))?))
    }

    /// Points from `--samples FILE`, else the document, else the grid.
    fn points(&self, nvars: usize) -> std::result::Result<Vec<Vec<Complex64>>, Failure> {
        let nparams = nvars - 1;
        let raw: Option<Vec<Vec<Coord>>> = if self.cli.samples != "auto" {
            let src = std::fs::read_to_string(&self.cli.samples)
                .map_err(|e| malformed(format!("{}: {e}", self.cli.samples)))?;
            Some(serde_json::from_str(&src).map_err(|e| malformed(format!("samples: {e}")))?)
        } else {
            None
        };
        let pts = match raw.as_ref().or(self.doc.points.as_ref()) {
            Some(list) => list
                .iter()
                .map(|p| p.iter().map(coord).collect::<std::result::Result<Vec<_>, _>>())
                .collect::<std::result::Result<Vec<_>, _>>()?,
            None if nparams == 0 => vec![vec![]],
            None => sample_grid(nparams, 5, self.cli.seed)
                .iter()
                .map(|p| to_complex_point(p))
                .collect(),
        };
        if let Some(bad) = pts.iter().find(|p| p.len() != nparams) {
            return Err(malformed(format!(
                "sample point has {} coordinates, expected {nparams}",
                bad.len()
            )));
        }
        Ok(pts)
    }
}

fn fmt_num(v: f64) -> String {
    let s = format!("{v:.9}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.into() }
}

pub fn fmt_complex(z: Complex64) -> String {
    let im = fmt_num(z.im);
    let sign = if im.starts_with('-') { "" } else { "+" };
    format!("{}{sign}{im}i", fmt_num(z.re))
}

fn fmt_point(p: &[Complex64]) -> String {
    let parts: Vec<String> = p.iter().map(|z| fmt_complex(*z)).collect();
    format!("({})", parts.join(", "))
}

fn cmd_exp(ctx: &Ctx) -> Outcome {
    let x = ctx.series(ctx.required(&ctx.doc.field, "field")?)?;
    let phi = exp_vertical(&VerticalField::new(x)?);
    let text = format!("x∘φ = {}", phi.xcomp());
    Ok((EXIT_OK, json!({ "phi": DiffeoJson::from(&phi) }), text))
}

fn cmd_log(ctx: &Ctx) -> Outcome {
    let phi = ParamDiffeo::new(ctx.series(ctx.required(&ctx.doc.phi, "phi")?)?)?;
    let x = log_updiffeo(&phi)?;
    let text = format!("log φ = ({}) ∂/∂x", x.fhat());
    Ok((EXIT_OK, json!({ "field": SeriesJson::from(x.fhat()) }), text))
}

fn cmd_residue(ctx: &Ctx) -> Outcome {
    let b = ctx.boundary()?;
    let diffeo_input = DiffeoInput {
        phi: ctx.doc.phi.as_ref().map(clone_input),
        field: ctx.doc.field.as_ref().map(clone_input),
        ..Default::default()
    };
    let phi = ctx.diffeo(&diffeo_input, Some(&b))?;
    let pts = ctx.points(b.nvars())?;
    let opts = SampleOptions::default();
    let mut samples = Vec::new();
    let mut lines = Vec::new();
    if phi.is_unipotent() {
        let x = match &ctx.doc.field {
            Some(f) => VerticalField::new(ctx.series(f)?)?,
            None => log_updiffeo(&phi)?,
        };
        for p in &pts {
            for (j, f) in b.non_fibered() {
                match residue_sample_unipotent(&x, &f.poly, j, p, &opts) {
                    Ok(s) => {
                        lines.push(format!("factor {j} at {}: {}", fmt_point(p), fmt_complex(s.value)));
                        samples.push(SampleJson::from(&s));
                    }
                    Err(e) => {
                        lines.push(format!("factor {j} at {}: skipped ({e})", fmt_point(p)));
                    }
                }
            }
        }
    } else {
        // the points are fixed points (x, p) of a non-unipotent diffeomorphism
        for (i, q) in ctx.doc.points.iter().flatten().enumerate() {
            let q = q.iter().map(coord).collect::<std::result::Result<Vec<_>, _>>()?;
            if q.len() != b.nvars() {
                return Err(malformed("non-unipotent residues need points (x, p) with x fixed"));
            }
            match residue_nonunipotent(&phi, &q, i, ctx.cli.tol) {
                Ok(s) => {
                    lines.push(format!("fixed point {}: {}", fmt_point(&q), fmt_complex(s.value)));
                    samples.push(SampleJson::from(&s));
                }
                Err(e) => {
                    lines.push(format!("fixed point {}: skipped ({e})", fmt_point(&q)));
                }
            }
        }
    }
    let code = if samples.is_empty() { EXIT_INCONCLUSIVE } else { EXIT_OK };
    Ok((code, serde_json::to_value(&samples).expect("samples serialize"), lines.join("\n")))
}

fn clone_input(s: &SeriesInput) -> SeriesInput {
    match s {
        SeriesInput::Expr(e) => SeriesInput::Expr(e.clone()),
        SeriesInput::Wire(w) => SeriesInput::Wire(w.clone()),
    }
}

fn hom_equation(ctx: &Ctx) -> std::result::Result<HomEquation, Failure> {
    let b = ctx.boundary()?;
    let a = ctx.series(ctx.required(&ctx.doc.a, "A")?)?;
    Ok(HomEquation::new(a, b)?)
}

fn cmd_homeq_check(ctx: &Ctx) -> Outcome {
    let e = hom_equation(ctx)?;
    let pts = ctx.points(e.boundary.nvars())?;
    let v = free_of_residues(&e, &pts, ctx.cli.tol, &SampleOptions::default())?;
    let checks: Vec<Value> = v
        .checks
        .iter()
        .map(|c| {
            json!({
                "factor": c.factor,
                "point": c.point.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>(),
                "root": [c.root.re, c.root.im],
                "residue": [c.residue.re, c.residue.im],
            })
        })
        .collect();
    let skipped: Vec<Value> = v
        .skipped
        .iter()
        .map(|(p, why)| json!({ "point": p.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>(), "reason": why }))
        .collect();
    let (code, status) = if v.checks.is_empty() {
        (EXIT_INCONCLUSIVE, "inconclusive")
    } else if v.free {
        (EXIT_OK, "free")
    } else {
        (EXIT_REFUTED, "not-free")
    };
    let mut text = vec![format!("status {status}")];
    for c in &v.checks {
        text.push(format!(
            "factor {} at {} root {}: residue {}",
            c.factor,
            fmt_point(&c.point),
            fmt_complex(c.root),
            fmt_complex(c.residue)
        ));
    }
    for (p, why) in &v.skipped {
        text.push(format!("skipped {}: {why}", fmt_point(p)));
    }
    Ok((code, json!({ "status": status, "checks": checks, "skipped": skipped }), text.join("\n")))
}

fn cmd_homeq_solve(ctx: &Ctx) -> Outcome {
    let e = hom_equation(ctx)?;
    let n = ctx.cli.order;
    match special_solve(&e, n) {
        Ok(sol) => Ok((
            EXIT_OK,
            json!({ "status": "special", "order": sol.certified_order, "beta": SeriesJson::from(&sol.beta) }),
            format!("status special\norder {}\nβ = {}", sol.certified_order, sol.beta),
        )),
        Err(Error::NoSolution { order, witness }) => {
            let Some(h) = &ctx.doc.h else {
                return Ok((
                    EXIT_REFUTED,
                    json!({ "status": "not-special", "order": order, "witness": witness }),
                    format!("status not-special\norder {order}\nwitness {witness}"),
                ));
            };
            let h = ctx.series(h)?;
            let kmax = ctx.doc.kmax.unwrap_or(4);
            match quaspe_search(&e, &h, kmax, n) {
                Ok(q) => Ok((
                    EXIT_OK,
                    json!({
                        "status": "quasi-special",
                        "order": q.solution.certified_order,
                        "k": q.k,
                        "beta": SeriesJson::from(&q.solution.beta),
                        "membership": format!("{:?}", q.membership).to_lowercase(),
                    }),
                    format!("status quasi-special\nk {}\nβ = {}", q.k, q.solution.beta),
                )),
                Err(Error::BoundExceeded { kmax }) => Ok((
                    EXIT_INCONCLUSIVE,
                    json!({ "status": "inconclusive", "order": n, "kmax": kmax, "witness": witness }),
                    format!("status inconclusive\nno quasi-special equation for k <= {kmax}"),
                )),
                Err(err) => Err(err.into()),
            }
        }
        Err(Error::NotFreeOfResidues { factor }) => Ok((
            EXIT_REFUTED,
            json!({ "status": "not-special", "order": n, "witness": format!("not free of residues along factor {factor}") }),
            format!("status not-special\nnot free of residues along factor {factor}"),
        )),
        Err(err) => Err(err.into()),
    }
}

fn cmd_classify(ctx: &Ctx) -> Outcome {
    let b = ctx.boundary()?;
    let (phi1, phi2) = ctx.pair(&b)?;
    let mut opts = ClassifyOptions::new(ctx.cli.order, ctx.points(b.nvars())?);
    opts.tol = ctx.cli.tol;
    let v = classify_pair(&phi1, &phi2, &b, &opts)?;
    let mut text = vec![format!("status {}", v.status.as_str()), format!("order {}", v.order)];
    if let Some(l) = &v.lambda {
        text.push(format!("lambda {l}"));
    }
    if let Some([a, b]) = &v.second_derivative {
        text.push(format!("2û(0) {a} {b}"));
    }
    for r in &v.residue_table {
        let show = |z: Option<Complex64>| z.map(fmt_complex).unwrap_or_else(|| "-".into());
        text.push(format!(
            "residue factor {} at {}: {} | {}",
            r.component,
            fmt_point(&r.point),
            show(r.first),
            show(r.second)
        ));
    }
    if let Some(c) = &v.certificate {
        text.push(format!("β = {}", c.beta.beta));
        match &c.conjugation {
            Some(s) => text.push(format!("σ = {} (verified at order {})", s.sigma.xcomp(), s.order)),
            None => text.push("σ not constructed".into()),
        }
    }
    if let Some(w) = &v.witness {
        text.push(format!("witness {w}"));
    }
    for n in &v.notes {
        text.push(format!("note {n}"));
    }
    let value = serde_json::to_value(VerdictJson::from(&v)).expect("verdict serializes");
    Ok((v.status.exit_code(), value, text.join("\n")))
}

fn cmd_conjugate(ctx: &Ctx) -> Outcome {
    if let Some(sigma) = &ctx.doc.sigma {
        let phi = ParamDiffeo::unipotent(ctx.series(ctx.required(&ctx.doc.phi, "phi")?)?)?;
        let sigma = ParamDiffeo::new(ctx.series(sigma)?)?;
        let psi = conjugate(&phi, &sigma)?;
        let text = format!("x∘(σ⁻¹∘φ∘σ) = {}", psi.xcomp());
        return Ok((EXIT_OK, json!({ "phi": DiffeoJson::from(&psi) }), text));
    }
    let b = ctx.boundary()?;
    let (phi1, phi2) = ctx.pair(&b)?;
    let n = ctx.cli.order;
    let e = crate::homeq::build_homological(&phi1, &phi2, &b)?;
    let sol = special_solve(&e, n)?;
    let ConjugationCertificate { sigma, order } = build_conjugation(&phi1, &phi2, &b, &sol, n)?;
    Ok((
        EXIT_OK,
        json!({ "sigma": DiffeoJson::from(&sigma), "order": order, "verified": true }),
        format!("σ = {}\nverified σ∘φ₁ = φ₂∘σ at order {order}", sigma.xcomp()),
    ))
}

/// The golden cases, each `(name, passed, detail)`.
pub fn selftest_cases() -> Vec<(String, bool, String)> {
    let mut out = Vec::new();
    let mut record = |name: &str, r: std::result::Result<String, String>| match r {
        Ok(d) => out.push((name.to_string(), true, d)),
        Err(d) => out.push((name.to_string(), false, d)),
    };

    // Res(φ_(0,y)) = 2/y³ at x = 0 for φ = exp(x²(x − y)² ∂/∂x)
    record("residue 2/y^3", (|| {
        let x = VerticalField::new(MultiSeries::parse(2, 12, "x^2*(x - x1)^2").map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
        let factor = MultiSeries::var(2, 12, 0);
        let mut got = Vec::new();
        for (y, want) in [(0.5, 16.0), (1.0, 2.0), (1.0 / 3.0, 54.0)] {
            let s = residue_sample_unipotent(&x, &factor, 0, &[Complex64::new(y, 0.0)], &SampleOptions::default())
                .map_err(|e| e.to_string())?;
            if (s.value - want).norm() > 1e-9 {
                return Err(format!("y = {y}: {} vs {want}", fmt_complex(s.value)));
            }
            got.push(fmt_complex(s.value));
        }
        Ok(got.join(", "))
    })());

    // x∘exp(x² ∂/∂x) = x/(1 − x)
    record("exp geometric", (|| {
        let x = VerticalField::new(MultiSeries::parse(1, 16, "x^2").map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
        let phi = exp_vertical(&x);
        for k in 1..=16u16 {
            let c = phi.xcomp().coeff(&Monomial::new(&[k]));
            if !c.is_one() {
                return Err(format!("coefficient of x^{k} is {c}"));
            }
        }
        Ok("coefficients of x..x^16 all 1".into())
    })());

    let g = MultiSeries::parse(3, 12, "x2 - x*x1").expect("literal");
    let equide = FactoredBoundary::new(vec![Factor::new(g.clone(), 2, false)]).expect("literal");

    record("equide A = 1", (|| {
        let e = HomEquation::new(MultiSeries::one(3, 12), equide.clone()).map_err(|e| e.to_string())?;
        match special_solve(&e, 1) {
            Err(Error::NoSolution { witness, .. }) => Ok(witness),
            other => Err(format!("{other:?}")),
        }
    })());

    record("evil set", (|| {
        let gens = evil_generators(&equide).normalized();
        let shown: Vec<String> = gens.iter().map(|s| s.to_string()).collect();
        let expected = [MultiSeries::var(3, 1, 1), MultiSeries::var(3, 1, 2)];
        if gens.len() == 2 && gens.iter().zip(&expected).all(|(g, e)| g.eq_to_order(e, 1) && g.max_degree() == Some(1)) {
            Ok(shown.join(", "))
        } else {
            Err(shown.join(", "))
        }
    })());

    let pts: Vec<Vec<Complex64>> = sample_grid(2, 3, 0).iter().map(|p| to_complex_point(p)).collect();
    let f = g.mul(&g).expect("same nvars");
    let from_inverse = |v: &str| -> std::result::Result<ParamDiffeo, String> {
        let v = MultiSeries::parse(3, 12, v).map_err(|e| e.to_string())?;
        let x = v.unit_inverse().and_then(|u| u.mul(&f)).map_err(|e| e.to_string())?;
        Ok(exp_vertical(&VerticalField::new(x).map_err(|e| e.to_string())?))
    };
    for (name, v1, v2, want, lambda) in [
        ("lambda = 1", "2", "1", Status::RefutedHomological, Coefficient::one()),
        ("lambda = 0, A = x1", "1", "1 - x1", Status::SpecialConjugate, Coefficient::zero()),
    ] {
        record(name, (|| {
            let opts = ClassifyOptions::new(8, pts.clone());
            let v = classify_pair(&from_inverse(v1)?, &from_inverse(v2)?, &equide, &opts).map_err(|e| e.to_string())?;
            if v.status != want || v.lambda.as_ref() != Some(&lambda) {
                return Err(format!("{} with λ = {:?}", v.status.as_str(), v.lambda));
            }
            if want == Status::SpecialConjugate && v.certificate.as_ref().and_then(|c| c.conjugation.as_ref()).is_none() {
                return Err("no verified σ".into());
            }
            Ok(format!("{}, λ = {lambda}", v.status.as_str()))
        })());
    }
    out
}

fn cmd_selftest() -> Outcome {
    let cases = selftest_cases();
    let ok = cases.iter().all(|(_, p, _)| *p);
    let text: Vec<String> = cases
        .iter()
        .map(|(n, p, d)| format!("{} {n}: {d}", if *p { "PASS" } else { "FAIL" }))
        .collect();
    let value = json!(cases
        .iter()
        .map(|(n, p, d)| json!({ "case": n, "pass": p, "detail": d }))
        .collect::<Vec<_>>());
    Ok((if ok { EXIT_OK } else { EXIT_REFUTED }, value, text.join("\n")))
}

fn dispatch(cli: &Cli) -> Outcome {
    if cli.order < 0 {
        return Err(malformed("--order must be nonnegative"));
    }
    match &cli.command {
        Command::Exp { input } => cmd_exp(&Ctx::load(cli, input)?),
        Command::Log { input } => cmd_log(&Ctx::load(cli, input)?),
        Command::Residue { input } => cmd_residue(&Ctx::load(cli, input)?),
        Command::Homeq { action: HomeqAction::Check { input } } => cmd_homeq_check(&Ctx::load(cli, input)?),
        Command::Homeq { action: HomeqAction::Solve { input } } => cmd_homeq_solve(&Ctx::load(cli, input)?),
        Command::Classify { input } => cmd_classify(&Ctx::load(cli, input)?),
        Command::Conjugate { input } => cmd_conjugate(&Ctx::load(cli, input)?),
        Command::Selftest => cmd_selftest(),
    }
}

/// Run the command line and return the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_MALFORMED } else { EXIT_OK };
        }
    };
    match dispatch(&cli) {
        Ok((code, value, text)) => {
            let body = match cli.format {
                Format::Json => serde_json::to_string_pretty(&value).expect("json"),
                Format::Text => text,
            };
            // a closed pipe is not an error of the computation
            let _ = writeln!(std::io::stdout().lock(), "{body}");
            code
        }
        Err(f) => {
            match cli.format {
                Format::Json => println!("{}", json!({ "error": f.to_string() })),
                Format::Text => eprintln!("error: {f}"),
            }
            f.exit_code()
        }
    }
}
