//! End-to-end classification of pairs of unipotent diffeomorphisms up to
//! special conjugation, and explicit conjugations by the path method.

mod path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::boundary::FactoredBoundary;
use crate::coeff::Coefficient;
use crate::diffeo::{compose, log_updiffeo, DiffeoJson, ParamDiffeo};
use crate::error::{Error, Result};
use crate::homeq::{
    cofactor_over, free_of_residues, lambda_variables, numerator_from_units, special_solve, HomEquation,
    SpecialSolution,
};
use crate::residue::{residue_table, SampleOptions};
use crate::series::{MultiSeries, SeriesJson};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    /// Special conjugate at the verdict's order.
    SpecialConjugate,
    RefutedResidues,
    RefutedHomological,
    Inconclusive,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::SpecialConjugate => 0,
            Status::RefutedResidues | Status::RefutedHomological => 3,
            Status::Inconclusive => 4,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Status::SpecialConjugate => "special-conjugate",
            Status::RefutedResidues => "refuted-residues",
            Status::RefutedHomological => "refuted-homological",
            Status::Inconclusive => "inconclusive",
        }
    }
}

/// `σ` with `σ∘φ₁ = φ₂∘σ` at `order`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConjugationCertificate {
    pub sigma: ParamDiffeo,
    pub order: i32,
}

/// Outcome of comparing `σ∘φ₁` with `φ₂∘σ`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConjugacyCheck {
    pub holds: bool,
    /// First differing term, `monomial: left ≠ right`.
    pub witness: Option<String>,
}

pub fn verify_conjugation(cert: &ConjugationCertificate, phi1: &ParamDiffeo, phi2: &ParamDiffeo) -> Result<ConjugacyCheck> {
    let n = cert.order;
    let left = compose(&cert.sigma, phi1)?;
    let right = compose(phi2, &cert.sigma)?;
    if left.order() < n || right.order() < n {
        return Err(Error::PrecisionExhausted(format!(
            "compositions are valid to order {}, certificate claims {n}",
            left.order().min(right.order())
        )));
    }
    Ok(match left.xcomp().first_difference(right.xcomp(), n) {
        None => ConjugacyCheck { holds: true, witness: None },
        Some((m, a, b)) => ConjugacyCheck {
            holds: false,
            witness: Some(format!("{}: {a} ≠ {b}", m.fmt_with(phi1.nvars()))),
        },
    })
}

/// Path-method conjugation from `φ₁` to `φ₂` built on a special solution.
///
/// Only the tangent case is handled in exact arithmetic: `û₁(0) = û₂(0)`
/// and `∂(hf)/∂x = 0` at the origin (see [`Error::PathNotExact`]).
pub fn build_conjugation(
    phi1: &ParamDiffeo,
    phi2: &ParamDiffeo,
    boundary: &FactoredBoundary,
    beta: &SpecialSolution,
    n: i32,
) -> Result<ConjugationCertificate> {
    let u1 = cofactor_over(phi1, boundary)?;
    let u2 = cofactor_over(phi2, boundary)?;
    let a = numerator_from_units(&u1, &u2)?;
    let h = path::path_generator(&u1, &a, &beta.beta, boundary)?;
    let sigma = path::time_one_map(&h);
    if sigma.order() < n {
        return Err(Error::PrecisionExhausted(format!(
            "conjugation is valid to order {}, {n} requested",
            sigma.order()
        )));
    }
    let cert = ConjugationCertificate {
        sigma: ParamDiffeo::unipotent(sigma.truncate(n))?,
        order: n,
    };
    let check = verify_conjugation(&cert, phi1, phi2)?;
    if !check.holds {
        return Err(Error::VerificationFailed(check.witness.unwrap_or_default()));
    }
    Ok(cert)
}

/// Residues of `φ₁` and `φ₂` along one factor at one point.
#[derive(Clone, Debug, PartialEq)]
pub struct ResidueRow {
    pub component: usize,
    pub point: Vec<Complex64>,
    pub first: Option<Complex64>,
    pub second: Option<Complex64>,
    /// Why a value is missing.
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Certificate {
    pub beta: SpecialSolution,
    pub conjugation: Option<ConjugationCertificate>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Verdict {
    pub status: Status,
    pub order: i32,
    pub lambda: Option<Coefficient>,
    /// `2û₁(0)` and `2û₂(0)`.
    pub second_derivative: Option<[Coefficient; 2]>,
    pub residue_table: Vec<ResidueRow>,
    pub certificate: Option<Certificate>,
    pub witness: Option<String>,
    pub notes: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct ClassifyOptions {
    pub order: i32,
    pub samples: Vec<Vec<Complex64>>,
    /// Residue comparison tolerance, relative to `max(1, |r|)`.
    pub tol: f64,
    pub sampling: SampleOptions,
    /// Also build and verify `σ` when the pair is special.
    pub conjugation: bool,
}

impl ClassifyOptions {
    pub fn new(order: i32, samples: Vec<Vec<Complex64>>) -> Self {
        Self {
            order,
            samples,
            tol: 1e-8,
            sampling: SampleOptions::default(),
            conjugation: true,
        }
    }
}

fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
    (a - b).norm() <= tol * a.norm().max(b.norm()).max(1.0)
}

fn fmt_c(z: Complex64) -> String {
    format!("{}{:+}i", z.re, z.im)
}

fn fmt_point(p: &[Complex64]) -> String {
    let parts: Vec<String> = p.iter().map(|z| fmt_c(*z)).collect();
    format!("({})", parts.join(", "))
}

pub fn classify_pair(
    phi1: &ParamDiffeo,
    phi2: &ParamDiffeo,
    boundary: &FactoredBoundary,
    opts: &ClassifyOptions,
) -> Result<Verdict> {
    let u1 = cofactor_over(phi1, boundary)?;
    let u2 = cofactor_over(phi2, boundary)?;
    let x1 = log_updiffeo(phi1)?;
    let x2 = log_updiffeo(phi2)?;

    let factors: Vec<(usize, &MultiSeries)> = boundary.non_fibered().map(|(j, f)| (j, &f.poly)).collect();
    let r1 = residue_table(&x1, &factors, &opts.samples, &opts.sampling);
    let r2 = residue_table(&x2, &factors, &opts.samples, &opts.sampling);
    let jobs = opts.samples.iter().flat_map(|p| factors.iter().map(move |(j, _)| (*j, p)));
    let mut table = Vec::new();
    let mut mismatch = None;
    for ((j, p), (a, b)) in jobs.zip(r1.into_iter().zip(r2)) {
        let note = match (&a, &b) {
            (Err(e), _) | (_, Err(e)) => Some(e.to_string()),
            _ => None,
        };
        let row = ResidueRow {
            component: j,
            point: p.clone(),
            first: a.ok().map(|s| s.value),
            second: b.ok().map(|s| s.value),
            note,
        };
        if let (Some(va), Some(vb)) = (row.first, row.second) {
            if mismatch.is_none() && !close(va, vb, opts.tol) {
                mismatch = Some(format!(
                    "residues along factor {j} at {} differ: {} vs {}",
                    fmt_point(p),
                    fmt_c(va),
                    fmt_c(vb)
                ));
            }
        }
        table.push(row);
    }

    let a = numerator_from_units(&u1, &u2)?;
    let (lambda, second_derivative) = match lambda_variables(boundary) {
        Ok(_) => (
            Some(a.constant_term()),
            Some([
                u1.constant_term().scale_int(2),
                u2.constant_term().scale_int(2),
            ]),
        ),
        Err(_) => (None, None),
    };
    let mut verdict = Verdict {
        status: Status::Inconclusive,
        order: opts.order,
        lambda,
        second_derivative,
        residue_table: table,
        certificate: None,
        witness: None,
        notes: Vec::new(),
    };
    if let Some(w) = mismatch {
        verdict.status = Status::RefutedResidues;
        verdict.witness = Some(w);
        return Ok(verdict);
    }

    let e = HomEquation::new(a, boundary.clone())?;
    let free = free_of_residues(&e, &opts.samples, opts.tol, &opts.sampling)?;
    if let Some(c) = free.checks.iter().find(|c| c.residue.norm() >= opts.tol) {
        verdict.status = Status::RefutedResidues;
        verdict.witness = Some(format!(
            "residue of A/f_N dx along factor {} at {} (root {}) is {}",
            c.factor,
            fmt_point(&c.point),
            fmt_c(c.root),
            fmt_c(c.residue)
        ));
        return Ok(verdict);
    }
    if free.checks.is_empty() {
        verdict.notes.push("no residue sample of A/f_N was usable".into());
    }

    match special_solve(&e, opts.order) {
        Ok(sol) => {
            verdict.order = sol.certified_order;
            if sol.certified_order < opts.order {
                verdict.witness = Some(format!(
                    "inputs certify only order {}, {} requested",
                    sol.certified_order, opts.order
                ));
                return Ok(verdict);
            }
            let mut conjugation = None;
            if opts.conjugation {
                match build_conjugation(phi1, phi2, boundary, &sol, sol.certified_order) {
                    Ok(c) => conjugation = Some(c),
                    Err(err @ (Error::PathNotExact(_) | Error::PrecisionExhausted(_))) => {
                        verdict.notes.push(format!("no explicit σ: {err}"))
                    }
                    Err(err) => return Err(err),
                }
            }
            verdict.status = Status::SpecialConjugate;
            verdict.certificate = Some(Certificate { beta: sol, conjugation });
        }
        Err(Error::NotFreeOfResidues { factor }) => {
            verdict.status = Status::RefutedResidues;
            verdict.witness = Some(format!(
                "A is not divisible by the simple factor {factor}, so A/f_N dx has a residue along it"
            ));
        }
        Err(Error::NoSolution { order, witness }) => {
            verdict.status = Status::RefutedHomological;
            verdict.order = order;
            verdict.witness = Some(witness);
        }
        Err(Error::PrecisionExhausted(msg)) => verdict.witness = Some(msg),
        Err(err) => return Err(err),
    }
    Ok(verdict)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ResidueRowJson {
    pub component: usize,
    pub point: Vec<[f64; 2]>,
    pub phi1: Option<[f64; 2]>,
    pub phi2: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CertificateJson {
    pub beta: SeriesJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<DiffeoJson>,
    pub verified: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VerdictJson {
    pub status: Status,
    pub order: i32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<[String; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub second_derivative: Option<[[String; 2]; 2]>,
    pub residue_table: Vec<ResidueRowJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<CertificateJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

fn pair(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

impl From<&Verdict> for VerdictJson {
    fn from(v: &Verdict) -> Self {
        VerdictJson {
            status: v.status,
            order: v.order,
            lambda: v.lambda.as_ref().map(Coefficient::to_strings),
            second_derivative: v
                .second_derivative
                .as_ref()
                .map(|[a, b]| [a.to_strings(), b.to_strings()]),
            residue_table: v
                .residue_table
                .iter()
                .map(|r| ResidueRowJson {
                    component: r.component,
                    point: r.point.iter().copied().map(pair).collect(),
                    phi1: r.first.map(pair),
                    phi2: r.second.map(pair),
                    note: r.note.clone(),
                })
                .collect(),
            certificate: v.certificate.as_ref().map(|c| CertificateJson {
                beta: SeriesJson::from(&c.beta.beta),
                sigma: c.conjugation.as_ref().map(|s| DiffeoJson::from(&s.sigma)),
                verified: c.conjugation.is_some(),
            }),
            witness: v.witness.clone(),
            notes: v.notes.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary::Factor;
    use crate::diffeo::{exp_vertical, VerticalField};
    use crate::residue::{sample_grid, to_complex_point};

    fn s(src: &str, n: usize, order: i32) -> MultiSeries {
        MultiSeries::parse(n, order, src).unwrap()
    }

    fn exp_of(u: &MultiSeries, f: &MultiSeries) -> ParamDiffeo {
        exp_vertical(&VerticalField::new(u.mul(f).unwrap()).unwrap())
    }

    fn equide(order: i32) -> (FactoredBoundary, MultiSeries) {
        let g = s("x2 - x*x1", 3, order);
        let b = FactoredBoundary::new(vec![Factor::new(g.clone(), 2, false)]).unwrap();
        (b, g.mul(&g).unwrap())
    }

    /// `φ₁ = exp(û₁ f ∂x)`, `φ₂ = exp(û₂ f ∂x)` with `1/û₂ = 1/û₁ − A`.
    fn pair(u1: &MultiSeries, a: &MultiSeries, f: &MultiSeries) -> (ParamDiffeo, ParamDiffeo) {
        let u2 = u1.unit_inverse().unwrap().sub(a).unwrap().unit_inverse().unwrap();
        (exp_of(u1, f), exp_of(&u2, f))
    }

    fn points(nparams: usize) -> Vec<Vec<Complex64>> {
        sample_grid(nparams, 4, 0).iter().map(|p| to_complex_point(p)).collect()
    }

    #[test]
    fn identity_certificate() {
        let (b, f) = equide(10);
        let phi = exp_of(&s("1 + x", 3, 10), &f);
        let cert = ConjugationCertificate {
            sigma: ParamDiffeo::identity(3, 8),
            order: 8,
        };
        assert!(verify_conjugation(&cert, &phi, &phi).unwrap().holds);
        let (_, phi2) = pair(&s("1", 3, 10), &s("x1", 3, 10), &f);
        let check = verify_conjugation(&cert, &phi, &phi2).unwrap();
        assert!(!check.holds);
        assert!(check.witness.is_some());
        let v = classify_pair(&phi, &phi, &b, &ClassifyOptions::new(8, points(2))).unwrap();
        assert_eq!(v.status, Status::SpecialConjugate);
        let c = v.certificate.unwrap();
        assert!(c.beta.beta.is_zero());
        assert_eq!(c.conjugation.unwrap().sigma, ParamDiffeo::identity(3, 8));
    }

    #[test]
    fn one_variable_path() {
        // f = x², û₁ = 1, 1/û₂ = 1 − x²: A = x², β = x²
        let n = 10;
        let f = s("x^2", 1, n + 2);
        let b = FactoredBoundary::new(vec![Factor::new(s("x", 1, n + 2), 2, false)]).unwrap();
        let (phi1, phi2) = pair(&s("1", 1, n + 2), &s("x^2", 1, n + 2), &f);
        let e = HomEquation::new(numerator_from_units(&s("1", 1, n), &cofactor_over(&phi2, &b).unwrap()).unwrap(), b.clone())
            .unwrap();
        let sol = special_solve(&e, n).unwrap();
        assert_eq!(sol.beta, s("x^2", 1, n));
        let cert = build_conjugation(&phi1, &phi2, &b, &sol, n).unwrap();
        assert!(verify_conjugation(&cert, &phi1, &phi2).unwrap().holds);
        assert!(cert.sigma.xcomp().sub(&s("x", 1, n)).unwrap().lowest_degree() >= Some(3));
    }

    #[test]
    fn equide_path_and_lambda() {
        let n = 8;
        let (b, f) = equide(n + 2);
        let one = s("1", 3, n + 2);
        let (phi1, phi2) = pair(&one, &s("x1", 3, n + 2), &f);
        let v = classify_pair(&phi1, &phi2, &b, &ClassifyOptions::new(n, points(2))).unwrap();
        assert_eq!(v.status, Status::SpecialConjugate);
        assert_eq!(v.lambda, Some(Coefficient::zero()));
        assert!(v.certificate.unwrap().conjugation.is_some());

        // 1/û₁ = 2, 1/û₂ = 1
        let (phi1, phi2) = pair(&s("1/2", 3, n + 2), &one, &f);
        let v = classify_pair(&phi1, &phi2, &b, &ClassifyOptions::new(n, points(2))).unwrap();
        assert_eq!(v.status, Status::RefutedHomological);
        assert_eq!(v.order, n);
        assert!(v.witness.as_deref().unwrap().contains("coefficient of 1 "), "{:?}", v.witness);
        assert_eq!(v.lambda, Some(Coefficient::one()));
        assert_eq!(v.second_derivative, Some([Coefficient::one(), Coefficient::from_int(2)]));
    }

    #[test]
    fn residue_mismatch_refutes() {
        // f = x²(x − x1)²: the residue depends on û along the moving factor
        let n = 10;
        let b = FactoredBoundary::new(vec![
            Factor::new(s("x", 2, n), 2, false),
            Factor::new(s("x - x1", 2, n), 2, false),
        ])
        .unwrap();
        let f = s("x^2*(x - x1)^2", 2, n);
        let phi1 = exp_of(&s("1", 2, n), &f);
        let phi2 = exp_of(&s("2", 2, n), &f);
        let v = classify_pair(&phi1, &phi2, &b, &ClassifyOptions::new(4, points(1))).unwrap();
        assert_eq!(v.status, Status::RefutedResidues);
        assert!(v.witness.is_some());
        assert!(v.lambda.is_none());
    }

    #[test]
    fn non_tangent_pair_has_no_exact_path() {
        // A = −1 over f = x²: special (β = 1) but u₁(0) ≠ u₂(0)
        let n = 6;
        let f = s("x^2", 1, n + 2);
        let b = FactoredBoundary::new(vec![Factor::new(s("x", 1, n + 2), 2, false)]).unwrap();
        let (phi1, phi2) = pair(&s("1", 1, n + 2), &s("-1", 1, n + 2), &f);
        let v = classify_pair(&phi1, &phi2, &b, &ClassifyOptions::new(n, vec![vec![]])).unwrap();
        assert_eq!(v.status, Status::SpecialConjugate);
        assert!(v.certificate.unwrap().conjugation.is_none());
        assert!(v.notes.iter().any(|n| n.contains("exact")));
    }
}
