//! The homological equation `∂α/∂x = A/f` attached to a pair of
//! unipotent diffeomorphisms, and the truncated decision procedures around
//! it: special solutions, vanishing of residues, the evil set.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::boundary::FactoredBoundary;
use crate::coeff::Coefficient;
use crate::diffeo::{log_updiffeo, ParamDiffeo};
use crate::error::{Error, Result};
use crate::linalg::{self, Equation};
use crate::residue::{taylor_shift, SampleOptions};
use crate::roots::{eval_poly, polynomial_roots};
use crate::series::{divide_exact, divide_series, Monomial, MultiSeries};

#[derive(Clone, Debug, PartialEq)]
pub struct HomEquation {
    pub a: MultiSeries,
    pub boundary: FactoredBoundary,
}

impl HomEquation {
    pub fn new(a: MultiSeries, boundary: FactoredBoundary) -> Result<Self> {
        if a.nvars() != boundary.nvars() {
            return Err(Error::VarCountMismatch {
                left: a.nvars(),
                right: boundary.nvars(),
            });
        }
        Ok(Self { a, boundary })
    }
}

/// `û = log(φ)(x)/f`, after checking that `(x∘φ − x)/f` is a unit.
pub fn cofactor_over(phi: &ParamDiffeo, boundary: &FactoredBoundary) -> Result<MultiSeries> {
    let q = divide_exact(&phi.displacement(), boundary)?;
    if q.constant_term().is_zero() {
        return Err(Error::Invalid("(x∘φ − x)/f is not a unit".into()));
    }
    let x = log_updiffeo(phi)?;
    let u = divide_exact(x.fhat(), boundary)?;
    if u.constant_term().is_zero() {
        return Err(Error::Invalid("log(φ)/f is not a unit".into()));
    }
    Ok(u)
}

/// `A = 1/û₁ − 1/û₂ = (û₂ − û₁)/(û₁û₂)`.
pub fn numerator_from_units(u1: &MultiSeries, u2: &MultiSeries) -> Result<MultiSeries> {
    u2.sub(u1)?.mul(&u1.mul(u2)?.unit_inverse()?)
}

pub fn build_homological(phi1: &ParamDiffeo, phi2: &ParamDiffeo, boundary: &FactoredBoundary) -> Result<HomEquation> {
    let u1 = cofactor_over(phi1, boundary)?;
    let u2 = cofactor_over(phi2, boundary)?;
    HomEquation::new(numerator_from_units(&u1, &u2)?, boundary.clone())
}

/// `α = β / (f_F · Π f_j^{l_j − 1})` solves the equation at `certified_order`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpecialSolution {
    pub beta: MultiSeries,
    pub certified_order: i32,
}

/// The reduced problem `L(β) = A′` with `L(β) = β_x·P − β·Q`, where
/// `P = Π f_j` and `Q = Σ (l_j − 1) f_j' Π_{k≠j} f_k` over the non-fibered
/// factors of multiplicity ≥ 2.
#[derive(Clone, Debug)]
pub struct ReducedEquation {
    pub rhs: MultiSeries,
    pub p: MultiSeries,
    pub q: MultiSeries,
    /// No factor of multiplicity ≥ 2: `L = ∂/∂x`.
    pub trivial: bool,
}

impl ReducedEquation {
    pub fn apply(&self, beta: &MultiSeries, order: i32) -> MultiSeries {
        if self.trivial {
            return beta.derivative_raw(0).truncate(order);
        }
        let a = beta.derivative_raw(0).mul_to(&self.p, order);
        let b = beta.mul_to(&self.q, order);
        a.sub(&b).expect("same nvars").with_order(order)
    }
}

/// Divide out the simple non-fibered factors (each must divide `A`) and
/// set up `L`.
pub fn reduce(e: &HomEquation) -> Result<ReducedEquation> {
    let mut rhs = e.a.clone();
    let order = e.a.order();
    let nvars = e.a.nvars();
    let mut double = Vec::new();
    for (j, f) in e.boundary.non_fibered() {
        if f.mult == 1 {
            rhs = divide_series(&rhs, &f.poly).map_err(|err| match err {
                Error::NotDivisible { .. } => Error::NotFreeOfResidues { factor: j },
                other => other,
            })?;
        } else {
            double.push(f);
        }
    }
    let mut p = MultiSeries::one(nvars, order);
    let mut q = MultiSeries::zero(nvars, order);
    for (j, f) in double.iter().enumerate() {
        p = p.mul(&f.poly)?;
        let mut term = f.poly.derivative_raw(0).scale(&Coefficient::from_int(f.mult as i64 - 1));
        for (k, g) in double.iter().enumerate() {
            if k != j {
                term = term.mul(&g.poly)?;
            }
        }
        q = q.add(&term)?;
    }
    Ok(ReducedEquation {
        rhs,
        p,
        q,
        trivial: double.is_empty(),
    })
}

/// All exponent vectors of `nvars` variables with total degree ≤ `n`, in
/// term order.
fn monomials_up_to(nvars: usize, n: u32) -> Vec<Monomial> {
    let mut out = Vec::new();
    let mut e = vec![0u16; nvars];
    fn rec(i: usize, left: u32, e: &mut Vec<u16>, out: &mut Vec<Monomial>) {
        if i == e.len() {
            out.push(Monomial::new(e));
            return;
        }
        for k in 0..=left {
            e[i] = k as u16;
            rec(i + 1, left - k, e, out);
        }
        e[i] = 0;
    }
    rec(0, n, &mut e, &mut out);
    out.sort();
    out
}

/// Truncated special solver at order `n` (capped by the precision of `A`
/// after reduction). On failure the witness names the lowest monomial whose
/// coefficient equation is inconsistent; the truncated systems are nested,
/// so a failure persists at every higher order.
pub fn special_solve(e: &HomEquation, n: i32) -> Result<SpecialSolution> {
    let red = reduce(e)?;
    let n = n.min(red.rhs.order());
    if n < 0 {
        return Err(Error::PrecisionExhausted("numerator carries no valid order".into()));
    }
    let nvars = e.a.nvars();
    if red.trivial {
        let beta = red.rhs.truncate(n).integrate_x().with_order(n);
        return Ok(SpecialSolution {
            beta,
            certified_order: n,
        });
    }
    let unknowns = monomials_up_to(nvars, n as u32);
    let mut rows: BTreeMap<Monomial, Equation> = BTreeMap::new();
    for (col, m) in unknowns.iter().enumerate() {
        let image = red.apply(&MultiSeries::monomial(nvars, n, Coefficient::one(), m.exps(nvars)), n);
        for (rm, c) in image.terms() {
            rows.entry(*rm).or_default().coeffs.push((col, c.clone()));
        }
    }
    for (rm, c) in red.rhs.truncate(n).terms() {
        rows.entry(*rm).or_default().rhs = c.clone();
    }
    let keys: Vec<Monomial> = rows.keys().copied().collect();
    let eqs: Vec<Equation> = rows.into_values().collect();
    match linalg::solve(unknowns.len(), &eqs) {
        Ok(x) => {
            let beta = MultiSeries::from_terms(nvars, n, unknowns.iter().copied().zip(x));
            let check = red.apply(&beta, n);
            if !check.eq_to_order(&red.rhs, n) {
                return Err(Error::VerificationFailed("special solution does not satisfy L(β) = A′".into()));
            }
            Ok(SpecialSolution {
                beta,
                certified_order: n,
            })
        }
        Err(bad) => Err(Error::NoSolution {
            order: n,
            witness: format!("coefficient of {} in L(β) = A′", keys[bad.row].fmt_with(nvars)),
        }),
    }
}

/// Residue of `a(z)/g(z) dz` at `z = 0` on ascending coefficients.
fn residue_of_ratio(a: &[Complex64], g: &[Complex64], tol: f64) -> Result<Complex64> {
    let scale = g.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let nu = g
        .iter()
        .position(|c| c.norm() > tol * scale.max(1.0))
        .ok_or(Error::ZeroGerm { order: g.len() as i32 - 1 })?;
    if nu == 0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    // a/g = z^{−ν} · a/h with h = g/z^ν; the residue is the z^{ν−1}
    // coefficient of a/h
    let h = |j: usize| g.get(nu + j).copied().unwrap_or_default();
    let mut inv = vec![Complex64::new(0.0, 0.0); nu];
    inv[0] = h(0).inv();
    for k in 1..nu {
        let s: Complex64 = (1..=k).map(|j| h(j) * inv[k - j]).sum();
        inv[k] = -s * inv[0];
    }
    Ok((0..nu).map(|k| a.get(nu - 1 - k).copied().unwrap_or_default() * inv[k]).sum())
}

/// Residue of `(A/f_N)(·, p) dx` at one fiber root.
#[derive(Clone, Debug, PartialEq)]
pub struct ResidueCheck {
    pub factor: usize,
    pub point: Vec<Complex64>,
    pub root: Complex64,
    pub residue: Complex64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FreeOfResiduesVerdict {
    pub free: bool,
    pub checks: Vec<ResidueCheck>,
    /// Samples that were not used, with the reason.
    pub skipped: Vec<(Vec<Complex64>, String)>,
}

/// Sampled test of the vanishing of residues along every non-fibered factor.
/// Degenerate samples are skipped and never count as evidence; the verdict
/// is `free` only if at least one root was checked and all residues are
/// below `tol`.
pub fn free_of_residues(
    e: &HomEquation,
    samples: &[Vec<Complex64>],
    tol: f64,
    opts: &SampleOptions,
) -> Result<FreeOfResiduesVerdict> {
    let f_n = e.boundary.f_n();
    let factors: Vec<_> = e.boundary.non_fibered().map(|(j, f)| (j, f.poly.clone())).collect();
    let per_point = crate::par::map(samples, |p| -> Result<std::result::Result<Vec<ResidueCheck>, String>> {
        let fiber_f = f_n.fiber_numeric(p)?;
        if fiber_f.iter().all(|c| c.norm() == 0.0) {
            return Ok(Err("f_N vanishes identically on this fiber".into()));
        }
        let padded = |s: &MultiSeries| -> Result<Vec<Complex64>> {
            let mut a = s.fiber_numeric(p)?;
            a.resize(a.len().max(s.order().max(0) as usize + 1), Complex64::new(0.0, 0.0));
            Ok(a)
        };
        let a = padded(&e.a)?;
        // the same residue from A truncated two orders lower, when that differs
        let coarse_order = e.a.order() - 2;
        let coarse = match e.a.max_degree() {
            Some(d) if d as i64 > coarse_order as i64 => Some(padded(&e.a.truncate(coarse_order))?),
            _ => None,
        };
        let mut out = Vec::new();
        for (j, poly) in &factors {
            let fp = poly.fiber_numeric(p)?;
            let scale = fp.iter().map(|c| c.norm()).fold(0.0, f64::max);
            let dfp: Vec<Complex64> = fp.iter().enumerate().skip(1).map(|(k, c)| c * k as f64).collect();
            for r in polynomial_roots(&fp) {
                if eval_poly(&fp, r).norm() > opts.root_tol * scale.max(1.0) {
                    continue;
                }
                if r.norm() > opts.radius {
                    return Ok(Err(format!("root {r} of factor {j} outside radius {}", opts.radius)));
                }
                if eval_poly(&dfp, r).norm() <= opts.root_tol.sqrt() * scale.max(1.0) {
                    return Ok(Err(format!("multiple root {r} of factor {j}")));
                }
                let shifted_f = taylor_shift(&fiber_f, r);
                let res = residue_of_ratio(&taylor_shift(&a, r), &shifted_f, opts.coeff_tol)?;
                if let Some(c) = &coarse {
                    let other = residue_of_ratio(&taylor_shift(c, r), &shifted_f, opts.coeff_tol)?;
                    if (other - res).norm() > opts.stability_tol * res.norm().max(1.0) {
                        return Ok(Err(format!("residue at root {r} of factor {j} is sensitive to truncation")));
                    }
                }
                out.push(ResidueCheck {
                    factor: *j,
                    point: p.clone(),
                    root: r,
                    residue: res,
                });
            }
        }
        Ok(Ok(out))
    });
    let mut checks = Vec::new();
    let mut skipped = Vec::new();
    for (p, r) in samples.iter().zip(per_point) {
        match r? {
            Ok(c) => checks.extend(c),
            Err(reason) => skipped.push((p.clone(), reason)),
        }
    }
    let free = !checks.is_empty() && checks.iter().all(|c| c.residue.norm() < tol);
    Ok(FreeOfResiduesVerdict { free, checks, skipped })
}

/// Generators of the ideals of the fibered varieties inside the
/// multiplicity-≥2 non-fibered factors, one list per such factor.
#[derive(Clone, Debug, PartialEq)]
pub struct EvilSet {
    pub generators: Vec<(usize, Vec<MultiSeries>)>,
}

impl EvilSet {
    /// All generators, each scaled so its first term is monic, sorted and
    /// deduplicated (by terms; valid orders may differ).
    pub fn normalized(&self) -> Vec<MultiSeries> {
        let mut out: Vec<MultiSeries> = self
            .generators
            .iter()
            .flat_map(|(_, g)| g.iter())
            .map(|g| {
                let lead = g.terms().next().map(|(_, c)| c.clone()).expect("generators are nonzero");
                g.scale(&lead.inv().expect("nonzero"))
            })
            .collect();
        // x1 before x2: descending in term order
        out.sort_by(|a, b| b.terms().map(|(m, _)| *m).cmp(a.terms().map(|(m, _)| *m)));
        out.dedup();
        out
    }

    /// Whether the evil set is empty (some generator is a unit).
    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
            || self
                .generators
                .iter()
                .all(|(_, g)| g.iter().any(|s| !s.constant_term().is_zero()))
    }

    /// The parameter indices `i` such that, up to scaling, every generator
    /// of every factor is a single variable `x_i`; `None` otherwise.
    pub fn coordinate_variables(&self) -> Option<Vec<usize>> {
        let mut vars = Vec::new();
        for (_, gens) in &self.generators {
            for g in gens {
                if g.len() != 1 {
                    return None;
                }
                let (m, _) = g.terms().next()?;
                if m.degree() != 1 {
                    return None;
                }
                vars.push((1..MAXV).find(|&i| m.exp(i) == 1)?);
            }
        }
        vars.sort_unstable();
        vars.dedup();
        Some(vars)
    }
}

const MAXV: usize = crate::series::MAX_VARS;

pub fn evil_generators(boundary: &FactoredBoundary) -> EvilSet {
    let generators = boundary
        .non_fibered()
        .filter(|(_, f)| f.mult >= 2)
        .map(|(j, f)| (j, f.poly.x_coefficients().into_values().collect()))
        .collect();
    EvilSet { generators }
}

/// Set the given variables to zero.
fn vanish_vars(a: &MultiSeries, vars: &[usize]) -> MultiSeries {
    a.filter_terms(|m| vars.iter().all(|&i| m.exp(i) == 0))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Membership {
    /// `H` was checked to vanish on the evil set.
    Checked,
    /// The generators are not coordinate variables; `H` was trusted.
    Trusted,
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuaspeResult {
    pub k: u32,
    pub solution: SpecialSolution,
    pub membership: Membership,
}

/// Smallest `k ≤ kmax` such that `∂α/∂x = A·H^k/f` is special at order `n`.
pub fn quaspe_search(e: &HomEquation, h: &MultiSeries, kmax: u32, n: i32) -> Result<QuaspeResult> {
    if !h.is_independent_of(0) {
        return Err(Error::Invalid("H must not depend on x".into()));
    }
    let evil = evil_generators(&e.boundary);
    let membership = if evil.is_empty() {
        Membership::Checked
    } else if let Some(vars) = evil.coordinate_variables() {
        if !vanish_vars(h, &vars).is_zero() {
            return Err(Error::Invalid("H does not vanish on the evil set".into()));
        }
        Membership::Checked
    } else {
        Membership::Trusted
    };
    let mut a = e.a.clone();
    for k in 0..=kmax {
        let ek = HomEquation::new(a.clone(), e.boundary.clone())?;
        match special_solve(&ek, n) {
            Ok(solution) => return Ok(QuaspeResult { k, solution, membership }),
            Err(Error::NoSolution { .. }) | Err(Error::NotFreeOfResidues { .. }) => {}
            Err(other) => return Err(other),
        }
        a = a.mul(h)?;
    }
    Err(Error::BoundExceeded { kmax })
}

/// For a single double factor whose evil set is cut out by two coordinate
/// variables `x_i, x_j`: the unique `λ` with `A − λ ∈ (x_i, x_j)`.
pub fn lambda_invariant(e: &HomEquation) -> Result<Coefficient> {
    let vars = lambda_variables(&e.boundary)?;
    let lambda = e.a.constant_term();
    let rest = vanish_vars(&e.a, &vars);
    let mut rest = rest;
    rest.add_term(Monomial::ONE, &-lambda.clone());
    if let Some((m, c)) = rest.terms().next() {
        return Err(Error::Structural(format!(
            "A − λ is not in the ideal of the evil set: term {}",
            crate::series::witness(e.a.nvars(), m, c)
        )));
    }
    Ok(lambda)
}

/// Checks the structural hypothesis of [`lambda_invariant`] and returns the
/// two variables.
pub fn lambda_variables(b: &FactoredBoundary) -> Result<Vec<usize>> {
    let nf: Vec<_> = b.non_fibered().collect();
    if nf.len() != 1 || nf[0].1.mult != 2 {
        return Err(Error::Structural(
            "need exactly one non-fibered factor, of multiplicity 2".into(),
        ));
    }
    let evil = evil_generators(b);
    match evil.coordinate_variables() {
        Some(v) if v.len() == 2 && evil.generators[0].1.len() == 2 => Ok(v),
        _ => Err(Error::Structural(
            "x-coefficients of the factor are not two distinct parameter variables".into(),
        )),
    }
}

/// `A ∈ (x_i : i ∈ vars)` for the equide family, read as `A|_{x_i = 0} ≡ 0`.
pub fn in_coordinate_ideal(a: &MultiSeries, vars: &[usize]) -> bool {
    vanish_vars(a, vars).is_zero()
}
