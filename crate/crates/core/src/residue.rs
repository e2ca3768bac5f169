//! Contact orders and residues of the dual form `dx/f̂` along fixed
//! components, exact on rational fibers and sampled numerically elsewhere.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::coeff::Coefficient;
use crate::diffeo::{ParamDiffeo, VerticalField};
use crate::error::{Error, Result};
use crate::roots::{eval_poly, polynomial_roots};
use crate::series::{Monomial, MultiSeries};

/// A germ in one variable `z`, the restriction of a series to the fiber
/// through `basepoint`.
#[derive(Clone, Debug, PartialEq)]
pub struct FiberGerm {
    series: MultiSeries,
    basepoint: Vec<Complex64>,
}

impl FiberGerm {
    pub fn new(series: MultiSeries, basepoint: Vec<Complex64>) -> Result<Self> {
        if series.nvars() != 1 {
            return Err(Error::VarCountMismatch {
                left: 1,
                right: series.nvars(),
            });
        }
        Ok(Self { series, basepoint })
    }

    /// Restrict `a` to the fiber through a rational parameter point.
    pub fn restrict(a: &MultiSeries, params: &[Coefficient]) -> Result<Self> {
        let basepoint = params.iter().map(Coefficient::to_complex).collect();
        Ok(Self {
            series: a.fiber_exact(params)?,
            basepoint,
        })
    }

    pub fn series(&self) -> &MultiSeries {
        &self.series
    }

    pub fn basepoint(&self) -> &[Complex64] {
        &self.basepoint
    }
}

/// Smallest exponent with a nonzero coefficient.
pub fn contact_order(g: &FiberGerm) -> Result<u32> {
    g.series.lowest_degree().ok_or(Error::ZeroGerm {
        order: g.series.order(),
    })
}

/// The `z⁻¹` coefficient of `1/a`: with `a = z^ν b`, the coefficient of
/// `z^{ν−1}` in `1/b`.
pub fn residue_1d(g: &FiberGerm) -> Result<Coefficient> {
    let nu = contact_order(g)?;
    let a = &g.series;
    // b = a / z^ν is known to order N − ν; we need its inverse to ν − 1
    if (a.order() as i64) < 2 * nu as i64 - 1 {
        return Err(Error::PrecisionExhausted(format!(
            "contact order {nu} needs the germ to order {}, have {}",
            2 * nu - 1,
            a.order()
        )));
    }
    if nu == 0 {
        return Ok(Coefficient::zero());
    }
    let b = MultiSeries::from_terms(
        1,
        nu as i32 - 1,
        a.terms()
            .filter(|(m, _)| m.degree() < 2 * nu)
            .map(|(m, c)| (Monomial::new(&[m.exp(0) - nu as u16]), c.clone())),
    );
    Ok(b.unit_inverse()?.coeff_of(&[nu as u16 - 1]))
}

/// Numeric counterpart of [`residue_1d`] on ascending complex
/// coefficients; coefficients below `tol` times the largest one count as
/// zero when locating the contact order. Returns `(ν, residue)`.
pub fn residue_1d_numeric(a: &[Complex64], tol: f64) -> Result<(u32, Complex64)> {
    let scale = a.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let nu = a
        .iter()
        .position(|c| c.norm() > tol * scale.max(1.0))
        .ok_or(Error::ZeroGerm {
            order: a.len() as i32 - 1,
        })?;
    if nu == 0 {
        return Ok((0, Complex64::new(0.0, 0.0)));
    }
    if a.len() < 2 * nu {
        return Err(Error::PrecisionExhausted(format!(
            "contact order {nu} needs {} coefficients, have {}",
            2 * nu,
            a.len()
        )));
    }
    let b = &a[nu..2 * nu];
    let mut inv = vec![Complex64::new(0.0, 0.0); nu];
    inv[0] = b[0].inv();
    for k in 1..nu {
        let s: Complex64 = (1..=k).map(|j| b[j] * inv[k - j]).sum();
        inv[k] = -s * inv[0];
    }
    Ok((nu as u32, inv[nu - 1]))
}

/// Coefficients of `p(z + r)` from those of `p(z)`.
pub fn taylor_shift(p: &[Complex64], r: Complex64) -> Vec<Complex64> {
    let mut c = p.to_vec();
    let n = c.len();
    for i in 0..n {
        for j in (i..n.saturating_sub(1)).rev() {
            let t = c[j + 1] * r;
            c[j] += t;
        }
    }
    c
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SampleKind {
    Unipotent,
    NonUnipotent,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResidueSample {
    pub component: usize,
    pub point: Vec<Complex64>,
    pub value: Complex64,
    pub kind: SampleKind,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SampleJson {
    pub component: usize,
    pub point: Vec<[f64; 2]>,
    pub re: f64,
    pub im: f64,
    pub kind: SampleKind,
}

impl From<&ResidueSample> for SampleJson {
    fn from(s: &ResidueSample) -> Self {
        SampleJson {
            component: s.component,
            point: s.point.iter().map(|z| [z.re, z.im]).collect(),
            re: s.value.re,
            im: s.value.im,
            kind: s.kind,
        }
    }
}

/// Tolerances for numeric sampling.
#[derive(Clone, Copy, Debug)]
pub struct SampleOptions {
    /// Relative threshold below which a fiber coefficient counts as zero.
    pub coeff_tol: f64,
    /// Bound on `|factor(root)|` after polishing.
    pub root_tol: f64,
    /// Roots farther than this from `x = 0` are outside the trusted disc of
    /// the truncated series.
    pub radius: f64,
    /// A sample is rejected when recomputing it from the series truncated
    /// two orders lower moves it by more than this (relative to `max(1, |r|)`).
    pub stability_tol: f64,
}

impl Default for SampleOptions {
    fn default() -> Self {
        Self {
            coeff_tol: 1e-10,
            root_tol: 1e-10,
            radius: 0.9,
            stability_tol: 1e-9,
        }
    }
}

fn fmt_point(p: &[Complex64]) -> String {
    let parts: Vec<String> = p.iter().map(|z| format!("{}{:+}i", z.re, z.im)).collect();
    format!("({})", parts.join(", "))
}

/// Residue of `dx/f̂` at the root of `factor` nearest to `x = 0` on the
/// fiber through `p`.
pub fn residue_sample_unipotent(
    x: &VerticalField,
    factor: &MultiSeries,
    component: usize,
    p: &[Complex64],
    opts: &SampleOptions,
) -> Result<ResidueSample> {
    let fp = factor.fiber_numeric(p)?;
    let scale = fp.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let root = polynomial_roots(&fp)
        .into_iter()
        .filter(|r| eval_poly(&fp, *r).norm() <= opts.root_tol * scale.max(1.0))
        .min_by(|a, b| a.norm().total_cmp(&b.norm()))
        .ok_or_else(|| Error::NoRoot(fmt_point(p)))?;
    if root.norm() > opts.radius {
        return Err(Error::NoRoot(format!(
            "nearest root {root} on the fiber through {} lies outside radius {}",
            fmt_point(p),
            opts.radius
        )));
    }
    let dfp: Vec<Complex64> = fp
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, c)| c * k as f64)
        .collect();
    if eval_poly(&dfp, root).norm() <= opts.root_tol.sqrt() * scale.max(1.0) {
        return Err(Error::SingularSample(fmt_point(p)));
    }
    let value = fiber_residue(x.fhat(), p, root, opts)?;
    let coarse_order = x.order() - 2;
    if x.fhat().max_degree().is_some_and(|d| d as i64 > coarse_order as i64) {
        let stable = match fiber_residue(&x.fhat().truncate(coarse_order), p, root, opts) {
            Ok(c) => (c - value).norm() <= opts.stability_tol * value.norm().max(1.0),
            Err(_) => false,
        };
        if !stable {
            return Err(Error::PrecisionExhausted(format!(
                "residue at {} changes when the series is truncated at order {coarse_order}",
                fmt_point(p)
            )));
        }
    }
    Ok(ResidueSample {
        component,
        point: p.to_vec(),
        value,
        kind: SampleKind::Unipotent,
    })
}

/// Residue of `dx/ĝ` at `root` on the fiber through `p`.
fn fiber_residue(g: &MultiSeries, p: &[Complex64], root: Complex64, opts: &SampleOptions) -> Result<Complex64> {
    // coefficients up to the valid order are known, including the zeros
    let mut a = g.fiber_numeric(p)?;
    a.resize(a.len().max(g.order().max(0) as usize + 1), Complex64::new(0.0, 0.0));
    let (nu, value) = residue_1d_numeric(&taylor_shift(&a, root), opts.coeff_tol)?;
    if nu == 0 {
        // f̂ vanishes on the factor, so this is truncation error
        return Err(Error::PrecisionExhausted(format!(
            "f̂ does not vanish at the root {root} on the fiber through {}",
            fmt_point(p)
        )));
    }
    Ok(value)
}

/// `1/ln(m)` on the principal branch.
pub fn residue_from_multiplier(m: Complex64) -> Result<Complex64> {
    if (m - 1.0).norm() < 1e-12 {
        return Err(Error::UnipotentMultiplier);
    }
    if m.norm() == 0.0 {
        return Err(Error::NotInvertible);
    }
    Ok(m.ln().inv())
}

/// Residue at a fixed point `q = (x, p)` where `φ` is not tangent to the
/// identity: `1/ln(∂(x∘φ)/∂x(q))`.
pub fn residue_nonunipotent(phi: &ParamDiffeo, q: &[Complex64], component: usize, tol: f64) -> Result<ResidueSample> {
    let moved = (phi.xcomp().eval_numeric(q)? - q[0]).norm();
    if moved > tol {
        return Err(Error::PointNotFixed(moved));
    }
    let m = phi.xcomp().derivative_raw(0).eval_numeric(q)?;
    Ok(ResidueSample {
        component,
        point: q[1..].to_vec(),
        value: residue_from_multiplier(m)?,
        kind: SampleKind::NonUnipotent,
    })
}

fn radical_inverse(mut i: u64, base: u64) -> (u64, u64) {
    let (mut num, mut den) = (0u64, 1u64);
    while i > 0 {
        num = num * base + i % base;
        den *= base;
        i /= base;
    }
    (num, den)
}

const PRIMES: [u64; 8] = [2, 3, 5, 7, 11, 13, 17, 19];

/// Deterministic Halton points with rational coordinates in `[1/4, 1)`,
/// starting at index `seed + 1`. Coordinates stay away from zero, where the
/// fixed-point components of the examples meet.
pub fn sample_grid(nparams: usize, count: usize, seed: u64) -> Vec<Vec<Coefficient>> {
    assert!(nparams <= PRIMES.len());
    (0..count as u64)
        .map(|k| {
            (0..nparams)
                .map(|j| {
                    let (num, den) = radical_inverse(seed + k + 1, PRIMES[j]);
                    // 1/4 + 3/4 · num/den
                    Coefficient::ratio((den + 3 * num) as i64, (4 * den) as i64)
                })
                .collect()
        })
        .collect()
}

pub fn to_complex_point(p: &[Coefficient]) -> Vec<Complex64> {
    p.iter().map(Coefficient::to_complex).collect()
}

/// Residue samples of `X` along each listed factor at each point, in
/// point-major order; points are processed in parallel when enabled.
pub fn residue_table(
    x: &VerticalField,
    factors: &[(usize, &MultiSeries)],
    points: &[Vec<Complex64>],
    opts: &SampleOptions,
) -> Vec<Result<ResidueSample>> {
    let jobs: Vec<(usize, &MultiSeries, &Vec<Complex64>)> = points
        .iter()
        .flat_map(|p| factors.iter().map(move |(j, f)| (*j, *f, p)))
        .collect();
    crate::par::map(&jobs, |(j, f, p)| residue_sample_unipotent(x, f, *j, p, opts))
}
