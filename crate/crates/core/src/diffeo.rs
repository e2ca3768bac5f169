//! Nilpotent vertical vector fields, unipotent parameterized
//! diffeomorphisms and the exp/log correspondence between them.

use serde::{Deserialize, Serialize};

use crate::coeff::Coefficient;
use crate::error::{Error, Result};
use crate::series::{divide_series, Monomial, MultiSeries, SeriesJson};

/// Weight used by the exponential and the logarithm: `x` counts 1, every
/// parameter counts 2. A nilpotent `f̂ ∂/∂x` raises this weight by at least 1.
pub(crate) fn weight(m: &Monomial) -> u32 {
    m.exp(0) as u32 + 2 * m.param_degree()
}

fn truncate_weight(s: &MultiSeries, w: u32) -> MultiSeries {
    s.filter_terms(|m| weight(m) <= w)
}

/// The vertical field `f̂ ∂/∂x`, with `f̂(0) = 0` and `∂f̂/∂x(0) = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct VerticalField {
    fhat: MultiSeries,
}

impl VerticalField {
    pub fn new(fhat: MultiSeries) -> Result<Self> {
        if !fhat.constant_term().is_zero() {
            return Err(Error::NotNilpotent(format!("f̂(0) = {}", fhat.constant_term())));
        }
        let lin = fhat.coeff(&Monomial::var(0));
        if !lin.is_zero() {
            return Err(Error::NotNilpotent(format!("∂f̂/∂x(0) = {lin}")));
        }
        Ok(Self { fhat })
    }

    pub fn fhat(&self) -> &MultiSeries {
        &self.fhat
    }

    pub fn into_fhat(self) -> MultiSeries {
        self.fhat
    }

    pub fn nvars(&self) -> usize {
        self.fhat.nvars()
    }

    pub fn order(&self) -> i32 {
        self.fhat.order()
    }

    pub fn scale(&self, t: &Coefficient) -> Self {
        Self {
            fhat: self.fhat.scale(t),
        }
    }

    /// `X(h) = f̂ · ∂h/∂x`, truncated at `order`.
    pub fn apply(&self, h: &MultiSeries, order: i32) -> MultiSeries {
        self.fhat.mul_to(&h.derivative_raw(0), order)
    }
}

/// A parameterized diffeomorphism, stored as its `x`-component; the
/// parameters are fixed.
#[derive(Clone, Debug, PartialEq)]
pub struct ParamDiffeo {
    xcomp: MultiSeries,
}

impl ParamDiffeo {
    /// Requires `x∘φ(0) = 0` and an invertible linear part in `x`.
    pub fn new(xcomp: MultiSeries) -> Result<Self> {
        if !xcomp.constant_term().is_zero() {
            return Err(Error::Invalid("x∘φ must vanish at the origin".into()));
        }
        if xcomp.coeff(&Monomial::var(0)).is_zero() {
            return Err(Error::NotInvertible);
        }
        Ok(Self { xcomp })
    }

    /// Like [`new`](Self::new) but also requires `∂(x∘φ)/∂x(0) = 1`.
    pub fn unipotent(xcomp: MultiSeries) -> Result<Self> {
        let phi = Self::new(xcomp)?;
        if !phi.is_unipotent() {
            return Err(Error::NotUnipotent(format!("∂(x∘φ)/∂x(0) = {}", phi.multiplier())));
        }
        Ok(phi)
    }

    pub fn identity(nvars: usize, order: i32) -> Self {
        Self {
            xcomp: MultiSeries::var(nvars, order, 0),
        }
    }

    pub fn xcomp(&self) -> &MultiSeries {
        &self.xcomp
    }

    pub fn nvars(&self) -> usize {
        self.xcomp.nvars()
    }

    pub fn order(&self) -> i32 {
        self.xcomp.order()
    }

    /// `∂(x∘φ)/∂x` at the origin.
    pub fn multiplier(&self) -> Coefficient {
        self.xcomp.coeff(&Monomial::var(0))
    }

    pub fn is_unipotent(&self) -> bool {
        self.multiplier().is_one()
    }

    /// `x∘φ − x`.
    pub fn displacement(&self) -> MultiSeries {
        let mut d = self.xcomp.clone();
        d.add_term(Monomial::var(0), &-Coefficient::one());
        d
    }

    pub fn truncate(&self, order: i32) -> Self {
        Self {
            xcomp: self.xcomp.truncate(order),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DiffeoJson {
    pub xcomp: SeriesJson,
    pub unipotent: bool,
}

impl From<&ParamDiffeo> for DiffeoJson {
    fn from(p: &ParamDiffeo) -> Self {
        DiffeoJson {
            xcomp: SeriesJson::from(p.xcomp()),
            unipotent: p.is_unipotent(),
        }
    }
}

impl TryFrom<&DiffeoJson> for ParamDiffeo {
    type Error = Error;
    fn try_from(j: &DiffeoJson) -> Result<Self> {
        let xcomp = MultiSeries::try_from(&j.xcomp)?;
        if j.unipotent {
            ParamDiffeo::unipotent(xcomp)
        } else {
            ParamDiffeo::new(xcomp)
        }
    }
}

/// Sum `Σ X^j(x)/j!` with every iterate restricted to weight ≤ `wmax`.
fn exp_sum(fhat: &MultiSeries, order: i32, wmax: u32) -> MultiSeries {
    let x = MultiSeries::var(fhat.nvars(), order, 0);
    let mut acc = x.clone();
    let mut h = x;
    let mut j = 1i64;
    loop {
        h = truncate_weight(&fhat.mul_to(&h.derivative_raw(0), order), wmax);
        if h.is_zero() {
            break;
        }
        h = h.scale(&Coefficient::ratio(1, j));
        acc = acc.add(&h).expect("same nvars");
        j += 1;
    }
    acc
}

/// `x∘exp(X) = Σ_j h_j/j!` with `h₀ = x` and `h_{j+1} = f̂ ∂h_j/∂x`.
///
/// Each iterate gains weight, so the sum is finite at any order. The valid
/// order is that of `f̂`.
pub fn exp_vertical(x: &VerticalField) -> ParamDiffeo {
    let n = x.order();
    ParamDiffeo {
        xcomp: exp_sum(x.fhat(), n, u32::MAX),
    }
}

/// Time-`t` map `exp(tX)`.
pub fn flow(x: &VerticalField, t: &Coefficient) -> ParamDiffeo {
    exp_vertical(&x.scale(t))
}

/// The unique nilpotent field with `exp(X) = φ`.
///
/// Matched weight by weight: if `F` is known below weight `k`, the weight-`k`
/// part of `f̂` is the weight-`k` part of `x∘φ − x∘exp(F)`, because every
/// higher iterate in the exponential sum only sees lower-weight parts.
pub fn log_updiffeo(phi: &ParamDiffeo) -> Result<VerticalField> {
    if !phi.is_unipotent() {
        return Err(Error::NotUnipotent(format!("∂(x∘φ)/∂x(0) = {}", phi.multiplier())));
    }
    let n = phi.order();
    let target = phi.displacement();
    let nvars = phi.nvars();
    let mut fhat = MultiSeries::zero(nvars, n);
    if n < 0 {
        return Ok(VerticalField { fhat });
    }
    let wtop = 2 * n as u32;
    for k in 2..=wtop {
        let e = exp_sum(&fhat, n, k);
        for (m, c) in target.terms().filter(|(m, _)| weight(m) == k) {
            fhat.add_term(*m, c);
        }
        for (m, c) in e.terms().filter(|(m, _)| weight(m) == k) {
            fhat.add_term(*m, &-c);
        }
    }
    VerticalField::new(fhat)
}

/// The unit `û` with `x∘φ − x = û·f̂`, for `X = log φ`.
pub fn unit_cofactor(phi: &ParamDiffeo, x: &VerticalField) -> Result<MultiSeries> {
    if x.fhat().is_zero() {
        return Err(Error::DegenerateCofactor("f̂ vanishes identically".into()));
    }
    let u = divide_series(&phi.displacement(), x.fhat())?;
    if !u.constant_term().is_one() {
        return Err(Error::DegenerateCofactor(format!(
            "quotient has constant term {}, so X is not log φ",
            u.constant_term()
        )));
    }
    Ok(u)
}

/// `φ∘ψ`, i.e. `x∘(φ∘ψ) = (x∘φ)(x∘ψ, p)`.
pub fn compose(phi: &ParamDiffeo, psi: &ParamDiffeo) -> Result<ParamDiffeo> {
    Ok(ParamDiffeo {
        xcomp: phi.xcomp.compose_x(&psi.xcomp)?,
    })
}

/// Compositional inverse in `x` of a series `s` with `s(0) = 0` and
/// invertible `∂s/∂x(0)`, by Newton's method: `ψ ← ψ − (s(ψ) − x)/s'(ψ)`
/// doubles the number of correct degrees each step.
pub(crate) fn invert_series(s: &MultiSeries) -> Result<MultiSeries> {
    let a_inv = s.coeff(&Monomial::var(0)).inv().ok_or(Error::NotInvertible)?;
    let n = s.order();
    let ds = s.derivative_raw(0);
    let mut psi = MultiSeries::var(s.nvars(), n, 0).scale(&a_inv);
    let mut prec = 0;
    while prec < n {
        prec = (2 * prec + 1).min(n);
        // ψ is correct through the previous precision; its tail is refined here
        let p = psi.with_order(prec);
        let err = s
            .compose_x_to(&p, prec)
            .sub(&MultiSeries::var(s.nvars(), prec, 0))
            .expect("same nvars");
        let slope = ds.compose_x_to(&p, prec).unit_inverse()?;
        psi = p.sub(&err.mul_to(&slope, prec)).expect("same nvars");
    }
    Ok(psi.with_order(n))
}

pub fn invert(phi: &ParamDiffeo) -> Result<ParamDiffeo> {
    Ok(ParamDiffeo {
        xcomp: invert_series(&phi.xcomp)?,
    })
}

/// `σ⁻¹∘φ∘σ`.
pub fn conjugate(phi: &ParamDiffeo, sigma: &ParamDiffeo) -> Result<ParamDiffeo> {
    phi.xcomp.check_same_vars(&sigma.xcomp)?;
    compose(&invert(sigma)?, &compose(phi, sigma)?)
}

/// A germ `τ(z) = a₁z + a₂z² + …` in one variable with `a₁ ≠ 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct OneDimDiffeo {
    series: MultiSeries,
}

impl OneDimDiffeo {
    pub fn new(series: MultiSeries) -> Result<Self> {
        if series.nvars() != 1 {
            return Err(Error::VarCountMismatch {
                left: 1,
                right: series.nvars(),
            });
        }
        if !series.constant_term().is_zero() {
            return Err(Error::NonzeroConstantTerm);
        }
        if series.coeff(&Monomial::var(0)).is_zero() {
            return Err(Error::NotInvertible);
        }
        Ok(Self { series })
    }

    pub fn series(&self) -> &MultiSeries {
        &self.series
    }

    pub fn multiplier(&self) -> Coefficient {
        self.series.coeff(&Monomial::var(0))
    }
}

/// `σ` with `σ⁻¹∘τ∘σ = a₁z` to order `n`, as the composite
/// `σ₁∘σ₂∘…` of `σ_k = z + b z^{k+1}`, `(a₁^{k+1} − a₁) b = a^k_{k+1}`.
pub fn linearize_1d(tau: &OneDimDiffeo, n: i32) -> Result<OneDimDiffeo> {
    let a = tau.multiplier();
    let z = MultiSeries::var(1, n, 0);
    let mut tk = tau.series.truncate(n);
    let mut sigma = z.clone();
    for k in 1..n.max(1) as u32 {
        let divisor = &a.pow(k + 1) - &a;
        if divisor.is_zero() {
            return Err(Error::Resonant { k });
        }
        let c = tk.coeff(&Monomial::new(&[k as u16 + 1]));
        if c.is_zero() {
            continue;
        }
        let b = c.checked_div(&divisor).expect("nonzero divisor");
        let mut sk = z.clone();
        sk.add_term(Monomial::new(&[k as u16 + 1]), &b);
        let sk_inv = invert_series(&sk)?;
        tk = sk_inv.compose_x(&tk.compose_x(&sk)?)?;
        sigma = sigma.compose_x(&sk)?;
    }
    OneDimDiffeo::new(sigma)
}
