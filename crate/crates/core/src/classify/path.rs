//! Construction of a special conjugation by the path method.
//!
//! Along `X_{1+z} = u_{1+z} f ∂/∂x`, `1/u_{1+z} = 1/u₁ − zA`, the field
//! `W = h f ∂/∂x + ∂/∂z` with `h = u_{1+z} α` commutes with `X_{1+z}`, so
//! its time-one map sends the slice `z = 0` to `z = 1` and conjugates
//! `exp(X₁)` to `exp(X₂)`. Here `hf = u_{1+z} · β · Π f_j` (product over the
//! non-fibered factors, each once).
//!
//! Coefficients stay in ℚ(i) only when `u_{1+z}` is polynomial in `z` at each
//! degree, which holds iff `A(0) = 0`, and when `∂(hf)/∂x` vanishes at the
//! origin; otherwise the flow produces exponentials of rationals and the
//! construction is refused.

use std::collections::BTreeMap;

use crate::boundary::FactoredBoundary;
use crate::coeff::Coefficient;
use crate::error::{Error, Result};
use crate::series::{Monomial, MultiSeries};

/// Series in `(x, p)` truncated by total degree, with coefficients that are
/// polynomials in the path variable `z` (ascending, no trailing zeros).
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct ZSeries {
    nvars: usize,
    order: i32,
    terms: BTreeMap<Monomial, Vec<Coefficient>>,
}

fn trim(p: &mut Vec<Coefficient>) {
    while p.last().is_some_and(Coefficient::is_zero) {
        p.pop();
    }
}

fn poly_add_into(acc: &mut Vec<Coefficient>, p: &[Coefficient]) {
    if acc.len() < p.len() {
        acc.resize(p.len(), Coefficient::zero());
    }
    for (a, b) in acc.iter_mut().zip(p) {
        *a += b;
    }
}

fn poly_mul(a: &[Coefficient], b: &[Coefficient]) -> Vec<Coefficient> {
    let mut out = vec![Coefficient::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += &(x * y);
        }
    }
    out
}

impl ZSeries {
    pub(crate) fn zero(nvars: usize, order: i32) -> Self {
        Self {
            nvars,
            order,
            terms: BTreeMap::new(),
        }
    }

    pub(crate) fn from_series(s: &MultiSeries) -> Self {
        Self {
            nvars: s.nvars(),
            order: s.order(),
            terms: s.terms().map(|(m, c)| (*m, vec![c.clone()])).collect(),
        }
    }

    fn add_poly(&mut self, m: Monomial, p: &[Coefficient]) {
        if (m.degree() as i64) > self.order as i64 {
            return;
        }
        let slot = self.terms.entry(m).or_default();
        poly_add_into(slot, p);
        trim(slot);
        if slot.is_empty() {
            self.terms.remove(&m);
        }
    }

    pub(crate) fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.order = self.order.min(other.order);
        out.terms.retain(|m, _| (m.degree() as i64) <= out.order as i64);
        for (m, p) in &other.terms {
            out.add_poly(*m, p);
        }
        out
    }

    pub(crate) fn truncate(&self, order: i32) -> Self {
        let order = order.min(self.order);
        Self {
            nvars: self.nvars,
            order,
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| (m.degree() as i64) <= order as i64)
                .map(|(m, p)| (*m, p.clone()))
                .collect(),
        }
    }

    /// Multiply by `z`.
    pub(crate) fn times_z(&self) -> Self {
        let mut out = self.clone();
        for p in out.terms.values_mut() {
            p.insert(0, Coefficient::zero());
        }
        out
    }

    pub(crate) fn mul_to(&self, other: &Self, order: i32) -> Self {
        let mut out = Self::zero(self.nvars, order);
        for (ma, pa) in &self.terms {
            for (mb, pb) in &other.terms {
                if (ma.degree() + mb.degree()) as i64 > order as i64 {
                    continue;
                }
                out.add_poly(ma.mul(mb), &poly_mul(pa, pb));
            }
        }
        out
    }

    /// Substitute `x ↦ s` (which has no constant term).
    pub(crate) fn compose_x_to(&self, s: &Self, order: i32) -> Self {
        let mut by_x: BTreeMap<u16, Self> = BTreeMap::new();
        for (m, p) in &self.terms {
            by_x.entry(m.exp(0))
                .or_insert_with(|| Self::zero(self.nvars, order))
                .add_poly(m.with_exp(0, 0), p);
        }
        let top = match by_x.keys().next_back() {
            Some(&k) => k,
            None => return Self::zero(self.nvars, order),
        };
        let mut acc = Self::zero(self.nvars, order);
        for k in (0..=top).rev() {
            acc = acc.mul_to(s, order);
            if let Some(c) = by_x.get(&k) {
                for (m, p) in &c.terms {
                    acc.add_poly(*m, p);
                }
            }
        }
        acc
    }

    /// `∫₀^z`.
    pub(crate) fn integrate_z(&self) -> Self {
        let mut out = self.clone();
        for p in out.terms.values_mut() {
            let mut q = vec![Coefficient::zero()];
            for (k, c) in p.iter().enumerate() {
                q.push(c * &Coefficient::ratio(1, k as i64 + 1));
            }
            *p = q;
        }
        out
    }

    pub(crate) fn at_z(&self, z: &Coefficient) -> MultiSeries {
        let mut out = MultiSeries::zero(self.nvars, self.order);
        for (m, p) in &self.terms {
            let mut v = Coefficient::zero();
            for c in p.iter().rev() {
                v = &(&v * z) + c;
            }
            out = out.add(&MultiSeries::monomial(self.nvars, self.order, v, m.exps(self.nvars))).expect("same nvars");
        }
        out
    }

    /// `∂/∂x` at the origin, as a polynomial in `z`.
    pub(crate) fn linear_x_coefficient(&self) -> Vec<Coefficient> {
        self.terms.get(&Monomial::var(0)).cloned().unwrap_or_default()
    }
}

/// `hf = u_{1+z} · β · Π f_j` with `u_{1+z} = u₁ Σ_k (z u₁ A)^k`.
pub(crate) fn path_generator(
    u1: &MultiSeries,
    a: &MultiSeries,
    beta: &MultiSeries,
    boundary: &FactoredBoundary,
) -> Result<ZSeries> {
    if !a.constant_term().is_zero() {
        return Err(Error::PathNotExact(format!(
            "A(0) = {} ≠ 0: u₁(0) ≠ u₂(0), so u_(1+z) is not polynomial in z",
            a.constant_term()
        )));
    }
    let order = u1.order().min(a.order()).min(beta.order());
    let e = ZSeries::from_series(&u1.mul(a)?).times_z();
    let one = ZSeries::from_series(&MultiSeries::one(u1.nvars(), order));
    let mut geo = one.clone();
    let mut pw = one;
    for _ in 0..order.max(0) {
        pw = pw.mul_to(&e, order);
        if pw.terms.is_empty() {
            break;
        }
        geo = geo.add(&pw);
    }
    let rest = u1.mul(beta)?.mul(&boundary.radical_n())?;
    let h = geo.mul_to(&ZSeries::from_series(&rest), order);
    if h.linear_x_coefficient().iter().any(|c| !c.is_zero()) {
        return Err(Error::PathNotExact(
            "∂(hf)/∂x does not vanish at the origin: the flow has a non-unipotent linear part".into(),
        ));
    }
    Ok(h)
}

/// Time-one map in `z` of `dx/dz = H(x, p, z)` from `z = 0`, computed by
/// Picard iteration; each step fixes one more degree because `H` and
/// `∂H/∂x` vanish at the origin.
pub(crate) fn time_one_map(h: &ZSeries) -> MultiSeries {
    let n = h.order;
    let x = ZSeries::from_series(&MultiSeries::var(h.nvars, n, 0));
    let mut xt = x.clone();
    for k in 1..=n.max(0) {
        let rhs = h.compose_x_to(&xt.truncate(k), k).integrate_z();
        xt = x.truncate(k).add(&rhs);
    }
    xt.at_z(&Coefficient::one()).with_order(n)
}
