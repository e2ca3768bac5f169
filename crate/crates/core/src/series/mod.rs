//! Sparse truncated formal power series in `(x, x₁, …, xₙ)`.
//!
//! A [`MultiSeries`] stores the nonzero coefficients of all monomials of total
//! degree at most `order`; everything above `order` is unknown. Variable 0 is
//! the distinguished coordinate `x`, variables `1..nvars` are parameters.
//!
//! Invariants:
//! - no stored coefficient is zero
//! - no stored monomial has total degree > `order`
//! - iteration is graded-lexicographic (degree, then exponents with `x` most
//!   significant), so serialization is deterministic

mod calculus;
mod division;
mod json;
mod parse;

use std::collections::BTreeMap;
use std::fmt;

use crate::coeff::Coefficient;
use crate::error::{Error, Result};

pub use division::{divide_exact, divide_series, gamma_expansion, weierstrass_divide, WeierstrassQuotRem};
pub use json::SeriesJson;
pub(crate) use division::witness;

/// Upper bound on the number of variables (x plus parameters).
pub const MAX_VARS: usize = 8;

/// Exponent vector with cached total degree.
///
/// The derived ordering compares the degree first and then the exponent
/// array lexicographically, which is the graded-lex term order.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial {
    deg: u16,
    exps: [u16; MAX_VARS],
}

impl Monomial {
    pub const ONE: Monomial = Monomial {
        deg: 0,
        exps: [0; MAX_VARS],
    };

    pub fn new(exps: &[u16]) -> Self {
        assert!(exps.len() <= MAX_VARS, "at most {MAX_VARS} variables");
        let mut e = [0u16; MAX_VARS];
        e[..exps.len()].copy_from_slice(exps);
        Self {
            deg: exps.iter().sum(),
            exps: e,
        }
    }

    pub fn var(i: usize) -> Self {
        let mut m = Self::ONE;
        m.exps[i] = 1;
        m.deg = 1;
        m
    }

    #[inline]
    pub fn degree(&self) -> u32 {
        self.deg as u32
    }

    #[inline]
    pub fn exp(&self, i: usize) -> u16 {
        self.exps[i]
    }

    pub fn exps(&self, nvars: usize) -> &[u16] {
        &self.exps[..nvars]
    }

    /// Degree in the parameters only.
    pub fn param_degree(&self) -> u32 {
        self.deg as u32 - self.exps[0] as u32
    }

    #[inline]
    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut exps = self.exps;
        for (a, b) in exps.iter_mut().zip(other.exps.iter()) {
            *a += *b;
        }
        Monomial {
            deg: self.deg + other.deg,
            exps,
        }
    }

    /// `self / other` when `other` divides `self`.
    pub fn checked_div(&self, other: &Monomial) -> Option<Monomial> {
        let mut exps = self.exps;
        for (a, b) in exps.iter_mut().zip(other.exps.iter()) {
            *a = a.checked_sub(*b)?;
        }
        Some(Monomial {
            deg: self.deg - other.deg,
            exps,
        })
    }

    pub fn with_exp(&self, i: usize, e: u16) -> Monomial {
        let mut m = *self;
        m.deg = m.deg - m.exps[i] + e;
        m.exps[i] = e;
        m
    }

    /// Lexicographic comparison with `x` most significant, ignoring degree.
    pub fn lex_cmp(&self, other: &Monomial) -> std::cmp::Ordering {
        self.exps.cmp(&other.exps)
    }

    pub fn fmt_with(&self, nvars: usize) -> String {
        let mut parts = Vec::new();
        for (i, &e) in self.exps[..nvars].iter().enumerate() {
            if e == 0 {
                continue;
            }
            let name = var_name(i);
            if e == 1 {
                parts.push(name);
            } else {
                parts.push(format!("{name}^{e}"));
            }
        }
        if parts.is_empty() {
            "1".to_string()
        } else {
            parts.join("*")
        }
    }
}

pub(crate) fn var_name(i: usize) -> String {
    if i == 0 {
        "x".to_string()
    } else {
        format!("x{i}")
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", &self.exps[..])
    }
}

/// Truncated multivariate series with exact Gaussian-rational coefficients.
#[derive(Clone, PartialEq, Eq)]
pub struct MultiSeries {
    nvars: usize,
    order: i32,
    terms: BTreeMap<Monomial, Coefficient>,
}

impl MultiSeries {
    pub fn zero(nvars: usize, order: i32) -> Self {
        assert!((1..=MAX_VARS).contains(&nvars), "nvars must be in 1..={MAX_VARS}");
        Self {
            nvars,
            order,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, order: i32, c: Coefficient) -> Self {
        let mut s = Self::zero(nvars, order);
        s.insert(Monomial::ONE, c);
        s
    }

    pub fn one(nvars: usize, order: i32) -> Self {
        Self::constant(nvars, order, Coefficient::one())
    }

    /// The coordinate function of variable `i` (0 is `x`).
    pub fn var(nvars: usize, order: i32, i: usize) -> Self {
        assert!(i < nvars);
        let mut s = Self::zero(nvars, order);
        s.insert(Monomial::var(i), Coefficient::one());
        s
    }

    pub fn monomial(nvars: usize, order: i32, c: Coefficient, exps: &[u16]) -> Self {
        assert_eq!(exps.len(), nvars);
        let mut s = Self::zero(nvars, order);
        s.insert(Monomial::new(exps), c);
        s
    }

    pub fn from_terms<I>(nvars: usize, order: i32, terms: I) -> Self
    where
        I: IntoIterator<Item = (Monomial, Coefficient)>,
    {
        let mut s = Self::zero(nvars, order);
        for (m, c) in terms {
            s.add_term(m, &c);
        }
        s
    }

    /// Parse a polynomial written in `x, x1, …` (see [`parse`](self::parse)).
    pub fn parse(nvars: usize, order: i32, src: &str) -> Result<Self> {
        parse::parse_series(nvars, order, src)
    }

    #[inline]
    pub fn nvars(&self) -> usize {
        self.nvars
    }

    /// Total-degree bound up to which the coefficients are exact.
    #[inline]
    pub fn order(&self) -> i32 {
        self.order
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &Coefficient)> + '_ {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, m: &Monomial) -> Coefficient {
        self.terms.get(m).cloned().unwrap_or_default()
    }

    pub fn coeff_of(&self, exps: &[u16]) -> Coefficient {
        self.coeff(&Monomial::new(exps))
    }

    pub fn constant_term(&self) -> Coefficient {
        self.coeff(&Monomial::ONE)
    }

    /// Lowest total degree among stored terms (`None` for the zero series).
    pub fn lowest_degree(&self) -> Option<u32> {
        self.terms.keys().next().map(|m| m.degree())
    }

    /// Highest total degree among stored terms.
    pub fn max_degree(&self) -> Option<u32> {
        self.terms.keys().next_back().map(|m| m.degree())
    }

    /// Largest exponent of `x` among stored terms.
    pub fn x_degree(&self) -> Option<u16> {
        self.terms.keys().map(|m| m.exp(0)).max()
    }

    /// Whether no stored term involves variable `i`.
    pub fn is_independent_of(&self, i: usize) -> bool {
        self.terms.keys().all(|m| m.exp(i) == 0)
    }

    pub(crate) fn insert(&mut self, m: Monomial, c: Coefficient) {
        if c.is_zero() || m.degree() as i64 > self.order as i64 {
            return;
        }
        self.terms.insert(m, c);
    }

    /// Accumulate `c·m`, dropping the term if it cancels or exceeds the order.
    pub(crate) fn add_term(&mut self, m: Monomial, c: &Coefficient) {
        if c.is_zero() || m.degree() as i64 > self.order as i64 {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c.clone());
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    /// Drop everything above `order` and lower the valid order accordingly.
    pub fn truncate(&self, order: i32) -> Self {
        let order = order.min(self.order);
        let terms = self
            .terms
            .iter()
            .filter(|(m, _)| (m.degree() as i64) <= order as i64)
            .map(|(m, c)| (*m, c.clone()))
            .collect();
        Self {
            nvars: self.nvars,
            order,
            terms,
        }
    }

    /// Raise the claimed valid order. Only sound for series that are exact
    /// polynomials of degree ≤ the current order.
    pub fn with_order(mut self, order: i32) -> Self {
        if order < self.order {
            return self.truncate(order);
        }
        self.order = order;
        self
    }

    pub fn check_same_vars(&self, other: &Self) -> Result<()> {
        if self.nvars != other.nvars {
            return Err(Error::VarCountMismatch {
                left: self.nvars,
                right: other.nvars,
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_vars(other)?;
        let mut out = self.truncate(self.order.min(other.order));
        for (m, c) in &other.terms {
            out.add_term(*m, c);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_vars(other)?;
        let mut out = self.truncate(self.order.min(other.order));
        for (m, c) in &other.terms {
            out.add_term(*m, &-c);
        }
        Ok(out)
    }

    pub fn neg(&self) -> Self {
        Self {
            nvars: self.nvars,
            order: self.order,
            terms: self.terms.iter().map(|(m, c)| (*m, -c)).collect(),
        }
    }

    pub fn scale(&self, k: &Coefficient) -> Self {
        if k.is_zero() {
            return Self::zero(self.nvars, self.order);
        }
        Self {
            nvars: self.nvars,
            order: self.order,
            terms: self.terms.iter().map(|(m, c)| (*m, c * k)).collect(),
        }
    }

    /// Multiply every term by the monomial `m` (valid order shifts by its degree).
    pub fn shift(&self, m: &Monomial) -> Self {
        Self {
            nvars: self.nvars,
            order: self.order + m.degree() as i32,
            terms: self.terms.iter().map(|(t, c)| (t.mul(m), c.clone())).collect(),
        }
    }

    /// Truncated product; the valid order is the minimum of the two.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_same_vars(other)?;
        let order = self.order.min(other.order);
        Ok(self.mul_to(other, order))
    }

    /// Product truncated at an explicit `order` (no validity bookkeeping).
    pub(crate) fn mul_to(&self, other: &Self, order: i32) -> Self {
        let mut out = Self::zero(self.nvars, order);
        if order < 0 || self.is_zero() || other.is_zero() {
            return out;
        }
        let a: Vec<_> = self.terms.iter().collect();
        let b: Vec<_> = other.terms.iter().collect();
        out.terms = crate::par::convolve(&a, &b, order as u32);
        out
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::one(self.nvars, self.order);
        for _ in 0..e {
            acc = acc.mul_to(self, self.order);
        }
        acc
    }

    /// Equality of all coefficients of total degree ≤ `order`.
    pub fn eq_to_order(&self, other: &Self, order: i32) -> bool {
        self.first_difference(other, order).is_none()
    }

    /// First monomial (in term order) of degree ≤ `order` where the two differ.
    pub fn first_difference(&self, other: &Self, order: i32) -> Option<(Monomial, Coefficient, Coefficient)> {
        let mut keys: Vec<&Monomial> = self
            .terms
            .keys()
            .chain(other.terms.keys())
            .filter(|m| (m.degree() as i64) <= order as i64)
            .collect();
        keys.sort();
        keys.dedup();
        keys.into_iter().find_map(|m| {
            let a = self.coeff(m);
            let b = other.coeff(m);
            (a != b).then_some((*m, a, b))
        })
    }

    /// Split by powers of `x`: the map `k ↦ a_k(x₁,…,xₙ)` with `a = Σ a_k x^k`.
    pub fn x_coefficients(&self) -> BTreeMap<u16, MultiSeries> {
        let mut out: BTreeMap<u16, MultiSeries> = BTreeMap::new();
        for (m, c) in &self.terms {
            let k = m.exp(0);
            let entry = out
                .entry(k)
                .or_insert_with(|| MultiSeries::zero(self.nvars, self.order - k as i32));
            entry.insert(m.with_exp(0, 0), c.clone());
        }
        out
    }

    /// Apply a closure to every coefficient, dropping resulting zeros.
    pub fn map_coeffs(&self, f: impl Fn(&Monomial, &Coefficient) -> Coefficient) -> Self {
        let mut out = Self::zero(self.nvars, self.order);
        for (m, c) in &self.terms {
            out.insert(*m, f(m, c));
        }
        out
    }

    /// Keep only the terms satisfying the predicate.
    pub fn filter_terms(&self, keep: impl Fn(&Monomial) -> bool) -> Self {
        Self {
            nvars: self.nvars,
            order: self.order,
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| keep(m))
                .map(|(m, c)| (*m, c.clone()))
                .collect(),
        }
    }

    /// Homogeneous component of total degree `d`.
    pub fn homogeneous_part(&self, d: u32) -> Self {
        self.filter_terms(|m| m.degree() == d)
    }

    /// Set `x = 0`.
    pub fn at_x_zero(&self) -> Self {
        self.filter_terms(|m| m.exp(0) == 0)
    }

    /// Set all parameters to zero, leaving a series in `x` alone.
    pub fn at_params_zero(&self) -> Self {
        self.filter_terms(|m| m.param_degree() == 0)
    }

    /// Embed into a ring with more variables (new ones appended, unused).
    pub fn extend_vars(&self, nvars: usize) -> Self {
        assert!(nvars >= self.nvars && nvars <= MAX_VARS);
        Self {
            nvars,
            order: self.order,
            terms: self.terms.clone(),
        }
    }

    /// Drop trailing variables that the series does not use.
    pub fn restrict_vars(&self, nvars: usize) -> Result<Self> {
        if self.terms.keys().any(|m| m.exps[nvars..].iter().any(|&e| e != 0)) {
            return Err(Error::Invalid(format!(
                "series uses variables beyond index {}",
                nvars - 1
            )));
        }
        Ok(Self {
            nvars,
            order: self.order,
            terms: self.terms.clone(),
        })
    }
}

impl fmt::Display for MultiSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            write!(f, "0")?;
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            let mono = m.fmt_with(self.nvars);
            let body = match (c.is_one(), mono.as_str()) {
                (_, "1") => format!("{c}"),
                (true, _) => mono,
                _ if *c == Coefficient::from_int(-1) => format!("-{mono}"),
                _ => format!("{c}*{mono}"),
            };
            if i == 0 {
                write!(f, "{body}")?;
            } else if let Some(rest) = body.strip_prefix('-') {
                write!(f, " - {rest}")?;
            } else {
                write!(f, " + {body}")?;
            }
        }
        write!(f, " + O({})", self.order + 1)
    }
}

impl fmt::Debug for MultiSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
