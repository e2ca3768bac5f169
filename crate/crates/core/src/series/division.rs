//! Exact division, formal Weierstrass division and the `g`-adic expansion.

use super::{Monomial, MultiSeries};
use crate::boundary::FactoredBoundary;
use crate::coeff::Coefficient;
use crate::error::{Error, Result};

/// Result of dividing `g` by an `x`-regular `f`: `g = q·f + r` with the
/// `x`-degree of every term of `r` below `d`.
#[derive(Clone, Debug, PartialEq)]
pub struct WeierstrassQuotRem {
    pub quotient: MultiSeries,
    pub remainder: MultiSeries,
    /// `x`-order of `f(x, 0, …, 0)`.
    pub d: u16,
}

/// Exact division of homogeneous polynomials of equal nvars.
fn divide_homogeneous(h: &MultiSeries, p: &MultiSeries, order: i32) -> std::result::Result<MultiSeries, (Monomial, Coefficient)> {
    let (lead_m, lead_c) = p
        .terms()
        .max_by(|a, b| a.0.lex_cmp(b.0))
        .map(|(m, c)| (*m, c.clone()))
        .expect("divisor is nonzero");
    let lead_inv = lead_c.inv().expect("nonzero coefficient");
    let mut rest = h.clone();
    rest.order = i32::MAX;
    let mut q = MultiSeries::zero(h.nvars(), order);
    while let Some((m, c)) = rest
        .terms()
        .max_by(|a, b| a.0.lex_cmp(b.0))
        .map(|(m, c)| (*m, c.clone()))
    {
        let t = m.checked_div(&lead_m).ok_or((m, c.clone()))?;
        let k = &c * &lead_inv;
        q.add_term(t, &k);
        for (pm, pc) in p.terms() {
            rest.add_term(pm.mul(&t), &-(pc * &k));
        }
    }
    Ok(q)
}

pub(crate) fn witness(nvars: usize, m: &Monomial, c: &Coefficient) -> String {
    let mono = m.fmt_with(nvars);
    match (mono.as_str(), c.is_one()) {
        ("1", _) => c.to_string(),
        (_, true) => mono,
        _ => format!("{c}*{mono}"),
    }
}

/// Exact quotient `g / f` in the formal power series ring, degree by degree
/// on leading forms: with `f_m` the lowest homogeneous part of `f`, the
/// degree-`k` part of `q` solves `q_k · f_m = (g − q_{<k} f)_{k+m}`.
///
/// The quotient is valid to `min(ord g, ord f) − m`.
pub fn divide_series(g: &MultiSeries, f: &MultiSeries) -> Result<MultiSeries> {
    g.check_same_vars(f)?;
    let m = f
        .lowest_degree()
        .ok_or_else(|| Error::Invalid("division by the zero series".into()))?;
    let top = g.order().min(f.order());
    let q_order = top - m as i32;
    let nvars = g.nvars();
    let mut rest = g.truncate(top);
    if let Some((tm, tc)) = rest.terms().find(|(t, _)| t.degree() < m) {
        return Err(Error::NotDivisible {
            order: top,
            witness: witness(nvars, tm, tc),
        });
    }
    let lead = f.homogeneous_part(m);
    let mut q = MultiSeries::zero(nvars, q_order.max(-1));
    for k in 0..=q_order.max(-1) {
        let h = rest.homogeneous_part(k as u32 + m);
        if h.is_zero() {
            continue;
        }
        let qk = divide_homogeneous(&h, &lead, q_order).map_err(|(wm, wc)| Error::NotDivisible {
            order: top,
            witness: witness(nvars, &wm, &wc),
        })?;
        let prod = qk.mul_to(f, top);
        for (pm, pc) in prod.terms() {
            rest.add_term(*pm, &-pc);
        }
        for (qm, qc) in qk.terms() {
            q.add_term(*qm, qc);
        }
    }
    if let Some((tm, tc)) = rest.terms().next() {
        return Err(Error::NotDivisible {
            order: top,
            witness: witness(nvars, tm, tc),
        });
    }
    Ok(q)
}

/// Rational weight `num/den ≥ 1` of each parameter such that every term of
/// `f` below `x^d` has weighted degree ≥ d.
fn parameter_weight(f: &MultiSeries, d: u16) -> (u64, u64) {
    let (mut num, mut den) = (1u64, 1u64);
    let mut raise = |n: u64, m: u64| {
        if n * den > num * m {
            num = n;
            den = m;
        }
    };
    for (m, _) in f.terms() {
        let a = m.exp(0);
        if a < d {
            raise((d - a) as u64, m.param_degree() as u64);
        }
    }
    // unknown terms above the valid order must obey the same bound
    let n = f.order() as i64;
    if n + 2 - (d as i64) > 0 {
        raise(d as u64, (n + 2 - d as i64) as u64);
    } else {
        raise(d as u64, 1);
    }
    (num, den)
}

fn ceil_div(a: i64, b: i64) -> i64 {
    a.div_euclid(b) + i64::from(a.rem_euclid(b) != 0)
}

/// Formal Weierstrass division of `g` by an `x`-regular `f`.
///
/// Computed by repeatedly splitting off the part of the dividend below `x^d`
/// and replacing `x^d` by `−E⁻¹·F_low`, where `f = x^d·E + F_low` and every
/// term of `F_low` has `x`-degree < d. Each round raises the parameter degree
/// of the part still to be divided, so the loop is finite at any order.
///
/// High powers of `x` can reduce to low-degree parameter monomials (for
/// `f = x² − x₁`, `x^{2k} ≡ x₁^k`), so the valid orders of `q` and `r` are
/// computed from a weighted degree in which the reduction never lowers weight.
pub fn weierstrass_divide(g: &MultiSeries, f: &MultiSeries) -> Result<WeierstrassQuotRem> {
    g.check_same_vars(f)?;
    let nvars = g.nvars();
    let d = f
        .at_params_zero()
        .lowest_degree()
        .ok_or(Error::NotXRegular { order: f.order() })? as u16;
    let n = g.order().min(f.order());
    if d == 0 {
        let q = g.mul(&f.unit_inverse()?)?;
        return Ok(WeierstrassQuotRem {
            quotient: q,
            remainder: MultiSeries::zero(nvars, n),
            d,
        });
    }
    let (num, den) = parameter_weight(f, d);
    let weight = |m: &Monomial| den * m.exp(0) as u64 + num * m.param_degree() as u64;
    let wmax = den * n.max(0) as u64;
    let keep = |s: MultiSeries| s.filter_terms(|m| weight(m) <= wmax);

    let f_low = f.filter_terms(|m| m.exp(0) < d);
    let mut e = MultiSeries::zero(nvars, n);
    for (m, c) in f.terms() {
        if m.exp(0) >= d {
            e.insert(m.with_exp(0, m.exp(0) - d), c.clone());
        }
    }
    let e_inv = e.unit_inverse()?;

    let mut quotient = MultiSeries::zero(nvars, n);
    let mut remainder = MultiSeries::zero(nvars, n);
    let mut rest = keep(g.truncate(n));
    loop {
        let mut high = MultiSeries::zero(nvars, n);
        for (m, c) in rest.terms() {
            if m.exp(0) < d {
                remainder.add_term(*m, c);
            } else {
                high.insert(m.with_exp(0, m.exp(0) - d), c.clone());
            }
        }
        if high.is_zero() {
            break;
        }
        let step = keep(high.mul_to(&e_inv, n));
        rest = keep(step.mul_to(&f_low, n).neg());
        for (m, c) in step.terms() {
            quotient.add_term(*m, c);
        }
    }

    let r_order = ceil_div((n as i64 + 1) * den as i64, num as i64) - 1;
    let q_order = ceil_div((n as i64 + 1 - d as i64) * den as i64, num as i64) - 1;
    Ok(WeierstrassQuotRem {
        quotient: quotient.truncate(q_order.min(n as i64) as i32),
        remainder: remainder.truncate(r_order.min(n as i64) as i32),
        d,
    })
}

/// The expansion `u = Σ_{j<count} u_j g^j mod (g^count)` with every `u_j` of
/// `x`-degree below `d`, by iterated Weierstrass division of the quotients.
pub fn gamma_expansion(u: &MultiSeries, g: &MultiSeries, count: usize) -> Result<Vec<MultiSeries>> {
    let mut out = Vec::with_capacity(count);
    let mut cur = u.clone();
    for _ in 0..count {
        let qr = weierstrass_divide(&cur, g)?;
        out.push(qr.remainder);
        cur = qr.quotient;
    }
    Ok(out)
}

/// Exact quotient `g / f` for a factored `f`: non-fibered factors are divided
/// out in the formal ring, fibered (x-independent) ones coefficient-wise in `x`.
pub fn divide_exact(g: &MultiSeries, f: &FactoredBoundary) -> Result<MultiSeries> {
    let mut q = g.clone();
    for factor in f.factors() {
        for _ in 0..factor.mult {
            q = if factor.fibered {
                divide_fibered(&q, &factor.poly)?
            } else {
                divide_series(&q, &factor.poly)?
            };
        }
    }
    Ok(q)
}

fn divide_fibered(g: &MultiSeries, p: &MultiSeries) -> Result<MultiSeries> {
    let m = p
        .lowest_degree()
        .ok_or_else(|| Error::Invalid("division by the zero series".into()))? as i32;
    let order = g.order().min(p.order()) - m;
    let mut out = MultiSeries::zero(g.nvars(), order);
    for (k, gk) in g.x_coefficients() {
        let qk = divide_series(&gk.with_order(g.order() - k as i32), p)?;
        let xk = Monomial::var(0).with_exp(0, k);
        for (mm, c) in qk.terms() {
            out.add_term(mm.mul(&xk), c);
        }
    }
    Ok(out)
}
