use num_complex::Complex64;

use super::{Monomial, MultiSeries};
use crate::coeff::Coefficient;
use crate::error::{Error, Result};

impl MultiSeries {
    /// Formal partial derivative; the valid order drops by one.
    pub fn derivative(&self, var: usize) -> MultiSeries {
        let mut out = self.derivative_raw(var);
        out.order = self.order - 1;
        out
    }

    /// Partial derivative keeping the input's valid order. Used inside
    /// operators where the derivative is multiplied by a series of positive
    /// order, so no precision is lost overall.
    pub(crate) fn derivative_raw(&self, var: usize) -> MultiSeries {
        assert!(var < self.nvars, "variable index out of range");
        let mut out = MultiSeries::zero(self.nvars, self.order);
        for (m, c) in &self.terms {
            let e = m.exp(var);
            if e == 0 {
                continue;
            }
            out.insert(m.with_exp(var, e - 1), c.scale_int(e as i64));
        }
        out
    }

    /// Term-wise antiderivative in `x` with zero `x`-constant part.
    pub fn integrate_x(&self) -> MultiSeries {
        let mut out = MultiSeries::zero(self.nvars, self.order + 1);
        for (m, c) in &self.terms {
            let e = m.exp(0);
            let k = Coefficient::ratio(1, e as i64 + 1);
            out.insert(m.with_exp(0, e + 1), c * &k);
        }
        out
    }

    /// Substitute `x ↦ s` leaving the parameters untouched.
    pub fn compose_x(&self, s: &MultiSeries) -> Result<MultiSeries> {
        self.check_same_vars(s)?;
        if !s.constant_term().is_zero() {
            return Err(Error::NonzeroConstantTerm);
        }
        let order = self.order.min(s.order);
        Ok(self.compose_x_to(s, order))
    }

    pub(crate) fn compose_x_to(&self, s: &MultiSeries, order: i32) -> MultiSeries {
        let coeffs = self.x_coefficients();
        let top = match coeffs.keys().next_back() {
            Some(&k) => k,
            None => return MultiSeries::zero(self.nvars, order),
        };
        // Horner in x
        let mut acc = MultiSeries::zero(self.nvars, order);
        for k in (0..=top).rev() {
            acc = acc.mul_to(s, order);
            if let Some(ak) = coeffs.get(&k) {
                for (m, c) in ak.terms() {
                    acc.add_term(*m, c);
                }
            }
        }
        acc
    }

    /// Multiplicative inverse of a series with nonzero constant term.
    pub fn unit_inverse(&self) -> Result<MultiSeries> {
        let c0 = self.constant_term().inv().ok_or(Error::NotAUnit)?;
        let n = self.order;
        let mut v = MultiSeries::constant(self.nvars, n, c0);
        let mut prec = 0;
        // Newton: v ← v + v(1 − u v), doubling the correct order each step
        while prec < n {
            prec = (2 * prec + 1).min(n);
            let uv = self.mul_to(&v, prec);
            let mut e = MultiSeries::one(self.nvars, prec);
            for (m, c) in uv.terms() {
                e.add_term(*m, &-c);
            }
            let corr = v.mul_to(&e, prec);
            let mut next = v.truncate(prec);
            next.order = prec;
            for (m, c) in corr.terms() {
                next.add_term(*m, c);
            }
            v = next;
        }
        v.order = n;
        Ok(v)
    }

    /// Evaluate the truncated sum in double-precision complex arithmetic.
    pub fn eval_numeric(&self, point: &[Complex64]) -> Result<Complex64> {
        if point.len() != self.nvars {
            return Err(Error::VarCountMismatch {
                left: self.nvars,
                right: point.len(),
            });
        }
        let maxdeg = self.max_degree().unwrap_or(0) as usize;
        let powers: Vec<Vec<Complex64>> = point
            .iter()
            .map(|&z| {
                let mut p = Vec::with_capacity(maxdeg + 1);
                let mut acc = Complex64::new(1.0, 0.0);
                for _ in 0..=maxdeg {
                    p.push(acc);
                    acc *= z;
                }
                p
            })
            .collect();
        let mut sum = Complex64::new(0.0, 0.0);
        for (m, c) in &self.terms {
            let mut t = c.to_complex();
            for (v, pw) in powers.iter().enumerate() {
                t *= pw[m.exp(v) as usize];
            }
            sum += t;
        }
        Ok(sum)
    }

    /// Restrict to the fiber through the parameter point `params`:
    /// returns the coefficients of `x^0, x^1, …` as complex numbers.
    pub fn fiber_numeric(&self, params: &[Complex64]) -> Result<Vec<Complex64>> {
        if params.len() + 1 != self.nvars {
            return Err(Error::VarCountMismatch {
                left: self.nvars - 1,
                right: params.len(),
            });
        }
        let mut out = vec![Complex64::new(0.0, 0.0); self.x_degree().unwrap_or(0) as usize + 1];
        for (m, c) in &self.terms {
            let mut t = c.to_complex();
            for (j, p) in params.iter().enumerate() {
                t *= p.powu(m.exp(j + 1) as u32);
            }
            out[m.exp(0) as usize] += t;
        }
        Ok(out)
    }

    /// Exact restriction to the fiber through a point with Gaussian-rational
    /// coordinates; the result is a one-variable series in `x`.
    pub fn fiber_exact(&self, params: &[Coefficient]) -> Result<MultiSeries> {
        if params.len() + 1 != self.nvars {
            return Err(Error::VarCountMismatch {
                left: self.nvars - 1,
                right: params.len(),
            });
        }
        let mut out = MultiSeries::zero(1, self.order);
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (j, p) in params.iter().enumerate() {
                let e = m.exp(j + 1);
                if e > 0 {
                    t = &t * &p.pow(e as u32);
                }
            }
            out.add_term(Monomial::new(&[m.exp(0)]), &t);
        }
        Ok(out)
    }
}
