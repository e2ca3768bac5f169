//! The fixed-point function `f = Π f_j^{l_j} · Π F_k^{m_k}` with a
//! user-supplied factorization.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{MultiSeries, SeriesJson};

#[derive(Clone, Debug, PartialEq)]
pub struct Factor {
    pub poly: MultiSeries,
    pub mult: u32,
    /// Fibered factors do not depend on `x`.
    pub fibered: bool,
}

impl Factor {
    pub fn new(poly: MultiSeries, mult: u32, fibered: bool) -> Self {
        Self { poly, mult, fibered }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FactoredBoundary {
    nvars: usize,
    factors: Vec<Factor>,
}

impl FactoredBoundary {
    /// Validates multiplicities, fiberedness (`∂F/∂x ≡ 0`) and that each
    /// non-fibered factor actually depends on `x` and vanishes at the origin.
    pub fn new(factors: Vec<Factor>) -> Result<Self> {
        let nvars = factors
            .first()
            .map(|f| f.poly.nvars())
            .ok_or_else(|| Error::Invalid("boundary needs at least one factor".into()))?;
        for (j, f) in factors.iter().enumerate() {
            if f.poly.nvars() != nvars {
                return Err(Error::VarCountMismatch {
                    left: nvars,
                    right: f.poly.nvars(),
                });
            }
            if f.mult == 0 {
                return Err(Error::Invalid(format!("factor {j} has multiplicity 0")));
            }
            if f.poly.is_zero() {
                return Err(Error::Invalid(format!("factor {j} is zero")));
            }
            let depends_on_x = !f.poly.is_independent_of(0);
            if f.fibered && depends_on_x {
                return Err(Error::Invalid(format!(
                    "factor {j} is declared fibered but depends on x"
                )));
            }
            if !f.fibered && !depends_on_x {
                return Err(Error::Invalid(format!(
                    "factor {j} does not depend on x and must be declared fibered"
                )));
            }
        }
        Ok(Self { nvars, factors })
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn non_fibered(&self) -> impl Iterator<Item = (usize, &Factor)> {
        self.factors.iter().enumerate().filter(|(_, f)| !f.fibered)
    }

    fn product_of<'a>(&self, it: impl Iterator<Item = (&'a MultiSeries, u32)>, order: i32) -> MultiSeries {
        let mut acc = MultiSeries::one(self.nvars, order);
        for (p, e) in it {
            for _ in 0..e {
                acc = acc.mul(p).expect("same nvars");
            }
        }
        acc
    }

    fn max_order(&self) -> i32 {
        self.factors.iter().map(|f| f.poly.order()).min().unwrap_or(0)
    }

    /// `f` itself.
    pub fn product(&self) -> MultiSeries {
        self.product_of(self.factors.iter().map(|f| (&f.poly, f.mult)), self.max_order())
    }

    /// `f_N = Π f_j^{l_j}` over non-fibered factors.
    pub fn f_n(&self) -> MultiSeries {
        self.product_of(
            self.factors.iter().filter(|f| !f.fibered).map(|f| (&f.poly, f.mult)),
            self.max_order(),
        )
    }

    /// `f_F = Π F_k^{m_k}` over fibered factors.
    pub fn f_f(&self) -> MultiSeries {
        self.product_of(
            self.factors.iter().filter(|f| f.fibered).map(|f| (&f.poly, f.mult)),
            self.max_order(),
        )
    }

    /// `Π f_j^{l_j − 1}` over non-fibered factors.
    pub fn special_denominator_n(&self) -> MultiSeries {
        self.product_of(
            self.factors.iter().filter(|f| !f.fibered).map(|f| (&f.poly, f.mult - 1)),
            self.max_order(),
        )
    }

    /// `Π f_j` over all non-fibered factors (the reduced `f_N`).
    pub fn radical_n(&self) -> MultiSeries {
        self.product_of(
            self.factors.iter().filter(|f| !f.fibered).map(|f| (&f.poly, 1)),
            self.max_order(),
        )
    }

    /// Numerical distinctness check: along each sampled fiber, no two
    /// non-fibered factors share a root (within `tol`).
    pub fn check_distinct(&self, samples: &[Vec<Complex64>], tol: f64) -> Result<()> {
        let nf: Vec<_> = self.non_fibered().collect();
        for p in samples {
            let roots: Vec<Vec<Complex64>> = nf
                .iter()
                .map(|(_, f)| {
                    let coeffs = f.poly.fiber_numeric(p)?;
                    Ok(crate::roots::polynomial_roots(&coeffs))
                })
                .collect::<Result<_>>()?;
            for a in 0..roots.len() {
                for b in a + 1..roots.len() {
                    for ra in &roots[a] {
                        if roots[b].iter().any(|rb| (ra - rb).norm() < tol) {
                            return Err(Error::Invalid(format!(
                                "factors {} and {} share a root on the fiber through {:?}",
                                nf[a].0, nf[b].0, p
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> BoundaryJson {
        BoundaryJson {
            factors: self
                .factors
                .iter()
                .map(|f| FactorJson {
                    poly: SeriesJson::from(&f.poly),
                    mult: f.mult,
                    fibered: f.fibered,
                })
                .collect(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FactorJson {
    pub poly: SeriesJson,
    pub mult: u32,
    pub fibered: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BoundaryJson {
    pub factors: Vec<FactorJson>,
}

impl TryFrom<&BoundaryJson> for FactoredBoundary {
    type Error = Error;
    fn try_from(j: &BoundaryJson) -> Result<Self> {
        let factors = j
            .factors
            .iter()
            .map(|f| Ok(Factor::new(MultiSeries::try_from(&f.poly)?, f.mult, f.fibered)))
            .collect::<Result<Vec<_>>>()?;
        FactoredBoundary::new(factors)
    }
}
