use serde::{Deserialize, Serialize};

use super::{Monomial, MultiSeries, MAX_VARS};
use crate::coeff::Coefficient;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermJson {
    /// `[real, imaginary]` as exact rational strings `"a/b"`.
    pub c: [String; 2],
    pub e: Vec<u16>,
}

/// Wire form of a series: `{"nvars": k, "order": N, "terms": [...]}`, terms
/// in graded-lex order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeriesJson {
    pub nvars: usize,
    pub order: i32,
    pub terms: Vec<TermJson>,
}

impl From<&MultiSeries> for SeriesJson {
    fn from(s: &MultiSeries) -> Self {
        SeriesJson {
            nvars: s.nvars(),
            order: s.order(),
            terms: s
                .terms()
                .map(|(m, c)| TermJson {
                    c: c.to_strings(),
                    e: m.exps(s.nvars()).to_vec(),
                })
                .collect(),
        }
    }
}

impl TryFrom<&SeriesJson> for MultiSeries {
    type Error = Error;

    fn try_from(j: &SeriesJson) -> Result<Self> {
        if j.nvars == 0 || j.nvars > MAX_VARS {
            return Err(Error::Parse(format!("nvars must be in 1..={MAX_VARS}")));
        }
        if j.order < 0 {
            return Err(Error::Parse("order must be nonnegative".into()));
        }
        let mut s = MultiSeries::zero(j.nvars, j.order);
        for t in &j.terms {
            if t.e.len() != j.nvars {
                return Err(Error::Parse(format!(
                    "exponent vector {:?} has length {} (nvars {})",
                    t.e,
                    t.e.len(),
                    j.nvars
                )));
            }
            let m = Monomial::new(&t.e);
            if m.degree() as i64 > j.order as i64 {
                return Err(Error::Parse(format!("term {:?} exceeds order {}", t.e, j.order)));
            }
            let c = Coefficient::from_strings(&t.c[0], &t.c[1])?;
            s.add_term(m, &c);
        }
        Ok(s)
    }
}

impl MultiSeries {
    pub fn to_json_string(&self) -> String {
        serde_json::to_string(&SeriesJson::from(self)).expect("series serializes")
    }

    pub fn from_json_str(src: &str) -> Result<Self> {
        let j: SeriesJson = serde_json::from_str(src).map_err(|e| Error::Parse(e.to_string()))?;
        MultiSeries::try_from(&j)
    }
}
