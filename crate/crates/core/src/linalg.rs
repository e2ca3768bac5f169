//! Exact sparse linear systems over ℚ(i).
//!
//! Rows are scaled to Gaussian integers and eliminated fraction-free:
//! `row ← p·row − r·pivot`, then divided by the integer content of the row.
//! Only rows with an entry in the pivot column are touched, so sparse systems
//! stay cheap. Back-substitution runs in exact rational arithmetic with free
//! unknowns set to zero.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_complex::Complex;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::coeff::Coefficient;

type GInt = Complex<BigInt>;

/// A linear equation `Σ coeffs[k].1 · u[coeffs[k].0] = rhs`.
#[derive(Clone, Debug, Default)]
pub struct Equation {
    pub coeffs: Vec<(usize, Coefficient)>,
    pub rhs: Coefficient,
}

/// The system has no solution; `row` is the smallest index of an input
/// equation that reduced to `0 = c ≠ 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Inconsistent {
    pub row: usize,
}

struct Row {
    origin: usize,
    entries: Vec<(usize, GInt)>,
    rhs: GInt,
}

impl Row {
    fn lead(&self) -> Option<usize> {
        self.entries.first().map(|(c, _)| *c)
    }

    fn normalize(&mut self) {
        let mut g = BigInt::zero();
        for v in self.entries.iter().map(|(_, v)| v).chain(std::iter::once(&self.rhs)) {
            g = g.gcd(&v.re).gcd(&v.im);
            if g.is_one() {
                return;
            }
        }
        if g.is_zero() || g.is_one() {
            return;
        }
        for (_, v) in &mut self.entries {
            v.re /= &g;
            v.im /= &g;
        }
        self.rhs.re /= &g;
        self.rhs.im /= &g;
    }
}

fn to_gint_row(eq: &Equation, origin: usize) -> Row {
    let mut den = BigInt::one();
    for c in eq.coeffs.iter().map(|(_, c)| c).chain(std::iter::once(&eq.rhs)) {
        den = den.lcm(c.re().denom()).lcm(c.im().denom());
    }
    let conv = |c: &Coefficient| -> GInt {
        let s = BigRational::from_integer(den.clone());
        Complex::new((c.re() * &s).to_integer(), (c.im() * &s).to_integer())
    };
    let mut entries: BTreeMap<usize, GInt> = BTreeMap::new();
    for (k, c) in &eq.coeffs {
        if c.is_zero() {
            continue;
        }
        let v = conv(c);
        let slot = entries.entry(*k).or_insert_with(GInt::zero);
        *slot = &*slot + v;
    }
    let mut row = Row {
        origin,
        entries: entries.into_iter().filter(|(_, v)| !v.is_zero()).collect(),
        rhs: conv(&eq.rhs),
    };
    row.normalize();
    row
}

/// `p·row − r·pivot` where `p`, `r` are the leading entries of `pivot`, `row`.
fn eliminate(row: &Row, pivot: &Row) -> Row {
    let p = &pivot.entries[0].1;
    let r = &row.entries[0].1;
    let mut out = Vec::with_capacity(row.entries.len() + pivot.entries.len());
    let (mut i, mut j) = (1, 1);
    while i < row.entries.len() || j < pivot.entries.len() {
        let ci = row.entries.get(i).map(|e| e.0).unwrap_or(usize::MAX);
        let cj = pivot.entries.get(j).map(|e| e.0).unwrap_or(usize::MAX);
        let (col, v) = if ci < cj {
            i += 1;
            (ci, p * &row.entries[i - 1].1)
        } else if cj < ci {
            j += 1;
            (cj, -(r * &pivot.entries[j - 1].1))
        } else {
            i += 1;
            j += 1;
            (ci, p * &row.entries[i - 1].1 - r * &pivot.entries[j - 1].1)
        };
        if !v.is_zero() {
            out.push((col, v));
        }
    }
    let mut res = Row {
        origin: row.origin,
        entries: out,
        rhs: p * &row.rhs - r * &pivot.rhs,
    };
    res.normalize();
    res
}

fn gint_to_coeff(v: &GInt) -> Coefficient {
    Coefficient::new(
        BigRational::from_integer(v.re.clone()),
        BigRational::from_integer(v.im.clone()),
    )
}

fn weight(v: &GInt) -> u64 {
    v.re.abs().bits() + v.im.abs().bits()
}

/// Solve the system in `ncols` unknowns. Returns one particular solution
/// (free unknowns zero) or the inconsistency witness.
pub fn solve(ncols: usize, equations: &[Equation]) -> Result<Vec<Coefficient>, Inconsistent> {
    let mut buckets: BTreeMap<usize, Vec<Row>> = BTreeMap::new();
    let mut bad: Option<usize> = None;
    let note_zero = |row: &Row, bad: &mut Option<usize>| {
        if !row.rhs.is_zero() {
            *bad = Some(bad.map_or(row.origin, |b| b.min(row.origin)));
        }
    };
    for (k, eq) in equations.iter().enumerate() {
        let row = to_gint_row(eq, k);
        assert!(row.entries.iter().all(|(c, _)| *c < ncols), "unknown index out of range");
        match row.lead() {
            Some(c) => buckets.entry(c).or_default().push(row),
            None => note_zero(&row, &mut bad),
        }
    }

    let mut echelon: Vec<Row> = Vec::new();
    while let Some((_, mut rows)) = buckets.pop_first() {
        // sparsest pivot, then smallest leading entry
        let k = (0..rows.len())
            .min_by_key(|&k| (rows[k].entries.len(), weight(&rows[k].entries[0].1), rows[k].origin))
            .expect("bucket is nonempty");
        let pivot = rows.swap_remove(k);
        for row in rows {
            let reduced = eliminate(&row, &pivot);
            match reduced.lead() {
                Some(c) => buckets.entry(c).or_default().push(reduced),
                None => note_zero(&reduced, &mut bad),
            }
        }
        echelon.push(pivot);
    }
    if let Some(row) = bad {
        return Err(Inconsistent { row });
    }

    let mut x = vec![Coefficient::zero(); ncols];
    for row in echelon.iter().rev() {
        let (c, lead) = &row.entries[0];
        let mut acc = gint_to_coeff(&row.rhs);
        for (j, v) in &row.entries[1..] {
            if !x[*j].is_zero() {
                acc -= &(&gint_to_coeff(v) * &x[*j]);
            }
        }
        x[*c] = acc.checked_div(&gint_to_coeff(lead)).expect("pivot is nonzero");
    }
    Ok(x)
}
