//! Data-parallel helpers. With the `parallel` feature these dispatch to
//! rayon; without it they run the same code sequentially. Output order is
//! identical either way.

use std::collections::BTreeMap;

use crate::coeff::Coefficient;
use crate::series::Monomial;

/// Products below this many term pairs are not worth splitting.
#[cfg(feature = "parallel")]
const PAR_CONVOLVE_MIN_PAIRS: usize = 8192;

fn convolve_chunk(
    a: &[(&Monomial, &Coefficient)],
    b: &[(&Monomial, &Coefficient)],
    order: u32,
) -> BTreeMap<Monomial, Coefficient> {
    let mut out: BTreeMap<Monomial, Coefficient> = BTreeMap::new();
    for (ma, ca) in a {
        let room = match order.checked_sub(ma.degree()) {
            Some(r) => r,
            None => break,
        };
        for (mb, cb) in b {
            // both inputs are sorted by degree first
            if mb.degree() > room {
                break;
            }
            let m = ma.mul(mb);
            let c = *ca * *cb;
            match out.entry(m) {
                std::collections::btree_map::Entry::Vacant(v) => {
                    v.insert(c);
                }
                std::collections::btree_map::Entry::Occupied(mut o) => {
                    *o.get_mut() += &c;
                }
            }
        }
    }
    out.retain(|_, c| !c.is_zero());
    out
}

#[cfg(feature = "parallel")]
fn merge(mut into: BTreeMap<Monomial, Coefficient>, from: BTreeMap<Monomial, Coefficient>) -> BTreeMap<Monomial, Coefficient> {
    for (m, c) in from {
        match into.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += &c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }
    into
}

/// Degree-truncated convolution of two graded-sorted term lists.
pub(crate) fn convolve(
    a: &[(&Monomial, &Coefficient)],
    b: &[(&Monomial, &Coefficient)],
    order: u32,
) -> BTreeMap<Monomial, Coefficient> {
    #[cfg(feature = "parallel")]
    {
        if a.len() * b.len() >= PAR_CONVOLVE_MIN_PAIRS && a.len() >= 2 {
            use rayon::prelude::*;
            let chunk = (a.len() / (rayon::current_num_threads() * 2)).max(1);
            return a
                .par_chunks(chunk)
                .map(|ch| convolve_chunk(ch, b, order))
                .reduce(BTreeMap::new, merge);
        }
    }
    convolve_chunk(a, b, order)
}

/// Order-preserving map over a slice.
pub fn map<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

/// Sequential reference version of [`map`], always available for comparisons.
pub fn map_sequential<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    F: Fn(&T) -> U,
{
    items.iter().map(f).collect()
}

/// Whether the crate was built with rayon support.
pub fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}
