#![allow(dead_code)]

use num_complex::Complex64;
use rand::Rng;
use unipotent::diffeo::{exp_vertical, VerticalField};
use unipotent::residue::{sample_grid, to_complex_point};
use unipotent::{Coefficient, Factor, FactoredBoundary, Monomial, MultiSeries, ParamDiffeo};

pub fn s(src: &str, nvars: usize, order: i32) -> MultiSeries {
    MultiSeries::parse(nvars, order, src).unwrap()
}

/// Small nonzero rational `p/q` with `|p| ≤ num`, `1 ≤ q ≤ den`.
pub fn small_rational<R: Rng>(rng: &mut R, num: i64, den: i64) -> Coefficient {
    loop {
        let p = rng.gen_range(-num..=num);
        if p != 0 {
            return Coefficient::ratio(p, rng.gen_range(1..=den));
        }
    }
}

/// Random monomial of total degree in `degrees` satisfying `keep`.
pub fn random_monomial<R: Rng>(
    rng: &mut R,
    nvars: usize,
    degrees: std::ops::RangeInclusive<u32>,
    keep: impl Fn(&[u16]) -> bool,
) -> Monomial {
    loop {
        let d = rng.gen_range(degrees.clone());
        let mut e = vec![0u16; nvars];
        for _ in 0..d {
            e[rng.gen_range(0..nvars)] += 1;
        }
        if keep(&e) {
            return Monomial::new(&e);
        }
    }
}

/// Random polynomial with up to `nterms` terms.
pub fn random_poly<R: Rng>(
    rng: &mut R,
    nvars: usize,
    order: i32,
    degrees: std::ops::RangeInclusive<u32>,
    nterms: usize,
    keep: impl Fn(&[u16]) -> bool,
) -> MultiSeries {
    let mut p = MultiSeries::zero(nvars, order);
    for _ in 0..nterms {
        let m = random_monomial(rng, nvars, degrees.clone(), &keep);
        let c = small_rational(rng, 3, 3);
        p = p
            .add(&MultiSeries::monomial(nvars, order, c, m.exps(nvars)))
            .unwrap();
    }
    p
}

/// `exp(û f ∂/∂x)`.
pub fn exp_of(u: &MultiSeries, f: &MultiSeries) -> ParamDiffeo {
    exp_vertical(&VerticalField::new(u.mul(f).unwrap()).unwrap())
}

/// `(exp(û₁ f ∂x), exp(û₂ f ∂x))` with `1/û₂ = 1/û₁ − A`.
pub fn pair(u1: &MultiSeries, a: &MultiSeries, f: &MultiSeries) -> (ParamDiffeo, ParamDiffeo) {
    let u2 = u1.unit_inverse().unwrap().sub(a).unwrap().unit_inverse().unwrap();
    (exp_of(u1, f), exp_of(&u2, f))
}

/// `f = (x2 − x·x1)²` with its factorization.
pub fn equide(order: i32) -> (FactoredBoundary, MultiSeries, MultiSeries) {
    let g = s("x2 - x*x1", 3, order);
    let b = FactoredBoundary::new(vec![Factor::new(g.clone(), 2, false)]).unwrap();
    let f = g.mul(&g).unwrap();
    (b, f, g)
}

/// `L(β) = β_x·g + β·x1`, the special operator of `(x2 − x·x1)²`.
pub fn equide_operator(beta: &MultiSeries, g: &MultiSeries) -> MultiSeries {
    let x1 = MultiSeries::var(3, beta.order(), 1);
    beta.derivative(0).mul(g).unwrap().add(&beta.mul(&x1).unwrap()).unwrap()
}

/// `A(x, 0, 0) ≡ 0`, read off the terms.
pub fn vanishes_on_x_axis(a: &MultiSeries) -> bool {
    a.terms().all(|(m, _)| m.exp(1) + m.exp(2) > 0)
}

pub fn grid_points(nparams: usize, count: usize, seed: u64) -> Vec<Vec<Complex64>> {
    sample_grid(nparams, count, seed).iter().map(|p| to_complex_point(p)).collect()
}

pub fn relative_close(a: Complex64, b: Complex64, tol: f64) -> bool {
    (a - b).norm() <= tol * a.norm().max(b.norm()).max(1.0)
}
