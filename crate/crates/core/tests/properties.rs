mod common;

use common::*;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use unipotent::classify::{build_conjugation, classify_pair, verify_conjugation, ClassifyOptions, Status};
use unipotent::diffeo::{
    compose, conjugate, exp_vertical, flow, invert, linearize_1d, log_updiffeo, unit_cofactor, OneDimDiffeo,
    VerticalField,
};
use unipotent::homeq::{
    free_of_residues, in_coordinate_ideal, numerator_from_units, special_solve, HomEquation,
};
use unipotent::residue::{residue_1d, residue_sample_unipotent, FiberGerm, SampleOptions};
use unipotent::series::weierstrass_divide;
use unipotent::{Coefficient, Error, MultiSeries, ParamDiffeo};

fn series(nvars: usize, order: i32, maxdeg: u16, maxterms: usize, keep: fn(&[u16]) -> bool) -> impl Strategy<Value = MultiSeries> {
    prop::collection::vec((prop::collection::vec(0..=maxdeg, nvars), -6i64..=6, 1i64..=4), 0..=maxterms).prop_map(
        move |ts| {
            let mut s = MultiSeries::zero(nvars, order);
            for (e, p, q) in ts {
                if e.iter().map(|&k| k as u32).sum::<u32>() > maxdeg as u32 || !keep(&e) {
                    continue;
                }
                s = s.add(&MultiSeries::monomial(nvars, order, Coefficient::ratio(p, q), &e)).unwrap();
            }
            s
        },
    )
}

fn any(_: &[u16]) -> bool {
    true
}

fn no_constant(e: &[u16]) -> bool {
    e.iter().any(|&k| k > 0)
}

/// No constant and no `x`-linear term.
fn nilpotent(e: &[u16]) -> bool {
    no_constant(e) && !(e[0] == 1 && e[1..].iter().all(|&k| k == 0))
}

fn nonzero_rational() -> impl Strategy<Value = Coefficient> {
    (prop_oneof![-5i64..=-1, 1i64..=5], 1i64..=4).prop_map(|(p, q)| Coefficient::ratio(p, q))
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 32, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn distributivity(a in series(3, 8, 4, 6, any), b in series(3, 8, 4, 6, any), c in series(3, 8, 4, 6, any)) {
        let left = a.mul(&b.add(&c).unwrap()).unwrap();
        let right = a.mul(&b).unwrap().add(&a.mul(&c).unwrap()).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn unit_inverse(c in nonzero_rational(), p in series(3, 8, 4, 6, no_constant)) {
        let u = p.add(&MultiSeries::constant(3, 8, c)).unwrap();
        let v = u.unit_inverse().unwrap();
        prop_assert!(u.mul(&v).unwrap().eq_to_order(&MultiSeries::one(3, 8), 8));
    }

    #[test]
    fn weierstrass_identity(
        d in 1u16..=3,
        c in nonzero_rational(),
        rest in series(2, 8, 4, 4, |e| e[1] > 0),
        g in series(2, 8, 5, 6, any),
    ) {
        // f(x, 0) = c·x^d·(1 + x)
        let lead = MultiSeries::monomial(2, 8, c, &[d, 0]).mul(&s("1 + x", 2, 8)).unwrap();
        let f = lead.add(&rest).unwrap();
        let qr = weierstrass_divide(&g, &f).unwrap();
        prop_assert_eq!(qr.d, d);
        let back = qr.quotient.mul(&f).unwrap().add(&qr.remainder).unwrap();
        let valid = back.order();
        prop_assert!(valid >= 8 - 2 * d as i32 - 1, "valid order {} too low", valid);
        prop_assert!(back.eq_to_order(&g, valid));
        prop_assert!(qr.remainder.terms().all(|(m, _)| m.exp(0) < d));
    }

    #[test]
    fn integrate_then_differentiate(a in series(3, 8, 6, 8, any)) {
        let back = a.integrate_x().derivative(0);
        prop_assert!(back.eq_to_order(&a, 7));
    }

    #[test]
    fn composition_is_associative(
        a in series(2, 7, 4, 5, any),
        s1 in series(2, 7, 3, 4, no_constant),
        t1 in series(2, 7, 3, 4, no_constant),
    ) {
        let left = a.compose_x(&s1).unwrap().compose_x(&t1).unwrap();
        let right = a.compose_x(&s1.compose_x(&t1).unwrap()).unwrap();
        let n = left.order().min(right.order());
        prop_assert!(left.eq_to_order(&right, n));
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 16, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn log_exp_round_trip(x in series(2, 10, 4, 5, nilpotent)) {
        let field = VerticalField::new(x.clone()).unwrap();
        let back = log_updiffeo(&exp_vertical(&field)).unwrap();
        prop_assert_eq!(back.fhat(), &x);
    }

    #[test]
    fn flows_form_a_group(x in series(2, 8, 4, 4, nilpotent), s1 in nonzero_rational(), t1 in nonzero_rational()) {
        let field = VerticalField::new(x).unwrap();
        let left = compose(&flow(&field, &s1), &flow(&field, &t1)).unwrap();
        prop_assert_eq!(left, flow(&field, &(&s1 + &t1)));
    }

    #[test]
    fn log_of_inverse_is_negative(x in series(2, 8, 4, 4, nilpotent)) {
        let field = VerticalField::new(x.clone()).unwrap();
        let inv = invert(&exp_vertical(&field)).unwrap();
        let back = log_updiffeo(&inv).unwrap();
        prop_assert_eq!(back.fhat(), &x.neg());
    }

    #[test]
    fn cofactor_divides_the_displacement(x in series(2, 10, 4, 4, nilpotent)) {
        prop_assume!(!x.is_zero());
        let field = VerticalField::new(x.clone()).unwrap();
        let phi = exp_vertical(&field);
        let u = unit_cofactor(&phi, &field).unwrap();
        prop_assert!(u.constant_term().is_one());
        let m = x.lowest_degree().unwrap() as i32;
        let ux = u.mul(&x).unwrap();
        prop_assert!(u.order() >= phi.order() - m);
        prop_assert!(ux.eq_to_order(&phi.displacement(), ux.order()));
    }

    #[test]
    fn linearization_removes_higher_terms(a in prop_oneof![Just(2i64), Just(3), Just(-2)], rest in series(1, 8, 8, 5, |e| e[0] >= 2)) {
        let tau = OneDimDiffeo::new(rest.add(&MultiSeries::monomial(1, 8, Coefficient::from_int(a), &[1])).unwrap()).unwrap();
        let sigma = linearize_1d(&tau, 8).unwrap();
        let sig = ParamDiffeo::new(sigma.series().clone()).unwrap();
        let t = ParamDiffeo::new(tau.series().clone()).unwrap();
        let lin = compose(&invert(&sig).unwrap(), &compose(&t, &sig).unwrap()).unwrap();
        prop_assert!(lin.xcomp().eq_to_order(&MultiSeries::monomial(1, 8, Coefficient::from_int(a), &[1]), 8));
    }

    #[test]
    fn residue_scaling(nu in 1u16..=4, unit in series(1, 10, 6, 4, no_constant), c in nonzero_rational()) {
        let a = MultiSeries::monomial(1, 10, Coefficient::one(), &[nu])
            .mul(&unit.add(&MultiSeries::one(1, 10)).unwrap())
            .unwrap();
        let r = residue_1d(&FiberGerm::new(a.clone(), vec![]).unwrap()).unwrap();
        let rc = residue_1d(&FiberGerm::new(a.scale(&c), vec![]).unwrap()).unwrap();
        prop_assert_eq!(rc, r.checked_div(&c).unwrap());
    }

    #[test]
    fn residue_is_a_coordinate_invariant(nu in 1u16..=3, unit in series(1, 12, 5, 3, no_constant), tail in series(1, 12, 4, 3, |e| e[0] >= 2)) {
        let a = MultiSeries::monomial(1, 12, Coefficient::one(), &[nu])
            .mul(&unit.add(&MultiSeries::one(1, 12)).unwrap())
            .unwrap();
        let sigma = MultiSeries::var(1, 12, 0).add(&tail).unwrap();
        // push-forward of a(z)∂/∂z: a(σ(y))/σ'(y)
        let pushed = a.compose_x(&sigma).unwrap().mul(&sigma.derivative(0).unit_inverse().unwrap()).unwrap();
        let r = residue_1d(&FiberGerm::new(a, vec![]).unwrap()).unwrap();
        let rp = residue_1d(&FiberGerm::new(pushed, vec![]).unwrap()).unwrap();
        prop_assert_eq!(r, rp);
    }
}

#[test]
fn residue_fits_two_over_y_cubed() {
    let x = VerticalField::new(s("x^2*(x - x1)^2", 2, 12)).unwrap();
    let factor = s("x", 2, 12);
    for y in [0.5, 1.0 / 3.0, 0.25] {
        let r = residue_sample_unipotent(&x, &factor, 0, &[Complex64::new(y, 0.0)], &SampleOptions::default()).unwrap();
        assert!(relative_close(r.value, Complex64::new(2.0 / (y * y * y), 0.0), 1e-8), "{y}: {}", r.value);
    }
}

/// Fibers of (x2 − x·x1) whose root x2/x1 lies inside the trusted disc.
fn equide_points() -> Vec<Vec<Complex64>> {
    grid_points(2, 5, 3).into_iter().map(|p| vec![p[0], p[0] * p[1] / 2.0]).collect()
}

#[test]
fn solver_soundness_and_special_implies_free() {
    let (b, _, g) = equide(10);
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut solved = 0;
    for case in 0..20 {
        let beta0 = random_poly(&mut rng, 3, 10, 0..=3, 3, |_| true);
        let a = equide_operator(&beta0, &g).with_order(10);
        let e = HomEquation::new(a.clone(), b.clone()).unwrap();
        let sol = special_solve(&e, 8).unwrap_or_else(|err| panic!("case {case}: {err}"));
        // the defining identity, recomputed outside the solver
        assert!(equide_operator(&sol.beta, &g).eq_to_order(&a, 8), "case {case}");
        let v = free_of_residues(&e, &equide_points(), 1e-8, &SampleOptions::default()).unwrap();
        assert!(v.free, "case {case}: {:?}", v.checks);
        assert!(v.checks.len() == 5, "case {case}: {} usable samples", v.checks.len());
        solved += 1;
    }
    assert_eq!(solved, 20);
}

#[test]
fn special_solutions_add() {
    let (b, _, g) = equide(10);
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for case in 0..10 {
        let a1 = equide_operator(&random_poly(&mut rng, 3, 10, 0..=3, 2, |_| true), &g).with_order(10);
        let a2 = equide_operator(&random_poly(&mut rng, 3, 10, 0..=3, 2, |_| true), &g)
            .add(&random_poly(&mut rng, 3, 10, 1..=3, 1, |e| e[0] == 0))
            .unwrap()
            .with_order(10);
        let s1 = special_solve(&HomEquation::new(a1.clone(), b.clone()).unwrap(), 8).unwrap();
        let s2 = special_solve(&HomEquation::new(a2.clone(), b.clone()).unwrap(), 8).unwrap();
        let sum = a1.add(&a2).unwrap();
        assert!(special_solve(&HomEquation::new(sum.clone(), b.clone()).unwrap(), 8).is_ok(), "case {case}");
        let beta = s1.beta.add(&s2.beta).unwrap();
        assert!(equide_operator(&beta, &g).eq_to_order(&sum, 8), "case {case}");
    }
}

#[test]
fn refutation_is_monotone() {
    let (b, _, _) = equide(12);
    let mut rng = ChaCha8Rng::seed_from_u64(29);
    let mut refuted = 0;
    for _ in 0..20 {
        let a = random_poly(&mut rng, 3, 12, 0..=4, 3, |_| true);
        let e = HomEquation::new(a.clone(), b.clone()).unwrap();
        for n in 1..=5 {
            if let Err(Error::NoSolution { .. }) = special_solve(&e, n) {
                refuted += 1;
                for higher in n + 1..=8 {
                    assert!(
                        matches!(special_solve(&e, higher), Err(Error::NoSolution { .. })),
                        "{a}: refuted at {n}, solved at {higher}"
                    );
                }
                break;
            }
        }
    }
    assert!(refuted > 0);
}

#[test]
fn path_method_certificates_hold() {
    let n = 8;
    let (b, f, g) = equide(n + 4);
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for case in 0..6 {
        let u1 = MultiSeries::one(3, n + 4)
            .add(&random_poly(&mut rng, 3, n + 4, 1..=2, 2, |_| true))
            .unwrap();
        let a = equide_operator(&random_poly(&mut rng, 3, n + 4, 0..=2, 2, |_| true), &g)
            .add(&random_poly(&mut rng, 3, n + 4, 1..=2, 1, |e| e[0] == 0))
            .unwrap()
            .with_order(n + 4);
        let (phi1, phi2) = pair(&u1, &a, &f);
        let a_built = numerator_from_units(
            &unipotent::homeq::cofactor_over(&phi1, &b).unwrap(),
            &unipotent::homeq::cofactor_over(&phi2, &b).unwrap(),
        )
        .unwrap();
        let sol = special_solve(&HomEquation::new(a_built, b.clone()).unwrap(), n).unwrap();
        let cert = build_conjugation(&phi1, &phi2, &b, &sol, n).unwrap_or_else(|e| panic!("case {case}: {e}"));
        assert!(verify_conjugation(&cert, &phi1, &phi2).unwrap().holds);
        let left = compose(&cert.sigma, &phi1).unwrap();
        let right = compose(&phi2, &cert.sigma).unwrap();
        assert!(left.xcomp().eq_to_order(right.xcomp(), n), "case {case}");
    }
}

#[test]
fn conjugate_pairs_are_never_refuted() {
    let m = 12;
    let (b, f, g) = equide(m);
    let mut rng = ChaCha8Rng::seed_from_u64(37);
    for case in 0..5 {
        let u = MultiSeries::one(3, m)
            .add(&random_poly(&mut rng, 3, m, 1..=2, 2, |_| true).scale(&Coefficient::ratio(1, 2)))
            .unwrap();
        let phi = exp_of(&u, &f);
        // x∘σ − x ∈ (x2 − x·x1)
        let r = random_poly(&mut rng, 3, m, 0..=2, 2, |_| true).scale(&Coefficient::ratio(1, 2));
        let sigma = ParamDiffeo::new(MultiSeries::var(3, m, 0).add(&g.mul(&r).unwrap()).unwrap()).unwrap();
        let psi = conjugate(&phi, &sigma).unwrap();
        let mut opts = ClassifyOptions::new(8, equide_points());
        opts.conjugation = false;
        let v = classify_pair(&phi, &psi, &b, &opts).unwrap_or_else(|e| panic!("case {case}: {e}"));
        assert_eq!(v.status, Status::SpecialConjugate, "case {case}: {:?} {:?}", v.witness, v.notes);
    }
}

#[test]
fn lambda_soundness() {
    let m = 9;
    let n = 6;
    let (b, f, g) = equide(m);
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let lambdas = [Coefficient::zero(), Coefficient::one(), Coefficient::ratio(-1, 2)];
    let (mut special, mut refuted) = (0, 0);
    for case in 0..30 {
        let v1 = s("3", 3, m).add(&random_poly(&mut rng, 3, m, 1..=2, 2, |_| true)).unwrap();
        let lambda = lambdas[case % 3].clone();
        let a = equide_operator(&random_poly(&mut rng, 3, m, 0..=2, 2, |_| true), &g)
            .add(&random_poly(&mut rng, 3, m, 1..=3, 1, |e| e[0] == 0))
            .unwrap()
            .add(&MultiSeries::constant(3, m, lambda.clone()))
            .unwrap()
            .with_order(m);
        let u1 = v1.unit_inverse().unwrap();
        let (phi1, phi2) = pair(&u1, &a, &f);
        let mut opts = ClassifyOptions::new(n, equide_points());
        opts.conjugation = false;
        let v = classify_pair(&phi1, &phi2, &b, &opts).unwrap();
        assert_eq!(v.lambda.as_ref(), Some(&lambda), "case {case}");
        let predicate = lambda.is_zero() && in_coordinate_ideal(&a, &[1, 2]);
        assert_eq!(v.status == Status::SpecialConjugate, predicate, "case {case}: {:?}", v.witness);
        if predicate {
            special += 1;
        } else {
            assert_eq!(v.status, Status::RefutedHomological, "case {case}");
            refuted += 1;
        }
    }
    assert!(special > 0 && refuted > 0);
}
