//! Numerical roots of univariate complex polynomials: eigenvalues of the
//! companion matrix, polished by a few Newton steps.

use nalgebra::DMatrix;
use num_complex::Complex64;

fn horner(coeffs: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

fn durand_kerner(c: &[Complex64]) -> Vec<Complex64> {
    let n = c.len() - 1;
    let monic: Vec<Complex64> = c.iter().map(|z| z / c[n]).collect();
    let seed = Complex64::new(0.4, 0.9);
    let mut z: Vec<Complex64> = (0..n).map(|k| seed.powu(k as u32)).collect();
    for _ in 0..500 {
        let mut delta = 0.0f64;
        for i in 0..n {
            let mut den = Complex64::new(1.0, 0.0);
            for j in 0..n {
                if i != j {
                    den *= z[i] - z[j];
                }
            }
            let step = horner(&monic, z[i]).0 / den;
            z[i] -= step;
            delta = delta.max(step.norm());
        }
        if delta < 1e-15 {
            break;
        }
    }
    z
}

/// Value of `Σ coeffs[k] z^k`.
pub fn eval_poly(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    horner(coeffs, z).0
}

/// All roots of `Σ coeffs[k] z^k` (ascending coefficients), with
/// multiplicity. Leading coefficients below `1e-14` times the largest one are
/// treated as zero.
pub fn polynomial_roots(coeffs: &[Complex64]) -> Vec<Complex64> {
    let scale = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Vec::new();
    }
    let mut deg = coeffs.len() - 1;
    while deg > 0 && coeffs[deg].norm() <= 1e-14 * scale {
        deg -= 1;
    }
    let c = &coeffs[..=deg];
    // roots at zero are exact; strip them before forming the companion matrix
    let low = c.iter().take_while(|z| z.norm() == 0.0).count();
    let mut roots = vec![Complex64::new(0.0, 0.0); low];
    let c = &c[low..];
    let n = c.len() - 1;
    if n == 0 {
        return roots;
    }
    let lead = c[n];
    let mut m = DMatrix::<Complex64>::zeros(n, n);
    for i in 1..n {
        m[(i, i - 1)] = Complex64::new(1.0, 0.0);
    }
    for i in 0..n {
        m[(i, n - 1)] = -c[i] / lead;
    }
    let eig: Vec<Complex64> = match m.schur().eigenvalues() {
        Some(v) => v.iter().copied().collect(),
        None => durand_kerner(c),
    };
    for z0 in eig {
        let mut z = z0;
        for _ in 0..4 {
            let (p, dp) = horner(c, z);
            if dp.norm() == 0.0 {
                break;
            }
            let step = p / dp;
            if !step.re.is_finite() || !step.im.is_finite() {
                break;
            }
            z -= step;
        }
        roots.push(z);
    }
    roots
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn quadratic() {
        // z² − 3z + 2
        let mut r = polynomial_roots(&[c(2.0), c(-3.0), c(1.0)]);
        r.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
        assert!((r[0] - c(1.0)).norm() < 1e-12);
        assert!((r[1] - c(2.0)).norm() < 1e-12);
    }

    #[test]
    fn complex_roots() {
        // z² + 1
        let r = polynomial_roots(&[c(1.0), c(0.0), c(1.0)]);
        assert_eq!(r.len(), 2);
        for z in r {
            assert!((z * z + c(1.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn zero_roots_and_trailing_zeros() {
        // z²(z − 1/2) with a spurious zero leading coefficient
        let r = polynomial_roots(&[c(0.0), c(0.0), c(-0.5), c(1.0), c(0.0)]);
        assert_eq!(r.len(), 3);
        assert_eq!(r.iter().filter(|z| z.norm() == 0.0).count(), 2);
    }
}
