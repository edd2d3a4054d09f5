//! Numeric root isolation for exact polynomials: companion-matrix
//! eigenvalues polished by Newton, with the real-root count fixed exactly
//! by a Sturm sequence.

use crate::error::{FqwError, Result};
use crate::poly::{rat_to_f64, Poly};
use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

/// Roots of a squarefree polynomial. Real roots get an exact zero
/// imaginary part; the rest come in conjugate pairs.
pub fn roots_squarefree(p: &Poly, tol: f64) -> Result<Vec<Complex64>> {
    let deg = match p.degree() {
        None | Some(0) => return Ok(Vec::new()),
        Some(d) => d,
    };
    if deg == 1 {
        let r = -p.coeff(0) / p.coeff(1);
        return Ok(vec![Complex64::new(rat_to_f64(&r), 0.0)]);
    }
    let monic = p.monic();
    let c: Vec<f64> = monic.to_f64();
    let mut comp = DMatrix::<f64>::zeros(deg, deg);
    for i in 1..deg {
        comp[(i, i - 1)] = 1.0;
    }
    for i in 0..deg {
        comp[(i, deg - 1)] = -c[i];
    }
    let eig = comp.complex_eigenvalues();
    let dp = monic.derivative();
    let mut roots: Vec<Complex64> = eig.iter().map(|z| polish(&monic, &dp, *z)).collect();
    for r in &roots {
        let v = monic.eval_c64(*r);
        let scale = monic
            .coeffs()
            .iter()
            .enumerate()
            .map(|(k, a)| rat_to_f64(a).abs() * r.norm().powi(k as i32))
            .sum::<f64>()
            .max(1.0);
        if !(v.norm() <= tol * scale) {
            return Err(FqwError::NonConvergence(format!(
                "root {r} of {p} has residual {}",
                v.norm()
            )));
        }
    }
    let n_real = real_root_count(&monic);
    roots.sort_by(|a, b| a.im.abs().partial_cmp(&b.im.abs()).unwrap());
    for (k, r) in roots.iter_mut().enumerate() {
        if k < n_real {
            r.im = 0.0;
        }
    }
    Ok(roots)
}

fn polish(p: &Poly, dp: &Poly, mut z: Complex64) -> Complex64 {
    for _ in 0..60 {
        let d = dp.eval_c64(z);
        if d.norm() == 0.0 {
            break;
        }
        let step = p.eval_c64(z) / d;
        z -= step;
        if step.norm() <= 1e-16 * z.norm().max(1.0) {
            break;
        }
    }
    z
}

/// Distinct real roots, counted exactly.
pub fn real_root_count(p: &Poly) -> usize {
    let Some(d) = p.degree() else { return 0 };
    if d == 0 {
        return 0;
    }
    // Cauchy bound 1 + max |a_k / a_n|.
    let lead = p.lead();
    let mut bound = BigRational::zero();
    for a in p.coeffs() {
        let q = (a / &lead).abs();
        if q > bound {
            bound = q;
        }
    }
    let bound = bound + BigRational::from_integer(BigInt::from(1));
    p.count_roots_in(&-bound.clone(), &bound)
}

/// All roots with multiplicities, using the exact squarefree decomposition.
pub fn roots_with_multiplicity(p: &Poly, tol: f64) -> Result<Vec<(Complex64, usize)>> {
    let mut out = Vec::new();
    for (f, k) in p.squarefree_decomposition() {
        for r in roots_squarefree(&f, tol)? {
            out.push((r, k));
        }
    }
    out.sort_by(|a, b| {
        (a.0.re, a.0.im)
            .partial_cmp(&(b.0.re, b.0.im))
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quartic_with_known_roots() {
        // (x^2 - 7x + 1)(x^2 - 3x + 1)
        let p = &Poly::from_ints(&[1, -7, 1]) * &Poly::from_ints(&[1, -3, 1]);
        let r = roots_with_multiplicity(&p, 1e-12).unwrap();
        let expect = [
            (7.0 - 45f64.sqrt()) / 2.0,
            (3.0 - 5f64.sqrt()) / 2.0,
            (3.0 + 5f64.sqrt()) / 2.0,
            (7.0 + 45f64.sqrt()) / 2.0,
        ];
        for ((z, m), e) in r.iter().zip(expect) {
            assert_eq!(*m, 1);
            assert_eq!(z.im, 0.0);
            assert!((z.re - e).abs() < 1e-13);
        }
    }

    #[test]
    fn complex_pair_and_double_root() {
        // (x^2 + 1)(x - 1)^2
        let p = &Poly::from_ints(&[1, 0, 1]) * &Poly::from_ints(&[1, -2, 1]);
        let r = roots_with_multiplicity(&p, 1e-12).unwrap();
        assert_eq!(r.len(), 3);
        let double: Vec<_> = r.iter().filter(|(_, m)| *m == 2).collect();
        assert_eq!(double.len(), 1);
        assert!((double[0].0 - Complex64::new(1.0, 0.0)).norm() < 1e-14);
        assert_eq!(real_root_count(&Poly::from_ints(&[1, 0, 1])), 0);
    }
}
