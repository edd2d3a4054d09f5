use crate::error::{FqwError, Result};
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;

#[derive(Clone, Debug, Serialize)]
pub struct ChiRoots {
    /// (k, root) for seeds that converged inside the strip.
    pub roots: Vec<(usize, Complex64)>,
    /// Seeds that failed to converge or left the strip.
    pub skipped: Vec<usize>,
}

/// Roots of 1 − p^{−χ} − q^{−χ} with −1 ≤ Re χ < −1 + η, excluding χ = −1,
/// by Newton from −1 + 2πik/ln(1/q), k = 1..=k_max, with q = max(p, 1−p).
pub fn chi_roots(p: f64, eta: f64, k_max: usize) -> Result<ChiRoots> {
    if !(p > 0.0 && p < 1.0) || eta <= 0.0 {
        return Err(FqwError::Domain("need 0 < p < 1 and eta > 0".into()));
    }
    let (lp, lq) = {
        let (a, b) = (p.min(1.0 - p), p.max(1.0 - p));
        (a.ln(), b.ln())
    };
    let f = |c: Complex64| Complex64::new(1.0, 0.0) - (-c * lp).exp() - (-c * lq).exp();
    let df = |c: Complex64| (-c * lp).exp() * lp + (-c * lq).exp() * lq;
    let mut out = ChiRoots { roots: Vec::new(), skipped: Vec::new() };
    for k in 1..=k_max {
        let mut c = Complex64::new(-1.0, 2.0 * PI * k as f64 / -lq);
        let mut ok = false;
        for _ in 0..100 {
            let step = f(c) / df(c);
            c -= step;
            if !c.is_finite() {
                break;
            }
            if step.norm() < 1e-14 * c.norm().max(1.0) {
                ok = f(c).norm() < 1e-10;
                break;
            }
        }
        let in_strip = c.re >= -1.0 - 1e-12 && c.re < -1.0 + eta && c.im.abs() > 1e-9;
        if ok && in_strip {
            out.roots.push((k, c));
        } else {
            out.skipped.push(k);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_gives_exact_lattice() {
        let r = chi_roots(0.5, 0.1, 5).unwrap();
        assert_eq!(r.roots.len(), 5);
        for (k, c) in r.roots {
            assert!((c - Complex64::new(-1.0, 2.0 * PI * k as f64 / 2f64.ln())).norm() < 1e-12);
        }
    }

    #[test]
    fn golden_ratio_bias() {
        let q = (5f64.sqrt() - 1.0) / 2.0;
        let r = chi_roots(q * q, 0.1, 4).unwrap();
        assert_eq!(r.roots.len(), 4);
        for (k, c) in r.roots {
            assert!((c - Complex64::new(-1.0, 2.0 * PI * k as f64 / (1.0 / q).ln())).norm() < 1e-10);
        }
    }

    #[test]
    fn minus_one_is_a_root() {
        let p: f64 = 0.3;
        assert!((1.0 - p.powf(1.0) - (1.0 - p).powf(1.0)).abs() < 1e-15);
    }
}
