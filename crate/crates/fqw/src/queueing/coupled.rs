use super::{CoupledParams, QueueModel};
use crate::error::{FqwError, Result};
use crate::poly::rat_to_f64;
use crate::quad::{integrate, QuadratureSpec};
use num_complex::Complex64;
use num_traits::{One, Zero};
use std::f64::consts::PI;

struct Rates {
    l1: f64,
    l2: f64,
    m1: f64,
    m2: f64,
    m1s: f64,
    m2s: f64,
    xi: f64,
    f00: f64,
}

impl Rates {
    fn of(p: &CoupledParams) -> Self {
        Rates {
            l1: rat_to_f64(&p.lambda1),
            l2: rat_to_f64(&p.lambda2),
            m1: rat_to_f64(&p.mu1),
            m2: rat_to_f64(&p.mu2),
            m1s: rat_to_f64(&p.mu1_star),
            m2s: rat_to_f64(&p.mu2_star),
            xi: rat_to_f64(&p.xi()),
            f00: p.empty_probability(),
        }
    }

    fn beta(&self, theta: f64) -> f64 {
        self.l2 + self.m2 - 2.0 * (self.l2 * self.m2).sqrt() * theta.cos()
    }

    fn k(&self, theta: f64) -> f64 {
        let b = self.l1 + self.m1 + self.beta(theta);
        2.0 * self.m1 / (b + (b * b - 4.0 * self.l1 * self.m1).sqrt())
    }

    fn radius(&self) -> f64 {
        (self.m2 / self.l2).sqrt()
    }
}

/// Small root of λ₁K² − (λ₁+μ₁+β(θ))K + μ₁ = 0, the x-branch of the
/// kernel on the circle |y| = √(μ₂/λ₂).
pub fn k_theta(p: &CoupledParams, theta: f64) -> f64 {
    Rates::of(p).k(theta)
}

pub fn k_theta_residual(p: &CoupledParams, theta: f64) -> f64 {
    let r = Rates::of(p);
    let k = r.k(theta);
    r.l1 * k * k - (r.l1 + r.m1 + r.beta(theta)) * k + r.m1
}

fn check(z: f64, p: &CoupledParams) -> Result<()> {
    if !(0.0..1.0).contains(&z) {
        return Err(FqwError::Domain(format!("z = {z} outside [0, 1)")));
    }
    if !p.is_processor_sharing() {
        return Err(FqwError::Domain("processor-sharing constraint pq = mu1 mu2 violated".into()));
    }
    let xi = p.xi();
    if xi.is_zero() || xi.is_one() || p.lambda2.is_zero() {
        return Err(FqwError::Domain("need 0 < xi < 1 and lambda2 > 0".into()));
    }
    if !QueueModel::Coupled(p.clone()).is_ergodic()? {
        return Err(FqwError::NotErgodic("coupled processors parameters are not ergodic".into()));
    }
    Ok(())
}

fn poisson_kernel_integral<F: Fn(f64) -> f64>(z: f64, v: F, q: &QuadratureSpec) -> Result<f64> {
    integrate(
        |t| z * t.sin() * v(t) / (z * z - 2.0 * z * t.cos() + 1.0),
        0.0,
        PI,
        q,
    )
}

/// F(0, √(μ₂/λ₂) z) − F(0,0) for head-of-line processor sharing.
pub fn coupled_f0(z: f64, p: &CoupledParams, q: &QuadratureSpec) -> Result<f64> {
    check(z, p)?;
    let r = Rates::of(p);
    let rho1 = r.l1 / r.m1s;
    let scale = 2.0 * r.f00 * r.radius();
    let v = |t: f64| {
        let k = r.k(t);
        let den = r.xi * (rho1 * (r.m2s - r.m1s) * k * k + (r.m1s - r.m2s + r.l1 + r.l2) * k - r.m1s);
        scale * (-r.l2 * t.sin() * k) / den
    };
    Ok(poisson_kernel_integral(z, v, q)? / PI)
}

/// Same quantity from the boundary coefficients: on the circle the jump
/// of F(0, ·) is F(0,0)·((1−ξ)/ξ)·Im(−(pX + qY)/(pX + μ₂Y)),
/// X = 1 − 1/x, Y = 1 − 1/y.
pub fn coupled_f0_oracle(z: f64, p: &CoupledParams, q: &QuadratureSpec) -> Result<f64> {
    check(z, p)?;
    let r = Rates::of(p);
    let (pp, qq) = (r.m1 - r.m1s, r.m2 - r.m2s);
    let h = |t: f64| {
        let x = r.k(t);
        let y = Complex64::from_polar(r.radius(), t);
        let big_x = Complex64::new(1.0 - 1.0 / x, 0.0);
        let big_y = Complex64::one() - y.inv();
        let w = -(big_x * pp + big_y * qq) / (big_x * pp + big_y * r.m2);
        (1.0 - r.xi) / r.xi * r.f00 * w.im
    };
    Ok(2.0 * poisson_kernel_integral(z, h, q)? / PI)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::rat;

    fn sym() -> CoupledParams {
        CoupledParams::processor_sharing(rat(1, 2), rat(1, 2), rat(2, 1), rat(2, 1), rat(1, 2)).unwrap()
    }

    #[test]
    fn k_residual_small() {
        let p = sym();
        for i in 0..=64 {
            let t = PI * i as f64 / 64.0;
            assert!(k_theta_residual(&p, t).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_at_origin_and_matches_oracle() {
        let p = sym();
        let q = QuadratureSpec::default();
        assert_eq!(coupled_f0(0.0, &p, &q).unwrap(), 0.0);
        for (z, want) in [(0.3, 0.0602265), (0.5, 0.1106332), (0.7, 0.1730561)] {
            let a = coupled_f0(z, &p, &q).unwrap();
            let b = coupled_f0_oracle(z, &p, &q).unwrap();
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
            assert!((a - want).abs() < 1e-6, "{a} vs {want}");
        }
    }

    #[test]
    fn rejects_non_processor_sharing() {
        let mut p = sym();
        p.mu1 = rat(3, 2);
        assert!(coupled_f0(0.5, &p, &QuadratureSpec::default()).is_err());
    }
}
