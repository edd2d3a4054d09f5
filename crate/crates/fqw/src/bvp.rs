//! Explicit integrals for the simple walk and the dominant singularity z_g
//! of a counting model, located where two real y-plane branch points merge.

use crate::error::{FqwError, Result};
use crate::kernel::{build_kernel_oriented, discriminant, genus, GenusReport, Orientation};
use crate::poly::{f64_to_rat, Poly};
use crate::quad::{integrate, QuadratureSpec};
use crate::roots::roots_with_multiplicity;
use crate::stepset::{Mode, WeightedStepSet};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::Serialize;
use std::f64::consts::PI;

/// (1 − 2uz − √((1−2uz)² − 4z²)) / z², written without cancellation.
fn kernel_integrand(u: f64, z: f64) -> f64 {
    let w = 1.0 - 2.0 * u * z;
    let disc = w * w - 4.0 * z * z;
    assert!(disc >= 0.0, "integrand not real at u = {u}, z = {z}");
    4.0 / (w + disc.sqrt())
}

fn check_z(z: f64) -> Result<()> {
    if !(z > 0.0 && z < 0.25) {
        return Err(FqwError::Domain(format!("z = {z} outside (0, 1/4)")));
    }
    Ok(())
}

/// F(0,0,z) for the simple walk: (1/π) ∫ g(u) √(1−u²) du over [−1, 1].
/// Both halves use u = ±(1 − t²) so the endpoint square roots become smooth.
pub fn simple_walk_f00(z: f64, q: &QuadratureSpec) -> Result<f64> {
    check_z(z)?;
    let half = QuadratureSpec {
        abs_tol: q.abs_tol / 2.0,
        ..*q
    };
    let right = integrate(|t| kernel_integrand(1.0 - t * t, z) * 2.0 * t * t * (2.0 - t * t).sqrt(), 0.0, 1.0, &half)?;
    let left = integrate(|t| kernel_integrand(t * t - 1.0, z) * 2.0 * t * t * (2.0 - t * t).sqrt(), 0.0, 1.0, &half)?;
    Ok((left + right) / PI)
}

/// F(1,0,z) for the simple walk: (1/2π) ∫ g(u) √((1+u)/(1−u)) du.
pub fn simple_walk_f10(z: f64, q: &QuadratureSpec) -> Result<f64> {
    check_z(z)?;
    let half = QuadratureSpec {
        abs_tol: q.abs_tol / 2.0,
        ..*q
    };
    let right = integrate(|t| kernel_integrand(1.0 - t * t, z) * 2.0 * (2.0 - t * t).sqrt(), 0.0, 1.0, &half)?;
    let left = integrate(|t| kernel_integrand(t * t - 1.0, z) * 2.0 * t * t / (2.0 - t * t).sqrt(), 0.0, 1.0, &half)?;
    Ok((left + right) / (2.0 * PI))
}

#[derive(Clone, Debug, Serialize)]
pub struct SingularityReport {
    pub z_g: f64,
    pub bracket: (f64, f64),
    /// The two real branch points (y₂, y₃) just below z_g.
    pub merged_pair: (f64, f64),
    /// Fewer than two positive real y-plane branch points below z_g.
    pub flagged: bool,
}

fn y_discriminant(ws: &WeightedStepSet, z: &BigRational) -> Result<Poly> {
    discriminant(&build_kernel_oriented(ws, Some(z.clone()), Orientation::XQuadratic)?)
}

fn positive_count(ws: &WeightedStepSet, z: f64) -> Result<usize> {
    Ok(y_discriminant(ws, &f64_to_rat(z))?.count_positive_roots())
}

pub const ZG_TOL: f64 = 1e-13;

/// Smallest z at which two positive real branch points of the y-plane
/// discriminant merge, by bisection on the exact count of distinct positive
/// roots.
pub fn compute_zg(ws: &WeightedStepSet) -> Result<SingularityReport> {
    compute_zg_tol(ws, ZG_TOL)
}

pub fn compute_zg_tol(ws: &WeightedStepSet, tol: f64) -> Result<SingularityReport> {
    if ws.mode() != Mode::Counting {
        return Err(FqwError::Domain("z_g is defined for counting models".into()));
    }
    let mut lo = 1e-6;
    // z_g = 1/min S on the positive quadrant, so it is at least 1/|S|.
    let mut hi = 1.0 / ws.len() as f64;
    let base = positive_count(ws, lo)?;
    let mut grown = 0;
    while positive_count(ws, hi)? == base {
        grown += 1;
        if grown > 40 {
            return Err(FqwError::NonConvergence(format!(
                "no change in the positive branch-point count on [{lo}, {hi}]"
            )));
        }
        lo = lo.max(hi);
        hi *= 1.25;
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if positive_count(ws, mid)? == base {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let d = y_discriminant(ws, &f64_to_rat(lo))?;
    let pos: Vec<f64> = roots_with_multiplicity(&d, 1e-6)?
        .into_iter()
        .filter(|(r, _)| r.im == 0.0 && r.re > 0.0)
        .map(|(r, _)| r.re)
        .collect();
    let pair = pos
        .windows(2)
        .min_by(|a, b| (a[1] - a[0]).partial_cmp(&(b[1] - b[0])).unwrap())
        .map(|w| (w[0], w[1]));
    Ok(SingularityReport {
        z_g: 0.5 * (lo + hi),
        bracket: (lo, hi),
        merged_pair: pair.unwrap_or((f64::NAN, f64::NAN)),
        flagged: pair.is_none(),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct GenusSwitch {
    pub below: GenusReport,
    pub at: GenusReport,
    /// "exact" when z_g is a small-denominator rational at which the genus
    /// was computed exactly, "discriminant-sign-change" otherwise.
    pub certified_by: String,
    pub z_exact: Option<String>,
}

/// Convergents of the continued fraction of `v` with denominator ≤ `max_den`.
fn convergents(v: f64, max_den: i64) -> Vec<BigRational> {
    let mut out = Vec::new();
    let (mut h0, mut h1) = (0i128, 1i128);
    let (mut k0, mut k1) = (1i128, 0i128);
    let mut x = v;
    for _ in 0..40 {
        let a = x.floor() as i128;
        let (h2, k2) = (a * h1 + h0, a * k1 + k0);
        if k2 > max_den as i128 {
            break;
        }
        out.push(BigRational::new(BigInt::from(h2), BigInt::from(k2)));
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        let frac = x - a as f64;
        if frac.abs() < 1e-15 {
            break;
        }
        x = 1.0 / frac;
    }
    out
}

/// Genus of the counting kernel just below z_g and at z_g.
pub fn genus_switch(ws: &WeightedStepSet, zg: f64, below_offset: f64) -> Result<GenusSwitch> {
    let kz = |z: BigRational| build_kernel_oriented(ws, Some(z), Orientation::YQuadratic);
    let below = genus(&kz(f64_to_rat(zg - below_offset))?)?;
    for r in convergents(zg, 1_000_000) {
        let rf = crate::poly::rat_to_f64(&r);
        if (rf - zg).abs() > 1e-9 {
            continue;
        }
        match genus(&kz(r.clone())?) {
            Ok(g) if g.genus == 0 => {
                return Ok(GenusSwitch {
                    below,
                    at: g,
                    certified_by: "exact".into(),
                    z_exact: Some(r.to_string()),
                });
            }
            // Two nodes at once: the curve splits instead of dropping to genus 0.
            Err(FqwError::Reducible(msg)) => {
                return Err(FqwError::Reducible(format!("kernel curve splits at z = {r}: {msg}")));
            }
            _ => {}
        }
    }
    // Two real branch points merging makes disc_y(D̃) change sign.
    let delta = 1e-7_f64.max(4.0 * ZG_TOL);
    let dv = |z: f64| -> Result<BigRational> { Ok(y_discriminant(ws, &f64_to_rat(z))?.discriminant_value()) };
    let (l, h) = (dv(zg - delta)?, dv(zg + delta)?);
    if !l.is_zero() && !h.is_zero() && l.is_positive() != h.is_positive() {
        return Ok(GenusSwitch {
            below,
            at: GenusReport {
                genus: 0,
                case: Some(5),
            },
            certified_by: "discriminant-sign-change".into(),
            z_exact: None,
        });
    }
    Err(FqwError::NonConvergence(format!("could not certify genus 0 at z = {zg}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enumeration::excursion_series;
    use crate::par::Exec;
    use crate::stepset::parse_stepset;

    #[test]
    fn small_z_limit_is_one() {
        let q = QuadratureSpec::default();
        assert!((simple_walk_f00(1e-9, &q).unwrap() - 1.0).abs() < 1e-8);
        assert!((simple_walk_f10(1e-9, &q).unwrap() - 1.0).abs() < 1e-8);
        assert!(simple_walk_f00(0.25, &q).is_err());
        assert!(simple_walk_f10(-0.1, &q).is_err());
    }

    #[test]
    fn f00_matches_series_at_point_one() {
        let ws = parse_stepset("N,E,S,W").unwrap();
        let s = excursion_series(&ws, 80, Exec::default()).unwrap();
        let v = simple_walk_f00(0.1, &QuadratureSpec::default()).unwrap();
        assert!((v - s.eval_f64(0.1)).abs() < 1e-8);
    }

    #[test]
    fn simple_walk_zg() {
        let ws = parse_stepset("N,E,S,W").unwrap();
        let r = compute_zg(&ws).unwrap();
        assert!((r.z_g - 0.25).abs() < 1e-9);
        assert!((r.merged_pair.0 - 1.0).abs() < 1e-4 && (r.merged_pair.1 - 1.0).abs() < 1e-4);
        let sw = genus_switch(&ws, r.z_g, 1e-4).unwrap();
        assert_eq!(sw.below.genus, 1);
        assert_eq!(sw.at.genus, 0);
        assert_eq!(sw.z_exact.as_deref(), Some("1/4"));
    }

    #[test]
    fn kreweras_zg_by_sign_change() {
        // min of S = xy + 1/x + 1/y is 3 at (1,1): z_g = 1/3
        let ws = parse_stepset("NE,W,S").unwrap();
        let r = compute_zg(&ws).unwrap();
        assert!((r.z_g - 1.0 / 3.0).abs() < 1e-9);
        let sw = genus_switch(&ws, r.z_g, 1e-4).unwrap();
        assert_eq!((sw.below.genus, sw.at.genus), (1, 0));
    }

    #[test]
    fn drifting_model_zg_matches_minimum_of_inventory() {
        // S = x + 1/x + y + 1/y + xy: minimized numerically on (0, ∞)².
        let ws = parse_stepset("N,E,S,W,NE").unwrap();
        let r = compute_zg(&ws).unwrap();
        let s = |x: f64, y: f64| x + 1.0 / x + y + 1.0 / y + x * y;
        let mut best = f64::INFINITY;
        let mut t = 0.3;
        while t < 1.5 {
            best = best.min(s(t, t));
            t += 1e-5;
        }
        assert!((1.0 / r.z_g - best).abs() < 1e-6);
        let sw = genus_switch(&ws, r.z_g, 1e-4).unwrap();
        assert_eq!((sw.below.genus, sw.at.genus), (1, 0));
        assert_eq!(sw.certified_by, "discriminant-sign-change");
    }

    #[test]
    fn convergents_find_quarter() {
        assert!(convergents(0.25000000000001, 1000).contains(&BigRational::new(1.into(), 4.into())));
    }
}
