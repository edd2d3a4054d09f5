//! Mean collision resolution interval of the binary splitting protocol with
//! Poisson(λ) arrivals and coin bias p.

mod chi;
mod osc;
mod sim;
mod words;

pub use chi::{chi_roots, ChiRoots};
pub use osc::{slope_and_fluctuation, FluctuationReport, SpectralLine};
pub use sim::{simulate_cri, CriEstimate, SLOT_CAP};
pub use words::{AffineWord, Traversal, WordSums};

use crate::error::{FqwError, Result};
use serde::Serialize;
use words::{binomial, merge, word_sums, PhiTable, CLOSURE_TERMS, LARGE_N_ORDER};

pub const DEFAULT_DEPTH: usize = 10;
pub const DEFAULT_ORDER: usize = 40;
const MOMENT_TERMS: usize = 60;

#[derive(Clone, Debug, Serialize)]
pub struct CraConstants {
    pub lambda: f64,
    pub p: f64,
    pub q: f64,
    #[serde(rename = "K")]
    pub k: f64,
    /// g_m = (−1)^m Σ_σ e^{−σ(0)} ((p;q)^σ)^m.
    pub g: Vec<f64>,
    /// k_m = (−1)^m Σ_σ σ(0) e^{−σ(0)} ((p;q)^σ)^m.
    pub k_seq: Vec<f64>,
    #[serde(rename = "D")]
    pub d: f64,
    pub truncation: (usize, usize),
    pub traversal: Traversal,
    /// Geometric bound on the omitted words; zero when leaves are closed.
    pub tail_bound: f64,
    #[serde(skip)]
    phi: PhiTable,
}

/// K = E[e^{−U}] / (E[e^{−U}] − E[U e^{−U}]) where U is the stationary
/// offset σ(0) under the scale-weighted word measure.
fn k_constant(lambda: f64, p: f64) -> f64 {
    let q = 1.0 - p;
    let pw = |e: usize| p.powi(e as i32) + q.powi(e as i32);
    let mut m = vec![1.0];
    for j in 1..=MOMENT_TERMS {
        let s: f64 = (0..j)
            .map(|k| binomial(j as u64, k as u64) * lambda.powi((j - k) as i32) * pw(k + 1) * m[k])
            .sum();
        m.push(s / (1.0 - pw(j + 1)));
    }
    let (mut e0, mut e1, mut f) = (0.0, 0.0, 1.0);
    for j in 0..MOMENT_TERMS {
        e0 += f * m[j];
        e1 += f * m[j + 1];
        f *= -1.0 / (j + 1) as f64;
    }
    e0 / (e0 - e1)
}

fn check_args(lambda: f64, p: f64, order: usize) -> Result<()> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(FqwError::Domain(format!("lambda = {lambda} must be nonnegative")));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(FqwError::Domain(format!("p = {p} outside (0, 1)")));
    }
    if !(2..=60).contains(&order) {
        return Err(FqwError::Domain(format!("series order {order} outside 2..=60")));
    }
    Ok(())
}

pub fn cra_constants(lambda: f64, p: f64, depth: usize, order: usize) -> Result<CraConstants> {
    cra_constants_with(lambda, p, depth, order, Traversal::BreadthFirst)
}

pub fn cra_constants_with(lambda: f64, p: f64, depth: usize, order: usize, how: Traversal) -> Result<CraConstants> {
    check_args(lambda, p, order)?;
    let q = 1.0 - p;
    let k = k_constant(lambda, p);
    let phi = PhiTable::new(lambda, p, order.max(LARGE_N_ORDER), CLOSURE_TERMS + 1);
    let WordSums { g_raw, h_raw } = word_sums(lambda, p, depth, order, how, &phi);
    let sign = |m: usize| if m.is_multiple_of(2) { 1.0 } else { -1.0 };
    let g: Vec<f64> = g_raw.iter().enumerate().map(|(m, v)| sign(m) * v).collect();
    let k_seq: Vec<f64> = h_raw.iter().enumerate().map(|(m, v)| sign(m) * v).collect();
    let mut d = 0.0;
    let mut pow = lambda * lambda / 2.0;
    for n in 2..=order {
        d += ((1.0 - k * n as f64) * g[n] + k * k_seq[n]) * pow;
        pow *= lambda / (n + 1) as f64;
    }
    let tail_bound = if how == Traversal::TruncateOnly {
        let r = p * p + q * q;
        r.powi(depth as i32 + 1) / (1.0 - r) * (-lambda).exp() * order as f64
    } else {
        0.0
    };
    Ok(CraConstants {
        lambda,
        p,
        q,
        k,
        g,
        k_seq,
        d,
        truncation: (depth, order),
        traversal: how,
        tail_bound,
        phi,
    })
}

impl CraConstants {
    pub fn stability_margin(&self) -> f64 {
        1.0 + 2.0 * self.d
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PsiSeries {
    pub coefficients: Vec<f64>,
}

impl PsiSeries {
    pub fn eval(&self, z: f64) -> f64 {
        self.coefficients.iter().rev().fold(0.0, |acc, c| acc * z + c)
    }
}

/// ψ(z) = e^{−z} α(z) as a power series: ψ₀ = 1, ψ₁ = 0 and
/// ψ_m = −2[(1 − mK)g_m + K k_m] / (m! (1 + 2D)).
pub fn psi_series(c: &CraConstants) -> Result<PsiSeries> {
    let denom = c.stability_margin();
    if denom <= 0.0 {
        return Err(FqwError::Domain(format!(
            "1 + 2D = {denom} <= 0: lambda = {} is at or above lambda_max",
            c.lambda
        )));
    }
    let order = c.truncation.1;
    let mut coefficients = vec![1.0, 0.0];
    let mut fact = 1.0;
    for m in 2..=order {
        fact *= m as f64;
        coefficients.push(-2.0 * ((1.0 - m as f64 * c.k) * c.g[m] + c.k * c.k_seq[m]) / (fact * denom));
    }
    Ok(PsiSeries { coefficients })
}

/// ψ(z) − ψ(λ+pz) − ψ(λ+qz) − [1 − 2ψ(λ)e^{−z}(1 + Kz)].
pub fn fe_residual(c: &CraConstants, psi: &PsiSeries, z: f64) -> f64 {
    let lhs = psi.eval(z) - psi.eval(c.lambda + c.p * z) - psi.eval(c.lambda + c.q * z);
    lhs - (1.0 - 2.0 * psi.eval(c.lambda) * (-z).exp() * (1.0 + c.k * z))
}

/// α_n = Σ_{m≤n} ψ_m n!/(n−m)!. Cancellation grows with n; use
/// [`mean_cri_words`] beyond a few dozen.
pub fn mean_cri(n: usize, c: &CraConstants) -> Result<f64> {
    if n > c.truncation.1 {
        return Err(FqwError::Domain(format!("n = {n} exceeds series order {}", c.truncation.1)));
    }
    let psi = psi_series(c)?;
    let mut falling = 1.0;
    let mut total = 0.0;
    for m in 0..=n {
        total += psi.coefficients[m] * falling;
        falling *= (n - m) as f64;
    }
    Ok(total)
}

/// α_n = 1 − 2/(1+2D) Σ_σ e^{−o}[(1 + Ko)A_n(s) − K B_n(s)] with
/// A_n(s) = (1−s)^n − 1 + ns and B_n(s) = ns − ns(1−s)^{n−1}. Nodes with
/// ns < 1/20 are closed through the Φ table.
pub fn mean_cri_words(n: usize, c: &CraConstants) -> Result<f64> {
    let denom = c.stability_margin();
    if denom <= 0.0 {
        return Err(FqwError::Domain(format!("1 + 2D = {denom} <= 0")));
    }
    if n < 2 {
        return Ok(1.0);
    }
    let (lambda, p, q, k) = (c.lambda, c.p, c.q, c.k);
    let nf = n as f64;
    let m_top = LARGE_N_ORDER.min(n).min(c.phi.m_max());
    let mut total = 0.0;
    let mut level: Vec<(f64, f64, f64)> = vec![(1.0, 0.0, 1.0)];
    while !level.is_empty() {
        let mut next = Vec::new();
        for &(s, o, mult) in &level {
            let e = mult * (-o).exp();
            if nf * s < 0.05 {
                let mut bin = -s * nf;
                for m in 2..=m_top {
                    bin *= -s * (nf - (m - 1) as f64) / m as f64;
                    let (mut acc, mut cj) = (0.0, 1.0);
                    for j in 0..CLOSURE_TERMS {
                        acc += cj * ((1.0 + k * o - k * m as f64) * c.phi.get(m, j) + k * s * c.phi.get(m, j + 1));
                        cj *= -s / (j + 1) as f64;
                    }
                    total += e * bin * acc;
                }
            } else {
                let l1 = (-s).ln_1p();
                let a = (nf * l1).exp_m1() + nf * s;
                let b = nf * s - nf * s * ((nf - 1.0) * l1).exp();
                total += e * ((1.0 + k * o) * a - k * b);
                let o2 = o + s * lambda;
                next.push((s * p, o2, mult));
                next.push((s * q, o2, mult));
            }
        }
        level = merge(next);
    }
    Ok(1.0 - 2.0 / denom * total)
}

#[derive(Clone, Debug, Serialize)]
pub struct LambdaMaxReport {
    pub lambda_max: f64,
    pub bracket: (f64, f64),
    pub truncation: (usize, usize),
    /// Root shift after raising depth and order.
    pub refinement_shift: f64,
}

fn margin(lambda: f64, p: f64, depth: usize, order: usize) -> Result<f64> {
    Ok(cra_constants(lambda, p, depth, order)?.stability_margin())
}

fn bisect_root(p: f64, mut a: f64, mut b: f64, tol: f64, depth: usize, order: usize) -> Result<f64> {
    let mut fa = margin(a, p, depth, order)?;
    while b - a > tol {
        let mid = 0.5 * (a + b);
        let fm = margin(mid, p, depth, order)?;
        if (fm > 0.0) == (fa > 0.0) {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    Ok(0.5 * (a + b))
}

const SCAN_STEP: f64 = 0.005;

/// First positive root of λ ↦ 1 + 2D(λ).
pub fn lambda_max(p: f64, tol: f64) -> Result<f64> {
    Ok(lambda_max_report(p, tol)?.lambda_max)
}

pub fn lambda_max_report(p: f64, tol: f64) -> Result<LambdaMaxReport> {
    check_args(0.0, p, DEFAULT_ORDER)?;
    let (depth, order) = (DEFAULT_DEPTH, DEFAULT_ORDER);
    let mut a = SCAN_STEP;
    let mut fa = margin(a, p, depth, order)?;
    while a < 1.0 {
        let b = a + SCAN_STEP;
        let fb = margin(b, p, depth, order)?;
        if (fa > 0.0) != (fb > 0.0) {
            let root = bisect_root(p, a, b, tol, depth, order)?;
            // A pole of K also flips the sign; a root leaves a small margin.
            if margin(root, p, depth, order)?.abs() < 1e-3 {
                let (d2, o2) = (depth + 4, 60);
                let lo = (root - 4.0 * tol).max(tol);
                let refined = bisect_root(p, lo, root + 4.0 * tol, tol / 4.0, d2, o2)?;
                let shift = (refined - root).abs();
                if shift >= tol {
                    return Err(FqwError::NonConvergence(format!(
                        "lambda_max moved by {shift} after raising truncation"
                    )));
                }
                return Ok(LambdaMaxReport {
                    lambda_max: refined,
                    bracket: (a, b),
                    truncation: (d2, o2),
                    refinement_shift: shift,
                });
            }
        }
        a = b;
        fa = fb;
    }
    Err(FqwError::NonConvergence(format!("no sign change of 1 + 2D below lambda = 1 for p = {p}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    const TRUTH: [f64; 9] = [1.0, 1.0, 9.80578, 15.88847, 22.31037, 28.8061, 35.3037, 41.79192, 48.27416];

    #[test]
    fn k_at_half_is_closed_form() {
        for lambda in [0.0, 0.1, 0.2, 0.3] {
            assert!((k_constant(lambda, 0.5) - 1.0 / (1.0 - 2.0 * lambda)).abs() < 1e-12);
        }
    }

    #[test]
    fn means_match_linear_system_values() {
        let c = cra_constants(0.2, 0.5, DEFAULT_DEPTH, DEFAULT_ORDER).unwrap();
        for (n, want) in TRUTH.iter().enumerate() {
            let a = mean_cri(n, &c).unwrap();
            let b = mean_cri_words(n, &c).unwrap();
            assert!((a - want).abs() < 1e-4, "n={n}: {a} vs {want}");
            assert!((a - b).abs() < 1e-9, "n={n}: {a} vs {b}");
        }
    }

    #[test]
    fn zero_arrivals_two_users() {
        let c = cra_constants(0.0, 0.5, DEFAULT_DEPTH, DEFAULT_ORDER).unwrap();
        assert!((mean_cri(2, &c).unwrap() - 5.0).abs() < 1e-12);
    }

    #[test]
    fn psi_at_lambda_inverts_margin() {
        for (lambda, p) in [(0.1, 0.5), (0.2, 0.7), (0.3, 0.5)] {
            let c = cra_constants(lambda, p, DEFAULT_DEPTH, DEFAULT_ORDER).unwrap();
            let psi = psi_series(&c).unwrap();
            assert!((psi.eval(lambda) * c.stability_margin() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn functional_equation_residual() {
        for (lambda, p) in [(0.2, 0.5), (0.2, 0.7)] {
            let c = cra_constants(lambda, p, DEFAULT_DEPTH, DEFAULT_ORDER).unwrap();
            let psi = psi_series(&c).unwrap();
            for z in [0.1, 0.5, 1.0] {
                let r = fe_residual(&c, &psi, z);
                assert!(r.abs() < 1e-8, "({lambda},{p}) z={z}: {r}");
            }
        }
    }

    #[test]
    fn traversals_agree() {
        let a = cra_constants_with(0.2, 0.5, 12, 40, Traversal::BreadthFirst).unwrap();
        let b = cra_constants_with(0.2, 0.5, 12, 40, Traversal::DepthFirst).unwrap();
        assert!((a.d - b.d).abs() < 1e-12);
        let t1 = cra_constants_with(0.2, 0.5, 8, 40, Traversal::TruncateOnly).unwrap();
        let t2 = cra_constants_with(0.2, 0.5, 12, 40, Traversal::TruncateOnly).unwrap();
        assert!((t1.d - t2.d).abs() < t1.tail_bound);
    }

    #[test]
    fn threshold_at_half() {
        let r = lambda_max_report(0.5, 1e-7).unwrap();
        assert!((r.lambda_max - 0.360177).abs() < 1e-5, "{r:?}");
        assert!(margin(0.1, 0.5, 10, 40).unwrap() > 0.0);
        assert!(margin(0.5 - 1e-3, 0.5, 10, 40).unwrap() < 0.0);
    }
}
