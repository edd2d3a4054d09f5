use super::{chi_roots, mean_cri_words, CraConstants};
use crate::error::{FqwError, Result};
use crate::fit::{detrend, lstsq, median};
use crate::par::{self, Exec};
use serde::Serialize;
use std::f64::consts::PI;

pub const GRID_LOW: f64 = 0.2;
pub const GRID_HIGH: f64 = 8.0;
pub const GRID_POINTS: usize = 400;

#[derive(Clone, Debug, Serialize)]
pub struct SpectralLine {
    pub k: usize,
    /// Cycles per unit of ln n.
    pub frequency: f64,
    pub power: f64,
    pub ratio_to_median: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct FluctuationReport {
    pub slope: f64,
    pub slope_first_half: f64,
    pub slope_second_half: f64,
    /// Limit of α_n/n from the detrending fit.
    pub asymptotic_slope: f64,
    pub background_median: f64,
    pub lines: Vec<SpectralLine>,
}

fn linear_slope(ns: &[f64], ys: &[f64]) -> f64 {
    let rows: Vec<Vec<f64>> = ns.iter().map(|&n| vec![1.0, n]).collect();
    lstsq(&rows, ys).0[1]
}

/// Sinusoid power of `r` against u at frequency f (least-squares amplitude²).
fn power(u: &[f64], r: &[f64], f: f64) -> f64 {
    let rows: Vec<Vec<f64>> = u
        .iter()
        .map(|&x| vec![(2.0 * PI * f * x).cos(), (2.0 * PI * f * x).sin()])
        .collect();
    let (c, _) = lstsq(&rows, r);
    c[0] * c[0] + c[1] * c[1]
}

/// Linear slope of α_n over `n_range` and the spectrum of the detrended
/// α_n/n in u = ln n, reported at the frequencies Im χ_k / 2π.
pub fn slope_and_fluctuation(n_range: (usize, usize), c: &CraConstants, k_max: usize, exec: Exec) -> Result<FluctuationReport> {
    let (lo, hi) = n_range;
    if hi < lo + 40 || lo < 2 {
        return Err(FqwError::InsufficientData(format!("range {lo}..={hi} too short")));
    }
    let ns: Vec<usize> = (lo..=hi).collect();
    let alpha = par::map(exec, &ns, |&n| mean_cri_words(n, c));
    let alpha: Vec<f64> = alpha.into_iter().collect::<Result<_>>()?;
    let nf: Vec<f64> = ns.iter().map(|&n| n as f64).collect();
    let half = nf.len() / 2;
    let slope = linear_slope(&nf, &alpha);
    let slope_first_half = linear_slope(&nf[..half], &alpha[..half]);
    let slope_second_half = linear_slope(&nf[half..], &alpha[half..]);

    let y: Vec<f64> = alpha.iter().zip(&nf).map(|(a, n)| a / n).collect();
    let rows: Vec<Vec<f64>> = nf.iter().map(|&n| vec![1.0, 1.0 / n, 1.0 / (n * n)]).collect();
    let asymptotic_slope = lstsq(&rows, &y).0[0];
    let r = detrend(&rows, &y);
    let u: Vec<f64> = nf.iter().map(|n| n.ln()).collect();
    let grid: Vec<f64> = (0..GRID_POINTS)
        .map(|i| GRID_LOW + (GRID_HIGH - GRID_LOW) * i as f64 / (GRID_POINTS - 1) as f64)
        .collect();
    let spectrum = par::map(exec, &grid, |&f| power(&u, &r, f));
    let background_median = median(&spectrum);
    let chi = chi_roots(c.p, 0.5, k_max)?;
    let lines = chi
        .roots
        .iter()
        .map(|&(k, root)| {
            let frequency = root.im / (2.0 * PI);
            let pw = power(&u, &r, frequency);
            SpectralLine {
                k,
                frequency,
                power: pw,
                ratio_to_median: pw / background_median,
            }
        })
        .collect();
    Ok(FluctuationReport {
        slope,
        slope_first_half,
        slope_second_half,
        asymptotic_slope,
        background_median,
        lines,
    })
}
