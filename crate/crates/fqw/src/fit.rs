//! Small dense least-squares fits.

use nalgebra::{DMatrix, DVector};

/// Least-squares coefficients for `rows · c ≈ y`, plus the RMS residual.
pub fn lstsq(rows: &[Vec<f64>], y: &[f64]) -> (Vec<f64>, f64) {
    let n = rows.len();
    let k = rows.first().map_or(0, |r| r.len());
    let a = DMatrix::from_fn(n, k, |i, j| rows[i][j]);
    let b = DVector::from_column_slice(y);
    let svd = a.clone().svd(true, true);
    let c = svd.solve(&b, 1e-14).expect("svd with u and v");
    let r = &a * &c - &b;
    let rms = (r.norm_squared() / n.max(1) as f64).sqrt();
    (c.iter().copied().collect(), rms)
}

/// Residuals of `y` after the least-squares fit on `rows`.
pub fn detrend(rows: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
    let (c, _) = lstsq(rows, y);
    rows.iter()
        .zip(y)
        .map(|(r, yi)| yi - r.iter().zip(&c).map(|(a, b)| a * b).sum::<f64>())
        .collect()
}

pub fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = s.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_exact_line() {
        let rows: Vec<Vec<f64>> = (0..10).map(|i| vec![1.0, i as f64]).collect();
        let y: Vec<f64> = (0..10).map(|i| 3.0 - 0.5 * i as f64).collect();
        let (c, rms) = lstsq(&rows, &y);
        assert!((c[0] - 3.0).abs() < 1e-12 && (c[1] + 0.5).abs() < 1e-12);
        assert!(rms < 1e-12);
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
    }
}
