//! Exact walk counts by dynamic programming, series projections, the
//! coefficient-level check of the counting functional equation, and
//! growth-rate fits.

use crate::error::{FqwError, Result};
use crate::fit::lstsq;
use crate::kernel::{build_kernel, build_kernel_oriented, Orientation};
use crate::par::{self, Exec};
use crate::poly::{rat_to_f64, Poly};
use crate::stepset::{Mode, Step, WeightedStepSet};
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;
use std::collections::HashMap;

/// One k-layer of counts on a `dim × dim` grid, row-major in i.
#[derive(Clone, Debug)]
struct Layer {
    dim: usize,
    cells: Vec<BigUint>,
}

impl Layer {
    fn origin() -> Self {
        Layer {
            dim: 1,
            cells: vec![BigUint::one()],
        }
    }

    fn get(&self, i: i64, j: i64) -> Option<&BigUint> {
        if i < 0 || j < 0 || i as usize >= self.dim || j as usize >= self.dim {
            return None;
        }
        Some(&self.cells[i as usize * self.dim + j as usize])
    }

    /// Next layer restricted to i, j < `dim`.
    fn step(&self, steps: &[Step], dim: usize, exec: Exec) -> Layer {
        let rows = par::map_range(exec, dim, |i| {
            let mut row = Vec::with_capacity(dim);
            for j in 0..dim {
                let mut acc = BigUint::zero();
                for &(a, b) in steps {
                    if let Some(v) = self.get(i as i64 - a as i64, j as i64 - b as i64) {
                        if !v.is_zero() {
                            acc += v;
                        }
                    }
                }
                row.push(acc);
            }
            row
        });
        Layer {
            dim,
            cells: rows.into_iter().flatten().collect(),
        }
    }
}

fn counting_steps(ws: &WeightedStepSet) -> Result<Vec<Step>> {
    if ws.mode() != Mode::Counting {
        return Err(FqwError::Domain("walk counts need a counting-mode step set".into()));
    }
    Ok(ws.steps())
}

/// f(i, j, k) for 0 ≤ i, j ≤ k ≤ N.
#[derive(Clone, Debug)]
pub struct CountTable {
    pub stepset: WeightedStepSet,
    pub n: usize,
    layers: Vec<Layer>,
}

impl CountTable {
    pub fn get(&self, i: usize, j: usize, k: usize) -> BigUint {
        self.layers
            .get(k)
            .and_then(|l| l.get(i as i64, j as i64))
            .cloned()
            .unwrap_or_default()
    }

    /// Nonzero entries as (i, j, k, count).
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, usize, &BigUint)> {
        self.layers.iter().enumerate().flat_map(|(k, l)| {
            l.cells
                .iter()
                .enumerate()
                .filter(|(_, v)| !v.is_zero())
                .map(move |(idx, v)| (idx / l.dim, idx % l.dim, k, v))
        })
    }
}

pub fn count_walks(ws: &WeightedStepSet, n: usize) -> Result<CountTable> {
    count_walks_with(ws, n, Exec::default())
}

pub fn count_walks_with(ws: &WeightedStepSet, n: usize, exec: Exec) -> Result<CountTable> {
    let steps = counting_steps(ws)?;
    let mut layers = vec![Layer::origin()];
    for k in 0..n {
        let next = layers[k].step(&steps, k + 2, exec);
        layers.push(next);
    }
    Ok(CountTable {
        stepset: ws.clone(),
        n,
        layers,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub enum Projection {
    /// f(0, 0, k)
    F00,
    /// Σ_i f(i, 0, k)
    F10Axis,
    /// Σ_{i,j} f(i, j, k)
    F11Total,
    /// Σ_{i,j} f(i, j, k) x0^i y0^j
    Slice(BigRational, BigRational),
}

/// Coefficients indexed by the power of z, length N + 1.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedSeries {
    pub coefficients: Vec<BigRational>,
}

impl TruncatedSeries {
    pub fn from_uints(v: Vec<BigUint>) -> Self {
        TruncatedSeries {
            coefficients: v.into_iter().map(|c| BigRational::from_integer(BigInt::from(c))).collect(),
        }
    }

    pub fn order(&self) -> usize {
        self.coefficients.len().saturating_sub(1)
    }

    /// Σ c_k z^k in floating point.
    pub fn eval_f64(&self, z: f64) -> f64 {
        let mut acc = 0.0;
        let mut zk = 1.0;
        for c in &self.coefficients {
            acc += rat_to_f64(c) * zk;
            zk *= z;
        }
        acc
    }

    /// CSV with header `k,coefficient`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("k,coefficient\n");
        for (k, c) in self.coefficients.iter().enumerate() {
            s.push_str(&format!("{k},{c}\n"));
        }
        s
    }
}

pub fn project_series(t: &CountTable, target: &Projection) -> TruncatedSeries {
    let coefficients = t
        .layers
        .iter()
        .map(|l| match target {
            Projection::F00 => BigRational::from_integer(l.cells[0].clone().into()),
            Projection::F10Axis => {
                let s: BigUint = (0..l.dim).map(|i| &l.cells[i * l.dim]).sum();
                BigRational::from_integer(s.into())
            }
            Projection::F11Total => {
                let s: BigUint = l.cells.iter().sum();
                BigRational::from_integer(s.into())
            }
            Projection::Slice(x0, y0) => {
                let mut acc = BigRational::zero();
                let mut xi = BigRational::one();
                for i in 0..l.dim {
                    let mut yj = BigRational::one();
                    for j in 0..l.dim {
                        let v = &l.cells[i * l.dim + j];
                        if !v.is_zero() {
                            acc += BigRational::from_integer(v.clone().into()) * &xi * &yj;
                        }
                        yj *= y0;
                    }
                    xi *= x0;
                }
                acc
            }
        })
        .collect();
    TruncatedSeries { coefficients }
}

/// F00, F10_axis and F11_total up to order N, keeping two layers at a time.
#[derive(Clone, Debug)]
pub struct SeriesBundle {
    pub f00: TruncatedSeries,
    pub f10_axis: TruncatedSeries,
    pub f11_total: TruncatedSeries,
}

pub fn count_series(ws: &WeightedStepSet, n: usize, exec: Exec) -> Result<SeriesBundle> {
    let steps = counting_steps(ws)?;
    let mut layer = Layer::origin();
    let (mut f00, mut f10, mut f11) = (Vec::new(), Vec::new(), Vec::new());
    for k in 0..=n {
        f00.push(layer.cells[0].clone());
        f10.push((0..layer.dim).map(|i| &layer.cells[i * layer.dim]).sum());
        f11.push(layer.cells.iter().sum());
        if k < n {
            layer = layer.step(&steps, k + 2, exec);
        }
    }
    Ok(SeriesBundle {
        f00: TruncatedSeries::from_uints(f00),
        f10_axis: TruncatedSeries::from_uints(f10),
        f11_total: TruncatedSeries::from_uints(f11),
    })
}

/// Excursion counts f(0, 0, k), k ≤ N, pruning cells that cannot return
/// to the origin within the remaining steps.
pub fn excursion_series(ws: &WeightedStepSet, n: usize, exec: Exec) -> Result<TruncatedSeries> {
    let steps = counting_steps(ws)?;
    let mut layer = Layer::origin();
    let mut out = vec![BigUint::one()];
    for k in 0..n {
        let dim = (k + 1).min(n - k - 1) + 1;
        layer = layer.step(&steps, dim, exec);
        out.push(layer.cells[0].clone());
    }
    Ok(TruncatedSeries::from_uints(out))
}

fn poly_ints(p: &Poly) -> Vec<BigInt> {
    p.coeffs().iter().map(|c| c.to_integer()).collect()
}

/// Largest absolute coefficient of
/// z·K·F − [z c(x) F(x,0) + z c̃(y) F(0,y) − z δ F(0,0) − xy]
/// over all monomials with z-degree ≤ N, where K = a y² + b y + c − xy/z
/// in counting form and F is truncated at order N.
pub fn verify_cgf_equation(ws: &WeightedStepSet, n: usize) -> Result<BigInt> {
    if n < 2 {
        return Err(FqwError::Domain("N must be at least 2".into()));
    }
    cgf_residual(&count_walks_with(ws, n, Exec::Sequential)?)
}

/// The residual of [`verify_cgf_equation`] for a given table.
pub fn cgf_residual(t: &CountTable) -> Result<BigInt> {
    let (ws, n) = (&t.stepset, t.n);
    let ky = build_kernel(ws, None)?;
    let kx = build_kernel_oriented(ws, None, Orientation::XQuadratic)?;
    let rows = [poly_ints(&ky.c), poly_ints(ky.b_core()), poly_ints(&ky.a)];
    let c_tilde = poly_ints(&kx.c);
    let delta = ws.contains((-1, -1));

    let mut diff: HashMap<(usize, usize, usize), BigInt> = HashMap::new();
    let mut add = |key: (usize, usize, usize), v: &BigInt| {
        if key.2 <= n {
            *diff.entry(key).or_insert_with(BigInt::zero) += v;
        }
    };
    for (i, j, k, f) in t.entries() {
        let f = BigInt::from(f.clone());
        // z (a y² + b y + c) F
        for (ypow, row) in rows.iter().enumerate() {
            for (xpow, c) in row.iter().enumerate() {
                if !c.is_zero() {
                    add((i + xpow, j + ypow, k + 1), &(c * &f));
                }
            }
        }
        // − xy F
        add((i + 1, j + 1, k), &-&f);
        // − z c(x) F(x, 0)
        if j == 0 {
            for (xpow, c) in rows[0].iter().enumerate() {
                if !c.is_zero() {
                    add((i + xpow, 0, k + 1), &-(c * &f));
                }
            }
        }
        // − z c̃(y) F(0, y)
        if i == 0 {
            for (ypow, c) in c_tilde.iter().enumerate() {
                if !c.is_zero() {
                    add((0, j + ypow, k + 1), &-(c * &f));
                }
            }
        }
        // + z δ F(0, 0)
        if i == 0 && j == 0 && delta {
            add((0, 0, k + 1), &f);
        }
    }
    // + xy
    add((1, 1, 0), &BigInt::one());
    Ok(diff.values().map(|v| v.abs()).max().unwrap_or_default())
}

/// Natural logarithm of a positive rational of any size.
pub fn ln_rational(v: &BigRational) -> f64 {
    ln_bigint(v.numer()) - ln_bigint(v.denom())
}

fn ln_bigint(v: &BigInt) -> f64 {
    let bits = v.bits();
    if bits <= 1000 {
        return v.to_f64().unwrap().abs().ln();
    }
    let shift = bits - 64;
    let top = (v.abs() >> shift).to_f64().unwrap();
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AsymptoticFit {
    pub rho: f64,
    pub gamma: f64,
    /// RMS residual of the log fit.
    pub quality: f64,
}

/// Fit log f_{stride·n} ≈ n log ρ − γ log n + const over the tail half of
/// the nonzero coefficients at indices divisible by `stride`.
pub fn asymptotic_fit(s: &TruncatedSeries, stride: usize) -> Result<AsymptoticFit> {
    if stride == 0 {
        return Err(FqwError::Domain("stride must be positive".into()));
    }
    let pts: Vec<(f64, f64)> = s
        .coefficients
        .iter()
        .enumerate()
        .filter(|(k, c)| k % stride == 0 && *k > 0 && c.is_positive())
        .map(|(k, c)| ((k / stride) as f64, ln_rational(c)))
        .collect();
    if pts.len() < 12 {
        return Err(FqwError::InsufficientData(format!(
            "{} nonzero coefficients at stride {stride}, need 12",
            pts.len()
        )));
    }
    let tail = &pts[pts.len() / 2..];
    let rows: Vec<Vec<f64>> = tail.iter().map(|(n, _)| vec![*n, n.ln(), 1.0]).collect();
    let y: Vec<f64> = tail.iter().map(|(_, l)| *l).collect();
    let (c, quality) = lstsq(&rows, &y);
    Ok(AsymptoticFit {
        rho: c[0].exp(),
        gamma: -c[1],
        quality,
    })
}

/// Smallest positive period of the excursion lengths (gcd of the k with
/// f(0, 0, k) > 0), or None without excursions.
pub fn excursion_period(s: &TruncatedSeries) -> Option<usize> {
    let ks: Vec<usize> = s
        .coefficients
        .iter()
        .enumerate()
        .skip(1)
        .filter(|(_, c)| c.is_positive())
        .map(|(k, _)| k)
        .collect();
    ks.into_iter().reduce(num_integer::gcd)
}
