//! Dense univariate polynomials with exact rational coefficients.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // Ratio::to_f64 can fail on huge operands; scale through bit lengths.
        let n = r.numer();
        let d = r.denom();
        let shift = n.bits() as i64 - d.bits() as i64;
        let (n2, d2) = if shift > 0 {
            (n.clone(), d << (shift as usize))
        } else {
            (n << ((-shift) as usize), d.clone())
        };
        let q = BigRational::new(n2, d2).to_f64().unwrap_or(f64::NAN);
        q * 2f64.powi(shift as i32)
    })
}

/// Exact rational from the binary value of `v`.
pub fn f64_to_rat(v: f64) -> BigRational {
    BigRational::from_float(v).expect("finite float")
}

/// Coefficients stored low degree first, no trailing zeros.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Poly {
    c: Vec<BigRational>,
}

impl Poly {
    pub fn new(mut c: Vec<BigRational>) -> Self {
        while c.last().is_some_and(|v| v.is_zero()) {
            c.pop();
        }
        Poly { c }
    }

    pub fn from_ints(c: &[i64]) -> Self {
        Poly::new(c.iter().map(|&v| rat(v, 1)).collect())
    }

    pub fn zero() -> Self {
        Poly { c: Vec::new() }
    }

    pub fn constant(v: BigRational) -> Self {
        Poly::new(vec![v])
    }

    pub fn monomial(k: usize, v: BigRational) -> Self {
        let mut c = vec![BigRational::zero(); k + 1];
        c[k] = v;
        Poly::new(c)
    }

    pub fn x() -> Self {
        Poly::monomial(1, BigRational::one())
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    /// None for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.c.len().checked_sub(1)
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.c
    }

    pub fn coeff(&self, k: usize) -> BigRational {
        self.c.get(k).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn lead(&self) -> BigRational {
        self.c.last().cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn scale(&self, s: &BigRational) -> Self {
        Poly::new(self.c.iter().map(|v| v * s).collect())
    }

    pub fn monic(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let l = self.lead();
        Poly::new(self.c.iter().map(|v| v / &l).collect())
    }

    pub fn derivative(&self) -> Self {
        Poly::new(
            self.c
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, v)| v * BigRational::from_integer(BigInt::from(k)))
                .collect(),
        )
    }

    pub fn eval(&self, x: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for v in self.c.iter().rev() {
            acc = acc * x + v;
        }
        acc
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        self.c.iter().rev().fold(0.0, |acc, v| acc * x + rat_to_f64(v))
    }

    pub fn eval_c64(&self, x: Complex64) -> Complex64 {
        self.c
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, v| acc * x + rat_to_f64(v))
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.c.iter().map(rat_to_f64).collect()
    }

    /// Multiplicity of the root x = 0.
    pub fn valuation(&self) -> usize {
        self.c.iter().take_while(|v| v.is_zero()).count()
    }

    /// Divide out x^valuation.
    pub fn strip_x(&self) -> Self {
        Poly::new(self.c[self.valuation()..].to_vec())
    }

    pub fn divrem(&self, d: &Poly) -> (Poly, Poly) {
        assert!(!d.is_zero(), "division by zero polynomial");
        let dd = d.degree().unwrap();
        let dl = d.lead();
        let mut r = self.c.clone();
        if r.len() <= dd {
            return (Poly::zero(), self.clone());
        }
        let mut q = vec![BigRational::zero(); r.len() - dd];
        for k in (0..q.len()).rev() {
            let t = &r[k + dd] / &dl;
            if !t.is_zero() {
                for (i, dv) in d.c.iter().enumerate() {
                    r[k + i] -= &t * dv;
                }
            }
            q[k] = t;
        }
        r.truncate(dd);
        (Poly::new(q), Poly::new(r))
    }

    /// Monic gcd; gcd(0, 0) = 0.
    pub fn gcd(&self, other: &Poly) -> Poly {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.divrem(&b).1;
            a = b;
            b = r;
        }
        a.monic()
    }

    /// Yun's algorithm: pairs (f_k, k) with self = lead · Π f_k^k, each f_k
    /// squarefree and pairwise coprime. Constant factors are omitted.
    pub fn squarefree_decomposition(&self) -> Vec<(Poly, usize)> {
        let mut out = Vec::new();
        if self.degree().unwrap_or(0) == 0 {
            return out;
        }
        let f = self.monic();
        let fp = f.derivative();
        let a0 = f.gcd(&fp);
        let mut b = f.divrem(&a0).0;
        let mut c = fp.divrem(&a0).0;
        let mut d = &c - &b.derivative();
        let mut k = 1;
        while b.degree().unwrap_or(0) > 0 {
            let a = b.gcd(&d);
            if a.degree().unwrap_or(0) > 0 {
                out.push((a.clone(), k));
            }
            b = b.divrem(&a).0;
            c = d.divrem(&a).0;
            d = &c - &b.derivative();
            k += 1;
        }
        out
    }

    pub fn squarefree_part(&self) -> Poly {
        let f = self.monic();
        let g = f.gcd(&f.derivative());
        f.divrem(&g).0
    }

    /// True iff every root over C has even multiplicity.
    pub fn is_square_up_to_constant(&self) -> bool {
        self.squarefree_decomposition().iter().all(|(_, k)| k % 2 == 0)
    }

    fn sturm_chain(&self) -> Vec<Poly> {
        let p0 = self.squarefree_part();
        let mut chain = vec![p0.clone(), p0.derivative()];
        loop {
            let n = chain.len();
            if chain[n - 1].is_zero() {
                chain.pop();
                break;
            }
            let r = chain[n - 2].divrem(&chain[n - 1]).1;
            if r.is_zero() {
                break;
            }
            chain.push(-&r);
        }
        chain
    }

    /// Number of distinct real roots in (0, +inf).
    pub fn count_positive_roots(&self) -> usize {
        if self.degree().unwrap_or(0) == 0 {
            return 0;
        }
        let chain = self.strip_x().sturm_chain();
        let at0 = chain.iter().map(|p| p.coeff(0)).collect::<Vec<_>>();
        let atinf = chain.iter().map(|p| p.lead()).collect::<Vec<_>>();
        sign_changes(&at0).saturating_sub(sign_changes(&atinf))
    }

    /// Number of distinct real roots in (a, b], a < b.
    pub fn count_roots_in(&self, a: &BigRational, b: &BigRational) -> usize {
        if self.degree().unwrap_or(0) == 0 {
            return 0;
        }
        let chain = self.sturm_chain();
        let va = chain.iter().map(|p| p.eval(a)).collect::<Vec<_>>();
        let vb = chain.iter().map(|p| p.eval(b)).collect::<Vec<_>>();
        sign_changes(&va).saturating_sub(sign_changes(&vb))
    }

    /// Resultant via the Sylvester determinant.
    pub fn resultant(&self, other: &Poly) -> BigRational {
        let (m, n) = match (self.degree(), other.degree()) {
            (Some(m), Some(n)) => (m, n),
            _ => return BigRational::zero(),
        };
        let size = m + n;
        if size == 0 {
            return BigRational::one();
        }
        let mut mat = vec![vec![BigRational::zero(); size]; size];
        for r in 0..n {
            for (k, v) in self.c.iter().enumerate() {
                mat[r][r + m - k] = v.clone();
            }
        }
        for r in 0..m {
            for (k, v) in other.c.iter().enumerate() {
                mat[n + r][r + n - k] = v.clone();
            }
        }
        determinant(mat)
    }

    /// Discriminant up to a nonzero constant factor: Res(p, p').
    pub fn discriminant_value(&self) -> BigRational {
        self.resultant(&self.derivative())
    }
}

fn sign_changes(vals: &[BigRational]) -> usize {
    let signs: Vec<bool> = vals
        .iter()
        .filter(|v| !v.is_zero())
        .map(|v| v.is_positive())
        .collect();
    signs.windows(2).filter(|w| w[0] != w[1]).count()
}

fn determinant(mut m: Vec<Vec<BigRational>>) -> BigRational {
    let n = m.len();
    let mut det = BigRational::one();
    for col in 0..n {
        let Some(piv) = (col..n).find(|&r| !m[r][col].is_zero()) else {
            return BigRational::zero();
        };
        if piv != col {
            m.swap(piv, col);
            det = -det;
        }
        let p = m[col][col].clone();
        det *= &p;
        for r in col + 1..n {
            if m[r][col].is_zero() {
                continue;
            }
            let f = &m[r][col] / &p;
            for c in col..n {
                let t = &f * &m[col][c];
                m[r][c] -= t;
            }
        }
    }
    det
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, o: &Poly) -> Poly {
        let n = self.c.len().max(o.c.len());
        Poly::new((0..n).map(|k| self.coeff(k) + o.coeff(k)).collect())
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, o: &Poly) -> Poly {
        let n = self.c.len().max(o.c.len());
        Poly::new((0..n).map(|k| self.coeff(k) - o.coeff(k)).collect())
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, o: &Poly) -> Poly {
        if self.is_zero() || o.is_zero() {
            return Poly::zero();
        }
        let mut c = vec![BigRational::zero(); self.c.len() + o.c.len() - 1];
        for (i, a) in self.c.iter().enumerate() {
            for (j, b) in o.c.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        Poly::new(c)
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly::new(self.c.iter().map(|v| -v).collect())
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, v) in self.c.iter().enumerate().rev() {
            if v.is_zero() {
                continue;
            }
            let neg = v.is_negative();
            let a = v.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            first = false;
            let show_coeff = k == 0 || !a.is_one();
            if show_coeff {
                write!(f, "{}", a)?;
            }
            match k {
                0 => {}
                1 => write!(f, "{}x", if show_coeff { "*" } else { "" })?,
                _ => write!(f, "{}x^{}", if show_coeff { "*" } else { "" }, k)?,
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_and_division() {
        let p = Poly::from_ints(&[-1, 0, 1]);
        let q = Poly::from_ints(&[1, 1]);
        let (d, r) = p.divrem(&q);
        assert_eq!(d, Poly::from_ints(&[-1, 1]));
        assert!(r.is_zero());
        assert_eq!(&(&d * &q) + &r, p);
    }

    #[test]
    fn yun_finds_multiplicities() {
        // (x-1)^2 (x+2)^3 x
        let a = Poly::from_ints(&[-1, 1]);
        let b = Poly::from_ints(&[2, 1]);
        let p = &(&(&a * &a) * &(&(&b * &b) * &b)) * &Poly::x();
        let mut dec = p.squarefree_decomposition();
        dec.sort_by_key(|(_, k)| *k);
        assert_eq!(dec.len(), 3);
        assert_eq!(dec[0], (Poly::x(), 1));
        assert_eq!(dec[1], (a, 2));
        assert_eq!(dec[2], (b, 3));
    }

    #[test]
    fn sturm_counts() {
        // (x-1)(x-2)(x+3)(x^2+1)
        let p = &(&(&Poly::from_ints(&[-1, 1]) * &Poly::from_ints(&[-2, 1]))
            * &Poly::from_ints(&[3, 1]))
            * &Poly::from_ints(&[1, 0, 1]);
        assert_eq!(p.count_positive_roots(), 2);
        assert_eq!(p.count_roots_in(&rat(-4, 1), &rat(3, 2)), 2);
        let sq = &p * &Poly::from_ints(&[-1, 1]);
        assert_eq!(sq.count_positive_roots(), 2);
        let with_zero = &p * &Poly::from_ints(&[0, 0, 1]);
        assert_eq!(with_zero.count_positive_roots(), 2);
    }

    #[test]
    fn resultant_detects_common_roots() {
        let p = Poly::from_ints(&[-1, 0, 1]);
        assert!(!p.discriminant_value().is_zero());
        let sq = &p * &Poly::from_ints(&[-1, 1]);
        assert!(sq.discriminant_value().is_zero());
        // Res(x^2 - 1, x - 2) = 3 up to sign.
        assert_eq!(p.resultant(&Poly::from_ints(&[-2, 1])).abs(), rat(3, 1));
    }

    #[test]
    fn display_is_readable() {
        assert_eq!(Poly::from_ints(&[1, -5, 1]).to_string(), "x^2 - 5*x + 1");
    }
}
