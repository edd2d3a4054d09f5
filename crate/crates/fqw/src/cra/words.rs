//! Sums over the affine word semigroup generated by σ₁(z) = λ + pz and
//! σ₂(z) = λ + qz. A word σ is tracked as (scale, offset) = ((p;q)^σ, σ(0)).
//!
//! Traversals extend words on the right: σ∘σᵢ has scale s·P and offset
//! o + sλ. The subtree under a node (s, o) is {σ∘τ}, whose sums factor as
//! e^{−o} s^m Σⱼ (−s)ʲ/j! Φ_{m,j} with Φ_{m,j} = Σ_τ (s_τ)^m τ(0)^j.

use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AffineWord {
    pub scale: f64,
    pub offset: f64,
    pub length: usize,
    pub ones_count: usize,
}

impl AffineWord {
    pub fn identity() -> Self {
        AffineWord {
            scale: 1.0,
            offset: 0.0,
            length: 0,
            ones_count: 0,
        }
    }

    /// σᵢ∘σ, with i = 1 the p-branch.
    pub fn compose_left(&self, first: bool, lambda: f64, p: f64) -> Self {
        let f = if first { p } else { 1.0 - p };
        AffineWord {
            scale: f * self.scale,
            offset: lambda + f * self.offset,
            length: self.length + 1,
            ones_count: self.ones_count + usize::from(first),
        }
    }

    /// σ∘σᵢ.
    pub fn compose_right(&self, first: bool, lambda: f64, p: f64) -> Self {
        let f = if first { p } else { 1.0 - p };
        AffineWord {
            scale: self.scale * f,
            offset: self.offset + self.scale * lambda,
            length: self.length + 1,
            ones_count: self.ones_count + usize::from(first),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Traversal {
    /// Level by level with equal nodes merged, leaves closed exactly.
    BreadthFirst,
    /// Unmerged depth-first walk with the same leaf closure.
    DepthFirst,
    /// Explicit words of length ≤ L only.
    TruncateOnly,
}

pub(crate) const CLOSURE_TERMS: usize = 40;
/// Largest m kept in the closure table for the large-n mean.
pub(crate) const LARGE_N_ORDER: usize = 30;

pub(crate) fn binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Φ_{m,j} for 2 ≤ m ≤ m_max, 0 ≤ j ≤ j_max, from
/// Φ_{m,j}(1 − p^{m+j} − q^{m+j}) = δ_{j0} + Σ_{k<j} C(j,k) λ^{j−k}(p^{m+k} + q^{m+k}) Φ_{m,k}.
#[derive(Clone, Debug)]
pub(crate) struct PhiTable {
    v: Vec<Vec<f64>>,
}

impl PhiTable {
    pub(crate) fn new(lambda: f64, p: f64, m_max: usize, j_max: usize) -> Self {
        let q = 1.0 - p;
        let pw = |e: usize| p.powi(e as i32) + q.powi(e as i32);
        let mut v = vec![Vec::new(); m_max + 1];
        for (m, row) in v.iter_mut().enumerate().skip(2) {
            for j in 0..=j_max {
                let mut acc = if j == 0 { 1.0 } else { 0.0 };
                for (k, phi) in row.iter().enumerate() {
                    acc += binomial(j as u64, k as u64) * lambda.powi((j - k) as i32) * pw(m + k) * phi;
                }
                row.push(acc / (1.0 - pw(m + j)));
            }
        }
        PhiTable { v }
    }

    pub(crate) fn get(&self, m: usize, j: usize) -> f64 {
        self.v[m][j]
    }

    pub(crate) fn m_max(&self) -> usize {
        self.v.len() - 1
    }
}

/// G_m = Σ_σ e^{−o} s^m and H_m = Σ_σ o e^{−o} s^m for m = 0..=M
/// (entries below 2 stay zero).
#[derive(Clone, Debug, Default, Serialize)]
pub struct WordSums {
    pub g_raw: Vec<f64>,
    pub h_raw: Vec<f64>,
}

struct Acc<'a> {
    m_max: usize,
    phi: Option<&'a PhiTable>,
    sums: WordSums,
}

impl Acc<'_> {
    fn explicit(&mut self, s: f64, o: f64, mult: f64) {
        let e = mult * (-o).exp();
        let mut sm = s * s;
        for m in 2..=self.m_max {
            self.sums.g_raw[m] += e * sm;
            self.sums.h_raw[m] += e * o * sm;
            sm *= s;
        }
    }

    fn close(&mut self, s: f64, o: f64, mult: f64) {
        let Some(phi) = self.phi else {
            return self.explicit(s, o, mult);
        };
        let e = mult * (-o).exp();
        let mut sm = s * s;
        for m in 2..=self.m_max {
            let (mut a, mut b) = (0.0, 0.0);
            let mut c = 1.0;
            for j in 0..CLOSURE_TERMS {
                a += c * phi.get(m, j);
                b += c * (o * phi.get(m, j) + s * phi.get(m, j + 1));
                c *= -s / (j + 1) as f64;
            }
            self.sums.g_raw[m] += e * sm * a;
            self.sums.h_raw[m] += e * sm * b;
            sm *= s;
        }
    }
}

/// Merges nodes with identical (scale, offset), summing multiplicities.
pub(crate) fn merge(mut level: Vec<(f64, f64, f64)>) -> Vec<(f64, f64, f64)> {
    level.sort_by(|a, b| (a.0, a.1).partial_cmp(&(b.0, b.1)).unwrap());
    let mut out: Vec<(f64, f64, f64)> = Vec::with_capacity(level.len());
    for n in level {
        match out.last_mut() {
            Some(last) if last.0 == n.0 && last.1 == n.1 => last.2 += n.2,
            _ => out.push(n),
        }
    }
    out
}

pub(crate) fn word_sums(lambda: f64, p: f64, depth: usize, m_max: usize, how: Traversal, phi: &PhiTable) -> WordSums {
    let q = 1.0 - p;
    let mut acc = Acc {
        m_max,
        phi: (how != Traversal::TruncateOnly).then_some(phi),
        sums: WordSums {
            g_raw: vec![0.0; m_max + 1],
            h_raw: vec![0.0; m_max + 1],
        },
    };
    match how {
        Traversal::BreadthFirst | Traversal::TruncateOnly => {
            let mut level = vec![(1.0, 0.0, 1.0)];
            for _ in 0..depth {
                let mut next = Vec::with_capacity(2 * level.len());
                for &(s, o, mult) in &level {
                    acc.explicit(s, o, mult);
                    let o2 = o + s * lambda;
                    next.push((s * p, o2, mult));
                    next.push((s * q, o2, mult));
                }
                level = merge(next);
            }
            for &(s, o, mult) in &level {
                acc.close(s, o, mult);
            }
        }
        Traversal::DepthFirst => {
            let mut stack = vec![(1.0, 0.0, 0usize)];
            while let Some((s, o, d)) = stack.pop() {
                if d == depth {
                    acc.close(s, o, 1.0);
                    continue;
                }
                acc.explicit(s, o, 1.0);
                let o2 = o + s * lambda;
                stack.push((s * q, o2, d + 1));
                stack.push((s * p, o2, d + 1));
            }
        }
    }
    acc.sums
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::rat;
    use num_rational::BigRational;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn exact(bits: &[bool], lambda: &BigRational, p: &BigRational, left: bool) -> (BigRational, BigRational) {
        let q = BigRational::from_integer(1.into()) - p;
        let mut s = BigRational::from_integer(1.into());
        let mut o = BigRational::from_integer(0.into());
        let ordered: Vec<bool> = if left { bits.iter().rev().copied().collect() } else { bits.to_vec() };
        for b in ordered {
            let f = if b { p.clone() } else { q.clone() };
            if left {
                o = lambda + &f * &o;
                s = &f * &s;
            } else {
                o = &o + &s * lambda;
                s = &s * &f;
            }
        }
        (s, o)
    }

    #[test]
    fn word_bookkeeping_replays_exactly() {
        let (lambda, p) = (rat(1, 5), rat(7, 10));
        let q = rat(3, 10);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let len = rng.random_range(1..20);
            let bits: Vec<bool> = (0..len).map(|_| rng.random()).collect();
            let ones = bits.iter().filter(|b| **b).count();
            let l = exact(&bits, &lambda, &p, true);
            let r = exact(&bits, &lambda, &p, false);
            assert_eq!(l, r);
            assert_eq!(l.0, num_traits::pow(p.clone(), ones) * num_traits::pow(q.clone(), len - ones));
            assert!(l.1 >= lambda && l.1 <= &lambda / &q);
        }
    }

    #[test]
    fn level_sums_are_binomial_powers() {
        let (lambda, p) = (0.2, 0.7);
        let mut level = vec![AffineWord::identity()];
        for len in 1..=10 {
            level = level
                .iter()
                .flat_map(|w| [w.compose_right(true, lambda, p), w.compose_right(false, lambda, p)])
                .collect();
            for m in 2..5 {
                let s: f64 = level.iter().map(|w| w.scale.powi(m)).sum();
                let want = (p.powi(m) + (1.0 - p).powi(m)).powi(len);
                assert!((s - want).abs() <= 1e-12 * want);
            }
        }
    }

    #[test]
    fn closure_is_depth_independent() {
        let phi = PhiTable::new(0.3, 0.7, 12, CLOSURE_TERMS + 1);
        let a = word_sums(0.3, 0.7, 4, 12, Traversal::BreadthFirst, &phi);
        let b = word_sums(0.3, 0.7, 10, 12, Traversal::BreadthFirst, &phi);
        for m in 2..=12 {
            assert!((a.g_raw[m] - b.g_raw[m]).abs() < 1e-13);
            assert!((a.h_raw[m] - b.h_raw[m]).abs() < 1e-13);
        }
    }

    #[test]
    fn depth_first_agrees() {
        let phi = PhiTable::new(0.2, 0.5, 20, CLOSURE_TERMS + 1);
        let a = word_sums(0.2, 0.5, 12, 20, Traversal::BreadthFirst, &phi);
        let b = word_sums(0.2, 0.5, 12, 20, Traversal::DepthFirst, &phi);
        for m in 2..=20 {
            assert!((a.g_raw[m] - b.g_raw[m]).abs() < 1e-12, "m={m}");
        }
    }
}
