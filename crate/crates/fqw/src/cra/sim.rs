use crate::error::{FqwError, Result};
use crate::par::{self, Exec};
use crate::queueing::CtmcEstimate;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Poisson};
use serde::Serialize;

pub const SLOT_CAP: u64 = 1_000_000;
const CHUNKS: usize = 256;

#[derive(Clone, Debug, Serialize)]
pub struct CriEstimate {
    pub estimate: CtmcEstimate,
    /// Episodes that hit the slot cap; excluded from the estimate.
    pub runaway: usize,
}

/// One collision resolution interval started by `n` colliding users. The
/// level-0 group is split by a p-coin; the other part waits on a stack and
/// every group entering level 0 is joined by Poisson(λ) new arrivals.
fn episode<R: Rng>(n: u64, p: f64, arrivals: Option<&Poisson<f64>>, rng: &mut R) -> Option<u64> {
    let fresh = |rng: &mut R| arrivals.map_or(0, |d| d.sample(rng) as u64);
    let mut stack: Vec<u64> = Vec::new();
    let mut c0 = n;
    let mut slots = 0;
    loop {
        slots += 1;
        if slots > SLOT_CAP {
            return None;
        }
        if c0 >= 2 {
            let i = Binomial::new(c0, p).expect("valid binomial").sample(rng);
            stack.push(c0 - i);
            c0 = i + fresh(rng);
        } else {
            match stack.pop() {
                None => return Some(slots),
                Some(w) => c0 = w + fresh(rng),
            }
        }
    }
}

/// Monte Carlo mean CRI. Replicas are split into fixed chunks, chunk c
/// drawing from ChaCha stream c+1, so the estimate does not depend on the
/// thread count.
pub fn simulate_cri(n: u64, lambda: f64, p: f64, replicas: usize, seed: u64, exec: Exec) -> Result<CriEstimate> {
    if !(p > 0.0 && p < 1.0) || !(lambda >= 0.0) || replicas == 0 {
        return Err(FqwError::Domain("need 0 < p < 1, lambda >= 0, replicas >= 1".into()));
    }
    let arrivals = if lambda > 0.0 {
        Some(Poisson::new(lambda).map_err(|e| FqwError::Domain(e.to_string()))?)
    } else {
        None
    };
    let chunks = CHUNKS.min(replicas);
    let parts = par::map_range(exec, chunks, |c| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(c as u64 + 1);
        let count = replicas / chunks + usize::from(c < replicas % chunks);
        let (mut s1, mut s2, mut ok, mut bad) = (0.0, 0.0, 0usize, 0usize);
        for _ in 0..count {
            match episode(n, p, arrivals.as_ref(), &mut rng) {
                Some(l) => {
                    let l = l as f64;
                    s1 += l;
                    s2 += l * l;
                    ok += 1;
                }
                None => bad += 1,
            }
        }
        (s1, s2, ok, bad)
    });
    let (s1, s2, ok, bad) = parts
        .into_iter()
        .fold((0.0, 0.0, 0, 0), |a, b| (a.0 + b.0, a.1 + b.1, a.2 + b.2, a.3 + b.3));
    if ok == 0 {
        return Err(FqwError::NonConvergence("every episode hit the slot cap".into()));
    }
    let r = ok as f64;
    let mean = s1 / r;
    let std_error = if ok > 1 {
        ((s2 - r * mean * mean).max(0.0) / (r - 1.0) / r).sqrt()
    } else {
        0.0
    };
    Ok(CriEstimate {
        estimate: CtmcEstimate {
            value: mean,
            std_error,
            replicas: ok,
            seed,
        },
        runaway: bad,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trivial_sizes_take_one_slot() {
        for n in [0, 1] {
            let e = simulate_cri(n, 0.3, 0.5, 1000, 5, Exec::default()).unwrap();
            assert_eq!(e.estimate.value, 1.0);
            assert_eq!(e.estimate.std_error, 0.0);
        }
    }

    #[test]
    fn two_users_no_arrivals() {
        let e = simulate_cri(2, 0.0, 0.5, 100_000, 9, Exec::default()).unwrap().estimate;
        assert!((e.value - 5.0).abs() < 3.0 * e.std_error, "{e:?}");
    }

    #[test]
    fn reproducible_and_exec_independent() {
        let a = simulate_cri(4, 0.2, 0.5, 5000, 42, Exec::Parallel).unwrap().estimate;
        let b = simulate_cri(4, 0.2, 0.5, 5000, 42, Exec::Sequential).unwrap().estimate;
        assert_eq!(a.value.to_bits(), b.value.to_bits());
    }
}
