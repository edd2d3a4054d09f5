//! Uniformized simulation shared by all three queueing models. Each event
//! of the embedded chain has mean duration 1/Λ regardless of state, so
//! event averages are time averages.

use super::QueueModel;
use crate::error::{FqwError, Result};
use crate::par::{self, Exec};
use crate::poly::rat_to_f64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

pub const WARMUP_FRACTION: f64 = 0.2;
/// Per-event growth of the total queue above which a run is unstable.
pub const STABILITY_DRIFT_THRESHOLD: f64 = 0.01;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Functional {
    /// P(both queues empty).
    ProbEmpty,
    /// E[1{x = 0, y ≥ 1} w^y] = F(0, w) − F(0, 0).
    AxisGf { w: f64 },
    MeanTotal,
    ProbFirstLonger,
    ProbSecondLonger,
}

impl Functional {
    fn eval(&self, s: &State) -> f64 {
        match *self {
            Functional::ProbEmpty => f64::from(u8::from(s.x == 0 && s.y == 0)),
            Functional::AxisGf { w } => {
                if s.x == 0 && s.y >= 1 {
                    w.powi(s.y as i32)
                } else {
                    0.0
                }
            }
            Functional::MeanTotal => (s.x + s.y) as f64,
            Functional::ProbFirstLonger => f64::from(u8::from(s.x > s.y)),
            Functional::ProbSecondLonger => f64::from(u8::from(s.y > s.x)),
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct SimConfig {
    /// Uniformized events per replica, warm-up included.
    pub events: u64,
    pub replicas: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CtmcEstimate {
    pub value: f64,
    pub std_error: f64,
    pub replicas: usize,
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, Default)]
struct State {
    x: u64,
    y: u64,
    /// Server position for the alternating model (1 or 2).
    pos: u8,
}

enum Chain {
    Coupled { l1: f64, l2: f64, m1: f64, m2: f64, m1s: f64, m2s: f64 },
    Jsq { lambda: f64, alpha: f64, beta: f64, pi1: f64 },
    Alternating { l1: f64, l2: f64, m1: f64, m2: f64, xi1: f64, xi2: f64 },
}

impl Chain {
    fn of(model: &QueueModel) -> Self {
        let f = rat_to_f64;
        match model {
            QueueModel::Coupled(p) => Chain::Coupled {
                l1: f(&p.lambda1),
                l2: f(&p.lambda2),
                m1: f(&p.mu1),
                m2: f(&p.mu2),
                m1s: f(&p.mu1_star),
                m2s: f(&p.mu2_star),
            },
            QueueModel::Jsq(p) => Chain::Jsq {
                lambda: f(&p.lambda),
                alpha: f(&p.alpha),
                beta: f(&p.beta),
                pi1: f(&p.pi1),
            },
            QueueModel::Alternating(p) => Chain::Alternating {
                l1: f(&p.lambda1),
                l2: f(&p.lambda2),
                m1: f(&p.mu1),
                m2: f(&p.mu2),
                xi1: f(&p.xi1),
                xi2: f(&p.xi2),
            },
        }
    }

    fn uniform_rate(&self) -> f64 {
        match *self {
            Chain::Coupled { l1, l2, m1, m2, m1s, m2s } => l1 + l2 + m1.max(m1s) + m2.max(m2s),
            Chain::Jsq { lambda, alpha, beta, .. } => lambda + alpha + beta,
            Chain::Alternating { l1, l2, m1, m2, xi1, xi2 } => l1 + l2 + (m1 + xi1).max(m2 + xi2),
        }
    }

    /// One uniformized event with u uniform on [0, Λ).
    fn step(&self, s: &mut State, mut u: f64) {
        let mut take = |rate: f64| {
            if u < rate {
                true
            } else {
                u -= rate;
                false
            }
        };
        match *self {
            Chain::Coupled { l1, l2, m1, m2, m1s, m2s } => {
                if take(l1) {
                    s.x += 1;
                } else if take(l2) {
                    s.y += 1;
                } else if s.x > 0 && take(if s.y > 0 { m1 } else { m1s }) {
                    s.x -= 1;
                } else if s.y > 0 && take(if s.x > 0 { m2 } else { m2s }) {
                    s.y -= 1;
                }
            }
            Chain::Jsq { lambda, alpha, beta, pi1 } => {
                if take(lambda) {
                    let first = match s.x.cmp(&s.y) {
                        std::cmp::Ordering::Less => true,
                        std::cmp::Ordering::Greater => false,
                        std::cmp::Ordering::Equal => u < lambda * pi1,
                    };
                    if first {
                        s.x += 1;
                    } else {
                        s.y += 1;
                    }
                } else if s.x > 0 && take(alpha) {
                    s.x -= 1;
                } else if s.y > 0 && take(beta) {
                    s.y -= 1;
                }
            }
            Chain::Alternating { l1, l2, m1, m2, xi1, xi2 } => {
                let idle = s.x == 0 && s.y == 0;
                if take(l1) {
                    s.x += 1;
                    if idle {
                        s.pos = 1;
                    }
                } else if take(l2) {
                    s.y += 1;
                    if idle {
                        s.pos = 2;
                    }
                } else if s.pos == 1 && s.x > 0 {
                    if take(m1) {
                        s.x -= 1;
                        if s.x == 0 && s.y > 0 {
                            s.pos = 2;
                        }
                    } else if s.y > 0 && take(xi1) {
                        s.pos = 2;
                    }
                } else if s.pos == 2 && s.y > 0 {
                    if take(m2) {
                        s.y -= 1;
                        if s.y == 0 && s.x > 0 {
                            s.pos = 1;
                        }
                    } else if s.x > 0 && take(xi2) {
                        s.pos = 1;
                    }
                }
            }
        }
    }
}

struct ReplicaOutput {
    means: Vec<f64>,
    total_mid: u64,
    total_end: u64,
}

fn run_replica(chain: &Chain, events: u64, seed: u64, stream: u64, fs: &[Functional]) -> ReplicaOutput {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let rate = chain.uniform_rate();
    let warm = (events as f64 * WARMUP_FRACTION) as u64;
    let mid = events / 2;
    let mut s = State { pos: 1, ..State::default() };
    let mut sums = vec![0.0; fs.len()];
    let mut total_mid = 0;
    for e in 0..events {
        if e >= warm {
            for (acc, f) in sums.iter_mut().zip(fs) {
                *acc += f.eval(&s);
            }
        }
        if e == mid {
            total_mid = s.x + s.y;
        }
        chain.step(&mut s, rng.random::<f64>() * rate);
    }
    let n = (events - warm).max(1) as f64;
    ReplicaOutput {
        means: sums.into_iter().map(|v| v / n).collect(),
        total_mid,
        total_end: s.x + s.y,
    }
}

fn check_config(cfg: &SimConfig) -> Result<()> {
    if cfg.replicas == 0 || cfg.events < 10 {
        return Err(FqwError::Domain("need at least one replica and ten events".into()));
    }
    Ok(())
}

fn run_all(model: &QueueModel, cfg: &SimConfig, fs: &[Functional], exec: Exec) -> Vec<ReplicaOutput> {
    let chain = Chain::of(model);
    par::map_range(exec, cfg.replicas, |r| run_replica(&chain, cfg.events, cfg.seed, r as u64 + 1, fs))
}

/// Replica means of each functional with their standard errors. Replica r
/// uses ChaCha stream r+1 of `cfg.seed`, so results do not depend on `exec`.
pub fn simulate_ctmc(model: &QueueModel, cfg: &SimConfig, fs: &[Functional], exec: Exec) -> Result<Vec<CtmcEstimate>> {
    check_config(cfg)?;
    if !model.is_ergodic()? {
        return Err(FqwError::NotErgodic(format!("{} parameters are not ergodic; simulation refused", model.name())));
    }
    let runs = run_all(model, cfg, fs, exec);
    let r = runs.len() as f64;
    Ok((0..fs.len())
        .map(|k| {
            let xs: Vec<f64> = runs.iter().map(|o| o.means[k]).collect();
            let mean = xs.iter().sum::<f64>() / r;
            let std_error = if runs.len() > 1 {
                let var = xs.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (r - 1.0);
                (var / r).sqrt()
            } else {
                0.0
            };
            CtmcEstimate {
                value: mean,
                std_error,
                replicas: runs.len(),
                seed: cfg.seed,
            }
        })
        .collect())
}

#[derive(Clone, Debug, Serialize)]
pub struct StabilityReport {
    pub drift_per_event: f64,
    pub stable: bool,
}

/// Simulates without the ergodicity gate and classifies the run by the
/// growth of the total queue over the second half.
pub fn stability_probe(model: &QueueModel, cfg: &SimConfig, exec: Exec) -> Result<StabilityReport> {
    check_config(cfg)?;
    let runs = run_all(model, cfg, &[], exec);
    let span = (cfg.events - cfg.events / 2) as f64;
    let drift = runs
        .iter()
        .map(|o| (o.total_end as f64 - o.total_mid as f64) / span)
        .sum::<f64>()
        / runs.len() as f64;
    Ok(StabilityReport {
        drift_per_event: drift,
        stable: drift <= STABILITY_DRIFT_THRESHOLD,
    })
}
