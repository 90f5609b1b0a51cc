//! Round-level stochastic simulation of repeater chains, used as an oracle
//! for the closed-form waiting factor and chain times.
//!
//! Random numbers come from ChaCha8 (a counter-based stream cipher). The
//! 256-bit key is expanded from the 64-bit seed with `seed_from_u64`, and
//! trial `i` reads stream `i` of that key. Trials are grouped in fixed-size
//! chunks whose statistics are merged in index order, so estimates are
//! bit-identical for any thread count.

use std::collections::{BTreeMap, HashMap};

use rand::distr::{Bernoulli, Distribution};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Geometric;
use rayon::prelude::*;

use crate::architecture::{p_enc_stage, Architecture};
use crate::error::{Error, Result};
use crate::model::Model;
use crate::params::PlatformParams;

const CHUNK: u64 = 4096;
/// Largest admissible fraction of trials that may hit the round cap.
const MAX_FLAGGED_FRACTION: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McConfig {
    pub samples: u64,
    pub seed: u64,
    /// Trials needing more rounds than this are flagged and dropped.
    pub max_rounds: u64,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            samples: 100_000,
            seed: 42,
            max_rounds: 10_000_000,
        }
    }
}

impl McConfig {
    fn validate(&self) -> Result<()> {
        if self.samples < 1 {
            return Err(Error::arg("samples", "need at least one sample"));
        }
        if self.max_rounds < 1 {
            return Err(Error::arg("max_rounds", "must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples_used: u64,
}

impl McEstimate {
    /// Distance from `value` in units of the standard error. Zero when both
    /// agree exactly, infinite when they differ with zero error.
    pub fn z_score(&self, value: f64) -> f64 {
        let diff = (self.mean - value).abs();
        if diff == 0.0 {
            0.0
        } else {
            diff / self.std_error
        }
    }
}

/// Running mean and second central moment, merged with Chan's formula.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(&mut self, other: &Moments) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *other;
            return;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        let (na, nb) = (self.n as f64, other.n as f64);
        self.mean += delta * nb / n as f64;
        self.m2 += other.m2 + delta * delta * na * nb / n as f64;
        self.n = n;
    }

    fn estimate(&self) -> McEstimate {
        let std_error = if self.n > 1 {
            (self.m2 / (self.n - 1) as f64 / self.n as f64).sqrt()
        } else {
            0.0
        };
        McEstimate {
            mean: self.mean,
            std_error,
            samples_used: self.n,
        }
    }
}

#[derive(Debug, Clone)]
struct ChunkStats<const K: usize> {
    moments: [Moments; K],
    flagged: u64,
}

/// Per-trial random stream.
fn trial_rng(key: &[u8; 32], trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::from_seed(*key);
    rng.set_stream(trial);
    rng
}

/// Run `cfg.samples` trials of `trial` (returning `None` for a flagged
/// trial) and reduce K statistics per trial deterministically.
fn run_trials<const K: usize, S, F>(
    cfg: &McConfig,
    init: impl Fn() -> S + Sync,
    trial: F,
) -> Result<[McEstimate; K]>
where
    F: Fn(&mut ChaCha8Rng, &mut S) -> Option<[f64; K]> + Sync,
{
    cfg.validate()?;
    let key = ChaCha8Rng::seed_from_u64(cfg.seed).get_seed();
    let chunks = cfg.samples.div_ceil(CHUNK);
    let per_chunk: Vec<ChunkStats<K>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut stats = ChunkStats::<K> {
                moments: [Moments::default(); K],
                flagged: 0,
            };
            let mut scratch = init();
            let end = ((c + 1) * CHUNK).min(cfg.samples);
            for i in c * CHUNK..end {
                let mut rng = trial_rng(&key, i);
                match trial(&mut rng, &mut scratch) {
                    Some(values) => {
                        for (m, v) in stats.moments.iter_mut().zip(values) {
                            m.push(v);
                        }
                    }
                    None => stats.flagged += 1,
                }
            }
            stats
        })
        .collect();

    let mut total = [Moments::default(); K];
    let mut flagged = 0;
    for chunk in &per_chunk {
        for (t, m) in total.iter_mut().zip(&chunk.moments) {
            t.merge(m);
        }
        flagged += chunk.flagged;
    }
    if flagged as f64 > MAX_FLAGGED_FRACTION * cfg.samples as f64 || flagged == cfg.samples {
        return Err(Error::RoundCapExceeded {
            flagged,
            samples: cfg.samples,
            max_rounds: cfg.max_rounds,
        });
    }
    Ok(total.map(|m| m.estimate()))
}

fn geometric(p: f64) -> Result<Geometric> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::arg("p_g", format!("{p} is outside (0, 1]")));
    }
    Geometric::new(p).map_err(|e| Error::arg("p_g", e.to_string()))
}

fn bernoulli(name: &'static str, p: f64) -> Result<Bernoulli> {
    Bernoulli::new(p).map_err(|e| Error::arg(name, e.to_string()))
}

/// Success round (1-based) of every link; `None` if any exceeds `cap`.
fn sample_rounds(
    rng: &mut ChaCha8Rng,
    dist: &Geometric,
    rounds: &mut [u64],
    cap: u64,
) -> Option<u64> {
    let mut max = 0;
    for r in rounds.iter_mut() {
        let j = dist.sample(rng).saturating_add(1);
        if j > cap {
            return None;
        }
        *r = j;
        max = max.max(j);
    }
    Some(max)
}

/// Mean of the largest of `links` geometric(p_g) success rounds.
pub fn mc_expected_max_rounds(links: u32, p_g: f64, cfg: &McConfig) -> Result<McEstimate> {
    if links < 1 {
        return Err(Error::arg("links", "need at least one link"));
    }
    let dist = geometric(p_g)?;
    let [est] = run_trials(
        cfg,
        || vec![0u64; links as usize],
        |rng, rounds| sample_rounds(rng, &dist, rounds, cfg.max_rounds).map(|m| [m as f64]),
    )?;
    Ok(est)
}

/// Distribution of per-memory storage times in a semihierarchical chain.
#[derive(Debug, Clone, PartialEq)]
pub struct StorageSummary {
    pub mean_us: f64,
    pub p50_us: f64,
    pub p90_us: f64,
    pub p99_us: f64,
    /// Number of memories sampled (links × kept trials).
    pub memories: u64,
}

/// Storage time of each link's memories: wait for the slowest link,
/// `(j_max - j_i)·L0/c`, then the two-way exchange with the central
/// station, `L/c`.
pub fn mc_semihier_storage(
    nodes: u32,
    p_g: f64,
    l_km: f64,
    l0_km: f64,
    c: f64,
    cfg: &McConfig,
) -> Result<StorageSummary> {
    if nodes < 2 {
        return Err(Error::arg("nodes", format!("{nodes} is below 2")));
    }
    if !(l_km > 0.0 && l0_km > 0.0 && c > 0.0) {
        return Err(Error::arg(
            "geometry",
            "distances and signal speed must be positive",
        ));
    }
    cfg.validate()?;
    let dist = geometric(p_g)?;
    let links = (nodes - 1) as usize;
    let key = ChaCha8Rng::seed_from_u64(cfg.seed).get_seed();
    let chunks = cfg.samples.div_ceil(CHUNK);
    // histogram of the integer wait j_max - j_i
    let per_chunk: Vec<(BTreeMap<u64, u64>, u64)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut hist = BTreeMap::new();
            let mut flagged = 0;
            let mut rounds = vec![0u64; links];
            let end = ((c + 1) * CHUNK).min(cfg.samples);
            for i in c * CHUNK..end {
                let mut rng = trial_rng(&key, i);
                match sample_rounds(&mut rng, &dist, &mut rounds, cfg.max_rounds) {
                    Some(max) => {
                        for &j in &rounds {
                            *hist.entry(max - j).or_insert(0u64) += 1;
                        }
                    }
                    None => flagged += 1,
                }
            }
            (hist, flagged)
        })
        .collect();

    let mut hist: BTreeMap<u64, u64> = BTreeMap::new();
    let mut flagged = 0;
    for (h, f) in per_chunk {
        for (k, v) in h {
            *hist.entry(k).or_insert(0) += v;
        }
        flagged += f;
    }
    if flagged as f64 > MAX_FLAGGED_FRACTION * cfg.samples as f64 || flagged == cfg.samples {
        return Err(Error::RoundCapExceeded {
            flagged,
            samples: cfg.samples,
            max_rounds: cfg.max_rounds,
        });
    }

    let storage = |wait: u64| wait as f64 * l0_km / c + l_km / c;
    let memories: u64 = hist.values().sum();
    let mut moments = Moments::default();
    for (&wait, &count) in &hist {
        let chunk = Moments {
            n: count,
            mean: storage(wait),
            m2: 0.0,
        };
        moments.merge(&chunk);
    }
    // nearest-rank percentile
    let percentile = |q: f64| {
        let rank = ((q * memories as f64).ceil() as u64).max(1);
        let mut seen = 0;
        for (&wait, &count) in &hist {
            seen += count;
            if seen >= rank {
                return storage(wait);
            }
        }
        storage(*hist.keys().next_back().unwrap_or(&0))
    };
    Ok(StorageSummary {
        mean_us: moments.mean,
        p50_us: percentile(0.50),
        p90_us: percentile(0.90),
        p99_us: percentile(0.99),
        memories,
    })
}

/// Monte Carlo estimates for one chain configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McChainEstimate {
    /// Time until a successful end-to-end distribution, µs.
    pub t_tot_us: McEstimate,
    /// Mode-averaged E_F of the distributed state.
    pub mean_ef: McEstimate,
    /// Protocol rounds (ahierarchical) or attempts (semihierarchical) per
    /// success.
    pub attempts: McEstimate,
}

impl McChainEstimate {
    /// Per-round success probability implied by the mean attempt count,
    /// with a delta-method standard error.
    pub fn success_probability(&self) -> McEstimate {
        let m = self.attempts.mean;
        McEstimate {
            mean: 1.0 / m,
            std_error: self.attempts.std_error / (m * m),
            samples_used: self.attempts.samples_used,
        }
    }
}

/// Simulate the chain protocol round by round.
///
/// Ahierarchical: every round all links attempt ENG, every station attempts
/// ENC and the end parties detect, all blindly; the round counts only if
/// every event succeeds. Semihierarchical: links retry until each has
/// heralded, then one ENC/detection attempt follows the exchange with the
/// central station; a failure restarts every link.
pub fn mc_chain_time(
    architecture: Architecture,
    platform: &PlatformParams,
    nodes: u32,
    l_km: f64,
    model: &Model,
    cfg: &McConfig,
) -> Result<McChainEstimate> {
    if nodes < 2 {
        return Err(Error::arg("nodes", format!("{nodes} is below 2")));
    }
    if !(l_km > 0.0) {
        return Err(Error::arg(
            "l_km",
            format!("distance {l_km} must be positive"),
        ));
    }
    let c = model.c();
    let links = nodes - 1;
    let l0_km = l_km / f64::from(links);
    let round_us = l0_km / c;
    let budget = model.link_budget(platform, l0_km)?;
    let eta_det = platform.enc_detection_efficiency();
    let (p_e, p_f) = p_enc_stage(platform.eta_r, eta_det);
    let stations = nodes - 2;

    // Independent events of one connection attempt. They are drawn with the
    // least likely first; order does not change the joint distribution.
    let mut events: Vec<(Bernoulli, u32)> = vec![
        (bernoulli("p_f", p_f)?, stations.div_ceil(2)),
        (bernoulli("p_e", p_e)?, stations / 2),
        (bernoulli("eta_det", eta_det)?, 2),
        (bernoulli("eta_x", platform.eta_x)?, nodes + 2),
    ];
    events.retain(|&(_, count)| count > 0);
    let connect = move |rng: &mut ChaCha8Rng| {
        events
            .iter()
            .all(|(dist, count)| (0..*count).all(|_| dist.sample(rng)))
    };

    match architecture {
        Architecture::Ahierarchical => {
            let eng = bernoulli("p_g", budget.p_g)?;
            let ef = model.mean_ef(platform, round_us, links);
            let [t, e, a] = run_trials(
                cfg,
                || (),
                |rng, _| {
                    let mut rounds = 0u64;
                    loop {
                        rounds += 1;
                        if rounds > cfg.max_rounds {
                            return None;
                        }
                        if connect(rng) && (0..links).all(|_| eng.sample(rng)) {
                            return Some([rounds as f64 * round_us, ef, rounds as f64]);
                        }
                    }
                },
            )?;
            Ok(McChainEstimate {
                t_tot_us: t,
                mean_ef: e,
                attempts: a,
            })
        }
        Architecture::Semihierarchical => {
            let dist = geometric(budget.p_g)?;
            let exchange_us = l_km / c;
            // E_F for a memory that waited `wait` extra rounds; includes the
            // heralding round itself
            let ef_for_wait = |wait: u64| {
                let storage = (wait + 1) as f64 * round_us + exchange_us;
                model.mean_ef(platform, storage, links)
            };
            let [t, e, a] = run_trials(
                cfg,
                || (vec![0u64; links as usize], HashMap::<u64, f64>::new()),
                |rng, (rounds, cache)| {
                    let mut elapsed = 0.0;
                    let mut total_rounds = 0u64;
                    let mut attempts = 0u64;
                    loop {
                        attempts += 1;
                        let max = sample_rounds(rng, &dist, rounds, cfg.max_rounds)?;
                        total_rounds += max;
                        if total_rounds > cfg.max_rounds {
                            return None;
                        }
                        elapsed += max as f64 * round_us + exchange_us;
                        if connect(rng) {
                            let ef_sum: f64 = rounds
                                .iter()
                                .map(|&j| {
                                    *cache.entry(max - j).or_insert_with(|| ef_for_wait(max - j))
                                })
                                .sum();
                            return Some([elapsed, ef_sum / f64::from(links), attempts as f64]);
                        }
                    }
                },
            )?;
            Ok(McChainEstimate {
                t_tot_us: t,
                mean_ef: e,
                attempts: a,
            })
        }
    }
}
