//! End-to-end chain model for the ahierarchical and semihierarchical
//! architectures, the waiting-time factor, range limits and the
//! repeaterless SPDC baseline.
//!
//! Every chain has `N` nodes spaced `L0 = L/(N-1)` apart. The average time
//! per successful distribution is
//!
//! ```text
//! T_tot = (T_r / P_ENG) / (P_ENC · η_det² · η_x²)
//! ```
//!
//! where the ENG factor `T_r / P_ENG` is `(L0/c) / p_g^(N-1)` when every node
//! acts blindly each round, and `L0/c · E[max_i J_i] + L/c` when a central
//! station holds successful links until the slowest one heralds. `J_i` are
//! the per-link geometric success rounds.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::entanglement::ef_unchecked;
use crate::error::{Error, Result};
use crate::link::transmission;
use crate::model::Model;
use crate::modes::ModeSpace;
use crate::params::{Lifetime, PhysicalConstants, PlatformParams, SpdcParams, WaitingExponent};

/// Below this success probability the waiting-time series is replaced by
/// its Euler-Maclaurin expansion.
const ASYMPTOTIC_BELOW: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Architecture {
    Ahierarchical,
    Semihierarchical,
}

impl Architecture {
    pub const ALL: [Architecture; 2] =
        [Architecture::Ahierarchical, Architecture::Semihierarchical];

    pub fn as_str(self) -> &'static str {
        match self {
            Architecture::Ahierarchical => "ahierarchical",
            Architecture::Semihierarchical => "semihierarchical",
        }
    }
}

impl fmt::Display for Architecture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Architecture {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ahierarchical" | "ahier" => Ok(Architecture::Ahierarchical),
            "semihierarchical" | "semihier" => Ok(Architecture::Semihierarchical),
            other => Err(Error::arg(
                "architecture",
                format!("unknown architecture {other:?}"),
            )),
        }
    }
}

/// A fully evaluated chain. Times in µs, rates per µs.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainPlan {
    pub architecture: Architecture,
    pub nodes: u32,
    pub l_km: f64,
    pub l0_km: f64,
    pub p1: f64,
    pub p_g: f64,
    /// Round period `L0/c`.
    pub repetition_us: f64,
    /// Expected time until every link holds entanglement, `T_r / P_ENG`.
    pub eng_time_us: f64,
    pub p_eng: f64,
    pub p_enc: f64,
    /// `η_det² · η_x²` for detecting the photons at the end parties.
    pub final_detection: f64,
    /// Storage time at which the ebit content is evaluated.
    pub storage_us: f64,
    pub t_tot_us: f64,
    pub mean_ef: f64,
    /// Ebit rate `⟨E_F⟩ / T_tot`.
    pub rate_per_us: f64,
    /// Ebit rate per node.
    pub q_per_us: f64,
}

/// ENC success probabilities `(p_e, p_f)`: `p_e = (η_r·η_det)²/2` and the
/// first-stage `p_f = p_e/4`.
pub fn p_enc_stage(eta_r: f64, eta_det: f64) -> (f64, f64) {
    let x = eta_r * eta_det;
    let p_e = x * x / 2.0;
    (p_e, p_e / 4.0)
}

/// All `N-1` links succeed in the same round: `p_g^(N-1)`.
pub fn p_eng_chain(p_g: f64, nodes: u32) -> f64 {
    debug_assert!(nodes >= 2);
    p_g.powi(nodes as i32 - 1)
}

/// `p_f^⌈(N-2)/2⌉ · p_e^⌊(N-2)/2⌋ · η_x^N`.
pub fn p_enc_chain(p_f: f64, p_e: f64, eta_x: f64, nodes: u32) -> f64 {
    debug_assert!(nodes >= 2);
    let stations = nodes as i32 - 2;
    let first = (stations + 1) / 2;
    let further = stations / 2;
    p_f.powi(first) * p_e.powi(further) * eta_x.powi(nodes as i32)
}

/// Expected maximum of `count` independent geometric(p) variables on
/// `{1, 2, ...}`, i.e. `Σ_{j≥0} [1 - (1-(1-p)^j)^count]`.
///
/// The series is truncated once the remaining tail is bounded by
/// `tolerance` relative to the partial sum. For `p < 1e-3` the sum is
/// evaluated as `H_count/λ + 1/2 (+ λ³/120 corrections)`, `λ = -ln(1-p)`,
/// whose error is far below double precision there.
pub fn expected_max_rounds(count: u32, p: f64, tolerance: f64) -> Result<f64> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::arg("p_g", format!("{p} is outside (0, 1]")));
    }
    if count == 0 {
        return Err(Error::arg("count", "need at least one link"));
    }
    if p == 1.0 {
        return Ok(1.0);
    }
    if count == 1 {
        return Ok(1.0 / p);
    }
    if p < ASYMPTOTIC_BELOW {
        Ok(max_rounds_asymptotic(count, p))
    } else {
        Ok(max_rounds_series(count, p, tolerance))
    }
}

pub(crate) fn max_rounds_series(count: u32, p: f64, tolerance: f64) -> f64 {
    let n = f64::from(count);
    let lambda = -(-p).ln_1p();
    let q = 1.0 - p;
    let mut total = 1.0;
    let mut j = 1u64;
    loop {
        let qj = (-lambda * j as f64).exp();
        // P(max > j) = 1 - (1 - q^j)^n
        total += -(n * (-qj).ln_1p()).exp_m1();
        // remaining terms are each below n·q^i, i > j
        let tail = n * qj * q / p;
        if tail <= tolerance * total {
            return total;
        }
        j += 1;
    }
}

pub(crate) fn max_rounds_asymptotic(count: u32, p: f64) -> f64 {
    let lambda = -(-p).ln_1p();
    let harmonic: f64 = (1..=count).rev().map(|k| 1.0 / f64::from(k)).sum();
    let correction = match count {
        2 => lambda.powi(3) / 120.0,
        3 => -lambda.powi(3) / 120.0,
        _ => 0.0,
    };
    harmonic / lambda + 0.5 + correction
}

/// `f(N, p_g) = p_g · E[max of n geometric(p_g)]` with `n = N-1` links (or
/// `N` under [`WaitingExponent::Nodes`]). `f/p_g` is the expected number of
/// rounds until every link has heralded.
pub fn f_waiting(nodes: u32, p_g: f64, tolerance: f64, exponent: WaitingExponent) -> Result<f64> {
    if nodes < 2 {
        return Err(Error::arg("nodes", format!("{nodes} is below 2")));
    }
    let count = match exponent {
        WaitingExponent::Links => nodes - 1,
        WaitingExponent::Nodes => nodes,
    };
    Ok(p_g * expected_max_rounds(count, p_g, tolerance)?)
}

/// Evaluate a chain of `nodes` nodes spanning `l_km`.
///
/// Storage time entering ⟨E_F⟩ is `L0/c` for the ahierarchical chain and
/// `(L + L0)/c` for the semihierarchical one (every link heralding in the
/// first round).
pub fn chain_time(
    architecture: Architecture,
    platform: &PlatformParams,
    nodes: u32,
    l_km: f64,
    model: &Model,
) -> Result<ChainPlan> {
    if nodes < 2 {
        return Err(Error::arg("nodes", format!("{nodes} is below 2")));
    }
    if !(l_km > 0.0) || !l_km.is_finite() {
        return Err(Error::arg(
            "l_km",
            format!("distance {l_km} must be positive"),
        ));
    }
    let c = model.c();
    let links = nodes - 1;
    let l0_km = l_km / f64::from(links);
    let budget = model.link_budget(platform, l0_km)?;
    let eta_det = platform.enc_detection_efficiency();
    let (p_e, p_f) = p_enc_stage(platform.eta_r, eta_det);
    let p_enc = p_enc_chain(p_f, p_e, platform.eta_x, nodes);
    let final_detection = (eta_det * platform.eta_x).powi(2);
    let repetition_us = l0_km / c;
    let p_eng = p_eng_chain(budget.p_g, nodes);

    let (eng_time_us, storage_us) = match architecture {
        Architecture::Ahierarchical => (repetition_us / p_eng, repetition_us),
        Architecture::Semihierarchical => {
            let rounds = if budget.p_g > 0.0 {
                let opts = &model.config.model;
                f_waiting(
                    nodes,
                    budget.p_g,
                    opts.series_tolerance,
                    opts.waiting_exponent,
                )? / budget.p_g
            } else {
                f64::INFINITY
            };
            (repetition_us * rounds + l_km / c, (l_km + l0_km) / c)
        }
    };
    let t_tot_us = eng_time_us / (p_enc * final_detection);
    let mean_ef = model.mean_ef(platform, storage_us, links);
    let rate_per_us = if mean_ef > 0.0 && t_tot_us.is_finite() {
        mean_ef / t_tot_us
    } else {
        0.0
    };
    Ok(ChainPlan {
        architecture,
        nodes,
        l_km,
        l0_km,
        p1: budget.p1,
        p_g: budget.p_g,
        repetition_us,
        eng_time_us,
        p_eng,
        p_enc,
        final_detection,
        storage_us,
        t_tot_us,
        mean_ef,
        rate_per_us,
        q_per_us: rate_per_us / f64::from(nodes),
    })
}

/// Largest distances at which the longest-lived mode considered still
/// carries entanglement (`V > 1/3`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RangeLimits {
    pub k_ref: Option<f64>,
    pub tau_us: f64,
    /// Ahierarchical bound on the elementary distance, `c·τ·√ln(1/χ)`.
    pub l0_max_ahier_km: f64,
    /// `N · L0_max` when a node count is given.
    pub l_max_ahier_km: Option<f64>,
    /// Semihierarchical bound `(N-1)/N · τ/2 · c · ln(1/χ)`; the `N → ∞`
    /// value when no node count is given.
    pub l_max_semihier_km: f64,
}

/// Range limits for `platform`, using `τ(k_ref)` for mode-dependent lifetimes.
pub fn range_limits(
    platform: &PlatformParams,
    space: &ModeSpace,
    k_ref: f64,
    nodes: Option<u32>,
    chi: f64,
    c: f64,
) -> Result<RangeLimits> {
    if !(chi > 0.0 && chi <= 1.0) {
        return Err(Error::arg("chi", format!("{chi} is outside (0, 1]")));
    }
    let (k_ref, tau_us) = match platform.lifetime {
        Lifetime::Fixed { tau_ms } => (None, tau_ms * 1e3),
        Lifetime::ModeDependent => (Some(k_ref), space.tau(k_ref)?),
    };
    if let Some(n) = nodes {
        if n < 2 {
            return Err(Error::arg("nodes", format!("{n} is below 2")));
        }
    }
    let log_inv_chi = -chi.ln();
    let l0_max = c * tau_us * log_inv_chi.sqrt();
    let node_factor = nodes.map_or(1.0, |n| f64::from(n - 1) / f64::from(n));
    Ok(RangeLimits {
        k_ref,
        tau_us,
        l0_max_ahier_km: l0_max,
        l_max_ahier_km: nodes.map(|n| f64::from(n) * l0_max),
        l_max_semihier_km: node_factor * tau_us / 2.0 * c * log_inv_chi,
    })
}

/// Mean time (µs) per ebit with a midway SPDC source and no memories.
/// Each photon crosses `L/2`, so the pair survives with `η_t(L/2)²`.
pub fn spdc_time(l_km: f64, spdc: &SpdcParams, constants: &PhysicalConstants) -> Result<f64> {
    if !(l_km >= 0.0) {
        return Err(Error::arg(
            "l_km",
            format!("distance {l_km} must be non-negative"),
        ));
    }
    let eta_half = transmission(l_km / 2.0, constants.alpha_db_per_km)?;
    let pairs_per_us = spdc.chi * (eta_half * spdc.eta_s).powi(2) * spdc.rep_rate_mhz;
    let ebits = ef_unchecked(spdc.visibility);
    Ok(1.0 / (pairs_per_us * ebits))
}
