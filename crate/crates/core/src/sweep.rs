//! Ebit rates per node, the optimal node count and distance sweeps.

use rayon::prelude::*;
use serde::Serialize;

use crate::architecture::{chain_time, Architecture, ChainPlan};
use crate::error::{Error, Result};
use crate::model::Model;
use crate::params::PlatformParams;

const US_PER_S: f64 = 1e6;

/// One evaluated chain, with times in seconds and rates per second.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRecord {
    pub platform: String,
    pub architecture: Architecture,
    pub l_km: f64,
    pub nodes: u32,
    pub l0_km: f64,
    pub p1: f64,
    pub p_g: f64,
    pub p_eng: f64,
    pub p_enc: f64,
    pub mean_ef: f64,
    pub t_tot_s: f64,
    /// Ebits per second.
    pub rate: f64,
    /// Ebits per second per node.
    pub q: f64,
    /// Time per ebit, `1/(N·Q)`; infinite when `Q = 0`.
    pub t_ebit_s: f64,
}

impl SweepRecord {
    pub fn from_plan(platform: &str, plan: &ChainPlan) -> Self {
        let t_tot_s = plan.t_tot_us / US_PER_S;
        let rate = if plan.rate_per_us > 0.0 {
            plan.mean_ef / t_tot_s
        } else {
            0.0
        };
        let q = rate / f64::from(plan.nodes);
        Self {
            platform: platform.to_owned(),
            architecture: plan.architecture,
            l_km: plan.l_km,
            nodes: plan.nodes,
            l0_km: plan.l0_km,
            p1: plan.p1,
            p_g: plan.p_g,
            p_eng: plan.p_eng,
            p_enc: plan.p_enc,
            mean_ef: plan.mean_ef,
            t_tot_s,
            rate,
            q,
            t_ebit_s: 1.0 / (f64::from(plan.nodes) * q),
        }
    }
}

pub fn q_of(
    nodes: u32,
    l_km: f64,
    platform: &PlatformParams,
    architecture: Architecture,
    model: &Model,
) -> Result<SweepRecord> {
    let plan = chain_time(architecture, platform, nodes, l_km, model)?;
    Ok(SweepRecord::from_plan(&platform.name, &plan))
}

/// Exhaustive argmax of Q over `nodes`; the first (smallest) maximizer wins.
pub fn optimize_nodes(
    l_km: f64,
    platform: &PlatformParams,
    architecture: Architecture,
    nodes: std::ops::RangeInclusive<u32>,
    model: &Model,
) -> Result<(u32, SweepRecord)> {
    if nodes.is_empty() || *nodes.start() < 2 {
        return Err(Error::arg(
            "nodes",
            format!("range {nodes:?} must be nonempty with minimum ≥ 2"),
        ));
    }
    let mut best: Option<SweepRecord> = None;
    for n in nodes {
        let record = q_of(n, l_km, platform, architecture, model)?;
        if best.as_ref().is_none_or(|b| record.q > b.q) {
            best = Some(record);
        }
    }
    let best = best.expect("range is nonempty");
    Ok((best.nodes, best))
}

/// Optimal record for every `(L, platform, architecture)`, ordered by
/// distance, then platform, then architecture.
pub fn sweep(
    l_grid: &[f64],
    platforms: &[PlatformParams],
    architectures: &[Architecture],
    model: &Model,
) -> Result<Vec<SweepRecord>> {
    if l_grid.is_empty() {
        return Err(Error::arg("grid", "distance grid is empty"));
    }
    let range = model.config.search.nodes();
    let cells: Vec<(f64, &PlatformParams, Architecture)> = l_grid
        .iter()
        .flat_map(|&l| {
            platforms
                .iter()
                .flat_map(move |p| architectures.iter().map(move |&a| (l, p, a)))
        })
        .collect();
    cells
        .into_par_iter()
        .map(|(l, p, a)| optimize_nodes(l, p, a, range.clone(), model).map(|(_, r)| r))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{builtin_platform, builtin_platforms, WV_MUX_QM};
    use approx::assert_relative_eq;

    #[test]
    fn record_identities() {
        let model = Model::default();
        for p in builtin_platforms() {
            for arch in Architecture::ALL {
                for n in [2, 5, 11] {
                    let r = q_of(n, 300.0, &p, arch, &model).unwrap();
                    if r.mean_ef > 0.0 {
                        assert_relative_eq!(r.rate, r.mean_ef / r.t_tot_s, max_relative = 1e-12);
                        assert_relative_eq!(
                            r.q * f64::from(n) * r.t_tot_s,
                            r.mean_ef,
                            max_relative = 1e-12
                        );
                        assert_relative_eq!(
                            r.t_ebit_s,
                            r.t_tot_s / r.mean_ef,
                            max_relative = 1e-12
                        );
                    } else {
                        assert_eq!(r.q, 0.0);
                        assert!(r.t_ebit_s.is_infinite());
                    }
                }
            }
        }
    }

    #[test]
    fn optimum_dominates_range() {
        let model = Model::default();
        let mux = builtin_platform(WV_MUX_QM).unwrap();
        let (n_star, best) =
            optimize_nodes(550.0, &mux, Architecture::Ahierarchical, 2..=40, &model).unwrap();
        assert_eq!(best.nodes, n_star);
        for n in 2..=40 {
            let r = q_of(n, 550.0, &mux, Architecture::Ahierarchical, &model).unwrap();
            assert!(best.q >= r.q);
        }
        assert!(optimize_nodes(550.0, &mux, Architecture::Ahierarchical, 1..=4, &model).is_err());
    }

    #[test]
    fn all_zero_picks_smallest() {
        let model = Model::default();
        let mux = builtin_platform(WV_MUX_QM).unwrap();
        // every link far beyond the coherence range of all modes
        let (n, r) =
            optimize_nodes(2e6, &mux, Architecture::Semihierarchical, 3..=6, &model).unwrap();
        assert_eq!(n, 3);
        assert_eq!(r.q, 0.0);
    }

    #[test]
    fn sweep_order() {
        let model = Model::default();
        let platforms = builtin_platforms();
        let records = sweep(&[100.0, 200.0], &platforms[..2], &Architecture::ALL, &model).unwrap();
        assert_eq!(records.len(), 8);
        assert_eq!(records[0].l_km, 100.0);
        assert_eq!(records[0].platform, platforms[0].name);
        assert_eq!(records[1].architecture, Architecture::Semihierarchical);
        assert_eq!(records[2].platform, platforms[1].name);
        assert_eq!(records[4].l_km, 200.0);
        assert!(sweep(&[], &platforms, &Architecture::ALL, &model).is_err());
    }
}
