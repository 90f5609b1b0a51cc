//! Single-link physics: fiber transmission, ENG success probabilities, the
//! write/read cross-correlation and the storage-time dependent visibility.

use crate::error::{Error, Result};
use crate::params::{DecoherenceKind, PhysicalConstants, PlatformParams};

/// Derived quantities of one elementary link of length `l0_km`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget {
    pub l0_km: f64,
    /// Transmission from a node to the midway station.
    pub eta_t_half: f64,
    /// Single-mode ENG success probability.
    pub p1: f64,
    /// ENG success probability over all mode pairings.
    pub p_g: f64,
}

impl LinkBudget {
    pub fn new(
        platform: &PlatformParams,
        l0_km: f64,
        constants: &PhysicalConstants,
    ) -> Result<Self> {
        let eta_t_half = transmission(l0_km / 2.0, constants.alpha_db_per_km)?;
        let p1 = p_single(platform.chi, platform.eta_m, eta_t_half);
        let p_g = p_eng(p1, platform.modes, platform.multiplexed);
        Ok(Self {
            l0_km,
            eta_t_half,
            p1,
            p_g,
        })
    }
}

/// Fiber transmission `10^(-αz/10)` over `z_km`.
pub fn transmission(z_km: f64, alpha_db_per_km: f64) -> Result<f64> {
    if !(z_km >= 0.0) {
        return Err(Error::arg(
            "z_km",
            format!("length {z_km} must be non-negative"),
        ));
    }
    if !(alpha_db_per_km >= 0.0) {
        return Err(Error::arg(
            "alpha_db_per_km",
            format!("{alpha_db_per_km} must be non-negative"),
        ));
    }
    Ok(10f64.powf(-alpha_db_per_km * z_km / 10.0))
}

/// Probability that one mode pair heralds entanglement: both write-out
/// photons are emitted, reach the midway station and are detected.
pub fn p_single(chi: f64, eta_det: f64, eta_t_half: f64) -> f64 {
    let amplitude = chi * eta_det * eta_t_half;
    amplitude * amplitude
}

/// ENG success probability with `modes` memory modes: `1-(1-p1)^(M²)` when
/// multiplexed, `1-(1-p1)^M` in parallel operation.
pub fn p_eng(p1: f64, modes: u32, multiplexed: bool) -> f64 {
    let m = u64::from(modes);
    let pairings = if multiplexed { m * m } else { m };
    p_any_success(p1, pairings as f64)
}

/// `1 - (1-p)^n`, evaluated as `-expm1(n·ln(1-p))` so that p ~ 1e-8 with
/// n ~ 3e7 keeps full precision.
pub(crate) fn p_any_success(p: f64, n: f64) -> f64 {
    if p <= 0.0 || n <= 0.0 {
        return 0.0;
    }
    if p >= 1.0 {
        return 1.0;
    }
    if n == 1.0 {
        return p;
    }
    -(n * (-p).ln_1p()).exp_m1()
}

/// Low-photon-number write/read cross-correlation `g² = 1 + 1/χ̃`.
pub fn g2_from_noise(chi_eff: f64) -> Result<f64> {
    if !(chi_eff > 0.0) {
        return Err(Error::arg("chi_eff", format!("{chi_eff} must be positive")));
    }
    Ok(1.0 + 1.0 / chi_eff)
}

/// Bell-measurement visibility `(g²-1)/(g²+1)`.
pub fn visibility_from_g2(g2: f64) -> Result<f64> {
    if !(g2 >= 1.0) {
        return Err(Error::arg("g2", format!("{g2} is below 1")));
    }
    if g2.is_infinite() {
        return Ok(1.0);
    }
    Ok((g2 - 1.0) / (g2 + 1.0))
}

/// Memory lifetime seen by one mode: either a fixed value or `γ/K`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decoherence {
    pub kind: DecoherenceKind,
    pub tau_us: f64,
}

impl Decoherence {
    /// Read-out efficiency decay factor `η_r(t)/η_r(0)`, reported as the
    /// exponent's argument so that huge storage times do not underflow.
    fn decay_exponent(&self, t_us: f64) -> f64 {
        let x = t_us / self.tau_us;
        match self.kind {
            DecoherenceKind::Gaussian => x * x,
            DecoherenceKind::Exponential => x,
        }
    }
}

/// Visibility after storing for `t_us`:
/// `V = 1 / (1 + 2·χ̃0·exp(t²/τ²))` (Gaussian) or with `exp(t/τ)` (exponential).
pub fn visibility_at(decoherence: Decoherence, t_us: f64, chi_eff0: f64) -> f64 {
    debug_assert!(t_us >= 0.0 && chi_eff0 > 0.0);
    1.0 / (1.0 + 2.0 * chi_eff0 * decoherence.decay_exponent(t_us).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn transmission_values() {
        assert_eq!(transmission(0.0, 0.2).unwrap(), 1.0);
        assert_relative_eq!(
            transmission(100.0, 0.2).unwrap(),
            0.01,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            transmission(75.0, 0.2).unwrap(),
            0.031_622_776_601_683_79,
            max_relative = 1e-14
        );
        assert!(transmission(-1.0, 0.2).is_err());
    }

    #[test]
    fn p_single_values() {
        assert_relative_eq!(p_single(0.05, 0.2, 1.0), 1.0e-4, max_relative = 1e-14);
        assert_eq!(p_single(0.05, 0.2, 0.0), 0.0);
        assert_relative_eq!(
            p_single(0.05, 0.2, 0.031_622_8),
            1.000_001_479_84e-7,
            max_relative = 1e-12
        );
    }

    #[test]
    fn p_eng_values() {
        assert_eq!(p_eng(0.0, 5500, true), 0.0);
        assert_eq!(p_eng(1.0, 5500, true), 1.0);
        assert_eq!(p_eng(1.0, 1, false), 1.0);
        // 1 - 0.9999^10000, evaluated in extended precision
        assert_relative_eq!(
            p_eng(1e-4, 100, true),
            0.632_138_953_567_070_1,
            max_relative = 1e-12
        );
        assert_eq!(p_eng(0.3, 1, false), 0.3);
        assert_eq!(p_eng(0.3, 1, true), 0.3);
    }

    #[test]
    fn p_eng_tiny_probability_huge_exponent() {
        // M² = 3.025e7, p1 = 1e-8: 1 - exp(-0.3025) to leading order
        let p = p_eng(1e-8, 5500, true);
        let expected = -(3.025e7f64 * (-1e-8f64).ln_1p()).exp_m1();
        assert_relative_eq!(p, expected, max_relative = 1e-15);
        assert_relative_eq!(p, 1.0 - (-0.3025f64).exp(), max_relative = 1e-7);
    }

    #[test]
    fn g2_and_visibility() {
        assert_relative_eq!(g2_from_noise(0.05).unwrap(), 21.0, max_relative = 1e-14);
        assert_eq!(g2_from_noise(1.0).unwrap(), 2.0);
        assert_eq!(g2_from_noise(0.5).unwrap(), 3.0);
        assert!(g2_from_noise(0.0).is_err());
        assert!(g2_from_noise(-0.1).is_err());

        assert_eq!(visibility_from_g2(1.0).unwrap(), 0.0);
        assert_relative_eq!(
            visibility_from_g2(21.0).unwrap(),
            10.0 / 11.0,
            max_relative = 1e-15
        );
        assert!(visibility_from_g2(1e12).unwrap() > 0.999_999_999);
        assert_eq!(visibility_from_g2(f64::INFINITY).unwrap(), 1.0);
        assert!(visibility_from_g2(0.5).is_err());
    }

    #[test]
    fn visibility_over_time() {
        let gauss = Decoherence {
            kind: DecoherenceKind::Gaussian,
            tau_us: 1e5 / 100.0,
        };
        assert_relative_eq!(
            visibility_at(gauss, 0.0, 0.05),
            1.0 / 1.1,
            max_relative = 1e-15
        );
        assert_relative_eq!(
            visibility_at(gauss, 750.0, 0.05),
            1.0 / (1.0 + 0.1 * 0.5625f64.exp()),
            max_relative = 1e-15
        );
        assert_relative_eq!(
            visibility_at(gauss, 750.0, 0.05),
            0.850_697_873_538_077_4,
            max_relative = 1e-14
        );
        assert_eq!(visibility_at(gauss, 1e9, 0.05), 0.0);

        let expo = Decoherence {
            kind: DecoherenceKind::Exponential,
            tau_us: 1000.0,
        };
        assert_relative_eq!(
            visibility_at(expo, 1000.0, 0.47),
            1.0 / (1.0 + 0.94 * std::f64::consts::E),
            max_relative = 1e-15
        );
    }

    #[test]
    fn link_budget_at_150_km() {
        let mux = crate::params::builtin_platform(crate::params::WV_MUX_QM).unwrap();
        let b = LinkBudget::new(&mux, 150.0, &PhysicalConstants::default()).unwrap();
        assert_relative_eq!(b.eta_t_half, 10f64.powf(-1.5), max_relative = 1e-14);
        assert!(b.p1 <= b.p_g && b.p_g <= 1.0);
        assert!(b.p_g > 0.9 && b.p_g < 0.99, "{}", b.p_g);
    }
}
