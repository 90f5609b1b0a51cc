//! A validated configuration together with the mode-space grid built from it.

use crate::entanglement::{ef_unchecked, SEPARABLE_VISIBILITY};
use crate::error::Result;
use crate::link::{visibility_at, Decoherence, LinkBudget};
use crate::modes::ModeSpace;
use crate::params::{Config, DecoherenceKind, EfComposition, Lifetime, PlatformParams};

#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub config: Config,
    pub space: ModeSpace,
}

impl Model {
    pub fn new(config: Config) -> Result<Self> {
        config.validate()?;
        let space = ModeSpace::from_params(&config.mode_space, &config.constants)?;
        Ok(Self { config, space })
    }

    /// Signal speed in fiber, km/µs.
    pub fn c(&self) -> f64 {
        self.config.constants.fiber_speed_km_per_us
    }

    pub fn chi_eff(&self, platform: &PlatformParams) -> f64 {
        self.config.noise.effective_chi(platform)
    }

    /// Decoherence seen by mode `k` (ignored for fixed-lifetime platforms).
    pub fn decoherence(&self, platform: &PlatformParams, k: f64) -> Decoherence {
        let tau_us = match platform.lifetime {
            Lifetime::Fixed { tau_ms } => tau_ms * 1e3,
            Lifetime::ModeDependent => self.space.gamma / k,
        };
        Decoherence {
            kind: platform.decoherence,
            tau_us,
        }
    }

    pub fn link_budget(&self, platform: &PlatformParams, l0_km: f64) -> Result<LinkBudget> {
        LinkBudget::new(platform, l0_km, &self.config.constants)
    }

    /// Average E_F over the mode spectrum after storing for `storage_us`.
    /// `links` only matters with [`EfComposition::Product`].
    ///
    /// Modes whose visibility has dropped below 1/3 contribute zero and are
    /// kept in the average.
    pub fn mean_ef(&self, platform: &PlatformParams, storage_us: f64, links: u32) -> f64 {
        let chi = self.chi_eff(platform);
        let power = match self.config.model.ef_composition {
            EfComposition::SingleLink => 1,
            EfComposition::Product => links.max(1) as i32,
        };
        let ef_at = |k: f64| {
            let v = visibility_at(self.decoherence(platform, k), storage_us, chi);
            ef_unchecked(v.powi(power))
        };
        if platform.is_mode_dependent() {
            let k_cut = self.entangled_below(platform, storage_us, chi, power);
            self.space.weighted_average_below(k_cut, ef_at)
        } else {
            ef_at(self.space.k_min)
        }
    }

    /// Wavevector above which `V^power ≤ 1/3` after `storage_us`, so that
    /// the E_F integrand vanishes. Infinite when no mode has decayed that far.
    fn entangled_below(
        &self,
        platform: &PlatformParams,
        storage_us: f64,
        chi: f64,
        power: i32,
    ) -> f64 {
        let v_min = SEPARABLE_VISIBILITY.powf(1.0 / f64::from(power));
        // V = 1/(1 + 2χ·e^x) with x = (tK/γ)² or tK/γ
        let x_cut = ((1.0 / v_min - 1.0) / (2.0 * chi)).ln();
        if !(x_cut > 0.0) {
            return 0.0;
        }
        if !(storage_us > 0.0) {
            return f64::INFINITY;
        }
        let scale = self.space.gamma / storage_us;
        match platform.decoherence {
            DecoherenceKind::Gaussian => scale * x_cut.sqrt(),
            DecoherenceKind::Exponential => scale * x_cut,
        }
    }
}

impl Default for Model {
    fn default() -> Self {
        Self::new(Config::default()).expect("default config is valid")
    }
}
