//! Physical constants, platform presets and the JSON configuration bundle.
//!
//! Units used throughout the crate: distances in km, times in µs, spin-wave
//! wavevectors in mm⁻¹, the lifetime constant γ in µs·mm⁻¹ (so that
//! `τ(K) = γ / K` is in µs), repetition rates in MHz.
//!
//! Every other module reads parameters only through the types defined here.
//! All of them are plain immutable values once validated.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const WV_MUX_QM: &str = "WV-MUX-QM";
pub const WV_PARALLEL: &str = "WV-parallel";
pub const TEMPORAL: &str = "Temporal";
pub const LATTICE_SM: &str = "Lattice-SM";

/// Mass of a rubidium-87 atom in kg.
pub const RB87_MASS_KG: f64 = 1.44316e-25;
/// Boltzmann constant in J/K.
pub const BOLTZMANN_J_PER_K: f64 = 1.380649e-23;

/// Upper sanity bound on the fiber signal speed (km/µs).
const MAX_SIGNAL_SPEED: f64 = 0.3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhysicalConstants {
    pub atomic_mass_kg: f64,
    pub boltzmann_j_per_k: f64,
    /// Signal speed in fiber, km/µs.
    pub fiber_speed_km_per_us: f64,
    /// Fiber attenuation, dB/km.
    pub alpha_db_per_km: f64,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self {
            atomic_mass_kg: RB87_MASS_KG,
            boltzmann_j_per_k: BOLTZMANN_J_PER_K,
            fiber_speed_km_per_us: 0.2,
            alpha_db_per_km: 0.2,
        }
    }
}

impl PhysicalConstants {
    pub fn validate(&self) -> Result<()> {
        positive("constants.atomic_mass_kg", self.atomic_mass_kg)?;
        positive("constants.boltzmann_j_per_k", self.boltzmann_j_per_k)?;
        positive(
            "constants.fiber_speed_km_per_us",
            self.fiber_speed_km_per_us,
        )?;
        positive("constants.alpha_db_per_km", self.alpha_db_per_km)?;
        if self.fiber_speed_km_per_us > MAX_SIGNAL_SPEED {
            return Err(Error::validation(
                "constants.fiber_speed_km_per_us",
                format!(
                    "{} exceeds the vacuum speed bound 0.3 km/µs",
                    self.fiber_speed_km_per_us
                ),
            ));
        }
        Ok(())
    }
}

/// Detector used at the entanglement-connection stage and for the final
/// detection at the end parties.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Detection {
    SingleMode,
    Multimode,
}

/// Time profile of the read-out efficiency decay.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecoherenceKind {
    /// `exp(-t²/τ²)`, motional dephasing of spin waves.
    Gaussian,
    /// `exp(-t/τ)`.
    Exponential,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Lifetime {
    /// One lifetime shared by every mode.
    Fixed { tau_ms: f64 },
    /// `τ(K) = γ / K`, with γ taken from the mode space.
    ModeDependent,
}

/// One repeater platform (a row of the parameter table).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlatformParams {
    pub name: String,
    /// Number of memory modes M.
    pub modes: u32,
    /// Pair-generation probability per mode.
    pub chi: f64,
    /// Multiplexing efficiency.
    pub eta_x: f64,
    /// Memory read-out efficiency.
    pub eta_r: f64,
    /// Single-mode detector efficiency.
    pub eta_s: f64,
    /// Multimode detector efficiency.
    pub eta_m: f64,
    /// `true`: any-to-any mode pairing (M² scaling); `false`: parallel (M).
    pub multiplexed: bool,
    pub enc_detection: Detection,
    pub decoherence: DecoherenceKind,
    pub lifetime: Lifetime,
}

impl PlatformParams {
    /// Detector efficiency used at ENC and at the final detection.
    pub fn enc_detection_efficiency(&self) -> f64 {
        match self.enc_detection {
            Detection::SingleMode => self.eta_s,
            Detection::Multimode => self.eta_m,
        }
    }

    /// Number of independent mode pairings tried per ENG attempt.
    pub fn mode_pairings(&self) -> f64 {
        let m = u64::from(self.modes);
        if self.multiplexed {
            (m * m) as f64
        } else {
            m as f64
        }
    }

    pub fn is_mode_dependent(&self) -> bool {
        matches!(self.lifetime, Lifetime::ModeDependent)
    }

    pub fn validate(&self, path: &str) -> Result<()> {
        if self.name.trim().is_empty() {
            return Err(Error::validation(
                format!("{path}.name"),
                "must not be empty",
            ));
        }
        if self.modes < 1 {
            return Err(Error::validation(
                format!("{path}.modes"),
                "must be at least 1",
            ));
        }
        if !(self.chi > 0.0 && self.chi < 1.0) {
            return Err(Error::validation(
                format!("{path}.chi"),
                format!("{} is outside (0, 1)", self.chi),
            ));
        }
        for (field, value) in [
            ("eta_x", self.eta_x),
            ("eta_r", self.eta_r),
            ("eta_s", self.eta_s),
            ("eta_m", self.eta_m),
        ] {
            unit_interval(&format!("{path}.{field}"), value)?;
        }
        if let Lifetime::Fixed { tau_ms } = self.lifetime {
            positive(&format!("{path}.lifetime.tau_ms"), tau_ms)?;
        }
        Ok(())
    }
}

/// The four reference platforms, in table order.
pub fn builtin_platforms() -> Vec<PlatformParams> {
    vec![
        PlatformParams {
            name: WV_MUX_QM.into(),
            modes: 5500,
            chi: 0.05,
            eta_x: 0.9,
            eta_r: 0.7,
            eta_s: 0.9,
            eta_m: 0.2,
            multiplexed: true,
            enc_detection: Detection::SingleMode,
            decoherence: DecoherenceKind::Gaussian,
            lifetime: Lifetime::ModeDependent,
        },
        PlatformParams {
            name: WV_PARALLEL.into(),
            modes: 5500,
            chi: 0.05,
            eta_x: 1.0,
            eta_r: 0.7,
            eta_s: 0.9,
            eta_m: 0.2,
            multiplexed: false,
            // no multiplexing means a mode-resolved BSM at ENC
            enc_detection: Detection::Multimode,
            decoherence: DecoherenceKind::Gaussian,
            lifetime: Lifetime::ModeDependent,
        },
        PlatformParams {
            name: TEMPORAL.into(),
            modes: 50,
            chi: 0.47,
            eta_x: 1.0,
            eta_r: 0.71,
            eta_s: 0.9,
            eta_m: 0.9,
            multiplexed: false,
            enc_detection: Detection::SingleMode,
            decoherence: DecoherenceKind::Exponential,
            lifetime: Lifetime::Fixed { tau_ms: 1.0 },
        },
        PlatformParams {
            name: LATTICE_SM.into(),
            modes: 1,
            chi: 0.05,
            eta_x: 1.0,
            eta_r: 0.76,
            eta_s: 0.9,
            eta_m: 0.9,
            multiplexed: false,
            enc_detection: Detection::SingleMode,
            decoherence: DecoherenceKind::Exponential,
            lifetime: Lifetime::Fixed { tau_ms: 220.0 },
        },
    ]
}

pub fn builtin_platform(name: &str) -> Option<PlatformParams> {
    builtin_platforms().into_iter().find(|p| p.name == name)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModeSpaceParams {
    pub k_min_per_mm: f64,
    pub k_max_per_mm: f64,
    /// K-space mode density β (mm²).
    pub beta_mm2: f64,
    pub temperature_k: f64,
    /// Lifetime constant γ (µs·mm⁻¹). `null` derives it from the
    /// temperature and atomic mass.
    pub gamma_us_mm: Option<f64>,
    /// Points of the trapezoid grid used for mode averages.
    pub grid_points: usize,
}

impl Default for ModeSpaceParams {
    fn default() -> Self {
        Self {
            k_min_per_mm: 10.0,
            k_max_per_mm: 1000.0,
            beta_mm2: 3.5e-3,
            temperature_k: 1e-6,
            gamma_us_mm: Some(1e5),
            grid_points: 4096,
        }
    }
}

impl ModeSpaceParams {
    pub fn validate(&self) -> Result<()> {
        positive("mode_space.k_min_per_mm", self.k_min_per_mm)?;
        if !(self.k_max_per_mm > self.k_min_per_mm) || !self.k_max_per_mm.is_finite() {
            return Err(Error::validation(
                "mode_space.k_max_per_mm",
                format!(
                    "{} must exceed k_min_per_mm = {}",
                    self.k_max_per_mm, self.k_min_per_mm
                ),
            ));
        }
        positive("mode_space.beta_mm2", self.beta_mm2)?;
        positive("mode_space.temperature_k", self.temperature_k)?;
        if let Some(gamma) = self.gamma_us_mm {
            positive("mode_space.gamma_us_mm", gamma)?;
        }
        if self.grid_points < 2 {
            return Err(Error::validation(
                "mode_space.grid_points",
                "need at least 2 points",
            ));
        }
        Ok(())
    }
}

/// Read-path noise. The effective excitation probability is frozen at its
/// storage-time-zero value `χ̃ = χ + B/η_r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseParams {
    /// Noise-photon probability B in the read-out path per shot.
    pub background: f64,
}

impl Default for NoiseParams {
    fn default() -> Self {
        Self { background: 0.0 }
    }
}

impl NoiseParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.background >= 0.0) || !self.background.is_finite() {
            return Err(Error::validation(
                "noise.background",
                format!("{} must be a finite non-negative number", self.background),
            ));
        }
        Ok(())
    }

    /// `χ̃(0) = χ + B/η_r`.
    pub fn effective_chi(&self, platform: &PlatformParams) -> f64 {
        platform.chi + self.background / platform.eta_r
    }
}

/// Midway SPDC source used as the repeaterless baseline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpdcParams {
    pub rep_rate_mhz: f64,
    pub chi: f64,
    pub eta_s: f64,
    pub visibility: f64,
}

impl Default for SpdcParams {
    fn default() -> Self {
        Self {
            rep_rate_mhz: 80.0,
            chi: 0.01,
            eta_s: 0.9,
            visibility: 1.0,
        }
    }
}

impl SpdcParams {
    pub fn validate(&self) -> Result<()> {
        positive("spdc.rep_rate_mhz", self.rep_rate_mhz)?;
        if !(self.chi > 0.0 && self.chi < 1.0) {
            return Err(Error::validation(
                "spdc.chi",
                format!("{} is outside (0, 1)", self.chi),
            ));
        }
        unit_interval("spdc.eta_s", self.eta_s)?;
        if !(0.0..=1.0).contains(&self.visibility) {
            return Err(Error::validation(
                "spdc.visibility",
                format!("{} is outside [0, 1]", self.visibility),
            ));
        }
        Ok(())
    }
}

/// Which count enters the exponent of the waiting-time series: the number of
/// links `N-1` or the number of nodes `N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WaitingExponent {
    Links,
    Nodes,
}

/// How the end-to-end visibility is obtained from link visibilities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EfComposition {
    /// Mode-averaged E_F of one link at the storage time.
    SingleLink,
    /// `V_end(K) = V(K, t)^(N-1)` before taking E_F.
    Product,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelOptions {
    pub waiting_exponent: WaitingExponent,
    pub ef_composition: EfComposition,
    /// Relative tail bound at which the waiting-time series is truncated.
    pub series_tolerance: f64,
}

impl Default for ModelOptions {
    fn default() -> Self {
        Self {
            waiting_exponent: WaitingExponent::Links,
            ef_composition: EfComposition::SingleLink,
            series_tolerance: 1e-12,
        }
    }
}

impl ModelOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.series_tolerance > 0.0 && self.series_tolerance < 1.0) {
            return Err(Error::validation(
                "model.series_tolerance",
                format!("{} is outside (0, 1)", self.series_tolerance),
            ));
        }
        Ok(())
    }
}

/// Inclusive node-count search range for the optimizer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchRange {
    pub n_min: u32,
    pub n_max: u32,
}

impl Default for SearchRange {
    fn default() -> Self {
        Self {
            n_min: 2,
            n_max: 200,
        }
    }
}

impl SearchRange {
    pub fn validate(&self) -> Result<()> {
        if self.n_min < 2 {
            return Err(Error::validation("search.n_min", "must be at least 2"));
        }
        if self.n_max < self.n_min {
            return Err(Error::validation(
                "search.n_max",
                format!("{} is below n_min = {}", self.n_max, self.n_min),
            ));
        }
        Ok(())
    }

    pub fn nodes(&self) -> std::ops::RangeInclusive<u32> {
        self.n_min..=self.n_max
    }
}

/// The complete, validated parameter bundle.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Config {
    pub constants: PhysicalConstants,
    pub platforms: Vec<PlatformParams>,
    pub mode_space: ModeSpaceParams,
    pub noise: NoiseParams,
    pub spdc: SpdcParams,
    pub model: ModelOptions,
    pub search: SearchRange,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            constants: PhysicalConstants::default(),
            platforms: builtin_platforms(),
            mode_space: ModeSpaceParams::default(),
            noise: NoiseParams::default(),
            spdc: SpdcParams::default(),
            model: ModelOptions::default(),
            search: SearchRange::default(),
        }
    }
}

impl Config {
    pub fn validate(&self) -> Result<()> {
        self.constants.validate()?;
        if self.platforms.is_empty() {
            return Err(Error::validation(
                "platforms",
                "at least one platform is required",
            ));
        }
        for (i, p) in self.platforms.iter().enumerate() {
            p.validate(&format!("platforms[{i}]"))?;
            if self.platforms[..i].iter().any(|q| q.name == p.name) {
                return Err(Error::validation(
                    format!("platforms[{i}].name"),
                    format!("duplicate platform name {:?}", p.name),
                ));
            }
        }
        self.mode_space.validate()?;
        self.noise.validate()?;
        self.spdc.validate()?;
        self.model.validate()?;
        self.search.validate()?;
        Ok(())
    }

    pub fn platform(&self, name: &str) -> Option<&PlatformParams> {
        self.platforms.iter().find(|p| p.name == name)
    }

    /// Parse a JSON document. Absent fields take their defaults.
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawConfig = serde_json::from_str(text)?;
        let platforms = match raw.platforms {
            None => builtin_platforms(),
            Some(entries) => entries
                .into_iter()
                .enumerate()
                .map(|(i, e)| e.resolve(&format!("platforms[{i}]")))
                .collect::<Result<Vec<_>>>()?,
        };
        let config = Config {
            constants: raw.constants,
            platforms,
            mode_space: raw.mode_space,
            noise: raw.noise,
            spdc: raw.spdc,
            model: raw.model,
            search: raw.search,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

/// Read and validate a configuration file.
pub fn load_config(path: &Path) -> Result<Config> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Config::from_json(&text)
}

#[derive(Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
struct RawConfig {
    constants: PhysicalConstants,
    platforms: Option<Vec<PlatformEntry>>,
    mode_space: ModeSpaceParams,
    noise: NoiseParams,
    spdc: SpdcParams,
    model: ModelOptions,
    search: SearchRange,
}

/// A platform as written in a config file. Missing fields are filled from
/// `base`, or from the builtin preset of the same name.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PlatformEntry {
    name: String,
    base: Option<String>,
    modes: Option<u32>,
    chi: Option<f64>,
    eta_x: Option<f64>,
    eta_r: Option<f64>,
    eta_s: Option<f64>,
    eta_m: Option<f64>,
    multiplexed: Option<bool>,
    enc_detection: Option<Detection>,
    decoherence: Option<DecoherenceKind>,
    lifetime: Option<Lifetime>,
}

impl PlatformEntry {
    fn resolve(self, path: &str) -> Result<PlatformParams> {
        let base = match &self.base {
            Some(b) => Some(builtin_platform(b).ok_or_else(|| {
                Error::validation(format!("{path}.base"), format!("unknown preset {b:?}"))
            })?),
            None => builtin_platform(&self.name),
        };
        macro_rules! field {
            ($f:ident) => {
                match (self.$f, &base) {
                    (Some(v), _) => v,
                    (None, Some(b)) => b.$f.clone(),
                    (None, None) => {
                        return Err(Error::validation(
                            format!("{path}.{}", stringify!($f)),
                            "missing, and no preset to inherit it from",
                        ))
                    }
                }
            };
        }
        Ok(PlatformParams {
            modes: field!(modes),
            chi: field!(chi),
            eta_x: field!(eta_x),
            eta_r: field!(eta_r),
            eta_s: field!(eta_s),
            eta_m: field!(eta_m),
            multiplexed: field!(multiplexed),
            enc_detection: field!(enc_detection),
            decoherence: field!(decoherence),
            lifetime: field!(lifetime),
            name: self.name,
        })
    }
}

fn positive(field: &str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::validation(
            field,
            format!("{value} must be finite and positive"),
        ))
    }
}

fn unit_interval(field: &str, value: f64) -> Result<()> {
    if value > 0.0 && value <= 1.0 {
        Ok(())
    } else {
        Err(Error::validation(
            field,
            format!("{value} is outside (0, 1]"),
        ))
    }
}
