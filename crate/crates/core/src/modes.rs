//! Wavevector mode spectrum of the memory: the lifetime law `τ(K) = γ/K`,
//! the thermal constant γ, mode counting and density-weighted averages.
//!
//! The number of modes in `[K, K+dK]` is `2πKβ dK`. Averages over the
//! spectrum use that density as the weight, discretized with a composite
//! trapezoid rule on a fixed linear grid.

use crate::error::{Error, Result};
use crate::params::{ModeSpaceParams, PhysicalConstants};

/// µs/mm per s/m.
const S_PER_M_TO_US_PER_MM: f64 = 1e3;

#[derive(Debug, Clone, PartialEq)]
pub struct ModeSpace {
    pub k_min: f64,
    pub k_max: f64,
    pub beta: f64,
    /// Lifetime constant γ in µs·mm⁻¹.
    pub gamma: f64,
    grid: Vec<f64>,
    /// Trapezoid weights times the density, normalized to sum to one.
    weights: Vec<f64>,
}

impl ModeSpace {
    pub fn new(k_min: f64, k_max: f64, beta: f64, gamma: f64, grid_points: usize) -> Result<Self> {
        if !(k_min > 0.0) {
            return Err(Error::arg("k_min", format!("{k_min} must be positive")));
        }
        if !(k_max > k_min) {
            return Err(Error::arg(
                "k_max",
                format!("{k_max} must exceed k_min = {k_min}"),
            ));
        }
        if !(beta > 0.0) {
            return Err(Error::arg("beta", format!("{beta} must be positive")));
        }
        if !(gamma > 0.0) {
            return Err(Error::arg("gamma", format!("{gamma} must be positive")));
        }
        if grid_points < 2 {
            return Err(Error::arg("grid_points", "need at least 2 points"));
        }
        let n = grid_points;
        let h = (k_max - k_min) / (n - 1) as f64;
        let grid: Vec<f64> = (0..n)
            .map(|i| {
                if i == n - 1 {
                    k_max
                } else {
                    k_min + h * i as f64
                }
            })
            .collect();
        let mut weights: Vec<f64> = grid
            .iter()
            .enumerate()
            .map(|(i, &k)| {
                let end = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
                end * k
            })
            .collect();
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);
        Ok(Self {
            k_min,
            k_max,
            beta,
            gamma,
            grid,
            weights,
        })
    }

    pub fn from_params(params: &ModeSpaceParams, constants: &PhysicalConstants) -> Result<Self> {
        let gamma = match params.gamma_us_mm {
            Some(g) => g,
            None => gamma_from_temperature(
                params.temperature_k,
                constants.atomic_mass_kg,
                constants.boltzmann_j_per_k,
            )?,
        };
        Self::new(
            params.k_min_per_mm,
            params.k_max_per_mm,
            params.beta_mm2,
            gamma,
            params.grid_points,
        )
    }

    pub fn tau(&self, k: f64) -> Result<f64> {
        tau_of_k(k, self.gamma)
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn mode_count(&self) -> u64 {
        mode_count(self.k_min, self.k_max, self.beta)
    }

    /// `∫ f(K)·2πKβ dK / ∫ 2πKβ dK` over `[k_min, k_max]`.
    pub fn weighted_average(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.grid
            .iter()
            .zip(&self.weights)
            .map(|(&k, &w)| w * f(k))
            .sum()
    }

    /// Same average for an `f` that vanishes above `k_cut`. The trapezoid
    /// grid, with as many points as the full one, spans only
    /// `[k_min, min(k_cut, k_max)]`.
    pub fn weighted_average_below(&self, k_cut: f64, f: impl Fn(f64) -> f64) -> f64 {
        let hi = k_cut.min(self.k_max);
        if !(hi > self.k_min) {
            return 0.0;
        }
        if hi == self.k_max {
            return self.weighted_average(f);
        }
        let n = self.grid.len();
        let h = (hi - self.k_min) / (n - 1) as f64;
        let sum: f64 = (0..n)
            .map(|i| {
                let k = if i == n - 1 {
                    hi
                } else {
                    self.k_min + h * i as f64
                };
                let end = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
                end * k * f(k)
            })
            .sum();
        // the trapezoid rule is exact for the linear weight alone
        let total = (self.k_max * self.k_max - self.k_min * self.k_min) / 2.0;
        sum * h / total
    }
}

/// `γ = √(m / (k_B T))`, in µs·mm⁻¹.
pub fn gamma_from_temperature(temperature_k: f64, mass_kg: f64, boltzmann: f64) -> Result<f64> {
    if !(temperature_k > 0.0) {
        return Err(Error::arg(
            "temperature_k",
            format!("{temperature_k} must be positive"),
        ));
    }
    if !(mass_kg > 0.0) {
        return Err(Error::arg("mass_kg", format!("{mass_kg} must be positive")));
    }
    Ok((mass_kg / (boltzmann * temperature_k)).sqrt() * S_PER_M_TO_US_PER_MM)
}

/// Spin-wave lifetime `γ/K` in µs.
pub fn tau_of_k(k: f64, gamma: f64) -> Result<f64> {
    if !(k > 0.0) {
        return Err(Error::arg("k", format!("wavevector {k} must be positive")));
    }
    Ok(gamma / k)
}

/// Number of polarization-paired modes in the band,
/// `round(πβ(K_max² - K_min²) / 2)`.
pub fn mode_count(k_min: f64, k_max: f64, beta: f64) -> u64 {
    let raw = std::f64::consts::PI * beta * (k_max * k_max - k_min * k_min) / 2.0;
    raw.max(0.0).round() as u64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{BOLTZMANN_J_PER_K, RB87_MASS_KG};
    use approx::assert_relative_eq;

    fn default_space() -> ModeSpace {
        ModeSpace::new(10.0, 1000.0, 3.5e-3, 1e5, 4096).unwrap()
    }

    #[test]
    fn gamma_at_one_microkelvin() {
        let g = gamma_from_temperature(1e-6, RB87_MASS_KG, BOLTZMANN_J_PER_K).unwrap();
        assert_relative_eq!(g, 102_238.766_277_416_37, max_relative = 1e-12);
        let g4 = gamma_from_temperature(4e-6, RB87_MASS_KG, BOLTZMANN_J_PER_K).unwrap();
        assert_relative_eq!(g4, g / 2.0, max_relative = 1e-14);
        assert!(gamma_from_temperature(0.0, RB87_MASS_KG, BOLTZMANN_J_PER_K).is_err());
    }

    #[test]
    fn lifetimes() {
        assert_eq!(tau_of_k(10.0, 1e5).unwrap(), 10_000.0);
        assert_eq!(tau_of_k(1000.0, 1e5).unwrap(), 100.0);
        assert_eq!(tau_of_k(100.0, 1e5).unwrap(), 1000.0);
        assert!(tau_of_k(0.0, 1e5).is_err());
        let s = default_space();
        assert!(s.tau(s.k_min).unwrap() >= s.tau(s.k_max).unwrap());
    }

    #[test]
    fn counts() {
        assert_eq!(mode_count(10.0, 1000.0, 3.5e-3), 5497);
        assert_eq!(mode_count(10.0, 10.0, 3.5e-3), 0);
        assert_eq!(mode_count(10.0, 100.0, 3.5e-3), 54);
        assert_eq!(default_space().mode_count(), 5497);
    }

    #[test]
    fn average_of_constant() {
        let s = default_space();
        assert_relative_eq!(s.weighted_average(|_| 0.37), 0.37, max_relative = 1e-12);
    }

    #[test]
    fn average_of_k() {
        // (2/3)(b³-a³)/(b²-a²) for a=10, b=1000
        let s = default_space();
        assert_relative_eq!(
            s.weighted_average(|k| k),
            666.732_673_267_326_7,
            max_relative = 1e-7
        );
    }

    #[test]
    fn truncated_average() {
        let s = default_space();
        let step = |k: f64| if k <= 400.0 { 1.0 } else { 0.0 };
        let exact = (400.0f64.powi(2) - 100.0) / (1000.0f64.powi(2) - 100.0);
        assert_relative_eq!(
            s.weighted_average_below(400.0, step),
            exact,
            max_relative = 1e-13
        );
        assert_eq!(s.weighted_average_below(5.0, |_| 1.0), 0.0);
        assert_eq!(
            s.weighted_average_below(2e3, |k| k),
            s.weighted_average(|k| k)
        );
    }

    #[test]
    fn rejects_bad_space() {
        assert!(ModeSpace::new(0.0, 10.0, 1.0, 1.0, 10).is_err());
        assert!(ModeSpace::new(10.0, 10.0, 1.0, 1.0, 10).is_err());
        assert!(ModeSpace::new(1.0, 10.0, 1.0, 1.0, 1).is_err());
    }

    #[test]
    fn thermal_gamma_from_params() {
        let params = ModeSpaceParams {
            gamma_us_mm: None,
            ..Default::default()
        };
        let s = ModeSpace::from_params(&params, &PhysicalConstants::default()).unwrap();
        assert_relative_eq!(s.gamma, 102_238.766_277_416_37, max_relative = 1e-12);
    }
}
