//! Werner-state entanglement: concurrence and entanglement of formation as
//! functions of the visibility V of `ρ = (1-V)/4·I + V|ψ⟩⟨ψ|`.

use crate::error::{Error, Result};
use crate::link::{visibility_at, Decoherence};

/// Visibility at and below which a Werner state is separable.
pub const SEPARABLE_VISIBILITY: f64 = 1.0 / 3.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WernerState {
    visibility: f64,
}

impl WernerState {
    pub fn new(visibility: f64) -> Result<Self> {
        check_visibility(visibility)?;
        Ok(Self { visibility })
    }

    pub fn visibility(&self) -> f64 {
        self.visibility
    }

    pub fn concurrence(&self) -> f64 {
        concurrence_unchecked(self.visibility)
    }

    pub fn entanglement_of_formation(&self) -> f64 {
        ef_from_concurrence(self.concurrence())
    }

    pub fn is_entangled(&self) -> bool {
        self.visibility > SEPARABLE_VISIBILITY
    }
}

/// `max(0, (3V-1)/2)`.
pub fn concurrence(visibility: f64) -> Result<f64> {
    check_visibility(visibility)?;
    Ok(concurrence_unchecked(visibility))
}

/// Entanglement of formation in ebits: `h((1+√(1-C²))/2)` with the binary
/// entropy `h`.
pub fn entanglement_of_formation(visibility: f64) -> Result<f64> {
    check_visibility(visibility)?;
    Ok(ef_unchecked(visibility))
}

/// E_F of one mode after storing for `t_us`.
pub fn ef_of_mode(decoherence: Decoherence, t_us: f64, chi_eff0: f64) -> f64 {
    ef_unchecked(visibility_at(decoherence, t_us, chi_eff0))
}

pub(crate) fn ef_unchecked(visibility: f64) -> f64 {
    ef_from_concurrence(concurrence_unchecked(visibility))
}

fn concurrence_unchecked(visibility: f64) -> f64 {
    ((3.0 * visibility - 1.0) / 2.0).max(0.0)
}

fn ef_from_concurrence(c: f64) -> f64 {
    if c <= 0.0 {
        return 0.0;
    }
    // smaller root (1-√(1-C²))/2, written without cancellation so that
    // E_F stays positive for C ~ 1e-9
    let root = (1.0 - c * c).max(0.0).sqrt();
    let y = c * c / (2.0 * (1.0 + root));
    binary_entropy(y)
}

/// `-x·log₂x - (1-x)·log₂(1-x)` with `0·log 0 = 0`.
pub fn binary_entropy(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        return 0.0;
    }
    -(x * x.log2() + (1.0 - x) * (-x).ln_1p() / std::f64::consts::LN_2)
}

fn check_visibility(v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::arg("visibility", format!("{v} is outside [0, 1]")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::DecoherenceKind;
    use approx::assert_relative_eq;

    #[test]
    fn concurrence_values() {
        assert_eq!(concurrence(1.0).unwrap(), 1.0);
        assert_eq!(concurrence(1.0 / 3.0).unwrap(), 0.0);
        assert_relative_eq!(
            concurrence(10.0 / 11.0).unwrap(),
            19.0 / 22.0,
            max_relative = 1e-15
        );
        assert!(concurrence(1.1).is_err());
        assert!(concurrence(-0.1).is_err());
    }

    #[test]
    fn ef_values() {
        assert_eq!(entanglement_of_formation(1.0).unwrap(), 1.0);
        assert_eq!(entanglement_of_formation(0.2).unwrap(), 0.0);
        assert_eq!(entanglement_of_formation(0.0).unwrap(), 0.0);
        assert_relative_eq!(
            entanglement_of_formation(10.0 / 11.0).unwrap(),
            0.808_000_511_143_916_8,
            max_relative = 1e-13
        );
        assert!(entanglement_of_formation(1.0 / 3.0 + 1e-9).unwrap() > 0.0);
    }

    #[test]
    fn entropy_edges() {
        assert_eq!(binary_entropy(0.0), 0.0);
        assert_eq!(binary_entropy(1.0), 0.0);
        assert_eq!(binary_entropy(0.5), 1.0);
        assert_relative_eq!(
            binary_entropy(0.1),
            binary_entropy(0.9),
            max_relative = 1e-14
        );
    }

    #[test]
    fn werner_state() {
        let w = WernerState::new(10.0 / 11.0).unwrap();
        assert!(w.is_entangled());
        assert!(!WernerState::new(1.0 / 3.0).unwrap().is_entangled());
        assert!(WernerState::new(2.0).is_err());
    }

    #[test]
    fn ef_of_mode_values() {
        let k_min_mode = Decoherence {
            kind: DecoherenceKind::Gaussian,
            tau_us: 1e5 / 10.0,
        };
        assert_relative_eq!(
            ef_of_mode(k_min_mode, 0.0, 0.05),
            0.808_000_511_143_916_8,
            max_relative = 1e-13
        );

        let k_max_mode = Decoherence {
            kind: DecoherenceKind::Gaussian,
            tau_us: 1e5 / 1000.0,
        };
        assert_eq!(ef_of_mode(k_max_mode, 10.0 * 100.0, 0.05), 0.0);

        let k100 = Decoherence {
            kind: DecoherenceKind::Gaussian,
            tau_us: 1e5 / 100.0,
        };
        assert_relative_eq!(
            ef_of_mode(k100, 750.0, 0.05),
            0.690_170_987_559_036,
            max_relative = 1e-12
        );
    }

    #[test]
    fn chain_of_bounds_on_grid() {
        for i in 0..=1000 {
            let v = i as f64 / 1000.0;
            let ef = entanglement_of_formation(v).unwrap();
            let c = concurrence(v).unwrap();
            assert!(
                0.0 <= ef && ef <= c + 1e-15 && c <= v,
                "v={v} ef={ef} c={c}"
            );
        }
    }
}
