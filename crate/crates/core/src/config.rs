//! Shared tolerances and internal-precision settings.

use serde::{Deserialize, Serialize};

/// Default internal precision in significant decimal digits.
///
/// Hankel conditioning grows exponentially with the order, so the
/// moment-to-recurrence machinery runs in software floats well beyond
/// double precision by default. 16 digits reproduces plain `f64`
/// behaviour (useful to demonstrate the breakdown).
pub const DEFAULT_PRECISION_DIGITS: u32 = 60;

/// Relative positive-semidefiniteness slack for Hankel matrices and effects.
pub const TOL_PSD: f64 = 1e-10;
/// Allowed deviation of an effect sum from the identity.
pub const TOL_SUM: f64 = 1e-10;
/// Relative-change threshold for a stabilized Krein integral.
pub const TOL_KREIN: f64 = 1e-6;
/// Fraction of total mass allowed in the unbounded tail cells before a warning.
pub const TOL_TAIL: f64 = 1e-6;
/// Default tolerance for POVM reconstruction round trips.
pub const TOL_RECONSTRUCTION: f64 = 1e-10;

/// Tolerance bundle threaded through the analysis routines.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Tolerances {
    pub psd: f64,
    pub sum: f64,
    pub krein: f64,
    pub tail: f64,
    pub reconstruction: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            psd: TOL_PSD,
            sum: TOL_SUM,
            krein: TOL_KREIN,
            tail: TOL_TAIL,
            reconstruction: TOL_RECONSTRUCTION,
        }
    }
}

impl Tolerances {
    /// Set a tolerance by name; used by the CLI `--tol name=value` flag.
    pub fn set(&mut self, name: &str, value: f64) -> crate::Result<()> {
        if !(value > 0.0) {
            return Err(crate::Error::InvalidInput(format!(
                "tolerance {name} must be positive, got {value}"
            )));
        }
        match name {
            "psd" => self.psd = value,
            "sum" => self.sum = value,
            "krein" => self.krein = value,
            "tail" => self.tail = value,
            "reconstruction" => self.reconstruction = value,
            _ => {
                return Err(crate::Error::InvalidInput(format!(
                    "unknown tolerance {name:?} (expected psd, sum, krein, tail or reconstruction)"
                )))
            }
        }
        Ok(())
    }
}
