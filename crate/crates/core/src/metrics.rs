//! Relative mean-square error and its dB form.

use crate::error::{check_len, Error, Result};
use crate::sparse::{squared_distance, squared_norm};
use crate::C64;

/// Reporting floor for exact recovery (`-∞` dB).
pub const DB_FLOOR: f64 = -120.0;

/// `‖w − ŵ‖² / ‖w‖²`, linear scale.
pub fn rmse(truth: &[C64], estimate: &[C64]) -> Result<f64> {
    check_len(truth.len(), estimate.len())?;
    let reference = squared_norm(truth);
    if reference == 0.0 {
        return Err(Error::ZeroReference);
    }
    Ok(squared_distance(truth, estimate) / reference)
}

/// `10 log10(x)`, floored at [`DB_FLOOR`].
pub fn to_db(linear: f64) -> f64 {
    if linear <= 0.0 {
        DB_FLOOR
    } else {
        (10.0 * linear.log10()).max(DB_FLOOR)
    }
}

pub fn rmse_db(truth: &[C64], estimate: &[C64]) -> Result<f64> {
    rmse(truth, estimate).map(to_db)
}
