//! Distance-dependent link rate and serialization delay.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Shortest link the rate formula is defined for, in meters.
pub const MIN_LINK_LENGTH: f64 = 1.0;

#[derive(Debug, Error, PartialEq)]
pub enum LinkError {
    #[error("link length {0} m is below the 1 m minimum")]
    DegenerateLength(f64),
}

/// Rate model `base_rate / sqrt(length)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkModel {
    /// Bits per second at a 1 m link.
    pub base_rate: f64,
}

impl Default for LinkModel {
    fn default() -> Self {
        Self {
            base_rate: 250_000.0,
        }
    }
}

impl LinkModel {
    pub fn rate(&self, length: f64) -> Result<f64, LinkError> {
        if !(length >= MIN_LINK_LENGTH) {
            return Err(LinkError::DegenerateLength(length));
        }
        Ok(self.base_rate / length.sqrt())
    }
}

/// Default-model link rate in bits/s.
pub fn link_rate(length: f64) -> Result<f64, LinkError> {
    LinkModel::default().rate(length)
}

/// Time to clock `bits` onto a link of `rate` bits/s. Propagation is ignored.
pub fn serialization_delay(bits: u64, rate: f64) -> f64 {
    debug_assert!(rate > 0.0);
    bits as f64 / rate
}
