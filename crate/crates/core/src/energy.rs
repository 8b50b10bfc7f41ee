//! First-order radio energy model and battery accounting.

use serde::{Deserialize, Serialize};

/// Radio electronics and amplifier constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyModelParams {
    /// Electronics cost, J/bit.
    pub e_elec: f64,
    /// Amplifier cost, J/bit/m².
    pub eps_amp: f64,
}

impl Default for EnergyModelParams {
    fn default() -> Self {
        Self {
            e_elec: 5e-6,
            eps_amp: 1e-9,
        }
    }
}

impl EnergyModelParams {
    pub fn is_valid(&self) -> bool {
        self.e_elec > 0.0 && self.eps_amp > 0.0 && self.e_elec.is_finite() && self.eps_amp.is_finite()
    }
}

/// Energy to transmit `bits` over `distance` meters: `k (E_elec + eps_amp d²)`.
pub fn tx_energy(bits: u64, distance: f64, p: &EnergyModelParams) -> f64 {
    bits as f64 * (p.e_elec + p.eps_amp * distance * distance)
}

/// Energy to receive `bits`: `k E_elec`.
pub fn rx_energy(bits: u64, p: &EnergyModelParams) -> f64 {
    bits as f64 * p.e_elec
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Battery {
    residual: f64,
    initial: f64,
}

/// Result of a [`Battery::debit`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Debit {
    /// Energy actually drawn; less than requested when the battery ran dry.
    pub drawn: f64,
    /// The debit took the residual to zero.
    pub died: bool,
}

impl Battery {
    pub fn new(initial: f64) -> Self {
        Self {
            residual: initial,
            initial,
        }
    }

    pub fn with_residual(initial: f64, residual: f64) -> Self {
        Self {
            residual: residual.clamp(0.0, initial),
            initial,
        }
    }

    pub fn residual(&self) -> f64 {
        self.residual
    }

    pub fn initial(&self) -> f64 {
        self.initial
    }

    pub fn is_depleted(&self) -> bool {
        self.residual <= 0.0
    }

    pub fn can_afford(&self, amount: f64) -> bool {
        self.residual >= amount
    }

    /// Draws `amount` joules, flooring the residual at zero.
    pub fn debit(&mut self, amount: f64) -> Debit {
        debug_assert!(amount >= 0.0);
        if self.residual <= 0.0 {
            return Debit {
                drawn: 0.0,
                died: false,
            };
        }
        if amount >= self.residual {
            let drawn = self.residual;
            self.residual = 0.0;
            Debit { drawn, died: true }
        } else {
            self.residual -= amount;
            Debit {
                drawn: amount,
                died: false,
            }
        }
    }

    /// Empties the battery, returning what was left.
    pub fn drain(&mut self) -> f64 {
        std::mem::replace(&mut self.residual, 0.0)
    }
}
