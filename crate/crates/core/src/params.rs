//! Physical parameters of the spin-cavity unit and the probe drive.
//!
//! All rates are angular (the same units as the frequencies). The library
//! never needs absolute frequencies, only detunings, so the defaults put
//! the cavity at zero and measure everything in units of the total cavity
//! decay rate.

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Topology {
    /// One partially transmitting mirror; light is only reflected.
    SingleSided,
    /// Two identical partially transmitting mirrors.
    DoubleSided,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    pub omega_c: f64,
    pub omega_x: f64,
    pub g: f64,
    /// Decay rate through one input/output mirror.
    pub kappa: f64,
    /// Side leakage and other loss.
    pub kappa_s: f64,
    /// Spontaneous emission rate γ_∥.
    pub gamma_par: f64,
    /// Pure dephasing rate γ*.
    pub gamma_star: f64,
    pub topology: Topology,
}

impl SystemParams {
    /// Build a parameter set normalized to κ_tot = 1, with κ_s = `side_ratio`·κ.
    pub fn normalized(
        topology: Topology,
        g: f64,
        side_ratio: f64,
        gamma_par: f64,
        gamma_star: f64,
        qd_detuning: f64,
    ) -> Self {
        let ports = match topology {
            Topology::SingleSided => 1.0,
            Topology::DoubleSided => 2.0,
        };
        let kappa = 1.0 / (ports + side_ratio);
        Self {
            omega_c: 0.0,
            omega_x: qd_detuning,
            g,
            kappa,
            kappa_s: side_ratio * kappa,
            gamma_par,
            gamma_star,
            topology,
        }
    }

    /// Strong-coupling parameter set used throughout: g = 2.4 κ_tot,
    /// κ_s = 0.5 κ, γ_∥ = 0.1 κ_tot, γ* = 0, QD resonant with the cavity.
    pub fn defaults(topology: Topology) -> Self {
        Self::normalized(topology, 2.4, 0.5, 0.1, 0.0, 0.0)
    }

    pub fn single_sided_defaults() -> Self {
        Self::defaults(Topology::SingleSided)
    }

    pub fn double_sided_defaults() -> Self {
        Self::defaults(Topology::DoubleSided)
    }

    /// The same cavity with the QD transition uncoupled.
    pub fn cold(&self) -> Self {
        Self { g: 0.0, ..*self }
    }

    pub fn with_coupling(&self, g: f64) -> Self {
        Self { g, ..*self }
    }

    /// Total dipole decay γ = γ_∥ + 2γ*.
    pub fn gamma(&self) -> f64 {
        self.gamma_par + 2.0 * self.gamma_star
    }

    /// Total cavity field decay κ+κ_s (single-sided) or 2κ+κ_s (double-sided).
    pub fn kappa_total(&self) -> f64 {
        match self.topology {
            Topology::SingleSided => self.kappa + self.kappa_s,
            Topology::DoubleSided => 2.0 * self.kappa + self.kappa_s,
        }
    }

    /// Critical photon number n_c = γ_∥ γ / 8g², `None` when g = 0.
    pub fn critical_photon_number(&self) -> Option<f64> {
        (self.g > 0.0).then(|| self.gamma_par * self.gamma() / (8.0 * self.g * self.g))
    }

    /// Probe angular frequency for a detuning in units of κ_tot from the cavity.
    pub fn omega_at(&self, detuning: f64) -> f64 {
        self.omega_c + detuning * self.kappa_total()
    }

    /// (ω − ω_c)/κ_tot.
    pub fn detuning_of(&self, omega: f64) -> f64 {
        (omega - self.omega_c) / self.kappa_total()
    }

    pub fn validate(&self) -> Result<()> {
        let checks: [(&'static str, f64); 5] = [
            ("g", self.g),
            ("kappa", self.kappa),
            ("kappa_s", self.kappa_s),
            ("gamma_par", self.gamma_par),
            ("gamma_star", self.gamma_star),
        ];
        for (name, v) in checks {
            if !v.is_finite() {
                return Err(Error::InvalidParameter {
                    name,
                    reason: "must be finite",
                });
            }
            if v < 0.0 {
                return Err(Error::InvalidParameter {
                    name,
                    reason: "must be non-negative",
                });
            }
        }
        if !(self.omega_c.is_finite() && self.omega_x.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "omega",
                reason: "must be finite",
            });
        }
        if self.kappa_total() <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "kappa",
                reason: "total cavity decay must be positive",
            });
        }
        Ok(())
    }
}

/// Monochromatic coherent probe.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Drive {
    pub omega: f64,
    /// Input power in photons per cavity lifetime.
    pub power_norm: f64,
}

impl Drive {
    pub fn new(omega: f64, power_norm: f64) -> Self {
        Self { omega, power_norm }
    }

    /// Drive at a detuning in units of κ_tot from the cavity of `params`.
    pub fn at_detuning(params: &SystemParams, detuning: f64, power_norm: f64) -> Self {
        Self::new(params.omega_at(detuning), power_norm)
    }

    /// Photon flux P = P̄ κ_tot.
    pub fn flux(&self, params: &SystemParams) -> f64 {
        self.power_norm * params.kappa_total()
    }

    /// Input amplitude α_in = √P, taken real and positive.
    pub fn amplitude(&self, params: &SystemParams) -> f64 {
        libm::sqrt(self.flux(params))
    }

    pub fn validate(&self) -> Result<()> {
        if !self.omega.is_finite() {
            return Err(Error::InvalidParameter {
                name: "omega",
                reason: "must be finite",
            });
        }
        if !(self.power_norm.is_finite() && self.power_norm >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "power_norm",
                reason: "must be finite and non-negative",
            });
        }
        Ok(())
    }
}
