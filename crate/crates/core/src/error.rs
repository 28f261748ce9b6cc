use crate::params::Topology;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("fock cutoff must be at least 1")]
    ZeroCutoff,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: &'static str },
    #[error("operation requires a {expected:?} cavity")]
    TopologyMismatch { expected: Topology },
    #[error("coefficient undefined at zero drive amplitude")]
    ZeroDrive,
    #[error("non-physical photon-number denominator {0:e}")]
    NonPhysicalDenominator(f64),
    #[error("matrix is singular (zero pivot at row {0})")]
    Singular(usize),
    #[error("steady-state solver did not converge (residual {residual:e})")]
    NotConverged { residual: f64 },
    #[error("steady-state vector has vanishing trace")]
    VanishingTrace,
    #[error("fock cutoff cap {cap} exceeded at omega-detuning {omega_detuning}, power {power_norm}")]
    CutoffCapExceeded {
        cap: usize,
        omega_detuning: f64,
        power_norm: f64,
    },
    #[error("no self-consistent root found")]
    NoRoot,
    #[error("no counterpart row at omega-detuning {omega_detuning}, power {power_norm}")]
    MissingCounterpart { omega_detuning: f64, power_norm: f64 },
    #[error("grid `{0}` is empty or malformed")]
    BadGrid(&'static str),
}
