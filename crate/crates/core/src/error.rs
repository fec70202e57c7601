use thiserror::Error;

use crate::kinematics::RegimeDiagnostics;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("position z = {z:e} m lies outside the right wedge (lapse = {lapse:e})")]
    WedgeViolation { z: f64, lapse: f64 },

    #[error("event (cT = {ct:e} m, Z = {z:e} m) is outside the right wedge Z + c^2/a > |cT|")]
    OutsideWedge { ct: f64, z: f64 },

    #[error("invalid configuration: {0}")]
    Validation(String),

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("eigensolver failed to converge: {0}")]
    Convergence(String),

    #[error("degenerate levels {n} and {k}: |E_n - E_k| = {gap:e}")]
    Degeneracy { n: usize, k: usize, gap: f64 },

    #[error("step size unstable: dt * max exit rate = {ratio:e} exceeds {limit}")]
    Stability { ratio: f64, limit: f64 },

    #[error("rate graph is disconnected ({components} components)")]
    Disconnected { components: usize },

    #[error("detailed balance violated between levels {m} and {n} (log mismatch {mismatch:e})")]
    DetailedBalance { m: usize, n: usize, mismatch: f64 },

    #[error("regime check failed: {}", .0.summary())]
    Regime(Box<RegimeDiagnostics>),

    #[error("table parse error: {0}")]
    Table(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
