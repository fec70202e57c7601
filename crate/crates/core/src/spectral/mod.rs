//! Tilted one-dimensional spatial Hamiltonian and its lowest bound states.
//!
//! Everything inside this module is dimensionless: lengths in units of
//! `ℓ* = (ħ²/(2m²a))^{1/3}` and energies in units of `ε* = m a ℓ*`, so the
//! operator reads `-d²/dζ² + u(ζ) + ζ`. Conversion to SI happens through
//! [`ScaleSystem`].

mod eigen;
mod hamiltonian;
mod potential;
mod refine;
mod scales;

pub use eigen::{Eigenpairs, SymTridiagonal};
pub use hamiltonian::{
    assemble_hamiltonian, lowest_eigenpairs, trapezoid, Hamiltonian, SpatialSpectrum,
};
pub use potential::{
    airy_level_estimate, build_potential, read_potential_table, well_extent, Grid, GridControls,
    PotentialSpec, SampledPotential,
};
pub use refine::{refine_check, ConvergenceReport, LevelConvergence};
pub use scales::{make_scales, ScaleSystem};
