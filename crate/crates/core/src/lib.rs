//! Numerical laboratory for a uniformly accelerated, spatially extended
//! spin-1/2 thermometer.
//!
//! The numerical modules are generic over [`Real`] (`f32` or `f64`); the
//! aliases below fix the double-precision types used by the scenario
//! pipeline and the command-line tool.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod error;
pub mod kinematics;
pub mod relaxation;
pub mod scalar;
pub mod scenarios;
pub mod spectral;
pub mod thermometry;

pub use error::{Error, Result};
pub use scalar::Real;

pub type PhysicalConstantsF64 = kinematics::PhysicalConstants<f64>;
pub type RindlerFrameF64 = kinematics::RindlerFrame<f64>;
pub type RindlerFrameF32 = kinematics::RindlerFrame<f32>;
pub type ScaleSystemF64 = spectral::ScaleSystem<f64>;
pub type GridF64 = spectral::Grid<f64>;
pub type PotentialSpecF64 = spectral::PotentialSpec<f64>;
pub type HamiltonianF64 = spectral::Hamiltonian<f64>;
pub type SpatialSpectrumF64 = spectral::SpatialSpectrum<f64>;
pub type SpatialSpectrumF32 = spectral::SpatialSpectrum<f32>;
pub type SpinCouplingF64 = thermometry::SpinCoupling<f64>;
pub type LevelSetF64 = thermometry::LevelSet<f64>;
pub type SpinThermalStateF64 = thermometry::SpinThermalState<f64>;
pub type RateSystemF64 = relaxation::RateSystem<f64>;
pub type PopulationStateF64 = relaxation::PopulationState<f64>;
