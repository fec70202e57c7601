use serde::Serialize;

use crate::error::{Error, Result};
use crate::kinematics::RindlerFrame;
use crate::scalar::Real;

/// Natural units of the tilted well.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ScaleSystem<T> {
    /// `ℓ* = (ħ²/(2m²a))^{1/3}` in metres.
    pub length_unit: T,
    /// `ε* = m a ℓ*` in joules.
    pub energy_unit: T,
    /// `η = a ℓ* / c²`: lapse slope per unit length.
    pub lapse_slope: T,
    /// `b = β_a ε*`: Unruh inverse temperature in units of `1/ε*`.
    pub beta_dimless: T,
}

/// Builds the natural units for a particle of `mass` in `frame`.
pub fn make_scales<T: Real>(frame: &RindlerFrame<T>, mass: T) -> Result<ScaleSystem<T>> {
    if !(mass > T::zero()) || !mass.is_finite() {
        return Err(Error::Domain(format!(
            "mass must be positive, got {:e}",
            mass.as_f64()
        )));
    }
    let k = frame.constants();
    let a = frame.acceleration();
    // (ħ/m)² keeps the intermediate well inside f32 range.
    let reduced = k.hbar / mass;
    let length_unit = (reduced * reduced / (T::lit(2.0) * a)).cbrt();
    let energy_unit = mass * a * length_unit;
    Ok(ScaleSystem {
        length_unit,
        energy_unit,
        lapse_slope: a * length_unit / (k.c * k.c),
        beta_dimless: frame.unruh_beta() * energy_unit,
    })
}

impl<T: Real> ScaleSystem<T> {
    pub fn to_joule(&self, energy: T) -> T {
        energy * self.energy_unit
    }

    pub fn to_dimless_energy(&self, joule: T) -> T {
        joule / self.energy_unit
    }

    pub fn to_meters(&self, length: T) -> T {
        length * self.length_unit
    }

    pub fn to_dimless_length(&self, meters: T) -> T {
        meters / self.length_unit
    }

    /// Inverse temperature in 1/J from its dimensionless value.
    pub fn beta_to_si(&self, beta: T) -> T {
        beta / self.energy_unit
    }

    /// Dimensionless local inverse temperature `b (1 + η ζ)`.
    pub fn local_beta(&self, position: T) -> T {
        self.beta_dimless * (T::one() + self.lapse_slope * position)
    }
}
