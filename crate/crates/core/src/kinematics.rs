//! Kinematics of a uniformly accelerated, Born-rigid frame.
//!
//! Kottler-Møller coordinates `(t, x, y, z)` cover the right Rindler wedge
//! `Z + c²/a > |cT|`. Every point at fixed `z` follows a hyperbola with
//! proper acceleration `a / N(z)`, where `N(z) = 1 + a z / c²` is the lapse.
//! The local inverse Unruh temperature inherits the same linear profile.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::{artanh, Real};

/// CODATA 2018 values in SI units.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PhysicalConstants<T> {
    /// Reduced Planck constant (J s).
    pub hbar: T,
    /// Speed of light (m/s).
    pub c: T,
    /// Boltzmann constant (J/K).
    pub k_b: T,
    /// Electron mass (kg).
    pub m_e: T,
    /// Elementary charge (C).
    pub e: T,
}

impl<T: Real> PhysicalConstants<T> {
    pub fn codata2018() -> Self {
        Self {
            hbar: T::lit(1.054_571_817e-34),
            c: T::lit(2.997_924_58e8),
            k_b: T::lit(1.380_649e-23),
            m_e: T::lit(9.109_383_701_5e-31),
            e: T::lit(1.602_176_634e-19),
        }
    }
}

impl<T: Real> Default for PhysicalConstants<T> {
    fn default() -> Self {
        Self::codata2018()
    }
}

/// Event in Kottler-Møller coordinates: `t` in seconds, lengths in metres.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EventKm<T> {
    pub t: T,
    pub x: T,
    pub y: T,
    pub z: T,
}

/// Event in inertial Minkowski coordinates: `t` in seconds, lengths in metres.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EventMinkowski<T> {
    pub t: T,
    pub x: T,
    pub y: T,
    pub z: T,
}

/// A uniformly accelerated frame anchored on the hyperbola through `z = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RindlerFrame<T> {
    a: T,
    constants: PhysicalConstants<T>,
}

impl<T: Real> RindlerFrame<T> {
    pub fn new(a: T) -> Result<Self> {
        Self::with_constants(a, PhysicalConstants::codata2018())
    }

    pub fn with_constants(a: T, constants: PhysicalConstants<T>) -> Result<Self> {
        if !(a > T::zero()) || !a.is_finite() {
            return Err(Error::Domain(format!(
                "proper acceleration must satisfy a > 0, got {:e}",
                a.as_f64()
            )));
        }
        Ok(Self { a, constants })
    }

    pub fn acceleration(&self) -> T {
        self.a
    }

    pub fn constants(&self) -> &PhysicalConstants<T> {
        &self.constants
    }

    /// Distance `c²/a` from the origin to the Rindler horizon.
    pub fn horizon_distance(&self) -> T {
        let c = self.constants.c;
        c * c / self.a
    }

    /// `N(z) = 1 + a z / c²`. Total; callers enforce `N > 0`.
    pub fn lapse(&self, z: T) -> T {
        let c = self.constants.c;
        T::one() + self.a * z / (c * c)
    }

    fn checked_lapse(&self, z: T) -> Result<T> {
        let n = self.lapse(z);
        if n > T::zero() {
            Ok(n)
        } else {
            Err(Error::WedgeViolation {
                z: z.as_f64(),
                lapse: n.as_f64(),
            })
        }
    }

    /// Proper acceleration `a / N(z)` of the hyperbola at height `z`.
    pub fn local_acceleration(&self, z: T) -> Result<T> {
        Ok(self.a / self.checked_lapse(z)?)
    }

    /// Proper time `N(z) t` elapsed at height `z` during coordinate time `t`.
    pub fn proper_time(&self, z: T, t: T) -> Result<T> {
        Ok(self.checked_lapse(z)? * t)
    }

    /// `β_a = 2πc / (ħ a)` in 1/J.
    pub fn unruh_beta(&self) -> T {
        let k = &self.constants;
        T::TAU() * k.c / (k.hbar * self.a)
    }

    /// `T_a = ħ a / (2π c k_B)` in kelvin.
    pub fn unruh_temperature(&self) -> T {
        let k = &self.constants;
        k.hbar * self.a / (T::TAU() * k.c * k.k_b)
    }

    /// Local inverse temperature `β_a N(z)` in 1/J.
    pub fn local_inverse_temperature(&self, z: T) -> Result<T> {
        Ok(self.unruh_beta() * self.checked_lapse(z)?)
    }

    /// Maps a KM event to inertial coordinates.
    pub fn km_to_minkowski(&self, ev: EventKm<T>) -> Result<EventMinkowski<T>> {
        self.checked_lapse(ev.z)?;
        let c = self.constants.c;
        let horizon = self.horizon_distance();
        let rapidity = self.a * ev.t / c;
        let (sh, ch) = (rapidity.sinh(), rapidity.cosh());
        let half_sh = (rapidity * T::lit(0.5)).sinh();
        // Z = z cosh + (c²/a)(cosh - 1), written without cancellation.
        let z = ev.z * ch + horizon * T::lit(2.0) * half_sh * half_sh;
        let ct = (ev.z + horizon) * sh;
        Ok(EventMinkowski {
            t: ct / c,
            x: ev.x,
            y: ev.y,
            z,
        })
    }

    /// Inverse of [`Self::km_to_minkowski`] inside the right wedge.
    pub fn minkowski_to_km(&self, ev: EventMinkowski<T>) -> Result<EventKm<T>> {
        let c = self.constants.c;
        let horizon = self.horizon_distance();
        let ct = c * ev.t;
        let radius = ev.z + horizon;
        if !(radius - ct.abs() > T::zero()) {
            return Err(Error::OutsideWedge {
                ct: ct.as_f64(),
                z: ev.z.as_f64(),
            });
        }
        let rho = ((radius - ct) * (radius + ct)).sqrt();
        // rho - c²/a = (Z² + 2 Z c²/a - (cT)²) / (rho + c²/a)
        let z = (ev.z * (ev.z + T::lit(2.0) * horizon) - ct * ct) / (rho + horizon);
        let t = artanh(ct / radius) * c / self.a;
        Ok(EventKm {
            t,
            x: ev.x,
            y: ev.y,
            z,
        })
    }

    /// Lorentz boost with rapidity `a t / c` in the `(cT, Z)` plane.
    pub fn boost_matrix(&self, t: T) -> BoostMatrix<T> {
        BoostMatrix::from_rapidity(self.a * t / self.constants.c)
    }

    /// Position `(cT, Z)` of the fiducial observer at coordinate time `t`.
    pub fn fiducial_worldline(&self, t: T) -> [T; 2] {
        let horizon = self.horizon_distance();
        let rapidity = self.a * t / self.constants.c;
        let half_sh = (rapidity * T::lit(0.5)).sinh();
        [
            horizon * rapidity.sinh(),
            horizon * T::lit(2.0) * half_sh * half_sh,
        ]
    }

    /// Re-anchors the frame on the hyperbola through `z0`.
    pub fn recenter(&self, z0: T) -> Result<Recentered<T>> {
        let lapse = self.checked_lapse(z0)?;
        let frame = Self::with_constants(self.a / lapse, self.constants)?;
        Ok(Recentered {
            frame,
            origin_shift: z0,
            time_dilation: lapse,
        })
    }
}

/// A frame re-anchored at `z0`, with the coordinate bookkeeping between the
/// two descriptions: `z̄ = z - z0`, `t̄ = N(z0) t`, `ā = a / N(z0)`, and the
/// inertial `Z` axis shifted by `z0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Recentered<T> {
    pub frame: RindlerFrame<T>,
    pub origin_shift: T,
    pub time_dilation: T,
}

impl<T: Real> Recentered<T> {
    pub fn position(&self, z: T) -> T {
        z - self.origin_shift
    }

    pub fn time(&self, t: T) -> T {
        self.time_dilation * t
    }

    /// Converts an original KM event into the re-anchored coordinates.
    pub fn event(&self, ev: EventKm<T>) -> EventKm<T> {
        EventKm {
            t: self.time(ev.t),
            x: ev.x,
            y: ev.y,
            z: self.position(ev.z),
        }
    }

    /// Inertial event of a re-anchored KM event, expressed in the original
    /// inertial coordinates.
    pub fn km_to_minkowski(&self, ev: EventKm<T>) -> Result<EventMinkowski<T>> {
        let mut out = self.frame.km_to_minkowski(ev)?;
        out.z = out.z + self.origin_shift;
        Ok(out)
    }
}

/// 2×2 boost acting on `(cT, Z)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoostMatrix<T>(pub [[T; 2]; 2]);

impl<T: Real> BoostMatrix<T> {
    pub fn from_rapidity(rapidity: T) -> Self {
        let (sh, ch) = (rapidity.sinh(), rapidity.cosh());
        Self([[ch, sh], [sh, ch]])
    }

    pub fn identity() -> Self {
        Self([[T::one(), T::zero()], [T::zero(), T::one()]])
    }

    pub fn determinant(&self) -> T {
        let m = &self.0;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    pub fn compose(&self, rhs: &Self) -> Self {
        let (a, b) = (&self.0, &rhs.0);
        let mut out = [[T::zero(); 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        Self(out)
    }

    pub fn apply(&self, v: [T; 2]) -> [T; 2] {
        let m = &self.0;
        [
            m[0][0] * v[0] + m[0][1] * v[1],
            m[1][0] * v[0] + m[1][1] * v[1],
        ]
    }
}

/// Upper bounds for the dimensionless ratios that keep the one-particle,
/// weak-lapse description valid. The defaults stand in for "≪ 1".
#[derive(Clone, Copy, Debug, PartialEq, Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RegimeThresholds {
    /// Bound on `ħa / (c · m c²)` (pair creation).
    pub pair: f64,
    /// Bound on `a z / c²` over the thermometer extent.
    pub extent: f64,
    /// Bound on `ħω / (m c²)` (Zeeman energy vs rest energy).
    pub zeeman: f64,
}

impl Default for RegimeThresholds {
    fn default() -> Self {
        Self {
            pair: 1e-3,
            extent: 1e-2,
            zeeman: 1e-3,
        }
    }
}

/// Ratios reported by [`regime_check`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RegimeDiagnostics {
    pub pair_ratio: f64,
    pub extent_ratio: f64,
    pub zeeman_ratio: f64,
    pub thresholds: RegimeThresholds,
    pub pair_ok: bool,
    pub extent_ok: bool,
    pub zeeman_ok: bool,
    /// Ratios that pass but sit within a decade of their bound.
    pub warnings: Vec<String>,
}

impl RegimeDiagnostics {
    pub fn passed(&self) -> bool {
        self.pair_ok && self.extent_ok && self.zeeman_ok
    }

    pub fn summary(&self) -> String {
        let flag = |ok: bool| if ok { "PASS" } else { "FAIL" };
        let mut out = format!(
            "hbar*a/(c*m*c^2) = {:.3e} [{}], a*z/c^2 = {:.3e} [{}], hbar*omega/(m*c^2) = {:.3e} [{}]",
            self.pair_ratio,
            flag(self.pair_ok),
            self.extent_ratio,
            flag(self.extent_ok),
            self.zeeman_ratio,
            flag(self.zeeman_ok),
        );
        for w in &self.warnings {
            out.push_str("; warning: ");
            out.push_str(w);
        }
        out
    }
}

/// Checks the validity conditions `ħa/c ≪ mc²`, `a z/c² ≪ 1` and `ħω ≪ mc²`.
pub fn regime_check<T: Real>(
    frame: &RindlerFrame<T>,
    mass: T,
    z_extent: T,
    omega: T,
    thresholds: RegimeThresholds,
) -> RegimeDiagnostics {
    let k = frame.constants();
    let rest = mass * k.c * k.c;
    let pair_ratio = (k.hbar * frame.acceleration() / k.c / rest).as_f64();
    let extent_ratio = (frame.acceleration() * z_extent.abs() / (k.c * k.c)).as_f64();
    let zeeman_ratio = (k.hbar * omega.abs() / rest).as_f64();

    let mut warnings = Vec::new();
    let mut check = |name: &str, value: f64, bound: f64| {
        let ok = value < bound;
        if ok && value >= 0.1 * bound {
            warnings.push(format!(
                "{name} = {value:.3e} is within a decade of its bound {bound:.1e}"
            ));
        }
        ok
    };
    let pair_ok = check("hbar*a/(c*m*c^2)", pair_ratio, thresholds.pair);
    let extent_ok = check("a*z/c^2", extent_ratio, thresholds.extent);
    let zeeman_ok = check("hbar*omega/(m*c^2)", zeeman_ratio, thresholds.zeeman);

    RegimeDiagnostics {
        pair_ratio,
        extent_ratio,
        zeeman_ratio,
        thresholds,
        pair_ok,
        extent_ok,
        zeeman_ok,
        warnings,
    }
}
