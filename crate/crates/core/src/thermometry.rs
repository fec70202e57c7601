//! Spin thermometry: perturbative spin–space level sets, the reduced spin
//! density matrix and the effective inverse temperature it encodes.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::kinematics::RindlerFrame;
use crate::scalar::{log_sum_exp, softmax, Real};
use crate::spectral::{lowest_eigenpairs, trapezoid, Grid, Hamiltonian, ScaleSystem, SpatialSpectrum};

/// Zeeman coupling of the spin to a uniform field.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SpinCoupling<T> {
    /// `ω = |e|B/(2m)` in rad/s.
    pub omega: T,
    /// `ħω` in joules.
    pub hbar_omega: T,
    /// `ħω/ε*`.
    pub w: T,
}

impl<T: Real> SpinCoupling<T> {
    pub fn from_omega(omega: T, frame: &RindlerFrame<T>, scales: &ScaleSystem<T>) -> Result<Self> {
        if !(omega >= T::zero()) || !omega.is_finite() {
            return Err(Error::Domain(format!(
                "omega must be finite and non-negative, got {:e}",
                omega.as_f64()
            )));
        }
        let hbar_omega = frame.constants().hbar * omega;
        Ok(Self {
            omega,
            hbar_omega,
            w: hbar_omega / scales.energy_unit,
        })
    }

    /// Coupling for a field of `field` tesla acting on a particle of
    /// `mass` and `charge`.
    pub fn from_field(
        field: T,
        mass: T,
        charge: T,
        frame: &RindlerFrame<T>,
        scales: &ScaleSystem<T>,
    ) -> Result<Self> {
        Self::from_omega(larmor_omega(field, mass, charge)?, frame, scales)
    }

    /// A coupling given directly in dimensionless form.
    pub fn dimensionless(w: T, scales: &ScaleSystem<T>, hbar: T) -> Self {
        let hbar_omega = w * scales.energy_unit;
        Self {
            omega: hbar_omega / hbar,
            hbar_omega,
            w,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.w == T::zero()
    }
}

/// `ω = |q|B/(2m)`.
pub fn larmor_omega<T: Real>(field: T, mass: T, charge: T) -> Result<T> {
    if !(mass > T::zero()) || !(field >= T::zero()) {
        return Err(Error::Domain(format!(
            "need mass > 0 and B >= 0 (mass = {:e}, B = {:e})",
            mass.as_f64(),
            field.as_f64()
        )));
    }
    Ok(charge.abs() * field / (T::lit(2.0) * mass))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Spin {
    Up,
    Down,
}

impl Spin {
    pub const BOTH: [Spin; 2] = [Spin::Up, Spin::Down];

    pub fn sign<T: Real>(self) -> T {
        match self {
            Spin::Up => T::one(),
            Spin::Down => -T::one(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LevelSource {
    Perturbative,
    ExactSector,
}

/// One spin-resolved level. Its total energy is `spatial + zeeman`; the two
/// parts are kept apart so that Boltzmann exponents can be formed without
/// cancellation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Level<T> {
    pub n: usize,
    pub spin: Spin,
    pub spatial: T,
    pub zeeman: T,
    pub mean_position: T,
}

impl<T: Real> Level<T> {
    pub fn energy(&self) -> T {
        self.spatial + self.zeeman
    }
}

/// First-order admixture `⟨k|ζ|n⟩ wη / (E_n − E_k)` of state `k` into the
/// spin-up state `n` (the spin-down sector carries the opposite sign).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct StateCorrection<T> {
    pub n: usize,
    pub k: usize,
    pub matrix_element: T,
    pub coefficient: T,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LevelSet<T> {
    pub entries: Vec<Level<T>>,
    pub source: LevelSource,
    pub corrections: Vec<StateCorrection<T>>,
}

impl<T: Real> LevelSet<T> {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn energies(&self) -> Vec<T> {
        self.entries.iter().map(Level::energy).collect()
    }

    pub fn sector(&self, spin: Spin) -> impl Iterator<Item = &Level<T>> {
        self.entries.iter().filter(move |l| l.spin == spin)
    }

    /// Spatial level count.
    pub fn spatial_count(&self) -> usize {
        self.entries.iter().map(|l| l.n + 1).max().unwrap_or(0)
    }
}

/// Dimensionless `β̄ = ∫ b(1 + ηζ) φ²` for a normalized state, cross-checked
/// against `b(1 + η z̄)`.
pub fn mean_inverse_beta<T: Real>(state: &[T], grid: &Grid<T>, scales: &ScaleSystem<T>) -> Result<T> {
    let h = grid.spacing();
    let density: Vec<T> = state.iter().map(|&v| v * v).collect();
    let norm = trapezoid(&density, h);
    let field: Vec<T> = density
        .iter()
        .enumerate()
        .map(|(i, &p)| scales.local_beta(grid.point(i)) * p)
        .collect();
    let quadrature = trapezoid(&field, h);
    let first: Vec<T> = density
        .iter()
        .enumerate()
        .map(|(i, &p)| grid.local(i) * p)
        .collect();
    let mean = grid.z_min() * norm + trapezoid(&first, h);
    let linear = scales.local_beta(mean);
    let tol = T::lit(1e-12);
    if (quadrature - linear).abs() > tol * linear.abs() || (norm - T::one()).abs() > tol {
        return Err(Error::Domain(format!(
            "state not normalized: ∫φ² = {}, quadrature {} vs linear {}",
            norm.as_f64(),
            quadrature.as_f64(),
            linear.as_f64()
        )));
    }
    Ok(quadrature)
}

/// Spin-resolved levels `E_n ± (1 + η z̄_n) w` from spatial energies and mean
/// positions alone.
pub fn levels_from_parts<T: Real>(
    energies: &[T],
    mean_positions: &[T],
    coupling: &SpinCoupling<T>,
    scales: &ScaleSystem<T>,
) -> LevelSet<T> {
    let mut entries = Vec::with_capacity(2 * energies.len());
    for (n, (&e, &z)) in energies.iter().zip(mean_positions).enumerate() {
        let split = (T::one() + scales.lapse_slope * z) * coupling.w;
        for spin in Spin::BOTH {
            entries.push(Level {
                n,
                spin,
                spatial: e,
                zeeman: spin.sign::<T>() * split,
                mean_position: z,
            });
        }
    }
    LevelSet {
        entries,
        source: LevelSource::Perturbative,
        corrections: Vec::new(),
    }
}

/// First-order perturbative level set, with state corrections when the
/// spectrum carries its states.
pub fn perturbed_levels<T: Real>(
    spectrum: &SpatialSpectrum<T>,
    coupling: &SpinCoupling<T>,
    scales: &ScaleSystem<T>,
) -> Result<LevelSet<T>> {
    let mut set = levels_from_parts(&spectrum.energies, &spectrum.mean_positions, coupling, scales);
    if spectrum.states.len() == spectrum.len() {
        set.corrections = state_corrections(spectrum, coupling, scales)?;
    }
    Ok(set)
}

pub fn state_corrections<T: Real>(
    spectrum: &SpatialSpectrum<T>,
    coupling: &SpinCoupling<T>,
    scales: &ScaleSystem<T>,
) -> Result<Vec<StateCorrection<T>>> {
    let k = spectrum.len();
    let strength = coupling.w * scales.lapse_slope;
    let mut out = Vec::with_capacity(k * k.saturating_sub(1));
    for n in 0..k {
        for m in (0..k).filter(|&m| m != n) {
            let gap = spectrum.energies[n] - spectrum.energies[m];
            if gap.abs() < T::lit(1e-12) {
                return Err(Error::Degeneracy {
                    n,
                    k: m,
                    gap: gap.as_f64(),
                });
            }
            let element = spectrum.position_element(m, n);
            out.push(StateCorrection {
                n,
                k: m,
                matrix_element: element,
                coefficient: strength * element / gap,
            });
        }
    }
    Ok(out)
}

/// `(ln c₊, ln c₋)` with `c_σ = Σ_n exp(−b 𝓔_n^σ)`, up to a common shift.
pub fn spin_coefficients<T: Real>(levels: &LevelSet<T>, beta_dimless: T) -> Result<(T, T)> {
    if levels.is_empty() {
        return Err(Error::Domain("spin coefficients need at least one level".into()));
    }
    let floor = levels
        .entries
        .iter()
        .map(|l| l.spatial)
        .fold(T::infinity(), T::min);
    let log_c = |spin: Spin| {
        let terms: Vec<T> = levels
            .sector(spin)
            .map(|l| -beta_dimless * (l.spatial - floor) - beta_dimless * l.zeeman)
            .collect();
        log_sum_exp(terms)
    };
    Ok((log_c(Spin::Up), log_c(Spin::Down)))
}

/// Log-weights `−b(𝓔 − 𝓔_min)` of every entry, normalized so that their
/// exponentials sum to one.
pub fn occupation_log_weights<T: Real>(levels: &LevelSet<T>, beta_dimless: T) -> Vec<T> {
    let floor = levels
        .entries
        .iter()
        .map(|l| l.spatial)
        .fold(T::infinity(), T::min);
    let raw: Vec<T> = levels
        .entries
        .iter()
        .map(|l| -beta_dimless * (l.spatial - floor) - beta_dimless * l.zeeman)
        .collect();
    let total = log_sum_exp(raw.iter().copied());
    raw.into_iter().map(|v| v - total).collect()
}

/// Diagonal reduced spin density matrix in the `σ_z` basis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SpinThermalState<T> {
    pub log_c_plus: T,
    pub log_c_minus: T,
    pub p_plus: T,
    pub p_minus: T,
    /// Effective inverse temperature in units of `1/ε*`.
    pub beta_eff_dimless: Option<T>,
    pub beta_eff_per_joule: Option<T>,
    /// Set when `ω = 0`: the state is maximally mixed and carries no
    /// temperature.
    pub zero_coupling: bool,
}

impl<T: Real> SpinThermalState<T> {
    pub fn density_matrix(&self) -> [[T; 2]; 2] {
        [[self.p_plus, T::zero()], [T::zero(), self.p_minus]]
    }

    /// Effective temperature in kelvin.
    pub fn temperature(&self, k_b: T) -> Option<T> {
        self.beta_eff_per_joule.map(|b| T::one() / (k_b * b))
    }
}

pub fn reduced_spin_state<T: Real>(
    log_c_plus: T,
    log_c_minus: T,
    coupling: &SpinCoupling<T>,
    scales: &ScaleSystem<T>,
) -> Result<SpinThermalState<T>> {
    if !log_c_plus.is_finite() || !log_c_minus.is_finite() {
        return Err(Error::Domain("spin coefficients must be finite".into()));
    }
    let p = softmax(&[log_c_plus, log_c_minus]);
    let zero_coupling = coupling.is_zero();
    let beta_eff_dimless =
        (!zero_coupling).then(|| (log_c_minus - log_c_plus) / (T::lit(2.0) * coupling.w));
    Ok(SpinThermalState {
        log_c_plus,
        log_c_minus,
        p_plus: p[0],
        p_minus: p[1],
        beta_eff_dimless,
        beta_eff_per_joule: beta_eff_dimless.map(|b| scales.beta_to_si(b)),
        zero_coupling,
    })
}

/// Convenience: levels → coefficients → reduced state.
pub fn thermal_state<T: Real>(
    levels: &LevelSet<T>,
    coupling: &SpinCoupling<T>,
    scales: &ScaleSystem<T>,
) -> Result<SpinThermalState<T>> {
    let (plus, minus) = spin_coefficients(levels, scales.beta_dimless)?;
    reduced_spin_state(plus, minus, coupling, scales)
}

/// Spectrum of `H + σ w (1 + η ζ)` with energies taken as Rayleigh quotients
/// of the returned states.
pub fn exact_sector_spectrum<T: Real>(
    ham: &Hamiltonian<T>,
    coupling: &SpinCoupling<T>,
    scales: &ScaleSystem<T>,
    spin: Spin,
    k: usize,
) -> Result<SpatialSpectrum<T>> {
    sector_spectrum(ham, coupling, scales, spin, k, T::zero())
}

/// As [`exact_sector_spectrum`] for an operator whose coordinate `ζ` is
/// measured from `origin`.
fn sector_spectrum<T: Real>(
    ham: &Hamiltonian<T>,
    coupling: &SpinCoupling<T>,
    scales: &ScaleSystem<T>,
    spin: Spin,
    k: usize,
    origin: T,
) -> Result<SpatialSpectrum<T>> {
    let s = spin.sign::<T>() * coupling.w;
    let eta = scales.lapse_slope;
    let sector = ham.with_linear_term(s * (T::one() + eta * origin), s * eta);
    let mut spectrum = lowest_eigenpairs(&sector, k)?;
    refine_energies(&sector, &mut spectrum);
    Ok(spectrum)
}

/// Replaces eigenvalues by the Rayleigh quotients of their states, which
/// carry a relative rather than a `‖H‖`-scaled rounding error.
pub fn refine_energies<T: Real>(ham: &Hamiltonian<T>, spectrum: &mut SpatialSpectrum<T>) {
    for (e, state) in spectrum.energies.iter_mut().zip(&spectrum.states) {
        *e = ham.rayleigh_quotient(state);
    }
}

/// Level set from the two exact spin sectors of `ham`, whose coordinate is
/// measured from `origin`. Each entry keeps the spatial energy of `base`
/// and carries the sector shift `𝓔_n^σ − E_n` as its Zeeman part.
pub fn exact_levels<T: Real>(
    ham: &Hamiltonian<T>,
    base: &SpatialSpectrum<T>,
    coupling: &SpinCoupling<T>,
    scales: &ScaleSystem<T>,
    origin: T,
) -> Result<LevelSet<T>> {
    let k = base.len();
    let sectors = [
        sector_spectrum(ham, coupling, scales, Spin::Up, k, origin)?,
        sector_spectrum(ham, coupling, scales, Spin::Down, k, origin)?,
    ];
    let mut entries = Vec::with_capacity(2 * k);
    for n in 0..k {
        for (spin, sector) in Spin::BOTH.into_iter().zip(&sectors) {
            entries.push(Level {
                n,
                spin,
                spatial: base.energies[n],
                zeeman: sector.energies[n] - base.energies[n],
                mean_position: origin + sector.mean_positions[n],
            });
        }
    }
    Ok(LevelSet {
        entries,
        source: LevelSource::ExactSector,
        corrections: Vec::new(),
    })
}

/// Spin state of a point-like thermometer at the origin: thermal at `β_a`.
pub fn bhl_reference<T: Real>(frame: &RindlerFrame<T>, coupling: &SpinCoupling<T>) -> Result<SpinThermalState<T>> {
    if !(coupling.hbar_omega > T::zero()) {
        return Err(Error::Domain("reference state needs omega > 0".into()));
    }
    let x = frame.unruh_beta() * coupling.hbar_omega;
    let p = softmax(&[-x, x]);
    Ok(SpinThermalState {
        log_c_plus: -x,
        log_c_minus: x,
        p_plus: p[0],
        p_minus: p[1],
        beta_eff_dimless: Some(frame.unruh_beta() * coupling.hbar_omega / coupling.w),
        beta_eff_per_joule: Some(frame.unruh_beta()),
        zero_coupling: false,
    })
}

/// `π c |q| B / (m a)`, the Boltzmann exponent of the reference state written
/// in terms of the field.
pub fn bhl_exponent_from_field<T: Real>(frame: &RindlerFrame<T>, field: T, mass: T, charge: T) -> T {
    T::PI() * frame.constants().c * charge.abs() * field / (mass * frame.acceleration())
}
