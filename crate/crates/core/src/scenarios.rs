//! End-to-end runs: an extended single well and a pair of distant wells,
//! from SI configuration to a serializable report.

use std::fs::File;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinematics::{regime_check, PhysicalConstants, RegimeDiagnostics, RegimeThresholds, RindlerFrame};
use crate::relaxation::{
    build_rates, evolve, gibbs, kl_divergence, read_rate_table, stationary_distribution, PopulationState,
    RateKind, RateModel, RateSystem, Trajectory, TABLE_TOLERANCE,
};
use crate::spectral::{
    assemble_hamiltonian, build_potential, lowest_eigenpairs, make_scales, read_potential_table, well_extent,
    Grid, GridControls, Hamiltonian, PotentialSpec, ScaleSystem, SpatialSpectrum,
};
use crate::thermometry::{
    exact_levels, mean_inverse_beta, occupation_log_weights, perturbed_levels, refine_energies, thermal_state,
    Level, LevelSet, LevelSource, Spin, SpinCoupling, SpinThermalState,
};

/// Largest `l/ℓ*` accepted by the single-grid double-well solver.
pub const SINGLE_GRID_LIMIT: f64 = 1e5;

fn electron_mass() -> f64 {
    PhysicalConstants::<f64>::codata2018().m_e
}

fn electron_charge() -> f64 {
    -PhysicalConstants::<f64>::codata2018().e
}

fn default_levels() -> usize {
    4
}

fn is_false(v: &bool) -> bool {
    !*v
}

fn is_zero(v: &f64) -> bool {
    *v == 0.0
}

/// Run configuration, in SI units unless noted.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    /// Proper acceleration of the reference worldline (m/s²).
    pub a: f64,
    #[serde(default = "electron_mass")]
    pub mass: f64,
    #[serde(default = "electron_charge")]
    pub charge: f64,
    /// Magnetic field (T). Defaults to 1 T when `omega` is not given.
    #[serde(rename = "B", default, skip_serializing_if = "Option::is_none")]
    pub field: Option<f64>,
    /// Larmor angular frequency (rad/s); alternative to `B`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<f64>,
    /// Spatial levels kept per well.
    #[serde(default = "default_levels")]
    pub levels: usize,
    /// Height (m) at which to re-anchor the frame before solving.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub recenter: Option<f64>,
    pub potential: PotentialConfig,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub relaxation: RelaxationConfig,
    #[serde(default)]
    pub regime: RegimeConfig,
    #[serde(default)]
    pub double_well: DoubleWellConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PotentialKind {
    InfiniteWell,
    DoubleWell,
    Tabulated,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialConfig {
    pub kind: PotentialKind,
    /// Well width (m).
    #[serde(rename = "L", default, skip_serializing_if = "Option::is_none")]
    pub width: Option<f64>,
    /// Distance between the wells' left edges (m).
    #[serde(rename = "l", default, skip_serializing_if = "Option::is_none")]
    pub separation: Option<f64>,
    /// Floor of the (left) well (J).
    #[serde(rename = "E_L0", default, skip_serializing_if = "is_zero")]
    pub left_floor: f64,
    /// Floor of the right well (J).
    #[serde(rename = "E_R0", default, skip_serializing_if = "Option::is_none")]
    pub right_floor: Option<f64>,
    /// Lower the right floor by `m a l`, cancelling the tilt between wells.
    #[serde(default, skip_serializing_if = "is_false")]
    pub cancel_tilt: bool,
    /// Position of the (left) well's left wall (m).
    #[serde(default, skip_serializing_if = "is_zero")]
    pub left_edge: f64,
    /// Two-column CSV of dimensionless `(position, energy)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<PathBuf>,
}

impl PotentialConfig {
    pub fn infinite_well(width: f64) -> Self {
        Self {
            kind: PotentialKind::InfiniteWell,
            width: Some(width),
            separation: None,
            left_floor: 0.0,
            right_floor: None,
            cancel_tilt: false,
            left_edge: 0.0,
            table: None,
        }
    }

    pub fn double_well(width: f64, separation: f64) -> Self {
        Self {
            kind: PotentialKind::DoubleWell,
            separation: Some(separation),
            ..Self::infinite_well(width)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub points: usize,
    /// Fixed dimensionless spacing; overrides `points`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spacing: Option<f64>,
    /// Dimensionless padding beyond the highest classical turning point.
    pub padding: f64,
    pub include_tilt: bool,
}

impl Default for GridConfig {
    fn default() -> Self {
        let c = GridControls::<f64>::default();
        Self {
            points: c.points,
            spacing: c.spacing,
            padding: c.padding,
            include_tilt: true,
        }
    }
}

impl GridConfig {
    pub fn controls(&self) -> GridControls<f64> {
        GridControls {
            points: self.points,
            spacing: self.spacing,
            padding: self.padding,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RelaxationConfig {
    pub enabled: bool,
    pub model: RateKind,
    /// Base rate (1/s).
    pub gamma0: f64,
    /// Simulated time (s); defaults to `50/gamma0`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub duration: Option<f64>,
    /// Step (s); defaults to `0.05 / (largest exit rate)`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    /// Starting level index into the spin-resolved level list; defaults to
    /// the highest.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial_level: Option<usize>,
    /// CSV of `(m, n, rate)` replacing the built-in rate model.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rate_table: Option<PathBuf>,
}

impl Default for RelaxationConfig {
    fn default() -> Self {
        Self {
            enabled: true,
            model: RateKind::Metropolis,
            gamma0: 1e9,
            duration: None,
            dt: None,
            initial_level: None,
            rate_table: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RegimeConfig {
    pub pair: f64,
    pub extent: f64,
    pub zeeman: f64,
    /// Treat near-threshold warnings as failures.
    pub strict: bool,
}

impl Default for RegimeConfig {
    fn default() -> Self {
        let t = RegimeThresholds::default();
        Self {
            pair: t.pair,
            extent: t.extent,
            zeeman: t.zeeman,
            strict: false,
        }
    }
}

impl RegimeConfig {
    pub fn thresholds(&self) -> RegimeThresholds {
        RegimeThresholds {
            pair: self.pair,
            extent: self.extent,
            zeeman: self.zeeman,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DoubleWellSolver {
    Composite,
    SingleGrid,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DoubleWellConfig {
    /// Wells count as degenerate when `b |E_L − E_R|` is below this.
    pub degeneracy_threshold: f64,
    pub solver: DoubleWellSolver,
}

impl Default for DoubleWellConfig {
    fn default() -> Self {
        Self {
            degeneracy_threshold: 1e-3,
            solver: DoubleWellSolver::Composite,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    pub format: OutputFormat,
    /// Write sampled wavefunctions.
    pub states: bool,
    /// Keep every n-th relaxation sample.
    pub trajectory_stride: usize,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: None,
            format: OutputFormat::Csv,
            states: false,
            trajectory_stride: 10,
        }
    }
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::Validation(msg.into())
}

fn require(ok: bool, msg: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(invalid(msg))
    }
}

impl ScenarioConfig {
    /// Minimal configuration: acceleration and potential, defaults elsewhere.
    pub fn new(a: f64, potential: PotentialConfig) -> Self {
        Self {
            a,
            mass: electron_mass(),
            charge: electron_charge(),
            field: None,
            omega: None,
            levels: default_levels(),
            recenter: None,
            potential,
            grid: GridConfig::default(),
            relaxation: RelaxationConfig::default(),
            regime: RegimeConfig::default(),
            double_well: DoubleWellConfig::default(),
            output: OutputConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite_pos = |v: f64| v.is_finite() && v > 0.0;
        require(finite_pos(self.a), "a > 0")?;
        require(finite_pos(self.mass), "mass > 0")?;
        require(self.charge.is_finite(), "charge must be finite")?;
        require(
            !(self.field.is_some() && self.omega.is_some()),
            "set at most one of B and omega",
        )?;
        if let Some(b) = self.field {
            require(b.is_finite() && b >= 0.0, "B >= 0")?;
        }
        if let Some(w) = self.omega {
            require(w.is_finite() && w >= 0.0, "omega >= 0")?;
        }
        require(self.levels >= 1, "levels >= 1")?;
        if let Some(z0) = self.recenter {
            require(z0.is_finite(), "recenter must be finite")?;
        }
        let p = &self.potential;
        match p.kind {
            PotentialKind::InfiniteWell | PotentialKind::DoubleWell => {
                require(p.width.is_some_and(finite_pos), "L > 0")?;
            }
            PotentialKind::Tabulated => {
                require(p.table.is_some(), "tabulated potential needs potential.table")?;
            }
        }
        if p.kind == PotentialKind::DoubleWell {
            let (l, w) = (p.separation.unwrap_or(f64::NAN), p.width.unwrap_or(f64::NAN));
            require(l.is_finite() && l > w, "l > L")?;
            require(
                !(p.cancel_tilt && p.right_floor.is_some()),
                "set at most one of E_R0 and cancel_tilt",
            )?;
        } else {
            require(p.separation.is_none(), "l applies only to double_well")?;
            require(
                p.right_floor.is_none() && !p.cancel_tilt,
                "E_R0 and cancel_tilt apply only to double_well",
            )?;
        }
        require(p.left_floor.is_finite() && p.left_edge.is_finite(), "E_L0 and left_edge must be finite")?;
        if let Some(e) = p.right_floor {
            require(e.is_finite(), "E_R0 must be finite")?;
        }
        let g = &self.grid;
        require(g.points >= 3, "grid.points >= 3")?;
        if let Some(h) = g.spacing {
            require(finite_pos(h), "grid.spacing > 0")?;
        }
        require(g.padding.is_finite() && g.padding >= 0.0, "grid.padding >= 0")?;
        let r = &self.relaxation;
        require(finite_pos(r.gamma0), "relaxation.gamma0 > 0")?;
        if let Some(t) = r.duration {
            require(t.is_finite() && t >= 0.0, "relaxation.duration >= 0")?;
        }
        if let Some(dt) = r.dt {
            require(finite_pos(dt), "relaxation.dt > 0")?;
        }
        let t = &self.regime;
        require(
            finite_pos(t.pair) && finite_pos(t.extent) && finite_pos(t.zeeman),
            "regime thresholds > 0",
        )?;
        require(
            self.double_well.degeneracy_threshold.is_finite() && self.double_well.degeneracy_threshold >= 0.0,
            "double_well.degeneracy_threshold >= 0",
        )?;
        require(self.output.trajectory_stride >= 1, "output.trajectory_stride >= 1")?;
        Ok(())
    }

    /// Makes relative file references relative to `base`.
    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut Option<PathBuf>| {
            if let Some(path) = p {
                if path.is_relative() {
                    *path = base.join(&*path);
                }
            }
        };
        fix(&mut self.potential.table);
        fix(&mut self.relaxation.rate_table);
    }
}

/// Working frame, units and coupling shared by every run.
#[derive(Clone, Debug)]
struct Setup {
    constants: PhysicalConstants<f64>,
    original: RindlerFrame<f64>,
    frame: RindlerFrame<f64>,
    shift: f64,
    scales: ScaleSystem<f64>,
    coupling: SpinCoupling<f64>,
}

impl Setup {
    fn new(config: &ScenarioConfig) -> Result<Self> {
        config.validate()?;
        let original = RindlerFrame::new(config.a)?;
        let (frame, shift) = match config.recenter {
            Some(z0) => (original.recenter(z0)?.frame, z0),
            None => (original, 0.0),
        };
        let scales = make_scales(&frame, config.mass)?;
        let coupling = match config.omega {
            Some(omega) => SpinCoupling::from_omega(omega, &frame, &scales)?,
            None => SpinCoupling::from_field(
                config.field.unwrap_or(1.0),
                config.mass,
                config.charge,
                &frame,
                &scales,
            )?,
        };
        Ok(Self {
            constants: *original.constants(),
            original,
            frame,
            shift,
            scales,
            coupling,
        })
    }

    /// Dimensionless position of an SI height of the original frame.
    fn position(&self, z: f64) -> f64 {
        self.scales.to_dimless_length(z - self.shift)
    }

    fn regime(&self, config: &ScenarioConfig, extent_dimless: f64) -> Result<RegimeDiagnostics> {
        let diag = regime_check(
            &self.frame,
            config.mass,
            self.scales.to_meters(extent_dimless),
            self.coupling.omega,
            config.regime.thresholds(),
        );
        if !diag.passed() || (config.regime.strict && !diag.warnings.is_empty()) {
            return Err(Error::Regime(Box::new(diag)));
        }
        Ok(diag)
    }

    fn frame_summary(&self) -> FrameSummary {
        FrameSummary {
            acceleration: self.frame.acceleration(),
            unruh_beta_per_joule: self.frame.unruh_beta(),
            unruh_temperature_kelvin: self.frame.unruh_temperature(),
            original_acceleration: self.original.acceleration(),
            recenter_shift: self.shift,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FrameSummary {
    /// Acceleration of the working frame (m/s²).
    pub acceleration: f64,
    pub unruh_beta_per_joule: f64,
    pub unruh_temperature_kelvin: f64,
    /// Acceleration as configured, before any re-anchoring.
    pub original_acceleration: f64,
    /// Height of the working frame's origin in the configured frame (m).
    pub recenter_shift: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Well {
    Left,
    Right,
    /// Even combination of a degenerate left/right pair.
    Symmetric,
    /// Odd combination of a degenerate left/right pair.
    Antisymmetric,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LevelSummary {
    pub n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub well: Option<Well>,
    pub energy_dimless: f64,
    pub energy_joule: f64,
    pub mean_position_dimless: f64,
    pub mean_position_m: f64,
    pub beta_bar_dimless: f64,
    pub beta_bar_per_joule: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Occupation {
    pub n: usize,
    pub spin: Spin,
    pub log_weight: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub limit: f64,
}

impl Check {
    fn at_most(name: &str, value: f64, limit: f64) -> Self {
        Self {
            name: name.into(),
            passed: value <= limit,
            value,
            limit,
        }
    }
}

/// Sampled wavefunction on the dimensionless axis of the working frame.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Wavefunction {
    pub n: usize,
    pub z_dimless: Vec<f64>,
    pub phi: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    ExtendedWell,
    DoubleWell,
    Tabulated,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    BoltzmannTwoLevel,
    SymmetricDelocalized,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DegeneracyDecision {
    pub branch: Branch,
    /// `b |E_L − E_R|`.
    pub exponent: f64,
    pub threshold: f64,
}

/// Chooses between Boltzmann-weighting two localized levels and treating them
/// as one degenerate, delocalized pair.
pub fn degeneracy_resolve(e_left: f64, e_right: f64, beta_dimless: f64, threshold: f64) -> DegeneracyDecision {
    let exponent = beta_dimless * (e_left - e_right).abs();
    let branch = if exponent < threshold {
        Branch::SymmetricDelocalized
    } else {
        Branch::BoltzmannTwoLevel
    };
    DegeneracyDecision {
        branch,
        exponent,
        threshold,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DoubleWellSummary {
    pub solver: DoubleWellSolver,
    pub decision: DegeneracyDecision,
    pub energy_left: f64,
    pub energy_right: f64,
    pub beta_left: f64,
    pub beta_right: f64,
    /// `b (E_R − E_L)` for the ground pair.
    pub suppression_exponent: f64,
    /// Total occupation of right-well levels.
    pub right_occupation: f64,
    /// `β_R / β_L`.
    pub beta_ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RelaxationSummary {
    pub model: Option<RateKind>,
    pub gamma0: f64,
    pub dt: f64,
    pub duration: f64,
    pub initial_level: usize,
    pub steps: usize,
    pub detailed_balance_violation: f64,
    pub final_kl: f64,
    /// `max |p(t_end) − p_Gibbs|`.
    pub final_gibbs_deviation: f64,
    /// `|Σ_n p_Gibbs(n, ↑) − p₊|`.
    pub spin_trace_deviation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScenarioReport {
    pub scenario: ScenarioKind,
    pub config: ScenarioConfig,
    pub constants: PhysicalConstants<f64>,
    pub frame: FrameSummary,
    pub scales: ScaleSystem<f64>,
    pub coupling: SpinCoupling<f64>,
    pub regime: RegimeDiagnostics,
    pub levels: Vec<LevelSummary>,
    pub occupations: Vec<Occupation>,
    /// `b (E_1 − E_0)`.
    pub log_weight_gap: Option<f64>,
    pub ground_occupation: f64,
    /// `β̄_0/β_a − 1 = η z̄_0`.
    pub ground_lapse_offset: f64,
    pub perturbative: SpinThermalState<f64>,
    pub exact: SpinThermalState<f64>,
    pub t_eff_kelvin: Option<f64>,
    pub t_eff_exact_kelvin: Option<f64>,
    /// `β_eff^exact/β_eff^pert − 1`.
    pub exact_relative_difference: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub double_well: Option<DoubleWellSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub relaxation: Option<RelaxationSummary>,
    pub checks: Vec<Check>,
    #[serde(skip)]
    pub trajectory: Option<Trajectory<f64>>,
    #[serde(skip)]
    pub wavefunctions: Vec<Wavefunction>,
}

impl ScenarioReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn beta_eff_per_joule(&self) -> Option<f64> {
        self.perturbative.beta_eff_per_joule
    }
}

/// A Hamiltonian with its lowest states, energies refined to Rayleigh
/// quotients.
#[derive(Clone, Debug)]
pub struct GridSolution {
    pub hamiltonian: Hamiltonian<f64>,
    pub spectrum: SpatialSpectrum<f64>,
}

pub fn solve_on_grid(spec: &PotentialSpec<f64>, grid: &Grid<f64>, include_tilt: bool, k: usize) -> Result<GridSolution> {
    let sampled = build_potential(spec, grid)?;
    let hamiltonian = assemble_hamiltonian(&sampled, grid, include_tilt)?;
    let mut spectrum = lowest_eigenpairs(&hamiltonian, k)?;
    refine_energies(&hamiltonian, &mut spectrum);
    Ok(GridSolution { hamiltonian, spectrum })
}

/// Single square well of dimensionless `width` starting at `edge`, cut at
/// the resolved extent when tilted.
pub fn solve_single_well(
    width: f64,
    edge: f64,
    controls: &GridControls<f64>,
    include_tilt: bool,
    k: usize,
) -> Result<GridSolution> {
    let extent = well_extent(width, include_tilt, k, controls.padding);
    let grid = controls.grid(edge, extent)?;
    let spec = PotentialSpec::InfiniteWell {
        width: extent,
        left_edge: edge,
        floor: 0.0,
    };
    solve_on_grid(&spec, &grid, include_tilt, k)
}

/// Dimensionless double-well geometry.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DoubleWellGeometry {
    pub width: f64,
    pub separation: f64,
    pub left_floor: f64,
    pub right_floor: f64,
    pub left_edge: f64,
}

impl DoubleWellGeometry {
    fn edges(&self) -> [f64; 2] {
        [self.left_edge, self.left_edge + self.separation]
    }

    /// Constant `u + ζ_edge` added to each well's local energies.
    fn offsets(&self, include_tilt: bool) -> [f64; 2] {
        let tilt = |x: f64| if include_tilt { x } else { 0.0 };
        [
            self.left_floor + tilt(self.left_edge),
            tilt(self.left_edge) + (self.right_floor + tilt(self.separation)),
        ]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WellLevel {
    pub well: Well,
    pub index: usize,
    pub energy: f64,
    pub mean_position: f64,
}

/// Each well solved on its own grid anchored at its left wall; floors and
/// the tilt across the separation enter as exact energy offsets.
#[derive(Clone, Debug)]
pub struct CompositeSolution {
    pub geometry: DoubleWellGeometry,
    pub local: [GridSolution; 2],
    pub offsets: [f64; 2],
    pub edges: [f64; 2],
}

impl CompositeSolution {
    pub fn level(&self, well: usize, n: usize) -> WellLevel {
        let s = &self.local[well].spectrum;
        WellLevel {
            well: if well == 0 { Well::Left } else { Well::Right },
            index: n,
            energy: self.offsets[well] + s.energies[n],
            mean_position: self.edges[well] + s.mean_positions[n],
        }
    }

    /// All well levels in ascending energy.
    pub fn levels(&self) -> Vec<WellLevel> {
        let k = self.local[0].spectrum.len();
        let mut out: Vec<WellLevel> = (0..2).flat_map(|w| (0..k).map(move |n| (w, n))).map(|(w, n)| self.level(w, n)).collect();
        out.sort_by(|a, b| a.energy.total_cmp(&b.energy));
        out
    }
}

pub fn composite_double_well(
    geometry: DoubleWellGeometry,
    controls: &GridControls<f64>,
    include_tilt: bool,
    levels_per_well: usize,
) -> Result<CompositeSolution> {
    if !(geometry.separation > geometry.width) {
        return Err(Error::Geometry("double well needs l > L".into()));
    }
    let solve = || solve_single_well(geometry.width, 0.0, controls, include_tilt, levels_per_well);
    Ok(CompositeSolution {
        geometry,
        local: [solve()?, solve()?],
        offsets: geometry.offsets(include_tilt),
        edges: geometry.edges(),
    })
}

/// Both wells on one grid with hard walls between them. The grid spacing
/// is the one the composite solver would use unless fixed in `controls`.
pub fn single_grid_double_well(
    geometry: DoubleWellGeometry,
    controls: &GridControls<f64>,
    include_tilt: bool,
    k: usize,
) -> Result<(GridSolution, Vec<WellLevel>)> {
    if geometry.separation > SINGLE_GRID_LIMIT {
        return Err(Error::Geometry(format!(
            "single-grid solve needs l/ℓ* <= {SINGLE_GRID_LIMIT:e}, got {:e}",
            geometry.separation
        )));
    }
    let extent = well_extent(geometry.width, include_tilt, k, controls.padding);
    let spacing = controls
        .spacing
        .unwrap_or(extent / (controls.points.max(3) - 1) as f64);
    let grid = Grid::with_spacing(geometry.left_edge, geometry.separation + extent, spacing)?;
    let spec = PotentialSpec::DoubleWell {
        width: extent,
        separation: geometry.separation,
        left_floor: geometry.left_floor,
        right_floor: geometry.right_floor,
        left_edge: geometry.left_edge,
    };
    let solution = solve_on_grid(&spec, &grid, include_tilt, k)?;
    let middle = geometry.left_edge + geometry.separation / 2.0;
    let mut counts = [0usize; 2];
    let levels = solution
        .spectrum
        .energies
        .iter()
        .zip(&solution.spectrum.mean_positions)
        .map(|(&energy, &mean_position)| {
            let w = usize::from(mean_position > middle);
            counts[w] += 1;
            WellLevel {
                well: if w == 0 { Well::Left } else { Well::Right },
                index: counts[w] - 1,
                energy,
                mean_position,
            }
        })
        .collect();
    Ok((solution, levels))
}

fn level_summary(setup: &Setup, n: usize, well: Option<Well>, energy: f64, mean: f64) -> LevelSummary {
    let s = &setup.scales;
    let beta = s.local_beta(mean);
    LevelSummary {
        n,
        well,
        energy_dimless: energy,
        energy_joule: s.to_joule(energy),
        mean_position_dimless: mean,
        mean_position_m: s.to_meters(mean),
        beta_bar_dimless: beta,
        beta_bar_per_joule: s.beta_to_si(beta),
    }
}

fn wavefunctions(spectrum: &SpatialSpectrum<f64>, origin: f64, first: usize) -> Vec<Wavefunction> {
    let g = &spectrum.grid;
    spectrum
        .states
        .iter()
        .enumerate()
        .map(|(n, phi)| Wavefunction {
            n: first + n,
            z_dimless: (0..g.len()).map(|i| origin + g.point(i)).collect(),
            phi: phi.clone(),
        })
        .collect()
}

/// Everything that depends only on the assembled level sets.
struct Assembly {
    levels: Vec<LevelSummary>,
    perturbative: LevelSet<f64>,
    exact: LevelSet<f64>,
    wavefunctions: Vec<Wavefunction>,
    checks: Vec<Check>,
}

fn report(
    kind: ScenarioKind,
    config: &ScenarioConfig,
    setup: &Setup,
    regime: RegimeDiagnostics,
    assembly: Assembly,
    double_well: Option<DoubleWellSummary>,
) -> Result<ScenarioReport> {
    let Assembly {
        levels,
        perturbative,
        exact,
        wavefunctions,
        mut checks,
    } = assembly;
    let s = &setup.scales;
    let b = s.beta_dimless;
    let pert_state = thermal_state(&perturbative, &setup.coupling, s)?;
    let exact_state = thermal_state(&exact, &setup.coupling, s)?;

    let weights = occupation_log_weights(&perturbative, b);
    let occupations: Vec<Occupation> = perturbative
        .entries
        .iter()
        .zip(&weights)
        .map(|(l, &w)| Occupation {
            n: l.n,
            spin: l.spin,
            log_weight: w,
        })
        .collect();
    let total: f64 = weights.iter().map(|w| w.exp()).sum();
    checks.push(Check::at_most("occupation_normalization", (total - 1.0).abs(), 1e-12));
    let ground_occupation: f64 = occupations.iter().filter(|o| o.n == 0).map(|o| o.log_weight.exp()).sum();
    let log_weight_gap = (levels.len() >= 2).then(|| b * (levels[1].energy_dimless - levels[0].energy_dimless));
    let ground = levels[0];
    let ground_lapse_offset = s.lapse_slope * ground.mean_position_dimless;

    if let Some(beta) = pert_state.beta_eff_dimless {
        if ground_occupation >= 1.0 - 1e-12 {
            checks.push(Check::at_most(
                "single_level_thermality",
                (beta / ground.beta_bar_dimless - 1.0).abs(),
                1e-12,
            ));
        }
        if ground_lapse_offset.abs() <= 1e-12 {
            checks.push(Check::at_most("bhl_limit", (beta / b - 1.0).abs(), 1e-9));
        }
    }
    let exact_relative_difference = match (pert_state.beta_eff_dimless, exact_state.beta_eff_dimless) {
        (Some(p), Some(e)) => Some(e / p - 1.0),
        _ => None,
    };

    let (relaxation, trajectory) = if config.relaxation.enabled {
        let (summary, traj) = relax(config, &perturbative, &pert_state, b)?;
        checks.push(Check::at_most("relaxation_gibbs", summary.final_gibbs_deviation, 1e-8));
        checks.push(Check::at_most("relaxation_spin_trace", summary.spin_trace_deviation, 1e-10));
        (Some(summary), Some(traj))
    } else {
        (None, None)
    };

    let k_b = setup.constants.k_b;
    Ok(ScenarioReport {
        scenario: kind,
        config: config.clone(),
        constants: setup.constants,
        frame: setup.frame_summary(),
        scales: *s,
        coupling: setup.coupling,
        regime,
        levels,
        occupations,
        log_weight_gap,
        ground_occupation,
        ground_lapse_offset,
        t_eff_kelvin: pert_state.temperature(k_b),
        t_eff_exact_kelvin: exact_state.temperature(k_b),
        perturbative: pert_state,
        exact: exact_state,
        exact_relative_difference,
        double_well,
        relaxation,
        checks,
        trajectory,
        wavefunctions: if config.output.states { wavefunctions } else { Vec::new() },
    })
}

/// Relative level energies `(E − E_min) + zeeman` for rate building.
fn relative_energies(levels: &LevelSet<f64>) -> Vec<f64> {
    let floor = levels.entries.iter().map(|l| l.spatial).fold(f64::INFINITY, f64::min);
    levels.entries.iter().map(|l| (l.spatial - floor) + l.zeeman).collect()
}

fn relax(
    config: &ScenarioConfig,
    levels: &LevelSet<f64>,
    spin: &SpinThermalState<f64>,
    beta: f64,
) -> Result<(RelaxationSummary, Trajectory<f64>)> {
    let rc = &config.relaxation;
    let energies = relative_energies(levels);
    let (system, model) = match &rc.rate_table {
        Some(path) => {
            let rows = read_rate_table(File::open(path)?)?;
            (
                RateSystem::from_table(&energies, beta, &rows, TABLE_TOLERANCE)?,
                None,
            )
        }
        None => {
            let model = RateModel {
                kind: rc.model,
                gamma0: rc.gamma0,
            };
            (build_rates(&energies, beta, model)?, Some(rc.model))
        }
    };
    let initial_level = rc.initial_level.unwrap_or(energies.len() - 1);
    if initial_level >= energies.len() {
        return Err(invalid(format!(
            "relaxation.initial_level < {} (number of spin-resolved levels)",
            energies.len()
        )));
    }
    let dt = rc.dt.unwrap_or(0.05 / system.max_exit_rate());
    let duration = rc.duration.unwrap_or(50.0 / rc.gamma0);
    let traj = evolve(&system, &PopulationState::pure(energies.len(), initial_level), dt, duration)?;
    let target = match stationary_distribution(&system) {
        Ok(p) => p.p,
        Err(Error::Disconnected { .. }) => gibbs(&energies, beta),
        Err(e) => return Err(e),
    };
    let last = traj.last().map(|p| p.p).unwrap_or_default();
    let final_gibbs_deviation = last.iter().zip(&target).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let traced_up: f64 = levels
        .entries
        .iter()
        .zip(&target)
        .filter(|(l, _)| l.spin == Spin::Up)
        .map(|(_, p)| p)
        .sum();
    Ok((
        RelaxationSummary {
            model,
            gamma0: rc.gamma0,
            dt,
            duration,
            initial_level,
            steps: traj.len().saturating_sub(1),
            detailed_balance_violation: system.detailed_balance_violation(),
            final_kl: kl_divergence(&last, &target),
            final_gibbs_deviation,
            spin_trace_deviation: (traced_up - spin.p_plus).abs(),
        },
        traj,
    ))
}

/// β̄ of every state by quadrature, cross-checked against the linear form.
fn check_mean_betas(solution: &GridSolution, scales: &ScaleSystem<f64>) -> Result<()> {
    for state in &solution.spectrum.states {
        mean_inverse_beta(state, &solution.spectrum.grid, scales)?;
    }
    Ok(())
}

fn single_grid_assembly(setup: &Setup, solution: &GridSolution) -> Result<Assembly> {
    check_mean_betas(solution, &setup.scales)?;
    let spectrum = &solution.spectrum;
    let perturbative = perturbed_levels(spectrum, &setup.coupling, &setup.scales)?;
    let exact = exact_levels(&solution.hamiltonian, spectrum, &setup.coupling, &setup.scales, 0.0)?;
    let levels = spectrum
        .energies
        .iter()
        .zip(&spectrum.mean_positions)
        .enumerate()
        .map(|(n, (&e, &z))| level_summary(setup, n, None, e, z))
        .collect();
    Ok(Assembly {
        levels,
        perturbative,
        exact,
        wavefunctions: wavefunctions(spectrum, 0.0, 0),
        checks: Vec::new(),
    })
}

/// Tilted infinite well.
pub fn run_extended_well(config: &ScenarioConfig) -> Result<ScenarioReport> {
    if config.potential.kind != PotentialKind::InfiniteWell {
        return Err(invalid("extended-well scenario needs potential.kind = infinite_well"));
    }
    let setup = Setup::new(config)?;
    let width = setup.scales.to_dimless_length(config.potential.width.unwrap_or_default());
    let edge = setup.position(config.potential.left_edge);
    let regime = setup.regime(config, edge.abs().max((edge + width).abs()))?;
    let solution = solve_single_well(
        width,
        edge,
        &config.grid.controls(),
        config.grid.include_tilt,
        config.levels,
    )?;
    let mut assembly = single_grid_assembly(&setup, &solution)?;
    let floor = setup.scales.to_dimless_energy(config.potential.left_floor);
    if floor != 0.0 {
        shift_levels(&mut assembly, &setup, floor);
    }
    report(ScenarioKind::ExtendedWell, config, &setup, regime, assembly, None)
}

fn shift_levels(assembly: &mut Assembly, setup: &Setup, floor: f64) {
    for l in assembly.perturbative.entries.iter_mut().chain(assembly.exact.entries.iter_mut()) {
        l.spatial += floor;
    }
    for l in assembly.levels.iter_mut() {
        *l = level_summary(setup, l.n, l.well, l.energy_dimless + floor, l.mean_position_dimless);
    }
}

/// Arbitrary tabulated potential on a single grid spanning the table.
pub fn run_tabulated(config: &ScenarioConfig) -> Result<ScenarioReport> {
    if config.potential.kind != PotentialKind::Tabulated {
        return Err(invalid("tabulated run needs potential.kind = tabulated"));
    }
    let setup = Setup::new(config)?;
    let (spec, grid) = tabulated_problem(config)?;
    let regime = setup.regime(config, grid.z_min().abs().max(grid.z_max().abs()))?;
    let solution = solve_on_grid(&spec, &grid, config.grid.include_tilt, config.levels)?;
    let assembly = single_grid_assembly(&setup, &solution)?;
    report(ScenarioKind::Tabulated, config, &setup, regime, assembly, None)
}

fn tabulated_problem(config: &ScenarioConfig) -> Result<(PotentialSpec<f64>, Grid<f64>)> {
    let path = config
        .potential
        .table
        .as_ref()
        .ok_or_else(|| invalid("tabulated potential needs potential.table"))?;
    let spec: PotentialSpec<f64> = read_potential_table(File::open(path)?)?;
    let PotentialSpec::Tabulated { positions, .. } = &spec else {
        unreachable!("table reader returns a tabulated spec")
    };
    let (first, last) = (positions[0], positions[positions.len() - 1]);
    let grid = config.grid.controls().grid(first, last - first)?;
    Ok((spec, grid))
}

fn double_well_geometry(config: &ScenarioConfig, setup: &Setup) -> DoubleWellGeometry {
    let p = &config.potential;
    let s = &setup.scales;
    let separation = s.to_dimless_length(p.separation.unwrap_or_default());
    let right_floor = if p.cancel_tilt {
        -separation
    } else {
        s.to_dimless_energy(p.right_floor.unwrap_or(0.0))
    };
    DoubleWellGeometry {
        width: s.to_dimless_length(p.width.unwrap_or_default()),
        separation,
        left_floor: s.to_dimless_energy(p.left_floor),
        right_floor,
        left_edge: setup.position(p.left_edge),
    }
}

/// Level of the assembled double-well spectrum.
#[derive(Clone, Copy, Debug)]
struct PairLevel {
    well: Well,
    spatial: f64,
    mean: f64,
    zeeman: [f64; 2],
}

/// Two distant wells.
pub fn run_double_well(config: &ScenarioConfig) -> Result<ScenarioReport> {
    if config.potential.kind != PotentialKind::DoubleWell {
        return Err(invalid("double-well scenario needs potential.kind = double_well"));
    }
    let setup = Setup::new(config)?;
    let geometry = double_well_geometry(config, &setup);
    let far = geometry.left_edge + geometry.separation + geometry.width;
    let regime = setup.regime(config, geometry.left_edge.abs().max(far.abs()))?;
    let controls = config.grid.controls();
    let tilt = config.grid.include_tilt;
    let k = config.levels;
    let s = &setup.scales;
    let c = &setup.coupling;

    // Per-well spatial energies, mean positions and exact-sector Zeeman
    // shifts, indexed [well][n].
    let mut per_well: [Vec<PairLevel>; 2] = [Vec::new(), Vec::new()];
    let mut wavefunctions_out = Vec::new();
    match config.double_well.solver {
        DoubleWellSolver::Composite => {
            let composite = composite_double_well(geometry, &controls, tilt, k)?;
            for (w, local) in composite.local.iter().enumerate() {
                let edge = composite.edges[w];
                let exact = exact_levels(&local.hamiltonian, &local.spectrum, c, s, edge)?;
                let zeeman = |n: usize, spin: Spin| {
                    exact
                        .entries
                        .iter()
                        .find(|l| l.n == n && l.spin == spin)
                        .map(|l| l.zeeman)
                        .unwrap_or_default()
                };
                for n in 0..k {
                    let level = composite.level(w, n);
                    per_well[w].push(PairLevel {
                        well: level.well,
                        spatial: level.energy,
                        mean: level.mean_position,
                        zeeman: [zeeman(n, Spin::Up), zeeman(n, Spin::Down)],
                    });
                }
                wavefunctions_out.extend(wavefunctions(&local.spectrum, edge, w * k));
            }
        }
        DoubleWellSolver::SingleGrid => {
            let (solution, levels) = single_grid_double_well(geometry, &controls, tilt, 2 * k)?;
            let exact = exact_levels(&solution.hamiltonian, &solution.spectrum, c, s, 0.0)?;
            for (i, level) in levels.iter().enumerate() {
                let zeeman = |spin: Spin| {
                    exact
                        .entries
                        .iter()
                        .find(|l| l.n == i && l.spin == spin)
                        .map(|l| l.zeeman)
                        .unwrap_or_default()
                };
                let w = usize::from(level.well == Well::Right);
                if per_well[w].len() < k {
                    per_well[w].push(PairLevel {
                        well: level.well,
                        spatial: level.energy,
                        mean: level.mean_position,
                        zeeman: [zeeman(Spin::Up), zeeman(Spin::Down)],
                    });
                }
            }
            wavefunctions_out = wavefunctions(&solution.spectrum, 0.0, 0);
        }
    }
    let pairs = per_well[0].len().min(per_well[1].len());
    if pairs == 0 {
        return Err(Error::Geometry(
            "single-grid solve found no level in one of the wells; raise levels".into(),
        ));
    }

    let b = s.beta_dimless;
    let threshold = config.double_well.degeneracy_threshold;
    let ground_decision = degeneracy_resolve(per_well[0][0].spatial, per_well[1][0].spatial, b, threshold);
    let mut assembled: Vec<PairLevel> = Vec::with_capacity(2 * pairs);
    for n in 0..pairs {
        let (left, right) = (per_well[0][n], per_well[1][n]);
        match degeneracy_resolve(left.spatial, right.spatial, b, threshold).branch {
            Branch::BoltzmannTwoLevel => assembled.extend([left, right]),
            Branch::SymmetricDelocalized => {
                let spatial = 0.5 * (left.spatial + right.spatial);
                let mean = 0.5 * (left.mean + right.mean);
                // The exact sectors are diagonal in the localized basis.
                assembled.push(PairLevel {
                    well: Well::Symmetric,
                    spatial,
                    mean,
                    zeeman: left.zeeman,
                });
                assembled.push(PairLevel {
                    well: Well::Antisymmetric,
                    spatial,
                    mean,
                    zeeman: right.zeeman,
                });
            }
        }
    }
    assembled.sort_by(|x, y| x.spatial.total_cmp(&y.spatial));

    let mut perturbative = LevelSet {
        entries: Vec::new(),
        source: LevelSource::Perturbative,
        corrections: Vec::new(),
    };
    let mut exact = LevelSet {
        entries: Vec::new(),
        source: LevelSource::ExactSector,
        corrections: Vec::new(),
    };
    for (n, level) in assembled.iter().enumerate() {
        let split = (1.0 + s.lapse_slope * level.mean) * c.w;
        for (i, spin) in Spin::BOTH.into_iter().enumerate() {
            perturbative.entries.push(Level {
                n,
                spin,
                spatial: level.spatial,
                zeeman: spin.sign::<f64>() * split,
                mean_position: level.mean,
            });
            exact.entries.push(Level {
                n,
                spin,
                spatial: level.spatial,
                zeeman: level.zeeman[i],
                mean_position: level.mean,
            });
        }
    }
    let levels: Vec<LevelSummary> = assembled
        .iter()
        .enumerate()
        .map(|(n, l)| level_summary(&setup, n, Some(l.well), l.spatial, l.mean))
        .collect();

    let (left, right) = (per_well[0][0], per_well[1][0]);
    let weights = occupation_log_weights(&perturbative, b);
    let right_occupation: f64 = perturbative
        .entries
        .iter()
        .zip(&weights)
        .filter(|(l, _)| assembled[l.n].well == Well::Right)
        .map(|(_, w)| w.exp())
        .sum();
    let (beta_left, beta_right) = (s.local_beta(left.mean), s.local_beta(right.mean));
    let summary = DoubleWellSummary {
        solver: config.double_well.solver,
        decision: ground_decision,
        energy_left: left.spatial,
        energy_right: right.spatial,
        beta_left,
        beta_right,
        suppression_exponent: b * (right.spatial - left.spatial),
        right_occupation,
        beta_ratio: beta_right / beta_left,
    };
    let mut checks = Vec::new();
    if ground_decision.branch == Branch::SymmetricDelocalized {
        let state = thermal_state(&perturbative, c, s)?;
        if let Some(beta) = state.beta_eff_dimless {
            let mean = 0.5 * (beta_left + beta_right);
            checks.push(Check::at_most("average_beta", (beta / mean - 1.0).abs(), 1e-9));
        }
    }
    let assembly = Assembly {
        levels,
        perturbative,
        exact,
        wavefunctions: wavefunctions_out,
        checks,
    };
    report(ScenarioKind::DoubleWell, config, &setup, regime, assembly, Some(summary))
}

/// Runs the scenario matching the configured potential.
pub fn run_scenario(config: &ScenarioConfig) -> Result<ScenarioReport> {
    match config.potential.kind {
        PotentialKind::InfiniteWell => run_extended_well(config),
        PotentialKind::DoubleWell => run_double_well(config),
        PotentialKind::Tabulated => run_tabulated(config),
    }
}

/// Spatial spectrum only, without spin or relaxation.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectrumRun {
    pub scales: ScaleSystem<f64>,
    pub frame: FrameSummary,
    pub levels: Vec<LevelSummary>,
    #[serde(skip)]
    pub wavefunctions: Vec<Wavefunction>,
}

pub fn run_spectrum(config: &ScenarioConfig) -> Result<SpectrumRun> {
    let setup = Setup::new(config)?;
    let controls = config.grid.controls();
    let tilt = config.grid.include_tilt;
    let (levels, wavefunctions_out) = match config.potential.kind {
        PotentialKind::InfiniteWell => {
            let width = setup.scales.to_dimless_length(config.potential.width.unwrap_or_default());
            let edge = setup.position(config.potential.left_edge);
            let solution = solve_single_well(width, edge, &controls, tilt, config.levels)?;
            let floor = setup.scales.to_dimless_energy(config.potential.left_floor);
            let sp = &solution.spectrum;
            let levels = (0..sp.len())
                .map(|n| level_summary(&setup, n, None, sp.energies[n] + floor, sp.mean_positions[n]))
                .collect();
            (levels, wavefunctions(sp, 0.0, 0))
        }
        PotentialKind::Tabulated => {
            let (spec, grid) = tabulated_problem(config)?;
            let solution = solve_on_grid(&spec, &grid, tilt, config.levels)?;
            let sp = &solution.spectrum;
            let levels = (0..sp.len())
                .map(|n| level_summary(&setup, n, None, sp.energies[n], sp.mean_positions[n]))
                .collect();
            (levels, wavefunctions(sp, 0.0, 0))
        }
        PotentialKind::DoubleWell => {
            let geometry = double_well_geometry(config, &setup);
            let composite = composite_double_well(geometry, &controls, tilt, config.levels)?;
            let levels = composite
                .levels()
                .iter()
                .enumerate()
                .map(|(n, l)| level_summary(&setup, n, Some(l.well), l.energy, l.mean_position))
                .collect();
            let mut waves = Vec::new();
            for (w, local) in composite.local.iter().enumerate() {
                waves.extend(wavefunctions(&local.spectrum, composite.edges[w], w * config.levels));
            }
            (levels, waves)
        }
    };
    Ok(SpectrumRun {
        scales: setup.scales,
        frame: setup.frame_summary(),
        levels,
        wavefunctions: wavefunctions_out,
    })
}

/// Parameter varied by [`sweep`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepAxis {
    #[serde(rename = "a")]
    Acceleration,
    #[serde(rename = "L")]
    Width,
    #[serde(rename = "l")]
    Separation,
    #[serde(rename = "B")]
    Field,
    #[serde(rename = "E_R0")]
    RightFloor,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            Self::Acceleration => "a",
            Self::Width => "L",
            Self::Separation => "l",
            Self::Field => "B",
            Self::RightFloor => "E_R0",
        }
    }

    pub fn apply(self, config: &mut ScenarioConfig, value: f64) {
        match self {
            Self::Acceleration => config.a = value,
            Self::Width => config.potential.width = Some(value),
            Self::Separation => config.potential.separation = Some(value),
            Self::Field => {
                config.field = Some(value);
                config.omega = None;
            }
            Self::RightFloor => {
                config.potential.right_floor = Some(value);
                config.potential.cancel_tilt = false;
            }
        }
    }
}

impl FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "a" => Ok(Self::Acceleration),
            "L" => Ok(Self::Width),
            "l" => Ok(Self::Separation),
            "B" => Ok(Self::Field),
            "E_R0" => Ok(Self::RightFloor),
            other => Err(invalid(format!(
                "sweep axis must be one of a, L, l, B, E_R0 (got {other:?})"
            ))),
        }
    }
}

/// One point of a sweep.
#[derive(Debug)]
pub struct SweepPoint {
    pub value: f64,
    pub result: Result<ScenarioReport>,
}

/// Independent runs over `values`, in parallel; results keep the order of
/// `values` and failures stay attached to their point.
pub fn sweep(base: &ScenarioConfig, axis: SweepAxis, values: &[f64]) -> Vec<SweepPoint> {
    values
        .par_iter()
        .map(|&value| {
            let mut config = base.clone();
            axis.apply(&mut config, value);
            SweepPoint {
                value,
                result: run_scenario(&config),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const A: f64 = 2.5e20;

    fn quiet(mut c: ScenarioConfig) -> ScenarioConfig {
        c.relaxation.enabled = false;
        c
    }

    #[test]
    fn validation_messages_name_the_invariant() {
        let mut c = ScenarioConfig::new(-1.0, PotentialConfig::infinite_well(1e-7));
        assert!(matches!(c.validate(), Err(Error::Validation(m)) if m == "a > 0"));
        c.a = A;
        assert!(c.validate().is_ok());
        c.potential = PotentialConfig::double_well(1e-7, 1e-8);
        assert!(matches!(c.validate(), Err(Error::Validation(m)) if m == "l > L"));
        c.potential = PotentialConfig::double_well(1e-7, 1e-6);
        c.potential.cancel_tilt = true;
        c.potential.right_floor = Some(0.0);
        assert!(c.validate().is_err());
        c.potential.right_floor = None;
        c.field = Some(1.0);
        c.omega = Some(1.0);
        assert!(c.validate().is_err());
    }

    #[test]
    fn degeneracy_branches() {
        assert_eq!(degeneracy_resolve(1.0, 1.0, 5e3, 1e-3).branch, Branch::SymmetricDelocalized);
        let d = degeneracy_resolve(0.0, 2.0, 5e9, 1e-3);
        assert_eq!(d.branch, Branch::BoltzmannTwoLevel);
        assert_eq!(d.exponent, 1e10);
        let edge = degeneracy_resolve(0.0, 1e-3, 1.0, 1e-3);
        assert_eq!(edge.branch, Branch::BoltzmannTwoLevel);
        assert_eq!(degeneracy_resolve(0.0, 1e-3, 1.0, 1e-3), edge);
    }

    #[test]
    fn extended_well_reproduces_ground_state_dominance() {
        let c = ScenarioConfig::new(A, PotentialConfig::infinite_well(1e-7));
        let r = run_extended_well(&c).unwrap();
        let gap = r.log_weight_gap.unwrap();
        assert!((gap / 8.5e3 - 1.0).abs() < 0.05, "gap {gap}");
        assert_eq!(r.ground_occupation, 1.0);
        assert!((r.ground_lapse_offset / 1.30e-6 - 1.0).abs() < 0.02);
        assert!(r.passed(), "{:?}", r.checks);
        let t = r.t_eff_kelvin.unwrap();
        assert!((t / r.frame.unruh_temperature_kelvin - 1.0).abs() < 2e-6);
        assert!(r.exact_relative_difference.unwrap().abs() < 1e-8);
        let relax = r.relaxation.unwrap();
        assert!(relax.final_gibbs_deviation < 1e-8);
    }

    #[test]
    fn bhl_limit_without_tilt() {
        let mut c = quiet(ScenarioConfig::new(A, PotentialConfig::infinite_well(1e-9)));
        c.grid.include_tilt = false;
        c.potential.left_edge = -0.5e-9;
        c.levels = 2;
        let r = run_extended_well(&c).unwrap();
        assert!(r.checks.iter().any(|ch| ch.name == "bhl_limit" && ch.passed), "{:?}", r.checks);
    }

    #[test]
    fn wrong_kind_is_rejected() {
        let c = ScenarioConfig::new(A, PotentialConfig::double_well(1e-7, 1e-6));
        assert!(matches!(run_extended_well(&c), Err(Error::Validation(_))));
    }

    #[test]
    fn regime_failure_aborts() {
        let c = ScenarioConfig::new(A, PotentialConfig::double_well(1e-7, 1e-3));
        assert!(matches!(run_double_well(&c), Err(Error::Regime(_))));
    }

    #[test]
    fn strict_regime_rejects_warnings() {
        let mut c = quiet(ScenarioConfig::new(A, PotentialConfig::double_well(1e-7, 1e-6)));
        assert!(run_double_well(&c).is_ok());
        c.regime.strict = true;
        assert!(matches!(run_double_well(&c), Err(Error::Regime(_))));
    }

    #[test]
    fn cancelled_tilt_gives_average_beta() {
        let mut c = quiet(ScenarioConfig::new(A, PotentialConfig::double_well(1e-7, 1e-6)));
        c.potential.cancel_tilt = true;
        let r = run_double_well(&c).unwrap();
        let dw = r.double_well.as_ref().unwrap();
        assert_eq!(dw.decision.branch, Branch::SymmetricDelocalized);
        assert_eq!(dw.energy_left, dw.energy_right);
        let mean = 0.5 * (dw.beta_left + dw.beta_right);
        let beta = r.perturbative.beta_eff_dimless.unwrap();
        assert!((beta / mean - 1.0).abs() < 1e-12);
        let al = A * 1e-6 / r.constants.c.powi(2);
        assert!((dw.beta_ratio - (1.0 + al)).abs() < 1e-8);
    }

    #[test]
    fn symmetric_wells_leave_right_empty() {
        let mut c = quiet(ScenarioConfig::new(A, PotentialConfig::double_well(1e-7, 1e-6)));
        c.regime.extent = 10.0;
        let r = run_double_well(&c).unwrap();
        let dw = r.double_well.unwrap();
        assert_eq!(dw.right_occupation, 0.0);
        let expect = r.scales.beta_dimless * r.scales.to_dimless_length(1e-6);
        assert!((dw.suppression_exponent / expect - 1.0).abs() < 1e-9);
        let single = run_extended_well(&ScenarioConfig::new(A, PotentialConfig::infinite_well(1e-7)).clone()).unwrap();
        let (b1, b2) = (r.perturbative.beta_eff_dimless.unwrap(), single.perturbative.beta_eff_dimless.unwrap());
        assert!((b1 / b2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_grid_refuses_macroscopic_separation() {
        let g = DoubleWellGeometry {
            width: 10.0,
            separation: 2e5,
            left_floor: 0.0,
            right_floor: 0.0,
            left_edge: 0.0,
        };
        assert!(matches!(
            single_grid_double_well(g, &GridControls::default(), true, 2),
            Err(Error::Geometry(_))
        ));
    }

    #[test]
    fn composite_matches_single_grid_on_small_instance() {
        let h = 2f64.powi(-9);
        let controls = GridControls {
            points: 3,
            spacing: Some(h),
            padding: 8.0,
        };
        for right_floor in [0.0, -200.5, -199.5] {
            let g = DoubleWellGeometry {
                width: 10.0,
                separation: 200.0,
                left_floor: 0.0,
                right_floor,
                left_edge: 0.0,
            };
            let comp = composite_double_well(g, &controls, true, 2).unwrap().levels();
            let (_, single) = single_grid_double_well(g, &controls, true, 4).unwrap();
            let mut matched = 0;
            for b in &single {
                let Some(a) = comp.iter().find(|a| a.well == b.well && a.index == b.index) else {
                    continue;
                };
                matched += 1;
                assert!((a.energy / b.energy - 1.0).abs() < 1e-9, "{a:?} {b:?}");
                assert!((a.mean_position / b.mean_position - 1.0).abs() < 1e-9);
            }
            assert!(matched >= 2);
            if right_floor != 0.0 {
                assert_eq!(matched, 4);
            }
        }
    }

    #[test]
    fn recentering_preserves_temperature() {
        let c = quiet(ScenarioConfig::new(A, PotentialConfig::infinite_well(1e-7)));
        let mut shifted = c.clone();
        shifted.recenter = Some(0.5e-7);
        let (r0, r1) = (run_extended_well(&c).unwrap(), run_extended_well(&shifted).unwrap());
        let (t0, t1) = (r0.t_eff_kelvin.unwrap(), r1.t_eff_kelvin.unwrap());
        assert!((t1 / t0 - 1.0).abs() < 1e-9, "{t0} {t1}");
    }

    #[test]
    fn sweep_is_order_stable_and_collects_errors() {
        let mut base = quiet(ScenarioConfig::new(A, PotentialConfig::infinite_well(1e-7)));
        base.levels = 2;
        base.grid.points = 4001;
        let values = [1e20, 2.5e20, -1.0, 5e20];
        let out = sweep(&base, SweepAxis::Acceleration, &values);
        assert_eq!(out.iter().map(|p| p.value).collect::<Vec<_>>(), values);
        assert!(out[2].result.is_err());
        let beta = |i: usize| out[i].result.as_ref().unwrap().frame.unruh_beta_per_joule;
        assert!((beta(0) / beta(3) - 5.0).abs() < 1e-12);
        assert!(sweep(&base, SweepAxis::Acceleration, &[]).is_empty());
        assert_eq!("E_R0".parse::<SweepAxis>().unwrap(), SweepAxis::RightFloor);
        assert!("x".parse::<SweepAxis>().is_err());
    }
}
