//! File writers: fixed CSV schemas, JSON mirrors and the run manifest.

use std::fs::{self, File};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::Context;
use serde::Serialize;
use unruh_core::kinematics::PhysicalConstants;
use unruh_core::relaxation::Trajectory;
use unruh_core::scenarios::{Check, LevelSummary, ScenarioConfig, ScenarioReport, Wavefunction, Well};
use unruh_core::spectral::ScaleSystem;
use unruh_core::thermometry::{Spin, SpinThermalState};

/// 17 significant digits: enough to round-trip any `f64`.
pub fn float(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(float).unwrap_or_default()
}

/// Collects written file names for the manifest.
pub struct Emitter {
    dir: PathBuf,
    files: Vec<String>,
}

impl Emitter {
    pub fn new(dir: &Path) -> anyhow::Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn files(&self) -> &[String] {
        &self.files
    }

    fn path(&mut self, name: &str) -> PathBuf {
        self.files.push(name.to_string());
        self.dir.join(name)
    }

    pub fn csv<I>(&mut self, name: &str, header: &[&str], rows: I) -> anyhow::Result<()>
    where
        I: IntoIterator<Item = Vec<String>>,
    {
        let path = self.path(name);
        let file = File::create(&path).with_context(|| format!("cannot create {}", path.display()))?;
        let mut w = csv::Writer::from_writer(file);
        w.write_record(header)?;
        for row in rows {
            w.write_record(&row)?;
        }
        w.flush().with_context(|| format!("cannot write {}", path.display()))?;
        Ok(())
    }

    pub fn json<T: Serialize + ?Sized>(&mut self, name: &str, value: &T) -> anyhow::Result<()> {
        let path = self.path(name);
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        fs::write(&path, text).with_context(|| format!("cannot write {}", path.display()))?;
        Ok(())
    }

    pub fn text(&mut self, name: &str, text: &str) -> anyhow::Result<()> {
        let path = self.path(name);
        fs::write(&path, text).with_context(|| format!("cannot write {}", path.display()))?;
        Ok(())
    }
}

pub fn spectrum(e: &mut Emitter, levels: &[LevelSummary]) -> anyhow::Result<()> {
    e.csv(
        "spectrum.csv",
        &["n", "E_dimless", "E_joule", "zbar_dimless", "beta_bar_per_joule"],
        levels.iter().map(|l| {
            vec![
                l.n.to_string(),
                float(l.energy_dimless),
                float(l.energy_joule),
                float(l.mean_position_dimless),
                float(l.beta_bar_per_joule),
            ]
        }),
    )
}

fn well_name(w: Well) -> &'static str {
    match w {
        Well::Left => "left",
        Well::Right => "right",
        Well::Symmetric => "symmetric",
        Well::Antisymmetric => "antisymmetric",
    }
}

pub fn wells(e: &mut Emitter, levels: &[LevelSummary]) -> anyhow::Result<()> {
    e.csv(
        "wells.csv",
        &["n", "well"],
        levels
            .iter()
            .filter_map(|l| l.well.map(|w| vec![l.n.to_string(), well_name(w).to_string()])),
    )
}

pub fn states(e: &mut Emitter, waves: &[Wavefunction], scales: &ScaleSystem<f64>) -> anyhow::Result<()> {
    e.csv(
        "states.csv",
        &["n", "z_dimless", "z_meters", "phi"],
        waves.iter().flat_map(|w| {
            w.z_dimless.iter().zip(&w.phi).map(move |(&z, &phi)| {
                vec![w.n.to_string(), float(z), float(scales.to_meters(z)), float(phi)]
            })
        }),
    )
}

pub fn trajectory(e: &mut Emitter, traj: Option<&Trajectory<f64>>, stride: usize) -> anyhow::Result<()> {
    let thinned = traj.map(|t| t.thinned(stride));
    let rows = thinned.iter().flat_map(|t| {
        t.times.iter().zip(&t.populations).flat_map(|(&time, p)| {
            p.iter()
                .enumerate()
                .map(move |(k, &x)| vec![float(time), k.to_string(), float(x)])
        })
    });
    e.csv("relax.csv", &["t_seconds", "level_index", "population"], rows)
}

fn spin_name(s: Spin) -> &'static str {
    match s {
        Spin::Up => "up",
        Spin::Down => "down",
    }
}

pub fn occupations(e: &mut Emitter, report: &ScenarioReport) -> anyhow::Result<()> {
    e.csv(
        "occupations.csv",
        &["n", "spin", "log_weight"],
        report
            .occupations
            .iter()
            .map(|o| vec![o.n.to_string(), spin_name(o.spin).to_string(), float(o.log_weight)]),
    )
}

pub fn spin_state(e: &mut Emitter, report: &ScenarioReport) -> anyhow::Result<()> {
    let row = |source: &str, s: &SpinThermalState<f64>, t: Option<f64>| {
        vec![
            source.to_string(),
            float(s.p_plus),
            float(s.p_minus),
            float(s.log_c_plus),
            float(s.log_c_minus),
            opt(s.beta_eff_dimless),
            opt(s.beta_eff_per_joule),
            opt(t),
        ]
    };
    e.csv(
        "spin_state.csv",
        &[
            "source",
            "p_plus",
            "p_minus",
            "log_c_plus",
            "log_c_minus",
            "beta_eff_dimless",
            "beta_eff_per_joule",
            "t_eff_kelvin",
        ],
        [
            row("perturbative", &report.perturbative, report.t_eff_kelvin),
            row("exact_sector", &report.exact, report.t_eff_exact_kelvin),
        ],
    )
}

pub fn checks(e: &mut Emitter, checks: &[Check]) -> anyhow::Result<()> {
    e.csv(
        "checks.csv",
        &["name", "passed", "value", "limit"],
        checks
            .iter()
            .map(|c| vec![c.name.clone(), c.passed.to_string(), float(c.value), float(c.limit)]),
    )
}

pub fn double_well(e: &mut Emitter, report: &ScenarioReport) -> anyhow::Result<()> {
    let Some(dw) = &report.double_well else {
        return Ok(());
    };
    let branch = serde_json::to_value(dw.decision.branch)?;
    let rows = vec![
        vec!["branch".into(), branch.as_str().unwrap_or_default().to_string()],
        vec!["degeneracy_exponent".into(), float(dw.decision.exponent)],
        vec!["energy_left_dimless".into(), float(dw.energy_left)],
        vec!["energy_right_dimless".into(), float(dw.energy_right)],
        vec!["beta_left_dimless".into(), float(dw.beta_left)],
        vec!["beta_right_dimless".into(), float(dw.beta_right)],
        vec!["beta_ratio".into(), float(dw.beta_ratio)],
        vec!["suppression_exponent".into(), float(dw.suppression_exponent)],
        vec!["right_occupation".into(), float(dw.right_occupation)],
    ];
    e.csv("double_well.csv", &["quantity", "value"], rows)
}

/// Everything a scenario run writes in CSV mode, except the manifest.
pub fn report_csv(e: &mut Emitter, report: &ScenarioReport) -> anyhow::Result<()> {
    spectrum(e, &report.levels)?;
    if report.double_well.is_some() {
        wells(e, &report.levels)?;
        double_well(e, report)?;
    }
    occupations(e, report)?;
    spin_state(e, report)?;
    checks(e, &report.checks)?;
    Ok(())
}

#[derive(Serialize)]
pub struct CheckSummary<'a> {
    pub name: &'a str,
    pub passed: bool,
}

#[derive(Serialize)]
pub struct RunManifest<'a> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub timestamp_unix: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub config: Option<&'a ScenarioConfig>,
    pub constants: PhysicalConstants<f64>,
    pub files: Vec<String>,
    pub checks: Vec<CheckSummary<'a>>,
    pub all_passed: bool,
}

impl<'a> RunManifest<'a> {
    pub fn new(command: String, seed: Option<u64>, config: Option<&'a ScenarioConfig>, checks: &'a [Check]) -> Self {
        let timestamp_unix = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or_default();
        Self {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command,
            timestamp_unix,
            seed,
            config,
            constants: PhysicalConstants::codata2018(),
            files: Vec::new(),
            checks: checks
                .iter()
                .map(|c| CheckSummary {
                    name: &c.name,
                    passed: c.passed,
                })
                .collect(),
            all_passed: checks.iter().all(|c| c.passed),
        }
    }

    /// Writes `manifest.json`, listing every file the emitter produced.
    pub fn write(mut self, e: &mut Emitter) -> anyhow::Result<()> {
        self.files = e.files().to_vec();
        e.json("manifest.json", &self)
    }
}
