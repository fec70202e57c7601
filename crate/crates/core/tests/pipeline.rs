use std::fs;

use unruh_core::kinematics::RindlerFrame;
use unruh_core::relaxation::{build_rates, stationary_distribution, RateModel};
use unruh_core::scenarios::{
    run_double_well, run_extended_well, run_scenario, sweep, DoubleWellSolver, PotentialConfig, PotentialKind,
    ScenarioConfig, SweepAxis,
};
use unruh_core::spectral::{assemble_hamiltonian, build_potential, lowest_eigenpairs, make_scales, Grid, PotentialSpec};
use unruh_core::thermometry::{perturbed_levels, thermal_state, Spin, SpinCoupling};
use unruh_core::Error;

const A: f64 = 2.5e20;

fn quiet(potential: PotentialConfig) -> ScenarioConfig {
    let mut c = ScenarioConfig::new(A, potential);
    c.relaxation.enabled = false;
    c
}

#[test]
fn master_equation_fixed_point_traces_to_reduced_spin_state() {
    let frame = RindlerFrame::new(A).unwrap();
    let scales = make_scales(&frame, 9.1093837015e-31).unwrap();
    let coupling = SpinCoupling::dimensionless(0.4, &scales, frame.constants().hbar);
    let grid = Grid::new(0.0, 3.0, 1201).unwrap();
    let ham = assemble_hamiltonian(&build_potential(&PotentialSpec::infinite_well(3.0), &grid).unwrap(), &grid, true)
        .unwrap();
    let spectrum = lowest_eigenpairs(&ham, 3).unwrap();
    let levels = perturbed_levels(&spectrum, &coupling, &scales).unwrap();
    // A hot effective bath so that every level carries weight.
    let beta = 0.3;
    let hot = unruh_core::spectral::ScaleSystem {
        beta_dimless: beta,
        ..scales
    };
    let state = thermal_state(&levels, &coupling, &hot).unwrap();
    let energies = levels.energies();
    for model in [RateModel::metropolis(1.0), RateModel::heat_bath(2.5)] {
        let system = build_rates(&energies, beta, model).unwrap();
        let p = stationary_distribution(&system).unwrap().p;
        let up: f64 = levels.entries.iter().zip(&p).filter(|(l, _)| l.spin == Spin::Up).map(|(_, x)| x).sum();
        assert!((up - state.p_plus).abs() < 1e-12, "{up} vs {}", state.p_plus);
    }
}

#[test]
fn tabulated_harmonic_potential() {
    let path = std::env::temp_dir().join(format!("unruh-harmonic-{}.csv", std::process::id()));
    let mut text = String::from("position,energy\n");
    for i in 0..=1000 {
        let x = i as f64 * 0.01;
        text.push_str(&format!("{x},{}\n", (x - 5.0) * (x - 5.0)));
    }
    fs::write(&path, text).unwrap();
    let mut c = quiet(PotentialConfig {
        kind: PotentialKind::Tabulated,
        table: Some(path.clone()),
        ..PotentialConfig::infinite_well(1.0)
    });
    c.potential.width = None;
    c.grid.include_tilt = false;
    c.grid.points = 4001;
    let r = run_scenario(&c).unwrap();
    fs::remove_file(&path).ok();
    for (n, l) in r.levels.iter().enumerate() {
        let exact = 2.0 * n as f64 + 1.0;
        assert!((l.energy_dimless / exact - 1.0).abs() < 1e-4, "{n}: {}", l.energy_dimless);
        assert!((l.mean_position_dimless - 5.0).abs() < 1e-6);
    }
    assert!(r.passed(), "{:?}", r.checks);
}

#[test]
fn missing_table_is_io_error() {
    let mut c = quiet(PotentialConfig {
        kind: PotentialKind::Tabulated,
        table: Some("/nonexistent/table.csv".into()),
        ..PotentialConfig::infinite_well(1.0)
    });
    c.potential.width = None;
    assert!(matches!(run_scenario(&c), Err(Error::Io(_))));
}

#[test]
fn width_sweep_interpolates_between_point_and_airy_limits() {
    let mut base = quiet(PotentialConfig::infinite_well(1e-7));
    base.levels = 2;
    base.grid.points = 4001;
    let widths = [3e-11, 1e-10, 3e-10, 1e-9, 3e-9, 1e-7];
    let points = sweep(&base, SweepAxis::Width, &widths);
    let offsets: Vec<f64> = points
        .iter()
        .map(|p| {
            let r = p.result.as_ref().unwrap();
            r.beta_eff_per_joule().unwrap() / r.frame.unruh_beta_per_joule - 1.0
        })
        .collect();
    assert!(offsets.windows(2).all(|w| w[1] > w[0] * (1.0 - 1e-6)), "{offsets:?}");
    // Narrow box: the particle sits at the centre.
    let eta_per_m = A / 299_792_458f64.powi(2);
    assert!((offsets[0] / (eta_per_m * widths[0] / 2.0) - 1.0).abs() < 1e-3);
    // Wide well: Airy ground state.
    assert!((offsets[5] / 1.2976e-6 - 1.0).abs() < 1e-3);
}

#[test]
fn double_well_solvers_agree_at_moderate_separation() {
    let mut c = quiet(PotentialConfig::double_well(2e-9, 6e-8));
    let scales = make_scales(&RindlerFrame::new(A).unwrap(), c.mass).unwrap();
    // Right ground state half a unit below the left one.
    let separation = scales.to_dimless_length(6e-8);
    c.potential.right_floor = Some(scales.to_joule(-(separation + 0.5)));
    c.levels = 2;
    c.grid.points = 2001;
    let composite = run_double_well(&c).unwrap();
    c.double_well.solver = DoubleWellSolver::SingleGrid;
    let single = run_double_well(&c).unwrap();
    for (a, b) in composite.levels.iter().zip(&single.levels) {
        assert_eq!(a.well, b.well);
        assert!((a.energy_dimless / b.energy_dimless - 1.0).abs() < 1e-8);
        assert!((a.beta_bar_dimless / b.beta_bar_dimless - 1.0).abs() < 1e-12);
    }
    let (x, y) = (composite.beta_eff_per_joule().unwrap(), single.beta_eff_per_joule().unwrap());
    assert!((x / y - 1.0).abs() < 1e-10);
}

#[test]
fn merged_wells_reduce_to_single_well() {
    let single = run_extended_well(&quiet(PotentialConfig::infinite_well(1e-7))).unwrap();
    let pair = run_double_well(&quiet(PotentialConfig::double_well(1e-7, 1.0000001e-7))).unwrap();
    let (a, b) = (single.beta_eff_per_joule().unwrap(), pair.beta_eff_per_joule().unwrap());
    assert!((a / b - 1.0).abs() < 1e-12);
    assert_eq!(pair.double_well.unwrap().right_occupation, 0.0);
}

#[test]
fn zero_field_leaves_spin_maximally_mixed() {
    let mut c = quiet(PotentialConfig::infinite_well(1e-7));
    c.field = Some(0.0);
    let r = run_extended_well(&c).unwrap();
    assert_eq!(r.perturbative.p_plus, 0.5);
    assert_eq!(r.t_eff_kelvin, None);
}

#[test]
fn single_precision_spectrum_tracks_double() {
    let solve = |n: usize| {
        let g64 = Grid::new(0.0_f64, 14.0, n).unwrap();
        let h64 = assemble_hamiltonian(&build_potential(&PotentialSpec::infinite_well(14.0), &g64).unwrap(), &g64, true)
            .unwrap();
        let g32 = Grid::new(0.0_f32, 14.0, n).unwrap();
        let h32 = assemble_hamiltonian(&build_potential(&PotentialSpec::infinite_well(14.0_f32), &g32).unwrap(), &g32, true)
            .unwrap();
        (lowest_eigenpairs(&h64, 3).unwrap(), lowest_eigenpairs(&h32, 3).unwrap())
    };
    let (s64, s32) = solve(801);
    for (a, b) in s64.energies.iter().zip(&s32.energies) {
        assert!((*a as f32 / b - 1.0).abs() < 1e-4, "{a} {b}");
    }
}
