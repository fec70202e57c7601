use serde::Serialize;

use super::hamiltonian::{assemble_hamiltonian, lowest_eigenpairs};
use super::potential::{build_potential, Grid, PotentialSpec};
use crate::error::Result;
use crate::scalar::Real;

/// Accepted band for the error ratio of a second-order scheme.
const RATIO_BAND: (f64, f64) = (3.5, 4.5);

#[derive(Clone, Debug, Serialize)]
pub struct LevelConvergence {
    /// Energies at spacing h, h/2 and h/4.
    pub energies: [f64; 3],
    /// Richardson extrapolate from the two finest grids.
    pub extrapolated: f64,
    /// `(E(h) - E*) / (E(h/2) - E*)`; 4 for a clean second-order scheme.
    pub error_ratio: f64,
    pub observed_order: f64,
    pub asymptotic: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceReport {
    pub points: [usize; 3],
    pub levels: Vec<LevelConvergence>,
    /// True when every level sits inside the second-order ratio band.
    pub asymptotic: bool,
}

/// Re-solves `spec` on `grid`, `grid/2` and `grid/4` and checks that the
/// lowest `k` energies converge at second order.
pub fn refine_check<T: Real>(
    spec: &PotentialSpec<T>,
    grid: &Grid<T>,
    k: usize,
    include_tilt: bool,
) -> Result<ConvergenceReport> {
    let grids = [*grid, grid.refined(), grid.refined().refined()];
    let mut solved = Vec::with_capacity(3);
    for g in &grids {
        let u = build_potential(spec, g)?;
        let ham = assemble_hamiltonian(&u, g, include_tilt)?;
        solved.push(lowest_eigenpairs(&ham, k)?.energies);
    }
    let levels: Vec<LevelConvergence> = (0..k)
        .map(|j| {
            let e = [
                solved[0][j].as_f64(),
                solved[1][j].as_f64(),
                solved[2][j].as_f64(),
            ];
            let extrapolated = e[2] + (e[2] - e[1]) / 3.0;
            let error_ratio = (e[0] - extrapolated) / (e[1] - extrapolated);
            let observed_order = ((e[0] - e[1]) / (e[1] - e[2])).abs().log2();
            LevelConvergence {
                energies: e,
                extrapolated,
                error_ratio,
                observed_order,
                asymptotic: error_ratio >= RATIO_BAND.0 && error_ratio <= RATIO_BAND.1,
            }
        })
        .collect();
    Ok(ConvergenceReport {
        points: [grids[0].len(), grids[1].len(), grids[2].len()],
        asymptotic: levels.iter().all(|l| l.asymptotic),
        levels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn box_converges_at_second_order() {
        let g = Grid::new(0.0_f64, 1.0, 401).unwrap();
        let r = refine_check(&PotentialSpec::infinite_well(1.0), &g, 3, false).unwrap();
        assert!(r.asymptotic, "{r:?}");
        for (j, l) in r.levels.iter().enumerate() {
            assert!((l.observed_order - 2.0).abs() < 0.1);
            let exact = std::f64::consts::PI.powi(2) * ((j + 1) * (j + 1)) as f64;
            assert!((l.extrapolated / exact - 1.0).abs() < 1e-9);
        }
    }
}
