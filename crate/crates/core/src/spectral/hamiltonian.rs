use serde::Serialize;

use super::eigen::SymTridiagonal;
use super::potential::{Grid, SampledPotential};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Finite-difference operator `-d²/dζ² + u(ζ) + tilt·ζ` restricted to the
/// nodes without a hard wall.
///
/// The matrix is built in local coordinates: the diagonal holds
/// `2/h² + (u_i - u_ref) + tilt·(ζ_i - z_min)` and the removed constant
/// `u_ref + tilt·z_min` is kept in `energy_offset`. This keeps matrix entries
/// O(1/h²) even for wells sitting far from the origin or on deep floors.
#[derive(Clone, Debug)]
pub struct Hamiltonian<T> {
    grid: Grid<T>,
    matrix: SymTridiagonal<T>,
    nodes: Vec<usize>,
    /// `u_i - u_ref` on active nodes.
    relative_potential: Vec<T>,
    tilt: T,
    /// Total coefficient of the local coordinate on the diagonal.
    slope: T,
    energy_offset: T,
}

pub fn assemble_hamiltonian<T: Real>(
    potential: &SampledPotential<T>,
    grid: &Grid<T>,
    include_tilt: bool,
) -> Result<Hamiltonian<T>> {
    if potential.values.len() != grid.len() || potential.dirichlet.len() != grid.len() {
        return Err(Error::Geometry(
            "sampled potential and grid lengths differ".into(),
        ));
    }
    let nodes: Vec<usize> = (0..grid.len()).filter(|&i| !potential.dirichlet[i]).collect();
    if nodes.is_empty() {
        return Err(Error::Geometry("no interior nodes".into()));
    }
    let u_ref = nodes
        .iter()
        .map(|&i| potential.values[i])
        .fold(T::infinity(), T::min);
    let tilt = if include_tilt { T::one() } else { T::zero() };
    let h = grid.spacing();
    let inv_h2 = T::one() / (h * h);
    let relative_potential: Vec<T> = nodes.iter().map(|&i| potential.values[i] - u_ref).collect();
    let diag = nodes
        .iter()
        .zip(&relative_potential)
        .map(|(&i, &du)| T::lit(2.0) * inv_h2 + du + tilt * grid.local(i))
        .collect();
    let off = nodes
        .windows(2)
        .map(|w| if w[1] == w[0] + 1 { -inv_h2 } else { T::zero() })
        .collect();
    Ok(Hamiltonian {
        grid: *grid,
        matrix: SymTridiagonal::new(diag, off)?,
        nodes,
        relative_potential,
        tilt,
        slope: tilt,
        energy_offset: u_ref + tilt * grid.z_min(),
    })
}

impl<T: Real> Hamiltonian<T> {
    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn matrix(&self) -> &SymTridiagonal<T> {
        &self.matrix
    }

    /// Grid indices of the active (non-wall) nodes, in matrix order.
    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    pub fn energy_offset(&self) -> T {
        self.energy_offset
    }

    pub fn has_tilt(&self) -> bool {
        self.tilt != T::zero()
    }

    /// Adds `constant + slope·ζ` to the operator; the constant part goes to
    /// the offset, the slope acts on local coordinates.
    pub fn with_linear_term(&self, constant: T, slope: T) -> Self {
        let mut out = self.clone();
        let grid = self.grid;
        let nodes = &self.nodes;
        out.matrix
            .add_to_diagonal(|j| slope * grid.local(nodes[j]));
        out.slope = self.slope + slope;
        out.energy_offset = self.energy_offset + constant + slope * grid.z_min();
        out
    }

    /// Discrete energy functional `∫ |φ'|² + (u + tilt·ζ) φ²` divided by
    /// `∫ φ²`, evaluated through differences so that no O(1/h²) terms cancel.
    pub fn rayleigh_quotient(&self, state: &[T]) -> T {
        let h = self.grid.spacing();
        let kinetic: T = state
            .windows(2)
            .map(|w| (w[1] - w[0]) * (w[1] - w[0]))
            .sum::<T>()
            / (h * h);
        let potential: T = self
            .nodes
            .iter()
            .zip(&self.relative_potential)
            .map(|(&i, &du)| (du + self.slope * self.grid.local(i)) * state[i] * state[i])
            .sum();
        let norm: T = state.iter().map(|&v| v * v).sum();
        (kinetic + potential) / norm + self.energy_offset
    }

    /// `‖Hφ - Eφ‖₂ / ‖φ‖₂` over active nodes.
    pub fn residual(&self, state: &[T], energy: T) -> T {
        let x: Vec<T> = self.nodes.iter().map(|&i| state[i]).collect();
        let hx = self.matrix.matvec(&x);
        let shifted = energy - self.energy_offset;
        let r: T = hx
            .iter()
            .zip(&x)
            .map(|(&y, &v)| (y - shifted * v) * (y - shifted * v))
            .sum();
        let norm: T = x.iter().map(|&v| v * v).sum();
        (r / norm).sqrt()
    }

    pub fn relative_potential(&self) -> &[T] {
        &self.relative_potential
    }
}

/// Trapezoid rule on a uniform grid.
pub fn trapezoid<T: Real>(values: &[T], h: T) -> T {
    let n = values.len();
    if n < 2 {
        return T::zero();
    }
    let inner: T = values.iter().copied().sum();
    h * (inner - (values[0] + values[n - 1]) / T::lit(2.0))
}

/// Lowest bound states of a [`Hamiltonian`].
#[derive(Clone, Debug, Serialize)]
pub struct SpatialSpectrum<T> {
    /// Dimensionless energies, ascending.
    pub energies: Vec<T>,
    /// States sampled on the whole grid (zero on walls), normalized so that
    /// the trapezoid rule gives `∫ φ² = 1`.
    #[serde(skip)]
    pub states: Vec<Vec<T>>,
    /// `∫ ζ φ²` for each state.
    pub mean_positions: Vec<T>,
    pub grid: Grid<T>,
}

impl<T: Real> SpatialSpectrum<T> {
    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    /// `∫ f(ζ) φ_n(ζ)²` by the trapezoid rule.
    pub fn expectation(&self, n: usize, f: impl Fn(T) -> T) -> T {
        let g = &self.grid;
        let integrand: Vec<T> = self.states[n]
            .iter()
            .enumerate()
            .map(|(i, &v)| f(g.point(i)) * v * v)
            .collect();
        trapezoid(&integrand, g.spacing())
    }

    /// `∫ φ_m φ_n`.
    pub fn overlap(&self, m: usize, n: usize) -> T {
        let prod: Vec<T> = self.states[m]
            .iter()
            .zip(&self.states[n])
            .map(|(&a, &b)| a * b)
            .collect();
        trapezoid(&prod, self.grid.spacing())
    }

    /// `⟨φ_m | ζ | φ_n⟩`.
    pub fn position_element(&self, m: usize, n: usize) -> T {
        let g = &self.grid;
        let prod: Vec<T> = self.states[m]
            .iter()
            .zip(&self.states[n])
            .enumerate()
            .map(|(i, (&a, &b))| g.local(i) * a * b)
            .collect();
        g.z_min() * self.overlap(m, n) + trapezoid(&prod, g.spacing())
    }
}

/// The `k` lowest eigenpairs, with states normalized on the grid and their
/// mean positions.
pub fn lowest_eigenpairs<T: Real>(ham: &Hamiltonian<T>, k: usize) -> Result<SpatialSpectrum<T>> {
    let active = ham.nodes.len();
    if k == 0 || 4 * k > active {
        return Err(Error::Domain(format!(
            "requested {k} states from {active} interior nodes; need 1 <= k <= n/4"
        )));
    }
    let pairs = ham.matrix.lowest_eigenpairs(k)?;
    let grid = ham.grid;
    let h = grid.spacing();
    let mut energies = Vec::with_capacity(k);
    let mut states = Vec::with_capacity(k);
    let mut mean_positions = Vec::with_capacity(k);
    for (value, vector) in pairs.values.into_iter().zip(pairs.vectors) {
        let mut state = vec![T::zero(); grid.len()];
        for (&i, &v) in ham.nodes.iter().zip(&vector) {
            state[i] = v;
        }
        let density: Vec<T> = state.iter().map(|&v| v * v).collect();
        let scale = trapezoid(&density, h).sqrt();
        for v in state.iter_mut() {
            *v = *v / scale;
        }
        let weighted: Vec<T> = state
            .iter()
            .enumerate()
            .map(|(i, &v)| grid.local(i) * v * v)
            .collect();
        mean_positions.push(grid.z_min() + trapezoid(&weighted, h));
        energies.push(value + ham.energy_offset);
        states.push(state);
    }
    Ok(SpatialSpectrum {
        energies,
        states,
        mean_positions,
        grid,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::potential::{build_potential, PotentialSpec};

    fn box_spectrum(width: f64, n: usize, k: usize) -> SpatialSpectrum<f64> {
        let g = Grid::new(0.0, width, n).unwrap();
        let u = build_potential(&PotentialSpec::infinite_well(width), &g).unwrap();
        let h = assemble_hamiltonian(&u, &g, false).unwrap();
        lowest_eigenpairs(&h, k).unwrap()
    }

    #[test]
    fn stencil_definition() {
        let g = Grid::new(0.0_f64, 4.0, 5).unwrap();
        let u = build_potential(&PotentialSpec::infinite_well(4.0), &g).unwrap();
        let h = assemble_hamiltonian(&u, &g, false).unwrap();
        assert_eq!(h.matrix().diag(), &[2.0, 2.0, 2.0]);
        assert_eq!(h.matrix().off(), &[-1.0, -1.0]);
    }

    #[test]
    fn box_levels_scale_as_squares() {
        let s = box_spectrum(1.0, 20_001, 3);
        let e0 = std::f64::consts::PI.powi(2);
        for (j, &e) in s.energies.iter().enumerate() {
            let exact = e0 * ((j + 1) * (j + 1)) as f64;
            assert!((e / exact - 1.0).abs() < 1e-6, "level {j}: {e} vs {exact}");
        }
        for (j, &z) in s.mean_positions.iter().enumerate() {
            assert!((z - 0.5).abs() < 1e-8, "level {j} mean {z}");
        }
    }

    #[test]
    fn orthonormal_and_small_residual() {
        let g = Grid::new(0.0_f64, 14.0, 20_001).unwrap();
        let u = build_potential(&PotentialSpec::infinite_well(14.0), &g).unwrap();
        let ham = assemble_hamiltonian(&u, &g, true).unwrap();
        let s = lowest_eigenpairs(&ham, 4).unwrap();
        for m in 0..4 {
            for n in 0..4 {
                let want = if m == n { 1.0 } else { 0.0 };
                assert!((s.overlap(m, n) - want).abs() < 1e-10);
            }
            assert!(ham.residual(&s.states[m], s.energies[m]) < 1e-8);
            let rq = ham.rayleigh_quotient(&s.states[m]);
            assert!((rq - s.energies[m]).abs() < 1e-10 * s.energies[m].abs());
        }
        assert!(s.energies.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn offsets_do_not_change_local_physics() {
        // Same well, far from the origin on a floor that cancels the tilt.
        let g0 = Grid::new(0.0_f64, 12.0, 4001).unwrap();
        let s0 = {
            let u = build_potential(&PotentialSpec::infinite_well(12.0), &g0).unwrap();
            lowest_eigenpairs(&assemble_hamiltonian(&u, &g0, true).unwrap(), 2).unwrap()
        };
        let far = 3.0e6;
        let g1 = Grid::new(far, far + 12.0, 4001).unwrap();
        let spec = PotentialSpec::InfiniteWell {
            width: 12.0,
            left_edge: far,
            floor: -far,
        };
        let u = build_potential(&spec, &g1).unwrap();
        let s1 = lowest_eigenpairs(&assemble_hamiltonian(&u, &g1, true).unwrap(), 2).unwrap();
        for j in 0..2 {
            assert!((s1.energies[j] - s0.energies[j]).abs() < 1e-9);
            assert!((s1.mean_positions[j] - far - s0.mean_positions[j]).abs() < 1e-9);
        }
    }

    #[test]
    fn too_many_states_rejected() {
        let g = Grid::new(0.0_f64, 1.0, 11).unwrap();
        let u = build_potential(&PotentialSpec::infinite_well(1.0), &g).unwrap();
        let h = assemble_hamiltonian(&u, &g, false).unwrap();
        assert!(lowest_eigenpairs(&h, 3).is_err());
        assert!(lowest_eigenpairs(&h, 0).is_err());
        assert!(lowest_eigenpairs(&h, 2).is_ok());
    }

    #[test]
    fn trapezoid_integrates_linear_exactly() {
        let v = [0.0, 1.0, 2.0, 3.0];
        assert_eq!(trapezoid(&v, 1.0), 4.5);
    }
}
