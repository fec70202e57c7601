use std::io::Read;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Uniform grid on `[z_min, z_max]`, boundary nodes included.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Grid<T> {
    z_min: T,
    z_max: T,
    n: usize,
    h: T,
}

impl<T: Real> Grid<T> {
    pub fn new(z_min: T, z_max: T, n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::Geometry(format!("grid needs at least 3 points, got {n}")));
        }
        let h = (z_max - z_min) / T::lit_usize(n - 1);
        if !(h > T::zero()) || !h.is_finite() {
            return Err(Error::Geometry(format!(
                "grid spacing must be positive (z_min = {}, z_max = {})",
                z_min.as_f64(),
                z_max.as_f64()
            )));
        }
        Ok(Self { z_min, z_max, n, h })
    }

    /// Grid of width `width` whose spacing is as close to `spacing` as an
    /// integer number of cells allows.
    pub fn with_spacing(z_min: T, width: T, spacing: T) -> Result<Self> {
        if !(spacing > T::zero()) {
            return Err(Error::Geometry("grid spacing must be positive".into()));
        }
        let cells = (width / spacing).round().max(T::lit(2.0));
        let cells = cells
            .to_usize()
            .ok_or_else(|| Error::Geometry("grid too large".into()))?;
        Self::new(z_min, z_min + width, cells + 1)
    }

    pub fn z_min(&self) -> T {
        self.z_min
    }

    pub fn z_max(&self) -> T {
        self.z_max
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> T {
        self.h
    }

    /// Offset of node `i` from `z_min`.
    pub fn local(&self, i: usize) -> T {
        T::lit_usize(i) * self.h
    }

    pub fn point(&self, i: usize) -> T {
        self.z_min + self.local(i)
    }

    /// The same interval with the spacing halved.
    pub fn refined(&self) -> Self {
        Self {
            n: 2 * self.n - 1,
            h: self.h / T::lit(2.0),
            ..*self
        }
    }
}

/// Confining potential in dimensionless units.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PotentialSpec<T> {
    /// Infinitely deep square well `(left_edge, left_edge + width)` with a
    /// flat floor at `floor`.
    InfiniteWell { width: T, left_edge: T, floor: T },
    /// Two infinitely deep wells of equal `width` whose left edges are
    /// `separation` apart. The barrier between them is impenetrable.
    DoubleWell {
        width: T,
        separation: T,
        left_floor: T,
        right_floor: T,
        left_edge: T,
    },
    /// Piecewise-linear potential through `(positions, values)`, with hard
    /// walls at the grid ends.
    Tabulated { positions: Vec<T>, values: Vec<T> },
}

impl<T: Real> PotentialSpec<T> {
    pub fn infinite_well(width: T) -> Self {
        Self::InfiniteWell {
            width,
            left_edge: T::zero(),
            floor: T::zero(),
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            Self::InfiniteWell { width, .. } => {
                if !(*width > T::zero()) {
                    return Err(Error::Geometry("well width must be positive".into()));
                }
            }
            Self::DoubleWell {
                width, separation, ..
            } => {
                if !(*width > T::zero()) {
                    return Err(Error::Geometry("well width must be positive".into()));
                }
                if !(*separation > *width) {
                    return Err(Error::Geometry(format!(
                        "double well needs separation > width (l = {}, L = {})",
                        separation.as_f64(),
                        width.as_f64()
                    )));
                }
            }
            Self::Tabulated { positions, values } => {
                if positions.len() < 2 || positions.len() != values.len() {
                    return Err(Error::Geometry(
                        "tabulated potential needs matching position/value columns with at least two rows".into(),
                    ));
                }
                if positions.windows(2).any(|w| !(w[1] > w[0])) {
                    return Err(Error::Geometry(
                        "tabulated positions must be strictly increasing".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Open intervals `(left, right, floor)` of the square wells.
    fn wells(&self) -> Vec<(T, T, T)> {
        match *self {
            Self::InfiniteWell {
                width,
                left_edge,
                floor,
            } => vec![(left_edge, left_edge + width, floor)],
            Self::DoubleWell {
                width,
                separation,
                left_floor,
                right_floor,
                left_edge,
            } => {
                let right = left_edge + separation;
                vec![
                    (left_edge, left_edge + width, left_floor),
                    (right, right + width, right_floor),
                ]
            }
            Self::Tabulated { .. } => Vec::new(),
        }
    }
}

/// Potential sampled on a grid. Nodes flagged `dirichlet` carry a hard wall
/// (the state is forced to zero there); their `values` entry is unused.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledPotential<T> {
    pub values: Vec<T>,
    pub dirichlet: Vec<bool>,
}

pub fn build_potential<T: Real>(spec: &PotentialSpec<T>, grid: &Grid<T>) -> Result<SampledPotential<T>> {
    spec.validate()?;
    let n = grid.len();
    let tol = grid.spacing() * T::lit(1e-6);
    let mut values = vec![T::zero(); n];
    let mut dirichlet = vec![true; n];

    match spec {
        PotentialSpec::Tabulated { positions, values: table } => {
            let (first, last) = (positions[0], positions[positions.len() - 1]);
            if grid.z_min() < first - tol || grid.z_max() > last + tol {
                return Err(Error::Geometry(format!(
                    "grid [{}, {}] extends beyond the table [{}, {}]",
                    grid.z_min().as_f64(),
                    grid.z_max().as_f64(),
                    first.as_f64(),
                    last.as_f64()
                )));
            }
            let mut seg = 0;
            for i in 0..n {
                let z = grid.point(i).max(first).min(last);
                while seg + 2 < positions.len() && z > positions[seg + 1] {
                    seg += 1;
                }
                let (z0, z1) = (positions[seg], positions[seg + 1]);
                let w = (z - z0) / (z1 - z0);
                values[i] = table[seg] + w * (table[seg + 1] - table[seg]);
                dirichlet[i] = i == 0 || i == n - 1;
            }
        }
        _ => {
            for &(left, right, floor) in &spec.wells() {
                if left < grid.z_min() - tol || right > grid.z_max() + tol {
                    return Err(Error::Geometry(format!(
                        "well ({}, {}) exceeds grid [{}, {}]",
                        left.as_f64(),
                        right.as_f64(),
                        grid.z_min().as_f64(),
                        grid.z_max().as_f64()
                    )));
                }
                for i in 0..n {
                    let z = grid.point(i);
                    if z > left + tol && z < right - tol {
                        values[i] = floor;
                        dirichlet[i] = false;
                    }
                }
            }
        }
    }
    if dirichlet.iter().all(|&d| d) {
        return Err(Error::Geometry("no grid node lies inside a well".into()));
    }
    Ok(SampledPotential { values, dirichlet })
}

/// Reads a two-column `position,energy` CSV (dimensionless). A non-numeric
/// first row is treated as a header; `#` starts a comment line.
pub fn read_potential_table<T: Real, R: Read>(reader: R) -> Result<PotentialSpec<T>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut positions = Vec::new();
    let mut values = Vec::new();
    for (row, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| Error::Table(e.to_string()))?;
        if record.len() != 2 {
            return Err(Error::Table(format!(
                "row {}: expected 2 columns, found {}",
                row + 1,
                record.len()
            )));
        }
        let parsed: std::result::Result<Vec<f64>, _> =
            record.iter().map(|f| f.parse::<f64>()).collect();
        match parsed {
            Ok(v) => {
                positions.push(T::lit(v[0]));
                values.push(T::lit(v[1]));
            }
            Err(_) if row == 0 => continue,
            Err(e) => return Err(Error::Table(format!("row {}: {e}", row + 1))),
        }
    }
    let spec = PotentialSpec::Tabulated { positions, values };
    spec.validate()?;
    Ok(spec)
}

/// Upper estimate of the `k`-th (1-based) zero magnitude of Ai, from the
/// leading asymptotic term; it overestimates slightly for small `k`.
pub fn airy_level_estimate<T: Real>(k: usize) -> T {
    let k = T::lit_usize(k.max(1));
    (T::lit(3.0) * T::PI() / T::lit(8.0) * (T::lit(4.0) * k - T::one())).powf(T::lit(2.0 / 3.0))
        + T::lit(0.05)
}

/// Width of the region that must be resolved for the `k` lowest states of a
/// flat-floored well of `width`: up to the classical turning point of the
/// `k`-th Airy level plus `padding`, never beyond the far wall.
pub fn well_extent<T: Real>(width: T, include_tilt: bool, k: usize, padding: T) -> T {
    if !include_tilt {
        return width;
    }
    width.min(airy_level_estimate::<T>(k) + padding)
}

/// Grid resolution controls.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GridControls<T> {
    /// Point count per resolved region, used when `spacing` is `None`.
    pub points: usize,
    /// Fixed dimensionless spacing; overrides `points`.
    pub spacing: Option<T>,
    /// Dimensionless padding beyond the classical turning point.
    pub padding: T,
}

impl<T: Real> Default for GridControls<T> {
    fn default() -> Self {
        Self {
            points: 20_001,
            spacing: None,
            padding: T::lit(8.0),
        }
    }
}

impl<T: Real> GridControls<T> {
    /// Grid over `[z_min, z_min + width]` honouring these controls.
    pub fn grid(&self, z_min: T, width: T) -> Result<Grid<T>> {
        match self.spacing {
            Some(h) => Grid::with_spacing(z_min, width, h),
            None => Grid::new(z_min, z_min + width, self.points),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_basics() {
        let g = Grid::new(0.0_f64, 4.0, 5).unwrap();
        assert_eq!(g.spacing(), 1.0);
        assert_eq!(g.point(4), 4.0);
        assert_eq!(g.refined().len(), 9);
        assert!(Grid::new(0.0_f64, 1.0, 2).is_err());
        assert!(Grid::new(1.0_f64, 0.0, 10).is_err());
        let s = Grid::with_spacing(0.0_f64, 10.0, 2f64.powi(-10)).unwrap();
        assert_eq!(s.len(), 10241);
        assert_eq!(s.spacing(), 2f64.powi(-10));
    }

    #[test]
    fn infinite_well_is_zero_inside_with_walls() {
        let g = Grid::new(0.0_f64, 1.0, 11).unwrap();
        let u = build_potential(&PotentialSpec::infinite_well(1.0), &g).unwrap();
        assert!(u.dirichlet[0] && u.dirichlet[10]);
        assert!(u.dirichlet[1..10].iter().all(|&d| !d));
        assert!(u.values[1..10].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn double_well_layout() {
        let g = Grid::new(0.0_f64, 5.0, 51).unwrap();
        let spec = PotentialSpec::DoubleWell {
            width: 1.0,
            separation: 4.0,
            left_floor: 0.0,
            right_floor: -4.0,
            left_edge: 0.0,
        };
        let u = build_potential(&spec, &g).unwrap();
        let inside: Vec<usize> = (0..51).filter(|&i| !u.dirichlet[i]).collect();
        assert_eq!(inside.len(), 18);
        assert!(inside.iter().all(|&i| (1..10).contains(&i) || (41..50).contains(&i)));
        assert_eq!(u.values[45], -4.0);
        assert_eq!(u.values[5], 0.0);
    }

    #[test]
    fn geometry_errors() {
        let g = Grid::new(0.0_f64, 1.0, 11).unwrap();
        assert!(matches!(
            build_potential(&PotentialSpec::infinite_well(2.0), &g),
            Err(Error::Geometry(_))
        ));
        let bad = PotentialSpec::DoubleWell {
            width: 1.0,
            separation: 0.5,
            left_floor: 0.0,
            right_floor: 0.0,
            left_edge: 0.0,
        };
        assert!(build_potential(&bad, &g).is_err());
    }

    #[test]
    fn tabulated_interpolates() {
        let csv = "position,energy\n0,0\n1,2\n# comment\n2,0\n";
        let spec: PotentialSpec<f64> = read_potential_table(csv.as_bytes()).unwrap();
        let g = Grid::new(0.0, 2.0, 9).unwrap();
        let u = build_potential(&spec, &g).unwrap();
        assert!((u.values[2] - 1.0).abs() < 1e-15);
        assert!((u.values[4] - 2.0).abs() < 1e-15);
        assert!((u.values[6] - 1.0).abs() < 1e-15);
        assert!(u.dirichlet[0] && u.dirichlet[8] && !u.dirichlet[4]);
        let wide = Grid::new(-1.0, 2.0, 9).unwrap();
        assert!(build_potential(&spec, &wide).is_err());
        assert!(read_potential_table::<f64, _>("0,1\nx,2\n".as_bytes()).is_err());
    }

    #[test]
    fn extent_tracks_turning_point() {
        let e: f64 = well_extent(334.0, true, 3, 8.0);
        assert!(e > 5.52 + 8.0 && e < 5.52 + 8.5);
        assert_eq!(well_extent(334.0_f64, false, 3, 8.0), 334.0);
        assert_eq!(well_extent(3.0_f64, true, 3, 8.0), 3.0);
        assert!(airy_level_estimate::<f64>(1) > 2.33811);
    }
}
