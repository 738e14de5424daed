use serde::{Deserialize, Serialize};

use super::grid::TorusGrid;
use crate::config::Configuration;
use crate::error::{LabError, Result};

/// A periodic union of cubes that contains no congruent copy of `P`.
#[derive(Debug, Clone, PartialEq)]
pub struct CellAvoider {
    pub grid: TorusGrid,
    pub geometry: AvoiderGeometry,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AvoiderGeometry {
    /// Ideal cube side `s = 0.99·diam/√d`.
    pub cube_side: f64,
    /// Ideal gap `g = 1.01·diam`.
    pub gap: f64,
    /// `s + g`.
    pub pitch: f64,
    /// `(s/(s+g))^d`.
    pub density: f64,
    /// Cubes per axis after rasterization.
    pub periods: usize,
    pub cube_cells: usize,
    pub gap_cells: usize,
    /// Mean of the rasterized grid.
    pub raster_density: f64,
}

/// Cubes of side `s` with `s√d < diam P` on a lattice of pitch `s + g`,
/// `g > diam P`. A copy of `P` would need its two diameter-realizing points
/// in one cube (too small) or in two cubes (too far apart).
///
/// Rasterization shrinks cubes to whole cells (`⌊s/h⌋`) and widens gaps to
/// whole cells (`⌈g/h⌉`); the leftover at the wrap only enlarges one gap.
pub fn cell_avoider(p: &Configuration, side: f64, n: usize) -> Result<CellAvoider> {
    let diam = p.diameter();
    if diam <= 0.0 {
        return Err(LabError::InfeasibleGeometry("configuration has zero diameter".into()));
    }
    let d = p.ambient_dim;
    let cube_side = 0.99 * diam / (d as f64).sqrt();
    let gap = 1.01 * diam;
    let pitch = cube_side + gap;
    if pitch > side {
        return Err(LabError::InfeasibleGeometry(format!(
            "lattice pitch {pitch} exceeds the torus side {side}"
        )));
    }
    let h = side / n as f64;
    let cube_cells = (cube_side / h * (1.0 + 1e-12)).floor() as usize;
    let gap_cells = (gap / h * (1.0 - 1e-12)).ceil() as usize;
    if cube_cells == 0 {
        return Err(LabError::InfeasibleGeometry(format!(
            "cube side {cube_side} is below the cell width {h}"
        )));
    }
    let pitch_cells = cube_cells + gap_cells;
    let periods = n / pitch_cells;
    if periods == 0 {
        return Err(LabError::InfeasibleGeometry("rasterized pitch exceeds the grid".into()));
    }
    let inside = |i: usize| i % pitch_cells < cube_cells && i / pitch_cells < periods;
    let grid = TorusGrid::from_fn(d, side, n, |x| f64::from(x.iter().all(|&c| inside((c / h) as usize))))?;
    let raster_density = grid.density();
    Ok(CellAvoider {
        grid,
        geometry: AvoiderGeometry {
            cube_side,
            gap,
            pitch,
            density: (cube_side / pitch).powi(d as i32),
            periods,
            cube_cells,
            gap_cells,
            raster_density,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(len: f64, d: usize) -> Configuration {
        let mut b = vec![0.0; d];
        b[0] = len;
        Configuration::from_points("pair", vec![vec![0.0; d], b]).unwrap()
    }

    #[test]
    fn single_period_density_matches() {
        for d in [2usize, 3] {
            let p = pair(1.0, d);
            let s = 0.99 / (d as f64).sqrt();
            let side = s + 1.01;
            let n = 128;
            let a = cell_avoider(&p, side, n).unwrap();
            assert_eq!(a.geometry.periods, 1);
            let ideal = (s / side).powi(d as i32);
            assert!((a.geometry.density - ideal).abs() < 1e-15);
            assert!((a.grid.density() - ideal).abs() <= 2.0 * d as f64 / n as f64);
        }
    }

    #[test]
    fn dilation_scales_pitch() {
        let a = cell_avoider(&pair(0.1, 2), 1.0, 256).unwrap();
        let b = cell_avoider(&pair(0.2, 2), 2.0, 256).unwrap();
        assert!((b.geometry.pitch - 2.0 * a.geometry.pitch).abs() < 1e-12);
        assert!((b.geometry.density - a.geometry.density).abs() < 1e-15);
        assert_eq!(a.grid.values(), b.grid.values());
    }

    #[test]
    fn infeasible() {
        assert!(matches!(
            cell_avoider(&pair(1.0, 2), 1.0, 64),
            Err(LabError::InfeasibleGeometry(_))
        ));
    }

    #[test]
    fn raster_respects_geometry() {
        let a = cell_avoider(&pair(0.1, 2), 1.0, 200).unwrap();
        let h = 1.0 / 200.0;
        let g = a.geometry;
        assert!(g.cube_cells as f64 * h * 2f64.sqrt() < 0.1);
        assert!(g.gap_cells as f64 * h > 0.1);
        assert!(200 - (g.periods - 1) * (g.cube_cells + g.gap_cells) - g.cube_cells >= g.gap_cells);
    }
}
