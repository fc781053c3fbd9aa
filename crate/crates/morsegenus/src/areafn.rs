//! Empirical area function of a height sample and its finite differences.

use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::surfaces::PointCloud;

/// Uniform grid of heights `h_j = h_min + j * step` for `j < len`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeightGrid {
    pub h_min: f64,
    pub step: f64,
    pub len: usize,
}

impl HeightGrid {
    pub fn new(h_min: f64, step: f64, len: usize) -> Result<Self> {
        if !(step > 0.0 && step.is_finite()) || !h_min.is_finite() {
            return Err(param(format!("grid step must be positive and finite, got {step}")));
        }
        if len < 2 {
            return Err(param("a height grid needs at least two nodes"));
        }
        Ok(Self { h_min, step, len })
    }

    pub fn node(&self, j: usize) -> f64 {
        self.h_min + j as f64 * self.step
    }

    pub fn h_max(&self) -> f64 {
        self.node(self.len - 1)
    }

    pub fn intervals(&self) -> usize {
        self.len - 1
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.len).map(|j| self.node(j)).collect()
    }
}

/// Grid from the lowest sample height upward, padded so the top node is at or
/// above the highest sample.
pub fn height_grid(cloud: &PointCloud, step: f64) -> Result<HeightGrid> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(param(format!("grid step must be positive and finite, got {step}")));
    }
    let (lo, hi) = cloud.z_range().ok_or_else(|| Error::Input("empty point cloud".into()))?;
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(Error::Input("non-finite heights in point cloud".into()));
    }
    if hi <= lo {
        return Err(Error::Input("all points share one height; the grid is degenerate".into()));
    }
    let mut n = ((hi - lo) / step).ceil().max(1.0) as usize;
    if lo + n as f64 * step < hi {
        n += 1;
    }
    HeightGrid::new(lo, step, n + 1)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AreaSeries {
    pub grid: HeightGrid,
    /// Fraction of samples with height at or below each node.
    pub s: Vec<f64>,
    pub n: usize,
}

pub fn area_function(cloud: &PointCloud, grid: &HeightGrid) -> Result<AreaSeries> {
    let mut z = cloud.heights();
    if z.is_empty() {
        return Err(Error::Input("empty point cloud".into()));
    }
    if z.iter().any(|v| !v.is_finite()) {
        return Err(Error::Input("non-finite heights in point cloud".into()));
    }
    z.sort_unstable_by(f64::total_cmp);
    let (lo, hi) = (z[0], z[z.len() - 1]);
    if lo < grid.h_min || hi > grid.h_max() {
        return Err(Error::Input(format!(
            "grid [{}, {}] does not cover heights [{lo}, {hi}]",
            grid.h_min,
            grid.h_max()
        )));
    }
    let n = z.len();
    let s = (0..grid.len)
        .map(|j| {
            let h = grid.node(j);
            z.partition_point(|&v| v <= h) as f64 / n as f64
        })
        .collect();
    Ok(AreaSeries { grid: *grid, s, n })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DerivSeries {
    pub grid: HeightGrid,
    pub d: Vec<f64>,
}

/// Central differences inside, one-sided at the ends.
pub fn first_derivative(series: &AreaSeries) -> Result<DerivSeries> {
    let s = &series.s;
    let m = s.len();
    if m < 3 {
        return Err(param("derivative needs at least three grid nodes"));
    }
    let step = series.grid.step;
    let mut d = vec![0.0; m];
    d[0] = (s[1] - s[0]) / step;
    d[m - 1] = (s[m - 1] - s[m - 2]) / step;
    for j in 1..m - 1 {
        d[j] = (s[j + 1] - s[j - 1]) / (2.0 * step);
    }
    Ok(DerivSeries { grid: series.grid, d })
}

/// Second central differences; the end nodes repeat their inner neighbour.
/// Only used for plots.
pub fn second_derivative(series: &AreaSeries) -> Result<DerivSeries> {
    let s = &series.s;
    let m = s.len();
    if m < 3 {
        return Err(param("second derivative needs at least three grid nodes"));
    }
    let h2 = series.grid.step * series.grid.step;
    let mut d = vec![0.0; m];
    for j in 1..m - 1 {
        d[j] = (s[j + 1] - 2.0 * s[j] + s[j - 1]) / h2;
    }
    d[0] = d[1];
    d[m - 1] = d[m - 2];
    Ok(DerivSeries { grid: series.grid, d })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn cloud(z: &[f64]) -> PointCloud {
        PointCloud::new(z.iter().map(|&z| [0.0, 0.0, z]).collect())
    }

    #[test]
    fn grid_covers_range() {
        let g = height_grid(&cloud(&[-12.3, 0.0, 12.1]), 0.5).unwrap();
        // 24.4 / 0.5 = 48.8 intervals, rounded up
        assert_eq!(g.intervals(), 49);
        assert_relative_eq!(g.h_min, -12.3);
        assert!(g.h_max() >= 12.1);
        assert!(g.h_max() - 12.1 < 0.5);
    }

    #[test]
    fn single_point_is_degenerate() {
        assert!(height_grid(&cloud(&[1.0]), 0.5).is_err());
        assert!(height_grid(&cloud(&[1.0, 1.0]), 0.5).is_err());
    }

    #[test]
    fn two_points_example() {
        let c = cloud(&[0.0, 1.0]);
        let g = HeightGrid::new(0.0, 0.5, 3).unwrap();
        let s = area_function(&c, &g).unwrap();
        assert_eq!(s.s, vec![0.5, 0.5, 1.0]);
    }

    #[test]
    fn derivative_of_linear_and_quadratic() {
        let g = HeightGrid::new(0.0, 0.5, 5).unwrap();
        let lin = AreaSeries { grid: g, s: vec![0.0, 0.25, 0.5, 0.75, 1.0], n: 4 };
        let d = first_derivative(&lin).unwrap();
        for v in d.d {
            assert_relative_eq!(v, 0.5, epsilon = 1e-12);
        }
        let q: Vec<f64> = g.nodes().iter().map(|h| h * h / 4.0).collect();
        let quad = AreaSeries { grid: g, s: q, n: 4 };
        let d = first_derivative(&quad).unwrap();
        for (j, v) in d.d.iter().enumerate().skip(1).take(3) {
            assert_relative_eq!(*v, g.node(j) / 2.0, epsilon = 1e-12);
        }
        let dd = second_derivative(&quad).unwrap();
        for v in dd.d {
            assert_relative_eq!(v, 0.5, epsilon = 1e-12);
        }
    }

    #[test]
    fn short_series_rejected() {
        let g = HeightGrid::new(0.0, 0.5, 2).unwrap();
        let s = AreaSeries { grid: g, s: vec![0.0, 1.0], n: 2 };
        assert!(first_derivative(&s).is_err());
    }

    #[test]
    fn grid_must_cover_cloud() {
        let g = HeightGrid::new(0.0, 0.5, 3).unwrap();
        assert!(area_function(&cloud(&[0.0, 2.0]), &g).is_err());
    }
}
