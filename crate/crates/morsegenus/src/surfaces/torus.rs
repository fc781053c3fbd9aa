use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use super::{CriticalPoint, Point};
use crate::error::{param, Result};

/// Ring torus standing upright: its centre circle lies in the x-z plane,
/// so the height function has one minimum, two saddles and one maximum.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Torus {
    pub major_radius: f64,
    pub minor_radius: f64,
}

impl Default for Torus {
    fn default() -> Self {
        Self { major_radius: 8.0, minor_radius: 4.0 }
    }
}

impl Torus {
    pub fn validate(&self) -> Result<()> {
        let (big, small) = (self.major_radius, self.minor_radius);
        if !(small > 0.0 && big.is_finite() && small < big) {
            return Err(param(format!(
                "torus radii must satisfy 0 < r < R, got R={big}, r={small}"
            )));
        }
        Ok(())
    }

    /// Point at centre-circle angle `u` and tube angle `v`.
    pub fn surface_point(&self, u: f64, v: f64) -> Point {
        self.point(u, v, 0.0)
    }

    pub(crate) fn point(&self, u: f64, v: f64, zc: f64) -> Point {
        let w = self.major_radius + self.minor_radius * v.cos();
        [w * u.cos(), self.minor_radius * v.sin(), zc + w * u.sin()]
    }

    /// Area element is proportional to R + r cos v; rejection on v makes it exact.
    pub(crate) fn draw<R: Rng + ?Sized>(&self, rng: &mut R, zc: f64) -> Point {
        let (big, small) = (self.major_radius, self.minor_radius);
        loop {
            let v: f64 = rng.random_range(0.0..TAU);
            if rng.random::<f64>() * (big + small) <= big + small * v.cos() {
                let u: f64 = rng.random_range(0.0..TAU);
                return self.point(u, v, zc);
            }
        }
    }

    pub(crate) fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<Point> {
        (0..n).map(|_| self.draw(rng, 0.0)).collect()
    }

    /// Signed distance to the torus centred at height `zc`, negative inside.
    pub(crate) fn sdf(&self, p: &Point, zc: f64) -> f64 {
        let z = p[2] - zc;
        let q = (p[0].hypot(z) - self.major_radius).hypot(p[1]);
        q - self.minor_radius
    }

    pub(crate) fn residual(&self, p: &Point) -> f64 {
        self.sdf(p, 0.0).abs()
    }

    pub(crate) fn critical_points(&self) -> Vec<CriticalPoint> {
        let (big, small) = (self.major_radius, self.minor_radius);
        vec![
            CriticalPoint { height: -big - small, index: 0 },
            CriticalPoint { height: -big + small, index: 1 },
            CriticalPoint { height: big - small, index: 1 },
            CriticalPoint { height: big + small, index: 2 },
        ]
    }
}
