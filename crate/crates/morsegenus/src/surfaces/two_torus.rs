use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{CriticalPoint, Point, Torus};
use crate::error::{param, Result};

/// Union of two equal upright tori stacked along z so that their centre
/// circles touch at the origin. The boundary is a closed surface of genus 2.
///
/// Near the origin each tube's inner wall hides the other's outer pole, which
/// leaves two saddles at heights -r and +r. The four saddle heights are
/// distinct, so each one shows up as its own cusp in the area derivative.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoTorus {
    pub major_radius: f64,
    pub minor_radius: f64,
}

impl Default for TwoTorus {
    fn default() -> Self {
        Self { major_radius: 6.0, minor_radius: 2.0 }
    }
}

impl TwoTorus {
    fn part(&self) -> Torus {
        Torus { major_radius: self.major_radius, minor_radius: self.minor_radius }
    }

    pub fn validate(&self) -> Result<()> {
        let (big, small) = (self.major_radius, self.minor_radius);
        // r < R/2 keeps the tube overlap local to the contact region.
        if !(small > 0.0 && big.is_finite() && 2.0 * small < big) {
            return Err(param(format!(
                "two-torus radii must satisfy 0 < 2r < R, got R={big}, r={small}"
            )));
        }
        Ok(())
    }

    /// Vertical distance between the two handle centres.
    pub fn handle_offset(&self) -> f64 {
        2.0 * self.major_radius
    }

    /// Both tori have the same area, so drawing either with equal probability and
    /// discarding points buried in the other solid is uniform on the union boundary.
    pub(crate) fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<Point> {
        let t = self.part();
        let c = self.major_radius;
        let mut out = Vec::with_capacity(n);
        while out.len() < n {
            let (zc, other) = if rng.random::<bool>() { (c, -c) } else { (-c, c) };
            let p = t.draw(rng, zc);
            if t.sdf(&p, other) >= 0.0 {
                out.push(p);
            }
        }
        out
    }

    pub(crate) fn residual(&self, p: &Point) -> f64 {
        let t = self.part();
        let c = self.major_radius;
        t.sdf(p, c).min(t.sdf(p, -c)).abs()
    }

    pub(crate) fn critical_points(&self) -> Vec<CriticalPoint> {
        let (big, small) = (self.major_radius, self.minor_radius);
        vec![
            CriticalPoint { height: -2.0 * big - small, index: 0 },
            CriticalPoint { height: -2.0 * big + small, index: 1 },
            CriticalPoint { height: -small, index: 1 },
            CriticalPoint { height: small, index: 1 },
            CriticalPoint { height: 2.0 * big - small, index: 1 },
            CriticalPoint { height: 2.0 * big + small, index: 2 },
        ]
    }
}
