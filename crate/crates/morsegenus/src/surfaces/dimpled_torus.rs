use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use super::{CriticalPoint, Point};
use crate::error::{param, Error, Result};

/// Tube of constant radius around a closed planar curve in the x-z plane.
/// The curve is `x = half_width * cos t` with a height profile that passes
/// through six alternating extremes, so the core circle is bent into a loop
/// with two extra dents. Every curve extreme gives one critical point on each
/// side of the tube: an arch gives a summit and a saddle, a trough gives a pit
/// and a saddle. With the defaults the counts are (3, 6, 3).
///
/// Between extremes the height is a quintic Hermite spline with zero slope at
/// the nodes and second derivatives chosen so the curve turns with radius
/// `turn_radius` at each extreme.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DimpledTorus {
    pub tube_radius: f64,
    pub half_width: f64,
    pub turn_radius: f64,
    /// Heights of the curve extremes, alternating trough / arch.
    pub levels: [f64; 6],
    /// Curve parameter of each extreme, in degrees, strictly increasing within one turn.
    pub angles_deg: [f64; 6],
}

impl Default for DimpledTorus {
    fn default() -> Self {
        Self {
            tube_radius: 1.36,
            half_width: 25.7,
            turn_radius: 11.7,
            levels: [-17.75, 17.75, 3.55, 10.65, -10.65, -3.55],
            angles_deg: [-51.4, 51.4, 91.7, 138.0, 222.0, 268.3],
        }
    }
}

const DENSE: usize = 20_000;

impl DimpledTorus {
    fn is_arch(&self, k: usize) -> bool {
        self.levels[k] > self.levels[(k + 5) % 6]
    }

    fn nodes(&self) -> [f64; 7] {
        let mut t = [0.0; 7];
        for k in 0..6 {
            t[k] = self.angles_deg[k].to_radians();
        }
        t[6] = t[0] + TAU;
        t
    }

    fn second_derivs(&self) -> [f64; 6] {
        let t = self.nodes();
        let mut s = [0.0; 6];
        for k in 0..6 {
            let sp = self.half_width * t[k].sin().abs();
            let sign = if self.is_arch(k) { -1.0 } else { 1.0 };
            s[k] = sign * sp * sp / self.turn_radius;
        }
        s
    }

    fn basic_checks(&self) -> Result<()> {
        let s = self;
        let all = [s.tube_radius, s.half_width, s.turn_radius];
        if all.iter().chain(&s.levels).chain(&s.angles_deg).any(|v| !v.is_finite()) {
            return Err(param("dimpled torus parameters must be finite"));
        }
        if !(s.tube_radius > 0.0 && s.half_width > 0.0 && s.turn_radius > 0.0) {
            return Err(param("tube radius, half width and turn radius must be positive"));
        }
        let t = self.nodes();
        if t.windows(2).any(|w| w[1] <= w[0]) {
            return Err(param("extreme angles must increase strictly within one turn"));
        }
        for k in 0..6 {
            if self.is_arch(k) == self.is_arch((k + 1) % 6) {
                return Err(param("extreme levels must alternate between troughs and arches"));
            }
            if (t[k].sin()).abs() < 1e-3 {
                return Err(param("extremes cannot sit where the curve is vertical"));
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.basic_checks()?;
        self.geometry()?.check()
    }

    fn geometry(&self) -> Result<Curve> {
        self.basic_checks()?;
        Ok(Curve { t: self.nodes(), z: self.levels, s: self.second_derivs(), a: self.half_width, r: self.tube_radius })
    }

    /// Point at curve parameter `t` and tube angle `v`.
    pub fn surface_point(&self, t: f64, v: f64) -> Result<Point> {
        Ok(self.geometry()?.tube_point(t, v))
    }

    pub(crate) fn sampler(&self) -> Result<DimpledTorusSampler> {
        let curve = self.geometry()?;
        curve.check()?;
        let r = self.tube_radius;
        let bound = (0..DENSE)
            .map(|i| {
                let (sp, k) = curve.speed_curvature(TAU * i as f64 / DENSE as f64);
                r * sp * (1.0 + r * k.abs())
            })
            .fold(0.0, f64::max)
            * 1.01;
        Ok(DimpledTorusSampler { curve, bound })
    }

    pub(crate) fn residual(&self, p: &Point) -> f64 {
        let Ok(c) = self.geometry() else { return f64::INFINITY };
        let dist = |t: f64| {
            let (x, z) = c.point(t);
            ((p[0] - x).powi(2) + (p[2] - z).powi(2) + p[1] * p[1]).sqrt()
        };
        let m = 4000;
        let h = TAU / m as f64;
        let best = (0..m).min_by(|&i, &j| dist(i as f64 * h).total_cmp(&dist(j as f64 * h))).unwrap();
        let (mut lo, mut hi) = ((best as f64 - 1.0) * h, (best as f64 + 1.0) * h);
        let g = 0.5 * (5f64.sqrt() - 1.0);
        for _ in 0..80 {
            let a = hi - g * (hi - lo);
            let b = lo + g * (hi - lo);
            if dist(a) < dist(b) {
                hi = b;
            } else {
                lo = a;
            }
        }
        (dist(0.5 * (lo + hi)) - self.tube_radius).abs()
    }

    pub(crate) fn critical_points(&self) -> Result<Vec<CriticalPoint>> {
        self.validate()?;
        let r = self.tube_radius;
        let mut out = Vec::with_capacity(12);
        for (k, &e) in self.levels.iter().enumerate() {
            if self.is_arch(k) {
                out.push(CriticalPoint { height: e + r, index: 2 });
                out.push(CriticalPoint { height: e - r, index: 1 });
            } else {
                out.push(CriticalPoint { height: e - r, index: 0 });
                out.push(CriticalPoint { height: e + r, index: 1 });
            }
        }
        Ok(out)
    }
}

#[derive(Clone, Copy, Debug)]
struct Curve {
    t: [f64; 7],
    z: [f64; 6],
    s: [f64; 6],
    a: f64,
    r: f64,
}

impl Curve {
    /// Height and its first two derivatives at parameter `t`.
    fn height(&self, t: f64) -> (f64, f64, f64) {
        let t0 = self.t[0];
        let tt = (t - t0).rem_euclid(TAU) + t0;
        let j = (1..7).find(|&i| tt < self.t[i]).unwrap_or(6) - 1;
        let len = self.t[j + 1] - self.t[j];
        let u = (tt - self.t[j]) / len;
        let (y0, y1) = (self.z[j], self.z[(j + 1) % 6]);
        let (a0, a1) = (self.s[j] * len * len, self.s[(j + 1) % 6] * len * len);
        let (u2, u3, u4, u5) = (u * u, u * u * u, u.powi(4), u.powi(5));
        let h0 = 1.0 - 10.0 * u3 + 15.0 * u4 - 6.0 * u5;
        let g0 = 0.5 * u2 - 1.5 * u3 + 1.5 * u4 - 0.5 * u5;
        let g1 = 0.5 * u3 - u4 + 0.5 * u5;
        let dh0 = -30.0 * u2 + 60.0 * u3 - 30.0 * u4;
        let dg0 = u - 4.5 * u2 + 6.0 * u3 - 2.5 * u4;
        let dg1 = 1.5 * u2 - 4.0 * u3 + 2.5 * u4;
        let ddh0 = -60.0 * u + 180.0 * u2 - 120.0 * u3;
        let ddg0 = 1.0 - 9.0 * u + 18.0 * u2 - 10.0 * u3;
        let ddg1 = 3.0 * u - 12.0 * u2 + 10.0 * u3;
        let z = y0 * h0 + y1 * (1.0 - h0) + a0 * g0 + a1 * g1;
        let dz = (dh0 * (y0 - y1) + a0 * dg0 + a1 * dg1) / len;
        let ddz = (ddh0 * (y0 - y1) + a0 * ddg0 + a1 * ddg1) / (len * len);
        (z, dz, ddz)
    }

    fn point(&self, t: f64) -> (f64, f64) {
        (self.a * t.cos(), self.height(t).0)
    }

    fn tube_point(&self, t: f64, v: f64) -> Point {
        let (_, dz, _) = self.height(t);
        let dx = -self.a * t.sin();
        let sp = dx.hypot(dz);
        // left normal: positive curvature turns toward it
        let (nx, nz) = (-dz / sp, dx / sp);
        let (x, z) = self.point(t);
        let r = self.r;
        [x + r * v.cos() * nx, r * v.sin(), z + r * v.cos() * nz]
    }

    fn speed_curvature(&self, t: f64) -> (f64, f64) {
        let (_, dz, ddz) = self.height(t);
        let (dx, ddx) = (-self.a * t.sin(), -self.a * t.cos());
        let sp = dx.hypot(dz);
        (sp, (dx * ddz - dz * ddx) / sp.powi(3))
    }

    fn check(&self) -> Result<()> {
        let r = self.r;
        let mut rk: f64 = 0.0;
        let mut sign_changes = 0;
        let mut prev = self.height(0.0).1;
        for i in 1..=DENSE {
            let t = TAU * i as f64 / DENSE as f64;
            let (_, k) = self.speed_curvature(t);
            rk = rk.max(r * k.abs());
            let dz = self.height(t).1;
            if dz != 0.0 {
                if prev != 0.0 && dz.signum() != prev.signum() {
                    sign_changes += 1;
                }
                prev = dz;
            }
        }
        if rk >= 0.8 {
            return Err(Error::Inconsistent(format!(
                "tube radius times curvature reaches {rk:.3}; the tube would fold"
            )));
        }
        if sign_changes != 6 {
            return Err(Error::Inconsistent(format!(
                "height profile has {sign_changes} extremes instead of 6"
            )));
        }
        // distant parts of the core curve must stay clear of each other's tubes
        let m = 1000;
        let pts: Vec<(f64, f64)> = (0..m).map(|i| self.point(TAU * i as f64 / m as f64)).collect();
        let mut arc = vec![0.0; m + 1];
        for i in 0..m {
            let (a, b) = (pts[i], pts[(i + 1) % m]);
            arc[i + 1] = arc[i] + (a.0 - b.0).hypot(a.1 - b.1);
        }
        let total = arc[m];
        let near = std::f64::consts::PI * r * 1.2;
        for i in 0..m {
            for j in i + 1..m {
                let along = arc[j] - arc[i];
                if along.min(total - along) <= near {
                    continue;
                }
                let d = (pts[i].0 - pts[j].0).hypot(pts[i].1 - pts[j].1);
                if d <= 2.2 * r {
                    return Err(Error::Inconsistent("tube touches itself".into()));
                }
            }
        }
        Ok(())
    }
}

pub(crate) struct DimpledTorusSampler {
    curve: Curve,
    bound: f64,
}

impl DimpledTorusSampler {
    /// The tube's area element is r |C'| (1 - r k cos v); rejection on it is exact.
    pub(crate) fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<Point> {
        let c = &self.curve;
        let r = c.r;
        let mut out = Vec::with_capacity(n);
        while out.len() < n {
            let t: f64 = rng.random_range(0.0..TAU);
            let v: f64 = rng.random_range(0.0..TAU);
            let (sp, k) = c.speed_curvature(t);
            let w = r * sp * (1.0 - r * k * v.cos());
            if rng.random::<f64>() * self.bound >= w {
                continue;
            }
            out.push(c.tube_point(t, v));
        }
        out
    }

    #[cfg(test)]
    pub(crate) fn bound(&self) -> f64 {
        self.bound
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spline_derivatives_match_finite_differences() {
        let c = DimpledTorus::default().geometry().unwrap();
        let e = 1e-5;
        for i in 0..200 {
            let t = 0.031 * i as f64;
            let (_, dz, ddz) = c.height(t);
            let fd = (c.height(t + e).0 - c.height(t - e).0) / (2.0 * e);
            let fdd = (c.height(t + e).1 - c.height(t - e).1) / (2.0 * e);
            assert!((dz - fd).abs() < 1e-5 * (1.0 + dz.abs()), "t={t}");
            assert!((ddz - fdd).abs() < 1e-4 * (1.0 + ddz.abs()), "t={t}");
        }
    }

    #[test]
    fn nodes_are_extremes_with_requested_turn_radius() {
        let s = DimpledTorus::default();
        let c = s.geometry().unwrap();
        for k in 0..6 {
            let t = s.angles_deg[k].to_radians();
            let (z, dz, _) = c.height(t);
            assert!((z - s.levels[k]).abs() < 1e-12);
            assert!(dz.abs() < 1e-9);
            let (_, kappa) = c.speed_curvature(t);
            assert!((kappa.abs() - 1.0 / s.turn_radius).abs() < 1e-9);
        }
    }

    #[test]
    fn sampler_bound_dominates_weight() {
        let s = DimpledTorus::default();
        let smp = s.sampler().unwrap();
        let c = &smp.curve;
        for i in 0..100_003 {
            let t = TAU * i as f64 / 100_003.0;
            let (sp, k) = c.speed_curvature(t);
            assert!(c.r * sp * (1.0 + c.r * k.abs()) < smp.bound());
        }
    }

    #[test]
    fn thick_tube_is_inconsistent() {
        let s = DimpledTorus { tube_radius: 7.0, ..Default::default() };
        assert!(matches!(s.validate(), Err(Error::Inconsistent(_))));
    }
}
