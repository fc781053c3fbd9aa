use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{unit_sphere, CriticalPoint, Point};
use crate::error::{param, Error, Result};

/// Sphere whose upper cap is pushed down into a bowl, with a tilted rim so the
/// bowl drains over a single saddle. The lower cap is the point reflection of
/// the upper one. Height critical points: pit (0), saddle (1) and
/// summit (2) on the upper cap, mirrored on the lower.
///
/// Both caps are graphs over the disk of radius `radius`; the displacement
/// vanishes beyond `0.96 * radius`, where the surface is the plain sphere.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DimpledSphere {
    pub radius: f64,
    /// Height of the bowl floor above the equator.
    pub pit_height: f64,
    /// Curvature radius of the paraboloid bowl.
    pub bowl_radius: f64,
    /// Radius where the bowl starts blending back to the sphere.
    pub blend_inner: f64,
    /// Radius where the blend ends.
    pub blend_outer: f64,
    /// Amplitude of the rim tilt along x.
    pub rim_tilt: f64,
    pub rim_radius: f64,
    pub rim_width: f64,
}

impl Default for DimpledSphere {
    fn default() -> Self {
        Self {
            radius: 10.0,
            pit_height: 1.94,
            bowl_radius: 4.24,
            blend_inner: 1.96,
            blend_outer: 8.42,
            rim_tilt: 2.4,
            rim_radius: 5.98,
            rim_width: 2.2,
        }
    }
}

fn smoothstep(t: f64) -> (f64, f64) {
    let t = t.clamp(0.0, 1.0);
    let v = t * t * t * (10.0 - 15.0 * t + 6.0 * t * t);
    let d = 30.0 * t * t * (1.0 - t) * (1.0 - t);
    (v, d)
}

impl DimpledSphere {
    fn cut(&self) -> (f64, f64) {
        (0.86 * self.radius, 0.96 * self.radius)
    }

    pub fn validate(&self) -> Result<()> {
        let s = self;
        let all = [
            s.radius, s.pit_height, s.bowl_radius, s.blend_inner, s.blend_outer, s.rim_tilt,
            s.rim_radius, s.rim_width,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(param("dimpled sphere parameters must be finite"));
        }
        if !(s.radius > 0.0 && s.pit_height > 0.0 && s.pit_height < s.radius) {
            return Err(param("dimple depth must be positive and smaller than the radius"));
        }
        if !(s.bowl_radius > 0.0 && s.rim_width > 0.0 && s.rim_radius > 0.0) {
            return Err(param("bowl radius, rim radius and rim width must be positive"));
        }
        if !(0.0 < s.blend_inner && s.blend_inner < s.blend_outer && s.blend_outer <= self.cut().0) {
            return Err(param("blend radii must satisfy 0 < inner < outer <= 0.86 radius"));
        }
        Ok(())
    }

    /// Vertical displacement of the upper cap and its gradient.
    fn delta(&self, x: f64, y: f64) -> (f64, f64, f64) {
        let s = self;
        let r2 = x * x + y * y;
        let rho = r2.sqrt();
        let (c0, c1) = self.cut();
        if rho >= c1 {
            return (0.0, 0.0, 0.0);
        }
        let sph = (s.radius * s.radius - r2).sqrt();
        let span = s.blend_outer - s.blend_inner;
        let (ssw, dssw) = smoothstep((rho - s.blend_inner) / span);
        let w = 1.0 - ssw;
        let dw = -dssw / span;
        let bowl = s.pit_height + r2 / (2.0 * s.bowl_radius);
        let u = (rho - s.rim_radius) / s.rim_width;
        let gauss = (-u * u).exp();
        let dgauss = -2.0 * u / s.rim_width * gauss;
        let (ssc, dssc) = smoothstep((rho - c0) / (c1 - c0));
        let env = gauss * (1.0 - ssc);
        let denv = dgauss * (1.0 - ssc) - gauss * dssc / (c1 - c0);
        let k = s.rim_tilt / s.rim_radius;

        let val = w * (bowl - sph) + k * x * env;
        // d/drho terms times x/rho, y/rho; the radial derivatives vanish at rho = 0
        let (ex, ey) = if rho > 1e-12 { (x / rho, y / rho) } else { (0.0, 0.0) };
        let radial = dw * (bowl - sph);
        let ring = k * x * denv;
        let gx = radial * ex + w * (x / s.bowl_radius + x / sph) + k * env + ring * ex;
        let gy = radial * ey + w * (y / s.bowl_radius + y / sph) + ring * ey;
        (val, gx, gy)
    }

    /// Height of the upper cap over (x, y) and its gradient.
    fn top(&self, x: f64, y: f64) -> (f64, f64, f64) {
        let r2 = (self.radius * self.radius - x * x - y * y).max(0.0);
        let sph = r2.sqrt();
        let (d, gx, gy) = self.delta(x, y);
        (sph + d, -x / sph + gx, -y / sph + gy)
    }

    /// Ratio of the displaced area element to the sphere's at an upper-cap point.
    fn area_ratio(&self, x: f64, y: f64) -> f64 {
        let (_, gx, gy) = self.delta(x, y);
        if gx == 0.0 && gy == 0.0 {
            return 1.0;
        }
        let z = (self.radius * self.radius - x * x - y * y).sqrt();
        let (sx, sy) = (-x / z, -y / z);
        let r = (1.0 + (sx + gx).powi(2) + (sy + gy).powi(2)).sqrt() / (1.0 + sx * sx + sy * sy).sqrt();
        if r.is_finite() {
            r
        } else {
            1.0
        }
    }

    /// Point with polar angle `theta` and azimuth `phi` on the undisplaced sphere,
    /// moved vertically onto the dimpled surface.
    pub fn surface_point(&self, theta: f64, phi: f64) -> Point {
        let r = self.radius;
        let (x, y, z) = (r * theta.sin() * phi.cos(), r * theta.sin() * phi.sin(), r * theta.cos());
        if z >= 0.0 {
            [x, y, z + self.delta(x, y).0]
        } else {
            [x, y, z - self.delta(-x, -y).0]
        }
    }

    pub(crate) fn sampler(&self) -> Result<DimpledSphereSampler> {
        self.validate()?;
        let c1 = self.cut().1;
        let mut m: f64 = 1.0;
        let (nr, na) = (600, 720);
        for i in 0..=nr {
            let rho = c1 * i as f64 / nr as f64;
            for j in 0..na {
                let a = std::f64::consts::TAU * j as f64 / na as f64;
                m = m.max(self.area_ratio(rho * a.cos(), rho * a.sin()));
            }
        }
        Ok(DimpledSphereSampler { surface: *self, bound: m * 1.05 })
    }

    pub(crate) fn residual(&self, p: &Point) -> f64 {
        let rho = p[0].hypot(p[1]);
        if rho >= self.cut().1 {
            return ((rho * rho + p[2] * p[2]).sqrt() - self.radius).abs();
        }
        if p[2] >= 0.0 {
            (p[2] - self.top(p[0], p[1]).0).abs()
        } else {
            (p[2] + self.top(-p[0], -p[1]).0).abs()
        }
    }

    /// Newton's method on the upper cap from a grid of seeds. The lower cap
    /// contributes the mirrored points with complementary index.
    pub(crate) fn critical_points(&self) -> Result<Vec<CriticalPoint>> {
        let lim = self.cut().1;
        let res = 0.1;
        let e = 1e-5;
        let hess = |x: f64, y: f64| {
            let (_, ax, ay) = self.top(x + e, y);
            let (_, bx, by) = self.top(x - e, y);
            let (_, cx, cy) = self.top(x, y + e);
            let (_, dx, dy) = self.top(x, y - e);
            let fxx = (ax - bx) / (2.0 * e);
            let fyy = (cy - dy) / (2.0 * e);
            let fxy = 0.5 * ((ay - by) / (2.0 * e) + (cx - dx) / (2.0 * e));
            (fxx, fxy, fyy)
        };
        let mut found: Vec<(f64, f64, f64, u8)> = Vec::new();
        let steps = (2.0 * lim / res) as i64;
        for i in 0..=steps {
            for j in 0..=steps {
                let (mut x, mut y) = (-lim + i as f64 * res, -lim + j as f64 * res);
                if x * x + y * y >= lim * lim {
                    continue;
                }
                let (_, gx, gy) = self.top(x, y);
                if gx.hypot(gy) > 0.15 {
                    continue;
                }
                let mut converged = false;
                for _ in 0..50 {
                    let (_, gx, gy) = self.top(x, y);
                    let (a, b, c) = hess(x, y);
                    let det = a * c - b * b;
                    if det.abs() < 1e-14 {
                        break;
                    }
                    let dx = (c * gx - b * gy) / det;
                    let dy = (a * gy - b * gx) / det;
                    x -= dx;
                    y -= dy;
                    if x * x + y * y > lim * lim {
                        break;
                    }
                    if dx.abs().max(dy.abs()) < 1e-11 {
                        converged = true;
                        break;
                    }
                }
                if !converged || x * x + y * y >= lim * lim {
                    continue;
                }
                if found.iter().any(|&(a, b, _, _)| (a - x).abs() + (b - y).abs() < 1e-4) {
                    continue;
                }
                let (a, b, c) = hess(x, y);
                let det = a * c - b * b;
                let index = if det < 0.0 {
                    1
                } else if a > 0.0 {
                    0
                } else {
                    2
                };
                found.push((x, y, self.top(x, y).0, index));
            }
        }
        let mut counts = [0u32; 3];
        for f in &found {
            counts[f.3 as usize] += 1;
        }
        // the polar cap is a graph tilted away from the pole; expect pit, saddle, summit
        if counts != [1, 1, 1] {
            return Err(Error::Inconsistent(format!(
                "upper cap has critical counts {counts:?}, expected one of each index"
            )));
        }
        let mut cps = Vec::with_capacity(6);
        for &(_, _, h, i) in &found {
            cps.push(CriticalPoint { height: h, index: i });
            cps.push(CriticalPoint { height: -h, index: 2 - i });
        }
        Ok(cps)
    }
}

pub(crate) struct DimpledSphereSampler {
    surface: DimpledSphere,
    bound: f64,
}

impl DimpledSphereSampler {
    pub(crate) fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<Point> {
        let s = &self.surface;
        let mut out = Vec::with_capacity(n);
        while out.len() < n {
            let u = unit_sphere(rng);
            let p = [u[0] * s.radius, u[1] * s.radius, u[2] * s.radius];
            // lower cap is the point reflection of the upper one
            let (sx, sy, sg) = if p[2] >= 0.0 { (p[0], p[1], 1.0) } else { (-p[0], -p[1], -1.0) };
            if rng.random::<f64>() * self.bound >= s.area_ratio(sx, sy) {
                continue;
            }
            let (d, _, _) = s.delta(sx, sy);
            out.push([p[0], p[1], p[2] + sg * d]);
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
    fn gradient_matches_finite_differences() {
        let s = DimpledSphere::default();
        let e = 1e-6;
        for &(x, y) in &[(0.3, -0.2), (-6.8, 0.1), (6.6, 0.0), (2.0, 5.0), (-4.0, -7.0), (8.9, 1.0)] {
            let (_, gx, gy) = s.delta(x, y);
            let fx = (s.delta(x + e, y).0 - s.delta(x - e, y).0) / (2.0 * e);
            let fy = (s.delta(x, y + e).0 - s.delta(x, y - e).0) / (2.0 * e);
            assert!((gx - fx).abs() < 1e-6, "{x},{y}: {gx} vs {fx}");
            assert!((gy - fy).abs() < 1e-6, "{x},{y}: {gy} vs {fy}");
        }
    }

    #[test]
    fn displacement_vanishes_near_equator() {
        let s = DimpledSphere::default();
        for a in 0..36 {
            let t = a as f64 * 10f64.to_radians();
            let (d, gx, gy) = s.delta(9.65 * t.cos(), 9.65 * t.sin());
            assert_eq!((d, gx, gy), (0.0, 0.0, 0.0));
        }
    }

    #[test]
    fn rejection_bound_dominates_ratio() {
        use rand::SeedableRng;
        let s = DimpledSphere::default();
        let m = s.sampler().unwrap().bound();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200_000 {
            let u = unit_sphere(&mut rng);
            if u[2] <= 0.0 {
                continue;
            }
            assert!(s.area_ratio(10.0 * u[0], 10.0 * u[1]) < m);
        }
    }

    #[test]
    fn caps_do_not_cross() {
        let s = DimpledSphere::default();
        for i in 0..100 {
            for j in 0..100 {
                let (x, y) = (-9.6 + 0.192 * i as f64, -9.6 + 0.192 * j as f64);
                if x * x + y * y < 9.6 * 9.6 {
                    assert!(s.top(x, y).0 > 0.5);
                }
            }
        }
    }
}
