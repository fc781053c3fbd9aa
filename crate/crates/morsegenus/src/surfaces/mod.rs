//! Analytic test surfaces, area-uniform sampling and noise.

mod dimpled_sphere;
mod dimpled_torus;
mod torus;
mod two_torus;

pub use dimpled_sphere::DimpledSphere;
pub use dimpled_torus::DimpledTorus;
pub use torus::Torus;
pub use two_torus::TwoTorus;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};

pub type Point = [f64; 3];

/// An unordered sample of points in R^3. The height is the z coordinate.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PointCloud {
    pub points: Vec<Point>,
}

impl PointCloud {
    pub fn new(points: Vec<Point>) -> Self {
        Self { points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn heights(&self) -> Vec<f64> {
        self.points.iter().map(|p| p[2]).collect()
    }

    /// Smallest and largest height, `None` for an empty cloud.
    pub fn z_range(&self) -> Option<(f64, f64)> {
        let mut it = self.points.iter().map(|p| p[2]);
        let first = it.next()?;
        Some(it.fold((first, first), |(lo, hi), z| (lo.min(z), hi.max(z))))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SurfaceKind {
    DimpledSphere,
    Torus,
    DimpledTorus,
    TwoTorus,
}

impl SurfaceKind {
    pub const ALL: [SurfaceKind; 4] = [
        SurfaceKind::DimpledSphere,
        SurfaceKind::Torus,
        SurfaceKind::DimpledTorus,
        SurfaceKind::TwoTorus,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SurfaceKind::DimpledSphere => "dimpled-sphere",
            SurfaceKind::Torus => "torus",
            SurfaceKind::DimpledTorus => "dimpled-torus",
            SurfaceKind::TwoTorus => "two-torus",
        }
    }

    pub fn genus(self) -> u32 {
        match self {
            SurfaceKind::DimpledSphere => 0,
            SurfaceKind::Torus | SurfaceKind::DimpledTorus => 1,
            SurfaceKind::TwoTorus => 2,
        }
    }

    /// Surface with default geometry.
    pub fn default_spec(self) -> SurfaceSpec {
        match self {
            SurfaceKind::DimpledSphere => SurfaceSpec::DimpledSphere(DimpledSphere::default()),
            SurfaceKind::Torus => SurfaceSpec::Torus(Torus::default()),
            SurfaceKind::DimpledTorus => SurfaceSpec::DimpledTorus(DimpledTorus::default()),
            SurfaceKind::TwoTorus => SurfaceSpec::TwoTorus(TwoTorus::default()),
        }
    }
}

impl std::str::FromStr for SurfaceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace('_', "-");
        SurfaceKind::ALL
            .into_iter()
            .find(|k| k.name() == norm || k.name().replace('-', "") == norm)
            .ok_or_else(|| param(format!("unknown surface kind '{s}'")))
    }
}

impl std::fmt::Display for SurfaceKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Morse index of a critical point of the height function.
pub type MorseIndex = u8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint {
    pub height: f64,
    pub index: MorseIndex,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SurfaceSpec {
    DimpledSphere(DimpledSphere),
    Torus(Torus),
    DimpledTorus(DimpledTorus),
    TwoTorus(TwoTorus),
}

impl SurfaceSpec {
    pub fn kind(&self) -> SurfaceKind {
        match self {
            SurfaceSpec::DimpledSphere(_) => SurfaceKind::DimpledSphere,
            SurfaceSpec::Torus(_) => SurfaceKind::Torus,
            SurfaceSpec::DimpledTorus(_) => SurfaceKind::DimpledTorus,
            SurfaceSpec::TwoTorus(_) => SurfaceKind::TwoTorus,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            SurfaceSpec::DimpledSphere(s) => s.validate(),
            SurfaceSpec::Torus(s) => s.validate(),
            SurfaceSpec::DimpledTorus(s) => s.validate(),
            SurfaceSpec::TwoTorus(s) => s.validate(),
        }
    }

    /// Unsigned distance (or a first-order proxy for it) from `p` to the surface.
    pub fn surface_residual(&self, p: &Point) -> f64 {
        match self {
            SurfaceSpec::DimpledSphere(s) => s.residual(p),
            SurfaceSpec::Torus(s) => s.residual(p),
            SurfaceSpec::DimpledTorus(s) => s.residual(p),
            SurfaceSpec::TwoTorus(s) => s.residual(p),
        }
    }
}

/// Prepared sampler for one surface. Building it validates the geometry and
/// computes the rejection bounds once, so repeated draws stay cheap.
pub struct SurfaceSampler {
    inner: SamplerKind,
}

enum SamplerKind {
    DimpledSphere(dimpled_sphere::DimpledSphereSampler),
    Torus(Torus),
    DimpledTorus(dimpled_torus::DimpledTorusSampler),
    TwoTorus(TwoTorus),
}

impl SurfaceSampler {
    pub fn new(spec: &SurfaceSpec) -> Result<Self> {
        let inner = match spec {
            SurfaceSpec::DimpledSphere(s) => SamplerKind::DimpledSphere(s.sampler()?),
            SurfaceSpec::Torus(s) => {
                s.validate()?;
                SamplerKind::Torus(*s)
            }
            SurfaceSpec::DimpledTorus(s) => SamplerKind::DimpledTorus(s.sampler()?),
            SurfaceSpec::TwoTorus(s) => {
                s.validate()?;
                SamplerKind::TwoTorus(*s)
            }
        };
        Ok(Self { inner })
    }

    pub fn sample(&self, n: usize, seed: u64) -> Result<PointCloud> {
        if n == 0 {
            return Err(param("sample size must be positive"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let points = match &self.inner {
            SamplerKind::DimpledSphere(s) => s.sample(n, &mut rng),
            SamplerKind::Torus(s) => s.sample(n, &mut rng),
            SamplerKind::DimpledTorus(s) => s.sample(n, &mut rng),
            SamplerKind::TwoTorus(s) => s.sample(n, &mut rng),
        };
        Ok(PointCloud::new(points))
    }
}

/// Draw `n` points uniformly with respect to surface area.
pub fn sample_surface(spec: &SurfaceSpec, n: usize, seed: u64) -> Result<PointCloud> {
    if n == 0 {
        return Err(param("sample size must be positive"));
    }
    SurfaceSampler::new(spec)?.sample(n, seed)
}

/// Critical points of the height function, sorted by height.
pub fn analytic_critical_points(spec: &SurfaceSpec) -> Result<Vec<CriticalPoint>> {
    spec.validate()?;
    let mut cps = match spec {
        SurfaceSpec::DimpledSphere(s) => s.critical_points()?,
        SurfaceSpec::Torus(s) => s.critical_points(),
        SurfaceSpec::DimpledTorus(s) => s.critical_points()?,
        SurfaceSpec::TwoTorus(s) => s.critical_points(),
    };
    cps.sort_by(|a, b| a.height.total_cmp(&b.height));
    let counts = count_by_index(&cps);
    let g = spec.kind().genus() as i64;
    let chi = counts[0] as i64 - counts[1] as i64 + counts[2] as i64;
    if chi != 2 - 2 * g {
        return Err(Error::Inconsistent(format!(
            "critical counts {counts:?} give Euler characteristic {chi}, expected {}",
            2 - 2 * g
        )));
    }
    Ok(cps)
}

pub fn count_by_index(cps: &[CriticalPoint]) -> [u32; 3] {
    let mut c = [0u32; 3];
    for cp in cps {
        c[cp.index as usize] += 1;
    }
    c
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseMode {
    /// Perturb the z coordinate only.
    #[default]
    Height,
    /// Perturb all three coordinates.
    Isotropic,
}

/// Add i.i.d. Gaussian noise with standard deviation `sigma`.
pub fn add_noise(cloud: &PointCloud, sigma: f64, seed: u64, mode: NoiseMode) -> Result<PointCloud> {
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(param(format!("noise sigma must be finite and >= 0, got {sigma}")));
    }
    if sigma == 0.0 {
        return Ok(cloud.clone());
    }
    let normal = Normal::new(0.0, sigma).map_err(|e| param(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points = cloud
        .points
        .iter()
        .map(|&[x, y, z]| match mode {
            NoiseMode::Height => [x, y, z + normal.sample(&mut rng)],
            NoiseMode::Isotropic => [
                x + normal.sample(&mut rng),
                y + normal.sample(&mut rng),
                z + normal.sample(&mut rng),
            ],
        })
        .collect();
    Ok(PointCloud::new(points))
}

pub fn add_height_noise(cloud: &PointCloud, sigma: f64, seed: u64) -> Result<PointCloud> {
    add_noise(cloud, sigma, seed, NoiseMode::Height)
}

/// Apply a proper rotation. Rejects matrices that are not orthogonal with det +1.
pub fn rotate_cloud(cloud: &PointCloud, m: &[[f64; 3]; 3]) -> Result<PointCloud> {
    const TOL: f64 = 1e-9;
    for i in 0..3 {
        for j in 0..3 {
            let dot: f64 = (0..3).map(|k| m[i][k] * m[j][k]).sum();
            let want = if i == j { 1.0 } else { 0.0 };
            if !((dot - want).abs() <= TOL) {
                return Err(param("rotation matrix is not orthogonal"));
            }
        }
    }
    let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    if !((det - 1.0).abs() <= TOL) {
        return Err(param(format!("rotation determinant is {det}, expected +1")));
    }
    let points = cloud
        .points
        .iter()
        .map(|p| {
            let mut q = [0.0; 3];
            for (i, qi) in q.iter_mut().enumerate() {
                *qi = m[i][0] * p[0] + m[i][1] * p[1] + m[i][2] * p[2];
            }
            q
        })
        .collect();
    Ok(PointCloud::new(points))
}

/// Uniform point on the unit sphere.
pub(crate) fn unit_sphere<R: Rng + ?Sized>(rng: &mut R) -> Point {
    let z: f64 = rng.random_range(-1.0..=1.0);
    let phi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    let s = (1.0 - z * z).max(0.0).sqrt();
    [s * phi.cos(), s * phi.sin(), z]
}
