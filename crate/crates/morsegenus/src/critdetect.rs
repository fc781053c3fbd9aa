//! Template matching on the area derivative.
//!
//! Minima and maxima of the height show up as steps in S' (up for a minimum,
//! down for a maximum), saddles as logarithmic cusps. Each window of S' is
//! least-squares fitted to a step and to a tent; the fit quality is the
//! relative residual sqrt(SSR / SST), which does not change under positive
//! affine maps of S'.

use serde::{Deserialize, Serialize};

use crate::areafn::{DerivSeries, HeightGrid};
use crate::error::{param, Result};
use crate::surfaces::MorseIndex;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TemplateKind {
    StepUp,
    Cusp,
    StepDown,
}

impl TemplateKind {
    pub const ALL: [TemplateKind; 3] = [TemplateKind::StepUp, TemplateKind::Cusp, TemplateKind::StepDown];

    pub fn morse_index(self) -> MorseIndex {
        match self {
            TemplateKind::StepUp => 0,
            TemplateKind::Cusp => 1,
            TemplateKind::StepDown => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            TemplateKind::StepUp => "step-up",
            TemplateKind::Cusp => "cusp",
            TemplateKind::StepDown => "step-down",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Template {
    pub kind: TemplateKind,
    /// Ideal unit-amplitude profile over the window. Step templates leave the
    /// centre sample out of the fit; its value here is the midpoint.
    pub shape: Vec<f64>,
}

impl Template {
    pub fn window_len(&self) -> usize {
        self.shape.len()
    }

    pub fn half_width(&self) -> usize {
        self.shape.len() / 2
    }
}

pub fn make_templates(window_len: usize, grid_len: usize) -> Result<[Template; 3]> {
    if window_len < 5 || window_len % 2 == 0 {
        return Err(param(format!("window length must be odd and >= 5, got {window_len}")));
    }
    if window_len > grid_len {
        return Err(param(format!(
            "window length {window_len} exceeds grid length {grid_len}"
        )));
    }
    let k = (window_len / 2) as i64;
    let js = -k..=k;
    let up: Vec<f64> = js.clone().map(|j| 0.5 * (1.0 + j.signum() as f64)).collect();
    let down: Vec<f64> = up.iter().map(|v| 1.0 - v).collect();
    let tent: Vec<f64> = js.map(|j| (k - j.abs()) as f64 / k as f64).collect();
    Ok([
        Template { kind: TemplateKind::StepUp, shape: up },
        Template { kind: TemplateKind::Cusp, shape: tent },
        Template { kind: TemplateKind::StepDown, shape: down },
    ])
}

/// Per-node fit results for one template.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualSeries {
    pub kind: TemplateKind,
    pub grid: HeightGrid,
    /// Relative residual of the best fit; 1 when the fit has the wrong sign
    /// or the window is flat.
    pub residual: Vec<f64>,
    /// Signed size of the fitted feature: jump height for steps, tent height for cusps.
    pub contrast: Vec<f64>,
}

#[derive(Clone, Copy, Debug)]
struct WindowFit {
    residual: f64,
    contrast: f64,
}

fn padded(d: &[f64], k: usize, outside: f64) -> Vec<f64> {
    let mut p = vec![outside; d.len() + 2 * k];
    p[k..k + d.len()].copy_from_slice(d);
    p
}

/// Fit a + b * sign(j) to the window with the centre left out.
fn fit_step(w: &[f64]) -> (f64, f64) {
    let k = w.len() / 2;
    let (left, right) = (&w[..k], &w[k + 1..]);
    let ml = left.iter().sum::<f64>() / k as f64;
    let mr = right.iter().sum::<f64>() / k as f64;
    let mean = 0.5 * (ml + mr);
    let ssr: f64 = left.iter().map(|v| (v - ml).powi(2)).sum::<f64>()
        + right.iter().map(|v| (v - mr).powi(2)).sum::<f64>();
    let sst: f64 = left.iter().chain(right).map(|v| (v - mean).powi(2)).sum();
    let rr = if sst > 0.0 { (ssr / sst).sqrt() } else { 1.0 };
    (rr, mr - ml)
}

/// Fit a + b * (k - |j|) to the whole window.
fn fit_cusp(w: &[f64]) -> (f64, f64) {
    let k = w.len() / 2;
    let n = w.len() as f64;
    let t: Vec<f64> = (0..w.len()).map(|i| (k as f64) - (i as f64 - k as f64).abs()).collect();
    let tm = t.iter().sum::<f64>() / n;
    let dm = w.iter().sum::<f64>() / n;
    let stt: f64 = t.iter().map(|v| (v - tm).powi(2)).sum();
    let std: f64 = t.iter().zip(w).map(|(a, b)| (a - tm) * (b - dm)).sum();
    let beta = std / stt;
    let ssr: f64 = t.iter().zip(w).map(|(a, b)| (b - dm - beta * (a - tm)).powi(2)).sum();
    let sst: f64 = w.iter().map(|v| (v - dm).powi(2)).sum();
    let rr = if sst > 0.0 { (ssr / sst).sqrt() } else { 1.0 };
    (rr, beta * k as f64)
}

fn fit_window(kind: TemplateKind, w: &[f64]) -> WindowFit {
    let (rr, c) = match kind {
        TemplateKind::Cusp => fit_cusp(w),
        TemplateKind::StepUp => fit_step(w),
        TemplateKind::StepDown => {
            let (rr, c) = fit_step(w);
            (rr, -c)
        }
    };
    let residual = if c > 0.0 { rr.min(1.0) } else { 1.0 };
    WindowFit { residual, contrast: c }
}

fn residuals(d: &[f64], kind: TemplateKind, window_len: usize, outside: f64) -> (Vec<f64>, Vec<f64>) {
    let k = window_len / 2;
    let p = padded(d, k, outside);
    (0..d.len())
        .map(|c| {
            let f = fit_window(kind, &p[c..c + window_len]);
            (f.residual, f.contrast)
        })
        .unzip()
}

/// Sliding-window fit of one template, centred on every grid node. The series
/// is extended past both ends with zeros, the value of S' outside the sampled range.
pub fn residual_series(deriv: &DerivSeries, template: &Template) -> Result<ResidualSeries> {
    let wl = template.window_len();
    make_templates(wl, deriv.d.len())?;
    let (residual, contrast) = residuals(&deriv.d, template.kind, wl, 0.0);
    Ok(ResidualSeries { kind: template.kind, grid: deriv.grid, residual, contrast })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case")]
pub enum ThresholdRule {
    /// Fixed relative-residual cut-offs per template family.
    Fixed { step: f64, cusp: f64 },
    /// Cut-off at one standard deviation of each template's residual series.
    StdDev,
}

impl Default for ThresholdRule {
    fn default() -> Self {
        ThresholdRule::Fixed { step: 0.33, cusp: 0.75 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectConfig {
    pub window_len: usize,
    /// Minimum feature contrast as a fraction of the range of S'.
    pub gate: f64,
    pub threshold: ThresholdRule,
    /// Value S' takes beyond the grid ends.
    pub outside_level: f64,
}

impl Default for DetectConfig {
    fn default() -> Self {
        Self { window_len: 9, gate: 0.1, threshold: ThresholdRule::default(), outside_level: 0.0 }
    }
}

impl DetectConfig {
    pub fn validate(&self) -> Result<()> {
        if self.window_len < 5 || self.window_len % 2 == 0 {
            return Err(param(format!("window length must be odd and >= 5, got {}", self.window_len)));
        }
        if !(self.gate >= 0.0 && self.gate.is_finite()) {
            return Err(param("contrast gate must be finite and >= 0"));
        }
        if let ThresholdRule::Fixed { step, cusp } = self.threshold {
            if !(step > 0.0 && cusp > 0.0) {
                return Err(param("residual thresholds must be positive"));
            }
        }
        if !self.outside_level.is_finite() {
            return Err(param("outside level must be finite"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub height: f64,
    pub index: MorseIndex,
    pub template: TemplateKind,
    pub residual: f64,
    #[serde(skip)]
    pub node: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CriticalSet {
    pub points: Vec<Detection>,
}

impl CriticalSet {
    /// Number of detections of index 0, 1, 2.
    pub fn counts(&self) -> [u32; 3] {
        let mut c = [0; 3];
        for p in &self.points {
            c[p.index as usize] += 1;
        }
        c
    }

    /// A closed surface has at least one minimum and one maximum.
    pub fn is_degenerate(&self) -> bool {
        let c = self.counts();
        c[0] == 0 || c[2] == 0
    }
}

fn population_sd(v: &[f64]) -> f64 {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n).sqrt()
}

/// Match all three templates and keep the best non-overlapping features.
///
/// Cusp candidates are placed first: the flanks of a strong cusp also fit a
/// step reasonably well, never the other way round. Within a family,
/// better fits win. A candidate is dropped when an accepted feature of any
/// kind sits closer than half a window.
pub fn detect_critical_points(deriv: &DerivSeries, cfg: &DetectConfig) -> Result<CriticalSet> {
    cfg.validate()?;
    let d = &deriv.d;
    make_templates(cfg.window_len, d.len())?;
    let k = cfg.window_len / 2;
    let hi = d.iter().copied().fold(cfg.outside_level, f64::max);
    let lo = d.iter().copied().fold(cfg.outside_level, f64::min);
    let floor = cfg.gate * (hi - lo);

    let mut cusps = Vec::new();
    let mut steps = Vec::new();
    for kind in TemplateKind::ALL {
        let (res, con) = residuals(d, kind, cfg.window_len, cfg.outside_level);
        let thr = match cfg.threshold {
            ThresholdRule::Fixed { step, cusp } => {
                if kind == TemplateKind::Cusp {
                    cusp
                } else {
                    step
                }
            }
            ThresholdRule::StdDev => population_sd(&res),
        };
        for c in 0..d.len() {
            if res[c] < thr && con[c] > 0.0 && con[c] >= floor {
                let cand = (res[c], c, kind);
                if kind == TemplateKind::Cusp {
                    cusps.push(cand);
                } else {
                    steps.push(cand);
                }
            }
        }
    }
    let by_fit = |a: &(f64, usize, TemplateKind), b: &(f64, usize, TemplateKind)| {
        a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2))
    };
    cusps.sort_by(by_fit);
    steps.sort_by(by_fit);

    let mut accepted: Vec<Detection> = Vec::new();
    for (r, c, kind) in cusps.into_iter().chain(steps) {
        if accepted.iter().any(|a| a.node.abs_diff(c) < k) {
            continue;
        }
        accepted.push(Detection {
            height: deriv.grid.node(c),
            index: kind.morse_index(),
            template: kind,
            residual: r,
            node: c,
        });
    }
    accepted.sort_by(|a, b| a.node.cmp(&b.node));
    Ok(CriticalSet { points: accepted })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(d: Vec<f64>) -> DerivSeries {
        let grid = HeightGrid::new(0.0, 0.5, d.len()).unwrap();
        DerivSeries { grid, d }
    }

    #[test]
    fn template_shapes() {
        let [up, cusp, down] = make_templates(5, 10).unwrap();
        assert_eq!(up.shape, vec![0.0, 0.0, 0.5, 1.0, 1.0]);
        assert_eq!(down.shape, vec![1.0, 1.0, 0.5, 0.0, 0.0]);
        assert_eq!(cusp.shape, vec![0.0, 0.5, 1.0, 0.5, 0.0]);
        assert!(make_templates(4, 10).is_err());
        assert!(make_templates(3, 10).is_err());
        assert!(make_templates(11, 10).is_err());
    }

    #[test]
    fn ideal_step_fits_exactly() {
        let w = [0.0, 0.0, 0.0, 0.0, 0.37, 1.0, 1.0, 1.0, 1.0];
        let f = fit_window(TemplateKind::StepUp, &w);
        assert_eq!(f.residual, 0.0);
        assert_eq!(f.contrast, 1.0);
        assert_eq!(fit_window(TemplateKind::StepDown, &w).residual, 1.0);
    }

    #[test]
    fn ideal_cusp_fits_exactly() {
        let w = [0.0, 1.0, 2.0, 3.0, 4.0, 3.0, 2.0, 1.0, 0.0];
        let f = fit_window(TemplateKind::Cusp, &w);
        assert!(f.residual < 1e-12);
        assert!((f.contrast - 4.0).abs() < 1e-12);
        assert!(fit_window(TemplateKind::StepUp, &w).residual > 0.0);
        assert!(fit_window(TemplateKind::StepDown, &w).residual > 0.0);
    }

    #[test]
    fn flat_window_has_no_contrast() {
        let w = [2.0; 9];
        for kind in TemplateKind::ALL {
            let f = fit_window(kind, &w);
            assert_eq!(f.contrast, 0.0);
            assert_eq!(f.residual, 1.0);
        }
        let s = series(vec![0.0; 30]);
        assert!(detect_critical_points(&s, &DetectConfig::default()).unwrap().points.is_empty());
    }

    #[test]
    fn box_profile_gives_min_and_max() {
        let mut d = vec![1.0; 30];
        d[0] = 0.5;
        d[29] = 0.5;
        let set = detect_critical_points(&series(d), &DetectConfig::default()).unwrap();
        assert_eq!(set.counts(), [1, 0, 1]);
        assert!(!set.is_degenerate());
    }

    #[test]
    fn window_longer_than_series_rejected() {
        let s = series(vec![1.0; 7]);
        assert!(detect_critical_points(&s, &DetectConfig::default()).is_err());
    }
}
