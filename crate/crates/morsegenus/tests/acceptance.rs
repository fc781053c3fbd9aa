//! Acceptance criteria 1-7. Each test prints one PASS/FAIL line to stderr
//! (bypassing the harness capture) and then asserts its outcome.
//! A lock serializes the tests so the timing checks are not disturbed by
//! each other.

use std::io::Write;
use std::sync::{Mutex, OnceLock};
use std::time::{Duration, Instant};

use morsegenus::areafn::{area_function, first_derivative, height_grid, DerivSeries};
use morsegenus::critdetect::{detect_critical_points, DetectConfig};
use morsegenus::morse::*;
use morsegenus::resample::*;
use morsegenus::surfaces::*;
use morsegenus::vroracle::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

static SERIAL: Mutex<()> = Mutex::new(());

fn report(n: u32, pass: bool, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    let mut err = std::io::stderr().lock();
    let _ = writeln!(err, "criterion {n}: {verdict} | {detail}");
}

fn truth_counts(kind: SurfaceKind) -> [u32; 3] {
    match kind {
        SurfaceKind::DimpledSphere => [2, 2, 2],
        SurfaceKind::Torus => [1, 2, 1],
        SurfaceKind::DimpledTorus => [3, 6, 3],
        SurfaceKind::TwoTorus => [1, 4, 1],
    }
}

fn truth_genus(kind: SurfaceKind) -> u32 {
    match kind {
        SurfaceKind::DimpledSphere => 0,
        SurfaceKind::Torus | SurfaceKind::DimpledTorus => 1,
        SurfaceKind::TwoTorus => 2,
    }
}

#[test]
fn criterion_1_noise_free_exactness() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let cfg = PipelineConfig::default();
    let mut pass = true;
    let mut parts = Vec::new();
    for kind in SurfaceKind::ALL {
        let t = Instant::now();
        let cloud = sample_surface(&kind.default_spec(), 100_000, 1).unwrap();
        let r = run_pipeline_once(&cloud, &cfg).unwrap();
        let dt = t.elapsed();
        let ok = r.counts == truth_counts(kind) && r.genus == Some(truth_genus(kind)) && dt < Duration::from_secs(30);
        pass &= ok;
        parts.push(format!("{kind} {:?} g={:?} {:.2}s", r.counts, r.genus, dt.as_secs_f64()));
    }
    report(1, pass, &parts.join("; "));
    assert!(pass, "{parts:?}");
}

const RUNS: u64 = 100;
const B: usize = 100;

struct MonteCarloRuns {
    by_kind: Vec<(SurfaceKind, Vec<GenusDistribution>)>,
    elapsed: Duration,
}

fn monte_carlo_runs() -> &'static MonteCarloRuns {
    static RUNS_CELL: OnceLock<MonteCarloRuns> = OnceLock::new();
    RUNS_CELL.get_or_init(|| {
        let cfg = PipelineConfig::default();
        let t = Instant::now();
        let by_kind = SurfaceKind::ALL
            .into_iter()
            .map(|kind| {
                let spec = kind.default_spec();
                let runs = (0..RUNS)
                    .map(|rep| monte_carlo(&spec, 5000, 0.1, B, 1000 + rep, &cfg, Schedule::Parallel).unwrap())
                    .collect();
                (kind, runs)
            })
            .collect();
        MonteCarloRuns { by_kind, elapsed: t.elapsed() }
    })
}

#[test]
fn criterion_2_modal_genus() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let runs = monte_carlo_runs();
    let mut pass = runs.elapsed < Duration::from_secs(300);
    let mut parts = Vec::new();
    for (kind, dists) in &runs.by_kind {
        let hits = dists.iter().filter(|d| d.modal_genus == Some(truth_genus(*kind))).count();
        pass &= hits >= 95;
        parts.push(format!("{kind} {hits}/{RUNS}"));
    }
    parts.push(format!("{:.1}s", runs.elapsed.as_secs_f64()));
    report(2, pass, &parts.join("; "));
    assert!(pass, "{parts:?}");
}

#[test]
fn criterion_3_median_counts() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let runs = monte_carlo_runs();
    let mut pass = true;
    let mut parts = Vec::new();
    for (kind, dists) in &runs.by_kind {
        let want = truth_counts(*kind).map(f64::from);
        let hits = dists
            .iter()
            .filter(|d| (0..3).all(|k| d.count_summaries[k].median == want[k]))
            .count();
        let pooled: Vec<f64> = (0..3)
            .map(|k| {
                let v: Vec<f64> = dists.iter().flat_map(|d| d.per_replicate.iter().map(move |r| r.counts[k] as f64)).collect();
                FiveNumber::of(&v).unwrap().median
            })
            .collect();
        pass &= hits >= 95;
        parts.push(format!("{kind} exact in {hits}/{RUNS} runs, pooled medians {pooled:?}"));
    }
    report(3, pass, &parts.join("; "));
    assert!(pass, "{parts:?}");
}

fn pooled_genus(dists: &[GenusDistribution]) -> (Vec<u32>, FiveNumber) {
    let mut support: Vec<u32> = dists.iter().flat_map(|d| d.histogram.keys().copied()).collect();
    support.sort_unstable();
    support.dedup();
    let g: Vec<f64> = dists.iter().flat_map(|d| d.per_replicate.iter().filter_map(|r| r.genus.map(f64::from))).collect();
    (support, FiveNumber::of(&g).unwrap())
}

#[test]
fn criterion_4_spread_ordering() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let runs = monte_carlo_runs();
    let get = |k: SurfaceKind| &runs.by_kind.iter().find(|(kind, _)| *kind == k).unwrap().1;
    let (s_sup, s_fn) = pooled_genus(get(SurfaceKind::DimpledSphere));
    let (t_sup, t_fn) = pooled_genus(get(SurfaceKind::TwoTorus));
    let sphere_ok = s_sup.iter().all(|g| *g <= 2);
    let two_ok = t_sup.iter().all(|g| *g <= 6);
    let iqr_ok = t_fn.iqr() >= s_fn.iqr();
    let pass = sphere_ok && two_ok && iqr_ok;
    let detail = format!(
        "dimpled-sphere support {s_sup:?} IQR {}; two-torus support {t_sup:?} IQR {}",
        s_fn.iqr(),
        t_fn.iqr()
    );
    report(4, pass, &detail);
    assert!(pass, "{detail}");
}

#[test]
fn criterion_5_morse_identities() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let t = Instant::now();
    let mut bad = 0u32;
    let mut checked = 0u32;
    for m0 in 0..=10u32 {
        for m1 in 0..=10u32 {
            for m2 in 0..=10u32 {
                let m = morse_polynomial([m0, m1, m2]);
                checked += 1;
                if euler_characteristic(&m) != 2 - betti_one(&m).value {
                    bad += 1;
                }
                for b0 in 0..=2 {
                    for b1 in 0..=12 {
                        for b2 in 0..=2 {
                            let p = PoincarePolynomial([b0, b1, b2]);
                            if strong_inequality_q(&m, &p).is_some() && !weak_inequality(&m, &p) {
                                bad += 1;
                            }
                        }
                    }
                }
                if is_perfect_lacunary(&m) != (m0 * m1 == 0 && m1 * m2 == 0) {
                    bad += 1;
                }
            }
        }
    }
    let dt = t.elapsed();
    let pass = bad == 0 && dt < Duration::from_secs(1);
    report(5, pass, &format!("{checked} triples, {bad} violations, {:.3}s", dt.as_secs_f64()));
    assert!(pass);
}

#[test]
fn criterion_6_oracle_equivalence() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let t = Instant::now();
    let circle: Vec<Point> = (0..24)
        .map(|i| {
            let a = std::f64::consts::TAU * i as f64 / 24.0;
            [5.0 * a.cos(), 5.0 * a.sin(), 0.0]
        })
        .collect();
    let c = epsilon_sweep(&circle, 0.5, 12.0, 40, 1).unwrap();

    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let clusters: Vec<Point> = (0..60)
        .map(|i| {
            let centre = if i % 2 == 0 { 0.0 } else { 20.0 };
            [centre + rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)]
        })
        .collect();
    let k = epsilon_sweep(&clusters, 0.05, 40.0, 40, 0).unwrap();

    let dense = sample_surface(&SurfaceKind::Torus.default_spec(), 20_000, 1).unwrap();
    let sub = farthest_point_subsample(&dense.points, 400);
    let tor = epsilon_sweep(&sub, 1.0, 8.0, 24, 1).unwrap();
    let dt = t.elapsed();

    let pass = c.stable.0 == vec![1, 1] && k.stable.0 == vec![2] && tor.stable.0 == vec![1, 2] && dt < Duration::from_secs(60);
    let detail = format!(
        "circle {:?}; clusters {:?}; torus ({} pts) {:?} on [{:.2}, {:.2}]; {:.1}s",
        c.stable.0,
        k.stable.0,
        sub.len(),
        tor.stable.0,
        tor.stable_from,
        tor.stable_to,
        dt.as_secs_f64()
    );
    report(6, pass, &detail);
    assert!(pass, "{detail}");
}

#[test]
fn criterion_7_invariances() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let cfg = PipelineConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(77);

    let mut invariant = true;
    for kind in SurfaceKind::ALL {
        for seed in 0..5 {
            let clean = sample_surface(&kind.default_spec(), 5000, seed).unwrap();
            let cloud = add_height_noise(&clean, 0.1, seed + 100).unwrap();
            let grid = height_grid(&cloud, cfg.step).unwrap();
            let deriv = first_derivative(&area_function(&cloud, &grid).unwrap()).unwrap();
            let base = detect_critical_points(&deriv, &cfg.detect).unwrap().counts();
            let c: f64 = rng.random_range(-50.0..50.0);
            let moved = PointCloud::new(cloud.points.iter().map(|p| [p[0], p[1], p[2] + c]).collect());
            invariant &= run_pipeline_once(&moved, &cfg).unwrap().counts == base;
            let a: f64 = rng.random_range(0.01..100.0);
            let scaled = DerivSeries { grid: deriv.grid, d: deriv.d.iter().map(|v| a * v).collect() };
            invariant &= detect_critical_points(&scaled, &DetectConfig::default()).unwrap().counts() == base;
        }
    }

    let mut monotone = true;
    for _ in 0..1000 {
        let n = rng.random_range(2..2000);
        let spread: f64 = rng.random_range(0.1..50.0);
        let pts: Vec<Point> = (0..n).map(|_| [0.0, 0.0, spread * rng.random::<f64>().powi(3)]).collect();
        let cloud = PointCloud::new(pts);
        let Ok(grid) = height_grid(&cloud, rng.random_range(0.05..2.0)) else { continue };
        let s = area_function(&cloud, &grid).unwrap();
        monotone &= s.s.windows(2).all(|w| w[0] <= w[1]) && *s.s.last().unwrap() == 1.0;
    }

    let spec = SurfaceKind::DimpledTorus.default_spec();
    let serial = monte_carlo(&spec, 5000, 0.1, 50, 31, &cfg, Schedule::Serial).unwrap();
    let parallel = monte_carlo(&spec, 5000, 0.1, 50, 31, &cfg, Schedule::Parallel).unwrap();
    let same = serial == parallel;

    let pass = invariant && monotone && same;
    report(7, pass, &format!("translation/scaling {invariant}, monotone {monotone}, serial==parallel {same}"));
    assert!(pass);
}
