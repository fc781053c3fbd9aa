//! Vietoris-Rips complexes and their Z/2 Betti numbers, used as an
//! independent check of the genus on small clouds.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::surfaces::Point;

pub const DEFAULT_POINT_LIMIT: usize = 400;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimplicialComplex {
    pub epsilon: f64,
    pub max_dim: usize,
    /// `simplices[k]` lists the k-simplices as sorted vertex indices, in lexicographic order.
    pub simplices: Vec<Vec<Vec<usize>>>,
}

impl SimplicialComplex {
    pub fn count(&self, k: usize) -> usize {
        self.simplices.get(k).map_or(0, Vec::len)
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.simplices
            .iter()
            .enumerate()
            .map(|(k, s)| if k % 2 == 0 { s.len() as i64 } else { -(s.len() as i64) })
            .sum()
    }
}

fn dist(a: &Point, b: &Point) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

pub fn build_vr(points: &[Point], epsilon: f64, max_dim: usize) -> Result<SimplicialComplex> {
    build_vr_limited(points, epsilon, max_dim, DEFAULT_POINT_LIMIT)
}

/// All simplices up to `max_dim` whose vertices are pairwise within `epsilon`.
pub fn build_vr_limited(
    points: &[Point],
    epsilon: f64,
    max_dim: usize,
    limit: usize,
) -> Result<SimplicialComplex> {
    if !(1..=3).contains(&max_dim) {
        return Err(param(format!("max_dim must be 1, 2 or 3, got {max_dim}")));
    }
    if !(epsilon >= 0.0 && epsilon.is_finite()) {
        return Err(param(format!("epsilon must be finite and >= 0, got {epsilon}")));
    }
    if points.len() > limit {
        return Err(Error::SizeLimit(format!(
            "{} points exceed the oracle limit of {limit}",
            points.len()
        )));
    }
    let n = points.len();
    // higher-indexed neighbours only, so every clique is listed once
    let up: Vec<Vec<usize>> = (0..n)
        .map(|i| (i + 1..n).filter(|&j| dist(&points[i], &points[j]) <= epsilon).collect())
        .collect();
    let adjacent = |i: usize, j: usize| up[i.min(j)].binary_search(&i.max(j)).is_ok();

    let mut simplices: Vec<Vec<Vec<usize>>> = vec![Vec::new(); max_dim + 1];
    simplices[0] = (0..n).map(|i| vec![i]).collect();
    let mut stack: Vec<(Vec<usize>, Vec<usize>)> =
        (0..n).map(|i| (vec![i], up[i].clone())).collect();
    while let Some((simplex, cands)) = stack.pop() {
        if simplex.len() > max_dim {
            continue;
        }
        for (a, &v) in cands.iter().enumerate() {
            let mut next = simplex.clone();
            next.push(v);
            let rest: Vec<usize> = cands[a + 1..].iter().copied().filter(|&w| adjacent(v, w)).collect();
            simplices[next.len() - 1].push(next.clone());
            stack.push((next, rest));
        }
    }
    for level in simplices.iter_mut() {
        level.sort();
    }
    Ok(SimplicialComplex { epsilon, max_dim, simplices })
}

/// Rank over Z/2 of the boundary map from k-simplices to (k-1)-simplices.
fn boundary_rank(cx: &SimplicialComplex, k: usize) -> usize {
    if k == 0 || k > cx.max_dim {
        return 0;
    }
    let faces: HashMap<&[usize], usize> =
        cx.simplices[k - 1].iter().enumerate().map(|(i, s)| (s.as_slice(), i)).collect();
    let mut pivot_of: HashMap<usize, Vec<usize>> = HashMap::new();
    let mut rank = 0;
    let mut face = Vec::with_capacity(k);
    for s in &cx.simplices[k] {
        let mut col: Vec<usize> = (0..s.len())
            .map(|skip| {
                face.clear();
                face.extend(s.iter().enumerate().filter(|&(i, _)| i != skip).map(|(_, v)| *v));
                faces[face.as_slice()]
            })
            .collect();
        col.sort_unstable();
        while let Some(&low) = col.last() {
            match pivot_of.get(&low) {
                Some(other) => col = sym_diff(&col, other),
                None => break,
            }
        }
        if let Some(&low) = col.last() {
            pivot_of.insert(low, col);
            rank += 1;
        }
    }
    rank
}

fn sym_diff(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BettiVector(pub Vec<usize>);

/// Homology of the complex exactly as built, top dimension included.
pub fn complex_betti(cx: &SimplicialComplex) -> BettiVector {
    let ranks: Vec<usize> = (0..=cx.max_dim + 1).map(|k| boundary_rank(cx, k)).collect();
    BettiVector((0..=cx.max_dim).map(|k| cx.count(k) - ranks[k] - ranks[k + 1]).collect())
}

/// b_k for k < max_dim. The top dimension is left out: the Rips complex is
/// cut off there, so its cycles are not filled in.
pub fn betti_z2(cx: &SimplicialComplex) -> BettiVector {
    let mut b = complex_betti(cx).0;
    b.pop();
    BettiVector(b)
}

/// Betti numbers b_0 .. b_{up_to} of the Rips complex at `epsilon`.
pub fn oracle_betti_for_cloud(points: &[Point], epsilon: f64, up_to: usize) -> Result<BettiVector> {
    if up_to > 2 {
        return Err(param("Betti numbers are available up to dimension 2"));
    }
    let cx = build_vr(points, epsilon, up_to + 1)?;
    Ok(betti_z2(&cx))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub epsilon: f64,
    pub betti: BettiVector,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
    /// Betti vector holding over the longest run of consecutive grid values.
    pub stable: BettiVector,
    pub stable_from: f64,
    pub stable_to: f64,
}

/// Betti numbers on a geometric grid of `steps` epsilons between `lo` and `hi`.
pub fn epsilon_sweep(points: &[Point], lo: f64, hi: f64, steps: usize, up_to: usize) -> Result<SweepReport> {
    if !(lo > 0.0 && hi >= lo && hi.is_finite()) || steps == 0 {
        return Err(param("sweep needs 0 < lo <= hi and at least one step"));
    }
    let ratio = if steps > 1 { (hi / lo).powf(1.0 / (steps - 1) as f64) } else { 1.0 };
    let rows = (0..steps)
        .map(|i| {
            let epsilon = lo * ratio.powi(i as i32);
            oracle_betti_for_cloud(points, epsilon, up_to).map(|betti| SweepRow { epsilon, betti })
        })
        .collect::<Result<Vec<_>>>()?;
    let (mut best, mut start) = ((0, 0), 0);
    for i in 1..=rows.len() {
        if i == rows.len() || rows[i].betti != rows[start].betti {
            if i - start > best.1 - best.0 {
                best = (start, i);
            }
            start = i;
        }
    }
    Ok(SweepReport {
        stable: rows[best.0].betti.clone(),
        stable_from: rows[best.0].epsilon,
        stable_to: rows[best.1 - 1].epsilon,
        rows,
    })
}

/// Greedy farthest-point subsample of `m` points, starting from index 0.
pub fn farthest_point_subsample(points: &[Point], m: usize) -> Vec<Point> {
    if points.is_empty() || m == 0 {
        return Vec::new();
    }
    let m = m.min(points.len());
    let mut chosen = vec![points[0]];
    let mut d: Vec<f64> = points.iter().map(|p| dist(p, &points[0])).collect();
    while chosen.len() < m {
        let (far, _) = d.iter().enumerate().fold((0, -1.0), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
        let p = points[far];
        chosen.push(p);
        for (di, q) in d.iter_mut().zip(points) {
            *di = di.min(dist(q, &p));
        }
    }
    chosen
}

/// Median distance from each point to its nearest neighbour. Quadratic time;
/// meant for clouds small enough for the oracle.
pub fn median_nn_distance(points: &[Point]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let mut nn: Vec<f64> = points
        .iter()
        .enumerate()
        .map(|(i, p)| {
            points
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, q)| dist(p, q))
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    nn.sort_by(f64::total_cmp);
    let m = nn.len();
    Some(if m % 2 == 1 { nn[m / 2] } else { 0.5 * (nn[m / 2 - 1] + nn[m / 2]) })
}
