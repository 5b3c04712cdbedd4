//! k-rich points, concurrency of line families and the angular split of a
//! concurrent bush.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{LabError, Result};
use crate::planar::{is_incident, line_metric, LineAB, LineFamily, Point2, PointSet, Scale};

#[derive(Debug, Clone, Serialize)]
pub struct RichPointResult {
    pub k: u32,
    pub points: PointSet,
    /// Richness of each returned point at the search multiplier.
    pub richness: Vec<u32>,
    /// `|points| · k³ · ε / |L|²`.
    pub bound_constant: f64,
    /// Incidence multiplier used when evaluating candidate richness.
    pub search_multiplier: f64,
}

/// Candidate lattice `-1 + iδ`, `i = 0..=n`, covering `[-1, 1]`.
fn lattice(delta: f64) -> (usize, impl Fn(usize) -> f64) {
    let n = (2.0 / delta + 1e-9).floor() as usize;
    (n, move |i: usize| -1.0 + i as f64 * delta)
}

/// Grid points of the δ-lattice of `Q0` with richness `>= k` at scale `s`,
/// in row-major order (rows of constant `y`, increasing `x` within a row).
///
/// Each lattice column `x = x_i` is rasterized line by line: a line can only
/// be incident to lattice points whose height lies within
/// `Cδ·√(1 + a²)` of `a x_i + b`, and those are tested exactly.
pub fn k_rich_candidates(lf: &LineFamily, k: u32, s: &Scale) -> Vec<(Point2, u32)> {
    let (n, coord) = lattice(s.delta);
    let lines = lf.lines();
    let r = s.radius();
    let mut found: Vec<(usize, usize, u32)> = (0..=n)
        .into_par_iter()
        .flat_map_iter(|i| {
            let x = coord(i);
            let mut counts = vec![0u32; n + 1];
            for l in lines {
                let yc = l.eval(x);
                let reach = r * (1.0 + l.a * l.a).sqrt();
                let lo = ((yc - reach + 1.0) / s.delta).floor() as i64 - 1;
                let hi = ((yc + reach + 1.0) / s.delta).ceil() as i64 + 1;
                let lo = lo.max(0) as usize;
                let hi = hi.min(n as i64);
                if hi < lo as i64 {
                    continue;
                }
                for (j, c) in counts.iter_mut().enumerate().take(hi as usize + 1).skip(lo) {
                    if is_incident(&Point2::new(x, coord(j)), l, s) {
                        *c += 1;
                    }
                }
            }
            counts
                .into_iter()
                .enumerate()
                .filter(|&(_, c)| c >= k)
                .map(move |(j, c)| (j, i, c))
                .collect::<Vec<_>>()
        })
        .collect();
    found.sort_unstable_by_key(|&(j, i, _)| (j, i));
    found
        .into_iter()
        .map(|(j, i, c)| (Point2::new(coord(i), coord(j)), c))
        .collect()
}

/// Greedy first-come extraction of a δ-separated subset.
pub fn greedy_separated<T: Copy>(candidates: &[(Point2, T)], delta: f64) -> Vec<(Point2, T)> {
    let key = |p: &Point2| ((p.x / delta).floor() as i64, (p.y / delta).floor() as i64);
    let mut cells: HashMap<(i64, i64), Vec<Point2>> = HashMap::new();
    let mut kept = Vec::new();
    'outer: for &(p, tag) in candidates {
        let (cx, cy) = key(&p);
        for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(bucket) = cells.get(&(cx + dx, cy + dy)) {
                    if bucket.iter().any(|q| q.dist(&p) < delta) {
                        continue 'outer;
                    }
                }
            }
        }
        cells.entry((cx, cy)).or_default().push(p);
        kept.push((p, tag));
    }
    kept
}

fn rich_result(lf: &LineFamily, k: u32, s: &Scale, search: &Scale) -> RichPointResult {
    let candidates = k_rich_candidates(lf, k, search);
    let kept = greedy_separated(&candidates, s.delta);
    let richness: Vec<u32> = kept.iter().map(|&(_, c)| c).collect();
    let points = PointSet::trusted(kept.into_iter().map(|(p, _)| p).collect(), s.delta);
    let bound_constant = if lf.is_empty() {
        0.0
    } else {
        points.len() as f64 * (k as f64).powi(3) * s.epsilon / (lf.len() as f64).powi(2)
    };
    RichPointResult {
        k,
        points,
        richness,
        bound_constant,
        search_multiplier: search.multiplier,
    }
}

/// δ-separated k-rich points of `lf` found on the δ-lattice of `Q0`.
/// Every returned point is incident (at `s`) to at least `k` lines.
pub fn k_rich_points(lf: &LineFamily, k: u32, s: &Scale) -> Result<RichPointResult> {
    if k < 2 {
        return Err(LabError::InvalidParameter(format!("k = {k}, need k >= 2")));
    }
    Ok(rich_result(lf, k, s, s))
}

/// Lattice search at multiplier `C + 1`. Any point of `Q0` that is k-rich at
/// multiplier `C` lies within `δ/√2` of a lattice point that is k-rich at
/// `C + 1`, so the unthinned candidate list is a covering certificate; the
/// returned set is its greedy δ-separated thinning.
pub fn k_rich_cover(lf: &LineFamily, k: u32, s: &Scale) -> Result<(RichPointResult, Vec<Point2>)> {
    if k < 2 {
        return Err(LabError::InvalidParameter(format!("k = {k}, need k >= 2")));
    }
    let search = s.with_multiplier(s.multiplier + 1.0)?;
    let all = k_rich_candidates(lf, k, &search).into_iter().map(|(p, _)| p).collect();
    Ok((rich_result(lf, k, s, &search), all))
}

/// Number of lines of `lf` incident to `p`.
pub fn max_concurrency(lf: &LineFamily, p: &Point2, s: &Scale) -> usize {
    lf.lines().iter().filter(|l| is_incident(p, l, s)).count()
}

/// Greedy maximal ε-separated family of lines of the parameter square passing
/// exactly through `p`. Their dual points lie on the segment
/// `b = p.y - p.x·a`, scanned in increasing `a` with step `ε/64`.
pub fn greedy_concurrent_family(p: &Point2, epsilon: f64) -> Result<LineFamily> {
    if !p.in_square() {
        return Err(LabError::OutsideSquare { x: p.x, y: p.y });
    }
    let step = epsilon / 64.0;
    let steps = (2.0 / step).round() as usize;
    let mut lines: Vec<LineAB> = Vec::new();
    for i in 0..=steps {
        let a = (-1.0 + i as f64 * step).min(1.0);
        let l = LineAB::new(a, p.y - p.x * a);
        if !l.in_parameter_square() {
            continue;
        }
        // collinear dual points: the last accepted one is the nearest
        if lines.last().is_none_or(|last| line_metric(last, &l) >= epsilon) {
            lines.push(l);
        }
    }
    Ok(LineFamily::trusted(lines, epsilon))
}

#[derive(Debug, Clone, PartialEq)]
pub struct AngularSplit {
    pub low: Vec<usize>,
    pub high: Vec<usize>,
    pub min_angle: f64,
}

/// `|arctan a1 - arctan a2|`.
pub fn line_angle(l1: &LineAB, l2: &LineAB) -> f64 {
    (l1.a.atan() - l2.a.atan()).abs()
}

/// Splits a bush of lines incident to `p` into the bottom and top quarters by
/// slope (each of size `⌈N/4⌉`) and reports the smallest angle between them.
pub fn angular_split(lines_at_p: &LineFamily, p: &Point2, s: &Scale) -> Result<AngularSplit> {
    let lines = lines_at_p.lines();
    let n = lines.len();
    if n < 2 {
        return Err(LabError::InvalidParameter(format!(
            "angular split needs N >= 2 lines, got {n}"
        )));
    }
    if let Some(l) = lines.iter().find(|l| !is_incident(p, l, s)) {
        return Err(LabError::InvalidParameter(format!(
            "line (a = {}, b = {}) is not incident to the bush center",
            l.a, l.b
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| lines[i].a.total_cmp(&lines[j].a).then(i.cmp(&j)));
    let q = n.div_ceil(4);
    let low = order[..q].to_vec();
    let high = order[n - q..].to_vec();
    let min_angle = low
        .iter()
        .flat_map(|&i| high.iter().map(move |&j| (i, j)))
        .map(|(i, j)| line_angle(&lines[i], &lines[j]))
        .fold(f64::INFINITY, f64::min);
    Ok(AngularSplit { low, high, min_angle })
}
