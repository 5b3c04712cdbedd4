//! Counting δ-incidences between a point set and a line family.
//!
//! Two engines produce identical reports: [`count_naive`] tests every pair,
//! [`count_bucketed`] hashes the lines' dual points `(a, b)` into a grid of
//! cell side `Cδ` and, for each point `p = (x0, y0)`, visits only the cells
//! meeting the dual strip `|b - (y0 - x0 a)| <= √2·Cδ` (plus one cell of
//! margin). Every line incident to `p` has its dual point in that strip
//! because `|a| <= 1`, so nothing is pruned that the naive engine would count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::planar::{is_incident, LineAB, LineFamily, Point2, PointSet, Scale};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    Naive,
    #[default]
    Bucketed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IncidenceReport {
    pub count: u64,
    /// Incidences per point, indexed like the input point set.
    pub richness: Vec<u32>,
    /// `count / (|P|^{2/3} |L|^{2/3} δ^{-1/3})`, zero when either side is empty.
    pub normalized_ratio: f64,
    /// `(point index, line index)` pairs sorted lexicographically, when requested.
    pub pairs: Option<Vec<(u32, u32)>>,
    pub multiplier: f64,
}

impl IncidenceReport {
    fn assemble(per_point: Vec<Vec<u32>>, p_len: usize, l_len: usize, s: &Scale, keep_pairs: bool) -> Self {
        let richness: Vec<u32> = per_point.iter().map(|v| v.len() as u32).collect();
        let count: u64 = richness.iter().map(|&r| r as u64).sum();
        let pairs = keep_pairs.then(|| {
            per_point
                .iter()
                .enumerate()
                .flat_map(|(i, ls)| ls.iter().map(move |&j| (i as u32, j)))
                .collect()
        });
        Self {
            count,
            richness,
            normalized_ratio: normalized_ratio(count, p_len, l_len, s.delta),
            pairs,
            multiplier: s.multiplier,
        }
    }

    /// `hist[r]` = number of points with exactly `r` incidences.
    pub fn k_histogram(&self) -> Vec<u64> {
        let max = self.richness.iter().copied().max().unwrap_or(0) as usize;
        let mut hist = vec![0u64; max + 1];
        for &r in &self.richness {
            hist[r as usize] += 1;
        }
        hist
    }

    pub fn max_richness(&self) -> u32 {
        self.richness.iter().copied().max().unwrap_or(0)
    }

    /// JSON summary `{count, ratio, k_histogram}`.
    pub fn summary_json(&self) -> serde_json::Value {
        serde_json::json!({
            "count": self.count,
            "ratio": self.normalized_ratio,
            "multiplier": self.multiplier,
            "k_histogram": self.k_histogram(),
        })
    }
}

pub fn normalized_ratio(count: u64, n_points: usize, n_lines: usize, delta: f64) -> f64 {
    if n_points == 0 || n_lines == 0 {
        return 0.0;
    }
    let bound = (n_points as f64).powf(2.0 / 3.0) * (n_lines as f64).powf(2.0 / 3.0) * delta.powf(-1.0 / 3.0);
    count as f64 / bound
}

pub fn count_naive(ps: &PointSet, lf: &LineFamily, s: &Scale) -> IncidenceReport {
    count_naive_with(ps, lf, s, false)
}

pub fn count_naive_with(ps: &PointSet, lf: &LineFamily, s: &Scale, keep_pairs: bool) -> IncidenceReport {
    let lines = lf.lines();
    let per_point: Vec<Vec<u32>> = ps
        .points()
        .par_iter()
        .map(|p| {
            lines
                .iter()
                .enumerate()
                .filter(|(_, l)| is_incident(p, l, s))
                .map(|(j, _)| j as u32)
                .collect()
        })
        .collect();
    IncidenceReport::assemble(per_point, ps.len(), lf.len(), s, keep_pairs)
}

pub fn count_bucketed(ps: &PointSet, lf: &LineFamily, s: &Scale) -> IncidenceReport {
    count_bucketed_with(ps, lf, s, false)
}

pub fn count_bucketed_with(ps: &PointSet, lf: &LineFamily, s: &Scale, keep_pairs: bool) -> IncidenceReport {
    let index = DualIndex::build(lf.lines(), s.radius());
    let per_point: Vec<Vec<u32>> = ps.points().par_iter().map(|p| index.incident_lines(p, s)).collect();
    IncidenceReport::assemble(per_point, ps.len(), lf.len(), s, keep_pairs)
}

pub fn count(ps: &PointSet, lf: &LineFamily, s: &Scale, engine: Engine) -> IncidenceReport {
    match engine {
        Engine::Naive => count_naive(ps, lf, s),
        Engine::Bucketed => count_bucketed(ps, lf, s),
    }
}

struct Column {
    col: i64,
    /// `(row, line index)` sorted by row, then index.
    entries: Vec<(i64, u32)>,
}

/// Sparse uniform grid over dual points, one sorted vector per nonempty column.
pub(crate) struct DualIndex<'a> {
    lines: &'a [LineAB],
    cell: f64,
    columns: Vec<Column>,
}

impl<'a> DualIndex<'a> {
    pub(crate) fn build(lines: &'a [LineAB], cell: f64) -> Self {
        let mut keyed: Vec<(i64, i64, u32)> = lines
            .iter()
            .enumerate()
            .map(|(j, l)| {
                (
                    ((l.a + 1.0) / cell).floor() as i64,
                    ((l.b + 1.0) / cell).floor() as i64,
                    j as u32,
                )
            })
            .collect();
        keyed.sort_unstable();
        let mut columns: Vec<Column> = Vec::new();
        for (c, r, j) in keyed {
            match columns.last_mut() {
                Some(last) if last.col == c => last.entries.push((r, j)),
                _ => columns.push(Column {
                    col: c,
                    entries: vec![(r, j)],
                }),
            }
        }
        Self { lines, cell, columns }
    }

    /// Indices (ascending) of lines incident to `p` at scale `s`.
    pub(crate) fn incident_lines(&self, p: &Point2, s: &Scale) -> Vec<u32> {
        let half_width = std::f64::consts::SQRT_2 * s.radius();
        let mut out = Vec::new();
        for column in &self.columns {
            let a_lo = column.col as f64 * self.cell - 1.0;
            let a_hi = a_lo + self.cell;
            let b1 = p.y - p.x * a_lo;
            let b2 = p.y - p.x * a_hi;
            let b_min = b1.min(b2) - half_width;
            let b_max = b1.max(b2) + half_width;
            let row_lo = ((b_min + 1.0) / self.cell).floor() as i64 - 1;
            let row_hi = ((b_max + 1.0) / self.cell).floor() as i64 + 1;
            let start = column.entries.partition_point(|e| e.0 < row_lo);
            for &(row, j) in &column.entries[start..] {
                if row > row_hi {
                    break;
                }
                if is_incident(p, &self.lines[j as usize], s) {
                    out.push(j);
                }
            }
        }
        out.sort_unstable();
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::gen_random;

    fn single(p: Point2, l: LineAB, delta: f64) -> (PointSet, LineFamily, Scale) {
        (
            PointSet::new(vec![p], delta).unwrap(),
            LineFamily::new(vec![l], delta).unwrap(),
            Scale::delta(delta).unwrap(),
        )
    }

    #[test]
    fn single_pair_counts() {
        let (p, l, s) = single(Point2::new(0.0, 0.0), LineAB::new(0.0, 0.0), 0.1);
        assert_eq!(count_naive(&p, &l, &s).count, 1);
        assert_eq!(count_bucketed(&p, &l, &s).count, 1);
        let (p, l, s) = single(Point2::new(0.0, 1.0), LineAB::new(0.0, 0.0), 0.1);
        assert_eq!(count_naive(&p, &l, &s).count, 0);
        assert_eq!(count_bucketed(&p, &l, &s).count, 0);
    }

    #[test]
    fn empty_point_set() {
        let lf = LineFamily::new(vec![LineAB::new(0.0, 0.0)], 0.1).unwrap();
        let s = Scale::delta(0.1).unwrap();
        let rep = count_bucketed(&PointSet::empty(0.1), &lf, &s);
        assert_eq!(rep.count, 0);
        assert_eq!(rep.normalized_ratio, 0.0);
    }

    #[test]
    fn report_consistency() {
        let (ps, lf) = gen_random(300, 300, 1.0 / 64.0, 5).unwrap();
        let s = Scale::delta(1.0 / 64.0).unwrap().with_multiplier(3.0).unwrap();
        let rep = count_bucketed_with(&ps, &lf, &s, true);
        let pairs = rep.pairs.as_ref().unwrap();
        assert_eq!(rep.count as usize, pairs.len());
        assert_eq!(rep.count, rep.richness.iter().map(|&r| r as u64).sum::<u64>());
        assert!(rep.count <= (ps.len() * lf.len()) as u64);
        assert_eq!(rep, count_naive_with(&ps, &lf, &s, true));
        let hist = rep.k_histogram();
        assert_eq!(hist.iter().sum::<u64>(), ps.len() as u64);
    }

    #[test]
    fn points_outside_the_square_are_handled() {
        // the strip argument only needs |a| <= 1
        let ps = PointSet::new(vec![Point2::new(3.0, 2.5), Point2::new(-2.0, 1.0)], 0.1).unwrap();
        let lf = LineFamily::new(vec![LineAB::new(0.5, 1.0), LineAB::new(-1.0, -1.0)], 0.1).unwrap();
        let s = Scale::delta(0.1).unwrap();
        assert_eq!(count_naive(&ps, &lf, &s), count_bucketed(&ps, &lf, &s));
        assert_eq!(count_naive(&ps, &lf, &s).count, 2);
    }
}
