//! Points in `Q0 = [-1,1]^2`, lines `y = ax + b` with `|a|, |b| <= 1`, the
//! parameter metric on lines, δ-incidence and point-line duality.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn in_square(&self) -> bool {
        self.x.abs() <= 1.0 && self.y.abs() <= 1.0
    }

    pub fn dist(&self, other: &Point2) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// The line `{y = a x + b}`, stored by its dual coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineAB {
    pub a: f64,
    pub b: f64,
}

impl LineAB {
    pub const fn new(a: f64, b: f64) -> Self {
        Self { a, b }
    }

    pub fn checked(a: f64, b: f64) -> Result<Self> {
        let l = Self { a, b };
        if l.in_parameter_square() {
            Ok(l)
        } else {
            Err(LabError::LineOutOfRange { a, b })
        }
    }

    pub fn in_parameter_square(&self) -> bool {
        self.a.abs() <= 1.0 && self.b.abs() <= 1.0
    }

    /// Height of the line above `x`.
    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        self.a * x + self.b
    }
}

/// Scale parameters: δ, ε and the incidence multiplier `C` (a point is
/// incident to a line when it lies in the closed `Cδ`-neighborhood).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scale {
    pub delta: f64,
    pub epsilon: f64,
    pub multiplier: f64,
}

impl Scale {
    pub fn new(delta: f64, epsilon: f64, multiplier: f64) -> Result<Self> {
        if !(delta > 0.0 && delta <= 1.0) {
            return Err(LabError::InvalidScale(format!("delta = {delta} not in (0, 1]")));
        }
        if !(epsilon >= delta && epsilon <= 1.0) {
            return Err(LabError::InvalidScale(format!(
                "epsilon = {epsilon} not in [delta, 1] (delta = {delta})"
            )));
        }
        if !(multiplier >= 1.0 && multiplier.is_finite()) {
            return Err(LabError::InvalidScale(format!("multiplier C = {multiplier} < 1")));
        }
        Ok(Self {
            delta,
            epsilon,
            multiplier,
        })
    }

    /// `ε = δ`, `C = 1`.
    pub fn delta(delta: f64) -> Result<Self> {
        Self::new(delta, delta, 1.0)
    }

    pub fn with_multiplier(self, multiplier: f64) -> Result<Self> {
        Self::new(self.delta, self.epsilon, multiplier)
    }

    pub fn with_epsilon(self, epsilon: f64) -> Result<Self> {
        Self::new(self.delta, epsilon, self.multiplier)
    }

    /// Radius of the incidence neighborhood, `C·δ`.
    #[inline]
    pub fn radius(&self) -> f64 {
        self.multiplier * self.delta
    }
}

/// `d(ℓ1, ℓ2) = |(a1, b1) - (a2, b2)|`.
#[inline]
pub fn line_metric(l1: &LineAB, l2: &LineAB) -> f64 {
    (l1.a - l2.a).hypot(l1.b - l2.b)
}

/// Euclidean distance from `p` to the (infinite) line.
#[inline]
pub fn point_line_dist(p: &Point2, l: &LineAB) -> f64 {
    (l.a * p.x + l.b - p.y).abs() / (1.0 + l.a * l.a).sqrt()
}

/// Closed δ-incidence at multiplier `C`: `dist(p, ℓ) <= C·δ`.
#[inline]
pub fn is_incident(p: &Point2, l: &LineAB, s: &Scale) -> bool {
    point_line_dist(p, l) <= s.radius()
}

/// `(a, b) ↦ {y = -a x + b}`.
pub fn dual_point_to_line(p: &Point2) -> Result<LineAB> {
    if !p.in_square() {
        return Err(LabError::OutsideSquare { x: p.x, y: p.y });
    }
    Ok(LineAB::new(-p.x, p.y))
}

/// `{y = c x + d} ↦ (c, d)`.
pub fn dual_line_to_point(l: &LineAB) -> Point2 {
    Point2::new(l.a, l.b)
}

/// Outcome of a separation check. `worst` is the closest offending pair
/// `(i, j, distance)` with `i < j`, present only when the check fails.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeparationReport {
    pub separated: bool,
    pub worst: Option<(usize, usize, f64)>,
}

/// Checks that all pairwise Euclidean distances are `>= bound`. Pairs closer
/// than `bound` always share a cell or neighbor cell of side `bound`, so only
/// those are compared.
pub(crate) fn check_separation(coords: &[[f64; 2]], bound: f64) -> SeparationReport {
    if coords.len() < 2 || bound <= 0.0 {
        return SeparationReport {
            separated: true,
            worst: None,
        };
    }
    let key = |c: &[f64; 2]| ((c[0] / bound).floor() as i64, (c[1] / bound).floor() as i64);
    let mut cells: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    for (i, c) in coords.iter().enumerate() {
        cells.entry(key(c)).or_default().push(i);
    }
    let mut worst: Option<(usize, usize, f64)> = None;
    for (i, c) in coords.iter().enumerate() {
        let (cx, cy) = key(c);
        for dx in -1..=1 {
            for dy in -1..=1 {
                let Some(bucket) = cells.get(&(cx + dx, cy + dy)) else {
                    continue;
                };
                for &j in bucket {
                    if j <= i {
                        continue;
                    }
                    let d = (c[0] - coords[j][0]).hypot(c[1] - coords[j][1]);
                    if d < bound && worst.is_none_or(|w| d < w.2 || (d == w.2 && (i, j) < (w.0, w.1))) {
                        worst = Some((i, j, d));
                    }
                }
            }
        }
    }
    SeparationReport {
        separated: worst.is_none(),
        worst,
    }
}

/// A δ-separated point set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSet {
    points: Vec<Point2>,
    delta: f64,
}

impl PointSet {
    /// Validates the separation; fails with the closest offending pair.
    pub fn new(points: Vec<Point2>, delta: f64) -> Result<Self> {
        let set = Self { points, delta };
        set.require_separated()?;
        Ok(set)
    }

    pub(crate) fn trusted(points: Vec<Point2>, delta: f64) -> Self {
        Self { points, delta }
    }

    pub fn empty(delta: f64) -> Self {
        Self {
            points: Vec::new(),
            delta,
        }
    }

    pub fn points(&self) -> &[Point2] {
        &self.points
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn validate_separation(&self) -> SeparationReport {
        let coords: Vec<[f64; 2]> = self.points.iter().map(|p| [p.x, p.y]).collect();
        check_separation(&coords, self.delta)
    }

    fn require_separated(&self) -> Result<()> {
        match self.validate_separation().worst {
            None => Ok(()),
            Some((i, j, distance)) => Err(LabError::Separation {
                i,
                j,
                distance,
                required: self.delta,
            }),
        }
    }
}

/// An ε-separated family of lines in the parameter square.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineFamily {
    lines: Vec<LineAB>,
    epsilon: f64,
}

impl LineFamily {
    pub fn new(lines: Vec<LineAB>, epsilon: f64) -> Result<Self> {
        if let Some(l) = lines.iter().find(|l| !l.in_parameter_square()) {
            return Err(LabError::LineOutOfRange { a: l.a, b: l.b });
        }
        let fam = Self { lines, epsilon };
        match fam.validate_separation().worst {
            None => Ok(fam),
            Some((i, j, distance)) => Err(LabError::Separation {
                i,
                j,
                distance,
                required: epsilon,
            }),
        }
    }

    pub(crate) fn trusted(lines: Vec<LineAB>, epsilon: f64) -> Self {
        Self { lines, epsilon }
    }

    pub fn empty(epsilon: f64) -> Self {
        Self {
            lines: Vec::new(),
            epsilon,
        }
    }

    pub fn lines(&self) -> &[LineAB] {
        &self.lines
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn len(&self) -> usize {
        self.lines.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lines.is_empty()
    }

    pub fn validate_separation(&self) -> SeparationReport {
        let coords: Vec<[f64; 2]> = self.lines.iter().map(|l| [l.a, l.b]).collect();
        check_separation(&coords, self.epsilon)
    }

    /// Same lines, re-declared with a (smaller or equal) separation bound.
    pub fn relaxed(&self, epsilon: f64) -> Result<Self> {
        Self::new(self.lines.clone(), epsilon)
    }
}

/// Maps a δ-separated point set in `Q0` to the dual δ-separated line family.
pub fn dual_points_to_lines(ps: &PointSet) -> Result<LineFamily> {
    let lines = ps.points().iter().map(dual_point_to_line).collect::<Result<Vec<_>>>()?;
    // (x, y) ↦ (-x, y) is an isometry, so separation carries over unchanged.
    Ok(LineFamily::trusted(lines, ps.delta()))
}

pub fn dual_lines_to_points(lf: &LineFamily) -> PointSet {
    PointSet::trusted(lf.lines().iter().map(dual_line_to_point).collect(), lf.epsilon())
}
