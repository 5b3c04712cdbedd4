//! Deterministic generators for the configuration families used in the
//! experiments: lattice packings, the tube and rectangle sharpness examples,
//! k-stars, concurrent bushes and seeded random separated families.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::planar::{line_metric, LineAB, LineFamily, Point2, PointSet};
use crate::rng::{tag, SplitMix64};

/// Axis-aligned rectangle `[x0, x1] × [y0, y1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Rect {
    pub const SQUARE: Rect = Rect {
        x0: -1.0,
        x1: 1.0,
        y0: -1.0,
        y1: 1.0,
    };

    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        Self { x0, x1, y0, y1 }
    }

    pub fn is_empty(&self) -> bool {
        !(self.x1 >= self.x0 && self.y1 >= self.y0)
    }
}

/// Number of lattice steps of size `delta` fitting in `len`.
fn steps(len: f64, delta: f64) -> usize {
    (len / delta * (1.0 + 1e-12)).floor() as usize
}

/// Square lattice of spacing `delta` anchored at the lower-left corner of `region`.
pub fn gen_grid_packing(delta: f64, region: Rect) -> Result<PointSet> {
    if !(delta > 0.0 && delta < f64::INFINITY) {
        return Err(LabError::InvalidParameter(format!("delta = {delta}")));
    }
    if region.is_empty() {
        return Ok(PointSet::empty(delta));
    }
    let nx = steps(region.x1 - region.x0, delta);
    let ny = steps(region.y1 - region.y0, delta);
    let mut pts = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            pts.push(Point2::new(region.x0 + i as f64 * delta, region.y0 + j as f64 * delta));
        }
    }
    PointSet::new(pts, delta)
}

/// Points: one row of the δ-lattice along the long axis of the tube
/// `[0, δ^{1/2}] × [0, δ]` (at height `δ/2`). Lines: slopes `jδ`,
/// `|j| <= ⌊δ^{-1/2}/2⌋`, all through the tube's center, so consecutive dual
/// points differ by at least `δ` in `a` alone and every line passes within
/// `δ/4` of every point.
pub fn gen_tube_example(delta: f64) -> Result<(PointSet, LineFamily)> {
    if !(delta > 0.0 && delta <= 1.0 / 16.0) {
        return Err(LabError::InvalidParameter(format!(
            "tube example needs 0 < delta <= 2^-4, got {delta}"
        )));
    }
    let root = delta.sqrt();
    let m = steps(root, delta);
    let cx = m as f64 * delta / 2.0;
    let cy = delta / 2.0;
    let pts: Vec<Point2> = (0..=m).map(|i| Point2::new(i as f64 * delta, cy)).collect();
    let half = ((1.0 / root) / 2.0 + 1e-9).floor() as i64;
    let lines: Vec<LineAB> = (-half..=half)
        .map(|j| {
            let a = j as f64 * delta;
            LineAB::new(a, cy - a * cx)
        })
        .collect();
    Ok((PointSet::new(pts, delta)?, LineFamily::new(lines, delta)?))
}

/// Rectangle example with δ-separated lines; see [`gen_rectangle_family`].
pub fn gen_rectangle_example(delta: f64, r: f64, s: f64) -> Result<(PointSet, LineFamily)> {
    gen_rectangle_family(delta, delta, r, s)
}

/// Points: δ-lattice packing of `R = [0, r] × [0, s]`. Lines: the ε-lattice
/// (anchored at `(-1, -1)`) of parameters `(a, b)` whose line meets `R`.
pub fn gen_rectangle_family(delta: f64, epsilon: f64, r: f64, s: f64) -> Result<(PointSet, LineFamily)> {
    if !(delta > 0.0 && delta <= s && s <= r && r <= 1.0) {
        return Err(LabError::InvalidParameter(format!(
            "rectangle needs delta <= s <= r <= 1 (delta = {delta}, s = {s}, r = {r})"
        )));
    }
    if !(epsilon >= delta && epsilon <= 1.0) {
        return Err(LabError::InvalidParameter(format!(
            "epsilon = {epsilon} not in [delta, 1]"
        )));
    }
    let pts = gen_grid_packing(delta, Rect::new(0.0, r, 0.0, s))?;
    let n = steps(2.0, epsilon);
    let mut lines = Vec::new();
    for i in 0..=n {
        let a = -1.0 + i as f64 * epsilon;
        // ℓ meets R iff [min(b, ar + b), max(b, ar + b)] meets [0, s]
        let b_lo = -(a * r).max(0.0);
        let b_hi = s - (a * r).min(0.0);
        for j in 0..=n {
            let b = -1.0 + j as f64 * epsilon;
            if b >= b_lo && b <= b_hi {
                lines.push(LineAB::new(a, b));
            }
        }
    }
    Ok((pts, LineFamily::new(lines, epsilon)?))
}

/// A planted k-star configuration.
#[derive(Debug, Clone)]
pub struct KStar {
    pub centers: PointSet,
    pub lines: LineFamily,
    /// For each line, the index of the center it was planted through.
    pub owner: Vec<usize>,
    /// Lines whose slope was nudged (still exactly through their center).
    pub slope_nudges: usize,
    /// Lines whose intercept was shifted by `+δ` (concurrency broken by `<= δ`).
    pub intercept_shifts: usize,
}

/// `m` centers on a coarse lattice inside `[-1/2, 1/2]^2` (snapped to the
/// δ-lattice of `Q0`), each with `k` lines through it; all lines pairwise
/// ε-separated.
pub fn gen_kstar(k: usize, m: usize, delta: f64, epsilon: f64) -> Result<KStar> {
    if k < 2 || m < 1 {
        return Err(LabError::Infeasible(format!(
            "k-star needs k >= 2 and m >= 1 (k = {k}, m = {m})"
        )));
    }
    if !(delta > 0.0 && epsilon >= delta && epsilon <= 1.0) {
        return Err(LabError::Infeasible(format!(
            "bad scales delta = {delta}, epsilon = {epsilon}"
        )));
    }
    let slot = 2.0 / k as f64;
    if slot < epsilon {
        return Err(LabError::Infeasible(format!(
            "{k} slopes cannot be {epsilon}-separated inside [-1, 1]"
        )));
    }
    let g = (m as f64).sqrt().ceil() as usize;
    let spacing = ((1.0 / g as f64) / delta).floor() * delta;
    if spacing < 2.0 * delta * k as f64 {
        return Err(LabError::Infeasible(format!(
            "{m} centers cannot be {}-separated inside [-1/2, 1/2]^2",
            2.0 * delta * k as f64
        )));
    }
    let snap = |x: f64| -1.0 + ((x + 1.0) / delta).round() * delta;
    let centers: Vec<Point2> = (0..m)
        .map(|c| {
            let (i, j) = (c % g, c / g);
            Point2::new(
                snap(-0.5 + spacing * (i as f64 + 0.5)),
                snap(-0.5 + spacing * (j as f64 + 0.5)),
            )
        })
        .collect();

    let key = |l: &LineAB| ((l.a / epsilon).floor() as i64, (l.b / epsilon).floor() as i64);
    let mut grid: HashMap<(i64, i64), Vec<LineAB>> = HashMap::new();
    let clear = |grid: &HashMap<(i64, i64), Vec<LineAB>>, l: &LineAB| {
        let (ka, kb) = key(l);
        (-1..=1).all(|da| {
            (-1..=1).all(|db| {
                grid.get(&(ka + da, kb + db))
                    .is_none_or(|v| v.iter().all(|o| line_metric(o, l) >= epsilon))
            })
        })
    };

    let max_nudge = ((slot / 2.0 - epsilon / 2.0) / (epsilon / 4.0)).floor() as i64;
    let mut lines = Vec::with_capacity(m * k);
    let mut owner = Vec::with_capacity(m * k);
    let (mut slope_nudges, mut intercept_shifts) = (0, 0);
    for (ci, c) in centers.iter().enumerate() {
        for j in 0..k {
            let a0 = -1.0 + slot * (j as f64 + 0.5);
            let through = |a: f64| LineAB::new(a, c.y - a * c.x);
            let mut chosen = None;
            'search: for t in 0..=max_nudge.max(0) {
                for sign in [1.0, -1.0] {
                    if t == 0 && sign < 0.0 {
                        continue;
                    }
                    let l = through(a0 + sign * t as f64 * epsilon / 4.0);
                    if l.in_parameter_square() && clear(&grid, &l) {
                        if t > 0 {
                            slope_nudges += 1;
                        }
                        chosen = Some(l);
                        break 'search;
                    }
                }
            }
            if chosen.is_none() {
                let shifted = LineAB::new(a0, c.y - a0 * c.x + delta);
                if shifted.in_parameter_square() && clear(&grid, &shifted) {
                    intercept_shifts += 1;
                    chosen = Some(shifted);
                }
            }
            let Some(l) = chosen else {
                return Err(LabError::Infeasible(format!(
                    "could not place line {j} of star {ci} without an epsilon-collision"
                )));
            };
            grid.entry(key(&l)).or_default().push(l);
            lines.push(l);
            owner.push(ci);
        }
    }
    Ok(KStar {
        centers: PointSet::new(centers, delta)?,
        lines: LineFamily::new(lines, epsilon)?,
        owner,
        slope_nudges,
        intercept_shifts,
    })
}

/// `n` distinct sites of the `2δ`-lattice of `[-1, 1]^2`, each jittered by at
/// most `δ/4` per coordinate (clamped to the square). Sites are drawn with
/// Floyd's algorithm and emitted in increasing lattice order.
fn jittered_lattice(n: usize, delta: f64, rng: &mut SplitMix64) -> Result<Vec<[f64; 2]>> {
    let side = steps(1.0, delta) + 1;
    let total = (side * side) as u64;
    if n as u64 > total {
        return Err(LabError::Infeasible(format!(
            "{n} sites requested but the 2δ-lattice at delta = {delta} has only {total}"
        )));
    }
    let mut chosen: HashSet<u64> = HashSet::with_capacity(n);
    for j in (total - n as u64)..total {
        let t = rng.below(j + 1);
        if !chosen.insert(t) {
            chosen.insert(j);
        }
    }
    let mut sites: Vec<u64> = chosen.into_iter().collect();
    sites.sort_unstable();
    Ok(sites
        .into_iter()
        .map(|s| {
            let (i, j) = ((s % side as u64) as f64, (s / side as u64) as f64);
            let x = (-1.0 + 2.0 * delta * i + rng.uniform(-delta / 4.0, delta / 4.0)).clamp(-1.0, 1.0);
            let y = (-1.0 + 2.0 * delta * j + rng.uniform(-delta / 4.0, delta / 4.0)).clamp(-1.0, 1.0);
            [x, y]
        })
        .collect())
}

/// Seeded random δ-separated points in `Q0` and δ-separated lines in the
/// parameter square. Lattice sites are `2δ` apart and jitter moves each by at
/// most `√2·δ/4`, so separation holds by construction.
pub fn gen_random(n_points: usize, n_lines: usize, delta: f64, seed: u64) -> Result<(PointSet, LineFamily)> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(LabError::InvalidParameter(format!("delta = {delta}")));
    }
    let root = SplitMix64::new(seed);
    let pts = jittered_lattice(n_points, delta, &mut root.fork(tag("points")))?;
    let lines = jittered_lattice(n_lines, delta, &mut root.fork(tag("lines")))?;
    Ok((
        PointSet::new(pts.into_iter().map(|[x, y]| Point2::new(x, y)).collect(), delta)?,
        LineFamily::new(lines.into_iter().map(|[a, b]| LineAB::new(a, b)).collect(), delta)?,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorKind {
    GridPacking,
    Tube,
    Rectangle,
    KStar,
    ConcurrentStar,
    Random,
}

impl GeneratorKind {
    pub fn name(&self) -> &'static str {
        match self {
            Self::GridPacking => "grid_packing",
            Self::Tube => "tube",
            Self::Rectangle => "rectangle",
            Self::KStar => "k_star",
            Self::ConcurrentStar => "concurrent_star",
            Self::Random => "random",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s.trim() {
            "grid_packing" => Self::GridPacking,
            "tube" => Self::Tube,
            "rectangle" => Self::Rectangle,
            "k_star" | "kstar" => Self::KStar,
            "concurrent_star" => Self::ConcurrentStar,
            "random" => Self::Random,
            other => return Err(LabError::Config(format!("unknown generator kind '{other}'"))),
        })
    }
}

/// Full description of one generated instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub kind: GeneratorKind,
    pub delta: f64,
    pub epsilon: f64,
    pub r: f64,
    pub s: f64,
    pub k: usize,
    pub m: usize,
    pub n_points: usize,
    pub n_lines: usize,
    pub seed: u64,
}

impl GeneratorSpec {
    pub fn new(kind: GeneratorKind, delta: f64) -> Self {
        Self {
            kind,
            delta,
            epsilon: delta,
            r: 1.0,
            s: 1.0,
            k: 2,
            m: 1,
            n_points: 0,
            n_lines: 0,
            seed: 0,
        }
    }
}

/// Metadata written next to every serialized point set or line family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorMetadata {
    pub generator: String,
    pub delta: f64,
    pub epsilon: f64,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub multiplier: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct Instance {
    pub points: PointSet,
    pub lines: LineFamily,
    pub metadata: GeneratorMetadata,
}

pub fn generate(spec: &GeneratorSpec) -> Result<Instance> {
    let mut notes = Vec::new();
    let (points, lines) = match spec.kind {
        GeneratorKind::GridPacking => (
            gen_grid_packing(spec.delta, Rect::SQUARE)?,
            LineFamily::empty(spec.epsilon),
        ),
        GeneratorKind::Tube => {
            notes.push("lines through the tube center, slopes j*delta, |j| <= delta^-1/2 / 2".into());
            gen_tube_example(spec.delta)?
        }
        GeneratorKind::Rectangle => gen_rectangle_family(spec.delta, spec.epsilon, spec.r, spec.s)?,
        GeneratorKind::KStar => {
            let ks = gen_kstar(spec.k, spec.m, spec.delta, spec.epsilon)?;
            notes.push(format!("slope_nudges={}", ks.slope_nudges));
            notes.push(format!("intercept_shifts={}", ks.intercept_shifts));
            (ks.centers, ks.lines)
        }
        GeneratorKind::ConcurrentStar => {
            let p = Point2::new(0.0, 0.0);
            let lines = crate::rich::greedy_concurrent_family(&p, spec.epsilon)?;
            (PointSet::new(vec![p], spec.delta)?, lines)
        }
        GeneratorKind::Random => gen_random(spec.n_points, spec.n_lines, spec.delta, spec.seed)?,
    };
    Ok(Instance {
        points,
        lines,
        metadata: GeneratorMetadata {
            generator: spec.kind.name().to_string(),
            delta: spec.delta,
            epsilon: spec.epsilon,
            seed: spec.seed,
            multiplier: None,
            notes,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::incidence::count_naive;
    use crate::planar::Scale;

    #[test]
    fn grid_packing_counts() {
        assert_eq!(gen_grid_packing(0.5, Rect::SQUARE).unwrap().len(), 25);
        assert_eq!(gen_grid_packing(1.0, Rect::SQUARE).unwrap().len(), 9);
        let small = gen_grid_packing(0.125, Rect::new(0.0, 0.25, 0.0, 0.125)).unwrap();
        assert_eq!(small.len(), 6);
        let full = gen_grid_packing(1.0 / 32.0, Rect::SQUARE).unwrap();
        assert_eq!(full.len(), 65 * 65);
        assert!(full.validate_separation().separated);
    }

    #[test]
    fn empty_region_gives_empty_set() {
        assert!(gen_grid_packing(0.1, Rect::new(0.5, 0.0, 0.0, 1.0)).unwrap().is_empty());
    }

    #[test]
    fn tube_example_sizes() {
        let delta = 1.0 / 256.0;
        let (p, l) = gen_tube_example(delta).unwrap();
        assert!((12..=20).contains(&p.len()), "|P| = {}", p.len());
        assert!((12..=20).contains(&l.len()), "|L| = {}", l.len());
        let rep = count_naive(&p, &l, &Scale::delta(delta).unwrap());
        assert_eq!(rep.count as usize, p.len() * l.len());
        let c = rep.count as f64 * delta;
        assert!((0.25..=4.0).contains(&c));
        assert!((0.05..=20.0).contains(&rep.normalized_ratio));
        assert!(gen_tube_example(0.1).is_err());
    }

    #[test]
    fn tube_count_at_fine_scale() {
        let delta = 1.0 / 1024.0;
        let (p, l) = gen_tube_example(delta).unwrap();
        let c = count_naive(&p, &l, &Scale::delta(delta).unwrap()).count as f64 * delta;
        assert!((0.25..=4.0).contains(&c), "c = {c}");
    }

    #[test]
    fn rectangle_validation_and_tube_limit() {
        assert!(gen_rectangle_example(0.1, 0.2, 0.5).is_err());
        let delta = 1.0 / 64.0;
        let (p, l) = gen_rectangle_example(delta, 1.0, delta).unwrap();
        assert_eq!(p.len(), 2 * 65);
        assert!(l.validate_separation().separated);
        // every line meets R
        for line in l.lines() {
            let (y0, y1) = (line.b, line.a + line.b);
            assert!(y0.max(y1) >= 0.0 && y0.min(y1) <= delta);
        }
    }

    #[test]
    fn kstar_planted_incidences() {
        let ks = gen_kstar(2, 1, 1.0 / 64.0, 1.0 / 64.0).unwrap();
        assert_eq!(ks.centers.len(), 1);
        assert_eq!(ks.lines.len(), 2);
        let s = Scale::delta(1.0 / 64.0).unwrap();
        assert_eq!(count_naive(&ks.centers, &ks.lines, &s).count, 2);

        let delta = 1.0 / 1024.0;
        let ks = gen_kstar(16, 8, delta, delta).unwrap();
        let rep = count_naive(&ks.centers, &ks.lines, &Scale::delta(delta).unwrap());
        assert!(rep.count >= 128);
        assert!(rep.richness.iter().all(|&r| r >= 16));
    }

    #[test]
    fn kstar_infeasible() {
        assert!(matches!(gen_kstar(1, 1, 0.01, 0.01), Err(LabError::Infeasible(_))));
        assert!(matches!(gen_kstar(64, 1, 0.01, 0.05), Err(LabError::Infeasible(_))));
        assert!(matches!(gen_kstar(16, 400, 0.01, 0.01), Err(LabError::Infeasible(_))));
    }

    #[test]
    fn random_is_deterministic_and_separated() {
        let (p0, l0) = gen_random(0, 0, 0.1, 3).unwrap();
        assert!(p0.is_empty() && l0.is_empty());
        let delta = 1.0 / 256.0;
        let (p1, l1) = gen_random(1000, 1000, delta, 11).unwrap();
        let (p2, l2) = gen_random(1000, 1000, delta, 11).unwrap();
        assert_eq!(p1, p2);
        assert_eq!(l1, l2);
        assert!(p1.validate_separation().separated);
        assert!(l1.validate_separation().separated);
        assert!(p1.points().iter().all(|p| p.in_square()));
        assert!(gen_random(10_000, 0, 0.1, 0).is_err());
    }

    #[test]
    fn generator_spec_dispatch() {
        let mut spec = GeneratorSpec::new(GeneratorKind::KStar, 1.0 / 256.0);
        spec.k = 4;
        spec.m = 4;
        let inst = generate(&spec).unwrap();
        assert_eq!(inst.points.len(), 4);
        assert_eq!(inst.lines.len(), 16);
        assert_eq!(inst.metadata.generator, "k_star");
    }
}
