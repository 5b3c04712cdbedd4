//! Measure-level quantities on voxel sets: Loomis-Whitney ratios, tube
//! intersections, discrete boundaries, a covering surrogate for the
//! Korányi 3-dimensional Hausdorff measure and the weak isoperimetric ratio.

use crate::error::{LabError, Result};
use crate::heisenberg::{koranyi_dist, HPoint, Plane, VerticalPlanePoint};
use crate::planar::Scale;
use crate::rng::SplitMix64;
use crate::voxel::{project_voxels, project_voxels_into, voxelize_in, Aabb, PlaneRegion, Shape, VoxelSet};

/// Default projection oversampling.
pub const DEFAULT_OVERSAMPLE: usize = 2;

/// `8 r⁴ / (5 r³)^{4/3}`: the Loomis-Whitney ratio of `[-r, r]² × [-r², r²]`.
pub fn box_lw_ratio() -> f64 {
    8.0 * 5f64.powf(-4.0 / 3.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LwMeasurement {
    pub volume: f64,
    pub area_x: f64,
    pub area_y: f64,
    pub ratio: f64,
}

/// `|K| / (|π_x K|^{2/3} |π_y K|^{2/3})`.
pub fn lw_ratio(k: &VoxelSet) -> Result<f64> {
    Ok(lw_measure(k, DEFAULT_OVERSAMPLE)?.ratio)
}

pub fn lw_measure(k: &VoxelSet, s: usize) -> Result<LwMeasurement> {
    let volume = k.volume();
    let area_x = project_voxels(k, Plane::Wx, s)?.area();
    let area_y = project_voxels(k, Plane::Wy, s)?.area();
    if area_x == 0.0 || area_y == 0.0 {
        return Err(LabError::Empty("Loomis-Whitney ratio of an empty set".into()));
    }
    Ok(LwMeasurement {
        volume,
        area_x,
        area_y,
        ratio: volume / (area_x.powf(2.0 / 3.0) * area_y.powf(2.0 / 3.0)),
    })
}

/// Closest points `(p1, p2)` of the lines `b1 + s d1` and `b2 + s d2`.
fn closest_points(b1: [f64; 3], d1: [f64; 3], b2: [f64; 3], d2: [f64; 3]) -> ([f64; 3], [f64; 3]) {
    let dot = |u: [f64; 3], v: [f64; 3]| u[0] * v[0] + u[1] * v[1] + u[2] * v[2];
    let r = [b1[0] - b2[0], b1[1] - b2[1], b1[2] - b2[2]];
    let (a, b, c) = (dot(d1, d1), dot(d1, d2), dot(d2, d2));
    let (d, e) = (dot(d1, r), dot(d2, r));
    let den = a * c - b * b;
    let (s, t) = if den.abs() < 1e-300 {
        (0.0, e / c)
    } else {
        ((b * e - c * d) / den, (a * e - b * d) / den)
    };
    let at = |p: [f64; 3], q: [f64; 3], k: f64| [p[0] + k * q[0], p[1] + k * q[1], p[2] + k * q[2]];
    (at(b1, d1, s), at(b2, d2, t))
}

/// `|T_x ∩ T_y ∩ [-1,1]³|` for `T_x = [w_x·𝕃_y](A₁δ)` and `T_y = [w_y·𝕃_x](A₁δ)`,
/// voxelized at `h = δ/4` in a window around the closest approach of the
/// two fibers.
pub fn tube_intersection_volume(w_x: &VerticalPlanePoint, w_y: &VerticalPlanePoint, s: &Scale, a1: f64) -> Result<f64> {
    if w_x.plane != Plane::Wx || w_y.plane != Plane::Wy {
        return Err(LabError::InvalidParameter("expected w_x in W_x and w_y in W_y".into()));
    }
    let radius = a1 * s.delta;
    let (bx, dx) = (w_x.embed(), [0.0, 1.0, 0.5 * w_x.u]);
    let (by, dy) = (w_y.embed(), [1.0, 0.0, -0.5 * w_y.u]);
    let (p1, p2) = closest_points([bx.x, bx.y, bx.t], dx, [by.x, by.y, by.t], dy);
    let gap = ((p1[0] - p2[0]).powi(2) + (p1[1] - p2[1]).powi(2) + (p1[2] - p2[2]).powi(2)).sqrt();
    if gap > 2.0 * radius {
        return Ok(0.0);
    }
    let norm = |d: [f64; 3]| (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
    let cos = (dx[0] * dy[0] + dx[1] * dy[1] + dx[2] * dy[2]).abs() / (norm(dx) * norm(dy));
    let sin = (1.0 - cos * cos).max(1e-12).sqrt();
    // a point within `radius` of both lines lies within `2 radius / sin + radius` of p1
    let reach = radius * (1.0 + 2.0 / sin) + s.delta;
    let mid = [0, 1, 2].map(|a| 0.5 * (p1[a] + p2[a]));
    let window = Aabb::new(mid.map(|m| m - reach), mid.map(|m| m + reach)).intersect(&Aabb::cube(1.0));
    let shape = Shape::Intersection(vec![
        Shape::LineNeighborhood {
            base: bx,
            dir: dx,
            radius,
        },
        Shape::LineNeighborhood {
            base: by,
            dir: dy,
            radius,
        },
    ]);
    let h = s.delta / 4.0;
    Ok(voxelize_in(&shape, h, h, &window)?.volume())
}

/// Occupied voxels with at least one unoccupied 6-neighbor (voxels outside
/// the grid count as unoccupied).
pub fn boundary(e: &VoxelSet) -> VoxelSet {
    let mut out = VoxelSet::with_bounds(e.h(), e.ht(), e.lo(), e.dims()).expect("valid steps");
    const NB: [[i64; 3]; 6] = [[1, 0, 0], [-1, 0, 0], [0, 1, 0], [0, -1, 0], [0, 0, 1], [0, 0, -1]];
    for v in e.voxels() {
        if NB.iter().any(|d| !e.contains([v[0] + d[0], v[1] + d[1], v[2] + d[2]])) {
            out.insert(v);
        }
    }
    out
}

/// Covering radius used by [`h3_surrogate`]: the smallest `ρ >= h` whose
/// Korányi ball spans a full `h_t` layer at its center (`ρ²/4 >= h_t`).
pub fn cover_radius(h: f64, ht: f64) -> f64 {
    h.max(2.0 * ht.sqrt())
}

/// Greedy cover of the voxel centers of `b` by Korányi balls of radius
/// `ρ = cover_radius(h, h_t)`, scanned in storage order; returns
/// `(number of balls) · ρ³`.
pub fn h3_surrogate(b: &VoxelSet) -> f64 {
    let rho = cover_radius(b.h(), b.ht());
    h3_cover_count(b, rho) as f64 * rho.powi(3)
}

pub fn h3_cover_count(b: &VoxelSet, rho: f64) -> usize {
    let voxels = b.voxels();
    if voxels.is_empty() {
        return 0;
    }
    let (lo, dims) = (b.lo(), b.dims());
    let lin = |v: [i64; 3]| -> Option<usize> {
        let r = [0, 1, 2].map(|a| v[a] - lo[a]);
        if (0..3).any(|a| r[a] < 0 || r[a] as usize >= dims[a]) {
            return None;
        }
        Some(r[0] as usize + dims[0] * (r[1] as usize + dims[1] * r[2] as usize))
    };
    let mut covered = vec![false; dims[0] * dims[1] * dims[2]];
    let rx = (rho / b.h()).ceil() as i64 + 1;
    let mut balls = 0;
    for &v in &voxels {
        let i0 = lin(v).expect("voxel in bounds");
        if covered[i0] {
            continue;
        }
        balls += 1;
        let c = b.center(v);
        // t-extent of the left-translated ball c·B(0, ρ)
        let reach_t = rho * rho / 4.0 + 0.5 * rho * (c.x.abs() + c.y.abs());
        let rt = (reach_t / b.ht()).ceil() as i64 + 1;
        for dk in -rt..=rt {
            for dj in -rx..=rx {
                for di in -rx..=rx {
                    let w = [v[0] + di, v[1] + dj, v[2] + dk];
                    let Some(iw) = lin(w) else { continue };
                    if covered[iw] || !b.contains(w) {
                        continue;
                    }
                    if koranyi_dist(&b.center(w), &c) <= rho {
                        covered[iw] = true;
                    }
                }
            }
        }
    }
    balls
}

#[derive(Debug, Clone, PartialEq)]
pub struct InclusionReport {
    pub holds: bool,
    /// Cells of `π(E)` not covered by the one-cell inflation of `π(∂E)`.
    pub missing: Vec<[i64; 2]>,
    pub projected_cells: usize,
}

/// Checks `π(E) ⊆ π(∂E)` at cell resolution, with `π(∂E)` inflated by one
/// plane cell.
pub fn boundary_projection_inclusion(e: &VoxelSet, plane: Plane, s: usize) -> Result<InclusionReport> {
    let full = project_voxels(e, plane, s)?;
    let edge = project_voxels_into(&boundary(e), plane, s, full.lo(), full.dims())?.inflated();
    let missing: Vec<[i64; 2]> = full.cells().into_iter().filter(|c| !edge.contains(*c)).collect();
    Ok(InclusionReport {
        holds: missing.is_empty(),
        missing,
        projected_cells: full.count(),
    })
}

/// `|E|^{3/4} / h3_surrogate(∂E)`.
pub fn weak_isoperimetric_ratio(e: &VoxelSet) -> Result<f64> {
    if e.is_empty() {
        return Err(LabError::Empty("isoperimetric ratio of an empty set".into()));
    }
    Ok(e.volume().powf(0.75) / h3_surrogate(&boundary(e)))
}

/// Closed-form `|π_x K| = |π_y K|` for `K = [-r, r]² × [-r², r²]`.
pub fn box_projection_area(r: f64) -> f64 {
    5.0 * r * r * r
}

/// Convenience: both projections of `k`.
pub fn projections(k: &VoxelSet, s: usize) -> Result<(PlaneRegion, PlaneRegion)> {
    Ok((project_voxels(k, Plane::Wx, s)?, project_voxels(k, Plane::Wy, s)?))
}

/// The center of a voxel as a point, re-exported for experiment code.
pub fn voxel_center(k: &VoxelSet, v: [i64; 3]) -> HPoint {
    k.center(v)
}

/// Named shapes for the Loomis-Whitney and isoperimetric sweeps.
pub fn shape_zoo() -> Vec<(&'static str, Shape)> {
    let ball = |x: f64, y: f64, t: f64, radius: f64| Shape::KoranyiBall {
        center: HPoint::new(x, y, t),
        radius,
    };
    let cuboid = |c: [f64; 3], half: [f64; 3]| Shape::Box {
        center: HPoint::new(c[0], c[1], c[2]),
        half,
    };
    vec![
        ("box", Shape::heisenberg_box(0.5)),
        ("koranyi_ball", ball(0.0, 0.0, 0.0, 0.6)),
        (
            "euclidean_ball",
            Shape::EuclideanBall {
                center: HPoint::ORIGIN,
                radius: 0.4,
            },
        ),
        (
            "translated_ball",
            ball(0.0, 0.0, 0.0, 0.4).translated(HPoint::new(0.2, -0.1, 0.05)),
        ),
        (
            "shell",
            Shape::Difference(
                Box::new(Shape::heisenberg_box(0.5)),
                Box::new(Shape::heisenberg_box(0.3)),
            ),
        ),
        (
            "box_union",
            Shape::Union(vec![
                cuboid([-0.2, 0.0, 0.0], [0.2, 0.3, 0.05]),
                cuboid([0.15, 0.1, 0.05], [0.25, 0.15, 0.1]),
                cuboid([0.0, -0.25, -0.05], [0.3, 0.1, 0.04]),
            ]),
        ),
    ]
}

/// Resolves `all`, zoo names and `box:r` / `koranyi_ball:r` entries.
pub fn select_shapes(names: &[String]) -> Result<Vec<(String, Shape)>> {
    let zoo = shape_zoo();
    let mut out = Vec::new();
    for name in names {
        if name == "all" {
            out.extend(zoo.iter().map(|(n, s)| (n.to_string(), s.clone())));
        } else if let Some((kind, r)) = name.split_once(':') {
            let r = r
                .trim()
                .parse::<f64>()
                .ok()
                .filter(|r| r.is_finite() && *r > 0.0)
                .ok_or_else(|| LabError::Config(format!("bad radius in '{name}'")))?;
            let shape = match kind.trim() {
                "box" => Shape::heisenberg_box(r),
                "koranyi_ball" => Shape::KoranyiBall {
                    center: HPoint::ORIGIN,
                    radius: r,
                },
                other => return Err(LabError::Config(format!("unknown shape kind '{other}'"))),
            };
            out.push((name.clone(), shape));
        } else {
            let (n, s) = zoo
                .iter()
                .find(|(n, _)| n == name)
                .ok_or_else(|| LabError::Config(format!("unknown shape '{name}'")))?;
            out.push((n.to_string(), s.clone()));
        }
    }
    Ok(out)
}

/// Union of `1..=n_max` random axis-parallel boxes inside `[-0.7, 0.7]² × [-0.3, 0.3]`.
pub fn random_box_union(rng: &mut SplitMix64, n_max: u64) -> Shape {
    let n = 1 + rng.below(n_max);
    Shape::Union(
        (0..n)
            .map(|_| {
                let half = [rng.uniform(0.04, 0.2), rng.uniform(0.04, 0.2), rng.uniform(0.01, 0.08)];
                let center = HPoint::new(rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5), rng.uniform(-0.2, 0.2));
                Shape::Box { center, half }
            })
            .collect(),
    )
}
