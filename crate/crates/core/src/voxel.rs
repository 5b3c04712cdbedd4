//! Occupancy grids in `ℍ ≅ ℝ³` and in the vertical planes, shapes to
//! voxelize, and rasterized vertical projections.
//!
//! Voxel `(i, j, k)` is `[ih, (i+1)h) × [jh, (j+1)h) × [k h_t, (k+1) h_t)`.
//! Plane cell `(i, k)` is `[i h_u, (i+1) h_u) × [k h_t, (k+1) h_t)` in the
//! `(u, t)` coordinates of its plane. Indices are global, anchored at `0`.

use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::heisenberg::{dilate_unchecked, h_inv, h_mul, koranyi_norm, proj_x, proj_y, HPoint, Plane};

/// Axis-aligned box `[lo, hi]` in `ℝ³`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aabb {
    pub lo: [f64; 3],
    pub hi: [f64; 3],
}

impl Aabb {
    pub fn new(lo: [f64; 3], hi: [f64; 3]) -> Self {
        Self { lo, hi }
    }

    pub fn cube(half: f64) -> Self {
        Self::new([-half; 3], [half; 3])
    }

    pub fn is_empty(&self) -> bool {
        (0..3).any(|a| !(self.hi[a] >= self.lo[a]))
    }

    pub fn union(&self, o: &Aabb) -> Aabb {
        Aabb::new(
            [0, 1, 2].map(|a| self.lo[a].min(o.lo[a])),
            [0, 1, 2].map(|a| self.hi[a].max(o.hi[a])),
        )
    }

    pub fn intersect(&self, o: &Aabb) -> Aabb {
        Aabb::new(
            [0, 1, 2].map(|a| self.lo[a].max(o.lo[a])),
            [0, 1, 2].map(|a| self.hi[a].min(o.hi[a])),
        )
    }

    fn corners(&self) -> impl Iterator<Item = HPoint> + '_ {
        (0..8).map(move |c| {
            HPoint::new(
                if c & 1 == 0 { self.lo[0] } else { self.hi[0] },
                if c & 2 == 0 { self.lo[1] } else { self.hi[1] },
                if c & 4 == 0 { self.lo[2] } else { self.hi[2] },
            )
        })
    }

    /// Bounding box of the image under a map that is affine in each
    /// coordinate separately, so extremes are attained at corners.
    fn map_corners(&self, f: impl Fn(&HPoint) -> HPoint) -> Aabb {
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for c in self.corners() {
            let q = f(&c);
            for (a, v) in [q.x, q.y, q.t].into_iter().enumerate() {
                lo[a] = lo[a].min(v);
                hi[a] = hi[a].max(v);
            }
        }
        Aabb::new(lo, hi)
    }
}

/// Shapes in `ℍ`, membership tested pointwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Shape {
    /// Euclidean box `center + [-half, half]`.
    Box {
        center: HPoint,
        half: [f64; 3],
    },
    /// `{p : ‖center⁻¹·p‖ <= radius}` in the Korányi gauge.
    KoranyiBall {
        center: HPoint,
        radius: f64,
    },
    EuclideanBall {
        center: HPoint,
        radius: f64,
    },
    /// Closed Euclidean `radius`-neighborhood of the line `base + s·dir`. Unbounded.
    LineNeighborhood {
        base: HPoint,
        dir: [f64; 3],
        radius: f64,
    },
    Union(Vec<Shape>),
    Intersection(Vec<Shape>),
    Difference(Box<Shape>, Box<Shape>),
    /// `δ_λ(inner)`.
    Dilated {
        lam: f64,
        inner: Box<Shape>,
    },
    /// Left translate `by·inner`.
    Translated {
        by: HPoint,
        inner: Box<Shape>,
    },
}

impl Shape {
    /// The box `[-r, r]² × [-r², r²]`.
    pub fn heisenberg_box(r: f64) -> Shape {
        Shape::Box {
            center: HPoint::ORIGIN,
            half: [r, r, r * r],
        }
    }

    pub fn contains(&self, p: &HPoint) -> bool {
        match self {
            Shape::Box { center, half } => {
                (p.x - center.x).abs() <= half[0]
                    && (p.y - center.y).abs() <= half[1]
                    && (p.t - center.t).abs() <= half[2]
            }
            Shape::KoranyiBall { center, radius } => koranyi_norm(&h_mul(&h_inv(center), p)) <= *radius,
            Shape::EuclideanBall { center, radius } => p.euclid_dist(center) <= *radius,
            Shape::LineNeighborhood { base, dir, radius } => {
                let v = [p.x - base.x, p.y - base.y, p.t - base.t];
                let dd = dir[0] * dir[0] + dir[1] * dir[1] + dir[2] * dir[2];
                let s = (v[0] * dir[0] + v[1] * dir[1] + v[2] * dir[2]) / dd;
                let r2 = (0..3).map(|a| (v[a] - s * dir[a]).powi(2)).sum::<f64>();
                r2 <= radius * radius
            }
            Shape::Union(parts) => parts.iter().any(|s| s.contains(p)),
            Shape::Intersection(parts) => parts.iter().all(|s| s.contains(p)),
            Shape::Difference(a, b) => a.contains(p) && !b.contains(p),
            Shape::Dilated { lam, inner } => inner.contains(&dilate_unchecked(1.0 / lam, p)),
            Shape::Translated { by, inner } => inner.contains(&h_mul(&h_inv(by), p)),
        }
    }

    /// A box containing the shape, `None` if unbounded or empty.
    pub fn bbox(&self) -> Option<Aabb> {
        match self {
            Shape::Box { center, half } => {
                let b = Aabb::new(
                    [center.x - half[0], center.y - half[1], center.t - half[2]],
                    [center.x + half[0], center.y + half[1], center.t + half[2]],
                );
                (!b.is_empty()).then_some(b)
            }
            Shape::KoranyiBall { center, radius } => {
                if !(*radius >= 0.0) {
                    return None;
                }
                let r = *radius;
                let b = Aabb::new([-r, -r, -r * r / 4.0], [r, r, r * r / 4.0]);
                Some(b.map_corners(|q| h_mul(center, q)))
            }
            Shape::EuclideanBall { center, radius } => {
                if !(*radius >= 0.0) {
                    return None;
                }
                let r = *radius;
                Some(Aabb::new(
                    [center.x - r, center.y - r, center.t - r],
                    [center.x + r, center.y + r, center.t + r],
                ))
            }
            Shape::LineNeighborhood { .. } => None,
            Shape::Union(parts) => parts.iter().filter_map(|s| s.bbox()).reduce(|a, b| a.union(&b)),
            Shape::Intersection(parts) => {
                let b = parts.iter().filter_map(|s| s.bbox()).reduce(|a, b| a.intersect(&b))?;
                (!b.is_empty()).then_some(b)
            }
            Shape::Difference(a, _) => a.bbox(),
            Shape::Dilated { lam, inner } => {
                let b = inner.bbox()?;
                (*lam > 0.0).then(|| b.map_corners(|q| dilate_unchecked(*lam, q)))
            }
            Shape::Translated { by, inner } => Some(inner.bbox()?.map_corners(|q| h_mul(by, q))),
        }
    }

    pub fn dilated(self, lam: f64) -> Shape {
        Shape::Dilated {
            lam,
            inner: Box::new(self),
        }
    }

    pub fn translated(self, by: HPoint) -> Shape {
        Shape::Translated {
            by,
            inner: Box::new(self),
        }
    }
}

fn check_steps(h: f64, ht: f64) -> Result<()> {
    if !(h > 0.0 && h.is_finite() && ht > 0.0 && ht.is_finite()) {
        return Err(LabError::InvalidParameter(format!(
            "voxel sides must be positive (h = {h}, ht = {ht})"
        )));
    }
    Ok(())
}

/// Dense occupancy grid over an integer index box.
#[derive(Debug, Clone, PartialEq)]
pub struct VoxelSet {
    h: f64,
    ht: f64,
    lo: [i64; 3],
    dims: [usize; 3],
    occ: Vec<bool>,
}

impl VoxelSet {
    pub fn empty(h: f64, ht: f64) -> Self {
        Self {
            h,
            ht,
            lo: [0; 3],
            dims: [0; 3],
            occ: Vec::new(),
        }
    }

    /// All-unoccupied grid over `lo .. lo + dims`.
    pub fn with_bounds(h: f64, ht: f64, lo: [i64; 3], dims: [usize; 3]) -> Result<Self> {
        check_steps(h, ht)?;
        Ok(Self {
            h,
            ht,
            lo,
            dims,
            occ: vec![false; dims[0] * dims[1] * dims[2]],
        })
    }

    /// The smallest grid holding the given voxels.
    pub fn from_voxels(h: f64, ht: f64, voxels: &[[i64; 3]]) -> Result<Self> {
        check_steps(h, ht)?;
        if voxels.is_empty() {
            return Ok(Self::empty(h, ht));
        }
        let mut lo = [i64::MAX; 3];
        let mut hi = [i64::MIN; 3];
        for v in voxels {
            for a in 0..3 {
                lo[a] = lo[a].min(v[a]);
                hi[a] = hi[a].max(v[a]);
            }
        }
        let dims = [0, 1, 2].map(|a| (hi[a] - lo[a] + 1) as usize);
        let mut out = Self::with_bounds(h, ht, lo, dims)?;
        for v in voxels {
            out.insert(*v);
        }
        Ok(out)
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn ht(&self) -> f64 {
        self.ht
    }

    pub fn lo(&self) -> [i64; 3] {
        self.lo
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    #[inline]
    fn linear(&self, v: [i64; 3]) -> Option<usize> {
        let mut idx = 0usize;
        for a in (0..3).rev() {
            let r = v[a] - self.lo[a];
            if r < 0 || r as usize >= self.dims[a] {
                return None;
            }
            idx = idx * self.dims[a] + r as usize;
        }
        Some(idx)
    }

    #[inline]
    fn unlinear(&self, idx: usize) -> [i64; 3] {
        let i = idx % self.dims[0];
        let j = (idx / self.dims[0]) % self.dims[1];
        let k = idx / (self.dims[0] * self.dims[1]);
        [self.lo[0] + i as i64, self.lo[1] + j as i64, self.lo[2] + k as i64]
    }

    pub fn contains(&self, v: [i64; 3]) -> bool {
        self.linear(v).is_some_and(|i| self.occ[i])
    }

    /// Marks `v` occupied; panics if `v` is outside the bounds.
    pub fn insert(&mut self, v: [i64; 3]) {
        let i = self.linear(v).expect("voxel outside bounds");
        self.occ[i] = true;
    }

    pub fn count(&self) -> usize {
        self.occ.par_iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.occ.iter().any(|&b| b)
    }

    pub fn volume(&self) -> f64 {
        self.count() as f64 * self.h * self.h * self.ht
    }

    /// Occupied voxels in storage order (`i` fastest, then `j`, then `k`).
    pub fn voxels(&self) -> Vec<[i64; 3]> {
        self.occ
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| self.unlinear(i))
            .collect()
    }

    pub fn center(&self, v: [i64; 3]) -> HPoint {
        HPoint::new(
            (v[0] as f64 + 0.5) * self.h,
            (v[1] as f64 + 0.5) * self.h,
            (v[2] as f64 + 0.5) * self.ht,
        )
    }

    /// `K ⊆ other` as sets of voxels (grid steps must agree).
    pub fn is_subset_of(&self, other: &VoxelSet) -> bool {
        self.h == other.h && self.ht == other.ht && self.voxels().iter().all(|v| other.contains(*v))
    }
}

/// Occupancy grid in a vertical plane, `(u, t)` coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct PlaneRegion {
    plane: Plane,
    hu: f64,
    ht: f64,
    lo: [i64; 2],
    dims: [usize; 2],
    occ: Vec<bool>,
}

impl PlaneRegion {
    pub fn with_bounds(plane: Plane, hu: f64, ht: f64, lo: [i64; 2], dims: [usize; 2]) -> Result<Self> {
        check_steps(hu, ht)?;
        Ok(Self {
            plane,
            hu,
            ht,
            lo,
            dims,
            occ: vec![false; dims[0] * dims[1]],
        })
    }

    pub fn plane(&self) -> Plane {
        self.plane
    }

    pub fn hu(&self) -> f64 {
        self.hu
    }

    pub fn ht(&self) -> f64 {
        self.ht
    }

    pub fn lo(&self) -> [i64; 2] {
        self.lo
    }

    pub fn dims(&self) -> [usize; 2] {
        self.dims
    }

    #[inline]
    fn linear(&self, c: [i64; 2]) -> Option<usize> {
        let (ri, rk) = (c[0] - self.lo[0], c[1] - self.lo[1]);
        if ri < 0 || rk < 0 || ri as usize >= self.dims[0] || rk as usize >= self.dims[1] {
            return None;
        }
        Some(rk as usize * self.dims[0] + ri as usize)
    }

    pub fn contains(&self, c: [i64; 2]) -> bool {
        self.linear(c).is_some_and(|i| self.occ[i])
    }

    pub fn insert(&mut self, c: [i64; 2]) {
        let i = self.linear(c).expect("cell outside bounds");
        self.occ[i] = true;
    }

    pub fn count(&self) -> usize {
        self.occ.iter().filter(|&&b| b).count()
    }

    pub fn area(&self) -> f64 {
        self.count() as f64 * self.hu * self.ht
    }

    /// Occupied cells, `u` fastest.
    pub fn cells(&self) -> Vec<[i64; 2]> {
        self.occ
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| {
                [
                    self.lo[0] + (i % self.dims[0]) as i64,
                    self.lo[1] + (i / self.dims[0]) as i64,
                ]
            })
            .collect()
    }

    pub fn cell_center(&self, c: [i64; 2]) -> (f64, f64) {
        ((c[0] as f64 + 0.5) * self.hu, (c[1] as f64 + 0.5) * self.ht)
    }

    /// Cells within one step (3×3 stencil) of an occupied cell.
    pub fn inflated(&self) -> PlaneRegion {
        let lo = [self.lo[0] - 1, self.lo[1] - 1];
        let dims = [self.dims[0] + 2, self.dims[1] + 2];
        let mut out = PlaneRegion {
            occ: vec![false; dims[0] * dims[1]],
            lo,
            dims,
            ..self.clone()
        };
        for c in self.cells() {
            for dk in -1..=1 {
                for di in -1..=1 {
                    out.insert([c[0] + di, c[1] + dk]);
                }
            }
        }
        out
    }
}

/// Center-rule voxelization: a voxel is occupied iff its center lies in
/// `shape`. Unbounded or empty shapes give an empty set.
pub fn voxelize(shape: &Shape, h: f64) -> Result<VoxelSet> {
    voxelize_aniso(shape, h, h)
}

pub fn voxelize_aniso(shape: &Shape, h: f64, ht: f64) -> Result<VoxelSet> {
    check_steps(h, ht)?;
    match shape.bbox() {
        Some(b) => voxelize_in(shape, h, ht, &b),
        None => Ok(VoxelSet::empty(h, ht)),
    }
}

/// Center-rule voxelization restricted to the voxels whose centers lie in `window`.
pub fn voxelize_in(shape: &Shape, h: f64, ht: f64, window: &Aabb) -> Result<VoxelSet> {
    check_steps(h, ht)?;
    if window.is_empty() {
        return Ok(VoxelSet::empty(h, ht));
    }
    let steps = [h, h, ht];
    // voxels whose centers lie in the window
    let lo: [i64; 3] = [0, 1, 2].map(|a| (window.lo[a] / steps[a] - 0.5).ceil() as i64);
    let hi: [i64; 3] = [0, 1, 2].map(|a| (window.hi[a] / steps[a] - 0.5).floor() as i64);
    if (0..3).any(|a| hi[a] < lo[a]) {
        return Ok(VoxelSet::empty(h, ht));
    }
    let dims = [0, 1, 2].map(|a| (hi[a] - lo[a] + 1) as usize);
    let mut out = VoxelSet::with_bounds(h, ht, lo, dims)?;
    let slab = dims[0] * dims[1];
    out.occ.par_chunks_mut(slab).enumerate().for_each(|(k, chunk)| {
        let t = (lo[2] + k as i64) as f64 * ht + 0.5 * ht;
        for j in 0..dims[1] {
            let y = (lo[1] + j as i64) as f64 * h + 0.5 * h;
            for i in 0..dims[0] {
                let x = (lo[0] + i as i64) as f64 * h + 0.5 * h;
                chunk[j * dims[0] + i] = shape.contains(&HPoint::new(x, y, t));
            }
        }
    });
    Ok(out)
}

/// `δ_λ` on a grid: indices unchanged, `h → λh`, `h_t → λ²h_t`.
pub fn dilate_voxels(k: &VoxelSet, lam: f64) -> Result<VoxelSet> {
    if !(lam > 0.0 && lam.is_finite()) {
        return Err(LabError::InvalidParameter(format!(
            "dilation factor {lam} must be positive"
        )));
    }
    Ok(VoxelSet {
        h: k.h * lam,
        ht: k.ht * lam * lam,
        ..k.clone()
    })
}

/// Plane cell bounds covering the projection of every voxel of `k`'s index box.
fn projection_bounds(k: &VoxelSet, plane: Plane) -> ([i64; 2], [usize; 2]) {
    let b = Aabb::new(
        [k.lo[0] as f64 * k.h, k.lo[1] as f64 * k.h, k.lo[2] as f64 * k.ht],
        [
            (k.lo[0] + k.dims[0] as i64) as f64 * k.h,
            (k.lo[1] + k.dims[1] as i64) as f64 * k.h,
            (k.lo[2] + k.dims[2] as i64) as f64 * k.ht,
        ],
    );
    let (u_lo, u_dim) = match plane {
        Plane::Wx => (k.lo[0], k.dims[0]),
        Plane::Wy => (k.lo[1], k.dims[1]),
    };
    let (mut tmin, mut tmax) = (f64::INFINITY, f64::NEG_INFINITY);
    for c in b.corners() {
        let w = match plane {
            Plane::Wx => proj_x(&c),
            Plane::Wy => proj_y(&c),
        };
        tmin = tmin.min(w.t);
        tmax = tmax.max(w.t);
    }
    let t_lo = (tmin / k.ht).floor() as i64 - 1;
    let t_hi = (tmax / k.ht).floor() as i64 + 1;
    ([u_lo, t_lo], [u_dim, (t_hi - t_lo + 1) as usize])
}

/// Rasterized vertical projection: each occupied voxel contributes the plane
/// cells hit by the images of an `s × s × s` lattice of interior points.
/// Plane cells have sides `(h, h_t)`.
pub fn project_voxels(k: &VoxelSet, plane: Plane, s: usize) -> Result<PlaneRegion> {
    let (lo, dims) = projection_bounds(k, plane);
    project_voxels_into(k, plane, s, lo, dims)
}

/// [`project_voxels`] onto a caller-chosen plane grid window.
pub fn project_voxels_into(
    k: &VoxelSet,
    plane: Plane,
    s: usize,
    lo: [i64; 2],
    dims: [usize; 2],
) -> Result<PlaneRegion> {
    if s == 0 {
        return Err(LabError::InvalidParameter("oversampling must be at least 1".into()));
    }
    let mut region = PlaneRegion::with_bounds(plane, k.h, k.ht, lo, dims)?;
    if k.dims.contains(&0) {
        return Ok(region);
    }
    let offs: Vec<f64> = (0..s).map(|a| (a as f64 + 0.5) / s as f64).collect();
    let slab = k.dims[0] * k.dims[1];
    let n_cells = dims[0] * dims[1];
    let merged = k
        .occ
        .par_chunks(slab)
        .enumerate()
        .fold(
            || vec![false; n_cells],
            |mut acc, (kk, chunk)| {
                let k_idx = k.lo[2] + kk as i64;
                for (local, _) in chunk.iter().enumerate().filter(|(_, &b)| b) {
                    let i = k.lo[0] + (local % k.dims[0]) as i64;
                    let j = k.lo[1] + (local / k.dims[0]) as i64;
                    for &ox in &offs {
                        let x = (i as f64 + ox) * k.h;
                        for &oy in &offs {
                            let y = (j as f64 + oy) * k.h;
                            for &ot in &offs {
                                let t = (k_idx as f64 + ot) * k.ht;
                                let (u, tau) = match plane {
                                    Plane::Wx => (x, t - 0.5 * x * y),
                                    Plane::Wy => (y, t + 0.5 * x * y),
                                };
                                let ci = (u / k.h).floor() as i64 - lo[0];
                                let ck = (tau / k.ht).floor() as i64 - lo[1];
                                if ci >= 0 && ck >= 0 && (ci as usize) < dims[0] && (ck as usize) < dims[1] {
                                    acc[ck as usize * dims[0] + ci as usize] = true;
                                }
                            }
                        }
                    }
                }
                acc
            },
        )
        .reduce(
            || vec![false; n_cells],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x |= y);
                a
            },
        );
    region.occ = merged;
    Ok(region)
}

const VOXEL_MAGIC: &[u8; 8] = b"HVOXRLE1";
const PLANE_MAGIC: &[u8; 8] = b"HPLNRLE1";

/// Maximal runs `(start, len)` of `true` in `occ`.
fn runs(occ: &[bool]) -> Vec<(u64, u64)> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < occ.len() {
        if occ[i] {
            let start = i;
            while i < occ.len() && occ[i] {
                i += 1;
            }
            out.push((start as u64, (i - start) as u64));
        } else {
            i += 1;
        }
    }
    out
}

fn read_u64(r: &mut impl Read) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn read_f64(r: &mut impl Read) -> Result<f64> {
    Ok(f64::from_bits(read_u64(r)?))
}

fn read_spans(r: &mut impl Read, occ: &mut [bool]) -> Result<()> {
    let n = read_u64(r)?;
    for _ in 0..n {
        let start = read_u64(r)? as usize;
        let len = read_u64(r)? as usize;
        let end = start.checked_add(len).filter(|&e| e <= occ.len());
        let Some(end) = end else {
            return Err(LabError::Format(format!(
                "span {start}+{len} exceeds {} cells",
                occ.len()
            )));
        };
        occ[start..end].iter_mut().for_each(|b| *b = true);
    }
    Ok(())
}

fn write_spans(w: &mut impl Write, occ: &[bool]) -> Result<()> {
    let spans = runs(occ);
    w.write_all(&(spans.len() as u64).to_le_bytes())?;
    for (s, l) in spans {
        w.write_all(&s.to_le_bytes())?;
        w.write_all(&l.to_le_bytes())?;
    }
    Ok(())
}

impl VoxelSet {
    /// Binary layout, little-endian: magic `HVOXRLE1`, `h: f64`, `h_t: f64`,
    /// `lo: [i64; 3]`, `dims: [u64; 3]`, span count `u64`, then `(start, len)`
    /// pairs of `u64` over the linear index `i + dims0·(j + dims1·k)`.
    pub fn write_rle(&self, w: &mut impl Write) -> Result<()> {
        w.write_all(VOXEL_MAGIC)?;
        w.write_all(&self.h.to_le_bytes())?;
        w.write_all(&self.ht.to_le_bytes())?;
        for v in self.lo {
            w.write_all(&v.to_le_bytes())?;
        }
        for d in self.dims {
            w.write_all(&(d as u64).to_le_bytes())?;
        }
        write_spans(w, &self.occ)
    }

    pub fn read_rle(r: &mut impl Read) -> Result<Self> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != VOXEL_MAGIC {
            return Err(LabError::Format("not a voxel RLE stream".into()));
        }
        let h = read_f64(r)?;
        let ht = read_f64(r)?;
        let mut lo = [0i64; 3];
        for v in lo.iter_mut() {
            *v = read_u64(r)? as i64;
        }
        let mut dims = [0usize; 3];
        for d in dims.iter_mut() {
            *d = read_u64(r)? as usize;
        }
        let mut out = VoxelSet::with_bounds(h, ht, lo, dims)?;
        read_spans(r, &mut out.occ)?;
        Ok(out)
    }

    /// CSV with header `i,j,k`, one occupied voxel per row.
    pub fn write_csv(&self, w: impl Write) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["i", "j", "k"])?;
        for v in self.voxels() {
            wr.serialize(v)?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn read_csv(r: impl Read, h: f64, ht: f64) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(r);
        let voxels = rd
            .deserialize::<[i64; 3]>()
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Self::from_voxels(h, ht, &voxels)
    }
}

impl PlaneRegion {
    /// Binary layout, little-endian: magic `HPLNRLE1`, plane byte (`0` for
    /// `𝕎_x`, `1` for `𝕎_y`), `h_u: f64`, `h_t: f64`, `lo: [i64; 2]`,
    /// `dims: [u64; 2]`, then spans as for voxel sets.
    pub fn write_rle(&self, w: &mut impl Write) -> Result<()> {
        w.write_all(PLANE_MAGIC)?;
        w.write_all(&[match self.plane {
            Plane::Wx => 0u8,
            Plane::Wy => 1u8,
        }])?;
        w.write_all(&self.hu.to_le_bytes())?;
        w.write_all(&self.ht.to_le_bytes())?;
        for v in self.lo {
            w.write_all(&v.to_le_bytes())?;
        }
        for d in self.dims {
            w.write_all(&(d as u64).to_le_bytes())?;
        }
        write_spans(w, &self.occ)
    }

    pub fn read_rle(r: &mut impl Read) -> Result<Self> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != PLANE_MAGIC {
            return Err(LabError::Format("not a plane RLE stream".into()));
        }
        let mut pb = [0u8; 1];
        r.read_exact(&mut pb)?;
        let plane = match pb[0] {
            0 => Plane::Wx,
            1 => Plane::Wy,
            b => return Err(LabError::Format(format!("bad plane tag {b}"))),
        };
        let hu = read_f64(r)?;
        let ht = read_f64(r)?;
        let lo = [read_u64(r)? as i64, read_u64(r)? as i64];
        let dims = [read_u64(r)? as usize, read_u64(r)? as usize];
        let mut out = PlaneRegion::with_bounds(plane, hu, ht, lo, dims)?;
        read_spans(r, &mut out.occ)?;
        Ok(out)
    }

    /// CSV with header `i,k`, one occupied cell per row.
    pub fn write_csv(&self, w: impl Write) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["i", "k"])?;
        for c in self.cells() {
            wr.serialize(c)?;
        }
        wr.flush()?;
        Ok(())
    }
}
