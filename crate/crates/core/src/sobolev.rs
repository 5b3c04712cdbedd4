//! Discrete horizontal calculus on uniform grids: the left-invariant fields
//! `X = ∂x - (y/2)∂t` and `Y = ∂y + (x/2)∂t`, `L^p` norms, dyadic level sets,
//! the level-set projection inequality and the Gagliardo-Nirenberg-Sobolev
//! ratio.
//!
//! Cell `(i, j, k)` of a grid function has center `((i+½)h, (j+½)h, (k+½)h)`
//! with global indices, so level sets are voxel sets on the same lattice.

use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::heisenberg::{HPoint, Plane};
use crate::voxel::{project_voxels, Aabb, VoxelSet};

/// Slack on the level-set inequality absorbing discretization error.
pub const LEVELSET_SLACK: f64 = 1.25;

/// Zero layers required around the support (fields grow support by one cell).
pub const MARGIN: usize = 2;

/// Summation chunk; fixed so parallel reductions are bitwise reproducible.
const CHUNK: usize = 4096;

#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    h: f64,
    offset: [i64; 3],
    dims: [usize; 3],
    values: Vec<f64>,
}

impl GridFunction {
    /// Validated constructor: finite values, zero on the outer layer.
    pub fn new(h: f64, offset: [i64; 3], dims: [usize; 3], values: Vec<f64>) -> Result<Self> {
        let f = Self::raw(h, offset, dims, values)?;
        if f.margin() < 1 {
            return Err(LabError::SupportTouchesBoundary(
                "grid function must vanish on the outer layer of its box".into(),
            ));
        }
        Ok(f)
    }

    pub(crate) fn raw(h: f64, offset: [i64; 3], dims: [usize; 3], values: Vec<f64>) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(LabError::InvalidParameter(format!("grid step h = {h}")));
        }
        if values.len() != dims[0] * dims[1] * dims[2] {
            return Err(LabError::InvalidParameter(format!(
                "{} values for dims {dims:?}",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(LabError::InvalidParameter("non-finite grid value".into()));
        }
        Ok(Self {
            h,
            offset,
            dims,
            values,
        })
    }

    /// Samples `f` at the cell centers of the smallest grid holding `window`
    /// plus [`MARGIN`] extra layers on each side. Fails if `f` does not
    /// vanish on those layers.
    pub fn sample(h: f64, window: &Aabb, f: impl Fn(&HPoint) -> f64 + Sync) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) || window.is_empty() {
            return Err(LabError::InvalidParameter(format!("bad sampling window or h = {h}")));
        }
        let m = MARGIN as i64;
        let lo: [i64; 3] = [0, 1, 2].map(|a| (window.lo[a] / h).floor() as i64 - m);
        let hi: [i64; 3] = [0, 1, 2].map(|a| (window.hi[a] / h).floor() as i64 + m);
        let dims = [0, 1, 2].map(|a| (hi[a] - lo[a] + 1) as usize);
        let slab = dims[0] * dims[1];
        let mut values = vec![0.0; slab * dims[2]];
        values.par_chunks_mut(slab).enumerate().for_each(|(k, chunk)| {
            let t = (lo[2] + k as i64) as f64 * h + 0.5 * h;
            for j in 0..dims[1] {
                let y = (lo[1] + j as i64) as f64 * h + 0.5 * h;
                for i in 0..dims[0] {
                    let x = (lo[0] + i as i64) as f64 * h + 0.5 * h;
                    chunk[j * dims[0] + i] = f(&HPoint::new(x, y, t));
                }
            }
        });
        let g = Self::raw(h, lo, dims, values)?;
        if g.margin() < MARGIN {
            return Err(LabError::SupportTouchesBoundary(format!(
                "function does not vanish within {MARGIN} cells of the sampling window"
            )));
        }
        Ok(g)
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn offset(&self) -> [i64; 3] {
        self.offset
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    fn idx(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.dims[0] * (j + self.dims[1] * k)
    }

    /// Value at local indices, zero outside the box.
    #[inline]
    fn at(&self, i: i64, j: i64, k: i64) -> f64 {
        if i < 0 || j < 0 || k < 0 {
            return 0.0;
        }
        let (i, j, k) = (i as usize, j as usize, k as usize);
        if i >= self.dims[0] || j >= self.dims[1] || k >= self.dims[2] {
            return 0.0;
        }
        self.values[self.idx(i, j, k)]
    }

    /// Center of the cell with local indices `(i, j, k)`.
    pub fn center(&self, i: usize, j: usize, k: usize) -> HPoint {
        HPoint::new(
            (self.offset[0] + i as i64) as f64 * self.h + 0.5 * self.h,
            (self.offset[1] + j as i64) as f64 * self.h + 0.5 * self.h,
            (self.offset[2] + k as i64) as f64 * self.h + 0.5 * self.h,
        )
    }

    /// Number of all-zero layers around the support (`0` if the outer layer
    /// is nonzero; the full half-width for `f ≡ 0`).
    pub fn margin(&self) -> usize {
        let mut lo = self.dims;
        let mut hi = [0usize; 3];
        let mut any = false;
        for k in 0..self.dims[2] {
            for j in 0..self.dims[1] {
                for i in 0..self.dims[0] {
                    if self.values[self.idx(i, j, k)] != 0.0 {
                        any = true;
                        for (a, v) in [i, j, k].into_iter().enumerate() {
                            lo[a] = lo[a].min(v);
                            hi[a] = hi[a].max(v);
                        }
                    }
                }
            }
        }
        if !any {
            return self.dims.iter().map(|d| d / 2).min().unwrap_or(0);
        }
        (0..3).map(|a| lo[a].min(self.dims[a] - 1 - hi[a])).min().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    fn same_grid(&self, o: &GridFunction) -> Result<()> {
        if self.h != o.h || self.offset != o.offset || self.dims != o.dims {
            return Err(LabError::InvalidParameter(
                "grid functions live on different grids".into(),
            ));
        }
        Ok(())
    }

    /// `α·self + β·other`.
    pub fn lin_comb(&self, alpha: f64, other: &GridFunction, beta: f64) -> Result<GridFunction> {
        self.same_grid(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| alpha * a + beta * b)
            .collect();
        Ok(GridFunction { values, ..self.clone() })
    }

    pub fn scaled(&self, c: f64) -> GridFunction {
        GridFunction {
            values: self.values.iter().map(|v| c * v).collect(),
            ..self.clone()
        }
    }

    /// Linear interpolation in `t` at the cell column `(i, j)`; zero outside.
    #[inline]
    fn lerp_t(&self, i: usize, j: usize, t: f64) -> f64 {
        let s = t / self.h - 0.5 - self.offset[2] as f64;
        let k0 = s.floor();
        let w = s - k0;
        let k0 = k0 as i64;
        (1.0 - w) * self.at(i as i64, j as i64, k0) + w * self.at(i as i64, j as i64, k0 + 1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Field {
    X,
    Y,
}

/// Central-difference stencil of `X` or `Y` at every cell, with values
/// outside the box taken as zero; no support check.
pub(crate) fn apply_field(f: &GridFunction, which: Field) -> Vec<f64> {
    let [nx, ny, nz] = f.dims;
    let inv = 1.0 / (2.0 * f.h);
    let slab = nx * ny;
    let mut out = vec![0.0; slab * nz];
    out.par_chunks_mut(slab).enumerate().for_each(|(k, chunk)| {
        let kk = k as i64;
        for j in 0..ny {
            let jj = j as i64;
            for i in 0..nx {
                let ii = i as i64;
                let c = f.center(i, j, k);
                let dt = (f.at(ii, jj, kk + 1) - f.at(ii, jj, kk - 1)) * inv;
                chunk[j * nx + i] = match which {
                    Field::X => (f.at(ii + 1, jj, kk) - f.at(ii - 1, jj, kk)) * inv - 0.5 * c.y * dt,
                    Field::Y => (f.at(ii, jj + 1, kk) - f.at(ii, jj - 1, kk)) * inv + 0.5 * c.x * dt,
                };
            }
        }
    });
    out
}

fn field(f: &GridFunction, which: Field) -> Result<GridFunction> {
    if f.margin() < MARGIN {
        return Err(LabError::SupportTouchesBoundary(format!(
            "field stencils need {MARGIN} zero layers around the support"
        )));
    }
    Ok(GridFunction {
        values: apply_field(f, which),
        ..f.clone()
    })
}

/// `Xf = ∂x f - (y/2) ∂t f` by central differences.
#[allow(non_snake_case)]
pub fn field_X(f: &GridFunction) -> Result<GridFunction> {
    field(f, Field::X)
}

/// `Yf = ∂y f + (x/2) ∂t f` by central differences.
#[allow(non_snake_case)]
pub fn field_Y(f: &GridFunction) -> Result<GridFunction> {
    field(f, Field::Y)
}

/// Sum in fixed chunks, then sequentially over chunk totals.
fn det_sum(values: &[f64], g: impl Fn(f64) -> f64 + Sync) -> f64 {
    let partial: Vec<f64> = values
        .par_chunks(CHUNK)
        .map(|c| c.iter().map(|&v| g(v)).sum::<f64>())
        .collect();
    partial.iter().sum()
}

/// `(Σ |f|^p h³)^{1/p}`.
pub fn lp_norm(f: &GridFunction, p: f64) -> Result<f64> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(LabError::InvalidParameter(format!("p = {p} must be at least 1")));
    }
    let cell = f.h.powi(3);
    let s = if p == 1.0 {
        det_sum(&f.values, f64::abs)
    } else {
        det_sum(&f.values, |v| v.abs().powf(p))
    };
    Ok((s * cell).powf(1.0 / p))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GnsCheck {
    /// `‖f‖_{4/3}`.
    pub lhs: f64,
    /// `√(‖Xf‖₁ ‖Yf‖₁)`.
    pub rhs: f64,
    pub ratio: f64,
}

pub fn gns_check(f: &GridFunction) -> Result<GnsCheck> {
    if f.is_zero() {
        return Ok(GnsCheck {
            lhs: 0.0,
            rhs: 0.0,
            ratio: 0.0,
        });
    }
    let lhs = lp_norm(f, 4.0 / 3.0)?;
    let rhs = (lp_norm(&field_X(f)?, 1.0)? * lp_norm(&field_Y(f)?, 1.0)?).sqrt();
    Ok(GnsCheck {
        lhs,
        rhs,
        ratio: lhs / rhs,
    })
}

/// Dyadic levels `k` with `2^{k-1} <= v <= 2^k` for `v > 0` (two levels when
/// `v` is a power of two).
pub fn dyadic_levels(v: f64) -> (i32, Option<i32>) {
    let mut m = v.log2().ceil() as i32;
    while 2f64.powi(m - 1) > v {
        m -= 1;
    }
    while 2f64.powi(m) < v {
        m += 1;
    }
    (m, (2f64.powi(m) == v).then_some(m + 1))
}

/// Closed dyadic level sets `F_k = {2^{k-1} <= |f| <= 2^k}` by the center
/// rule, sorted by `k`, nonempty levels only.
#[derive(Debug, Clone)]
pub struct LevelSetFamily {
    pub levels: Vec<(i32, VoxelSet)>,
}

impl LevelSetFamily {
    pub fn get(&self, k: i32) -> Option<&VoxelSet> {
        self.levels.iter().find(|(j, _)| *j == k).map(|(_, v)| v)
    }

    pub fn ks(&self) -> Vec<i32> {
        self.levels.iter().map(|(k, _)| *k).collect()
    }

    /// `Σ_k 2^{4k/3} |F_k|`.
    pub fn dyadic_mass(&self) -> f64 {
        self.levels
            .iter()
            .map(|(k, v)| 2f64.powf(4.0 * *k as f64 / 3.0) * v.volume())
            .sum()
    }
}

pub fn level_sets(f: &GridFunction) -> LevelSetFamily {
    let mut by_level: std::collections::BTreeMap<i32, Vec<[i64; 3]>> = Default::default();
    for k in 0..f.dims[2] {
        for j in 0..f.dims[1] {
            for i in 0..f.dims[0] {
                let v = f.values[f.idx(i, j, k)].abs();
                if v == 0.0 {
                    continue;
                }
                let g = [f.offset[0] + i as i64, f.offset[1] + j as i64, f.offset[2] + k as i64];
                let (a, b) = dyadic_levels(v);
                by_level.entry(a).or_default().push(g);
                if let Some(b) = b {
                    by_level.entry(b).or_default().push(g);
                }
            }
        }
    }
    LevelSetFamily {
        levels: by_level
            .into_iter()
            .map(|(k, vs)| (k, VoxelSet::from_voxels(f.h, f.h, &vs).expect("positive step")))
            .collect(),
    }
}

/// `∫_{F_j} |Yf|` (plane `𝕎_x`) or `∫_{F_j} |Xf|` (plane `𝕎_y`) for every
/// level `j` in `j_lo..=j_hi`, computed fiberwise: after the unit-Jacobian
/// shear `(x, y, τ) ↦ (x, y, τ ± xy/2)` the field becomes `∂y` (resp. `∂x`)
/// along the fibers of the projection, and along each fiber the integral
/// of `|g'|` over `{|g| ∈ [2^{j-1}, 2^j]}` is the variation of the
/// piecewise linear fiber profile inside that band. Fibers sit on cell
/// columns and on `τ` at cell-center height; profiles are sampled `sub`
/// times per cell with `f` interpolated linearly in `t`.
pub fn fiber_band_integrals(f: &GridFunction, plane: Plane, j_lo: i32, j_hi: i32, sub: usize) -> Vec<f64> {
    let n_levels = (j_hi - j_lo + 1).max(0) as usize;
    if n_levels == 0 {
        return Vec::new();
    }
    let h = f.h;
    let [nx, ny, nz] = f.dims;
    // (fiber-column count, along-fiber count)
    let (n_col, n_along) = match plane {
        Plane::Wx => (nx, ny),
        Plane::Wy => (ny, nx),
    };
    let t0 = f.offset[2] as f64 * h;
    let t1 = (f.offset[2] + nz as i64) as f64 * h;
    let edge = |idx: i64| idx as f64 * h;
    let u_of = |c: usize| match plane {
        Plane::Wx => edge(f.offset[0] + c as i64) + 0.5 * h,
        Plane::Wy => edge(f.offset[1] + c as i64) + 0.5 * h,
    };
    let s_lo = match plane {
        Plane::Wx => edge(f.offset[1]),
        Plane::Wy => edge(f.offset[0]),
    };
    let bands: Vec<(f64, f64)> = (j_lo..=j_hi).map(|j| (2f64.powi(j - 1), 2f64.powi(j))).collect();
    let steps = n_along * sub;
    let ds = h / sub as f64;

    let per_column: Vec<Vec<f64>> = (0..n_col)
        .into_par_iter()
        .map(|c| {
            let u = u_of(c);
            let mut acc = vec![0.0; n_levels];
            // τ range swept by the column: τ = t ∓ u s/2 over the box
            let s_hi = s_lo + n_along as f64 * h;
            let shear = |s: f64| match plane {
                Plane::Wx => 0.5 * u * s,
                Plane::Wy => -0.5 * u * s,
            };
            let taus = [t0 - shear(s_lo), t0 - shear(s_hi), t1 - shear(s_lo), t1 - shear(s_hi)];
            let tau_min = taus.iter().cloned().fold(f64::INFINITY, f64::min);
            let tau_max = taus.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let k_lo = (tau_min / h).floor() as i64 - 1;
            let k_hi = (tau_max / h).ceil() as i64 + 1;
            let mut prof = vec![0.0; steps + 2];
            for kt in k_lo..=k_hi {
                let tau = (kt as f64 + 0.5) * h;
                let mut nonzero = false;
                // endpoints pinned at zero outside the box
                for (q, slot) in prof.iter_mut().enumerate().skip(1).take(steps) {
                    let s = s_lo + (q as f64 - 0.5) * ds;
                    let v = interp_along(f, plane, c, s, tau + shear(s)).abs();
                    *slot = v;
                    nonzero |= v != 0.0;
                }
                if !nonzero {
                    continue;
                }
                for w in prof.windows(2) {
                    let (a, b) = (w[0].min(w[1]), w[0].max(w[1]));
                    if b == a {
                        continue;
                    }
                    for (li, &(lo, hi)) in bands.iter().enumerate() {
                        let overlap = b.min(hi) - a.max(lo);
                        if overlap > 0.0 {
                            acc[li] += overlap;
                        }
                    }
                }
            }
            acc.iter_mut().for_each(|v| *v *= h * h);
            acc
        })
        .collect();
    let mut total = vec![0.0; n_levels];
    for col in per_column {
        for (t, v) in total.iter_mut().zip(col) {
            *t += v;
        }
    }
    total
}

/// Value of `f` at `(u_c, s, t)` on a fiber: bilinear in the along-fiber
/// coordinate `s` and in `t`, exact in the column coordinate.
#[inline]
fn interp_along(f: &GridFunction, plane: Plane, column: usize, s: f64, t: f64) -> f64 {
    let off = match plane {
        Plane::Wx => f.offset[1],
        Plane::Wy => f.offset[0],
    };
    let q = s / f.h - 0.5 - off as f64;
    let a0 = q.floor();
    let w = q - a0;
    let a0 = a0 as i64;
    let col = |a: i64| -> f64 {
        if a < 0 {
            return 0.0;
        }
        let a = a as usize;
        match plane {
            Plane::Wx if a < f.dims[1] => f.lerp_t(column, a, t),
            Plane::Wy if a < f.dims[0] => f.lerp_t(a, column, t),
            _ => 0.0,
        }
    };
    (1.0 - w) * col(a0) + w * col(a0 + 1)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelSetCheck {
    pub k: i32,
    pub plane: Plane,
    /// `|π(F_k)|`.
    pub lhs: f64,
    /// `2^{-k+2} Σ_{F_{k-1}} |Yf| h³` (resp. `|Xf|`), center rule.
    pub rhs_cells: f64,
    /// `2^{-k+2} ∫_{F_{k-1}} |Yf|` (resp. `|Xf|`) by [`fiber_band_integrals`].
    pub rhs_fiber: f64,
    /// `lhs <= LEVELSET_SLACK · rhs_fiber`.
    pub holds: bool,
}

/// Sub-samples per cell along fibers in [`levelset_lemma_check`].
pub const FIBER_SUBSAMPLES: usize = 4;

/// `|π_x(F_k)| <= 2^{-k+2} ∫_{F_{k-1}} |Yf|` (plane `𝕎_x`) or the twin
/// `|π_y(F_k)| <= 2^{-k+2} ∫_{F_{k-1}} |Xf|` (plane `𝕎_y`).
pub fn levelset_lemma_check(f: &GridFunction, k: i32, plane: Plane) -> Result<LevelSetCheck> {
    let fam = level_sets(f);
    levelset_checks_for(f, &fam, &[k], plane).map(|mut v| v.remove(0))
}

/// Every nonempty level of `f`, on both planes.
pub fn levelset_checks_all(f: &GridFunction) -> Result<Vec<LevelSetCheck>> {
    let fam = level_sets(f);
    let ks = fam.ks();
    let mut out = levelset_checks_for(f, &fam, &ks, Plane::Wx)?;
    out.extend(levelset_checks_for(f, &fam, &ks, Plane::Wy)?);
    Ok(out)
}

fn levelset_checks_for(f: &GridFunction, fam: &LevelSetFamily, ks: &[i32], plane: Plane) -> Result<Vec<LevelSetCheck>> {
    if ks.is_empty() {
        return Ok(Vec::new());
    }
    for &k in ks {
        if fam.get(k).is_none() {
            return Err(LabError::Empty(format!("level F_{k} is empty")));
        }
    }
    let grad = match plane {
        Plane::Wx => field_Y(f)?,
        Plane::Wy => field_X(f)?,
    };
    let j_lo = ks.iter().min().unwrap() - 1;
    let j_hi = ks.iter().max().unwrap() - 1;
    let fiber = fiber_band_integrals(f, plane, j_lo, j_hi, FIBER_SUBSAMPLES);
    let cell = f.h.powi(3);
    ks.iter()
        .map(|&k| {
            let lhs = project_voxels(fam.get(k).unwrap(), plane, 2)?.area();
            let weight = 2f64.powi(2 - k);
            let below: f64 = fam.get(k - 1).map_or(0.0, |lv| {
                lv.voxels()
                    .iter()
                    .map(|g| {
                        let l = [0, 1, 2].map(|a| (g[a] - f.offset[a]) as usize);
                        grad.values[grad.idx(l[0], l[1], l[2])].abs()
                    })
                    .sum()
            });
            let rhs_cells = weight * below * cell;
            let rhs_fiber = weight * fiber[(k - 1 - j_lo) as usize];
            Ok(LevelSetCheck {
                k,
                plane,
                lhs,
                rhs_cells,
                rhs_fiber,
                holds: lhs <= LEVELSET_SLACK * rhs_fiber,
            })
        })
        .collect()
}

fn resample_t(f: &GridFunction, sign: f64) -> Result<GridFunction> {
    let [nx, ny, nz] = f.dims;
    let slab = nx * ny;
    // support of the output must stay inside the box with the required margin
    let top = (f.offset[2] + nz as i64) as f64 * f.h;
    let bottom = f.offset[2] as f64 * f.h;
    let m = MARGIN as f64 * f.h;
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                if f.values[f.idx(i, j, k)] != 0.0 {
                    let c = f.center(i, j, k);
                    let t_new = c.t - sign * 0.5 * c.x * c.y;
                    if t_new - f.h < bottom + m || t_new + f.h > top - m {
                        return Err(LabError::SupportTouchesBoundary(
                            "sheared support leaves the grid box".into(),
                        ));
                    }
                }
            }
        }
    }
    let mut values = vec![0.0; slab * nz];
    values.par_chunks_mut(slab).enumerate().for_each(|(k, chunk)| {
        for j in 0..ny {
            for i in 0..nx {
                let c = f.center(i, j, k);
                chunk[j * nx + i] = f.lerp_t(i, j, c.t + sign * 0.5 * c.x * c.y);
            }
        }
    });
    GridFunction::new(f.h, f.offset, f.dims, values)
}

/// `f ∘ Φ` with `Φ(x, y, t) = (x, y, t + xy/2)`, by linear interpolation in `t`
/// (the shear fixes `x` and `y`, so cell columns map to cell columns).
pub fn shear_change_of_variables(f: &GridFunction) -> Result<GridFunction> {
    resample_t(f, 1.0)
}

/// `f ∘ Φ⁻¹`.
pub fn inverse_shear(f: &GridFunction) -> Result<GridFunction> {
    resample_t(f, -1.0)
}

/// Header of the raw grid-function format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridHeader {
    pub dims: [usize; 3],
    pub h: f64,
    /// Coordinates of the lower corner of the box, `offset · h`.
    pub origin: [f64; 3],
}

impl GridFunction {
    pub fn header(&self) -> GridHeader {
        GridHeader {
            dims: self.dims,
            h: self.h,
            origin: self.offset.map(|o| o as f64 * self.h),
        }
    }

    /// Raw little-endian `f64` values, `i` fastest, then `j`, then `k`.
    pub fn write_raw(&self, w: &mut impl Write) -> Result<()> {
        for v in &self.values {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_raw(header: &GridHeader, r: &mut impl Read) -> Result<Self> {
        let n = header.dims[0] * header.dims[1] * header.dims[2];
        let mut buf = vec![0u8; n * 8];
        r.read_exact(&mut buf)?;
        let values = buf
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect();
        let offset = header.origin.map(|o| (o / header.h).round() as i64);
        GridFunction::new(header.h, offset, header.dims, values)
    }
}

/// Test functions for the Sobolev experiments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum TestFunction {
    /// `(1 - |p|²/w²)₊²`.
    Bump { width: f64 },
    /// `(1 - x²/a² - y²/b² - t²/c²)₊²`.
    AnisotropicBump { a: f64, b: f64, c: f64 },
    /// `Bump ∘ Φ`.
    ShearedBump { width: f64 },
    /// `(1 - ‖p‖⁴/w⁴)₊²` in the Korányi gauge.
    KoranyiBump { width: f64 },
    /// Smoothed indicator of `[-r, r]² × [-r², r²]`, ramps of relative width 1/2.
    SmoothedBox { r: f64 },
    /// `inner ∘ δ_{1/λ}`.
    Dilated { lam: f64, inner: Box<TestFunction> },
}

fn smooth_step(z: f64) -> f64 {
    let z = z.clamp(0.0, 1.0);
    z * z * z * (z * (6.0 * z - 15.0) + 10.0)
}

impl TestFunction {
    pub fn eval(&self, p: &HPoint) -> f64 {
        let sq = |v: f64| if v > 0.0 { v * v } else { 0.0 };
        match self {
            TestFunction::Bump { width } => sq(1.0 - (p.x * p.x + p.y * p.y + p.t * p.t) / (width * width)),
            TestFunction::AnisotropicBump { a, b, c } => {
                sq(1.0 - (p.x / a).powi(2) - (p.y / b).powi(2) - (p.t / c).powi(2))
            }
            TestFunction::ShearedBump { width } => {
                TestFunction::Bump { width: *width }.eval(&HPoint::new(p.x, p.y, p.t + 0.5 * p.x * p.y))
            }
            TestFunction::KoranyiBump { width } => {
                let r2 = p.x * p.x + p.y * p.y;
                sq(1.0 - (r2 * r2 + 16.0 * p.t * p.t) / width.powi(4))
            }
            TestFunction::SmoothedBox { r } => {
                let plateau = |s: f64| smooth_step((1.25 - s.abs()) / 0.5);
                plateau(p.x / r) * plateau(p.y / r) * plateau(p.t / (r * r))
            }
            TestFunction::Dilated { lam, inner } => inner.eval(&HPoint::new(p.x / lam, p.y / lam, p.t / (lam * lam))),
        }
    }

    /// A box containing the support.
    pub fn support(&self) -> Aabb {
        match self {
            TestFunction::Bump { width } => Aabb::cube(*width),
            TestFunction::AnisotropicBump { a, b, c } => Aabb::new([-a, -b, -c], [*a, *b, *c]),
            TestFunction::ShearedBump { width } => {
                let w = *width;
                Aabb::new([-w, -w, -w - 0.5 * w * w], [w, w, w + 0.5 * w * w])
            }
            TestFunction::KoranyiBump { width } => {
                let w = *width;
                Aabb::new([-w, -w, -w * w / 4.0], [w, w, w * w / 4.0])
            }
            TestFunction::SmoothedBox { r } => {
                let (a, c) = (1.25 * r, 1.25 * r * r);
                Aabb::new([-a, -a, -c], [a, a, c])
            }
            TestFunction::Dilated { lam, inner } => {
                let b = inner.support();
                Aabb::new(
                    [b.lo[0] * lam, b.lo[1] * lam, b.lo[2] * lam * lam],
                    [b.hi[0] * lam, b.hi[1] * lam, b.hi[2] * lam * lam],
                )
            }
        }
    }

    pub fn dilated(self, lam: f64) -> TestFunction {
        TestFunction::Dilated {
            lam,
            inner: Box::new(self),
        }
    }

    pub fn sample(&self, h: f64) -> Result<GridFunction> {
        GridFunction::sample(h, &self.support(), |p| self.eval(p))
    }

    pub fn name(&self) -> String {
        match self {
            TestFunction::Bump { width } => format!("bump(w={width})"),
            TestFunction::AnisotropicBump { a, b, c } => format!("aniso_bump({a},{b},{c})"),
            TestFunction::ShearedBump { width } => format!("sheared_bump(w={width})"),
            TestFunction::KoranyiBump { width } => format!("koranyi_bump(w={width})"),
            TestFunction::SmoothedBox { r } => format!("smoothed_box(r={r})"),
            TestFunction::Dilated { lam, inner } => format!("dilate({lam}, {})", inner.name()),
        }
    }
}

/// The default function zoo.
pub fn function_zoo() -> Vec<TestFunction> {
    vec![
        TestFunction::Bump { width: 0.3 },
        TestFunction::Bump { width: 0.5 },
        TestFunction::AnisotropicBump { a: 0.5, b: 0.3, c: 0.2 },
        TestFunction::ShearedBump { width: 0.4 },
        TestFunction::KoranyiBump { width: 0.8 },
        TestFunction::SmoothedBox { r: 0.4 },
    ]
}

/// The function zoo under short names.
pub fn named_function_zoo() -> Vec<(&'static str, TestFunction)> {
    const NAMES: [&str; 6] = [
        "bump_narrow",
        "bump_wide",
        "aniso_bump",
        "sheared_bump",
        "koranyi_bump",
        "smoothed_box",
    ];
    NAMES.into_iter().zip(function_zoo()).collect()
}

/// A function of the given kind scaled by `width`. Kinds: `bump`,
/// `aniso_bump` (semi-axes `w, 0.6w, 0.4w`), `sheared_bump`, `koranyi_bump`,
/// `smoothed_box`.
pub fn function_of_kind(kind: &str, width: f64) -> Result<TestFunction> {
    if !(width.is_finite() && width > 0.0) {
        return Err(LabError::InvalidParameter(format!(
            "width must be positive, got {width}"
        )));
    }
    Ok(match kind {
        "bump" => TestFunction::Bump { width },
        "aniso_bump" => TestFunction::AnisotropicBump {
            a: width,
            b: 0.6 * width,
            c: 0.4 * width,
        },
        "sheared_bump" => TestFunction::ShearedBump { width },
        "koranyi_bump" => TestFunction::KoranyiBump { width },
        "smoothed_box" => TestFunction::SmoothedBox { r: width },
        other => return Err(LabError::Config(format!("unknown function kind '{other}'"))),
    })
}

/// Resolves `all`, zoo names and `kind:width` entries.
pub fn select_functions(names: &[String]) -> Result<Vec<(String, TestFunction)>> {
    let zoo = named_function_zoo();
    let mut out = Vec::new();
    for name in names {
        if name == "all" {
            out.extend(zoo.iter().map(|(n, f)| (n.to_string(), f.clone())));
        } else if let Some((kind, w)) = name.split_once(':') {
            let width = w
                .trim()
                .parse::<f64>()
                .map_err(|_| LabError::Config(format!("bad width in '{name}'")))?;
            out.push((
                name.clone(),
                function_of_kind(kind.trim(), width).map_err(|e| LabError::Config(e.to_string()))?,
            ));
        } else {
            let (n, f) = zoo
                .iter()
                .find(|(n, _)| n == name)
                .ok_or_else(|| LabError::Config(format!("unknown function '{name}'")))?;
            out.push((n.to_string(), f.clone()));
        }
    }
    Ok(out)
}
