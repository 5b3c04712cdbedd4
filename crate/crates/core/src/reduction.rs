//! End-to-end passage from a set `K ⊂ ℍ` to a planar incidence count:
//! voxelize `K`, cover both vertical projections by maximal δ-separated
//! nets, reduce the nets to points and lines, and count incidences at
//! multiplier `1 + A`. The count times `δ³` bounds `|K|` from above.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::heisenberg::{reduce_to_incidences, Plane, VerticalPlanePoint};
use crate::incidence::count_bucketed;
use crate::planar::Point2;
use crate::rich::greedy_separated;
use crate::voxel::{project_voxels, voxelize, PlaneRegion, Shape};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineRow {
    pub delta: f64,
    pub volume: f64,
    pub n_px: usize,
    pub n_py: usize,
    pub count: u64,
    pub multiplier: f64,
    /// `δ³ · count / |K|`.
    pub overshoot: f64,
}

/// Maximal δ-separated subset of the cell centers of `region`, greedy in
/// storage order.
pub fn projection_net(region: &PlaneRegion, delta: f64) -> Vec<VerticalPlanePoint> {
    let centers: Vec<(Point2, ())> = region
        .cells()
        .into_iter()
        .map(|c| {
            let (u, t) = region.cell_center(c);
            (Point2::new(u, t), ())
        })
        .collect();
    greedy_separated(&centers, delta)
        .into_iter()
        .map(|(p, ())| VerticalPlanePoint {
            plane: region.plane(),
            u: p.x,
            t: p.y,
        })
        .collect()
}

/// Runs the pipeline on `shape` at scale `delta`, voxelizing at `h = δ/2`.
pub fn reduce_shape(shape: &Shape, delta: f64, a_const: f64, oversample: usize) -> Result<PipelineRow> {
    let k = voxelize(shape, delta / 2.0)?;
    let volume = k.volume();
    let px = projection_net(&project_voxels(&k, Plane::Wx, oversample)?, delta);
    let py = projection_net(&project_voxels(&k, Plane::Wy, oversample)?, delta);
    let red = reduce_to_incidences(&px, &py, delta, a_const)?;
    let rep = count_bucketed(&red.points, &red.lines, &red.scale(delta)?);
    Ok(PipelineRow {
        delta,
        volume,
        n_px: px.len(),
        n_py: py.len(),
        count: rep.count,
        multiplier: red.multiplier,
        overshoot: delta.powi(3) * rep.count as f64 / volume,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heisenberg::DEFAULT_A;

    #[test]
    fn net_is_separated_and_covering() {
        let k = voxelize(&Shape::heisenberg_box(0.5), 1.0 / 32.0).unwrap();
        let region = project_voxels(&k, Plane::Wx, 2).unwrap();
        let delta = 1.0 / 16.0;
        let net = projection_net(&region, delta);
        for (i, a) in net.iter().enumerate() {
            for b in &net[i + 1..] {
                assert!(a.coords().dist(&b.coords()) >= delta);
            }
        }
        for c in region.cells() {
            let (u, t) = region.cell_center(c);
            let p = Point2::new(u, t);
            assert!(net.iter().any(|w| w.coords().dist(&p) < delta));
        }
    }

    #[test]
    fn box_count_dominates_volume() {
        let row = reduce_shape(&Shape::heisenberg_box(0.5), 1.0 / 16.0, DEFAULT_A, 2).unwrap();
        assert!(row.overshoot >= 1.0, "{row:?}");
    }
}
