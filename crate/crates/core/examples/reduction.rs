//! Reduces a Heisenberg box to a planar incidence problem: δ-nets of both
//! projections become points and lines, and `δ³ · I` dominates `|K|`.

use incidence_lab::heisenberg::DEFAULT_A;
use incidence_lab::measure::DEFAULT_OVERSAMPLE;
use incidence_lab::reduction::reduce_shape;
use incidence_lab::voxel::Shape;

fn main() -> incidence_lab::Result<()> {
    let shape = Shape::heisenberg_box(0.5);
    for e in 4..=6 {
        let row = reduce_shape(&shape, 2f64.powi(-e), DEFAULT_A, DEFAULT_OVERSAMPLE)?;
        println!(
            "delta 2^-{e}: |P_x| {} |P_y| {} I {} (C = {}), overshoot {:.3}",
            row.n_px, row.n_py, row.count, row.multiplier, row.overshoot
        );
    }
    Ok(())
}
