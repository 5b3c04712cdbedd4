//! Boundary projections cover the projections of a set, and the weak
//! isoperimetric ratio stays stable across shapes.

use incidence_lab::heisenberg::Plane;
use incidence_lab::measure::{
    boundary_projection_inclusion, random_box_union, shape_zoo, weak_isoperimetric_ratio, DEFAULT_OVERSAMPLE,
};
use incidence_lab::rng::SplitMix64;
use incidence_lab::voxel::voxelize;

fn main() -> incidence_lab::Result<()> {
    let h = 1.0 / 32.0;
    let mut rng = SplitMix64::new(11);
    for i in 0..5 {
        let e = voxelize(&random_box_union(&mut rng, 4), h)?;
        let rep = boundary_projection_inclusion(&e, Plane::Wx, DEFAULT_OVERSAMPLE)?;
        println!(
            "union {i}: {} projected cells, inclusion {}",
            rep.projected_cells, rep.holds
        );
    }
    for (name, shape) in shape_zoo() {
        println!(
            "{name:<16} ratio {:.4}",
            weak_isoperimetric_ratio(&voxelize(&shape, h)?)?
        );
    }
    Ok(())
}
