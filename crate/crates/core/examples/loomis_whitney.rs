//! Loomis-Whitney ratio `|K| / (|π_x K| |π_y K|)^{2/3}` of voxelized shapes.

use incidence_lab::measure::{box_lw_ratio, lw_measure, shape_zoo, DEFAULT_OVERSAMPLE};
use incidence_lab::voxel::voxelize;

fn main() -> incidence_lab::Result<()> {
    let h = 1.0 / 64.0;
    println!("box closed form: {:.5}", box_lw_ratio());
    for (name, shape) in shape_zoo() {
        let m = lw_measure(&voxelize(&shape, h)?, DEFAULT_OVERSAMPLE)?;
        println!(
            "{name:<16} |K| {:.5}  |π_x K| {:.5}  |π_y K| {:.5}  ratio {:.4}",
            m.volume, m.area_x, m.area_y, m.ratio
        );
    }
    Ok(())
}
