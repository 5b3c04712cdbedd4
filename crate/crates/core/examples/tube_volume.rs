//! Volume of the intersection of two preimage tubes `T_x ∩ T_y`, which
//! scales like δ³.

use incidence_lab::heisenberg::{proj_x, proj_y, HPoint, DEFAULT_A1};
use incidence_lab::measure::tube_intersection_volume;
use incidence_lab::planar::Scale;

fn main() -> incidence_lab::Result<()> {
    let q = HPoint::new(0.2, -0.3, 0.1);
    let (wx, wy) = (proj_x(&q), proj_y(&q));
    for e in 4..=7 {
        let delta = 2f64.powi(-e);
        let v = tube_intersection_volume(&wx, &wy, &Scale::delta(delta)?, DEFAULT_A1)?;
        println!("delta 2^-{e}: |T_x ∩ T_y| = {v:.3e}, / δ³ = {:.3}", v / delta.powi(3));
    }
    Ok(())
}
