//! Point-line duality sends the point `(x, y)` to the line `(-x, y)` and the
//! line `(a, b)` to the point `(a, b)`; δ-incidences become 2δ-incidences.

use incidence_lab::planar::{dual_line_to_point, dual_point_to_line, is_incident, LineAB, Point2, Scale};

fn main() -> incidence_lab::Result<()> {
    let delta = 1.0 / 64.0;
    let p = Point2::new(0.3, -0.2);
    let l = LineAB::checked(0.5, -0.35 + 0.5 * delta)?;
    let s = Scale::delta(delta)?;
    println!("p = {p:?}, l = {l:?}, incident: {}", is_incident(&p, &l, &s));
    let (dl, dp) = (dual_point_to_line(&p)?, dual_line_to_point(&l));
    let s2 = s.with_multiplier(2.0)?;
    println!(
        "dual p = {dl:?}, dual l = {dp:?}, 2δ-incident: {}",
        is_incident(&dp, &dl, &s2)
    );
    Ok(())
}
