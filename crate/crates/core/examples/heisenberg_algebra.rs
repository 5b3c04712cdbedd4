//! Group law, dilations, the two vertical projections and horizontal fibers.

use incidence_lab::heisenberg::{
    dilate, h_inv, h_mul, horizontal_fiber, koranyi_norm, proj_x, proj_y, project_fiber_to_line, HPoint,
};

fn main() -> incidence_lab::Result<()> {
    let p = HPoint::new(0.5, -0.25, 0.125);
    let q = HPoint::new(-0.1, 0.4, 0.3);
    println!("p·q = {:?}, q·p = {:?}", h_mul(&p, &q), h_mul(&q, &p));
    println!("p·p⁻¹ = {:?}", h_mul(&p, &h_inv(&p)));
    let d = dilate(2.0, &p)?;
    println!(
        "δ_2 p = {d:?}, ‖δ_2 p‖ / ‖p‖ = {:.6}",
        koranyi_norm(&d) / koranyi_norm(&p)
    );

    let (wx, wy) = (proj_x(&p), proj_y(&p));
    println!("π_x p = {wx:?}, π_y p = {wy:?}");
    println!(
        "π_x p · (0, y, 0) = {:?}",
        h_mul(&wx.embed(), &HPoint::new(0.0, p.y, 0.0))
    );

    // the fiber through w_x projects to a line in 𝕎_y
    let line = project_fiber_to_line(&wx)?;
    let fiber = horizontal_fiber(wx);
    for s in [-0.5, 0.0, 0.5] {
        let w = proj_y(&fiber(s));
        println!(
            "s = {s:+}: π_y = ({:+.4}, {:+.4}), line value {:+.4}",
            w.u,
            w.t,
            line.eval(w.u)
        );
    }
    Ok(())
}
