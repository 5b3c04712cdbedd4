//! Plants `m` k-stars and finds the k-rich points clustered around each
//! center. The bound constant `|P| k³ ε / |L|²` stays bounded as δ shrinks.

use incidence_lab::generators::gen_kstar;
use incidence_lab::planar::Scale;
use incidence_lab::rich::k_rich_points;

fn main() -> incidence_lab::Result<()> {
    let (k, m) = (8, 8);
    for e in 6..=9 {
        let delta = 2f64.powi(-e);
        let epsilon = 2.0 * delta;
        let star = gen_kstar(k, m, delta, epsilon)?;
        let rich = k_rich_points(&star.lines, k as u32, &Scale::new(delta, epsilon, 1.0)?)?;
        println!(
            "delta 2^-{e}: {} lines, {} rich points (planted {m}), bound constant {:.4}",
            star.lines.len(),
            rich.points.len(),
            rich.bound_constant
        );
    }
    Ok(())
}
