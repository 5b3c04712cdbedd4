//! Concurrency of ε-separated line families through a point: a greedy family
//! reaches order `ε⁻¹` lines, and no family exceeds a constant times that.

use incidence_lab::planar::{Point2, Scale};
use incidence_lab::rich::{greedy_concurrent_family, max_concurrency};

fn main() -> incidence_lab::Result<()> {
    let p = Point2::new(0.25, -0.5);
    for e in 3..=8 {
        let epsilon = 2f64.powi(-e);
        let fam = greedy_concurrent_family(&p, epsilon)?;
        let through = max_concurrency(&fam, &p, &Scale::new(epsilon, epsilon, 1.0)?);
        println!(
            "eps 2^-{e}: {} lines, {through} through p, concurrency·ε = {:.3}",
            fam.len(),
            through as f64 * epsilon
        );
    }
    Ok(())
}
