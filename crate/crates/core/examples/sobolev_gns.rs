//! Horizontal gradient fields and the ratio `‖f‖_{4/3} / √(‖Xf‖₁ ‖Yf‖₁)`
//! over the function zoo, including its invariance under dilation.

use incidence_lab::sobolev::{function_zoo, gns_check};

fn main() -> incidence_lab::Result<()> {
    let h = 1.0 / 64.0;
    for f in function_zoo() {
        let base = gns_check(&f.sample(h)?)?;
        let half = gns_check(&f.clone().dilated(0.5).sample(0.5 * h)?)?;
        println!(
            "{:<28} ratio {:.4}  dilated by 1/2: {:.4}",
            f.name(),
            base.ratio,
            half.ratio
        );
    }
    Ok(())
}
