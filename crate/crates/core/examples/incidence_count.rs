//! Counts δ-incidences on the tube family with both engines and prints the
//! normalized ratio `I / (|P|^{2/3} |L|^{2/3} δ^{-1/3})`.

use incidence_lab::generators::gen_tube_example;
use incidence_lab::incidence::{count, normalized_ratio, Engine};
use incidence_lab::planar::Scale;

fn main() -> incidence_lab::Result<()> {
    println!("{:>10} {:>7} {:>7} {:>9} {:>8}", "delta", "|P|", "|L|", "I", "ratio");
    for e in 4..=10 {
        let delta = 2f64.powi(-e);
        let (ps, lf) = gen_tube_example(delta)?;
        let s = Scale::delta(delta)?;
        let fast = count(&ps, &lf, &s, Engine::Bucketed);
        assert_eq!(fast.count, count(&ps, &lf, &s, Engine::Naive).count);
        let ratio = normalized_ratio(fast.count, ps.len(), lf.len(), delta);
        println!(
            "{delta:>10.6} {:>7} {:>7} {:>9} {ratio:>8.4}",
            ps.len(),
            lf.len(),
            fast.count
        );
    }
    Ok(())
}
