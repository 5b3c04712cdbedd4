//! Dyadic level sets `F_k = {2^{k-1} <= |f| <= 2^k}` and the projection
//! bound `|π(F_k)| <= 2^{-k+2} ∫_{F_{k-1}} |Yf|`.

use incidence_lab::sobolev::{function_zoo, level_sets, levelset_checks_all};

fn main() -> incidence_lab::Result<()> {
    let f = function_zoo()[0].sample(1.0 / 64.0)?;
    let fam = level_sets(&f);
    for k in fam.ks() {
        println!("F_{k}: {} voxels", fam.get(k).map_or(0, |s| s.count()));
    }
    for c in levelset_checks_all(&f)? {
        println!(
            "k = {:>3} {:?}: |π F_k| {:.5} <= rhs {:.5}  ({})",
            c.k, c.plane, c.lhs, c.rhs_fiber, c.holds
        );
    }
    Ok(())
}
