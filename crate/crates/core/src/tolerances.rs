//! Pinned tolerances and measured ceilings shared by the experiment runner
//! and the acceptance suite. Every threshold used in a pass/fail decision
//! lives here.

// Planar incidences

/// Upper/lower ratio of the normalized-incidence band on sharpness families.
pub const RATIO_BAND_WIDTH: f64 = 100.0;

/// Expected slope of `log₂(count)` against `log₂(1/δ)` on the tube family.
pub const TUBE_SLOPE: f64 = 1.0;
pub const TUBE_SLOPE_TOL: f64 = 0.15;

/// Largest allowed growth of the rich-points bound constant from the
/// coarsest to the finest δ of a sweep.
pub const RICH_GROWTH_MAX: f64 = 2.0;

/// Greedy concurrent families reach at least `STAR_LOWER · ε⁻¹` lines.
pub const STAR_LOWER: f64 = 0.5;
/// No δ-ball meets more than `STAR_UPPER · ε⁻¹` lines of an ε-separated family.
pub const STAR_UPPER: f64 = 4.0;

/// Dual incidences hold at this multiple of δ.
pub const DUAL_MULTIPLIER: f64 = 2.0;

// Heisenberg algebra

/// Relative tolerance for group identities, `|a - b| <= tol · max(1, |a|, |b|)`.
pub const ALGEBRA_REL_TOL: f64 = 1e-12;

// Measure

/// Relative tolerance of the box Loomis-Whitney ratio against `8·5^{-4/3}`.
pub const LW_BOX_REL_TOL: f64 = 0.10;

/// Ceiling for the Loomis-Whitney ratio over the shape zoo.
pub const LW_CEILING: f64 = 2.0;

/// Relative tolerance for `λ⁴` volume and `λ³` area scaling.
pub const DILATION_REL_TOL: f64 = 0.05;

/// Largest max/min spread of `|T_x ∩ T_y| / δ³` across a δ sweep.
pub const TUBE_VOLUME_SPREAD: f64 = 4.0;
/// Ceiling for `|T_x ∩ T_y| / δ³`.
pub const TUBE_VOLUME_CEILING: f64 = 1e3;

/// Largest max/min spread of the reduction overshoot across a δ sweep.
pub const OVERSHOOT_SPREAD: f64 = 4.0;

/// Largest max/min spread of the weak isoperimetric ratio under dilation
/// and h-refinement.
pub const ISO_SPREAD: f64 = 2.0;

// Sobolev

pub use crate::sobolev::LEVELSET_SLACK;

/// Ceiling for the Gagliardo-Nirenberg-Sobolev ratio over the function zoo.
pub const GNS_CEILING: f64 = 1.0;

/// Relative tolerance for dilation invariance of the GNS ratio.
pub const GNS_DILATION_REL_TOL: f64 = 0.10;

/// Minimal error reduction of the field stencils when `h` is halved.
pub const STENCIL_CONVERGENCE_MIN: f64 = 3.5;

/// `max / min` of a nonempty list of positive values (`∞` if some value is `0`).
pub fn spread(values: &[f64]) -> f64 {
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    max / min
}

/// Least-squares slope of `ys` against `xs`.
pub fn ls_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn helpers() {
        assert_eq!(spread(&[2.0, 8.0, 4.0]), 4.0);
        assert!(spread(&[0.0, 1.0]).is_infinite());
        assert!((ls_slope(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]) - 2.0).abs() < 1e-15);
    }
}
