//! The first Heisenberg group `ℍ = (ℝ³, ·)` with
//! `(x, y, t)·(x', y', t') = (x + x', y + y', t + t' + (x y' - y x')/2)`,
//! its dilations, the vertical projections onto `𝕎_x = {(x, 0, t)}` and
//! `𝕎_y = {(0, y, t)}`, and the passage from vertical projections to planar
//! incidences.
//!
//! Planar coordinates: `𝕎_x` is read as the `(x, t)` plane and `𝕎_y` as the
//! `(y, t)` plane. All metric notions (balls, tubes, neighborhoods) are
//! Euclidean unless a function says otherwise.

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::planar::{check_separation, LineAB, LineFamily, Point2, PointSet, Scale};
use crate::rng::SplitMix64;

/// Measured ceiling (rounded up) of the tube constant `A₁`: the preimage of a
/// δ-disk under a vertical projection, cut to `[-1,1]³`, lies in the
/// Euclidean `A₁δ`-neighborhood of the fiber through the disk center.
pub const DEFAULT_A1: f64 = 2.0;

/// Measured ceiling (rounded up) of the constant `A` for which
/// `π_y(π_x⁻¹(B(w_x, δ)) ∩ [-1,1]³)` lies in the `Aδ`-neighborhood of the
/// line `π_y(w_x·𝕃_y)`. The planar reduction uses incidence multiplier `1 + A`.
pub const DEFAULT_A: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HPoint {
    pub x: f64,
    pub y: f64,
    pub t: f64,
}

impl HPoint {
    pub const ORIGIN: HPoint = HPoint::new(0.0, 0.0, 0.0);

    pub const fn new(x: f64, y: f64, t: f64) -> Self {
        Self { x, y, t }
    }

    pub fn in_unit_cube(&self) -> bool {
        self.x.abs() <= 1.0 && self.y.abs() <= 1.0 && self.t.abs() <= 1.0
    }

    pub fn euclid_dist(&self, o: &HPoint) -> f64 {
        ((self.x - o.x).powi(2) + (self.y - o.y).powi(2) + (self.t - o.t).powi(2)).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Plane {
    /// `𝕎_x = {(x, 0, t)}`, fibers are cosets of `𝕃_y = {(0, y, 0)}`.
    Wx,
    /// `𝕎_y = {(0, y, t)}`, fibers are cosets of `𝕃_x = {(x, 0, 0)}`.
    Wy,
}

/// A point `(u, 0, t)` of `𝕎_x` or `(0, u, t)` of `𝕎_y`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerticalPlanePoint {
    pub plane: Plane,
    pub u: f64,
    pub t: f64,
}

impl VerticalPlanePoint {
    pub const fn wx(x: f64, t: f64) -> Self {
        Self {
            plane: Plane::Wx,
            u: x,
            t,
        }
    }

    pub const fn wy(y: f64, t: f64) -> Self {
        Self {
            plane: Plane::Wy,
            u: y,
            t,
        }
    }

    /// The point as an element of `ℍ`.
    pub fn embed(&self) -> HPoint {
        match self.plane {
            Plane::Wx => HPoint::new(self.u, 0.0, self.t),
            Plane::Wy => HPoint::new(0.0, self.u, self.t),
        }
    }

    /// Planar coordinates `(u, t)`.
    pub fn coords(&self) -> Point2 {
        Point2::new(self.u, self.t)
    }

    pub fn in_square(&self) -> bool {
        self.u.abs() <= 1.0 && self.t.abs() <= 1.0
    }
}

pub fn h_mul(p: &HPoint, q: &HPoint) -> HPoint {
    HPoint::new(p.x + q.x, p.y + q.y, p.t + q.t + 0.5 * (p.x * q.y - p.y * q.x))
}

pub fn h_inv(p: &HPoint) -> HPoint {
    HPoint::new(-p.x, -p.y, -p.t)
}

/// `δ_λ(x, y, t) = (λx, λy, λ²t)`.
pub fn dilate(lam: f64, p: &HPoint) -> Result<HPoint> {
    if !(lam > 0.0 && lam.is_finite()) {
        return Err(LabError::InvalidParameter(format!(
            "dilation factor {lam} must be positive"
        )));
    }
    Ok(dilate_unchecked(lam, p))
}

#[inline]
pub(crate) fn dilate_unchecked(lam: f64, p: &HPoint) -> HPoint {
    HPoint::new(lam * p.x, lam * p.y, lam * lam * p.t)
}

/// `π_x(x, y, t) = (x, 0, t - xy/2)`.
#[inline]
pub fn proj_x(p: &HPoint) -> VerticalPlanePoint {
    VerticalPlanePoint::wx(p.x, p.t - 0.5 * p.x * p.y)
}

/// `π_y(x, y, t) = (0, y, t + xy/2)`.
#[inline]
pub fn proj_y(p: &HPoint) -> VerticalPlanePoint {
    VerticalPlanePoint::wy(p.y, p.t + 0.5 * p.x * p.y)
}

pub fn project(plane: Plane, p: &HPoint) -> VerticalPlanePoint {
    match plane {
        Plane::Wx => proj_x(p),
        Plane::Wy => proj_y(p),
    }
}

/// The fiber `w·𝕃` through `w`, parametrized by the coordinate along `𝕃`:
/// `s ↦ w·(0, s, 0)` for `w ∈ 𝕎_x`, `s ↦ w·(s, 0, 0)` for `w ∈ 𝕎_y`.
pub fn horizontal_fiber(w: VerticalPlanePoint) -> impl Fn(f64) -> HPoint {
    let base = w.embed();
    move |s| match w.plane {
        Plane::Wx => h_mul(&base, &HPoint::new(0.0, s, 0.0)),
        Plane::Wy => h_mul(&base, &HPoint::new(s, 0.0, 0.0)),
    }
}

/// Base point and (unnormalized) direction of the fiber through `w`.
fn fiber_line(w: &VerticalPlanePoint) -> (HPoint, [f64; 3]) {
    match w.plane {
        Plane::Wx => (w.embed(), [0.0, 1.0, 0.5 * w.u]),
        Plane::Wy => (w.embed(), [1.0, 0.0, -0.5 * w.u]),
    }
}

/// Euclidean distance from `q` to the fiber `w·𝕃`.
pub fn dist_to_fiber(q: &HPoint, w: &VerticalPlanePoint) -> f64 {
    let (b, d) = fiber_line(w);
    let v = [q.x - b.x, q.y - b.y, q.t - b.t];
    let dd = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
    let s = (v[0] * d[0] + v[1] * d[1] + v[2] * d[2]) / dd;
    let r = [v[0] - s * d[0], v[1] - s * d[1], v[2] - s * d[2]];
    (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt()
}

/// The image of the fiber `w·𝕃` under the other vertical projection, as a
/// line of the other plane. For `w = (a, 0, b)` this is `t = a y + b` in the
/// `(y, t)` coordinates of `𝕎_y`; for `w = (0, a, b)` it is `t = -a x + b`
/// in the `(x, t)` coordinates of `𝕎_x`.
pub fn project_fiber_to_line(w: &VerticalPlanePoint) -> Result<LineAB> {
    let line = match w.plane {
        Plane::Wx => LineAB::new(w.u, w.t),
        Plane::Wy => LineAB::new(-w.u, w.t),
    };
    if line.in_parameter_square() {
        Ok(line)
    } else {
        Err(LabError::LineOutOfRange { a: line.a, b: line.b })
    }
}

/// Korányi gauge `((x² + y²)² + 16 t²)^{1/4}`.
pub fn koranyi_norm(p: &HPoint) -> f64 {
    let r2 = p.x * p.x + p.y * p.y;
    (r2 * r2 + 16.0 * p.t * p.t).sqrt().sqrt()
}

/// Left-invariant Korányi distance `‖q⁻¹·p‖`.
pub fn koranyi_dist(p: &HPoint, q: &HPoint) -> f64 {
    koranyi_norm(&h_mul(&h_inv(q), p))
}

/// Samples of the δ-disk around `w` in its plane: every fourth sample on the
/// boundary circle, the rest uniform in the disk.
fn disk_sample(w: &VerticalPlanePoint, delta: f64, i: usize, rng: &mut SplitMix64) -> VerticalPlanePoint {
    let theta = rng.uniform(0.0, std::f64::consts::TAU);
    let rho = if i.is_multiple_of(4) {
        delta
    } else {
        delta * rng.next_f64().sqrt()
    };
    VerticalPlanePoint {
        plane: w.plane,
        u: w.u + rho * theta.cos(),
        t: w.t + rho * theta.sin(),
    }
}

/// Samples of `π⁻¹(B(w, δ)) ∩ [-1,1]³` (the projection matching `w.plane`).
fn preimage_samples(w: &VerticalPlanePoint, delta: f64, samples: usize, seed: u64) -> Vec<HPoint> {
    let mut rng = SplitMix64::new(seed);
    let mut out = Vec::with_capacity(samples);
    for i in 0..samples {
        let wp = disk_sample(w, delta, i, &mut rng);
        let s = rng.uniform(-1.0, 1.0);
        let q = horizontal_fiber(wp)(s);
        if q.in_unit_cube() {
            out.push(q);
        }
    }
    out
}

/// Empirical lower bound for `A₁`: the largest Euclidean distance, in units
/// of δ, from a sample of `π⁻¹(B(w, δ)) ∩ [-1,1]³` to the fiber `w·𝕃`.
pub fn tube_inclusion_check(w: &VerticalPlanePoint, s: &Scale, samples: usize, seed: u64) -> f64 {
    preimage_samples(w, s.delta, samples, seed)
        .iter()
        .map(|q| dist_to_fiber(q, w))
        .fold(0.0, f64::max)
        / s.delta
}

/// Empirical lower bound for the constant `A` of the planar reduction: the
/// largest distance, in units of δ, from the other projection of a sample of
/// `π⁻¹(B(w, δ)) ∩ [-1,1]³` to the line [`project_fiber_to_line`]`(w)`.
pub fn core_projection_check(w: &VerticalPlanePoint, s: &Scale, samples: usize, seed: u64) -> Result<f64> {
    let line = project_fiber_to_line(w)?;
    let other = match w.plane {
        Plane::Wx => Plane::Wy,
        Plane::Wy => Plane::Wx,
    };
    Ok(preimage_samples(w, s.delta, samples, seed)
        .iter()
        .map(|q| crate::planar::point_line_dist(&project(other, q).coords(), &line))
        .fold(0.0, f64::max)
        / s.delta)
}

/// Output of [`reduce_to_incidences`]: the lines `π_y(w_x·𝕃_y)`, the points
/// of `P_y` in `(y, t)` coordinates and the multiplier `C = 1 + A`.
#[derive(Debug, Clone)]
pub struct Reduction {
    pub points: PointSet,
    pub lines: LineFamily,
    pub multiplier: f64,
}

impl Reduction {
    pub fn scale(&self, delta: f64) -> Result<Scale> {
        Scale::new(delta, delta, self.multiplier)
    }
}

fn require_plane(ws: &[VerticalPlanePoint], plane: Plane, delta: f64) -> Result<()> {
    if let Some(w) = ws.iter().find(|w| w.plane != plane) {
        return Err(LabError::InvalidParameter(format!("{w:?} is not in {plane:?}")));
    }
    if let Some(w) = ws.iter().find(|w| !w.in_square()) {
        return Err(LabError::OutsideSquare { x: w.u, y: w.t });
    }
    let coords: Vec<[f64; 2]> = ws.iter().map(|w| [w.u, w.t]).collect();
    if let Some((i, j, distance)) = check_separation(&coords, delta).worst {
        return Err(LabError::Separation {
            i,
            j,
            distance,
            required: delta,
        });
    }
    Ok(())
}

/// Turns δ-separated `P_x ⊂ 𝕎_x ∩ Q0` and `P_y ⊂ 𝕎_y ∩ Q0` into a planar
/// incidence instance. If the preimage tubes of `B(w_x, δ)` and `B(w_y, δ)`
/// meet inside `[-1,1]³`, then `w_y` is `(1 + A)δ`-incident to the line of
/// `w_x`; `a_const` is that `A`.
pub fn reduce_to_incidences(
    p_x: &[VerticalPlanePoint],
    p_y: &[VerticalPlanePoint],
    delta: f64,
    a_const: f64,
) -> Result<Reduction> {
    require_plane(p_x, Plane::Wx, delta)?;
    require_plane(p_y, Plane::Wy, delta)?;
    let lines = p_x.iter().map(project_fiber_to_line).collect::<Result<Vec<_>>>()?;
    let points = p_y.iter().map(|w| w.coords()).collect();
    Ok(Reduction {
        // w ↦ line is the identity on (u, t), so separation transfers as is
        lines: LineFamily::trusted(lines, delta),
        points: PointSet::trusted(points, delta),
        multiplier: 1.0 + a_const,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &HPoint, b: &HPoint) -> bool {
        a.euclid_dist(b) <= 1e-15
    }

    #[test]
    fn product_examples() {
        let p = HPoint::new(0.3, -1.2, 2.0);
        assert_eq!(h_mul(&p, &HPoint::ORIGIN), p);
        assert_eq!(
            h_mul(&HPoint::new(1.0, 0.0, 0.0), &HPoint::new(0.0, 1.0, 0.0)),
            HPoint::new(1.0, 1.0, 0.5)
        );
        assert_eq!(
            h_mul(&HPoint::new(1.0, 1.0, 0.0), &HPoint::new(-1.0, -1.0, 0.0)),
            HPoint::ORIGIN
        );
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(h_inv(&HPoint::ORIGIN), HPoint::ORIGIN);
        let q = HPoint::new(1.0, 2.0, 3.0);
        assert_eq!(h_inv(&q), HPoint::new(-1.0, -2.0, -3.0));
        assert!(close(&h_mul(&h_inv(&q), &q), &HPoint::ORIGIN));
    }

    #[test]
    fn dilation_examples() {
        let p = HPoint::new(0.1, 0.2, 0.3);
        assert_eq!(dilate(1.0, &p).unwrap(), p);
        assert_eq!(
            dilate(2.0, &HPoint::new(1.0, 1.0, 1.0)).unwrap(),
            HPoint::new(2.0, 2.0, 4.0)
        );
        assert!(dilate(0.0, &p).is_err());
        assert!(dilate(-1.0, &p).is_err());
    }

    #[test]
    fn projection_examples() {
        assert_eq!(proj_x(&HPoint::new(0.4, 0.0, -0.2)), VerticalPlanePoint::wx(0.4, -0.2));
        assert_eq!(proj_y(&HPoint::new(1.0, 1.0, 0.0)), VerticalPlanePoint::wy(1.0, 0.5));
        assert_eq!(proj_x(&HPoint::new(1.0, 1.0, 0.0)), VerticalPlanePoint::wx(1.0, -0.5));
    }

    #[test]
    fn fiber_examples() {
        let f = horizontal_fiber(VerticalPlanePoint::wx(0.0, 0.0));
        assert_eq!(f(0.7), HPoint::new(0.0, 0.7, 0.0));
        let f = horizontal_fiber(VerticalPlanePoint::wx(1.0, 0.0));
        assert_eq!(f(1.0), HPoint::new(1.0, 1.0, 0.5));
        let w = VerticalPlanePoint::wx(0.3, -0.4);
        let f = horizontal_fiber(w);
        for i in -10..=10 {
            let q = f(i as f64 / 10.0);
            let back = proj_x(&q);
            assert!((back.u - w.u).abs() < 1e-15 && (back.t - w.t).abs() < 1e-15);
            assert!(dist_to_fiber(&q, &w) < 1e-15);
        }
    }

    #[test]
    fn fiber_to_line_examples() {
        assert_eq!(
            project_fiber_to_line(&VerticalPlanePoint::wx(0.0, 0.0)).unwrap(),
            LineAB::new(0.0, 0.0)
        );
        let w = VerticalPlanePoint::wx(0.5, 0.25);
        let l = project_fiber_to_line(&w).unwrap();
        assert_eq!(l, LineAB::new(0.5, 0.25));
        let f = horizontal_fiber(w);
        for i in -20..=20 {
            let y = i as f64 / 20.0;
            let img = proj_y(&f(y));
            assert!((img.t - l.eval(img.u)).abs() <= 1e-15);
        }
        assert!(project_fiber_to_line(&VerticalPlanePoint::wx(1.5, 0.0)).is_err());
    }

    #[test]
    fn fiber_to_line_for_wy() {
        let w = VerticalPlanePoint::wy(-0.6, 0.2);
        let l = project_fiber_to_line(&w).unwrap();
        let f = horizontal_fiber(w);
        for i in -20..=20 {
            let img = proj_x(&f(i as f64 / 20.0));
            assert!((img.t - l.eval(img.u)).abs() <= 1e-15);
        }
    }

    #[test]
    fn koranyi_examples() {
        assert_eq!(koranyi_norm(&HPoint::ORIGIN), 0.0);
        assert_eq!(koranyi_norm(&HPoint::new(1.0, 0.0, 0.0)), 1.0);
        let p = HPoint::new(0.3, -0.7, 0.2);
        let n3 = koranyi_norm(&dilate(3.0, &p).unwrap());
        assert!((n3 - 3.0 * koranyi_norm(&p)).abs() < 1e-14);
    }

    #[test]
    fn tube_constant_at_origin() {
        let s = Scale::delta(1.0 / 32.0).unwrap();
        let a1 = tube_inclusion_check(&VerticalPlanePoint::wx(0.0, 0.0), &s, 4000, 1);
        assert!(a1 >= 1.0 - 1e-12, "A1 = {a1}");
        assert!(a1 <= DEFAULT_A1);
        let a1y = tube_inclusion_check(&VerticalPlanePoint::wy(0.0, 0.0), &s, 4000, 1);
        assert!((1.0 - 1e-12..=DEFAULT_A1).contains(&a1y));
    }

    #[test]
    fn reduction_single_point() {
        let red = reduce_to_incidences(
            &[VerticalPlanePoint::wx(0.0, 0.0)],
            &[VerticalPlanePoint::wy(0.0, 0.0)],
            0.1,
            DEFAULT_A,
        )
        .unwrap();
        assert_eq!(red.lines.lines(), &[LineAB::new(0.0, 0.0)]);
        assert_eq!(red.multiplier, 1.0 + DEFAULT_A);
    }

    #[test]
    fn reduction_rejects_bad_inputs() {
        let wx = [VerticalPlanePoint::wx(0.0, 0.0), VerticalPlanePoint::wx(0.01, 0.0)];
        assert!(matches!(
            reduce_to_incidences(&wx, &[], 0.1, 1.0),
            Err(LabError::Separation { .. })
        ));
        assert!(reduce_to_incidences(&[VerticalPlanePoint::wy(0.0, 0.0)], &[], 0.1, 1.0).is_err());
    }
}
