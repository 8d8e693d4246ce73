//! Geometry of the unit sphere, the inscribed spheroid and the tangent
//! subsphere family.
//!
//! Points of `S^{n-1}` live in `R^n`; projected points and the subsphere
//! directions `psi`, `omega` live in `R^{n-1}`. Coordinates are stored inline
//! (no heap), which caps the ambient dimension at [`MAX_DIM`].

use arrayvec::ArrayVec;

use crate::math::*;
use crate::{Error, Result};

/// Largest supported ambient dimension `n`.
pub const MAX_DIM: usize = 8;

/// Inline coordinate vector.
pub type Coords = ArrayVec<f64, MAX_DIM>;

/// `1 - x_n` below this is treated as the north pole.
pub const NORTH_POLE_GUARD: f64 = 1e-14;

const UNIT_TOLERANCE: f64 = 1e-12;

/// Dimension `n` and shape of the spheroid `Σ_λ`.
///
/// `tanh λ` is the primary parameter. `tanh λ = 1` is the slice limit
/// `λ = ∞`, where the spheroid collapses onto its axis and every subsphere
/// passes through the south pole.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpheroidGeometry {
    n: usize,
    tanh: f64,
    cosh: f64,
    sinh: f64,
}

impl SpheroidGeometry {
    /// Spheroid with shape parameter `lambda > 0`; `f64::INFINITY` selects the
    /// slice limit.
    pub fn new(n: usize, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) {
            return Err(Error::Domain { what: "lambda", value: lambda });
        }
        if lambda.is_infinite() {
            return Self::slice(n);
        }
        let t = lambda.tanh();
        if t >= 1.0 {
            // tanh saturates near λ ≈ 19; use the explicit limit instead
            return Err(Error::Domain { what: "lambda (indistinguishable from inf)", value: lambda });
        }
        Self::from_tanh(n, t)
    }

    /// Spheroid from `tanh λ ∈ (0, 1]`.
    pub fn from_tanh(n: usize, tanh: f64) -> Result<Self> {
        check_dimension(n)?;
        if !(tanh > 0.0 && tanh <= 1.0) {
            return Err(Error::Domain { what: "tanh(lambda)", value: tanh });
        }
        if tanh == 1.0 {
            return Self::slice(n);
        }
        let cosh = 1.0 / ((1.0 - tanh) * (1.0 + tanh)).sqrt();
        Ok(Self { n, tanh, cosh, sinh: tanh * cosh })
    }

    /// The `λ = ∞` limit: subspheres through `-e_n`.
    pub fn slice(n: usize) -> Result<Self> {
        check_dimension(n)?;
        Ok(Self { n, tanh: 1.0, cosh: f64::INFINITY, sinh: f64::INFINITY })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn tanh(&self) -> f64 {
        self.tanh
    }

    /// `cosh λ`; infinite in the slice limit.
    pub fn cosh(&self) -> f64 {
        self.cosh
    }

    /// `sinh λ`; infinite in the slice limit.
    pub fn sinh(&self) -> f64 {
        self.sinh
    }

    pub fn is_slice(&self) -> bool {
        self.tanh == 1.0
    }

    pub fn lambda(&self) -> f64 {
        if self.is_slice() {
            f64::INFINITY
        } else {
            0.5 * ((1.0 + self.tanh) / (1.0 - self.tanh)).ln()
        }
    }

    /// Point of `Σ_λ` in the meridian plane spanned by the unit direction
    /// `axis ∈ R^{n-1}` and `e_n`, at spheroid angle `alpha`.
    pub fn spheroid_point(&self, axis: &[f64], alpha: f64) -> Result<Coords> {
        self.require_finite()?;
        let (s, c) = alpha.sin_cos();
        let mut x: Coords = axis.iter().map(|a| a * c / self.cosh).collect();
        x.push(s);
        Ok(x)
    }

    fn require_finite(&self) -> Result<()> {
        if self.is_slice() {
            Err(Error::Domain { what: "lambda (finite spheroid required)", value: f64::INFINITY })
        } else {
            Ok(())
        }
    }
}

fn check_dimension(n: usize) -> Result<()> {
    if (3..=MAX_DIM).contains(&n) {
        Ok(())
    } else {
        Err(Error::UnsupportedDimension(n))
    }
}

/// A point of `S^{n-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpherePoint {
    coords: Coords,
}

impl SpherePoint {
    pub fn new(coords: &[f64]) -> Result<Self> {
        check_dimension(coords.len())?;
        let norm = norm_sq(coords).sqrt();
        if (norm - 1.0).abs() > UNIT_TOLERANCE {
            return Err(Error::Domain { what: "|x| for a sphere point", value: norm });
        }
        Ok(Self { coords: coords.iter().copied().collect() })
    }

    /// Radially projects a nonzero vector onto the sphere.
    pub fn normalized(coords: &[f64]) -> Result<Self> {
        check_dimension(coords.len())?;
        let norm = norm_sq(coords).sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::Domain { what: "|x| to normalize", value: norm });
        }
        Ok(Self { coords: coords.iter().map(|x| x / norm).collect() })
    }

    pub fn south_pole(n: usize) -> Result<Self> {
        Self::pole(n, -1.0)
    }

    pub fn north_pole(n: usize) -> Result<Self> {
        Self::pole(n, 1.0)
    }

    fn pole(n: usize, sign: f64) -> Result<Self> {
        check_dimension(n)?;
        let mut coords: Coords = (0..n - 1).map(|_| 0.0).collect();
        coords.push(sign);
        Ok(Self { coords })
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    /// The last coordinate `x_n`.
    pub fn height(&self) -> f64 {
        self.coords[self.coords.len() - 1]
    }
}

/// One subsphere `S_{ψ,c} = Λ^{-1}(cψ + c tanh λ · S^{n-2})`.
#[derive(Debug, Clone, PartialEq)]
pub struct SubsphereCoord {
    psi: Coords,
    c: f64,
}

impl SubsphereCoord {
    pub fn new(psi: &[f64], c: f64) -> Result<Self> {
        let norm = norm_sq(psi).sqrt();
        if psi.len() + 1 > MAX_DIM || psi.len() < 2 {
            return Err(Error::UnsupportedDimension(psi.len() + 1));
        }
        if (norm - 1.0).abs() > UNIT_TOLERANCE {
            return Err(Error::Domain { what: "|psi|", value: norm });
        }
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::Domain { what: "c", value: c });
        }
        Ok(Self { psi: psi.iter().copied().collect(), c })
    }

    /// Subsphere from its tangent-plane angle `theta` (finite spheroid only).
    pub fn from_theta(psi: &[f64], theta: f64, geom: &SpheroidGeometry) -> Result<Self> {
        Self::new(psi, theta_to_c(theta, geom)?)
    }

    pub fn psi(&self) -> &[f64] {
        &self.psi
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn theta(&self, geom: &SpheroidGeometry) -> Result<f64> {
        c_to_theta(self.c, geom)
    }

    /// Unit normal `((cos θ)ψ, sin θ)` of the cutting hyperplane.
    pub fn normal(&self, geom: &SpheroidGeometry) -> Result<Coords> {
        let (s, c) = self.theta(geom)?.sin_cos();
        let mut v: Coords = self.psi.iter().map(|p| p * c).collect();
        v.push(s);
        Ok(v)
    }
}

/// `Λ(x) = (x_1, ..., x_{n-1}) / (1 - x_n)`.
pub fn stereo_project(x: &SpherePoint) -> Result<Coords> {
    let gap = 1.0 - x.height();
    if gap <= NORTH_POLE_GUARD {
        return Err(Error::NorthPoleSingular { gap });
    }
    let k = x.dim() - 1;
    Ok(x.coords[..k].iter().map(|v| v / gap).collect())
}

/// `Λ^{-1}(y) = (2y, |y|^2 - 1) / (1 + |y|^2)`.
pub fn stereo_unproject(y: &[f64]) -> SpherePoint {
    let r2 = norm_sq(y);
    let d = 1.0 + r2;
    let mut coords: Coords = y.iter().map(|v| 2.0 * v / d).collect();
    coords.push((r2 - 1.0) / d);
    SpherePoint { coords }
}

/// Scale `c` of the subsphere whose tangent plane has normal angle `theta`.
pub fn theta_to_c(theta: f64, geom: &SpheroidGeometry) -> Result<f64> {
    geom.require_finite()?;
    if !(theta.abs() < 0.5 * PI) {
        return Err(Error::Domain { what: "theta", value: theta });
    }
    let (s, co) = theta.sin_cos();
    let root = (1.0 + geom.sinh * geom.sinh * s * s).sqrt();
    // The two forms are equal; each avoids cancellation on one side of θ = 0.
    let c = if theta >= 0.0 {
        geom.cosh * (root + geom.cosh * s) / co
    } else {
        geom.cosh * co / (root - geom.cosh * s)
    };
    Ok(c)
}

/// Tangent-plane normal angle of the subsphere with scale `c`.
pub fn c_to_theta(c: f64, geom: &SpheroidGeometry) -> Result<f64> {
    geom.require_finite()?;
    if !(c > 0.0) {
        return Err(Error::Domain { what: "c", value: c });
    }
    let ch2 = geom.cosh * geom.cosh;
    Ok(((c * c - ch2) / (2.0 * c * ch2)).atan())
}

/// Distance from the origin of the hyperplane tangent to `Σ_λ` with normal
/// angle `theta`: `√(1 + sinh²λ sin²θ) / cosh λ`.
pub fn tangent_distance(theta: f64, geom: &SpheroidGeometry) -> Result<f64> {
    geom.require_finite()?;
    if !(theta.abs() <= 0.5 * PI) {
        return Err(Error::Domain { what: "theta", value: theta });
    }
    let s = theta.sin();
    Ok((1.0 + geom.sinh * geom.sinh * s * s).sqrt() / geom.cosh)
}

/// Quarter discriminant of the line–ellipse intersection quadratic in the
/// meridian plane; zero exactly when the plane at `distance` with normal
/// angle `theta` is tangent to the spheroid.
pub fn tangency_discriminant(theta: f64, distance: f64, geom: &SpheroidGeometry) -> f64 {
    let (s, c) = theta.sin_cos();
    let ch2 = geom.cosh * geom.cosh;
    distance * distance * c * c - (s * s * ch2 + c * c) * (distance * distance - s * s)
}

/// `Λ^{-1}(cψ + c tanh λ · ω)`.
pub fn subsphere_point(coord: &SubsphereCoord, geom: &SpheroidGeometry, omega: &[f64]) -> SpherePoint {
    debug_assert_eq!(omega.len(), coord.psi.len());
    let ct = coord.c * geom.tanh;
    let y: Coords = coord.psi.iter().zip(omega).map(|(p, w)| coord.c * p + ct * w).collect();
    stereo_unproject(&y)
}

/// Density of the subsphere volume element with respect to `dω` on `S^{n-2}`:
/// `(2c tanh λ)^{n-2} / (1 + c²(1 + tanh²λ + 2⟨ω,ψ⟩ tanh λ))^{n-2}`.
pub fn measure_factor(coord: &SubsphereCoord, geom: &SpheroidGeometry, omega: &[f64]) -> f64 {
    let t = geom.tanh;
    let c = coord.c;
    let k = coord.psi.len() as i32 - 1;
    let cos = dot(omega, &coord.psi);
    let denom = 1.0 + c * c * (1.0 + t * t + 2.0 * cos * t);
    (2.0 * c * t / denom).powi(k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn geom(lambda: f64) -> SpheroidGeometry {
        SpheroidGeometry::new(3, lambda).unwrap()
    }

    #[test]
    fn projection_examples() {
        let south = SpherePoint::south_pole(3).unwrap();
        assert_eq!(stereo_project(&south).unwrap().as_slice(), &[0.0, 0.0]);

        let e1 = SpherePoint::new(&[1.0, 0.0, 0.0]).unwrap();
        assert_eq!(stereo_project(&e1).unwrap().as_slice(), &[1.0, 0.0]);

        let x = SpherePoint::new(&[3f64.sqrt() / 2.0, 0.0, -0.5]).unwrap();
        let y = stereo_project(&x).unwrap();
        assert_relative_eq!(y[0], 3f64.sqrt() / 3.0, epsilon = 1e-15);
        assert_eq!(y[1], 0.0);

        let north = SpherePoint::north_pole(3).unwrap();
        assert!(matches!(stereo_project(&north), Err(Error::NorthPoleSingular { .. })));
    }

    #[test]
    fn unprojection_examples() {
        assert_eq!(stereo_unproject(&[0.0, 0.0]).coords(), &[0.0, 0.0, -1.0]);
        assert_eq!(stereo_unproject(&[1.0, 0.0]).coords(), &[1.0, 0.0, 0.0]);
        let x = stereo_unproject(&[3.0, 4.0]);
        for (got, want) in x.coords().iter().zip([6.0 / 26.0, 8.0 / 26.0, 24.0 / 26.0]) {
            assert_relative_eq!(*got, want, epsilon = 1e-15);
        }
        // 6/26 = 3/13, 24/26 = 12/13
        assert_relative_eq!(x.coords()[0], 3.0 / 13.0, epsilon = 1e-15);
    }

    #[test]
    fn theta_c_examples() {
        let g = geom(1.3);
        assert_relative_eq!(theta_to_c(0.0, &g).unwrap(), g.cosh(), max_relative = 1e-15);
        assert_eq!(c_to_theta(g.cosh(), &g).unwrap(), 0.0);
        let back = c_to_theta(theta_to_c(0.3, &g).unwrap(), &g).unwrap();
        assert!((back - 0.3).abs() < 1e-12);

        assert!(c_to_theta(1e-12, &g).unwrap() < -0.5 * PI + 1e-9);
        assert!(c_to_theta(1e12, &g).unwrap() > 0.5 * PI - 1e-9);

        assert!(theta_to_c(0.5 * PI, &g).is_err());
        assert!(theta_to_c(-2.0, &g).is_err());
        assert!(c_to_theta(0.0, &g).is_err());
        assert!(c_to_theta(-1.0, &g).is_err());
        assert!(SpheroidGeometry::new(3, 0.0).is_err());
    }

    #[test]
    fn hand_checked_theta_to_c() {
        // cosh 1 cos 0.3 / (√(1 + sinh²1 sin²0.3) − cosh 1 sin 0.3)
        let g = geom(1.0);
        let c = theta_to_c(0.3, &g).unwrap();
        assert!((c - 2.446_419_023_351_677).abs() < 1e-13, "{c}");
    }

    #[test]
    fn theta_to_c_is_increasing_with_limits() {
        let g = geom(0.8);
        let mut prev = 0.0;
        for k in 1..200 {
            let theta = -0.5 * PI + k as f64 * PI / 200.0;
            let c = theta_to_c(theta, &g).unwrap();
            assert!(c > prev);
            prev = c;
        }
        assert!(theta_to_c(-0.5 * PI + 1e-9, &g).unwrap() < 1e-8);
        assert!(theta_to_c(0.5 * PI - 1e-9, &g).unwrap() > 1e8);
    }

    #[test]
    fn tangent_distance_examples() {
        let g = geom(2.0);
        assert_relative_eq!(tangent_distance(0.5 * PI, &g).unwrap(), 1.0, epsilon = 1e-15);
        assert_relative_eq!(tangent_distance(-0.5 * PI, &g).unwrap(), 1.0, epsilon = 1e-15);
        assert_relative_eq!(tangent_distance(0.0, &g).unwrap(), 1.0 / g.cosh(), epsilon = 1e-15);
        for k in 0..=50 {
            let d = tangent_distance(-1.5 + 0.06 * k as f64, &g).unwrap();
            assert!(d >= 1.0 / g.cosh() - 1e-15 && d <= 1.0 + 1e-15);
        }
    }

    #[test]
    fn measure_factor_example() {
        let g = SpheroidGeometry::from_tanh(3, 0.5).unwrap();
        let coord = SubsphereCoord::new(&[1.0, 0.0], 1.0).unwrap();
        assert_relative_eq!(measure_factor(&coord, &g, &[0.0, 1.0]), 1.0 / 2.25, epsilon = 1e-15);
    }

    #[test]
    fn collinear_subsphere_points() {
        let g = geom(0.7);
        let psi = [0.6, 0.8];
        let coord = SubsphereCoord::new(&psi, 1.7).unwrap();
        let t = g.tanh();
        let far = subsphere_point(&coord, &g, &psi);
        let want = stereo_unproject(&[1.7 * (1.0 + t) * 0.6, 1.7 * (1.0 + t) * 0.8]);
        for (a, b) in far.coords().iter().zip(want.coords()) {
            assert!((a - b).abs() < 1e-15);
        }
        let near = subsphere_point(&coord, &g, &[-0.6, -0.8]);
        let want = stereo_unproject(&[1.7 * (1.0 - t) * 0.6, 1.7 * (1.0 - t) * 0.8]);
        for (a, b) in near.coords().iter().zip(want.coords()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn slice_limit_subspheres_contain_south_pole() {
        let g = SpheroidGeometry::new(4, f64::INFINITY).unwrap();
        assert!(g.is_slice());
        assert_eq!(g.tanh(), 1.0);
        let psi = [0.0, 0.6, 0.8];
        let coord = SubsphereCoord::new(&psi, 3.2).unwrap();
        let x = subsphere_point(&coord, &g, &[0.0, -0.6, -0.8]);
        assert_eq!(x.coords(), &[0.0, 0.0, 0.0, -1.0]);
        assert!(theta_to_c(0.1, &g).is_err());
    }

    #[test]
    fn spheroid_is_inside_the_sphere_off_the_poles() {
        for lambda in [0.2, 1.0, 3.0] {
            let g = SpheroidGeometry::new(3, lambda).unwrap();
            for k in 1..100 {
                let alpha = -0.5 * PI + k as f64 * PI / 100.0;
                let x = g.spheroid_point(&[0.6, 0.8], alpha).unwrap();
                let residual = x[2] * x[2] + (x[0] * x[0] + x[1] * x[1]) * g.cosh() * g.cosh() - 1.0;
                assert!(residual.abs() < 1e-13);
                assert!(norm_sq(&x) < 1.0);
            }
        }
    }

    fn unit(v: &[f64]) -> Coords {
        let n = norm_sq(v).sqrt();
        v.iter().map(|x| x / n).collect()
    }

    proptest! {
        #[test]
        fn projection_round_trips(y in proptest::collection::vec(-50.0f64..50.0, 2..5)) {
            let x = stereo_unproject(&y);
            prop_assert!((norm_sq(x.coords()).sqrt() - 1.0).abs() <= 1e-12);
            let back = stereo_project(&x).unwrap();
            let scale = 1.0 + norm_sq(&y);
            for (a, b) in back.iter().zip(&y) {
                prop_assert!((a - b).abs() <= 1e-12 * scale);
            }
        }

        #[test]
        fn theta_c_pair_inverts(theta in (-0.5 * PI + 0.01)..(0.5 * PI - 0.01), lambda in 0.2f64..3.0) {
            let g = geom(lambda);
            let back = c_to_theta(theta_to_c(theta, &g).unwrap(), &g).unwrap();
            prop_assert!((back - theta).abs() <= 1e-12);
        }

        #[test]
        fn subsphere_points_lie_on_tangent_plane(
            a in 0.0..(2.0 * PI),
            b in 0.0..(2.0 * PI),
            theta in -1.4f64..1.4,
            lambda in 0.2f64..3.0,
        ) {
            let g = geom(lambda);
            let psi = [a.cos(), a.sin()];
            let coord = SubsphereCoord::from_theta(&psi, theta, &g).unwrap();
            let normal = coord.normal(&g).unwrap();
            let t = tangent_distance(theta, &g).unwrap();
            let x = subsphere_point(&coord, &g, &unit(&[b.cos(), b.sin()]));
            prop_assert!((norm_sq(x.coords()).sqrt() - 1.0).abs() <= 1e-12);
            prop_assert!((dot(x.coords(), &normal) - t).abs() <= 1e-10);
            prop_assert!(tangency_discriminant(theta, t, &g).abs() <= 1e-10);
        }
    }
}
