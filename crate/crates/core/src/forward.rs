//! The forward spherical transform and sinogram assembly.
//!
//! `(Sf)(S_{ψ,c}) = ∫_{S^{n-2}} f(Λ^{-1}(cψ + c tanh λ · ω)) μ(ω) dω` with `μ`
//! the density from [`measure_factor`].
//!
//! `μ` depends on `ω` only through `⟨ω, ψ⟩` and concentrates near `ω = -ψ`
//! when `c` is large (width about `1/c`). The quadrature nodes are therefore
//! pulled through the conformal automorphism of `S^{n-2}` that fixes `±ψ` and
//! maps polar angle `β` (from `-ψ`) to `γ` with
//! `tan(γ/2) = k tan(β/2)`, `k = √((A - B)/(A + B))`,
//! `A = 1 + c²(1 + tanh²λ)`, `B = 2c² tanh λ`. Its Jacobian
//! `(k / (cos²(β/2) + k² sin²(β/2)))^{n-2}` cancels the variation of `μ`
//! exactly, so the rule samples the subsphere uniformly in its intrinsic
//! area for every `c`, including the slice limit.

use alloc::vec::Vec;

use crate::geometry::{measure_factor, stereo_unproject, Coords, SpherePoint, SpheroidGeometry, SubsphereCoord};
use crate::grid::LogGrid;
use crate::harmonics::SphereQuadrature;
use crate::math::*;
use crate::{Error, Result};

/// A real function on `S^{n-1}`.
pub trait SphereFunction: Sync {
    fn eval(&self, x: &SpherePoint) -> f64;

    /// `f(Λ^{-1}(y))`. Override when the function is naturally expressed in
    /// projected coordinates.
    fn eval_projected(&self, y: &[f64]) -> f64 {
        self.eval(&stereo_unproject(y))
    }

    fn continuous_at_north_pole(&self) -> bool {
        true
    }
}

impl<F: Fn(&SpherePoint) -> f64 + Sync> SphereFunction for F {
    fn eval(&self, x: &SpherePoint) -> f64 {
        self(x)
    }
}

/// Above this `c (1 + tanh λ)` the subsphere reaches within rounding of the
/// north pole.
const MAX_PROJECTED_RADIUS: f64 = 1e14;

/// `(Sf)(S_{ψ,c})` by the rule `quad` on `S^{n-2}`.
pub fn spherical_transform<F: SphereFunction + ?Sized>(
    f: &F,
    coord: &SubsphereCoord,
    geom: &SpheroidGeometry,
    quad: &SphereQuadrature,
) -> Result<f64> {
    let psi = coord.psi();
    if quad.n() != psi.len() + 1 || geom.n() != quad.n() {
        return Err(Error::GridMismatch("quadrature, geometry and psi disagree on the dimension"));
    }
    let c = coord.c();
    let t = geom.tanh();
    let reach = c * (1.0 + t);
    if reach > MAX_PROJECTED_RADIUS {
        return Err(Error::NorthPoleSingular { gap: 2.0 / (1.0 + reach * reach) });
    }
    let k = conformal_ratio(c, t);
    let power = psi.len() as i32 - 1;
    let ct = c * t;
    let mut acc = 0.0;
    let mut omega = Coords::new();
    let mut y = Coords::new();
    for (q, &w) in quad.nodes().zip(quad.weights()) {
        // p = cos β, polar angle measured from -ψ
        let p = -dot(q, psi);
        let cos2 = 0.5 * (1.0 + p);
        let sin2 = 0.5 * (1.0 - p);
        let d = cos2 + k * k * sin2;
        let cos_gamma = (cos2 - k * k * sin2) / d;
        let scale = k / d;
        omega.clear();
        y.clear();
        for (&qi, &pi) in q.iter().zip(psi) {
            // ω = -cos γ ψ + (sin γ / sin β) (q + p ψ)
            let oi = -cos_gamma * pi + scale * (qi + p * pi);
            omega.push(oi);
            y.push(c * pi + ct * oi);
        }
        let jacobian = scale.powi(power);
        let mu = measure_factor(coord, geom, &omega);
        acc += w * f.eval_projected(&y) * mu * jacobian;
    }
    Ok(acc)
}

fn conformal_ratio(c: f64, t: f64) -> f64 {
    let c2 = c * c;
    let lo = 1.0 + c2 * (1.0 - t) * (1.0 - t);
    let hi = 1.0 + c2 * (1.0 + t) * (1.0 + t);
    (lo / hi).sqrt()
}

/// Transform values on the product of a `ψ` rule and a log-uniform `c` grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Sinogram {
    geometry: SpheroidGeometry,
    psi_grid: SphereQuadrature,
    c_grid: LogGrid,
    values: Vec<f64>,
}

impl Sinogram {
    /// `values` is `ψ`-major: entry `i * c_count + j` belongs to `(ψ_i, c_j)`.
    pub fn new(geometry: SpheroidGeometry, psi_grid: SphereQuadrature, c_grid: LogGrid, values: Vec<f64>) -> Result<Self> {
        if psi_grid.n() != geometry.n() {
            return Err(Error::GridMismatch("psi grid dimension differs from the geometry"));
        }
        if values.len() != psi_grid.len() * c_grid.len() {
            return Err(Error::GridMismatch("sinogram value count differs from the grid product"));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Domain { what: "sinogram value", value: *v });
        }
        Ok(Self { geometry, psi_grid, c_grid, values })
    }

    pub fn geometry(&self) -> &SpheroidGeometry {
        &self.geometry
    }

    pub fn psi_grid(&self) -> &SphereQuadrature {
        &self.psi_grid
    }

    pub fn c_grid(&self) -> &LogGrid {
        &self.c_grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, psi_index: usize, c_index: usize) -> f64 {
        self.values[psi_index * self.c_grid.len() + c_index]
    }

    pub fn row(&self, psi_index: usize) -> &[f64] {
        let w = self.c_grid.len();
        &self.values[psi_index * w..(psi_index + 1) * w]
    }
}

/// Evaluates [`spherical_transform`] on every `(ψ_i, c_j)`. Rows are
/// computed in parallel with the `rayon` feature; results do not depend on
/// scheduling.
pub fn make_sinogram<F: SphereFunction + ?Sized>(
    f: &F,
    geom: &SpheroidGeometry,
    psi_grid: &SphereQuadrature,
    c_grid: &LogGrid,
    quad: &SphereQuadrature,
) -> Result<Sinogram> {
    let width = c_grid.len();
    let row = |i: usize| -> Result<Vec<f64>> {
        let psi = psi_grid.node(i);
        (0..width)
            .map(|j| {
                let coord = SubsphereCoord::new(psi, c_grid.at(j))?;
                spherical_transform(f, &coord, geom, quad)
            })
            .collect()
    };
    #[cfg(feature = "rayon")]
    let rows: Vec<Result<Vec<f64>>> = {
        use rayon::prelude::*;
        (0..psi_grid.len()).into_par_iter().map(row).collect()
    };
    #[cfg(not(feature = "rayon"))]
    let rows: Vec<Result<Vec<f64>>> = (0..psi_grid.len()).map(row).collect();
    let mut values = Vec::with_capacity(psi_grid.len() * width);
    for r in rows {
        values.extend(r?);
    }
    Sinogram::new(*geom, psi_grid.clone(), *c_grid, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{c_to_theta, tangent_distance};
    use crate::harmonics::sphere_quadrature;

    fn circumference(c: f64, geom: &SpheroidGeometry) -> f64 {
        let t = tangent_distance(c_to_theta(c, geom).unwrap(), geom).unwrap();
        TAU * ((1.0 - t) * (1.0 + t)).sqrt()
    }

    #[test]
    fn constant_function_gives_circumference() {
        let quad = sphere_quadrature(3, 16).unwrap();
        let one = |_: &SpherePoint| 1.0;
        for lambda in [0.3, 1.0, 2.5] {
            let geom = SpheroidGeometry::new(3, lambda).unwrap();
            for c in [1e-3, 0.2, 1.0, 7.0, 1e3] {
                let coord = SubsphereCoord::new(&[0.6, 0.8], c).unwrap();
                let got = spherical_transform(&one, &coord, &geom, &quad).unwrap();
                let want = circumference(c, &geom);
                // the oracle loses digits to 1 - t² at small c
                assert!((got - want).abs() < 1e-9 * want, "λ={lambda} c={c}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn height_function_matches_circle_center() {
        let geom = SpheroidGeometry::new(3, 0.8).unwrap();
        let quad = sphere_quadrature(3, 64).unwrap();
        let height = |x: &SpherePoint| x.height();
        for c in [0.1, 1.0, 4.0] {
            let coord = SubsphereCoord::new(&[1.0, 0.0], c).unwrap();
            let theta = c_to_theta(c, &geom).unwrap();
            let t = tangent_distance(theta, &geom).unwrap();
            let got = spherical_transform(&height, &coord, &geom, &quad).unwrap();
            let want = circumference(c, &geom) * t * theta.sin();
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
    }

    #[test]
    fn odd_function_integrates_to_zero() {
        let geom = SpheroidGeometry::new(4, 1.2).unwrap();
        let quad = sphere_quadrature(4, 12).unwrap();
        // odd under reflection across span(ψ, e_n) with ψ = e_1
        let odd = |x: &SpherePoint| x.coords()[1] * (1.0 + x.coords()[0]).exp();
        let coord = SubsphereCoord::new(&[1.0, 0.0, 0.0], 0.7).unwrap();
        assert!(spherical_transform(&odd, &coord, &geom, &quad).unwrap().abs() < 1e-12);
    }

    #[test]
    fn symmetric_function_gives_psi_independent_rows() {
        let geom = SpheroidGeometry::slice(3).unwrap();
        let psi = sphere_quadrature(3, 8).unwrap();
        let quad = sphere_quadrature(3, 32).unwrap();
        let grid = LogGrid::new(0.1, 10.0, 5).unwrap();
        let f = |x: &SpherePoint| (2.0 * x.height()).cos();
        let sino = make_sinogram(&f, &geom, &psi, &grid, &quad).unwrap();
        for j in 0..grid.len() {
            for i in 1..psi.len() {
                assert!((sino.value(i, j) - sino.value(0, j)).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn overflowing_scale_is_reported() {
        let geom = SpheroidGeometry::slice(3).unwrap();
        let quad = sphere_quadrature(3, 8).unwrap();
        let coord = SubsphereCoord::new(&[1.0, 0.0], 1e15).unwrap();
        let f = |_: &SpherePoint| 1.0;
        assert!(matches!(spherical_transform(&f, &coord, &geom, &quad), Err(Error::NorthPoleSingular { .. })));
    }
}
