//! Gegenbauer polynomials, real orthonormal harmonics on `S^{n-2}` for
//! `n ∈ {3, 4}`, and quadrature rules on those spheres.

use alloc::vec::Vec;

use crate::math::*;
use crate::quadrature::GaussLegendre;
use crate::{Error, Result};

/// Order `alpha = (n - 3) / 2` and degree of a Gegenbauer polynomial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GegenbauerOrder {
    pub alpha: f64,
    pub degree: usize,
}

impl GegenbauerOrder {
    pub fn new(alpha: f64, degree: usize) -> Self {
        Self { alpha, degree }
    }

    /// The order attached to the ambient dimension `n`.
    pub fn for_dimension(n: usize, degree: usize) -> Self {
        Self { alpha: 0.5 * (n as f64 - 3.0), degree }
    }
}

/// `C_m^α(t)`. For `α = 0` the recurrence degenerates and the Chebyshev
/// polynomial `T_m(t) = cos(m arccos t)` takes its place.
pub fn gegenbauer(order: GegenbauerOrder, t: f64) -> Result<f64> {
    if !(t.abs() <= 1.0 + 1e-12) {
        return Err(Error::Domain { what: "Gegenbauer argument", value: t });
    }
    if order.alpha < 0.0 {
        return Err(Error::Domain { what: "Gegenbauer order", value: order.alpha });
    }
    let t = t.clamp(-1.0, 1.0);
    Ok(if order.alpha == 0.0 {
        chebyshev(order.degree, t)
    } else {
        gegenbauer_recurrence(order.alpha, order.degree, t)
    })
}

fn chebyshev(m: usize, t: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, t);
    if m == 0 {
        return prev;
    }
    for _ in 1..m {
        let next = 2.0 * t * cur - prev;
        prev = cur;
        cur = next;
    }
    cur
}

fn gegenbauer_recurrence(alpha: f64, m: usize, t: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, 2.0 * alpha * t);
    if m == 0 {
        return prev;
    }
    for k in 1..m {
        let kf = k as f64;
        let next = (2.0 * (kf + alpha) * t * cur - (kf + 2.0 * alpha - 1.0) * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// `C_m^α(1) = Γ(m + 2α) / (m! Γ(2α))`, as a product.
fn gegenbauer_at_one(alpha: f64, m: usize) -> f64 {
    (0..m).map(|k| (2.0 * alpha + k as f64) / (k as f64 + 1.0)).product()
}

/// Zonal polynomial of degree `m` on `S^{n-2}`: `C_m^α(t) / C_m^α(1)` with
/// `α = (n - 3)/2`, and `T_m(t)` for `n = 3`. Equals `1` at `t = 1`.
///
/// This is the factor the Funk–Hecke average of a degree-`m` harmonic picks
/// up. For `n = 3, 4` it coincides with the unnormalized `C_m^α`.
pub fn zonal(n: usize, m: usize, t: f64) -> f64 {
    let t = t.clamp(-1.0, 1.0);
    if n == 3 {
        chebyshev(m, t)
    } else {
        let alpha = 0.5 * (n as f64 - 3.0);
        gegenbauer_recurrence(alpha, m, t) / gegenbauer_at_one(alpha, m)
    }
}

/// Maximum deviation of the Gram matrix `∫ Ĉ_m Ĉ_k (1-t²)^{α-1/2} dt`,
/// `m, k ≤ order.degree`, from `diag(2^{2α-1} Γ²(α+½) m! / ((m+α) Γ(m+2α)))`.
///
/// Those diagonal constants are the norms of the polynomials normalized to
/// `Ĉ_m(1) = 1` (the [`zonal`] family), not of the classical `C_m^α`; the two
/// agree only for `α = 1/2`. `Ĉ_m` is evaluated through the three-term
/// recurrence, so this checks the recurrence as well.
///
/// Diagonal deviations are relative to the expected value when it exceeds 1.
/// The integrals are taken in `t = cos θ`, where the weight becomes
/// `sin^{2α} θ` and Gauss–Legendre converges spectrally.
pub fn gegenbauer_norm_check(order: GegenbauerOrder) -> Result<f64> {
    let alpha = order.alpha;
    if !(alpha > 0.0) {
        return Err(Error::Domain { what: "Gegenbauer order (must be > 0)", value: alpha });
    }
    let top = order.degree;
    let rule = GaussLegendre::new(4 * top + 64);
    let mut table = alloc::vec![0.0; (top + 1) * (top + 1)];
    for (theta, w) in rule.mapped(0.0, PI) {
        let t = theta.cos();
        let weight = w * theta.sin().powf(2.0 * alpha);
        let values: Vec<f64> =
            (0..=top).map(|m| gegenbauer_recurrence(alpha, m, t) / gegenbauer_at_one(alpha, m)).collect();
        for m in 0..=top {
            for k in 0..=top {
                table[m * (top + 1) + k] += weight * values[m] * values[k];
            }
        }
    }
    let mut worst: f64 = 0.0;
    for m in 0..=top {
        for k in 0..=top {
            let got = table[m * (top + 1) + k];
            let dev = if m == k {
                let expected = gegenbauer_norm(alpha, m);
                (got - expected).abs() / expected.max(1.0)
            } else {
                got.abs()
            };
            worst = worst.max(dev);
        }
    }
    Ok(worst)
}

/// `2^{2α-1} Γ²(α+½) m! / ((m+α) Γ(m+2α))`.
pub fn gegenbauer_norm(alpha: f64, m: usize) -> f64 {
    let g = gamma(alpha + 0.5);
    let factorial = gamma(m as f64 + 1.0);
    2f64.powf(2.0 * alpha - 1.0) * g * g * factorial / ((m as f64 + alpha) * gamma(m as f64 + 2.0 * alpha))
}

/// Degree `m` and index `1 ≤ l ≤ d_m` of a real harmonic on `S^{n-2}`.
///
/// For `n = 3` the degree-`m` space on the circle is spanned by `cos mφ`
/// (`l = 1`) and `sin mφ` (`l = 2`). For `n = 4`, `l = 1..=2m+1` maps to the
/// azimuthal order `k = l - m - 1 ∈ [-m, m]`, with `k < 0` the sine branch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HarmonicIndex {
    pub m: usize,
    pub l: usize,
}

impl HarmonicIndex {
    pub fn new(m: usize, l: usize) -> Self {
        Self { m, l }
    }

    /// Checked constructor.
    pub fn checked(n: usize, m: usize, l: usize) -> Result<Self> {
        let d = Self::space_dimension(n, m)?;
        if l == 0 || l > d {
            return Err(Error::InvalidIndex { n, m, l });
        }
        Ok(Self { m, l })
    }

    /// `d_m`, the dimension of the degree-`m` harmonic space on `S^{n-2}`.
    pub fn space_dimension(n: usize, m: usize) -> Result<usize> {
        match n {
            3 => Ok(if m == 0 { 1 } else { 2 }),
            4 => Ok(2 * m + 1),
            _ => Err(Error::UnsupportedDimension(n)),
        }
    }

    /// Every index of degree at most `m_max`, ordered by `(m, l)`.
    pub fn all(n: usize, m_max: usize) -> Result<Vec<Self>> {
        let mut out = Vec::new();
        for m in 0..=m_max {
            for l in 1..=Self::space_dimension(n, m)? {
                out.push(Self { m, l });
            }
        }
        Ok(out)
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        Self::checked(n, self.m, self.l).map(|_| ())
    }
}

/// Orthonormal real harmonic `Y_l^m(ζ)` on `S^{n-2}`, `n ∈ {3, 4}`.
pub fn sph_harm(idx: HarmonicIndex, n: usize, zeta: &[f64]) -> Result<f64> {
    idx.validate(n)?;
    if zeta.len() != n - 1 {
        return Err(Error::GridMismatch("harmonic argument has the wrong dimension"));
    }
    Ok(match n {
        3 => circle_harmonic(idx, zeta[0], zeta[1]),
        _ => sphere_harmonic(idx, zeta),
    })
}

fn circle_harmonic(idx: HarmonicIndex, x: f64, y: f64) -> f64 {
    if idx.m == 0 {
        return 1.0 / TAU.sqrt();
    }
    let (c, s) = angle_multiple(x, y, idx.m);
    let v = if idx.l == 1 { c } else { s };
    v / PI.sqrt()
}

/// `(cos kφ, sin kφ)` where `(x, y) = ρ(cos φ, sin φ)`.
fn angle_multiple(x: f64, y: f64, k: usize) -> (f64, f64) {
    let r = x.hypot(y);
    if r == 0.0 {
        return (1.0, 0.0);
    }
    let (c1, s1) = (x / r, y / r);
    let (mut c, mut s) = (1.0, 0.0);
    for _ in 0..k {
        let nc = c * c1 - s * s1;
        s = s * c1 + c * s1;
        c = nc;
    }
    (c, s)
}

fn sphere_harmonic(idx: HarmonicIndex, zeta: &[f64]) -> f64 {
    let m = idx.m;
    let k = idx.l as isize - m as isize - 1;
    let order = k.unsigned_abs();
    let z = zeta[2].clamp(-1.0, 1.0);
    let sin_polar = zeta[0].hypot(zeta[1]);
    let p = normalized_legendre(m, order, z, sin_polar);
    if k == 0 {
        return p;
    }
    let (c, s) = angle_multiple(zeta[0], zeta[1], order);
    let trig = if k > 0 { c } else { s };
    core::f64::consts::SQRT_2 * p * trig
}

/// `√((2m+1)/4π · (m-k)!/(m+k)!) P_m^k(z)` without the Condon–Shortley phase.
fn normalized_legendre(m: usize, k: usize, z: f64, sin_polar: f64) -> f64 {
    let mut diag = 1.0 / (4.0 * PI).sqrt();
    for j in 1..=k {
        let jf = j as f64;
        diag *= ((2.0 * jf + 1.0) / (2.0 * jf)).sqrt() * sin_polar;
    }
    if m == k {
        return diag;
    }
    let kf = k as f64;
    let mut prev = diag;
    let mut cur = (2.0 * kf + 3.0).sqrt() * z * diag;
    for j in (k + 2)..=m {
        let jf = j as f64;
        let a = ((4.0 * jf * jf - 1.0) / (jf * jf - kf * kf)).sqrt();
        let b = (((jf - 1.0) * (jf - 1.0) - kf * kf) / (4.0 * (jf - 1.0) * (jf - 1.0) - 1.0)).sqrt();
        let next = a * (z * cur - b * prev);
        prev = cur;
        cur = next;
    }
    cur
}

/// Quadrature on `S^{n-2}` for `n ∈ {3, 4}`.
///
/// `n = 3`: `resolution` equispaced angles (trapezoid), exact for
/// trigonometric polynomials of degree below `resolution`.
/// `n = 4`: `resolution` Gauss–Legendre nodes in `cos` of the polar angle
/// times `2·resolution` equispaced azimuths, exact through degree `2·resolution - 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereQuadrature {
    n: usize,
    resolution: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl SphereQuadrature {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Coordinates of node `i` in `R^{n-1}`.
    pub fn node(&self, i: usize) -> &[f64] {
        let d = self.n - 1;
        &self.nodes[i * d..(i + 1) * d]
    }

    pub fn nodes(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.nodes.chunks_exact(self.n - 1)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Largest degree `L` such that products of harmonics of degree `≤ L` are
    /// integrated exactly, i.e. projection onto degree `≤ L` is exact for
    /// data band-limited to degree `L`.
    pub fn design_order(&self) -> usize {
        match self.n {
            3 => (self.resolution - 1) / 2,
            _ => self.resolution - 1,
        }
    }

    pub fn integrate<F: FnMut(&[f64]) -> f64>(&self, mut f: F) -> f64 {
        self.nodes().zip(&self.weights).map(|(x, w)| w * f(x)).sum()
    }
}

/// Builds the quadrature rule on `S^{n-2}`; `resolution ≥ 4`.
pub fn sphere_quadrature(n: usize, resolution: usize) -> Result<SphereQuadrature> {
    if resolution < 4 {
        return Err(Error::Domain { what: "quadrature resolution", value: resolution as f64 });
    }
    match n {
        3 => {
            let w = TAU / resolution as f64;
            let mut nodes = Vec::with_capacity(2 * resolution);
            for k in 0..resolution {
                let (s, c) = (w * k as f64).sin_cos();
                nodes.push(c);
                nodes.push(s);
            }
            Ok(SphereQuadrature { n, resolution, nodes, weights: alloc::vec![w; resolution] })
        }
        4 => {
            let rule = GaussLegendre::new(resolution);
            let azimuths = 2 * resolution;
            let dphi = TAU / azimuths as f64;
            let mut nodes = Vec::with_capacity(3 * resolution * azimuths);
            let mut weights = Vec::with_capacity(resolution * azimuths);
            for (&z, &wz) in rule.nodes().iter().zip(rule.weights()) {
                let rho = ((1.0 - z) * (1.0 + z)).sqrt();
                for j in 0..azimuths {
                    let (s, c) = (dphi * j as f64).sin_cos();
                    nodes.extend_from_slice(&[rho * c, rho * s, z]);
                    weights.push(wz * dphi);
                }
            }
            Ok(SphereQuadrature { n, resolution, nodes, weights })
        }
        _ => Err(Error::UnsupportedDimension(n)),
    }
}

/// `Σ_i w_i · samples_i · Y_l^m(node_i)`.
pub fn project_onto_harmonic(quad: &SphereQuadrature, samples: &[f64], idx: HarmonicIndex) -> Result<f64> {
    if samples.len() != quad.len() {
        return Err(Error::GridMismatch("sample count differs from the quadrature node count"));
    }
    idx.validate(quad.n)?;
    let mut acc = 0.0;
    for ((node, w), s) in quad.nodes().zip(&quad.weights).zip(samples) {
        acc += w * s * sph_harm(idx, quad.n, node)?;
    }
    Ok(acc)
}

/// Both sides of the Funk–Hecke identity on the latitude sphere at angle `xi`
/// from `psi`:
/// `∫_{S_ψ^{n-3}} Y((cos ξ)ψ + (sin ξ)η) dη = ω_{n-3} Ĉ_m(cos ξ) Y(ψ)`,
/// with `Ĉ_m` the [`zonal`] polynomial (the classical `C_m^{(n-3)/2}` for `n = 3, 4`).
///
/// The left side is a direct quadrature: the two points of `S^0` for `n = 3`,
/// an equispaced rule on the great circle orthogonal to `ψ` for `n = 4`.
pub fn funk_hecke_check(n: usize, idx: HarmonicIndex, xi: f64, psi: &[f64]) -> Result<(f64, f64)> {
    idx.validate(n)?;
    if psi.len() != n - 1 {
        return Err(Error::GridMismatch("psi has the wrong dimension"));
    }
    let (sx, cx) = xi.sin_cos();
    let lhs = match n {
        3 => {
            let eta = [-psi[1], psi[0]];
            let plus = [cx * psi[0] + sx * eta[0], cx * psi[1] + sx * eta[1]];
            let minus = [cx * psi[0] - sx * eta[0], cx * psi[1] - sx * eta[1]];
            sph_harm(idx, n, &plus)? + sph_harm(idx, n, &minus)?
        }
        _ => {
            let (e1, e2) = orthonormal_complement(psi);
            let count = 2 * idx.m + 16;
            let dbeta = TAU / count as f64;
            let mut acc = 0.0;
            for j in 0..count {
                let (sb, cb) = (dbeta * j as f64).sin_cos();
                let mut p = [0.0; 3];
                for i in 0..3 {
                    p[i] = cx * psi[i] + sx * (cb * e1[i] + sb * e2[i]);
                }
                acc += sph_harm(idx, n, &p)?;
            }
            acc * dbeta
        }
    };
    let rhs = sphere_area(n - 3) * zonal(n, idx.m, cx) * sph_harm(idx, n, psi)?;
    Ok((lhs, rhs))
}

fn orthonormal_complement(psi: &[f64]) -> ([f64; 3], [f64; 3]) {
    // pick the axis least aligned with ψ, then Gram–Schmidt
    let mut axis = [0.0; 3];
    let i = (0..3)
        .min_by(|&a, &b| psi[a].abs().partial_cmp(&psi[b].abs()).unwrap_or(core::cmp::Ordering::Equal))
        .unwrap_or(0);
    axis[i] = 1.0;
    let d = dot(&axis, psi);
    let mut e1 = [axis[0] - d * psi[0], axis[1] - d * psi[1], axis[2] - d * psi[2]];
    let norm = dot(&e1, &e1).sqrt();
    e1.iter_mut().for_each(|v| *v /= norm);
    let e2 = [
        psi[1] * e1[2] - psi[2] * e1[1],
        psi[2] * e1[0] - psi[0] * e1[2],
        psi[0] * e1[1] - psi[1] * e1[0],
    ];
    (e1, e2)
}
