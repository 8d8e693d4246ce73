//! The radial kernel `h_{m,λ}` linking harmonic data to harmonic profiles,
//! `K_{m,l}(c) = ∫_0^∞ g_{m,l}(cx) h_{m,λ}(x) dx`, and its Mellin transform.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::geometry::SpheroidGeometry;
use crate::harmonics::zonal;
use crate::math::*;
use crate::mellin::{check_strip, ContourGrid, MellinLine};
use crate::quadrature::GaussLegendre;
use crate::{Error, Result};

/// Dimension, spheroid and harmonic degree of one kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec {
    geometry: SpheroidGeometry,
    m: usize,
}

impl KernelSpec {
    pub fn new(geometry: SpheroidGeometry, m: usize) -> Self {
        Self { geometry, m }
    }

    pub fn n(&self) -> usize {
        self.geometry.n()
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn geometry(&self) -> &SpheroidGeometry {
        &self.geometry
    }

    /// `[1 - tanh λ, 1 + tanh λ]`, or `[0, 2]` in the slice limit.
    pub fn support(&self) -> (f64, f64) {
        let t = self.geometry.tanh();
        (1.0 - t, 1.0 + t)
    }
}

/// `h_{m,λ}(x)`.
///
/// On the support:
/// `2^{4-n} tanh^{3-n}λ · x · Ĉ_m((x² + 1 - tanh²λ)/(2x)) · Q(x)^{(n-4)/2}`,
/// `Q = (1 + t - x)(1 + t + x)(x - 1 + t)(x + 1 - t)`; in the slice limit
/// `2^{4-n} x^{n-3} (4 - x²)^{(n-4)/2} Ĉ_m(x/2)`. `Ĉ_m` is [`zonal`].
/// For `n = 3` the support endpoints are integrable singularities and
/// evaluate to `+∞`.
pub fn kernel_h(spec: &KernelSpec, x: f64) -> f64 {
    let n = spec.n();
    let m = spec.m;
    let (lo, hi) = spec.support();
    if !(x >= lo && x <= hi) || x <= 0.0 {
        return 0.0;
    }
    let e = 0.5 * (n as f64 - 4.0);
    let scale = 2f64.powi(4 - n as i32);
    if spec.geometry.is_slice() {
        let q = (2.0 - x) * (2.0 + x);
        return scale * x.powi(n as i32 - 3) * q.powf(e) * zonal(n, m, 0.5 * x);
    }
    let t = spec.geometry.tanh();
    let q = (1.0 + t - x) * (1.0 + t + x) * (x - 1.0 + t) * (x + 1.0 - t);
    let arg = (x * x + (1.0 - t) * (1.0 + t)) / (2.0 * x);
    scale * t.powi(3 - n as i32) * x * zonal(n, m, arg) * q.max(0.0).powf(e)
}

/// Nodes for `M h(σ) = ∫_0^π x(φ)^{σ-1} Ĉ_m(cos ξ(φ)) sin^{n-3}φ dφ` where
/// `x(φ)² = 1 + t² + 2t cos φ` and `cos ξ = (1 + t cos φ)/x`.
///
/// The integrand is smooth in `φ` but develops structure of width
/// `(1 - t)/√t` at `φ = π`, where `x` reaches its minimum `1 - t`. Panels are
/// graded geometrically toward `φ = π`; in the slice limit the last
/// `w = π - φ < 1e-12` is integrated analytically from
/// `x ≈ w`, `sin φ ≈ w`.
struct KernelNodes {
    log_x: Vec<f64>,
    weight: Vec<f64>,
    /// `(w_min, Ĉ_m(0))` of the slice tail, `∫_0^{w_min} w^{σ+n-4} Ĉ_m(0) dw`.
    tail: Option<(f64, f64)>,
    n: usize,
}

const SLICE_CUTOFF: f64 = 1e-12;
const GRADING: f64 = 0.5;

impl KernelNodes {
    fn new(spec: &KernelSpec, b_max: f64) -> Self {
        let n = spec.n();
        let m = spec.m;
        let t = spec.geometry.tanh();
        let slice = spec.geometry.is_slice();
        let w_min = if slice { SLICE_CUTOFF } else { 0.05 * (1.0 - t) / t.sqrt() };

        // panel edges in w = π - φ, decreasing
        let mut edges = alloc::vec![PI, 0.75 * PI, 0.5 * PI];
        let mut w = 0.5 * PI;
        while w * GRADING > w_min {
            w *= GRADING;
            edges.push(w);
        }
        if slice {
            edges.push(w_min.min(w));
        } else {
            edges.push(0.0);
        }

        let x_of = |w: f64| {
            // x² = (1 - t)² + 4t sin²(w/2)
            let h = (0.5 * w).sin();
            ((1.0 - t) * (1.0 - t) + 4.0 * t * h * h).sqrt()
        };
        let mut log_x = Vec::new();
        let mut weight = Vec::new();
        let mut rules: Vec<(usize, GaussLegendre)> = Vec::new();
        for pair in edges.windows(2) {
            let (wa, wb) = (pair[0], pair[1]);
            let du = (x_of(wa).ln() - x_of(wb).ln()).abs();
            let count = 16 + m + (0.75 * b_max * du).ceil() as usize;
            if !rules.iter().any(|(c, _)| *c == count) {
                rules.push((count, GaussLegendre::new(count)));
            }
            let rule = &rules.iter().find(|(c, _)| *c == count).map(|(_, r)| r).unwrap_or_else(|| unreachable!());
            for (w, wt) in rule.mapped(wb, wa) {
                let phi = PI - w;
                let x = x_of(w);
                // 1 + t cos φ = (1 - t) + 2t cos²(φ/2), with cos(φ/2) = sin(w/2)
                let h = (0.5 * w).sin();
                let cos_xi = ((1.0 - t) + 2.0 * t * h * h) / x;
                let sin_phi = phi.sin();
                log_x.push(x.ln());
                weight.push(wt * zonal(n, m, cos_xi) * sin_phi.powi(n as i32 - 3));
            }
        }
        let tail = slice.then(|| (edges[edges.len() - 1], zonal(n, m, 0.0)));
        Self { log_x, weight, tail, n }
    }

    fn tail_at(&self, s: Complex64) -> Complex64 {
        match self.tail {
            Some((w_min, z0)) => {
                let p = s + (self.n as f64 - 3.0);
                (p * w_min.ln()).exp() * z0 / p
            }
            None => Complex64::new(0.0, 0.0),
        }
    }

    fn at(&self, s: Complex64) -> Complex64 {
        let sm1 = s - 1.0;
        let body: Complex64 = self.log_x.iter().zip(&self.weight).map(|(&lx, &w)| w * (sm1 * lx).exp()).sum();
        body + self.tail_at(s)
    }
}

fn check_tail(spec: &KernelSpec, sigma: f64) -> Result<()> {
    if spec.geometry.is_slice() && !(sigma + spec.n() as f64 - 3.0 > 0.0) {
        return Err(Error::Strip(sigma));
    }
    Ok(())
}

/// `M h_{m,λ}(s)` at one point.
pub fn kernel_h_mellin_at(spec: &KernelSpec, s: Complex64) -> Result<Complex64> {
    check_tail(spec, s.re)?;
    Ok(KernelNodes::new(spec, s.im.abs()).at(s))
}

/// `M h_{m,λ}(σ + ib)` on `contour`, `0 < σ < 1`. Exactly conjugate symmetric.
pub fn kernel_h_mellin(spec: &KernelSpec, sigma: f64, contour: &ContourGrid) -> Result<MellinLine> {
    check_strip(sigma)?;
    check_tail(spec, sigma)?;
    let nodes = KernelNodes::new(spec, contour.half_width());
    let half = contour.half_count();
    let db = contour.step();
    let mut acc = alloc::vec![Complex64::new(0.0, 0.0); half + 1];
    for (&lx, &w) in nodes.log_x.iter().zip(&nodes.weight) {
        let a = w * ((sigma - 1.0) * lx).exp();
        if a == 0.0 {
            continue;
        }
        let step = Complex64::from_polar(1.0, db * lx);
        let mut phase = Complex64::new(1.0, 0.0);
        for (k, slot) in acc.iter_mut().enumerate() {
            if k % 256 == 0 {
                phase = Complex64::from_polar(1.0, k as f64 * db * lx);
            }
            *slot += a * phase;
            phase *= step;
        }
    }
    for (k, slot) in acc.iter_mut().enumerate() {
        *slot += nodes.tail_at(Complex64::new(sigma, k as f64 * db));
    }
    let mut values = Vec::with_capacity(contour.len());
    values.extend(acc[1..].iter().rev().map(|v| v.conj()));
    values.extend_from_slice(&acc);
    MellinLine::new(sigma, *contour, values)
}

/// `M h_{m,λ}(1 - s)` for `s = ρ + ib` on `contour`: the divisor of the
/// reconstruction, labelled with abscissa `ρ`.
pub fn kernel_denominator(spec: &KernelSpec, rho: f64, contour: &ContourGrid) -> Result<MellinLine> {
    check_strip(rho)?;
    let line = kernel_h_mellin(spec, 1.0 - rho, contour)?;
    let mut values = line.values().to_vec();
    values.reverse();
    MellinLine::new(rho, *contour, values)
}
