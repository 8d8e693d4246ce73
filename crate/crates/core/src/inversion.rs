//! Reconstruction: harmonic projection of the sinogram, Mellin
//! deconvolution per mode, and resynthesis on the sphere.
//!
//! For each `(m, l)`:
//!
//! ```text
//! K_{m,l}(c) = ⟨Sf(·, c), Y_l^m⟩ / ((2c tanh λ)^{n-2} ω_{n-3})
//! g_{m,l}   = M^{-1}[ M K_{m,l}(s) / M h_{m,λ}(1 - s) ]
//! f_{m,l}(r) = (1 + r²)^{n-2} g_{m,l}(r)
//! ```

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::forward::Sinogram;
use crate::geometry::{stereo_project, SpherePoint};
use crate::grid::LogGrid;
use crate::harmonics::{sph_harm, HarmonicIndex};
use crate::kernel::{kernel_denominator, KernelSpec};
use crate::math::*;
use crate::mellin::{
    deconvolve_line, mellin_forward, mellin_inverse_profile, ContourGrid, Diagnosed, MellinLine, RadialProfile, Taper,
};
use crate::{Error, Result, Warning};

/// Line, regularization and reporting choices for the deconvolution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InversionParams {
    /// Abscissa `ρ ∈ (0, 1)` of the inversion contour.
    pub rho: f64,
    /// Relative Wiener floor, see [`deconvolve_line`].
    pub eps: f64,
    pub contour: ContourGrid,
    pub taper: Taper,
    /// Decades dropped at each end of the `c` grid when reporting profiles.
    pub trim_decades: f64,
    /// Terms of the power-law tail fitted beyond `c_max` in the slice limit;
    /// `0` disables the correction.
    pub tail_terms: usize,
}

impl InversionParams {
    pub fn new(rho: f64, eps: f64, half_width: f64, step: f64) -> Result<Self> {
        Ok(Self { rho, eps, contour: ContourGrid::new(half_width, step)?, ..Self::default() })
    }
}

impl Default for InversionParams {
    fn default() -> Self {
        Self {
            rho: 0.5,
            eps: 1e-4,
            contour: ContourGrid::new(200.0, 0.05).unwrap_or_else(|_| unreachable!()),
            taper: Taper::default(),
            trim_decades: 1.0,
            tail_terms: 4,
        }
    }
}

/// `K_{m,l}` on the sinogram's `c` grid.
///
/// Errors: [`Error::DegreeTooHigh`] when `m` exceeds the design order of the
/// `ψ` rule, so that the projection would alias higher degrees into `m`.
pub fn sinogram_to_k(sino: &Sinogram, idx: HarmonicIndex) -> Result<RadialProfile> {
    let geom = sino.geometry();
    let n = geom.n();
    idx.validate(n)?;
    let psi = sino.psi_grid();
    if idx.m > psi.design_order() {
        return Err(Error::DegreeTooHigh { degree: idx.m, order: psi.design_order() });
    }
    let basis: Vec<f64> = psi
        .nodes()
        .zip(psi.weights())
        .map(|(z, w)| sph_harm(idx, n, z).map(|y| w * y))
        .collect::<Result<_>>()?;
    let grid = *sino.c_grid();
    let norm = sphere_area(n - 3);
    let t = geom.tanh();
    let mut values = alloc::vec![0.0; grid.len()];
    for (i, &b) in basis.iter().enumerate() {
        for (v, s) in values.iter_mut().zip(sino.row(i)) {
            *v += b * s;
        }
    }
    for (j, v) in values.iter_mut().enumerate() {
        *v /= (2.0 * grid.at(j) * t).powi(n as i32 - 2) * norm;
    }
    RadialProfile::new(grid, values)
}

/// The reporting sub-lattice: the `K` grid minus `trim_decades` at each end.
pub fn report_grid(k_grid: &LogGrid, trim_decades: f64) -> Result<LogGrid> {
    let factor = 10f64.powf(trim_decades);
    let range = k_grid.index_range(k_grid.min() * factor, k_grid.max() / factor);
    if range.len() < 2 {
        return Err(Error::GridMismatch("grid too short for the requested trim"));
    }
    k_grid.sub_grid(range.start, range.len())
}

/// `f_{m,l}` from `K_{m,l}`, on [`report_grid`].
///
/// In the slice limit `h` reaches down to `x = 0`, so `K(c)` decays only like
/// `c^{-(n-2)}` and the grid end `c_max` cuts off a tail that is not
/// negligible. Where `M h(1 - s)` vanishes (at `s = 0` for even `m`, `n = 3`)
/// the missing tail leaves a residue that no choice of `ρ` avoids. The tail
/// is therefore modelled by the asymptotic series
/// `K(c) ≈ Σ_k a_k c^{-(n-2+k)}`, fitted by least squares on the last decade
/// of the grid, and its Mellin transform `Σ a_k c_max^{s-p_k} / (p_k - s)` is
/// added to the numerator.
pub fn recover_profile(k: &RadialProfile, spec: &KernelSpec, params: &InversionParams) -> Result<Diagnosed<RadialProfile>> {
    let denom = kernel_denominator(spec, params.rho, &params.contour)?;
    recover_with_denominator(k, spec, &denom, params)
}

fn recover_with_denominator(
    k: &RadialProfile,
    spec: &KernelSpec,
    denom: &MellinLine,
    params: &InversionParams,
) -> Result<Diagnosed<RadialProfile>> {
    let n = spec.n();
    let numer = mellin_forward(k, params.rho, &params.contour)?;
    let mut warnings = numer.warnings;
    let mut numer = numer.value;
    if spec.geometry().is_slice() && params.tail_terms > 0 {
        if let Some(tail) = fit_tail(k, n, params.tail_terms) {
            numer = add_tail(&numer, &tail, k.grid().max(), n)?;
            // the right end is accounted for; keep only a left-end warning
            warnings.retain_mut(|w| match w {
                Warning::TruncationRisk { left, right } => {
                    *right = 0.0;
                    *left > crate::mellin::TRUNCATION_RATIO
                }
                _ => true,
            });
        }
    }
    let quotient = deconvolve_line(&numer, denom, params.eps, params.taper)?;
    let grid = report_grid(k.grid(), params.trim_decades)?;
    let g = mellin_inverse_profile(&quotient, &grid)?;
    warnings.extend(g.warnings);
    let values = g.value.samples().map(|(r, v)| (1.0 + r * r).powi(n as i32 - 2) * v).collect();
    Ok(Diagnosed { value: RadialProfile::new(grid, values)?, warnings })
}

/// Coefficients `α_k` of `K(c) ≈ Σ α_k (c_max / c)^{n-2+k}` on the last
/// decade, `None` when that decade holds too few nodes.
fn fit_tail(k: &RadialProfile, n: usize, terms: usize) -> Option<Vec<f64>> {
    let grid = k.grid();
    let top = grid.max();
    let range = grid.index_range(top / 10.0, top);
    if range.len() < 4 * terms {
        return None;
    }
    let rows: Vec<(Vec<f64>, f64)> = range
        .map(|j| {
            let ratio = top / grid.at(j);
            let basis = (0..terms).map(|i| ratio.powi((n - 2 + i) as i32)).collect();
            (basis, k.values()[j])
        })
        .collect();
    least_squares(&rows, terms)
}

/// Modified Gram–Schmidt least squares for a tall, narrow system.
fn least_squares(rows: &[(Vec<f64>, f64)], cols: usize) -> Option<Vec<f64>> {
    let mut q: Vec<Vec<f64>> = (0..cols).map(|c| rows.iter().map(|r| r.0[c]).collect()).collect();
    let mut rhs: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let mut r = alloc::vec![0.0; cols * cols];
    let mut proj = alloc::vec![0.0; cols];
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    for c in 0..cols {
        for p in 0..c {
            let d = dot(&q[p], &q[c]);
            r[p * cols + c] = d;
            let (done, rest) = q.split_at_mut(c);
            rest[0].iter_mut().zip(&done[p]).for_each(|(v, u)| *v -= d * u);
        }
        let norm = dot(&q[c], &q[c]).sqrt();
        if !(norm > 0.0) {
            return None;
        }
        r[c * cols + c] = norm;
        q[c].iter_mut().for_each(|v| *v /= norm);
        let d = dot(&q[c], &rhs);
        rhs.iter_mut().zip(&q[c]).for_each(|(v, u)| *v -= d * u);
        proj[c] = d;
    }
    let mut x = alloc::vec![0.0; cols];
    for c in (0..cols).rev() {
        let acc = proj[c] - (c + 1..cols).map(|p| r[c * cols + p] * x[p]).sum::<f64>();
        x[c] = acc / r[c * cols + c];
    }
    Some(x)
}

fn add_tail(line: &MellinLine, alpha: &[f64], top: f64, n: usize) -> Result<MellinLine> {
    let lt = top.ln();
    let values = line
        .values()
        .iter()
        .zip(line.grid().points())
        .map(|(v, b)| {
            let s = num_complex::Complex64::new(line.rho(), b);
            let series: num_complex::Complex64 =
                alpha.iter().enumerate().map(|(i, a)| *a / ((n - 2 + i) as f64 - s)).sum();
            v + (s * lt).exp() * series
        })
        .collect();
    MellinLine::new(line.rho(), *line.grid(), values)
}

/// Recovered profiles `f_{m,l}` for every `(m, l)` with `m ≤ m_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicSpectrum {
    n: usize,
    m_max: usize,
    grid: LogGrid,
    profiles: BTreeMap<HarmonicIndex, RadialProfile>,
}

impl HarmonicSpectrum {
    /// Every profile must live on `grid`.
    pub fn new(n: usize, m_max: usize, grid: LogGrid, profiles: BTreeMap<HarmonicIndex, RadialProfile>) -> Result<Self> {
        for (idx, p) in &profiles {
            idx.validate(n)?;
            if *p.grid() != grid {
                return Err(Error::GridMismatch("spectrum profiles must share one grid"));
            }
        }
        Ok(Self { n, m_max, grid, profiles })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m_max(&self) -> usize {
        self.m_max
    }

    pub fn grid(&self) -> &LogGrid {
        &self.grid
    }

    pub fn profile(&self, idx: HarmonicIndex) -> Option<&RadialProfile> {
        self.profiles.get(&idx)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&HarmonicIndex, &RadialProfile)> {
        self.profiles.iter()
    }

    pub fn len(&self) -> usize {
        self.profiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.profiles.is_empty()
    }
}

/// Runs [`sinogram_to_k`] and the deconvolution for every index of degree
/// `≤ m_max`. The kernel line is computed once per degree. Modes run in
/// parallel with the `rayon` feature.
pub fn reconstruct(sino: &Sinogram, m_max: usize, params: &InversionParams) -> Result<Diagnosed<HarmonicSpectrum>> {
    let geom = *sino.geometry();
    let n = geom.n();
    let order = sino.psi_grid().design_order();
    if m_max > order {
        return Err(Error::DegreeTooHigh { degree: m_max, order });
    }
    let indices = HarmonicIndex::all(n, m_max)?;
    let grid = report_grid(sino.c_grid(), params.trim_decades)?;

    let degree = |m: usize| kernel_denominator(&KernelSpec::new(geom, m), params.rho, &params.contour);
    let mode = |idx: &HarmonicIndex, denoms: &[MellinLine]| -> Result<Diagnosed<RadialProfile>> {
        let k = sinogram_to_k(sino, *idx)?;
        recover_with_denominator(&k, &KernelSpec::new(geom, idx.m), &denoms[idx.m], params)
    };

    #[cfg(feature = "rayon")]
    let (denoms, results) = {
        use rayon::prelude::*;
        let denoms: Vec<MellinLine> = (0..=m_max).into_par_iter().map(degree).collect::<Result<_>>()?;
        let results: Vec<Result<Diagnosed<RadialProfile>>> = indices.par_iter().map(|i| mode(i, &denoms)).collect();
        (denoms, results)
    };
    #[cfg(not(feature = "rayon"))]
    let (denoms, results) = {
        let denoms: Vec<MellinLine> = (0..=m_max).map(degree).collect::<Result<_>>()?;
        let results: Vec<Result<Diagnosed<RadialProfile>>> = indices.iter().map(|i| mode(i, &denoms)).collect();
        (denoms, results)
    };
    drop(denoms);

    let mut warnings: Vec<Warning> = Vec::new();
    let mut profiles = BTreeMap::new();
    for (idx, r) in indices.into_iter().zip(results) {
        let d = r?;
        warnings.extend(d.warnings);
        profiles.insert(idx, d.value);
    }
    Ok(Diagnosed { value: HarmonicSpectrum::new(n, m_max, grid, profiles)?, warnings })
}

/// `f(x) = Σ f_{m,l}(|y|) Y_l^m(y/|y|)`, `y = Λ(x)`, interpolating linearly
/// in `ln r`. At `y = 0` the values at the smallest grid radius are used with
/// `ζ = e_1`.
///
/// Errors: [`Error::InterpolationRange`] for `0 < |y|` outside the grid.
pub fn synthesize(spectrum: &HarmonicSpectrum, x: &SpherePoint) -> Result<f64> {
    if spectrum.is_empty() {
        return Ok(0.0);
    }
    let n = spectrum.n;
    if x.dim() != n {
        return Err(Error::GridMismatch("point dimension differs from the spectrum"));
    }
    let y = stereo_project(x)?;
    let r = norm_sq(&y).sqrt();
    let grid = &spectrum.grid;
    let mut zeta = [0.0; 3];
    let (k0, frac) = if r == 0.0 {
        zeta[0] = 1.0;
        (0, 0.0)
    } else {
        let pos = (r.ln() - grid.log_min()) / grid.step();
        let top = (grid.len() - 1) as f64;
        if !(pos >= -1e-9 && pos <= top + 1e-9) {
            return Err(Error::InterpolationRange { r, min: grid.min(), max: grid.max() });
        }
        for (z, v) in zeta.iter_mut().zip(&y) {
            *z = v / r;
        }
        let pos = pos.clamp(0.0, top);
        let k0 = (pos.floor() as usize).min(grid.len() - 2);
        (k0, pos - k0 as f64)
    };
    let zeta = &zeta[..n - 1];
    let mut acc = 0.0;
    for (idx, p) in &spectrum.profiles {
        let v = p.values();
        let value = v[k0] + frac * (v[k0 + 1] - v[k0]);
        acc += value * sph_harm(*idx, n, zeta)?;
    }
    Ok(acc)
}
