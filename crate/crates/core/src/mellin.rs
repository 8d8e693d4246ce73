//! Mellin transforms on log-uniform grids.
//!
//! `M F(s) = ∫_0^∞ y^{s-1} F(y) dy` becomes, with `y = e^u`, the Fourier
//! integral `∫ e^{ρu} F(e^u) e^{ibu} du` along the line `s = ρ + ib`. All
//! sums below are trapezoid rules in `u` or `b`.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::grid::LogGrid;
use crate::math::*;
use crate::{Error, Result, Warning};

/// A value together with the non-fatal diagnostics raised computing it.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnosed<T> {
    pub value: T,
    pub warnings: Vec<Warning>,
}

impl<T> Diagnosed<T> {
    pub fn clean(value: T) -> Self {
        Self { value, warnings: Vec::new() }
    }

    pub fn map<U>(self, f: impl FnOnce(T) -> U) -> Diagnosed<U> {
        Diagnosed { value: f(self.value), warnings: self.warnings }
    }
}

/// Samples of a function of `r > 0` on a log-uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialProfile {
    grid: LogGrid,
    values: Vec<f64>,
}

impl RadialProfile {
    pub fn new(grid: LogGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch("profile value count differs from its grid"));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Domain { what: "profile value", value: *v });
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: LogGrid, mut f: impl FnMut(f64) -> f64) -> Result<Self> {
        let values = grid.points().map(&mut f).collect();
        Self::new(grid, values)
    }

    pub fn zeros(grid: LogGrid) -> Self {
        Self { grid, values: alloc::vec![0.0; grid.len()] }
    }

    pub fn grid(&self) -> &LogGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// `(r_k, F(r_k))` pairs.
    pub fn samples(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.grid.points().zip(self.values.iter().copied())
    }
}

/// Symmetric uniform grid `b_k = (k - K) Δb`, `k = 0..=2K`, `K Δb = T`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContourGrid {
    step: f64,
    half_count: usize,
}

impl ContourGrid {
    /// `T` is rounded to the nearest multiple of `Δb`.
    pub fn new(half_width: f64, step: f64) -> Result<Self> {
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::Domain { what: "contour step", value: step });
        }
        if !(half_width >= step && half_width.is_finite()) {
            return Err(Error::Domain { what: "contour half-width", value: half_width });
        }
        Ok(Self { step, half_count: (half_width / step).round() as usize })
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    /// `T`.
    pub fn half_width(&self) -> f64 {
        self.step * self.half_count as f64
    }

    pub fn half_count(&self) -> usize {
        self.half_count
    }

    pub fn len(&self) -> usize {
        2 * self.half_count + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn at(&self, k: usize) -> f64 {
        (k as f64 - self.half_count as f64) * self.step
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(|k| self.at(k))
    }
}

/// `M F(ρ + ib)` on a [`ContourGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct MellinLine {
    rho: f64,
    grid: ContourGrid,
    values: Vec<Complex64>,
}

impl MellinLine {
    pub fn new(rho: f64, grid: ContourGrid, values: Vec<Complex64>) -> Result<Self> {
        check_strip(rho)?;
        if values.len() != grid.len() {
            return Err(Error::GridMismatch("line value count differs from its contour grid"));
        }
        Ok(Self { rho, grid, values })
    }

    pub fn zeros(rho: f64, grid: ContourGrid) -> Result<Self> {
        Self::new(rho, grid, alloc::vec![Complex64::new(0.0, 0.0); grid.len()])
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn grid(&self) -> &ContourGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// `max_k |V(ρ - ib_k) - conj V(ρ + ib_k)|`.
    pub fn symmetry_residual(&self) -> f64 {
        let n = self.values.len();
        (0..n).map(|k| (self.values[n - 1 - k] - self.values[k].conj()).norm()).fold(0.0, f64::max)
    }

    /// The line `b ↦ V(-b)` (same abscissa label).
    pub fn reflected(&self) -> Self {
        let mut values = self.values.clone();
        values.reverse();
        Self { rho: self.rho, grid: self.grid, values }
    }
}

pub(crate) fn check_strip(rho: f64) -> Result<()> {
    if rho > 0.0 && rho < 1.0 {
        Ok(())
    } else {
        Err(Error::Strip(rho))
    }
}

/// A grid end counts as truncated when its log-space integrand exceeds this
/// fraction of the peak.
pub const TRUNCATION_RATIO: f64 = 1e-12;

/// Imaginary parts of inverse sums above this are reported.
pub const IMAGINARY_TOLERANCE: f64 = 1e-6;

// exact phase recomputation interval for the rotating-phasor sums
const RESEED: usize = 256;

/// `M F(ρ + ib)` on `contour` by the trapezoid rule in `u = ln y`.
///
/// Only `b ≥ 0` is summed; the negative half is its conjugate, so the line
/// is exactly conjugate symmetric.
///
/// Errors: [`Error::Strip`] unless `0 < ρ < 1`; [`Error::Nyquist`] when
/// `Δb > π / ln(r_max/r_min)` (the contour cannot resolve the grid extent);
/// [`Error::ContourAliasing`] when `T > π / Δu` (the grid cannot resolve the
/// contour). Warns [`Warning::TruncationRisk`] when `y^ρ F(y)` is not
/// negligible at either end.
pub fn mellin_forward(f: &RadialProfile, rho: f64, contour: &ContourGrid) -> Result<Diagnosed<MellinLine>> {
    check_strip(rho)?;
    let grid = f.grid();
    let extent = grid.log_extent();
    let limit = PI / extent;
    if contour.step() > limit * (1.0 + 1e-12) {
        return Err(Error::Nyquist { step: contour.step(), limit });
    }
    let alias = PI / grid.step();
    if contour.half_width() > alias {
        return Err(Error::ContourAliasing { half_width: contour.half_width(), limit: alias });
    }

    let last = grid.len() - 1;
    let weighted: Vec<f64> = f
        .values()
        .iter()
        .enumerate()
        .map(|(j, &v)| {
            let u = grid.log_at(j);
            let w = if j == 0 || j == last { 0.5 } else { 1.0 };
            w * grid.step() * (rho * u).exp() * v
        })
        .collect();

    let mut warnings = Vec::new();
    let peak = weighted.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if peak > 0.0 {
        let left = 2.0 * weighted[0].abs() / peak;
        let right = 2.0 * weighted[last].abs() / peak;
        if left > TRUNCATION_RATIO || right > TRUNCATION_RATIO {
            warnings.push(Warning::TruncationRisk { left, right });
        }
    }

    let half = contour.half_count();
    let db = contour.step();
    let mut acc = alloc::vec![Complex64::new(0.0, 0.0); half + 1];
    for (j, &a) in weighted.iter().enumerate() {
        if a == 0.0 {
            continue;
        }
        let u = grid.log_at(j);
        let step = Complex64::from_polar(1.0, db * u);
        let mut phase = Complex64::new(1.0, 0.0);
        for (k, slot) in acc.iter_mut().enumerate() {
            if k % RESEED == 0 {
                phase = Complex64::from_polar(1.0, k as f64 * db * u);
            }
            *slot += a * phase;
            phase *= step;
        }
    }
    let mut values = Vec::with_capacity(contour.len());
    values.extend(acc[1..].iter().rev().map(|v| v.conj()));
    values.extend_from_slice(&acc);
    Ok(Diagnosed { value: MellinLine::new(rho, *contour, values)?, warnings })
}

/// Real part and imaginary residual of an inverse sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InverseValue {
    pub value: f64,
    pub imaginary: f64,
}

/// `(1/2π) ∫_{-T}^{T} r^{-(ρ+ib)} V(ρ+ib) db` by the trapezoid rule.
pub fn mellin_inverse(line: &MellinLine, r: f64) -> InverseValue {
    let grid = line.grid();
    let db = grid.step();
    let lr = r.ln();
    let amplitude = (-line.rho() * lr).exp() * db / TAU;
    let b0 = grid.at(0);
    let step = Complex64::from_polar(1.0, -db * lr);
    let last = line.values().len() - 1;
    let mut phase = Complex64::new(1.0, 0.0);
    let mut acc = Complex64::new(0.0, 0.0);
    for (k, v) in line.values().iter().enumerate() {
        if k % RESEED == 0 {
            phase = Complex64::from_polar(1.0, -(b0 + k as f64 * db) * lr);
        }
        let w = if k == 0 || k == last { 0.5 } else { 1.0 };
        acc += w * v * phase;
        phase *= step;
    }
    let z = acc * amplitude;
    InverseValue { value: z.re, imaginary: z.im }
}

/// [`mellin_inverse`] on every node of `grid`. Imaginary residuals above
/// [`IMAGINARY_TOLERANCE`] produce one warning carrying the worst case.
pub fn mellin_inverse_profile(line: &MellinLine, grid: &LogGrid) -> Result<Diagnosed<RadialProfile>> {
    let mut worst = InverseValue { value: 0.0, imaginary: 0.0 };
    let mut worst_r = 0.0;
    let mut values = Vec::with_capacity(grid.len());
    for r in grid.points() {
        let v = mellin_inverse(line, r);
        if v.imaginary.abs() > worst.imaginary.abs() {
            worst = v;
            worst_r = r;
        }
        values.push(v.value);
    }
    let mut warnings = Vec::new();
    if worst.imaginary.abs() > IMAGINARY_TOLERANCE {
        warnings.push(Warning::ImaginaryResidual { r: worst_r, residual: worst.imaginary.abs() });
    }
    Ok(Diagnosed { value: RadialProfile::new(*grid, values)?, warnings })
}

/// `(F_1 ⋆ F_2)(s) = ∫_0^∞ F_1(s s') F_2(s') ds'` on the lattice where it is
/// exactly representable: with `F_1` on `u_i = a_1 + iΔ` and `F_2` on
/// `v_j = a_2 + jΔ`, the result lives on `w_k = a_1 - a_2 + (k - N_2 + 1)Δ`,
/// `k = 0..N_1 + N_2 - 1`, and `(F_1 ⋆ F_2)(e^{w}) = Σ_j F_1(e^{w + v_j}) F_2(e^{v_j}) e^{v_j} Δ`
/// (trapezoid in `v`). Both grids must share the step `Δ`.
pub fn mellin_convolve(f1: &RadialProfile, f2: &RadialProfile) -> Result<RadialProfile> {
    let (g1, g2) = (f1.grid(), f2.grid());
    if !g1.same_step(g2) {
        return Err(Error::GridMismatch("convolution needs equal log steps"));
    }
    let (n1, n2) = (g1.len(), g2.len());
    let step = g1.step();
    let scaled: Vec<f64> = f2
        .values()
        .iter()
        .enumerate()
        .map(|(j, &v)| {
            let w = if j == 0 || j == n2 - 1 { 0.5 } else { 1.0 };
            w * step * v * g2.log_at(j).exp()
        })
        .collect();
    let count = n1 + n2 - 1;
    let mut out = alloc::vec![0.0; count];
    for (k, slot) in out.iter_mut().enumerate() {
        // i = k - (n2 - 1) + j must lie in 0..n1
        let j_lo = (n2 - 1).saturating_sub(k);
        let j_hi = (n1 + n2 - 1 - k).min(n2);
        let mut acc = 0.0;
        for j in j_lo..j_hi {
            let i = k + j + 1 - n2;
            acc += f1.values()[i] * scaled[j];
        }
        *slot = acc;
    }
    let log_min = g1.log_min() - g2.log_min() - (n2 - 1) as f64 * step;
    RadialProfile::new(LogGrid::from_log(log_min, step, count)?, out)
}

/// Frequency window applied after spectral division.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Taper {
    None,
    /// `1` for `|b| ≤ start·T`, raised-cosine roll-off to `0` at `|b| = T`.
    RaisedCosine { start: f64 },
}

impl Default for Taper {
    fn default() -> Self {
        Taper::RaisedCosine { start: 0.8 }
    }
}

impl Taper {
    pub fn weight(&self, b: f64, half_width: f64) -> f64 {
        match *self {
            Taper::None => 1.0,
            Taper::RaisedCosine { start } => {
                let a = b.abs();
                let knee = start * half_width;
                if a <= knee {
                    1.0
                } else if a >= half_width {
                    0.0
                } else {
                    0.5 * (1.0 + (PI * (a - knee) / (half_width - knee)).cos())
                }
            }
        }
    }
}

/// Regularized quotient `N · conj(D) / (|D|² + ε² max|D|²) · W(b)`.
///
/// Where `D` vanishes the output is bounded by `|N| / (2ε max|D|)`.
pub fn deconvolve_line(numer: &MellinLine, denom: &MellinLine, eps: f64, taper: Taper) -> Result<MellinLine> {
    if numer.grid() != denom.grid() || (numer.rho() - denom.rho()).abs() > 1e-15 {
        return Err(Error::GridMismatch("numerator and denominator lines differ"));
    }
    if !(eps >= 0.0 && eps.is_finite()) {
        return Err(Error::Domain { what: "regularization eps", value: eps });
    }
    let peak = denom.values().iter().fold(0.0f64, |m, d| m.max(d.norm_sqr()));
    let floor = eps * eps * peak;
    let t = numer.grid().half_width();
    let values = numer
        .values()
        .iter()
        .zip(denom.values())
        .zip(numer.grid().points())
        .map(|((n, d), b)| {
            let w = taper.weight(b, t);
            let q = d.norm_sqr() + floor;
            if w == 0.0 || q == 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                n * d.conj() * (w / q)
            }
        })
        .collect();
    MellinLine::new(numer.rho(), *numer.grid(), values)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn wide_grid() -> LogGrid {
        // u ∈ [-56, 4.5]: extent below π / 0.05, and e^{-y} is negligible on
        // the right; the left end carries e^{-56ρ}
        LogGrid::from_log(-56.0, 0.01, 6051).unwrap()
    }

    fn gamma_c(s: Complex64) -> Complex64 {
        // Lanczos, g = 7
        const G: f64 = 7.0;
        const C: [f64; 9] = [
            0.999_999_999_999_809_9,
            676.520_368_121_885_1,
            -1_259.139_216_722_402_8,
            771.323_428_777_653_1,
            -176.615_029_162_140_6,
            12.507_343_278_686_905,
            -0.138_571_095_265_720_12,
            9.984_369_578_019_572e-6,
            1.505_632_735_149_311_6e-7,
        ];
        if s.re < 0.5 {
            let pi = Complex64::new(PI, 0.0);
            return pi / ((pi * s).sin() * gamma_c(1.0 - s));
        }
        let z = s - 1.0;
        let mut x = Complex64::new(C[0], 0.0);
        for (i, &c) in C.iter().enumerate().skip(1) {
            x += c / (z + i as f64);
        }
        let t = z + G + 0.5;
        (2.0 * PI).sqrt() * t.powc(z + 0.5) * (-t).exp() * x
    }

    #[test]
    fn gamma_pair_on_the_critical_line() {
        let f = RadialProfile::from_fn(wide_grid(), |y| (-y).exp()).unwrap();
        let contour = ContourGrid::new(20.0, 0.05).unwrap();
        let line = mellin_forward(&f, 0.5, &contour).unwrap();
        let line = line.value;
        let mid = contour.half_count();
        assert!((line.values()[mid].re - PI.sqrt()).abs() < 1e-10);
        for k in (0..contour.len()).step_by(37) {
            let s = Complex64::new(0.5, contour.at(k));
            assert!((line.values()[k] - gamma_c(s)).norm() < 1e-10, "b = {}", s.im);
        }
        assert!(line.symmetry_residual() < 1e-15);
    }

    #[test]
    fn indicator_and_scaling() {
        let grid = LogGrid::from_log(-40.0, 0.001, 40_001).unwrap();
        // indicator of (0, 1], grid ends exactly at u = 0
        let f = RadialProfile::from_fn(grid, |_| 1.0).unwrap();
        let contour = ContourGrid::new(2.0, 0.05).unwrap();
        let line = mellin_forward(&f, 0.5, &contour).unwrap().value;
        for k in (0..contour.len()).step_by(10) {
            let s = Complex64::new(0.5, contour.at(k));
            assert!((line.values()[k] - 1.0 / s).norm() < 1e-6, "{k}");
        }
        let g = wide_grid();
        let base = RadialProfile::from_fn(g, |y| (-y).exp()).unwrap();
        let scaled = RadialProfile::from_fn(g, |y| (-2.0 * y).exp()).unwrap();
        let c = ContourGrid::new(10.0, 0.05).unwrap();
        let (a, b) = (mellin_forward(&base, 0.4, &c).unwrap().value, mellin_forward(&scaled, 0.4, &c).unwrap().value);
        for k in 0..c.len() {
            let s = Complex64::new(0.4, c.at(k));
            let factor = Complex64::new(2.0, 0.0).powc(-s);
            assert!((b.values()[k] - factor * a.values()[k]).norm() < 1e-9);
        }
    }

    #[test]
    fn grid_discipline_errors() {
        let g = LogGrid::new(1e-3, 1e3, 4096).unwrap();
        let f = RadialProfile::zeros(g);
        assert!(matches!(mellin_forward(&f, 0.0, &ContourGrid::new(10.0, 0.05).unwrap()), Err(Error::Strip(_))));
        assert!(matches!(mellin_forward(&f, 0.5, &ContourGrid::new(10.0, 0.5).unwrap()), Err(Error::Nyquist { .. })));
        assert!(matches!(
            mellin_forward(&f, 0.5, &ContourGrid::new(2000.0, 0.05).unwrap()),
            Err(Error::ContourAliasing { .. })
        ));
        let line = mellin_forward(&f, 0.5, &ContourGrid::new(200.0, 0.05).unwrap()).unwrap();
        assert!(line.warnings.is_empty());
        assert_eq!(mellin_inverse(&line.value, 2.0).value, 0.0);
    }

    #[test]
    fn round_trip_exponential() {
        let g = wide_grid();
        let f = RadialProfile::from_fn(g, |y| (-y).exp()).unwrap();
        let contour = ContourGrid::new(200.0, 0.05).unwrap();
        let line = mellin_forward(&f, 0.5, &contour).unwrap().value;
        for r in [0.1, 0.5, 1.0, 3.0, 10.0] {
            let v = mellin_inverse(&line, r);
            let want = (-r as f64).exp();
            assert!((v.value - want).abs() < 1e-5 * want, "r = {r}: {} vs {want}", v.value);
            assert!(v.imaginary.abs() < 1e-12);
        }
        // multiplying by a^{-s} evaluates F(a r)
        let a: f64 = 1.5;
        let shifted: Vec<Complex64> = line
            .values()
            .iter()
            .zip(contour.points())
            .map(|(v, b)| v * Complex64::new(a, 0.0).powc(-Complex64::new(0.5, b)))
            .collect();
        let shifted = MellinLine::new(0.5, contour, shifted).unwrap();
        let want = (-a * 2.0).exp();
        assert!((mellin_inverse(&shifted, 2.0).value - want).abs() < 1e-6);
    }

    #[test]
    fn convolution_identity() {
        let g = wide_grid();
        let f = RadialProfile::from_fn(g, |y| (-y).exp()).unwrap();
        let conv = mellin_convolve(&f, &f).unwrap();
        // (e^{-y} ⋆ e^{-y})(s) = 1/(1+s)
        for (r, v) in conv.samples().filter(|(r, _)| *r > 1e-3 && *r < 1e3) {
            assert!((v - 1.0 / (1.0 + r)).abs() < 1e-4 / (1.0 + r), "r = {r}");
        }
        let zero = mellin_convolve(&RadialProfile::zeros(g), &f).unwrap();
        assert!(zero.values().iter().all(|&v| v == 0.0));
        let other = LogGrid::from_log(-1.0, 0.02, 100).unwrap();
        assert!(mellin_convolve(&f, &RadialProfile::zeros(other)).is_err());
    }

    #[test]
    fn deconvolution_bounds() {
        let c = ContourGrid::new(10.0, 0.5).unwrap();
        let d: Vec<Complex64> = c.points().map(|b| Complex64::new(1.0 + 0.1 * b, 0.3)).collect();
        let d = MellinLine::new(0.5, c, d).unwrap();
        let q = deconvolve_line(&d, &d, 0.0, Taper::None).unwrap();
        assert!(q.values().iter().all(|v| (v - 1.0).norm() < 1e-15));
        let mut z: Vec<Complex64> = d.values().to_vec();
        z[3] = Complex64::new(0.0, 0.0);
        z[4] = Complex64::new(1e-9, 0.0);
        let z = MellinLine::new(0.5, c, z).unwrap();
        let ones = MellinLine::new(0.5, c, alloc::vec![Complex64::new(1.0, 0.0); c.len()]).unwrap();
        let eps = 1e-3;
        let peak = z.values().iter().fold(0.0f64, |m, v| m.max(v.norm()));
        let q = deconvolve_line(&ones, &z, eps, Taper::default()).unwrap();
        assert!(q.values().iter().all(|v| v.norm() <= 1.0 / (2.0 * eps * peak) + 1e-9));
        assert_eq!(q.values()[0], Complex64::new(0.0, 0.0));
        assert!(Taper::default().weight(7.9, 10.0) == 1.0);
    }
}
