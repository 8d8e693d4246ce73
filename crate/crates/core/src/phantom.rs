//! Test functions with closed-form harmonic profiles.
//!
//! A phantom is authored in projected coordinates: with `y = Λ(x)`, `r = |y|`,
//! `ζ = y / r`,
//!
//! ```text
//! f(x) = (1 + r²)^{n-2} Σ_{m,l} p_{m,l}(r) Y_l^m(ζ)
//! ```
//!
//! so the profile `f_{m,l}(r) = (1 + r²)^{n-2} p_{m,l}(r)` that reconstruction
//! recovers is known exactly.

use alloc::vec::Vec;

use crate::forward::SphereFunction;
use crate::geometry::{stereo_project, SpherePoint};
use crate::harmonics::{sph_harm, HarmonicIndex};
use crate::math::*;
use crate::quadrature::GaussLegendre;
use crate::{Error, Result};

/// A radial profile `p(r)`.
#[derive(Debug, Clone, PartialEq)]
pub enum RadialShape {
    /// `r^power · q(r) · e^{-rate·r}` with `q(r) = Σ coeffs[k] r^k`.
    ExpPoly { power: u32, coeffs: Vec<f64>, rate: f64 },
    /// `numer(r) / denom(r)`, coefficients in increasing degree.
    Rational { numer: Vec<f64>, denom: Vec<f64> },
}

impl RadialShape {
    pub fn exp_poly(power: u32, coeffs: &[f64], rate: f64) -> Self {
        RadialShape::ExpPoly { power, coeffs: coeffs.to_vec(), rate }
    }

    pub fn rational(numer: &[f64], denom: &[f64]) -> Self {
        RadialShape::Rational { numer: numer.to_vec(), denom: denom.to_vec() }
    }

    pub fn eval(&self, r: f64) -> f64 {
        match self {
            RadialShape::ExpPoly { power, coeffs, rate } => {
                r.powi(*power as i32) * horner(coeffs, r) * (-rate * r).exp()
            }
            RadialShape::Rational { numer, denom } => horner(numer, r) / horner(denom, r),
        }
    }

    fn check(&self) -> Result<()> {
        match self {
            RadialShape::ExpPoly { coeffs, rate, .. } => {
                if !(*rate > 0.0 && rate.is_finite()) {
                    return Err(Error::Domain { what: "profile decay rate", value: *rate });
                }
                if coeffs.is_empty() || coeffs.iter().any(|c| !c.is_finite()) {
                    return Err(Error::Domain { what: "profile polynomial", value: f64::NAN });
                }
            }
            RadialShape::Rational { numer, denom } => {
                if numer.is_empty() || denom.is_empty() || numer.iter().chain(denom).any(|c| !c.is_finite()) {
                    return Err(Error::Domain { what: "rational profile coefficients", value: f64::NAN });
                }
            }
        }
        Ok(())
    }

    /// Limit of `(1 + r²)^k p(r)` as `r → ∞`, when it exists and is zero.
    fn vanishes_at_infinity(&self, k: usize) -> bool {
        match self {
            RadialShape::ExpPoly { .. } => true,
            RadialShape::Rational { numer, denom } => degree(numer) + 2 * k < degree(denom),
        }
    }
}

fn horner(coeffs: &[f64], r: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * r + c)
}

fn degree(coeffs: &[f64]) -> usize {
    coeffs.iter().rposition(|&c| c != 0.0).unwrap_or(0)
}

/// One harmonic component of a phantom.
#[derive(Debug, Clone, PartialEq)]
pub struct PhantomMode {
    pub index: HarmonicIndex,
    pub shape: RadialShape,
}

/// A phantom on `S^{n-1}`, `n ∈ {3, 4}`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhantomSpec {
    n: usize,
    modes: Vec<PhantomMode>,
}

impl PhantomSpec {
    /// Rejects invalid or repeated harmonic indices.
    pub fn new(n: usize, modes: Vec<PhantomMode>) -> Result<Self> {
        for (k, mode) in modes.iter().enumerate() {
            mode.index.validate(n)?;
            mode.shape.check()?;
            if modes[..k].iter().any(|other| other.index == mode.index) {
                return Err(Error::InvalidIndex { n, m: mode.index.m, l: mode.index.l });
            }
        }
        Ok(Self { n, modes })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn modes(&self) -> &[PhantomMode] {
        &self.modes
    }

    /// Largest degree present, `None` for the zero phantom.
    pub fn max_degree(&self) -> Option<usize> {
        self.modes.iter().map(|m| m.index.m).max()
    }

    /// `g(y) = Σ p_{m,l}(|y|) Y_l^m(y/|y|)`.
    pub fn eval_reduced(&self, y: &[f64]) -> f64 {
        let r = norm_sq(y).sqrt();
        let mut zeta = [0.0; 3];
        if r > 0.0 {
            for (z, v) in zeta.iter_mut().zip(y) {
                *z = v / r;
            }
        } else {
            zeta[0] = 1.0;
        }
        let zeta = &zeta[..self.n - 1];
        self.modes
            .iter()
            .map(|mode| {
                let p = mode.shape.eval(r);
                if p == 0.0 {
                    0.0
                } else {
                    p * sph_harm(mode.index, self.n, zeta).unwrap_or(0.0)
                }
            })
            .sum()
    }
}

impl SphereFunction for PhantomSpec {
    fn eval(&self, x: &SpherePoint) -> f64 {
        phantom_eval(self, x)
    }

    fn eval_projected(&self, y: &[f64]) -> f64 {
        let w = (1.0 + norm_sq(y)).powi(self.n as i32 - 2);
        w * self.eval_reduced(y)
    }

    fn continuous_at_north_pole(&self) -> bool {
        self.modes.iter().all(|m| m.shape.vanishes_at_infinity(self.n - 2))
    }
}

/// `f(x)`; at the north pole the limit value (`0` when every profile decays
/// fast enough, `NaN` otherwise).
pub fn phantom_eval(spec: &PhantomSpec, x: &SpherePoint) -> f64 {
    match stereo_project(x) {
        Ok(y) => spec.eval_projected(&y),
        Err(_) if spec.continuous_at_north_pole() => 0.0,
        Err(_) => f64::NAN,
    }
}

/// Exact `f_{m,l}(r) = (1 + r²)^{n-2} p_{m,l}(r)`; `0` for absent modes.
pub fn phantom_profile(spec: &PhantomSpec, idx: HarmonicIndex, r: f64) -> f64 {
    spec.modes
        .iter()
        .find(|m| m.index == idx)
        .map_or(0.0, |m| (1.0 + r * r).powi(spec.n as i32 - 2) * m.shape.eval(r))
}

/// Outcome of the integrability check on `g(x) / |x|^{n-2}`.
#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisReport {
    /// `∫_0^∞ |p_{m,l}(r)| dr` per mode; infinite when judged divergent.
    pub modes: Vec<(HarmonicIndex, f64)>,
    /// Upper bound `√ω_{n-2} Σ ∫|p_{m,l}|` for `∫ |g(x)| / |x|^{n-2} dx`.
    pub bound: f64,
}

impl HypothesisReport {
    pub fn is_finite(&self) -> bool {
        self.bound.is_finite()
    }
}

// integration window in r; divergence is judged from the outermost decades
const LOG_R_LO: f64 = -27.631; // ln 1e-12
const LOG_R_HI: f64 = 13.816; // ln 1e6
const DIVERGENCE_RATIO: f64 = 1e-6;

/// Numerical form of the integrability hypothesis behind the reconstruction:
/// `∫_{R^{n-1}} |g(x)| / |x|^{n-2} dx < ∞`. In polar coordinates this is
/// bounded by `Σ_{m,l} ∫_0^∞ |p_{m,l}| dr · ∫_{S^{n-2}} |Y_l^m|`, and
/// `∫|Y| ≤ √ω_{n-2}` by Cauchy–Schwarz.
///
/// A profile is flagged divergent (infinite) when the decade `[1e5, 1e6]`
/// or the range below `1e-6` still carries more than `1e-6` of the
/// integral, i.e. when its mass has not converged inside `[1e-12, 1e6]`.
pub fn hypothesis_check(spec: &PhantomSpec) -> HypothesisReport {
    let n = spec.n;
    let mut modes = Vec::with_capacity(spec.modes.len());
    let mut total = 0.0;
    for mode in &spec.modes {
        let v = profile_l1(&mode.shape);
        total += v;
        modes.push((mode.index, v));
    }
    let bound = if spec.modes.is_empty() { 0.0 } else { total * sphere_area(n - 2).sqrt() };
    HypothesisReport { modes, bound }
}

fn profile_l1(shape: &RadialShape) -> f64 {
    // ∫|p(r)| dr = ∫|p(e^u)| e^u du, panels of unit length in u
    let rule = GaussLegendre::new(32);
    let mut mass = 0.0;
    let mut head = 0.0;
    let mut tail = 0.0;
    let panels = (LOG_R_HI - LOG_R_LO).ceil() as usize;
    let width = (LOG_R_HI - LOG_R_LO) / panels as f64;
    let head_end = -13.816; // ln 1e-6
    let tail_start = 11.513; // ln 1e5
    for k in 0..panels {
        let a = LOG_R_LO + width * k as f64;
        let b = a + width;
        for (u, w) in rule.mapped(a, b) {
            let r = u.exp();
            let v = w * shape.eval(r).abs() * r;
            if !v.is_finite() {
                return f64::INFINITY;
            }
            mass += v;
            if u < head_end {
                head += v;
            }
            if u > tail_start {
                tail += v;
            }
        }
    }
    if head > DIVERGENCE_RATIO * mass || tail > DIVERGENCE_RATIO * mass {
        f64::INFINITY
    } else {
        mass
    }
}

/// The default one-mode phantom: mode `(0, 1)` with `p(r) = r³ e^{-r}`.
pub fn single_mode(n: usize) -> Result<PhantomSpec> {
    PhantomSpec::new(
        n,
        alloc::vec![PhantomMode {
            index: HarmonicIndex::new(0, 1),
            shape: RadialShape::exp_poly(3, &[1.0], 1.0),
        }],
    )
}

/// Four active modes up to degree 4 with distinct radial shapes, for `n = 3`.
/// Each profile vanishes at the origin to order at least `m + 2`.
pub fn four_mode() -> Result<PhantomSpec> {
    let mode = |m, l, power, coeffs: &[f64], rate| PhantomMode {
        index: HarmonicIndex::new(m, l),
        shape: RadialShape::exp_poly(power, coeffs, rate),
    };
    PhantomSpec::new(
        3,
        alloc::vec![
            mode(0, 1, 2, &[1.0], 1.5),
            mode(1, 1, 3, &[0.8, -0.2], 1.2),
            mode(2, 2, 4, &[0.5], 1.6),
            mode(4, 1, 6, &[0.05], 2.0),
        ],
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::stereo_unproject;
    use crate::harmonics::{project_onto_harmonic, sphere_quadrature};

    #[test]
    fn origin_value_and_absent_mode() {
        let spec = PhantomSpec::new(
            3,
            alloc::vec![PhantomMode { index: HarmonicIndex::new(0, 1), shape: RadialShape::exp_poly(1, &[1.0], 1.0) }],
        )
        .unwrap();
        let south = SpherePoint::south_pole(3).unwrap();
        assert_eq!(phantom_eval(&spec, &south), 0.0);
        assert_eq!(phantom_profile(&spec, HarmonicIndex::new(2, 1), 1.3), 0.0);
        let north = SpherePoint::north_pole(3).unwrap();
        assert_eq!(phantom_eval(&spec, &north), 0.0);
    }

    #[test]
    fn rejects_duplicates_and_bad_indices() {
        let m = |m, l| PhantomMode { index: HarmonicIndex::new(m, l), shape: RadialShape::exp_poly(2, &[1.0], 1.0) };
        assert!(PhantomSpec::new(3, alloc::vec![m(1, 1), m(1, 1)]).is_err());
        assert!(PhantomSpec::new(3, alloc::vec![m(1, 3)]).is_err());
        assert!(PhantomSpec::new(4, alloc::vec![m(1, 3)]).is_ok());
    }

    #[test]
    fn ring_projection_recovers_profiles() {
        for n in [3, 4] {
            let spec = if n == 3 {
                four_mode().unwrap()
            } else {
                PhantomSpec::new(
                    4,
                    alloc::vec![
                        PhantomMode { index: HarmonicIndex::new(0, 1), shape: RadialShape::exp_poly(2, &[1.0], 1.0) },
                        PhantomMode { index: HarmonicIndex::new(2, 4), shape: RadialShape::exp_poly(4, &[1.0, 0.3], 1.5) },
                    ],
                )
                .unwrap()
            };
            let quad = sphere_quadrature(n, 24).unwrap();
            for r in [0.3, 1.0, 2.7] {
                let samples: Vec<f64> = quad
                    .nodes()
                    .map(|z| {
                        let y: Vec<f64> = z.iter().map(|v| r * v).collect();
                        phantom_eval(&spec, &stereo_unproject(&y))
                    })
                    .collect();
                for idx in HarmonicIndex::all(n, 4).unwrap() {
                    let got = project_onto_harmonic(&quad, &samples, idx).unwrap();
                    let want = phantom_profile(&spec, idx, r);
                    assert!((got - want).abs() < 1e-9 * want.abs().max(1.0), "n={n} {idx:?} r={r}: {got} vs {want}");
                }
            }
        }
    }

    #[test]
    fn hypothesis_examples() {
        let one = |shape| PhantomSpec::new(3, alloc::vec![PhantomMode { index: HarmonicIndex::new(0, 1), shape }]).unwrap();
        let ok = hypothesis_check(&one(RadialShape::exp_poly(1, &[1.0], 1.0)));
        assert!((ok.modes[0].1 - 1.0).abs() < 1e-10, "{:?}", ok);
        assert!((ok.bound - TAU.sqrt()).abs() < 1e-9);
        let bad = hypothesis_check(&one(RadialShape::rational(&[1.0], &[1.0, 1.0])));
        assert!(!bad.is_finite());
        let singular = hypothesis_check(&one(RadialShape::rational(&[1.0], &[0.0, 1.0, 0.0, 1.0])));
        assert!(!singular.is_finite());
        let empty = hypothesis_check(&PhantomSpec::new(3, Vec::new()).unwrap());
        assert_eq!(empty.bound, 0.0);
        assert!(hypothesis_check(&four_mode().unwrap()).is_finite());
        assert!(hypothesis_check(&single_mode(4).unwrap()).is_finite());
    }
}
