//! Property suites run by `subsphere verify` and the acceptance harness.
//!
//! Each check reports its worst residual against a fixed tolerance.
//! Random configurations come from a seeded ChaCha stream, so every run
//! sees the same cases.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use subsphere_core::forward::{make_sinogram, spherical_transform};
use subsphere_core::geometry::{
    c_to_theta, measure_factor, subsphere_point, SpherePoint, tangency_discriminant, tangent_distance, theta_to_c,
    SpheroidGeometry, SubsphereCoord,
};
use subsphere_core::grid::LogGrid;
use subsphere_core::harmonics::{funk_hecke_check, sphere_quadrature, HarmonicIndex};
use subsphere_core::inversion::sinogram_to_k;
use subsphere_core::kernel::{kernel_h, kernel_h_mellin_at, KernelSpec};
use subsphere_core::mellin::{mellin_convolve, mellin_forward, mellin_inverse, ContourGrid, RadialProfile};
use subsphere_core::phantom::{PhantomMode, PhantomSpec, RadialShape};

use crate::config::Lambda;
use crate::oracles;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Suite {
    Geometry,
    FunkHecke,
    Mellin,
    Kernel,
    Keystone,
}

impl Suite {
    pub const ALL: [Suite; 5] = [Suite::Geometry, Suite::FunkHecke, Suite::Mellin, Suite::Kernel, Suite::Keystone];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Geometry => "geometry",
            Suite::FunkHecke => "funk-hecke",
            Suite::Mellin => "mellin",
            Suite::Kernel => "kernel",
            Suite::Keystone => "keystone",
        }
    }

    pub fn parse_list(text: &str) -> Result<Vec<Suite>, String> {
        let mut out = Vec::new();
        for word in text.split(',').map(str::trim).filter(|w| !w.is_empty()) {
            if word == "all" {
                out.extend(Suite::ALL);
                continue;
            }
            match Suite::ALL.iter().find(|s| s.name() == word) {
                Some(s) => out.push(*s),
                None => {
                    let names: Vec<&str> = Suite::ALL.iter().map(|s| s.name()).collect();
                    return Err(format!("suite: unknown suite `{word}` (expected all, {})", names.join(", ")));
                }
            }
        }
        out.sort();
        out.dedup();
        Ok(out)
    }
}

/// Outcome of one property check.
#[derive(Debug, Clone)]
pub struct Check {
    pub suite: Suite,
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub cases: usize,
    pub elapsed: Duration,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.residual <= self.tolerance
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {}/{}: residual {:.3e} (tolerance {:.0e}, {} cases, {:.2} s)",
            if self.passed() { "PASS" } else { "FAIL" },
            self.suite.name(),
            self.name,
            self.residual,
            self.tolerance,
            self.cases,
            self.elapsed.as_secs_f64()
        )
    }
}

/// Runs `body`, which returns `(worst residual, case count)`.
fn timed(suite: Suite, name: &str, tolerance: f64, body: impl FnOnce() -> (f64, usize)) -> Check {
    let start = Instant::now();
    let (residual, cases) = body();
    // a NaN residual must fail
    let residual = if residual.is_nan() { f64::INFINITY } else { residual };
    Check { suite, name: name.into(), residual, tolerance, cases, elapsed: start.elapsed() }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_unit(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let r2: f64 = v.iter().map(|x| x * x).sum();
        if r2 > 1e-4 && r2 <= 1.0 {
            let r = r2.sqrt();
            return v.into_iter().map(|x| x / r).collect();
        }
    }
}

/// Every suite in `suites`, in order.
pub fn run(suites: &[Suite]) -> Vec<Check> {
    let mut out = Vec::new();
    for s in suites {
        match s {
            Suite::Geometry => {
                out.extend(tangency(500, 11));
                out.extend(measure(200, 12));
            }
            Suite::FunkHecke => out.push(funk_hecke(100, 10, 13)),
            Suite::Mellin => out.extend(mellin()),
            Suite::Kernel => out.extend(kernel()),
            Suite::Keystone => out.extend(keystone(&kernel_h, &KeystoneCase::standard())),
        }
    }
    out
}

/// Tangent-plane geometry of the parametrized subspheres.
///
/// For random `(λ, θ, ψ)` the hyperplane through `n` points of the subsphere
/// is recovered by solving `⟨x_k, ν⟩ = 1`; its origin distance `1/|ν|` is
/// compared with `√(1 + sinh²λ sin²θ) / cosh λ`. The discriminant of the
/// meridian line–ellipse quadratic (independently derived: it is
/// proportional to `cos²θ + cosh²λ sin²θ - cosh²λ d²`) must vanish at that
/// distance.
pub fn tangency(cases: usize, seed: u64) -> Vec<Check> {
    let mut rng = rng(seed);
    let mut configs = Vec::with_capacity(cases);
    for k in 0..cases {
        let n = 3 + k % 2;
        let lambda: f64 = rng.gen_range(0.2..3.0);
        let theta: f64 = rng.gen_range(-1.4..1.4);
        let psi = random_unit(&mut rng, n - 1);
        configs.push((n, lambda, theta, psi));
    }
    let distance = timed(Suite::Geometry, "tangent-distance", 1e-10, || {
        let mut worst: f64 = 0.0;
        for (n, lambda, theta, psi) in &configs {
            let g = SpheroidGeometry::new(*n, *lambda).expect("valid geometry");
            let coord = SubsphereCoord::from_theta(psi, *theta, &g).expect("valid subsphere");
            let want = (1.0 + (lambda.sinh() * theta.sin()).powi(2)).sqrt() / lambda.cosh();
            // n points spread over S^{n-2}: simplex vertices
            let points: Vec<Vec<f64>> =
                simplex(n - 1).iter().map(|w| subsphere_point(&coord, &g, w).coords().to_vec()).collect();
            let a: Vec<f64> = points.iter().flatten().copied().collect();
            let nu = oracles::solve(a, vec![1.0; *n], *n).expect("points span a hyperplane");
            let got = 1.0 / nu.iter().map(|v| v * v).sum::<f64>().sqrt();
            let lib = tangent_distance(*theta, &g).expect("finite geometry");
            worst = worst.max((got - want).abs()).max((lib - want).abs());
        }
        (worst, configs.len())
    });
    let discriminant = timed(Suite::Geometry, "tangency-discriminant", 1e-10, || {
        let mut worst: f64 = 0.0;
        for (n, lambda, theta, _) in &configs {
            let g = SpheroidGeometry::new(*n, *lambda).expect("valid geometry");
            let d = tangent_distance(*theta, &g).expect("finite geometry");
            let (s, c) = theta.sin_cos();
            let ch2 = lambda.cosh().powi(2);
            let oracle = (c * c + ch2 * s * s - ch2 * d * d) / ch2;
            worst = worst.max(tangency_discriminant(*theta, d, &g).abs()).max(oracle.abs());
        }
        (worst, configs.len())
    });
    let round_trip = timed(Suite::Geometry, "c-theta-round-trip", 1e-12, || {
        let mut worst: f64 = 0.0;
        for (n, lambda, theta, _) in &configs {
            let g = SpheroidGeometry::new(*n, *lambda).expect("valid geometry");
            let c = theta_to_c(*theta, &g).expect("theta in range");
            let back = c_to_theta(c, &g).expect("c positive");
            let c_again = theta_to_c(back, &g).expect("theta in range");
            worst = worst.max((back - theta).abs()).max((c_again - c).abs() / c);
        }
        (worst, configs.len())
    });
    vec![distance, discriminant, round_trip]
}

/// Vertices of a regular simplex on `S^{d-1}` (`d + 1` unit vectors).
fn simplex(d: usize) -> Vec<Vec<f64>> {
    // centered standard basis of R^{d+1}, expressed in an orthonormal basis
    // of the hyperplane Σx = 0
    let k = d + 1;
    let center = 1.0 / k as f64;
    let raw: Vec<Vec<f64>> = (0..k)
        .map(|i| (0..k).map(|j| if i == j { 1.0 - center } else { -center }).collect())
        .collect();
    let ones = vec![1.0 / (k as f64).sqrt(); k];
    let frame = oracles::tangent_basis(&ones);
    raw.iter()
        .map(|v| {
            let p: Vec<f64> = frame.iter().map(|e| e.iter().zip(v).map(|(a, b)| a * b).sum()).collect();
            let r = p.iter().map(|x| x * x).sum::<f64>().sqrt();
            p.into_iter().map(|x| x / r).collect()
        })
        .collect()
}

/// The density from `measure_factor` against a finite-difference volume
/// element, and for `n = 3` its integral against the circumference
/// `2π√(1 - t²)`.
pub fn measure(cases: usize, seed: u64) -> Vec<Check> {
    let mut rng = rng(seed);
    let jacobian = timed(Suite::Geometry, "measure-jacobian", 1e-6, || {
        let mut worst: f64 = 0.0;
        for k in 0..cases {
            let n = 3 + k % 3;
            let lambda: f64 = rng.gen_range(0.2..3.0);
            let theta: f64 = rng.gen_range(-1.4..1.4);
            let psi = random_unit(&mut rng, n - 1);
            let omega = random_unit(&mut rng, n - 1);
            let g = SpheroidGeometry::new(n, lambda).expect("valid geometry");
            let coord = SubsphereCoord::from_theta(&psi, theta, &g).expect("valid subsphere");
            let fd = oracles::volume_element(&omega, 1e-5, |w| subsphere_point(&coord, &g, w).coords().to_vec());
            let lib = measure_factor(&coord, &g, &omega);
            worst = worst.max((lib - fd).abs() / fd);
        }
        (worst, cases)
    });
    let circumference = timed(Suite::Geometry, "measure-circumference", 1e-8, || {
        let mut worst: f64 = 0.0;
        for _ in 0..cases {
            let lambda: f64 = rng.gen_range(0.2..3.0);
            let theta: f64 = rng.gen_range(-1.4..1.4);
            let psi = random_unit(&mut rng, 2);
            let g = SpheroidGeometry::new(3, lambda).expect("valid geometry");
            let coord = SubsphereCoord::from_theta(&psi, theta, &g).expect("valid subsphere");
            let t = (1.0 + (lambda.sinh() * theta.sin()).powi(2)).sqrt() / lambda.cosh();
            let want = TAU * ((1.0 - t) * (1.0 + t)).sqrt();
            // the density peaks at ω = -ψ; grade panels in the angle from -ψ
            let mut edges = vec![0.0];
            let mut w = PI;
            while w > 1e-9 {
                edges.push(PI - w);
                w *= 0.5;
            }
            edges.push(PI);
            edges.sort_by(f64::total_cmp);
            let half = oracles::composite(&edges, 24, |beta| {
                // angle beta measured from +ψ
                let (s, c) = beta.sin_cos();
                let omega = [c * psi[0] - s * psi[1], c * psi[1] + s * psi[0]];
                measure_factor(&coord, &g, &omega)
            });
            let got = 2.0 * half;
            let transform = spherical_transform(&|_: &SpherePoint| 1.0, &coord, &g, &sphere_quadrature(3, 256).expect("rule"))
                .expect("finite transform");
            worst = worst.max((got - want).abs() / want).max((transform - want).abs() / want);
        }
        (worst, cases)
    });
    vec![jacobian, circumference]
}

/// Funk–Hecke: latitude averages of every harmonic of degree `≤ m_max`,
/// `n ∈ {3, 4}`, at random `(ξ, ψ)`.
pub fn funk_hecke(cases: usize, m_max: usize, seed: u64) -> Check {
    let mut rng = rng(seed);
    timed(Suite::FunkHecke, "latitude-average", 1e-9, || {
        let mut worst: f64 = 0.0;
        let mut count = 0;
        for n in [3, 4] {
            let indices = HarmonicIndex::all(n, m_max).expect("valid degree range");
            for _ in 0..cases {
                let xi: f64 = rng.gen_range(0.0..PI);
                let psi = random_unit(&mut rng, n - 1);
                for idx in &indices {
                    let (lhs, rhs) = funk_hecke_check(n, *idx, xi, &psi).expect("valid index");
                    worst = worst.max((lhs - rhs).abs());
                    count += 1;
                }
            }
        }
        (worst, count)
    })
}

struct Pair {
    label: &'static str,
    f1: fn(f64) -> f64,
    f2: fn(f64) -> f64,
    /// `M F_1(s) · M F_2(1 - s)`
    product: fn(Complex64) -> Complex64,
}

fn g(z: Complex64) -> Complex64 {
    oracles::gamma(z)
}

fn one() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

const PAIRS: [Pair; 5] = [
    Pair { label: "exp*exp", f1: |y| (-y).exp(), f2: |y| (-y).exp(), product: |s| g(s) * g(one() - s) },
    Pair {
        label: "exp*gauss",
        f1: |y| (-y).exp(),
        f2: |y| (-y * y).exp(),
        product: |s| g(s) * g((one() - s) / 2.0) / 2.0,
    },
    Pair {
        label: "yexp*exp2",
        f1: |y| y * (-y).exp(),
        f2: |y| (-2.0 * y).exp(),
        product: |s| g(s + 1.0) * g(one() - s) * Complex64::new(2.0, 0.0).powc(s - 1.0),
    },
    Pair {
        label: "gauss*yexp",
        f1: |y| (-y * y).exp(),
        f2: |y| y * (-y).exp(),
        product: |s| g(s / 2.0) / 2.0 * g(2.0 - s),
    },
    Pair {
        label: "y2gauss*exp",
        f1: |y| y * y * (-y * y).exp(),
        f2: |y| (-y).exp(),
        product: |s| g((s + 2.0) / 2.0) / 2.0 * g(one() - s),
    },
];

/// Mellin pairs, inversion round trip and the convolution product rule.
pub fn mellin() -> Vec<Check> {
    let pair = timed(Suite::Mellin, "gamma-pair", 1e-8, || {
        // u ∈ [-56, 4.5]: e^{-y} is below 1e-39 at the right end and the
        // left end carries e^{-28}
        let grid = LogGrid::from_log(-56.0, 0.01, 6051).expect("grid");
        let f = RadialProfile::from_fn(grid, |y| (-y).exp()).expect("finite");
        let contour = ContourGrid::new(9.5, 0.05).expect("contour");
        let line = mellin_forward(&f, 0.5, &contour).expect("in strip").value;
        let mut worst: f64 = 0.0;
        let mut count = 0;
        for (k, b) in contour.points().enumerate() {
            // b = 0, 0.5, ..., 9.5
            if b < -1e-12 || (k - contour.half_count()) % 10 != 0 {
                continue;
            }
            let s = Complex64::new(0.5, b);
            worst = worst.max((line.values()[k] - g(s)).norm());
            count += 1;
        }
        (worst, count)
    });
    let round_trip = timed(Suite::Mellin, "inversion-round-trip", 1e-5, || {
        let grid = LogGrid::new(1e-3, 1e3, 4096).expect("grid");
        let contour = ContourGrid::new(200.0, 0.05).expect("contour");
        let profiles: [fn(f64) -> f64; 3] = [|y| y * (-y).exp(), |y| y * y * (-y).exp(), |y| y.powi(3) * (-2.0 * y).exp()];
        let mut worst: f64 = 0.0;
        let mut count = 0;
        for f in profiles {
            let p = RadialProfile::from_fn(grid, f).expect("finite");
            let line = mellin_forward(&p, 0.5, &contour).expect("in strip").value;
            for r in grid.points().filter(|r| (0.1..=10.0).contains(r)).step_by(7) {
                let got = mellin_inverse(&line, r).value;
                worst = worst.max((got - f(r)).abs() / f(r).abs());
                count += 1;
            }
        }
        (worst, count)
    });
    let convolution = timed(Suite::Mellin, "convolution-identity", 1e-5, || {
        // inputs on u ∈ [-60, 4.5]; the product lives on [-64.5, 64.5]
        let grid = LogGrid::from_log(-60.0, 0.01, 6451).expect("grid");
        let contour = ContourGrid::new(10.0, 0.02).expect("contour");
        let mut worst: f64 = 0.0;
        let mut count = 0;
        for pair in &PAIRS {
            let f1 = RadialProfile::from_fn(grid, pair.f1).expect("finite");
            let f2 = RadialProfile::from_fn(grid, pair.f2).expect("finite");
            let conv = mellin_convolve(&f1, &f2).expect("equal steps");
            for rho in [0.3, 0.5, 0.7] {
                let line = mellin_forward(&conv, rho, &contour).expect("in strip").value;
                let exact: Vec<Complex64> = contour.points().map(|b| (pair.product)(Complex64::new(rho, b))).collect();
                let scale = exact.iter().fold(0.0f64, |m, v| m.max(v.norm()));
                let err = line.values().iter().zip(&exact).fold(0.0f64, |m, (a, b)| m.max((a - b).norm()));
                let rel = err / scale;
                if !(rel <= 1e-5) {
                    eprintln!("  convolution pair {} at rho = {rho}: {rel:.3e}", pair.label);
                }
                worst = worst.max(rel);
                count += 1;
            }
        }
        (worst, count)
    });
    vec![pair, round_trip, convolution]
}

/// Kernel closed forms, the slice limit and the two Mellin evaluations.
pub fn kernel() -> Vec<Check> {
    let pi_integral = timed(Suite::Kernel, "n3-m0-integral", 1e-8, || {
        let mut worst: f64 = 0.0;
        let mut count = 0;
        for lambda in [0.3, 1.0, 2.5] {
            let g = SpheroidGeometry::new(3, lambda).expect("geometry");
            let spec = KernelSpec::new(g, 0);
            let (lo, hi) = spec.support();
            let x_form = oracles::chebyshev_substituted(lo, hi, 8, 32, |x| kernel_h(&spec, x));
            let phi_form = kernel_h_mellin_at(&spec, Complex64::new(1.0, 0.0)).expect("strip");
            worst = worst.max((x_form - PI).abs()).max((phi_form - PI).norm());
            count += 2;
        }
        (worst, count)
    });
    let n4_closed = timed(Suite::Kernel, "n4-m0-closed-forms", 1e-10, || {
        let mut worst: f64 = 0.0;
        let mut count = 0;
        for lambda in [0.4, 1.0, 2.0] {
            let g = SpheroidGeometry::new(4, lambda).expect("geometry");
            let t = g.tanh();
            let spec = KernelSpec::new(g, 0);
            let (lo, hi) = spec.support();
            for k in 0..=40 {
                let x = lo + (hi - lo) * k as f64 / 40.0;
                worst = worst.max((kernel_h(&spec, x) - x / t).abs());
                count += 1;
            }
            let integral = oracles::composite(&[lo, hi], 16, |x| kernel_h(&spec, x));
            worst = worst.max((integral - 2.0).abs());
            // ∫ x^{s-1} x / t dx = ((1+t)^{s+1} - (1-t)^{s+1}) / (t (s+1))
            for b in [0.0, 1.0, 5.0, 20.0] {
                let s = Complex64::new(0.5, b);
                let closed = (Complex64::new(hi, 0.0).powc(s + 1.0) - Complex64::new(lo, 0.0).powc(s + 1.0)) / (t * (s + 1.0));
                let got = kernel_h_mellin_at(&spec, s).expect("strip");
                worst = worst.max((got - closed).norm() / closed.norm().max(1.0));
                count += 1;
            }
            count += 1;
        }
        (worst, count)
    });
    let limit = timed(Suite::Kernel, "slice-limit", 1e-5, || {
        let mut worst: f64 = 0.0;
        let mut count = 0;
        for n in [3, 4] {
            let near = SpheroidGeometry::from_tanh(n, 1.0 - 1e-8).expect("geometry");
            let slice = SpheroidGeometry::slice(n).expect("geometry");
            for m in 0..=6 {
                let (a, b) = (KernelSpec::new(near, m), KernelSpec::new(slice, m));
                for k in 0..=396 {
                    let x = 0.01 + 0.005 * k as f64;
                    worst = worst.max((kernel_h(&a, x) - kernel_h(&b, x)).abs());
                    count += 1;
                }
            }
        }
        (worst, count)
    });
    let written_out = timed(Suite::Kernel, "formula-transcription", 1e-12, || {
        // the library kernel against the formula with the explicit Gegenbauer sum
        let mut worst: f64 = 0.0;
        let mut count = 0;
        for n in [3, 4] {
            for tanh in [0.3, 0.9, 1.0] {
                let g = SpheroidGeometry::from_tanh(n, tanh).expect("geometry");
                for m in 0..=6 {
                    let spec = KernelSpec::new(g, m);
                    let (lo, hi) = spec.support();
                    for k in 1..100 {
                        let x = lo + (hi - lo) * k as f64 / 100.0;
                        let want = oracles::kernel_with_superscript(n, tanh, m, 0.5 * (n as f64 - 3.0), x);
                        worst = worst.max((kernel_h(&spec, x) - want).abs() / want.abs().max(1.0));
                        count += 1;
                    }
                }
            }
        }
        (worst, count)
    });
    let n4_mellin = timed(Suite::Kernel, "n4-mellin-x-form", 1e-8, || {
        // smooth on its support, so plain Gauss in x is a reference
        let mut worst: f64 = 0.0;
        let mut count = 0;
        let g = SpheroidGeometry::new(4, 0.9).expect("geometry");
        for m in 0..=6 {
            let spec = KernelSpec::new(g, m);
            let (lo, hi) = spec.support();
            let edges: Vec<f64> = (0..=8).map(|k| lo + (hi - lo) * k as f64 / 8.0).collect();
            for b in [0.0, 0.7, 3.0, 10.0, 25.0] {
                let s = Complex64::new(0.5, b);
                let re = oracles::composite(&edges, 48, |x| (Complex64::new(x, 0.0).powc(s - 1.0) * kernel_h(&spec, x)).re);
                let im = oracles::composite(&edges, 48, |x| (Complex64::new(x, 0.0).powc(s - 1.0) * kernel_h(&spec, x)).im);
                let got = kernel_h_mellin_at(&spec, s).expect("strip");
                worst = worst.max((got - Complex64::new(re, im)).norm() / Complex64::new(re, im).norm().max(1.0));
                count += 1;
            }
        }
        (worst, count)
    });
    let n3_mellin = timed(Suite::Kernel, "n3-mellin-x-form", 1e-5, || {
        let mut worst: f64 = 0.0;
        let mut count = 0;
        let g = SpheroidGeometry::new(3, 0.9).expect("geometry");
        for m in 0..=6 {
            let spec = KernelSpec::new(g, m);
            let (lo, hi) = spec.support();
            for b in [0.0, 0.7, 3.0, 10.0] {
                let s = Complex64::new(0.5, b);
                let f = |x: f64| Complex64::new(x, 0.0).powc(s - 1.0) * kernel_h(&spec, x);
                let re = oracles::chebyshev_substituted(lo, hi, 16, 32, |x| f(x).re);
                let im = oracles::chebyshev_substituted(lo, hi, 16, 32, |x| f(x).im);
                let got = kernel_h_mellin_at(&spec, s).expect("strip");
                worst = worst.max((got - Complex64::new(re, im)).norm() / Complex64::new(re, im).norm().max(1.0));
                count += 1;
            }
        }
        (worst, count)
    });
    let slice_gamma = timed(Suite::Kernel, "slice-gamma-ratio", 1e-9, || {
        // n = 3, m = 0: ∫_0^2 x^{σ-1} 2/√(4-x²) dx = 2^{σ-1} √π Γ(σ/2) / Γ((σ+1)/2)
        let spec = KernelSpec::new(SpheroidGeometry::slice(3).expect("geometry"), 0);
        let mut worst: f64 = 0.0;
        for sigma in [0.5, 0.8, 1.0, 1.5] {
            let want = 2f64.powf(sigma - 1.0) * PI.sqrt() * oracles::gamma_real(sigma / 2.0)
                / oracles::gamma_real((sigma + 1.0) / 2.0);
            let got = kernel_h_mellin_at(&spec, Complex64::new(sigma, 0.0)).expect("strip");
            worst = worst.max((got.re - want).abs() / want).max(got.im.abs());
        }
        (worst, 4)
    });
    vec![pi_integral, n4_closed, limit, written_out, n4_mellin, n3_mellin, slice_gamma]
}

/// One configuration of the keystone identity.
#[derive(Debug, Clone, Copy)]
pub struct KeystoneCase {
    pub n: usize,
    pub lambda: Lambda,
    pub m_max: usize,
    pub psi_res: usize,
    pub quad_res: usize,
    pub c_count: usize,
}

impl KeystoneCase {
    /// `n ∈ {3, 4}`, finite and slice geometry, `m ≤ 6`, `c ∈ [0.1, 10]`.
    pub fn standard() -> Vec<Self> {
        let mut v = Vec::new();
        // the slice subspheres all pass through the south pole, where the
        // measure concentrates; they need finer ω rules
        for (lambda, q3, q4) in [(Lambda::Finite(0.8), 128, 40), (Lambda::Infinite, 256, 120)] {
            v.push(KeystoneCase { n: 3, lambda, m_max: 6, psi_res: 16, quad_res: q3, c_count: 21 });
            v.push(KeystoneCase { n: 4, lambda, m_max: 6, psi_res: 8, quad_res: q4, c_count: 21 });
        }
        v
    }
}

/// Radial profile of mode `(m, 1)` in the keystone phantom.
fn keystone_profile(m: usize) -> RadialShape {
    RadialShape::exp_poly(m as u32 + 2, &[1.0, 0.3], 1.0 + 0.1 * m as f64)
}

/// `K_{m,l}` from the sinogram of a multi-mode phantom against the direct
/// quadrature `∫ p_{m,l}(cx) h_{m,λ}(x) dx`, with `kernel` as `h`. The error
/// is the largest deviation over `c ∈ [0.1, 10]` relative to `max_c |K|`.
pub fn keystone(kernel: &(dyn Fn(&KernelSpec, f64) -> f64 + Sync), cases: &[KeystoneCase]) -> Vec<Check> {
    cases
        .iter()
        .map(|case| {
            let label = format!("n{}-lambda-{}", case.n, case.lambda);
            timed(Suite::Keystone, &label, 1e-6, || keystone_case(kernel, case))
        })
        .collect()
}

fn keystone_case(kernel: &(dyn Fn(&KernelSpec, f64) -> f64 + Sync), case: &KeystoneCase) -> (f64, usize) {
    let n = case.n;
    let geometry = case.lambda.geometry(n).expect("geometry");
    let modes: Vec<PhantomMode> = (0..=case.m_max)
        .map(|m| PhantomMode { index: HarmonicIndex::new(m, 1), shape: keystone_profile(m) })
        .collect();
    let phantom = PhantomSpec::new(n, modes).expect("valid phantom");
    let psi = sphere_quadrature(n, case.psi_res).expect("psi rule");
    let quad = sphere_quadrature(n, case.quad_res).expect("omega rule");
    let grid = LogGrid::new(0.1, 10.0, case.c_count).expect("grid");
    let sino = make_sinogram(&phantom, &geometry, &psi, &grid, &quad).expect("sinogram");
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for m in 0..=case.m_max {
        let k = sinogram_to_k(&sino, HarmonicIndex::new(m, 1)).expect("projection");
        let spec = KernelSpec::new(geometry, m);
        let (lo, hi) = spec.support();
        let shape = keystone_profile(m);
        let direct: Vec<f64> = grid
            .points()
            .map(|c| oracles::chebyshev_substituted(lo, hi, 16, 40, |x| shape.eval(c * x) * kernel(&spec, x)))
            .collect();
        let scale = direct.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let err = k.values().iter().zip(&direct).fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
        worst = worst.max(err / scale);
        count += grid.len();
    }
    (worst, count)
}

/// The kernel with the Gegenbauer superscript written as `(n-3)/3`, for
/// mutation checks of the keystone suite.
pub fn mutated_kernel(spec: &KernelSpec, x: f64) -> f64 {
    let n = spec.n();
    oracles::kernel_with_superscript(n, spec.geometry().tanh(), spec.m(), (n as f64 - 3.0) / 3.0, x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_lists() {
        assert_eq!(Suite::parse_list("all").unwrap(), Suite::ALL.to_vec());
        assert_eq!(Suite::parse_list("mellin, geometry").unwrap(), vec![Suite::Geometry, Suite::Mellin]);
        assert!(Suite::parse_list("geometry,bogus").is_err());
    }

    #[test]
    fn simplex_vertices_are_unit_and_balanced() {
        for d in [2, 3, 4] {
            let v = simplex(d);
            assert_eq!(v.len(), d + 1);
            for i in 0..d {
                let s: f64 = v.iter().map(|p| p[i]).sum();
                assert!(s.abs() < 1e-14);
            }
            for p in &v {
                assert!((p.iter().map(|x| x * x).sum::<f64>() - 1.0).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn small_suites_pass() {
        for c in tangency(20, 1).into_iter().chain(measure(10, 2)).chain([funk_hecke(5, 4, 3)]) {
            assert!(c.passed(), "{c}");
        }
    }
}
