//! Reference computations that share no code path with the library under
//! test beyond the function being checked.

use num_complex::Complex64;
use subsphere_core::quadrature::GaussLegendre;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
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

/// `Γ(z)` by the Lanczos approximation (`g = 7`), reflected for `Re z < 1/2`.
/// Accurate to about `1e-14` relative near the real axis.
pub fn gamma(z: Complex64) -> Complex64 {
    use std::f64::consts::PI;
    if z.re < 0.5 {
        let s = (Complex64::new(PI, 0.0) * z).sin();
        return Complex64::new(PI, 0.0) / (s * gamma(Complex64::new(1.0, 0.0) - z));
    }
    let z = z - 1.0;
    let mut x = Complex64::new(LANCZOS[0], 0.0);
    for (k, c) in LANCZOS.iter().enumerate().skip(1) {
        x += *c / (z + k as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    (2.0 * PI).sqrt() * t.powc(z + 0.5) * (-t).exp() * x
}

pub fn gamma_real(x: f64) -> f64 {
    gamma(Complex64::new(x, 0.0)).re
}

/// `C_m^α(t)` from the explicit sum
/// `Σ_k (-1)^k Γ(m-k+α) / (Γ(α) k! (m-2k)!) (2t)^{m-2k}`; `α = 0` gives
/// the Chebyshev limit `T_m(t) = cos(m arccos t)`.
pub fn gegenbauer_explicit(alpha: f64, m: usize, t: f64) -> f64 {
    if alpha == 0.0 {
        return (m as f64 * t.clamp(-1.0, 1.0).acos()).cos();
    }
    let mut acc = 0.0;
    for k in 0..=m / 2 {
        // Γ(m-k+α)/Γ(α) as a rising product
        let rising: f64 = (0..m - k).map(|j| alpha + j as f64).product();
        let denom = factorial(k) * factorial(m - 2 * k);
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        acc += sign * rising / denom * (2.0 * t).powi((m - 2 * k) as i32);
    }
    acc
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|j| j as f64).product()
}

/// The radial kernel written out from its defining formula with the
/// Gegenbauer superscript `alpha` left free (`(n-3)/2` is the correct one).
pub fn kernel_with_superscript(n: usize, tanh: f64, m: usize, alpha: f64, x: f64) -> f64 {
    let t = tanh;
    let (lo, hi) = (1.0 - t, 1.0 + t);
    if !(x > 0.0 && x >= lo && x <= hi) {
        return 0.0;
    }
    let e = 0.5 * (n as f64 - 4.0);
    let scale = 2f64.powi(4 - n as i32);
    if t == 1.0 {
        return scale * x.powi(n as i32 - 3) * (4.0 - x * x).powf(e) * gegenbauer_explicit(alpha, m, x / 2.0);
    }
    let q = (1.0 + t - x) * (1.0 + t + x) * (x - 1.0 + t) * (x + 1.0 - t);
    let arg = ((x * x + 1.0 - t * t) / (2.0 * x)).clamp(-1.0, 1.0);
    scale * t.powi(3 - n as i32) * x * gegenbauer_explicit(alpha, m, arg) * q.max(0.0).powf(e)
}

/// `∫_a^b F(x) dx` after `x = (a+b)/2 - (b-a)/2 · cos θ`, which absorbs
/// inverse-square-root endpoint singularities. `panels` equal panels in `θ`
/// with `nodes` Gauss points each.
pub fn chebyshev_substituted<F: FnMut(f64) -> f64>(a: f64, b: f64, panels: usize, nodes: usize, mut f: F) -> f64 {
    let rule = GaussLegendre::new(nodes);
    let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
    let width = std::f64::consts::PI / panels as f64;
    let mut acc = 0.0;
    for k in 0..panels {
        for (theta, w) in rule.mapped(k as f64 * width, (k + 1) as f64 * width) {
            let x = mid - half * theta.cos();
            acc += w * half * theta.sin() * f(x);
        }
    }
    acc
}

/// Composite Gauss–Legendre over `edges`.
pub fn composite<F: FnMut(f64) -> f64>(edges: &[f64], nodes: usize, mut f: F) -> f64 {
    let rule = GaussLegendre::new(nodes);
    edges.windows(2).map(|e| rule.integrate(e[0], e[1], &mut f)).sum()
}

/// Determinant by Gaussian elimination with partial pivoting; `a` is
/// row-major `k × k`.
pub fn determinant(mut a: Vec<f64>, k: usize) -> f64 {
    let mut det = 1.0;
    for col in 0..k {
        let pivot = (col..k).max_by(|&i, &j| a[i * k + col].abs().total_cmp(&a[j * k + col].abs())).unwrap_or(col);
        if a[pivot * k + col] == 0.0 {
            return 0.0;
        }
        if pivot != col {
            for j in 0..k {
                a.swap(pivot * k + j, col * k + j);
            }
            det = -det;
        }
        let p = a[col * k + col];
        det *= p;
        for i in col + 1..k {
            let f = a[i * k + col] / p;
            for j in col..k {
                a[i * k + j] -= f * a[col * k + j];
            }
        }
    }
    det
}

/// Solves `a x = b` (row-major `k × k`) by Gaussian elimination with
/// partial pivoting.
pub fn solve(mut a: Vec<f64>, mut b: Vec<f64>, k: usize) -> Option<Vec<f64>> {
    for col in 0..k {
        let pivot = (col..k).max_by(|&i, &j| a[i * k + col].abs().total_cmp(&a[j * k + col].abs()))?;
        if a[pivot * k + col] == 0.0 {
            return None;
        }
        for j in 0..k {
            a.swap(pivot * k + j, col * k + j);
        }
        b.swap(pivot, col);
        for i in col + 1..k {
            let f = a[i * k + col] / a[col * k + col];
            for j in col..k {
                a[i * k + j] -= f * a[col * k + j];
            }
            b[i] -= f * b[col];
        }
    }
    let mut x = vec![0.0; k];
    for i in (0..k).rev() {
        let s: f64 = (i + 1..k).map(|j| a[i * k + j] * x[j]).sum();
        x[i] = (b[i] - s) / a[i * k + i];
    }
    Some(x)
}

/// Orthonormal basis of the complement of the unit vector `w` in `R^d`.
pub fn tangent_basis(w: &[f64]) -> Vec<Vec<f64>> {
    let d = w.len();
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(d - 1);
    let mut order: Vec<usize> = (0..d).collect();
    // seed with the axes least aligned with w
    order.sort_by(|&i, &j| w[i].abs().total_cmp(&w[j].abs()));
    for &axis in &order {
        if basis.len() == d - 1 {
            break;
        }
        let mut v = vec![0.0; d];
        v[axis] = 1.0;
        for u in std::iter::once(w).chain(basis.iter().map(Vec::as_slice)) {
            let p: f64 = v.iter().zip(u).map(|(a, b)| a * b).sum();
            v.iter_mut().zip(u).for_each(|(a, b)| *a -= p * b);
        }
        let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm > 1e-6 {
            v.iter_mut().for_each(|a| *a /= norm);
            basis.push(v);
        }
    }
    basis
}

/// `√det(JᵀJ)` of `map: S^{d-1} → R^N` at `w`, with `J` taken by central
/// differences along great circles through `w` in an orthonormal tangent
/// frame.
pub fn volume_element<F: FnMut(&[f64]) -> Vec<f64>>(w: &[f64], step: f64, mut map: F) -> f64 {
    let basis = tangent_basis(w);
    let k = basis.len();
    let columns: Vec<Vec<f64>> = basis
        .iter()
        .map(|e| {
            let at = |s: f64| -> Vec<f64> { w.iter().zip(e).map(|(a, b)| a * s.cos() + b * s.sin()).collect() };
            let plus = map(&at(step));
            let minus = map(&at(-step));
            plus.iter().zip(&minus).map(|(p, m)| (p - m) / (2.0 * step)).collect()
        })
        .collect();
    let mut gram = vec![0.0; k * k];
    for i in 0..k {
        for j in 0..k {
            gram[i * k + j] = columns[i].iter().zip(&columns[j]).map(|(a, b)| a * b).sum();
        }
    }
    determinant(gram, k).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_values() {
        assert!((gamma_real(0.5) - std::f64::consts::PI.sqrt()).abs() < 1e-14);
        assert!((gamma_real(5.0) - 24.0).abs() < 1e-12);
        // |Γ(1/2 + ib)|² = π / cosh(πb)
        for b in [0.3, 2.0, 7.5] {
            let g = gamma(Complex64::new(0.5, b));
            let want = std::f64::consts::PI / (std::f64::consts::PI * b).cosh();
            assert!((g.norm_sqr() - want).abs() < 1e-13 * want.max(1e-300) + 1e-300, "{b}");
        }
    }

    #[test]
    fn explicit_gegenbauer_matches_known_polynomials() {
        let t = 0.37;
        // Legendre P_3 and C_2^1 = U_2
        assert!((gegenbauer_explicit(0.5, 3, t) - 0.5 * (5.0 * t * t * t - 3.0 * t)).abs() < 1e-15);
        assert!((gegenbauer_explicit(1.0, 2, t) - (4.0 * t * t - 1.0)).abs() < 1e-15);
        assert!((gegenbauer_explicit(0.0, 4, t) - (8.0 * t.powi(4) - 8.0 * t * t + 1.0)).abs() < 1e-14);
    }

    #[test]
    fn linear_algebra() {
        let a = vec![2.0, 1.0, 0.0, 1.0, 3.0, 1.0, 0.0, 1.0, 4.0];
        assert!((determinant(a.clone(), 3) - 18.0).abs() < 1e-13);
        let x = solve(a, vec![3.0, 5.0, 5.0], 3).unwrap();
        for v in x {
            assert!((v - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn unit_sphere_volume_element() {
        // identity embedding of S^2 has unit density
        let w = [0.48, 0.6, 0.64];
        let v = volume_element(&w, 1e-5, |p| p.to_vec());
        assert!((v - 1.0).abs() < 1e-9);
        // arcsine-type integral
        let got = chebyshev_substituted(-1.0, 1.0, 4, 16, |x| 1.0 / (1.0 - x * x).sqrt());
        assert!((got - std::f64::consts::PI).abs() < 1e-13);
    }
}
