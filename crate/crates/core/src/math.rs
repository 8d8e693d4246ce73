//! Float helpers that work with and without `std`.

#[allow(unused_imports)]
pub(crate) use num_traits::Float;

pub(crate) const PI: f64 = core::f64::consts::PI;
pub(crate) const TAU: f64 = core::f64::consts::TAU;

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm_sq(a: &[f64]) -> f64 {
    dot(a, a)
}

pub(crate) fn gamma(x: f64) -> f64 {
    libm::tgamma(x)
}

/// Area of the unit sphere `S^k` in `R^{k+1}`; `S^0` counts its two points.
pub(crate) fn sphere_area(k: usize) -> f64 {
    // ω_k = 2π ω_{k-2} / (k - 1), seeded with ω_0 = 2 and ω_1 = 2π
    let (mut prev, mut cur) = (2.0, TAU);
    if k == 0 {
        return prev;
    }
    for j in 2..=k {
        let next = TAU * prev / (j - 1) as f64;
        prev = cur;
        cur = next;
    }
    cur
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_areas_match_gamma_formula() {
        for k in 0..10 {
            let dim = (k + 1) as f64;
            let expected = 2.0 * PI.powf(dim / 2.0) / gamma(dim / 2.0);
            assert!((sphere_area(k) - expected).abs() < 1e-12 * expected, "k = {k}");
        }
        assert!((sphere_area(2) - 4.0 * PI).abs() < 1e-14);
    }
}
