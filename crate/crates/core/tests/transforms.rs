//! Cross-module identities of the Mellin stage and the kernel.

use proptest::prelude::*;
use subsphere_core::geometry::SpheroidGeometry;
use subsphere_core::grid::LogGrid;
use subsphere_core::kernel::{kernel_h, kernel_h_mellin_at, KernelSpec};
use subsphere_core::mellin::{mellin_forward, mellin_inverse_profile, ContourGrid, RadialProfile};
use subsphere_core::Complex64;

#[test]
fn forward_then_inverse_is_close_to_identity() {
    let grid = LogGrid::new(1e-3, 1e3, 4096).unwrap();
    let f = RadialProfile::from_fn(grid, |y| y * y * (-y).exp()).unwrap();
    let line = mellin_forward(&f, 0.5, &ContourGrid::new(200.0, 0.05).unwrap()).unwrap();
    let back = mellin_inverse_profile(&line.value, &grid.sub_grid(1000, 2000).unwrap()).unwrap().value;
    for (r, v) in back.samples() {
        let want = r * r * (-r).exp();
        assert!((v - want).abs() <= 1e-5 * want + 1e-12, "{r}: {v} vs {want}");
    }
}

#[test]
fn grid_checks_reject_unresolvable_contours() {
    let grid = LogGrid::new(1e-1, 1e1, 64).unwrap();
    let f = RadialProfile::from_fn(grid, |y| (-y).exp()).unwrap();
    assert!(mellin_forward(&f, 0.5, &ContourGrid::new(200.0, 0.05).unwrap()).is_err());
    assert!(mellin_forward(&f, 0.5, &ContourGrid::new(10.0, 2.0).unwrap()).is_err());
    assert!(mellin_forward(&f, 1.5, &ContourGrid::new(10.0, 0.05).unwrap()).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    // M h(σ) for real σ against a direct Gauss sum on the support (n = 4,
    // where h is smooth up to the support ends).
    #[test]
    fn kernel_mellin_matches_direct_quadrature(tanh in 0.1f64..0.95, m in 0usize..6, sigma in 0.2f64..0.8) {
        let spec = KernelSpec::new(SpheroidGeometry::from_tanh(4, tanh).unwrap(), m);
        let (lo, hi) = spec.support();
        let rule = subsphere_core::quadrature::GaussLegendre::new(64);
        let direct: f64 = (0..8)
            .map(|k| {
                let a = lo + (hi - lo) * k as f64 / 8.0;
                let b = lo + (hi - lo) * (k + 1) as f64 / 8.0;
                rule.integrate(a, b, |x| x.powf(sigma - 1.0) * kernel_h(&spec, x))
            })
            .sum();
        let got = kernel_h_mellin_at(&spec, Complex64::new(sigma, 0.0)).unwrap();
        prop_assert!((got.re - direct).abs() < 1e-9 * direct.abs().max(1.0));
        prop_assert!(got.im.abs() < 1e-12);
    }

    #[test]
    fn kernel_vanishes_off_its_support(tanh in 0.05f64..0.99, m in 0usize..8, x in 0.0f64..3.0) {
        for n in [3, 4] {
            let spec = KernelSpec::new(SpheroidGeometry::from_tanh(n, tanh).unwrap(), m);
            let (lo, hi) = spec.support();
            if x < lo || x > hi {
                prop_assert_eq!(kernel_h(&spec, x), 0.0);
            }
        }
    }
}
