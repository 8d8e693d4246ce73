//! Forward sweep followed by reconstruction on reduced grids.

use subsphere_core::forward::make_sinogram;
use subsphere_core::geometry::{SpheroidGeometry, SpherePoint};
use subsphere_core::grid::LogGrid;
use subsphere_core::harmonics::{sphere_quadrature, HarmonicIndex};
use subsphere_core::inversion::{reconstruct, synthesize, InversionParams};
use subsphere_core::phantom::{phantom_eval, phantom_profile, single_mode};
use subsphere_core::Error;

fn worst_error(geom: SpheroidGeometry) -> (f64, f64) {
    let phantom = single_mode(3).unwrap();
    let psi = sphere_quadrature(3, 16).unwrap();
    let quad = sphere_quadrature(3, if geom.is_slice() { 256 } else { 128 }).unwrap();
    let grid = LogGrid::new(1e-3, 1e3, 2048).unwrap();
    let sino = make_sinogram(&phantom, &geom, &psi, &grid, &quad).unwrap();
    let out = reconstruct(&sino, 3, &InversionParams::default()).unwrap();
    let spectrum = out.value;
    let mut active: f64 = 0.0;
    let mut absent: f64 = 0.0;
    for (idx, profile) in spectrum.iter() {
        let active_mode = phantom.modes().iter().any(|m| m.index == *idx);
        for (r, v) in profile.samples().filter(|(r, _)| (0.2..=5.0).contains(r)) {
            let want = phantom_profile(&phantom, *idx, r);
            if active_mode {
                active = active.max((v - want).abs() / want.abs().max(1e-3));
            } else {
                absent = absent.max(v.abs());
            }
        }
    }
    (active, absent)
}

#[test]
fn single_mode_round_trip_finite_lambda() {
    let (active, absent) = worst_error(SpheroidGeometry::new(3, 1.0).unwrap());
    assert!(active < 1e-4, "active {active:e}");
    assert!(absent < 1e-6, "absent {absent:e}");
}

#[test]
fn single_mode_round_trip_slice() {
    let (active, absent) = worst_error(SpheroidGeometry::slice(3).unwrap());
    assert!(active < 1e-4, "active {active:e}");
    assert!(absent < 1e-6, "absent {absent:e}");
}

#[test]
fn synthesis_recovers_the_phantom_on_the_sphere() {
    let phantom = single_mode(3).unwrap();
    let geom = SpheroidGeometry::new(3, 0.7).unwrap();
    let psi = sphere_quadrature(3, 16).unwrap();
    let quad = sphere_quadrature(3, 128).unwrap();
    let grid = LogGrid::new(1e-3, 1e3, 2048).unwrap();
    let sino = make_sinogram(&phantom, &geom, &psi, &grid, &quad).unwrap();
    let spectrum = reconstruct(&sino, 2, &InversionParams::default()).unwrap().value;
    for z in [-0.6, -0.2, 0.3, 0.7] {
        let s = (1.0f64 - z * z).sqrt();
        let x = SpherePoint::new(&[0.6 * s, 0.8 * s, z]).unwrap();
        let got = synthesize(&spectrum, &x).unwrap();
        let want = phantom_eval(&phantom, &x);
        assert!((got - want).abs() < 1e-4 * want.abs().max(1e-2), "z {z}: {got} vs {want}");
    }
}

#[test]
fn degree_is_limited_by_the_psi_rule() {
    let phantom = single_mode(3).unwrap();
    let geom = SpheroidGeometry::new(3, 1.0).unwrap();
    let psi = sphere_quadrature(3, 8).unwrap();
    let quad = sphere_quadrature(3, 32).unwrap();
    let grid = LogGrid::new(1e-2, 1e2, 1024).unwrap();
    let sino = make_sinogram(&phantom, &geom, &psi, &grid, &quad).unwrap();
    assert!(matches!(
        reconstruct(&sino, 4, &InversionParams::default()),
        Err(Error::DegreeTooHigh { degree: 4, order: 3 })
    ));
    assert_eq!(HarmonicIndex::all(3, 3).unwrap().len(), 7);
}
