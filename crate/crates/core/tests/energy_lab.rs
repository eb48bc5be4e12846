use proptest::prelude::*;

use scherk::energy::*;
use scherk::identity::DecompositionSpec;
use scherk::surface::{GrainAngle, Scherk};

fn alpha1() -> GrainAngle {
    GrainAngle::new(1.0).unwrap()
}

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(f)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn asymptotic_plane_is_exactly_zero(alpha in 0.05f64..3.05, l in 0.5f64..20.0, nx in 1usize..40, ny in 1usize..40,
                                        c in -5.0f64..5.0) {
        let q = QuadratureSpec::new(l, 2 * nx + 1, 2 * ny + 1).unwrap();
        let e = area_excess(&AsymptoticPlane { angle: GrainAngle::new(alpha).unwrap(), offset: c }, &q).unwrap();
        prop_assert_eq!(e.energy, 0.0);
    }
}

#[test]
fn scan_gamma_one_matches_direct_run() {
    let q = QuadratureSpec::square(8.0, 129).unwrap();
    let scan = gamma_energy_scan(alpha1(), &[0.8, 0.9, 1.0, 1.1, 1.2], &q).unwrap();
    let direct = area_excess(&Scherk::new(alpha1()).with_core_radius(0.0), &q).unwrap();
    assert_eq!(scan.energies[2], direct.energy);
    assert!(scan.energies.iter().all(|e| e.is_finite() && *e > 0.0));
    assert_eq!(scan.quadrature, q);
}

#[test]
fn scans_are_thread_count_independent() {
    let q = QuadratureSpec::square(6.0, 65).unwrap();
    let gammas = [0.9, 1.0, 1.1];
    let a = in_pool(1, || gamma_energy_scan(alpha1(), &gammas, &q).unwrap());
    let b = in_pool(5, || gamma_energy_scan(alpha1(), &gammas, &q).unwrap());
    assert_eq!(a, b);
    let spec = DecompositionSpec::new(2, 0.5).unwrap();
    let deltas = [-0.3, 0.0, 0.3];
    let a = in_pool(1, || shift_energy_scan(&spec, &deltas, &q).unwrap());
    let b = in_pool(3, || shift_energy_scan(&spec, &deltas, &q).unwrap());
    assert_eq!(a, b);
}

#[test]
fn window_growth_decays_exponentially() {
    let s = Scherk::new(alpha1()).with_core_radius(0.0);
    let e = |l: f64, nx: usize| area_excess(&s, &QuadratureSpec::new(l, nx, 257).unwrap()).unwrap().energy;
    let (e8, e12, e16) = (e(8.0, 1025), e(12.0, 1025), e(16.0, 2049));
    // reference values from an independent numpy quadrature
    assert!((e8 - 4.783_715_883_2).abs() < 1e-9);
    let d1 = e12 - e8;
    let d2 = e16 - e12;
    assert!(d1 > 4.0e-6 && d1 < 5.0e-6, "{d1}");
    assert!(d2 > 0.0 && d2 < 1e-8, "{d2}");
}

#[test]
fn gamma_derivative_matches_boundary_flux() {
    // dE/dgamma at gamma = 1 reduces to 2 L ln L * integral of hx(L, y)^2 / W over one period
    let g = alpha1();
    let s = Scherk::new(g).with_core_radius(0.0);
    for (l, nx) in [(4.0, 257), (8.0, 513)] {
        let n = 4000;
        let ell = g.ell();
        let flux: f64 = (0..n)
            .map(|i| {
                let y = (i as f64 + 0.5) * ell / n as f64;
                let gr = s.gradient(scherk::Point::new(l, y)).unwrap();
                gr.hx * gr.hx / (1.0 + gr.norm_sqr()).sqrt()
            })
            .sum::<f64>()
            * ell
            / n as f64;
        let expected = 2.0 * l * f64::ln(l) * flux;
        let scan = gamma_energy_scan(g, &[1.0], &QuadratureSpec::new(l, nx, 257).unwrap()).unwrap();
        let rel = (scan.derivative_at_reference - expected).abs() / expected;
        assert!(rel < 1e-4, "L = {l}: {} vs {expected}", scan.derivative_at_reference);
    }
}

#[test]
fn unshifted_configuration_matches_outer_surface() {
    let spec = DecompositionSpec::new(2, 0.5).unwrap();
    let q = QuadratureSpec::square(8.0, 257).unwrap();
    let shifted = area_excess(&DefectShift::new(&spec, 0.0).unwrap(), &q).unwrap();
    let outer = area_excess(&DilatedScherk::new(&spec), &q).unwrap();
    // the shift window spans two periods of the outer surface
    assert!((shifted.energy - 2.0 * outer.energy).abs() < 1e-6, "{} vs {}", shifted.energy, 2.0 * outer.energy);
    assert_eq!(shifted.cores, 2);
}

#[test]
fn shift_scan_is_symmetric_with_minimum_at_zero() {
    let spec = DecompositionSpec::new(2, 0.5).unwrap();
    let q = QuadratureSpec::square(8.0, 129).unwrap();
    let deltas = [-1.0, -0.5, -0.25, 0.0, 0.25, 0.5, 1.0];
    let scan = shift_energy_scan(&spec, &deltas, &q).unwrap();
    for i in 0..3 {
        assert!((scan.energies[i] - scan.energies[6 - i]).abs() <= 1e-9);
        assert!(scan.energies[i] > scan.energies[i + 1]);
    }
    assert!(scan.stationary_estimate.abs() < 1e-5);
    assert!(scan.derivative_at_reference.abs() <= 1e-6);
}

#[test]
fn gamma_scan_has_interior_minimum_near_one() {
    let q = QuadratureSpec::square(8.0, 129).unwrap();
    let gammas: Vec<f64> = (0..9).map(|i| 0.8 + 0.05 * i as f64).collect();
    let scan = gamma_energy_scan(alpha1(), &gammas, &q).unwrap();
    assert!((scan.stationary_estimate - 1.0).abs() < 5e-3);
    let e = &scan.energies;
    assert!(e[0] > e[4] && e[8] > e[4]);
}
