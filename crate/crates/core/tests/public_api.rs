use blowuplab_core::nlssim::{ansatz_field, decompose, make_initial_data};
use blowuplab_core::numerics::{CartesianGrid, Field2D};
use blowuplab_core::profile::{read_dump, write_dump, CoefficientK, ModParams, ProfileBasis};
use blowuplab_core::Complex64;
use proptest::prelude::*;

#[test]
fn decomposition_recovers_the_ansatz_parameters() {
    let basis = ProfileBasis::with_default_ground_state().unwrap();
    let k = CoefficientK::quadratic_gaussian(1.0, 0.5).unwrap();
    let lambda = 0.1;
    let grid = CartesianGrid::new(16.0 * lambda, 256).unwrap();
    let p = ModParams::new(lambda, 0.09, [0.002, -0.001], [0.004, 0.002], 0.3);
    let u = ansatz_field(&basis, &k, &p, None, &grid).unwrap();
    let guess = ModParams::new(1.02 * lambda, 0.095, [0.0015, -0.0005], [0.003, 0.003], 0.31);
    let dec = decompose(&u, &guess, &basis, &k, 1e-12).unwrap();
    let q = dec.params;
    assert!((q.lambda - p.lambda).abs() <= 1e-8 * lambda, "{q:?}");
    assert!((q.b - p.b).abs() <= 1e-8, "{q:?}");
    for j in 0..2 {
        assert!((q.alpha[j] - p.alpha[j]).abs() <= 1e-8 * lambda, "{q:?}");
        assert!((q.beta[j] - p.beta[j]).abs() <= 1e-7, "{q:?}");
    }
    assert!((q.gamma - p.gamma).abs() <= 1e-8, "{q:?}");
    assert!(dec.eps_h1 <= 1e-6, "{}", dec.eps_h1);
    assert!(dec.ortho_residuals.iter().all(|r| r.abs() <= 1e-8));
}

#[test]
fn initial_data_has_critical_mass_to_leading_order() {
    let basis = ProfileBasis::with_default_ground_state().unwrap();
    let k = CoefficientK::quadratic_gaussian(1.0, 1.0).unwrap();
    let t0 = -0.01;
    let grid = CartesianGrid::new(16.0 * -t0, 256).unwrap();
    let (u, p) = make_initial_data(1.0, t0, &basis, &k, &grid, 4.0).unwrap();
    let mass = u.norm_l2().powi(2);
    let rel = (mass - basis.moments.mass).abs() / basis.moments.mass;
    assert!(rel <= 10.0 * p.size().powi(2), "{rel} vs |P| = {}", p.size());
    let dec = decompose(&u, &p, &basis, &k, 1e-10).unwrap();
    assert!(dec.ortho_residuals.iter().all(|r| r.abs() <= 1e-8));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn field_dumps_round_trip(
        half_width in 0.01f64..100.0,
        log_m in 1u32..6,
        amp in -10.0f64..10.0,
        width in 0.1f64..5.0,
        freq in -3.0f64..3.0,
    ) {
        let grid = CartesianGrid::new(half_width, 1 << log_m).unwrap();
        let f = Field2D::from_fn(grid, |x| {
            let r2 = (x[0] * x[0] + x[1] * x[1]) / (width * width);
            Complex64::from_polar(amp * (-r2).exp(), freq * x[0] - x[1])
        });
        let mut bytes = Vec::new();
        write_dump(&f, &mut bytes).unwrap();
        prop_assert_eq!(bytes.len(), 16 + 16 * f.values.len());
        let back = read_dump(bytes.as_slice()).unwrap();
        prop_assert_eq!(back, f);
    }
}
