use super::*;
use crate::profile::c0_of_alpha;

// Frozen values of the independent ground-state oracle.
fn moments() -> Moments {
    let r2_quartic = 9.14139593004437856;
    Moments {
        mass: 11.7008965245558532,
        variance: 13.8948616355429309,
        quartic: 23.4017930491183961,
        quartic_tensor: [[0.5 * r2_quartic, 0.0], [0.0, 0.5 * r2_quartic]],
        rho_pairings: (43.9337804127830012, 6.94743075325893944),
    }
}

fn gaussian(k1: f64, k2: f64) -> CoefficientK {
    CoefficientK::quadratic_gaussian(k1, k2).unwrap()
}

#[test]
fn scaling_line_is_fixed() {
    let sc = StructureConstants::with_c0(&moments(), &gaussian(1.0, 1.0), 1.0).unwrap();
    let d = formal_rhs(&ModParams::new(0.3, 0.0, [0.0; 2], [0.0; 2], 2.0), &sc, PhaseLaw::Corrected)
        .unwrap();
    assert_eq!(d, ModParams::new(0.0, 0.0, [0.0; 2], [0.0; 2], 1.0));
}

#[test]
fn rejects_non_positive_lambda() {
    let sc = StructureConstants::with_c0(&moments(), &gaussian(1.0, 1.0), 1.0).unwrap();
    let p = ModParams::new(0.0, 0.1, [0.0; 2], [0.0; 2], 0.0);
    assert!(formal_rhs(&p, &sc, PhaseLaw::Corrected).is_err());
}

#[test]
fn structure_constants_match_definitions() {
    let m = moments();
    let k = gaussian(1.5, 0.5);
    let sc = StructureConstants::with_c0(&m, &k, 0.8).unwrap();
    let d0 = sc.d0([1.0, 0.0]);
    assert!((d0 + 2.0 * 1.5 * m.mass / m.variance).abs() < 1e-14);
    let a = [0.3, -0.7];
    let c = sc.c0_of(a);
    let reference = c0_of_alpha(&m, &k, a);
    assert!((c[0] - reference[0]).abs() < 1e-15 && (c[1] - reference[1]).abs() < 1e-15);
    let ratio = m.rho_pairings.0 / (4.0 * m.rho_pairings.1);
    assert!((sc.d1(a) - ratio * sc.d0(a)).abs() < 1e-15);
    assert!((sc.c0 - 0.8).abs() < 1e-14);
    assert!((sc.e0_tilde - m.variance / (8.0 * 0.64)).abs() < 1e-14);
}

#[test]
fn phase_laws_differ_by_d1() {
    let sc = StructureConstants::with_c0(&moments(), &gaussian(1.0, 2.0), 1.0).unwrap();
    let p = ModParams::new(0.1, 0.1, [0.02, 0.01], [0.01, 0.0], 0.0);
    let c = formal_rhs(&p, &sc, PhaseLaw::Corrected).unwrap();
    let b = formal_rhs(&p, &sc, PhaseLaw::Bare).unwrap();
    assert!((b.gamma - c.gamma - sc.d1(p.alpha)).abs() < 1e-15);
}

#[test]
fn initial_energy_reproduces_c0() {
    let m = moments();
    let k = gaussian(1.0, 1.0);
    for c0 in [0.5, 1.0, 2.0] {
        let p = initial_params(c0, -0.01).unwrap();
        let e_in = expanded_energy_in(&m, &k, &p);
        let sc = derive_structure_constants(&m, &k, &p, e_in).unwrap();
        assert!((sc.c0 - c0).abs() < 1e-12 * c0, "{} vs {c0}", sc.c0);
        // Ẽ0 λ0² = b0² ‖yQ‖² / 8
        let lhs = sc.e0_tilde * p.lambda * p.lambda;
        assert!((lhs - p.b * p.b * m.variance / 8.0).abs() < 1e-15);
    }
}

#[test]
fn negative_energy_shift_is_rejected() {
    let m = moments();
    let k = gaussian(1.0, 1.0);
    let p = initial_params(1.0, -0.01).unwrap();
    let e_in = -energy_shift(&m, &k) - 1e-3;
    assert!(derive_structure_constants(&m, &k, &p, e_in).is_err());
}

#[test]
fn b_over_lambda_is_conserved_without_translation() {
    let sc = StructureConstants::with_c0(&moments(), &gaussian(1.0, 1.0), 1.0).unwrap();
    let t0 = -0.01;
    let p0 = initial_params(sc.c0, t0).unwrap();
    for t_end in [10.0 * t0, 0.0] {
        let traj = integrate_formal(&p0, &sc, t0, t_end, 1e-3 * t0.abs(), PhaseLaw::Corrected)
            .unwrap();
        for s in &traj.samples {
            let drift = (s.params.b / s.params.lambda - 1.0 / sc.c0).abs();
            assert!(drift < 1e-10, "drift {drift} at t = {}", s.t);
        }
    }
}

#[test]
fn blow_up_rate_follows_minus_t_over_c0() {
    let sc = StructureConstants::with_c0(&moments(), &gaussian(1.0, 1.0), 1.3).unwrap();
    let t0 = -0.01;
    let p0 = initial_params(sc.c0, t0).unwrap();
    let back = integrate_formal(&p0, &sc, t0, 10.0 * t0, 1e-3, PhaseLaw::Corrected).unwrap();
    assert_eq!(back.status, TrajectoryStatus::Completed);
    assert_eq!(back.samples.last().unwrap().t, 10.0 * t0);
    for s in &back.samples {
        let target = -s.t / sc.c0;
        assert!((s.params.lambda - target).abs() < 0.01 * target);
    }
    let fwd = integrate_formal(&p0, &sc, t0, 0.0, 1e-3, PhaseLaw::Corrected).unwrap();
    assert_eq!(fwd.status, TrajectoryStatus::CollapseReached);
    let last = fwd.samples.last().unwrap();
    assert!(last.params.lambda < COLLAPSE_LAMBDA);
    assert!((last.params.lambda / (-last.t) - 1.0 / sc.c0).abs() < 0.01 / sc.c0);
}

#[test]
fn riccati_without_curvature() {
    let sc = StructureConstants::with_c0(&moments(), &CoefficientK::homogeneous(), 1.0).unwrap();
    let p0 = ModParams::new(0.02, 0.01, [0.1, 0.0], [0.0; 2], 0.0);
    let traj = integrate_formal(&p0, &sc, -0.01, -0.1, 1e-4, PhaseLaw::Corrected).unwrap();
    for s in &traj.samples {
        let exact = p0.b / (1.0 + p0.b * s.s);
        assert!((s.params.b - exact).abs() < 1e-10 * p0.b, "{} {exact}", s.params.b);
    }
}

#[test]
fn step_halving_is_fourth_order() {
    let sc = StructureConstants::with_c0(&moments(), &gaussian(1.0, 0.5), 1.0).unwrap();
    let t0 = -0.01;
    let p0 = ModParams {
        alpha: [1e-4, -5e-5],
        beta: [2e-3, 1e-3],
        ..initial_params(sc.c0, t0).unwrap()
    };
    let end = |dt: f64| {
        let tr = integrate_formal(&p0, &sc, t0, 10.0 * t0, dt, PhaseLaw::Corrected).unwrap();
        tr.samples.last().unwrap().params
    };
    let (a, b, c) = (end(4e-5), end(2e-5), end(1e-5));
    let rel = (b.lambda - c.lambda).abs() / c.lambda;
    assert!(rel < 1e-8, "{rel}");
    let e1 = (a.alpha[0] - c.alpha[0]).abs();
    let e2 = (b.alpha[0] - c.alpha[0]).abs();
    assert!(e1 / e2 > 10.0, "convergence ratio {}", e1 / e2);
}

#[test]
fn s_matches_trapezoid_reconstruction() {
    let sc = StructureConstants::with_c0(&moments(), &gaussian(1.0, 1.0), 1.0).unwrap();
    let t0 = -0.01;
    let p0 = initial_params(sc.c0, t0).unwrap();
    let traj = integrate_formal(&p0, &sc, t0, 10.0 * t0, 1e-5, PhaseLaw::Corrected).unwrap();
    assert!(traj.time_consistency().unwrap() < 1e-6);
    // s = C0²/(-t) + const along λ = -t/C0.
    let last = traj.samples.last().unwrap();
    let exact = sc.c0 * sc.c0 * (1.0 / (-last.t) - 1.0 / (-t0));
    assert!((last.s - exact).abs() < 1e-6 * exact.abs());
}

#[test]
fn eigenvalues_have_prescribed_sum_and_product() {
    let sc = StructureConstants::with_c0(&moments(), &gaussian(1.0, 1.0), 4.0).unwrap();
    for k1 in [0.001, 0.005, 1.0] {
        let sys = alpha_beta_linear_system(&sc, k1).unwrap();
        let [a, b] = sys.eigenvalues;
        assert!(((a + b).re - 1.0 / sc.c0).abs() < 1e-12);
        assert!(((a * b).re - 2.0 * k1).abs() < 1e-12);
        assert!((a * b).im.abs() < 1e-12);
        assert_eq!(sys.complex, 1.0 / (sc.c0 * sc.c0) < 8.0 * k1);
        let back = mat_mul(&mat_mul(&sys.basis, &sys.normal_form), &inverse(&sys.basis).unwrap());
        for i in 0..2 {
            for j in 0..2 {
                assert!((back[i][j] - sys.matrix[i][j]).abs() < 1e-12);
            }
        }
        if !sys.complex {
            assert!(sys.normal_form[0][1].abs() < 1e-12 && sys.normal_form[1][0].abs() < 1e-12);
        }
    }
}

#[test]
fn zero_curvature_is_degenerate() {
    let sc = StructureConstants::with_c0(&moments(), &gaussian(1.0, 1.0), 2.0).unwrap();
    let sys = alpha_beta_linear_system(&sc, 0.0).unwrap();
    assert!(sys.degenerate && !sys.complex);
    assert_eq!(sys.eigenvalues[0], Complex64::new(0.0, 0.0));
    assert!((sys.eigenvalues[1].re - 0.5).abs() < 1e-15);
    assert!(alpha_beta_linear_system(&sc, -1.0).is_err());
}

#[test]
fn ode_lemma_without_forcing_stays_at_zero() {
    let sc = StructureConstants::with_c0(&moments(), &gaussian(1.0, 1.0), 1.0).unwrap();
    let r = verify_ode_lemma(0.0, -0.01, -1.0, &sc, 1.0, 1.0).unwrap();
    assert_eq!(r.ratio_sup, 0.0);
    assert!(r.pass);
}

#[test]
fn ode_lemma_ratio_is_uniform_for_positive_curvature() {
    let sc = StructureConstants::with_c0(&moments(), &gaussian(1.0, 1.0), 1.0).unwrap();
    let ratios: Vec<f64> = [-0.1, -0.01, -0.001]
        .iter()
        .map(|t0| verify_ode_lemma(0.1, *t0, -1.0, &sc, 1.0, 10.0).unwrap())
        .map(|r| {
            assert!(r.pass, "{}", r.ratio_sup);
            r.ratio_sup
        })
        .collect();
    let (lo, hi) = ratios
        .iter()
        .fold((f64::MAX, 0.0f64), |(a, b), r| (a.min(*r), b.max(*r)));
    assert!(hi / lo < 1.5, "{ratios:?}");
}

#[test]
fn ode_lemma_ratio_grows_logarithmically_when_degenerate() {
    let sc = StructureConstants::with_c0(&moments(), &gaussian(1.0, 1.0), 1.0).unwrap();
    let t0s = [-0.1, -0.01, -0.001];
    let ratios: Vec<f64> = t0s
        .iter()
        .map(|t0| verify_ode_lemma(0.1, *t0, -1.0, &sc, 0.0, 10.0).unwrap().ratio_sup)
        .collect();
    // Successive decades add the same increment: linear in ln(T/t0).
    let d1 = ratios[1] - ratios[0];
    let d2 = ratios[2] - ratios[1];
    assert!(d1 > 0.0 && d2 > 0.0, "{ratios:?}");
    assert!((d2 / d1 - 1.0).abs() < 0.1, "{ratios:?}");
}

#[test]
fn trajectory_rejects_non_monotone_time() {
    let mut tr = Trajectory::new(vec!["x".into()]);
    let p = ModParams::new(1.0, 0.0, [0.0; 2], [0.0; 2], 0.0);
    tr.push(-1.0, 0.0, p, vec![0.0]).unwrap();
    tr.push(-2.0, 0.1, p, vec![0.0]).unwrap();
    assert!(tr.push(-1.5, 0.2, p, vec![0.0]).is_err());
    assert!(tr.push(-3.0, 0.2, p, vec![]).is_err());
}

#[test]
fn csv_round_trips_floats() {
    let mut tr = Trajectory::new(vec!["diag".into()]);
    let p = ModParams::new(0.1, 1.0 / 3.0, [1e-17, -2.5], [std::f64::consts::PI, 0.0], 7.0);
    tr.push(-0.01, 0.0, p, vec![f64::MIN_POSITIVE]).unwrap();
    let mut buf = Vec::new();
    tr.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "t,s,lambda,b,alpha1,alpha2,beta1,beta2,gamma,diag"
    );
    let vals: Vec<f64> = lines.next().unwrap().split(',').map(|c| c.parse().unwrap()).collect();
    assert_eq!(vals[3], 1.0 / 3.0);
    assert_eq!(vals[4], 1e-17);
    assert_eq!(vals[6], std::f64::consts::PI);
    assert_eq!(vals[9], f64::MIN_POSITIVE);
}
