//! Verification suites: tables of measured values against pinned
//! tolerances.

use std::fmt::Write;

use blowuplab_core::groundstate::{default_grid, solve_ground_state, GroundState};
use blowuplab_core::linop::spectral_identities;
use blowuplab_core::lyapunov::{
    fit_coercivity, lambda_a, lambda_a_pointwise, re_inner, sample_critical_mass,
};
use blowuplab_core::modulation::{
    initial_params, integrate_formal, verify_ode_lemma, PhaseLaw, StructureConstants,
    TrajectoryStatus,
};
use blowuplab_core::numerics::{inner, CartesianGrid, Field2D, RadialGrid};
use blowuplab_core::profile::{
    assemble_qp, build_t2, mass_energy_of_qp, residual_psi_tilde_reduced, weighted_sup,
    CoefficientK, KFamily, ModParams, ProfileBasis, SampledBasis,
};
use blowuplab_core::{Complex64, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::goldens::Goldens;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    AtMost,
    AtLeast,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    Fail,
    /// A documented failure that is part of the expected picture.
    ExpectedFail,
    /// A check expected to fail that passed instead.
    UnexpectedPass,
}

impl Outcome {
    pub fn name(&self) -> &'static str {
        match self {
            Outcome::Pass => "PASS",
            Outcome::Fail => "FAIL",
            Outcome::ExpectedFail => "XFAIL",
            Outcome::UnexpectedPass => "XPASS",
        }
    }

    pub fn ok(&self) -> bool {
        matches!(self, Outcome::Pass | Outcome::ExpectedFail)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub group: &'static str,
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub relation: Relation,
    pub expect_fail: bool,
}

impl Check {
    pub fn at_most(group: &'static str, name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self { group, name: name.into(), value, tolerance, relation: Relation::AtMost, expect_fail: false }
    }

    pub fn at_least(group: &'static str, name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self { group, name: name.into(), value, tolerance, relation: Relation::AtLeast, expect_fail: false }
    }

    pub fn expected_to_fail(mut self) -> Self {
        self.expect_fail = true;
        self
    }

    /// Whether the inequality holds; NaN never does.
    pub fn holds(&self) -> bool {
        match self.relation {
            Relation::AtMost => self.value <= self.tolerance,
            Relation::AtLeast => self.value >= self.tolerance,
        }
    }

    pub fn outcome(&self) -> Outcome {
        match (self.holds(), self.expect_fail) {
            (true, false) => Outcome::Pass,
            (false, false) => Outcome::Fail,
            (false, true) => Outcome::ExpectedFail,
            (true, true) => Outcome::UnexpectedPass,
        }
    }

    pub fn key(&self) -> String {
        format!("{}.{}", self.group, self.name)
    }
}

pub fn all_ok(checks: &[Check]) -> bool {
    checks.iter().all(|c| c.outcome().ok())
}

pub fn first_failure(checks: &[Check]) -> Option<&Check> {
    checks.iter().find(|c| !c.outcome().ok())
}

pub fn render_table(checks: &[Check]) -> String {
    let width = checks.iter().map(|c| c.key().len()).max().unwrap_or(5).max(5);
    let mut s = format!("{:<width$}  {:>12}  {:>2}  {:>10}  result\n", "check", "value", "", "tolerance");
    for c in checks {
        let rel = match c.relation {
            Relation::AtMost => "<=",
            Relation::AtLeast => ">=",
        };
        let _ = writeln!(
            s,
            "{:<width$}  {:>12.4e}  {rel}  {:>10.3e}  {}",
            c.key(),
            c.value,
            c.tolerance,
            c.outcome().name()
        );
    }
    s
}

pub fn table_csv(checks: &[Check]) -> String {
    let mut s = String::from("group,name,value,relation,tolerance,outcome\n");
    for c in checks {
        let rel = match c.relation {
            Relation::AtMost => "le",
            Relation::AtLeast => "ge",
        };
        let _ = writeln!(
            s,
            "{},{},{:e},{rel},{:e},{}",
            c.group,
            c.name,
            c.value,
            c.tolerance,
            c.outcome().name()
        );
    }
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Spectral,
    Profile,
    Energy,
    Ode,
    Lyapunov,
    All,
}

impl Suite {
    pub const NAMES: [&'static str; 6] = ["spectral", "profile", "energy", "ode", "lyapunov", "all"];

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "spectral" => Some(Suite::Spectral),
            "profile" => Some(Suite::Profile),
            "energy" => Some(Suite::Energy),
            "ode" => Some(Suite::Ode),
            "lyapunov" => Some(Suite::Lyapunov),
            "all" => Some(Suite::All),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Suite::Spectral => "spectral",
            Suite::Profile => "profile",
            Suite::Energy => "energy",
            Suite::Ode => "ode",
            Suite::Lyapunov => "lyapunov",
            Suite::All => "all",
        }
    }
}

/// Ground state on the default radial grid and the profile basis built on
/// it, shared by every suite.
pub struct Context {
    pub ground: GroundState,
    pub basis: ProfileBasis,
    pub seed: u64,
}

impl Context {
    pub fn new(seed: u64) -> Result<Self> {
        let ground = solve_ground_state(default_grid(), 1e-9)?;
        let basis = ProfileBasis::new(ground.q.clone())?;
        Ok(Self { ground, basis, seed })
    }

    /// The goldens keys measured on this ground state.
    pub fn measured_constants(&self) -> [(&'static str, f64); 7] {
        let m = &self.basis.moments;
        [
            ("q0", self.ground.q.value_at_zero),
            ("mass", m.mass),
            ("variance", m.variance),
            ("quartic", m.quartic),
            ("r2_quartic", m.quartic_tensor[0][0] + m.quartic_tensor[1][1]),
            ("r2q_rho", m.rho_pairings.0),
            ("rho_q", m.rho_pairings.1),
        ]
    }
}

pub const GROUND_RESIDUAL: f64 = 1e-8;
pub const GOLDEN_REL: f64 = 1e-6;

/// Ground-state residual and each golden constant to relative `1e-6`.
pub fn ground_state_checks(ctx: &Context, goldens: &Goldens) -> Vec<Check> {
    let mut out = vec![Check::at_most("groundstate", "residual", ctx.ground.residual, GROUND_RESIDUAL)];
    for (key, v) in ctx.measured_constants() {
        let g = goldens.get(key).expect("every measured key is a golden key");
        out.push(Check::at_most("golden", key, (v - g).abs() / g.abs(), GOLDEN_REL));
    }
    out
}

pub fn run_suite(suite: Suite, ctx: &Context) -> Result<Vec<Check>> {
    Ok(match suite {
        Suite::Spectral => spectral(ctx)?,
        Suite::Profile => profile(ctx)?,
        Suite::Energy => energy(ctx)?,
        Suite::Ode => ode(ctx)?,
        Suite::Lyapunov => lyapunov(ctx)?,
        Suite::All => {
            let mut v = spectral(ctx)?;
            v.extend(profile(ctx)?);
            v.extend(energy(ctx)?);
            v.extend(ode(ctx)?);
            v.extend(lyapunov(ctx)?);
            v
        }
    })
}

pub const IDENTITY_TOL: f64 = 1e-6;
pub const IDENTITY_ORDER: f64 = 2.0;

fn identity_grid() -> CartesianGrid {
    CartesianGrid::new(16.0, 256).expect("valid grid")
}

/// The five spectral identities at the default resolution, and their order
/// of decrease between radial grids of 1024 and 2048 nodes, which sit above
/// the interpolation floor of the default grid.
pub fn spectral(ctx: &Context) -> Result<Vec<Check>> {
    let grid = identity_grid();
    let mut out = Vec::new();
    for (name, r) in spectral_identities(&ctx.basis.sample(grid))? {
        out.push(Check::at_most("spectral", name, r, IDENTITY_TOL));
    }
    let at = |n: usize| -> Result<[(&'static str, f64); 5]> {
        let q = solve_ground_state(RadialGrid::new(25.0, n)?, 1e-10)?.q;
        spectral_identities(&ProfileBasis::new(q)?.sample(grid))
    };
    let (coarse, fine) = (at(1024)?, at(2048)?);
    for ((name, c), (_, f)) in coarse.iter().zip(&fine) {
        out.push(Check::at_least("spectral", format!("{name}.order"), (c / f).log2(), IDENTITY_ORDER));
    }
    Ok(out)
}

/// Sweep values of `|P|` shared by the profile and energy suites.
pub const P_SWEEP: [f64; 4] = [0.1, 0.05, 0.025, 0.0125];

/// Direction of the `|P|` sweep, normalized to `|P| = 1`.
pub fn sweep_direction() -> ModParams {
    let p = ModParams::new(0.05, 0.05, [0.015, -0.01], [0.01, 0.005], 0.0);
    p.scaled(1.0 / p.size())
}

pub fn profile_grid() -> CartesianGrid {
    CartesianGrid::new(16.0, 256).expect("valid grid")
}

/// Mass, energy and residual of `Q_P` at one `|P|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileRow {
    pub p_size: f64,
    pub mass_defect: f64,
    pub energy_defect: f64,
    pub psi_sup: f64,
    pub psi_weighted_sup: f64,
}

impl ProfileRow {
    pub const HEADER: &'static str =
        "P,mass_defect,energy_defect,energy_defect_over_P2,psi_sup,psi_sup_over_P2,psi_weighted_sup";

    pub fn energy_over_p2(&self) -> f64 {
        self.energy_defect.abs() / (self.p_size * self.p_size)
    }

    pub fn psi_over_p2(&self) -> f64 {
        self.psi_sup / (self.p_size * self.p_size)
    }

    pub fn csv(&self) -> String {
        [
            self.p_size,
            self.mass_defect,
            self.energy_defect,
            self.energy_over_p2(),
            self.psi_sup,
            self.psi_over_p2(),
            self.psi_weighted_sup,
        ]
        .iter()
        .map(|v| format!("{v:e}"))
        .collect::<Vec<_>>()
        .join(",")
    }
}

pub fn profile_row(
    basis: &ProfileBasis,
    sampled: &SampledBasis,
    k: &CoefficientK,
    p_size: f64,
) -> Result<ProfileRow> {
    let p = sweep_direction().scaled(p_size);
    let qp = assemble_qp(basis, sampled, k, &p)?;
    let me = mass_energy_of_qp(&qp, sampled, k, &basis.moments);
    let psi = residual_psi_tilde_reduced(&qp, sampled, k)?;
    Ok(ProfileRow {
        p_size: p.size(),
        mass_defect: me.mass_defect,
        energy_defect: me.energy_defect,
        psi_sup: psi.sup_norm(),
        psi_weighted_sup: weighted_sup(&psi, 0.5),
    })
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.abs().ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// Largest ratio of consecutive values along a sweep ordered by decreasing
/// `|P|`; below one exactly when the sequence strictly decreases.
pub fn worst_successive_ratio(v: &[f64]) -> f64 {
    v.windows(2).map(|w| w[1] / w[0]).fold(f64::NEG_INFINITY, f64::max)
}

pub fn smooth_k() -> CoefficientK {
    CoefficientK::quadratic_gaussian(1.0, 0.5).expect("valid k")
}

pub fn rough_k() -> CoefficientK {
    CoefficientK::new(KFamily::RoughC2, 1.0, 0.5, None).expect("valid k")
}

fn sweep_rows(ctx: &Context, s: &SampledBasis, k: &CoefficientK) -> Result<Vec<ProfileRow>> {
    P_SWEEP.iter().map(|p| profile_row(&ctx.basis, s, k, *p)).collect()
}

pub const ORTHOGONALITY_TOL: f64 = 1e-8;
pub const COMPATIBILITY_TOL: f64 = 1e-10;
pub const INCOMPATIBILITY_FRACTION: f64 = 0.1;
/// `e^{|y|/2}|Ψ̃|` over the sweep.
pub const WEIGHTED_SUP_BOUND: f64 = 1e-2;
/// Lower bound on the slope of `‖Ψ̃‖∞/|P|²` for the smooth family: the ratio
/// must vanish at least linearly.
pub const PSI_SMOOTH_SLOPE: f64 = 0.9;

/// `⟨T2, Q⟩ = 0`, the compatibility pairing with and without `c0`, and the
/// scaling of the residual along the `|P|` sweep.
pub fn profile(ctx: &Context) -> Result<Vec<Check>> {
    let s = ctx.basis.sample(profile_grid());
    let mut out = Vec::new();
    let k = CoefficientK::quadratic_gaussian(2.0, 0.5)?;
    let t2 = build_t2(&ctx.basis, &s, &k, 0.1, [0.05, 0.02]).solution;
    let q = s.field(&s.q);
    let rel = inner(&t2, &q)?.norm() / (t2.norm_l2() * q.norm_l2());
    out.push(Check::at_most("profile", "t2_dot_q", rel, ORTHOGONALITY_TOL));

    let k = smooth_k();
    let (lambda, alpha) = (0.1, [0.03, -0.02]);
    let with = ctx.basis.compatibility_pairing(&k, lambda, alpha, true);
    let without = ctx.basis.compatibility_pairing(&k, lambda, alpha, false);
    // Natural size of the pairing: λ |∇²k(0)α| ∫Q⁴.
    let scale = lambda * (k.k1 * alpha[0]).hypot(k.k2 * alpha[1]) * ctx.basis.moments.quartic;
    out.push(Check::at_most("profile", "compatibility_with_c0", with[0].hypot(with[1]), COMPATIBILITY_TOL));
    out.push(Check::at_least(
        "profile",
        "compatibility_without_c0_over_scale",
        without[0].hypot(without[1]) / scale,
        INCOMPATIBILITY_FRACTION,
    ));

    let rough = sweep_rows(ctx, &s, &rough_k())?;
    let smooth = sweep_rows(ctx, &s, &smooth_k())?;
    let ratio = |rows: &[ProfileRow]| rows.iter().map(|r| r.psi_over_p2()).collect::<Vec<_>>();
    out.push(Check::at_most(
        "profile",
        "rough_psi_over_p2.successive_ratio",
        worst_successive_ratio(&ratio(&rough)),
        1.0 - 1e-9,
    ));
    out.push(Check::at_least(
        "profile",
        "smooth_psi_over_p2.slope",
        log_log_slope(&P_SWEEP, &ratio(&smooth)),
        PSI_SMOOTH_SLOPE,
    ));
    let wsup = rough
        .iter()
        .chain(&smooth)
        .map(|r| r.psi_weighted_sup)
        .fold(0.0f64, |a, b| if b.is_finite() { a.max(b) } else { f64::INFINITY });
    out.push(Check::at_most("profile", "psi_weighted_sup", wsup, WEIGHTED_SUP_BOUND));
    Ok(out)
}

pub const MASS_SLOPE: f64 = 3.7;
pub const ENERGY_SLOPE: f64 = 2.7;

/// Mass defect `O(|P|⁴)` and energy defect `o(|P|²)` along the sweep.
pub fn energy(ctx: &Context) -> Result<Vec<Check>> {
    let s = ctx.basis.sample(profile_grid());
    let mut out = Vec::new();
    let smooth = sweep_rows(ctx, &s, &smooth_k())?;
    let rough = sweep_rows(ctx, &s, &rough_k())?;
    let mass: Vec<f64> = smooth.iter().map(|r| r.mass_defect).collect();
    out.push(Check::at_least("energy", "mass_defect.slope", log_log_slope(&P_SWEEP, &mass), MASS_SLOPE));
    for (name, rows) in [("smooth", &smooth), ("rough", &rough)] {
        let e: Vec<f64> = rows.iter().map(|r| r.energy_over_p2()).collect();
        out.push(Check::at_most(
            "energy",
            format!("{name}_defect_over_p2.successive_ratio"),
            worst_successive_ratio(&e),
            1.0 - 1e-9,
        ));
    }
    let e: Vec<f64> = smooth.iter().map(|r| r.energy_defect).collect();
    out.push(Check::at_least("energy", "smooth_defect.slope", log_log_slope(&P_SWEEP, &e), ENERGY_SLOPE));
    Ok(out)
}

pub const B_OVER_LAMBDA_DRIFT: f64 = 1e-10;
pub const RATE_TOL: f64 = 0.01;
pub const ODE_BOUND: f64 = 10.0;
pub const ODE_UNIFORMITY: f64 = 1.5;
pub const ODE_T0: [f64; 3] = [-0.1, -0.01, -0.001];
/// Lower end of the window of the `(α, β)` system.
pub const ODE_WINDOW_END: f64 = -1.0;
pub const ODE_DELTA: f64 = 0.1;

/// Formal system: conservation of `b/λ`, the rate `λ ≈ -t/C0`, and the
/// `(α, β)` lemma for `k1 > 0` and for the degenerate `k1 = 0`.
pub fn ode(ctx: &Context) -> Result<Vec<Check>> {
    let m = &ctx.basis.moments;
    let mut out = Vec::new();
    let k = CoefficientK::quadratic_gaussian(1.0, 1.0)?;
    let sc = StructureConstants::with_c0(m, &k, 1.0)?;
    let t0 = -0.01;
    let p0 = initial_params(sc.c0, t0)?;
    let mut drift = 0.0f64;
    for t_end in [10.0 * t0, 0.0] {
        let traj = integrate_formal(&p0, &sc, t0, t_end, 1e-3 * t0.abs(), PhaseLaw::Corrected)?;
        for s in &traj.samples {
            drift = drift.max((s.params.b / s.params.lambda - 1.0 / sc.c0).abs());
        }
    }
    out.push(Check::at_most("ode", "b_over_lambda_drift", drift, B_OVER_LAMBDA_DRIFT));

    let sc13 = StructureConstants::with_c0(m, &k, 1.3)?;
    let p0 = initial_params(sc13.c0, t0)?;
    let back = integrate_formal(&p0, &sc13, t0, 10.0 * t0, 1e-3, PhaseLaw::Corrected)?;
    let completed = back.status == TrajectoryStatus::Completed;
    let rate = back
        .samples
        .iter()
        .map(|s| {
            let target = -s.t / sc13.c0;
            (s.params.lambda - target).abs() / target
        })
        .fold(if completed { 0.0 } else { f64::INFINITY }, f64::max);
    out.push(Check::at_most("ode", "lambda_vs_minus_t_over_c0", rate, RATE_TOL));

    for (k1, label) in [(1.0, "k1_positive"), (0.0, "k1_zero")] {
        let kk = CoefficientK::quadratic_gaussian(k1, 1.0)?;
        let sc = StructureConstants::with_c0(m, &kk, 1.0)?;
        let mut ratios = Vec::new();
        for t0 in ODE_T0 {
            let r = verify_ode_lemma(ODE_DELTA, t0, ODE_WINDOW_END, &sc, k1, ODE_BOUND)?;
            ratios.push(r.ratio_sup);
            if k1 > 0.0 {
                out.push(Check::at_most("ode", format!("{label}.ratio_t0={t0}"), r.ratio_sup, ODE_BOUND));
            }
        }
        let (lo, hi) = ratios.iter().fold((f64::MAX, 0.0f64), |(a, b), r| (a.min(*r), b.max(*r)));
        let uniform = Check::at_most("ode", format!("{label}.uniformity"), hi / lo, ODE_UNIFORMITY);
        if k1 > 0.0 {
            out.push(uniform);
        } else {
            // The degenerate case loses uniformity: successive decades of t0
            // add equal increments, i.e. growth like ln(t/t0).
            out.push(uniform.expected_to_fail());
            let (d1, d2) = (ratios[1] - ratios[0], ratios[2] - ratios[1]);
            let log_growth = if d1 > 0.0 && d2 > 0.0 { (d2 / d1 - 1.0).abs() } else { f64::INFINITY };
            out.push(Check::at_most("ode", format!("{label}.log_growth_defect"), log_growth, 0.1));
        }
    }
    Ok(out)
}

pub const ANTISYMMETRY_TOL: f64 = 1e-10;
pub const COERCIVITY_SAMPLES: usize = 100;
pub const COERCIVITY_LAMBDA_MIN: f64 = 0.005;

fn random_smooth_field(grid: CartesianGrid, rng: &mut ChaCha8Rng) -> Field2D {
    let c: Vec<(f64, f64, f64, Complex64)> = (0..4)
        .map(|_| {
            (
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
                rng.gen_range(1.0..3.0),
                Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
            )
        })
        .collect();
    Field2D::from_fn(grid, |y| {
        c.iter()
            .map(|(a, b, w, z)| {
                let r2 = ((y[0] - a).powi(2) + (y[1] - b).powi(2)) / (w * w);
                z * (-r2).exp() * Complex64::from_polar(1.0, 0.3 * a * y[1])
            })
            .sum()
    })
}

/// Anti-symmetry of `Λ_A`, the pointwise form inside the ball, and the
/// fitted coercivity of `λ²I₁` over seeded critical-mass states.
pub fn lyapunov(ctx: &Context) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let grid = CartesianGrid::new(10.0, 64)?;
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let mut self_pair = 0.0f64;
    let mut cross = 0.0f64;
    for _ in 0..4 {
        let f = random_smooth_field(grid, &mut rng);
        let g = random_smooth_field(grid, &mut rng);
        for a in [1.0, 3.0, 10.0] {
            let (lf, lg) = (lambda_a(&f, a)?, lambda_a(&g, a)?);
            self_pair = self_pair.max(re_inner(&lf, &f).abs() / f.norm_l2().powi(2));
            cross = cross
                .max((re_inner(&lf, &g) + re_inner(&f, &lg)).abs() / (f.norm_l2() * g.norm_l2()));
        }
    }
    out.push(Check::at_most("lyapunov", "re<Lambda_A f, f>", self_pair, ANTISYMMETRY_TOL));
    out.push(Check::at_most("lyapunov", "re<Lambda_A f, g> + re<f, Lambda_A g>", cross, ANTISYMMETRY_TOL));
    // Inside the ball both forms are the scaling generator.
    let f = Field2D::from_real_fn(CartesianGrid::new(16.0, 128)?, |y| (-(y[0] * y[0] + y[1] * y[1])).exp());
    let full = f.scaling_generator();
    let diff = (&lambda_a_pointwise(&f, 6.0)? - &full).norm_l2() / full.norm_l2();
    out.push(Check::at_most("lyapunov", "Lambda_A_is_Lambda_inside_ball", diff, ANTISYMMETRY_TOL));

    let k = CoefficientK::quadratic_gaussian(1.0, 1.0)?;
    let samples = sample_critical_mass(&ctx.basis, &k, COERCIVITY_SAMPLES, COERCIVITY_LAMBDA_MIN, ctx.seed)?;
    let cs = samples
        .iter()
        .map(|s| s.correction_term.abs() / s.correction_bound)
        .fold(0.0f64, f64::max);
    out.push(Check::at_most("lyapunov", "correction_over_cauchy_schwarz", cs, 1.0 + 1e-12));
    let fit = fit_coercivity(&samples)?;
    out.push(Check::at_least("lyapunov", "samples", fit.samples as f64, COERCIVITY_SAMPLES as f64));
    out.push(Check::at_least("lyapunov", "coercivity_delta0", fit.delta0, f64::MIN_POSITIVE));
    out.push(Check::at_most("lyapunov", "coercivity_c_cubic_finite", fit.c_cubic, f64::MAX));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn outcomes_follow_the_relation() {
        assert_eq!(Check::at_most("g", "a", 1.0, 2.0).outcome(), Outcome::Pass);
        assert_eq!(Check::at_most("g", "a", 3.0, 2.0).outcome(), Outcome::Fail);
        assert_eq!(Check::at_least("g", "a", f64::NAN, 2.0).outcome(), Outcome::Fail);
        assert_eq!(Check::at_least("g", "a", 1.0, 2.0).expected_to_fail().outcome(), Outcome::ExpectedFail);
        assert_eq!(Check::at_least("g", "a", 3.0, 2.0).expected_to_fail().outcome(), Outcome::UnexpectedPass);
        let v = vec![Check::at_most("g", "a", 1.0, 2.0), Check::at_most("g", "b", 3.0, 2.0)];
        assert!(!all_ok(&v));
        assert_eq!(first_failure(&v).unwrap().key(), "g.b");
    }

    #[test]
    fn slope_of_a_power_law() {
        let x = [1.0, 2.0, 4.0, 8.0];
        let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powf(2.5)).collect();
        assert!((log_log_slope(&x, &y) - 2.5).abs() < 1e-12);
        assert!(worst_successive_ratio(&[4.0, 2.0, 1.0]) == 0.5);
        assert!(worst_successive_ratio(&[4.0, 2.0, 3.0]) > 1.0);
    }

    #[test]
    fn table_lists_every_check() {
        let v = vec![Check::at_most("g", "a", 1.0, 2.0), Check::at_least("h", "b", 1.0, 2.0)];
        let t = render_table(&v);
        assert_eq!(t.lines().count(), 3);
        assert!(t.contains("g.a") && t.contains("FAIL"));
        assert_eq!(table_csv(&v).lines().count(), 3);
    }
}
