//! Split-step evolution of `i u_t + Δu = -k(x)|u|²u`, the modulation
//! decomposition of the solution and the conservation and bootstrap
//! monitors along a run.

mod decompose;
mod diagnostics;
mod stepper;

use crate::lyapunov::{evaluate_i1, psi_of, LyapunovSample};
use crate::modulation::{StructureConstants, Trajectory, TrajectoryStatus};
use crate::numerics::{derivative_nonuniform, CartesianGrid, Field2D};
use crate::profile::{CoefficientK, ModParams, ProfileBasis};
use crate::{Error, Result};

pub use decompose::{
    ansatz_field, decompose, make_initial_data, profile_on, test_functions, y_grid,
    Decomposition, TestFunctions, CONDITION_LIMIT,
};
pub use diagnostics::{
    chi, conserved, conserved_and_virial, local_mass, modulation_residuals, rate_fit,
    second_difference, BootstrapFlags, Conserved, ModulationReport, RateFit, MODULATION_LABELS,
};
pub use stepper::{Scheme, Stepper};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Direction {
    #[default]
    Forward,
    Backward,
}

impl Direction {
    pub fn name(&self) -> &'static str {
        match self {
            Direction::Forward => "forward",
            Direction::Backward => "backward",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "forward" => Some(Direction::Forward),
            "backward" => Some(Direction::Backward),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    /// Physical grid in `x`.
    pub grid: CartesianGrid,
    pub k: CoefficientK,
    /// Rate constant of the prescribed initial data.
    pub c0: f64,
    pub t0: f64,
    pub t_end: f64,
    /// Time step at `λ0`; the step used at scale `λ` is `dt (λ/λ0)²`, so the
    /// step in `s` stays `dt/λ0²`.
    pub dt: f64,
    pub direction: Direction,
    pub scheme: Scheme,
    /// Steps between decompositions.
    pub decompose_stride: usize,
    pub newton_tol: f64,
    /// Bootstrap threshold `δ`.
    pub delta: f64,
    /// Forward runs stop once `λ` spans fewer grid cells than this.
    pub collapse_floor: f64,
    /// Truncation radius `A` of `Λ_A`.
    pub lyapunov_a: f64,
    /// `δ0` used for the coercivity gap column.
    pub lyapunov_delta0: f64,
    /// Keep a copy of the field every this many samples; zero keeps none.
    pub snapshot_stride: usize,
}

impl SimConfig {
    /// Defaults for a run from `t0` on `grid`: `C0 = 1`, `s` step `5e-3`,
    /// a decomposition every 100 steps, forward to the collapse floor.
    pub fn new(grid: CartesianGrid, k: CoefficientK, t0: f64) -> Self {
        let c0 = 1.0;
        let lambda0 = -t0 / c0;
        Self {
            grid,
            k,
            c0,
            t0,
            t_end: 0.0,
            dt: 5e-3 * lambda0 * lambda0,
            direction: Direction::Forward,
            scheme: Scheme::TripleJump,
            decompose_stride: 100,
            newton_tol: 1e-10,
            delta: 0.1,
            collapse_floor: 4.0,
            lyapunov_a: 10.0,
            lyapunov_delta0: 0.1,
            snapshot_stride: 0,
        }
    }

    pub fn lambda0(&self) -> f64 {
        -self.t0 / self.c0
    }

    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        if !(self.t0 < 0.0) {
            errs.push(format!("t0 must be negative, got {}", self.t0));
        }
        if !(self.c0 > 0.0 && self.c0.is_finite()) {
            errs.push(format!("C0 must be positive, got {}", self.c0));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            errs.push(format!("dt must be positive, got {}", self.dt));
        }
        if self.decompose_stride < 1 {
            errs.push("decompose stride must be at least 1".into());
        }
        if !(self.collapse_floor >= 4.0) {
            errs.push(format!("collapse floor must be at least 4 cells, got {}", self.collapse_floor));
        }
        if !(self.newton_tol > 0.0) {
            errs.push(format!("newton tolerance must be positive, got {}", self.newton_tol));
        }
        if !(self.delta > 0.0) {
            errs.push(format!("delta must be positive, got {}", self.delta));
        }
        if !(self.lyapunov_a >= 1.0) {
            errs.push(format!("A must be at least 1, got {}", self.lyapunov_a));
        }
        match self.direction {
            Direction::Forward if !(self.t_end > self.t0 && self.t_end <= 0.0) => {
                errs.push(format!("forward run needs t0 < t_end ≤ 0, got t_end = {}", self.t_end))
            }
            Direction::Backward if !(self.t_end < self.t0) => {
                errs.push(format!("backward run needs t_end < t0, got t_end = {}", self.t_end))
            }
            _ => {}
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidParameter(errs.join("; ")))
        }
    }
}

/// Diagnostic columns recorded by [`run`], after the modulation parameters.
pub const RUN_COLUMNS: [&str; 23] = [
    "eps_l2",
    "eps_h1",
    "mass",
    "energy",
    "variance",
    "I",
    "I1",
    "coercivity_gap",
    "correction",
    "ortho_max",
    "newton_iterations",
    "condition",
    "lambda_plus_t_over_c0",
    "b_over_lambda_minus_inv_c0",
    "boot_eps",
    "boot_momentum",
    "boot_lambda",
    "boot_b",
    "bootstrap",
    "eps_h1_over_lambda",
    "local_mass",
    "s_error",
    "dI1_dt",
];

#[derive(Debug, Clone)]
pub struct SimOutput {
    pub trajectory: Trajectory,
    pub lyapunov: Vec<LyapunovSample>,
    pub final_field: Field2D,
    pub final_decomposition: Option<Decomposition>,
    pub snapshots: Vec<(f64, Field2D)>,
    pub steps: usize,
}

/// Runs from the prescribed initial data of `config`.
pub fn run(config: &SimConfig, basis: &ProfileBasis) -> Result<SimOutput> {
    config.validate()?;
    let (u0, p0) = make_initial_data(
        config.c0,
        config.t0,
        basis,
        &config.k,
        &config.grid,
        config.collapse_floor,
    )?;
    run_from(config, basis, u0, p0)
}

/// Runs from `u0` at `t0`, with `guess` seeding the first decomposition.
pub fn run_from(
    config: &SimConfig,
    basis: &ProfileBasis,
    u0: Field2D,
    guess: ModParams,
) -> Result<SimOutput> {
    config.validate()?;
    if !u0.grid.same_as(&config.grid) {
        return Err(Error::GridMismatch("initial data is not on the run grid".into()));
    }
    let k = &config.k;
    let sc = StructureConstants::with_c0(&basis.moments, k, config.c0)?;
    let stepper = Stepper::new(config.grid, k);
    let h = config.grid.spacing();
    let lambda0 = config.lambda0();
    let local_r = 0.5 * config.grid.half_width();
    let mut traj = Trajectory::new(RUN_COLUMNS[..RUN_COLUMNS.len() - 1].iter().map(|c| c.to_string()).collect());
    let mut lyap = Vec::new();
    let mut snapshots = Vec::new();
    let mut u = u0;
    let mut t = config.t0;
    let mut s = 0.0;
    let mut steps = 0usize;
    let mut dec = decompose(&u, &guess, basis, k, config.newton_tol)?;
    let record = |t: f64,
                  s: f64,
                  u: &Field2D,
                  dec: &Decomposition,
                  traj: &mut Trajectory,
                  lyap: &mut Vec<LyapunovSample>|
     -> Result<()> {
        let p = &dec.params;
        let c = conserved(u, k);
        let psi = psi_of(dec, k)?;
        let ly = evaluate_i1(t, dec, &psi, config.lyapunov_a, config.lyapunov_delta0)?;
        let flags = BootstrapFlags::evaluate(t, p, dec.eps_h1, config.c0, config.delta);
        let flag = |b: bool| if b { 1.0 } else { 0.0 };
        let s_error = if k.is_homogeneous() && t < 0.0 {
            let exact = pseudo_conformal_params(config.c0, t)?;
            let reference = ansatz_field(basis, k, &exact, None, &u.grid)?;
            (u - &reference).norm_l2() / reference.norm_l2()
        } else {
            f64::NAN
        };
        traj.push(
            t,
            s,
            *p,
            vec![
                dec.eps_l2,
                dec.eps_h1,
                c.mass,
                c.energy,
                c.variance,
                ly.i_value,
                ly.i1_value,
                ly.coercivity_gap,
                ly.correction_term,
                dec.max_residual(),
                dec.iterations as f64,
                dec.condition,
                p.lambda + t / config.c0,
                p.b / p.lambda - 1.0 / config.c0,
                flag(flags.eps),
                flag(flags.momentum),
                flag(flags.lambda),
                flag(flags.b),
                flag(flags.all()),
                dec.eps_h1 / p.lambda,
                diagnostics::mass_outside(u, local_r),
                s_error,
            ],
        )?;
        lyap.push(ly);
        Ok(())
    };
    record(t, s, &u, &dec, &mut traj, &mut lyap)?;
    let dir = match config.direction {
        Direction::Forward => 1.0,
        Direction::Backward => -1.0,
    };
    loop {
        let lambda = dec.params.lambda;
        if config.direction == Direction::Forward && lambda < config.collapse_floor * h {
            traj.status = TrajectoryStatus::CollapseReached;
            break;
        }
        let remaining = (config.t_end - t).abs();
        if remaining <= 1e-14 * config.t0.abs() {
            break;
        }
        let mut dt = config.dt * (lambda / lambda0).powi(2);
        let mut n = config.decompose_stride;
        let last = n as f64 * dt >= remaining;
        if last {
            n = (remaining / dt).ceil().max(1.0) as usize;
            dt = remaining / n as f64;
        }
        match config.direction {
            Direction::Forward => stepper.advance_with(&mut u, dt, n, config.scheme)?,
            Direction::Backward => stepper.advance_backward(&mut u, dt, n, config.scheme)?,
        }
        steps += n;
        let t_new = if last { config.t_end } else { t + dir * n as f64 * dt };
        // Guess from one explicit step of the formal system in s.
        let ds_guess = (t_new - t) / (lambda * lambda);
        let rhs = crate::modulation::formal_rhs(&dec.params, &sc, Default::default())?;
        let p = &dec.params;
        let guess = ModParams::new(
            p.lambda + ds_guess * rhs.lambda,
            p.b + ds_guess * rhs.b,
            [p.alpha[0] + ds_guess * rhs.alpha[0], p.alpha[1] + ds_guess * rhs.alpha[1]],
            [p.beta[0] + ds_guess * rhs.beta[0], p.beta[1] + ds_guess * rhs.beta[1]],
            p.gamma + ds_guess * rhs.gamma,
        );
        let next = match decompose(&u, &guess, basis, k, config.newton_tol) {
            Ok(d) => d,
            Err(Error::DecompositionFailed { .. }) | Err(Error::Singular(_)) => {
                traj.status = TrajectoryStatus::DecompositionFailed;
                break;
            }
            Err(e) => return Err(e),
        };
        // ∫dt/λ² is exact for λ linear in t between samples.
        s += (t_new - t) / (lambda * next.params.lambda);
        t = t_new;
        dec = next;
        record(t, s, &u, &dec, &mut traj, &mut lyap)?;
        if config.snapshot_stride > 0 && (traj.len() - 1) % config.snapshot_stride == 0 {
            snapshots.push((t, u.clone()));
        }
    }
    let di1 = if traj.len() >= 3 {
        let tt: Vec<f64> = traj.samples.iter().map(|x| x.t).collect();
        let v: Vec<f64> = lyap.iter().map(|x| x.i1_value).collect();
        derivative_nonuniform(&tt, &v)
    } else {
        vec![f64::NAN; traj.len()]
    };
    traj.add_column("dI1_dt", di1)?;
    Ok(SimOutput {
        trajectory: traj,
        lyapunov: lyap,
        final_field: u,
        final_decomposition: Some(dec),
        snapshots,
        steps,
    })
}

/// Parameters of the explicit blow-up solution of the homogeneous equation
/// with blow-up time zero: `λ = -t/C0`, `b = -t/C0²`, `γ = -C0²/t`.
pub fn pseudo_conformal_params(c0: f64, t: f64) -> Result<ModParams> {
    crate::modulation::initial_params(c0, t)
}
