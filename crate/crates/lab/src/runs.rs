//! Checks on simulation output and the artifacts written for a run.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use blowuplab_core::lyapunov::{monotonicity_report, MonotonicityReport};
use blowuplab_core::modulation::{StructureConstants, Trajectory, TrajectoryStatus};
use blowuplab_core::nlssim::{
    modulation_residuals, rate_fit, run, second_difference, Direction, SimConfig, SimOutput,
};
use blowuplab_core::numerics::CartesianGrid;
use blowuplab_core::profile::{write_dump, CoefficientK, ProfileBasis};
use blowuplab_core::Result;

use crate::config::RunConfig;
use crate::suites::Check;
use crate::svg::{panels, Panel};

pub const ORTHO_TOL: f64 = 1e-8;
pub const RATE_TOL: f64 = 0.1;
pub const EPS_EXPONENT_MIN: f64 = 1.0;
pub const S_ERROR_TOL: f64 = 1e-3;
pub const MASS_DRIFT_TOL: f64 = 1e-10;
pub const VIRIAL_TOL: f64 = 1e-2;
/// One constant `C` in `dI₁/dt ≥ -C` shared by every run of a `t0` sweep.
pub const MONOTONICITY_C: f64 = 1e-2;

/// Inhomogeneous run with `k1 = k2 = 1` from `t0 = -0.01` to the collapse
/// floor: box `16λ0`, 256 points, step `5e-3` in `s`.
pub fn inhomogeneous_config() -> RunConfig {
    let t0 = -0.01;
    let grid = CartesianGrid::new(16.0 * -t0, 256).expect("valid grid");
    let k = CoefficientK::quadratic_gaussian(1.0, 1.0).expect("valid k");
    let mut sim = SimConfig::new(grid, k, t0);
    sim.decompose_stride = 80;
    RunConfig { sim, csv_path: "trajectory.csv".into(), fields_dir: None, modulation_c: 10.0 }
}

/// `k ≡ 1` from `t0 = -1` while `λ` spans at least 8 cells: box 16 with 512
/// points ends at `λ = 0.5`.
pub fn homogeneous_config() -> RunConfig {
    let grid = CartesianGrid::new(16.0, 512).expect("valid grid");
    let mut sim = SimConfig::new(grid, CoefficientK::homogeneous(), -1.0);
    sim.t_end = -0.5;
    sim.dt = 1e-2;
    sim.decompose_stride = 5;
    sim.collapse_floor = 8.0;
    RunConfig { sim, csv_path: "trajectory.csv".into(), fields_dir: None, modulation_c: 10.0 }
}

pub fn simulate(rc: &RunConfig, basis: &ProfileBasis) -> Result<SimOutput> {
    run(&rc.sim, basis)
}

fn column(traj: &Trajectory, name: &str) -> Vec<f64> {
    traj.column(name).unwrap_or_default()
}

fn max_of(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().fold(0.0f64, |a, b| if b.is_nan() { f64::NAN } else { a.max(b) })
}

/// Largest `p` with `‖ε‖_{H¹} ≤ λ^p` at every sample with `λ < 1`.
pub fn eps_exponent(traj: &Trajectory) -> f64 {
    let eps = column(traj, "eps_h1");
    traj.samples
        .iter()
        .zip(&eps)
        .filter(|(s, e)| s.params.lambda < 1.0 && **e > 0.0)
        .map(|(s, e)| e.ln() / s.params.lambda.ln())
        .fold(f64::INFINITY, f64::min)
}

pub fn monotonicity(out: &SimOutput) -> Result<MonotonicityReport> {
    monotonicity_report(&out.lyapunov, f64::INFINITY)
}

/// Checks asserted for a run: decomposition residuals always; forward runs
/// add the bootstrap flags and the rate, inhomogeneous ones the modulation
/// envelope and the `ε` exponent, homogeneous ones the explicit solution,
/// mass and virial; backward runs must grow `λ`.
pub fn run_checks(rc: &RunConfig, out: &SimOutput, basis: &ProfileBasis) -> Result<Vec<Check>> {
    let sim = &rc.sim;
    let traj = &out.trajectory;
    let flag = |b: bool| if b { 1.0 } else { 0.0 };
    let mut v = vec![
        Check::at_least("run", "decompositions_succeeded", flag(traj.status != TrajectoryStatus::DecompositionFailed), 1.0),
        Check::at_most("run", "orthogonality_residual", max_of(column(traj, "ortho_max")), ORTHO_TOL),
    ];
    match sim.direction {
        Direction::Forward => {
            let boot = column(traj, "bootstrap");
            v.push(Check::at_least(
                "run",
                "bootstrap_all_true",
                flag(!boot.is_empty() && boot.iter().all(|f| *f == 1.0)),
                1.0,
            ));
            let fit = rate_fit(traj, sim.c0)?;
            v.push(Check::at_most("run", "rate_fit_deviation", (fit.normalized_rate - 1.0).abs(), RATE_TOL));
            if sim.k.is_homogeneous() {
                v.push(Check::at_most("run", "explicit_solution_error", max_of(column(traj, "s_error")), S_ERROR_TOL));
                let mass = column(traj, "mass");
                let drift = max_of(mass.iter().map(|m| (m - mass[0]).abs() / mass[0]));
                v.push(Check::at_most("run", "mass_drift", drift, MASS_DRIFT_TOL));
                let var = column(traj, "variance");
                let e = column(traj, "energy");
                let t: Vec<f64> = traj.samples.iter().map(|s| s.t).collect();
                let virial = max_of((1..t.len().saturating_sub(1)).map(|i| {
                    let v2 = second_difference([(t[i - 1], var[i - 1]), (t[i], var[i]), (t[i + 1], var[i + 1])]);
                    (v2 - 16.0 * e[i]).abs() / (16.0 * e[i]).abs()
                }));
                v.push(Check::at_most("run", "virial_defect", virial, VIRIAL_TOL));
            } else {
                let sc = StructureConstants::with_c0(&basis.moments, &sim.k, sim.c0)?;
                let rep = modulation_residuals(traj, &sc, rc.modulation_c)?;
                v.push(Check::at_most("run", "modulation_fitted_c", rep.fitted_c, rc.modulation_c));
                v.push(Check::at_least("run", "eps_exponent", eps_exponent(traj), EPS_EXPONENT_MIN));
            }
        }
        Direction::Backward => {
            let growing = traj.samples.windows(2).all(|w| w[1].params.lambda > w[0].params.lambda);
            v.push(Check::at_least("run", "lambda_increasing", flag(growing), 1.0));
        }
    }
    Ok(v)
}

/// SVG next to the CSV: `λ(t)`, `b/λ` and `‖ε‖_{H¹}/λ`.
pub fn plot(traj: &Trajectory) -> String {
    let t: Vec<f64> = traj.samples.iter().map(|s| s.t).collect();
    let series = |f: &dyn Fn(usize) -> f64| -> Vec<(f64, f64)> { (0..t.len()).map(|i| (t[i], f(i))).collect() };
    let eps = column(traj, "eps_h1_over_lambda");
    let p = |i: usize| traj.samples[i].params;
    panels(
        "t",
        &[
            Panel { title: "lambda(t)", points: series(&|i| p(i).lambda) },
            Panel { title: "b(t)/lambda(t)", points: series(&|i| p(i).b / p(i).lambda) },
            Panel { title: "|eps|_H1/lambda", points: series(&|i| eps.get(i).copied().unwrap_or(f64::NAN)) },
        ],
    )
}

fn resolve(dir: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        dir.join(p)
    }
}

/// Writes the trajectory CSV, its SVG and, when a fields directory is set,
/// the snapshots and the final field. Relative paths resolve against `dir`.
pub fn write_artifacts(rc: &RunConfig, out: &SimOutput, dir: &Path) -> std::io::Result<Vec<PathBuf>> {
    let csv = resolve(dir, &rc.csv_path);
    if let Some(parent) = csv.parent() {
        std::fs::create_dir_all(parent)?;
    }
    out.trajectory.write_csv(BufWriter::new(File::create(&csv)?))?;
    let svg = csv.with_extension("svg");
    std::fs::write(&svg, plot(&out.trajectory))?;
    let mut written = vec![csv, svg];
    if let Some(fd) = &rc.fields_dir {
        let fd = resolve(dir, fd);
        std::fs::create_dir_all(&fd)?;
        let mut dump = |name: String, f| -> std::io::Result<()> {
            let path = fd.join(name);
            write_dump(f, BufWriter::new(File::create(&path)?))?;
            written.push(path);
            Ok(())
        };
        for (i, (_, f)) in out.snapshots.iter().enumerate() {
            dump(format!("snapshot_{i:05}.bin"), f)?;
        }
        dump("final.bin".into(), &out.final_field)?;
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use blowuplab_core::modulation::Trajectory;
    use blowuplab_core::profile::ModParams;

    #[test]
    fn exponent_is_the_largest_valid_power() {
        let mut tr = Trajectory::new(vec!["eps_h1".into()]);
        for (t, l, e) in [(-0.01, 0.01, 0.0), (-0.008, 0.008, 0.008f64.powi(3)), (-0.005, 0.005, 0.005f64.powi(2))] {
            tr.push(t, 0.0, ModParams::new(l, l, [0.0; 2], [0.0; 2], 0.0), vec![e]).unwrap();
        }
        assert!((eps_exponent(&tr) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn plot_has_three_panels() {
        let mut tr = Trajectory::new(vec!["eps_h1_over_lambda".into()]);
        for i in 0..5 {
            let l = 1.0 - 0.1 * i as f64;
            tr.push(-l, 0.0, ModParams::new(l, l, [0.0; 2], [0.0; 2], 0.0), vec![1e-3]).unwrap();
        }
        let svg = plot(&tr);
        assert_eq!(svg.matches("<polyline").count(), 3);
    }
}
