//! The four commands. Each returns the process exit code: 0 when every
//! asserted tolerance passes, 1 on a failed check, 2 on a usage, config or
//! goldens error, 3 when a sweep finished only partially.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use blowuplab_core::profile::{CoefficientK, ProfileBasis};
use rayon::prelude::*;

use crate::config::{load_config, rescale_t0, with_k1, RunConfig};
use crate::goldens;
use crate::manifest::{RunManifest, Status};
use crate::runs::{eps_exponent, monotonicity, run_checks, simulate, write_artifacts, MONOTONICITY_C};
use crate::suites::{
    all_ok, first_failure, ground_state_checks, log_log_slope, profile_grid, profile_row,
    render_table, run_suite, smooth_k, table_csv, Check, Context, ProfileRow, Suite,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_PARTIAL: i32 = 3;

/// Flags shared by the commands.
#[derive(Debug, Clone, PartialEq)]
pub struct Common {
    pub out: PathBuf,
    pub seed: u64,
    pub goldens: PathBuf,
}

fn finish(
    common: &Common,
    command: &str,
    config: Option<&Path>,
    outputs: Vec<PathBuf>,
    status: Status,
    start: Instant,
) -> Status {
    let m = RunManifest {
        command: command.to_string(),
        config_path: config.map(|p| p.to_path_buf()),
        seed: common.seed,
        outputs,
        status,
        wall_time: start.elapsed().as_secs_f64(),
    };
    match m.append(&common.out) {
        Ok(m) => m.status,
        Err(e) => {
            eprintln!("cannot append manifest in {}: {e}", common.out.display());
            Status::Fail
        }
    }
}

fn code(status: Status) -> i32 {
    match status {
        Status::Pass => EXIT_OK,
        Status::Fail => EXIT_FAIL,
        Status::Partial => EXIT_PARTIAL,
    }
}

pub fn verify(suite: &str, common: &Common) -> i32 {
    let start = Instant::now();
    let Some(suite) = Suite::parse(suite) else {
        eprintln!("unknown suite {suite:?}; expected one of {}", Suite::NAMES.join(", "));
        return EXIT_USAGE;
    };
    let g = match goldens::load(&common.goldens) {
        Ok(g) => g,
        Err(e) => {
            eprintln!("{e}");
            return EXIT_USAGE;
        }
    };
    let ctx = match Context::new(common.seed) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("ground state failed: {e}");
            return EXIT_FAIL;
        }
    };
    let mut checks = ground_state_checks(&ctx, &g);
    if all_ok(&checks) {
        match run_suite(suite, &ctx) {
            Ok(c) => checks.extend(c),
            Err(e) => {
                eprintln!("suite {} aborted: {e}", suite.name());
                return EXIT_FAIL;
            }
        }
    }
    print!("{}", render_table(&checks));
    let table = common.out.join(format!("verify_{}.csv", suite.name()));
    let mut outputs = Vec::new();
    match std::fs::create_dir_all(&common.out).and_then(|_| std::fs::write(&table, table_csv(&checks))) {
        Ok(()) => outputs.push(table),
        Err(e) => eprintln!("cannot write {}: {e}", table.display()),
    }
    let status = match first_failure(&checks) {
        None => Status::Pass,
        Some(c) => {
            if c.group == "golden" {
                eprintln!("golden mismatch at key {}: goldens file {}", c.name, common.goldens.display());
            } else {
                eprintln!("first failing check: {}", c.key());
            }
            Status::Fail
        }
    };
    code(finish(common, &format!("verify {}", suite.name()), None, outputs, status, start))
}

pub fn regen_goldens(common: &Common) -> i32 {
    let start = Instant::now();
    match goldens::regenerate(&common.goldens) {
        Ok(g) => {
            for (k, v) in g.entries() {
                println!("{k}={v:?}");
            }
            println!("wrote {}", common.goldens.display());
            code(finish(common, "regen-goldens", None, vec![common.goldens.clone()], Status::Pass, start))
        }
        Err(e) => {
            eprintln!("cannot write {}: {e}", common.goldens.display());
            EXIT_FAIL
        }
    }
}

/// One run with its artifacts and checks.
struct RunResult {
    checks: Vec<Check>,
    outputs: Vec<PathBuf>,
    summary: RunSummary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub samples: usize,
    pub steps: usize,
    pub status: String,
    pub final_lambda: f64,
    pub normalized_rate: f64,
    pub min_di1_dt: f64,
    pub c_needed: f64,
    pub eps_exponent: f64,
    pub checks_ok: bool,
}

impl RunSummary {
    pub const HEADER: &'static str =
        "samples,steps,status,final_lambda,normalized_rate,min_dI1_dt,c_needed,eps_exponent,checks_ok";

    fn csv(&self) -> String {
        format!(
            "{},{},{},{:e},{:e},{:e},{:e},{:e},{}",
            self.samples,
            self.steps,
            self.status,
            self.final_lambda,
            self.normalized_rate,
            self.min_di1_dt,
            self.c_needed,
            self.eps_exponent,
            self.checks_ok
        )
    }
}

fn execute(rc: &RunConfig, basis: &ProfileBasis, dir: &Path) -> Result<RunResult, String> {
    let out = simulate(rc, basis).map_err(|e| e.to_string())?;
    let outputs = write_artifacts(rc, &out, dir).map_err(|e| e.to_string())?;
    let checks = run_checks(rc, &out, basis).map_err(|e| e.to_string())?;
    let traj = &out.trajectory;
    let checks_path = outputs[0].with_file_name("checks.csv");
    std::fs::write(&checks_path, table_csv(&checks)).map_err(|e| e.to_string())?;
    let mut outputs = outputs;
    outputs.push(checks_path);
    let mono = monotonicity(&out).ok();
    let rate = blowuplab_core::nlssim::rate_fit(traj, rc.sim.c0).map(|f| f.normalized_rate).unwrap_or(f64::NAN);
    let summary = RunSummary {
        samples: traj.len(),
        steps: out.steps,
        status: format!("{:?}", traj.status),
        final_lambda: traj.samples.last().map_or(f64::NAN, |s| s.params.lambda),
        normalized_rate: rate,
        min_di1_dt: mono.as_ref().map_or(f64::NAN, |m| m.min_rate),
        c_needed: mono.as_ref().map_or(f64::NAN, |m| m.c_needed),
        eps_exponent: if rc.sim.k.is_homogeneous() { f64::NAN } else { eps_exponent(traj) },
        checks_ok: all_ok(&checks),
    };
    Ok(RunResult { checks, outputs, summary })
}

pub fn run(config: &Path, common: &Common) -> i32 {
    let start = Instant::now();
    let rc = match load_config(config) {
        Ok(c) => c,
        Err(e) => {
            eprint!("{e}");
            return EXIT_USAGE;
        }
    };
    let basis = match ProfileBasis::with_default_ground_state() {
        Ok(b) => b,
        Err(e) => {
            eprintln!("ground state failed: {e}");
            return EXIT_FAIL;
        }
    };
    let (status, outputs) = match execute(&rc, &basis, &common.out) {
        Ok(r) => {
            let s = &r.summary;
            println!(
                "{} samples, {} steps, status {}, final lambda {:e}, normalized rate {:.6}",
                s.samples, s.steps, s.status, s.final_lambda, s.normalized_rate
            );
            print!("{}", render_table(&r.checks));
            if let Some(c) = first_failure(&r.checks) {
                eprintln!("first failing check: {}", c.key());
            }
            (if s.checks_ok { Status::Pass } else { Status::Fail }, r.outputs)
        }
        Err(e) => {
            eprintln!("run failed: {e}");
            (Status::Fail, Vec::new())
        }
    };
    code(finish(common, "run", Some(config), outputs, status, start))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    T0,
    K1,
    PScale,
}

impl Axis {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "t0" => Some(Axis::T0),
            "k1" => Some(Axis::K1),
            "P_scale" => Some(Axis::PScale),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Axis::T0 => "t0",
            Axis::K1 => "k1",
            Axis::PScale => "P_scale",
        }
    }
}

/// Parses a comma-separated list of at least three finite numbers.
pub fn parse_values(s: &str) -> Result<Vec<f64>, String> {
    let items: Vec<&str> = s.split(',').map(str::trim).filter(|x| !x.is_empty()).collect();
    if items.is_empty() {
        return Err("empty value list".into());
    }
    let values = items
        .iter()
        .map(|x| x.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| format!("bad value {x:?}")))
        .collect::<Result<Vec<f64>, String>>()?;
    if values.len() < 3 {
        return Err(format!("a sweep needs at least 3 values, got {}", values.len()));
    }
    Ok(values)
}

/// Worker pool capped by `BLOWUPLAB_THREADS` when set.
fn pool() -> Result<rayon::ThreadPool, String> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("BLOWUPLAB_THREADS") {
        let n: usize = v
            .parse()
            .ok()
            .filter(|n| *n > 0)
            .ok_or_else(|| format!("BLOWUPLAB_THREADS must be a positive integer, got {v:?}"))?;
        b = b.num_threads(n);
    }
    b.build().map_err(|e| e.to_string())
}

pub const SWEEP_MASS_SLOPE: f64 = 3.7;
pub const SWEEP_RATE_TOL: f64 = 0.1;

pub fn sweep(config: Option<&Path>, axis: &str, values: &str, common: &Common) -> i32 {
    let start = Instant::now();
    let Some(axis) = Axis::parse(axis) else {
        eprintln!("unknown axis {axis:?}; expected t0, k1 or P_scale");
        return EXIT_USAGE;
    };
    let values = match parse_values(values) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("usage error: {e}");
            return EXIT_USAGE;
        }
    };
    let template = match config.map(load_config).transpose() {
        Ok(c) => c,
        Err(e) => {
            eprint!("{e}");
            return EXIT_USAGE;
        }
    };
    if axis != Axis::PScale && template.is_none() {
        eprintln!("usage error: --axis {} needs --config", axis.name());
        return EXIT_USAGE;
    }
    let pool = match pool() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("usage error: {e}");
            return EXIT_USAGE;
        }
    };
    let basis = match ProfileBasis::with_default_ground_state() {
        Ok(b) => b,
        Err(e) => {
            eprintln!("ground state failed: {e}");
            return EXIT_FAIL;
        }
    };
    if let Err(e) = std::fs::create_dir_all(&common.out) {
        eprintln!("cannot create {}: {e}", common.out.display());
        return EXIT_FAIL;
    }
    let (status, outputs) = match axis {
        Axis::PScale => {
            let k = template.as_ref().map_or_else(smooth_k, |t| t.sim.k);
            sweep_profile(&pool, &basis, &k, &values, &common.out)
        }
        Axis::T0 | Axis::K1 => {
            let template = template.expect("checked above");
            sweep_runs(&pool, &basis, &template, axis, &values, &common.out)
        }
    };
    code(finish(
        common,
        &format!("sweep {}", axis.name()),
        config,
        outputs,
        status,
        start,
    ))
}

fn write(path: &Path, text: &str) -> bool {
    match std::fs::write(path, text) {
        Ok(()) => true,
        Err(e) => {
            eprintln!("cannot write {}: {e}", path.display());
            false
        }
    }
}

fn sweep_profile(
    pool: &rayon::ThreadPool,
    basis: &ProfileBasis,
    k: &CoefficientK,
    values: &[f64],
    out: &Path,
) -> (Status, Vec<PathBuf>) {
    let sampled = basis.sample(profile_grid());
    let rows: Vec<Result<ProfileRow, String>> = pool.install(|| {
        values
            .par_iter()
            .map(|p| profile_row(basis, &sampled, k, *p).map_err(|e| e.to_string()))
            .collect()
    });
    let mut text = format!("{},status\n", ProfileRow::HEADER);
    let mut good = Vec::new();
    for (v, r) in values.iter().zip(&rows) {
        match r {
            Ok(row) => {
                let _ = writeln!(text, "{},ok", row.csv());
                good.push(*row);
            }
            Err(e) => {
                let _ = writeln!(text, "{v:e},,,,,,,error: {}", e.replace(',', ";"));
            }
        }
    }
    print!("{text}");
    let summary = out.join("sweep_P_scale.csv");
    let mut outputs = Vec::new();
    if write(&summary, &text) {
        outputs.push(summary);
    }
    let mut status = if good.len() == values.len() { Status::Pass } else { Status::Partial };
    if good.len() >= 2 {
        let p: Vec<f64> = good.iter().map(|r| r.p_size).collect();
        let col = |f: &dyn Fn(&ProfileRow) -> f64| good.iter().map(f).collect::<Vec<_>>();
        let slopes = [
            ("mass_defect", log_log_slope(&p, &col(&|r| r.mass_defect))),
            ("energy_defect", log_log_slope(&p, &col(&|r| r.energy_defect))),
            ("psi_sup_over_P2", log_log_slope(&p, &col(&|r| r.psi_over_p2()))),
        ];
        let mut text = String::from("quantity,slope\n");
        for (n, s) in slopes {
            let _ = writeln!(text, "{n},{s:e}");
        }
        print!("{text}");
        let path = out.join("sweep_P_scale_slopes.csv");
        if write(&path, &text) {
            outputs.push(path);
        }
        if !k.is_homogeneous() && !(slopes[0].1 >= SWEEP_MASS_SLOPE) && status == Status::Pass {
            eprintln!("mass-defect slope {} below {SWEEP_MASS_SLOPE}", slopes[0].1);
            status = Status::Fail;
        }
    }
    (status, outputs)
}

fn sweep_runs(
    pool: &rayon::ThreadPool,
    basis: &ProfileBasis,
    template: &RunConfig,
    axis: Axis,
    values: &[f64],
    out: &Path,
) -> (Status, Vec<PathBuf>) {
    let results: Vec<Result<RunResult, String>> = pool.install(|| {
        values
            .par_iter()
            .enumerate()
            .map(|(i, v)| {
                let mut rc = match axis {
                    Axis::T0 => rescale_t0(template, *v),
                    _ => with_k1(template, *v),
                }
                .map_err(|e| e.0.join("; "))?;
                rc.csv_path = PathBuf::from(format!("{}_{i:02}", axis.name())).join("trajectory.csv");
                if let Some(fd) = &template.fields_dir {
                    rc.fields_dir = Some(fd.join(format!("{}_{i:02}", axis.name())));
                }
                execute(&rc, basis, out)
            })
            .collect()
    });
    let mut text = format!("{},{}\n", axis.name(), RunSummary::HEADER);
    let mut outputs = Vec::new();
    let mut failed = 0;
    let mut checks_ok = true;
    let mut pairs = Vec::new();
    for (v, r) in values.iter().zip(&results) {
        match r {
            Ok(r) => {
                let _ = writeln!(text, "{v:e},{}", r.summary.csv());
                outputs.extend(r.outputs.iter().cloned());
                let rate_ok = (r.summary.normalized_rate - 1.0).abs() <= SWEEP_RATE_TOL
                    || template.sim.direction != blowuplab_core::nlssim::Direction::Forward;
                checks_ok &= r.summary.checks_ok && rate_ok;
                pairs.push((v.abs(), r.summary.c_needed));
            }
            Err(e) => {
                failed += 1;
                let _ = writeln!(text, "{v:e},,,error: {},,,,,,", e.replace(',', ";"));
            }
        }
    }
    print!("{text}");
    let summary = out.join(format!("sweep_{}.csv", axis.name()));
    if write(&summary, &text) {
        outputs.push(summary);
    }
    let positive: Vec<(f64, f64)> = pairs.iter().copied().filter(|(x, c)| *x > 0.0 && *c > 0.0).collect();
    if positive.len() >= 2 {
        let (x, c): (Vec<f64>, Vec<f64>) = positive.into_iter().unzip();
        let c_max = c.iter().copied().fold(0.0f64, f64::max);
        let c_min = c.iter().copied().fold(f64::INFINITY, f64::min);
        let text = format!(
            "quantity,value\nc_needed_slope,{:e}\nc_needed_max,{c_max:e}\nc_needed_spread,{:e}\n",
            log_log_slope(&x, &c),
            c_max / c_min
        );
        print!("{text}");
        let path = out.join(format!("sweep_{}_slopes.csv", axis.name()));
        if write(&path, &text) {
            outputs.push(path);
        }
    }
    let forward = template.sim.direction == blowuplab_core::nlssim::Direction::Forward;
    let c_max = pairs.iter().map(|p| p.1).fold(0.0f64, f64::max);
    if axis == Axis::T0 && forward && !(c_max <= MONOTONICITY_C) {
        eprintln!("monotonicity constant {c_max:e} exceeds {MONOTONICITY_C:e}");
        checks_ok = false;
    }
    let status = if failed > 0 {
        eprintln!("{failed} of {} sub-runs failed", values.len());
        Status::Partial
    } else if checks_ok {
        Status::Pass
    } else {
        Status::Fail
    };
    (status, outputs)
}
