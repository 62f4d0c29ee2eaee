use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use vicinal_core::energy::{energy_total, min_slope};
use vicinal_core::spectral::{derivative, make_field, norm_lp, project_zero_mean};
use vicinal_core::stepper::{run_evolution, Trajectory, TruncationStats};
use vicinal_core::variational::{certify_vi, vi_direction_battery};
use vicinal_core::verification::{
    admissibility_report, log_integrability_report, make_test_battery, weak_form_residual, Verdict,
};
use vicinal_core::{Execution, SpectralField};

use crate::config::RunConfig;
use crate::error::{classify, CliError, EXIT_OK};
use crate::output::{self, Snapshot};

pub const THREADS_ENV: &str = "VICINAL_FLOW_THREADS";

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub steps: usize,
    pub snapshots: usize,
    pub final_energy: f64,
    pub final_min_slope: f64,
    pub initial_truncation: Option<TruncationStats>,
}

pub fn cmd_run(cfg: &RunConfig, out: &Path) -> Result<RunSummary, CliError> {
    let grid = cfg.grid();
    let p = cfg.params();
    let u0 = cfg.init.build(&grid).map_err(CliError::InitialData)?;
    let traj = run_evolution(&u0, &p, cfg.t_final, &cfg.step_config()).map_err(classify)?;

    output::create_dir(out)?;
    let last = traj.steps();
    let mut snapshots = 0;
    for (n, u) in traj.states.iter().enumerate() {
        if n % cfg.snapshot_every == 0 || n == last {
            output::write(&out.join(output::snapshot_name(n)), &output::snapshot_text(traj.times[n], u, &p))?;
            snapshots += 1;
        }
    }
    output::write(&out.join(output::ENERGY_LOG), &output::energy_log_text(&traj, &p))?;
    let final_energy = energy_total(traj.final_state(), &p);
    Ok(RunSummary {
        steps: last,
        snapshots,
        final_energy: final_energy.total,
        final_min_slope: final_energy.min_slope,
        initial_truncation: traj.initial_truncation,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

fn check(name: &str, pass: bool, detail: String) -> Check {
    Check {
        name: name.to_string(),
        pass,
        detail,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyOutcome {
    pub checks: Vec<Check>,
}

impl VerifyOutcome {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        for c in &self.checks {
            let _ = writeln!(s, "{} {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail);
        }
        s
    }
}

const MEAN_TOL: f64 = 1e-12;
const COLUMN_TOL: f64 = 1e-9;
const DISSIPATION_TOL: f64 = 1e-9;
const VI_SAMPLES: usize = 10;

fn max_gap(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn scale(v: &[f64]) -> f64 {
    1.0 + v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Check one snapshot's internal consistency and rebuild its field.
fn load_field(cfg: &RunConfig, snap: &Snapshot, checks: &mut Vec<Check>) -> SpectralField {
    let grid = cfg.grid();
    let p = cfg.params();
    let name = format!("snapshot {}", snap.step);
    let mut problems = Vec::new();
    let expected_t = snap.step as f64 * cfg.tau;
    if (snap.t - expected_t).abs() > 1e-12 * (1.0 + expected_t) {
        problems.push(format!("t = {} but step {} implies {expected_t}", snap.t, snap.step));
    }
    if max_gap(&snap.x, grid.nodes()) > 1e-14 {
        problems.push("x column is not the grid".to_string());
    }
    let mean = snap.u.iter().sum::<f64>() / snap.u.len() as f64;
    if mean.abs() > MEAN_TOL {
        problems.push(format!("mean(u) = {mean:.3e}"));
    }
    let u = make_field(&grid, project_zero_mean(&snap.u)).expect("mean projected");
    let ux = derivative(&u, 1).expect("order 1");
    let uxx = derivative(&u, 2).expect("order 2");
    let gx = max_gap(&snap.u_x, ux.samples());
    if gx > COLUMN_TOL * scale(&snap.u_x) {
        problems.push(format!("u_x column off by {gx:.3e}"));
    }
    let gxx = max_gap(&snap.u_xx, uxx.samples());
    if gxx > COLUMN_TOL * scale(&snap.u_xx) {
        problems.push(format!("u_xx column off by {gxx:.3e}"));
    }
    let h: Vec<f64> = ux.samples().iter().zip(grid.nodes()).map(|(d, x)| d + p.a() * x).collect();
    let gh = max_gap(&snap.h, &h);
    if gh > COLUMN_TOL * scale(&snap.h) {
        problems.push(format!("h column off by {gh:.3e}"));
    }
    let m = min_slope(&u, &p);
    if m <= 0.0 {
        problems.push(format!("min(u_xx + a) = {m:.3e}"));
    }
    let pass = problems.is_empty();
    let detail = if pass {
        format!("t = {}, min(u_xx + a) = {m:.6e}", snap.t)
    } else {
        problems.join("; ")
    };
    checks.push(check(&name, pass, detail));
    u
}

pub fn cmd_verify(cfg: &RunConfig, dir: &Path) -> Result<VerifyOutcome, CliError> {
    let grid = cfg.grid();
    let p = cfg.params();
    let files = output::list_snapshots(dir)?;
    if files.is_empty() {
        return Err(CliError::Certification(format!("no snapshots in {}", dir.display())));
    }
    let mut checks = Vec::new();
    let mut per_snapshot = Vec::with_capacity(files.len());
    let mut steps = Vec::with_capacity(files.len());
    let mut times = Vec::with_capacity(files.len());
    let mut states = Vec::with_capacity(files.len());
    for (step, path) in &files {
        let snap = output::parse_snapshot(path, *step, &output::read(path)?)?;
        if snap.u.len() != grid.n() {
            return Err(CliError::Snapshot {
                path: path.clone(),
                reason: format!("{} rows, configuration has n = {}", snap.u.len(), grid.n()),
            });
        }
        states.push(load_field(cfg, &snap, &mut per_snapshot));
        steps.push(*step);
        times.push(snap.t);
    }
    // One line for a clean set of snapshots, otherwise every offending one.
    if per_snapshot.iter().all(|c| c.pass) {
        let floor = states.iter().map(|u| min_slope(u, &p)).fold(f64::INFINITY, f64::min);
        checks.push(check(
            "snapshot consistency",
            true,
            format!("{} snapshots, min(u_xx + a) over all = {floor:.6e}", states.len()),
        ));
    } else {
        checks.extend(per_snapshot.into_iter().filter(|c| !c.pass));
    }

    let admissibility = admissibility_report(&states[0], &p);
    output::write(&dir.join(output::ADMISSIBILITY_REPORT), &output::admissibility_text(&admissibility))?;
    checks.push(check(
        "initial admissibility",
        admissibility.verdict != Verdict::Inadmissible && steps[0] == 0,
        format!(
            "first snapshot step {}, verdict {:?}, r_value = {:.6e}",
            steps[0], admissibility.verdict, admissibility.r_value
        ),
    ));

    let consecutive = steps.windows(2).all(|w| w[1] == w[0] + 1);
    let traj = Trajectory {
        tau: cfg.tau,
        times,
        states,
        diagnostics: Vec::new(),
        initial_truncation: None,
    };

    let battery = make_test_battery(cfg.t_final, cfg.battery_max_k, cfg.battery_m_time);
    let residual = weak_form_residual(&traj, &p, &battery);
    output::write(&dir.join(output::RESIDUAL_REPORT), &output::residual_report_text(&residual))?;
    checks.push(check(
        "weak form",
        residual.max <= cfg.weak_form_tol,
        format!("max residual {:.3e} (tolerance {:.1e}, {} test functions)", residual.max, cfg.weak_form_tol, battery.len()),
    ));

    if consecutive && traj.steps() > 0 {
        let worst = traj
            .states
            .windows(2)
            .map(|w| {
                let inc = norm_lp(&w[1].sub(&w[0]).expect("one grid"), 2.0);
                energy_total(&w[1], &p).total + inc * inc / (2.0 * cfg.tau) - energy_total(&w[0], &p).total
            })
            .fold(f64::NEG_INFINITY, f64::max);
        checks.push(check(
            "dissipation",
            worst <= DISSIPATION_TOL,
            format!("max E(u+) + |du|^2/2tau - E(u) = {worst:.3e}"),
        ));

        let logs = log_integrability_report(&traj, &p);
        let bad = logs.iter().filter(|l| !l.holds()).count();
        checks.push(check("log integrability", bad == 0, format!("{bad} of {} states violate", logs.len())));

        let total = traj.steps();
        let picks: Vec<usize> = (1..=VI_SAMPLES.min(total)).map(|i| i * total / VI_SAMPLES.min(total)).collect();
        let mut worst_margin = f64::INFINITY;
        let mut rejected = Vec::new();
        for &n in &picks {
            let u = &traj.states[n];
            let u_dot = u.lincomb(1.0 / cfg.tau, -1.0 / cfg.tau, &traj.states[n - 1]).expect("one grid");
            let dirs = vi_direction_battery(u, &p, n as u64);
            match certify_vi(&u_dot, u, &p, &dirs, Execution::default()) {
                Ok(cert) => worst_margin = worst_margin.min(cert.min_value - cert.tolerance),
                Err(e) => rejected.push(format!("step {n}: {e}")),
            }
        }
        let detail = if rejected.is_empty() {
            format!("{} sampled steps, min residual - tolerance = {worst_margin:.3e}", picks.len())
        } else {
            rejected.join("; ")
        };
        checks.push(check("variational inequality", rejected.is_empty() && worst_margin >= 0.0, detail));
    } else {
        checks.push(check(
            "variational inequality",
            true,
            "skipped: snapshots are not consecutive steps".to_string(),
        ));
    }

    let outcome = VerifyOutcome { checks };
    output::write(&dir.join(output::VERIFY_SUMMARY), &outcome.summary())?;
    Ok(outcome)
}

#[derive(Debug)]
pub struct SweepRun {
    pub label: String,
    pub dir: PathBuf,
    pub result: Result<RunSummary, CliError>,
}

/// Worker count: hardware parallelism, optionally capped by the environment.
pub fn sweep_threads(env: Option<&str>) -> Result<usize, CliError> {
    let hardware = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    match env {
        None => Ok(hardware),
        Some(text) => match text.trim().parse::<usize>() {
            Ok(cap) if cap > 0 => Ok(cap.min(hardware)),
            _ => Err(CliError::Config(crate::config::ConfigError::Validation {
                constraint: format!("{THREADS_ENV} must be a positive integer, got `{text}`"),
            })),
        },
    }
}

pub fn cmd_sweep(cfg: &RunConfig, out: &Path, threads: usize) -> Result<Vec<SweepRun>, CliError> {
    let points = cfg.expand_sweep()?;
    output::create_dir(out)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .expect("thread pool");
    let runs: Vec<SweepRun> = pool.install(|| {
        Execution::Parallel.map_slice(&points.iter().enumerate().collect::<Vec<_>>(), |(i, (label, point))| {
            let dir = out.join(format!("run_{i:03}"));
            SweepRun {
                label: label.clone(),
                result: cmd_run(point, &dir),
                dir,
            }
        })
    });
    let mut summary = String::from("run,overrides,status,steps,final_energy\n");
    for (i, r) in runs.iter().enumerate() {
        let label = if r.label.is_empty() { "-" } else { &r.label };
        match &r.result {
            Ok(s) => {
                let _ = writeln!(summary, "{i},{label},ok,{},{:.16e}", s.steps, s.final_energy);
            }
            Err(e) => {
                let _ = writeln!(summary, "{i},{label},exit {},,", e.exit_code());
            }
        }
    }
    output::write(&out.join("sweep_summary.csv"), &summary)?;
    Ok(runs)
}

/// Exit status of a finished sweep: the largest code among its runs.
pub fn sweep_exit_code(runs: &[SweepRun]) -> u8 {
    runs.iter()
        .filter_map(|r| r.result.as_ref().err().map(CliError::exit_code))
        .max()
        .unwrap_or(EXIT_OK)
}
