//! Implicit minimizing-movement time stepping.
//!
//! Each step minimizes `J(v) = (1/2 tau) ||v - u_prev||^2 + E(v)` over
//! admissible `v`; the minimizer satisfies the variational inequality of the
//! flow. A run is a fixed-step sequence of such minimizations.

mod newton;
mod truncate;

pub use truncate::{check_truncation, truncate_second_derivative, TruncationCheck, TruncationStats};

use crate::energy::{energy_total, BarrierParams, EnergyReport};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::spectral::{norm_lp, SpectralField};

use newton::{coeffs_to_field, field_to_coeffs, Problem};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepConfig {
    pub tau: f64,
    /// Stop when the L2 norm of the objective gradient falls below this.
    pub newton_tol: f64,
    pub max_iter: usize,
    /// Trial states with `min(v_xx + a) <= delta_min` are rejected.
    pub delta_min: f64,
    pub armijo: f64,
    pub shrink: f64,
    /// Policy for Hessian assembly inside a step.
    pub execution: Execution,
}

impl StepConfig {
    pub fn new(tau: f64) -> Self {
        Self {
            tau,
            newton_tol: 1e-10,
            max_iter: 60,
            delta_min: 1e-8,
            armijo: 1e-4,
            shrink: 0.5,
            execution: Execution::default(),
        }
    }

    pub fn with_execution(mut self, execution: Execution) -> Self {
        self.execution = execution;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidParameter(msg.to_string()));
        if !(self.tau.is_finite() && self.tau > 0.0) {
            return bad("tau must be positive");
        }
        if self.tau > 1.0 {
            return bad("tau must not exceed 1");
        }
        if !(self.newton_tol.is_finite() && self.newton_tol > 0.0) {
            return bad("newton_tol must be positive");
        }
        if self.max_iter == 0 {
            return bad("max_iter must be positive");
        }
        if !(self.delta_min.is_finite() && self.delta_min > 0.0) {
            return bad("delta_min must be positive");
        }
        if !(self.armijo > 0.0 && self.armijo < 0.5) {
            return bad("armijo must lie in (0, 0.5)");
        }
        if !(self.shrink > 0.0 && self.shrink < 1.0) {
            return bad("shrink must lie in (0, 1)");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepDiagnostics {
    pub newton_iters: usize,
    pub grad_norm: f64,
    pub min_slope: f64,
    pub energy: EnergyReport,
    /// `||u^{n+1} - u^n||_2`.
    pub increment_norm: f64,
    pub backtracks: usize,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub tau: f64,
    pub times: Vec<f64>,
    pub states: Vec<SpectralField>,
    /// One entry per step, so one fewer than `states`. Empty for
    /// trajectories rebuilt from stored snapshots.
    pub diagnostics: Vec<StepDiagnostics>,
    /// Set when the initial state had to be lifted off the slope floor.
    pub initial_truncation: Option<TruncationStats>,
}

impl Trajectory {
    /// Trajectory with `t_n = n tau` and no solver diagnostics.
    pub fn from_states(tau: f64, states: Vec<SpectralField>) -> Self {
        Self {
            tau,
            times: (0..states.len()).map(|i| i as f64 * tau).collect(),
            states,
            diagnostics: Vec::new(),
            initial_truncation: None,
        }
    }

    pub fn steps(&self) -> usize {
        self.states.len().saturating_sub(1)
    }

    pub fn final_state(&self) -> &SpectralField {
        self.states.last().expect("trajectory holds at least the initial state")
    }
}

/// `J(v)`; `+inf` when `v` is inadmissible.
pub fn step_objective(v: &SpectralField, u_prev: &SpectralField, p: &BarrierParams, tau: f64) -> Result<f64> {
    let diff = v.sub(u_prev)?;
    let e = energy_total(v, p).total;
    if e.is_infinite() {
        return Ok(f64::INFINITY);
    }
    Ok(norm_lp(&diff, 2.0).powi(2) / (2.0 * tau) + e)
}

fn problem<'a>(u_prev: &'a SpectralField, p: &'a BarrierParams, tau: f64) -> Problem<'a> {
    Problem {
        grid: u_prev.grid(),
        params: p,
        tau,
        prev: field_to_coeffs(u_prev),
    }
}

/// L2 gradient of `J` at an admissible `v` (Nyquist component excluded).
pub fn step_objective_gradient(
    v: &SpectralField,
    u_prev: &SpectralField,
    p: &BarrierParams,
    tau: f64,
) -> Result<SpectralField> {
    crate::spectral::check_same_grid(v, u_prev)?;
    require_admissible(v, p)?;
    let prob = problem(u_prev, p, tau);
    Ok(newton::gradient_field(&prob, &field_to_coeffs(v)))
}

/// Second variation `d^2/ds^2 J(v + s w)` at `s = 0`.
pub fn step_objective_hessian_form(
    v: &SpectralField,
    w: &SpectralField,
    p: &BarrierParams,
    tau: f64,
) -> Result<f64> {
    crate::spectral::check_same_grid(v, w)?;
    require_admissible(v, p)?;
    // The Hessian does not depend on the previous state.
    let prob = problem(v, p, tau);
    let h = newton::hessian_matrix(&prob, &field_to_coeffs(v), Execution::Sequential);
    let wc = nalgebra::DVector::from_vec(field_to_coeffs(w));
    Ok(wc.dot(&(&h * &wc)))
}

fn require_admissible(u: &SpectralField, p: &BarrierParams) -> Result<()> {
    let m = crate::energy::min_slope(u, p);
    if m > 0.0 {
        Ok(())
    } else {
        Err(Error::Inadmissible { min_slope: m })
    }
}

/// One implicit step warm-started at `u_prev`.
pub fn implicit_step(
    u_prev: &SpectralField,
    p: &BarrierParams,
    cfg: &StepConfig,
) -> Result<(SpectralField, StepDiagnostics)> {
    implicit_step_from(u_prev, u_prev, p, cfg)
}

/// One implicit step with an explicit Newton starting point. An inadmissible
/// `init` is pulled toward zero until it is admissible.
pub fn implicit_step_from(
    u_prev: &SpectralField,
    init: &SpectralField,
    p: &BarrierParams,
    cfg: &StepConfig,
) -> Result<(SpectralField, StepDiagnostics)> {
    cfg.validate()?;
    crate::spectral::check_same_grid(u_prev, init)?;
    require_admissible(u_prev, p)?;
    let prob = problem(u_prev, p, cfg.tau);
    let sol = newton::solve(&prob, &field_to_coeffs(init), cfg)?;
    let next = coeffs_to_field(u_prev.grid(), &sol.coeffs);
    let energy = energy_total(&next, p);
    let diag = StepDiagnostics {
        newton_iters: sol.iterations,
        grad_norm: sol.grad_norm,
        min_slope: energy.min_slope,
        energy,
        increment_norm: norm_lp(&next.sub(u_prev)?, 2.0),
        backtracks: sol.backtracks,
    };
    Ok((next, diag))
}

/// `ceil(t_final / tau)`, ignoring round-off in the quotient.
pub fn step_count(t_final: f64, tau: f64) -> usize {
    let r = t_final / tau;
    let nearest = r.round();
    if (r - nearest).abs() <= 1e-9 * nearest.max(1.0) {
        nearest as usize
    } else {
        r.ceil() as usize
    }
}

pub fn run_evolution(
    u0: &SpectralField,
    p: &BarrierParams,
    t_final: f64,
    cfg: &StepConfig,
) -> Result<Trajectory> {
    cfg.validate()?;
    if !(t_final.is_finite() && t_final > 0.0) {
        return Err(Error::InvalidParameter("t_final must be positive".into()));
    }
    let fraction = u0.top_quarter_fraction();
    if fraction > 1e-8 {
        return Err(Error::SpectralUnderresolved { fraction });
    }
    require_admissible(u0, p)?;

    let mut initial_truncation = None;
    let start = if crate::energy::min_slope(u0, p) < cfg.delta_min {
        let (lifted, stats) = truncate_second_derivative(u0, p, 10.0 * cfg.delta_min)?;
        initial_truncation = Some(stats);
        lifted
    } else {
        u0.clone()
    };

    let steps = step_count(t_final, cfg.tau);
    let mut states = Vec::with_capacity(steps + 1);
    let mut diagnostics = Vec::with_capacity(steps);
    states.push(start);
    for step in 0..steps {
        let (next, diag) = implicit_step(&states[step], p, cfg).map_err(|e| Error::StepFailed {
            step: step + 1,
            source: Box::new(e),
        })?;
        states.push(next);
        diagnostics.push(diag);
    }
    Ok(Trajectory {
        tau: cfg.tau,
        times: (0..=steps).map(|i| i as f64 * cfg.tau).collect(),
        states,
        diagnostics,
        initial_truncation,
    })
}

/// `max_n ||u^{n+1} - u^n||_2 / tau`; zero for fewer than two states.
pub fn lipschitz_ratio(traj: &Trajectory) -> f64 {
    traj.states
        .windows(2)
        .map(|w| norm_lp(&w[1].sub(&w[0]).expect("one grid per trajectory"), 2.0) / traj.tau)
        .fold(0.0, f64::max)
}

/// An independent evolution for [`run_sweep`].
#[derive(Debug, Clone)]
pub struct SweepJob {
    pub u0: SpectralField,
    pub params: BarrierParams,
    pub t_final: f64,
    pub cfg: StepConfig,
}

/// Run independent evolutions, results in job order.
pub fn run_sweep(jobs: &[SweepJob], exec: Execution) -> Vec<Result<Trajectory>> {
    exec.map_slice(jobs, |job| run_evolution(&job.u0, &job.params, job.t_final, &job.cfg))
}
