//! Space-time weak-form residuals of computed trajectories.

use crate::energy::{barrier_slope, second_derivative_samples, BarrierParams};
use crate::exec::Execution;
use crate::spectral::{dot_quadrature, PeriodicGrid, SpectralField};
use crate::stepper::Trajectory;

/// `phi(t, x) = eta_j(t) * s(x)` with `s = sin kx` or `cos kx`.
///
/// `eta_j(t) = C * exp(-1 / (sigma (1 - sigma))) * (2 sigma - 1)^j` with
/// `sigma = t / T` and `C` chosen so that `max |eta_j| = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct TestFunction {
    pub t_final: f64,
    pub k: usize,
    pub sine: bool,
    pub time_index: usize,
    scale: f64,
}

fn bump(sigma: f64) -> f64 {
    if sigma <= 0.0 || sigma >= 1.0 {
        0.0
    } else {
        (-1.0 / (sigma * (1.0 - sigma))).exp()
    }
}

fn bump_slope(sigma: f64) -> f64 {
    if sigma <= 0.0 || sigma >= 1.0 {
        0.0
    } else {
        let q = sigma * (1.0 - sigma);
        bump(sigma) * (1.0 - 2.0 * sigma) / (q * q)
    }
}

impl TestFunction {
    pub fn new(t_final: f64, k: usize, sine: bool, time_index: usize) -> Self {
        let raw = |sigma: f64| (bump(sigma) * (2.0 * sigma - 1.0).powi(time_index as i32)).abs();
        let samples = 20_000;
        let peak = (1..samples)
            .map(|i| raw(i as f64 / samples as f64))
            .fold(0.0, f64::max);
        Self {
            t_final,
            k,
            sine,
            time_index,
            scale: 1.0 / peak,
        }
    }

    pub fn id(&self) -> String {
        format!("{}{}_t{}", if self.sine { "sin" } else { "cos" }, self.k, self.time_index)
    }

    pub fn time_profile(&self, t: f64) -> f64 {
        let sigma = t / self.t_final;
        self.scale * bump(sigma) * (2.0 * sigma - 1.0).powi(self.time_index as i32)
    }

    pub fn time_derivative(&self, t: f64) -> f64 {
        let sigma = t / self.t_final;
        let j = self.time_index as i32;
        let poly = (2.0 * sigma - 1.0).powi(j);
        let poly_slope = if j == 0 {
            0.0
        } else {
            2.0 * j as f64 * (2.0 * sigma - 1.0).powi(j - 1)
        };
        self.scale * (bump_slope(sigma) * poly + bump(sigma) * poly_slope) / self.t_final
    }

    /// Spatial factor and its first two derivatives at `x`.
    pub fn space(&self, x: f64) -> (f64, f64, f64) {
        let k = self.k as f64;
        let (s, c) = (k * x).sin_cos();
        if self.sine {
            (s, k * c, -k * k * s)
        } else {
            (c, -k * s, -k * k * c)
        }
    }

    pub fn phi(&self, t: f64, x: f64) -> f64 {
        self.time_profile(t) * self.space(x).0
    }

    pub fn phi_x(&self, t: f64, x: f64) -> f64 {
        self.time_profile(t) * self.space(x).1
    }

    pub fn phi_xx(&self, t: f64, x: f64) -> f64 {
        self.time_profile(t) * self.space(x).2
    }

    pub fn phi_t(&self, t: f64, x: f64) -> f64 {
        self.time_derivative(t) * self.space(x).0
    }
}

/// `sin kx`, `cos kx` for `k = 1..=max_k`, each with time indices
/// `0..m_time`; `2 * max_k * m_time` members.
pub fn make_test_battery(t_final: f64, max_k: usize, m_time: usize) -> Vec<TestFunction> {
    let mut out = Vec::with_capacity(2 * max_k * m_time);
    for k in 1..=max_k {
        for sine in [true, false] {
            for j in 0..m_time {
                out.push(TestFunction::new(t_final, k, sine, j));
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResidualEntry {
    pub id: String,
    /// `sum_n integral (u^{n+1} - u^n) phi(t_{n+1/2}) dx`.
    pub lhs: f64,
    /// `sum_n dt_n integral [H(w_xx) phi_x - Phi_a'(w_xx) phi_xx](t_{n+1/2}) dx`
    /// with `w = (u^n + u^{n+1}) / 2`.
    pub rhs: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResidualReport {
    pub tau: f64,
    pub n: usize,
    pub entries: Vec<ResidualEntry>,
    pub max: f64,
}

/// Spatial integrals of one step against `sin kx` / `cos kx`.
struct StepIntegrals {
    t_mid: f64,
    dt: f64,
    /// Indexed `[k - 1][sine as usize]`: `(increment, hilbert, barrier)`.
    modes: Vec<[(f64, f64, f64); 2]>,
}

fn step_integrals(
    grid: &PeriodicGrid,
    prev: &SpectralField,
    next: &SpectralField,
    (t_mid, dt): (f64, f64),
    p: &BarrierParams,
    max_k: usize,
) -> StepIntegrals {
    let a = p.a();
    let increment: Vec<f64> = next.samples().iter().zip(prev.samples()).map(|(x, y)| x - y).collect();
    let prev_xx = second_derivative_samples(prev);
    let next_xx = second_derivative_samples(next);
    let mid_xx: Vec<f64> = prev_xx.iter().zip(&next_xx).map(|(x, y)| 0.5 * (x + y)).collect();
    let hilbert_xx = grid.hilbert_samples(&mid_xx);
    let slope: Vec<f64> = mid_xx.iter().map(|v| barrier_slope(v + a)).collect();
    let modes = (1..=max_k)
        .map(|k| {
            let mut pair = [(0.0, 0.0, 0.0); 2];
            for (slot, sine) in [false, true].into_iter().enumerate() {
                let phi = TestFunction {
                    t_final: 1.0,
                    k,
                    sine,
                    time_index: 0,
                    scale: 1.0,
                };
                let mut s = Vec::with_capacity(grid.n());
                let mut sx = Vec::with_capacity(grid.n());
                let mut sxx = Vec::with_capacity(grid.n());
                for &x in grid.nodes() {
                    let (v, dv, ddv) = phi.space(x);
                    s.push(v);
                    sx.push(dv);
                    sxx.push(ddv);
                }
                pair[slot] = (
                    dot_quadrature(grid, &increment, &s),
                    dot_quadrature(grid, &hilbert_xx, &sx),
                    dot_quadrature(grid, &slope, &sxx),
                );
            }
            pair
        })
        .collect();
    StepIntegrals { t_mid, dt, modes }
}

pub fn weak_form_residual(traj: &Trajectory, p: &BarrierParams, battery: &[TestFunction]) -> ResidualReport {
    weak_form_residual_with(traj, p, battery, Execution::default())
}

pub fn weak_form_residual_with(
    traj: &Trajectory,
    p: &BarrierParams,
    battery: &[TestFunction],
    exec: Execution,
) -> ResidualReport {
    let grid = traj.states[0].grid().clone();
    let max_k = battery.iter().map(|f| f.k).max().unwrap_or(0);
    let steps = exec.map_range(traj.steps(), |i| {
        let (t0, t1) = (traj.times[i], traj.times[i + 1]);
        step_integrals(&grid, &traj.states[i], &traj.states[i + 1], (0.5 * (t0 + t1), t1 - t0), p, max_k)
    });
    let entries: Vec<ResidualEntry> = battery
        .iter()
        .map(|f| {
            let (mut lhs, mut rhs) = (0.0, 0.0);
            for st in &steps {
                let eta = f.time_profile(st.t_mid);
                let (inc, hil, bar) = st.modes[f.k - 1][f.sine as usize];
                lhs += eta * inc;
                rhs += st.dt * eta * (hil - bar);
            }
            ResidualEntry {
                id: f.id(),
                lhs,
                rhs,
                residual: (lhs - rhs).abs(),
            }
        })
        .collect();
    let max = entries.iter().map(|e| e.residual).fold(0.0, f64::max);
    ResidualReport {
        tau: traj.tau,
        n: grid.n(),
        entries,
        max,
    }
}

/// `log2(r_coarse / r_fine)` for successive halvings of the step.
pub fn empirical_orders(residuals: &[f64]) -> Vec<f64> {
    residuals.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}
