//! Damped Newton on the real Fourier coefficients of the trial state.
//!
//! The unknown is `v = sum_{k=1}^{n/2-1} a_k cos kx + b_k sin kx`, stored as
//! `[a_1, b_1, a_2, b_2, ...]`. In these variables
//!
//! ```text
//! J(v) = pi/(2 tau) |p - p_prev|^2 - pi/2 sum k^3 (a_k^2 + b_k^2)
//!        + dx sum_j Phi_a(v_xx(x_j))
//! ```
//!
//! up to a constant. The two quadratic parts are diagonal; the barrier part
//! is assembled from exponential sums of `Phi_a'` and `Phi_a''` at the nodes.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::energy::{barrier_curvature, barrier_slope, barrier_value, BarrierParams};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::spectral::{PeriodicGrid, SpectralField};

use super::StepConfig;

pub(crate) struct Problem<'a> {
    pub grid: &'a PeriodicGrid,
    pub params: &'a BarrierParams,
    pub tau: f64,
    pub prev: Vec<f64>,
}

pub(crate) struct Solution {
    pub coeffs: Vec<f64>,
    pub iterations: usize,
    pub grad_norm: f64,
    pub backtracks: usize,
}

pub(crate) fn modes(grid: &PeriodicGrid) -> usize {
    grid.nyquist() - 1
}

/// Real coefficient vector of a field; the Nyquist mode is not represented.
pub(crate) fn field_to_coeffs(f: &SpectralField) -> Vec<f64> {
    let k_max = modes(f.grid());
    let mut out = Vec::with_capacity(2 * k_max);
    for c in &f.coeffs()[1..=k_max] {
        out.push(2.0 * c.re);
        out.push(-2.0 * c.im);
    }
    out
}

pub(crate) fn coeffs_to_field(grid: &PeriodicGrid, p: &[f64]) -> SpectralField {
    let mut coeffs = vec![Complex64::new(0.0, 0.0); grid.nyquist() + 1];
    for (k, pair) in p.chunks_exact(2).enumerate() {
        coeffs[k + 1] = Complex64::new(0.5 * pair[0], -0.5 * pair[1]);
    }
    SpectralField::from_spectrum(grid, coeffs).expect("length matches grid")
}

/// Nodal `v_xx` for coefficient vector `p`.
pub(crate) fn second_derivative_nodes(grid: &PeriodicGrid, p: &[f64]) -> Vec<f64> {
    let mut coeffs = vec![Complex64::new(0.0, 0.0); grid.nyquist() + 1];
    for (k, pair) in p.chunks_exact(2).enumerate() {
        let kk = ((k + 1) * (k + 1)) as f64;
        coeffs[k + 1] = Complex64::new(-0.5 * kk * pair[0], 0.5 * kk * pair[1]);
    }
    grid.synthesize(&coeffs)
}

impl Problem<'_> {
    fn min_shifted(&self, vxx: &[f64]) -> f64 {
        vxx.iter().fold(f64::INFINITY, |m, v| m.min(v + self.params.a()))
    }

    /// Objective up to the constant dropped with the prior state's Nyquist
    /// part. Caller guarantees `v_xx + a > 0` at every node.
    fn value(&self, p: &[f64], vxx: &[f64]) -> f64 {
        let a = self.params.a();
        let mut quad = 0.0;
        for (k, (pair, prev)) in p.chunks_exact(2).zip(self.prev.chunks_exact(2)).enumerate() {
            let k3 = ((k + 1) as f64).powi(3);
            let d0 = pair[0] - prev[0];
            let d1 = pair[1] - prev[1];
            quad += PI / (2.0 * self.tau) * (d0 * d0 + d1 * d1)
                - 0.5 * PI * k3 * (pair[0] * pair[0] + pair[1] * pair[1]);
        }
        let barrier: f64 = vxx.iter().map(|v| barrier_value(v + a)).sum();
        quad + self.grid.dx() * barrier
    }

    fn gradient(&self, p: &[f64], vxx: &[f64]) -> Vec<f64> {
        let a = self.params.a();
        let dx = self.grid.dx();
        let weights: Vec<f64> = vxx.iter().map(|v| dx * barrier_slope(v + a)).collect();
        let sums = self.grid.exponential_sums(&weights);
        let mut g = Vec::with_capacity(p.len());
        for (k, (pair, prev)) in p.chunks_exact(2).zip(self.prev.chunks_exact(2)).enumerate() {
            let kf = (k + 1) as f64;
            let diag_prev = PI / self.tau;
            let hilbert = PI * kf.powi(3);
            let s = sums[k + 1];
            g.push(diag_prev * (pair[0] - prev[0]) - hilbert * pair[0] - kf * kf * s.re);
            g.push(diag_prev * (pair[1] - prev[1]) - hilbert * pair[1] + kf * kf * s.im);
        }
        g
    }

    fn hessian(&self, vxx: &[f64], exec: Execution) -> DMatrix<f64> {
        let a = self.params.a();
        let dx = self.grid.dx();
        let weights: Vec<f64> = vxx.iter().map(|v| dx * barrier_curvature(v + a)).collect();
        let w = self.grid.exponential_sums(&weights);
        let n = self.grid.n();
        // sum_j w_j cos(m x_j) and sum_j w_j sin(m x_j) for |m| < n.
        let cos_sum = |m: i64| w[m.unsigned_abs() as usize % n].re;
        let sin_sum = |m: i64| {
            let s = -w[m.unsigned_abs() as usize % n].im;
            if m < 0 {
                -s
            } else {
                s
            }
        };
        let k_max = modes(self.grid);
        let dim = 2 * k_max;
        let tau = self.tau;
        let mut buf = vec![0.0; dim * dim];
        exec.for_each_row(&mut buf, dim, |row, out| {
            let k = (row / 2 + 1) as i64;
            let row_is_sin = row % 2 == 1;
            for (col, entry) in out.iter_mut().enumerate() {
                let l = (col / 2 + 1) as i64;
                let col_is_sin = col % 2 == 1;
                let kernel = match (row_is_sin, col_is_sin) {
                    (false, false) => 0.5 * (cos_sum(k - l) + cos_sum(k + l)),
                    (true, true) => 0.5 * (cos_sum(k - l) - cos_sum(k + l)),
                    (false, true) => 0.5 * (sin_sum(l + k) + sin_sum(l - k)),
                    (true, false) => 0.5 * (sin_sum(k + l) + sin_sum(k - l)),
                };
                *entry = ((k * k * l * l) as f64) * kernel;
            }
            let kf = k as f64;
            out[row] += PI / tau - PI * kf.powi(3);
        });
        DMatrix::from_row_slice(dim, dim, &buf)
    }
}

fn norm_of_gradient(g: &[f64]) -> f64 {
    (g.iter().map(|x| x * x).sum::<f64>() / PI).sqrt()
}

/// The L2 gradient of the step objective at `p`, as a field.
pub(crate) fn gradient_field(problem: &Problem<'_>, p: &[f64]) -> SpectralField {
    let vxx = second_derivative_nodes(problem.grid, p);
    let g = problem.gradient(p, &vxx);
    // d J / d a_k = pi * (cos-coefficient of the gradient field).
    let scaled: Vec<f64> = g.iter().map(|x| x / PI).collect();
    coeffs_to_field(problem.grid, &scaled)
}

pub(crate) fn hessian_matrix(problem: &Problem<'_>, p: &[f64], exec: Execution) -> DMatrix<f64> {
    let vxx = second_derivative_nodes(problem.grid, p);
    problem.hessian(&vxx, exec)
}

/// Feasible starting point: `init` scaled toward zero until the slope floor
/// holds (zero itself always does, since `a > delta_min`).
fn feasible_start(problem: &Problem<'_>, init: &[f64], delta_min: f64) -> Vec<f64> {
    let mut scale = 1.0;
    loop {
        let p: Vec<f64> = init.iter().map(|c| c * scale).collect();
        let vxx = second_derivative_nodes(problem.grid, &p);
        if problem.min_shifted(&vxx) > delta_min || scale == 0.0 {
            return p;
        }
        scale = if scale < 1e-12 { 0.0 } else { 0.5 * scale };
    }
}

pub(crate) fn solve(problem: &Problem<'_>, init: &[f64], cfg: &StepConfig) -> Result<Solution> {
    let mut p = feasible_start(problem, init, cfg.delta_min);
    let mut vxx = second_derivative_nodes(problem.grid, &p);
    let mut value = problem.value(&p, &vxx);
    let mut backtracks = 0;
    let mut grad_norm = f64::INFINITY;

    for iteration in 0..=cfg.max_iter {
        let g = problem.gradient(&p, &vxx);
        grad_norm = norm_of_gradient(&g);
        if grad_norm <= cfg.newton_tol {
            return Ok(Solution {
                coeffs: p,
                iterations: iteration,
                grad_norm,
                backtracks,
            });
        }
        if iteration == cfg.max_iter {
            break;
        }

        let hess = problem.hessian(&vxx, cfg.execution);
        let chol = hess.cholesky().ok_or(Error::NonConvergence {
            iterations: iteration,
            grad_norm,
        })?;
        let dir = chol.solve(&-DVector::from_column_slice(&g));
        let slope: f64 = dir.iter().zip(&g).map(|(d, gi)| d * gi).sum();
        // Decrement at round-off level: the full step cannot be judged by
        // comparing objective values any more.
        let roundoff = -slope <= 1e3 * f64::EPSILON * (1.0 + value.abs());

        let mut alpha = 1.0;
        let mut boundary_hits = 0;
        loop {
            let trial: Vec<f64> = p.iter().zip(dir.iter()).map(|(x, d)| x + alpha * d).collect();
            let trial_vxx = second_derivative_nodes(problem.grid, &trial);
            if problem.min_shifted(&trial_vxx) <= cfg.delta_min {
                boundary_hits += 1;
            } else {
                let trial_value = problem.value(&trial, &trial_vxx);
                if trial_value <= value + cfg.armijo * alpha * slope || (alpha == 1.0 && roundoff) {
                    p = trial;
                    vxx = trial_vxx;
                    value = trial_value;
                    break;
                }
            }
            alpha *= cfg.shrink;
            backtracks += 1;
            if alpha < 1e-14 {
                return Err(if boundary_hits > 0 {
                    Error::SafeguardTriggered {
                        iteration,
                        step_length: alpha,
                    }
                } else {
                    Error::NonConvergence {
                        iterations: iteration,
                        grad_norm,
                    }
                });
            }
        }
    }
    Err(Error::NonConvergence {
        iterations: cfg.max_iter,
        grad_norm,
    })
}
