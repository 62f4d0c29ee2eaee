//! Truncation of the second derivative from below, with the mean and
//! boundary-value corrections that keep the rebuilt state periodic and
//! zero-mean.
//!
//! ```text
//! hat_xx  = max(u_xx + a, delta) - a
//! u_xx^d  = hat_xx - mean(hat_xx)
//! u_x^d   = int_{-pi}^x u_xx^d + u_x(-pi) - zeta
//! u^d     = int_{-pi}^x u_x^d  + u(-pi)   - theta
//! ```
//!
//! with `zeta`, `theta` fixing zero means. `E` is the set where the max is
//! active, measured as (active node count) * dx.

use std::f64::consts::PI;

use crate::energy::{second_derivative_samples, BarrierParams};
use crate::error::{Error, Result};
use crate::spectral::{
    antiderivative_zero_mean, make_field, norm_lp_samples, second_antiderivative_zero_mean, SpectralField,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationStats {
    pub delta: f64,
    pub active_nodes: usize,
    /// `|E|`.
    pub measure: f64,
    /// `(1/2pi) * integral hat_xx`, the amount subtracted to restore zero mean.
    pub mean_shift: f64,
    pub zeta: f64,
    pub theta: f64,
}

impl TruncationStats {
    /// `2 delta |E|^(1/p)`, bound on `||u_xx^d - u_xx||_p`.
    pub fn lp_bound(&self, p: f64) -> f64 {
        2.0 * self.delta * self.measure.powf(1.0 / p)
    }

    /// `2 delta |E|`, bound on `|zeta|`.
    pub fn zeta_bound(&self) -> f64 {
        2.0 * self.delta * self.measure
    }

    /// `8 pi delta |E|`, bound on `|theta|`.
    pub fn theta_bound(&self) -> f64 {
        8.0 * PI * self.delta * self.measure
    }

    /// `delta (1 - |E| / 2pi)`, lower bound on `u_xx^d + a`.
    pub fn floor(&self) -> f64 {
        self.delta * (1.0 - self.measure / (2.0 * PI))
    }
}

/// Outcome of checking a truncation against its a-priori bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncationCheck {
    /// `(p, ||u_xx^d - u_xx||_p, bound)` for `p = 1, 2, 3`.
    pub lp: Vec<(f64, f64, f64)>,
    pub zeta: (f64, f64),
    pub theta: (f64, f64),
    /// `(min(u_xx^d + a), floor)`.
    pub floor: (f64, f64),
}

impl TruncationCheck {
    pub fn all_hold(&self) -> bool {
        self.lp.iter().all(|(_, v, b)| v <= b)
            && self.zeta.0.abs() <= self.zeta.1
            && self.theta.0.abs() <= self.theta.1
            && self.floor.0 >= self.floor.1
    }
}

pub fn truncate_second_derivative(
    u: &SpectralField,
    p: &BarrierParams,
    delta: f64,
) -> Result<(SpectralField, TruncationStats)> {
    let a = p.a();
    if !(delta > 0.0 && delta < a) {
        return Err(Error::InvalidParameter(format!(
            "truncation level must lie in (0, a) = (0, {a}), got {delta}"
        )));
    }
    let grid = u.grid();
    let uxx = second_derivative_samples(u);
    let active: Vec<bool> = uxx.iter().map(|v| v + a < delta).collect();
    let active_nodes = active.iter().filter(|&&b| b).count();
    if active_nodes == 0 {
        return Ok((
            u.clone(),
            TruncationStats {
                delta,
                active_nodes: 0,
                measure: 0.0,
                mean_shift: 0.0,
                zeta: 0.0,
                theta: 0.0,
            },
        ));
    }

    // integral u_xx = 0, so the mean of hat_xx is the mean of the lift alone.
    let lift_sum: f64 = uxx
        .iter()
        .zip(&active)
        .filter(|(_, &on)| on)
        .map(|(v, _)| delta - a - v)
        .sum();
    let mean_shift = lift_sum / grid.n() as f64;
    let truncated: Vec<f64> = uxx
        .iter()
        .zip(&active)
        .map(|(&v, &on)| if on { delta - a } else { v } - mean_shift)
        .collect();
    let uxx_delta = make_field(grid, truncated)?;

    let ux = crate::spectral::derivative(u, 1)?;
    let ux_delta = antiderivative_zero_mean(&uxx_delta);
    let u_delta = second_antiderivative_zero_mean(&uxx_delta);
    // Node 0 is x = -pi.
    let zeta = ux.samples()[0] - ux_delta.samples()[0];
    let theta = u.samples()[0] - u_delta.samples()[0];

    Ok((
        u_delta,
        TruncationStats {
            delta,
            active_nodes,
            measure: active_nodes as f64 * grid.dx(),
            mean_shift,
            zeta,
            theta,
        },
    ))
}

/// Evaluate every a-priori bound for a truncation of `u`.
pub fn check_truncation(
    u: &SpectralField,
    truncated: &SpectralField,
    stats: &TruncationStats,
    p: &BarrierParams,
) -> TruncationCheck {
    let grid = u.grid();
    let uxx = second_derivative_samples(u);
    let uxx_d = second_derivative_samples(truncated);
    let diff: Vec<f64> = uxx_d.iter().zip(&uxx).map(|(a, b)| a - b).collect();
    let lp = [1.0, 2.0, 3.0]
        .iter()
        .map(|&q| (q, norm_lp_samples(grid, &diff, q), stats.lp_bound(q)))
        .collect();
    let min_shifted = uxx_d.iter().fold(f64::INFINITY, |m, v| m.min(v + p.a()));
    TruncationCheck {
        lp,
        zeta: (stats.zeta, stats.zeta_bound()),
        theta: (stats.theta, stats.theta_bound()),
        floor: (min_shifted, stats.floor()),
    }
}
