//! Reports on initial data and on the integrability of the logarithmic
//! barrier along a trajectory.

use crate::energy::{barrier_slope, min_shifted, second_derivative_samples, BarrierParams};
use crate::spectral::{dot_quadrature, make_field, project_zero_mean, SpectralField};
use crate::stepper::Trajectory;
use crate::variational::pairing_h;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    SufficientConditionMet,
    SufficientConditionFailed,
    Inadmissible,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdmissibilityReport {
    /// `integral u0_xx Phi_a'(u0_xx) dx`; `+inf` for inadmissible data.
    pub r_value: f64,
    /// `||[-H(u0_x) - Phi_a'(u0_xx)]_xx||_2`; `+inf` for inadmissible data.
    pub z0_norm: f64,
    pub min_slope: f64,
    pub verdict: Verdict,
}

pub fn admissibility_report(u0: &SpectralField, p: &BarrierParams) -> AdmissibilityReport {
    let grid = u0.grid();
    let uxx = second_derivative_samples(u0);
    let min_slope = min_shifted(&uxx, p);
    if min_slope <= 0.0 {
        return AdmissibilityReport {
            r_value: f64::INFINITY,
            z0_norm: f64::INFINITY,
            min_slope,
            verdict: Verdict::Inadmissible,
        };
    }
    let slope: Vec<f64> = uxx.iter().map(|v| barrier_slope(v + p.a())).collect();
    let r_value = dot_quadrature(grid, &uxx, &slope);

    // H(u_x) = H applied to the first derivative; constants vanish under d^2/dx^2.
    let ux = grid.differentiate(u0.samples(), 1);
    let h_ux = grid.hilbert_samples(&ux);
    let bracket: Vec<f64> = h_ux.iter().zip(&slope).map(|(h, s)| -h - s).collect();
    let bracket = make_field(grid, project_zero_mean(&bracket)).expect("mean removed");
    let z0 = grid.differentiate(bracket.samples(), 2);
    let z0_norm = crate::spectral::norm_lp_samples(grid, &z0, 2.0);

    let verdict = if r_value <= 1e-10 {
        Verdict::SufficientConditionMet
    } else {
        Verdict::SufficientConditionFailed
    };
    AdmissibilityReport {
        r_value,
        z0_norm,
        min_slope,
        verdict,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogIntegrability {
    pub step: usize,
    /// `integral |log(u_xx + a)| dx`.
    pub log_l1: f64,
    /// `integral u_xx Phi_a'(u_xx) dx`.
    pub r_value: f64,
    /// `<-u_t, u> + <H u, u>` with the backward difference quotient; `None`
    /// for the initial state.
    pub bound: Option<f64>,
}

impl LogIntegrability {
    pub fn holds(&self) -> bool {
        self.log_l1.is_finite()
            && self.r_value.is_finite()
            && self.bound.is_none_or(|b| self.r_value <= b + 1e-8)
    }
}

/// One entry per state of the trajectory.
pub fn log_integrability_report(traj: &Trajectory, p: &BarrierParams) -> Vec<LogIntegrability> {
    let a = p.a();
    traj.states
        .iter()
        .enumerate()
        .map(|(n, u)| {
            let grid = u.grid();
            let uxx = second_derivative_samples(u);
            let logs: Vec<f64> = uxx.iter().map(|v| (v + a).ln().abs()).collect();
            let slope: Vec<f64> = uxx.iter().map(|v| barrier_slope(v + a)).collect();
            let bound = (n > 0).then(|| {
                let ut = u.lincomb(1.0 / traj.tau, -1.0 / traj.tau, &traj.states[n - 1]).expect("one grid");
                let pairing_t = dot_quadrature(grid, ut.samples(), u.samples());
                -pairing_t + pairing_h(u, u).expect("one grid")
            });
            LogIntegrability {
                step: n,
                log_l1: grid.quadrature(&logs),
                r_value: dot_quadrature(grid, &uxx, &slope),
                bound,
            }
        })
        .collect()
}

/// Largest `log_l1` over the report.
pub fn log_l1_sup(report: &[LogIntegrability]) -> f64 {
    report.iter().map(|r| r.log_l1).fold(0.0, f64::max)
}
