//! Certificates for computed trajectories: weak-form residuals, initial-data
//! and integrability reports, and the surface-height recovery.

mod admissibility;
mod height;
mod weak_form;

pub use admissibility::{
    admissibility_report, log_integrability_report, log_l1_sup, AdmissibilityReport, LogIntegrability, Verdict,
};
pub use height::{height_bracket, height_slope, period_offset, potential_bracket, surface_height, surface_height_at};
pub use weak_form::{
    empirical_orders, make_test_battery, weak_form_residual, weak_form_residual_with, ResidualEntry,
    ResidualReport, TestFunction,
};
