//! Stochastic-geometry expressions for success probability and delay.

pub mod cone;
pub mod intensity;
pub mod laplace;
pub mod objective;
pub mod smallbeta;
pub mod stp;

pub use intensity::{
    intensity_density, intensity_measure, joint_pathloss_pdf, nth_pathloss_pdf, IntensityMeasure,
};
pub use laplace::{interference_coeffs, omega_jt, omega_pt, ToeplitzLogCoeffs};
pub use objective::{objective_delay, objective_stp, StrategyValues};
pub use smallbeta::{interference_factor, stp_jt_smallbeta, stp_pt_smallbeta};
pub use stp::{
    delay_jt, delay_jt_at, delay_pt, delay_pt_at, delay_ut, stp_jt, stp_jt_at, stp_pt, stp_pt_at,
    stp_pt_coupled, stp_pt_coupled_at,
    stream_stp, DelayValue, DEFAULT_DELAY_CAP, DIVERGENCE_MASS,
};
