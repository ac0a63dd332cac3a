//! Closed-form ARL and EDD approximations and threshold calibration.

mod arl;
mod edd;

pub use arl::{
    arl_fixed, arl_timevarying, arl_timevarying_as_printed, calibrate_b, calibrate_b_timevarying,
    log_arl_fixed, log_arl_minimizer, ArlQuery,
};
pub use edd::{
    edd_fixed, edd_first_order, edd_ratio, edd_timevarying, edd_timevarying_without_minus_one,
    walk_corrections, EddQuery, WalkCorrections, DEFAULT_CORRECTION_REPLICATES,
    DEFAULT_CORRECTION_SEED,
};
