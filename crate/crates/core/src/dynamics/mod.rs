//! Vanishing / spreading / transition classification and its certificates.

mod certificates;
mod classify;
mod estimators;

pub use certificates::{spreading_certificate, vanishing_constant, vanishing_majorant, Majorant};
pub use classify::{
    classify, Budget, Certificate, CertificateKind, Classification, Classifier, Diagnostics,
    Outcome,
};
pub use estimators::{
    bound_monitor, estimate_extinction_time, estimate_speed, estimate_speed_over, sign_changes,
    sign_changes_with, transition_distance, SpeedEstimate, SIGN_NOISE,
};
