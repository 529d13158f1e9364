//! Semi-analytical evaluation of every model probability: the interference
//! Laplace transform and its derivatives, numerical inversion to CDF/PDF,
//! link reliability and harvested-power distributions for both SWIPT
//! schemes, and the adversary's detection statistics.

mod detection;
mod inversion;
mod laplace;
mod metrics;

pub use detection::{
    detection_error, fa_prob, md_prob, nearest_adversary_signal_pdf,
    nearest_adversary_signal_survival, DetectionModel,
};
pub use inversion::{
    interference_cdf, interference_pdf, interference_pdf_detailed, stable_tables,
    InterferenceDistribution, PdfPath, StableTables,
};
pub use laplace::{interference_laplace, laplace_nth_derivative, AnalyticsError, InterferenceFieldParams};
pub use metrics::{ph_prob_ps, ph_prob_ts, sinr_prob_ps, sinr_prob_ts};

use crate::config::{Scheme, Strategy};

/// Scheme-dispatching link reliability.
pub fn sinr_prob(
    strategy: &Strategy,
    cfg: &crate::config::NetworkConfig,
) -> Result<f64, AnalyticsError> {
    match strategy.scheme {
        Scheme::Ps => sinr_prob_ps(strategy, cfg),
        Scheme::Ts => sinr_prob_ts(strategy, cfg),
    }
}

/// Scheme-dispatching harvested-power probability.
pub fn ph_prob(
    strategy: &Strategy,
    cfg: &crate::config::NetworkConfig,
    spec: &crate::quad::QuadratureSpec,
) -> Result<f64, AnalyticsError> {
    match strategy.scheme {
        Scheme::Ps => ph_prob_ps(strategy, cfg, spec),
        Scheme::Ts => ph_prob_ts(strategy, cfg, spec),
    }
}
