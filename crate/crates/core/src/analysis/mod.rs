//! Analytic interference-immunity layer.
//!
//! Everything here is closed-form or deterministic numerics: the Gaussian
//! tail function, the sampling statistics of the variance estimator, the
//! spread `sigma0` of the entropy statistic (by quadrature and by
//! linearization), the resulting BER curves and the orthogonal-signal
//! baseline they are compared against.

mod ber;
mod moments;
mod qfunc;
pub mod quadrature;
mod sigma0;

pub use ber::{
    analytic_curve, ebn0_db_at_pb, gap_at_pb, k_criterion, k_criterion_with, k_scan, optimal_n,
    pb_orthogonal, pb_vs_ebn0, pb_vs_ebn0_with, pb_vs_snr, pb_vs_snr_with, BerPoint, BerSource,
    Curve, Precision, PUBLISHED_GAP_CLAIM_DB,
};
pub use moments::{gaussian_central_moment, var_of_variance, var_of_variance_from_moment};
pub use qfunc::{q, q_inv};
pub use sigma0::{
    sigma0_approx, sigma0_approx_full, sigma0_compare, sigma0_exact, sigma0_exact_detailed,
    Sigma0Quadrature, Sigma0Result, POSITIVITY_FLOOR,
};
