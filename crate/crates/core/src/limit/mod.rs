//! Limiting objects: the Poisson cycle field (Y_ℓ), traces X_k, the random
//! function F = ∏(1 − z^ℓ)^{Y_ℓ} and its coefficients, the zero multiset Z_d,
//! chaos norms, the covariance of f = −log F, and the Gaussian-regime limit.

mod chaos;
mod eval;
mod field;
pub mod poisson;

pub use chaos::{
    cov_f, gaussian_limit, gaussian_log_field, gaussian_order_for, gaussian_tail_bound, phc_sobolev, sample_G,
    sobolev_mean, CovValue, GaussianChaos, SobolevReport, COV_MAX_TERMS, GAUSSIAN_TAIL_CONFIDENCE,
    GAUSSIAN_TAIL_TARGET,
};
pub use eval::{
    eval_F, eval_F_with, eval_L, eval_L_series, log_trace_series, FForm, FValue, LValue, DEFAULT_EVAL_BUDGET,
    MAX_SERIES_TERMS,
};
pub use field::{
    centred_trace, limit_traces, sample_Y, sample_Zd, secular_limit_coefficients, secular_limit_scaled, tau,
    FieldSampler, LimitCoefficients, PoissonCycleField, SecularLimitSeries, ZdMultiset, FIELD_MAX_LENGTH,
    LIMIT_SERIES_MAX_ORDER, TAIL_RADIUS_FACTOR,
};
