//! Robust Tucker factor models for tensor time series.

pub mod error;
pub mod estimator;
pub mod evaluation;
pub mod forecast;
pub mod io;
mod kernels;
pub mod linalg;
pub mod pipeline;
pub mod rank;
pub mod robust;
pub mod simulate;
pub mod tensor;
pub mod tuning;

pub use error::{Error, Result};
pub use estimator::{
    common_component, estimate_factors, estimate_loadings, initial_loadings, refine_loadings, EstimatorConfig,
    FactorSeries, LoadingSet, ModeLoading,
};
pub use linalg::{canonical_sign, sym_eig, varimax, EigenPairs};
pub use robust::{mode_second_moment, projected_second_moment, truncate, TruncationLevel};
pub use tensor::{kron, kron_all, Matrix, Tensor, TensorSeries};
pub use rank::{estimate_ranks, ratio_select, RankConfig, RankEstimate, RhoRule};
pub use tuning::{cv_tau, tau_grid, CvConfig, CvResult};
pub use simulate::{gen_tensor, gen_vector, OutlierConfig, SimDraw, TensorDgpConfig, VectorDgpConfig};
pub use evaluation::{common_error, loading_error, normality_diagnostic, McSummary, Window};
pub use forecast::{
    forecast_one, forecast_window, lagged_second_moment, loss_differences, rolling_errors, ForecastConfig, ForecastErrors,
    Standardization, TauChoice,
};
pub use pipeline::{fit, EstimationReport, FitConfig, KappaRule, RankChoice, TauRule};
