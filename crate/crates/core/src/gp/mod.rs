//! Gaussian-process (Kriging) surrogate with constant trend.

mod fit;
mod kernel;
mod model_file;
mod posterior;
mod update;

pub use fit::{fit, profiled_nll, select_kernel_loo, FitConfig, Hyperparameters};
pub use kernel::{KernelFamily, KernelSpec};
pub use model_file::{read_model, write_model};
pub use posterior::{
    Design, Jitter, KrigingPosterior, Prediction, PreparedPoints, Trend, DEGENERATE_SITE,
    JITTER_CAP, JITTER_START,
};
pub(crate) use posterior::cholesky_with_jitter;
pub use update::{AppliedUpdate, HypotheticalUpdate};
