//! Significance tests, conditional same-sign probabilities, curve fitting and
//! closed-form predictions.

mod antiherding;
mod conditional;
mod fit;
mod shuffle;

pub use antiherding::{generate_antiherding, AntiHerdingParams};
pub use conditional::{conditional_probabilities, ConditionalProbabilities, SameSignCount};
pub use fit::{
    average_ranks, eq14_prediction, fit_power_law, fit_power_law_points, kolmogorov_survival,
    ks_p_value, ks_uniform_distance, spearman, PowerLawFit, BINS_PER_DECADE, MIN_FIT_POINTS,
    POOR_FIT_R2,
};
pub use shuffle::{
    shuffle_test, shuffled_columns, ShuffleOptions, ShuffleScheme, ShuffleTestResult,
    MAX_REPLICATES, MIN_REPLICATES, TIE_TOLERANCE, WARN_REPLICATES,
};
