//! Two-sample hypothesis testing with the unbiased MMD statistic when data
//! are arbitrarily missing.
//!
//! The statistic cannot be computed on masked data, but with the Laplacian
//! kernel it can be bounded above and below over every possible imputation
//! of the missing cells. Those bounds yield p-value upper bounds — via the
//! permutation test or, in high dimension, a normality approximation — that
//! control the Type I error regardless of the missingness mechanism.
//!
//! The crate also ships the standard comparison pipelines (case deletion,
//! mean imputation, hot deck imputation), the missingness generators used by
//! the simulation harness, and a brute-force verification oracle that checks
//! every bound against exhaustive and randomized imputations.
//!
//! All numerics are generic over the scalar type via [`Scalar`]
//! (`f32`/`f64`); the `*64` aliases at the crate root fix `f64`, which every
//! documented tolerance assumes.

pub mod baselines;
pub mod bench;
pub mod bounds;
pub mod data;
pub mod error;
pub mod float;
pub mod inference;
pub mod kernel;
pub mod mmd;
pub mod oracle;
pub mod simulation;

pub use data::{load_csv, load_csv_opts, partition_rows, MaskedMatrix, RowPartition, TwoSampleData};
pub use error::{Error, Result};
pub use float::Scalar;
pub use kernel::{incomplete_laplacian, laplacian, median_heuristic, KernelParams};
pub use mmd::{decompose, mmd_u, naive_bounds, naive_bounds_auto, BoundInterval, DecompTerms};

pub use bounds::{
    build_max_distance_table, mmd_bounds, mmd_bounds_multivariate, mmd_bounds_univariate, t_eval,
    t_bounds_grid, t_bounds_max_distance, t_bounds_univariate, MaxDistanceTable, TFunctionSpec,
};
pub use inference::{
    make_plan, normal_cdf, normality_p_bound, permutation_p_bound, permutation_p_exact,
    variance_bound, PermutationPlan, StudentizedBound, TestMethod, TestOutcome,
};

pub use baselines::{case_delete, hot_deck_impute, mean_impute, run_baseline, BaselineMethod};
pub use oracle::{grid_extreme_search, random_imputation_sweep, SweepReport};
pub use simulation::{
    apply_mnar_multivariate, apply_mnar_univariate, apply_mnist_region, gen_gaussian,
    run_scenario, MethodId, MissingnessSpec, RejectionTable, ScenarioConfig,
};

/// `f64` aliases for the main containers.
pub type MaskedMatrix64 = MaskedMatrix<f64>;
pub type TwoSampleData64 = TwoSampleData<f64>;
pub type BoundInterval64 = BoundInterval<f64>;
pub type KernelParams64 = KernelParams<f64>;

/// `f32` aliases, for callers trading accuracy for memory.
pub type MaskedMatrix32 = MaskedMatrix<f32>;
pub type TwoSampleData32 = TwoSampleData<f32>;
pub type BoundInterval32 = BoundInterval<f32>;
pub type KernelParams32 = KernelParams<f32>;
