//! Comparison of the positive and negative predictive values of two binary
//! diagnostic tests applied to the same subjects.
//!
//! The crate covers the full inference toolkit for the paired design —
//! confidence intervals, individual and global homogeneity tests,
//! non-inferiority tests and sample sizes, in classic, adjusted (+0.5) and
//! pooled variants on both the difference and ratio scales — plus a seeded
//! Monte Carlo engine that estimates empirical coverage, width, size and
//! power over scenario grids.
//!
//! ```
//! use pvcompare::{ci_difference, CiVariant, PairedCounts, Target};
//!
//! let counts = PairedCounts::new([473.0, 81.0, 29.0, 25.0, 22.0, 44.0, 46.0, 151.0])?;
//! let est = counts.estimates()?;
//! assert!((est.ppv_a - 0.8935).abs() < 5e-5);
//!
//! let ci = ci_difference(&counts, CiVariant::Adjusted, 0.05, Target::Positive)?;
//! assert!(ci.contains(0.0));
//! # Ok::<(), pvcompare::Error>(())
//! ```

pub mod bennett;
pub mod design;
pub mod error;
pub mod inference;
pub mod model;
pub mod numerics;
pub mod simulation;
pub mod variance;

pub use design::{
    sample_size_difference, sample_size_ratio, scenario_to_cells, SampleSize, SampleSizeInputs,
    Scenario,
};
pub use error::{Error, MarginKind, PredictiveValueKind, Result};
pub use inference::{
    ci_difference, ci_for_method, ci_ratio, confidence_region_contains, global_test,
    individual_test, noninferiority_test, CiVariant, Family, Interval, MethodId,
    NoninferiorityResult, RatioForm, Scale, Target, TestResult, TestTarget, Variant,
};
pub use model::{CellProbabilities, PairedCounts, PredictiveEstimates};
pub use simulation::{
    draw_table, run, run_coverage, run_grid, run_size_power, GridReport, GridRow, Metric,
    MetricRow, Quantity, SimulationSpec, SplitMix64, SummaryRow,
};
pub use variance::{
    delta_oracle, difference_covariance, pooled_difference_covariance, pooled_estimates,
    pooled_ratio_covariance, ratio_covariance, DifferenceCovariance, PooledEstimates,
    RatioCovariance,
};
