//! Seeded Monte Carlo engine for the coverage / size / power studies:
//! multinomial table generation, the zero-cell substitution protocol, and
//! the empirical metrics per method over scenario grids.
//!
//! Replication `h` of a run draws from a stream derived from `(seed, h)`, so
//! a fixed seed yields identical results for any worker count; work is
//! parallelized over fixed-size batches merged in batch order.
//!
//! Protocol notes. Classic and pooled statistics evaluate the drawn table
//! after every zero cell is replaced by 0.05; adjusted statistics evaluate
//! the raw table with 0.5 added to every cell (adding 0.5 already removes
//! the zeros the substitution exists for). All methods of a run share the
//! same tables (common random numbers).

mod rng;

pub use rng::{binomial_inverse_cdf, multinomial_draw, SplitMix64};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::design::{scenario_to_cells, Scenario};
use crate::error::{Error, Result};
use crate::inference::{ci_for_method, global_test, individual_test, MethodId, Target, Variant};
use crate::model::{CellProbabilities, PairedCounts};
use crate::numerics::chisq_critical;

/// What a simulation run estimates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Metric {
    /// Empirical coverage and width of the confidence intervals.
    CoverageWidth,
    /// Rejection rate of the individual tests under the null.
    Size,
    /// Rejection rate of the individual tests under an alternative.
    Power,
    /// Rejection rate of the global tests under the null.
    GlobalSize,
    /// Rejection rate of the global tests under an alternative.
    GlobalPower,
}

impl Metric {
    pub fn is_global(&self) -> bool {
        matches!(self, Metric::GlobalSize | Metric::GlobalPower)
    }
}

/// One simulation run: a scenario, a table size, a replication count, and
/// the methods to evaluate on the shared tables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationSpec {
    pub scenario: Scenario,
    /// Sample size of each generated table.
    pub n: u64,
    /// Number of replications.
    #[serde(alias = "N")]
    pub replications: u64,
    /// Nominal error level.
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    pub methods: Vec<MethodId>,
    pub metric: Metric,
    pub seed: u64,
}

fn default_alpha() -> f64 {
    0.05
}

/// Per-method results of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub method: MethodId,
    /// Empirical coverage `C` in percent (coverage metric only).
    pub coverage: Option<f64>,
    /// Average CI width (coverage metric only).
    pub avg_width: Option<f64>,
    /// Median CI width (coverage metric only).
    pub median_width: Option<f64>,
    /// Empirical size or power in percent (test metrics only).
    pub rejection: Option<f64>,
    /// Monte Carlo standard error of the percentage.
    pub mc_se: f64,
    /// Raw indicator count behind the percentage.
    pub hits: u64,
    /// Replications on which the method could not be evaluated.
    pub failures: u64,
}

/// Draws one table from `M{n; p1..p8}` without any zero-cell remedy.
pub fn draw_raw_table(cells: &CellProbabilities, n: u64, rng: &mut SplitMix64) -> PairedCounts {
    let draw = multinomial_draw(n, &cells.probabilities(), rng);
    PairedCounts::new(draw).expect("multinomial draw produced invalid cells")
}

/// Draws one table and applies the 0.05 zero-cell substitution.
pub fn draw_table(cells: &CellProbabilities, n: u64, rng: &mut SplitMix64) -> PairedCounts {
    draw_raw_table(cells, n, rng).zero_substitute()
}

const BATCH: u64 = 4096;

#[derive(Debug, Clone, Default)]
struct Accumulator {
    hits: u64,
    width_sum: f64,
    widths: Vec<f64>,
    failures: u64,
}

impl Accumulator {
    fn merge(&mut self, other: Accumulator) {
        self.hits += other.hits;
        self.width_sum += other.width_sum;
        self.widths.extend(other.widths);
        self.failures += other.failures;
    }
}

fn validate_spec(spec: &SimulationSpec) -> Result<()> {
    if spec.replications == 0 {
        return Err(Error::Domain("replications must be at least 1".into()));
    }
    if spec.n == 0 {
        return Err(Error::Domain("table size n must be at least 1".into()));
    }
    if !(spec.alpha > 0.0 && spec.alpha < 1.0) {
        return Err(Error::Domain(format!(
            "alpha must lie in (0, 1), got {}",
            spec.alpha
        )));
    }
    if spec.methods.is_empty() {
        return Err(Error::Domain("at least one method is required".into()));
    }
    if spec.metric == Metric::CoverageWidth {
        for m in &spec.methods {
            if m.variant == Variant::Pooled {
                return Err(Error::Domain(format!(
                    "method {m} does not define a confidence interval"
                )));
            }
        }
    }
    Ok(())
}

/// The base table a method evaluates under the simulation protocol.
fn working_table<'a>(
    method: MethodId,
    raw: &'a PairedCounts,
    substituted: &'a PairedCounts,
) -> &'a PairedCounts {
    match method.variant {
        Variant::Adjusted => raw,
        _ => substituted,
    }
}

fn run_batches<F>(spec: &SimulationSpec, cells: &CellProbabilities, eval: F) -> Vec<Accumulator>
where
    F: Fn(&PairedCounts, &PairedCounts, &mut [Accumulator]) + Sync,
{
    let n_methods = spec.methods.len();
    let n_batches = spec.replications.div_ceil(BATCH);
    let per_batch: Vec<Vec<Accumulator>> = (0..n_batches)
        .into_par_iter()
        .map(|batch| {
            let start = batch * BATCH;
            let end = (start + BATCH).min(spec.replications);
            let mut accums = vec![Accumulator::default(); n_methods];
            for h in start..end {
                let mut rng = SplitMix64::for_replication(spec.seed, h);
                let raw = draw_raw_table(cells, spec.n, &mut rng);
                let substituted = raw.zero_substitute();
                eval(&raw, &substituted, &mut accums);
            }
            accums
        })
        .collect();

    let mut totals = vec![Accumulator::default(); n_methods];
    for batch in per_batch {
        for (total, part) in totals.iter_mut().zip(batch) {
            total.merge(part);
        }
    }
    totals
}

fn percentage_row(
    method: MethodId,
    hits: u64,
    replications: u64,
    failures: u64,
    coverage_widths: Option<(f64, Vec<f64>)>,
) -> MetricRow {
    let n = replications as f64;
    let q = hits as f64 / n;
    let mc_se = 100.0 * (q * (1.0 - q) / n).sqrt();
    match coverage_widths {
        Some((width_sum, mut widths)) => {
            widths.sort_unstable_by(f64::total_cmp);
            let median = if widths.is_empty() {
                None
            } else if widths.len() % 2 == 1 {
                Some(widths[widths.len() / 2])
            } else {
                Some((widths[widths.len() / 2 - 1] + widths[widths.len() / 2]) / 2.0)
            };
            MetricRow {
                method,
                coverage: Some(100.0 * q),
                avg_width: Some(width_sum / n),
                median_width: median,
                rejection: None,
                mc_se,
                hits,
                failures,
            }
        }
        None => MetricRow {
            method,
            coverage: None,
            avg_width: None,
            median_width: None,
            rejection: Some(100.0 * q),
            mc_se,
            hits,
            failures,
        },
    }
}

/// Empirical coverage and width of the CI methods over `N` shared tables.
///
/// Each method's indicator compares its interval against its own family's
/// true parameter: `d = P_A - P_B` for difference methods, `R = P_A / P_B`
/// for ratio methods.
pub fn run_coverage(spec: &SimulationSpec) -> Result<Vec<MetricRow>> {
    validate_spec(spec)?;
    if spec.metric != Metric::CoverageWidth {
        return Err(Error::Domain(format!(
            "run_coverage requires the coverage-width metric, got {:?}",
            spec.metric
        )));
    }
    let cells = scenario_to_cells(&spec.scenario)?;
    let d_true = spec.scenario.p_a - spec.scenario.p_b;
    let r_true = spec.scenario.p_a / spec.scenario.p_b;
    let methods = spec.methods.clone();
    let alpha = spec.alpha;

    let totals = run_batches(spec, &cells, |raw, substituted, accums| {
        for (m, acc) in methods.iter().zip(accums.iter_mut()) {
            let base = working_table(*m, raw, substituted);
            match ci_for_method(base, *m, alpha, Target::Positive) {
                Ok(ci) => {
                    let truth = match m.family {
                        crate::inference::Family::Difference => d_true,
                        _ => r_true,
                    };
                    if ci.contains(truth) {
                        acc.hits += 1;
                    }
                    let w = ci.width();
                    acc.width_sum += w;
                    acc.widths.push(w);
                }
                Err(_) => acc.failures += 1,
            }
        }
    });

    Ok(spec
        .methods
        .iter()
        .zip(totals)
        .map(|(m, acc)| {
            percentage_row(
                *m,
                acc.hits,
                spec.replications,
                acc.failures,
                Some((acc.width_sum, acc.widths)),
            )
        })
        .collect())
}

/// Empirical size or power of the individual (df = 1) or global (df = 2)
/// tests over `N` shared tables, at the nominal level `alpha`.
pub fn run_size_power(spec: &SimulationSpec) -> Result<Vec<MetricRow>> {
    validate_spec(spec)?;
    if spec.metric == Metric::CoverageWidth {
        return Err(Error::Domain(
            "run_size_power requires a size or power metric".into(),
        ));
    }
    let cells = scenario_to_cells(&spec.scenario)?;
    let global = spec.metric.is_global();
    let critical = chisq_critical(spec.alpha, if global { 2 } else { 1 })?;
    let methods = spec.methods.clone();

    let totals = run_batches(spec, &cells, |raw, substituted, accums| {
        for (m, acc) in methods.iter().zip(accums.iter_mut()) {
            let base = working_table(*m, raw, substituted);
            let statistic = if global {
                global_test(base, *m).map(|t| t.statistic)
            } else {
                individual_test(base, *m, Target::Positive).map(|t| t.statistic)
            };
            match statistic {
                Ok(s) => {
                    if s > critical {
                        acc.hits += 1;
                    }
                }
                Err(_) => acc.failures += 1,
            }
        }
    });

    Ok(spec
        .methods
        .iter()
        .zip(totals)
        .map(|(m, acc)| percentage_row(*m, acc.hits, spec.replications, acc.failures, None))
        .collect())
}

/// Runs one spec, dispatching on its metric.
pub fn run(spec: &SimulationSpec) -> Result<Vec<MetricRow>> {
    match spec.metric {
        Metric::CoverageWidth => run_coverage(spec),
        _ => run_size_power(spec),
    }
}

/// One row of a grid report: a (spec, method) pair with its results, or a
/// spec-level error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridRow {
    pub spec_index: usize,
    pub scenario: Scenario,
    pub n: u64,
    pub replications: u64,
    pub alpha: f64,
    pub metric: Metric,
    pub seed: u64,
    pub method: Option<MethodId>,
    pub coverage: Option<f64>,
    pub avg_width: Option<f64>,
    pub median_width: Option<f64>,
    pub rejection: Option<f64>,
    pub mc_se: Option<f64>,
    pub error: Option<String>,
}

/// A reported quantity: the per-method value a report row carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Quantity {
    Coverage,
    AvgWidth,
    MedianWidth,
    Size,
    Power,
    GlobalSize,
    GlobalPower,
}

impl Quantity {
    pub fn name(&self) -> &'static str {
        match self {
            Quantity::Coverage => "coverage",
            Quantity::AvgWidth => "avg-width",
            Quantity::MedianWidth => "median-width",
            Quantity::Size => "size",
            Quantity::Power => "power",
            Quantity::GlobalSize => "global-size",
            Quantity::GlobalPower => "global-power",
        }
    }
}

impl Metric {
    /// The rejection-rate quantity a test metric reports.
    pub fn rejection_quantity(&self) -> Option<Quantity> {
        match self {
            Metric::CoverageWidth => None,
            Metric::Size => Some(Quantity::Size),
            Metric::Power => Some(Quantity::Power),
            Metric::GlobalSize => Some(Quantity::GlobalSize),
            Metric::GlobalPower => Some(Quantity::GlobalPower),
        }
    }
}

/// Per-method Minimum / Maximum / Average footer, as in the grid tables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub method: MethodId,
    pub quantity: Quantity,
    pub minimum: f64,
    pub maximum: f64,
    pub average: f64,
}

/// A full grid report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridReport {
    pub rows: Vec<GridRow>,
    pub summary: Vec<SummaryRow>,
}

/// Runs every spec of a grid, collecting per-spec errors instead of
/// aborting, and appends per-method Minimum/Maximum/Average footers.
pub fn run_grid(specs: &[SimulationSpec]) -> GridReport {
    let mut rows = Vec::new();
    for (index, spec) in specs.iter().enumerate() {
        let base = |method: Option<MethodId>| GridRow {
            spec_index: index,
            scenario: spec.scenario,
            n: spec.n,
            replications: spec.replications,
            alpha: spec.alpha,
            metric: spec.metric,
            seed: spec.seed,
            method,
            coverage: None,
            avg_width: None,
            median_width: None,
            rejection: None,
            mc_se: None,
            error: None,
        };
        match run(spec) {
            Ok(results) => {
                for r in results {
                    let mut row = base(Some(r.method));
                    row.coverage = r.coverage;
                    row.avg_width = r.avg_width;
                    row.median_width = r.median_width;
                    row.rejection = r.rejection;
                    row.mc_se = Some(r.mc_se);
                    if r.failures > 0 {
                        row.error = Some(format!("{} replications failed", r.failures));
                    }
                    rows.push(row);
                }
            }
            Err(e) => {
                let mut row = base(None);
                row.error = Some(e.to_string());
                rows.push(row);
            }
        }
    }

    let mut summary = Vec::new();
    let mut keys: Vec<(MethodId, Quantity)> = Vec::new();
    for row in &rows {
        if let Some(m) = row.method {
            let mut push = |q: Quantity| {
                if !keys.contains(&(m, q)) {
                    keys.push((m, q));
                }
            };
            if row.coverage.is_some() {
                push(Quantity::Coverage);
            }
            if row.avg_width.is_some() {
                push(Quantity::AvgWidth);
            }
            if row.rejection.is_some() {
                if let Some(q) = row.metric.rejection_quantity() {
                    push(q);
                }
            }
        }
    }
    for (m, quantity) in keys {
        let values: Vec<f64> = rows
            .iter()
            .filter(|r| r.method == Some(m))
            .filter_map(|r| match quantity {
                Quantity::Coverage => r.coverage,
                Quantity::AvgWidth => r.avg_width,
                Quantity::MedianWidth => r.median_width,
                _ if r.metric.rejection_quantity() == Some(quantity) => r.rejection,
                _ => None,
            })
            .collect();
        if values.is_empty() {
            continue;
        }
        let minimum = values.iter().copied().fold(f64::INFINITY, f64::min);
        let maximum = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let average = values.iter().sum::<f64>() / values.len() as f64;
        summary.push(SummaryRow {
            method: m,
            quantity,
            minimum,
            maximum,
            average,
        });
    }

    GridReport { rows, summary }
}
