//! Grid simulation: loads a JSON grid file, runs it, and writes the CSV and
//! JSON reports.

use std::path::Path;

use anyhow::{Context, Result};
use pvcompare::{
    run_grid, GridReport, GridRow, MethodId, Metric, Quantity, Scenario, SimulationSpec,
};
use serde::{Deserialize, Serialize};

/// One grid file entry; `seed` falls back to the run's master seed and
/// `alpha` to 0.05.
#[derive(Debug, Clone, Deserialize)]
pub struct GridEntry {
    pub scenario: Scenario,
    pub n: u64,
    #[serde(alias = "N")]
    pub replications: u64,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    pub methods: Vec<MethodId>,
    pub metric: Metric,
    #[serde(default)]
    pub seed: Option<u64>,
}

fn default_alpha() -> f64 {
    0.05
}

/// The simulate command's report: the master seed plus the grid results.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimReport {
    pub master_seed: u64,
    #[serde(flatten)]
    pub report: GridReport,
}

/// Loads a grid file into runnable specs.
pub fn load_grid(
    path: &Path,
    master_seed: u64,
    replications_override: Option<u64>,
) -> Result<Vec<SimulationSpec>> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot open grid file {}", path.display()))?;
    let entries: Vec<GridEntry> = serde_json::from_str(&text)
        .with_context(|| format!("{}: malformed grid file", path.display()))?;
    Ok(entries
        .into_iter()
        .map(|e| SimulationSpec {
            scenario: e.scenario,
            n: e.n,
            replications: replications_override.unwrap_or(e.replications),
            alpha: e.alpha,
            methods: e.methods,
            metric: e.metric,
            seed: e.seed.unwrap_or(master_seed),
        })
        .collect())
}

/// Runs the grid and assembles the report.
pub fn simulate(specs: &[SimulationSpec], master_seed: u64) -> SimReport {
    SimReport {
        master_seed,
        report: run_grid(specs),
    }
}

fn metric_name(m: Metric) -> &'static str {
    match m {
        Metric::CoverageWidth => "coverage-width",
        Metric::Size => "size",
        Metric::Power => "power",
        Metric::GlobalSize => "global-size",
        Metric::GlobalPower => "global-power",
    }
}

const CSV_HEADER: [&str; 17] = [
    "kind",
    "p_a",
    "p_b",
    "n_a",
    "n_b",
    "pi",
    "o_plus",
    "o_minus",
    "n",
    "replications",
    "alpha",
    "seed",
    "method",
    "metric",
    "value",
    "mc_se",
    "error",
];

fn base_record(kind: &str, row: &GridRow) -> Vec<String> {
    let s = &row.scenario;
    vec![
        kind.to_string(),
        s.p_a.to_string(),
        s.p_b.to_string(),
        s.n_a.to_string(),
        s.n_b.to_string(),
        s.pi.to_string(),
        s.o_plus.to_string(),
        s.o_minus.to_string(),
        row.n.to_string(),
        row.replications.to_string(),
        row.alpha.to_string(),
        row.seed.to_string(),
    ]
}

/// Renders the report as CSV in long format: one row per reported quantity
/// of each (spec, method) pair, plus minimum/maximum/average footer rows per
/// method, paper-table style.
pub fn render_csv(report: &SimReport) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER).unwrap();
    for row in &report.report.rows {
        let method = row.method.map_or(String::new(), |m| m.name().to_string());
        let mut quantities: Vec<(&str, f64, Option<f64>)> = Vec::new();
        if let Some(c) = row.coverage {
            quantities.push((Quantity::Coverage.name(), c, row.mc_se));
        }
        if let Some(v) = row.avg_width {
            quantities.push((Quantity::AvgWidth.name(), v, None));
        }
        if let Some(v) = row.median_width {
            quantities.push((Quantity::MedianWidth.name(), v, None));
        }
        if let Some(v) = row.rejection {
            let q = row.metric.rejection_quantity().expect("rejection metric");
            quantities.push((q.name(), v, row.mc_se));
        }
        if quantities.is_empty() {
            // a spec-level error row
            let mut record = base_record("row", row);
            record.push(method.clone());
            record.push(metric_name(row.metric).to_string());
            record.push(String::new());
            record.push(String::new());
            record.push(row.error.clone().unwrap_or_default());
            w.write_record(record).unwrap();
            continue;
        }
        for (name, value, mc_se) in quantities {
            let mut record = base_record("row", row);
            record.push(method.clone());
            record.push(name.to_string());
            record.push(value.to_string());
            record.push(mc_se.map_or(String::new(), |s| s.to_string()));
            record.push(row.error.clone().unwrap_or_default());
            w.write_record(record).unwrap();
        }
    }

    for (kind, pick) in [("minimum", 0usize), ("maximum", 1), ("average", 2)] {
        for s in &report.report.summary {
            let mut record = vec![kind.to_string()];
            record.extend(std::iter::repeat_n(String::new(), 11));
            record.push(s.method.name().to_string());
            record.push(s.quantity.name().to_string());
            record.push([s.minimum, s.maximum, s.average][pick].to_string());
            record.push(String::new());
            record.push(String::new());
            w.write_record(record).unwrap();
        }
    }
    String::from_utf8(w.into_inner().unwrap()).unwrap()
}

/// Plain-text summary of a simulation report.
pub fn render_text(report: &SimReport) -> String {
    use std::fmt::Write;
    let mut out = String::new();
    writeln!(out, "master seed: {}", report.master_seed).unwrap();
    for row in &report.report.rows {
        let s = &row.scenario;
        let head = format!(
            "spec {} [{} n={} N={} seed={}] scenario (P_A={}, P_B={}, N_A={}, N_B={}, pi={}, O+={}, O-={})",
            row.spec_index,
            metric_name(row.metric),
            row.n,
            row.replications,
            row.seed,
            s.p_a, s.p_b, s.n_a, s.n_b, s.pi, s.o_plus, s.o_minus
        );
        match &row.method {
            Some(m) => {
                let mut parts = Vec::new();
                if let Some(c) = row.coverage {
                    parts.push(format!("C = {c:.4}"));
                }
                if let Some(w_) = row.avg_width {
                    parts.push(format!("W = {w_:.4}"));
                }
                if let Some(w_) = row.median_width {
                    parts.push(format!("W_median = {w_:.4}"));
                }
                if let Some(rej) = row.rejection {
                    parts.push(format!("rate = {rej:.4}"));
                }
                if let Some(se) = row.mc_se {
                    parts.push(format!("mc_se = {se:.4}"));
                }
                if let Some(e) = &row.error {
                    parts.push(format!("error: {e}"));
                }
                writeln!(out, "{head}  {:<6} {}", m.name(), parts.join("  ")).unwrap();
            }
            None => {
                let e = row.error.as_deref().unwrap_or("");
                writeln!(out, "{head}  error: {e}").unwrap();
            }
        }
    }
    out
}
