//! The analysis report: every estimate, interval and test for one table,
//! with text / JSON / CSV renderings. The text view prints at 4 decimal
//! places; the JSON view carries full doubles and re-renders to the exact
//! same text.

use pvcompare::inference::ci_for_method;
use pvcompare::{global_test, individual_test, Family, MethodId, PairedCounts, Target};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EstimatesBlock {
    pub ppv_a: f64,
    pub ppv_b: f64,
    pub npv_a: f64,
    pub npv_b: f64,
    pub d: f64,
    pub d_bar: f64,
    pub r: Option<f64>,
    pub r_bar: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CiRow {
    pub method: String,
    pub parameter: String,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TestRow {
    pub method: String,
    pub target: String,
    pub statistic: Option<f64>,
    pub df: u32,
    pub p_value: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub counts: [f64; 8],
    pub n: f64,
    pub alpha: f64,
    pub zero_substituted: bool,
    pub estimates: EstimatesBlock,
    pub intervals: Vec<CiRow>,
    pub individual_tests: Vec<TestRow>,
    pub global_tests: Vec<TestRow>,
}

fn ratio_hint(e: &pvcompare::Error) -> String {
    match e {
        pvcompare::Error::ZeroPredictiveValue(_) => format!("{e}; rerun with --zero-sub"),
        _ => e.to_string(),
    }
}

/// Runs the full analysis: estimates, the six CI methods on both targets,
/// the nine individual tests on both targets, and the nine global tests.
pub fn analyze(
    counts: &PairedCounts,
    alpha: f64,
    zero_substituted: bool,
) -> pvcompare::Result<AnalysisReport> {
    let est = counts.estimates()?;
    let estimates = EstimatesBlock {
        ppv_a: est.ppv_a,
        ppv_b: est.ppv_b,
        npv_a: est.npv_a,
        npv_b: est.npv_b,
        d: est.d(),
        d_bar: est.d_bar(),
        r: est.r().ok(),
        r_bar: est.r_bar().ok(),
    };

    let mut intervals = Vec::new();
    for m in MethodId::CI_METHODS {
        for target in [Target::Positive, Target::Negative] {
            let parameter = match (m.family, target) {
                (Family::Difference, Target::Positive) => "d",
                (Family::Difference, Target::Negative) => "dbar",
                (_, Target::Positive) => "R",
                (_, Target::Negative) => "Rbar",
            };
            let row = match ci_for_method(counts, m, alpha, target) {
                Ok(ci) => CiRow {
                    method: m.name().into(),
                    parameter: parameter.into(),
                    lower: Some(ci.lower),
                    upper: Some(ci.upper),
                    error: None,
                },
                Err(e) => CiRow {
                    method: m.name().into(),
                    parameter: parameter.into(),
                    lower: None,
                    upper: None,
                    error: Some(ratio_hint(&e)),
                },
            };
            intervals.push(row);
        }
    }

    let mut individual_tests = Vec::new();
    for m in MethodId::ALL {
        for target in [Target::Positive, Target::Negative] {
            let label = match target {
                Target::Positive => "positive",
                Target::Negative => "negative",
            };
            let row = match individual_test(counts, m, target) {
                Ok(t) => TestRow {
                    method: m.name().into(),
                    target: label.into(),
                    statistic: Some(t.statistic),
                    df: 1,
                    p_value: Some(t.p_value),
                    error: None,
                },
                Err(e) => TestRow {
                    method: m.name().into(),
                    target: label.into(),
                    statistic: None,
                    df: 1,
                    p_value: None,
                    error: Some(ratio_hint(&e)),
                },
            };
            individual_tests.push(row);
        }
    }

    let mut global_tests = Vec::new();
    for m in MethodId::ALL {
        let row = match global_test(counts, m) {
            Ok(t) => TestRow {
                method: m.name().into(),
                target: "global".into(),
                statistic: Some(t.statistic),
                df: 2,
                p_value: Some(t.p_value),
                error: None,
            },
            Err(e) => TestRow {
                method: m.name().into(),
                target: "global".into(),
                statistic: None,
                df: 2,
                p_value: None,
                error: Some(ratio_hint(&e)),
            },
        };
        global_tests.push(row);
    }

    Ok(AnalysisReport {
        counts: counts.cells(),
        n: counts.n(),
        alpha,
        zero_substituted,
        estimates,
        intervals,
        individual_tests,
        global_tests,
    })
}

fn fmt_cell(v: f64) -> String {
    if v.fract() == 0.0 {
        format!("{v:.0}")
    } else {
        format!("{v}")
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    match v {
        Some(x) => format!("{x:>10.4}"),
        None => format!("{:>10}", "-"),
    }
}

/// Plain-text rendering at fixed 4-dp precision.
pub fn render_text(r: &AnalysisReport) -> String {
    use std::fmt::Write;
    let mut out = String::new();
    let cells: Vec<String> = r.counts.iter().map(|&v| fmt_cell(v)).collect();
    writeln!(
        out,
        "Paired predictive-value analysis (alpha = {:.4})",
        r.alpha
    )
    .unwrap();
    writeln!(out, "counts: {}  (n = {})", cells.join(","), fmt_cell(r.n)).unwrap();
    if r.zero_substituted {
        writeln!(out, "zero cells substituted by 0.05").unwrap();
    }
    writeln!(out).unwrap();
    let e = &r.estimates;
    writeln!(out, "Estimates").unwrap();
    writeln!(
        out,
        "  PPV_A = {:.4}  PPV_B = {:.4}  NPV_A = {:.4}  NPV_B = {:.4}",
        e.ppv_a, e.ppv_b, e.npv_a, e.npv_b
    )
    .unwrap();
    let r_txt = e.r.map_or("undefined".to_string(), |v| format!("{v:.4}"));
    let rb_txt = e
        .r_bar
        .map_or("undefined".to_string(), |v| format!("{v:.4}"));
    writeln!(
        out,
        "  d = {:.4}  dbar = {:.4}  R = {}  Rbar = {}",
        e.d, e.d_bar, r_txt, rb_txt
    )
    .unwrap();

    writeln!(out).unwrap();
    writeln!(
        out,
        "Confidence intervals (level {:.0}%)",
        100.0 * (1.0 - r.alpha)
    )
    .unwrap();
    writeln!(
        out,
        "  {:<6} {:<9} {:>10} {:>10}",
        "method", "parameter", "lower", "upper"
    )
    .unwrap();
    for row in &r.intervals {
        match &row.error {
            None => writeln!(
                out,
                "  {:<6} {:<9} {} {}",
                row.method,
                row.parameter,
                fmt_opt(row.lower),
                fmt_opt(row.upper)
            )
            .unwrap(),
            Some(e) => writeln!(out, "  {:<6} {:<9} {e}", row.method, row.parameter).unwrap(),
        }
    }

    writeln!(out).unwrap();
    writeln!(out, "Individual homogeneity tests (df = 1)").unwrap();
    writeln!(
        out,
        "  {:<6} {:<9} {:>10} {:>10}",
        "method", "target", "statistic", "p-value"
    )
    .unwrap();
    for row in &r.individual_tests {
        match &row.error {
            None => writeln!(
                out,
                "  {:<6} {:<9} {} {}",
                row.method,
                row.target,
                fmt_opt(row.statistic),
                fmt_opt(row.p_value)
            )
            .unwrap(),
            Some(e) => writeln!(out, "  {:<6} {:<9} {e}", row.method, row.target).unwrap(),
        }
    }

    writeln!(out).unwrap();
    writeln!(out, "Global homogeneity tests (df = 2)").unwrap();
    writeln!(
        out,
        "  {:<6} {:>10} {:>10}",
        "method", "statistic", "p-value"
    )
    .unwrap();
    for row in &r.global_tests {
        match &row.error {
            None => writeln!(
                out,
                "  {:<6} {} {}",
                row.method,
                fmt_opt(row.statistic),
                fmt_opt(row.p_value)
            )
            .unwrap(),
            Some(e) => writeln!(out, "  {:<6} {e}", row.method).unwrap(),
        }
    }
    out
}

/// CSV rendering: one row per reported quantity.
pub fn render_csv(r: &AnalysisReport) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "section",
        "name",
        "method",
        "target",
        "lower",
        "upper",
        "statistic",
        "df",
        "p_value",
        "value",
        "error",
    ])
    .unwrap();
    let blank = String::new();
    let opt = |v: Option<f64>| v.map_or(String::new(), |x| x.to_string());
    let e = &r.estimates;
    for (name, value) in [
        ("ppv_a", Some(e.ppv_a)),
        ("ppv_b", Some(e.ppv_b)),
        ("npv_a", Some(e.npv_a)),
        ("npv_b", Some(e.npv_b)),
        ("d", Some(e.d)),
        ("d_bar", Some(e.d_bar)),
        ("r", e.r),
        ("r_bar", e.r_bar),
    ] {
        w.write_record([
            "estimate",
            name,
            "",
            "",
            "",
            "",
            "",
            "",
            "",
            &opt(value),
            "",
        ])
        .unwrap();
    }
    for row in &r.intervals {
        w.write_record([
            "ci",
            &row.parameter,
            &row.method,
            &blank,
            &opt(row.lower),
            &opt(row.upper),
            &blank,
            &blank,
            &blank,
            &blank,
            row.error.as_deref().unwrap_or(""),
        ])
        .unwrap();
    }
    for (section, rows) in [
        ("test", &r.individual_tests),
        ("global-test", &r.global_tests),
    ] {
        for row in rows {
            w.write_record([
                section,
                &blank,
                &row.method,
                &row.target,
                &blank,
                &blank,
                &opt(row.statistic),
                &row.df.to_string(),
                &opt(row.p_value),
                &blank,
                row.error.as_deref().unwrap_or(""),
            ])
            .unwrap();
        }
    }
    String::from_utf8(w.into_inner().unwrap()).unwrap()
}
