//! Counts ingestion: inline flag, CSV file, or JSON file. Raw counts are
//! nonnegative integers at this boundary; the +0.5 and 0.05 adjustments are
//! applied downstream.

use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use pvcompare::PairedCounts;
use serde::Deserialize;

/// Cell order of every counts source: x1..x8 row-major over the 2x2x2
/// table — the S = + row then the S = - row, within a row (A+,B+), (A+,B-),
/// (A-,B+), (A-,B-). The Weiner data read 473,81,29,25,22,44,46,151.
pub const COUNTS_ORDER: &str = "x1,x2,x3,x4,x5,x6,x7,x8";

fn cells_from_integers(values: [u64; 8]) -> PairedCounts {
    let mut cells = [0.0; 8];
    for (c, v) in cells.iter_mut().zip(values) {
        *c = v as f64;
    }
    PairedCounts::new(cells).expect("integer counts are always valid cells")
}

/// Parses the inline `--counts` value: eight comma-separated nonnegative
/// integers.
pub fn parse_inline(spec: &str) -> Result<PairedCounts> {
    let parts: Vec<&str> = spec.split(',').map(str::trim).collect();
    if parts.len() != 8 {
        bail!(
            "--counts needs exactly 8 comma-separated values ({COUNTS_ORDER}), got {}",
            parts.len()
        );
    }
    let mut values = [0u64; 8];
    for (i, part) in parts.iter().enumerate() {
        values[i] = part.parse::<u64>().map_err(|e| {
            anyhow!(
                "field x{}: {:?} is not a nonnegative integer ({e})",
                i + 1,
                part
            )
        })?;
    }
    Ok(cells_from_integers(values))
}

/// Reads a counts CSV: a `x1,...,x8` header line and exactly one data row.
pub fn read_csv(path: &Path) -> Result<PairedCounts> {
    let file = std::fs::File::open(path)
        .with_context(|| format!("cannot open counts file {}", path.display()))?;
    let mut reader = csv::Reader::from_reader(file);
    let headers = reader
        .headers()
        .with_context(|| format!("{}: cannot read header", path.display()))?
        .clone();
    let expected: Vec<String> = (1..=8).map(|i| format!("x{i}")).collect();
    let got: Vec<String> = headers.iter().map(str::to_string).collect();
    if got != expected {
        bail!(
            "{}:1: header must be {COUNTS_ORDER}, got {}",
            path.display(),
            got.join(",")
        );
    }
    let mut rows = reader.records();
    let record = rows
        .next()
        .ok_or_else(|| anyhow!("{}:2: missing the counts row", path.display()))?
        .with_context(|| format!("{}:2: malformed row", path.display()))?;
    if record.len() != 8 {
        bail!(
            "{}:2: expected 8 fields, got {}",
            path.display(),
            record.len()
        );
    }
    let mut values = [0u64; 8];
    for (i, field) in record.iter().enumerate() {
        values[i] = field.trim().parse::<u64>().map_err(|e| {
            anyhow!(
                "{}:2: field x{}: {:?} is not a nonnegative integer ({e})",
                path.display(),
                i + 1,
                field
            )
        })?;
    }
    if rows.next().is_some() {
        bail!("{}:3: expected a single counts row", path.display());
    }
    Ok(cells_from_integers(values))
}

#[derive(Deserialize)]
struct CountsJson {
    x: Vec<u64>,
}

/// Reads a counts JSON file of the form `{"x": [x1, ..., x8]}`.
pub fn read_json(path: &Path) -> Result<PairedCounts> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot open counts file {}", path.display()))?;
    let parsed: CountsJson = serde_json::from_str(&text)
        .with_context(|| format!("{}: expected {{\"x\": [{COUNTS_ORDER}]}}", path.display()))?;
    if parsed.x.len() != 8 {
        bail!(
            "{}: field \"x\" must hold exactly 8 counts, got {}",
            path.display(),
            parsed.x.len()
        );
    }
    let mut values = [0u64; 8];
    values.copy_from_slice(&parsed.x);
    Ok(cells_from_integers(values))
}
