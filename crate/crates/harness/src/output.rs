use std::io::Write;
use std::path::Path;

use crate::{HarnessError, RunRecord};

/// CSV header. Consumers should look columns up by name.
pub const COLUMNS: [&str; 12] = [
    "sweep_value",
    "policy",
    "evaluator",
    "outage",
    "lower",
    "upper",
    "stderr",
    "d_star",
    "kappa_prime",
    "kappa_t",
    "wall_time_s",
    "error",
];

/// Twelve significant digits; empty for a missing value.
fn fmt(x: Option<f64>) -> String {
    x.map_or_else(String::new, |v| format!("{v:.11e}"))
}

/// Writes a header and one row per record.
pub fn write_csv<W: Write>(records: &[RunRecord], out: W) -> Result<(), HarnessError> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::CRLF)
        .from_writer(out);
    w.write_record(COLUMNS)?;
    for r in records {
        w.write_record([
            fmt(Some(r.sweep_value)),
            r.policy.clone(),
            r.evaluator.clone(),
            fmt(r.outage),
            fmt(r.lower),
            fmt(r.upper),
            fmt(r.stderr),
            fmt(r.d_star),
            fmt(r.kappa_prime),
            fmt(r.kappa_t),
            fmt(r.wall_time_s),
            r.error.clone().unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// [`write_csv`] into a file at `path`.
pub fn emit_csv(records: &[RunRecord], path: &Path) -> Result<(), HarnessError> {
    let file = std::fs::File::create(path)?;
    write_csv(records, std::io::BufWriter::new(file))
}
