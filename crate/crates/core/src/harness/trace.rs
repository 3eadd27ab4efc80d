//! CSV trace files.
//!
//! Data rows carry every float with 17 significant digits so two runs can be
//! compared byte for byte. Lines starting with `#` hold the run summary.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::optimizer::{MetricRow, Trace};

pub const CSV_HEADER: &str = "step,epoch,samples,stationary_gap,loss,consensus_err,estimator_err,tracking_err";

fn float(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn render_row(row: &MetricRow) -> String {
    format!(
        "{},{},{},{},{},{},{},{}",
        row.step,
        float(row.epoch),
        row.samples,
        float(row.stationary_gap),
        float(row.loss),
        float(row.consensus_err),
        float(row.estimator_err),
        float(row.tracking_err),
    )
}

/// Header, one line per row, then the `#` summary footer.
pub fn render_trace_csv(trace: &Trace) -> String {
    let mut s = String::with_capacity(64 * (trace.rows.len() + 8));
    s.push_str(CSV_HEADER);
    s.push('\n');
    for row in &trace.rows {
        s.push_str(&render_row(row));
        s.push('\n');
    }
    let final_gap = trace.rows.last().map_or(f64::NAN, |r| r.stationary_gap);
    let _ = writeln!(s, "# algorithm = {}", trace.algorithm);
    let _ = writeln!(s, "# steps = {}", trace.steps);
    let _ = writeln!(s, "# final_gap = {}", float(final_gap));
    let _ = writeln!(s, "# samples_per_node = {}", trace.counters.samples);
    let _ = writeln!(s, "# iteration_samples_per_node = {}", trace.counters.iteration_samples);
    let _ = writeln!(s, "# grad_evals_per_node = {}", trace.counters.grad_evals);
    let _ = writeln!(s, "# evaluation_epochs = {}", float(trace.evaluation_epochs()));
    s
}

pub fn write_trace_csv(trace: &Trace, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, render_trace_csv(trace)).map_err(|e| Error::io(path, e))
}

pub fn parse_trace_csv(text: &str) -> Result<Vec<MetricRow>> {
    let mut rows = Vec::new();
    let mut header_seen = false;
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let lineno = idx + 1;
        if !header_seen {
            if line != CSV_HEADER {
                return Err(Error::Parse {
                    line: lineno,
                    msg: format!("expected header `{CSV_HEADER}`"),
                });
            }
            header_seen = true;
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 8 {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("expected 8 fields, got {}", fields.len()),
            });
        }
        let bad = |what: &str| Error::Parse {
            line: lineno,
            msg: format!("cannot parse {what}"),
        };
        let f = |i: usize, what: &str| fields[i].parse::<f64>().map_err(|_| bad(what));
        rows.push(MetricRow {
            step: fields[0].parse().map_err(|_| bad("step"))?,
            epoch: f(1, "epoch")?,
            samples: fields[2].parse().map_err(|_| bad("samples"))?,
            stationary_gap: f(3, "stationary_gap")?,
            loss: f(4, "loss")?,
            consensus_err: f(5, "consensus_err")?,
            estimator_err: f(6, "estimator_err")?,
            tracking_err: f(7, "tracking_err")?,
        });
    }
    if !header_seen {
        return Err(Error::Parse {
            line: 1,
            msg: "missing header".into(),
        });
    }
    Ok(rows)
}

pub fn read_trace_csv(path: impl AsRef<Path>) -> Result<Vec<MetricRow>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_trace_csv(&text)
}
