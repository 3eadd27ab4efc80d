use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

use super::trace::read_trace_csv;

/// Stationary gaps of several traces on a shared epoch grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub names: Vec<String>,
    pub epochs: Vec<f64>,
    /// `gaps[r][k]`: run `r` at `epochs[k]`.
    pub gaps: Vec<Vec<f64>>,
}

impl Comparison {
    /// Largest absolute gap difference of each run against the first.
    pub fn max_differences(&self) -> Vec<f64> {
        self.gaps
            .iter()
            .map(|g| g.iter().zip(&self.gaps[0]).fold(0.0, |m, (a, b)| f64::max(m, (a - b).abs())))
            .collect()
    }

    /// Runs sorted by final gap, smallest first; ties keep input order.
    pub fn ranking(&self) -> Vec<(String, f64)> {
        let mut out: Vec<(String, f64)> = self
            .names
            .iter()
            .zip(&self.gaps)
            .map(|(n, g)| (n.clone(), g.last().copied().unwrap_or(f64::NAN)))
            .collect();
        out.sort_by(|a, b| a.1.total_cmp(&b.1));
        out
    }

    pub fn render(&self) -> String {
        let mut s = String::from("epoch");
        for name in &self.names {
            let _ = write!(s, "\t{name}");
        }
        s.push('\n');
        for (k, epoch) in self.epochs.iter().enumerate() {
            let _ = write!(s, "{epoch}");
            for g in &self.gaps {
                let _ = write!(s, "\t{:.6e}", g[k]);
            }
            s.push('\n');
        }
        s.push_str("\nmax |gap - gap[first]|:\n");
        for (name, d) in self.names.iter().zip(self.max_differences()) {
            let _ = writeln!(s, "  {name}\t{d:.6e}");
        }
        s.push_str("\nranking by final gap:\n");
        for (rank, (name, gap)) in self.ranking().iter().enumerate() {
            let _ = writeln!(s, "  {}. {name}\t{gap:.6e}", rank + 1);
        }
        s
    }
}

/// Aligns the gap columns of two or more traces. Every trace must have been
/// recorded on the same epoch grid.
pub fn compare_runs<P: AsRef<Path>>(paths: &[P]) -> Result<Comparison> {
    if paths.len() < 2 {
        return Err(Error::Compare(format!("need at least two traces, got {}", paths.len())));
    }
    let mut names = Vec::new();
    let mut gaps = Vec::new();
    let mut epochs: Option<Vec<f64>> = None;
    for path in paths {
        let path = path.as_ref();
        let rows = read_trace_csv(path)?;
        let grid: Vec<f64> = rows.iter().map(|r| r.epoch).collect();
        match &epochs {
            None => epochs = Some(grid),
            Some(first) if *first != grid => {
                return Err(Error::Compare(format!(
                    "{} has a different epoch grid ({} rows) than {} ({} rows)",
                    path.display(),
                    grid.len(),
                    paths[0].as_ref().display(),
                    first.len()
                )));
            }
            Some(_) => {}
        }
        names.push(path.display().to_string());
        gaps.push(rows.iter().map(|r| r.stationary_gap).collect());
    }
    Ok(Comparison {
        names,
        epochs: epochs.unwrap_or_default(),
        gaps,
    })
}
