use std::collections::BTreeMap;
use std::path::Path;

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::rng::{NodeRng, STREAM_SHUFFLE};

use super::Sample;

/// How raw labels are mapped onto `{-1, +1}`.
///
/// Labels already in `{-1, +1}` are kept. Any other two-label file maps the
/// smaller label to `+1` and the larger to `-1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LabelPolicy {
    /// More than two distinct labels is an error.
    #[default]
    Strict,
    /// Keep only the two most frequent labels (most frequent becomes `+1`)
    /// and drop the other samples.
    TopTwo,
}

/// A node's share of the data.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeDataset {
    pub node: usize,
    pub samples: Vec<Sample>,
}

pub fn parse_libsvm(path: impl AsRef<Path>, policy: LabelPolicy) -> Result<Vec<Sample>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_libsvm_str(&text, policy)
}

/// Parses `<label> <idx>:<val> ...` lines with 1-based indices and densifies
/// every row to the largest index seen.
pub fn parse_libsvm_str(text: &str, policy: LabelPolicy) -> Result<Vec<Sample>> {
    let mut rows: Vec<(f64, &str, Vec<(usize, f64)>)> = Vec::new();
    let mut d = 0;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: String| Error::Parse { line: lineno + 1, msg };
        let mut tokens = line.split_whitespace();
        let label_tok = tokens.next().unwrap_or_default();
        let label: f64 = label_tok
            .parse()
            .map_err(|_| err(format!("bad label `{label_tok}`")))?;
        let mut feats = Vec::new();
        for tok in tokens {
            let (idx, val) = tok
                .split_once(':')
                .ok_or_else(|| err(format!("expected idx:val, got `{tok}`")))?;
            let idx: usize = idx.parse().map_err(|_| err(format!("bad index `{idx}`")))?;
            if idx == 0 {
                return Err(err("feature indices are 1-based".into()));
            }
            let val: f64 = val.parse().map_err(|_| err(format!("bad value `{val}`")))?;
            d = d.max(idx);
            feats.push((idx - 1, val));
        }
        rows.push((label, label_tok, feats));
    }

    let mapping = label_mapping(&rows, policy)?;
    rows.into_iter()
        .filter_map(|(label, _, feats)| {
            let mapped = mapping.iter().find(|(raw, _)| *raw == label)?.1;
            let mut dense = vec![0.0; d];
            for (j, v) in feats {
                dense[j] = v;
            }
            Some(Sample::new(dense, mapped))
        })
        .collect()
}

fn label_mapping(rows: &[(f64, &str, Vec<(usize, f64)>)], policy: LabelPolicy) -> Result<Vec<(f64, f64)>> {
    // raw value (bit pattern) -> (count, first spelling)
    let mut counts: BTreeMap<u64, (f64, usize, String)> = BTreeMap::new();
    for (label, tok, _) in rows {
        let entry = counts.entry(label.to_bits()).or_insert((*label, 0, tok.to_string()));
        entry.1 += 1;
    }
    let mut labels: Vec<(f64, usize, String)> = counts.into_values().collect();
    labels.sort_by(|a, b| a.0.total_cmp(&b.0));
    let observed = || labels.iter().map(|l| l.2.clone()).collect::<Vec<_>>();

    if labels.iter().all(|l| l.0 == 1.0 || l.0 == -1.0) {
        return Ok(labels.iter().map(|l| (l.0, l.0)).collect());
    }
    match (labels.len(), policy) {
        (2, _) => Ok(vec![(labels[0].0, 1.0), (labels[1].0, -1.0)]),
        (n, LabelPolicy::TopTwo) if n > 2 => {
            let mut by_freq = labels.clone();
            by_freq.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.total_cmp(&b.0)));
            Ok(vec![(by_freq[0].0, 1.0), (by_freq[1].0, -1.0)])
        }
        _ => Err(Error::Labels { observed: observed() }),
    }
}

/// Seeded shuffle, truncation to a multiple of `m`, then a contiguous equal
/// split.
pub fn partition(samples: Vec<Sample>, m: usize, seed: u64) -> Result<Vec<NodeDataset>> {
    if m == 0 || samples.len() < m {
        return Err(Error::InvalidParameter(format!(
            "cannot split {} samples across {m} nodes",
            samples.len()
        )));
    }
    let mut samples = samples;
    let mut rng = NodeRng::stream(seed, STREAM_SHUFFLE);
    samples.shuffle(rng.inner());
    let n = samples.len() / m;
    samples.truncate(n * m);
    let mut out = Vec::with_capacity(m);
    let mut rest = samples;
    for node in 0..m {
        let tail = rest.split_off(n);
        out.push(NodeDataset { node, samples: rest });
        rest = tail;
    }
    Ok(out)
}
