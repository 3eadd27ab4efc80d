use crate::error::{Error, Result};
use crate::vector;

use super::LocalObjective;

/// Ridge weight used by the logistic experiments.
pub const DEFAULT_LAMBDA: f64 = 1e-5;

/// One labelled example; the label is exactly `-1` or `+1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub features: Vec<f64>,
    pub label: f64,
}

impl Sample {
    pub fn new(features: Vec<f64>, label: f64) -> Result<Self> {
        if label != 1.0 && label != -1.0 {
            return Err(Error::InvalidParameter(format!("label must be ±1, got {label}")));
        }
        Ok(Sample { features, label })
    }
}

/// `1 / (1 + e^{-t})` without overflow for large `|t|`.
fn logistic(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

fn check(x: &[f64], s: &Sample, lambda: f64) -> Result<()> {
    if x.len() != s.features.len() {
        return Err(Error::shape(format!("dimension {}", s.features.len()), x.len()));
    }
    if !(lambda >= 0.0) {
        return Err(Error::InvalidParameter(format!("lambda must be >= 0, got {lambda}")));
    }
    Ok(())
}

/// `1/(1 + exp(l⟨a,x⟩)) + λ‖x‖²`
pub fn sigmoid_loss(x: &[f64], s: &Sample, lambda: f64) -> Result<f64> {
    check(x, s, lambda)?;
    Ok(loss_unchecked(x, &s.features, s.label, lambda))
}

/// `-l·a·e^{z}/(1+e^{z})² + 2λx` with `z = l⟨a,x⟩`.
pub fn sigmoid_grad(x: &[f64], s: &Sample, lambda: f64) -> Result<Vec<f64>> {
    check(x, s, lambda)?;
    let mut out = vec![0.0; x.len()];
    add_grad_unchecked(x, &s.features, s.label, lambda, 1.0, &mut out);
    Ok(out)
}

fn loss_unchecked(x: &[f64], a: &[f64], label: f64, lambda: f64) -> f64 {
    let z = label * vector::dot(a, x);
    logistic(-z) + lambda * vector::norm_sq(x)
}

fn add_grad_unchecked(x: &[f64], a: &[f64], label: f64, lambda: f64, scale: f64, out: &mut [f64]) {
    let z = label * vector::dot(a, x);
    // d/dz σ(-z) = -σ(z)σ(-z)
    let slope = -logistic(z) * logistic(-z) * label * scale;
    for ((o, ai), xi) in out.iter_mut().zip(a).zip(x) {
        *o += slope * ai + 2.0 * lambda * scale * xi;
    }
}

/// Regularized nonconvex sigmoid loss over a node's local samples.
#[derive(Debug, Clone)]
pub struct LogisticObjective {
    d: usize,
    /// Row-major `n × d`.
    features: Vec<f64>,
    labels: Vec<f64>,
    lambda: f64,
}

impl LogisticObjective {
    pub fn new(samples: Vec<Sample>, lambda: f64) -> Result<Self> {
        let d = samples
            .first()
            .map(|s| s.features.len())
            .ok_or_else(|| Error::InvalidParameter("no samples".into()))?;
        if !(lambda >= 0.0) {
            return Err(Error::InvalidParameter(format!("lambda must be >= 0, got {lambda}")));
        }
        let mut features = Vec::with_capacity(samples.len() * d);
        let mut labels = Vec::with_capacity(samples.len());
        for s in samples {
            if s.features.len() != d {
                return Err(Error::shape(format!("dimension {d}"), s.features.len()));
            }
            features.extend_from_slice(&s.features);
            labels.push(s.label);
        }
        Ok(LogisticObjective {
            d,
            features,
            labels,
            lambda,
        })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    fn row(&self, k: usize) -> &[f64] {
        &self.features[k * self.d..(k + 1) * self.d]
    }
}

impl LocalObjective for LogisticObjective {
    fn dim(&self) -> usize {
        self.d
    }

    fn len(&self) -> usize {
        self.labels.len()
    }

    fn component_loss(&self, k: usize, x: &[f64]) -> f64 {
        loss_unchecked(x, self.row(k), self.labels[k], self.lambda)
    }

    fn add_component_grad(&self, k: usize, x: &[f64], scale: f64, out: &mut [f64]) {
        add_grad_unchecked(x, self.row(k), self.labels[k], self.lambda, scale, out);
    }

    /// `max_k ‖a_k‖²·c + 2λ` with `c = max |σ''| = 1/(6√3)`.
    fn smoothness(&self) -> Option<f64> {
        let c = 1.0 / (6.0 * 3f64.sqrt());
        let max_sq = (0..self.len())
            .map(|k| vector::norm_sq(self.row(k)))
            .fold(0.0, f64::max);
        Some(c * max_sq + 2.0 * self.lambda)
    }
}
