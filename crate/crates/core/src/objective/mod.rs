//! Per-node finite-sum objectives and their gradient oracles.
//!
//! Every node `i` holds `f^i(x) = (1/n) Σ_k f^i_k(x)`; the network objective
//! is `F(x) = (1/m) Σ_i f^i(x)`. Reductions always run in ascending index
//! order so a minibatch over every index reproduces the full gradient bit
//! for bit.

mod libsvm;
mod logistic;
mod quadratic;
mod synthetic;

pub use libsvm::{parse_libsvm, parse_libsvm_str, partition, LabelPolicy, NodeDataset};
pub use logistic::{sigmoid_grad, sigmoid_loss, LogisticObjective, Sample, DEFAULT_LAMBDA};
pub use quadratic::{quadratic_objective, QuadraticObjective};
pub use synthetic::{synthetic_logistic, synthetic_quadratic};

use crate::error::{Error, Result};
use crate::vector;

/// Component, minibatch and full gradient oracles of one node's local loss.
pub trait LocalObjective: Send + Sync {
    fn dim(&self) -> usize;

    /// Number of components `n`.
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn component_loss(&self, k: usize, x: &[f64]) -> f64;

    /// `out += scale · ∇f_k(x)`
    fn add_component_grad(&self, k: usize, x: &[f64], scale: f64, out: &mut [f64]);

    /// Smoothness constant of every component, when known analytically.
    fn smoothness(&self) -> Option<f64> {
        None
    }

    fn component_grad(&self, k: usize, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.add_component_grad(k, x, 1.0, &mut out);
        out
    }

    /// `(1/|I|) Σ_{k ∈ I} ∇f_k(x)`, summed in the order given.
    fn minibatch_grad(&self, batch: &[usize], x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        for &k in batch {
            self.add_component_grad(k, x, 1.0, &mut out);
        }
        vector::scale(1.0 / batch.len() as f64, &mut out);
        out
    }

    fn full_grad(&self, x: &[f64]) -> Vec<f64> {
        let all: Vec<usize> = (0..self.len()).collect();
        self.minibatch_grad(&all, x)
    }

    fn loss(&self, x: &[f64]) -> f64 {
        (0..self.len()).map(|k| self.component_loss(k, x)).sum::<f64>() / self.len() as f64
    }
}

/// The network problem: one local objective per node, all sharing `d` and `n`.
pub struct Problem {
    nodes: Vec<Box<dyn LocalObjective>>,
    optimum: Option<f64>,
}

impl std::fmt::Debug for Problem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Problem")
            .field("nodes", &self.nodes.len())
            .field("dim", &self.dim())
            .field("components", &self.components())
            .field("optimum", &self.optimum)
            .finish()
    }
}

impl Problem {
    pub fn new(nodes: Vec<Box<dyn LocalObjective>>) -> Result<Self> {
        let first = nodes
            .first()
            .ok_or_else(|| Error::InvalidParameter("problem needs at least one node".into()))?;
        let (d, n) = (first.dim(), first.len());
        if n == 0 || d == 0 {
            return Err(Error::InvalidParameter(
                "local objectives need n >= 1 components and d >= 1".into(),
            ));
        }
        for (i, node) in nodes.iter().enumerate() {
            if node.dim() != d {
                return Err(Error::shape(format!("dimension {d}"), format!("node {i}: {}", node.dim())));
            }
            if node.len() != n {
                return Err(Error::shape(format!("{n} components"), format!("node {i}: {}", node.len())));
            }
        }
        Ok(Problem {
            nodes,
            optimum: None,
        })
    }

    /// Attach the known optimal value `F*`.
    pub fn with_optimum(mut self, f_star: f64) -> Self {
        self.optimum = Some(f_star);
        self
    }

    pub fn optimum(&self) -> Option<f64> {
        self.optimum
    }

    pub fn node(&self, i: usize) -> &dyn LocalObjective {
        self.nodes[i].as_ref()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn dim(&self) -> usize {
        self.nodes[0].dim()
    }

    /// Per-node component count `n`.
    pub fn components(&self) -> usize {
        self.nodes[0].len()
    }

    /// Largest known component smoothness constant over all nodes.
    pub fn smoothness(&self) -> Option<f64> {
        self.nodes
            .iter()
            .map(|n| n.smoothness())
            .try_fold(0.0_f64, |acc, l| l.map(|l| acc.max(l)))
    }

    /// `F(x)`
    pub fn loss(&self, x: &[f64]) -> f64 {
        self.nodes.iter().map(|n| n.loss(x)).sum::<f64>() / self.nodes.len() as f64
    }

    /// `∇F(x) = (1/m) Σ_i ∇f^i(x)`
    pub fn grad(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        for node in &self.nodes {
            vector::axpy(1.0, &node.full_grad(x), &mut out);
        }
        vector::scale(1.0 / self.nodes.len() as f64, &mut out);
        out
    }
}
