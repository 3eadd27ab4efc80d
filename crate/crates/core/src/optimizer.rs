//! Synchronous-round simulations of the adaptive momentum-based decentralized
//! methods.
//!
//! - [`Algorithm::AdaMdos`]: stochastic setting. STORM-style momentum
//!   estimator, one fresh minibatch per node per round, evaluated at both the
//!   new and the old iterate.
//! - [`Algorithm::AdaMdof`]: finite-sum setting. ZeroSARAH estimator backed
//!   by a per-node table of stored component gradients.
//! - [`Algorithm::Dpsgd`]: local SGD step followed by one gossip round.
//!
//! Within a round every node reads its neighbors' values from the previous
//! round; the mixing calls act as barriers. Node updates run on a rayon pool
//! and draw randomness only from their own stream, so results do not depend
//! on the worker count.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;

use crate::adaptive::{AdaptiveConfig, AdaptiveState};
use crate::diagnostics;
use crate::error::{Error, Result};
use crate::objective::{LocalObjective, Problem};
use crate::rng::{NodeRng, STREAM_OUTPUT};
use crate::topology::MixingMatrix;
use crate::vector;

/// Fill value of the default common initial iterate.
pub const DEFAULT_X0: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    AdaMdos,
    AdaMdof,
    Dpsgd,
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "adamdos" => Ok(Algorithm::AdaMdos),
            "adamdof" => Ok(Algorithm::AdaMdof),
            "dpsgd" => Ok(Algorithm::Dpsgd),
            other => Err(Error::InvalidParameter(format!(
                "unknown algorithm `{other}` (expected adamdos | adamdof | dpsgd)"
            ))),
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algorithm::AdaMdos => "adamdos",
            Algorithm::AdaMdof => "adamdof",
            Algorithm::Dpsgd => "dpsgd",
        })
    }
}

/// Step-size style schedule. `PowerT` is `c / T^{2/3}` for horizon `T`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Schedule {
    Constant(f64),
    PowerT(f64),
}

impl Schedule {
    pub fn value(&self, horizon: usize) -> f64 {
        match *self {
            Schedule::Constant(v) => v,
            Schedule::PowerT(c) => c / (horizon.max(1) as f64).powf(2.0 / 3.0),
        }
    }
}

impl FromStr for Schedule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::InvalidParameter(format!("cannot parse schedule `{s}`"));
        if let Some(c) = s.strip_suffix("/T^{2/3}") {
            let c: f64 = c.trim().parse().map_err(|_| bad())?;
            return Ok(Schedule::PowerT(c));
        }
        s.parse().map(Schedule::Constant).map_err(|_| bad())
    }
}

impl fmt::Display for Schedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Schedule::Constant(v) => write!(f, "{v}"),
            Schedule::PowerT(c) => write!(f, "{c}/T^{{2/3}}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HyperParams {
    pub gamma: f64,
    pub eta: Schedule,
    pub beta: Schedule,
    /// Minibatch size `b`.
    pub batch: usize,
    /// Number of rounds `T`.
    pub horizon: usize,
    pub adaptive: AdaptiveConfig,
}

impl HyperParams {
    /// Every violated constraint, in a fixed order.
    pub fn violations(&self, n: usize) -> Vec<String> {
        let mut out = Vec::new();
        if !(self.gamma.is_finite() && self.gamma >= 0.0) {
            out.push(format!("gamma must be finite and >= 0, got {}", self.gamma));
        }
        for (name, s) in [("eta", self.eta), ("beta", self.beta)] {
            let v = s.value(self.horizon);
            if !(v > 0.0 && v <= 1.0) {
                out.push(format!("{name} must lie in (0, 1], got {v} from `{s}`"));
            }
        }
        if self.batch < 1 || self.batch > n {
            out.push(format!("batch must satisfy 1 <= b <= n = {n}, got {}", self.batch));
        }
        if let Err(e) = self.adaptive.validate() {
            out.push(e.to_string());
        }
        out
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        let v = self.violations(n);
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidParameter(v.join("; ")))
        }
    }
}

/// Per-node sample and gradient-evaluation counters.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Counters {
    /// Component indices drawn, initialization included.
    pub samples: u64,
    /// Component indices drawn by the update rounds only.
    pub iteration_samples: u64,
    /// Component gradient evaluations.
    pub grad_evals: u64,
}

#[derive(Debug, Clone)]
pub struct NodeState {
    pub x: Vec<f64>,
    /// Iterate of the previous round.
    pub x_prev: Vec<f64>,
    pub x_tilde: Vec<f64>,
    pub u: Vec<f64>,
    pub w: Vec<f64>,
    /// Last search direction `A⁻¹w`.
    pub g: Vec<f64>,
    pub adaptive: AdaptiveState,
    /// Stored component gradients (finite-sum method only).
    pub z_table: Vec<Vec<f64>>,
    /// Running `Σ_k z_k`.
    pub z_sum: Vec<f64>,
    pub counters: Counters,
    rng: NodeRng,
    /// Stochastic gradient at `x` with the sample drawn for it.
    grad_cur: Vec<f64>,
    /// Gradient at `x_prev` with that same sample.
    grad_old: Vec<f64>,
    delta_u: Vec<f64>,
    batch: Vec<usize>,
    batch_grads: Vec<Vec<f64>>,
    mean_prev: Vec<f64>,
}

impl NodeState {
    fn new(x0: &[f64], adaptive: &AdaptiveConfig, rng: NodeRng) -> Self {
        let d = x0.len();
        NodeState {
            x: x0.to_vec(),
            x_prev: x0.to_vec(),
            x_tilde: x0.to_vec(),
            u: vec![0.0; d],
            w: vec![0.0; d],
            g: vec![0.0; d],
            adaptive: AdaptiveState::new(adaptive, d),
            z_table: Vec::new(),
            z_sum: Vec::new(),
            counters: Counters::default(),
            rng,
            grad_cur: vec![0.0; d],
            grad_old: vec![0.0; d],
            delta_u: vec![0.0; d],
            batch: Vec::new(),
            batch_grads: Vec::new(),
            mean_prev: vec![0.0; d],
        }
    }

    fn draw(&mut self, n: usize, b: usize) -> Vec<usize> {
        let batch = self.rng.subset(n, b);
        self.counters.samples += b as u64;
        batch
    }
}

/// Network state at round `t`, kept so the potential functions can pair it
/// with the iterates of round `t + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: usize,
    pub x: Vec<Vec<f64>>,
    pub u: Vec<Vec<f64>>,
    pub w: Vec<Vec<f64>>,
    pub g: Vec<Vec<f64>>,
    /// Per-node z-tables, finite-sum method only.
    pub z: Option<Vec<Vec<Vec<f64>>>>,
}

/// `∇f(x_{t+1}; ξ) + (1 − β)(u_t − ∇f(x_t; ξ))`
pub fn storm_estimate(grad_new: &[f64], u_prev: &[f64], grad_old: &[f64], beta: f64) -> Vec<f64> {
    grad_new
        .iter()
        .zip(u_prev.iter().zip(grad_old))
        .map(|(gn, (u, go))| gn + (1.0 - beta) * (u - go))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZeroSarahOutput {
    pub u: Vec<f64>,
    /// `∇f_k(x_t)` for each drawn `k`, in batch order.
    pub grads_current: Vec<Vec<f64>>,
    /// Minibatch mean at `x_t`.
    pub mean_current: Vec<f64>,
    /// Minibatch mean at `x_{t-1}`.
    pub mean_previous: Vec<f64>,
}

/// ZeroSARAH estimator for one node and one index set:
/// `(1/b)Σ_I(∇f_k(x_t) − ∇f_k(x_{t-1})) + (1−β)u_{t-1}
///  + β((1/b)Σ_I(∇f_k(x_{t-1}) − z_k) + (1/n)Σ_j z_j)`.
#[allow(clippy::too_many_arguments)]
pub fn zerosarah_estimate(
    objective: &dyn LocalObjective,
    batch: &[usize],
    x_t: &[f64],
    x_prev: &[f64],
    u_prev: &[f64],
    z_table: &[Vec<f64>],
    z_sum: &[f64],
    beta: f64,
) -> ZeroSarahOutput {
    let d = x_t.len();
    let n = objective.len() as f64;
    let inv_b = 1.0 / batch.len() as f64;
    let mut diff = vec![0.0; d];
    let mut corr = vec![0.0; d];
    let mut mean_current = vec![0.0; d];
    let mut mean_previous = vec![0.0; d];
    let mut grads_current = Vec::with_capacity(batch.len());
    for &k in batch {
        let gc = objective.component_grad(k, x_t);
        let gp = objective.component_grad(k, x_prev);
        for j in 0..d {
            diff[j] += gc[j] - gp[j];
            corr[j] += gp[j] - z_table[k][j];
            mean_current[j] += gc[j];
            mean_previous[j] += gp[j];
        }
        grads_current.push(gc);
    }
    vector::scale(inv_b, &mut mean_current);
    vector::scale(inv_b, &mut mean_previous);
    let u = (0..d)
        .map(|j| diff[j] * inv_b + (1.0 - beta) * u_prev[j] + beta * (corr[j] * inv_b + z_sum[j] / n))
        .collect();
    ZeroSarahOutput {
        u,
        grads_current,
        mean_current,
        mean_previous,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimOptions {
    pub seed: u64,
    pub workers: usize,
    /// Common initial iterate; `DEFAULT_X0` fill when absent.
    pub x0: Option<Vec<f64>>,
    /// Keep a [`Snapshot`] of every round.
    pub snapshots: bool,
    /// Maintain a uniformly drawn output iterate over all nodes and rounds.
    pub random_output: bool,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions {
            seed: 0,
            workers: 1,
            x0: None,
            snapshots: false,
            random_output: false,
        }
    }
}

pub struct Simulation<'a> {
    algorithm: Algorithm,
    problem: &'a Problem,
    mixing: &'a MixingMatrix,
    hp: HyperParams,
    nodes: Vec<NodeState>,
    steps: usize,
    pool: rayon::ThreadPool,
    snapshots: bool,
    snapshot: Option<Snapshot>,
    output: Option<OutputSampler>,
}

#[derive(Debug)]
struct OutputSampler {
    rng: NodeRng,
    seen: u64,
    chosen: Option<Vec<f64>>,
}

impl<'a> Simulation<'a> {
    /// Builds the network and runs the initialization round.
    pub fn new(
        algorithm: Algorithm,
        problem: &'a Problem,
        mixing: &'a MixingMatrix,
        hp: HyperParams,
        options: &SimOptions,
    ) -> Result<Self> {
        let m = problem.node_count();
        if mixing.node_count() != m {
            return Err(Error::shape(format!("mixing matrix over {m} nodes"), mixing.node_count()));
        }
        hp.validate(problem.components())?;
        if options.workers == 0 {
            return Err(Error::InvalidParameter("workers must be >= 1".into()));
        }
        let d = problem.dim();
        let x0 = options.x0.clone().unwrap_or_else(|| vec![DEFAULT_X0; d]);
        if x0.len() != d {
            return Err(Error::shape(format!("x0 of dimension {d}"), x0.len()));
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(options.workers)
            .build()
            .map_err(|e| Error::InvalidParameter(format!("cannot build worker pool: {e}")))?;
        let nodes = (0..m)
            .map(|i| NodeState::new(&x0, &hp.adaptive, NodeRng::new(options.seed, i)))
            .collect();
        let output = options.random_output.then(|| OutputSampler {
            rng: NodeRng::stream(options.seed, STREAM_OUTPUT),
            seen: 0,
            chosen: None,
        });
        let mut sim = Simulation {
            algorithm,
            problem,
            mixing,
            hp,
            nodes,
            steps: 0,
            pool,
            snapshots: options.snapshots,
            snapshot: None,
            output,
        };
        match algorithm {
            Algorithm::AdaMdos => sim.init_adamdos(),
            Algorithm::AdaMdof => sim.init_adamdof(),
            Algorithm::Dpsgd => {}
        }
        Ok(sim)
    }

    fn init_adamdos(&mut self) {
        let (n, b) = (self.problem.components(), self.hp.batch);
        let problem = self.problem;
        self.pool.install(|| {
            self.nodes.par_iter_mut().enumerate().for_each(|(i, node)| {
                let batch = node.draw(n, b);
                node.u = problem.node(i).minibatch_grad(&batch, &node.x);
                node.grad_cur = node.u.clone();
                node.counters.grad_evals += b as u64;
            });
        });
        let us: Vec<Vec<f64>> = self.nodes.iter().map(|s| s.u.clone()).collect();
        for (i, node) in self.nodes.iter_mut().enumerate() {
            node.w = self.mixing.mix_row(i, &us);
        }
    }

    fn init_adamdof(&mut self) {
        let (n, d) = (self.problem.components(), self.problem.dim());
        for node in &mut self.nodes {
            node.z_table = vec![vec![0.0; d]; n];
            node.z_sum = vec![0.0; d];
        }
        if self.snapshots {
            self.snapshot = Some(self.capture(0, true));
        }
    }

    fn capture(&self, t: usize, finite_sum: bool) -> Snapshot {
        let field = |f: fn(&NodeState) -> &Vec<f64>| self.nodes.iter().map(|s| f(s).clone()).collect();
        Snapshot {
            t,
            x: field(|s| &s.x_prev),
            u: field(|s| &s.u),
            w: field(|s| &s.w),
            g: field(|s| &s.g),
            z: finite_sum.then(|| self.nodes.iter().map(|s| s.z_table.clone()).collect()),
        }
    }

    /// Runs one synchronous round.
    pub fn step(&mut self) -> Result<()> {
        match self.algorithm {
            Algorithm::AdaMdos => self.step_adamdos()?,
            Algorithm::AdaMdof => self.step_adamdof()?,
            Algorithm::Dpsgd => self.step_dpsgd(),
        }
        self.steps += 1;
        self.check_finite()?;
        if let Some(out) = &mut self.output {
            for node in &self.nodes {
                out.seen += 1;
                if out.rng.inner().random_range(0..out.seen) == 0 {
                    out.chosen = Some(node.x.clone());
                }
            }
        }
        Ok(())
    }

    fn step_adamdos(&mut self) -> Result<()> {
        let (n, b) = (self.problem.components(), self.hp.batch);
        let gamma = self.hp.gamma;
        let eta = self.hp.eta.value(self.hp.horizon);
        let beta = self.hp.beta.value(self.hp.horizon);
        let has_prev = self.steps > 0;
        let (problem, mixing) = (self.problem, self.mixing);
        let xs: Vec<Vec<f64>> = self.nodes.iter().map(|s| s.x.clone()).collect();
        let before = self
            .snapshots
            .then(|| (self.nodes.iter().map(|s| s.u.clone()).collect::<Vec<_>>(), self.nodes.iter().map(|s| s.w.clone()).collect::<Vec<_>>()));

        self.pool.install(|| {
            self.nodes.par_iter_mut().enumerate().try_for_each(|(i, node)| -> Result<()> {
                let prev = has_prev.then_some((node.x_prev.as_slice(), node.grad_old.as_slice()));
                node.adaptive.observe(&node.x, &node.grad_cur, prev)?;
                node.g = node.adaptive.apply_inverse(&node.w);
                let mut x_tilde = mixing.mix_row(i, &xs);
                vector::axpy(-gamma, &node.g, &mut x_tilde);
                let x_new: Vec<f64> = node.x.iter().zip(&x_tilde).map(|(x, xt)| x + eta * (xt - x)).collect();

                let batch = node.draw(n, b);
                node.counters.iteration_samples += b as u64;
                node.counters.grad_evals += 2 * b as u64;
                let objective = problem.node(i);
                let grad_new = objective.minibatch_grad(&batch, &x_new);
                let grad_old = objective.minibatch_grad(&batch, &node.x);
                let u_new = storm_estimate(&grad_new, &node.u, &grad_old, beta);

                node.delta_u = vector::sub(&u_new, &node.u);
                node.u = u_new;
                node.x_tilde = x_tilde;
                node.x_prev = std::mem::replace(&mut node.x, x_new);
                node.grad_cur = grad_new;
                node.grad_old = grad_old;
                Ok(())
            })
        })?;

        if let Some((us, ws)) = before {
            self.snapshot = Some(Snapshot {
                t: self.steps,
                x: xs,
                u: us,
                w: ws,
                g: self.nodes.iter().map(|s| s.g.clone()).collect(),
                z: None,
            });
        }
        self.mix_tracking();
        Ok(())
    }

    fn step_adamdof(&mut self) -> Result<()> {
        let (n, b) = (self.problem.components(), self.hp.batch);
        let gamma = self.hp.gamma;
        let eta = self.hp.eta.value(self.hp.horizon);
        let beta = self.hp.beta.value(self.hp.horizon);
        let (problem, mixing) = (self.problem, self.mixing);

        self.pool.install(|| {
            self.nodes.par_iter_mut().enumerate().for_each(|(i, node)| {
                let batch = node.draw(n, b);
                node.counters.iteration_samples += b as u64;
                node.counters.grad_evals += 2 * b as u64;
                let out = zerosarah_estimate(
                    problem.node(i),
                    &batch,
                    &node.x,
                    &node.x_prev,
                    &node.u,
                    &node.z_table,
                    &node.z_sum,
                    beta,
                );
                node.delta_u = vector::sub(&out.u, &node.u);
                node.u = out.u;
                node.batch = batch;
                node.batch_grads = out.grads_current;
                node.grad_cur = out.mean_current;
                node.mean_prev = out.mean_previous;
            });
        });
        self.mix_tracking();

        let xs: Vec<Vec<f64>> = self.nodes.iter().map(|s| s.x.clone()).collect();
        self.pool.install(|| {
            self.nodes.par_iter_mut().enumerate().try_for_each(|(i, node)| -> Result<()> {
                node.adaptive.observe(&node.x, &node.grad_cur, Some((&node.x_prev, &node.mean_prev)))?;
                node.g = node.adaptive.apply_inverse(&node.w);
                let mut x_tilde = mixing.mix_row(i, &xs);
                vector::axpy(-gamma, &node.g, &mut x_tilde);
                let x_new: Vec<f64> = node.x.iter().zip(&x_tilde).map(|(x, xt)| x + eta * (xt - x)).collect();
                for (k, grad) in node.batch.iter().zip(std::mem::take(&mut node.batch_grads)) {
                    let old = std::mem::replace(&mut node.z_table[*k], grad);
                    for ((s, new), old) in node.z_sum.iter_mut().zip(&node.z_table[*k]).zip(&old) {
                        *s += new - old;
                    }
                }
                node.x_tilde = x_tilde;
                node.x_prev = std::mem::replace(&mut node.x, x_new);
                Ok(())
            })
        })?;

        if self.snapshots {
            self.snapshot = Some(self.capture(self.steps + 1, true));
        }
        Ok(())
    }

    fn step_dpsgd(&mut self) {
        let (n, b) = (self.problem.components(), self.hp.batch);
        let gamma = self.hp.gamma;
        let (problem, mixing) = (self.problem, self.mixing);
        let xs: Vec<Vec<f64>> = self.nodes.iter().map(|s| s.x.clone()).collect();
        self.pool.install(|| {
            self.nodes.par_iter_mut().enumerate().for_each(|(i, node)| {
                let batch = node.draw(n, b);
                node.counters.iteration_samples += b as u64;
                node.counters.grad_evals += b as u64;
                let grad = problem.node(i).minibatch_grad(&batch, &node.x);
                let mut x_new = mixing.mix_row(i, &xs);
                vector::axpy(-gamma, &grad, &mut x_new);
                node.x_tilde = x_new.clone();
                node.x_prev = std::mem::replace(&mut node.x, x_new);
                node.g = grad.clone();
                node.u = grad.clone();
                node.w = grad;
            });
        });
    }

    /// `w_i ← Σ_j W_ij (w_j + u_j^{new} − u_j^{old})`
    fn mix_tracking(&mut self) {
        let pre: Vec<Vec<f64>> = self
            .nodes
            .iter()
            .map(|s| s.w.iter().zip(&s.delta_u).map(|(w, du)| w + du).collect())
            .collect();
        for (i, node) in self.nodes.iter_mut().enumerate() {
            node.w = self.mixing.mix_row(i, &pre);
        }
    }

    fn check_finite(&self) -> Result<()> {
        for (i, node) in self.nodes.iter().enumerate() {
            for (quantity, v) in [("x", &node.x), ("u", &node.u), ("w", &node.w)] {
                if !vector::all_finite(v) {
                    return Err(Error::Divergence {
                        node: i,
                        step: self.steps,
                        quantity,
                        trace: None,
                    });
                }
            }
        }
        Ok(())
    }

    pub fn algorithm(&self) -> Algorithm {
        self.algorithm
    }

    pub fn problem(&self) -> &Problem {
        self.problem
    }

    pub fn mixing(&self) -> &MixingMatrix {
        self.mixing
    }

    pub fn hyper_params(&self) -> &HyperParams {
        &self.hp
    }

    /// Completed rounds.
    pub fn steps_done(&self) -> usize {
        self.steps
    }

    pub fn nodes(&self) -> &[NodeState] {
        &self.nodes
    }

    pub fn iterates(&self) -> Vec<Vec<f64>> {
        self.nodes.iter().map(|s| s.x.clone()).collect()
    }

    pub fn mean_iterate(&self) -> Vec<f64> {
        vector::mean(&self.iterates())
    }

    pub fn estimators(&self) -> Vec<Vec<f64>> {
        self.nodes.iter().map(|s| s.u.clone()).collect()
    }

    pub fn tracked(&self) -> Vec<Vec<f64>> {
        self.nodes.iter().map(|s| s.w.clone()).collect()
    }

    /// The iterate each node's estimator `u` refers to: the current one for
    /// the stochastic method, the previous one otherwise.
    pub fn estimator_points(&self) -> Vec<Vec<f64>> {
        self.nodes
            .iter()
            .map(|s| match self.algorithm {
                Algorithm::AdaMdos => s.x.clone(),
                Algorithm::AdaMdof | Algorithm::Dpsgd => s.x_prev.clone(),
            })
            .collect()
    }

    /// State of the last completed round, paired with [`Simulation::iterates`].
    pub fn snapshot(&self) -> Option<&Snapshot> {
        self.snapshot.as_ref()
    }

    pub fn counters(&self) -> Vec<Counters> {
        self.nodes.iter().map(|s| s.counters).collect()
    }

    pub fn random_output(&self) -> Option<&[f64]> {
        self.output.as_ref().and_then(|o| o.chosen.as_deref())
    }

    pub fn metrics(&self) -> MetricRow {
        let xs = self.iterates();
        let us = self.estimators();
        let n = self.problem.components() as f64;
        let c = self.nodes[0].counters;
        MetricRow {
            step: self.steps,
            epoch: c.iteration_samples as f64 / n,
            samples: c.iteration_samples,
            stationary_gap: diagnostics::stationary_gap(self.problem, &xs),
            loss: self.problem.loss(&vector::mean(&xs)),
            consensus_err: diagnostics::consensus_error(&xs),
            estimator_err: diagnostics::estimator_error(self.problem, &us, &self.estimator_points()),
            tracking_err: diagnostics::tracking_error(&self.tracked()),
        }
    }

    fn partial_trace(&self, rows: Vec<MetricRow>) -> Trace {
        let c = self.nodes[0].counters;
        Trace {
            algorithm: self.algorithm,
            components: self.problem.components(),
            steps: self.steps,
            rows,
            final_mean: self.mean_iterate(),
            final_iterates: self.iterates(),
            random_output: self.random_output().map(<[f64]>::to_vec),
            counters: c,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricRow {
    /// Completed rounds.
    pub step: usize,
    /// Index draws per node divided by `n`.
    pub epoch: f64,
    /// Index draws per node in update rounds.
    pub samples: u64,
    pub stationary_gap: f64,
    /// `F(x̄)`
    pub loss: f64,
    pub consensus_err: f64,
    pub estimator_err: f64,
    pub tracking_err: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RecordCadence {
    Step,
    /// Whenever the epoch counter crosses an integer.
    #[default]
    Epoch,
    Every(usize),
}

impl FromStr for RecordCadence {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "step" => Ok(RecordCadence::Step),
            "epoch" => Ok(RecordCadence::Epoch),
            other => match other.parse::<usize>() {
                Ok(k) if k >= 1 => Ok(RecordCadence::Every(k)),
                _ => Err(Error::InvalidParameter(format!(
                    "record_every must be `step`, `epoch` or a positive integer, got `{other}`"
                ))),
            },
        }
    }
}

impl fmt::Display for RecordCadence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RecordCadence::Step => f.write_str("step"),
            RecordCadence::Epoch => f.write_str("epoch"),
            RecordCadence::Every(k) => write!(f, "{k}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub algorithm: Algorithm,
    /// Components per node `n`.
    pub components: usize,
    pub steps: usize,
    pub rows: Vec<MetricRow>,
    /// `x̄_T`
    pub final_mean: Vec<f64>,
    pub final_iterates: Vec<Vec<f64>>,
    pub random_output: Option<Vec<f64>>,
    /// Counters of node 0; every node runs the same schedule.
    pub counters: Counters,
}

impl Trace {
    /// Gradient evaluations per node divided by `n`.
    pub fn evaluation_epochs(&self) -> f64 {
        self.counters.grad_evals as f64 / self.components as f64
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunOptions {
    pub cadence: RecordCadence,
    pub sim: SimOptions,
}

/// Runs `hp.horizon` rounds, recording a [`MetricRow`] at the requested
/// cadence. `on_step` sees the state after initialization and after every
/// round.
pub fn run_with(
    algorithm: Algorithm,
    problem: &Problem,
    mixing: &MixingMatrix,
    hp: HyperParams,
    options: &RunOptions,
    on_step: &mut dyn FnMut(&Simulation<'_>) -> Result<()>,
) -> Result<Trace> {
    let horizon = hp.horizon;
    let mut sim = Simulation::new(algorithm, problem, mixing, hp, &options.sim)?;
    let n = problem.components() as u64;
    let mut rows = Vec::new();
    let mut last_epoch = 0;
    on_step(&sim)?;
    for _ in 0..horizon {
        if let Err(e) = sim.step() {
            return Err(match e {
                Error::Divergence { node, step, quantity, .. } => Error::Divergence {
                    node,
                    step,
                    quantity,
                    trace: Some(Box::new(sim.partial_trace(rows))),
                },
                other => other,
            });
        }
        on_step(&sim)?;
        let record = match options.cadence {
            RecordCadence::Step => true,
            RecordCadence::Every(k) => sim.steps_done() % k == 0,
            RecordCadence::Epoch => {
                let epoch = sim.nodes[0].counters.iteration_samples / n;
                let crossed = epoch > last_epoch;
                last_epoch = epoch;
                crossed
            }
        };
        if record {
            rows.push(sim.metrics());
        }
    }
    Ok(sim.partial_trace(rows))
}

pub fn run(
    algorithm: Algorithm,
    problem: &Problem,
    mixing: &MixingMatrix,
    hp: HyperParams,
    options: &RunOptions,
) -> Result<Trace> {
    run_with(algorithm, problem, mixing, hp, options, &mut |_| Ok(()))
}
