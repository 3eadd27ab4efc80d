//! Line-oriented `key = value` experiment configuration.
//!
//! ```text
//! # comments start with '#'
//! algorithm = adamdof
//! topology = ring
//! nodes = 5
//!
//! [dataset.synthetic]
//! n = 200
//! d = 20
//! ```
//!
//! A `[section]` header prefixes every following key with `section.`.
//! Unknown keys are rejected and every violation is reported at once.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::adaptive::{AdaptiveConfig, AdaptiveKind};
use crate::error::{Error, Result};
use crate::objective::{parse_libsvm, LabelPolicy, DEFAULT_LAMBDA};
use crate::optimizer::{Algorithm, HyperParams, RecordCadence, Schedule, DEFAULT_X0};
use crate::topology::TopologyKind;

pub const DEFAULT_GAMMA: f64 = 0.01;
pub const DEFAULT_ETA: f64 = 0.9;
pub const DEFAULT_ADAMDOS_BETA: f64 = 0.9;
pub const DEFAULT_HORIZON: usize = 1000;
pub const DEFAULT_NODES: usize = 5;
pub const DEFAULT_OUTPUT: &str = "trace.csv";

const KEYS: &[&str] = &[
    "algorithm",
    "topology",
    "nodes",
    "dataset.path",
    "dataset.labels",
    "dataset.synthetic.n",
    "dataset.synthetic.d",
    "dataset.synthetic.heterogeneity",
    "dataset.quadratic.n",
    "dataset.quadratic.d",
    "dataset.quadratic.heterogeneity",
    "lambda",
    "seed",
    "adaptive",
    "rho",
    "varrho",
    "gamma",
    "eta",
    "beta",
    "batch",
    "T",
    "record_every",
    "output",
    "workers",
    "diagnostics",
    "x0",
    "theta",
];

#[derive(Debug, Clone, PartialEq)]
pub enum ObjectiveSource {
    Libsvm { path: PathBuf, labels: LabelPolicy },
    /// Planted logistic classification with `n` samples per node.
    Synthetic { n: usize, d: usize, heterogeneity: f64 },
    /// Strongly convex quadratic with `n` components per node.
    Quadratic { n: usize, d: usize, heterogeneity: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Diagnostic {
    Gap,
    Consensus,
    Estimator,
    Lyapunov,
}

impl FromStr for Diagnostic {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "gap" => Ok(Diagnostic::Gap),
            "consensus" => Ok(Diagnostic::Consensus),
            "estimator" => Ok(Diagnostic::Estimator),
            "lyapunov" => Ok(Diagnostic::Lyapunov),
            other => Err(format!(
                "unknown diagnostic `{other}` (expected gap | consensus | estimator | lyapunov)"
            )),
        }
    }
}

impl Diagnostic {
    fn name(self) -> &'static str {
        match self {
            Diagnostic::Gap => "gap",
            Diagnostic::Consensus => "consensus",
            Diagnostic::Estimator => "estimator",
            Diagnostic::Lyapunov => "lyapunov",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub algorithm: Algorithm,
    pub topology: TopologyKind,
    pub nodes: usize,
    pub objective: ObjectiveSource,
    /// Logistic regularization weight.
    pub lambda: f64,
    pub seed: u64,
    pub adaptive: AdaptiveKind,
    pub rho: f64,
    pub varrho: f64,
    pub gamma: f64,
    pub eta: Schedule,
    pub beta: Schedule,
    pub batch: usize,
    pub horizon: usize,
    pub record_every: RecordCadence,
    pub output: PathBuf,
    pub workers: usize,
    pub diagnostics: Vec<Diagnostic>,
    /// Fill value of the common initial iterate.
    pub x0: f64,
    pub theta: Option<f64>,
}

pub fn load_config(path: impl AsRef<Path>) -> Result<ExperimentConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text)
}

/// Parses and validates a configuration, filling defaults.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let mut errors = Vec::new();
    let raw = collect_pairs(text, &mut errors);
    let mut r = Reader {
        raw: &raw,
        errors: &mut errors,
    };

    let algorithm: Option<Algorithm> = r.required("algorithm");
    let topology: Option<TopologyKind> = r.required("topology");
    let nodes = r.optional("nodes").unwrap_or(DEFAULT_NODES);
    let objective = r.objective();
    let lambda = r.optional("lambda").unwrap_or(DEFAULT_LAMBDA);
    let seed = r.optional("seed").unwrap_or(0u64);
    let adaptive = r.optional("adaptive").unwrap_or(AdaptiveKind::Adam);
    let defaults = AdaptiveConfig::default();
    let rho = r.optional("rho").unwrap_or(defaults.rho);
    let varrho = r.optional("varrho").unwrap_or(defaults.varrho);
    let gamma = r.optional("gamma").unwrap_or(DEFAULT_GAMMA);
    let eta = r.optional("eta").unwrap_or(Schedule::Constant(DEFAULT_ETA));
    let beta: Option<Schedule> = r.optional("beta");
    let batch: Option<usize> = r.optional("batch");
    let horizon = r.optional("T").unwrap_or(DEFAULT_HORIZON);
    let record_every = r.optional("record_every").unwrap_or(RecordCadence::Epoch);
    let output = r.optional::<String>("output").map_or_else(|| PathBuf::from(DEFAULT_OUTPUT), PathBuf::from);
    let workers = r.optional("workers").unwrap_or(1usize);
    let diagnostics = r.diagnostics();
    let x0 = r.optional("x0").unwrap_or(DEFAULT_X0);
    let theta: Option<f64> = r.optional("theta");

    let (Some(algorithm), Some(topology), Some(objective)) = (algorithm, topology, objective) else {
        return Err(Error::Config(errors));
    };
    let n = match components(&objective, nodes) {
        Ok(n) => Some(n),
        Err(e) => {
            errors.push(e.to_string());
            None
        }
    };
    let n_or_one = n.unwrap_or(1);
    let batch = batch.unwrap_or(match algorithm {
        Algorithm::AdaMdof => (n_or_one as f64).sqrt().ceil() as usize,
        Algorithm::AdaMdos | Algorithm::Dpsgd => 1,
    });
    let beta = beta.unwrap_or(match algorithm {
        Algorithm::AdaMdof => Schedule::Constant(batch as f64 / n_or_one as f64),
        Algorithm::AdaMdos | Algorithm::Dpsgd => Schedule::Constant(DEFAULT_ADAMDOS_BETA),
    });

    let cfg = ExperimentConfig {
        algorithm,
        topology,
        nodes,
        objective,
        lambda,
        seed,
        adaptive,
        rho,
        varrho,
        gamma,
        eta,
        beta,
        batch,
        horizon,
        record_every,
        output,
        workers,
        diagnostics,
        x0,
        theta,
    };
    if let Some(n) = n {
        errors.extend(cfg.violations(n));
    }
    if errors.is_empty() {
        Ok(cfg)
    } else {
        Err(Error::Config(errors))
    }
}

/// Components per node implied by the objective source.
fn components(objective: &ObjectiveSource, nodes: usize) -> Result<usize> {
    match objective {
        ObjectiveSource::Synthetic { n, .. } | ObjectiveSource::Quadratic { n, .. } => Ok(*n),
        ObjectiveSource::Libsvm { path, labels } => {
            let total = parse_libsvm(path, *labels)?.len();
            Ok(total / nodes.max(1))
        }
    }
}

fn collect_pairs(text: &str, errors: &mut Vec<String>) -> BTreeMap<String, (usize, String)> {
    let mut raw = BTreeMap::new();
    let mut section = String::new();
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            section = name.trim().to_string();
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            errors.push(format!("line {lineno}: expected `key = value`, got `{line}`"));
            continue;
        };
        let key = key.trim();
        let full = if section.is_empty() {
            key.to_string()
        } else {
            format!("{section}.{key}")
        };
        if !KEYS.contains(&full.as_str()) {
            errors.push(format!("line {lineno}: unknown key `{full}`"));
            continue;
        }
        if raw.insert(full.clone(), (lineno, value.trim().to_string())).is_some() {
            errors.push(format!("line {lineno}: duplicate key `{full}`"));
        }
    }
    raw
}

struct Reader<'a> {
    raw: &'a BTreeMap<String, (usize, String)>,
    errors: &'a mut Vec<String>,
}

impl Reader<'_> {
    fn optional<T: FromStr>(&mut self, key: &str) -> Option<T>
    where
        T::Err: std::fmt::Display,
    {
        let (line, value) = self.raw.get(key)?;
        match value.parse() {
            Ok(v) => Some(v),
            Err(e) => {
                self.errors.push(format!("line {line}: `{key}`: {e}"));
                None
            }
        }
    }

    fn required<T: FromStr>(&mut self, key: &str) -> Option<T>
    where
        T::Err: std::fmt::Display,
    {
        if !self.raw.contains_key(key) {
            self.errors.push(format!("missing required key `{key}`"));
            return None;
        }
        self.optional(key)
    }

    fn has_prefix(&self, prefix: &str) -> bool {
        self.raw.keys().any(|k| k.starts_with(prefix))
    }

    fn objective(&mut self) -> Option<ObjectiveSource> {
        let sources = [
            self.has_prefix("dataset.path") || self.raw.contains_key("dataset.labels"),
            self.has_prefix("dataset.synthetic."),
            self.has_prefix("dataset.quadratic."),
        ];
        match sources.iter().filter(|s| **s).count() {
            0 => {
                self.errors.push(
                    "missing objective: set `dataset.path`, `dataset.synthetic.*` or `dataset.quadratic.*`".into(),
                );
                None
            }
            1 if sources[0] => {
                let path: Option<String> = self.required("dataset.path");
                let labels = match self.raw.get("dataset.labels").map(|(l, v)| (*l, v.as_str())) {
                    None | Some((_, "strict")) => LabelPolicy::Strict,
                    Some((_, "top-two")) => LabelPolicy::TopTwo,
                    Some((line, other)) => {
                        self.errors
                            .push(format!("line {line}: `dataset.labels` must be strict | top-two, got `{other}`"));
                        LabelPolicy::Strict
                    }
                };
                path.map(|p| ObjectiveSource::Libsvm {
                    path: PathBuf::from(p),
                    labels,
                })
            }
            1 => {
                let kind = if sources[1] { "synthetic" } else { "quadratic" };
                let n: Option<usize> = self.required(&format!("dataset.{kind}.n"));
                let d: Option<usize> = self.required(&format!("dataset.{kind}.d"));
                let heterogeneity = self.optional(&format!("dataset.{kind}.heterogeneity")).unwrap_or(1.0);
                let (n, d) = (n?, d?);
                Some(if sources[1] {
                    ObjectiveSource::Synthetic { n, d, heterogeneity }
                } else {
                    ObjectiveSource::Quadratic { n, d, heterogeneity }
                })
            }
            _ => {
                self.errors.push("more than one objective source given".into());
                None
            }
        }
    }

    fn diagnostics(&mut self) -> Vec<Diagnostic> {
        let Some((line, value)) = self.raw.get("diagnostics") else {
            return vec![Diagnostic::Gap, Diagnostic::Consensus, Diagnostic::Estimator];
        };
        let inner = value.trim().trim_start_matches('{').trim_end_matches('}');
        let mut out = Vec::new();
        for name in inner.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            match name.parse::<Diagnostic>() {
                Ok(d) if !out.contains(&d) => out.push(d),
                Ok(_) => {}
                Err(e) => self.errors.push(format!("line {line}: {e}")),
            }
        }
        out.sort();
        out
    }
}

impl ExperimentConfig {
    pub fn hyper_params(&self) -> HyperParams {
        HyperParams {
            gamma: self.gamma,
            eta: self.eta,
            beta: self.beta,
            batch: self.batch,
            horizon: self.horizon,
            adaptive: AdaptiveConfig {
                kind: self.adaptive,
                rho: self.rho,
                varrho: self.varrho,
            },
        }
    }

    pub fn lyapunov(&self) -> bool {
        self.diagnostics.contains(&Diagnostic::Lyapunov)
    }

    /// Every violated constraint given `n` components per node.
    pub fn violations(&self, n: usize) -> Vec<String> {
        let mut out = self.hyper_params().violations(n);
        let min_nodes = match self.topology {
            TopologyKind::Ring => 3,
            TopologyKind::Regular3 => 4,
            TopologyKind::Complete => 2,
        };
        if self.nodes < min_nodes {
            out.push(format!("topology {} needs nodes >= {min_nodes}, got {}", self.topology, self.nodes));
        }
        if n == 0 {
            out.push("the objective has no components per node".into());
        }
        match &self.objective {
            ObjectiveSource::Synthetic { d, heterogeneity, .. } | ObjectiveSource::Quadratic { d, heterogeneity, .. } => {
                if *d == 0 {
                    out.push("dataset dimension d must be >= 1".into());
                }
                if !(*heterogeneity >= 0.0 && heterogeneity.is_finite()) {
                    out.push(format!("heterogeneity must be finite and >= 0, got {heterogeneity}"));
                }
            }
            ObjectiveSource::Libsvm { .. } => {}
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            out.push(format!("lambda must be finite and >= 0, got {}", self.lambda));
        }
        if self.workers == 0 {
            out.push("workers must be >= 1".into());
        }
        if !self.x0.is_finite() {
            out.push("x0 must be finite".into());
        }
        if let Some(theta) = self.theta {
            if !(theta > 0.0) {
                out.push(format!("theta must be > 0, got {theta}"));
            }
        }
        if self.lyapunov() {
            if self.adaptive != AdaptiveKind::Identity {
                out.push("lyapunov diagnostics need `adaptive = identity`".into());
            }
            if self.algorithm == Algorithm::Dpsgd {
                out.push("lyapunov diagnostics are defined for adamdos and adamdof only".into());
            }
            if self.batch != n {
                out.push(format!(
                    "lyapunov diagnostics need deterministic gradients: set batch = n = {n}"
                ));
            }
        }
        out
    }

    /// Serializes every field, defaults included, in a fixed key order.
    pub fn to_config_string(&self) -> String {
        let mut s = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        put("algorithm", self.algorithm.to_string());
        put("topology", self.topology.to_string());
        put("nodes", self.nodes.to_string());
        match &self.objective {
            ObjectiveSource::Libsvm { path, labels } => {
                put("dataset.path", path.display().to_string());
                put(
                    "dataset.labels",
                    match labels {
                        LabelPolicy::Strict => "strict",
                        LabelPolicy::TopTwo => "top-two",
                    }
                    .into(),
                );
            }
            ObjectiveSource::Synthetic { n, d, heterogeneity } => {
                put("dataset.synthetic.n", n.to_string());
                put("dataset.synthetic.d", d.to_string());
                put("dataset.synthetic.heterogeneity", heterogeneity.to_string());
            }
            ObjectiveSource::Quadratic { n, d, heterogeneity } => {
                put("dataset.quadratic.n", n.to_string());
                put("dataset.quadratic.d", d.to_string());
                put("dataset.quadratic.heterogeneity", heterogeneity.to_string());
            }
        }
        put("lambda", self.lambda.to_string());
        put("seed", self.seed.to_string());
        put("adaptive", self.adaptive.to_string());
        put("rho", self.rho.to_string());
        put("varrho", self.varrho.to_string());
        put("gamma", self.gamma.to_string());
        put("eta", self.eta.to_string());
        put("beta", self.beta.to_string());
        put("batch", self.batch.to_string());
        put("T", self.horizon.to_string());
        put("record_every", self.record_every.to_string());
        put("output", self.output.display().to_string());
        put("workers", self.workers.to_string());
        put(
            "diagnostics",
            format!(
                "{{{}}}",
                self.diagnostics.iter().map(|d| d.name()).collect::<Vec<_>>().join(", ")
            ),
        );
        put("x0", self.x0.to_string());
        if let Some(theta) = self.theta {
            put("theta", theta.to_string());
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "\
algorithm = adamdos
topology = ring
seed = 3
[dataset.synthetic]
n = 50
d = 4
";

    #[test]
    fn minimal_config_fills_defaults_and_round_trips() {
        let cfg = parse_config(MINIMAL).unwrap();
        assert_eq!(cfg.nodes, DEFAULT_NODES);
        assert_eq!(cfg.batch, 1);
        assert_eq!(cfg.beta, Schedule::Constant(0.9));
        assert_eq!(cfg.rho, 1e-3);
        let text = cfg.to_config_string();
        let again = parse_config(&text).unwrap();
        assert_eq!(cfg, again);
        assert_eq!(text, again.to_config_string());
    }

    #[test]
    fn finite_sum_defaults_follow_square_root_rule() {
        let cfg = parse_config(&MINIMAL.replace("adamdos", "adamdof")).unwrap();
        assert_eq!(cfg.batch, 8);
        assert_eq!(cfg.beta, Schedule::Constant(8.0 / 50.0));
    }

    #[test]
    fn zero_batch_is_rejected_with_constraint() {
        let err = parse_config(&format!("{MINIMAL}[]\nbatch = 0\n")).unwrap_err();
        assert!(err.to_string().contains("1 <= b <= n"), "{err}");
    }

    #[test]
    fn all_violations_are_listed() {
        let text = "algorithm = adamdos\ntopology = ring\nnodes = 2\nbogus = 1\ngamma = -1\ndataset.synthetic.n = 10\ndataset.synthetic.d = 2\neta = 3\n";
        let Err(Error::Config(list)) = parse_config(text) else {
            panic!("expected a config error");
        };
        assert!(list.iter().any(|e| e.contains("unknown key `bogus`")));
        assert!(list.iter().any(|e| e.contains("gamma")));
        assert!(list.iter().any(|e| e.contains("eta")));
        assert!(list.iter().any(|e| e.contains("nodes >= 3")));
    }

    #[test]
    fn lyapunov_mode_constraints() {
        let text = format!("{MINIMAL}[]\ndiagnostics = {{gap, lyapunov}}\n");
        let Err(Error::Config(list)) = parse_config(&text) else {
            panic!("expected a config error");
        };
        assert!(list.iter().any(|e| e.contains("adaptive = identity")));
        assert!(list.iter().any(|e| e.contains("batch = n")));
        let ok = format!("{MINIMAL}[]\ndiagnostics = {{lyapunov}}\nadaptive = identity\nbatch = 50\n");
        assert!(parse_config(&ok).unwrap().lyapunov());
    }

    #[test]
    fn missing_objective_and_bad_values() {
        let err = parse_config("algorithm = adamdos\ntopology = ring\n").unwrap_err();
        assert!(err.to_string().contains("missing objective"));
        let err = parse_config(&MINIMAL.replace("ring", "star")).unwrap_err();
        assert!(err.to_string().contains("unknown topology"));
        let err = parse_config(&format!("{MINIMAL}[]\ndiagnostics = {{gap, colour}}\n")).unwrap_err();
        assert!(err.to_string().contains("colour"));
    }

    #[test]
    fn schedules_and_cadence_round_trip() {
        let text = format!("{MINIMAL}[]\nbeta = 1.5/T^{{2/3}}\nrecord_every = 7\nT = 27\ntheta = 0.5\n");
        let cfg = parse_config(&text).unwrap();
        assert_eq!(cfg.beta, Schedule::PowerT(1.5));
        assert_eq!(cfg.record_every, RecordCadence::Every(7));
        assert_eq!(parse_config(&cfg.to_config_string()).unwrap(), cfg);
    }
}
