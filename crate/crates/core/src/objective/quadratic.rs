use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::vector;

use super::LocalObjective;

/// Symmetric tolerance for accepting `Q`.
const SYM_TOL: f64 = 1e-12;

/// `f(x) = (1/n) Σ_k ½xᵀQ_k x + c_kᵀx`, a deterministic diagnostic objective
/// with exact gradients and a known smoothness constant.
#[derive(Debug, Clone)]
pub struct QuadraticObjective {
    d: usize,
    /// Row-major `d × d` per component.
    qs: Vec<Vec<f64>>,
    cs: Vec<Vec<f64>>,
    smoothness: f64,
}

impl QuadraticObjective {
    /// Builds from `(Q_k, c_k)` pairs; each `Q_k` must be symmetric PSD.
    pub fn new(d: usize, components: Vec<(Vec<f64>, Vec<f64>)>) -> Result<Self> {
        if components.is_empty() || d == 0 {
            return Err(Error::InvalidParameter("quadratic needs d >= 1 and n >= 1".into()));
        }
        let mut qs = Vec::with_capacity(components.len());
        let mut cs = Vec::with_capacity(components.len());
        let mut smoothness = 0.0_f64;
        for (k, (q, c)) in components.into_iter().enumerate() {
            if q.len() != d * d || c.len() != d {
                return Err(Error::shape(format!("{d}x{d} Q and length-{d} c"), format!("component {k}")));
            }
            for i in 0..d {
                for j in 0..i {
                    if (q[i * d + j] - q[j * d + i]).abs() > SYM_TOL {
                        return Err(Error::InvalidParameter(format!(
                            "Q of component {k} is not symmetric at ({i},{j})"
                        )));
                    }
                }
            }
            let eig = DMatrix::from_row_slice(d, d, &q).symmetric_eigenvalues();
            let lo = eig.min();
            if lo < -1e-10 {
                return Err(Error::InvalidParameter(format!(
                    "Q of component {k} is not positive semidefinite (eigenvalue {lo})"
                )));
            }
            smoothness = smoothness.max(eig.max());
            qs.push(q);
            cs.push(c);
        }
        Ok(QuadraticObjective { d, qs, cs, smoothness })
    }

    /// Single-component objective `½xᵀQx + cᵀx`.
    pub fn single(q: Vec<f64>, c: Vec<f64>) -> Result<Self> {
        let d = c.len();
        Self::new(d, vec![(q, c)])
    }

    /// `(mean Q_k, mean c_k)`
    pub fn averaged(&self) -> (Vec<f64>, Vec<f64>) {
        let n = self.qs.len() as f64;
        let mut q = vec![0.0; self.d * self.d];
        let mut c = vec![0.0; self.d];
        for (qk, ck) in self.qs.iter().zip(&self.cs) {
            vector::axpy(1.0 / n, qk, &mut q);
            vector::axpy(1.0 / n, ck, &mut c);
        }
        (q, c)
    }
}

impl LocalObjective for QuadraticObjective {
    fn dim(&self) -> usize {
        self.d
    }

    fn len(&self) -> usize {
        self.qs.len()
    }

    fn component_loss(&self, k: usize, x: &[f64]) -> f64 {
        let q = &self.qs[k];
        let quad: f64 = (0..self.d)
            .map(|i| x[i] * vector::dot(&q[i * self.d..(i + 1) * self.d], x))
            .sum();
        0.5 * quad + vector::dot(&self.cs[k], x)
    }

    fn add_component_grad(&self, k: usize, x: &[f64], scale: f64, out: &mut [f64]) {
        let q = &self.qs[k];
        for (i, o) in out.iter_mut().enumerate() {
            *o += scale * (vector::dot(&q[i * self.d..(i + 1) * self.d], x) + self.cs[k][i]);
        }
    }

    fn smoothness(&self) -> Option<f64> {
        Some(self.smoothness)
    }
}

/// Per-node single-component quadratics, plus the global minimizer and
/// optimal value when `Σ Q_i ≻ 0`.
pub fn quadratic_objective(
    qs: Vec<Vec<f64>>,
    cs: Vec<Vec<f64>>,
) -> Result<(Vec<QuadraticObjective>, Option<(Vec<f64>, f64)>)> {
    if qs.len() != cs.len() {
        return Err(Error::shape(format!("{} c vectors", qs.len()), cs.len()));
    }
    let nodes = qs
        .into_iter()
        .zip(cs)
        .map(|(q, c)| QuadraticObjective::single(q, c))
        .collect::<Result<Vec<_>>>()?;
    let optimum = global_minimizer(&nodes);
    Ok((nodes, optimum))
}

/// Minimizer of `(1/m) Σ_i f^i` and its value, if the averaged Hessian is
/// positive definite.
pub(crate) fn global_minimizer(nodes: &[QuadraticObjective]) -> Option<(Vec<f64>, f64)> {
    let d = nodes.first()?.d;
    let m = nodes.len() as f64;
    let mut q = vec![0.0; d * d];
    let mut c = vec![0.0; d];
    for node in nodes {
        let (qi, ci) = node.averaged();
        vector::axpy(1.0 / m, &qi, &mut q);
        vector::axpy(1.0 / m, &ci, &mut c);
    }
    let chol = DMatrix::from_row_slice(d, d, &q).cholesky()?;
    let x = chol.solve(&(-DVector::from_vec(c))).as_slice().to_vec();
    let value = nodes.iter().map(|n| n.loss(&x)).sum::<f64>() / m;
    Some((x, value))
}
