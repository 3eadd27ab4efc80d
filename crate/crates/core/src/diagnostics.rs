//! Metrics, theoretical step-size bounds, potential functions and the
//! exhaustive-enumeration oracles used by the property tests.
//!
//! Everything here is a pure function of its inputs.

use crate::error::{Error, Result};
use crate::objective::{LocalObjective, Problem};
use crate::optimizer::{storm_estimate, zerosarah_estimate, Snapshot};
use crate::vector;

/// Largest number of index sets [`zerosarah_expectation`] will enumerate.
pub const ENUMERATION_LIMIT: u128 = 100_000;

/// `‖∇F(x̄)‖ + (1/m) Σ_i ‖x̄ − x_i‖`
pub fn stationary_gap(problem: &Problem, xs: &[Vec<f64>]) -> f64 {
    let center = vector::mean(xs);
    let spread: f64 = xs.iter().map(|x| vector::dist_sq(x, &center).sqrt()).sum::<f64>() / xs.len() as f64;
    vector::norm(&problem.grad(&center)) + spread
}

/// `(1/m) Σ_i ‖x_i − x̄‖²`
pub fn consensus_error(xs: &[Vec<f64>]) -> f64 {
    vector::spread(xs)
}

/// `(1/m) Σ_i ‖w_i − w̄‖²`
pub fn tracking_error(ws: &[Vec<f64>]) -> f64 {
    vector::spread(ws)
}

/// `(1/m) Σ_i ‖u_i − ∇f^i(p_i)‖²`
pub fn estimator_error(problem: &Problem, us: &[Vec<f64>], points: &[Vec<f64>]) -> f64 {
    us.iter()
        .zip(points)
        .enumerate()
        .map(|(i, (u, p))| vector::dist_sq(u, &problem.node(i).full_grad(p)))
        .sum::<f64>()
        / us.len() as f64
}

/// `θ = L·√(58/144)`, the value at which both step-size caps coincide.
pub fn default_theta(l: f64) -> f64 {
    l * (58.0f64 / 144.0).sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct TheoryParams {
    /// Smoothness constant.
    pub l: f64,
    /// Gradient-noise bound.
    pub sigma: f64,
    /// Optional bound on stochastic gradient norms.
    pub grad_bound: Option<f64>,
    pub theta: f64,
    pub rho: f64,
    pub nu: f64,
    /// Step size used for the `η` caps and `G`; the cap `γ_max` when absent.
    pub gamma: Option<f64>,
    /// Momentum weight used for `G`; the cap `η_max` when absent.
    pub eta: Option<f64>,
    pub beta: f64,
    /// `β_0`, the estimator weight of the first round.
    pub beta0: f64,
    pub n: usize,
    pub b: usize,
    pub m: usize,
    /// `F(x̄_1) − F*`, when `F*` is known.
    pub initial_gap: Option<f64>,
    /// `(1/m) Σ_i (1/n) Σ_k ‖∇f^i_k(x_0)‖²`, finite-sum `G` only.
    pub initial_grad_sq: Option<f64>,
}

impl TheoryParams {
    /// Parameters with `θ` at its default and no optional quantities.
    pub fn new(l: f64, rho: f64, nu: f64, beta: f64) -> Self {
        TheoryParams {
            l,
            sigma: 0.0,
            grad_bound: None,
            theta: default_theta(l),
            rho,
            nu,
            gamma: None,
            eta: None,
            beta,
            beta0: beta,
            n: 1,
            b: 1,
            m: 1,
            initial_gap: None,
            initial_grad_sq: None,
        }
    }

    /// `29γηL²/(6ρ)`
    pub fn theta_floor(&self, gamma: f64, eta: f64) -> f64 {
        29.0 * gamma * eta * self.l * self.l / (6.0 * self.rho)
    }

    fn check(&self) -> Result<()> {
        if !(self.nu >= 0.0 && self.nu < 1.0) {
            return Err(Error::Constraint(format!("nu must lie in [0, 1), got {}", self.nu)));
        }
        if !(self.l > 0.0 && self.rho > 0.0 && self.theta > 0.0) {
            return Err(Error::Constraint("L, rho and theta must be positive".into()));
        }
        if !(self.beta > 0.0 && self.beta <= 1.0 && self.beta0 > 0.0 && self.beta0 <= 1.0) {
            return Err(Error::Constraint(format!(
                "beta and beta0 must lie in (0, 1], got {} and {}",
                self.beta, self.beta0
            )));
        }
        if let (Some(gamma), Some(eta)) = (self.gamma, self.eta) {
            let floor = self.theta_floor(gamma, eta);
            if self.theta < floor {
                return Err(Error::Constraint(format!(
                    "theta = {} is below 29·gamma·eta·L²/(6·rho) = {floor}",
                    self.theta
                )));
            }
        }
        Ok(())
    }

    fn gamma_max(&self) -> f64 {
        let s = 1.0 - self.nu * self.nu;
        (self.rho * s / (48.0 * self.theta)).min(3.0 * self.rho * s * self.theta / (58.0 * self.l * self.l))
    }

    /// Second `η` cap, shared by both settings.
    fn eta_cap_theta(&self, gamma: f64, h: f64) -> f64 {
        let nu2 = self.nu * self.nu;
        (self.rho * (1.0 - nu2) * self.theta).sqrt() / (2.0 * self.l * (gamma * (3.0 + nu2)).sqrt() * h.sqrt())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoryBounds {
    pub gamma_max: f64,
    pub eta_max: f64,
    pub h: f64,
    /// `None` when `F*` (or, for finite sums, the initial gradient energy)
    /// is unknown.
    pub g: Option<f64>,
}

/// Step-size caps, `H` and `G` for the stochastic method.
pub fn theoretical_params_stochastic(tp: &TheoryParams) -> Result<TheoryBounds> {
    tp.check()?;
    let (nu, rho, l) = (tp.nu, tp.rho, tp.l);
    let nu2 = nu * nu;
    let gamma_max = tp.gamma_max();
    let gamma = tp.gamma.unwrap_or(gamma_max);
    let h = 9.0 / (2.0 * tp.beta) + 8.0 * nu2 / ((1.0 - nu) * (1.0 - nu));
    let first = rho * (1.0 - nu2).sqrt() / (4.0 * l * gamma * (3.0 * (1.0 + nu2)).sqrt() * h.sqrt());
    let eta_max = first.min(tp.eta_cap_theta(gamma, h));
    let eta = tp.eta.unwrap_or(eta_max);
    let rho2 = rho * rho;
    let g = tp.initial_gap.map(|gap| {
        gap / (rho * gamma * eta)
            + (4.0 * nu2 / (rho2 * (1.0 - nu)) + 9.0 / (2.0 * rho2 * tp.beta0) - 9.0 / (2.0 * rho2)) * tp.sigma * tp.sigma
    });
    Ok(TheoryBounds {
        gamma_max,
        eta_max,
        h,
        g,
    })
}

/// Step-size caps, `H` and `G` for the finite-sum method.
pub fn theoretical_params_finitesum(tp: &TheoryParams) -> Result<TheoryBounds> {
    tp.check()?;
    if tp.b < 1 || tp.b > tp.n {
        return Err(Error::Constraint(format!("batch must satisfy 1 <= b <= n, got b = {}, n = {}", tp.b, tp.n)));
    }
    let (nu, rho, l, beta) = (tp.nu, tp.rho, tp.l, tp.beta);
    let (n, b) = (tp.n as f64, tp.b as f64);
    let nu2 = nu * nu;
    let r = nu2 / ((1.0 - nu) * (1.0 - nu));
    let gamma_max = tp.gamma_max();
    let gamma = tp.gamma.unwrap_or(gamma_max);
    let h = 9.0 / (b * beta) + 6.0 * r / b + 4.0 * n * n * beta * beta / (b * b * b) * (9.0 / beta + 9.0 * r) + 3.0 * r;
    let first = rho * (1.0 - nu2).sqrt() / (2.0 * l * gamma * (6.0 * (1.0 + nu2)).sqrt() * h.sqrt());
    let eta_max = first.min(tp.eta_cap_theta(gamma, h));
    let eta = tp.eta.unwrap_or(eta_max);
    let rho2 = rho * rho;
    let b0 = tp.beta0;
    let g = tp.initial_gap.zip(tp.initial_grad_sq).map(|(gap, energy)| {
        gap / (rho * gamma * eta)
            + (18.0 * b0 / rho2 + 18.0 * b0 * b0 * r / rho2 + 3.0 * r / rho2 + 9.0 / (2.0 * rho2 * b0) - 9.0 / (2.0 * rho2))
                * energy
    });
    Ok(TheoryBounds {
        gamma_max,
        eta_max,
        h,
        g,
    })
}

/// Which printed constants the consensus and tracking penalties use: those
/// of the potential's definition, or those of the one-step recursion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LyapunovForm {
    Definition,
    Recursion,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LyapunovCoeffs {
    pub lambda: f64,
    pub vartheta: f64,
    pub chi: f64,
    /// z-table weight, finite-sum potential only.
    pub alpha: Option<f64>,
    pub theta: f64,
    pub gamma: f64,
    pub eta: f64,
    pub rho: f64,
    pub l: f64,
}

impl LyapunovCoeffs {
    fn base(gamma: f64, eta: f64, rho: f64, beta: f64, nu: f64, theta: f64, l: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&nu) {
            return Err(Error::Constraint(format!("nu must lie in [0, 1), got {nu}")));
        }
        if !(beta > 0.0 && beta <= 1.0) {
            return Err(Error::Constraint(format!("beta must lie in (0, 1], got {beta}")));
        }
        let floor = 29.0 * gamma * eta * l * l / (6.0 * rho);
        if theta < floor {
            return Err(Error::Constraint(format!(
                "theta = {theta} is below 29·gamma·eta·L²/(6·rho) = {floor}"
            )));
        }
        let lambda = 9.0 * gamma * eta / (2.0 * rho * beta);
        let vartheta = gamma * eta / (rho * (1.0 - nu));
        Ok(LyapunovCoeffs {
            lambda,
            vartheta,
            chi: 0.0,
            alpha: None,
            theta,
            gamma,
            eta,
            rho,
            l,
        })
    }

    /// `λ = 9γη/(2ρβ)`, `ϑ = γη/(ρ(1−ν))`, `χ = 4ϑν²/(1−ν)`.
    pub fn stochastic(gamma: f64, eta: f64, rho: f64, beta: f64, nu: f64, theta: f64, l: f64) -> Result<Self> {
        let mut c = Self::base(gamma, eta, rho, beta, nu, theta, l)?;
        c.chi = 4.0 * c.vartheta * nu * nu / (1.0 - nu);
        Ok(c)
    }

    /// As [`LyapunovCoeffs::stochastic`] with `χ = 3ϑν²/(1−ν)` and
    /// `α = (2nβ²/b²)(2λ + 9ϑν²/(1−ν))`.
    #[allow(clippy::too_many_arguments)]
    pub fn finite_sum(
        gamma: f64,
        eta: f64,
        rho: f64,
        beta: f64,
        nu: f64,
        theta: f64,
        l: f64,
        n: usize,
        b: usize,
    ) -> Result<Self> {
        let mut c = Self::base(gamma, eta, rho, beta, nu, theta, l)?;
        let tail = c.vartheta * nu * nu / (1.0 - nu);
        c.chi = 3.0 * tail;
        let (n, b) = (n as f64, b as f64);
        c.alpha = Some(2.0 * n * beta * beta / (b * b) * (2.0 * c.lambda + 9.0 * tail));
        Ok(c)
    }

    fn gen(&self) -> f64 {
        self.gamma * self.eta
    }

    /// Multiplier of `‖ū − mean ∇f^i(x^i)‖²`.
    pub fn mean_weight(&self) -> f64 {
        self.lambda - 9.0 * self.gen() / (2.0 * self.rho)
    }

    pub fn consensus_weight(&self, form: LyapunovForm) -> f64 {
        let c = self.gen() * self.l * self.l / self.rho;
        match form {
            LyapunovForm::Definition => self.theta - 19.0 * c / 4.0,
            LyapunovForm::Recursion => self.theta - 29.0 * c / 6.0,
        }
    }

    /// Tracking multiplier; `finite_sum` selects the finite-sum potential.
    pub fn tracking_weight(&self, form: LyapunovForm, finite_sum: bool) -> f64 {
        let c = self.gen() / self.rho;
        match (form, finite_sum) {
            (LyapunovForm::Definition, false) => self.vartheta - c / 4.0,
            _ => self.vartheta - 3.0 * c / 4.0,
        }
    }

    pub fn direction_weight(&self) -> f64 {
        self.rho * self.gen() / 6.0
    }
}

/// The individual quantities entering the potentials.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LyapunovTerms {
    /// `F(x̄_{t+1})`
    pub loss: f64,
    /// `‖ū_t − (1/m)Σ∇f^i(x^i_t)‖²`
    pub mean_error: f64,
    /// `(1/m)Σ‖u^i_t − ∇f^i(x^i_t)‖²`
    pub estimator_error: f64,
    /// `(1/m)Σ(1/n)Σ_k‖∇f^i_k(x^i_t) − z^i_{k,t}‖²`, when a z-table exists.
    pub table_error: Option<f64>,
    pub consensus_error: f64,
    pub tracking_error: f64,
    /// `(1/m)Σ‖g^i_t‖²`
    pub direction: f64,
}

impl LyapunovTerms {
    /// Terms of the potential at round `t + 1` from the round-`t` snapshot and
    /// the current iterates.
    pub fn collect(problem: &Problem, snapshot: &Snapshot, x_next: &[Vec<f64>]) -> Self {
        let m = snapshot.x.len() as f64;
        let grads: Vec<Vec<f64>> = snapshot
            .x
            .iter()
            .enumerate()
            .map(|(i, x)| problem.node(i).full_grad(x))
            .collect();
        let mean_error = vector::dist_sq(&vector::mean(&snapshot.u), &vector::mean(&grads));
        let estimator_error = snapshot.u.iter().zip(&grads).map(|(u, g)| vector::dist_sq(u, g)).sum::<f64>() / m;
        let table_error = snapshot.z.as_ref().map(|tables| {
            tables
                .iter()
                .enumerate()
                .map(|(i, table)| {
                    let node = problem.node(i);
                    table
                        .iter()
                        .enumerate()
                        .map(|(k, z)| vector::dist_sq(&node.component_grad(k, &snapshot.x[i]), z))
                        .sum::<f64>()
                        / table.len() as f64
                })
                .sum::<f64>()
                / m
        });
        LyapunovTerms {
            loss: problem.loss(&vector::mean(x_next)),
            mean_error,
            estimator_error,
            table_error,
            consensus_error: vector::spread(&snapshot.x),
            tracking_error: vector::spread(&snapshot.w),
            direction: snapshot.g.iter().map(|g| vector::norm_sq(g)).sum::<f64>() / m,
        }
    }

    /// Stochastic-method potential `Ω`.
    pub fn omega(&self, c: &LyapunovCoeffs, form: LyapunovForm) -> f64 {
        self.loss
            + c.mean_weight() * self.mean_error
            + c.chi * self.estimator_error
            + c.consensus_weight(form) * self.consensus_error
            + c.tracking_weight(form, false) * self.tracking_error
            + c.direction_weight() * self.direction
    }

    /// Finite-sum potential `Φ`.
    pub fn phi(&self, c: &LyapunovCoeffs, form: LyapunovForm) -> Result<f64> {
        let (alpha, table) = c.alpha.zip(self.table_error).ok_or_else(|| {
            Error::InvalidParameter("the finite-sum potential needs alpha and a z-table".into())
        })?;
        Ok(self.loss
            + c.mean_weight() * self.mean_error
            + c.chi * self.estimator_error
            + alpha * table
            + c.consensus_weight(form) * self.consensus_error
            + c.tracking_weight(form, true) * self.tracking_error
            + c.direction_weight() * self.direction)
    }
}

/// `Ω_{t+1}` with the constants of its definition.
pub fn lyapunov_omega(problem: &Problem, snapshot: &Snapshot, x_next: &[Vec<f64>], c: &LyapunovCoeffs) -> f64 {
    LyapunovTerms::collect(problem, snapshot, x_next).omega(c, LyapunovForm::Definition)
}

/// `Φ_{t+1}` with the constants of its definition.
pub fn lyapunov_phi(problem: &Problem, snapshot: &Snapshot, x_next: &[Vec<f64>], c: &LyapunovCoeffs) -> Result<f64> {
    LyapunovTerms::collect(problem, snapshot, x_next).phi(c, LyapunovForm::Definition)
}

/// `C(n, k)` without overflow for the sizes of interest.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc.saturating_mul((n - i) as u128) / (i as u128 + 1))
}

/// All size-`k` subsets of `0..n` in lexicographic order.
pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current: Vec<usize> = (0..k).collect();
    if k > n {
        return out;
    }
    loop {
        out.push(current.clone());
        let Some(pos) = (0..k).rev().find(|&p| current[p] < n - k + p) else {
            return out;
        };
        current[pos] += 1;
        for q in pos + 1..k {
            current[q] = current[q - 1] + 1;
        }
    }
}

/// Exact conditional expectation of the next ZeroSARAH estimator over all
/// `C(n, b)` equally likely index sets.
#[allow(clippy::too_many_arguments)]
pub fn zerosarah_expectation(
    objective: &dyn LocalObjective,
    b: usize,
    x_t: &[f64],
    x_prev: &[f64],
    u_prev: &[f64],
    z_table: &[Vec<f64>],
    z_sum: &[f64],
    beta: f64,
) -> Result<Vec<f64>> {
    let n = objective.len();
    let count = binomial(n, b);
    if count > ENUMERATION_LIMIT {
        return Err(Error::TooLarge {
            count,
            limit: ENUMERATION_LIMIT,
        });
    }
    let sets = combinations(n, b);
    let mut acc = vec![0.0; x_t.len()];
    for set in &sets {
        let out = zerosarah_estimate(objective, set, x_t, x_prev, u_prev, z_table, z_sum, beta);
        vector::axpy(1.0, &out.u, &mut acc);
    }
    vector::scale(1.0 / sets.len() as f64, &mut acc);
    Ok(acc)
}

/// Exact expectation of the next STORM estimator when the sample is a single
/// component index drawn with the given probabilities (uniform if `None`).
pub fn storm_expectation(
    objective: &dyn LocalObjective,
    x_new: &[f64],
    x_old: &[f64],
    u_prev: &[f64],
    beta: f64,
    weights: Option<&[f64]>,
) -> Result<Vec<f64>> {
    let n = objective.len();
    if n as u128 > ENUMERATION_LIMIT {
        return Err(Error::TooLarge {
            count: n as u128,
            limit: ENUMERATION_LIMIT,
        });
    }
    if let Some(w) = weights {
        if w.len() != n {
            return Err(Error::shape(format!("{n} outcome weights"), w.len()));
        }
    }
    let mut acc = vec![0.0; x_new.len()];
    for k in 0..n {
        let p = weights.map_or(1.0 / n as f64, |w| w[k]);
        let u = storm_estimate(
            &objective.component_grad(k, x_new),
            u_prev,
            &objective.component_grad(k, x_old),
            beta,
        );
        vector::axpy(p, &u, &mut acc);
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::QuadraticObjective;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn zero_quadratic(m: usize) -> Problem {
        let q = QuadraticObjective::single(vec![1.0, 0.0, 0.0, 1.0], vec![0.0, 0.0]).unwrap();
        Problem::new((0..m).map(|_| Box::new(q.clone()) as Box<dyn LocalObjective>).collect()).unwrap()
    }

    #[test]
    fn gap_examples() {
        let p = zero_quadratic(2);
        let gap = stationary_gap(&p, &[vec![1.0, 0.0], vec![-1.0, 0.0]]);
        assert_abs_diff_eq!(gap, 1.0, epsilon = 1e-15);
        assert_eq!(stationary_gap(&p, &[vec![0.0, 0.0], vec![0.0, 0.0]]), 0.0);
        let gap = stationary_gap(&p, &[vec![3.0, 4.0], vec![3.0, 4.0]]);
        assert_abs_diff_eq!(gap, 5.0, epsilon = 1e-15);
    }

    #[test]
    fn stochastic_h_examples() {
        let h = theoretical_params_stochastic(&TheoryParams::new(1.0, 1.0, 0.0, 0.5)).unwrap().h;
        assert_abs_diff_eq!(h, 9.0, epsilon = 1e-12);
        let h = theoretical_params_stochastic(&TheoryParams::new(1.0, 1.0, 0.5, 1.0)).unwrap().h;
        assert_abs_diff_eq!(h, 12.5, epsilon = 1e-12);
    }

    #[test]
    fn finitesum_h_examples() {
        let mut tp = TheoryParams::new(1.0, 1.0, 0.0, 0.25);
        tp.n = 16;
        tp.b = 4;
        assert_abs_diff_eq!(theoretical_params_finitesum(&tp).unwrap().h, 45.0, epsilon = 1e-12);
        tp.b = 16;
        tp.beta = 1.0;
        assert_abs_diff_eq!(theoretical_params_finitesum(&tp).unwrap().h, 45.0 / 16.0, epsilon = 1e-12);
    }

    #[test]
    fn constraint_errors() {
        let tp = TheoryParams::new(1.0, 1.0, 1.0, 0.5);
        assert!(matches!(theoretical_params_stochastic(&tp), Err(Error::Constraint(_))));
        let mut tp = TheoryParams::new(1.0, 1.0, 0.3, 0.5);
        tp.gamma = Some(1.0);
        tp.eta = Some(1.0);
        assert!(matches!(theoretical_params_stochastic(&tp), Err(Error::Constraint(_))));
        assert!(LyapunovCoeffs::stochastic(1.0, 1.0, 1.0, 0.5, 0.3, 0.1, 1.0).is_err());
    }

    #[test]
    fn default_theta_balances_caps() {
        let tp = TheoryParams::new(2.0, 0.5, 0.4, 0.5);
        let s = 1.0 - 0.16;
        let a = tp.rho * s / (48.0 * tp.theta);
        let b = 3.0 * tp.rho * s * tp.theta / (58.0 * 4.0);
        assert_abs_diff_eq!(a, b, epsilon = 1e-15);
    }

    #[test]
    fn g_is_reported_only_with_known_optimum() {
        let mut tp = TheoryParams::new(1.0, 1.0, 0.2, 0.5);
        assert!(theoretical_params_stochastic(&tp).unwrap().g.is_none());
        tp.initial_gap = Some(2.0);
        tp.sigma = 0.0;
        let b = theoretical_params_stochastic(&tp).unwrap();
        let expected = 2.0 / (b.gamma_max * b.eta_max);
        assert_abs_diff_eq!(b.g.unwrap(), expected, epsilon = 1e-9 * expected);
    }

    #[test]
    fn floors_zero_out_penalties() {
        let c = LyapunovCoeffs {
            lambda: 4.5,
            vartheta: 0.25,
            chi: 0.0,
            alpha: Some(0.0),
            theta: 29.0 / 6.0,
            gamma: 1.0,
            eta: 1.0,
            rho: 1.0,
            l: 1.0,
        };
        let terms = LyapunovTerms {
            loss: 3.0,
            mean_error: 7.0,
            estimator_error: 5.0,
            table_error: Some(11.0),
            consensus_error: 13.0,
            tracking_error: 17.0,
            direction: 6.0,
        };
        assert_eq!(c.mean_weight(), 0.0);
        assert_abs_diff_eq!(terms.omega(&c, LyapunovForm::Definition), 3.0 + 1.0 + (29.0 / 6.0 - 19.0 / 4.0) * 13.0, epsilon = 1e-12);
        let c = LyapunovCoeffs { vartheta: 0.75, ..c };
        assert_abs_diff_eq!(terms.omega(&c, LyapunovForm::Recursion), 4.0, epsilon = 1e-12);
        assert_abs_diff_eq!(terms.phi(&c, LyapunovForm::Recursion).unwrap(), 4.0, epsilon = 1e-12);
    }

    #[test]
    fn combinations_enumerate_all_subsets() {
        let sets = combinations(4, 2);
        assert_eq!(sets, vec![vec![0, 1], vec![0, 2], vec![0, 3], vec![1, 2], vec![1, 3], vec![2, 3]]);
        assert_eq!(combinations(3, 3), vec![vec![0, 1, 2]]);
        assert_eq!(binomial(30, 15), 155_117_520);
        assert_eq!(combinations(5, 0), vec![Vec::<usize>::new()]);
    }

    #[test]
    fn enumeration_guard() {
        let comps: Vec<(Vec<f64>, Vec<f64>)> = (0..30).map(|_| (vec![1.0], vec![0.0])).collect();
        let q = QuadraticObjective::new(1, comps).unwrap();
        let z = vec![vec![0.0]; 30];
        let err = zerosarah_expectation(&q, 15, &[0.0], &[0.0], &[0.0], &z, &[0.0], 0.5);
        assert!(matches!(err, Err(Error::TooLarge { .. })));
    }

    proptest! {
        #[test]
        fn gap_is_permutation_invariant(xs in proptest::collection::vec(proptest::collection::vec(-5.0f64..5.0, 2), 2..6), rot in 0usize..6) {
            let p = zero_quadratic(xs.len());
            let mut ys = xs.clone();
            ys.rotate_left(rot % xs.len());
            let a = stationary_gap(&p, &xs);
            let b = stationary_gap(&p, &ys);
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a));
        }

        #[test]
        fn caps_shrink_as_nu_grows(nu in 0.0f64..0.9, dnu in 0.0f64..0.09, beta in 0.01f64..1.0) {
            let a = theoretical_params_stochastic(&TheoryParams::new(1.0, 1.0, nu, beta)).unwrap();
            let b = theoretical_params_stochastic(&TheoryParams::new(1.0, 1.0, nu + dnu, beta)).unwrap();
            prop_assert!(b.gamma_max <= a.gamma_max * (1.0 + 1e-12));
            let mut fixed = TheoryParams::new(1.0, 1.0, nu, beta);
            fixed.gamma = Some(0.001);
            let mut fixed2 = fixed.clone();
            fixed2.nu = nu + dnu;
            let ea = theoretical_params_stochastic(&fixed).unwrap().eta_max;
            let eb = theoretical_params_stochastic(&fixed2).unwrap().eta_max;
            prop_assert!(eb <= ea * (1.0 + 1e-12));
        }

        #[test]
        fn h_shrinks_as_beta_grows(nu in 0.0f64..0.9, beta in 0.01f64..0.5, db in 0.0f64..0.5) {
            let a = theoretical_params_stochastic(&TheoryParams::new(1.0, 1.0, nu, beta)).unwrap();
            let b = theoretical_params_stochastic(&TheoryParams::new(1.0, 1.0, nu, beta + db)).unwrap();
            prop_assert!(b.h <= a.h);
        }
    }
}
