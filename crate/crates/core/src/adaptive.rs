//! Per-node adaptive preconditioners `A ⪰ ρI`.
//!
//! Three kinds are provided:
//! - `Adam`: `a_t = ϱ a_{t-1} + (1-ϱ) g_t²`, `A_t = diag(√a_t + ρ)`.
//! - `Bb`: `a_t = |⟨Δx, Δg⟩| / ‖Δx‖² + ρ`, `A_t = a_t I`.
//! - `Identity`: `A = ρI`, the analysis-friendly control.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::vector;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdaptiveKind {
    Adam,
    Bb,
    Identity,
}

impl FromStr for AdaptiveKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "adam" => Ok(AdaptiveKind::Adam),
            "bb" => Ok(AdaptiveKind::Bb),
            "identity" => Ok(AdaptiveKind::Identity),
            other => Err(Error::InvalidParameter(format!(
                "unknown adaptive kind `{other}` (expected adam | bb | identity)"
            ))),
        }
    }
}

impl fmt::Display for AdaptiveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AdaptiveKind::Adam => "adam",
            AdaptiveKind::Bb => "bb",
            AdaptiveKind::Identity => "identity",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveConfig {
    pub kind: AdaptiveKind,
    /// Floor `ρ > 0`.
    pub rho: f64,
    /// Adam decay `ϱ ∈ (0, 1)`; ignored by the other kinds.
    pub varrho: f64,
}

impl AdaptiveConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rho > 0.0) || !self.rho.is_finite() {
            return Err(Error::InvalidParameter(format!("rho must be > 0, got {}", self.rho)));
        }
        if self.kind == AdaptiveKind::Adam && !(0.0..1.0).contains(&self.varrho) {
            return Err(Error::InvalidParameter(format!(
                "varrho must lie in [0, 1), got {}",
                self.varrho
            )));
        }
        Ok(())
    }
}

impl Default for AdaptiveConfig {
    fn default() -> Self {
        AdaptiveConfig {
            kind: AdaptiveKind::Adam,
            rho: 1e-3,
            varrho: 0.9,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum AdaptiveState {
    Adam { accum: Vec<f64>, varrho: f64, rho: f64 },
    Bb { value: f64, rho: f64 },
    Identity { rho: f64 },
}

impl AdaptiveState {
    /// Fresh state: zero Adam accumulator, BB value `1 + ρ`.
    pub fn new(config: &AdaptiveConfig, d: usize) -> Self {
        match config.kind {
            AdaptiveKind::Adam => AdaptiveState::Adam {
                accum: vec![0.0; d],
                varrho: config.varrho,
                rho: config.rho,
            },
            AdaptiveKind::Bb => AdaptiveState::Bb {
                value: 1.0 + config.rho,
                rho: config.rho,
            },
            AdaptiveKind::Identity => AdaptiveState::Identity { rho: config.rho },
        }
    }

    pub fn kind(&self) -> AdaptiveKind {
        match self {
            AdaptiveState::Adam { .. } => AdaptiveKind::Adam,
            AdaptiveState::Bb { .. } => AdaptiveKind::Bb,
            AdaptiveState::Identity { .. } => AdaptiveKind::Identity,
        }
    }

    pub fn rho(&self) -> f64 {
        match *self {
            AdaptiveState::Adam { rho, .. } | AdaptiveState::Bb { rho, .. } | AdaptiveState::Identity { rho } => rho,
        }
    }

    pub fn adam_update(&mut self, grad: &[f64]) -> Result<()> {
        let AdaptiveState::Adam { accum, varrho, .. } = self else {
            return Err(Error::InvalidParameter(format!("adam_update on a {} state", self.kind())));
        };
        if grad.len() != accum.len() {
            return Err(Error::shape(format!("dimension {}", accum.len()), grad.len()));
        }
        let keep = *varrho;
        for (a, g) in accum.iter_mut().zip(grad) {
            *a = keep * *a + (1.0 - keep) * g * g;
        }
        self.debug_check_floor();
        Ok(())
    }

    /// Secant update. When `x_t == x_prev` the previous value is kept.
    pub fn bb_update(&mut self, x_t: &[f64], x_prev: &[f64], grad_t: &[f64], grad_prev: &[f64]) -> Result<()> {
        let AdaptiveState::Bb { value, rho } = self else {
            return Err(Error::InvalidParameter(format!("bb_update on a {} state", self.kind())));
        };
        let d = x_t.len();
        if x_prev.len() != d || grad_t.len() != d || grad_prev.len() != d {
            return Err(Error::shape(format!("dimension {d}"), "mismatched BB inputs"));
        }
        let dx = vector::sub(x_t, x_prev);
        let dx_sq = vector::norm_sq(&dx);
        if dx_sq > 0.0 {
            let dg = vector::sub(grad_t, grad_prev);
            *value = vector::dot(&dx, &dg).abs() / dx_sq + *rho;
        }
        self.debug_check_floor();
        Ok(())
    }

    /// Dispatches to the update rule of this state's kind. `prev` carries
    /// `(x_{t-1}, gradient at x_{t-1} with the current sample)` and is only
    /// consulted by the BB kind.
    pub fn observe(&mut self, x_t: &[f64], grad_t: &[f64], prev: Option<(&[f64], &[f64])>) -> Result<()> {
        match self {
            AdaptiveState::Adam { .. } => self.adam_update(grad_t),
            AdaptiveState::Bb { .. } => match prev {
                Some((x_prev, grad_prev)) => self.bb_update(x_t, x_prev, grad_t, grad_prev),
                None => Ok(()),
            },
            AdaptiveState::Identity { .. } => Ok(()),
        }
    }

    /// Diagonal entry `j` of `A`.
    pub fn diagonal(&self, j: usize) -> f64 {
        match self {
            AdaptiveState::Adam { accum, rho, .. } => accum[j].sqrt() + rho,
            AdaptiveState::Bb { value, .. } => *value,
            AdaptiveState::Identity { rho } => *rho,
        }
    }

    /// `A⁻¹w`
    pub fn apply_inverse(&self, w: &[f64]) -> Vec<f64> {
        w.iter().enumerate().map(|(j, v)| v / self.diagonal(j)).collect()
    }

    /// `A·v`
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        v.iter().enumerate().map(|(j, x)| x * self.diagonal(j)).collect()
    }

    /// Spectral norm, i.e. the largest diagonal entry.
    pub fn matrix_norm(&self) -> f64 {
        match self {
            AdaptiveState::Adam { accum, rho, .. } => accum.iter().fold(0.0_f64, |m, a| m.max(a.sqrt())) + rho,
            AdaptiveState::Bb { value, .. } => *value,
            AdaptiveState::Identity { rho } => *rho,
        }
    }

    pub fn min_diagonal(&self) -> f64 {
        match self {
            AdaptiveState::Adam { accum, rho, .. } => {
                accum.iter().fold(f64::INFINITY, |m, a| m.min(a.sqrt())).min(f64::MAX) + rho
            }
            AdaptiveState::Bb { value, .. } => *value,
            AdaptiveState::Identity { rho } => *rho,
        }
    }

    fn debug_check_floor(&self) {
        debug_assert!(
            self.min_diagonal() >= self.rho(),
            "adaptive matrix fell below its floor"
        );
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn adam(varrho: f64, rho: f64, d: usize) -> AdaptiveState {
        AdaptiveState::new(
            &AdaptiveConfig {
                kind: AdaptiveKind::Adam,
                rho,
                varrho,
            },
            d,
        )
    }

    fn bb(rho: f64) -> AdaptiveState {
        AdaptiveState::new(
            &AdaptiveConfig {
                kind: AdaptiveKind::Bb,
                rho,
                varrho: 0.0,
            },
            1,
        )
    }

    #[test]
    fn adam_without_memory_is_abs_gradient_plus_rho() {
        let mut s = adam(0.0, 0.01, 3);
        s.adam_update(&[-2.0, 0.5, 0.0]).unwrap();
        assert_abs_diff_eq!(s.diagonal(0), 2.01, epsilon = 1e-15);
        assert_abs_diff_eq!(s.diagonal(1), 0.51, epsilon = 1e-15);
        assert_abs_diff_eq!(s.diagonal(2), 0.01, epsilon = 1e-15);
    }

    #[test]
    fn adam_zero_gradients_stay_at_floor() {
        let mut s = adam(0.9, 0.2, 4);
        for _ in 0..50 {
            s.adam_update(&[0.0; 4]).unwrap();
        }
        assert_eq!(s.matrix_norm(), 0.2);
        assert_eq!(s.min_diagonal(), 0.2);
    }

    #[test]
    fn adam_two_unit_steps() {
        let mut s = adam(0.9, 1e-3, 2);
        s.adam_update(&[1.0, 1.0]).unwrap();
        s.adam_update(&[1.0, 1.0]).unwrap();
        let AdaptiveState::Adam { accum, .. } = &s else { unreachable!() };
        assert_abs_diff_eq!(accum[0], 0.19, epsilon = 1e-15);
        assert_abs_diff_eq!(s.diagonal(1), 0.19f64.sqrt() + 1e-3, epsilon = 1e-15);
    }

    #[test]
    fn adam_rejects_wrong_dimension_and_kind() {
        let mut s = adam(0.5, 1.0, 2);
        assert!(matches!(s.adam_update(&[1.0]), Err(Error::Shape { .. })));
        let mut b = bb(1.0);
        assert!(b.adam_update(&[1.0]).is_err());
        assert!(s.bb_update(&[1.0, 0.0], &[0.0, 0.0], &[0.0, 0.0], &[0.0, 0.0]).is_err());
    }

    #[test]
    fn bb_recovers_curvature_of_scaled_identity() {
        let l = 3.5;
        let mut s = bb(0.1);
        let x_prev = [0.2, -1.0, 0.4];
        let x_t = [1.0, 0.5, -0.3];
        let g = |x: &[f64]| x.iter().map(|v| l * v).collect::<Vec<_>>();
        s.bb_update(&x_t, &x_prev, &g(&x_t), &g(&x_prev)).unwrap();
        assert_abs_diff_eq!(s.matrix_norm(), l + 0.1, epsilon = 1e-12);
    }

    #[test]
    fn bb_examples() {
        let mut s = bb(0.1);
        s.bb_update(&[1.0, 0.0], &[0.0, 0.0], &[0.0, 5.0], &[0.0, 0.0]).unwrap();
        assert_abs_diff_eq!(s.diagonal(0), 0.1, epsilon = 1e-15);

        let mut s = bb(0.1);
        s.bb_update(&[1.0, 0.0], &[0.0, 0.0], &[2.0, 1.0], &[0.0, 0.0]).unwrap();
        assert_abs_diff_eq!(s.diagonal(0), 2.1, epsilon = 1e-15);
    }

    #[test]
    fn bb_keeps_value_when_iterate_is_unchanged() {
        let mut s = bb(0.25);
        assert_eq!(s.matrix_norm(), 1.25);
        s.bb_update(&[1.0], &[1.0], &[3.0], &[0.0]).unwrap();
        assert_eq!(s.matrix_norm(), 1.25);
        s.observe(&[1.0], &[3.0], None).unwrap();
        assert_eq!(s.matrix_norm(), 1.25);
    }

    #[test]
    fn identity_and_diagonal_inverse() {
        let id = AdaptiveState::Identity { rho: 1.0 };
        assert_eq!(id.apply_inverse(&[4.0, -6.0]), vec![4.0, -6.0]);
        let two = AdaptiveState::Bb { value: 2.0, rho: 0.5 };
        assert_eq!(two.apply_inverse(&[4.0, 6.0]), vec![2.0, 3.0]);
        assert_eq!(AdaptiveState::Identity { rho: 0.3 }.matrix_norm(), 0.3);
    }

    #[test]
    fn adam_norm_is_bounded_by_gradient_bound() {
        let bound = 2.0;
        let rho = 0.05;
        let mut s = adam(0.7, rho, 3);
        for t in 0..40 {
            let g = [bound * ((t as f64) * 0.3).sin(), -bound, 0.5];
            s.adam_update(&g).unwrap();
            assert!(s.matrix_norm() <= bound + rho + 1e-12);
        }
    }

    #[test]
    fn config_validation() {
        assert!(AdaptiveConfig { rho: 0.0, ..Default::default() }.validate().is_err());
        assert!(AdaptiveConfig { varrho: 1.0, ..Default::default() }.validate().is_err());
        assert!(AdaptiveConfig::default().validate().is_ok());
        assert_eq!("bb".parse::<AdaptiveKind>().unwrap(), AdaptiveKind::Bb);
        assert!("adagrad".parse::<AdaptiveKind>().is_err());
    }

    proptest! {
        #[test]
        fn adam_matches_unrolled_sum(
            varrho in 0.0f64..0.99,
            grads in proptest::collection::vec(proptest::collection::vec(-5.0f64..5.0, 3), 1..30),
        ) {
            let mut s = adam(varrho, 1e-3, 3);
            for g in &grads {
                s.adam_update(g).unwrap();
            }
            let t = grads.len();
            let AdaptiveState::Adam { accum, .. } = &s else { unreachable!() };
            for j in 0..3 {
                // a_t = Σ_{l=1}^t (1-ϱ) ϱ^{t-l} g_l²
                let unrolled: f64 = grads
                    .iter()
                    .enumerate()
                    .map(|(l, g)| (1.0 - varrho) * varrho.powi((t - 1 - l) as i32) * g[j] * g[j])
                    .sum();
                prop_assert!((accum[j] - unrolled).abs() <= 1e-10 * (1.0 + unrolled));
            }
        }

        #[test]
        fn inverse_is_bounded_and_undoes_apply(
            grads in proptest::collection::vec(proptest::collection::vec(-10.0f64..10.0, 4), 0..10),
            w in proptest::collection::vec(-10.0f64..10.0, 4),
            rho in 0.01f64..2.0,
        ) {
            let mut s = adam(0.9, rho, 4);
            for g in &grads {
                s.adam_update(g).unwrap();
            }
            prop_assert!(s.min_diagonal() >= rho);
            let inv = s.apply_inverse(&w);
            prop_assert!(vector::norm(&inv) <= vector::norm(&w) / rho + 1e-12);
            let round = s.apply_inverse(&s.apply(&w));
            for (a, b) in round.iter().zip(&w) {
                prop_assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()));
            }
        }

        #[test]
        fn bb_never_drops_below_floor(
            x in proptest::collection::vec(-3.0f64..3.0, 3),
            y in proptest::collection::vec(-3.0f64..3.0, 3),
            g in proptest::collection::vec(-3.0f64..3.0, 3),
            h in proptest::collection::vec(-3.0f64..3.0, 3),
            rho in 0.001f64..1.0,
        ) {
            let mut s = bb(rho);
            s.bb_update(&x, &y, &g, &h).unwrap();
            prop_assert!(s.matrix_norm() >= rho);
        }
    }
}
