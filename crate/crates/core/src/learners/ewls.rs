//! Exponentially weighted least squares, updated recursively.
//!
//! After `t` updates the weights minimize
//! `Σ_i β^(t-i) (y_i - x_iᵀw)² + β^t λ ‖w‖²`. The recursion starts from
//! `w = 0`, `P = I/λ` and is algebraically exact, so the state matches the
//! batch weighted-ridge solution after every prefix.

use super::{check_dim, Observation, Scorer};
use crate::error::{HarvestError, Result};
use crate::linalg::{dot, SquareMatrix};

#[derive(Debug, Clone)]
pub struct EwlsState {
    weights: Vec<f64>,
    /// Inverse of the weighted information matrix.
    inverse: SquareMatrix,
    beta: f64,
    lambda: f64,
    updates: usize,
}

impl EwlsState {
    pub fn new(dim: usize, beta: f64, lambda: f64) -> Result<Self> {
        if !(beta > 0.0 && beta <= 1.0) {
            return Err(HarvestError::Validation(format!("forgetting factor {beta} not in (0, 1]")));
        }
        if !(lambda > 0.0) {
            // the recursion needs an invertible starting information matrix
            return Err(HarvestError::Validation(format!("ridge {lambda} must be positive")));
        }
        Ok(EwlsState {
            weights: vec![0.0; dim],
            inverse: SquareMatrix::scaled_identity(dim, 1.0 / lambda),
            beta,
            lambda,
            updates: 0,
        })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn inverse(&self) -> &SquareMatrix {
        &self.inverse
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn updates(&self) -> usize {
        self.updates
    }

    /// Absorbs `(x, y)`.
    pub fn update(&mut self, x: &[f64], y: f64) -> Result<()> {
        let n = self.weights.len();
        check_dim(n, x)?;
        let px = self.inverse.mul_vec(x);
        let denom = self.beta + dot(x, &px);
        let err = y - dot(x, &self.weights);
        for (w, g) in self.weights.iter_mut().zip(&px) {
            *w += g * err / denom;
        }
        // P <- (P - Px (Px)ᵀ / denom) / β, symmetric by construction
        for i in 0..n {
            for j in 0..n {
                self.inverse[(i, j)] = (self.inverse[(i, j)] - px[i] * px[j] / denom) / self.beta;
            }
        }
        self.updates += 1;
        Ok(())
    }

    pub fn score(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.weights.len(), x)?;
        Ok(dot(x, &self.weights))
    }
}

/// EWLS over raw features with an appended constant column.
#[derive(Debug, Clone)]
pub struct EwlsScorer {
    state: EwlsState,
}

impl EwlsScorer {
    /// `feature_dim` excludes the constant column.
    pub fn new(feature_dim: usize, beta: f64, lambda: f64) -> Result<Self> {
        Ok(EwlsScorer {
            state: EwlsState::new(feature_dim + 1, beta, lambda)?,
        })
    }

    pub fn state(&self) -> &EwlsState {
        &self.state
    }

    fn augment(row: &[f64]) -> Vec<f64> {
        let mut x = Vec::with_capacity(row.len() + 1);
        x.extend_from_slice(row);
        x.push(1.0);
        x
    }
}

impl Scorer for EwlsScorer {
    fn name(&self) -> &str {
        "EWLS"
    }

    fn update(&mut self, obs: &Observation) -> Result<()> {
        self.state.update(&Self::augment(&obs.features), obs.label as u8 as f64)
    }

    fn score_rows(&mut self, rows: &[Vec<f64>]) -> Result<Vec<f64>> {
        rows.iter().map(|r| self.state.score(&Self::augment(r))).collect()
    }
}
