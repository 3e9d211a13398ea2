//! Weighted lifted low-rank completion of the missing uniform-array samples.
//!
//! [`admm_complete`] runs the SVD-free bilinear ADMM: the weighted lifted
//! matrix `W_L H(g) W_Rᵀ` is split as `S Rᴴ` so that `||S||² + ||R||²`
//! stands in for twice its nuclear norm, and the data misfit enters through
//! the penalty `γ ||P_Ω(g) - y_Ω||²`. [`prox_nuclear_reference`] solves the
//! penalized convex program directly and is used to cross-check the ADMM.

mod admm;
mod reference;

use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use admm::{admm_complete, admm_complete_block};
pub use reference::{prox_nuclear_reference, prox_nuclear_reference_from, weighted_nuclear_objective, ReferenceResult};

/// Form of the `g` step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GStep {
    /// Exact minimizer of the augmented Lagrangian over `g`: a weighted
    /// least-squares fit of every anti-diagonal.
    Exact,
    /// Back-projection of `W_L⁻¹ (S Rᴴ - Λ) W_R⁻ᵀ` with the observed entries
    /// replaced by `(γ y_j + ρ b_j) / (γ + ρ)`.
    #[default]
    BackProjection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdmmConfig {
    pub rho: f64,
    /// Data-fit weight; `f64::INFINITY` enforces the observations exactly
    /// (noiseless mode).
    pub gamma: f64,
    pub iters: usize,
    /// Width of the factors `S`, `R`.
    pub rank: usize,
    /// Feasibility tolerance, relative to `max(1, ||W_L H(g) W_Rᵀ||_F)`.
    pub tol: f64,
    pub seed: u64,
    pub g_step: GStep,
}

impl Default for AdmmConfig {
    fn default() -> Self {
        Self {
            rho: 1e3,
            gamma: 1e5,
            iters: 2000,
            rank: 2,
            tol: 1e-8,
            seed: 0,
            g_step: GStep::BackProjection,
        }
    }
}

impl AdmmConfig {
    pub fn with_rank(mut self, rank: usize) -> Self {
        self.rank = rank;
        self
    }

    /// `min(2·k_guess, min(rows, cols))` for a lifted shape.
    pub fn default_rank(k_guess: usize, shape: (usize, usize)) -> usize {
        (2 * k_guess).clamp(1, shape.0.min(shape.1))
    }

    pub(crate) fn validate(&self, shape: (usize, usize)) -> Result<()> {
        let max = shape.0.min(shape.1);
        if self.rank == 0 || self.rank > max {
            return Err(Error::InvalidRank { rank: self.rank, max });
        }
        if !(self.rho > 0.0 && self.rho.is_finite()) || !(self.gamma > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "rho must be positive and finite and gamma positive, got rho={}, gamma={}",
                self.rho, self.gamma
            )));
        }
        if self.iters == 0 {
            return Err(Error::InvalidArgument("iteration budget must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub iter: usize,
    /// `||W_L H(g) W_Rᵀ - S Rᴴ||_F`.
    pub feas_residual: f64,
    /// `||P_Ω(g) - y_Ω||₂`.
    pub data_residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompletionResult {
    /// Completed samples; `N·T` column-major for multi-snapshot solves.
    pub y_hat: Vec<Complex64>,
    pub n: usize,
    pub snapshots: usize,
    pub trace: Vec<TraceEntry>,
    pub final_rank_estimate: usize,
    pub iterations_run: usize,
    /// Largest `||Λ||_F` seen over the run.
    pub max_multiplier_norm: f64,
}

impl CompletionResult {
    pub fn column(&self, t: usize) -> &[Complex64] {
        &self.y_hat[t * self.n..(t + 1) * self.n]
    }

    pub fn final_trace(&self) -> Option<&TraceEntry> {
        self.trace.last()
    }

    pub fn write_trace_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "iter,feas_residual,data_residual")?;
        for t in &self.trace {
            writeln!(out, "{},{:.9e},{:.9e}", t.iter, t.feas_residual, t.data_residual)?;
        }
        Ok(())
    }
}

/// `||y - ŷ||² / ||y||²`.
pub fn nmse(y_true: &[Complex64], y_hat: &[Complex64]) -> Result<f64> {
    if y_true.len() != y_hat.len() {
        return Err(Error::shape(y_true.len(), y_hat.len()));
    }
    let energy: f64 = y_true.iter().map(|v| v.norm_sqr()).sum();
    if energy == 0.0 {
        return Err(Error::UndefinedMetric("NMSE of an all-zero reference".into()));
    }
    let err: f64 = y_true.iter().zip(y_hat).map(|(a, b)| (a - b).norm_sqr()).sum();
    Ok(err / energy)
}

pub fn to_db(x: f64) -> f64 {
    10.0 * x.log10()
}
