//! Path cost evaluation for the tree search.
//!
//! A path of length `l < K` cannot be compared to a longer one by residue
//! norm alone; each model discounts the residue by an estimate of what the
//! remaining `K - l` atoms would still remove. All three models collapse to
//! the plain residue norm on complete paths.

use crate::error::{Error, Result};

/// Length-compensation model for comparing paths of different lengths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CostModel {
    /// `||r|| - beta * ((K - l) / K) * ||y||`: assumes the remaining atoms
    /// remove an equal share of the observation norm. `beta > 1`.
    Additive { beta: f64 },
    /// `||r^l|| - beta * (||r^{l-1}|| - ||r^l||) * (K - l)`: projects the
    /// most recent per-atom improvement onto the remaining atoms. `beta > 1`.
    Adaptive { beta: f64 },
    /// `alpha^(K - l) * ||r||`: assumes each remaining atom shrinks the
    /// residue by the constant factor `alpha`, `0 < alpha < 1`.
    Multiplicative { alpha: f64 },
}

impl CostModel {
    pub fn validate(&self) -> Result<()> {
        match *self {
            CostModel::Additive { beta } | CostModel::Adaptive { beta } => {
                if !beta.is_finite() || beta <= 1.0 {
                    return Err(Error::InvalidParams(format!(
                        "additive/adaptive cost requires beta > 1, got {beta}"
                    )));
                }
            }
            CostModel::Multiplicative { alpha } => {
                if !(alpha > 0.0 && alpha < 1.0) {
                    return Err(Error::InvalidParams(format!(
                        "multiplicative cost requires 0 < alpha < 1, got {alpha}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Per-path statistics the models evaluate.
///
/// `prev_r_norm` is the residue norm before the last atom was appended; a
/// length-1 path uses `||y||` since the search starts from residue `y`.
#[derive(Debug, Clone, Copy)]
pub struct PathCostInputs {
    pub r_norm: f64,
    pub prev_r_norm: f64,
    pub y_norm: f64,
    pub sparsity: usize,
    pub length: usize,
}

/// Evaluates the cost of a partial or complete path.
///
/// For `length == sparsity` all models return `r_norm` unchanged. Costs may
/// be negative; only their ordering matters.
pub fn cost(model: CostModel, inputs: &PathCostInputs) -> f64 {
    let k = inputs.sparsity;
    let l = inputs.length.min(k);
    let remaining = (k - l) as f64;
    match model {
        CostModel::Additive { beta } => {
            inputs.r_norm - beta * (remaining / k as f64) * inputs.y_norm
        }
        CostModel::Adaptive { beta } => {
            inputs.r_norm - beta * (inputs.prev_r_norm - inputs.r_norm) * remaining
        }
        CostModel::Multiplicative { alpha } => alpha.powi((k - l) as i32) * inputs.r_norm,
    }
}

/// Cost assigned to an empty beam slot, `||y||`, which is never better than
/// a real path, so empty slots are evicted first.
pub fn empty_slot_cost(y_norm: f64) -> f64 {
    y_norm
}
