//! Constrained attention-allocation solver.
//!
//! Each investor maximizes Σ_j |C_j|·Q(θ_j^A, θ_j^W) over two resource rows,
//! subject to Σ_j θ_j^A ≤ Θ^A and Σ_j θ_j^W ≤ Θ^W with θ ≥ 0. The method is
//! projected gradient ascent with backtracking: each step projects both rows
//! onto the budget set {θ ≥ 0, Σθ ≤ Θ} (exact sorting-based simplex
//! projection when the budget binds). Convergence is declared on the KKT
//! residual, never on step size; shadow prices are recovered as the mean
//! marginal value across interior allocations of each resource.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    investor_utility, processing_quality, processing_quality_gradient, Disclosure,
    InvestorProfile, QualityTechnology,
};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub max_iterations: usize,
    pub step_size: f64,
    pub kkt_tolerance: f64,
    pub budget_tolerance: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_iterations: 5000,
            step_size: 0.05,
            kkt_tolerance: 1e-6,
            budget_tolerance: 1e-9,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0
            || !(self.step_size > 0.0)
            || !(self.kkt_tolerance > 0.0)
            || !(self.budget_tolerance > 0.0)
        {
            return Err(Error::InvalidInput("solver config fields must be positive".into()));
        }
        Ok(())
    }
}

/// Lagrange multipliers on the two resource budgets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShadowPrices {
    pub lambda_attention: f64,
    pub lambda_memory: f64,
}

/// One investor's optimal allocation over the disclosure set.
#[derive(Debug, Clone)]
pub struct AllocationRow {
    pub attention: Vec<f64>,
    pub memory: Vec<f64>,
}

impl AllocationRow {
    /// Extraction quality per disclosure implied by this allocation.
    pub fn qualities(
        &self,
        disclosures: &[Disclosure],
        tech: &QualityTechnology,
    ) -> Result<Vec<f64>> {
        disclosures
            .iter()
            .enumerate()
            .map(|(j, d)| processing_quality(self.attention[j], self.memory[j], d, tech))
            .collect()
    }
}

/// Euclidean projection onto {x >= 0, sum(x) <= budget}.
///
/// If the nonnegative part already fits the budget the clamp is the
/// projection; otherwise project onto the simplex {x >= 0, sum(x) = budget}
/// by the sorting-based threshold rule.
pub fn project_budget(x: &[f64], budget: f64) -> Vec<f64> {
    let clamped: Vec<f64> = x.iter().map(|&v| v.max(0.0)).collect();
    let sum: f64 = clamped.iter().sum();
    if sum <= budget {
        return clamped;
    }
    // simplex projection of the *original* point onto {sum = budget}
    let mut sorted: Vec<f64> = x.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut cumsum = 0.0;
    let mut tau = 0.0;
    for (k, &v) in sorted.iter().enumerate() {
        cumsum += v;
        let t = (cumsum - budget) / (k as f64 + 1.0);
        if v - t > 0.0 {
            tau = t;
        } else {
            break;
        }
    }
    x.iter().map(|&v| (v - tau).max(0.0)).collect()
}

fn marginal_utilities(
    row: &AllocationRow,
    disclosures: &[Disclosure],
    tech: &QualityTechnology,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let m = disclosures.len();
    let mut grad_a = vec![0.0; m];
    let mut grad_w = vec![0.0; m];
    for (j, d) in disclosures.iter().enumerate() {
        let (dqa, dqw) = processing_quality_gradient(row.attention[j], row.memory[j], d, tech)?;
        grad_a[j] = d.content.abs() * dqa;
        grad_w[j] = d.content.abs() * dqw;
    }
    Ok((grad_a, grad_w))
}

fn utility_of(
    row: &AllocationRow,
    disclosures: &[Disclosure],
    tech: &QualityTechnology,
) -> Result<f64> {
    let q = row.qualities(disclosures, tech)?;
    let values: Vec<f64> = disclosures.iter().map(|d| d.content).collect();
    investor_utility(&q, &values)
}

/// Shadow price for one resource: mean marginal value over interior entries
/// when the budget binds, zero when slack (or when no entry is interior).
fn shadow_price(theta: &[f64], grad: &[f64], budget: f64, budget_tolerance: f64) -> f64 {
    let sum: f64 = theta.iter().sum();
    if sum < budget - budget_tolerance {
        return 0.0;
    }
    let interior_threshold = 10.0 * budget_tolerance;
    let interior: Vec<f64> = theta
        .iter()
        .zip(grad)
        .filter(|(t, _)| **t > interior_threshold)
        .map(|(_, g)| *g)
        .collect();
    if interior.is_empty() {
        0.0
    } else {
        interior.iter().sum::<f64>() / interior.len() as f64
    }
}

fn residual_one_resource(
    theta: &[f64],
    grad: &[f64],
    lambda: f64,
    budget_tolerance: f64,
) -> f64 {
    let interior_threshold = 10.0 * budget_tolerance;
    theta
        .iter()
        .zip(grad)
        .map(|(&t, &g)| {
            if t > interior_threshold {
                (g - lambda).abs()
            } else {
                (g - lambda).max(0.0)
            }
        })
        .fold(0.0, f64::max)
}

/// Stationarity/complementary-slackness residual of an allocation.
///
/// Interior entries contribute |∂U/∂θ − λ|; boundary entries contribute
/// max(0, ∂U/∂θ − λ). The result is the max over both resources and all
/// assets.
pub fn kkt_residual(
    row: &AllocationRow,
    shadow: &ShadowPrices,
    _investor: &InvestorProfile,
    disclosures: &[Disclosure],
    tech: &QualityTechnology,
    budget_tolerance: f64,
) -> Result<f64> {
    let (grad_a, grad_w) = marginal_utilities(row, disclosures, tech)?;
    let ra = residual_one_resource(&row.attention, &grad_a, shadow.lambda_attention, budget_tolerance);
    let rw = residual_one_resource(&row.memory, &grad_w, shadow.lambda_memory, budget_tolerance);
    Ok(ra.max(rw))
}

/// Solve one investor's allocation problem by projected gradient ascent.
///
/// Deterministic: initialization is the uniform feasible point, so symmetric
/// instances return the symmetric optimum.
pub fn solve_allocation(
    investor: &InvestorProfile,
    disclosures: &[Disclosure],
    tech: &QualityTechnology,
    cfg: &SolverConfig,
) -> Result<(AllocationRow, ShadowPrices)> {
    cfg.validate()?;
    tech.validate()?;
    let m = disclosures.len();
    if m == 0 {
        return Err(Error::InvalidInput("need at least one disclosure".into()));
    }
    let budget_a = investor.effective_attention_capacity();
    let budget_w = investor.effective_memory_capacity();
    if !(budget_a > 0.0) || !(budget_w > 0.0) {
        return Err(Error::InvalidInput(format!(
            "effective capacities must be > 0 for investor {} (sophistication {})",
            investor.investor_id, investor.sophistication
        )));
    }

    let mut row = AllocationRow {
        attention: vec![budget_a / m as f64; m],
        memory: vec![budget_w / m as f64; m],
    };
    let mut utility = utility_of(&row, disclosures, tech)?;
    let mut last_residual = f64::INFINITY;

    for iteration in 0..=cfg.max_iterations {
        let (grad_a, grad_w) = marginal_utilities(&row, disclosures, tech)?;
        let shadow = ShadowPrices {
            lambda_attention: shadow_price(&row.attention, &grad_a, budget_a, cfg.budget_tolerance),
            lambda_memory: shadow_price(&row.memory, &grad_w, budget_w, cfg.budget_tolerance),
        };
        let ra = residual_one_resource(&row.attention, &grad_a, shadow.lambda_attention, cfg.budget_tolerance);
        let rw = residual_one_resource(&row.memory, &grad_w, shadow.lambda_memory, cfg.budget_tolerance);
        last_residual = ra.max(rw);
        if last_residual < cfg.kkt_tolerance {
            return Ok((row, shadow));
        }
        if iteration == cfg.max_iterations {
            break;
        }

        // ascent step with backtracking; projection keeps feasibility exact
        let mut step = cfg.step_size;
        let mut accepted = false;
        for _ in 0..60 {
            let cand_a: Vec<f64> = row
                .attention
                .iter()
                .zip(&grad_a)
                .map(|(t, g)| t + step * g)
                .collect();
            let cand_w: Vec<f64> = row
                .memory
                .iter()
                .zip(&grad_w)
                .map(|(t, g)| t + step * g)
                .collect();
            let candidate = AllocationRow {
                attention: project_budget(&cand_a, budget_a),
                memory: project_budget(&cand_w, budget_w),
            };
            let cand_utility = utility_of(&candidate, disclosures, tech)?;
            if cand_utility >= utility {
                row = candidate;
                utility = cand_utility;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            // no ascent direction left at floating-point resolution
            break;
        }
    }

    Err(Error::NonConvergence {
        residual: last_residual,
        iterations: cfg.max_iterations,
        tolerance: cfg.kkt_tolerance,
    })
}
