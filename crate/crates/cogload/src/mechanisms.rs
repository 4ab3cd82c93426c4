//! The three cognitive-load mechanisms: load-sensitive selective attention,
//! capacity-scaled processing errors, and strategic complexity choice.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Disclosure, InvestorProfile, LoadMap, QualityTechnology};
use crate::solver::{solve_allocation, SolverConfig};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MechanismParams {
    /// Softmax load-sensitivity of selective attention.
    pub gamma: f64,
    /// Std. dev. of the base processing-error noise.
    pub error_scale: f64,
    /// Strategic gain per unit of suppressed bad news.
    pub complexity_benefit: f64,
    /// Quadratic cost coefficient on chosen structure.
    pub complexity_cost: f64,
    /// Upper bound of the structure search interval.
    pub structure_max: f64,
    pub rng_seed: u64,
}

impl Default for MechanismParams {
    fn default() -> Self {
        Self {
            gamma: 3.0,
            error_scale: 0.1,
            complexity_benefit: 1.0,
            complexity_cost: 0.1,
            structure_max: 30.0,
            rng_seed: 0,
        }
    }
}

impl MechanismParams {
    pub fn validate(&self) -> Result<()> {
        if self.gamma < 0.0
            || self.error_scale < 0.0
            || self.complexity_benefit < 0.0
            || self.complexity_cost < 0.0
            || !(self.structure_max > 0.0)
        {
            return Err(Error::InvalidInput("mechanism parameters must be nonnegative".into()));
        }
        Ok(())
    }
}

/// Probability that each disclosure is processed: softmax of −γ·load,
/// computed with a max-shift so extreme loads stay finite.
pub fn attention_probabilities(loads: &[f64], gamma: f64) -> Vec<f64> {
    if loads.is_empty() {
        return Vec::new();
    }
    let scores: Vec<f64> = loads.iter().map(|l| -gamma * l).collect();
    let max = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = scores.iter().map(|s| (s - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// Sample `count` distinct indices without replacement, weighted by `weights`.
pub fn sample_without_replacement<R: Rng>(
    weights: &[f64],
    count: usize,
    rng: &mut R,
) -> Vec<usize> {
    let mut remaining: Vec<usize> = (0..weights.len()).collect();
    let mut picked = Vec::with_capacity(count);
    for _ in 0..count {
        let total: f64 = remaining.iter().map(|&i| weights[i]).sum();
        let mut u = rng.gen_range(0.0..total);
        let mut chosen = remaining.len() - 1;
        for (pos, &i) in remaining.iter().enumerate() {
            u -= weights[i];
            if u <= 0.0 {
                chosen = pos;
                break;
            }
        }
        picked.push(remaining.remove(chosen));
    }
    picked
}

/// Mechanism 1: each investor processes only `processing_slots` assets,
/// sampled without replacement by the attention probabilities. Quality for
/// unsampled assets is zeroed.
pub fn apply_selective_attention<R: Rng>(
    quality: &[Vec<f64>],
    loads: &[f64],
    gamma: f64,
    processing_slots: usize,
    rng: &mut R,
) -> Result<Vec<Vec<f64>>> {
    let m = loads.len();
    if processing_slots == 0 {
        return Err(Error::InvalidInput("processing_slots must be >= 1".into()));
    }
    if processing_slots > m {
        return Err(Error::InvalidInput(format!(
            "processing_slots {processing_slots} exceeds asset count {m}"
        )));
    }
    if processing_slots == m {
        return Ok(quality.to_vec());
    }
    let probs = attention_probabilities(loads, gamma);
    let mut out = Vec::with_capacity(quality.len());
    for row in quality {
        if row.len() != m {
            return Err(Error::InvalidInput("quality row length mismatch".into()));
        }
        let picked = sample_without_replacement(&probs, processing_slots, rng);
        let mut new_row = vec![0.0; m];
        for j in picked {
            new_row[j] = row[j];
        }
        out.push(new_row);
    }
    Ok(out)
}

/// Error amplification g(L, Θ) = L / (Θ^A + Θ^W), using effective
/// (sophistication-scaled) capacities.
pub fn error_gain(load: f64, investor: &InvestorProfile) -> f64 {
    load / (investor.effective_attention_capacity() + investor.effective_memory_capacity())
}

/// Mechanism 2: perceived content = content + ε·g(L, Θ), ε ~ N(0, scale²).
pub fn processing_error<R: Rng>(
    content: f64,
    load: f64,
    investor: &InvestorProfile,
    params: &MechanismParams,
    rng: &mut R,
) -> f64 {
    if params.error_scale == 0.0 || load == 0.0 {
        return content;
    }
    let eps: f64 = StandardNormal.sample(rng);
    content + eps * params.error_scale * error_gain(load, investor)
}

/// Net payoff to the firm from choosing structure `s` for a disclosure with
/// the given content: suppressed-bad-news benefit minus quadratic cost.
pub fn strategic_objective(
    content: f64,
    s: f64,
    params: &MechanismParams,
    tech: &QualityTechnology,
    representative: &InvestorProfile,
    load_map: &LoadMap,
    cfg: &SolverConfig,
) -> Result<f64> {
    let disclosure = Disclosure::new("strategic", content, s, load_map)?;
    let (alloc, _) = solve_allocation(representative, &[disclosure.clone()], tech, cfg)?;
    let q = alloc.qualities(&[disclosure], tech)?[0];
    let benefit = params.complexity_benefit * (-content).max(0.0) * (1.0 - q);
    let cost = params.complexity_cost * s * s;
    Ok(benefit - cost)
}

/// Mechanism 3: the firm's optimal structure S* on [0, structure_max].
///
/// Coarse grid to bracket the best region, golden-section refinement inside
/// the bracket, then an endpoint comparison so corner optima are returned
/// exactly.
pub fn strategic_complexity(
    content: f64,
    params: &MechanismParams,
    tech: &QualityTechnology,
    representative: &InvestorProfile,
    load_map: &LoadMap,
    cfg: &SolverConfig,
) -> Result<f64> {
    params.validate()?;
    if !content.is_finite() {
        return Err(Error::InvalidInput("content must be finite".into()));
    }
    let s_max = params.structure_max;
    let objective = |s: f64| strategic_objective(content, s, params, tech, representative, load_map, cfg);

    // coarse bracketing grid
    let n_grid = 240;
    let mut best_idx: usize = 0;
    let mut best_val = f64::NEG_INFINITY;
    for i in 0..=n_grid {
        let s = s_max * i as f64 / n_grid as f64;
        let v = objective(s)?;
        if v > best_val {
            best_val = v;
            best_idx = i;
        }
    }
    let mut lo = s_max * best_idx.saturating_sub(1) as f64 / n_grid as f64;
    let mut hi = s_max * (best_idx + 1).min(n_grid) as f64 / n_grid as f64;

    // golden-section refinement
    let phi = (5.0f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - phi * (hi - lo);
    let mut x2 = lo + phi * (hi - lo);
    let mut f1 = objective(x1)?;
    let mut f2 = objective(x2)?;
    while hi - lo > 1e-7 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = objective(x2)?;
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = objective(x1)?;
        }
    }
    let mut s_star = 0.5 * (lo + hi);
    let mut v_star = objective(s_star)?;

    // exact corner check (good news or prohibitive cost both land at 0)
    for corner in [0.0, s_max] {
        let v = objective(corner)?;
        if v > v_star || (v == v_star && corner < s_star) {
            s_star = corner;
            v_star = v;
        }
    }
    Ok(s_star)
}
