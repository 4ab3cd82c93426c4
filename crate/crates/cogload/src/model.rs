//! Core domain types and the pure functions of the bounded-rationality model:
//! cognitive load, the processing-quality technology, and investor utility.
//!
//! A disclosure carries economic content and a structural complexity score.
//! Structure maps linearly into an attention load and a working-memory load;
//! the cognitive load of the disclosure is the larger of the two. Processing
//! quality is a separable saturating-exponential in the resources an investor
//! allocates, scaled by the per-channel loads:
//!
//! `Q = (1 − exp(−a·θ_A/L_A)) · (1 − exp(−b·θ_W/L_W))  ∈ [0, 1)`
//!
//! A zero load component contributes factor 1 (no processing barrier on that
//! channel). Utility is linear in quality with absolute-content importance
//! weights, so the allocation program is smooth with interior optima.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Linear map from structural complexity to the two load channels.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LoadMap {
    pub alpha_attention: f64,
    pub alpha_memory: f64,
}

impl Default for LoadMap {
    // Working memory binds by default: alpha_memory > alpha_attention.
    fn default() -> Self {
        Self {
            alpha_attention: 0.5,
            alpha_memory: 1.0,
        }
    }
}

impl LoadMap {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha_attention > 0.0) || !(self.alpha_memory > 0.0) {
            return Err(Error::InvalidInput(format!(
                "load-map coefficients must be positive, got ({}, {})",
                self.alpha_attention, self.alpha_memory
            )));
        }
        Ok(())
    }

    /// Structure value that produces the given cognitive load under this map.
    pub fn structure_for_load(&self, load: f64) -> f64 {
        load / self.alpha_attention.max(self.alpha_memory)
    }
}

/// One firm's information release.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Disclosure {
    pub firm_id: String,
    /// Signed economic significance, in value units.
    pub content: f64,
    /// Presentation complexity, dimensionless, >= 0.
    pub structure: f64,
    pub attention_load: f64,
    pub memory_load: f64,
}

impl Disclosure {
    pub fn new(
        firm_id: impl Into<String>,
        content: f64,
        structure: f64,
        map: &LoadMap,
    ) -> Result<Self> {
        if !(structure >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "disclosure structure must be >= 0, got {structure}"
            )));
        }
        Ok(Self {
            firm_id: firm_id.into(),
            content,
            structure,
            attention_load: map.alpha_attention * structure,
            memory_load: map.alpha_memory * structure,
        })
    }

    /// Build directly from the two load components.
    pub fn from_loads(
        firm_id: impl Into<String>,
        content: f64,
        attention_load: f64,
        memory_load: f64,
    ) -> Result<Self> {
        if !(attention_load >= 0.0) || !(memory_load >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "loads must be >= 0, got ({attention_load}, {memory_load})"
            )));
        }
        Ok(Self {
            firm_id: firm_id.into(),
            content,
            structure: attention_load.max(memory_load),
            attention_load,
            memory_load,
        })
    }

    /// Cognitive load: the larger of the attention and working-memory demands.
    pub fn load(&self) -> f64 {
        self.attention_load.max(self.memory_load)
    }

    /// Rescale structural complexity (and both derived loads) by `factor`.
    pub fn scale_structure(&self, factor: f64) -> Self {
        Self {
            firm_id: self.firm_id.clone(),
            content: self.content,
            structure: self.structure * factor,
            attention_load: self.attention_load * factor,
            memory_load: self.memory_load * factor,
        }
    }
}

/// Cognitive load of a disclosure (max of the two channel demands).
pub fn cognitive_load(d: &Disclosure) -> f64 {
    d.load()
}

/// An investor's cognitive endowment and market weight.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InvestorProfile {
    pub investor_id: String,
    pub attention_capacity: f64,
    pub memory_capacity: f64,
    pub market_weight: f64,
    /// Scaling in [0, 1] applied to both capacities.
    pub sophistication: f64,
}

impl InvestorProfile {
    pub fn new(
        investor_id: impl Into<String>,
        attention_capacity: f64,
        memory_capacity: f64,
        market_weight: f64,
        sophistication: f64,
    ) -> Result<Self> {
        if !(attention_capacity > 0.0) || !(memory_capacity > 0.0) {
            return Err(Error::InvalidInput(format!(
                "capacities must be > 0, got ({attention_capacity}, {memory_capacity})"
            )));
        }
        if !(market_weight >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "market weight must be >= 0, got {market_weight}"
            )));
        }
        if !(0.0..=1.0).contains(&sophistication) {
            return Err(Error::InvalidInput(format!(
                "sophistication must be in [0, 1], got {sophistication}"
            )));
        }
        Ok(Self {
            investor_id: investor_id.into(),
            attention_capacity,
            memory_capacity,
            market_weight,
            sophistication,
        })
    }

    /// Attention budget after sophistication scaling.
    pub fn effective_attention_capacity(&self) -> f64 {
        self.attention_capacity * self.sophistication
    }

    /// Working-memory budget after sophistication scaling.
    pub fn effective_memory_capacity(&self) -> f64 {
        self.memory_capacity * self.sophistication
    }
}

/// Per-investor, per-asset resource allocations.
#[derive(Debug, Clone)]
pub struct AllocationMatrix {
    pub attention: Vec<Vec<f64>>,
    pub memory: Vec<Vec<f64>>,
}

impl AllocationMatrix {
    /// Check row budgets against the investors' effective capacities.
    pub fn check_budgets(&self, investors: &[InvestorProfile], tolerance: f64) -> Result<()> {
        if self.attention.len() != investors.len() || self.memory.len() != investors.len() {
            return Err(Error::InvalidInput(
                "allocation row count does not match investor count".into(),
            ));
        }
        for (i, inv) in investors.iter().enumerate() {
            let sum_a: f64 = self.attention[i].iter().sum();
            let sum_w: f64 = self.memory[i].iter().sum();
            if self.attention[i].iter().chain(&self.memory[i]).any(|&x| x < 0.0) {
                return Err(Error::InvalidInput(format!(
                    "negative allocation entry for investor {}",
                    inv.investor_id
                )));
            }
            if sum_a > inv.effective_attention_capacity() + tolerance
                || sum_w > inv.effective_memory_capacity() + tolerance
            {
                return Err(Error::InvalidInput(format!(
                    "allocation for investor {} exceeds budget",
                    inv.investor_id
                )));
            }
        }
        Ok(())
    }
}

/// Shape parameters of the saturating-exponential extraction technology.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QualityTechnology {
    pub saturation_attention: f64,
    pub saturation_memory: f64,
}

impl Default for QualityTechnology {
    fn default() -> Self {
        Self {
            saturation_attention: 1.0,
            saturation_memory: 1.0,
        }
    }
}

impl QualityTechnology {
    pub fn validate(&self) -> Result<()> {
        if !(self.saturation_attention > 0.0) || !(self.saturation_memory > 0.0) {
            return Err(Error::InvalidInput(
                "quality technology shape parameters must be > 0".into(),
            ));
        }
        Ok(())
    }
}

fn channel_factor(saturation: f64, theta: f64, load: f64) -> f64 {
    if load == 0.0 {
        1.0
    } else {
        1.0 - (-saturation * theta / load).exp()
    }
}

/// Fraction of the disclosure's information extracted given the allocated
/// resources. Zero load on a channel means no barrier (factor 1).
pub fn processing_quality(
    theta_a: f64,
    theta_w: f64,
    d: &Disclosure,
    tech: &QualityTechnology,
) -> Result<f64> {
    if theta_a < 0.0 || theta_w < 0.0 {
        return Err(Error::InvalidInput(format!(
            "allocations must be >= 0, got ({theta_a}, {theta_w})"
        )));
    }
    let fa = channel_factor(tech.saturation_attention, theta_a, d.attention_load);
    let fw = channel_factor(tech.saturation_memory, theta_w, d.memory_load);
    Ok(fa * fw)
}

/// Partial derivatives of `processing_quality` with respect to the two
/// allocations. A zero-load channel contributes factor 1 with zero slope.
pub fn processing_quality_gradient(
    theta_a: f64,
    theta_w: f64,
    d: &Disclosure,
    tech: &QualityTechnology,
) -> Result<(f64, f64)> {
    if theta_a < 0.0 || theta_w < 0.0 {
        return Err(Error::InvalidInput(format!(
            "allocations must be >= 0, got ({theta_a}, {theta_w})"
        )));
    }
    let fa = channel_factor(tech.saturation_attention, theta_a, d.attention_load);
    let fw = channel_factor(tech.saturation_memory, theta_w, d.memory_load);
    let dfa = if d.attention_load == 0.0 {
        0.0
    } else {
        let r = tech.saturation_attention / d.attention_load;
        r * (-tech.saturation_attention * theta_a / d.attention_load).exp()
    };
    let dfw = if d.memory_load == 0.0 {
        0.0
    } else {
        let r = tech.saturation_memory / d.memory_load;
        r * (-tech.saturation_memory * theta_w / d.memory_load).exp()
    };
    Ok((dfa * fw, fa * dfw))
}

/// Linear utility in extraction quality, weighted by the absolute economic
/// significance of each disclosure.
pub fn investor_utility(q_row: &[f64], values: &[f64]) -> Result<f64> {
    if q_row.len() != values.len() {
        return Err(Error::InvalidInput(format!(
            "quality row has length {}, values has length {}",
            q_row.len(),
            values.len()
        )));
    }
    Ok(q_row
        .iter()
        .zip(values)
        .map(|(q, v)| v.abs() * q)
        .sum())
}
