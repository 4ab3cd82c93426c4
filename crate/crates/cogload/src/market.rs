//! Equilibrium pricing from aggregate processing quality, mispricing, and the
//! load/price-discovery sweep.
//!
//! The default pricing rule is partial adjustment from an anchor price toward
//! the fundamental, weighted by aggregate processing quality:
//!
//! `P_j = P_j0 + (Σ_i ω_i Q_ij) · (V_j − P_j0)`
//!
//! Full processing gives P = V and zero processing leaves the anchor price
//! unmoved. The literal aggregation rule `P_j = (Σ_i ω_i Q_ij) · V_j` is kept
//! behind [`PricingRule::Literal`] for comparison.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Disclosure, InvestorProfile, QualityTechnology};
use crate::solver::{solve_allocation, SolverConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PricingRule {
    /// Partial adjustment from the anchor price toward the fundamental.
    #[default]
    AnchorAdjustment,
    /// Prices proportional to quality-weighted fundamentals.
    Literal,
}

#[derive(Debug, Clone)]
pub struct MarketState {
    pub investors: Vec<InvestorProfile>,
    pub disclosures: Vec<Disclosure>,
    pub fundamental_values: Vec<f64>,
    pub anchor_prices: Vec<f64>,
    /// quality[i][j]: investor i's extraction quality for asset j.
    pub quality: Vec<Vec<f64>>,
    pub pricing_rule: PricingRule,
}

impl MarketState {
    pub fn new(
        investors: Vec<InvestorProfile>,
        disclosures: Vec<Disclosure>,
        fundamental_values: Vec<f64>,
        anchor_prices: Vec<f64>,
        quality: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let n = investors.len();
        let m = disclosures.len();
        if fundamental_values.len() != m || anchor_prices.len() != m {
            return Err(Error::InvalidInput(format!(
                "expected {m} fundamentals and anchors, got {} and {}",
                fundamental_values.len(),
                anchor_prices.len()
            )));
        }
        if quality.len() != n || quality.iter().any(|row| row.len() != m) {
            return Err(Error::InvalidInput("quality matrix shape mismatch".into()));
        }
        if quality.iter().flatten().any(|&q| !(0.0..=1.0).contains(&q)) {
            return Err(Error::InvalidInput("quality entries must lie in [0, 1]".into()));
        }
        let weight_sum: f64 = investors.iter().map(|i| i.market_weight).sum();
        if (weight_sum - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidInput(format!(
                "market weights must sum to 1, got {weight_sum}"
            )));
        }
        Ok(Self {
            investors,
            disclosures,
            fundamental_values,
            anchor_prices,
            quality,
            pricing_rule: PricingRule::default(),
        })
    }

    pub fn with_pricing_rule(mut self, rule: PricingRule) -> Self {
        self.pricing_rule = rule;
        self
    }

    /// Σ_i ω_i Q_ij for each asset.
    pub fn aggregate_quality(&self) -> Vec<f64> {
        let m = self.disclosures.len();
        let mut agg = vec![0.0; m];
        for (inv, row) in self.investors.iter().zip(&self.quality) {
            for (a, q) in agg.iter_mut().zip(row) {
                *a += inv.market_weight * q;
            }
        }
        agg
    }
}

/// Equilibrium price vector under the state's pricing rule.
pub fn equilibrium_prices(state: &MarketState) -> Vec<f64> {
    let agg = state.aggregate_quality();
    match state.pricing_rule {
        PricingRule::AnchorAdjustment => agg
            .iter()
            .zip(&state.anchor_prices)
            .zip(&state.fundamental_values)
            .map(|((a, p0), v)| p0 + a * (v - p0))
            .collect(),
        PricingRule::Literal => agg
            .iter()
            .zip(&state.fundamental_values)
            .map(|(a, v)| a * v)
            .collect(),
    }
}

/// Absolute pricing error |P_j − V_j| per asset.
pub fn mispricing(state: &MarketState, prices: &[f64]) -> Vec<f64> {
    prices
        .iter()
        .zip(&state.fundamental_values)
        .map(|(p, v)| (p - v).abs())
        .collect()
}

/// One row of the load/price-discovery sweep.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub load: f64,
    pub mean_mispricing: f64,
}

/// Re-solve the whole market at each load level and record mean mispricing.
///
/// Every disclosure's structure is set so its cognitive load equals the grid
/// value, all investors re-optimize, prices are recomputed, and the mean
/// |P − V| across assets is recorded.
pub fn proposition2_sweep(
    base: &MarketState,
    load_grid: &[f64],
    load_map: &crate::model::LoadMap,
    tech: &QualityTechnology,
    cfg: &SolverConfig,
) -> Result<Vec<SweepRow>> {
    if load_grid.len() < 2 {
        return Err(Error::InvalidInput("load grid needs at least 2 points".into()));
    }
    if load_grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidInput("load grid must be nondecreasing".into()));
    }
    let mut rows = Vec::with_capacity(load_grid.len());
    for &load in load_grid {
        let disclosures: Vec<Disclosure> = base
            .disclosures
            .iter()
            .map(|d| {
                Disclosure::new(
                    d.firm_id.clone(),
                    d.content,
                    load_map.structure_for_load(load),
                    load_map,
                )
            })
            .collect::<Result<_>>()?;
        let mut quality = Vec::with_capacity(base.investors.len());
        for inv in &base.investors {
            let (alloc, _) = solve_allocation(inv, &disclosures, tech, cfg)?;
            quality.push(alloc.qualities(&disclosures, tech)?);
        }
        let state = MarketState::new(
            base.investors.clone(),
            disclosures,
            base.fundamental_values.clone(),
            base.anchor_prices.clone(),
            quality,
        )?
        .with_pricing_rule(base.pricing_rule);
        let prices = equilibrium_prices(&state);
        let errs = mispricing(&state, &prices);
        let mean = errs.iter().sum::<f64>() / errs.len() as f64;
        rows.push(SweepRow {
            load,
            mean_mispricing: mean,
        });
    }
    Ok(rows)
}

/// Write sweep rows as CSV with header `load,mean_mispricing`.
pub fn write_sweep_csv<W: std::io::Write>(rows: &[SweepRow], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["load", "mean_mispricing"])?;
    for row in rows {
        w.write_record([format!("{}", row.load), format!("{}", row.mean_mispricing)])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::LoadMap;

    fn investors(weights: &[f64]) -> Vec<InvestorProfile> {
        weights
            .iter()
            .enumerate()
            .map(|(i, &w)| InvestorProfile::new(format!("i{i}"), 1.0, 1.0, w, 1.0).unwrap())
            .collect()
    }

    fn one_asset_state(quality_col: Vec<f64>, p0: f64, v: f64) -> MarketState {
        let n = quality_col.len();
        let weights = vec![1.0 / n as f64; n];
        let d = Disclosure::new("f", v - p0, 1.0, &LoadMap::default()).unwrap();
        MarketState::new(
            investors(&weights),
            vec![d],
            vec![v],
            vec![p0],
            quality_col.into_iter().map(|q| vec![q]).collect(),
        )
        .unwrap()
    }

    #[test]
    fn perfect_processing_recovers_fundamental() {
        let state = one_asset_state(vec![1.0, 1.0], 10.0, 14.0);
        let p = equilibrium_prices(&state);
        assert!((p[0] - 14.0).abs() < 1e-12);
        assert_eq!(mispricing(&state, &p)[0], 0.0);
    }

    #[test]
    fn zero_processing_leaves_anchor() {
        let state = one_asset_state(vec![0.0, 0.0], 10.0, 14.0);
        let p = equilibrium_prices(&state);
        assert!((p[0] - 10.0).abs() < 1e-12);
        assert!((mispricing(&state, &p)[0] - 4.0).abs() < 1e-12);
    }

    #[test]
    fn hand_example() {
        // omega = (0.5, 0.5), Q = (0.2, 0.6), P0 = 10, V = 14
        let state = one_asset_state(vec![0.2, 0.6], 10.0, 14.0);
        let p = equilibrium_prices(&state);
        assert!((p[0] - 11.6).abs() < 1e-12);
        assert!((mispricing(&state, &p)[0] - 2.4).abs() < 1e-12);
    }

    #[test]
    fn literal_rule() {
        let state = one_asset_state(vec![0.2, 0.6], 10.0, 14.0).with_pricing_rule(PricingRule::Literal);
        let p = equilibrium_prices(&state);
        assert!((p[0] - 0.4 * 14.0).abs() < 1e-12);
    }

    #[test]
    fn price_lies_between_anchor_and_fundamental() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let p0 = rng.gen_range(-5.0..20.0);
            let v = rng.gen_range(-5.0..20.0);
            let q: Vec<f64> = (0..3).map(|_| rng.gen_range(0.0..1.0)).collect();
            let state = one_asset_state(q, p0, v);
            let p = equilibrium_prices(&state)[0];
            let (lo, hi) = (p0.min(v), p0.max(v));
            assert!(p >= lo - 1e-12 && p <= hi + 1e-12);
        }
    }

    #[test]
    fn weights_must_normalize() {
        let d = Disclosure::new("f", 1.0, 1.0, &LoadMap::default()).unwrap();
        let result = MarketState::new(
            investors(&[0.5, 0.6]),
            vec![d],
            vec![1.0],
            vec![0.0],
            vec![vec![0.5], vec![0.5]],
        );
        assert!(result.is_err());
    }

    fn sweep_base(high_share: f64, n: usize) -> MarketState {
        let mut invs = Vec::new();
        let n_high = (high_share * n as f64).round() as usize;
        for i in 0..n {
            let soph = if i < n_high { 1.0 } else { 0.2 };
            invs.push(InvestorProfile::new(format!("i{i}"), 1.0, 1.0, 1.0 / n as f64, soph).unwrap());
        }
        let map = LoadMap::default();
        let ds = vec![
            Disclosure::new("a", 3.0, 1.0, &map).unwrap(),
            Disclosure::new("b", -2.0, 1.0, &map).unwrap(),
        ];
        MarketState::new(invs, ds, vec![13.0, 8.0], vec![10.0, 10.0], vec![vec![0.0, 0.0]; n])
            .unwrap()
    }

    #[test]
    fn sweep_mispricing_nondecreasing_in_load() {
        let base = sweep_base(0.5, 6);
        let rows = proposition2_sweep(
            &base,
            &[1.0, 2.0, 4.0],
            &LoadMap::default(),
            &QualityTechnology::default(),
            &SolverConfig::default(),
        )
        .unwrap();
        for w in rows.windows(2) {
            assert!(w[1].mean_mispricing >= w[0].mean_mispricing - 1e-9);
        }
    }

    #[test]
    fn sweep_constant_on_repeated_load() {
        let base = sweep_base(0.5, 4);
        let rows = proposition2_sweep(
            &base,
            &[2.0, 2.0],
            &LoadMap::default(),
            &QualityTechnology::default(),
            &SolverConfig::default(),
        )
        .unwrap();
        assert!((rows[0].mean_mispricing - rows[1].mean_mispricing).abs() < 1e-12);
    }

    #[test]
    fn more_high_capacity_investors_weakly_lower_mispricing() {
        let grid = [1.0, 2.0, 4.0];
        let low = proposition2_sweep(
            &sweep_base(0.2, 10),
            &grid,
            &LoadMap::default(),
            &QualityTechnology::default(),
            &SolverConfig::default(),
        )
        .unwrap();
        let high = proposition2_sweep(
            &sweep_base(0.4, 10),
            &grid,
            &LoadMap::default(),
            &QualityTechnology::default(),
            &SolverConfig::default(),
        )
        .unwrap();
        for (lo, hi) in low.iter().zip(&high) {
            assert!(hi.mean_mispricing <= lo.mean_mispricing + 1e-9);
        }
    }
}
