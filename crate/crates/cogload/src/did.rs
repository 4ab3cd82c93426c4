//! Two-way fixed-effects difference-in-differences estimation with
//! cluster-robust (CR1) standard errors, event-study coefficients, and
//! placebo randomization.
//!
//! Fixed effects are absorbed by alternating-projections demeaning over the
//! unit and time groups; coefficients come from least squares on the demeaned
//! design. The CR1 covariance is
//!
//! `(G/(G−1)) · ((n−1)/(n−k)) · (X'X)⁻¹ (Σ_g X_g'u_g u_g'X_g) (X'X)⁻¹`
//!
//! with one-way clustering by the configured key.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Column-oriented panel with string-keyed columns, as read from CSV.
#[derive(Debug, Clone)]
pub struct PanelData {
    headers: Vec<String>,
    columns: Vec<Vec<String>>,
    n_rows: usize,
}

impl PanelData {
    pub fn new(headers: Vec<String>, columns: Vec<Vec<String>>) -> Result<Self> {
        if headers.len() != columns.len() {
            return Err(Error::InvalidInput("header/column count mismatch".into()));
        }
        let n_rows = columns.first().map_or(0, Vec::len);
        if columns.iter().any(|c| c.len() != n_rows) {
            return Err(Error::InvalidInput("ragged panel columns".into()));
        }
        Ok(Self {
            headers,
            columns,
            n_rows,
        })
    }

    pub fn from_csv<R: std::io::Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(reader);
        let headers: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
        let mut columns: Vec<Vec<String>> = vec![Vec::new(); headers.len()];
        for record in rdr.records() {
            let record = record?;
            if record.len() != headers.len() {
                return Err(Error::InvalidInput("ragged CSV record".into()));
            }
            for (col, field) in columns.iter_mut().zip(record.iter()) {
                col.push(field.to_string());
            }
        }
        let n_rows = columns.first().map_or(0, Vec::len);
        Ok(Self {
            headers,
            columns,
            n_rows,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn column(&self, name: &str) -> Result<&[String]> {
        self.headers
            .iter()
            .position(|h| h == name)
            .map(|i| self.columns[i].as_slice())
            .ok_or_else(|| Error::MissingColumn(name.to_string()))
    }

    pub fn numeric(&self, name: &str) -> Result<Vec<f64>> {
        self.column(name)?
            .iter()
            .map(|v| {
                v.parse::<f64>().map_err(|_| Error::NonNumericColumn {
                    column: name.to_string(),
                    value: v.clone(),
                })
            })
            .collect()
    }

    /// Integer-valued time column (periods).
    pub fn periods(&self, name: &str) -> Result<Vec<i64>> {
        Ok(self.numeric(name)?.iter().map(|&p| p.round() as i64).collect())
    }
}

/// Group labels mapped to dense indices.
fn group_index(labels: &[String]) -> (Vec<usize>, usize) {
    let mut map: HashMap<&str, usize> = HashMap::new();
    let mut idx = Vec::with_capacity(labels.len());
    for label in labels {
        let next = map.len();
        idx.push(*map.entry(label.as_str()).or_insert(next));
    }
    (idx, map.len())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DidSpec {
    pub outcome: String,
    pub treatment: String,
    #[serde(default)]
    pub controls: Vec<String>,
    pub unit: String,
    pub time: String,
    pub cluster: String,
    #[serde(default = "default_demean_tolerance")]
    pub demean_tolerance: f64,
    #[serde(default = "default_max_demean_sweeps")]
    pub max_demean_sweeps: usize,
}

fn default_demean_tolerance() -> f64 {
    1e-10
}

fn default_max_demean_sweeps() -> usize {
    200
}

impl DidSpec {
    pub fn validate(&self, panel: &PanelData) -> Result<()> {
        if self.outcome == self.treatment {
            return Err(Error::InvalidInput("outcome and treatment must differ".into()));
        }
        for key in [&self.outcome, &self.treatment, &self.unit, &self.time, &self.cluster]
            .into_iter()
            .chain(&self.controls)
        {
            panel.column(key)?;
        }
        Ok(())
    }
}

/// Alternating-projections demeaning of `columns` over two grouping keys,
/// in place, until every within-group column mean is below `tolerance`.
pub fn demean_two_way(
    columns: &mut [Vec<f64>],
    unit_idx: &[usize],
    n_units: usize,
    time_idx: &[usize],
    n_times: usize,
    tolerance: f64,
    max_sweeps: usize,
) -> Result<usize> {
    let n = unit_idx.len();
    let mut unit_count = vec![0usize; n_units];
    let mut time_count = vec![0usize; n_times];
    for &u in unit_idx {
        unit_count[u] += 1;
    }
    for &t in time_idx {
        time_count[t] += 1;
    }
    if unit_count.iter().any(|&c| c == 0) || time_count.iter().any(|&c| c == 0) {
        return Err(Error::InvalidInput("empty fixed-effect group".into()));
    }

    let mut residual = f64::INFINITY;
    for sweep in 1..=max_sweeps {
        residual = 0.0;
        for col in columns.iter_mut() {
            debug_assert_eq!(col.len(), n);
            let mut unit_mean = vec![0.0; n_units];
            for (&u, &v) in unit_idx.iter().zip(col.iter()) {
                unit_mean[u] += v;
            }
            for (m, &c) in unit_mean.iter_mut().zip(&unit_count) {
                *m /= c as f64;
            }
            for (&u, v) in unit_idx.iter().zip(col.iter_mut()) {
                *v -= unit_mean[u];
            }
            let mut time_mean = vec![0.0; n_times];
            for (&t, &v) in time_idx.iter().zip(col.iter()) {
                time_mean[t] += v;
            }
            for (m, &c) in time_mean.iter_mut().zip(&time_count) {
                *m /= c as f64;
            }
            for (&t, v) in time_idx.iter().zip(col.iter_mut()) {
                *v -= time_mean[t];
            }
            // residual: unit means just moved away from zero by the time pass
            let mut check = vec![0.0; n_units];
            for (&u, &v) in unit_idx.iter().zip(col.iter()) {
                check[u] += v;
            }
            for (s, &c) in check.iter().zip(&unit_count) {
                residual = residual.max((s / c as f64).abs());
            }
        }
        if residual < tolerance {
            return Ok(sweep);
        }
    }
    Err(Error::DemeanNonConvergence {
        residual,
        sweeps: max_sweeps,
    })
}

/// The demeaned design for one estimation: outcome first, then regressors.
#[derive(Debug, Clone)]
pub struct DemeanedDesign {
    pub outcome: Vec<f64>,
    pub regressors: Vec<Vec<f64>>,
    pub regressor_names: Vec<String>,
    pub unit_idx: Vec<usize>,
    pub time_idx: Vec<usize>,
    pub n_units: usize,
    pub n_times: usize,
}

/// Demean outcome, treatment, and controls over the spec's unit and time
/// fixed effects.
pub fn within_transform(panel: &PanelData, spec: &DidSpec) -> Result<DemeanedDesign> {
    spec.validate(panel)?;
    let treatment = panel.numeric(&spec.treatment)?;
    within_transform_with_treatment(panel, spec, treatment)
}

fn within_transform_with_treatment(
    panel: &PanelData,
    spec: &DidSpec,
    treatment: Vec<f64>,
) -> Result<DemeanedDesign> {
    let (unit_idx, n_units) = group_index(panel.column(&spec.unit)?);
    let (time_idx, n_times) = group_index(panel.column(&spec.time)?);

    let mut columns = vec![panel.numeric(&spec.outcome)?, treatment];
    let mut names = vec![spec.treatment.clone()];
    for control in &spec.controls {
        columns.push(panel.numeric(control)?);
        names.push(control.clone());
    }
    demean_two_way(
        &mut columns,
        &unit_idx,
        n_units,
        &time_idx,
        n_times,
        spec.demean_tolerance,
        spec.max_demean_sweeps,
    )?;
    let outcome = columns.remove(0);
    Ok(DemeanedDesign {
        outcome,
        regressors: columns,
        regressor_names: names,
        unit_idx,
        time_idx,
        n_units,
        n_times,
    })
}

/// Fitted two-way fixed-effects regression.
#[derive(Debug, Clone, Serialize)]
pub struct DidFit {
    pub beta_treatment: f64,
    pub coefficient_names: Vec<String>,
    pub coefficients: Vec<f64>,
    pub cluster_robust_se: Vec<f64>,
    pub n_obs: usize,
    pub n_clusters: usize,
    pub r_squared_within: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub event_study: Option<Vec<EventStudyCell>>,
}

impl DidFit {
    pub fn t_statistic(&self) -> f64 {
        self.beta_treatment / self.cluster_robust_se[0]
    }
}

fn cluster_ols(
    outcome: &[f64],
    regressors: &[Vec<f64>],
    names: &[String],
    cluster_idx: &[usize],
    n_clusters: usize,
) -> Result<DidFit> {
    let n = outcome.len();
    let k = regressors.len();
    if n_clusters < 2 {
        return Err(Error::TooFewClusters {
            found: n_clusters,
            needed: 2,
        });
    }
    if n <= k {
        return Err(Error::RankDeficient(format!("{n} rows for {k} regressors")));
    }
    let x = DMatrix::from_fn(n, k, |i, j| regressors[j][i]);
    let y = DVector::from_column_slice(outcome);
    let xtx = x.transpose() * &x;
    let xty = x.transpose() * &y;

    // rank check on the demeaned design
    let svd = xtx.clone().svd(false, false);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if smax <= 0.0 || smin / smax < 1e-10 {
        let mut collinear: Vec<&str> = names.iter().map(String::as_str).collect();
        collinear.sort_unstable();
        return Err(Error::RankDeficient(format!(
            "design is collinear after demeaning (columns: {})",
            collinear.join(", ")
        )));
    }

    let xtx_inv = xtx
        .try_inverse()
        .ok_or_else(|| Error::RankDeficient("X'X not invertible".into()))?;
    let beta = &xtx_inv * xty;
    let residuals = &y - &x * &beta;

    // CR1 meat: sum over clusters of (X_g' u_g)(X_g' u_g)'
    let mut scores = vec![DVector::<f64>::zeros(k); n_clusters];
    for i in 0..n {
        let g = cluster_idx[i];
        for j in 0..k {
            scores[g][j] += x[(i, j)] * residuals[i];
        }
    }
    let mut meat = DMatrix::<f64>::zeros(k, k);
    for s in &scores {
        meat += s * s.transpose();
    }
    let g = n_clusters as f64;
    let correction = (g / (g - 1.0)) * ((n as f64 - 1.0) / (n as f64 - k as f64));
    let cov = correction * &xtx_inv * meat * &xtx_inv;
    let se: Vec<f64> = (0..k).map(|j| cov[(j, j)].max(0.0).sqrt()).collect();

    let ss_res: f64 = residuals.iter().map(|r| r * r).sum();
    let ss_tot: f64 = outcome.iter().map(|v| v * v).sum();
    let r2 = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 0.0 };

    Ok(DidFit {
        beta_treatment: beta[0],
        coefficient_names: names.to_vec(),
        coefficients: beta.iter().cloned().collect(),
        cluster_robust_se: se,
        n_obs: n,
        n_clusters,
        r_squared_within: r2,
        event_study: None,
    })
}

/// Estimate the treatment effect with two-way fixed effects and CR1
/// clustered standard errors.
pub fn estimate(panel: &PanelData, spec: &DidSpec) -> Result<DidFit> {
    let design = within_transform(panel, spec)?;
    let (cluster_idx, n_clusters) = group_index(panel.column(&spec.cluster)?);
    cluster_ols(
        &design.outcome,
        &design.regressors,
        &design.regressor_names,
        &cluster_idx,
        n_clusters,
    )
}

/// `estimate` with the treatment column replaced (placebo draws).
pub fn estimate_with_treatment(
    panel: &PanelData,
    spec: &DidSpec,
    treatment: Vec<f64>,
) -> Result<DidFit> {
    spec.validate(panel)?;
    if treatment.len() != panel.n_rows() {
        return Err(Error::InvalidInput("treatment column length mismatch".into()));
    }
    let design = within_transform_with_treatment(panel, spec, treatment)?;
    let (cluster_idx, n_clusters) = group_index(panel.column(&spec.cluster)?);
    cluster_ols(
        &design.outcome,
        &design.regressors,
        &design.regressor_names,
        &cluster_idx,
        n_clusters,
    )
}

/// One relative-period cell of the event study.
#[derive(Debug, Clone, Serialize)]
pub struct EventStudyCell {
    pub relative_period: i64,
    pub n_obs: usize,
    pub coefficient: Option<f64>,
    pub se: Option<f64>,
}

/// First treated period per unit, `None` for never-treated units.
pub fn adoption_periods(panel: &PanelData, spec: &DidSpec) -> Result<HashMap<usize, i64>> {
    let (unit_idx, _) = group_index(panel.column(&spec.unit)?);
    let periods = panel.periods(&spec.time)?;
    let treatment = panel.numeric(&spec.treatment)?;
    let mut adoption: HashMap<usize, i64> = HashMap::new();
    for i in 0..panel.n_rows() {
        if treatment[i] > 0.5 {
            adoption
                .entry(unit_idx[i])
                .and_modify(|p| *p = (*p).min(periods[i]))
                .or_insert(periods[i]);
        }
    }
    Ok(adoption)
}

/// Event-study specification: relative-time dummies around adoption, with
/// period −1 as the omitted reference and window endpoints binned.
///
/// Cells with zero observations are reported with `None` coefficients,
/// never silently dropped.
pub fn event_study(
    panel: &PanelData,
    spec: &DidSpec,
    window: (usize, usize),
) -> Result<Vec<EventStudyCell>> {
    spec.validate(panel)?;
    let (pre, post) = window;
    let adoption = adoption_periods(panel, spec)?;
    if adoption.is_empty() {
        return Err(Error::InvalidInput("no treated units in panel".into()));
    }
    let (unit_idx, _) = group_index(panel.column(&spec.unit)?);
    let periods = panel.periods(&spec.time)?;
    let n = panel.n_rows();

    let rel_range: Vec<i64> = (-(pre as i64)..=post as i64).filter(|&r| r != -1).collect();
    let mut dummies: Vec<Vec<f64>> = vec![vec![0.0; n]; rel_range.len()];
    let mut cell_counts: Vec<usize> = vec![0; rel_range.len()];
    for i in 0..n {
        if let Some(&adopt) = adoption.get(&unit_idx[i]) {
            let rel = (periods[i] - adopt).clamp(-(pre as i64), post as i64);
            if rel == -1 {
                continue;
            }
            let slot = rel_range.iter().position(|&r| r == rel).unwrap();
            dummies[slot][i] = 1.0;
            cell_counts[slot] += 1;
        }
    }

    // drop empty cells from the design but keep them in the report
    let mut names: Vec<String> = Vec::new();
    let mut columns: Vec<Vec<f64>> = Vec::new();
    let mut kept: Vec<usize> = Vec::new();
    for (slot, rel) in rel_range.iter().enumerate() {
        if cell_counts[slot] > 0 {
            names.push(format!("rel_{rel}"));
            columns.push(std::mem::take(&mut dummies[slot]));
            kept.push(slot);
        }
    }
    for control in &spec.controls {
        names.push(control.clone());
        columns.push(panel.numeric(control)?);
    }
    let (time_idx, n_times) = group_index(panel.column(&spec.time)?);
    let (unit_idx2, n_units) = group_index(panel.column(&spec.unit)?);
    let mut all = vec![panel.numeric(&spec.outcome)?];
    all.extend(columns);
    demean_two_way(
        &mut all,
        &unit_idx2,
        n_units,
        &time_idx,
        n_times,
        spec.demean_tolerance,
        spec.max_demean_sweeps,
    )?;
    let outcome = all.remove(0);

    let (cluster_idx, n_clusters) = group_index(panel.column(&spec.cluster)?);
    let fit = cluster_ols(&outcome, &all, &names, &cluster_idx, n_clusters)?;

    let mut cells = Vec::with_capacity(rel_range.len());
    for (slot, &rel) in rel_range.iter().enumerate() {
        match kept.iter().position(|&s| s == slot) {
            Some(pos) => cells.push(EventStudyCell {
                relative_period: rel,
                n_obs: cell_counts[slot],
                coefficient: Some(fit.coefficients[pos]),
                se: Some(fit.cluster_robust_se[pos]),
            }),
            None => cells.push(EventStudyCell {
                relative_period: rel,
                n_obs: 0,
                coefficient: None,
                se: None,
            }),
        }
    }
    Ok(cells)
}

/// Placebo distribution of the treatment coefficient under randomized
/// adoption dates.
#[derive(Debug, Clone, Serialize)]
pub struct PlaceboResult {
    pub actual_beta: f64,
    pub placebo_betas: Vec<f64>,
    pub p_value: f64,
    pub failed_draws: usize,
}

/// Re-estimate under uniformly random per-unit adoption periods and return
/// the empirical two-sided p-value of the actual treatment coefficient.
pub fn placebo_test<R: Rng>(
    panel: &PanelData,
    spec: &DidSpec,
    n_draws: usize,
    rng: &mut R,
) -> Result<PlaceboResult> {
    if n_draws < 100 {
        return Err(Error::InvalidInput("placebo test needs at least 100 draws".into()));
    }
    let actual = estimate(panel, spec)?;
    let (unit_idx, n_units) = group_index(panel.column(&spec.unit)?);
    let periods = panel.periods(&spec.time)?;
    let mut distinct: Vec<i64> = periods.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    // candidate adoption dates: every observed period plus "never"
    let never = distinct.last().unwrap() + 1;
    let mut candidates = distinct;
    candidates.push(never);

    let mut betas = Vec::with_capacity(n_draws);
    let mut failed = 0usize;
    for _ in 0..n_draws {
        let adoption: Vec<i64> = (0..n_units)
            .map(|_| candidates[rng.gen_range(0..candidates.len())])
            .collect();
        let treated: Vec<f64> = (0..panel.n_rows())
            .map(|i| f64::from(periods[i] >= adoption[unit_idx[i]]))
            .collect();
        match estimate_with_treatment(panel, spec, treated) {
            Ok(fit) => betas.push(fit.beta_treatment),
            Err(_) => failed += 1,
        }
    }
    if betas.is_empty() {
        return Err(Error::InvalidInput("all placebo draws failed".into()));
    }
    let extreme = betas
        .iter()
        .filter(|b| b.abs() >= actual.beta_treatment.abs())
        .count();
    let p_value = (1.0 + extreme as f64) / (1.0 + betas.len() as f64);
    Ok(PlaceboResult {
        actual_beta: actual.beta_treatment,
        placebo_betas: betas,
        p_value,
        failed_draws: failed,
    })
}
