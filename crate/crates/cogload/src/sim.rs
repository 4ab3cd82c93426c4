//! Multi-period, multi-firm disclosure-event simulation with staggered
//! load-reducing treatment.
//!
//! Each firm-period is one disclosure event. On day 0 the focal disclosure is
//! released alongside a set of distractor disclosures competing for
//! attention. Each trading day, every investor picks its processing slots
//! among its still-unprocessed assets by load-sensitive selective attention,
//! solves the allocation problem over the picked assets, and perceives the
//! focal content with capacity-scaled noise. The price adjusts from the
//! pre-event anchor by cumulative quality-weighted perceived content, and the
//! three price-discovery outcomes are read off the daily path.
//!
//! Treatment multiplies the focal firm's disclosure structure by
//! `treatment_load_multiplier` from its adoption period onward, phasing in
//! linearly over `treatment_ramp_periods` periods.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mechanisms::{
    attention_probabilities, processing_error, sample_without_replacement, MechanismParams,
};
use crate::model::{Disclosure, InvestorProfile, LoadMap, QualityTechnology};
use crate::solver::{solve_allocation, SolverConfig};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimConfig {
    pub n_firms: usize,
    pub n_investors: usize,
    pub n_periods: usize,
    pub trading_days_per_period: usize,
    /// Competing disclosures released alongside the focal one.
    pub n_distractors: usize,
    /// Assets an investor can process per day.
    pub processing_slots: usize,
    /// Cohort name -> adoption period; a period equal to `n_periods` means
    /// the cohort is never treated. Firms are assigned round-robin in cohort
    /// name order.
    pub treatment_start_periods: BTreeMap<String, usize>,
    /// Factor applied to treated firms' disclosure structure, in (0, 1].
    pub treatment_load_multiplier: f64,
    /// Periods over which the multiplier phases in linearly.
    pub treatment_ramp_periods: usize,
    /// Range of the firm-level share of high-sophistication investors.
    pub sophistication_mix_range: [f64; 2],
    pub high_sophistication: f64,
    pub low_sophistication: f64,
    pub attention_capacity: f64,
    pub memory_capacity: f64,
    /// Range of untreated disclosure structure.
    pub structure_range: [f64; 2],
    pub value_shock_std: f64,
    pub rng_seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        let mut cohorts = BTreeMap::new();
        cohorts.insert("c1_early".to_string(), 12);
        cohorts.insert("c2_mid".to_string(), 20);
        cohorts.insert("c3_late".to_string(), 28);
        cohorts.insert("c4_never".to_string(), 40);
        Self {
            n_firms: 200,
            n_investors: 50,
            n_periods: 40,
            trading_days_per_period: 30,
            n_distractors: 39,
            processing_slots: 1,
            treatment_start_periods: cohorts,
            treatment_load_multiplier: 0.7,
            treatment_ramp_periods: 3,
            sophistication_mix_range: [0.2, 0.8],
            high_sophistication: 1.0,
            low_sophistication: 0.2,
            attention_capacity: 1.0,
            memory_capacity: 1.0,
            structure_range: [0.5, 2.0],
            value_shock_std: 1.0,
            rng_seed: 12345,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_firms == 0 || self.n_investors == 0 || self.n_periods == 0 {
            return Err(Error::Config("firm/investor/period counts must be positive".into()));
        }
        if self.trading_days_per_period == 0 {
            return Err(Error::Config("trading_days_per_period must be positive".into()));
        }
        if !(self.treatment_load_multiplier > 0.0 && self.treatment_load_multiplier <= 1.0) {
            return Err(Error::Config("treatment_load_multiplier must be in (0, 1]".into()));
        }
        if self.treatment_start_periods.is_empty() {
            return Err(Error::Config("need at least one treatment cohort".into()));
        }
        for (name, &period) in &self.treatment_start_periods {
            if period > self.n_periods {
                return Err(Error::Config(format!(
                    "cohort {name} adopts at period {period}, beyond n_periods {}",
                    self.n_periods
                )));
            }
        }
        if self.processing_slots == 0 || self.processing_slots > self.n_distractors + 1 {
            return Err(Error::Config("processing_slots must be in [1, n_distractors + 1]".into()));
        }
        let [lo, hi] = self.sophistication_mix_range;
        if !(0.0..=1.0).contains(&lo) || !(0.0..=1.0).contains(&hi) || lo > hi {
            return Err(Error::Config("sophistication_mix_range must be ordered within [0, 1]".into()));
        }
        let [slo, shi] = self.structure_range;
        if !(slo > 0.0) || slo > shi {
            return Err(Error::Config("structure_range must be positive and ordered".into()));
        }
        if !(self.value_shock_std > 0.0) {
            return Err(Error::Config("value_shock_std must be positive".into()));
        }
        if !(self.low_sophistication > 0.0)
            || self.low_sophistication > self.high_sophistication
            || self.high_sophistication > 1.0
        {
            return Err(Error::Config(
                "need 0 < low_sophistication <= high_sophistication <= 1".into(),
            ));
        }
        Ok(())
    }

    /// Effective structure multiplier at `period` for a firm adopting at
    /// `adoption`. Phases in linearly over the ramp.
    pub fn effective_multiplier(&self, period: usize, adoption: usize) -> f64 {
        if period < adoption {
            return 1.0;
        }
        let since = period - adoption;
        let ramp = self.treatment_ramp_periods.max(1) as f64;
        let phase = ((since + 1) as f64 / ramp).min(1.0);
        1.0 - (1.0 - self.treatment_load_multiplier) * phase
    }
}

/// Price-discovery outcomes of one event.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct EventOutcome {
    pub incorporation_speed_days: f64,
    pub incorporation_accuracy: f64,
    pub mispricing_duration_days: f64,
}

/// One firm-period row of the synthetic panel.
#[derive(Debug, Clone, Serialize)]
pub struct PanelObservation {
    pub firm_id: String,
    pub period: usize,
    /// ln(incorporation speed in days).
    pub log_speed: f64,
    pub accuracy: f64,
    /// ln(1 + mispricing duration in days).
    pub log_duration: f64,
    pub treated: u8,
    pub log_mktcap: f64,
    pub inst_own: f64,
    pub analyst_cov: f64,
    pub cluster_id: String,
    pub censored: u8,
}

/// Daily price path of one event, for plot dumps.
#[derive(Debug, Clone)]
pub struct EventPath {
    pub firm_id: String,
    pub period: usize,
    pub anchor: f64,
    pub fundamental: f64,
    /// prices[d] is the close of day d+1.
    pub prices: Vec<f64>,
}

#[derive(Debug)]
pub enum EventResult {
    /// |V - P0| below threshold; the row is excluded from the panel.
    Degenerate,
    Outcome {
        outcome: EventOutcome,
        censored: bool,
        path: Vec<f64>,
    },
}

/// Read the three outcomes off a daily price path.
///
/// Speed: first day cumulative adjustment reaches 90% of the eventual total.
/// Accuracy: day-1 share of the total, clamped to [0, 1]. Duration: last day
/// the residual gap to fundamental exceeds 10% of the initial gap. An event
/// with no adjustment at all is censored at the period cap.
pub fn extract_outcomes(path: &[f64], anchor: f64, fundamental: f64) -> EventResult {
    let initial_gap = (fundamental - anchor).abs();
    if initial_gap < 1e-9 {
        return EventResult::Degenerate;
    }
    let t_max = path.len();
    let total = path[t_max - 1] - anchor;
    if total.abs() < 1e-12 {
        return EventResult::Outcome {
            outcome: EventOutcome {
                incorporation_speed_days: t_max as f64,
                incorporation_accuracy: 0.0,
                mispricing_duration_days: t_max as f64,
            },
            censored: true,
            path: path.to_vec(),
        };
    }
    let ratio = |d: usize| (path[d] - anchor) / total;
    let mut speed = t_max;
    for d in 0..t_max {
        if ratio(d) >= 0.9 {
            speed = d + 1;
            break;
        }
    }
    let accuracy = ratio(0).clamp(0.0, 1.0);
    let mut duration = 0usize;
    for d in 0..t_max {
        if (path[d] - fundamental).abs() > 0.1 * initial_gap {
            duration = d + 1;
        }
    }
    let censored = duration == t_max;
    EventResult::Outcome {
        outcome: EventOutcome {
            incorporation_speed_days: speed as f64,
            incorporation_accuracy: accuracy,
            mispricing_duration_days: duration as f64,
        },
        censored,
        path: path.to_vec(),
    }
}

/// Simulate one disclosure event and extract its outcomes.
#[allow(clippy::too_many_arguments)]
pub fn simulate_event(
    focal: &Disclosure,
    distractors: &[Disclosure],
    investors: &[InvestorProfile],
    anchor: f64,
    fundamental: f64,
    mech: &MechanismParams,
    tech: &QualityTechnology,
    solver_cfg: &SolverConfig,
    processing_slots: usize,
    trading_days: usize,
    rng: &mut ChaCha8Rng,
) -> Result<EventResult> {
    let mut assets: Vec<&Disclosure> = Vec::with_capacity(1 + distractors.len());
    assets.push(focal);
    assets.extend(distractors.iter());
    let m = assets.len();
    let focal_load = focal.load();

    // per-investor contribution to the focal price, keyed by processing day
    let mut contribution_day: Vec<Option<usize>> = vec![None; investors.len()];
    let mut contribution: Vec<f64> = vec![0.0; investors.len()];
    let mut unprocessed: Vec<Vec<usize>> = vec![(0..m).collect(); investors.len()];

    for day in 1..=trading_days {
        for (i, investor) in investors.iter().enumerate() {
            let remaining = &mut unprocessed[i];
            if remaining.is_empty() {
                continue;
            }
            let loads: Vec<f64> = remaining.iter().map(|&j| assets[j].load()).collect();
            let probs = attention_probabilities(&loads, mech.gamma);
            let count = processing_slots.min(remaining.len());
            let picked_pos = sample_without_replacement(&probs, count, rng);
            let picked: Vec<usize> = picked_pos.iter().map(|&p| remaining[p]).collect();

            let selected: Vec<Disclosure> = picked.iter().map(|&j| assets[j].clone()).collect();
            let (alloc, _) = solve_allocation(investor, &selected, tech, solver_cfg)?;
            let qualities = alloc.qualities(&selected, tech)?;

            for (pos, &j) in picked.iter().enumerate() {
                if j == 0 {
                    let perceived =
                        processing_error(focal.content, focal_load, investor, mech, rng);
                    contribution_day[i] = Some(day);
                    contribution[i] = investor.market_weight * qualities[pos] * perceived;
                }
            }
            remaining.retain(|j| !picked.contains(j));
        }
    }

    let mut path = Vec::with_capacity(trading_days);
    let mut level = anchor;
    for day in 1..=trading_days {
        level = anchor
            + contribution
                .iter()
                .zip(&contribution_day)
                .filter(|(_, d)| d.map_or(false, |dd| dd <= day))
                .map(|(c, _)| c)
                .sum::<f64>();
        path.push(level);
    }
    let _ = level;
    Ok(extract_outcomes(&path, anchor, fundamental))
}

#[derive(Debug)]
pub struct SimOutput {
    pub observations: Vec<PanelObservation>,
    pub paths: Vec<EventPath>,
    pub degenerate_events: usize,
}

struct FirmSetup {
    firm_id: String,
    cohort: String,
    adoption: usize,
    mix: f64,
    investors: Vec<InvestorProfile>,
    base_log_mktcap: f64,
    base_analyst_cov: f64,
}

fn build_firm(cfg: &SimConfig, index: usize, rng: &mut ChaCha8Rng) -> Result<FirmSetup> {
    let cohorts: Vec<(&String, &usize)> = cfg.treatment_start_periods.iter().collect();
    let (cohort, adoption) = cohorts[index % cohorts.len()];
    let [lo, hi] = cfg.sophistication_mix_range;
    let mix = if hi > lo { rng.gen_range(lo..=hi) } else { lo };
    let n_high = (mix * cfg.n_investors as f64).round() as usize;
    let weight = 1.0 / cfg.n_investors as f64;
    let mut investors = Vec::with_capacity(cfg.n_investors);
    for k in 0..cfg.n_investors {
        let soph = if k < n_high {
            cfg.high_sophistication
        } else {
            cfg.low_sophistication
        };
        investors.push(InvestorProfile::new(
            format!("f{index}_i{k}"),
            cfg.attention_capacity,
            cfg.memory_capacity,
            weight,
            soph,
        )?);
    }
    Ok(FirmSetup {
        firm_id: format!("f{index:04}"),
        cohort: cohort.clone(),
        adoption: *adoption,
        mix,
        investors,
        base_log_mktcap: rng.gen_range(7.0..11.0),
        base_analyst_cov: rng.gen_range(0.0..20.0),
    })
}

/// Run the full simulation. Deterministic under a fixed config: each firm
/// owns an independent generator stream derived from the master seed, and
/// rows are emitted in (firm, period) order.
pub fn run_simulation(
    cfg: &SimConfig,
    mech: &MechanismParams,
    tech: &QualityTechnology,
    load_map: &LoadMap,
    solver_cfg: &SolverConfig,
    collect_paths: bool,
) -> Result<SimOutput> {
    cfg.validate()?;
    mech.validate()?;
    tech.validate()?;
    solver_cfg.validate()?;

    let shock = Normal::new(0.0, cfg.value_shock_std)
        .map_err(|e| Error::Config(format!("bad shock std: {e}")))?;
    let mut observations = Vec::with_capacity(cfg.n_firms * cfg.n_periods);
    let mut paths = Vec::new();
    let mut degenerate = 0usize;

    for firm_index in 0..cfg.n_firms {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
        rng.set_stream(firm_index as u64 + 1);
        let firm = build_firm(cfg, firm_index, &mut rng)?;

        let mut price = 10.0;
        let mut log_mktcap = firm.base_log_mktcap;
        for period in 0..cfg.n_periods {
            let anchor = price;
            let content: f64 = shock.sample(&mut rng);
            let fundamental = anchor + content;

            let multiplier = cfg.effective_multiplier(period, firm.adoption);
            let [slo, shi] = cfg.structure_range;
            let structure = rng.gen_range(slo..=shi) * multiplier;
            let focal = Disclosure::new(firm.firm_id.clone(), content, structure, load_map)?;
            let distractors: Vec<Disclosure> = (0..cfg.n_distractors)
                .map(|k| {
                    let s = rng.gen_range(slo..=shi);
                    let c: f64 = shock.sample(&mut rng);
                    Disclosure::new(format!("d{k}"), c, s, load_map)
                })
                .collect::<Result<_>>()?;

            let result = simulate_event(
                &focal,
                &distractors,
                &firm.investors,
                anchor,
                fundamental,
                mech,
                tech,
                solver_cfg,
                cfg.processing_slots,
                cfg.trading_days_per_period,
                &mut rng,
            )
            .map_err(|e| {
                Error::Config(format!(
                    "event failed for firm {} period {period}: {e}",
                    firm.firm_id
                ))
            })?;

            // controls drift so they survive the within transform
            log_mktcap += rng.gen_range(-0.05..0.05);
            let inst_own = (firm.mix + rng.gen_range(-0.03..0.03)).clamp(0.0, 1.0);
            let analyst_cov = (firm.base_analyst_cov + rng.gen_range(-1.0..1.0)).max(0.0);

            match result {
                EventResult::Degenerate => {
                    degenerate += 1;
                }
                EventResult::Outcome {
                    outcome,
                    censored,
                    path,
                } => {
                    observations.push(PanelObservation {
                        firm_id: firm.firm_id.clone(),
                        period,
                        log_speed: outcome.incorporation_speed_days.ln(),
                        accuracy: outcome.incorporation_accuracy,
                        log_duration: outcome.mispricing_duration_days.ln_1p(),
                        treated: u8::from(period >= firm.adoption),
                        log_mktcap,
                        inst_own,
                        analyst_cov,
                        cluster_id: firm.cohort.clone(),
                        censored: u8::from(censored),
                    });
                    price = *path.last().unwrap();
                    if collect_paths {
                        paths.push(EventPath {
                            firm_id: firm.firm_id.clone(),
                            period,
                            anchor,
                            fundamental,
                            prices: path,
                        });
                    }
                }
            }
        }
    }
    Ok(SimOutput {
        observations,
        paths,
        degenerate_events: degenerate,
    })
}

/// Write the panel as CSV with a fixed column order.
pub fn write_panel_csv<W: std::io::Write>(observations: &[PanelObservation], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "firm_id",
        "period",
        "log_speed",
        "accuracy",
        "log_duration",
        "treated",
        "log_mktcap",
        "inst_own",
        "analyst_cov",
        "cluster_id",
        "censored",
    ])?;
    for o in observations {
        w.write_record([
            o.firm_id.clone(),
            o.period.to_string(),
            format!("{:.12}", o.log_speed),
            format!("{:.12}", o.accuracy),
            format!("{:.12}", o.log_duration),
            o.treated.to_string(),
            format!("{:.12}", o.log_mktcap),
            format!("{:.12}", o.inst_own),
            format!("{:.12}", o.analyst_cov),
            o.cluster_id.clone(),
            o.censored.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
