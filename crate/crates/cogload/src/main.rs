//! Command-line front end: simulate panels, estimate treatment effects, run
//! load sweeps, compute text metrics, and run placebo checks.
//!
//! Every command writes into an output directory and drops a fully resolved
//! copy of its configuration (`resolved.toml`) next to the outputs, so any
//! reported number can be reproduced from that copy alone.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical failure,
//! 4 data error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use cogload::config::ExperimentConfig;
use cogload::did::{event_study, placebo_test, DidFit, EventStudyCell, PanelData};
use cogload::error::Error;
use cogload::market::{proposition2_sweep, write_sweep_csv, MarketState};
use cogload::model::{Disclosure, InvestorProfile};
use cogload::sim::{run_simulation, write_panel_csv};
use cogload::textmetrics::{
    boilerplate_ratio, fog_index, log_file_size, strip_markup, tokenize, DocumentStats,
    ReferenceScope, ShingleSet, DEFAULT_SHINGLE_K,
};

#[derive(Parser)]
#[command(name = "cogload", version, about = "Cognitive-load market laboratory")]
struct Cli {
    /// Worker threads. Accepted for interface stability; all current
    /// computations are sequential.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate the staggered-adoption disclosure panel.
    Simulate {
        /// TOML experiment configuration; defaults apply if omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory (panel.csv, metadata.json, resolved.toml).
        #[arg(long)]
        out: PathBuf,
        /// Override the configured master seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Also dump per-event daily price paths under out/paths/.
        #[arg(long)]
        dump_paths: bool,
    },
    /// Estimate the treatment effect from a panel CSV.
    Estimate {
        #[arg(long)]
        panel: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory (fit.json, event_study.csv, resolved.toml).
        #[arg(long)]
        out: PathBuf,
        /// Also fit event-study coefficients and write event_study.csv.
        #[arg(long)]
        event_study: bool,
    },
    /// Sweep cognitive load and record mean mispricing.
    Sweep {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory (sweep.csv, resolved.toml).
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0.5)]
        load_min: f64,
        #[arg(long, default_value_t = 8.0)]
        load_max: f64,
        #[arg(long, default_value_t = 16)]
        points: usize,
    },
    /// Compute readability, size, and boilerplate metrics for a corpus.
    Textmetrics {
        /// Manifest CSV: document_id,firm_id,period,path (paths relative to
        /// the manifest).
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory (metrics.csv, resolved.toml).
        #[arg(long)]
        out: PathBuf,
        /// Reference scope for the boilerplate ratio.
        #[arg(long, default_value = "same_period")]
        scope: String,
    },
    /// Placebo-randomization check of the estimated effect.
    Placebo {
        #[arg(long)]
        panel: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory (placebo.json, resolved.toml).
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        draws: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn load_config(path: &Option<PathBuf>) -> Result<ExperimentConfig, Error> {
    match path {
        Some(p) => ExperimentConfig::from_path(p),
        None => Ok(ExperimentConfig::default()),
    }
}

fn prepare_out_dir(out: &Path, cfg: &ExperimentConfig) -> Result<(), Error> {
    fs::create_dir_all(out)?;
    fs::write(out.join("resolved.toml"), cfg.to_toml_string()?)?;
    Ok(())
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<(), Error> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Config(format!("serialization failed: {e}")))?;
    fs::write(path, text + "\n")?;
    Ok(())
}

fn write_event_study_csv(path: &Path, cells: &[EventStudyCell]) -> Result<(), Error> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["relative_period", "n_obs", "coefficient", "se"])?;
    for c in cells {
        w.write_record([
            c.relative_period.to_string(),
            c.n_obs.to_string(),
            c.coefficient.map_or(String::new(), |v| format!("{v:.12}")),
            c.se.map_or(String::new(), |v| format!("{v:.12}")),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn cmd_simulate(
    config: Option<PathBuf>,
    out: PathBuf,
    seed: Option<u64>,
    dump_paths: bool,
) -> Result<(), Error> {
    let mut cfg = load_config(&config)?;
    if let Some(s) = seed {
        cfg.sim.rng_seed = s;
    }
    let output = run_simulation(
        &cfg.sim,
        &cfg.mechanisms,
        &cfg.quality,
        &cfg.load_map,
        &cfg.solver,
        dump_paths,
    )?;
    prepare_out_dir(&out, &cfg)?;
    let panel_path = out.join("panel.csv");
    write_panel_csv(&output.observations, fs::File::create(&panel_path)?)?;
    write_json(
        &out.join("metadata.json"),
        &serde_json::json!({
            "config": cfg,
            "n_observations": output.observations.len(),
            "degenerate_events": output.degenerate_events,
        }),
    )?;
    if dump_paths {
        let dir = out.join("paths");
        fs::create_dir_all(&dir)?;
        for path in &output.paths {
            let mut w = csv::Writer::from_path(
                dir.join(format!("{}_p{:03}.csv", path.firm_id, path.period)),
            )?;
            w.write_record(["day", "price", "fundamental"])?;
            for (d, p) in path.prices.iter().enumerate() {
                w.write_record([
                    (d + 1).to_string(),
                    format!("{p:.12}"),
                    format!("{:.12}", path.fundamental),
                ])?;
            }
            w.flush()?;
        }
    }
    eprintln!(
        "wrote {} observations ({} degenerate events skipped) to {}",
        output.observations.len(),
        output.degenerate_events,
        panel_path.display()
    );
    Ok(())
}

fn cmd_estimate(
    panel: PathBuf,
    config: Option<PathBuf>,
    out: PathBuf,
    with_event_study: bool,
) -> Result<(), Error> {
    let cfg = load_config(&config)?;
    let data = PanelData::from_csv(fs::File::open(&panel)?)?;
    let mut fit: DidFit = cogload::did::estimate(&data, &cfg.did)?;
    if with_event_study {
        let [pre, post] = cfg.estimation.event_study_window;
        fit.event_study = Some(event_study(&data, &cfg.did, (pre, post))?);
    }
    prepare_out_dir(&out, &cfg)?;
    write_json(&out.join("fit.json"), &fit)?;
    if let Some(cells) = &fit.event_study {
        write_event_study_csv(&out.join("event_study.csv"), cells)?;
    }
    eprintln!(
        "beta = {:.6} (se {:.6}, t {:.2}, {} obs, {} clusters)",
        fit.beta_treatment,
        fit.cluster_robust_se[0],
        fit.t_statistic(),
        fit.n_obs,
        fit.n_clusters
    );
    Ok(())
}

fn cmd_sweep(
    config: Option<PathBuf>,
    out: PathBuf,
    load_min: f64,
    load_max: f64,
    points: usize,
) -> Result<(), Error> {
    let cfg = load_config(&config)?;
    if points < 2 || !(load_min > 0.0) || load_max < load_min {
        return Err(Error::InvalidInput(
            "need points >= 2 and 0 < load_min <= load_max".into(),
        ));
    }
    // representative market: investor mix at the midpoint of the configured
    // sophistication range, one asset with a one-sigma news shock
    let n = cfg.sim.n_investors;
    let mix = (cfg.sim.sophistication_mix_range[0] + cfg.sim.sophistication_mix_range[1]) / 2.0;
    let n_high = (mix * n as f64).round() as usize;
    let investors: Vec<InvestorProfile> = (0..n)
        .map(|k| {
            InvestorProfile::new(
                format!("i{k}"),
                cfg.sim.attention_capacity,
                cfg.sim.memory_capacity,
                1.0 / n as f64,
                if k < n_high {
                    cfg.sim.high_sophistication
                } else {
                    cfg.sim.low_sophistication
                },
            )
        })
        .collect::<Result<_, _>>()?;
    let content = cfg.sim.value_shock_std;
    let disclosure = Disclosure::new(
        "sweep",
        content,
        cfg.load_map.structure_for_load(load_min),
        &cfg.load_map,
    )?;
    let state = MarketState::new(
        investors,
        vec![disclosure],
        vec![10.0 + content],
        vec![10.0],
        vec![vec![0.0]; n],
    )?
    .with_pricing_rule(cfg.pricing_rule);

    let grid: Vec<f64> = (0..points)
        .map(|i| load_min + (load_max - load_min) * i as f64 / (points - 1) as f64)
        .collect();
    let rows = proposition2_sweep(&state, &grid, &cfg.load_map, &cfg.quality, &cfg.solver)?;
    prepare_out_dir(&out, &cfg)?;
    let path = out.join("sweep.csv");
    write_sweep_csv(&rows, fs::File::create(&path)?)?;
    eprintln!("wrote {} sweep rows to {}", rows.len(), path.display());
    Ok(())
}

struct CorpusDoc {
    document_id: String,
    firm_id: String,
    period: i64,
    stats: DocumentStats,
    shingles: ShingleSet,
    byte_size: usize,
}

fn cmd_textmetrics(
    manifest: PathBuf,
    config: Option<PathBuf>,
    out: PathBuf,
    scope: String,
) -> Result<(), Error> {
    let cfg = load_config(&config)?;
    let scope = match scope.as_str() {
        "same_period" => ReferenceScope::SamePeriod,
        "firm_prior" => ReferenceScope::FirmPrior,
        "all" => ReferenceScope::All,
        other => {
            return Err(Error::InvalidInput(format!(
                "unknown scope {other:?}; expected same_period, firm_prior, or all"
            )))
        }
    };
    let base = manifest.parent().map(Path::to_path_buf).unwrap_or_default();
    let mut rdr = csv::Reader::from_path(&manifest)?;
    let headers = rdr.headers()?.clone();
    let col = |name: &str| -> Result<usize, Error> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingColumn(name.to_string()))
    };

    prepare_out_dir(&out, &cfg)?;
    let out_path = out.join("metrics.csv");
    let mut w = csv::Writer::from_path(&out_path)?;
    w.write_record([
        "document_id",
        "firm_id",
        "period",
        "fog_index",
        "log_file_size",
        "boilerplate_ratio",
        "word_count",
        "sentence_count",
        "complex_word_count",
    ])?;

    let records: Vec<csv::StringRecord> = rdr.records().collect::<Result<_, _>>()?;
    if records.is_empty() {
        w.flush()?;
        eprintln!("empty manifest; wrote header-only {}", out_path.display());
        return Ok(());
    }
    let (c_id, c_firm, c_period, c_path) =
        (col("document_id")?, col("firm_id")?, col("period")?, col("path")?);

    // first pass: load and tokenize every readable document
    let mut docs: Vec<CorpusDoc> = Vec::new();
    for record in &records {
        let rel = PathBuf::from(&record[c_path]);
        let full = if rel.is_absolute() { rel } else { base.join(rel) };
        let raw = match fs::read_to_string(&full) {
            Ok(raw) => raw,
            Err(e) => {
                eprintln!("skipping {}: cannot read {}: {e}", &record[c_id], full.display());
                continue;
            }
        };
        let period: i64 = match record[c_period].parse() {
            Ok(p) => p,
            Err(_) => {
                eprintln!(
                    "skipping {}: non-numeric period {:?}",
                    &record[c_id], &record[c_period]
                );
                continue;
            }
        };
        let text = strip_markup(&raw);
        let tokens = tokenize(&text).tokens;
        docs.push(CorpusDoc {
            document_id: record[c_id].to_string(),
            firm_id: record[c_firm].to_string(),
            period,
            stats: DocumentStats::from_text(&text),
            shingles: ShingleSet::from_tokens(&record[c_id], &tokens, DEFAULT_SHINGLE_K),
            byte_size: raw.len(),
        });
    }

    let mut written = 0usize;
    for (i, doc) in docs.iter().enumerate() {
        let references: Vec<&ShingleSet> = docs
            .iter()
            .enumerate()
            .filter(|&(j, other)| {
                j != i
                    && match scope {
                        ReferenceScope::SamePeriod => other.period == doc.period,
                        ReferenceScope::FirmPrior => {
                            other.firm_id == doc.firm_id && other.period < doc.period
                        }
                        ReferenceScope::All => true,
                    }
            })
            .map(|(_, other)| &other.shingles)
            .collect();
        // documents shorter than the shingle window get an empty ratio field
        let metrics = fog_index(&doc.stats).and_then(|fog| {
            let size = log_file_size(doc.byte_size)?;
            let ratio = if doc.shingles.is_empty() {
                None
            } else if references.is_empty() {
                Some(0.0)
            } else {
                Some(boilerplate_ratio(&doc.shingles, &references)?)
            };
            Ok((fog, size, ratio))
        });
        let (fog, size, ratio) = match metrics {
            Ok(m) => m,
            Err(e) => {
                eprintln!("skipping {}: {e}", doc.document_id);
                continue;
            }
        };
        w.write_record([
            doc.document_id.clone(),
            doc.firm_id.clone(),
            doc.period.to_string(),
            format!("{fog:.6}"),
            format!("{size:.6}"),
            ratio.map_or(String::new(), |r| format!("{r:.6}")),
            doc.stats.word_count.to_string(),
            doc.stats.sentence_count.to_string(),
            doc.stats.complex_word_count.to_string(),
        ])?;
        written += 1;
    }
    w.flush()?;
    eprintln!("wrote metrics for {written} documents to {}", out_path.display());
    Ok(())
}

fn cmd_placebo(
    panel: PathBuf,
    config: Option<PathBuf>,
    out: PathBuf,
    draws: Option<usize>,
    seed: Option<u64>,
) -> Result<(), Error> {
    let cfg = load_config(&config)?;
    let data = PanelData::from_csv(fs::File::open(&panel)?)?;
    let n_draws = draws.unwrap_or(cfg.estimation.placebo_draws);
    let mut rng = ChaCha8Rng::seed_from_u64(seed.unwrap_or(cfg.estimation.placebo_seed));
    let result = placebo_test(&data, &cfg.did, n_draws, &mut rng)?;
    prepare_out_dir(&out, &cfg)?;
    eprintln!(
        "actual beta = {:.6}, placebo p-value = {:.4} over {} draws ({} failed)",
        result.actual_beta,
        result.p_value,
        result.placebo_betas.len(),
        result.failed_draws
    );
    write_json(&out.join("placebo.json"), &result)?;
    Ok(())
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::InvalidInput(_) | Error::Config(_) | Error::Io(_) => 2,
        Error::NonConvergence { .. }
        | Error::DemeanNonConvergence { .. }
        | Error::RankDeficient(_)
        | Error::TooFewClusters { .. } => 3,
        Error::DegenerateDocument(_)
        | Error::MissingColumn(_)
        | Error::NonNumericColumn { .. }
        | Error::Csv(_) => 4,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if threads == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(2);
        }
    }
    let result = match cli.command {
        Command::Simulate {
            config,
            out,
            seed,
            dump_paths,
        } => cmd_simulate(config, out, seed, dump_paths),
        Command::Estimate {
            panel,
            config,
            out,
            event_study,
        } => cmd_estimate(panel, config, out, event_study),
        Command::Sweep {
            config,
            out,
            load_min,
            load_max,
            points,
        } => cmd_sweep(config, out, load_min, load_max, points),
        Command::Textmetrics {
            manifest,
            config,
            out,
            scope,
        } => cmd_textmetrics(manifest, config, out, scope),
        Command::Placebo {
            panel,
            config,
            out,
            draws,
            seed,
        } => cmd_placebo(panel, config, out, draws, seed),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
