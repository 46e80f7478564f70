use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use smoothlearn::harness::{
    append_jsonl, emit_plots, lemma_check_suite, lemma_table, read_records, run_experiment_file, Profile, RunStatus,
    Selector, SuiteOptions,
};
use smoothlearn::hypercube::{generate_dataset, read_dataset_file, write_dataset_file, PlantedDataConfig};
use smoothlearn::regression::{evaluate, learn, LearnConfig, PolynomialHypothesis, SliceSource};
use smoothlearn::stats::DEFAULT_LEVEL;
use smoothlearn::{par, EstimateWithCI, Error};

/// Smoothed agnostic learning of halfspaces on the Boolean cube.
#[derive(Parser)]
#[command(name = "smoothlearn", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a labeled dataset from a planted-halfspace config.
    ///
    /// The config is TOML, either a bare data section or a full experiment
    /// config whose `[data]` table is used.
    GenData {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit a polynomial threshold hypothesis to a dataset file.
    ///
    /// The file is consumed in order: repetition batches first, then the
    /// validation set.
    Learn {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        degree: usize,
        #[arg(long, default_value_t = 0.1)]
        epsilon: f64,
        #[arg(long, default_value_t = 0.1)]
        delta: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Examples per repetition; by default the file is split evenly after
        /// reserving the validation set.
        #[arg(long)]
        samples_per_repetition: Option<usize>,
        #[arg(long)]
        repetitions: Option<usize>,
        #[arg(long)]
        validation_size: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Error of a saved model on a dataset, with a 99% interval.
    Eval {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
    },
    /// Run lemma checks and print a pass/fail table.
    LemmaCheck {
        /// `all` or comma-separated check ids.
        #[arg(long, default_value = "all")]
        select: String,
        /// smoke, standard or thorough.
        #[arg(long, default_value = "smoke")]
        profile: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Multiplies every bound; 0.5 is a negative control.
        #[arg(long, default_value_t = 1.0)]
        bound_scale: f64,
        /// Append rows to this JSONL file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run an experiment config and append records to a JSONL file.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Worker threads; 0 uses every core.
        #[arg(long, default_value_t = 0)]
        workers: usize,
    },
    /// Aggregate experiment records into CSV series and a gnuplot script.
    EmitPlots {
        #[arg(long)]
        records: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
    },
}

enum Outcome {
    Pass,
    CheckFailed,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::CheckFailed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            let usage = e.chain().any(|c| {
                matches!(
                    c.downcast_ref::<Error>(),
                    Some(Error::Config(_) | Error::UnknownCheck(_) | Error::InsufficientSamples { .. })
                )
            });
            ExitCode::from(if usage { 2 } else { 3 })
        }
    }
}

fn load_data_config(path: &PathBuf) -> anyhow::Result<PlantedDataConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut table: toml::Table = text.parse().map_err(|e| Error::Config(format!("{e}")))?;
    let value = match table.remove("data") {
        Some(v) => v,
        None => toml::Value::Table(table),
    };
    let cfg: PlantedDataConfig = value.try_into().map_err(|e| Error::Config(format!("{e}")))?;
    cfg.validate()?;
    Ok(cfg)
}

fn run(cmd: Command) -> anyhow::Result<Outcome> {
    match cmd {
        Command::GenData { config, count, seed, out } => {
            let cfg = load_data_config(&config)?;
            let data = generate_dataset(&cfg, count, seed)?;
            write_dataset_file(&out, &data)?;
            println!("wrote {} examples to {}", data.len(), out.display());
        }
        Command::Learn { data, degree, epsilon, delta, seed, samples_per_repetition, repetitions, validation_size, out } => {
            let examples = read_dataset_file(&data)?;
            if examples.is_empty() {
                return Err(Error::Empty("dataset").into());
            }
            let mut cfg = LearnConfig::new(degree, epsilon, delta, 0);
            cfg.repetitions = repetitions;
            cfg.validation_size = validation_size;
            cfg.samples_per_repetition = match samples_per_repetition {
                Some(m) => m,
                None => examples.len().saturating_sub(cfg.validation_size()) / cfg.repetitions(),
            };
            let mut source = SliceSource::new(&examples);
            let report = learn(&mut source, &cfg, seed)?;
            report.hypothesis.save(&out)?;
            let c = &report.candidates[report.chosen];
            println!(
                "repetition {} of {}: train error {:.4}, validation error {:.4}, L1 objective {:.4}",
                report.chosen,
                report.candidates.len(),
                c.train_error,
                c.validation_error,
                c.l1_objective
            );
        }
        Command::Eval { model, data } => {
            let h = PolynomialHypothesis::load(&model)?;
            let examples = read_dataset_file(&data)?;
            let err = evaluate(&h, &examples)?;
            let hits = (err * examples.len() as f64).round() as u64;
            let e = EstimateWithCI::from_bernoulli(hits, examples.len(), DEFAULT_LEVEL);
            println!("error {:.6} +- {:.6} ({} examples)", e.value, e.half_width, examples.len());
        }
        Command::LemmaCheck { select, profile, seed, bound_scale, out } => {
            let selector: Selector = select.parse()?;
            let profile: Profile = profile.parse()?;
            let rows = lemma_check_suite(&selector, &SuiteOptions { profile, seed, bound_scale })?;
            if let Some(out) = out {
                append_jsonl(out, &rows)?;
            }
            print!("{}", lemma_table(&rows));
            let failed = rows.iter().filter(|r| !r.pass).count();
            println!("{} rows, {} failed", rows.len(), failed);
            if failed > 0 {
                return Ok(Outcome::CheckFailed);
            }
        }
        Command::Experiment { config, out, workers } => {
            let records = par::with_threads(workers, || run_experiment_file(&config, &out))?;
            let failed = records.iter().filter(|r| r.status == RunStatus::Failed).count();
            let lemma_fails = records.iter().flat_map(|r| &r.lemma_checks).filter(|r| !r.pass).count();
            for r in &records {
                match (&r.test_error, &r.smoothed_benchmark) {
                    (Some(t), Some(s)) => println!(
                        "point {}: degree {} samples {} sigma {} seed {}: test {:.4} +- {:.4}, smoothed benchmark {:.4}",
                        r.point,
                        r.config.learn.degree,
                        r.config.learn.samples_per_repetition,
                        r.config.eval.sigma,
                        r.seed,
                        t.value,
                        t.half_width,
                        s.value
                    ),
                    _ => println!("point {}: failed: {}", r.point, r.error.as_deref().unwrap_or("unknown error")),
                }
            }
            if failed > 0 || lemma_fails > 0 {
                return Ok(Outcome::CheckFailed);
            }
        }
        Command::EmitPlots { records, out_dir } => {
            let recs = read_records(&records)?;
            if recs.is_empty() {
                bail!("no records in {}", records.display());
            }
            for p in emit_plots(&recs, &out_dir)? {
                println!("{}", p.display());
            }
        }
    }
    Ok(Outcome::Pass)
}
