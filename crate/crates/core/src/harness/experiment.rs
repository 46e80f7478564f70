use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::lemmas::{lemma_check_suite, Selector, SuiteOptions};
use super::record::{append_jsonl, CandidateSummary, ExperimentRecord, RunStatus, SCHEMA_VERSION};
use crate::analysis::{smoothed_error, smoothed_population_error};
use crate::hypercube::{generate_dataset, population_error};
use crate::regression::{evaluate, learn, PlantedSource};
use crate::rng::SeedStream;
use crate::stats::{EstimateWithCI, Mode, DEFAULT_LEVEL, ENUMERATION_CAP};
use crate::{par, Result};

/// One resolved configuration of a sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub degree: usize,
    pub samples: usize,
    pub sigma: f64,
    pub seed: u64,
}

fn or_base<T: Clone>(list: &[T], base: T) -> Vec<T> {
    if list.is_empty() {
        vec![base]
    } else {
        list.to_vec()
    }
}

/// Expands the sweep into per-point configurations, in the order
/// degree, samples, sigma, seed (seed varies fastest).
fn expand(cfg: &ExperimentConfig) -> Vec<ExperimentConfig> {
    let sweep = cfg.sweep.clone().unwrap_or_default();
    let degrees = or_base(&sweep.degrees, cfg.learn.degree);
    let samples = or_base(&sweep.samples, cfg.learn.samples_per_repetition);
    let sigmas = or_base(&sweep.sigmas, cfg.eval.sigma);
    let seeds = or_base(&sweep.seeds, cfg.seed);
    let mut out = Vec::new();
    for &d in &degrees {
        for &m in &samples {
            for &s in &sigmas {
                for &seed in &seeds {
                    let mut c = cfg.clone();
                    c.sweep = None;
                    c.learn.degree = d;
                    c.learn.samples_per_repetition = m;
                    c.eval.sigma = s;
                    c.seed = seed;
                    out.push(c);
                }
            }
        }
    }
    out
}

fn run_point(point: usize, cfg: ExperimentConfig) -> ExperimentRecord {
    let start = cfg.eval.timing.then(Instant::now);
    let seeds = SeedStream::new(cfg.seed);
    let (train_seed, test_seed, benchmark_seed) =
        (seeds.child(0).master(), seeds.child(1).master(), seeds.child(2).master());
    let mut rec = ExperimentRecord {
        schema_version: SCHEMA_VERSION,
        name: cfg.name.clone(),
        point,
        config: cfg.clone(),
        seed: cfg.seed,
        train_seed,
        test_seed,
        benchmark_seed,
        repetition_seeds: Vec::new(),
        validation_seed: None,
        status: RunStatus::Ok,
        error: None,
        chosen: None,
        candidates: Vec::new(),
        train_error: None,
        validation_error: None,
        test_error: None,
        population_error: None,
        smoothed_benchmark: None,
        wall_clock_secs: None,
        lemma_checks: Vec::new(),
    };
    if let Err(e) = fill(&mut rec, &cfg) {
        rec.status = RunStatus::Failed;
        rec.error = Some(e.to_string());
    }
    rec.wall_clock_secs = start.map(|t| t.elapsed().as_secs_f64());
    rec
}

fn fill(rec: &mut ExperimentRecord, cfg: &ExperimentConfig) -> Result<()> {
    let data = &cfg.data;
    let planted = &data.planted;
    // the benchmark does not depend on the learner, so record it first
    rec.smoothed_benchmark = Some(if data.n <= ENUMERATION_CAP {
        EstimateWithCI::exact(smoothed_population_error(planted, data, cfg.eval.sigma)?)
    } else {
        let sample = generate_dataset(data, cfg.eval.test_size, rec.test_seed)?;
        let mode = Mode::MonteCarlo { samples: cfg.eval.smoothed_samples };
        smoothed_error(planted, &sample, cfg.eval.sigma, mode, rec.benchmark_seed)?
    });

    let mut source = PlantedSource::new(data.clone())?;
    let report = learn(&mut source, &cfg.learn, rec.train_seed)?;
    rec.repetition_seeds = report.repetition_seeds.clone();
    rec.validation_seed = Some(report.validation_seed);
    rec.chosen = Some(report.chosen);
    rec.candidates = report
        .candidates
        .iter()
        .map(|c| CandidateSummary {
            train_error: c.train_error,
            validation_error: c.validation_error,
            l1_objective: c.l1_objective,
            duality_gap: c.certificate.gap,
            iterations: c.iterations,
        })
        .collect();
    let best = &report.candidates[report.chosen];
    rec.train_error = Some(best.train_error);
    rec.validation_error = Some(best.validation_error);

    let test = generate_dataset(data, cfg.eval.test_size, rec.test_seed)?;
    let err = evaluate(&report.hypothesis, &test)?;
    let hits = (err * test.len() as f64).round() as u64;
    rec.test_error = Some(EstimateWithCI::from_bernoulli(hits, test.len(), DEFAULT_LEVEL));
    if data.n <= ENUMERATION_CAP {
        rec.population_error = Some(population_error(&report.hypothesis, data)?);
    }

    if let Some(checks) = &cfg.checks {
        let opts = SuiteOptions { profile: checks.profile, seed: seeds_for_checks(cfg.seed), bound_scale: 1.0 };
        rec.lemma_checks = lemma_check_suite(&Selector::Ids(checks.ids.clone()), &opts)?;
    }
    Ok(())
}

fn seeds_for_checks(seed: u64) -> u64 {
    SeedStream::new(seed).child(3).master()
}

/// Validates every sweep point, then runs them. Failed points yield records
/// with `status = failed` and whatever was computed before the failure.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<ExperimentRecord>> {
    let points = expand(cfg);
    for p in &points {
        p.validate()?;
    }
    let indexed: Vec<(usize, ExperimentConfig)> = points.into_iter().enumerate().collect();
    Ok(par::map(&indexed, |(i, c)| run_point(*i, c.clone())))
}

/// Reads a TOML config, runs it and appends the records to `out`.
pub fn run_experiment_file(config: impl AsRef<Path>, out: impl AsRef<Path>) -> Result<Vec<ExperimentRecord>> {
    let cfg = ExperimentConfig::load(config)?;
    let records = run_experiment(&cfg)?;
    append_jsonl(out, &records)?;
    Ok(records)
}
