use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::record::{ExperimentRecord, RunStatus};
use crate::stats::{z_quantile, Moments, DEFAULT_LEVEL};
use crate::{Error, Result};

/// Sweep axes with a CSV each.
pub const SERIES: [&str; 3] = ["samples", "degree", "sigma"];

fn axis(r: &ExperimentRecord, series: &str) -> f64 {
    match series {
        "samples" => r.config.learn.samples_per_repetition as f64,
        "degree" => r.config.learn.degree as f64,
        _ => r.config.eval.sigma,
    }
}

#[derive(Default)]
struct Cell {
    test: Moments,
    train: Moments,
    smoothed: Moments,
    population: Moments,
}

fn mean_ci(m: &Moments) -> (String, String) {
    if m.count() == 0 {
        return (String::new(), String::new());
    }
    let hw = if m.count() > 1 { z_quantile(DEFAULT_LEVEL) * (m.variance() / m.count() as f64).sqrt() } else { 0.0 };
    (format!("{:.6}", m.mean()), format!("{hw:.6}"))
}

fn csv(records: &[&ExperimentRecord], series: &str) -> String {
    let mut cells: BTreeMap<u64, (f64, usize, Cell)> = BTreeMap::new();
    for r in records {
        let x = axis(r, series);
        // f64 keys ordered by their bit pattern are fine for non-negative values
        let e = cells.entry(x.to_bits()).or_insert((x, 0, Cell::default()));
        e.1 += 1;
        if let Some(t) = &r.test_error {
            e.2.test.push(t.value);
        }
        if let Some(t) = r.train_error {
            e.2.train.push(t);
        }
        if let Some(s) = &r.smoothed_benchmark {
            e.2.smoothed.push(s.value);
        }
        if let Some(p) = r.population_error {
            e.2.population.push(p);
        }
    }
    let mut out = String::from("x,count,test_mean,test_ci,train_mean,train_ci,smoothed_mean,smoothed_ci,population_mean\n");
    for (x, count, c) in cells.values() {
        let (tm, tc) = mean_ci(&c.test);
        let (rm, rc) = mean_ci(&c.train);
        let (sm, sc) = mean_ci(&c.smoothed);
        let (pm, _) = mean_ci(&c.population);
        let _ = writeln!(out, "{x},{count},{tm},{tc},{rm},{rc},{sm},{sc},{pm}");
    }
    out
}

const GNUPLOT: &str = r#"set datafile separator ","
set key autotitle columnhead
set terminal pngcairo size 800,500
do for [s in "samples degree sigma"] {
  set output sprintf("error_vs_%s.png", s)
  set xlabel s
  set ylabel "error"
  plot sprintf("error_vs_%s.csv", s) using 1:3:4 with yerrorlines title "test", \
       "" using 1:5:6 with yerrorlines title "train", \
       "" using 1:7:8 with yerrorlines title "smoothed benchmark"
}
"#;

/// Writes one CSV per sweep axis, aggregating successful records with the
/// same axis value, plus a gnuplot script. Returns the paths written.
pub fn emit_plots(records: &[ExperimentRecord], out_dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    if records.is_empty() {
        return Err(Error::Empty("records"));
    }
    let ok: Vec<&ExperimentRecord> = records.iter().filter(|r| r.status == RunStatus::Ok).collect();
    let dir = out_dir.as_ref();
    std::fs::create_dir_all(dir)?;
    let mut paths = Vec::new();
    for s in SERIES {
        let p = dir.join(format!("error_vs_{s}.csv"));
        std::fs::write(&p, csv(&ok, s))?;
        paths.push(p);
    }
    let gp = dir.join("plots.gp");
    std::fs::write(&gp, GNUPLOT)?;
    paths.push(gp);
    Ok(paths)
}
