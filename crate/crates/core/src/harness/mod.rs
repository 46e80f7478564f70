//! Experiment orchestration, the lemma-check suite, result files and plot
//! data.
//!
//! Results are line-delimited JSON, one record per line, each carrying a
//! schema version; readers reject versions they do not know.

mod config;
mod experiment;
mod lemmas;
mod plots;
mod record;

pub use config::{CheckSection, EvalSection, ExperimentConfig, Profile, Sweep};
pub use experiment::{run_experiment, run_experiment_file, SweepPoint};
pub use lemmas::{lemma_check_suite, lemma_table, Selector, SuiteOptions, LEMMA_IDS};
pub use plots::{emit_plots, SERIES};
pub use record::{
    append_jsonl, read_lemma_rows, read_records, CandidateSummary, ExperimentRecord, LemmaRow, RunStatus,
    SCHEMA_VERSION,
};
