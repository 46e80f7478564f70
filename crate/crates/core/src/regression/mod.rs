//! Monomial expansion, L1 regression, threshold selection and the
//! repeat-and-validate learner.

mod basis;
mod learn;
mod lp;
mod matrix;
mod model;
mod threshold;

pub use basis::{basis_size, expand_features, MonomialBasis, MAX_BASIS};
pub use learn::{fit_batch, learn, Candidate, LearnConfig, LearnReport, PlantedSource, SampleSource, SliceSource};
pub use lp::{l1_fit, l1_fit_weighted, Certificate, L1Fit, L1Options};
pub use matrix::FeatureMatrix;
pub use model::{evaluate, PolynomialHypothesis, TrainingMeta};
pub use threshold::{select_threshold, select_threshold_weighted, threshold_candidates, threshold_error};
