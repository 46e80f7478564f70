//! Smoothed agnostic learning of Boolean halfspaces.
//!
//! The learner expands examples over `{-1,+1}^n` into all monomials of a
//! bounded degree, fits the expansion in L1 by linear programming, and
//! thresholds the fitted polynomial. Around it sit the analytic pieces the
//! guarantee rests on, each implemented as an executable check: bit-flip
//! smoothing and the noise operator, noise sensitivity, critical-index
//! decomposition, rerandomization, Berry-Esseen gaps, tilting moments,
//! sub-exponential moment bounds and polynomial approximators of `e^{-x}`.
//!
//! Modules map onto subsystems:
//!
//! * [`hypercube`]: bit vectors, product distributions and mixtures,
//!   halfspaces, the two noise channels, planted datasets.
//! * [`analysis`]: the noise operator `T_rho`, noise sensitivity, the
//!   operator gap and the smoothed error, each with an exact and a Monte
//!   Carlo path.
//! * [`regression`]: monomial bases, the L1 fit, threshold selection and the
//!   repeat-and-validate learner.
//! * [`structure`]: regularity, critical index, head/tail decomposition and
//!   the concentration checks.
//! * [`approx`]: one-dimensional polynomial and probabilistic tools.
//! * [`harness`]: configuration, experiments, the lemma-check suite and
//!   plot data.
//!
//! Everything random takes an explicit seed. With the `parallel` feature
//! (on by default) the data-parallel loops run on rayon; results do not
//! depend on the number of threads.

#![forbid(unsafe_code)]
// `!(x > 0.0)` is how NaN gets rejected
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod approx;
pub mod error;
pub mod harness;
pub mod hypercube;
pub mod par;
pub mod regression;
pub mod rng;
pub mod stats;
pub mod structure;

pub use error::{Error, Result};
pub use hypercube::{BitVector, LabeledSample, LinearThresholdFunction, Marginal, NoiseSpec, ProductDistribution};
pub use stats::{EstimateWithCI, Method, Mode};
