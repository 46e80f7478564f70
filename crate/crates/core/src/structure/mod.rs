//! Regularity, the critical index, head/tail decomposition and the
//! concentration checks used when a halfspace is split into a dominant head
//! and a regular tail.
//!
//! Two unrelated exponents appear here: `alpha_reg` is the regularity
//! parameter of a weight vector, `alpha_tail` the exponent of a
//! sub-exponential tail profile.

mod concentration;
mod critical;
mod regular;

pub use concentration::{
    case2_sign_agreement, concentration_constant, tail_concentration_check, LogArgument, TailCheckConfig,
    TailCheckReport,
};
pub use critical::{
    critical_index, critical_threshold, decompose, geometric_tail_bound, suggested_k, Case, CriticalIndexReport,
    DecompositionBudget,
};
pub use regular::{regular_subsample_check, regularity, SubsampleReport};
