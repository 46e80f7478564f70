//! Noise operator, noise sensitivity, the operator gap and smoothed error.
//!
//! Exact paths work on whole tables over `{-1,+1}^n`: a per-coordinate
//! kernel applied stage by stage (`O(n 2^n)`) gives `T_rho f` or the
//! bit-flip smoothing of `f` at every point at once.

mod operator;
mod sensitivity;
mod smoothed;

pub use operator::{cube_table, flip_smooth_table, noise_operator_table, t_rho};
pub use sensitivity::{noise_sensitivity, noise_sensitivity_pairwise, smoothing_l1_gap, PAIRWISE_CAP};
pub use smoothed::{smoothed_error, smoothed_population_error};
