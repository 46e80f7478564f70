//! The Boolean cube `{-1,+1}^n`: points, product distributions and finite
//! mixtures of them, halfspaces, the bit-flip and noisy-copy channels, and
//! planted labeled datasets.
//!
//! Coordinates of a point are stored as `i8` values in `{-1, +1}`. When the
//! cube is enumerated, point `idx` has `x_i = -1` exactly when bit `i` of
//! `idx` is set.

mod bits;
mod data;
mod dist;
mod ltf;
pub(crate) mod noise;
mod tail;

pub use bits::{decode_into, for_each_point, BitVector};
pub use data::{
    generate_dataset, population_error, read_dataset, read_dataset_file, write_dataset,
    write_dataset_file, LabelNoise, LabeledSample, PlantedDataConfig,
};
pub use dist::{product_table, sample_marginal, Marginal, MixtureComponent, ProductDistribution};
pub use ltf::{ltf_eval, sign, CubeFunction, FnCube, LinearThresholdFunction};
pub use noise::{flip_law, flip_noise, flip_noise_with, noisy_copy, noisy_copy_law, noisy_copy_with, NoiseSpec};
pub use tail::{subexp_tail_bound, subexp_tail_probe, DirectionReport, Directions, TailProbeConfig, TailReport};

/// Largest dimension the cube enumerators accept (`2^n` points).
pub const MAX_ENUMERATION: usize = 26;
