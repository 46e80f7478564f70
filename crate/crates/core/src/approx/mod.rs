//! One-dimensional approximation and probability tools: Taylor and
//! Chebyshev polynomials for the exponential, the tilting second moment,
//! Berry-Esseen gaps of Rademacher sums, sub-exponential moment and MGF
//! bounds, and the rerandomized form of the noisy-copy channel.

mod berry_esseen;
mod chebyshev;
mod poly;
mod quad;
mod rerandomize;
mod subexp;
mod tilting;

pub use berry_esseen::{berry_esseen_gap, BerryEsseenReport, EXACT_CAP as BERRY_ESSEEN_EXACT_CAP};
pub use chebyshev::{exp_neg_approx, exp_neg_error_profile, ChebyshevSeries, ExpNegApprox, MAX_DEGREE};
pub use poly::{taylor_exp, DensePolynomial};
pub use quad::integrate;
pub use rerandomize::{
    conditional_uniformity_chi2, conditional_uniformity_exact, rerandomize, rerandomize_law, rerandomize_with,
    ChiSquareReport, RerandomizedDraw,
};
pub use subexp::{
    subexp_mgf_bound, subexp_mgf_check, subexp_moment_bound, subexp_moment_check, BoundCheck, DiscreteLaw,
    TailProfile,
};
pub use tilting::{tilting_second_moment, TiltingReport, TILTING_CONSTANT};
