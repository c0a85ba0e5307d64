//! Numerical laboratory for the two-user state-dependent multiple-access
//! channel where encoder 1 knows the state non-causally and encoder 2 only
//! strictly causally.
//!
//! * [`prob`] and [`info`]: finite pmfs, the product-form joint law and
//!   information measures in bits.
//! * [`region`]: capacity-region search, with and without the
//!   compression-decodability constraint, and frontier geometry.
//! * [`fme`]: exact Fourier-Motzkin elimination over rate variables with
//!   symbolic information atoms.
//! * [`sim`]: the three block-Markov random-coding schemes, Monte Carlo and
//!   exact error evaluation, and covering/packing threshold experiments.
//! * [`oracle`]: brute-force references used to check the above.

pub mod channel;
pub mod error;
pub mod fme;
pub mod info;
pub mod oracle;
pub mod prob;
pub mod region;
pub mod sim;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub use channel::Channel;
pub use error::{Error, Result};
pub use info::{cond_mutual_info, entropy, eval_atoms, Atom, VariableGroup};
pub use prob::{
    build_joint, marginalize, validate, Alphabet, ConditionalKernel, FinitePmf, JointDistribution, Marginal, Var,
    VarSet, ValidationReport,
};
pub use region::{
    compute_region, compute_region_constrained, convexify, pair_bounds, region_distance, Factors, RatePair,
    RegionFrontier, SearchConfig,
};
