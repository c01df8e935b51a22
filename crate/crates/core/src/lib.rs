//! Best-possible bounds on the product and geometric mean of `n` numbers
//! given only their arithmetic mean and variance.
//!
//! - [`bounds`]: regime classification, the sharp product bounds, and the
//!   two-valued sequences attaining them.
//! - [`ladder`]: the critical values of the constrained product problem and
//!   their normalized polynomials.
//! - [`oracle`]: seeded brute-force sampling of the constraint sphere.
//! - [`comparisons`]: classical AM-GM gap bounds on concrete sequences.
//! - [`finance`]: terminal-wealth envelopes for return series.


pub mod bounds;
pub mod comparisons;
pub mod error;
pub mod finance;
pub mod ladder;
pub mod oracle;
pub mod stats;

pub use bounds::{
    am_gm_gap_bound, classify, extremal_sequence, geometric_mean_bounds, product_bounds,
    ExtremalKind, ExtremalSequence, GmBounds, Regime, RegimeKind, StatProfile,
};
pub use error::{Error, Result};
pub use stats::{stats_of, Moments};
