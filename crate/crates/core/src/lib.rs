//! Performance model and game solver for a covert SWIPT-enabled D2D
//! network underlaying a cellular downlink.
//!
//! The crate has five parts:
//!
//! * [`config`] - typed parameters, unit conventions, validation, and the
//!   flat key-value config-file format;
//! * [`analytics`] - semi-analytical link reliability, harvested-power,
//!   false-alarm / miss-detection probabilities built on the interference
//!   Laplace transform and its numerical inversion;
//! * [`montecarlo`] - an independent brute-force sampler of the same
//!   stochastic-geometry model, used to validate every analytic curve;
//! * [`solvers`] - derivative-free optimizers (a 1-D expand/contract line
//!   search, exhaustive grids, and a real-coded genetic algorithm);
//! * [`game`] - the two-stage Stackelberg game between the D2D network
//!   (leader) and the detecting adversary (follower).
//!
//! All powers are linear milliwatts internally; dBm appears only at the
//! config/CLI boundary.

// negated float comparisons (`!(x > 0.0)`) are NaN-rejecting on purpose in
// validation paths; quadrature/gamma constants keep their published digits
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision, clippy::manual_is_multiple_of)]

pub mod analytics;
pub mod config;
pub mod game;
pub mod montecarlo;
pub mod quad;
pub mod solvers;
pub mod special;

pub use config::{dbm_to_mw, mw_to_dbm, NetworkConfig, ProbabilityEstimate, Scheme, Strategy};
pub use quad::QuadratureSpec;
