//! Surrogate-based uncertainty quantification for steady 1-D open-channel flow.
//!
//! The crate bundles everything needed to benchmark two surrogate strategies —
//! a quadrature-based polynomial chaos expansion and a POD + Gaussian-process
//! model — against a Monte Carlo reference on a synthetic river reach:
//!
//! * [`channel`] — deterministic backwater-curve solver mapping an uncertain
//!   pair (discharge, downstream Strickler coefficient) to water levels at a
//!   fixed set of observation stations;
//! * [`sampling`] — input-space description, Monte Carlo and Halton designs,
//!   Gauss–Hermite/Gauss–Legendre tensor quadrature;
//! * [`pc`] — polynomial chaos surrogate with analytic moments, covariance
//!   and Sobol' indices;
//! * [`pgp`] — snapshot-POD plus per-mode Gaussian-process surrogate;
//! * [`stats`] — ensemble statistics, Martinez pick-freeze Sobol' estimator,
//!   kernel density estimation, Kolmogorov–Smirnov test, Q2 and RMSE metrics.

pub mod channel;
pub mod pc;
pub mod pgp;
pub mod sampling;
pub mod stats;

pub use channel::{BackwaterSolution, ChannelError, ChannelModel, SyntheticChannelSpec};
pub use pc::{MultiIndexBasis, PcSurrogate};
pub use pgp::{PgpSurrogate, SnapshotSet};
pub use sampling::{InputSpace, Marginal, QuadratureRule};
pub use stats::{EnsembleMatrix, KsOutcome, SobolEstimate, StatsReport};
