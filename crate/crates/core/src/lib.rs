//! Couplings, copulas, and their use in multisensory reaction-time modeling.
//!
//! The crate is organized in layers:
//!
//! - [`margins`] — univariate distributions with CDF, quantile function
//!   (generalized inverse), sampling, and empirical estimation;
//! - [`coupling`] — constructions placing differently-distributed random
//!   variables on one probability space: quantile coupling, Bernoulli
//!   coupling, maximal coupling via splitting, total variation distance,
//!   and monotone coupling under stochastic dominance;
//! - [`copula`] — copula families, Fréchet–Hoeffding bounds, Sklar
//!   composition/extraction, copula transforms, numerical densities, and
//!   the three-dimensional vine decomposition;
//! - [`dependence`] — Pearson correlation via Hoeffding's identity,
//!   extremal correlations, Kendall's tau, Spearman's rho, and the
//!   compatibility and `3τ − 2ρ` bounds;
//! - [`multisensory`] — race-model CDFs and inequality tests on reaction
//!   times plus the two-stage TWIN model.
//!
//! All randomness flows through an explicit [`rng::RandomStream`]; there is
//! no global RNG state, and every sampler is deterministic given a seed.

pub mod copula;
pub mod coupling;
pub mod dependence;
pub mod error;
pub mod margins;
pub mod multisensory;
pub mod numeric;
pub mod rng;
pub mod vine;

pub use copula::{Copula, SklarJoint};
pub use coupling::{CoupledDraw, CoupledSampler, Pmf};
pub use error::{Error, Result};
pub use margins::Margin;
pub use rng::RandomStream;
