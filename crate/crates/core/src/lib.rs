//! Delay-outage analysis of cache-enabled mobile edge computing networks.
//!
//! Base stations form a Poisson point process. Each caches dataset `f` with
//! probability `p_c(f)` and serves a request within the deadline `D` if the
//! link rate and compute time allow it. The crate provides
//!
//! - the system model and derived link constant `κ'` ([`model`]),
//! - the outage-optimal caching policy and its regime structure ([`policy`]),
//! - exact and asymptotic outage expressions and the delay reformulation ([`analytics`]),
//! - backhaul, hierarchical and co-location variants ([`variants`]),
//! - sum bounds used as numeric oracles ([`bounds`]),
//! - a Monte Carlo simulator of the underlying point process ([`mc`]).

pub mod analytics;
pub mod bounds;
mod error;
pub mod exec;
pub mod mc;
pub mod model;
pub mod policy;
pub mod variants;

pub use error::{Error, Result};
pub use exec::Execution;
pub use model::{derive, partial_sum, validate_params, zipf, CachingPolicy, DerivedParams, Popularity, SystemParams};
pub use policy::{most_popular_policy, optimal_policy, regime_breakpoints, uniform_policy, Regime, RegimeReport};
