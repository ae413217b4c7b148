//! Optimal power allocation for broadcasting mixed real-time / non-real-time
//! traffic over block-fading channels under a service-outage constraint.
//!
//! The transmitter sends common information to `N` users. A basic service
//! rate `r0` must be delivered to every user except with probability at most
//! `eps`, and the rate beyond `r0` carries best-effort traffic. Because the
//! instantaneous system capacity is limited by the weakest user, the whole
//! problem reduces to one dimension in the minimum channel gain, and the
//! optimal policy mixes water-filling with channel inversion above the
//! `eps`-quantile of that minimum gain.
//!
//! Module map:
//!
//! - [`numerics`]: adaptive quadrature and monotone root finding.
//! - [`fading`]: channel-gain laws and the composed minimum-gain law.
//! - [`policy`]: feasibility, minimum power, water level and the policy itself.
//! - [`baselines`]: ergodic and outage capacities for comparison curves.
//! - [`oracle`]: brute-force solvers on discretized instances.
//! - [`montecarlo`]: block-fading simulation of a solved policy.
//! - [`cli`]: scenario files, subcommands and CSV output.

pub mod baselines;
pub mod cli;
pub mod error;
pub mod fading;
pub mod montecarlo;
pub mod numerics;
pub mod oracle;
pub mod policy;

pub use error::{Error, Result};
pub use fading::{GainDistribution, GainLaw, MinGainDistribution};
pub use numerics::{Tolerance, Tolerances};
pub use policy::{Policy, SystemParams};
