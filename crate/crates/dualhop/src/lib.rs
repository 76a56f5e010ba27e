//! Analytic and simulated performance of dual-hop mixed FSO/mmWave relay
//! links.
//!
//! The FSO hop follows Gamma-Gamma turbulence with pointing errors, the
//! mmWave hop follows fluctuating two-ray (FTR) fading, and the relay is
//! either fixed-gain amplify-and-forward or decode-and-forward. Closed forms
//! are Fox H-functions of one or two variables, evaluated by Mellin–Barnes
//! contour quadrature and cross-checked against direct integral oracles and
//! Monte Carlo estimates.
//!
//! Module map:
//!
//! * [`specfun`]: log-gamma, ₂F₁, Legendre functions, incomplete gamma.
//! * [`mellin_barnes`]: univariate and bivariate Fox H evaluation.
//! * [`channels`]: Gamma-Gamma and FTR statistics, truncation, samplers.
//! * [`link_metrics`]: outage, BER, ergodic and effective capacity.
//! * [`monte_carlo`]: sampling estimates of the same metrics.
//! * [`cli`]: scenario files, sweeps, tables and validation reports.

pub mod channels;
pub mod cli;
pub mod error;
pub mod link_metrics;
pub mod metric;
pub mod mellin_barnes;
pub mod monte_carlo;
pub mod quad;
pub mod specfun;

pub use error::{Error, Result};
