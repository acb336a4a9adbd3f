//! Claim models with two risk streams: a historical one and an unforeseeable
//! one whose intensity may be switched off.
//!
//! - Frequency: counts are a p-mixture of NB(α1, β) and NB(α1+α2, β), i.e.
//!   Poisson counts under a two-component Gamma prior on the intensity.
//! - Severity: claims are Exponential(μ) with weight ν and Lomax(δ, σ) otherwise.
//! - Premiums: exact posterior means of intensity and claim size given the
//!   history, in log space so that long histories do not overflow.
//! - Fitting: EM for each component, with guarded Newton M-steps.
//! - Diagnostics and simulation: KS and chi-square tests, scenario and
//!   surplus-process simulation, and evaluation of the global likelihood.
//!
//! ```
//! use twostream::{premium_freq, premium_sev, FreqParams, SevParams};
//!
//! let freq = FreqParams::new(3.0, 1.0, 0.5, 0.6).unwrap();
//! let sev = SevParams::new(1.0, 2.0, 0.5, 0.9).unwrap();
//! let (lambda, _w) = premium_freq(&freq, 0, 0);
//! let (claim, _omega) = premium_sev(&sev, 0, 0.0);
//! assert!((lambda * claim - 8.84).abs() < 1e-12);
//! ```

pub mod cli_io;
pub mod distributions;
pub mod em;
pub mod error;
pub mod freq_em;
pub mod gof;
pub mod likelihood;
pub mod premium;
pub mod quadrature;
pub mod rng;
pub mod sev_em;
pub mod simulate;
pub mod solver;
pub mod special;

pub use distributions::{FreqParams, SevParams, SplitRate};
pub use em::{EmOptions, EmTrace, StopReason};
pub use error::{Error, Result};
pub use freq_em::{fit_freq, moment_init_freq, CountSample};
pub use gof::{chisq_test, gof_report, ks_test, GofReport};
pub use likelihood::{global_loglik, joint_ty_log_density, FullParams};
pub use premium::{
    posterior_freq, posterior_sev, premium_combined, premium_freq, premium_sev, ClaimHistory, PeriodRecord,
    PremiumQuote,
};
pub use rng::{Rng, RngSeed};
pub use sev_em::{default_init_sev, fit_sev, nu_from_freq, SeveritySample};
pub use simulate::{generate_scenario, premium_evolution, simulate_surplus, ScenarioSpec, SeverityMode, SurplusConfig, SurplusPath};
