//! Non-linear Kesten process for household wealth.
//!
//! `W' = W + α·W^γ + S`, with `α` drawn from a shifted and scaled noncentral-t
//! law. The crate covers parameter estimation from survey and rich-list data,
//! large-population Monte Carlo with bankruptcy replacement, inequality and
//! tail analytics, and numerical checks of the asymptotic theory.
//!
//! Wealth is in GBP throughout. The non-linear model is not scale invariant,
//! so fitted coefficients are tied to that unit.

pub mod distributions;
pub mod empirics;
pub mod fixtures;
pub mod formats;
pub mod inequality;
pub mod numeric;
pub mod process;
pub mod rng;
pub mod tailstats;
pub mod theory;

pub use distributions::{fit_nct_mle, nct_cdf, nct_pdf, sample_nct, Nct, NctFit, NctLogDensity, NctParams, ParetoParams};
pub use rng::{Lane, RngStream, StreamId};
pub use inequality::{gini, lorenz_points, top_share, InequalityReport};
pub use process::{
    crossover_scale, run, sample_initial, savings_eval, AlphaLaw, InitialCondition, Population, Replacement,
    SavingsModel, Simulation, SimulationConfig, Summary,
};
pub use tailstats::{
    empirical_tail, fit_lognormal, fit_power_law, kernel_density, percentile_wealth, EmpiricalTail, FitWindow,
    LognormalFit, PowerLawFit, TailPoint,
};
