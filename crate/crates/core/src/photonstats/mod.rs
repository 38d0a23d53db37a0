//! Photon statistics: time-tag I/O, the two-channel correlator, empirical
//! multi-exponential fits, background correction, three-level rate
//! inversion and Monte-Carlo photon streams.

mod background;
mod correlator;
mod fit;
mod inversion;
mod montecarlo;
pub mod tags;

pub use background::{
    background_correct_amplitudes, background_correct_curve, background_uncorrect_curve, correct_value,
    uncorrect_value, BackgroundRatio,
};
pub use correlator::{bin_edges, compute_g2, compute_g2_channels, DelayWindow, G2Binning, G2Histogram};
pub use fit::{
    bin_mean_exp, empirical_model, empirical_model_bin, fit_empirical, fit_empirical_data, fit_order, fit_short_delay,
    EmpiricalFit, FitData, FitOptions, ShortDelayFit,
};
pub use inversion::{estimate_rates_three_level, ThreeLevelRates};
pub use montecarlo::{monte_carlo_run, monte_carlo_stream, poisson_stream, MonteCarloRun};
pub use tags::TimeTagRecord;
