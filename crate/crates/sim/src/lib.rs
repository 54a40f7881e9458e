//! Finite-SNR Monte Carlo check of rate-splitting DoF schemes.
//!
//! Draws partial-CSIT channels, builds ZF private precoders over the channel
//! estimates plus a random common precoder, evaluates the common and private
//! rates of a scheme, and fits the rate slopes against `log2 P`. The fitted
//! slopes should approach the DoF tuple the scheme was designed for.

pub mod channel;
pub mod precoder;
pub mod rates;
pub mod regression;
pub mod sweep;

pub use channel::{sample_channel, ChannelRealization};
pub use precoder::{zf_precoders, Precoders};
pub use rates::{instantaneous_rates, PowerAllocation, UserRates};
pub use regression::{fit_line, SlopeFit};
pub use sweep::{leakage_sweep, run_plan_sweep, run_sweep, write_csv, LeakageResult, SimConfig, SweepResult, SweepSummary};

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
    #[error("channel estimate matrix ill-conditioned (condition number {0:e})")]
    IllConditioned(f64),
    #[error("no well-conditioned channel after {attempts} draws at P = {p:e}")]
    RankDeficient { p: f64, attempts: usize },
    #[error("non-finite rate for user {user} in trial {trial} at P = {p:e}")]
    NonFinite { p: f64, trial: usize, user: usize },
    #[error(transparent)]
    Dof(#[from] miso_dof::DofError),
    #[error("CSV export failed: {0}")]
    Csv(#[from] csv::Error),
    #[error("write failed: {0}")]
    Io(#[from] std::io::Error),
}
