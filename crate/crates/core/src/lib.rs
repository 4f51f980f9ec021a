//! CHSH nonlocality of the two-mode squeezed vacuum after lossy
//! transmission.
//!
//! * [`analytic`]: closed-form `α`, `β` and `B_max` with adaptive series
//!   truncation.
//! * [`fock`]: brute-force truncated Fock-space states, pseudo-spin
//!   operators and correlation matrices.
//! * [`nonlocality`]: Horodecki bound, optimal settings, CHSH functional.
//! * [`threshold`]: loss thresholds, fit rules, absorption coefficients.
//! * [`sweep`] and [`audit`]: grid drivers behind the command-line tool.

pub mod analytic;
pub mod audit;
mod error;
pub mod exec;
pub mod fock;
pub mod nonlocality;
mod special;
pub mod sweep;
pub mod threshold;

pub use analytic::{bmax_analytic, BellResult, ChannelParams};
pub use error::{Error, Result};
pub use exec::Execution;
pub use fock::{CorrelationMatrix, FockCutoff, TruncatedState};
pub use nonlocality::{horodecki_bmax, HorodeckiResult, MeasurementSettings};
pub use threshold::{Scenario, ScenarioMode, ThresholdPoint};
