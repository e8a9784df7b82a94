//! Convergence harness for the filtered exponential wave integrator in
//! [`ewi_core`]: a `rustfft` backend, experiment presets and config files,
//! parallel step-size sweeps, report/snapshot files and a property self-test.

pub mod backend;
pub mod config;
pub mod error;
pub mod io;
pub mod oracle;
pub mod selftest;
pub mod sweep;

pub use backend::RustFft;
pub use config::{Bands, ExperimentConfig, Preset};
pub use error::HarnessError;
pub use sweep::{run_convergence, ErrorReport};
