//! Deterministic Monte Carlo experiment engine: frame pipeline, SJR sweeps,
//! BER / spectral-efficiency metrics, PSD estimation, CSV emission, and the
//! self-check suite behind `rrbeam validate`.

mod config;
mod engine;
mod metrics;
mod psd;
pub mod validate;

pub use config::{BlockMapping, Scheme, SweepConfig, DEFAULT_ES_N0_DB, DEFAULT_SEED};
pub use engine::{received_waveform, run_frame, run_sweep, run_sweep_serial, TrialRecord};
pub use metrics::{
    emit_csv, emit_csv_path, parse_csv, spectral_efficiency, MetricRow,
};
pub use psd::{estimate_psd, PsdEstimate};
