//! Link-level simulator for a 2x2 MIMO-OFDM transceiver that combines a
//! rate-2 space-time block code with eigen-beamforming and anti-jam
//! subcarrier precoding, plus the conventional Alamouti linear beamformer
//! it is benchmarked against.
//!
//! The crate is organised around the signal path:
//!
//! * [`numerics`] -- complex 2x2 algebra, Hermitian eigendecomposition,
//!   unitary DFT, water-filling, and deterministic random substreams.
//! * [`modem`] -- Gray-coded QAM constellations and OFDM (de)modulation.
//! * [`stbc`] -- the rate-2 rotated block code and the Alamouti code.
//! * [`precoding`] -- full-band / multi-band diagonal precoders and their
//!   receive-side inverses.
//! * [`beamforming`] -- channel correlation analysis, water-filled power
//!   loading, and transmit block assembly.
//! * [`channel`] -- Rayleigh fading, AWGN, and jammer waveform synthesis
//!   with exact receive-side power calibration.
//! * [`receiver`] -- virtual channel construction, equalization,
//!   combining, and conditional-ML / exhaustive-ML / Alamouti detection.
//! * [`sim`] -- the Monte Carlo sweep engine, metrics, PSD estimation,
//!   CSV output, and the self-check suite backing `rrbeam validate`.

pub mod beamforming;
pub mod channel;
pub mod error;
pub mod modem;
pub mod numerics;
pub mod precoding;
pub mod receiver;
pub mod sim;
pub mod stbc;

pub use beamforming::EigenBeams;
pub use channel::{ChannelRealization, JammerKind, JammerPath, JammerSpec, NoiseSpec};
pub use error::{Error, Result};
pub use modem::{OfdmGrid, QamConstellation};
pub use numerics::{Complex64, EigenPair2, Matrix2, StreamSeed};
pub use precoding::{PrecoderMode, PrecoderProfile};
pub use receiver::{CombinedStatistic, DecodedBlock, Detection, Evcm};
pub use sim::{
    BlockMapping, MetricRow, PsdEstimate, Scheme, SweepConfig, TrialRecord,
};
pub use stbc::{AntennaStreams, Rate2Block, SuperSymbolPair};

/// Rotation angle used by the rate-2 block code when none is configured
/// and the constellation is the default 4-QAM.
///
/// Chosen by `examples/phi_search.rs`, which maximizes the minimum
/// codeword-difference determinant of the rotated code over the active
/// constellation; for 4-QAM the argmax coincides with `atan(1/2)`.
pub const DEFAULT_PHI1: f64 = 0.463_647_609_000_806_1;

/// Search-optimal rotation for 16-QAM (`atan(1/4)`).
pub const DEFAULT_PHI1_QAM16: f64 = 0.244_978_663_126_864_14;

/// Search-optimal rotation for 64-QAM (`atan(1/8)`).
pub const DEFAULT_PHI1_QAM64: f64 = 0.124_354_994_546_761_44;

/// Rotation default for a constellation order, from the same search.
/// Orders other than 4, 16, 64 are not supported by the constellations,
/// so this falls back to the 4-QAM value.
pub fn default_phi1(constellation_order: usize) -> f64 {
    match constellation_order {
        16 => DEFAULT_PHI1_QAM16,
        64 => DEFAULT_PHI1_QAM64,
        _ => DEFAULT_PHI1,
    }
}
