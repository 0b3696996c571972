//! Rayleigh channel realization, AWGN, jammer waveform synthesis, exact
//! receive-side power calibration, and assembly of the received signal.
//!
//! Power accounting conventions (shared with the sweep engine):
//!
//! * The legit reference level passed to [`synthesize_jammer`] is the mean
//!   received signal power per active data subcarrier, averaged over both
//!   receive antennas.
//! * "Received jam power" is the mean received jam power per subcarrier of
//!   the band the jammer occupies (its data slots for the disguised kinds,
//!   the full sampling band for barrage), averaged the same way. For
//!   barrage this equals the per-sample time-domain average.
//! * Every synthesized jam frame is rescaled so the measured ratio hits the
//!   configured SJR exactly, for every kind and path.

use rand_chacha::rand_core::RngCore;

use crate::error::{Error, Result};
use crate::modem::{ofdm_modulate, OfdmGrid, QamConstellation};
use crate::numerics::{complex_gaussian, Complex64, Matrix2, C_ZERO};

/// A quasi-static flat-fading channel draw: constant over one frame,
/// entry `(r, t)` is the gain from transmit antenna `t` to receive
/// antenna `r`.
#[derive(Debug, Clone, Copy)]
pub struct ChannelRealization {
    pub h: Matrix2,
}

impl ChannelRealization {
    /// Gains feeding receive antenna `r`, as a transmit-space vector.
    pub fn into_antenna(&self, r: usize) -> [Complex64; 2] {
        self.h.row(r)
    }
}

/// Draw four i.i.d. CN(0,1) channel gains.
pub fn draw_channel(stream: &mut impl RngCore) -> ChannelRealization {
    ChannelRealization {
        h: Matrix2::from_rows(
            [complex_gaussian(stream), complex_gaussian(stream)],
            [complex_gaussian(stream), complex_gaussian(stream)],
        ),
    }
}

/// What the jammer transmits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JammerKind {
    /// No jamming.
    None,
    /// Disguised OFDM symbols occupying every data subcarrier.
    AllBand,
    /// Disguised OFDM symbols occupying only the configured slot set.
    MultiBand,
    /// White Gaussian noise across the full sampling band.
    Barrage,
}

impl JammerKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            JammerKind::None => "none",
            JammerKind::AllBand => "all-band",
            JammerKind::MultiBand => "multi-band",
            JammerKind::Barrage => "barrage",
        }
    }
}

/// How the jammer reaches the receiver.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JammerPath {
    /// Independent jam streams added at each receive antenna.
    Direct,
    /// One single-antenna jammer routed through an independent CN(0,1)
    /// 2x1 channel before calibration.
    Faded,
}

impl JammerPath {
    pub fn as_str(&self) -> &'static str {
        match self {
            JammerPath::Direct => "direct",
            JammerPath::Faded => "faded",
        }
    }
}

/// Full description of one jamming condition.
#[derive(Debug, Clone)]
pub struct JammerSpec {
    pub kind: JammerKind,
    pub path: JammerPath,
    /// Target signal-to-jammer ratio in dB (receive side).
    pub sjr_db: f64,
    /// Data-slot indices the multi-band jammer occupies.
    pub jammed_slots: Vec<usize>,
}

impl JammerSpec {
    pub fn none() -> Self {
        Self {
            kind: JammerKind::None,
            path: JammerPath::Direct,
            sjr_db: 0.0,
            jammed_slots: Vec::new(),
        }
    }
}

/// Noise operating point.
#[derive(Debug, Clone, Copy)]
pub struct NoiseSpec {
    /// Noise power per complex sample per receive antenna. Zero selects
    /// the noiseless test mode.
    pub n0: f64,
}

impl NoiseSpec {
    pub fn noiseless() -> Self {
        Self { n0: 0.0 }
    }

    /// Operating point from Es/N0 in dB, where `es` is the reference
    /// energy per data subcarrier. `f64::INFINITY` selects noiseless mode.
    pub fn from_es_n0_db(es: f64, es_n0_db: f64) -> Self {
        if es_n0_db.is_infinite() {
            return Self::noiseless();
        }
        Self {
            n0: es / 10f64.powf(es_n0_db / 10.0),
        }
    }
}

/// One frame of jamming at both receive antennas (possibly all zeros).
#[derive(Debug, Clone)]
pub struct JamFrame {
    /// Time samples per receive antenna.
    pub rx: [Vec<Complex64>; 2],
    /// Received jam power per occupied subcarrier after calibration
    /// (0 when off).
    pub power_per_bin: f64,
}

impl JamFrame {
    pub fn silent(samples: usize) -> Self {
        Self {
            rx: [vec![C_ZERO; samples], vec![C_ZERO; samples]],
            power_per_bin: 0.0,
        }
    }
}

/// Synthesize `n_symbols` OFDM symbols worth of jamming, calibrated so the
/// received jam power per occupied subcarrier over the received reference
/// level equals `10^(-sjr/10)` exactly.
///
/// Disguised kinds draw independent uniform constellation points on their
/// occupied slots and pass them through the same OFDM structure as the
/// legit user; barrage draws white complex Gaussian time samples across the
/// full band. `path = Faded` routes a single stream through a CN(0,1) 2x1
/// jam channel before calibration; `Direct` draws an independent stream per
/// receive antenna.
pub fn synthesize_jammer(
    spec: &JammerSpec,
    grid: &OfdmGrid,
    constellation: &QamConstellation,
    n_symbols: usize,
    signal_power_ref: f64,
    stream: &mut impl RngCore,
) -> Result<JamFrame> {
    let frame_len = n_symbols * grid.symbol_len();
    match spec.kind {
        JammerKind::None => return Ok(JamFrame::silent(frame_len)),
        JammerKind::MultiBand => {
            if spec.jammed_slots.is_empty() {
                return Err(Error::invalid(
                    "multi-band jammer requires a nonempty slot set",
                ));
            }
            if spec
                .jammed_slots
                .iter()
                .any(|&s| s >= grid.data_subcarriers())
            {
                return Err(Error::invalid("jammed slot index out of range"));
            }
        }
        _ => {}
    }
    if !(signal_power_ref.is_finite() && signal_power_ref >= 0.0) {
        return Err(Error::invalid("signal power reference must be finite"));
    }

    // Unscaled per-antenna waveforms plus their per-occupied-bin received
    // power, computed in whichever domain is exact for the kind.
    let (mut rx, raw_power_per_bin) = match spec.kind {
        JammerKind::AllBand | JammerKind::MultiBand => {
            let occupied: Vec<usize> = match spec.kind {
                JammerKind::AllBand => (0..grid.data_subcarriers()).collect(),
                _ => spec.jammed_slots.clone(),
            };
            disguised_waveform(spec.path, grid, constellation, &occupied, n_symbols, stream)?
        }
        JammerKind::Barrage => barrage_waveform(spec.path, frame_len, stream),
        JammerKind::None => unreachable!(),
    };

    let target = signal_power_ref * 10f64.powf(-spec.sjr_db / 10.0);
    let scale = if raw_power_per_bin > 0.0 {
        (target / raw_power_per_bin).sqrt()
    } else {
        0.0
    };
    for antenna in rx.iter_mut() {
        for v in antenna.iter_mut() {
            *v *= scale;
        }
    }
    Ok(JamFrame {
        rx,
        power_per_bin: raw_power_per_bin * scale * scale,
    })
}

/// Disguised jam: random constellation points on the occupied slots, same
/// OFDM structure and frame alignment as the legit user.
fn disguised_waveform(
    path: JammerPath,
    grid: &OfdmGrid,
    constellation: &QamConstellation,
    occupied: &[usize],
    n_symbols: usize,
    stream: &mut impl RngCore,
) -> Result<([Vec<Complex64>; 2], f64)> {
    let n_data = grid.data_subcarriers();
    let order_mask = (constellation.order() - 1) as u64;

    let draw_symbol_wave = |stream: &mut dyn RngCore| -> Result<(Vec<Complex64>, f64)> {
        let mut energy = 0.0;
        let mut spec = vec![C_ZERO; n_data];
        for &slot in occupied {
            let idx = (stream.next_u64() & order_mask) as usize;
            let p = constellation.point(idx);
            energy += p.norm_sqr();
            spec[slot] = p;
        }
        Ok((ofdm_modulate(&spec, grid)?, energy))
    };

    match path {
        JammerPath::Direct => {
            let mut rx = [Vec::new(), Vec::new()];
            let mut energy = 0.0;
            for antenna in rx.iter_mut() {
                for _ in 0..n_symbols {
                    let (wave, e) = draw_symbol_wave(stream)?;
                    antenna.extend(wave);
                    energy += e;
                }
            }
            // Mean over occupied bins, symbols, and the two antennas.
            let per_bin = energy / (occupied.len() * n_symbols * 2) as f64;
            Ok((rx, per_bin))
        }
        JammerPath::Faded => {
            let g = [complex_gaussian(stream), complex_gaussian(stream)];
            let mut base = Vec::new();
            let mut energy = 0.0;
            for _ in 0..n_symbols {
                let (wave, e) = draw_symbol_wave(stream)?;
                base.extend(wave);
                energy += e;
            }
            let rx = [
                base.iter().map(|v| v * g[0]).collect(),
                base.iter().map(|v| v * g[1]).collect(),
            ];
            let base_per_bin = energy / (occupied.len() * n_symbols) as f64;
            let per_bin = base_per_bin * 0.5 * (g[0].norm_sqr() + g[1].norm_sqr());
            Ok((rx, per_bin))
        }
    }
}

/// Barrage jam: white complex Gaussian time samples over the full band, so
/// the per-bin density equals the per-sample average power.
fn barrage_waveform(
    path: JammerPath,
    frame_len: usize,
    stream: &mut impl RngCore,
) -> ([Vec<Complex64>; 2], f64) {
    match path {
        JammerPath::Direct => {
            let mut rx = [Vec::new(), Vec::new()];
            let mut energy = 0.0;
            for antenna in rx.iter_mut() {
                *antenna = (0..frame_len).map(|_| complex_gaussian(stream)).collect();
                energy += antenna.iter().map(|v| v.norm_sqr()).sum::<f64>();
            }
            let per_bin = energy / (2 * frame_len) as f64;
            (rx, per_bin)
        }
        JammerPath::Faded => {
            let g = [complex_gaussian(stream), complex_gaussian(stream)];
            let base: Vec<Complex64> =
                (0..frame_len).map(|_| complex_gaussian(stream)).collect();
            let base_power =
                base.iter().map(|v| v.norm_sqr()).sum::<f64>() / frame_len as f64;
            let rx = [
                base.iter().map(|v| v * g[0]).collect(),
                base.iter().map(|v| v * g[1]).collect(),
            ];
            let per_bin = base_power * 0.5 * (g[0].norm_sqr() + g[1].norm_sqr());
            (rx, per_bin)
        }
    }
}

/// Apply the flat channel, add jamming and noise:
/// `y_r = sum_t sqrt(power) h(r,t) x_t + jam_r + awgn`.
///
/// Noise is drawn as unit complex Gaussians scaled by `sqrt(n0)`, so the
/// draw count (and therefore every downstream substream) is independent of
/// the operating point.
pub fn transmit_through(
    tx_frames: &[Vec<Complex64>; 2],
    h: &ChannelRealization,
    jam: &JamFrame,
    noise: &NoiseSpec,
    power: f64,
    stream: &mut impl RngCore,
) -> Result<[Vec<Complex64>; 2]> {
    let n = tx_frames[0].len();
    if tx_frames[1].len() != n || jam.rx[0].len() != n || jam.rx[1].len() != n {
        return Err(Error::invalid(
            "transmit and jam frames must share one length",
        ));
    }
    let amp = power.sqrt();
    let sigma = noise.n0.sqrt();
    let mut out = [vec![C_ZERO; n], vec![C_ZERO; n]];
    for r in 0..2 {
        let hr = h.h.row(r);
        for i in 0..n {
            let signal = hr[0] * tx_frames[0][i] + hr[1] * tx_frames[1][i];
            out[r][i] = signal * amp + jam.rx[r][i] + complex_gaussian(stream) * sigma;
        }
    }
    Ok(out)
}
