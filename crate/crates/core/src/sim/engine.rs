//! Frame pipeline and sweep execution.
//!
//! Every frame is a pure function of `(seed, sjr index, frame index)`:
//! channel, information bits, jamming, and noise each come from their own
//! derived substream, so sweeps are reproducible, frames parallelize
//! without shared state, and extending `frames_per_point` leaves earlier
//! frames untouched. Information bits are drawn word-addressed by the
//! block's anchor slot, so two schemes sharing a slot carry the same
//! payload there under the same seed.
//!
//! Power accounting: the precoder budget is the only transmit scaling (the
//! global amplitude of the received-signal model is unity), beam loads sum
//! to 2 so the beamformer is power neutral across the two antennas, and
//! the noise operating point references the mean transmit energy per
//! active data slot.

use rand_chacha::rand_core::RngCore;
use rayon::prelude::*;

use crate::beamforming::{
    beamform_alamouti, beamform_rr, eigen_beams, transmit_correlation, EigenBeams,
};
use crate::channel::{
    draw_channel, synthesize_jammer, transmit_through, ChannelRealization, NoiseSpec,
};
use crate::error::{Error, Result};
use crate::modem::{ofdm_demodulate, ofdm_modulate, QamConstellation};
use crate::numerics::{derive_stream, Complex64, Matrix2, StreamSeed, C_ZERO};
use crate::precoding::{
    apply_decoder, build_full_precoder, build_multiband_precoder, PrecoderProfile,
};
use crate::receiver::{
    alamouti_detect, build_evcm, combine, conditional_ml_detect, equalize, Evcm,
};
use crate::sim::config::{BlockMapping, Scheme, SweepConfig};
use crate::sim::metrics::{spectral_efficiency, MetricRow};

/// Per-antenna total power budget of the beam loads.
const BEAM_BUDGET: f64 = 2.0;

/// Frames evaluated per scheduling chunk when sweeping a point.
const FRAME_CHUNK: usize = 128;

/// Outcome of one simulated frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialRecord {
    pub bits: u64,
    pub bit_errors: u64,
    /// Degenerate channel draws rejected before this frame's draw stuck.
    pub channel_redraws: u32,
}

/// Where a block's two epochs live on the grid: `(ofdm symbol, data slot)`.
#[derive(Debug, Clone, Copy)]
struct BlockSite {
    epoch1: (usize, usize),
    epoch2: (usize, usize),
    /// Slot keying the block's payload substream.
    anchor: usize,
}

/// Everything that is constant across the frames of one sweep.
struct FrameContext {
    constellation: QamConstellation,
    profile: PrecoderProfile,
    sites: Vec<BlockSite>,
    symbols_per_frame: usize,
    /// Mean transmit energy per active slot per antenna (the Es in Es/N0).
    es: f64,
}

impl FrameContext {
    fn build(cfg: &SweepConfig) -> Result<Self> {
        cfg.validate()?;
        let n_data = cfg.grid.data_subcarriers();
        let power = cfg.power_budget();
        let profile = match cfg.scheme {
            Scheme::RrMulti => build_multiband_precoder(n_data, &cfg.jammed_slots, power)?,
            _ => build_full_precoder(n_data, power)?,
        };
        let active = cfg.active_slots();
        let sites = match cfg.mapping {
            BlockMapping::SfPairs => active
                .chunks_exact(2)
                .map(|pair| BlockSite {
                    epoch1: (0, pair[0]),
                    epoch2: (0, pair[1]),
                    anchor: pair[0],
                })
                .collect(),
            BlockMapping::TimeSlots => active
                .iter()
                .map(|&slot| BlockSite {
                    epoch1: (0, slot),
                    epoch2: (1, slot),
                    anchor: slot,
                })
                .collect(),
        };
        Ok(Self {
            constellation: QamConstellation::new(cfg.constellation_order)?,
            profile,
            sites,
            symbols_per_frame: cfg.mapping.symbols_per_frame(),
            es: power / active.len() as f64,
        })
    }
}

/// Channel realization with beams and virtual channels, redrawn until the
/// frame carries usable energy.
struct ChannelState {
    h: ChannelRealization,
    beams: EigenBeams,
    evcms: [Evcm; 2],
    redraws: u32,
}

fn draw_usable_channel(
    rng: &mut impl RngCore,
    noise: &NoiseSpec,
) -> Result<ChannelState> {
    for redraws in 0..1000u32 {
        let h = draw_channel(rng);
        let beams = match eigen_beams(&transmit_correlation(&h.h), BEAM_BUDGET, noise.n0) {
            Ok(b) => b,
            Err(Error::DegenerateChannel(_)) => continue,
            Err(e) => return Err(e),
        };
        let evcms = [build_evcm(&h, &beams, 0), build_evcm(&h, &beams, 1)];
        if evcms[0].psi > 0.0 && evcms[1].psi > 0.0 {
            return Ok(ChannelState {
                h,
                beams,
                evcms,
                redraws,
            });
        }
    }
    Err(Error::degenerate(
        "channel substream produced no usable realization in 1000 draws",
    ))
}

/// Draw the payload of one block from its word-addressed substream slot.
#[inline]
fn block_symbol_indices(
    bits_rng: &mut rand_chacha::ChaCha12Rng,
    anchor: usize,
    count: usize,
    bits_per_symbol: usize,
) -> [usize; 4] {
    // Each anchor owns one u64 (two stream words); block payloads never
    // exceed 24 bits.
    bits_rng.set_word_pos((anchor as u128) * 2);
    let word = bits_rng.next_u64();
    let mask = (1usize << bits_per_symbol) - 1;
    let mut idx = [0usize; 4];
    for (j, slot) in idx.iter_mut().enumerate().take(count) {
        *slot = (word >> (j * bits_per_symbol)) as usize & mask;
    }
    idx
}

fn run_frame_inner(
    ctx: &FrameContext,
    cfg: &SweepConfig,
    point_index: usize,
    sjr_db: f64,
    frame_index: usize,
    collect_rx: bool,
) -> Result<(TrialRecord, Option<Vec<Complex64>>)> {
    let q = &ctx.constellation;
    let bps = q.bits_per_symbol();
    let syms_per_block = cfg.scheme.symbols_per_block();
    let n_data = cfg.grid.data_subcarriers();
    let noise = NoiseSpec::from_es_n0_db(ctx.es, cfg.es_n0_db);

    let frame_seed = StreamSeed::new(cfg.seed)
        .child("point")
        .child(point_index as u64)
        .child("frame")
        .child(frame_index as u64);

    let mut channel_rng = derive_stream(&frame_seed.child("channel"));
    let state = draw_usable_channel(&mut channel_rng, &noise)?;

    // Payload: one u64 per block, keyed by the block's anchor slot.
    let mut bits_rng = derive_stream(&frame_seed.child("bits"));
    let payload: Vec<[usize; 4]> = ctx
        .sites
        .iter()
        .map(|site| block_symbol_indices(&mut bits_rng, site.anchor, syms_per_block, bps))
        .collect();

    // Transmit spectra per antenna and OFDM symbol.
    let mut tx_spec =
        vec![vec![vec![C_ZERO; n_data]; ctx.symbols_per_frame]; 2];
    for (site, indices) in ctx.sites.iter().zip(&payload) {
        let code = match cfg.scheme {
            Scheme::AlamoutiBf => crate::stbc::encode_alamouti(
                q.point(indices[0]),
                q.point(indices[1]),
            ),
            _ => {
                let block = crate::stbc::Rate2Block::new(
                    [
                        q.point(indices[0]),
                        q.point(indices[1]),
                        q.point(indices[2]),
                        q.point(indices[3]),
                    ],
                    cfg.phi1,
                )?;
                crate::stbc::encode_rate2(&block)
            }
        };
        // Per-slot precoder weights act on the matching epoch rows.
        let w1 = ctx.profile.weight(site.epoch1.1);
        let w2 = ctx.profile.weight(site.epoch2.1);
        let precoded = Matrix2::from_rows(
            [code.at(0, 0) * w1, code.at(0, 1) * w1],
            [code.at(1, 0) * w2, code.at(1, 1) * w2],
        );
        let tx_block = match cfg.scheme {
            Scheme::AlamoutiBf => beamform_alamouti(&precoded, &state.beams),
            _ => beamform_rr(&precoded, &state.beams),
        };
        for antenna in 0..2 {
            tx_spec[antenna][site.epoch1.0][site.epoch1.1] = tx_block.at(0, antenna);
            tx_spec[antenna][site.epoch2.0][site.epoch2.1] = tx_block.at(1, antenna);
        }
    }

    // Time-domain frames.
    let mut tx_time = [Vec::new(), Vec::new()];
    for antenna in 0..2 {
        for sym in 0..ctx.symbols_per_frame {
            tx_time[antenna].extend(ofdm_modulate(&tx_spec[antenna][sym], &cfg.grid)?);
        }
    }

    // Receive-side reference level for the jammer calibration: expected
    // received signal power per active slot, averaged over the antennas.
    // Per slot and antenna r that expectation is rho^2 * psi_r.
    let psi_mean = 0.5 * (state.evcms[0].psi + state.evcms[1].psi);
    let signal_power_ref = ctx.es * psi_mean;

    let mut jam_rng = derive_stream(&frame_seed.child("jam"));
    let jam = synthesize_jammer(
        &cfg.jammer_spec(sjr_db),
        &cfg.grid,
        q,
        ctx.symbols_per_frame,
        signal_power_ref,
        &mut jam_rng,
    )?;

    let mut noise_rng = derive_stream(&frame_seed.child("noise"));
    let rx_time = transmit_through(&tx_time, &state.h, &jam, &noise, 1.0, &mut noise_rng)?;
    let collected = collect_rx.then(|| rx_time[0].clone());

    // OFDM demodulation and precoder inversion, per symbol.
    let sym_len = cfg.grid.symbol_len();
    let mut decoded: Vec<Vec<Vec<Option<Complex64>>>> =
        Vec::with_capacity(ctx.symbols_per_frame);
    for sym in 0..ctx.symbols_per_frame {
        let mut antennas = Vec::with_capacity(2);
        for rx in rx_time.iter() {
            antennas.push(ofdm_demodulate(
                &rx[sym * sym_len..(sym + 1) * sym_len],
                &cfg.grid,
            )?);
        }
        decoded.push(apply_decoder(&antennas, &ctx.profile)?);
    }

    // Detection.
    let mut bit_errors = 0u64;
    let mut bits = 0u64;
    for (site, indices) in ctx.sites.iter().zip(&payload) {
        let mut y_pairs = [[C_ZERO; 2]; 2];
        for antenna in 0..2 {
            let c1 = decoded[site.epoch1.0][antenna][site.epoch1.1]
                .expect("active slots are always protected");
            let c2 = decoded[site.epoch2.0][antenna][site.epoch2.1]
                .expect("active slots are always protected");
            y_pairs[antenna] = [c1, c2.conj()];
        }
        let detected: [usize; 4] = match cfg.scheme {
            Scheme::AlamoutiBf => {
                let (x1, x2) = alamouti_detect(&y_pairs, &state.evcms, q)?;
                [x1, x2, 0, 0]
            }
            _ => {
                let pairs = [
                    equalize(y_pairs[0], &state.evcms[0])?,
                    equalize(y_pairs[1], &state.evcms[1])?,
                ];
                let stat = combine(&pairs);
                let first = conditional_ml_detect(&stat, 1, cfg.phi1, q, 1.0)?;
                let second = conditional_ml_detect(&stat, 2, cfg.phi1, q, 1.0)?;
                [first.odd, first.even, second.odd, second.even]
            }
        };
        for j in 0..syms_per_block {
            bit_errors += ((indices[j] ^ detected[j]).count_ones()) as u64;
            bits += bps as u64;
        }
    }

    Ok((
        TrialRecord {
            bits,
            bit_errors,
            channel_redraws: state.redraws,
        },
        collected,
    ))
}

/// Simulate a single frame of the configured link.
pub fn run_frame(
    cfg: &SweepConfig,
    point_index: usize,
    sjr_db: f64,
    frame_index: usize,
) -> Result<TrialRecord> {
    let ctx = FrameContext::build(cfg)?;
    run_frame_inner(&ctx, cfg, point_index, sjr_db, frame_index, false).map(|(r, _)| r)
}

/// Run the configured sweep with frames evaluated in parallel.
pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<MetricRow>> {
    run_sweep_impl(cfg, true)
}

/// Serial twin of [`run_sweep`]; produces identical rows.
pub fn run_sweep_serial(cfg: &SweepConfig) -> Result<Vec<MetricRow>> {
    run_sweep_impl(cfg, false)
}

fn run_sweep_impl(cfg: &SweepConfig, parallel: bool) -> Result<Vec<MetricRow>> {
    let ctx = FrameContext::build(cfg)?;
    let order = cfg.constellation_order;
    let rate = cfg.scheme.rate();
    let mut rows = Vec::with_capacity(cfg.sjr_points_db.len());

    for (point, &sjr_db) in cfg.sjr_points_db.iter().enumerate() {
        let mut bits = 0u64;
        let mut bit_errors = 0u64;
        let mut frames = 0u64;
        let mut next = 0usize;

        // Frames are evaluated in chunks but folded strictly in frame
        // order, so the early-stop prefix is identical whether or not the
        // chunk ran in parallel.
        'point: while next < cfg.frames_per_point {
            let end = (next + FRAME_CHUNK).min(cfg.frames_per_point);
            let records: Result<Vec<TrialRecord>> = if parallel {
                (next..end)
                    .into_par_iter()
                    .map(|f| {
                        run_frame_inner(&ctx, cfg, point, sjr_db, f, false)
                            .map(|(r, _)| r)
                    })
                    .collect()
            } else {
                (next..end)
                    .map(|f| {
                        run_frame_inner(&ctx, cfg, point, sjr_db, f, false)
                            .map(|(r, _)| r)
                    })
                    .collect()
            };
            for record in records? {
                bits += record.bits;
                bit_errors += record.bit_errors;
                frames += 1;
                if cfg.error_cap.is_some_and(|cap| bit_errors >= cap) {
                    break 'point;
                }
            }
            next = end;
        }

        let ber = if bits > 0 {
            bit_errors as f64 / bits as f64
        } else {
            0.0
        };
        rows.push(MetricRow {
            scheme: cfg.scheme.as_str().to_string(),
            jammer: cfg.jammer_kind.as_str().to_string(),
            sjr_db,
            es_n0_db: cfg.es_n0_db,
            frames,
            bits,
            bit_errors,
            ber,
            rate,
            spectral_efficiency: spectral_efficiency(rate, order, ber)?,
            seed: cfg.seed,
        });
    }
    Ok(rows)
}

/// Received baseband samples at antenna 0 (signal + jamming + noise) over
/// `frames` frames at one SJR point; input for PSD estimation.
pub fn received_waveform(cfg: &SweepConfig, sjr_db: f64, frames: usize) -> Result<Vec<Complex64>> {
    let ctx = FrameContext::build(cfg)?;
    let mut samples = Vec::new();
    for frame in 0..frames {
        let (_, rx) = run_frame_inner(&ctx, cfg, 0, sjr_db, frame, true)?;
        samples.extend(rx.expect("requested waveform"));
    }
    Ok(samples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::JammerKind;

    fn quick_cfg(scheme: Scheme, kind: JammerKind) -> SweepConfig {
        let mut cfg = SweepConfig::new(scheme, kind);
        cfg.sjr_points_db = vec![0.0];
        cfg.frames_per_point = 20;
        cfg
    }

    #[test]
    fn noiseless_unjammed_frame_is_error_free() {
        for scheme in [Scheme::RrFull, Scheme::RrMulti, Scheme::AlamoutiBf] {
            for mapping in [BlockMapping::SfPairs, BlockMapping::TimeSlots] {
                let mut cfg = quick_cfg(scheme, JammerKind::None);
                cfg.mapping = mapping;
                cfg.es_n0_db = f64::INFINITY;
                if scheme == Scheme::RrMulti {
                    cfg.jammed_slots = (12..44).collect();
                }
                for frame in 0..5 {
                    let rec = run_frame(&cfg, 0, 0.0, frame).unwrap();
                    assert_eq!(
                        rec.bit_errors, 0,
                        "{scheme:?}/{mapping:?} frame {frame}"
                    );
                    assert_eq!(rec.bits as usize, cfg.bits_per_frame());
                }
            }
        }
    }

    #[test]
    fn frames_are_deterministic() {
        let cfg = quick_cfg(Scheme::RrFull, JammerKind::AllBand);
        let a = run_frame(&cfg, 0, 0.0, 7).unwrap();
        let b = run_frame(&cfg, 0, 0.0, 7).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn bits_per_frame_counts() {
        // Independent counter: every active slot carries rate * log2|Q|
        // bits per channel use.
        let cfg = quick_cfg(Scheme::RrFull, JammerKind::None);
        let rec = run_frame(&cfg, 0, 10.0, 0).unwrap();
        assert_eq!(rec.bits, 2 * 52 * 2);
    }

    #[test]
    fn sweep_rows_match_single_frames() {
        let mut cfg = quick_cfg(Scheme::RrFull, JammerKind::AllBand);
        cfg.frames_per_point = 4;
        cfg.error_cap = None;
        let rows = run_sweep(&cfg).unwrap();
        assert_eq!(rows.len(), 1);
        let mut bits = 0;
        let mut errors = 0;
        for f in 0..4 {
            let rec = run_frame(&cfg, 0, 0.0, f).unwrap();
            bits += rec.bits;
            errors += rec.bit_errors;
        }
        assert_eq!(rows[0].bits, bits);
        assert_eq!(rows[0].bit_errors, errors);
        assert_eq!(rows[0].frames, 4);
    }

    #[test]
    fn serial_equals_parallel() {
        let mut cfg = quick_cfg(Scheme::RrFull, JammerKind::Barrage);
        cfg.sjr_points_db = vec![-5.0, 5.0];
        cfg.frames_per_point = 40;
        cfg.error_cap = Some(200);
        let par = run_sweep(&cfg).unwrap();
        let ser = run_sweep_serial(&cfg).unwrap();
        assert_eq!(par, ser);
    }

    #[test]
    fn extending_frames_keeps_prefix() {
        let mut cfg = quick_cfg(Scheme::RrFull, JammerKind::AllBand);
        cfg.error_cap = None;
        cfg.frames_per_point = 10;
        let short = run_sweep(&cfg).unwrap();
        cfg.frames_per_point = 20;
        let long = run_sweep(&cfg).unwrap();
        // First-half outcomes are identical, so doubling frames can only
        // add to the counts.
        assert!(long[0].bits == 2 * short[0].bits);
        let mut prefix_errors = 0;
        for f in 0..10 {
            prefix_errors += run_frame(&cfg, 0, 0.0, f).unwrap().bit_errors;
        }
        assert_eq!(short[0].bit_errors, prefix_errors);
    }

    #[test]
    fn early_stop_truncates_point() {
        let mut cfg = quick_cfg(Scheme::AlamoutiBf, JammerKind::AllBand);
        cfg.sjr_points_db = vec![-20.0];
        cfg.frames_per_point = 500;
        cfg.error_cap = Some(100);
        let rows = run_sweep(&cfg).unwrap();
        assert!(rows[0].frames < 500, "expected early stop");
        assert!(rows[0].bit_errors >= 100);
    }

    #[test]
    fn waveform_length() {
        let cfg = quick_cfg(Scheme::RrFull, JammerKind::AllBand);
        let w = received_waveform(&cfg, 0.0, 3).unwrap();
        assert_eq!(w.len(), 3 * 80);
    }
}
