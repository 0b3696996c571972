//! Diagonal subcarrier precoders for the transmit side and their inverses
//! for the receive side, under a total power constraint.
//!
//! A full profile spreads the budget over every data slot; a multi-band
//! profile concentrates it on a protected slot set and transmits nothing
//! elsewhere, so the matching decoder marks unprotected slots unusable
//! instead of inverting a zero weight.

use crate::error::{Error, Result};
use crate::numerics::Complex64;
use crate::stbc::AntennaStreams;

/// Which slots a profile protects.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrecoderMode {
    Full,
    MultiBand,
}

/// Per-slot amplitude weights with their protected-set bookkeeping and the
/// power budget they satisfy: `sum(rho_k^2) = power_budget`.
#[derive(Debug, Clone)]
pub struct PrecoderProfile {
    mode: PrecoderMode,
    rho: Vec<f64>,
    protected: Vec<usize>,
    power_budget: f64,
}

const POWER_TOL: f64 = 1e-12;

impl PrecoderProfile {
    pub fn mode(&self) -> PrecoderMode {
        self.mode
    }

    /// Weight of one slot (zero on unprotected slots in multi-band mode).
    #[inline]
    pub fn weight(&self, slot: usize) -> f64 {
        self.rho[slot]
    }

    pub fn weights(&self) -> &[f64] {
        &self.rho
    }

    /// Slot indices with nonzero weight, ascending.
    pub fn protected_slots(&self) -> &[usize] {
        &self.protected
    }

    pub fn slot_count(&self) -> usize {
        self.rho.len()
    }

    pub fn power_budget(&self) -> f64 {
        self.power_budget
    }

    /// Replace the weights with a caller-supplied allocation over the same
    /// protected set. The vector must satisfy the power constraint and be
    /// positive exactly on the protected slots.
    pub fn with_weights(&self, rho: Vec<f64>) -> Result<Self> {
        if rho.len() != self.rho.len() {
            return Err(Error::invalid(format!(
                "expected {} weights, got {}",
                self.rho.len(),
                rho.len()
            )));
        }
        for (slot, &w) in rho.iter().enumerate() {
            if !w.is_finite() || w < 0.0 {
                return Err(Error::invalid(format!("weight {w} at slot {slot}")));
            }
            let should_be_positive = self.protected.binary_search(&slot).is_ok();
            if should_be_positive != (w > 0.0) {
                return Err(Error::invalid(format!(
                    "weight at slot {slot} does not match the protected set"
                )));
            }
        }
        let total: f64 = rho.iter().map(|w| w * w).sum();
        if (total - self.power_budget).abs() > POWER_TOL * self.power_budget.max(1.0) {
            return Err(Error::invalid(format!(
                "weights carry power {total}, budget is {}",
                self.power_budget
            )));
        }
        Ok(Self {
            mode: self.mode,
            rho,
            protected: self.protected.clone(),
            power_budget: self.power_budget,
        })
    }
}

/// Full-band profile: every slot weighted `sqrt(power / slots)`.
pub fn build_full_precoder(slots: usize, power: f64) -> Result<PrecoderProfile> {
    if slots == 0 {
        return Err(Error::invalid("slot count must be at least 1"));
    }
    if !(power.is_finite() && power > 0.0) {
        return Err(Error::invalid("power budget must be positive"));
    }
    let w = (power / slots as f64).sqrt();
    Ok(PrecoderProfile {
        mode: PrecoderMode::Full,
        rho: vec![w; slots],
        protected: (0..slots).collect(),
        power_budget: power,
    })
}

/// Multi-band profile: weight `sqrt(power / |jammed|)` on the jammed slots,
/// zero elsewhere. The jammed set must be nonempty (the profile is
/// undefined without a target set).
pub fn build_multiband_precoder(
    slots: usize,
    jammed: &[usize],
    power: f64,
) -> Result<PrecoderProfile> {
    if slots == 0 {
        return Err(Error::invalid("slot count must be at least 1"));
    }
    if !(power.is_finite() && power > 0.0) {
        return Err(Error::invalid("power budget must be positive"));
    }
    if jammed.is_empty() {
        return Err(Error::invalid(
            "multi-band precoder requires a nonempty jammed slot set",
        ));
    }
    let mut protected: Vec<usize> = jammed.to_vec();
    protected.sort_unstable();
    protected.dedup();
    if protected.len() != jammed.len() {
        return Err(Error::invalid("jammed slot set contains duplicates"));
    }
    if *protected.last().unwrap() >= slots {
        return Err(Error::invalid("jammed slot index out of range"));
    }
    if protected.len() == slots {
        // Protecting everything reduces to the full profile.
        return build_full_precoder(slots, power);
    }
    let w = (power / protected.len() as f64).sqrt();
    let mut rho = vec![0.0; slots];
    for &slot in &protected {
        rho[slot] = w;
    }
    Ok(PrecoderProfile {
        mode: PrecoderMode::MultiBand,
        rho,
        protected,
        power_budget: power,
    })
}

/// Scale both antenna streams elementwise by the slot weights (the diagonal
/// action of the precoder matrix; unused grid rows become unoccupied
/// subcarriers downstream).
pub fn apply_precoder(
    streams: &AntennaStreams,
    profile: &PrecoderProfile,
) -> Result<AntennaStreams> {
    if streams.len() != profile.slot_count() {
        return Err(Error::invalid(format!(
            "stream length {} does not match slot count {}",
            streams.len(),
            profile.slot_count()
        )));
    }
    let scale = |s: &[Complex64]| {
        s.iter()
            .zip(profile.weights())
            .map(|(v, &w)| v * w)
            .collect()
    };
    Ok(AntennaStreams {
        s1: scale(&streams.s1),
        s2: scale(&streams.s2),
    })
}

/// Invert the precoder on received per-antenna data-slot vectors: divide by
/// `rho_k` on protected slots and mark everything else unusable (`None`).
pub fn apply_decoder(
    spectrum_streams: &[Vec<Complex64>],
    profile: &PrecoderProfile,
) -> Result<Vec<Vec<Option<Complex64>>>> {
    for s in spectrum_streams {
        if s.len() != profile.slot_count() {
            return Err(Error::invalid(format!(
                "received vector length {} does not match slot count {}",
                s.len(),
                profile.slot_count()
            )));
        }
    }
    Ok(spectrum_streams
        .iter()
        .map(|s| {
            s.iter()
                .zip(profile.weights())
                .map(|(v, &w)| if w > 0.0 { Some(v / w) } else { None })
                .collect()
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{complex_gaussian, derive_stream, StreamSeed};

    fn random_streams(n: usize, tag: &str) -> AntennaStreams {
        let mut rng = derive_stream(&StreamSeed::new(9).child(tag));
        AntennaStreams {
            s1: (0..n).map(|_| complex_gaussian(&mut rng)).collect(),
            s2: (0..n).map(|_| complex_gaussian(&mut rng)).collect(),
        }
    }

    #[test]
    fn full_profile_is_uniform() {
        let p = build_full_precoder(4, 1.0).unwrap();
        assert_eq!(p.weights(), &[0.5, 0.5, 0.5, 0.5]);
        let p = build_full_precoder(52, 52.0).unwrap();
        assert!(p.weights().iter().all(|&w| (w - 1.0).abs() <= 1e-15));
        let p = build_full_precoder(1, 2.0).unwrap();
        assert!((p.weight(0) - 2f64.sqrt()).abs() <= 1e-15);
    }

    #[test]
    fn multiband_profile_concentrates_on_jammed_slots() {
        let p = build_multiband_precoder(4, &[2, 3], 1.0).unwrap();
        let w = std::f64::consts::FRAC_1_SQRT_2;
        assert_eq!(p.weight(0), 0.0);
        assert_eq!(p.weight(1), 0.0);
        assert!((p.weight(2) - w).abs() <= 1e-15);
        assert!((p.weight(3) - w).abs() <= 1e-15);
        assert_eq!(p.protected_slots(), &[2, 3]);
    }

    #[test]
    fn multiband_over_all_slots_reduces_to_full() {
        let full = build_full_precoder(8, 2.0).unwrap();
        let multi = build_multiband_precoder(8, &(0..8).collect::<Vec<_>>(), 2.0).unwrap();
        assert_eq!(multi.mode(), PrecoderMode::Full);
        assert_eq!(full.weights(), multi.weights());
    }

    #[test]
    fn multiband_single_slot() {
        let p = build_multiband_precoder(4, &[0], 1.0).unwrap();
        assert_eq!(p.weights(), &[1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn multiband_rejects_empty_set() {
        assert!(build_multiband_precoder(4, &[], 1.0).is_err());
    }

    #[test]
    fn power_constraint_holds() {
        for profile in [
            build_full_precoder(52, 52.0).unwrap(),
            build_full_precoder(7, 0.3).unwrap(),
            build_multiband_precoder(52, &[3, 4, 10, 11], 52.0).unwrap(),
        ] {
            let total: f64 = profile.weights().iter().map(|w| w * w).sum();
            assert!((total - profile.power_budget()).abs() <= 1e-12 * profile.power_budget());
        }
    }

    #[test]
    fn identity_weights_leave_streams_unchanged() {
        let streams = random_streams(52, "id");
        let p = build_full_precoder(52, 52.0).unwrap();
        let out = apply_precoder(&streams, &p).unwrap();
        for (a, b) in out.s1.iter().zip(&streams.s1) {
            assert!((a - b).norm() <= 1e-15);
        }
    }

    #[test]
    fn multiband_zero_slots_carry_zero() {
        let streams = random_streams(8, "zero");
        let p = build_multiband_precoder(8, &[1, 5], 2.0).unwrap();
        let out = apply_precoder(&streams, &p).unwrap();
        for slot in [0usize, 2, 3, 4, 6, 7] {
            assert_eq!(out.s1[slot].norm_sqr(), 0.0);
            assert_eq!(out.s2[slot].norm_sqr(), 0.0);
        }
    }

    #[test]
    fn precoded_energy_matches_weighted_sum() {
        let streams = random_streams(16, "energy");
        let p = build_multiband_precoder(16, &[0, 3, 9, 12], 4.0).unwrap();
        let out = apply_precoder(&streams, &p).unwrap();
        let direct: f64 = out
            .s1
            .iter()
            .chain(&out.s2)
            .map(|v| v.norm_sqr())
            .sum();
        let weighted: f64 = (0..16)
            .map(|k| {
                p.weight(k) * p.weight(k)
                    * (streams.s1[k].norm_sqr() + streams.s2[k].norm_sqr())
            })
            .sum();
        assert!((direct - weighted).abs() <= 1e-10 * weighted.max(1.0));
    }

    #[test]
    fn frame_power_equals_budget_times_mean_slot_energy() {
        // With uniform weights over the active set, the precoded frame
        // energy is exactly budget * mean per-slot symbol energy.
        for profile in [
            build_full_precoder(16, 5.0).unwrap(),
            build_multiband_precoder(16, &[2, 3, 8, 9], 5.0).unwrap(),
        ] {
            let streams = random_streams(16, "budget");
            let out = apply_precoder(&streams, &profile).unwrap();
            let tx_energy: f64 = out.s1.iter().chain(&out.s2).map(|v| v.norm_sqr()).sum();
            let active = profile.protected_slots();
            let mean_sym: f64 = active
                .iter()
                .map(|&k| streams.s1[k].norm_sqr() + streams.s2[k].norm_sqr())
                .sum::<f64>()
                / active.len() as f64;
            assert!(
                (tx_energy - profile.power_budget() * mean_sym).abs()
                    <= 1e-10 * tx_energy.max(1.0)
            );
        }
    }

    #[test]
    fn decode_inverts_encode_on_protected_slots() {
        for profile in [
            build_full_precoder(12, 3.0).unwrap(),
            build_multiband_precoder(12, &[1, 2, 6, 7], 3.0).unwrap(),
        ] {
            let streams = random_streams(12, "inv");
            let tx = apply_precoder(&streams, &profile).unwrap();
            let rx = vec![tx.s1.clone(), tx.s2.clone()];
            let decoded = apply_decoder(&rx, &profile).unwrap();
            for &slot in profile.protected_slots() {
                let a = decoded[0][slot].expect("protected slot usable");
                let b = decoded[1][slot].expect("protected slot usable");
                assert!((a - streams.s1[slot]).norm() <= 1e-12);
                assert!((b - streams.s2[slot]).norm() <= 1e-12);
            }
        }
    }

    #[test]
    fn full_decode_scale() {
        // Uniform full weights sqrt(P/2N) decode by multiplying with
        // sqrt(2N/P).
        let p = build_full_precoder(4, 1.0).unwrap();
        let rx = vec![
            vec![Complex64::new(1.0, 0.0); 4],
            vec![Complex64::new(0.0, 1.0); 4],
        ];
        let decoded = apply_decoder(&rx, &p).unwrap();
        for slot in 0..4 {
            assert!((decoded[0][slot].unwrap() - Complex64::new(2.0, 0.0)).norm() <= 1e-13);
        }
    }

    #[test]
    fn multiband_decode_marks_unprotected_unusable() {
        let p = build_multiband_precoder(6, &[2, 3], 1.0).unwrap();
        let rx = vec![vec![Complex64::new(1.0, 1.0); 6]; 2];
        let decoded = apply_decoder(&rx, &p).unwrap();
        for antenna in &decoded {
            for slot in [0usize, 1, 4, 5] {
                assert!(antenna[slot].is_none());
            }
            for slot in [2usize, 3] {
                assert!(antenna[slot].is_some());
            }
        }
    }

    #[test]
    fn custom_weights_validated() {
        let p = build_multiband_precoder(4, &[1, 2], 2.0).unwrap();
        // Valid replacement: different split, same power, same support.
        let ok = p.with_weights(vec![0.0, 1.2, (2.0f64 - 1.44).sqrt(), 0.0]);
        assert!(ok.is_ok());
        // Power off budget.
        assert!(p.with_weights(vec![0.0, 1.0, 1.1, 0.0]).is_err());
        // Support mismatch.
        assert!(p
            .with_weights(vec![1.0, 1.0, 0.0, 0.0])
            .is_err());
    }
}
