//! Receive-side processing: equivalent virtual channel construction,
//! per-antenna equalization, combining, and symbol detection.
//!
//! Both transmit schemes produce the same Alamouti-structured virtual
//! channel per receive antenna,
//!
//! ```text
//! [ y^1  ]   [ g1   g2  ] [ c1 ]
//! [ y^2* ] = [ g2* -g1* ] [ c2 ] + transformed jam + noise
//! ```
//!
//! with `g1 = sqrt(load_1) u_a^H h_i`, `g2 = sqrt(load_2) u_b^H h_i`. The
//! conjugated second row is what makes `G^H G = psi I` hold exactly, which
//! in turn diagonalizes equalization. For the rate-2 scheme `(c1, c2)` are
//! the rotated super-symbols and a conditional-ML search recovers the four
//! information symbols at `|Q|` cost evaluations; for the Alamouti baseline
//! `(c1, c2)` are the information symbols themselves and detection is
//! linear.

use crate::beamforming::EigenBeams;
use crate::channel::ChannelRealization;
use crate::error::{Error, Result};
use crate::modem::{qam_slice_index, QamConstellation};
use crate::numerics::{Complex64, Matrix2};
use crate::stbc::rotate_pair;

/// Equivalent virtual channel for one receive antenna.
#[derive(Debug, Clone, Copy)]
pub struct Evcm {
    /// The 2x2 virtual channel `[[g1, g2], [g2*, -g1*]]`.
    pub g: Matrix2,
    /// `|g1|^2 + |g2|^2`; the diagonal value of `G G^H`.
    pub psi: f64,
}

impl Evcm {
    pub fn is_degenerate(&self) -> bool {
        self.psi <= 0.0
    }
}

/// Build the virtual channel seen by one receive antenna.
///
/// `antenna` selects the receive antenna (0 or 1); the relevant physical
/// gains are that antenna's row of the channel matrix, projected on the
/// beam directions and weighted by the square roots of the power loads.
pub fn build_evcm(h: &ChannelRealization, beams: &EigenBeams, antenna: usize) -> Evcm {
    let hi = h.into_antenna(antenna);
    let ua = beams.u_a();
    let ub = beams.u_b();
    let proj_a = ua[0].conj() * hi[0] + ua[1].conj() * hi[1];
    let proj_b = ub[0].conj() * hi[0] + ub[1].conj() * hi[1];
    let g1 = proj_a * beams.loads[0].sqrt();
    let g2 = proj_b * beams.loads[1].sqrt();
    Evcm {
        g: Matrix2::from_rows([g1, g2], [g2.conj(), -g1.conj()]),
        psi: g1.norm_sqr() + g2.norm_sqr(),
    }
}

/// One antenna's received pair in virtual-channel coordinates:
/// `(y at epoch 1, conj(y at epoch 2))`.
pub type RxPair = [Complex64; 2];

/// Equalized statistic of one antenna together with its channel gain.
#[derive(Debug, Clone, Copy)]
pub struct EqualizedPair {
    pub a: [Complex64; 2],
    pub psi: f64,
}

/// Channel equalization for one antenna: `a_i = G_i^H [y^1; y^{2*}]`.
///
/// The signal part comes out as `psi * [c1; c2]` thanks to the
/// quasi-orthogonality of the virtual channel.
pub fn equalize(y_pair: RxPair, evcm: &Evcm) -> Result<EqualizedPair> {
    if evcm.is_degenerate() {
        return Err(Error::degenerate("virtual channel carries no energy"));
    }
    let gh = evcm.g.adjoint();
    Ok(EqualizedPair {
        a: gh.mul_vec(y_pair),
        psi: evcm.psi,
    })
}

/// Combined sufficient statistic across the receive antennas.
#[derive(Debug, Clone, Copy)]
pub struct CombinedStatistic {
    /// Combined values for super-symbol 1 and 2.
    pub r: [Complex64; 2],
    /// Effective real gain multiplying the code super-symbols.
    pub kappa: f64,
}

/// Average the equalized pairs: `r_j = (a_1^j + a_2^j) / 2`, with
/// `kappa = (psi_1 + psi_2) / 2`.
pub fn combine(pairs: &[EqualizedPair; 2]) -> CombinedStatistic {
    CombinedStatistic {
        r: [
            0.5 * (pairs[0].a[0] + pairs[1].a[0]),
            0.5 * (pairs[0].a[1] + pairs[1].a[1]),
        ],
        kappa: 0.5 * (pairs[0].psi + pairs[1].psi),
    }
}

/// Result of one pair detection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Detection {
    /// Constellation index of the odd-position symbol (x1 or x3).
    pub odd: usize,
    /// Constellation index of the even-position symbol (x2 or x4).
    pub even: usize,
    /// Final value of the minimized cost.
    pub cost: f64,
    /// Number of cost evaluations spent (complexity instrumentation).
    pub evaluations: usize,
}

/// One decoded rate-2 block.
#[derive(Debug, Clone, Copy)]
pub struct DecodedBlock {
    /// Constellation indices of the four detected symbols.
    pub indices: [usize; 4],
    /// Cost of each epoch's decision.
    pub costs: [f64; 2],
}

#[inline]
fn epoch_angle(epoch: usize, phi1: f64) -> Result<f64> {
    match epoch {
        1 => Ok(phi1),
        2 => Ok(std::f64::consts::FRAC_PI_2 - phi1),
        _ => Err(Error::invalid(format!("epoch must be 1 or 2, got {epoch}"))),
    }
}

#[inline]
fn pair_cost(
    r: Complex64,
    kappa_eff: f64,
    sin_phi: f64,
    cos_phi: f64,
    odd: Complex64,
    even: Complex64,
) -> f64 {
    (r - (odd * sin_phi - even.conj() * cos_phi) * kappa_eff).norm_sqr()
}

/// Conditional-ML detection of one symbol pair from a combined statistic.
///
/// For each of the `|Q|` candidates for the even symbol, the odd symbol is
/// estimated by slicing the intermediate signal
/// `(r + kappa_eff * conj(even) * cos(phi)) / (kappa_eff * sin(phi))`
/// and the pair cost `|r - kappa_eff (odd sin(phi) - conj(even) cos(phi))|^2`
/// is evaluated once, so exactly `|Q|` cost evaluations are spent. The
/// slicing step attains the conditional minimum because the odd symbol
/// enters the cost through the positive real scale `kappa_eff * sin(phi)`.
///
/// `amplitude` is any global transmit amplitude left outside the combined
/// gain; the effective gain is `amplitude * kappa`.
pub fn conditional_ml_detect(
    stat: &CombinedStatistic,
    epoch: usize,
    phi1: f64,
    q: &QamConstellation,
    amplitude: f64,
) -> Result<Detection> {
    let kappa_eff = amplitude * stat.kappa;
    if !(kappa_eff > 0.0) {
        return Err(Error::degenerate("nonpositive effective gain"));
    }
    let phi = epoch_angle(epoch, phi1)?;
    let (sin_phi, cos_phi) = phi.sin_cos();
    let r = stat.r[epoch - 1];
    let inv_scale = 1.0 / (kappa_eff * sin_phi);

    let mut best = Detection {
        odd: 0,
        even: 0,
        cost: f64::INFINITY,
        evaluations: 0,
    };
    for (e, pe) in q.points().iter().enumerate() {
        let intermediate = r + pe.conj() * (kappa_eff * cos_phi);
        let o = qam_slice_index(intermediate * inv_scale, q);
        let cost = pair_cost(r, kappa_eff, sin_phi, cos_phi, q.point(o), *pe);
        best.evaluations += 1;
        if cost < best.cost {
            best.odd = o;
            best.even = e;
            best.cost = cost;
        }
    }
    Ok(best)
}

/// Brute-force ML over all `|Q|^2` symbol pairs; the independent oracle for
/// the conditional search. Ties break lexicographically on (odd, even).
pub fn exhaustive_ml_detect(
    stat: &CombinedStatistic,
    epoch: usize,
    phi1: f64,
    q: &QamConstellation,
    amplitude: f64,
) -> Result<Detection> {
    let kappa_eff = amplitude * stat.kappa;
    if !(kappa_eff > 0.0) {
        return Err(Error::degenerate("nonpositive effective gain"));
    }
    let phi = epoch_angle(epoch, phi1)?;
    let (sin_phi, cos_phi) = phi.sin_cos();
    let r = stat.r[epoch - 1];

    let mut best = Detection {
        odd: 0,
        even: 0,
        cost: f64::INFINITY,
        evaluations: 0,
    };
    for (o, po) in q.points().iter().enumerate() {
        for (e, pe) in q.points().iter().enumerate() {
            let cost = pair_cost(r, kappa_eff, sin_phi, cos_phi, *po, *pe);
            best.evaluations += 1;
            if cost < best.cost {
                best.odd = o;
                best.even = e;
                best.cost = cost;
            }
        }
    }
    Ok(best)
}

/// Linear Alamouti detection: combine `sum_i G_i^H y_i`, divide out the
/// total gain, and slice each symbol to the nearest constellation point.
pub fn alamouti_detect(
    y_pairs: &[RxPair; 2],
    evcms: &[Evcm; 2],
    q: &QamConstellation,
) -> Result<(usize, usize)> {
    let total_gain = evcms[0].psi + evcms[1].psi;
    if !(total_gain > 0.0) {
        return Err(Error::degenerate("zero total channel gain"));
    }
    let mut combined = [Complex64::new(0.0, 0.0); 2];
    for i in 0..2 {
        let a = evcms[i].g.adjoint().mul_vec(y_pairs[i]);
        combined[0] += a[0];
        combined[1] += a[1];
    }
    let inv = 1.0 / total_gain;
    Ok((
        qam_slice_index(combined[0] * inv, q),
        qam_slice_index(combined[1] * inv, q),
    ))
}

/// Noise-free combined statistic for a known super-symbol pair; shared by
/// tests and the oracle-equivalence self-checks.
pub fn statistic_for_pair(
    c1: Complex64,
    c2: Complex64,
    kappa: f64,
) -> CombinedStatistic {
    CombinedStatistic {
        r: [c1 * kappa, c2 * kappa],
        kappa,
    }
}

/// Super-symbol of a candidate pair under the epoch angle; convenience for
/// building statistics from symbol indices.
pub fn super_symbol(
    q: &QamConstellation,
    odd: usize,
    even: usize,
    epoch: usize,
    phi1: f64,
) -> Result<Complex64> {
    let phi = epoch_angle(epoch, phi1)?;
    Ok(rotate_pair(q.point(odd), q.point(even), phi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::beamforming::{eigen_beams, transmit_correlation};
    use crate::channel::draw_channel;
    use crate::numerics::{
        complex_gaussian, derive_stream, uniform_f64, Matrix2, StreamSeed, C_ONE, C_ZERO,
    };
    use crate::DEFAULT_PHI1;
    use rand_chacha::rand_core::RngCore;

    fn identity_beams() -> EigenBeams {
        EigenBeams {
            basis: Matrix2::identity(),
            loads: [1.0, 1.0],
            source_correlation: Matrix2::identity(),
        }
    }

    #[test]
    fn evcm_unit_channel() {
        let h = ChannelRealization {
            h: Matrix2::identity(),
        };
        let e = build_evcm(&h, &identity_beams(), 0);
        assert!((e.psi - 1.0).abs() <= 1e-15);
        assert!((e.g.at(0, 0) - C_ONE).norm() <= 1e-15);
        assert!(e.g.at(0, 1).norm() <= 1e-15);
        assert!(e.g.at(1, 0).norm() <= 1e-15);
        assert!((e.g.at(1, 1) + C_ONE).norm() <= 1e-15);
    }

    #[test]
    fn evcm_zero_loads_is_degenerate() {
        let h = ChannelRealization {
            h: Matrix2::identity(),
        };
        let beams = EigenBeams {
            basis: Matrix2::identity(),
            loads: [0.0, 0.0],
            source_correlation: Matrix2::identity(),
        };
        let e = build_evcm(&h, &beams, 0);
        assert!(e.is_degenerate());
        assert_eq!(e.g.max_abs(), 0.0);
        assert!(equalize([C_ONE, C_ONE], &e).is_err());
    }

    #[test]
    fn evcm_quasi_orthogonality_over_random_draws() {
        let mut rng = derive_stream(&StreamSeed::new(31).child("evcm"));
        for _ in 0..1000 {
            let h = draw_channel(&mut rng);
            let beams = eigen_beams(&transmit_correlation(&h.h), 2.0, 0.01).unwrap();
            for antenna in 0..2 {
                let e = build_evcm(&h, &beams, antenna);
                let gram = e.g.adjoint().mul(&e.g);
                let expect = Matrix2::diag(
                    Complex64::new(e.psi, 0.0),
                    Complex64::new(e.psi, 0.0),
                );
                assert!(gram.sub(&expect).max_abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn equalize_recovers_scaled_symbols() {
        let mut rng = derive_stream(&StreamSeed::new(31).child("eq"));
        for _ in 0..200 {
            let h = draw_channel(&mut rng);
            let beams = eigen_beams(&transmit_correlation(&h.h), 2.0, 0.01).unwrap();
            let c1 = complex_gaussian(&mut rng);
            let c2 = complex_gaussian(&mut rng);
            let e = build_evcm(&h, &beams, 0);
            // Noise-free received pair straight from the virtual channel.
            let y = e.g.mul_vec([c1, c2]);
            let a = equalize(y, &e).unwrap();
            assert!((a.a[0] - c1 * e.psi).norm() <= 1e-10);
            assert!((a.a[1] - c2 * e.psi).norm() <= 1e-10);
        }
    }

    #[test]
    fn equalize_zero_input_gives_zero() {
        let h = ChannelRealization {
            h: Matrix2::identity(),
        };
        let e = build_evcm(&h, &identity_beams(), 0);
        let a = equalize([C_ZERO, C_ZERO], &e).unwrap();
        assert_eq!(a.a[0], C_ZERO);
        assert_eq!(a.a[1], C_ZERO);
    }

    #[test]
    fn equalize_preserves_energy_up_to_gain() {
        // Jam-only input: ||G^H j||^2 = psi * ||j||^2.
        let mut rng = derive_stream(&StreamSeed::new(31).child("iso"));
        for _ in 0..200 {
            let h = draw_channel(&mut rng);
            let beams = eigen_beams(&transmit_correlation(&h.h), 2.0, 0.01).unwrap();
            let e = build_evcm(&h, &beams, 1);
            let j = [complex_gaussian(&mut rng), complex_gaussian(&mut rng)];
            let a = equalize(j, &e).unwrap();
            let in_e = j[0].norm_sqr() + j[1].norm_sqr();
            let out_e = a.a[0].norm_sqr() + a.a[1].norm_sqr();
            assert!((out_e - e.psi * in_e).abs() <= 1e-10 * out_e.max(1.0));
        }
    }

    #[test]
    fn combine_averages() {
        let p = EqualizedPair {
            a: [Complex64::new(2.0, 1.0), Complex64::new(-1.0, 0.5)],
            psi: 1.4,
        };
        let stat = combine(&[p, p]);
        assert_eq!(stat.r[0], p.a[0]);
        assert_eq!(stat.r[1], p.a[1]);
        assert_eq!(stat.kappa, p.psi);

        let zero = EqualizedPair {
            a: [C_ZERO, C_ZERO],
            psi: 0.0,
        };
        let stat = combine(&[zero, zero]);
        assert_eq!(stat.r[0], C_ZERO);
        assert_eq!(stat.kappa, 0.0);
    }

    #[test]
    fn combined_statistic_is_kappa_times_super_symbols() {
        // Full receive chain on a noise-free, jam-free block.
        let mut rng = derive_stream(&StreamSeed::new(31).child("chain"));
        let q = QamConstellation::new(4).unwrap();
        for _ in 0..200 {
            let h = draw_channel(&mut rng);
            let beams = eigen_beams(&transmit_correlation(&h.h), 2.0, 0.01).unwrap();
            let c1 = super_symbol(&q, 1, 2, 1, DEFAULT_PHI1).unwrap();
            let c2 = super_symbol(&q, 3, 0, 2, DEFAULT_PHI1).unwrap();
            let mut pairs = Vec::new();
            for antenna in 0..2 {
                let e = build_evcm(&h, &beams, antenna);
                let y = e.g.mul_vec([c1, c2]);
                pairs.push(equalize(y, &e).unwrap());
            }
            let stat = combine(&[pairs[0], pairs[1]]);
            assert!((stat.r[0] - c1 * stat.kappa).norm() <= 1e-10);
            assert!((stat.r[1] - c2 * stat.kappa).norm() <= 1e-10);
        }
    }

    #[test]
    fn noiseless_pair_recovered_with_zero_cost() {
        // Exhaustive over all pairs, both epochs, 4- and 16-QAM, each at
        // its search-optimal rotation (where the pair-to-super-symbol map
        // is injective).
        for order in [4usize, 16] {
            let q = QamConstellation::new(order).unwrap();
            let phi1 = crate::default_phi1(order);
            for epoch in [1usize, 2] {
                for odd in 0..order {
                    for even in 0..order {
                        let c = super_symbol(&q, odd, even, epoch, phi1).unwrap();
                        let stat = statistic_for_pair(
                            if epoch == 1 { c } else { C_ZERO },
                            if epoch == 2 { c } else { C_ZERO },
                            1.3,
                        );
                        let d = conditional_ml_detect(&stat, epoch, phi1, &q, 1.0).unwrap();
                        assert_eq!((d.odd, d.even), (odd, even), "order {order}");
                        assert!(d.cost <= 1e-18, "cost {}", d.cost);
                    }
                }
            }
        }
    }

    #[test]
    fn evaluation_counters_are_exact() {
        for order in [4usize, 16, 64] {
            let q = QamConstellation::new(order).unwrap();
            let stat = statistic_for_pair(q.point(1), q.point(2), 0.9);
            let c = conditional_ml_detect(&stat, 1, DEFAULT_PHI1, &q, 1.0).unwrap();
            assert_eq!(c.evaluations, order);
            let x = exhaustive_ml_detect(&stat, 1, DEFAULT_PHI1, &q, 1.0).unwrap();
            assert_eq!(x.evaluations, order * order);
        }
    }

    #[test]
    fn conditional_matches_exhaustive_on_noisy_statistics() {
        let mut rng = derive_stream(&StreamSeed::new(32).child("oracle"));
        for order in [4usize, 16] {
            let q = QamConstellation::new(order).unwrap();
            for trial in 0..10_000 {
                let kappa = 0.2 + 2.0 * uniform_f64(&mut rng);
                let epoch = 1 + (trial % 2);
                let odd = (rng.next_u64() as usize) % order;
                let even = (rng.next_u64() as usize) % order;
                let c = super_symbol(&q, odd, even, epoch, DEFAULT_PHI1).unwrap();
                let noise = complex_gaussian(&mut rng) * (0.05 + uniform_f64(&mut rng));
                let mut stat = statistic_for_pair(C_ZERO, C_ZERO, kappa);
                stat.r[epoch - 1] = c * kappa + noise;
                let fast = conditional_ml_detect(&stat, epoch, DEFAULT_PHI1, &q, 1.0)
                    .unwrap();
                let slow = exhaustive_ml_detect(&stat, epoch, DEFAULT_PHI1, &q, 1.0)
                    .unwrap();
                assert!(
                    (fast.odd, fast.even) == (slow.odd, slow.even)
                        || (fast.cost - slow.cost).abs() <= 1e-9,
                    "order {order} trial {trial}: fast ({},{}) cost {} vs slow ({},{}) cost {}",
                    fast.odd,
                    fast.even,
                    fast.cost,
                    slow.odd,
                    slow.even,
                    slow.cost
                );
                // The conditional minimum is the global minimum.
                assert!(fast.cost <= slow.cost + 1e-9);
            }
        }
    }

    #[test]
    fn detectors_reject_degenerate_gain() {
        let q = QamConstellation::new(4).unwrap();
        let stat = statistic_for_pair(C_ZERO, C_ZERO, 0.0);
        assert!(conditional_ml_detect(&stat, 1, DEFAULT_PHI1, &q, 1.0).is_err());
        assert!(exhaustive_ml_detect(&stat, 1, DEFAULT_PHI1, &q, 1.0).is_err());
    }

    #[test]
    fn detectors_reject_bad_epoch() {
        let q = QamConstellation::new(4).unwrap();
        let stat = statistic_for_pair(q.point(0), q.point(1), 1.0);
        assert!(conditional_ml_detect(&stat, 3, DEFAULT_PHI1, &q, 1.0).is_err());
    }

    #[test]
    fn alamouti_identity_recovery() {
        let q = QamConstellation::new(16).unwrap();
        let h = ChannelRealization {
            h: Matrix2::identity(),
        };
        let beams = identity_beams();
        let x1 = q.point(11);
        let x2 = q.point(6);
        let mut y_pairs = [[C_ZERO; 2]; 2];
        let mut evcms = [build_evcm(&h, &beams, 0), build_evcm(&h, &beams, 1)];
        for i in 0..2 {
            evcms[i] = build_evcm(&h, &beams, i);
            y_pairs[i] = evcms[i].g.mul_vec([x1, x2]);
        }
        let (d1, d2) = alamouti_detect(&y_pairs, &evcms, &q).unwrap();
        assert_eq!((d1, d2), (11, 6));
    }

    #[test]
    fn alamouti_matches_joint_ml_noiseless() {
        // At zero noise the linear detector agrees with brute-force joint
        // ML over all |Q|^2 pairs.
        let mut rng = derive_stream(&StreamSeed::new(33).child("alam"));
        let q = QamConstellation::new(16).unwrap();
        for _ in 0..500 {
            let h = draw_channel(&mut rng);
            let beams = eigen_beams(&transmit_correlation(&h.h), 2.0, 0.01).unwrap();
            let tx1 = (rng.next_u64() as usize) % 16;
            let tx2 = (rng.next_u64() as usize) % 16;
            let mut y_pairs = [[C_ZERO; 2]; 2];
            let mut evcms = [build_evcm(&h, &beams, 0), build_evcm(&h, &beams, 1)];
            for i in 0..2 {
                evcms[i] = build_evcm(&h, &beams, i);
                y_pairs[i] = evcms[i].g.mul_vec([q.point(tx1), q.point(tx2)]);
            }
            let (d1, d2) = alamouti_detect(&y_pairs, &evcms, &q).unwrap();

            // Joint ML oracle.
            let mut best = (0usize, 0usize, f64::INFINITY);
            for a in 0..16 {
                for b in 0..16 {
                    let mut cost = 0.0;
                    for i in 0..2 {
                        let model = evcms[i].g.mul_vec([q.point(a), q.point(b)]);
                        cost += (y_pairs[i][0] - model[0]).norm_sqr()
                            + (y_pairs[i][1] - model[1]).norm_sqr();
                    }
                    if cost < best.2 {
                        best = (a, b, cost);
                    }
                }
            }
            assert_eq!((d1, d2), (best.0, best.1));
            assert_eq!((d1, d2), (tx1, tx2));
        }
    }

    #[test]
    fn alamouti_zero_input_slices_deterministically() {
        let q = QamConstellation::new(4).unwrap();
        let h = ChannelRealization {
            h: Matrix2::identity(),
        };
        let evcms = [
            build_evcm(&h, &identity_beams(), 0),
            build_evcm(&h, &identity_beams(), 1),
        ];
        let (d1, d2) =
            alamouti_detect(&[[C_ZERO; 2], [C_ZERO; 2]], &evcms, &q).unwrap();
        // Zero slices to the documented tie-break point: index 0.
        assert_eq!((d1, d2), (0, 0));
    }

    #[test]
    fn alamouti_rejects_zero_gain() {
        let q = QamConstellation::new(4).unwrap();
        let dead = Evcm {
            g: Matrix2::zero(),
            psi: 0.0,
        };
        assert!(alamouti_detect(&[[C_ZERO; 2], [C_ZERO; 2]], &[dead, dead], &q).is_err());
    }
}
