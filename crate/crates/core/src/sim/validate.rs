//! Self-check suite behind `rrbeam validate`: oracle equivalence of the
//! detectors, structural invariants of the numerics, and end-to-end
//! integrity of the frame pipeline. Fast enough to run routinely.

use rand_chacha::rand_core::RngCore;

use crate::beamforming::{eigen_beams, transmit_correlation};
use crate::channel::{draw_channel, synthesize_jammer, JammerKind, JammerPath, JammerSpec};
use crate::modem::{ofdm_demodulate, OfdmGrid, QamConstellation};
use crate::numerics::{
    complex_gaussian, derive_stream, dft, eig_hermitian_2x2, uniform_f64, water_fill,
    Complex64, Matrix2, StreamSeed, C_ZERO,
};
use crate::receiver::{
    build_evcm, conditional_ml_detect, exhaustive_ml_detect, statistic_for_pair,
    super_symbol,
};
use crate::sim::config::{Scheme, SweepConfig};
use crate::sim::engine::{run_sweep, run_sweep_serial};
use crate::sim::metrics::emit_csv;
use crate::DEFAULT_PHI1;

/// Outcome of one named check.
#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

impl CheckResult {
    fn pass(name: &'static str, detail: impl Into<String>) -> Self {
        Self {
            name,
            pass: true,
            detail: detail.into(),
        }
    }

    fn fail(name: &'static str, detail: impl Into<String>) -> Self {
        Self {
            name,
            pass: false,
            detail: detail.into(),
        }
    }
}

/// Run every check; all of them must pass for a healthy build.
pub fn run_all() -> Vec<CheckResult> {
    vec![
        check_eigen(),
        check_dft(),
        check_water_fill(),
        check_oracle_equivalence(),
        check_complexity_counters(),
        check_evcm_orthogonality(),
        check_noiseless_integrity(),
        check_jammer_calibration(),
        check_determinism(),
    ]
}

fn check_eigen() -> CheckResult {
    const NAME: &str = "eigendecomposition reconstruction/unitarity";
    let mut rng = derive_stream(&StreamSeed::new(0xAA).child("eig"));
    let mut worst_recon = 0.0f64;
    let mut worst_unit = 0.0f64;
    for _ in 0..2000 {
        let a = 4.0 * (uniform_f64(&mut rng) - 0.5);
        let d = 4.0 * (uniform_f64(&mut rng) - 0.5);
        let b = Complex64::new(
            2.0 * (uniform_f64(&mut rng) - 0.5),
            2.0 * (uniform_f64(&mut rng) - 0.5),
        );
        let m = Matrix2::from_rows(
            [Complex64::new(a, 0.0), b],
            [b.conj(), Complex64::new(d, 0.0)],
        );
        let e = match eig_hermitian_2x2(&m) {
            Ok(e) => e,
            Err(err) => return CheckResult::fail(NAME, err.to_string()),
        };
        worst_recon = worst_recon.max(e.reconstruct().sub(&m).max_abs());
        worst_unit = worst_unit.max(
            e.vectors
                .adjoint()
                .mul(&e.vectors)
                .sub(&Matrix2::identity())
                .max_abs(),
        );
    }
    if worst_recon <= 1e-10 && worst_unit <= 1e-12 {
        CheckResult::pass(
            NAME,
            format!("worst reconstruction {worst_recon:.2e}, unitarity {worst_unit:.2e}"),
        )
    } else {
        CheckResult::fail(
            NAME,
            format!("reconstruction {worst_recon:.2e} or unitarity {worst_unit:.2e} out of bounds"),
        )
    }
}

fn check_dft() -> CheckResult {
    const NAME: &str = "unitary DFT round trip";
    let mut rng = derive_stream(&StreamSeed::new(0xAA).child("dft"));
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let x: Vec<Complex64> = (0..64).map(|_| complex_gaussian(&mut rng)).collect();
        let y = dft(&x, false).and_then(|y| dft(&y, true));
        match y {
            Ok(back) => {
                for (a, b) in back.iter().zip(&x) {
                    worst = worst.max((a - b).norm());
                }
            }
            Err(e) => return CheckResult::fail(NAME, e.to_string()),
        }
    }
    if worst <= 1e-12 {
        CheckResult::pass(NAME, format!("worst deviation {worst:.2e}"))
    } else {
        CheckResult::fail(NAME, format!("round-trip deviation {worst:.2e} > 1e-12"))
    }
}

fn check_water_fill() -> CheckResult {
    const NAME: &str = "water-filling budget";
    let mut rng = derive_stream(&StreamSeed::new(0xAA).child("wf"));
    let mut worst = 0.0f64;
    for _ in 0..2000 {
        let l1 = 0.01 + 5.0 * uniform_f64(&mut rng);
        let l2 = uniform_f64(&mut rng) * l1;
        let p = 0.1 + 4.0 * uniform_f64(&mut rng);
        let n0 = 3.0 * uniform_f64(&mut rng);
        match water_fill([l1, l2], p, n0) {
            Ok(d) => {
                if d[0] < 0.0 || d[1] < 0.0 {
                    return CheckResult::fail(NAME, "negative load".to_string());
                }
                worst = worst.max((d[0] + d[1] - p).abs());
            }
            Err(e) => return CheckResult::fail(NAME, e.to_string()),
        }
    }
    if worst <= 1e-12 {
        CheckResult::pass(NAME, format!("worst budget error {worst:.2e}"))
    } else {
        CheckResult::fail(NAME, format!("budget error {worst:.2e} > 1e-12"))
    }
}

fn check_oracle_equivalence() -> CheckResult {
    const NAME: &str = "conditional-ML vs exhaustive-ML";
    let mut rng = derive_stream(&StreamSeed::new(0xAB).child("oracle"));
    let mut checked = 0usize;
    for order in [4usize, 16] {
        let q = QamConstellation::new(order).unwrap();
        for trial in 0..2000 {
            let kappa = 0.2 + 2.0 * uniform_f64(&mut rng);
            let epoch = 1 + trial % 2;
            let odd = (rng.next_u64() as usize) % order;
            let even = (rng.next_u64() as usize) % order;
            let c = super_symbol(&q, odd, even, epoch, DEFAULT_PHI1).unwrap();
            let noise = complex_gaussian(&mut rng) * (0.05 + uniform_f64(&mut rng));
            let mut stat = statistic_for_pair(C_ZERO, C_ZERO, kappa);
            stat.r[epoch - 1] = c * kappa + noise;
            let fast = conditional_ml_detect(&stat, epoch, DEFAULT_PHI1, &q, 1.0).unwrap();
            let slow = exhaustive_ml_detect(&stat, epoch, DEFAULT_PHI1, &q, 1.0).unwrap();
            let agree = (fast.odd, fast.even) == (slow.odd, slow.even)
                || (fast.cost - slow.cost).abs() <= 1e-9;
            if !agree {
                return CheckResult::fail(
                    NAME,
                    format!(
                        "order {order}: decisions ({},{}) vs ({},{}), costs {} vs {}",
                        fast.odd, fast.even, slow.odd, slow.even, fast.cost, slow.cost
                    ),
                );
            }
            checked += 1;
        }
    }
    CheckResult::pass(NAME, format!("{checked} noisy statistics agreed"))
}

fn check_complexity_counters() -> CheckResult {
    const NAME: &str = "detector complexity counters";
    for order in [4usize, 16, 64] {
        let q = QamConstellation::new(order).unwrap();
        let stat = statistic_for_pair(q.point(0), q.point(1), 1.0);
        let fast = conditional_ml_detect(&stat, 1, DEFAULT_PHI1, &q, 1.0).unwrap();
        let slow = exhaustive_ml_detect(&stat, 1, DEFAULT_PHI1, &q, 1.0).unwrap();
        if fast.evaluations != order || slow.evaluations != order * order {
            return CheckResult::fail(
                NAME,
                format!(
                    "order {order}: conditional {} (want {order}), exhaustive {} (want {})",
                    fast.evaluations,
                    slow.evaluations,
                    order * order
                ),
            );
        }
    }
    CheckResult::pass(NAME, "|Q| and |Q|^2 evaluations exactly".to_string())
}

fn check_evcm_orthogonality() -> CheckResult {
    const NAME: &str = "virtual channel quasi-orthogonality";
    let mut rng = derive_stream(&StreamSeed::new(0xAB).child("evcm"));
    let mut worst = 0.0f64;
    for _ in 0..500 {
        let h = draw_channel(&mut rng);
        let beams = eigen_beams(&transmit_correlation(&h.h), 2.0, 0.01).unwrap();
        for antenna in 0..2 {
            let e = build_evcm(&h, &beams, antenna);
            let gram = e.g.adjoint().mul(&e.g);
            let expect =
                Matrix2::diag(Complex64::new(e.psi, 0.0), Complex64::new(e.psi, 0.0));
            worst = worst.max(gram.sub(&expect).max_abs());
        }
    }
    if worst <= 1e-10 {
        CheckResult::pass(NAME, format!("worst deviation {worst:.2e}"))
    } else {
        CheckResult::fail(NAME, format!("deviation {worst:.2e} > 1e-10"))
    }
}

fn check_noiseless_integrity() -> CheckResult {
    const NAME: &str = "noiseless end-to-end integrity";
    let mut total_bits = 0u64;
    for scheme in [Scheme::RrFull, Scheme::RrMulti, Scheme::AlamoutiBf] {
        let mut cfg = SweepConfig::new(scheme, JammerKind::None);
        cfg.es_n0_db = f64::INFINITY;
        cfg.sjr_points_db = vec![0.0];
        cfg.frames_per_point = 120;
        cfg.error_cap = None;
        if scheme == Scheme::RrMulti {
            cfg.jammed_slots = (12..44).collect();
        }
        match run_sweep(&cfg) {
            Ok(rows) => {
                total_bits += rows[0].bits;
                if rows[0].bit_errors != 0 {
                    return CheckResult::fail(
                        NAME,
                        format!(
                            "{} produced {} errors over {} bits",
                            scheme.as_str(),
                            rows[0].bit_errors,
                            rows[0].bits
                        ),
                    );
                }
            }
            Err(e) => return CheckResult::fail(NAME, e.to_string()),
        }
    }
    CheckResult::pass(NAME, format!("0 errors over {total_bits} bits"))
}

fn check_jammer_calibration() -> CheckResult {
    const NAME: &str = "jammer power calibration";
    let grid = OfdmGrid::ieee80211a();
    let q = QamConstellation::new(4).unwrap();
    let mut rng = derive_stream(&StreamSeed::new(0xAC).child("cal"));
    for kind in [JammerKind::AllBand, JammerKind::MultiBand, JammerKind::Barrage] {
        for path in [JammerPath::Direct, JammerPath::Faded] {
            let spec = JammerSpec {
                kind,
                path,
                sjr_db: 3.5,
                jammed_slots: (12..26).collect(),
            };
            let reference = 1.7;
            let frame = match synthesize_jammer(&spec, &grid, &q, 4, reference, &mut rng) {
                Ok(f) => f,
                Err(e) => return CheckResult::fail(NAME, e.to_string()),
            };
            // Re-measure from the emitted samples: disguised kinds on the
            // data grid, barrage as the per-sample time average.
            let measured = if kind == JammerKind::Barrage {
                let samples = frame.rx[0].len();
                frame
                    .rx
                    .iter()
                    .flat_map(|a| a.iter())
                    .map(|v| v.norm_sqr())
                    .sum::<f64>()
                    / (2 * samples) as f64
            } else {
                let occupied = match kind {
                    JammerKind::AllBand => grid.data_subcarriers(),
                    _ => spec.jammed_slots.len(),
                };
                let symbols = frame.rx[0].len() / grid.symbol_len();
                let mut energy = 0.0;
                for antenna in &frame.rx {
                    for s in 0..symbols {
                        let chunk =
                            &antenna[s * grid.symbol_len()..(s + 1) * grid.symbol_len()];
                        match ofdm_demodulate(chunk, &grid) {
                            Ok(_) => {}
                            Err(e) => return CheckResult::fail(NAME, e.to_string()),
                        }
                        let mut block = chunk[grid.cp_len()..].to_vec();
                        grid.dft_forward(&mut block);
                        energy += block.iter().map(|v| v.norm_sqr()).sum::<f64>();
                    }
                }
                energy / (2 * symbols * occupied) as f64
            };
            let target = reference * 10f64.powf(-0.35);
            if (measured - target).abs() > 1e-9 * target {
                return CheckResult::fail(
                    NAME,
                    format!(
                        "{}/{}: measured {measured:.12}, target {target:.12}",
                        kind.as_str(),
                        path.as_str()
                    ),
                );
            }
        }
    }
    CheckResult::pass(NAME, "ratio exact to 1e-9 for every kind and path".to_string())
}

fn check_determinism() -> CheckResult {
    const NAME: &str = "sweep determinism and serial/parallel equivalence";
    let mut cfg = SweepConfig::new(Scheme::RrFull, JammerKind::AllBand);
    cfg.sjr_points_db = vec![-5.0, 5.0];
    cfg.frames_per_point = 60;
    let a = match run_sweep(&cfg) {
        Ok(rows) => rows,
        Err(e) => return CheckResult::fail(NAME, e.to_string()),
    };
    let b = run_sweep(&cfg).unwrap();
    let s = run_sweep_serial(&cfg).unwrap();
    let mut csv_a = Vec::new();
    let mut csv_b = Vec::new();
    emit_csv(&a, &mut csv_a).unwrap();
    emit_csv(&b, &mut csv_b).unwrap();
    if csv_a != csv_b {
        return CheckResult::fail(NAME, "repeat run changed the CSV".to_string());
    }
    if a != s {
        return CheckResult::fail(NAME, "serial and parallel rows differ".to_string());
    }
    CheckResult::pass(NAME, "byte-identical CSV; serial == parallel".to_string())
}
