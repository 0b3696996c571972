//! Offline search for the rate-2 code's rotation angle.
//!
//! For each supported constellation this scans the rotation over
//! (0, pi/4], computing the minimum codeword-difference determinant of the
//! rotated code (the coding-gain figure; zero means two distinct symbol
//! pairs collide and the code loses full diversity), then refines around
//! the best grid point. The optima found here are the defaults shipped as
//! `DEFAULT_PHI1*`:
//!
//! ```text
//! cargo run --release --example phi_search
//! ```
//!
//! The curve is symmetric about pi/4 (the two epoch angles swap roles),
//! so the scan covers (0, pi/4] only.

use rrbeam::numerics::Complex64;
use rrbeam::QamConstellation;

/// All pairwise symbol differences, duplicates removed.
fn difference_set(q: &QamConstellation) -> Vec<Complex64> {
    let mut set: Vec<Complex64> = Vec::new();
    for a in q.points() {
        for b in q.points() {
            let d = a - b;
            if !set.iter().any(|v| (v - d).norm() <= 1e-12) {
                set.push(d);
            }
        }
    }
    set
}

/// Minimum determinant of the codeword-difference matrix over all symbol
/// pairs that differ: min |d_odd sin(phi) - conj(d_even) cos(phi)|^2.
fn min_det(phi: f64, diffs: &[Complex64]) -> f64 {
    let (s, c) = phi.sin_cos();
    let mut min = f64::INFINITY;
    for d_odd in diffs {
        for d_even in diffs {
            if d_odd.norm() <= 1e-12 && d_even.norm() <= 1e-12 {
                continue;
            }
            let det = (d_odd * s - d_even.conj() * c).norm_sqr();
            if det < min {
                min = det;
            }
        }
    }
    min
}

fn main() {
    println!("rotation search: maximize the minimum codeword-difference determinant");
    println!();
    for order in [4usize, 16, 64] {
        let q = QamConstellation::new(order).expect("supported order");
        let diffs = difference_set(&q);

        // Coarse grid, then golden-section style refinement by re-gridding.
        let mut lo = 1e-3;
        let mut hi = std::f64::consts::FRAC_PI_4;
        let mut best = (lo, 0.0f64);
        for _ in 0..4 {
            let n = 4000;
            best = (lo, f64::MIN);
            for k in 0..=n {
                let phi = lo + (hi - lo) * k as f64 / n as f64;
                let v = min_det(phi, &diffs);
                if v > best.1 {
                    best = (phi, v);
                }
            }
            let width = (hi - lo) / n as f64;
            lo = (best.0 - 2.0 * width).max(1e-6);
            hi = (best.0 + 2.0 * width).min(std::f64::consts::FRAC_PI_4);
        }

        println!(
            "{order:>2}-QAM: phi1 = {:.15} rad ({:.4} deg), min det = {:.9}, tan(phi1) = {:.9}",
            best.0,
            best.0.to_degrees(),
            best.1,
            best.0.tan()
        );
        println!(
            "        shipped default = {:.15}",
            rrbeam::default_phi1(order)
        );
    }
}
