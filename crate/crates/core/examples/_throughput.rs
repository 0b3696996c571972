use rrbeam::sim::{run_sweep, SweepConfig, Scheme};
use rrbeam::channel::JammerKind;
use std::time::Instant;

fn main() {
    let mut cfg = SweepConfig::new(Scheme::RrFull, JammerKind::AllBand);
    cfg.sjr_points_db = vec![0.0];
    cfg.frames_per_point = 10_000;
    cfg.error_cap = None;
    let t = Instant::now();
    let rows = run_sweep(&cfg).unwrap();
    let dt = t.elapsed().as_secs_f64();
    println!("parallel: {} frames, {} bits in {:.2}s -> {:.0} frames/s, ber={:.3e}",
        rows[0].frames, rows[0].bits, dt, rows[0].frames as f64 / dt, rows[0].ber);
    let t = Instant::now();
    let rows = rrbeam::sim::run_sweep_serial(&cfg).unwrap();
    let dt = t.elapsed().as_secs_f64();
    println!("serial:   {} frames in {:.2}s -> {:.0} frames/s", rows[0].frames, dt, rows[0].frames as f64 / dt);
}
