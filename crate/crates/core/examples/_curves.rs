use rrbeam::sim::{run_sweep, SweepConfig, Scheme};
use rrbeam::channel::JammerKind;

fn main() {
    for kind in [JammerKind::AllBand, JammerKind::Barrage, JammerKind::MultiBand] {
        println!("=== {:?} ===", kind);
        println!("{:>6}  {:>12} {:>12} {:>12}", "SJR", "rr-full", "rr-multi", "alamouti");
        let mut curves = Vec::new();
        for scheme in [Scheme::RrFull, Scheme::RrMulti, Scheme::AlamoutiBf] {
            let mut cfg = SweepConfig::new(scheme, kind);
            cfg.frames_per_point = 5000; // ~1e6 bits
            cfg.error_cap = None;
            cfg.jammed_slots = (12..44).collect();
            let rows = run_sweep(&cfg).unwrap();
            curves.push(rows);
        }
        for p in 0..curves[0].len() {
            println!("{:>6}  {:>12.4e} {:>12.4e} {:>12.4e}",
                curves[0][p].sjr_db, curves[0][p].ber, curves[1][p].ber, curves[2][p].ber);
        }
    }
}
