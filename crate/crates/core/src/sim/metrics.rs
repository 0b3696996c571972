//! Aggregated sweep metrics and their CSV form.

use std::io::{BufRead, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// One aggregated row of a sweep: everything needed to recompute BER and
/// spectral efficiency, plus the seed for reproduction.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricRow {
    pub scheme: String,
    pub jammer: String,
    pub sjr_db: f64,
    pub es_n0_db: f64,
    pub frames: u64,
    pub bits: u64,
    pub bit_errors: u64,
    pub ber: f64,
    /// Symbol rate in symbols per channel use.
    pub rate: f64,
    /// Useful bits per channel use.
    pub spectral_efficiency: f64,
    pub seed: u64,
}

pub const CSV_HEADER: &str =
    "scheme,jammer,sjr_db,es_n0_db,frames,bits,bit_errors,ber,rate,spectral_efficiency,seed";

/// Useful bits per channel use: `rate * log2(order) * (1 - ber)`.
pub fn spectral_efficiency(rate: f64, order: usize, ber: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&ber) {
        return Err(Error::invalid(format!("ber {ber} outside [0, 1]")));
    }
    Ok(rate * (order as f64).log2() * (1.0 - ber))
}

/// Write rows as CSV: fixed header, one line per row, newline-terminated.
/// BER is emitted in scientific notation with 7 significant digits; all
/// other floats use their shortest exact decimal form.
pub fn emit_csv(rows: &[MetricRow], out: &mut impl Write) -> std::io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{:.6e},{},{:.6},{}",
            r.scheme,
            r.jammer,
            r.sjr_db,
            r.es_n0_db,
            r.frames,
            r.bits,
            r.bit_errors,
            r.ber,
            r.rate,
            r.spectral_efficiency,
            r.seed
        )?;
    }
    Ok(())
}

/// [`emit_csv`] into a file, mapping failures to [`Error::Io`] with the path.
pub fn emit_csv_path(rows: &[MetricRow], path: &Path) -> Result<()> {
    let io_err = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut file = std::io::BufWriter::new(std::fs::File::create(path).map_err(io_err)?);
    emit_csv(rows, &mut file).map_err(io_err)?;
    file.flush().map_err(io_err)
}

/// Parse CSV produced by [`emit_csv`].
pub fn parse_csv(input: impl BufRead) -> Result<Vec<MetricRow>> {
    let bad = |msg: String| Error::invalid(format!("csv parse: {msg}"));
    let mut lines = input.lines();
    match lines.next() {
        Some(Ok(h)) if h == CSV_HEADER => {}
        Some(Ok(h)) => return Err(bad(format!("unexpected header '{h}'"))),
        Some(Err(e)) => return Err(bad(e.to_string())),
        None => return Err(bad("empty input".into())),
    }
    let mut rows = Vec::new();
    for (n, line) in lines.enumerate() {
        let line = line.map_err(|e| bad(e.to_string()))?;
        if line.is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 11 {
            return Err(bad(format!("line {}: {} fields", n + 2, f.len())));
        }
        let num = |s: &str| -> Result<f64> {
            s.parse().map_err(|_| bad(format!("bad float '{s}'")))
        };
        let int = |s: &str| -> Result<u64> {
            s.parse().map_err(|_| bad(format!("bad integer '{s}'")))
        };
        rows.push(MetricRow {
            scheme: f[0].to_string(),
            jammer: f[1].to_string(),
            sjr_db: num(f[2])?,
            es_n0_db: num(f[3])?,
            frames: int(f[4])?,
            bits: int(f[5])?,
            bit_errors: int(f[6])?,
            ber: num(f[7])?,
            rate: num(f[8])?,
            spectral_efficiency: num(f[9])?,
            seed: int(f[10])?,
        });
    }
    Ok(rows)
}
