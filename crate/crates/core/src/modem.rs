//! Gray-coded QAM constellations and OFDM (de)modulation on an
//! IEEE802.11a-like 64-subcarrier grid.

use std::fmt;
use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::numerics::{Complex64, C_ZERO};

// ---------------------------------------------------------------------------
// QAM
// ---------------------------------------------------------------------------

/// Square QAM constellation with unit average energy and a per-axis Gray
/// bit map.
///
/// A label is the bit word read MSB-first; the point with label `k` is
/// `points()[k]`. The first half of the word selects the in-phase level,
/// the second half the quadrature level, each through a reflected Gray
/// code, so minimum-distance neighbours always differ in exactly one bit.
///
/// The 4-QAM table, with `s = 1/sqrt(2)`:
///
/// | bits | point    |
/// |------|----------|
/// | 00   | ( s,  s) |
/// | 01   | ( s, -s) |
/// | 10   | (-s,  s) |
/// | 11   | (-s, -s) |
#[derive(Debug, Clone)]
pub struct QamConstellation {
    order: usize,
    bits_per_symbol: usize,
    points: Vec<Complex64>,
}

/// Reflected Gray sequence of `2^bits` axis codes in descending spatial
/// order (largest amplitude first), so code 0 is the most positive level.
fn gray_axis_levels(bits: usize) -> Vec<f64> {
    let n = 1usize << bits;
    // levels in descending order: n-1, n-3, ..., -(n-1)
    let mut level_of_code = vec![0.0; n];
    for (rank, code) in (0..n).map(|i| (i, i ^ (i >> 1))) {
        level_of_code[code] = (n as f64 - 1.0) - 2.0 * rank as f64;
    }
    level_of_code
}

impl QamConstellation {
    /// Build a constellation of the given order (4, 16, or 64).
    pub fn new(order: usize) -> Result<Self> {
        if !matches!(order, 4 | 16 | 64) {
            return Err(Error::invalid(format!(
                "unsupported QAM order {order}; expected 4, 16, or 64"
            )));
        }
        let bits_per_symbol = order.trailing_zeros() as usize;
        let axis_bits = bits_per_symbol / 2;
        let axis = gray_axis_levels(axis_bits);
        // Unit average energy: E[I^2 + Q^2] = 2 * (4^b - 1) / 3 per axis pair.
        let mean_sq: f64 = axis.iter().map(|l| l * l).sum::<f64>() / axis.len() as f64;
        let scale = 1.0 / (2.0 * mean_sq).sqrt();

        let half = 1usize << axis_bits;
        let mut points = Vec::with_capacity(order);
        for label in 0..order {
            let i_code = label >> axis_bits;
            let q_code = label & (half - 1);
            points.push(Complex64::new(axis[i_code] * scale, axis[q_code] * scale));
        }
        Ok(Self {
            order,
            bits_per_symbol,
            points,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.bits_per_symbol
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    #[inline]
    pub fn point(&self, index: usize) -> Complex64 {
        self.points[index]
    }

    /// Bit word of a point index, MSB first.
    pub fn label_bits(&self, index: usize) -> Vec<u8> {
        (0..self.bits_per_symbol)
            .rev()
            .map(|b| ((index >> b) & 1) as u8)
            .collect()
    }
}

/// Map a bit sequence onto constellation points, one point per
/// `log2 |Q|`-bit group (MSB first).
pub fn qam_modulate(bits: &[u8], q: &QamConstellation) -> Result<Vec<Complex64>> {
    let k = q.bits_per_symbol();
    if bits.len() % k != 0 {
        return Err(Error::invalid(format!(
            "bit count {} is not divisible by bits/symbol {k}",
            bits.len()
        )));
    }
    Ok(bits
        .chunks_exact(k)
        .map(|word| {
            let idx = word.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize);
            q.point(idx)
        })
        .collect())
}

/// Nearest-neighbour slice of a complex value onto the constellation.
///
/// Ties break toward the lowest point index, so decisions are deterministic.
pub fn qam_slice(z: Complex64, q: &QamConstellation) -> Result<(usize, Vec<u8>)> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::invalid("qam_slice: non-finite input"));
    }
    let idx = qam_slice_index(z, q);
    Ok((idx, q.label_bits(idx)))
}

/// Slice without materializing the bit word; hot path for the detectors.
#[inline]
pub fn qam_slice_index(z: Complex64, q: &QamConstellation) -> usize {
    let mut best = 0usize;
    let mut best_d = f64::INFINITY;
    for (i, p) in q.points().iter().enumerate() {
        let d = (z - p).norm_sqr();
        if d < best_d {
            best_d = d;
            best = i;
        }
    }
    best
}

// ---------------------------------------------------------------------------
// OFDM
// ---------------------------------------------------------------------------

/// OFDM symbol geometry: FFT size, occupied data bins in spectral order,
/// and cyclic-prefix length. Holds prepared FFT plans, so clone freely and
/// build once per configuration.
#[derive(Clone)]
pub struct OfdmGrid {
    fft_size: usize,
    data_indices: Vec<usize>,
    cp_len: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for OfdmGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OfdmGrid")
            .field("fft_size", &self.fft_size)
            .field("data_subcarriers", &self.data_indices.len())
            .field("cp_len", &self.cp_len)
            .finish()
    }
}

impl OfdmGrid {
    /// Custom grid. `data_indices` are FFT bin numbers listed in the order
    /// data slots are filled; they must be distinct, in range, and must not
    /// include the DC bin.
    pub fn new(fft_size: usize, data_indices: Vec<usize>, cp_len: usize) -> Result<Self> {
        if fft_size == 0 || !fft_size.is_power_of_two() {
            return Err(Error::invalid("fft_size must be a power of two"));
        }
        if cp_len >= fft_size {
            return Err(Error::invalid("cp_len must be shorter than the FFT"));
        }
        if data_indices.is_empty() {
            return Err(Error::invalid("data_indices must be nonempty"));
        }
        let mut seen = vec![false; fft_size];
        for &idx in &data_indices {
            if idx == 0 {
                return Err(Error::invalid("DC bin cannot carry data"));
            }
            if idx >= fft_size {
                return Err(Error::invalid(format!("bin {idx} out of range")));
            }
            if seen[idx] {
                return Err(Error::invalid(format!("bin {idx} listed twice")));
            }
            seen[idx] = true;
        }
        let mut planner = FftPlanner::new();
        Ok(Self {
            fft_size,
            cp_len,
            forward: planner.plan_fft_forward(fft_size),
            inverse: planner.plan_fft_inverse(fft_size),
            data_indices,
        })
    }

    /// The 64-point grid with 52 data subcarriers (bins +/-1..+/-26), DC and
    /// guard bins null, 16-sample cyclic prefix. Data slots are ordered by
    /// ascending frequency: bins 38..63 (negative frequencies) then 1..26.
    pub fn ieee80211a() -> Self {
        let data: Vec<usize> = (38..=63).chain(1..=26).collect();
        Self::new(64, data, 16).expect("static grid is valid")
    }

    pub fn fft_size(&self) -> usize {
        self.fft_size
    }

    pub fn cp_len(&self) -> usize {
        self.cp_len
    }

    /// Samples per OFDM symbol including the cyclic prefix.
    pub fn symbol_len(&self) -> usize {
        self.fft_size + self.cp_len
    }

    pub fn data_indices(&self) -> &[usize] {
        &self.data_indices
    }

    pub fn data_subcarriers(&self) -> usize {
        self.data_indices.len()
    }

    /// Scatter data-slot values onto the full FFT grid (zeros elsewhere).
    pub fn place(&self, spectrum: &[Complex64]) -> Result<Vec<Complex64>> {
        if spectrum.len() != self.data_indices.len() {
            return Err(Error::invalid(format!(
                "expected {} data values, got {}",
                self.data_indices.len(),
                spectrum.len()
            )));
        }
        let mut grid = vec![C_ZERO; self.fft_size];
        for (&bin, &v) in self.data_indices.iter().zip(spectrum) {
            grid[bin] = v;
        }
        Ok(grid)
    }

    /// Gather data-slot values from a full FFT grid.
    pub fn extract(&self, grid: &[Complex64]) -> Vec<Complex64> {
        self.data_indices.iter().map(|&bin| grid[bin]).collect()
    }

    /// Unitary forward DFT of one FFT-sized block.
    pub fn dft_forward(&self, block: &mut [Complex64]) {
        self.forward.process(block);
        let s = 1.0 / (self.fft_size as f64).sqrt();
        for v in block.iter_mut() {
            *v *= s;
        }
    }

    /// Unitary inverse DFT of one FFT-sized block.
    pub fn dft_inverse(&self, block: &mut [Complex64]) {
        self.inverse.process(block);
        let s = 1.0 / (self.fft_size as f64).sqrt();
        for v in block.iter_mut() {
            *v *= s;
        }
    }
}

/// Build one OFDM symbol: place the data values, inverse unitary DFT, and
/// prepend the cyclic prefix. Returns `fft_size + cp_len` time samples.
pub fn ofdm_modulate(spectrum: &[Complex64], grid: &OfdmGrid) -> Result<Vec<Complex64>> {
    let mut block = grid.place(spectrum)?;
    grid.dft_inverse(&mut block);
    let mut out = Vec::with_capacity(grid.symbol_len());
    out.extend_from_slice(&block[grid.fft_size() - grid.cp_len()..]);
    out.extend_from_slice(&block);
    Ok(out)
}

/// Invert [`ofdm_modulate`]: strip the cyclic prefix, forward unitary DFT,
/// and gather the data subcarriers.
pub fn ofdm_demodulate(samples: &[Complex64], grid: &OfdmGrid) -> Result<Vec<Complex64>> {
    if samples.len() != grid.symbol_len() {
        return Err(Error::invalid(format!(
            "expected {} samples, got {}",
            grid.symbol_len(),
            samples.len()
        )));
    }
    let mut block = samples[grid.cp_len()..].to_vec();
    grid.dft_forward(&mut block);
    Ok(grid.extract(&block))
}
