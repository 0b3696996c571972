//! Space-time block encoders: the rotated rate-2 code (four symbols per
//! two channel uses) and the classic Alamouti code, plus framing of symbol
//! streams into per-antenna code-symbol streams.

use crate::error::{Error, Result};
use crate::numerics::{Complex64, Matrix2};

/// One rate-2 code block: four constellation points and the rotation pair
/// `(phi1, phi2 = pi/2 - phi1)`.
#[derive(Debug, Clone, Copy)]
pub struct Rate2Block {
    pub symbols: [Complex64; 4],
    pub phi1: f64,
}

impl Rate2Block {
    pub fn new(symbols: [Complex64; 4], phi1: f64) -> Result<Self> {
        if !(phi1 > 0.0 && phi1 < std::f64::consts::FRAC_PI_2) {
            return Err(Error::invalid(format!(
                "phi1 = {phi1} outside (0, pi/2)"
            )));
        }
        Ok(Self { symbols, phi1 })
    }

    pub fn phi2(&self) -> f64 {
        std::f64::consts::FRAC_PI_2 - self.phi1
    }

    /// Rotated super-symbols carried by the block's first code row.
    pub fn super_symbols(&self) -> SuperSymbolPair {
        let [x1, x2, x3, x4] = self.symbols;
        SuperSymbolPair {
            c1: rotate_pair(x1, x2, self.phi1),
            c2: rotate_pair(x3, x4, self.phi2()),
        }
    }
}

/// `x_odd * sin(phi) - conj(x_even) * cos(phi)` -- the rotation that fuses
/// a symbol pair into one super-symbol.
#[inline]
pub fn rotate_pair(x_odd: Complex64, x_even: Complex64, phi: f64) -> Complex64 {
    let (s, c) = phi.sin_cos();
    x_odd * s - x_even.conj() * c
}

/// The two super-symbols of a rate-2 block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuperSymbolPair {
    pub c1: Complex64,
    pub c2: Complex64,
}

/// Per-antenna code-symbol streams of length `2N` produced by framing `4N`
/// information symbols.
#[derive(Debug, Clone, PartialEq)]
pub struct AntennaStreams {
    pub s1: Vec<Complex64>,
    pub s2: Vec<Complex64>,
}

impl AntennaStreams {
    pub fn len(&self) -> usize {
        self.s1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s1.is_empty()
    }
}

/// Encode one rate-2 block into its 2x2 code matrix.
///
/// Rows are channel uses (epochs), columns are transmit antennas:
///
/// ```text
/// [  C1   C2  ]        C1 = x1 sin(phi1) - conj(x2) cos(phi1)
/// [ -C2*  C1* ]        C2 = x3 sin(phi2) - conj(x4) cos(phi2)
/// ```
pub fn encode_rate2(block: &Rate2Block) -> Matrix2 {
    let SuperSymbolPair { c1, c2 } = block.super_symbols();
    Matrix2::from_rows([c1, c2], [-c2.conj(), c1.conj()])
}

/// Encode an Alamouti block (two symbols over two channel uses):
///
/// ```text
/// [  x1   x2  ]
/// [ -x2*  x1* ]
/// ```
pub fn encode_alamouti(x1: Complex64, x2: Complex64) -> Matrix2 {
    Matrix2::from_rows([x1, x2], [-x2.conj(), x1.conj()])
}

/// Split `4N` information symbols into consecutive rate-2 blocks and lay
/// the code matrices out as two antenna streams.
///
/// The streams are the column-major concatenation of each block's code
/// matrix: block `b` contributes `(C1_b, -conj(C2_b))` to stream 1 and
/// `(C2_b, conj(C1_b))` to stream 2, occupying stream slots `2b` and
/// `2b + 1`.
pub fn frame_blocks(
    symbols: &[Complex64],
    phi1: f64,
) -> Result<(Vec<Rate2Block>, AntennaStreams)> {
    if symbols.len() % 4 != 0 {
        return Err(Error::invalid(format!(
            "symbol count {} is not divisible by 4",
            symbols.len()
        )));
    }
    let n_blocks = symbols.len() / 4;
    let mut blocks = Vec::with_capacity(n_blocks);
    let mut s1 = Vec::with_capacity(2 * n_blocks);
    let mut s2 = Vec::with_capacity(2 * n_blocks);
    for chunk in symbols.chunks_exact(4) {
        let block = Rate2Block::new([chunk[0], chunk[1], chunk[2], chunk[3]], phi1)?;
        let code = encode_rate2(&block);
        s1.push(code.at(0, 0));
        s1.push(code.at(1, 0));
        s2.push(code.at(0, 1));
        s2.push(code.at(1, 1));
        blocks.push(block);
    }
    Ok((blocks, AntennaStreams { s1, s2 }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{complex_gaussian, derive_stream, StreamSeed, C_ZERO};
    use crate::DEFAULT_PHI1;

    fn assert_c_close(a: Complex64, b: Complex64, tol: f64) {
        assert!((a - b).norm() <= tol, "expected {b}, got {a}");
    }

    #[test]
    fn single_symbol_isolation_x1() {
        let phi = DEFAULT_PHI1;
        let x1 = Complex64::new(0.3, -0.7);
        let block = Rate2Block::new([x1, C_ZERO, C_ZERO, C_ZERO], phi).unwrap();
        let c = encode_rate2(&block);
        let s = phi.sin();
        assert_c_close(c.at(0, 0), x1 * s, 1e-15);
        assert_c_close(c.at(0, 1), C_ZERO, 1e-15);
        assert_c_close(c.at(1, 0), C_ZERO, 1e-15);
        assert_c_close(c.at(1, 1), x1.conj() * s, 1e-15);
    }

    #[test]
    fn single_symbol_isolation_x2() {
        let phi = DEFAULT_PHI1;
        let x2 = Complex64::new(-0.4, 0.9);
        let block = Rate2Block::new([C_ZERO, x2, C_ZERO, C_ZERO], phi).unwrap();
        let c = encode_rate2(&block);
        let cs = phi.cos();
        assert_c_close(c.at(0, 0), -x2.conj() * cs, 1e-15);
        assert_c_close(c.at(1, 1), -x2 * cs, 1e-15);
        assert_c_close(c.at(0, 1), C_ZERO, 1e-15);
        assert_c_close(c.at(1, 0), C_ZERO, 1e-15);
    }

    #[test]
    fn code_matrix_structure() {
        // Second row is the Alamouti companion of the first: [-C2*, C1*].
        let mut rng = derive_stream(&StreamSeed::new(3).child("stbc"));
        for _ in 0..100 {
            let sym = [
                complex_gaussian(&mut rng),
                complex_gaussian(&mut rng),
                complex_gaussian(&mut rng),
                complex_gaussian(&mut rng),
            ];
            let block = Rate2Block::new(sym, DEFAULT_PHI1).unwrap();
            let c = encode_rate2(&block);
            assert_c_close(c.at(1, 0), -c.at(0, 1).conj(), 1e-15);
            assert_c_close(c.at(1, 1), c.at(0, 0).conj(), 1e-15);
        }
    }

    #[test]
    fn encoder_is_linear_in_each_symbol() {
        let mut rng = derive_stream(&StreamSeed::new(3).child("lin"));
        let phi = DEFAULT_PHI1;
        for _ in 0..100 {
            let a: Vec<Complex64> = (0..4).map(|_| complex_gaussian(&mut rng)).collect();
            let b: Vec<Complex64> = (0..4).map(|_| complex_gaussian(&mut rng)).collect();
            // Superposition holds because conj() distributes over sums.
            let sum: Vec<Complex64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
            let ca = encode_rate2(
                &Rate2Block::new([a[0], a[1], a[2], a[3]], phi).unwrap(),
            );
            let cb = encode_rate2(
                &Rate2Block::new([b[0], b[1], b[2], b[3]], phi).unwrap(),
            );
            let cs = encode_rate2(
                &Rate2Block::new([sum[0], sum[1], sum[2], sum[3]], phi).unwrap(),
            );
            for i in 0..2 {
                for j in 0..2 {
                    assert_c_close(cs.at(i, j), ca.at(i, j) + cb.at(i, j), 1e-14);
                }
            }
        }
    }

    #[test]
    fn phi_out_of_range_rejected() {
        assert!(Rate2Block::new([C_ZERO; 4], 0.0).is_err());
        assert!(Rate2Block::new([C_ZERO; 4], std::f64::consts::FRAC_PI_2).is_err());
    }

    #[test]
    fn alamouti_structure() {
        let one = Complex64::new(1.0, 0.0);
        let c = encode_alamouti(one, C_ZERO);
        assert_eq!(c, Matrix2::identity());
        let c = encode_alamouti(C_ZERO, one);
        assert_c_close(c.at(0, 0), C_ZERO, 0.0);
        assert_c_close(c.at(0, 1), one, 0.0);
        assert_c_close(c.at(1, 0), -one, 0.0);
        assert_c_close(c.at(1, 1), C_ZERO, 0.0);
    }

    #[test]
    fn alamouti_orthogonality() {
        let mut rng = derive_stream(&StreamSeed::new(3).child("alam"));
        for _ in 0..100 {
            let x1 = complex_gaussian(&mut rng);
            let x2 = complex_gaussian(&mut rng);
            let x = encode_alamouti(x1, x2);
            let gram = x.adjoint().mul(&x);
            let e = x1.norm_sqr() + x2.norm_sqr();
            assert!((gram.at(0, 0).re - e).abs() <= 1e-14);
            assert!((gram.at(1, 1).re - e).abs() <= 1e-14);
            assert!(gram.at(0, 1).norm() <= 1e-14);
            assert!(gram.at(1, 0).norm() <= 1e-14);
        }
    }

    #[test]
    fn framing_counts() {
        let mut rng = derive_stream(&StreamSeed::new(3).child("frame"));
        let four: Vec<Complex64> = (0..4).map(|_| complex_gaussian(&mut rng)).collect();
        let (blocks, streams) = frame_blocks(&four, DEFAULT_PHI1).unwrap();
        assert_eq!(blocks.len(), 1);
        assert_eq!(streams.len(), 2);

        // 104 symbols fill the 52 data slots of the default grid.
        let many: Vec<Complex64> = (0..104).map(|_| complex_gaussian(&mut rng)).collect();
        let (blocks, streams) = frame_blocks(&many, DEFAULT_PHI1).unwrap();
        assert_eq!(blocks.len(), 26);
        assert_eq!(streams.len(), 52);

        let (blocks, streams) = frame_blocks(&[], DEFAULT_PHI1).unwrap();
        assert!(blocks.is_empty());
        assert!(streams.is_empty());
    }

    #[test]
    fn framing_rejects_ragged_input() {
        let syms = vec![C_ZERO; 6];
        assert!(frame_blocks(&syms, DEFAULT_PHI1).is_err());
    }

    #[test]
    fn stream_order_is_column_major() {
        let mut rng = derive_stream(&StreamSeed::new(3).child("order"));
        let syms: Vec<Complex64> = (0..8).map(|_| complex_gaussian(&mut rng)).collect();
        let (blocks, streams) = frame_blocks(&syms, DEFAULT_PHI1).unwrap();
        for (b, block) in blocks.iter().enumerate() {
            let code = encode_rate2(block);
            assert_eq!(streams.s1[2 * b], code.at(0, 0));
            assert_eq!(streams.s1[2 * b + 1], code.at(1, 0));
            assert_eq!(streams.s2[2 * b], code.at(0, 1));
            assert_eq!(streams.s2[2 * b + 1], code.at(1, 1));
        }
    }

    #[test]
    fn rate_is_two_symbols_per_channel_use() {
        // 4 information symbols per block, 2 channel uses per block.
        let syms = vec![C_ZERO; 104];
        let (blocks, streams) = frame_blocks(&syms, DEFAULT_PHI1).unwrap();
        let channel_uses = streams.len(); // one use per stream slot
        assert_eq!(blocks.len() * 4, syms.len());
        assert_eq!(syms.len(), 2 * channel_uses);
    }
}
