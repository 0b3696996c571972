//! Complex scalar/vector/2x2-matrix arithmetic, Hermitian eigendecomposition,
//! unitary DFT, water-filling, and deterministic random-stream derivation.
//!
//! Everything here is a pure function of its inputs. Generator handles are
//! single-owner; concurrency is obtained by deriving distinct substreams,
//! never by sharing a handle.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rustfft::FftPlanner;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub use num_complex::Complex64;

/// Shorthand for a zero complex value.
pub const C_ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Shorthand for complex one.
pub const C_ONE: Complex64 = Complex64::new(1.0, 0.0);

// ---------------------------------------------------------------------------
// 2x2 complex matrices
// ---------------------------------------------------------------------------

/// Dense 2x2 complex matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Matrix2 {
    m: [[Complex64; 2]; 2],
}

impl Matrix2 {
    pub fn new(m: [[Complex64; 2]; 2]) -> Self {
        Self { m }
    }

    pub fn from_rows(r0: [Complex64; 2], r1: [Complex64; 2]) -> Self {
        Self { m: [r0, r1] }
    }

    pub fn zero() -> Self {
        Self { m: [[C_ZERO; 2]; 2] }
    }

    pub fn identity() -> Self {
        Self::from_rows([C_ONE, C_ZERO], [C_ZERO, C_ONE])
    }

    pub fn diag(a: Complex64, b: Complex64) -> Self {
        Self::from_rows([a, C_ZERO], [C_ZERO, b])
    }

    #[inline]
    pub fn at(&self, row: usize, col: usize) -> Complex64 {
        self.m[row][col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, v: Complex64) {
        self.m[row][col] = v;
    }

    /// Row as a 2-vector.
    #[inline]
    pub fn row(&self, i: usize) -> [Complex64; 2] {
        self.m[i]
    }

    /// Column as a 2-vector.
    #[inline]
    pub fn col(&self, j: usize) -> [Complex64; 2] {
        [self.m[0][j], self.m[1][j]]
    }

    pub fn mul(&self, rhs: &Matrix2) -> Matrix2 {
        let mut out = Matrix2::zero();
        for i in 0..2 {
            for j in 0..2 {
                out.m[i][j] =
                    self.m[i][0] * rhs.m[0][j] + self.m[i][1] * rhs.m[1][j];
            }
        }
        out
    }

    /// Matrix-vector product.
    pub fn mul_vec(&self, v: [Complex64; 2]) -> [Complex64; 2] {
        [
            self.m[0][0] * v[0] + self.m[0][1] * v[1],
            self.m[1][0] * v[0] + self.m[1][1] * v[1],
        ]
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Matrix2 {
        Matrix2::from_rows(
            [self.m[0][0].conj(), self.m[1][0].conj()],
            [self.m[0][1].conj(), self.m[1][1].conj()],
        )
    }

    pub fn sub(&self, rhs: &Matrix2) -> Matrix2 {
        let mut out = *self;
        for i in 0..2 {
            for j in 0..2 {
                out.m[i][j] -= rhs.m[i][j];
            }
        }
        out
    }

    pub fn scale(&self, s: Complex64) -> Matrix2 {
        let mut out = *self;
        for i in 0..2 {
            for j in 0..2 {
                out.m[i][j] *= s;
            }
        }
        out
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.m
            .iter()
            .flatten()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// Squared Frobenius norm.
    pub fn frobenius_sq(&self) -> f64 {
        self.m.iter().flatten().map(|z| z.norm_sqr()).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.m
            .iter()
            .flatten()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Hermitian within `tol`: entry(i,j) = conj(entry(j,i)).
    pub fn is_hermitian(&self, tol: f64) -> bool {
        (self.m[0][0].im).abs() <= tol
            && (self.m[1][1].im).abs() <= tol
            && (self.m[0][1] - self.m[1][0].conj()).norm() <= tol
    }
}

// ---------------------------------------------------------------------------
// Hermitian eigendecomposition
// ---------------------------------------------------------------------------

/// Eigendecomposition of a Hermitian 2x2 matrix: `input = U diag(values) U^H`.
///
/// Eigenvalues are sorted descending; the columns of `vectors` are the
/// matching unit-norm eigenvectors with the phase convention that the first
/// nonzero component of each column is real and nonnegative.
#[derive(Debug, Clone, Copy)]
pub struct EigenPair2 {
    pub values: [f64; 2],
    pub vectors: Matrix2,
}

impl EigenPair2 {
    /// Rebuild `U diag(values) U^H`; used by reconstruction checks.
    pub fn reconstruct(&self) -> Matrix2 {
        let d = Matrix2::diag(
            Complex64::new(self.values[0], 0.0),
            Complex64::new(self.values[1], 0.0),
        );
        self.vectors.mul(&d).mul(&self.vectors.adjoint())
    }
}

const HERMITIAN_TOL: f64 = 1e-12;

/// Closed-form eigendecomposition of a Hermitian 2x2 matrix.
///
/// Errors with `ContractViolation` when the input is not Hermitian within
/// 1e-12 and `InvalidInput` on non-finite entries.
pub fn eig_hermitian_2x2(m: &Matrix2) -> Result<EigenPair2> {
    if !m.is_finite() {
        return Err(Error::invalid("eig_hermitian_2x2: non-finite entries"));
    }
    // Scale-relative Hermitian check so large-magnitude matrices are not
    // rejected for representation-level rounding.
    let scale = m.max_abs().max(1.0);
    if !m.is_hermitian(HERMITIAN_TOL * scale) {
        return Err(Error::contract(
            "eig_hermitian_2x2: input is not Hermitian within 1e-12",
        ));
    }

    let a = m.at(0, 0).re;
    let d = m.at(1, 1).re;
    let b = m.at(0, 1);

    if b.norm() <= HERMITIAN_TOL * scale {
        // Already diagonal; order the axes by eigenvalue.
        let (vals, vecs) = if a >= d {
            ([a, d], Matrix2::identity())
        } else {
            (
                [d, a],
                Matrix2::from_rows([C_ZERO, C_ONE], [C_ONE, C_ZERO]),
            )
        };
        return Ok(EigenPair2 {
            values: vals,
            vectors: vecs,
        });
    }

    let half_tr = 0.5 * (a + d);
    let half_gap = 0.5 * (a - d);
    let radius = (half_gap * half_gap + b.norm_sqr()).sqrt();
    let l1 = half_tr + radius;
    let l2 = half_tr - radius;

    // (m - l I) annihilates both (b, l - a) and (l - d, b*); pick the better
    // conditioned candidate for the dominant eigenvector.
    let u1 = if (l1 - d).abs() >= (l1 - a).abs() {
        [Complex64::new(l1 - d, 0.0), b.conj()]
    } else {
        [b, Complex64::new(l1 - a, 0.0)]
    };
    let u1 = normalize2(u1);
    // The orthogonal complement in C^2.
    let u2 = normalize2([-u1[1].conj(), u1[0].conj()]);

    let u1 = fix_phase(u1);
    let u2 = fix_phase(u2);

    Ok(EigenPair2 {
        values: [l1, l2],
        vectors: Matrix2::from_rows([u1[0], u2[0]], [u1[1], u2[1]]),
    })
}

fn normalize2(v: [Complex64; 2]) -> [Complex64; 2] {
    let n = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
    [v[0] / n, v[1] / n]
}

/// Rotate a unit vector so its first component above the noise floor is
/// real and nonnegative, making downstream matrices deterministic.
fn fix_phase(v: [Complex64; 2]) -> [Complex64; 2] {
    let pivot = if v[0].norm() > 1e-14 { v[0] } else { v[1] };
    let phase = pivot.conj() / pivot.norm();
    [v[0] * phase, v[1] * phase]
}

// ---------------------------------------------------------------------------
// Unitary DFT
// ---------------------------------------------------------------------------

/// Unitary DFT of a power-of-two-length sequence (scale 1/sqrt(L) in both
/// directions, so `dft(dft(x, false), true) == x`).
pub fn dft(x: &[Complex64], inverse: bool) -> Result<Vec<Complex64>> {
    let n = x.len();
    if n == 0 || !n.is_power_of_two() {
        return Err(Error::invalid(format!(
            "dft: length {n} is not a power of two"
        )));
    }
    let mut buf = x.to_vec();
    let mut planner = FftPlanner::new();
    let fft = if inverse {
        planner.plan_fft_inverse(n)
    } else {
        planner.plan_fft_forward(n)
    };
    fft.process(&mut buf);
    let scale = 1.0 / (n as f64).sqrt();
    for v in &mut buf {
        *v *= scale;
    }
    Ok(buf)
}

// ---------------------------------------------------------------------------
// Water-filling
// ---------------------------------------------------------------------------

/// Two-beam water-filling: `delta_k = max(0, mu - noise/lambda_k)` with `mu`
/// chosen so the loads sum to `total_power` exactly.
///
/// `eigenvalues` must be sorted descending; the returned loads match that
/// order. A zero second eigenvalue shuts the weak beam off.
pub fn water_fill(
    eigenvalues: [f64; 2],
    total_power: f64,
    noise_power: f64,
) -> Result<[f64; 2]> {
    let [l1, l2] = eigenvalues;
    if !(total_power.is_finite() && total_power > 0.0) {
        return Err(Error::invalid("water_fill: total_power must be positive"));
    }
    if !(noise_power.is_finite() && noise_power >= 0.0) {
        return Err(Error::invalid(
            "water_fill: noise_power must be finite and nonnegative",
        ));
    }
    if !(l1.is_finite() && l2.is_finite()) || l1 <= 0.0 || l2 < 0.0 || l2 > l1 {
        return Err(Error::invalid(
            "water_fill: eigenvalues must be finite, descending, with lambda_1 > 0",
        ));
    }

    if l2 > 0.0 {
        let mu = 0.5 * (total_power + noise_power / l1 + noise_power / l2);
        let d2 = mu - noise_power / l2;
        if d2 > 0.0 {
            // Both beams active; force the budget to hold bit-exactly.
            return Ok([total_power - d2, d2]);
        }
    }
    Ok([total_power, 0.0])
}

// ---------------------------------------------------------------------------
// Deterministic random streams
// ---------------------------------------------------------------------------

/// One element of a substream path.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum PathLabel {
    Text(String),
    Index(u64),
}

impl From<&str> for PathLabel {
    fn from(s: &str) -> Self {
        PathLabel::Text(s.to_owned())
    }
}

impl From<u64> for PathLabel {
    fn from(i: u64) -> Self {
        PathLabel::Index(i)
    }
}

/// Root seed plus an ordered label path identifying a random substream.
///
/// Distinct paths from the same root give statistically independent streams;
/// an identical `(root, path)` always reproduces the same sample sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StreamSeed {
    root: u64,
    path: Vec<PathLabel>,
}

impl StreamSeed {
    pub fn new(root: u64) -> Self {
        Self {
            root,
            path: Vec::new(),
        }
    }

    /// Extend the path with one more label.
    pub fn child(&self, label: impl Into<PathLabel>) -> Self {
        let mut path = self.path.clone();
        path.push(label.into());
        Self {
            root: self.root,
            path,
        }
    }

    pub fn root(&self) -> u64 {
        self.root
    }

    /// Hash `(root, path)` into a generator seed. The encoding tags each
    /// label with its kind and length, so distinct paths cannot collide by
    /// concatenation.
    fn seed_bytes(&self) -> [u8; 32] {
        let mut h = Sha256::new();
        h.update(b"rrbeam.stream.v1");
        h.update(self.root.to_le_bytes());
        for label in &self.path {
            match label {
                PathLabel::Text(s) => {
                    h.update([0x01]);
                    h.update((s.len() as u64).to_le_bytes());
                    h.update(s.as_bytes());
                }
                PathLabel::Index(i) => {
                    h.update([0x02]);
                    h.update(i.to_le_bytes());
                }
            }
        }
        h.finalize().into()
    }
}

/// Counter-based generator handle produced by [`derive_stream`].
pub type Stream = ChaCha12Rng;

/// Materialize the generator for a substream.
pub fn derive_stream(seed: &StreamSeed) -> Stream {
    ChaCha12Rng::from_seed(seed.seed_bytes())
}

/// Uniform in `[0, 1)`.
#[inline]
pub fn uniform_f64(rng: &mut impl RngCore) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / 9_007_199_254_740_992.0)
}

/// Standard real Gaussian via Box-Muller. Consumes exactly two words of the
/// stream per pair, which keeps word-addressed substreams reproducible.
#[inline]
pub fn gaussian_pair(rng: &mut impl RngCore) -> (f64, f64) {
    // Map onto (0, 1] so the log is finite.
    let u1 = ((rng.next_u64() >> 11) + 1) as f64 * (1.0 / 9_007_199_254_740_992.0);
    let u2 = (rng.next_u64() >> 11) as f64 * (1.0 / 9_007_199_254_740_992.0);
    let r = (-2.0 * u1.ln()).sqrt();
    let (s, c) = (std::f64::consts::TAU * u2).sin_cos();
    (r * c, r * s)
}

/// Circularly symmetric complex Gaussian with unit total variance
/// (`E|z|^2 = 1`, i.e. each component is N(0, 1/2)).
#[inline]
pub fn complex_gaussian(rng: &mut impl RngCore) -> Complex64 {
    let (re, im) = gaussian_pair(rng);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}
