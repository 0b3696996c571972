//! Channel-correlation eigen-analysis, water-filled power loading, and
//! assembly of beamformed transmit blocks for both the rate-2 transceiver
//! and the Alamouti baseline.
//!
//! The channel convention throughout is `y = H x`: entry `(r, t)` of the
//! channel matrix is the gain from transmit antenna `t` into receive
//! antenna `r`. Transmit directions therefore live in the row space, and
//! the transmit-side correlation is `H^H H`.

use crate::error::{Error, Result};
use crate::numerics::{
    eig_hermitian_2x2, water_fill, Complex64, Matrix2,
};

/// Eigen-directions of a channel realization with their water-filled power
/// loads. One value serves every subcarrier of a frame because the fading
/// is flat; both epochs of a block reuse the same directions and loads.
#[derive(Debug, Clone)]
pub struct EigenBeams {
    /// Unitary matrix whose columns are the beam directions (strongest
    /// first).
    pub basis: Matrix2,
    /// Power loads matching the column order; they sum to the beam budget.
    pub loads: [f64; 2],
    /// The correlation matrix the beams were derived from.
    pub source_correlation: Matrix2,
}

impl EigenBeams {
    /// Strongest beam direction.
    pub fn u_a(&self) -> [Complex64; 2] {
        self.basis.col(0)
    }

    /// Weaker beam direction.
    pub fn u_b(&self) -> [Complex64; 2] {
        self.basis.col(1)
    }

    /// `diag(sqrt(load_1), sqrt(load_2))`.
    pub fn load_sqrt(&self) -> Matrix2 {
        Matrix2::diag(
            Complex64::new(self.loads[0].sqrt(), 0.0),
            Complex64::new(self.loads[1].sqrt(), 0.0),
        )
    }
}

/// Transmit-side correlation of a channel realization: `H^H H`.
pub fn transmit_correlation(h: &Matrix2) -> Matrix2 {
    h.adjoint().mul(h)
}

/// Eigendecompose a correlation matrix and water-fill the beam budget over
/// its eigenvalues.
///
/// Fails with `DegenerateChannel` when the correlation carries no energy
/// (no beam direction is defined).
pub fn eigen_beams(r: &Matrix2, power: f64, noise: f64) -> Result<EigenBeams> {
    let eig = eig_hermitian_2x2(r)?;
    if eig.values[0] <= 1e-300 {
        return Err(Error::degenerate(
            "correlation matrix has no positive eigenvalue",
        ));
    }
    // PSD inputs can round to a slightly negative weak eigenvalue.
    let l2 = eig.values[1].max(0.0);
    let loads = water_fill([eig.values[0], l2], power, noise)?;
    Ok(EigenBeams {
        basis: eig.vectors,
        loads,
        source_correlation: *r,
    })
}

/// Beamform one 2x2 code block: `B = C * diag(sqrt(loads)) * U^H`.
///
/// Rows of `code_block` are channel uses, columns are the code's two
/// spatial ports; rows of the result are channel uses, columns are
/// transmit antennas.
fn beamform_block(code_block: &Matrix2, beams: &EigenBeams) -> Matrix2 {
    code_block
        .mul(&beams.load_sqrt())
        .mul(&beams.basis.adjoint())
}

/// Beamform a precoded rate-2 block
/// `[[c1, c2], [-conj(c2), conj(c1)]]`.
pub fn beamform_rr(precoded_block: &Matrix2, beams: &EigenBeams) -> Matrix2 {
    beamform_block(precoded_block, beams)
}

/// Beamform an Alamouti block `[[x1, x2], [-conj(x2), conj(x1)]]`.
pub fn beamform_alamouti(alamouti_block: &Matrix2, beams: &EigenBeams) -> Matrix2 {
    beamform_block(alamouti_block, beams)
}
