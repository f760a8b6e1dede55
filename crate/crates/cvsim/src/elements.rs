//! Optical building blocks expressed as symplectic operations and ensemble
//! processes: beam splitters, phase shifts, squeezers, EPR sources and the
//! measurement-and-feedforward off-line squeezer.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::gaussian::{GaussianState, LinearProcess, SymplecticOp};

/// Two-mode EPR resource parameters: half the variances of the correlated
/// combinations, Var(x_A - x_B) = 2 v_sq_x and Var(p_A + p_B) = 2 v_sq_p.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct EprParams {
    pub v_sq_x: f64,
    pub v_sq_p: f64,
}

impl EprParams {
    /// Symmetric correlations, v_sq = e^(-2r).
    pub fn symmetric(v_sq: f64) -> Self {
        Self {
            v_sq_x: v_sq,
            v_sq_p: v_sq,
        }
    }
}

/// Beam splitter with transmittance T:
/// x1' = sqrt(T) x1 + sqrt(1-T) x2, x2' = -sqrt(1-T) x1 + sqrt(T) x2,
/// identical action on p. The reflection sign sits on the first input of the
/// second output row; cluster-network coefficients depend on this choice.
pub fn beamsplitter(t: f64) -> Result<SymplecticOp> {
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "beam splitter transmittance must be in (0,1), got {t}"
        )));
    }
    let (ct, st) = (t.sqrt(), (1.0 - t).sqrt());
    let s = DMatrix::from_row_slice(
        4,
        4,
        &[
            ct, 0.0, st, 0.0, //
            0.0, ct, 0.0, st, //
            -st, 0.0, ct, 0.0, //
            0.0, -st, 0.0, ct,
        ],
    );
    SymplecticOp::new(s, DVector::zeros(4))
}

/// Phase-space rotation by theta: x' = cos t x - sin t p, p' = sin t x + cos t p.
pub fn phase(theta: f64) -> SymplecticOp {
    let (s, c) = theta.sin_cos();
    SymplecticOp::new(
        DMatrix::from_row_slice(2, 2, &[c, -s, s, c]),
        DVector::zeros(2),
    )
    .expect("rotations are symplectic")
}

/// Fourier transform: -90 degree rotation, (x, p) -> (p, -x).
pub fn fourier() -> SymplecticOp {
    phase(-std::f64::consts::FRAC_PI_2)
}

/// Single-mode squeezer diag(e^-r, e^r).
pub fn squeezer(r: f64) -> SymplecticOp {
    SymplecticOp::new(
        DMatrix::from_diagonal(&DVector::from_vec(vec![(-r).exp(), r.exp()])),
        DVector::zeros(2),
    )
    .expect("diag(e^-r, e^r) is symplectic")
}

/// Pure displacement by (dx, dp).
pub fn displace(dx: f64, dp: f64) -> SymplecticOp {
    SymplecticOp::new(DMatrix::identity(2, 2), DVector::from_vec(vec![dx, dp]))
        .expect("identity is symplectic")
}

/// Two-mode EPR state built from an x-squeezed and a p-squeezed vacuum on a
/// half beam splitter. The squeezers are pure (v_anti = 1/v_sq).
pub fn epr_source(p: EprParams) -> Result<GaussianState> {
    if !(p.v_sq_x > 0.0) || !(p.v_sq_p > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "EPR squeezed variances must be positive, got ({}, {})",
            p.v_sq_x, p.v_sq_p
        )));
    }
    let m1 = GaussianState::squeezed_vacuum(p.v_sq_x, 1.0 / p.v_sq_x, 0.0)?;
    let m2 = GaussianState::squeezed_vacuum(p.v_sq_p, 1.0 / p.v_sq_p, std::f64::consts::FRAC_PI_2)?;
    m1.tensor(&m2).apply(&beamsplitter(0.5)?, &[0, 1])
}

/// Off-line squeezing gate as an ensemble process over (input, ancilla):
/// x_out = sqrt(T) x_in + sqrt(1-T) x_anc, p_out = p_in / sqrt(T),
/// realized by a tap beam splitter, homodyne of the tapped port and
/// feedforward with gain -sqrt(1-T)/sqrt(T). With an ideal x-squeezed
/// ancilla this approaches squeezer(-ln sqrt(T)).
///
/// The returned process consumes two input modes ordered (input, ancilla);
/// use [`apply_with_ancilla`] to fold a concrete ancilla state in.
pub fn offline_squeezer(t: f64) -> Result<LinearProcess> {
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "off-line squeezer transmittance must be in (0,1), got {t}"
        )));
    }
    let (ct, st) = (t.sqrt(), (1.0 - t).sqrt());
    let m = DMatrix::from_row_slice(
        2,
        4,
        &[
            ct, 0.0, st, 0.0, //
            0.0, 1.0 / ct, 0.0, 0.0,
        ],
    );
    LinearProcess::new(m, DVector::zeros(2))
}

/// Apply a process whose trailing input modes are ancillas: the input state is
/// tensored with the ancillas before the map runs.
pub fn apply_with_ancillas(
    process: &LinearProcess,
    input: &GaussianState,
    ancillas: &[&GaussianState],
) -> Result<GaussianState> {
    let mut joint = input.clone();
    for a in ancillas {
        joint = joint.tensor(a);
    }
    process.apply(&joint)
}

/// The feedforward gain that nulls the ancilla's anti-squeezed quadrature
/// from the off-line squeezer output.
pub fn offline_squeezer_ff_gain(t: f64) -> f64 {
    -((1.0 - t) / t).sqrt()
}
