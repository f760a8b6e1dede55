//! Gaussian states of n optical modes and the exact primitives acting on them.
//!
//! Quadratures are ordered (x1, p1, x2, p2, ...) and all internal numbers use
//! vacuum quadrature variance 1, so the vacuum covariance is the identity and
//! the uncertainty relation reads cov + i\u{3a9} \u{2ab0} 0 with \u{3a9} built
//! from 2x2 blocks [[0,1],[-1,0]].

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Absolute tolerance for symmetry, symplecticity and physicality checks.
pub const TOL: f64 = 1e-9;

/// Which vacuum variance reported numbers are scaled to.
///
/// Computation is always done with vacuum variance 1; the convention only
/// rescales values on the way out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum UnitsConvention {
    /// sigma_vac = 1
    VacuumUnity,
    /// hbar = 1, sigma_vac = 1/2
    HbarOne,
    /// hbar = 1/2, sigma_vac = 1/4
    HbarHalf,
}

impl UnitsConvention {
    pub fn vacuum_variance(self) -> f64 {
        match self {
            UnitsConvention::VacuumUnity => 1.0,
            UnitsConvention::HbarOne => 0.5,
            UnitsConvention::HbarHalf => 0.25,
        }
    }

    /// Rescale an internal variance for reporting.
    pub fn report_variance(self, v: f64) -> f64 {
        v * self.vacuum_variance()
    }

    /// Rescale an internal mean/amplitude for reporting.
    pub fn report_mean(self, m: f64) -> f64 {
        m * self.vacuum_variance().sqrt()
    }
}

impl Default for UnitsConvention {
    fn default() -> Self {
        UnitsConvention::VacuumUnity
    }
}

/// Variance ratio in decibel relative to a reference level.
pub fn db_relative(v: f64, v_ref: f64) -> f64 {
    10.0 * (v / v_ref).log10()
}

/// Inverse of [`db_relative`] with reference 1 (the vacuum).
pub fn db_to_variance(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// The symplectic form for `n_modes` modes in interleaved ordering.
pub fn omega(n_modes: usize) -> DMatrix<f64> {
    let mut o = DMatrix::zeros(2 * n_modes, 2 * n_modes);
    for k in 0..n_modes {
        o[(2 * k, 2 * k + 1)] = 1.0;
        o[(2 * k + 1, 2 * k)] = -1.0;
    }
    o
}

/// Smallest eigenvalue of the Hermitian matrix cov + i\u{3a9}, computed via the
/// real embedding [[cov, \u{3a9}], [-\u{3a9}, cov]].
pub fn physicality_margin(cov: &DMatrix<f64>) -> f64 {
    let n2 = cov.nrows();
    let om = omega(n2 / 2);
    let mut h = DMatrix::zeros(2 * n2, 2 * n2);
    h.view_mut((0, 0), (n2, n2)).copy_from(cov);
    h.view_mut((n2, n2), (n2, n2)).copy_from(cov);
    // imaginary part B = Omega enters as [[A, -B],[B, A]]; with B antisymmetric
    // the embedding stays symmetric.
    h.view_mut((0, n2), (n2, n2)).copy_from(&(-&om));
    h.view_mut((n2, 0), (n2, n2)).copy_from(&om);
    h.symmetric_eigenvalues().min()
}

fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0f64, |a, v| a.max(v.abs()))
}

/// A Gaussian state: mean vector and covariance matrix over the quadratures.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    mean: DVector<f64>,
    cov: DMatrix<f64>,
}

impl GaussianState {
    /// Build a state from raw moments, enforcing symmetry and physicality.
    pub fn new(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        if mean.len() == 0 || mean.len() % 2 != 0 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                actual: mean.len(),
            });
        }
        if cov.nrows() != mean.len() || cov.ncols() != mean.len() {
            return Err(Error::DimensionMismatch {
                expected: mean.len(),
                actual: cov.nrows(),
            });
        }
        let asym = max_abs(&(&cov - cov.transpose()));
        if asym > TOL {
            return Err(Error::NotSymmetric { max_asym: asym });
        }
        // symmetrize to suppress numerical drift from repeated maps
        let cov = (&cov + cov.transpose()) * 0.5;
        let min_eig = physicality_margin(&cov);
        if min_eig < -TOL {
            return Err(Error::Unphysical { min_eig });
        }
        Ok(Self { mean, cov })
    }

    /// The n-mode vacuum: zero mean, identity covariance.
    pub fn vacuum(n_modes: usize) -> Self {
        assert!(n_modes >= 1, "vacuum needs at least one mode");
        Self {
            mean: DVector::zeros(2 * n_modes),
            cov: DMatrix::identity(2 * n_modes, 2 * n_modes),
        }
    }

    /// A coherent state: vacuum covariance displaced to (x_mean, p_mean).
    pub fn coherent(x_mean: f64, p_mean: f64) -> Self {
        Self {
            mean: DVector::from_vec(vec![x_mean, p_mean]),
            cov: DMatrix::identity(2, 2),
        }
    }

    /// A (possibly impure) squeezed vacuum with variance `v_sq` along the
    /// quadrature at `angle` from x and `v_anti` orthogonal to it.
    ///
    /// Pure iff v_sq * v_anti = 1, in which case v_sq = e^(-2r).
    pub fn squeezed_vacuum(v_sq: f64, v_anti: f64, angle: f64) -> Result<Self> {
        if !(v_sq > 0.0) || !(v_anti > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "squeezed variances must be positive, got ({v_sq}, {v_anti})"
            )));
        }
        if v_sq * v_anti < 1.0 - TOL {
            return Err(Error::Unphysical {
                min_eig: v_sq * v_anti - 1.0,
            });
        }
        let (s, c) = angle.sin_cos();
        let rot = DMatrix::from_row_slice(2, 2, &[c, -s, s, c]);
        let cov = &rot * DMatrix::from_diagonal(&DVector::from_vec(vec![v_sq, v_anti])) * rot.transpose();
        Self::new(DVector::zeros(2), cov)
    }

    pub fn n_modes(&self) -> usize {
        self.mean.len() / 2
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    /// Purity mu = 1/sqrt(det cov), in (0, 1].
    pub fn purity(&self) -> f64 {
        1.0 / self.cov.determinant().sqrt()
    }

    /// Tensor product; mode order is `self` then `other`.
    pub fn tensor(&self, other: &GaussianState) -> GaussianState {
        let n = self.mean.len();
        let m = other.mean.len();
        let mut mean = DVector::zeros(n + m);
        mean.rows_mut(0, n).copy_from(&self.mean);
        mean.rows_mut(n, m).copy_from(&other.mean);
        let mut cov = DMatrix::zeros(n + m, n + m);
        cov.view_mut((0, 0), (n, n)).copy_from(&self.cov);
        cov.view_mut((n, n), (m, m)).copy_from(&other.cov);
        GaussianState { mean, cov }
    }

    /// Apply a symplectic operation to the listed modes (identity elsewhere).
    pub fn apply(&self, op: &SymplecticOp, modes: &[usize]) -> Result<GaussianState> {
        let n = self.n_modes();
        if op.n_modes() != modes.len() {
            return Err(Error::DimensionMismatch {
                expected: op.n_modes(),
                actual: modes.len(),
            });
        }
        for (i, &m) in modes.iter().enumerate() {
            if m >= n {
                return Err(Error::ModeIndex { index: m, n_modes: n });
            }
            if modes[..i].contains(&m) {
                return Err(Error::DuplicateMode { index: m });
            }
        }
        let mut s_full = DMatrix::identity(2 * n, 2 * n);
        let mut d_full = DVector::zeros(2 * n);
        for (a, &ma) in modes.iter().enumerate() {
            d_full[2 * ma] = op.displacement()[2 * a];
            d_full[2 * ma + 1] = op.displacement()[2 * a + 1];
            for (b, &mb) in modes.iter().enumerate() {
                for qa in 0..2 {
                    for qb in 0..2 {
                        s_full[(2 * ma + qa, 2 * mb + qb)] = op.matrix()[(2 * a + qa, 2 * b + qb)];
                    }
                }
            }
        }
        let mean = &s_full * &self.mean + &d_full;
        let cov = &s_full * &self.cov * s_full.transpose();
        GaussianState::new(mean, cov)
    }

    /// Mean and variance of a linear quadrature combination.
    pub fn form_stats(&self, f: &QuadratureForm) -> Result<(f64, f64)> {
        if f.coeffs().len() != self.mean.len() {
            return Err(Error::DimensionMismatch {
                expected: self.mean.len(),
                actual: f.coeffs().len(),
            });
        }
        let mean = f.coeffs().dot(&self.mean) + f.offset();
        let var = (f.coeffs().transpose() * &self.cov * f.coeffs())[(0, 0)];
        Ok((mean, var))
    }

    /// Condition on an ideal homodyne measurement of the quadrature at `angle`
    /// on `mode` giving `outcome`; the measured mode is removed.
    pub fn homodyne_project(&self, mode: usize, angle: f64, outcome: f64) -> Result<GaussianState> {
        let n = self.n_modes();
        if mode >= n {
            return Err(Error::ModeIndex { index: mode, n_modes: n });
        }
        let mut c = DVector::zeros(2 * n);
        c[2 * mode] = angle.cos();
        c[2 * mode + 1] = angle.sin();
        let var = (c.transpose() * &self.cov * &c)[(0, 0)];
        if var <= 1e-12 {
            return Err(Error::DegenerateMeasurement { variance: var });
        }
        let vc = &self.cov * &c;
        let m_mean = c.dot(&self.mean);
        let mean = &self.mean + &vc * ((outcome - m_mean) / var);
        let cov = &self.cov - (&vc * vc.transpose()) / var;
        // drop the measured mode
        let keep: Vec<usize> = (0..2 * n)
            .filter(|&i| i / 2 != mode)
            .collect();
        let mut mean2 = DVector::zeros(2 * n - 2);
        let mut cov2 = DMatrix::zeros(2 * n - 2, 2 * n - 2);
        for (i2, &i) in keep.iter().enumerate() {
            mean2[i2] = mean[i];
            for (j2, &j) in keep.iter().enumerate() {
                cov2[(i2, j2)] = cov[(i, j)];
            }
        }
        GaussianState::new(mean2, cov2)
    }

    /// Wigner function value at a phase-space point.
    pub fn wigner(&self, point: &DVector<f64>) -> Result<f64> {
        if point.len() != self.mean.len() {
            return Err(Error::DimensionMismatch {
                expected: self.mean.len(),
                actual: point.len(),
            });
        }
        let eigs = self.cov.symmetric_eigenvalues();
        let (emin, emax) = (eigs.min(), eigs.max());
        let cond = emax / emin.max(f64::MIN_POSITIVE);
        if !(emin > 0.0) || cond >= 1e12 {
            return Err(Error::SingularCovariance { cond });
        }
        let inv = self
            .cov
            .clone()
            .try_inverse()
            .ok_or(Error::SingularCovariance { cond })?;
        let delta = point - &self.mean;
        let quad = (delta.transpose() * &inv * &delta)[(0, 0)];
        let n = self.n_modes() as f64;
        let det = self.cov.determinant();
        Ok((-0.5 * quad).exp() / ((2.0 * std::f64::consts::PI).powf(n) * det.sqrt()))
    }
}

/// Overlap fidelity F = <psi|rho|psi> between a pure single-mode Gaussian and
/// another single-mode Gaussian, via the closed form
/// F = 2 exp(-1/2 d\u{1d40}(V1+V2)^-1 d) / sqrt(det(V1+V2)).
pub fn fidelity(pure: &GaussianState, other: &GaussianState) -> Result<f64> {
    if pure.n_modes() != 1 {
        return Err(Error::NotSingleMode {
            n_modes: pure.n_modes(),
        });
    }
    if other.n_modes() != 1 {
        return Err(Error::NotSingleMode {
            n_modes: other.n_modes(),
        });
    }
    let purity = pure.purity();
    if purity < 1.0 - TOL {
        return Err(Error::NotPure { purity });
    }
    let vsum = pure.cov() + other.cov();
    let det = vsum.determinant();
    let inv = vsum.try_inverse().ok_or(Error::SingularCovariance { cond: f64::INFINITY })?;
    let delta = other.mean() - pure.mean();
    let quad = (delta.transpose() * &inv * &delta)[(0, 0)];
    Ok((2.0 * (-0.5 * quad).exp() / det.sqrt()).clamp(0.0, 1.0))
}

/// A Gaussian unitary at the quadrature level: x -> S x + d with S symplectic.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticOp {
    s: DMatrix<f64>,
    d: DVector<f64>,
}

impl SymplecticOp {
    pub fn new(s: DMatrix<f64>, d: DVector<f64>) -> Result<Self> {
        if s.nrows() != s.ncols() || s.nrows() % 2 != 0 || s.nrows() == 0 {
            return Err(Error::DimensionMismatch {
                expected: d.len(),
                actual: s.nrows(),
            });
        }
        if d.len() != s.nrows() {
            return Err(Error::DimensionMismatch {
                expected: s.nrows(),
                actual: d.len(),
            });
        }
        let om = omega(s.nrows() / 2);
        let dev = max_abs(&(&s * &om * s.transpose() - &om));
        if dev > TOL {
            return Err(Error::NotSymplectic { max_dev: dev });
        }
        Ok(Self { s, d })
    }

    pub fn identity(n_modes: usize) -> Self {
        Self {
            s: DMatrix::identity(2 * n_modes, 2 * n_modes),
            d: DVector::zeros(2 * n_modes),
        }
    }

    pub fn n_modes(&self) -> usize {
        self.s.nrows() / 2
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.s
    }

    pub fn displacement(&self) -> &DVector<f64> {
        &self.d
    }

    /// Composition: first `self`, then `next`.
    pub fn then(&self, next: &SymplecticOp) -> Result<SymplecticOp> {
        if next.n_modes() != self.n_modes() {
            return Err(Error::DimensionMismatch {
                expected: self.n_modes(),
                actual: next.n_modes(),
            });
        }
        SymplecticOp::new(&next.s * &self.s, &next.s * &self.d + &next.d)
    }
}

/// Which quadrature of a mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Quad {
    X,
    P,
}

impl Quad {
    pub fn offset(self) -> usize {
        match self {
            Quad::X => 0,
            Quad::P => 1,
        }
    }
}

/// A real linear combination of quadratures plus a constant offset.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureForm {
    coeffs: DVector<f64>,
    offset: f64,
}

impl QuadratureForm {
    pub fn new(coeffs: DVector<f64>, offset: f64) -> Result<Self> {
        if coeffs.iter().all(|c| *c == 0.0) {
            return Err(Error::EmptyForm);
        }
        Ok(Self { coeffs, offset })
    }

    /// Build from sparse (mode, quadrature, coefficient) terms.
    pub fn from_terms(n_modes: usize, terms: &[(usize, Quad, f64)]) -> Result<Self> {
        let mut coeffs = DVector::zeros(2 * n_modes);
        for &(mode, quad, c) in terms {
            if mode >= n_modes {
                return Err(Error::ModeIndex {
                    index: mode,
                    n_modes,
                });
            }
            coeffs[2 * mode + quad.offset()] += c;
        }
        Self::new(coeffs, 0.0)
    }

    pub fn coeffs(&self) -> &DVector<f64> {
        &self.coeffs
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }
}

/// A rectangular quadrature-to-quadrature map with canonical outputs,
/// modeling measurement-and-feedforward circuits at the ensemble level.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProcess {
    m: DMatrix<f64>,
    d: DVector<f64>,
}

impl LinearProcess {
    pub fn new(m: DMatrix<f64>, d: DVector<f64>) -> Result<Self> {
        if m.nrows() % 2 != 0 || m.ncols() % 2 != 0 || m.nrows() == 0 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                actual: m.nrows(),
            });
        }
        if d.len() != m.nrows() {
            return Err(Error::DimensionMismatch {
                expected: m.nrows(),
                actual: d.len(),
            });
        }
        let om_in = omega(m.ncols() / 2);
        let om_out = omega(m.nrows() / 2);
        let dev = max_abs(&(&m * &om_in * m.transpose() - &om_out));
        if dev > TOL {
            return Err(Error::NonCanonicalProcess { max_dev: dev });
        }
        Ok(Self { m, d })
    }

    pub fn n_modes_in(&self) -> usize {
        self.m.ncols() / 2
    }

    pub fn n_modes_out(&self) -> usize {
        self.m.nrows() / 2
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn displacement(&self) -> &DVector<f64> {
        &self.d
    }

    pub fn apply(&self, state: &GaussianState) -> Result<GaussianState> {
        if state.n_modes() != self.n_modes_in() {
            return Err(Error::DimensionMismatch {
                expected: self.n_modes_in(),
                actual: state.n_modes(),
            });
        }
        let mean = &self.m * state.mean() + &self.d;
        let cov = &self.m * state.cov() * self.m.transpose();
        GaussianState::new(mean, cov)
    }
}
