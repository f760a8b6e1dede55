//! Monte-Carlo cross-checks: homodyne trajectory sampling of compiled plans
//! and a numerical Wigner-overlap fidelity oracle. Every estimate is
//! deterministic for a fixed seed, independent of thread count.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::dsl::{CompiledPlan, TrajStep};
use crate::elements;
use crate::error::{Error, Result};
use crate::gaussian::GaussianState;

/// Settings for a trajectory run.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TrajectoryConfig {
    pub n_samples: usize,
    pub seed: u64,
    /// acceptance band for moment comparisons, in standard errors
    pub tolerance_sigmas: f64,
}

impl TrajectoryConfig {
    pub fn new(n_samples: usize, seed: u64) -> Self {
        Self {
            n_samples,
            seed,
            tolerance_sigmas: 5.0,
        }
    }
}

/// Empirical first and second moments of a phase-space sample.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleStats {
    pub n: usize,
    pub mean: DVector<f64>,
    pub cov: DMatrix<f64>,
}

impl SampleStats {
    fn from_points(points: &[DVector<f64>]) -> Result<Self> {
        let n = points.len();
        if n < 2 {
            return Err(Error::InvalidParameter(format!(
                "need at least 2 samples, got {n}"
            )));
        }
        let dim = points[0].len();
        let mut mean = DVector::zeros(dim);
        for pt in points {
            mean += pt;
        }
        mean /= n as f64;
        let mut cov = DMatrix::zeros(dim, dim);
        for pt in points {
            let d = pt - &mean;
            cov += &d * d.transpose();
        }
        cov /= (n - 1) as f64;
        Ok(Self { n, mean, cov })
    }

    /// Standard error of the sample mean of component i.
    pub fn mean_se(&self, i: usize) -> f64 {
        (self.cov[(i, i)] / self.n as f64).sqrt()
    }

    /// Standard error of the sample covariance entry (i, j) under Gaussian
    /// statistics: sqrt((V_ii V_jj + V_ij^2) / n).
    pub fn cov_se(&self, i: usize, j: usize) -> f64 {
        ((self.cov[(i, i)] * self.cov[(j, j)] + self.cov[(i, j)].powi(2)) / self.n as f64).sqrt()
    }
}

/// Result of checking empirical moments against exact ones.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct MomentComparison {
    pub max_mean_z: f64,
    pub max_cov_z: f64,
    pub tolerance_sigmas: f64,
    pub ok: bool,
}

/// Largest z-scores of the empirical moments against an exact state.
pub fn compare_moments(
    stats: &SampleStats,
    expected: &GaussianState,
    tolerance_sigmas: f64,
) -> Result<MomentComparison> {
    let dim = expected.mean().len();
    if stats.mean.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            actual: stats.mean.len(),
        });
    }
    let mut max_mean_z = 0.0f64;
    let mut max_cov_z = 0.0f64;
    for i in 0..dim {
        // use the exact variance for the standard error, not the estimate
        let se = (expected.cov()[(i, i)] / stats.n as f64).sqrt();
        max_mean_z = max_mean_z.max((stats.mean[i] - expected.mean()[i]).abs() / se);
        for j in i..dim {
            let se = ((expected.cov()[(i, i)] * expected.cov()[(j, j)]
                + expected.cov()[(i, j)].powi(2))
                / stats.n as f64)
                .sqrt();
            max_cov_z = max_cov_z.max((stats.cov[(i, j)] - expected.cov()[(i, j)]).abs() / se);
        }
    }
    Ok(MomentComparison {
        max_mean_z,
        max_cov_z,
        tolerance_sigmas,
        ok: max_mean_z < tolerance_sigmas && max_cov_z < tolerance_sigmas,
    })
}

/// Square root factor L of a covariance matrix (cov = L L^T) via the
/// symmetric eigendecomposition; tolerates semidefinite input.
fn cov_factor(cov: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let eig = cov.clone().symmetric_eigen();
    let mut l = eig.eigenvectors.clone();
    for (k, &lam) in eig.eigenvalues.iter().enumerate() {
        if lam < -1e-9 {
            return Err(Error::Unphysical { min_eig: lam });
        }
        let s = lam.max(0.0).sqrt();
        for r in 0..l.nrows() {
            l[(r, k)] *= s;
        }
    }
    Ok(l)
}

fn draw_point(state: &GaussianState, factor: &DMatrix<f64>, rng: &mut impl Rng) -> DVector<f64> {
    let dim = state.mean().len();
    let z = DVector::from_fn(dim, |_, _| rng.sample::<f64, _>(StandardNormal));
    state.mean() + factor * z
}

/// Draw i.i.d. phase-space points from a Gaussian state and summarize them.
pub fn sample_state(state: &GaussianState, cfg: &TrajectoryConfig) -> Result<SampleStats> {
    let factor = cov_factor(state.cov())?;
    let points: Vec<DVector<f64>> = (0..cfg.n_samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(i as u64);
            draw_point(state, &factor, &mut rng)
        })
        .collect();
    SampleStats::from_points(&points)
}

fn run_one_trajectory(plan: &CompiledPlan, seed: u64, stream: u64) -> Result<DVector<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let mut state = plan.initial.clone();
    // original mode index -> current index, None once measured
    let mut idx: Vec<Option<usize>> = (0..state.n_modes()).map(Some).collect();
    let mut slots = vec![0.0f64; plan.var_names.len()];
    for step in &plan.steps {
        match step {
            TrajStep::Apply { op, modes } => {
                let cur: Vec<usize> = modes.iter().map(|&m| idx[m].expect("live")).collect();
                state = state.apply(op, &cur)?;
            }
            TrajStep::Measure { mode, angle, slot } => {
                let cur = idx[*mode].expect("live");
                let mut c = DVector::zeros(2 * state.n_modes());
                c[2 * cur] = angle.cos();
                c[2 * cur + 1] = angle.sin();
                let mean = c.dot(state.mean());
                let var = (c.transpose() * state.cov() * &c)[(0, 0)];
                let outcome = mean + var.max(0.0).sqrt() * rng.sample::<f64, _>(StandardNormal);
                slots[*slot] = outcome;
                state = state.homodyne_project(cur, *angle, outcome)?;
                idx[*mode] = None;
                for entry in idx.iter_mut().flatten() {
                    if *entry > cur {
                        *entry -= 1;
                    }
                }
            }
            TrajStep::FfDisplace { slot, mode, quad, gain } => {
                let cur = idx[*mode].expect("live");
                let amount = gain * slots[*slot];
                let op = match quad {
                    crate::gaussian::Quad::X => elements::displace(amount, 0.0),
                    crate::gaussian::Quad::P => elements::displace(0.0, amount),
                };
                state = state.apply(&op, &[cur])?;
            }
        }
    }
    // one phase-space draw from the conditional end state
    let factor = cov_factor(state.cov())?;
    Ok(draw_point(&state, &factor, &mut rng))
}

/// Simulate the plan trajectory by trajectory: sampled homodyne outcomes,
/// exact conditioning, classical feedforward, then one phase-space draw per
/// trajectory. The pooled moments estimate the ensemble output state.
pub fn run_trajectories(plan: &CompiledPlan, cfg: &TrajectoryConfig) -> Result<SampleStats> {
    if plan.n_outputs() == 0 {
        return Err(Error::InvalidParameter(
            "plan measures every mode; nothing to sample".into(),
        ));
    }
    if cfg.n_samples < 2 {
        return Err(Error::InvalidParameter(format!(
            "need at least 2 trajectories, got {}",
            cfg.n_samples
        )));
    }
    let points: Vec<DVector<f64>> = (0..cfg.n_samples)
        .into_par_iter()
        .map(|i| run_one_trajectory(plan, cfg.seed, i as u64))
        .collect::<Result<_>>()?;
    SampleStats::from_points(&points)
}

/// Compare a trajectory run against the plan's exact ensemble output.
pub fn verify_plan(plan: &CompiledPlan, cfg: &TrajectoryConfig) -> Result<MomentComparison> {
    let stats = run_trajectories(plan, cfg)?;
    compare_moments(&stats, &plan.ensemble_output()?, cfg.tolerance_sigmas)
}

/// Fidelity of two single-mode states by numerical Wigner overlap,
/// F = 4 pi * double integral of W1 W2, on an n x n midpoint grid of
/// half-width `half_width` centered between the means.
///
/// Fails if the grid does not extend at least 8 standard deviations past both
/// means in every direction.
pub fn fidelity_overlap_oracle(
    a: &GaussianState,
    b: &GaussianState,
    half_width: f64,
    n_steps: usize,
) -> Result<f64> {
    if a.n_modes() != 1 || b.n_modes() != 1 {
        return Err(Error::NotSingleMode {
            n_modes: a.n_modes().max(b.n_modes()),
        });
    }
    if n_steps < 2 || !(half_width > 0.0) {
        return Err(Error::InvalidParameter(
            "overlap grid needs n_steps >= 2 and a positive half-width".into(),
        ));
    }
    let center = (a.mean() + b.mean()) * 0.5;
    let sigma = a
        .cov()
        .symmetric_eigenvalues()
        .max()
        .max(b.cov().symmetric_eigenvalues().max())
        .sqrt();
    let reach = (a.mean() - &center)
        .amax()
        .max((b.mean() - &center).amax());
    let margin = (half_width - reach) / sigma;
    if margin < 8.0 {
        return Err(Error::GridTooSmall { margin });
    }
    let h = 2.0 * half_width / n_steps as f64;
    let mut total = 0.0;
    let mut pt = DVector::zeros(2);
    for i in 0..n_steps {
        for j in 0..n_steps {
            pt[0] = center[0] - half_width + (i as f64 + 0.5) * h;
            pt[1] = center[1] - half_width + (j as f64 + 0.5) * h;
            total += a.wigner(&pt)? * b.wigner(&pt)?;
        }
    }
    Ok(4.0 * std::f64::consts::PI * total * h * h)
}
