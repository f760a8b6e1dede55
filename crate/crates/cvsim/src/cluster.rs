//! Four-mode cluster states built from squeezed vacua and beam-splitter
//! networks, their nullifier algebra and the pairwise inseparability witness.

use nalgebra::DMatrix;

use crate::elements::{beamsplitter, phase};
use crate::error::{Error, Result};
use crate::gaussian::{GaussianState, Quad, QuadratureForm};

/// Which preset network a graph corresponds to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum ClusterPreset {
    /// chain 1-2-3-4
    Linear4,
    /// star with mode 1 as the center
    TShape4,
    /// four-cycle drawn as a diamond: modes {1,2} each linked to {3,4}
    Diamond4,
}

/// An undirected graph whose vertices are optical modes.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct ClusterGraph {
    n: usize,
    edges: Vec<(usize, usize)>,
}

impl ClusterGraph {
    pub fn new(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("graph needs at least one mode".into()));
        }
        let mut seen = Vec::new();
        for &(a, b) in edges {
            if a >= n || b >= n {
                return Err(Error::ModeIndex {
                    index: a.max(b),
                    n_modes: n,
                });
            }
            if a == b {
                return Err(Error::InvalidParameter(format!("self-loop on mode {a}")));
            }
            let key = (a.min(b), a.max(b));
            if seen.contains(&key) {
                return Err(Error::InvalidParameter(format!("duplicate edge {a}-{b}")));
            }
            seen.push(key);
        }
        Ok(Self {
            n,
            edges: seen,
        })
    }

    pub fn preset(p: ClusterPreset) -> Self {
        let edges: &[(usize, usize)] = match p {
            ClusterPreset::Linear4 => &[(0, 1), (1, 2), (2, 3)],
            ClusterPreset::TShape4 => &[(0, 1), (0, 2), (0, 3)],
            ClusterPreset::Diamond4 => &[(0, 2), (0, 3), (1, 2), (1, 3)],
        };
        Self::new(4, edges).expect("presets are valid")
    }

    pub fn n_modes(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn adjacency(&self) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(self.n, self.n);
        for &(i, j) in &self.edges {
            a[(i, j)] = 1.0;
            a[(j, i)] = 1.0;
        }
        a
    }

    pub fn neighbors(&self, mode: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .edges
            .iter()
            .filter_map(|&(a, b)| {
                if a == mode {
                    Some(b)
                } else if b == mode {
                    Some(a)
                } else {
                    None
                }
            })
            .collect();
        out.sort_unstable();
        out
    }

    /// Nullifier of mode j: p_j minus the sum of x over its neighbors. These
    /// all vanish in the infinite-squeezing limit.
    pub fn nullifier_forms(&self) -> Result<Vec<QuadratureForm>> {
        (0..self.n)
            .map(|j| {
                let mut terms = vec![(j, Quad::P, 1.0)];
                for k in self.neighbors(j) {
                    terms.push((k, Quad::X, -1.0));
                }
                QuadratureForm::from_terms(self.n, &terms)
            })
            .collect()
    }

    /// Exact nullifier variances of the network-built state with uniform
    /// squeezed variance v_sq: the diagonal of (I + Adj^2) times v_sq.
    pub fn predicted_nullifier_variances(&self, v_sq: f64) -> Vec<f64> {
        let a = self.adjacency();
        let m = DMatrix::identity(self.n, self.n) + &a * &a;
        (0..self.n).map(|j| m[(j, j)] * v_sq).collect()
    }
}

/// One step of a passive linear-optics network.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NetOp {
    Phase { mode: usize, theta: f64 },
    Bs { a: usize, b: usize, t: f64 },
}

use std::f64::consts::{FRAC_PI_2, PI};

/// The beam-splitter network turning four p-squeezed vacua into the linear
/// cluster, as a Givens decomposition of the mode unitary. Ops apply in order.
pub fn linear_network_ops() -> Vec<NetOp> {
    vec![
        NetOp::Phase { mode: 1, theta: PI },
        NetOp::Phase { mode: 2, theta: FRAC_PI_2 },
        NetOp::Phase { mode: 3, theta: -FRAC_PI_2 },
        NetOp::Bs { a: 2, b: 1, t: 0.2 },
        NetOp::Bs { a: 3, b: 2, t: 0.5 },
        NetOp::Phase { mode: 3, theta: FRAC_PI_2 },
        NetOp::Bs { a: 1, b: 0, t: 0.5 },
        NetOp::Phase { mode: 1, theta: FRAC_PI_2 },
    ]
}

/// Diamond network: the linear network followed by local rotations, which
/// rewires the chain into the four-cycle.
pub fn diamond_network_ops() -> Vec<NetOp> {
    let mut ops = linear_network_ops();
    for (mode, theta) in [(1, FRAC_PI_2), (2, 3.0 * FRAC_PI_2), (3, PI)] {
        ops.push(NetOp::Phase { mode, theta });
    }
    ops
}

/// Star network: the linear network with its 20/80 splitter replaced by a
/// half one, plus local rotations on the inputs and outputs.
pub fn tshape_network_ops() -> Vec<NetOp> {
    let mut ops: Vec<NetOp> = [0, 1, 2]
        .iter()
        .map(|&mode| NetOp::Phase { mode, theta: FRAC_PI_2 })
        .collect();
    for op in linear_network_ops() {
        ops.push(match op {
            NetOp::Bs { a, b, t } if (t - 0.2).abs() < 1e-12 => NetOp::Bs { a, b, t: 0.5 },
            other => other,
        });
    }
    for (mode, theta) in [(1, PI), (2, FRAC_PI_2)] {
        ops.push(NetOp::Phase { mode, theta });
    }
    ops
}

pub fn network_ops(preset: ClusterPreset) -> Vec<NetOp> {
    match preset {
        ClusterPreset::Linear4 => linear_network_ops(),
        ClusterPreset::TShape4 => tshape_network_ops(),
        ClusterPreset::Diamond4 => diamond_network_ops(),
    }
}

/// Run a network over p-squeezed vacuum inputs with per-mode squeezed
/// variances (pure states, v_anti = 1/v_sq).
pub fn build_cluster4(preset: ClusterPreset, v_sqs: &[f64; 4]) -> Result<GaussianState> {
    let mut state = GaussianState::squeezed_vacuum(v_sqs[0], 1.0 / v_sqs[0], FRAC_PI_2)?;
    for &v in &v_sqs[1..] {
        state = state.tensor(&GaussianState::squeezed_vacuum(v, 1.0 / v, FRAC_PI_2)?);
    }
    for op in network_ops(preset) {
        state = match op {
            NetOp::Phase { mode, theta } => state.apply(&phase(theta), &[mode]),
            NetOp::Bs { a, b, t } => state.apply(&beamsplitter(t)?, &[a, b]),
        }?;
    }
    Ok(state)
}

/// Witness verdict for one graph edge: the sum of the two adjacent nullifier
/// variances against the separability bound 4.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct EdgeWitness {
    pub edge: (usize, usize),
    pub sum: f64,
    pub bound: f64,
    pub satisfied: bool,
}

/// Evaluate the pairwise inseparability witness on every edge of the graph.
/// All sums below 4 certifies full inseparability of the cluster.
pub fn inseparability_check(state: &GaussianState, graph: &ClusterGraph) -> Result<Vec<EdgeWitness>> {
    if state.n_modes() != graph.n_modes() {
        return Err(Error::DimensionMismatch {
            expected: graph.n_modes(),
            actual: state.n_modes(),
        });
    }
    let forms = graph.nullifier_forms()?;
    let vars: Vec<f64> = forms
        .iter()
        .map(|f| state.form_stats(f).map(|(_, v)| v))
        .collect::<Result<_>>()?;
    Ok(graph
        .edges()
        .iter()
        .map(|&(a, b)| {
            let sum = vars[a] + vars[b];
            EdgeWitness {
                edge: (a, b),
                sum,
                bound: 4.0,
                satisfied: sum < 4.0,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::db_to_variance;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn nullifier_vars(state: &GaussianState, g: &ClusterGraph) -> Vec<f64> {
        g.nullifier_forms()
            .unwrap()
            .iter()
            .map(|f| state.form_stats(f).unwrap().1)
            .collect()
    }

    #[test]
    fn graph_validation() {
        assert!(ClusterGraph::new(0, &[]).is_err());
        assert!(ClusterGraph::new(2, &[(0, 2)]).is_err());
        assert!(ClusterGraph::new(2, &[(1, 1)]).is_err());
        assert!(ClusterGraph::new(2, &[(0, 1), (1, 0)]).is_err());
        let g = ClusterGraph::preset(ClusterPreset::Linear4);
        assert_eq!(g.neighbors(1), vec![0, 2]);
        assert_eq!(g.neighbors(0), vec![1]);
    }

    #[test]
    fn diamond_is_a_four_cycle() {
        let g = ClusterGraph::preset(ClusterPreset::Diamond4);
        for m in 0..4 {
            assert_eq!(g.neighbors(m).len(), 2);
        }
        // bipartite: ends {0,1} vs middles {2,3}
        assert_eq!(g.neighbors(0), vec![2, 3]);
        assert_eq!(g.neighbors(2), vec![0, 1]);
    }

    #[test]
    fn network_variances_match_graph_prediction() {
        // physical network vs closed-form diag(I + Adj^2) oracle
        for preset in [ClusterPreset::Linear4, ClusterPreset::TShape4, ClusterPreset::Diamond4] {
            let g = ClusterGraph::preset(preset);
            for v in [1.0, 0.2884, 0.05] {
                let state = build_cluster4(preset, &[v; 4]).unwrap();
                let measured = nullifier_vars(&state, &g);
                let predicted = g.predicted_nullifier_variances(v);
                for (m, p) in measured.iter().zip(&predicted) {
                    assert_abs_diff_eq!(m, p, epsilon = 1e-10);
                }
            }
        }
    }

    #[test]
    fn linear_cluster_paper_point() {
        // -5.4 dB squeezed inputs
        let v = db_to_variance(-5.4);
        let g = ClusterGraph::preset(ClusterPreset::Linear4);
        let state = build_cluster4(ClusterPreset::Linear4, &[v; 4]).unwrap();
        let vars = nullifier_vars(&state, &g);
        for (m, coeff) in vars.iter().zip([2.0, 3.0, 3.0, 2.0]) {
            assert_abs_diff_eq!(m, &(coeff * v), epsilon = 1e-10);
        }
        let checks = inseparability_check(&state, &g).unwrap();
        let sums: Vec<f64> = checks.iter().map(|c| c.sum).collect();
        assert_abs_diff_eq!(sums[0], 5.0 * v, epsilon = 1e-10);
        assert_abs_diff_eq!(sums[1], 6.0 * v, epsilon = 1e-10);
        assert_abs_diff_eq!(sums[2], 5.0 * v, epsilon = 1e-10);
        assert!(checks.iter().all(|c| c.satisfied));
        assert_abs_diff_eq!(sums[0], 1.442, epsilon = 2e-3);
        assert_abs_diff_eq!(sums[1], 1.731, epsilon = 2e-3);
    }

    #[test]
    fn tshape_and_diamond_variances() {
        let v = 0.3;
        let t = nullifier_vars(
            &build_cluster4(ClusterPreset::TShape4, &[v; 4]).unwrap(),
            &ClusterGraph::preset(ClusterPreset::TShape4),
        );
        for (m, coeff) in t.iter().zip([4.0, 2.0, 2.0, 2.0]) {
            assert_abs_diff_eq!(m, &(coeff * v), epsilon = 1e-10);
        }
        let d = nullifier_vars(
            &build_cluster4(ClusterPreset::Diamond4, &[v; 4]).unwrap(),
            &ClusterGraph::preset(ClusterPreset::Diamond4),
        );
        for m in &d {
            assert_abs_diff_eq!(m, &(3.0 * v), epsilon = 1e-10);
        }
    }

    #[test]
    fn vacuum_inputs_fail_the_witness() {
        let g = ClusterGraph::preset(ClusterPreset::Linear4);
        let state = build_cluster4(ClusterPreset::Linear4, &[1.0; 4]).unwrap();
        let checks = inseparability_check(&state, &g).unwrap();
        assert!(checks.iter().all(|c| !c.satisfied));
        let sums: Vec<f64> = checks.iter().map(|c| c.sum).collect();
        assert_abs_diff_eq!(sums[0], 5.0, epsilon = 1e-10);
        assert_abs_diff_eq!(sums[1], 6.0, epsilon = 1e-10);
    }

    #[test]
    fn witness_threshold_two_thirds() {
        let g = ClusterGraph::preset(ClusterPreset::Linear4);
        let pass = build_cluster4(ClusterPreset::Linear4, &[2.0 / 3.0 - 1e-6; 4]).unwrap();
        assert!(inseparability_check(&pass, &g).unwrap().iter().all(|c| c.satisfied));
        let fail = build_cluster4(ClusterPreset::Linear4, &[2.0 / 3.0 + 1e-6; 4]).unwrap();
        assert!(inseparability_check(&fail, &g).unwrap().iter().any(|c| !c.satisfied));
    }

    #[test]
    fn cluster_states_are_pure_and_zero_mean() {
        for preset in [ClusterPreset::Linear4, ClusterPreset::TShape4, ClusterPreset::Diamond4] {
            let s = build_cluster4(preset, &[0.25, 0.3, 0.35, 0.4]).unwrap();
            assert_abs_diff_eq!(s.purity(), 1.0, epsilon = 1e-9);
            assert_abs_diff_eq!(s.mean().norm(), 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn diamond_is_locally_equivalent_to_linear() {
        // the two networks differ only by local rotations at the output
        let v = [0.2, 0.2, 0.2, 0.2];
        let mut rotated = build_cluster4(ClusterPreset::Linear4, &v).unwrap();
        for (mode, theta) in [(1, FRAC_PI_2), (2, 3.0 * FRAC_PI_2), (3, PI)] {
            rotated = rotated.apply(&phase(theta), &[mode]).unwrap();
        }
        let diamond = build_cluster4(ClusterPreset::Diamond4, &v).unwrap();
        let diff = (rotated.cov() - diamond.cov())
            .iter()
            .fold(0.0f64, |a, x| a.max(x.abs()));
        assert_abs_diff_eq!(diff, 0.0, epsilon = 1e-12);
    }

    proptest! {
        #[test]
        fn nullifier_variances_scale_with_squeezing(exp in -3.0f64..0.0) {
            // pure proportionality to v_sq means no anti-squeezed leakage
            let v = 10f64.powf(exp);
            for preset in [ClusterPreset::Linear4, ClusterPreset::TShape4, ClusterPreset::Diamond4] {
                let g = ClusterGraph::preset(preset);
                let vars = nullifier_vars(&build_cluster4(preset, &[v; 4]).unwrap(), &g);
                let predicted = g.predicted_nullifier_variances(v);
                for (m, p) in vars.iter().zip(&predicted) {
                    prop_assert!((m - p).abs() < 1e-9 * p.max(1.0));
                }
            }
        }

        #[test]
        fn witness_verdict_monotone(v1 in 0.01f64..0.66, v2 in 0.67f64..2.0) {
            let g = ClusterGraph::preset(ClusterPreset::Linear4);
            let good = build_cluster4(ClusterPreset::Linear4, &[v1; 4]).unwrap();
            prop_assert!(inseparability_check(&good, &g).unwrap().iter().all(|c| c.satisfied));
            let bad = build_cluster4(ClusterPreset::Linear4, &[v2; 4]).unwrap();
            prop_assert!(inseparability_check(&bad, &g).unwrap().iter().any(|c| !c.satisfied));
        }
    }
}
