//! Acceptance gate: one test per criterion, each printing a single
//! pass/fail line (visible with --nocapture) before asserting.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cvsim::cluster::{build_cluster4, inseparability_check, ClusterGraph, ClusterPreset};
use cvsim::dsl::{compile, parse, CompiledPlan, ErrorCode};
use cvsim::elements::{displace, epr_source, phase, EprParams};
use cvsim::gaussian::{db_relative, db_to_variance, fidelity, GaussianState, Quad, QuadratureForm};
use cvsim::mc;
use cvsim::protocols::{
    calibrate_offline_vcond, conditional_variance, duan_scan, gate_teleport_identity,
    interaction_gain, qnd_criteria, qnd_ideal, qnd_offline_apply, teleport, teleport_sequential,
    unity_gain_reflectance, TeleportConfig,
};

fn check(n: usize, name: &str, f: impl FnOnce() -> Result<String, String>) {
    match f() {
        Ok(detail) => println!("criterion {n:2} PASS  {name}: {detail}"),
        Err(detail) => {
            println!("criterion {n:2} FAIL  {name}: {detail}");
            panic!("criterion {n} ({name}) failed: {detail}");
        }
    }
}

fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.amax()
}

#[test]
fn criterion_01_classical_bound() {
    check(1, "classical teleportation bound", || {
        let cfg = TeleportConfig::unity(EprParams::symmetric(1.0));
        let mut rng = ChaCha8Rng::seed_from_u64(101);
        let mut worst = 0.0f64;
        for _ in 0..25 {
            let input = GaussianState::coherent(rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0));
            let f = fidelity(&input, &teleport(&input, &cfg).unwrap()).unwrap();
            worst = worst.max((f - 0.5).abs());
        }
        if worst < 1e-9 {
            Ok(format!("F = 1/2 for 25 random coherent inputs (max dev {worst:.1e})"))
        } else {
            Err(format!("max deviation from 1/2 is {worst:.3e}"))
        }
    });
}

#[test]
fn criterion_02_fidelity_anchor() {
    check(2, "coherent-state fidelity anchor", || {
        let input = GaussianState::coherent(3.0, 3.0);
        let cfg = TeleportConfig::unity(EprParams::symmetric(0.2048));
        let f = fidelity(&input, &teleport(&input, &cfg).unwrap()).unwrap();
        if (f - 0.830).abs() <= 1e-3 {
            Ok(format!("F = {f:.4} at v_sq = 0.2048"))
        } else {
            Err(format!("F = {f:.5}, expected 0.830 +- 0.001"))
        }
    });
}

#[test]
fn criterion_03_sequential_teleportation() {
    check(3, "sequential teleportation", || {
        let input = GaussianState::coherent(1.0, -1.0);
        let v1 = 1.0 / 0.70 - 1.0;
        let v2 = 1.0 / 0.75 - 1.0;
        let out = teleport_sequential(
            &input,
            &[
                TeleportConfig::unity(EprParams::symmetric(v1)),
                TeleportConfig::unity(EprParams::symmetric(v2)),
            ],
        )
        .unwrap();
        let f = fidelity(&input, &out).unwrap();
        if (f - 0.568).abs() <= 2e-3 {
            Ok(format!("two-hop F = {f:.4} from per-hop 0.70 and 0.75"))
        } else {
            Err(format!("two-hop F = {f:.5}, expected 0.568 +- 0.002"))
        }
    });
}

#[test]
fn criterion_04_squeezed_state_teleportation() {
    check(4, "squeezed-state teleportation", || {
        let input =
            GaussianState::squeezed_vacuum(db_to_variance(-6.2), db_to_variance(12.0), 0.0).unwrap();
        let out = teleport(&input, &TeleportConfig::unity(EprParams::symmetric(0.296))).unwrap();
        let vx = out.cov()[(0, 0)];
        let db = db_relative(vx, 1.0);
        if (db + 0.80).abs() <= 0.05 && vx < 1.0 {
            Ok(format!("output x-variance {db:.3} dB, still below vacuum"))
        } else {
            Err(format!("output x-variance {db:.3} dB, expected -0.80 +- 0.05 and < 0 dB"))
        }
    });
}

#[test]
fn criterion_05_qnd_unity_gain() {
    check(5, "QND unity gain and ideal limit", || {
        let r = unity_gain_reflectance();
        let g_dev = (interaction_gain(r) - 1.0).abs();
        if g_dev > 1e-12 {
            return Err(format!("interaction gain deviates by {g_dev:.1e} at R = (3-sqrt5)/2"));
        }
        let anc_a = GaussianState::squeezed_vacuum(1e-8, 1e8, 0.0).unwrap();
        let anc_b =
            GaussianState::squeezed_vacuum(1e-8, 1e8, std::f64::consts::FRAC_PI_2).unwrap();
        let input = GaussianState::coherent(0.7, -0.3).tensor(&GaussianState::coherent(-1.1, 0.4));
        let out = qnd_offline_apply(r, &input, &anc_a, &anc_b).unwrap();
        let ideal = input.apply(&qnd_ideal(1.0).unwrap(), &[0, 1]).unwrap();
        let dev = max_abs(&(out.cov() - ideal.cov())).max((out.mean() - ideal.mean()).amax());
        if dev <= 1e-6 {
            Ok(format!(
                "gain exact to {g_dev:.1e}; ideal-ancilla limit matches the direct interaction to {dev:.1e}"
            ))
        } else {
            Err(format!("ideal-ancilla limit deviates by {dev:.3e}"))
        }
    });
}

#[test]
fn criterion_06_qnd_criteria() {
    check(6, "QND transfer, conditional variance, entanglement", || {
        let r = unity_gain_reflectance();
        let run = |v: f64| {
            let anc_a = GaussianState::squeezed_vacuum(v, 1.0 / v, 0.0).unwrap();
            let anc_b =
                GaussianState::squeezed_vacuum(v, 1.0 / v, std::f64::consts::FRAC_PI_2).unwrap();
            qnd_offline_apply(r, &GaussianState::vacuum(2), &anc_a, &anc_b).unwrap()
        };
        // transfer sum exceeds 1 across the whole ancilla range
        for i in 0..=20 {
            let v = 10f64.powf(-4.0 + 4.0 * i as f64 / 20.0);
            let rep = qnd_criteria(&run(v), 1.0, 1.0, 1.0).unwrap();
            if rep.t_s_x + rep.t_m_x <= 1.0 {
                return Err(format!("transfer sum {} at v_sq {v}", rep.t_s_x + rep.t_m_x));
            }
        }
        let rep_vac = qnd_criteria(&run(1.0), 1.0, 1.0, 1.0).unwrap();
        let sum_vac = rep_vac.t_s_x + rep_vac.t_m_x;
        if (sum_vac - 1.152).abs() > 1e-3 {
            return Err(format!("vacuum transfer sum {sum_vac:.4}, expected 1.152"));
        }
        let rep_ideal = qnd_criteria(&run(1e-9), 1.0, 1.0, 1.0).unwrap();
        if (rep_ideal.t_s_x + rep_ideal.t_m_x - 1.5).abs() > 1e-3 {
            return Err(format!(
                "ideal transfer sum {}, expected 1.5",
                rep_ideal.t_s_x + rep_ideal.t_m_x
            ));
        }
        // Monte-Carlo cross-check of the vacuum-ancilla transfer sum
        let state = run(1.0);
        let n = 100_000usize;
        let stats = mc::sample_state(&state, &mc::TrajectoryConfig::new(n, 606)).unwrap();
        let t_emp = 1.0 / stats.cov[(0, 0)] + 1.0 / stats.cov[(2, 2)];
        // SE of 1/var is (1/var) sqrt(2/n) to first order
        let se = (1.0 / state.cov()[(0, 0)] + 1.0 / state.cov()[(2, 2)]) * (2.0 / n as f64).sqrt();
        if (t_emp - sum_vac).abs() > 5.0 * se {
            return Err(format!("MC transfer sum {t_emp:.4} vs {sum_vac:.4}, > 5 SE"));
        }
        // conditional variance: calibration point and threshold by root-finding
        let v_cal = calibrate_offline_vcond(0.75).unwrap();
        let x1 = QuadratureForm::from_terms(2, &[(0, Quad::X, 1.0)]).unwrap();
        let x2 = QuadratureForm::from_terms(2, &[(1, Quad::X, 1.0)]).unwrap();
        let (vc, _) = conditional_variance(&run(v_cal), &x1, &x2).unwrap();
        if (vc - 0.75).abs() > 0.01 {
            return Err(format!("calibrated V_cond {vc:.4}, expected 0.75 +- 0.01"));
        }
        let v_thr = calibrate_offline_vcond(1.0 - 1e-10).unwrap();
        let below = conditional_variance(&run(v_thr * 0.99), &x1, &x2).unwrap().0;
        let above = conditional_variance(&run(v_thr * 1.01), &x1, &x2).unwrap().0;
        if !(below < 1.0 && above >= 1.0) {
            return Err(format!(
                "threshold {v_thr:.4} not separating: V_cond {below:.4} below, {above:.4} above"
            ));
        }
        // calibrated gate output is entangled
        let (_, rx, rp) = duan_scan(&run(v_cal)).unwrap();
        if !(rx < 1.0 && rp < 1.0) {
            return Err(format!("calibrated output not entangled (ratios {rx:.3}, {rp:.3})"));
        }
        Ok(format!(
            "transfer sum {sum_vac:.3} at vacuum (MC z ok), V_cond 0.75 at v_sq {v_cal:.3}, \
             threshold v_sq {v_thr:.3}, calibrated output entangled"
        ))
    });
}

#[test]
fn criterion_07_cluster_state() {
    check(7, "cluster nullifiers and inseparability", || {
        let v = 0.2884;
        let graph = ClusterGraph::preset(ClusterPreset::Linear4);
        let state = build_cluster4(ClusterPreset::Linear4, &[v; 4]).unwrap();
        let forms = graph.nullifier_forms().unwrap();
        let want = [2.0, 3.0, 3.0, 2.0];
        for (form, w) in forms.iter().zip(want) {
            let var = state.form_stats(form).unwrap().1;
            if (var - w * v).abs() > 1e-9 {
                return Err(format!("nullifier variance {var:.6}, expected {}", w * v));
            }
        }
        let mut sums: Vec<f64> = inseparability_check(&state, &graph)
            .unwrap()
            .iter()
            .map(|w| w.sum)
            .collect();
        if !sums.iter().all(|s| *s < 4.0) {
            return Err(format!("witness sums {sums:?} not all below 4"));
        }
        sums.sort_by(f64::total_cmp);
        for (s, w) in sums.iter().zip([1.442, 1.442, 1.731]) {
            if (s - w).abs() > 2e-3 {
                return Err(format!("witness sums {sums:?}, expected (1.442, 1.442, 1.731)"));
            }
        }
        // threshold by bisection on the worst edge sum
        let (mut lo, mut hi) = (0.1, 1.0);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            let s = build_cluster4(ClusterPreset::Linear4, &[mid; 4]).unwrap();
            let ok = inseparability_check(&s, &graph).unwrap().iter().all(|w| w.satisfied);
            if ok {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let thr = 0.5 * (lo + hi);
        if (thr - 2.0 / 3.0).abs() > 1e-9 {
            return Err(format!("inseparability threshold {thr:.9}, expected 2/3"));
        }
        Ok(format!(
            "variances (2,3,3,2)v, sums {:.3}/{:.3}/{:.3} < 4, threshold v_sq = 2/3",
            sums[0], sums[1], sums[2]
        ))
    });
}

#[test]
fn criterion_08_oracle_equivalence() {
    check(8, "Monte-Carlo / analytic equivalence", || {
        let plans: [(&str, &str); 4] = [
            ("teleport", include_str!("golden/teleport.cvc")),
            ("gate_teleport", include_str!("golden/gate_teleport.cvc")),
            ("qnd_offline", include_str!("golden/qnd_offline.cvc")),
            ("cluster_linear", include_str!("golden/cluster_linear.cvc")),
        ];
        let mut details = Vec::new();
        for (name, src) in plans {
            let plan: CompiledPlan = compile(&parse(src).unwrap()).unwrap();
            let cfg = mc::TrajectoryConfig::new(100_000, 808);
            let first = mc::run_trajectories(&plan, &cfg).unwrap();
            let cmp = mc::compare_moments(&first, &plan.ensemble_output().unwrap(), 5.0).unwrap();
            if !cmp.ok {
                return Err(format!(
                    "{name}: mean z {:.2}, cov z {:.2} exceeds 5 SE",
                    cmp.max_mean_z, cmp.max_cov_z
                ));
            }
            let second = mc::run_trajectories(&plan, &cfg).unwrap();
            if first != second {
                return Err(format!("{name}: rerun under the same seed not bit-identical"));
            }
            details.push(format!("{name} z<=({:.1},{:.1})", cmp.max_mean_z, cmp.max_cov_z));
        }
        Ok(format!("100k trajectories, deterministic: {}", details.join(", ")))
    });
}

#[test]
fn criterion_09_fidelity_oracle() {
    check(9, "fidelity closed form vs Wigner overlap", || {
        let mut rng = ChaCha8Rng::seed_from_u64(909);
        let mut worst = 0.0f64;
        for _ in 0..50 {
            // pure reference: rotated squeezed vacuum, displaced
            let vs = rng.gen_range(0.2..1.0);
            let pure = GaussianState::squeezed_vacuum(vs, 1.0 / vs, rng.gen_range(0.0..3.14))
                .unwrap()
                .apply(&displace(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)), &[0])
                .unwrap();
            // other: possibly impure, rotated, displaced
            let v1 = rng.gen_range(0.3..1.5);
            let v2 = 1.0 / v1 * rng.gen_range(1.0..2.0);
            let other = GaussianState::squeezed_vacuum(v1, v2, rng.gen_range(0.0..3.14))
                .unwrap()
                .apply(&phase(rng.gen_range(0.0..6.28)), &[0])
                .unwrap()
                .apply(&displace(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)), &[0])
                .unwrap();
            let exact = fidelity(&pure, &other).unwrap();
            let grid = mc::fidelity_overlap_oracle(&pure, &other, 30.0, 250).unwrap();
            worst = worst.max((exact - grid).abs());
        }
        if worst <= 1e-4 {
            Ok(format!("50 randomized cases, max deviation {worst:.2e}"))
        } else {
            Err(format!("max deviation {worst:.3e} exceeds 1e-4"))
        }
    });
}

#[test]
fn criterion_10_dsl_golden_corpus() {
    check(10, "DSL golden corpus", || {
        let cases: [(&str, &str, f64, GaussianState); 7] = [
            (
                "teleport",
                include_str!("golden/teleport.cvc"),
                1e-12,
                teleport(
                    &GaussianState::coherent(3.0, 3.0),
                    &TeleportConfig::unity(EprParams::symmetric(0.2048)),
                )
                .unwrap(),
            ),
            (
                "teleport_two_hop",
                include_str!("golden/teleport_two_hop.cvc"),
                1e-9,
                teleport_sequential(
                    &GaussianState::coherent(1.0, -1.0),
                    &[
                        TeleportConfig::unity(EprParams::symmetric(1.0 / 0.7 - 1.0)),
                        TeleportConfig::unity(EprParams::symmetric(1.0 / 3.0)),
                    ],
                )
                .unwrap(),
            ),
            (
                "gate_teleport",
                include_str!("golden/gate_teleport.cvc"),
                1e-12,
                gate_teleport_identity(&GaussianState::coherent(1.5, -0.5), 0.25).unwrap(),
            ),
            (
                "qnd_offline",
                include_str!("golden/qnd_offline.cvc"),
                1e-9,
                qnd_offline_apply(
                    unity_gain_reflectance(),
                    &GaussianState::coherent(1.0, -1.0).tensor(&GaussianState::coherent(0.5, 2.0)),
                    &GaussianState::squeezed_vacuum(0.25, 4.0, 0.0).unwrap(),
                    &GaussianState::squeezed_vacuum(0.25, 4.0, std::f64::consts::FRAC_PI_2)
                        .unwrap(),
                )
                .unwrap(),
            ),
            (
                "cluster_linear",
                include_str!("golden/cluster_linear.cvc"),
                1e-9,
                build_cluster4(ClusterPreset::Linear4, &[0.25; 4]).unwrap(),
            ),
            (
                "cluster_diamond",
                include_str!("golden/cluster_diamond.cvc"),
                1e-9,
                build_cluster4(ClusterPreset::Diamond4, &[0.25; 4]).unwrap(),
            ),
            (
                "cluster_tshape",
                include_str!("golden/cluster_tshape.cvc"),
                1e-9,
                build_cluster4(ClusterPreset::TShape4, &[0.25; 4]).unwrap(),
            ),
        ];
        let mut n_files = 0;
        for (name, src, tol, want) in &cases {
            n_files += 1;
            let prog = parse(src).map_err(|e| format!("{name}: parse failed: {e:?}"))?;
            let printed = prog.canonical();
            let reparsed = parse(&printed).map_err(|e| format!("{name}: reprint failed: {e:?}"))?;
            if reparsed.canonical() != printed {
                return Err(format!("{name}: canonical print not a fixed point"));
            }
            let plan = compile(&prog).map_err(|e| format!("{name}: compile failed: {e:?}"))?;
            let out = plan.ensemble_output().unwrap();
            let dev = max_abs(&(out.cov() - want.cov())).max((out.mean() - want.mean()).amax());
            if dev > *tol {
                return Err(format!("{name}: deviates from preset by {dev:.2e}"));
            }
        }
        // epr witness file: two-mode preset
        let epr_out = compile(&parse(include_str!("golden/epr_witness.cvc")).unwrap())
            .unwrap()
            .ensemble_output()
            .unwrap();
        let epr_want = epr_source(EprParams::symmetric(0.3)).unwrap();
        if max_abs(&(epr_out.cov() - epr_want.cov())) > 1e-12 {
            return Err("epr_witness deviates from preset".into());
        }
        n_files += 1;
        // error-case files with stable codes and spans
        let errs = parse(include_str!("golden/err_bad_header.cvc")).unwrap_err();
        if errs[0].code != ErrorCode::EBadHeader || errs[0].span.line != 1 {
            return Err("err_bad_header: wrong code or span".into());
        }
        n_files += 1;
        let errs = compile(&parse(include_str!("golden/err_semantic.cvc")).unwrap()).unwrap_err();
        let got: Vec<(ErrorCode, usize)> = errs.iter().map(|e| (e.code, e.span.line)).collect();
        let want_errs = vec![
            (ErrorCode::EDupMode, 4),
            (ErrorCode::EBsTRange, 5),
            (ErrorCode::EUseAfterMeasure, 7),
            (ErrorCode::EUnboundVar, 8),
        ];
        if got != want_errs {
            return Err(format!("err_semantic: got {got:?}"));
        }
        n_files += 1;
        Ok(format!("{n_files} files: compile-equal to presets, stable error codes and spans"))
    });
}
