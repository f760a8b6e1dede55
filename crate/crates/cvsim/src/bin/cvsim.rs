//! Command-line front end: closed-form experiment reports with optional
//! Monte-Carlo cross-checks, plus an interpreter for .cvc circuit files.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use cvsim::cluster::{build_cluster4, inseparability_check, ClusterGraph, ClusterPreset};
use cvsim::dsl;
use cvsim::elements::EprParams;
use cvsim::gaussian::{db_relative, db_to_variance, fidelity, GaussianState};
use cvsim::mc;
use cvsim::protocols::{
    interaction_gain, qnd_criteria, qnd_offline_apply, teleport_sequential, unity_gain_reflectance,
    TeleportConfig,
};
use cvsim::report::{OutputFormat, Report};

#[derive(Parser)]
#[command(name = "cvsim", version, about = "Gaussian optics protocol simulator")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// emit a versioned JSON report
    #[arg(long, global = true, conflicts_with = "csv")]
    json: bool,
    /// emit CSV rows (experiment,key,value,unit)
    #[arg(long, global = true)]
    csv: bool,
    /// cross-check the closed-form result with Monte-Carlo sampling
    #[arg(long, global = true)]
    mc: bool,
    /// Monte-Carlo sample count
    #[arg(long, global = true, default_value_t = 20_000)]
    samples: usize,
    /// RNG seed; falls back to the CVSIM_SEED environment variable, then 1
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Shape {
    Linear,
    Tshape,
    Diamond,
}

#[derive(Subcommand)]
enum Cmd {
    /// Teleport a coherent state through one or more EPR channels
    Teleport {
        /// EPR squeezing in dB (negative; converted as 10^(dB/10))
        #[arg(long, allow_hyphen_values = true, conflicts_with = "vsq")]
        db: Option<f64>,
        /// EPR squeezed variance in vacuum units
        #[arg(long, allow_hyphen_values = true)]
        vsq: Option<f64>,
        /// input coherent amplitude, x quadrature
        #[arg(long, allow_hyphen_values = true, default_value_t = 3.0)]
        x: f64,
        /// input coherent amplitude, p quadrature
        #[arg(long, allow_hyphen_values = true, default_value_t = 3.0)]
        p: f64,
        /// number of sequential teleporters
        #[arg(long, default_value_t = 1)]
        hops: usize,
        /// feedforward gain (both quadratures)
        #[arg(long, allow_hyphen_values = true, default_value_t = 1.0)]
        gain: f64,
    },
    /// Off-line QND gate: transfer coefficients, conditional variances,
    /// output entanglement
    Qnd {
        /// tap beam-splitter reflectance; default is the unity-gain value
        #[arg(long)]
        reflectance: Option<f64>,
        /// ancilla squeezing in dB
        #[arg(long, allow_hyphen_values = true, conflicts_with = "anc_vsq")]
        anc_db: Option<f64>,
        /// ancilla squeezed variance in vacuum units (1 = vacuum)
        #[arg(long, allow_hyphen_values = true)]
        anc_vsq: Option<f64>,
    },
    /// Four-mode cluster state: nullifier variances and the edge witness
    Cluster {
        #[arg(long, value_enum, default_value = "linear")]
        shape: Shape,
        /// input squeezing in dB
        #[arg(long, allow_hyphen_values = true, conflicts_with = "vsq")]
        db: Option<f64>,
        /// input squeezed variance in vacuum units
        #[arg(long, allow_hyphen_values = true)]
        vsq: Option<f64>,
    },
    /// Compile and evaluate a .cvc circuit file
    Run {
        file: PathBuf,
        /// print the canonical form of the program before the report
        #[arg(long)]
        print: bool,
    },
}

const EXIT_UNPHYSICAL: u8 = 3;
const EXIT_PARSE: u8 = 4;
const EXIT_ORACLE: u8 = 5;

struct Failure {
    code: u8,
    message: String,
}

fn fail(code: u8, message: impl Into<String>) -> Failure {
    Failure {
        code,
        message: message.into(),
    }
}

fn unphysical(e: cvsim::Error) -> Failure {
    fail(EXIT_UNPHYSICAL, e.to_string())
}

fn seed_of(cli: &Cli) -> u64 {
    cli.seed
        .or_else(|| std::env::var("CVSIM_SEED").ok().and_then(|s| s.parse().ok()))
        .unwrap_or(1)
}

fn squeezing(db: Option<f64>, vsq: Option<f64>, default: f64) -> Result<f64, Failure> {
    let v = match (db, vsq) {
        (Some(db), _) => db_to_variance(db),
        (None, Some(v)) => v,
        (None, None) => default,
    };
    if !(v > 0.0) || !v.is_finite() {
        return Err(fail(EXIT_UNPHYSICAL, format!("squeezed variance must be positive, got {v}")));
    }
    Ok(v)
}

fn mc_check_state(
    report: &mut Report,
    state: &GaussianState,
    cli: &Cli,
) -> Result<(), Failure> {
    let cfg = mc::TrajectoryConfig::new(cli.samples, seed_of(cli));
    let stats = mc::sample_state(state, &cfg).map_err(unphysical)?;
    let cmp = mc::compare_moments(&stats, state, cfg.tolerance_sigmas).map_err(unphysical)?;
    push_mc(report, &cmp, cfg.seed);
    if cmp.ok {
        Ok(())
    } else {
        Err(fail(EXIT_ORACLE, format!(
            "Monte-Carlo moments disagree with the closed form (mean z {:.2}, cov z {:.2})",
            cmp.max_mean_z, cmp.max_cov_z
        )))
    }
}

fn push_mc(report: &mut Report, cmp: &mc::MomentComparison, seed: u64) {
    report.push("mc_seed", seed as f64, "");
    report.push("mc_max_mean_z", cmp.max_mean_z, "sigma");
    report.push("mc_max_cov_z", cmp.max_cov_z, "sigma");
    report.push("mc_ok", if cmp.ok { 1.0 } else { 0.0 }, "");
}

fn teleport_circuit(x: f64, p: f64, vsq: f64, gain: f64) -> String {
    let s = std::f64::consts::SQRT_2;
    format!(
        "cvc 1\nmode in coherent x={x} p={p}\nmode a squeezed vsq={vsq} vanti={} angle=0\n\
         mode b squeezed vsq={vsq} vanti={} angle=90\nbs a b T=0.5\nbs in a T=0.5\n\
         homodyne a angle=0 -> u\nhomodyne in angle=90 -> v\n\
         ff u -> displace b x gain={}\nff v -> displace b p gain={}\n",
        1.0 / vsq,
        1.0 / vsq,
        -s * gain,
        s * gain,
    )
}

fn run_teleport(
    cli: &Cli,
    db: Option<f64>,
    vsq: Option<f64>,
    x: f64,
    p: f64,
    hops: usize,
    gain: f64,
) -> Result<Report, Failure> {
    if hops == 0 {
        return Err(fail(2, "--hops must be at least 1"));
    }
    let v = squeezing(db, vsq, 0.2048)?;
    let input = GaussianState::coherent(x, p);
    let cfg = TeleportConfig {
        epr: EprParams::symmetric(v),
        gain_x: gain,
        gain_p: gain,
    };
    let out = teleport_sequential(&input, &vec![cfg; hops]).map_err(unphysical)?;
    let mut report = Report::new("teleport");
    report.push("epr_vsq", v, "vacuum units");
    report.push("epr_db", db_relative(v, 1.0), "dB");
    report.push("hops", hops as f64, "");
    report.push("gain", gain, "");
    report.push("output_var_x", out.cov()[(0, 0)], "vacuum units");
    report.push("output_var_p", out.cov()[(1, 1)], "vacuum units");
    report.push("output_mean_x", out.mean()[0], "vacuum units");
    report.push("output_mean_p", out.mean()[1], "vacuum units");
    report.push("added_noise_x", out.cov()[(0, 0)] - 1.0, "vacuum units");
    let f = fidelity(&input, &out).map_err(unphysical)?;
    report.push("fidelity", f, "");
    report.push("beats_classical", if f > 0.5 { 1.0 } else { 0.0 }, "");
    if cli.mc {
        // trajectory-level cross-check of a single hop at the same settings
        let prog = dsl::parse(&teleport_circuit(x, p, v, gain)).expect("generated program parses");
        let plan = dsl::compile(&prog).expect("generated program compiles");
        let cfg = mc::TrajectoryConfig::new(cli.samples, seed_of(cli));
        let cmp = mc::verify_plan(&plan, &cfg).map_err(unphysical)?;
        push_mc(&mut report, &cmp, cfg.seed);
        if !cmp.ok {
            return Err(fail(EXIT_ORACLE, format!(
                "trajectory sampling disagrees with the closed form (mean z {:.2}, cov z {:.2})",
                cmp.max_mean_z, cmp.max_cov_z
            )));
        }
    }
    Ok(report)
}

fn run_qnd(
    cli: &Cli,
    reflectance: Option<f64>,
    anc_db: Option<f64>,
    anc_vsq: Option<f64>,
) -> Result<Report, Failure> {
    let r = reflectance.unwrap_or_else(unity_gain_reflectance);
    let v = squeezing(anc_db, anc_vsq, 1.0)?;
    let anc_a = GaussianState::squeezed_vacuum(v, 1.0 / v, 0.0).map_err(unphysical)?;
    let anc_b =
        GaussianState::squeezed_vacuum(v, 1.0 / v, std::f64::consts::FRAC_PI_2).map_err(unphysical)?;
    let out = qnd_offline_apply(r, &GaussianState::vacuum(2), &anc_a, &anc_b).map_err(unphysical)?;
    let g = interaction_gain(r);
    let rep = qnd_criteria(&out, 1.0, 1.0, g).map_err(unphysical)?;
    let mut report = Report::new("qnd");
    report.push("reflectance", r, "");
    report.push("interaction_gain", g, "");
    report.push("ancilla_vsq", v, "vacuum units");
    report.push("t_s_x", rep.t_s_x, "");
    report.push("t_m_x", rep.t_m_x, "");
    report.push("t_sum_x", rep.t_s_x + rep.t_m_x, "");
    report.push("t_s_p", rep.t_s_p, "");
    report.push("t_m_p", rep.t_m_p, "");
    report.push("t_sum_p", rep.t_s_p + rep.t_m_p, "");
    report.push("v_cond_x", rep.v_cond_x, "vacuum units");
    report.push("v_cond_p", rep.v_cond_p, "vacuum units");
    report.push("duan_min_x", rep.duan_min_x, "");
    report.push("duan_min_p", rep.duan_min_p, "");
    report.push("transfer_criterion_x", if rep.transfer_criterion_x() { 1.0 } else { 0.0 }, "");
    report.push("conditional_criterion", if rep.conditional_criterion() { 1.0 } else { 0.0 }, "");
    report.push("entangled", if rep.entangled() { 1.0 } else { 0.0 }, "");
    if cli.mc {
        mc_check_state(&mut report, &out, cli)?;
    }
    Ok(report)
}

fn run_cluster(cli: &Cli, shape: Shape, db: Option<f64>, vsq: Option<f64>) -> Result<Report, Failure> {
    let v = squeezing(db, vsq, db_to_variance(-5.4))?;
    let preset = match shape {
        Shape::Linear => ClusterPreset::Linear4,
        Shape::Tshape => ClusterPreset::TShape4,
        Shape::Diamond => ClusterPreset::Diamond4,
    };
    let graph = ClusterGraph::preset(preset);
    let state = build_cluster4(preset, &[v; 4]).map_err(unphysical)?;
    let mut report = Report::new("cluster");
    report.push("input_vsq", v, "vacuum units");
    report.push("input_db", db_relative(v, 1.0), "dB");
    let forms = graph.nullifier_forms().map_err(unphysical)?;
    for (j, form) in forms.iter().enumerate() {
        let (_, var) = state.form_stats(form).map_err(unphysical)?;
        report.push(format!("nullifier_var_{}", j + 1), var, "vacuum units");
    }
    let mut all = true;
    for w in inseparability_check(&state, &graph).map_err(unphysical)? {
        report.push(
            format!("edge_sum_{}_{}", w.edge.0 + 1, w.edge.1 + 1),
            w.sum,
            "vacuum units",
        );
        all &= w.satisfied;
    }
    report.push("witness_bound", 4.0, "vacuum units");
    report.push("inseparable", if all { 1.0 } else { 0.0 }, "");
    if cli.mc {
        mc_check_state(&mut report, &state, cli)?;
    }
    Ok(report)
}

fn run_file(cli: &Cli, file: &PathBuf, print: bool) -> Result<Report, Failure> {
    let src = std::fs::read_to_string(file)
        .map_err(|e| fail(2, format!("cannot read {}: {e}", file.display())))?;
    let render_errs = |errs: Vec<dsl::CvcError>| {
        let lines: Vec<String> = errs
            .iter()
            .map(|e| format!("{}: {e}", file.display()))
            .collect();
        fail(EXIT_PARSE, lines.join("\n"))
    };
    let prog = dsl::parse(&src).map_err(render_errs)?;
    let plan = dsl::compile(&prog).map_err(render_errs)?;
    if print {
        print!("{}", prog.canonical());
    }
    let mut report = Report::new("run");
    report.push("modes", plan.mode_names.len() as f64, "");
    report.push("outputs", plan.n_outputs() as f64, "");
    report.push("measurements", plan.var_names.len() as f64, "");
    if plan.n_outputs() > 0 {
        let out = plan.ensemble_output().map_err(unphysical)?;
        for (o, &orig) in plan.output_modes.iter().enumerate() {
            let name = &plan.mode_names[orig];
            report.push(format!("{name}_mean_x"), out.mean()[2 * o], "vacuum units");
            report.push(format!("{name}_mean_p"), out.mean()[2 * o + 1], "vacuum units");
            report.push(format!("{name}_var_x"), out.cov()[(2 * o, 2 * o)], "vacuum units");
            report.push(format!("{name}_var_p"), out.cov()[(2 * o + 1, 2 * o + 1)], "vacuum units");
        }
        report.push("purity", out.purity(), "");
        if cli.mc {
            let cfg = mc::TrajectoryConfig::new(cli.samples, seed_of(cli));
            let cmp = mc::verify_plan(&plan, &cfg).map_err(unphysical)?;
            push_mc(&mut report, &cmp, cfg.seed);
            if !cmp.ok {
                return Err(fail(EXIT_ORACLE, format!(
                    "trajectory sampling disagrees with the ensemble map (mean z {:.2}, cov z {:.2})",
                    cmp.max_mean_z, cmp.max_cov_z
                )));
            }
        }
    }
    Ok(report)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.cmd {
        Cmd::Teleport { db, vsq, x, p, hops, gain } => {
            run_teleport(&cli, *db, *vsq, *x, *p, *hops, *gain)
        }
        Cmd::Qnd { reflectance, anc_db, anc_vsq } => run_qnd(&cli, *reflectance, *anc_db, *anc_vsq),
        Cmd::Cluster { shape, db, vsq } => run_cluster(&cli, *shape, *db, *vsq),
        Cmd::Run { file, print } => run_file(&cli, file, *print),
    };
    let format = if cli.json {
        OutputFormat::Json
    } else if cli.csv {
        OutputFormat::Csv
    } else {
        OutputFormat::Text
    };
    match result {
        Ok(report) => {
            print!("{}", report.render(format));
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
