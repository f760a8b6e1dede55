//! Semantic analysis and lowering of a parsed program into (a) a trajectory
//! plan for Monte-Carlo execution and (b) the exact ensemble moment map.

use std::collections::HashMap;
use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use super::{CvcError, ErrorCode, ModeInit, Program, Span, Stmt};
use crate::error::Result;
use crate::gaussian::{GaussianState, LinearProcess, Quad, SymplecticOp, TOL};
use crate::protocols::qnd_ideal;
use crate::{elements, gaussian};

/// One executable step of a trajectory simulation. Mode indices refer to the
/// declaration order of the initial state.
#[derive(Debug, Clone, PartialEq)]
pub enum TrajStep {
    Apply { op: SymplecticOp, modes: Vec<usize> },
    /// Homodyne the quadrature at `angle` (radians) and record the outcome in
    /// measurement slot `slot`.
    Measure { mode: usize, angle: f64, slot: usize },
    /// Displace `quad` of `mode` by gain times the outcome in `slot`.
    FfDisplace { slot: usize, mode: usize, quad: Quad, gain: f64 },
}

/// A compiled program: initial state, trajectory steps, and the closed-form
/// ensemble map from initial quadratures to the surviving output modes.
#[derive(Debug, Clone)]
pub struct CompiledPlan {
    pub initial: GaussianState,
    pub mode_names: Vec<String>,
    /// homodyne outcome slots, in binding order
    pub var_names: Vec<String>,
    pub steps: Vec<TrajStep>,
    /// original indices of unmeasured modes, in declaration order
    pub output_modes: Vec<usize>,
    /// ensemble moment map: rows are (x, p) of each output mode over the
    /// initial quadratures
    pub ensemble_m: DMatrix<f64>,
    pub ensemble_d: DVector<f64>,
    /// whether the ensemble map preserves canonical commutators
    pub canonical: bool,
}

impl CompiledPlan {
    /// Exact mixed-state output over the surviving modes.
    pub fn ensemble_output(&self) -> Result<GaussianState> {
        let mean = &self.ensemble_m * self.initial.mean() + &self.ensemble_d;
        let cov = &self.ensemble_m * self.initial.cov() * self.ensemble_m.transpose();
        GaussianState::new(mean, cov)
    }

    /// The ensemble map as a checked canonical process, when it is one.
    pub fn ensemble_process(&self) -> Result<LinearProcess> {
        LinearProcess::new(self.ensemble_m.clone(), self.ensemble_d.clone())
    }

    pub fn n_outputs(&self) -> usize {
        self.output_modes.len()
    }
}

fn err(code: ErrorCode, message: impl Into<String>, span: Span) -> CvcError {
    CvcError {
        code,
        message: message.into(),
        span,
    }
}

struct ModeInfo {
    index: usize,
    declared_at: usize,
    measured: bool,
}

fn embed(op: &SymplecticOp, modes: &[usize], n: usize) -> (DMatrix<f64>, DVector<f64>) {
    let mut s = DMatrix::identity(2 * n, 2 * n);
    let mut d = DVector::zeros(2 * n);
    for (a, &ma) in modes.iter().enumerate() {
        d[2 * ma] = op.displacement()[2 * a];
        d[2 * ma + 1] = op.displacement()[2 * a + 1];
        for (b, &mb) in modes.iter().enumerate() {
            for qa in 0..2 {
                for qb in 0..2 {
                    s[(2 * ma + qa, 2 * mb + qb)] = op.matrix()[(2 * a + qa, 2 * b + qb)];
                }
            }
        }
    }
    (s, d)
}

/// Lower a program. All semantic diagnostics are collected; the plan is only
/// produced when there are none.
pub fn compile(prog: &Program) -> std::result::Result<CompiledPlan, Vec<CvcError>> {
    let mut errors = Vec::new();

    // declaration pass
    let mut modes: HashMap<String, ModeInfo> = HashMap::new();
    let mut mode_names = Vec::new();
    let mut inits = Vec::new();
    for (pos, (stmt, span)) in prog.statements.iter().enumerate() {
        if let Stmt::Mode { name, init } = stmt {
            if modes.contains_key(name) {
                errors.push(err(
                    ErrorCode::EDupMode,
                    format!("mode '{name}' is already declared"),
                    *span,
                ));
                continue;
            }
            if let ModeInit::Squeezed { vsq, vanti, .. } = init {
                if !(*vsq > 0.0) || !(*vanti > 0.0) || vsq * vanti < 1.0 - TOL {
                    errors.push(err(
                        ErrorCode::EUnphysical,
                        format!("squeezed mode '{name}' needs vsq>0, vanti>0 and vsq*vanti>=1"),
                        *span,
                    ));
                    continue;
                }
            }
            modes.insert(
                name.clone(),
                ModeInfo {
                    index: mode_names.len(),
                    declared_at: pos,
                    measured: false,
                },
            );
            mode_names.push(name.clone());
            inits.push(*init);
        }
    }
    if mode_names.is_empty() {
        errors.push(err(
            ErrorCode::EEmpty,
            "program declares no modes",
            Span {
                line: 1,
                col_start: 1,
                col_end: 1,
            },
        ));
        return Err(errors);
    }

    let n = mode_names.len();
    let mut initial: Option<GaussianState> = None;
    for init in &inits {
        let one = match init {
            ModeInit::Vacuum => Ok(GaussianState::vacuum(1)),
            ModeInit::Coherent { x, p } => Ok(GaussianState::coherent(*x, *p)),
            ModeInit::Squeezed { vsq, vanti, angle_deg } => {
                GaussianState::squeezed_vacuum(*vsq, *vanti, angle_deg * PI / 180.0)
            }
        }
        .expect("mode inits validated above");
        initial = Some(match initial {
            None => one,
            Some(s) => s.tensor(&one),
        });
    }
    let initial = initial.unwrap();

    // lowering pass
    let mut steps = Vec::new();
    let mut var_names: Vec<String> = Vec::new();
    let mut vars: HashMap<String, usize> = HashMap::new();
    // ensemble tracking: current quads and slot rows over initial quads
    let mut s_cur = DMatrix::<f64>::identity(2 * n, 2 * n);
    let mut d_cur = DVector::<f64>::zeros(2 * n);
    let mut slot_rows: Vec<(DVector<f64>, f64)> = Vec::new();

    for (pos, (stmt, span)) in prog.statements.iter().enumerate() {
        let lookup = |name: &str, errors: &mut Vec<CvcError>| -> Option<usize> {
            match modes.get(name) {
                None => {
                    errors.push(err(
                        ErrorCode::EUndeclaredMode,
                        format!("mode '{name}' is not declared"),
                        *span,
                    ));
                    None
                }
                Some(info) if info.declared_at > pos => {
                    errors.push(err(
                        ErrorCode::EUndeclaredMode,
                        format!("mode '{name}' is used before its declaration"),
                        *span,
                    ));
                    None
                }
                Some(info) if info.measured => {
                    errors.push(err(
                        ErrorCode::EUseAfterMeasure,
                        format!("mode '{name}' was consumed by a homodyne measurement"),
                        *span,
                    ));
                    None
                }
                Some(info) => Some(info.index),
            }
        };

        let push_apply = |op: SymplecticOp,
                              op_modes: Vec<usize>,
                              s_cur: &mut DMatrix<f64>,
                              d_cur: &mut DVector<f64>,
                              steps: &mut Vec<TrajStep>| {
            let (s, d) = embed(&op, &op_modes, n);
            *d_cur = &s * &*d_cur + d;
            *s_cur = s * &*s_cur;
            steps.push(TrajStep::Apply { op, modes: op_modes });
        };

        match stmt {
            Stmt::Mode { .. } => {}
            Stmt::Bs { a, b, t } => {
                let (ia, ib) = (lookup(a, &mut errors), lookup(b, &mut errors));
                if !(*t > 0.0 && *t < 1.0) {
                    errors.push(err(
                        ErrorCode::EBsTRange,
                        format!("beam splitter T must be in (0,1), got {t}"),
                        *span,
                    ));
                    continue;
                }
                if let (Some(ia), Some(ib)) = (ia, ib) {
                    if ia == ib {
                        errors.push(err(
                            ErrorCode::EDupMode,
                            format!("beam splitter ports must differ, got '{a}' twice"),
                            *span,
                        ));
                        continue;
                    }
                    push_apply(
                        elements::beamsplitter(*t).expect("range checked"),
                        vec![ia, ib],
                        &mut s_cur,
                        &mut d_cur,
                        &mut steps,
                    );
                }
            }
            Stmt::Fourier { mode } => {
                if let Some(i) = lookup(mode, &mut errors) {
                    push_apply(elements::fourier(), vec![i], &mut s_cur, &mut d_cur, &mut steps);
                }
            }
            Stmt::Phase { mode, deg } => {
                if let Some(i) = lookup(mode, &mut errors) {
                    push_apply(
                        elements::phase(deg * PI / 180.0),
                        vec![i],
                        &mut s_cur,
                        &mut d_cur,
                        &mut steps,
                    );
                }
            }
            Stmt::Squeeze { mode, r } => {
                if let Some(i) = lookup(mode, &mut errors) {
                    push_apply(elements::squeezer(*r), vec![i], &mut s_cur, &mut d_cur, &mut steps);
                }
            }
            Stmt::Qnd { a, b, g } => {
                let (ia, ib) = (lookup(a, &mut errors), lookup(b, &mut errors));
                if let (Some(ia), Some(ib)) = (ia, ib) {
                    if ia == ib {
                        errors.push(err(
                            ErrorCode::EDupMode,
                            format!("QND ports must differ, got '{a}' twice"),
                            *span,
                        ));
                        continue;
                    }
                    push_apply(
                        qnd_ideal(*g).expect("finite gain checked by the parser"),
                        vec![ia, ib],
                        &mut s_cur,
                        &mut d_cur,
                        &mut steps,
                    );
                }
            }
            Stmt::Displace { mode, x, p } => {
                if let Some(i) = lookup(mode, &mut errors) {
                    push_apply(elements::displace(*x, *p), vec![i], &mut s_cur, &mut d_cur, &mut steps);
                }
            }
            Stmt::Homodyne { mode, angle_deg, var } => {
                if vars.contains_key(var) {
                    errors.push(err(
                        ErrorCode::EDupVar,
                        format!("measurement variable '{var}' is already bound"),
                        *span,
                    ));
                    continue;
                }
                if let Some(i) = lookup(mode, &mut errors) {
                    let angle = angle_deg * PI / 180.0;
                    let slot = var_names.len();
                    vars.insert(var.clone(), slot);
                    var_names.push(var.clone());
                    modes.get_mut(mode).unwrap().measured = true;
                    let row = s_cur.row(2 * i) * angle.cos() + s_cur.row(2 * i + 1) * angle.sin();
                    let off = d_cur[2 * i] * angle.cos() + d_cur[2 * i + 1] * angle.sin();
                    slot_rows.push((row.transpose(), off));
                    steps.push(TrajStep::Measure { mode: i, angle, slot });
                }
            }
            Stmt::Ff { var, mode, quad, gain } => {
                let Some(&slot) = vars.get(var) else {
                    errors.push(err(
                        ErrorCode::EUnboundVar,
                        format!("measurement variable '{var}' is not bound"),
                        *span,
                    ));
                    continue;
                };
                if let Some(i) = lookup(mode, &mut errors) {
                    let row = 2 * i + quad.offset();
                    let (slot_row, slot_off) = &slot_rows[slot];
                    let updated = s_cur.row(row) + slot_row.transpose() * *gain;
                    s_cur.row_mut(row).copy_from(&updated);
                    d_cur[row] += gain * slot_off;
                    steps.push(TrajStep::FfDisplace {
                        slot,
                        mode: i,
                        quad: *quad,
                        gain: *gain,
                    });
                }
            }
        }
    }

    if !errors.is_empty() {
        return Err(errors);
    }

    let output_modes: Vec<usize> = (0..n)
        .filter(|i| !modes[&mode_names[*i]].measured)
        .collect();
    let n_out = output_modes.len();
    let mut m = DMatrix::zeros(2 * n_out, 2 * n);
    let mut d = DVector::zeros(2 * n_out);
    for (o, &i) in output_modes.iter().enumerate() {
        for q in 0..2 {
            m.row_mut(2 * o + q).copy_from(&s_cur.row(2 * i + q));
            d[2 * o + q] = d_cur[2 * i + q];
        }
    }
    let canonical = if n_out == 0 {
        true
    } else {
        let om_in = gaussian::omega(n);
        let om_out = gaussian::omega(n_out);
        (&m * om_in * m.transpose() - om_out)
            .iter()
            .all(|v| v.abs() <= TOL)
    };

    Ok(CompiledPlan {
        initial,
        mode_names,
        var_names,
        steps,
        output_modes,
        ensemble_m: m,
        ensemble_d: d,
        canonical,
    })
}
