//! A small line-oriented circuit language (.cvc files) for Gaussian optics:
//! mode declarations, passive and active elements, homodyne measurements and
//! classical feedforward.
//!
//! ```text
//! cvc 1
//! # teleportation, classical channel only
//! mode in coherent x=3 p=3
//! mode a vacuum
//! bs in a T=0.5
//! homodyne a angle=0 -> u
//! ff u -> displace in x gain=1
//! ```

mod compile;
mod parse;

pub use compile::{compile, CompiledPlan, TrajStep};
pub use parse::parse;

use crate::gaussian::Quad;

/// Byte-accurate location of a statement or token, 1-based line and columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Span {
    pub line: usize,
    pub col_start: usize,
    pub col_end: usize,
}

/// Stable, machine-readable error identifiers for parse and compile failures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum ErrorCode {
    EEmpty,
    EBadHeader,
    EUnknownKeyword,
    EArity,
    EBadNumber,
    EDupMode,
    EDupVar,
    EUndeclaredMode,
    EUseAfterMeasure,
    EUnboundVar,
    EBsTRange,
    EUnphysical,
}

impl ErrorCode {
    pub fn as_str(self) -> &'static str {
        match self {
            ErrorCode::EEmpty => "E_EMPTY",
            ErrorCode::EBadHeader => "E_BAD_HEADER",
            ErrorCode::EUnknownKeyword => "E_UNKNOWN_KEYWORD",
            ErrorCode::EArity => "E_ARITY",
            ErrorCode::EBadNumber => "E_BAD_NUMBER",
            ErrorCode::EDupMode => "E_DUP_MODE",
            ErrorCode::EDupVar => "E_DUP_VAR",
            ErrorCode::EUndeclaredMode => "E_UNDECLARED_MODE",
            ErrorCode::EUseAfterMeasure => "E_USE_AFTER_MEASURE",
            ErrorCode::EUnboundVar => "E_UNBOUND_VAR",
            ErrorCode::EBsTRange => "E_BS_T_RANGE",
            ErrorCode::EUnphysical => "E_UNPHYSICAL",
        }
    }
}

/// A diagnostic tied to a source location.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct CvcError {
    pub code: ErrorCode,
    pub message: String,
    pub span: Span,
}

impl std::fmt::Display for CvcError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{}:{}-{}: {}: {}",
            self.span.line,
            self.span.col_start,
            self.span.col_end,
            self.code.as_str(),
            self.message
        )
    }
}

/// How a declared mode starts out.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModeInit {
    Vacuum,
    Squeezed { vsq: f64, vanti: f64, angle_deg: f64 },
    Coherent { x: f64, p: f64 },
}

/// One statement of a program.
#[derive(Debug, Clone, PartialEq)]
pub enum Stmt {
    Mode { name: String, init: ModeInit },
    Bs { a: String, b: String, t: f64 },
    Fourier { mode: String },
    Phase { mode: String, deg: f64 },
    Squeeze { mode: String, r: f64 },
    Qnd { a: String, b: String, g: f64 },
    Homodyne { mode: String, angle_deg: f64, var: String },
    Ff { var: String, mode: String, quad: Quad, gain: f64 },
    Displace { mode: String, x: f64, p: f64 },
}

/// A parsed program: header version plus spanned statements in source order.
#[derive(Debug, Clone, PartialEq)]
pub struct Program {
    pub statements: Vec<(Stmt, Span)>,
}

fn fmt_f(v: f64) -> String {
    // shortest round-trip formatting
    format!("{v}")
}

impl Program {
    /// Canonical text form: normalized spacing and number formatting, comments
    /// dropped. Printing, reparsing and printing again is a fixed point.
    pub fn canonical(&self) -> String {
        let mut out = String::from("cvc 1\n");
        for (stmt, _) in &self.statements {
            let line = match stmt {
                Stmt::Mode { name, init } => match init {
                    ModeInit::Vacuum => format!("mode {name} vacuum"),
                    ModeInit::Squeezed { vsq, vanti, angle_deg } => format!(
                        "mode {name} squeezed vsq={} vanti={} angle={}",
                        fmt_f(*vsq),
                        fmt_f(*vanti),
                        fmt_f(*angle_deg)
                    ),
                    ModeInit::Coherent { x, p } => {
                        format!("mode {name} coherent x={} p={}", fmt_f(*x), fmt_f(*p))
                    }
                },
                Stmt::Bs { a, b, t } => format!("bs {a} {b} T={}", fmt_f(*t)),
                Stmt::Fourier { mode } => format!("fourier {mode}"),
                Stmt::Phase { mode, deg } => format!("phase {mode} deg={}", fmt_f(*deg)),
                Stmt::Squeeze { mode, r } => format!("squeeze {mode} r={}", fmt_f(*r)),
                Stmt::Qnd { a, b, g } => format!("qnd {a} {b} G={}", fmt_f(*g)),
                Stmt::Homodyne { mode, angle_deg, var } => {
                    format!("homodyne {mode} angle={} -> {var}", fmt_f(*angle_deg))
                }
                Stmt::Ff { var, mode, quad, gain } => {
                    let q = match quad {
                        Quad::X => "x",
                        Quad::P => "p",
                    };
                    format!("ff {var} -> displace {mode} {q} gain={}", fmt_f(*gain))
                }
                Stmt::Displace { mode, x, p } => {
                    format!("displace {mode} x={} p={}", fmt_f(*x), fmt_f(*p))
                }
            };
            out.push_str(&line);
            out.push('\n');
        }
        out
    }
}
