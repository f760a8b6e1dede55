//! Total parser for .cvc programs: never panics, reports every line error it
//! can recover from, with line and column spans.

use super::{CvcError, ErrorCode, ModeInit, Program, Span, Stmt};
use crate::gaussian::Quad;

#[derive(Debug, Clone)]
struct Token<'a> {
    text: &'a str,
    span: Span,
}

fn tokenize(line: &str, line_no: usize) -> Vec<Token<'_>> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in line.char_indices() {
        if ch.is_whitespace() {
            if let Some(s) = start.take() {
                out.push(Token {
                    text: &line[s..i],
                    span: Span {
                        line: line_no,
                        col_start: s + 1,
                        col_end: i,
                    },
                });
            }
            if ch == '#' {
                return out;
            }
        } else if ch == '#' {
            if let Some(s) = start.take() {
                out.push(Token {
                    text: &line[s..i],
                    span: Span {
                        line: line_no,
                        col_start: s + 1,
                        col_end: i,
                    },
                });
            }
            return out;
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push(Token {
            text: &line[s..],
            span: Span {
                line: line_no,
                col_start: s + 1,
                col_end: line.len(),
            },
        });
    }
    out
}

fn line_span(tokens: &[Token], line_no: usize) -> Span {
    match (tokens.first(), tokens.last()) {
        (Some(a), Some(b)) => Span {
            line: line_no,
            col_start: a.span.col_start,
            col_end: b.span.col_end,
        },
        _ => Span {
            line: line_no,
            col_start: 1,
            col_end: 1,
        },
    }
}

fn err(code: ErrorCode, message: impl Into<String>, span: Span) -> CvcError {
    CvcError {
        code,
        message: message.into(),
        span,
    }
}

fn ident(tok: &Token) -> Result<String, CvcError> {
    let ok = !tok.text.is_empty()
        && tok.text.chars().next().unwrap().is_ascii_alphabetic()
        && tok.text.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
    if ok {
        Ok(tok.text.to_string())
    } else {
        Err(err(
            ErrorCode::EUnknownKeyword,
            format!("expected an identifier, got '{}'", tok.text),
            tok.span,
        ))
    }
}

fn keyed_f64(tok: &Token, key: &str) -> Result<f64, CvcError> {
    let Some((k, v)) = tok.text.split_once('=') else {
        return Err(err(
            ErrorCode::EArity,
            format!("expected {key}=<number>, got '{}'", tok.text),
            tok.span,
        ));
    };
    if k != key {
        return Err(err(
            ErrorCode::EUnknownKeyword,
            format!("expected key '{key}', got '{k}'"),
            tok.span,
        ));
    }
    let val: f64 = v.parse().map_err(|_| {
        err(
            ErrorCode::EBadNumber,
            format!("'{v}' is not a number"),
            tok.span,
        )
    })?;
    if !val.is_finite() {
        return Err(err(
            ErrorCode::EBadNumber,
            format!("{key} must be finite, got {v}"),
            tok.span,
        ));
    }
    Ok(val)
}

fn need(tokens: &[Token], n: usize, form: &str, span: Span) -> Result<(), CvcError> {
    if tokens.len() != n {
        Err(err(
            ErrorCode::EArity,
            format!("expected '{form}', got {} tokens", tokens.len()),
            span,
        ))
    } else {
        Ok(())
    }
}

fn parse_stmt(tokens: &[Token], span: Span) -> Result<Stmt, CvcError> {
    match tokens[0].text {
        "mode" => {
            if tokens.len() < 3 {
                return Err(err(
                    ErrorCode::EArity,
                    "expected 'mode <id> vacuum|squeezed ...|coherent ...'",
                    span,
                ));
            }
            let name = ident(&tokens[1])?;
            match tokens[2].text {
                "vacuum" => {
                    need(tokens, 3, "mode <id> vacuum", span)?;
                    Ok(Stmt::Mode {
                        name,
                        init: ModeInit::Vacuum,
                    })
                }
                "squeezed" => {
                    need(tokens, 6, "mode <id> squeezed vsq=<v> vanti=<v> angle=<deg>", span)?;
                    Ok(Stmt::Mode {
                        name,
                        init: ModeInit::Squeezed {
                            vsq: keyed_f64(&tokens[3], "vsq")?,
                            vanti: keyed_f64(&tokens[4], "vanti")?,
                            angle_deg: keyed_f64(&tokens[5], "angle")?,
                        },
                    })
                }
                "coherent" => {
                    need(tokens, 5, "mode <id> coherent x=<v> p=<v>", span)?;
                    Ok(Stmt::Mode {
                        name,
                        init: ModeInit::Coherent {
                            x: keyed_f64(&tokens[3], "x")?,
                            p: keyed_f64(&tokens[4], "p")?,
                        },
                    })
                }
                other => Err(err(
                    ErrorCode::EUnknownKeyword,
                    format!("unknown mode kind '{other}'"),
                    tokens[2].span,
                )),
            }
        }
        "bs" => {
            need(tokens, 4, "bs <id> <id> T=<v>", span)?;
            Ok(Stmt::Bs {
                a: ident(&tokens[1])?,
                b: ident(&tokens[2])?,
                t: keyed_f64(&tokens[3], "T")?,
            })
        }
        "fourier" => {
            need(tokens, 2, "fourier <id>", span)?;
            Ok(Stmt::Fourier {
                mode: ident(&tokens[1])?,
            })
        }
        "phase" => {
            need(tokens, 3, "phase <id> deg=<v>", span)?;
            Ok(Stmt::Phase {
                mode: ident(&tokens[1])?,
                deg: keyed_f64(&tokens[2], "deg")?,
            })
        }
        "squeeze" => {
            need(tokens, 3, "squeeze <id> r=<v>", span)?;
            Ok(Stmt::Squeeze {
                mode: ident(&tokens[1])?,
                r: keyed_f64(&tokens[2], "r")?,
            })
        }
        "qnd" => {
            need(tokens, 4, "qnd <id> <id> G=<v>", span)?;
            Ok(Stmt::Qnd {
                a: ident(&tokens[1])?,
                b: ident(&tokens[2])?,
                g: keyed_f64(&tokens[3], "G")?,
            })
        }
        "homodyne" => {
            need(tokens, 5, "homodyne <id> angle=<deg> -> <var>", span)?;
            if tokens[3].text != "->" {
                return Err(err(
                    ErrorCode::EArity,
                    format!("expected '->', got '{}'", tokens[3].text),
                    tokens[3].span,
                ));
            }
            Ok(Stmt::Homodyne {
                mode: ident(&tokens[1])?,
                angle_deg: keyed_f64(&tokens[2], "angle")?,
                var: ident(&tokens[4])?,
            })
        }
        "ff" => {
            need(tokens, 7, "ff <var> -> displace <id> x|p gain=<v>", span)?;
            if tokens[2].text != "->" {
                return Err(err(
                    ErrorCode::EArity,
                    format!("expected '->', got '{}'", tokens[2].text),
                    tokens[2].span,
                ));
            }
            if tokens[3].text != "displace" {
                return Err(err(
                    ErrorCode::EUnknownKeyword,
                    format!("feedforward target must be 'displace', got '{}'", tokens[3].text),
                    tokens[3].span,
                ));
            }
            let quad = match tokens[5].text {
                "x" => Quad::X,
                "p" => Quad::P,
                other => {
                    return Err(err(
                        ErrorCode::EUnknownKeyword,
                        format!("quadrature must be x or p, got '{other}'"),
                        tokens[5].span,
                    ))
                }
            };
            Ok(Stmt::Ff {
                var: ident(&tokens[1])?,
                mode: ident(&tokens[4])?,
                quad,
                gain: keyed_f64(&tokens[6], "gain")?,
            })
        }
        "displace" => {
            need(tokens, 4, "displace <id> x=<v> p=<v>", span)?;
            Ok(Stmt::Displace {
                mode: ident(&tokens[1])?,
                x: keyed_f64(&tokens[2], "x")?,
                p: keyed_f64(&tokens[3], "p")?,
            })
        }
        other => Err(err(
            ErrorCode::EUnknownKeyword,
            format!("unknown statement '{other}'"),
            tokens[0].span,
        )),
    }
}

/// Parse a .cvc source text. Returns either a program or every diagnostic
/// found; the error list is never empty on failure.
pub fn parse(src: &str) -> Result<Program, Vec<CvcError>> {
    let mut errors = Vec::new();
    let mut statements = Vec::new();
    let mut header_seen = false;
    for (i, line) in src.lines().enumerate() {
        let line_no = i + 1;
        let tokens = tokenize(line, line_no);
        if tokens.is_empty() {
            continue;
        }
        let span = line_span(&tokens, line_no);
        if !header_seen {
            header_seen = true;
            if tokens.len() != 2 || tokens[0].text != "cvc" || tokens[1].text != "1" {
                errors.push(err(
                    ErrorCode::EBadHeader,
                    format!("first statement must be 'cvc 1', got '{}'", line.trim()),
                    span,
                ));
            }
            continue;
        }
        match parse_stmt(&tokens, span) {
            Ok(stmt) => statements.push((stmt, span)),
            Err(e) => errors.push(e),
        }
    }
    if !header_seen {
        errors.push(err(
            ErrorCode::EEmpty,
            "program has no statements",
            Span {
                line: 1,
                col_start: 1,
                col_end: 1,
            },
        ));
    }
    if errors.is_empty() {
        Ok(Program { statements })
    } else {
        Err(errors)
    }
}
