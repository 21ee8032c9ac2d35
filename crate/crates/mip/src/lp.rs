//! LP-format text export and re-import.
//!
//! Dialect: linear constraints plus a bracketed quadratic objective section
//! (`[ 2 x0 ^ 2 + 4 x0 * x1 ] / 2`), `Bounds`, `Binaries`, `End`. Variable
//! names encode the model column: `x<col>` for continuous, `b<col>` for
//! binary, so a write/read round trip reproduces the exact column layout.
//! See `docs/lp_format.md` for a worked example.

use std::io::Write;

use crate::error::{MipError, Result};
use crate::model::{MipModel, Sense, Var, VarKind};

pub fn write_lp<W: Write>(model: &MipModel, out: &mut W) -> std::io::Result<()> {
    let name = |col: usize| -> String {
        match model.vars[col].kind {
            VarKind::Continuous => format!("x{col}"),
            VarKind::Binary => format!("b{col}"),
        }
    };

    writeln!(out, "\\ covplan mixed-integer QP export")?;
    writeln!(out, "Minimize")?;
    let mut obj = String::from(" obj:");
    let mut wrote_any = false;
    for (col, &c) in model.lin.iter().enumerate() {
        if c != 0.0 {
            push_term(&mut obj, c, &name(col), wrote_any);
            wrote_any = true;
        }
    }
    if !model.quad.is_empty() {
        obj.push_str(if wrote_any { " + [" } else { " [" });
        let mut first_q = true;
        for &(i, j, c) in &model.quad {
            // The bracket is halved on read, so diagonal entries carry c and
            // cross terms carry 2c.
            if i == j {
                push_term(&mut obj, c, &format!("{} ^ 2", name(i)), !first_q);
            } else {
                push_term(&mut obj, 2.0 * c, &format!("{} * {}", name(i), name(j)), !first_q);
            }
            first_q = false;
        }
        obj.push_str(" ] / 2");
        wrote_any = true;
    }
    if model.obj_const != 0.0 || !wrote_any {
        if model.obj_const >= 0.0 && wrote_any {
            obj.push_str(&format!(" + {}", model.obj_const));
        } else if model.obj_const < 0.0 && wrote_any {
            obj.push_str(&format!(" - {}", -model.obj_const));
        } else {
            obj.push_str(&format!(" {}", model.obj_const));
        }
    }
    writeln!(out, "{obj}")?;

    writeln!(out, "Subject To")?;
    for (r, row) in model.rows.iter().enumerate() {
        let mut line = format!(" c{r}:");
        for (pos, (&col, &coef)) in row.cols.iter().zip(&row.coefs).enumerate() {
            push_term(&mut line, coef, &name(col), pos > 0);
        }
        let (sense, rhs) = if row.lo == row.hi {
            ("=", row.lo)
        } else if row.lo.is_infinite() {
            ("<=", row.hi)
        } else {
            (">=", row.lo)
        };
        line.push_str(&format!(" {sense} {rhs}"));
        writeln!(out, "{line}")?;
    }

    writeln!(out, "Bounds")?;
    for (col, v) in model.vars.iter().enumerate() {
        if v.kind == VarKind::Binary {
            continue;
        }
        let lo = fmt_bound(v.lo);
        let hi = fmt_bound(v.hi);
        writeln!(out, " {lo} <= {} <= {hi}", name(col))?;
    }

    let binaries: Vec<String> = model
        .vars
        .iter()
        .enumerate()
        .filter(|(_, v)| v.kind == VarKind::Binary)
        .map(|(col, _)| name(col))
        .collect();
    if !binaries.is_empty() {
        writeln!(out, "Binaries")?;
        writeln!(out, " {}", binaries.join(" "))?;
    }
    writeln!(out, "End")?;
    Ok(())
}

fn push_term(line: &mut String, coef: f64, name: &str, need_sep: bool) {
    if need_sep {
        if coef >= 0.0 {
            line.push_str(&format!(" + {coef} {name}"));
        } else {
            line.push_str(&format!(" - {} {name}", -coef));
        }
    } else {
        line.push_str(&format!(" {coef} {name}"));
    }
}

fn fmt_bound(v: f64) -> String {
    if v == f64::INFINITY {
        "+infinity".to_string()
    } else if v == f64::NEG_INFINITY {
        "-infinity".to_string()
    } else {
        format!("{v}")
    }
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq)]
enum Section {
    Preamble,
    Objective,
    Constraints,
    Bounds,
    Binaries,
    Done,
}

struct Tok {
    line: usize,
    text: String,
}

pub fn read_lp(text: &str) -> Result<MipModel> {
    // Tokenize per section, keeping line numbers for error reporting.
    let mut section = Section::Preamble;
    let mut obj_toks: Vec<Tok> = Vec::new();
    let mut cons_lines: Vec<(usize, Vec<String>)> = Vec::new();
    let mut bound_lines: Vec<(usize, Vec<String>)> = Vec::new();
    let mut bin_toks: Vec<Tok> = Vec::new();

    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let stripped = match raw.find('\\') {
            Some(p) => &raw[..p],
            None => raw,
        };
        let trimmed = stripped.trim();
        if trimmed.is_empty() {
            continue;
        }
        let lower = trimmed.to_ascii_lowercase();
        let new_section = match lower.as_str() {
            "minimize" | "min" => Some(Section::Objective),
            "subject to" | "st" | "s.t." => Some(Section::Constraints),
            "bounds" => Some(Section::Bounds),
            "binaries" | "binary" | "bin" => Some(Section::Binaries),
            "end" => Some(Section::Done),
            _ => None,
        };
        if let Some(s) = new_section {
            section = s;
            continue;
        }
        let toks: Vec<String> = trimmed
            .split_whitespace()
            .map(|t| t.to_string())
            .collect();
        match section {
            Section::Preamble => {
                return Err(MipError::LpParse {
                    line,
                    msg: format!("unexpected content before Minimize: {trimmed:?}"),
                })
            }
            Section::Objective => obj_toks.extend(toks.into_iter().map(|t| Tok { line, text: t })),
            Section::Constraints => cons_lines.push((line, toks)),
            Section::Bounds => bound_lines.push((line, toks)),
            Section::Binaries => bin_toks.extend(toks.into_iter().map(|t| Tok { line, text: t })),
            Section::Done => {
                return Err(MipError::LpParse {
                    line,
                    msg: "content after End".to_string(),
                })
            }
        }
    }

    // First pass: discover all variables to rebuild the column layout.
    let mut max_col: Option<usize> = None;
    let mut kinds: Vec<(usize, VarKind, usize)> = Vec::new(); // (col, kind, line)
    let mut note_var = |tok: &str, line: usize| -> Result<()> {
        if let Some((col, kind)) = parse_var_name(tok) {
            max_col = Some(max_col.map_or(col, |m: usize| m.max(col)));
            kinds.push((col, kind, line));
        }
        Ok(())
    };
    for t in &obj_toks {
        note_var(&t.text, t.line)?;
    }
    for (line, toks) in &cons_lines {
        for t in toks {
            note_var(t, *line)?;
        }
    }
    for (line, toks) in &bound_lines {
        for t in toks {
            note_var(t, *line)?;
        }
    }
    for t in &bin_toks {
        note_var(&t.text, t.line)?;
    }

    let n = match max_col {
        Some(m) => m + 1,
        None => 0,
    };
    let mut kind_by_col: Vec<Option<VarKind>> = vec![None; n];
    for (col, kind, line) in kinds {
        match kind_by_col[col] {
            None => kind_by_col[col] = Some(kind),
            Some(k) if k == kind => {}
            Some(_) => {
                return Err(MipError::LpParse {
                    line,
                    msg: format!("column {col} referenced with conflicting kinds"),
                })
            }
        }
    }

    let mut model = MipModel::new();
    for (col, kind) in kind_by_col.iter().enumerate() {
        match kind {
            Some(VarKind::Binary) => {
                model.add_binary();
            }
            Some(VarKind::Continuous) | None => {
                // Default LP bounds; explicit Bounds lines override below.
                model.add_continuous(0.0, f64::INFINITY).map_err(|e| {
                    MipError::LpParse {
                        line: 0,
                        msg: format!("column {col}: {e}"),
                    }
                })?;
            }
        }
    }

    // Objective.
    let (lin, quad, constant) = parse_objective(&obj_toks)?;
    // Constraints (before set_objective so PSD failures surface with
    // objective context, not mid-build).
    let mut pending_rows = Vec::new();
    for (line, toks) in &cons_lines {
        pending_rows.push(parse_constraint(*line, toks)?);
    }
    // Bounds.
    for (line, toks) in &bound_lines {
        apply_bound_line(&mut model, *line, toks)?;
    }

    model
        .set_objective(
            &quad
                .iter()
                .map(|&(i, j, c)| (Var(i), Var(j), c))
                .collect::<Vec<_>>(),
            &lin.iter().map(|&(c, v)| (Var(c), v)).collect::<Vec<_>>(),
            constant,
        )
        .map_err(|e| MipError::LpParse {
            line: 0,
            msg: format!("objective: {e}"),
        })?;
    for (line, terms, sense, rhs) in pending_rows {
        model
            .add_linear_constraint(
                &terms.iter().map(|&(c, v)| (Var(c), v)).collect::<Vec<_>>(),
                sense,
                rhs,
            )
            .map_err(|e| MipError::LpParse {
                line,
                msg: format!("{e}"),
            })?;
    }
    Ok(model)
}

fn parse_var_name(tok: &str) -> Option<(usize, VarKind)> {
    let (kind, rest) = if let Some(r) = tok.strip_prefix('x') {
        (VarKind::Continuous, r)
    } else if let Some(r) = tok.strip_prefix('b') {
        (VarKind::Binary, r)
    } else {
        return None;
    };
    rest.parse::<usize>().ok().map(|col| (col, kind))
}

type ObjParts = (Vec<(usize, f64)>, Vec<(usize, usize, f64)>, f64);

fn parse_objective(toks: &[Tok]) -> Result<ObjParts> {
    let mut lin: Vec<(usize, f64)> = Vec::new();
    let mut quad: Vec<(usize, usize, f64)> = Vec::new();
    let mut constant = 0.0;

    let mut i = 0;
    // Optional leading "obj:" label (possibly split as "obj" ":").
    if i < toks.len() && toks[i].text.ends_with(':') {
        i += 1;
    } else if i + 1 < toks.len() && toks[i + 1].text == ":" {
        i += 2;
    }

    let mut sign = 1.0;
    while i < toks.len() {
        let t = &toks[i];
        match t.text.as_str() {
            "+" => {
                sign = 1.0;
                i += 1;
            }
            "-" => {
                sign = -1.0;
                i += 1;
            }
            "[" => {
                // Quadratic block, terminated by "] / 2".
                i += 1;
                let mut qsign = 1.0;
                loop {
                    if i >= toks.len() {
                        return Err(MipError::LpParse {
                            line: toks.last().map_or(0, |t| t.line),
                            msg: "unterminated quadratic bracket".into(),
                        });
                    }
                    match toks[i].text.as_str() {
                        "+" => {
                            qsign = 1.0;
                            i += 1;
                        }
                        "-" => {
                            qsign = -1.0;
                            i += 1;
                        }
                        "]" => {
                            if i + 2 < toks.len()
                                && toks[i + 1].text == "/"
                                && toks[i + 2].text == "2"
                            {
                                i += 3;
                                break;
                            }
                            return Err(MipError::LpParse {
                                line: toks[i].line,
                                msg: "quadratic bracket must close with `] / 2`".into(),
                            });
                        }
                        _ => {
                            let coef: f64 = toks[i].text.parse().map_err(|_| MipError::LpParse {
                                line: toks[i].line,
                                msg: format!("expected coefficient, got {:?}", toks[i].text),
                            })?;
                            let v1 = expect_var(toks, i + 1)?;
                            if i + 3 < toks.len() && toks[i + 2].text == "^" {
                                // c xi ^ 2  ->  Q_ii = c
                                quad.push((v1, v1, qsign * coef));
                                i += 4;
                            } else if i + 3 < toks.len() && toks[i + 2].text == "*" {
                                let v2 = expect_var(toks, i + 3)?;
                                // c xi * xj  ->  Q_ij = c / 2 on each side.
                                let (a, b) = if v1 <= v2 { (v1, v2) } else { (v2, v1) };
                                quad.push((a, b, qsign * coef / 2.0));
                                i += 4;
                            } else {
                                return Err(MipError::LpParse {
                                    line: toks[i].line,
                                    msg: "quadratic term must be `c v ^ 2` or `c v1 * v2`".into(),
                                });
                            }
                            qsign = 1.0;
                        }
                    }
                }
                sign = 1.0;
            }
            _ => {
                if let Ok(num) = t.text.parse::<f64>() {
                    if i + 1 < toks.len() && parse_var_name(&toks[i + 1].text).is_some() {
                        let col = parse_var_name(&toks[i + 1].text).unwrap().0;
                        lin.push((col, sign * num));
                        i += 2;
                    } else {
                        constant += sign * num;
                        i += 1;
                    }
                } else if let Some((col, _)) = parse_var_name(&t.text) {
                    lin.push((col, sign));
                    i += 1;
                } else {
                    return Err(MipError::LpParse {
                        line: t.line,
                        msg: format!("unexpected token {:?} in objective", t.text),
                    });
                }
                sign = 1.0;
            }
        }
    }
    Ok((lin, quad, constant))
}

fn expect_var(toks: &[Tok], i: usize) -> Result<usize> {
    toks.get(i)
        .and_then(|t| parse_var_name(&t.text))
        .map(|(c, _)| c)
        .ok_or_else(|| MipError::LpParse {
            line: toks.get(i.min(toks.len().saturating_sub(1))).map_or(0, |t| t.line),
            msg: "expected variable name".into(),
        })
}

type RowParts = (usize, Vec<(usize, f64)>, Sense, f64);

fn parse_constraint(line: usize, toks: &[String]) -> Result<RowParts> {
    let mut i = 0;
    if toks.get(i).map_or(false, |t| t.ends_with(':')) {
        i += 1;
    }
    let mut terms: Vec<(usize, f64)> = Vec::new();
    let mut sign = 1.0;
    let mut sense: Option<Sense> = None;
    let mut rhs = 0.0;
    while i < toks.len() {
        match toks[i].as_str() {
            "+" => {
                sign = 1.0;
                i += 1;
            }
            "-" => {
                sign = -1.0;
                i += 1;
            }
            "<=" | "=<" => {
                sense = Some(Sense::Le);
                rhs = parse_rhs(line, toks.get(i + 1))?;
                i += 2;
            }
            ">=" | "=>" => {
                sense = Some(Sense::Ge);
                rhs = parse_rhs(line, toks.get(i + 1))?;
                i += 2;
            }
            "=" => {
                sense = Some(Sense::Eq);
                rhs = parse_rhs(line, toks.get(i + 1))?;
                i += 2;
            }
            t => {
                if let Ok(num) = t.parse::<f64>() {
                    let col = toks
                        .get(i + 1)
                        .and_then(|v| parse_var_name(v))
                        .map(|(c, _)| c)
                        .ok_or_else(|| MipError::LpParse {
                            line,
                            msg: format!("coefficient {num} not followed by a variable"),
                        })?;
                    terms.push((col, sign * num));
                    i += 2;
                } else if let Some((col, _)) = parse_var_name(t) {
                    terms.push((col, sign));
                    i += 1;
                } else {
                    return Err(MipError::LpParse {
                        line,
                        msg: format!("unexpected token {t:?} in constraint"),
                    });
                }
                sign = 1.0;
            }
        }
    }
    let sense = sense.ok_or_else(|| MipError::LpParse {
        line,
        msg: "constraint has no relational operator".into(),
    })?;
    Ok((line, terms, sense, rhs))
}

fn parse_rhs(line: usize, tok: Option<&String>) -> Result<f64> {
    tok.and_then(|t| t.parse::<f64>().ok())
        .ok_or_else(|| MipError::LpParse {
            line,
            msg: "missing or invalid right-hand side".into(),
        })
}

fn apply_bound_line(model: &mut MipModel, line: usize, toks: &[String]) -> Result<()> {
    let parse_b = |t: &str| -> Option<f64> {
        match t {
            "-infinity" | "-inf" => Some(f64::NEG_INFINITY),
            "+infinity" | "+inf" | "infinity" | "inf" => Some(f64::INFINITY),
            _ => t.parse::<f64>().ok(),
        }
    };
    // Forms: "lo <= v <= hi" | "v <= hi" | "v >= lo" | "v = x" | "v free"
    let fail = |msg: &str| MipError::LpParse {
        line,
        msg: msg.to_string(),
    };
    let set = |model: &mut MipModel, col: usize, lo: Option<f64>, hi: Option<f64>| {
        if let Some(l) = lo {
            model.vars[col].lo = l;
        }
        if let Some(h) = hi {
            model.vars[col].hi = h;
        }
    };
    match toks.len() {
        2 if toks[1] == "free" => {
            let (col, _) =
                parse_var_name(&toks[0]).ok_or_else(|| fail("expected variable name"))?;
            set(model, col, Some(f64::NEG_INFINITY), Some(f64::INFINITY));
            Ok(())
        }
        3 => {
            if let Some((col, _)) = parse_var_name(&toks[0]) {
                let v = parse_b(&toks[2]).ok_or_else(|| fail("bad bound value"))?;
                match toks[1].as_str() {
                    "<=" => set(model, col, None, Some(v)),
                    ">=" => set(model, col, Some(v), None),
                    "=" => set(model, col, Some(v), Some(v)),
                    _ => return Err(fail("bad bound operator")),
                }
                Ok(())
            } else {
                Err(fail("expected variable name first"))
            }
        }
        5 => {
            let lo = parse_b(&toks[0]).ok_or_else(|| fail("bad lower bound"))?;
            let (col, _) =
                parse_var_name(&toks[2]).ok_or_else(|| fail("expected variable name"))?;
            let hi = parse_b(&toks[4]).ok_or_else(|| fail("bad upper bound"))?;
            if toks[1] != "<=" || toks[3] != "<=" {
                return Err(fail("range bound must use <="));
            }
            set(model, col, Some(lo), Some(hi));
            Ok(())
        }
        _ => Err(fail("unrecognized bounds line")),
    }
}
