//! MPS and LP writers and an MPS reader.
//!
//! Names are mangled by replacing `[` and `]` with `(` and `)`, which most
//! readers accept and which is undone on reading. Numbers use the shortest
//! representation that round-trips exactly, so output is deterministic.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use thiserror::Error;

use super::{Constraint, Formulation, MipModel, Sense, VarId, VarKind};

pub const MAX_NAME_LEN: usize = 255;
const OBJ_ROW: &str = "OBJ";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExportError {
    #[error("name {0} collides with another name after mangling")]
    NameCollision(String),
    #[error("name {0} is longer than 255 characters")]
    NameTooLong(String),
    #[error("name {0:?} contains whitespace or is empty")]
    BadName(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MpsReadError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
}

/// File-safe form of a model name.
pub fn mangle(name: &str) -> String {
    name.replace('[', "(").replace(']', ")")
}

fn demangle(name: &str) -> String {
    name.replace('(', "[").replace(')', "]")
}

fn check_names(model: &MipModel) -> Result<(Vec<String>, Vec<String>), ExportError> {
    let check = |names: &mut BTreeSet<String>, raw: &str| -> Result<String, ExportError> {
        if raw.is_empty() || raw.chars().any(char::is_whitespace) {
            return Err(ExportError::BadName(raw.to_string()));
        }
        let m = mangle(raw);
        if m.len() > MAX_NAME_LEN {
            return Err(ExportError::NameTooLong(raw.to_string()));
        }
        if !names.insert(m.clone()) {
            return Err(ExportError::NameCollision(raw.to_string()));
        }
        Ok(m)
    };
    let mut col_names = BTreeSet::new();
    let cols = model
        .variables
        .iter()
        .map(|v| check(&mut col_names, &v.name))
        .collect::<Result<Vec<_>, _>>()?;
    let mut row_names = BTreeSet::from([OBJ_ROW.to_string()]);
    let rows = model
        .constraints
        .iter()
        .map(|c| check(&mut row_names, &c.name))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((cols, rows))
}

fn num(v: f64) -> String {
    format!("{v}")
}

/// Writes a fixed-field MPS file. Binaries are declared with `BV` bounds.
pub fn export_mps(model: &MipModel) -> Result<Vec<u8>, ExportError> {
    let (cols, rows) = check_names(model)?;
    let mut by_col: Vec<Vec<(usize, f64)>> = vec![Vec::new(); model.variables.len()];
    let mut obj = vec![0.0; model.variables.len()];
    for &(v, c) in &model.objective {
        obj[v.0] = c;
    }
    for (r, c) in model.constraints.iter().enumerate() {
        for &(v, k) in &c.terms {
            by_col[v.0].push((r, k));
        }
    }
    let mut s = String::new();
    writeln!(s, "NAME          {}", mangle(&model.name).replace(char::is_whitespace, "_")).unwrap();
    s.push_str("ROWS\n");
    writeln!(s, " N  {OBJ_ROW}").unwrap();
    for (c, name) in model.constraints.iter().zip(&rows) {
        let t = match c.sense {
            Sense::Le => 'L',
            Sense::Ge => 'G',
            Sense::Eq => 'E',
        };
        writeln!(s, " {t}  {name}").unwrap();
    }
    s.push_str("COLUMNS\n");
    for (j, name) in cols.iter().enumerate() {
        let mut entries: Vec<(&str, f64)> = Vec::new();
        if obj[j] != 0.0 {
            entries.push((OBJ_ROW, obj[j]));
        }
        entries.extend(by_col[j].iter().map(|&(r, k)| (rows[r].as_str(), k)));
        if entries.is_empty() {
            entries.push((OBJ_ROW, 0.0));
        }
        for (row, k) in entries {
            writeln!(s, "    {name:<8}  {row:<8}  {:>12}", num(k)).unwrap();
        }
    }
    s.push_str("RHS\n");
    for (c, name) in model.constraints.iter().zip(&rows) {
        if c.rhs != 0.0 {
            writeln!(s, "    RHS       {name:<8}  {:>12}", num(c.rhs)).unwrap();
        }
    }
    s.push_str("BOUNDS\n");
    for (v, name) in model.variables.iter().zip(&cols) {
        match v.kind {
            VarKind::Binary => writeln!(s, " BV BND       {name}").unwrap(),
            VarKind::Continuous => {
                if v.lower == v.upper {
                    writeln!(s, " FX BND       {name:<8}  {:>12}", num(v.lower)).unwrap();
                    continue;
                }
                if v.lower == f64::NEG_INFINITY {
                    writeln!(s, " MI BND       {name}").unwrap();
                } else if v.lower != 0.0 {
                    writeln!(s, " LO BND       {name:<8}  {:>12}", num(v.lower)).unwrap();
                }
                if v.upper.is_finite() {
                    writeln!(s, " UP BND       {name:<8}  {:>12}", num(v.upper)).unwrap();
                }
            }
        }
    }
    s.push_str("ENDATA\n");
    Ok(s.into_bytes())
}

fn lp_terms(out: &mut String, terms: &[(VarId, f64)], cols: &[String]) {
    if terms.is_empty() {
        out.push_str(" 0 ");
        out.push_str(&cols[0]);
        return;
    }
    for (n, &(v, k)) in terms.iter().enumerate() {
        if n > 0 && n % 6 == 0 {
            out.push_str("\n   ");
        }
        let sign = if k < 0.0 { '-' } else { '+' };
        write!(out, " {sign} {} {}", num(k.abs()), cols[v.0]).unwrap();
    }
}

/// Writes a CPLEX-style LP file.
pub fn export_lp(model: &MipModel) -> Result<Vec<u8>, ExportError> {
    let (cols, rows) = check_names(model)?;
    let mut s = String::new();
    writeln!(s, "\\ {}", model.name).unwrap();
    s.push_str("Minimize\n obj:");
    if model.variables.is_empty() {
        s.push_str(" 0");
    } else {
        lp_terms(&mut s, &model.objective, &cols);
    }
    s.push_str("\nSubject To\n");
    for (c, name) in model.constraints.iter().zip(&rows) {
        if c.terms.is_empty() && model.variables.is_empty() {
            continue;
        }
        write!(s, " {name}:").unwrap();
        lp_terms(&mut s, &c.terms, &cols);
        writeln!(s, " {} {}", c.sense, num(c.rhs)).unwrap();
    }
    s.push_str("Bounds\n");
    for (v, name) in model.variables.iter().zip(&cols) {
        if v.kind == VarKind::Continuous {
            if v.lower == v.upper {
                writeln!(s, " {name} = {}", num(v.lower)).unwrap();
            } else if v.upper.is_finite() {
                writeln!(s, " {} <= {name} <= {}", num(v.lower), num(v.upper)).unwrap();
            } else {
                writeln!(s, " {name} >= {}", num(v.lower)).unwrap();
            }
        }
    }
    let bins: Vec<&String> = model
        .variables
        .iter()
        .zip(&cols)
        .filter(|(v, _)| v.kind == VarKind::Binary)
        .map(|(_, n)| n)
        .collect();
    if !bins.is_empty() {
        s.push_str("Binary\n");
        for chunk in bins.chunks(8) {
            let names: Vec<&str> = chunk.iter().map(|n| n.as_str()).collect();
            writeln!(s, " {}", names.join(" ")).unwrap();
        }
    }
    s.push_str("End\n");
    Ok(s.into_bytes())
}

#[derive(PartialEq)]
enum Section {
    None,
    Rows,
    Columns,
    Rhs,
    Bounds,
    Ranges,
    End,
}

/// Reads an MPS file with whitespace-separated fields, as written by
/// [`export_mps`]. Names are demangled; the formulation is `Imported`.
pub fn read_mps(text: &str) -> Result<MipModel, MpsReadError> {
    let mut model = MipModel::new("", Formulation::Imported);
    let mut section = Section::None;
    let mut obj_row: Option<String> = None;
    let mut row_index: BTreeMap<String, usize> = BTreeMap::new();
    let mut rows: Vec<Constraint> = Vec::new();
    let mut obj: Vec<(VarId, f64)> = Vec::new();
    let mut bin_marker = false;
    let mut explicit_upper: BTreeSet<usize> = BTreeSet::new();
    for (ln, raw) in text.lines().enumerate() {
        let line = ln + 1;
        let err = |message: &str| MpsReadError::Syntax { line, message: message.to_string() };
        if raw.trim().is_empty() || raw.starts_with('*') {
            continue;
        }
        let fields: Vec<&str> = raw.split_whitespace().collect();
        if !raw.starts_with(' ') && !raw.starts_with('\t') {
            section = match fields[0] {
                "NAME" => {
                    model.name = fields.get(1).map(|s| demangle(s)).unwrap_or_default();
                    Section::None
                }
                "ROWS" => Section::Rows,
                "COLUMNS" => Section::Columns,
                "RHS" => Section::Rhs,
                "BOUNDS" => Section::Bounds,
                "RANGES" => Section::Ranges,
                "ENDATA" => Section::End,
                other => return Err(err(&format!("unknown section {other}"))),
            };
            continue;
        }
        let parse_num = |s: &str| s.parse::<f64>().map_err(|_| err(&format!("bad number {s}")));
        match section {
            Section::Rows => {
                let [kind, name] = fields[..] else { return Err(err("expected row type and name")) };
                let sense = match kind {
                    "N" => {
                        if obj_row.is_none() {
                            obj_row = Some(name.to_string());
                        }
                        continue;
                    }
                    "L" => Sense::Le,
                    "G" => Sense::Ge,
                    "E" => Sense::Eq,
                    _ => return Err(err("bad row type")),
                };
                if row_index.insert(name.to_string(), rows.len()).is_some() {
                    return Err(err("duplicate row"));
                }
                rows.push(Constraint { name: demangle(name), terms: Vec::new(), sense, rhs: 0.0 });
            }
            Section::Columns => {
                if fields.get(1) == Some(&"'MARKER'") {
                    bin_marker = fields.get(2) == Some(&"'INTORG'");
                    continue;
                }
                if fields.len() != 3 && fields.len() != 5 {
                    return Err(err("expected column, row, value [row, value]"));
                }
                let col = demangle(fields[0]);
                let id = match model.var(&col) {
                    Some(id) => id,
                    None => {
                        let kind = if bin_marker { VarKind::Binary } else { VarKind::Continuous };
                        model.add_var(col, kind, 0.0, f64::INFINITY)
                    }
                };
                for pair in fields[1..].chunks(2) {
                    let k = parse_num(pair[1])?;
                    if Some(pair[0]) == obj_row.as_deref() {
                        obj.push((id, k));
                    } else {
                        let r = *row_index.get(pair[0]).ok_or_else(|| err("unknown row"))?;
                        rows[r].terms.push((id, k));
                    }
                }
            }
            Section::Rhs => {
                if fields.len() != 3 && fields.len() != 5 {
                    return Err(err("expected set, row, value [row, value]"));
                }
                for pair in fields[1..].chunks(2) {
                    let k = parse_num(pair[1])?;
                    if Some(pair[0]) == obj_row.as_deref() {
                        continue;
                    }
                    let r = *row_index.get(pair[0]).ok_or_else(|| err("unknown row"))?;
                    rows[r].rhs = k;
                }
            }
            Section::Bounds => {
                if fields.len() < 3 {
                    return Err(err("expected bound type, set, column"));
                }
                let col = demangle(fields[2]);
                let id = model.var(&col).ok_or_else(|| err("bound on unknown column"))?;
                let value = fields.get(3).map(|s| parse_num(s)).transpose()?;
                let need = || value.ok_or_else(|| err("bound needs a value"));
                let var = &mut model.variables[id.0];
                match fields[0] {
                    "BV" => {
                        var.kind = VarKind::Binary;
                        var.lower = 0.0;
                        var.upper = 1.0;
                        explicit_upper.insert(id.0);
                    }
                    "UP" => {
                        var.upper = need()?;
                        explicit_upper.insert(id.0);
                    }
                    "LO" => var.lower = need()?,
                    "FX" => {
                        var.lower = need()?;
                        var.upper = var.lower;
                        explicit_upper.insert(id.0);
                    }
                    "MI" => var.lower = f64::NEG_INFINITY,
                    "PL" => var.upper = f64::INFINITY,
                    "FR" => {
                        var.lower = f64::NEG_INFINITY;
                        var.upper = f64::INFINITY;
                    }
                    other => return Err(err(&format!("unsupported bound type {other}"))),
                }
            }
            Section::Ranges => return Err(err("RANGES are not supported")),
            Section::None | Section::End => return Err(err("data outside a section")),
        }
    }
    if section != Section::End {
        return Err(MpsReadError::Syntax {
            line: text.lines().count(),
            message: "missing ENDATA".into(),
        });
    }
    for (i, v) in model.variables.iter_mut().enumerate() {
        if v.kind == VarKind::Binary && !explicit_upper.contains(&i) {
            v.upper = 1.0;
        }
    }
    for r in rows {
        model.add_row(r.name, r.terms, r.sense, r.rhs);
    }
    model.set_objective(obj);
    Ok(model)
}
