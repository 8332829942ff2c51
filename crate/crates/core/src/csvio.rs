//! CSV facts in and predicate extensions out.
//!
//! Line `i` with fields `f1,…,fk` becomes `pred(i, f1, …, fk)`. Fields that
//! are canonical integers become integer constants, all others strings.
//! Quoting is not supported: fields containing a double quote are rejected.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use thiserror::Error;

use crate::solver::AnswerSet;
use crate::syntax::{Atom, Term};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CsvError {
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("{path}, line {line}: expected {expected} fields, found {found}")]
    RaggedRows {
        path: String,
        line: u64,
        expected: usize,
        found: usize,
    },
    #[error("{path}, line {line}: quoted fields are not supported: {field}")]
    QuotedField { path: String, line: u64, field: String },
}

fn field_term(field: &str) -> Term {
    match field.parse::<i64>() {
        Ok(i) if i.to_string() == field => Term::Int(i),
        _ => Term::string(field),
    }
}

/// Reads facts from any reader; `label` names the source in errors.
pub fn ingest_reader<R: Read>(predicate: &str, reader: R, label: &str) -> Result<Vec<Atom>, CsvError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .quoting(false)
        .flexible(true)
        .from_reader(reader);
    let mut facts = Vec::new();
    let mut width = None;
    for record in rdr.records() {
        let record = record.map_err(|e| CsvError::Io {
            path: label.to_string(),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(facts.len() as u64 + 1, |p| p.line());
        match width {
            None => width = Some(record.len()),
            Some(w) if w != record.len() => {
                return Err(CsvError::RaggedRows {
                    path: label.to_string(),
                    line,
                    expected: w,
                    found: record.len(),
                })
            }
            Some(_) => {}
        }
        let mut args = vec![Term::Int(line as i64)];
        for field in record.iter() {
            if field.contains('"') {
                return Err(CsvError::QuotedField {
                    path: label.to_string(),
                    line,
                    field: field.to_string(),
                });
            }
            args.push(field_term(field));
        }
        facts.push(Atom::new(predicate, args));
    }
    Ok(facts)
}

pub fn csv_ingest(predicate: &str, path: &Path) -> Result<Vec<Atom>, CsvError> {
    let label = path.display().to_string();
    let file = File::open(path).map_err(|e| CsvError::Io {
        path: label.clone(),
        message: e.to_string(),
    })?;
    ingest_reader(predicate, file, &label)
}

/// The extension of `predicate` as CSV text, rows in term order.
pub fn emit_string(predicate: &str, answer: &AnswerSet) -> String {
    let mut rows: Vec<&Atom> = answer.extension(predicate).collect();
    rows.sort_by(|a, b| a.args.cmp(&b.args));
    let mut out = String::new();
    for atom in rows {
        let fields: Vec<String> = atom.args.iter().map(Term::plain_text).collect();
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

pub fn csv_emit(predicate: &str, answer: &AnswerSet, path: &Path) -> Result<(), CsvError> {
    let io = |e: std::io::Error| CsvError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    };
    let mut file = File::create(path).map_err(io)?;
    file.write_all(emit_string(predicate, answer).as_bytes()).map_err(io)
}
