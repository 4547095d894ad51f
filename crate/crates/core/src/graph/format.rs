//! Adjacency file format.
//!
//! Text form: the first line holds `N`, followed by `N` lines of `N`
//! whitespace-separated entries, each an integer or a rational `p/q`.
//! Blank lines and lines starting with `#` are ignored.
//!
//! JSON form: `{"n": N, "weights": [[...], ...]}` where entries are integers
//! or strings holding `p/q`. Inputs whose first non-blank character is `{`
//! are read as JSON.

use num_rational::Rational64;
use serde_json::Value;

use super::AdjacencyMatrix;
use crate::error::{Error, Result};

fn parse_err(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

fn parse_rational(token: &str) -> std::result::Result<Rational64, String> {
    let (num, den) = match token.split_once('/') {
        Some((p, q)) => (p, q),
        None => (token, "1"),
    };
    let p: i64 = num.parse().map_err(|_| format!("invalid number {token:?}"))?;
    let q: i64 = den.parse().map_err(|_| format!("invalid number {token:?}"))?;
    if q == 0 {
        return Err(format!("zero denominator in {token:?}"));
    }
    Ok(Rational64::new(p, q))
}

/// Tokens of a line with their 1-based column.
fn tokens(line: &str) -> impl Iterator<Item = (usize, &str)> {
    line.split_whitespace().map(move |tok| {
        let offset = tok.as_ptr() as usize - line.as_ptr() as usize;
        (line[..offset].chars().count() + 1, tok)
    })
}

/// Reads either the text or JSON adjacency format.
pub fn parse_adjacency(input: &str) -> Result<AdjacencyMatrix> {
    if input.trim_start().starts_with('{') {
        parse_json(input)
    } else {
        parse_text(input)
    }
}

fn parse_text(input: &str) -> Result<AdjacencyMatrix> {
    let mut lines = input.lines().enumerate().map(|(i, l)| (i + 1, l)).filter(|(_, l)| {
        let t = l.trim();
        !t.is_empty() && !t.starts_with('#')
    });
    let (header_no, header) = lines
        .next()
        .ok_or_else(|| parse_err(1, 1, "empty input: expected the number of vertices"))?;
    let mut header_tokens = tokens(header);
    let (col, tok) = header_tokens.next().expect("non-blank line has a token");
    let n: usize = tok
        .parse()
        .map_err(|_| parse_err(header_no, col, format!("invalid vertex count {tok:?}")))?;
    if let Some((col, extra)) = header_tokens.next() {
        return Err(parse_err(
            header_no,
            col,
            format!("unexpected token {extra:?} after vertex count"),
        ));
    }
    if n == 0 {
        return Err(parse_err(header_no, col, "vertex count must be positive"));
    }
    let mut entries = Vec::with_capacity(n * n);
    let mut last_line = header_no;
    for row in 0..n {
        let (line_no, line) = lines.next().ok_or_else(|| {
            parse_err(
                last_line + 1,
                1,
                format!("truncated input: expected {n} rows, found {row}"),
            )
        })?;
        last_line = line_no;
        let mut count = 0;
        for (col, tok) in tokens(line) {
            if count == n {
                return Err(parse_err(
                    line_no,
                    col,
                    format!("row {} has more than {n} entries", row + 1),
                ));
            }
            entries.push(parse_rational(tok).map_err(|m| parse_err(line_no, col, m))?);
            count += 1;
        }
        if count < n {
            return Err(parse_err(
                line_no,
                line.chars().count() + 1,
                format!("row {} has {count} entries, expected {n}", row + 1),
            ));
        }
    }
    if let Some((line_no, line)) = lines.next() {
        let col = tokens(line).next().map_or(1, |(c, _)| c);
        return Err(parse_err(line_no, col, format!("unexpected content after {n} rows")));
    }
    AdjacencyMatrix::new(n, entries)
}

fn parse_json(input: &str) -> Result<AdjacencyMatrix> {
    let value: Value = serde_json::from_str(input).map_err(|e| parse_err(e.line(), e.column(), e.to_string()))?;
    let json_err = |m: String| parse_err(0, 0, m);
    let n = value
        .get("n")
        .and_then(Value::as_u64)
        .ok_or_else(|| json_err("missing or invalid \"n\"".into()))? as usize;
    let rows = value
        .get("weights")
        .and_then(Value::as_array)
        .ok_or_else(|| json_err("missing or invalid \"weights\"".into()))?;
    if rows.len() != n {
        return Err(json_err(format!("\"weights\" has {} rows, expected {n}", rows.len())));
    }
    let mut entries = Vec::with_capacity(n * n);
    for (i, row) in rows.iter().enumerate() {
        let row = row
            .as_array()
            .filter(|r| r.len() == n)
            .ok_or_else(|| json_err(format!("row {} must be an array of {n} entries", i + 1)))?;
        for (j, v) in row.iter().enumerate() {
            let entry = match v {
                Value::Number(num) => num
                    .as_i64()
                    .map(Rational64::from_integer)
                    .ok_or_else(|| format!("entry ({}, {}) is not an integer", i + 1, j + 1)),
                Value::String(s) => parse_rational(s.trim()),
                _ => Err(format!(
                    "entry ({}, {}) must be a number or a \"p/q\" string",
                    i + 1,
                    j + 1
                )),
            };
            entries.push(entry.map_err(json_err)?);
        }
    }
    AdjacencyMatrix::new(n, entries)
}

fn format_entry(e: &Rational64) -> String {
    if e.is_integer() {
        e.numer().to_string()
    } else {
        format!("{}/{}", e.numer(), e.denom())
    }
}

/// Text form, one row per line, terminated by a newline.
pub fn to_text(adjacency: &AdjacencyMatrix) -> String {
    let n = adjacency.n_vertices();
    let mut out = format!("{n}\n");
    for row in adjacency.entries().chunks(n) {
        let line: Vec<String> = row.iter().map(format_entry).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

/// JSON form; integer entries are numbers, other rationals `"p/q"` strings.
pub fn to_json(adjacency: &AdjacencyMatrix) -> Value {
    let n = adjacency.n_vertices();
    let weights: Vec<Value> = adjacency
        .entries()
        .chunks(n)
        .map(|row| {
            Value::Array(
                row.iter()
                    .map(|e| {
                        if e.is_integer() {
                            Value::from(*e.numer())
                        } else {
                            Value::from(format_entry(e))
                        }
                    })
                    .collect(),
            )
        })
        .collect();
    serde_json::json!({ "n": n, "weights": weights })
}
