//! Plain-text tables for pmfs, channels, joint pmfs, emulator tables and codebooks.
//!
//! Lines starting with `#` and blank lines are ignored. Numbers are written in
//! the shortest form that reads back to the same `f64`.
//!
//! ```text
//! # pmf: symbols, then masses
//! a b c
//! 0.2 0.5 0.3
//!
//! # channel or joint of (X, Y): a corner token and the column symbols,
//! # then one row per row symbol
//! x\y 0 1
//! 0 0.45 0.05
//! 1 0.05 0.45
//! ```

use std::fmt::Write as _;

use nusc_core::codebook::Codebook;
use nusc_core::seed::EmulatorRow;
use nusc_core::{Alphabet, Channel, JointPmf, Pmf, Sym};

use crate::error::{HarnessError, Result};

fn data_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
        .map(|(i, l)| (i, l.split_whitespace().collect()))
}

fn bad(line: usize, message: impl Into<String>) -> HarnessError {
    HarnessError::Format { line, message: message.into() }
}

fn number(line: usize, tok: &str) -> Result<f64> {
    tok.parse().map_err(|_| bad(line, format!("not a number: {tok:?}")))
}

fn alphabet(line: usize, symbols: &[&str]) -> Result<Alphabet> {
    Alphabet::new(symbols.iter().copied()).map_err(|e| bad(line, e.to_string()))
}

fn join_numbers(out: &mut String, values: impl IntoIterator<Item = f64>) {
    for (i, v) in values.into_iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        write!(out, "{v}").unwrap();
    }
}

pub fn write_pmf(p: &Pmf) -> String {
    let mut s = p.alphabet().symbols().join(" ");
    s.push('\n');
    join_numbers(&mut s, p.mass().iter().copied());
    s.push('\n');
    s
}

pub fn read_pmf(text: &str) -> Result<Pmf> {
    let mut lines = data_lines(text);
    let (l1, symbols) = lines.next().ok_or_else(|| bad(1, "missing symbol line"))?;
    let (l2, masses) = lines.next().ok_or_else(|| bad(l1, "missing mass line"))?;
    if let Some((l, _)) = lines.next() {
        return Err(bad(l, "unexpected extra line"));
    }
    let masses = masses.iter().map(|t| number(l2, t)).collect::<Result<Vec<_>>>()?;
    Pmf::new(alphabet(l1, &symbols)?, masses).map_err(|e| bad(l2, e.to_string()))
}

/// Rows, row symbols and column symbols of a matrix table.
fn read_matrix(text: &str) -> Result<(Alphabet, Alphabet, Vec<Vec<f64>>, usize)> {
    let mut lines = data_lines(text);
    let (l1, header) = lines.next().ok_or_else(|| bad(1, "missing header line"))?;
    if header.len() < 2 {
        return Err(bad(l1, "header needs a corner token and at least one column symbol"));
    }
    let cols = alphabet(l1, &header[1..])?;
    let mut row_symbols = Vec::new();
    let mut rows = Vec::new();
    let mut last = l1;
    for (l, toks) in lines {
        if toks.len() != cols.len() + 1 {
            return Err(bad(l, format!("expected {} fields, found {}", cols.len() + 1, toks.len())));
        }
        row_symbols.push(toks[0]);
        rows.push(toks[1..].iter().map(|t| number(l, t)).collect::<Result<Vec<_>>>()?);
        last = l;
    }
    if rows.is_empty() {
        return Err(bad(l1, "table has no rows"));
    }
    Ok((alphabet(l1 + 1, &row_symbols)?, cols, rows, last))
}

fn write_matrix(corner: &str, rows: &Alphabet, cols: &Alphabet, value: impl Fn(usize, usize) -> f64) -> String {
    let mut s = format!("{corner} {}\n", cols.symbols().join(" "));
    for r in 0..rows.len() {
        s.push_str(rows.symbol(r));
        s.push(' ');
        join_numbers(&mut s, (0..cols.len()).map(|c| value(r, c)));
        s.push('\n');
    }
    s
}

pub fn write_channel(ch: &Channel) -> String {
    write_matrix("in\\out", ch.input(), ch.output(), |r, c| ch.prob(r, c))
}

pub fn read_channel(text: &str) -> Result<Channel> {
    let (input, output, rows, last) = read_matrix(text)?;
    Channel::new(input, output, rows).map_err(|e| bad(last, e.to_string()))
}

/// Writes a joint of two variables as an `X × Y` matrix.
pub fn write_joint(j: &JointPmf) -> Result<String> {
    if j.arity() != 2 {
        return Err(HarnessError::config("source", "only joints of two variables have a table form"));
    }
    Ok(write_matrix("x\\y", j.alphabet(0), j.alphabet(1), |r, c| j.prob(&[r, c])))
}

pub fn read_joint(text: &str) -> Result<JointPmf> {
    let (x, y, rows, last) = read_matrix(text)?;
    JointPmf::new(vec![x, y], rows.concat()).map_err(|e| bad(last, e.to_string()))
}

/// One `condition seed output` line per emulator table entry.
pub fn write_emulator_rows(rows: &[EmulatorRow]) -> String {
    let mut s = String::from("condition seed output\n");
    for r in rows {
        writeln!(s, "{} {} {}", r.condition, r.seed, r.output).unwrap();
    }
    s
}

pub fn read_emulator_rows(text: &str) -> Result<Vec<EmulatorRow>> {
    let mut lines = data_lines(text);
    match lines.next() {
        Some((_, h)) if h == ["condition", "seed", "output"] => {}
        Some((l, _)) => return Err(bad(l, "expected header `condition seed output`")),
        None => return Err(bad(1, "missing header")),
    }
    lines
        .map(|(l, t)| {
            let int = |s: &str| s.parse::<u64>().map_err(|_| bad(l, format!("not an integer: {s:?}")));
            match t.as_slice() {
                [c, s, o] => Ok(EmulatorRow { condition: int(c)?, seed: int(s)? as usize, output: int(o)? as usize }),
                _ => Err(bad(l, "expected three fields")),
            }
        })
        .collect()
}

/// One `row col symbols...` line per codeword, symbols by label.
pub fn write_codebook(cb: &Codebook) -> String {
    let mut s = String::new();
    for r in 0..cb.rows() {
        for c in 0..cb.cols() {
            write!(s, "{r} {c}").unwrap();
            for &sym in cb.word(r, c) {
                write!(s, " {}", cb.alphabet().symbol(sym as usize)).unwrap();
            }
            s.push('\n');
        }
    }
    s
}

pub fn read_codebook(alphabet: &Alphabet, text: &str) -> Result<Codebook> {
    let mut entries = Vec::new();
    let mut n = None;
    let mut last = 1;
    for (l, t) in data_lines(text) {
        if t.len() < 3 {
            return Err(bad(l, "expected row, column and at least one symbol"));
        }
        let int = |s: &str| s.parse::<usize>().map_err(|_| bad(l, format!("not an index: {s:?}")));
        let word = t[2..]
            .iter()
            .map(|s| alphabet.index_of(s).map(|i| i as Sym).ok_or_else(|| bad(l, format!("unknown symbol {s:?}"))))
            .collect::<Result<Vec<_>>>()?;
        if *n.get_or_insert(word.len()) != word.len() {
            return Err(bad(l, "codewords have different lengths"));
        }
        entries.push((int(t[0])?, int(t[1])?, word));
        last = l;
    }
    let n = n.ok_or_else(|| bad(1, "codebook is empty"))?;
    let rows = entries.iter().map(|e| e.0).max().unwrap() + 1;
    let cols = entries.iter().map(|e| e.1).max().unwrap() + 1;
    if entries.len() != rows * cols {
        return Err(bad(last, format!("expected {} codewords for a {rows}×{cols} table", rows * cols)));
    }
    let mut words = vec![0 as Sym; rows * cols * n];
    let mut seen = vec![false; rows * cols];
    for (r, c, w) in entries {
        let at = r * cols + c;
        if std::mem::replace(&mut seen[at], true) {
            return Err(bad(last, format!("codeword ({r}, {c}) appears twice")));
        }
        words[at * n..(at + 1) * n].copy_from_slice(&w);
    }
    Codebook::from_words(alphabet.clone(), n, rows, cols, words).map_err(|e| bad(last, e.to_string()))
}
