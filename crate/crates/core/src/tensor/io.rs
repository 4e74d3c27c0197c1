//! Text serialization: a header line `N m marginals`, then every entry in
//! row-major order (root included) as a decimal or `num/den`. Lines starting
//! with `#` are comments.

use std::fmt::Write as _;

use num_rational::BigRational;

use super::{CorrelationTensor, DeterministicStrategy, RationalTensor, Scenario, SignVector};
use crate::error::{Error, Result};
use crate::rational::{format_rational, parse_rational_at, to_f64};

fn parse_bool(s: &str, line: usize) -> Result<bool> {
    match s {
        "true" | "1" => Ok(true),
        "false" | "0" => Ok(false),
        _ => Err(Error::parse(
            line,
            format!("expected true/false, got {s:?}"),
        )),
    }
}

/// Header plus `(line, token)` pairs for every entry.
fn tokens(text: &str) -> Result<(Scenario, Vec<(usize, &str)>)> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (hline, header) = lines
        .next()
        .ok_or_else(|| Error::parse(1, "missing header `N m marginals`"))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 3 {
        return Err(Error::parse(hline, "header must be `N m marginals`"));
    }
    let n = fields[0]
        .parse()
        .map_err(|_| Error::parse(hline, "party count is not an integer"))?;
    let m = fields[1]
        .parse()
        .map_err(|_| Error::parse(hline, "input count is not an integer"))?;
    let sc = Scenario::new(n, m, parse_bool(fields[2], hline)?)?;
    let toks: Vec<(usize, &str)> = lines
        .flat_map(|(i, l)| l.split_whitespace().map(move |t| (i, t)))
        .collect();
    if toks.len() != sc.len() {
        return Err(Error::parse(
            toks.last().map_or(hline, |t| t.0),
            format!("expected {} entries, found {}", sc.len(), toks.len()),
        ));
    }
    Ok((sc, toks))
}

pub fn read_tensor(text: &str) -> Result<CorrelationTensor> {
    let (sc, toks) = tokens(text)?;
    let data = toks
        .iter()
        .map(|&(line, t)| match t.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => parse_rational_at(t, line).map(|r| to_f64(&r)),
        })
        .collect::<Result<Vec<_>>>()?;
    CorrelationTensor::from_entries(sc, data)
}

pub fn read_rational_tensor(text: &str) -> Result<RationalTensor> {
    let (sc, toks) = tokens(text)?;
    let data = toks
        .iter()
        .map(|&(line, t)| parse_rational_at(t, line))
        .collect::<Result<Vec<BigRational>>>()?;
    RationalTensor::from_entries(sc, data)
}

fn write_rows<T>(sc: &Scenario, data: &[T], fmt: impl Fn(&T) -> String) -> String {
    let mut out = format!("{sc}\n");
    for row in data.chunks(sc.side()) {
        let cells: Vec<String> = row.iter().map(&fmt).collect();
        let _ = writeln!(out, "{}", cells.join(" "));
    }
    out
}

/// Floats are printed in shortest round-trip form.
pub fn write_tensor(t: &CorrelationTensor) -> String {
    write_rows(t.scenario(), t.entries(), |v| format!("{v:?}"))
}

pub fn write_rational_tensor(t: &RationalTensor) -> String {
    write_rows(t.scenario(), t.entries(), format_rational)
}

pub fn format_strategy(s: &DeterministicStrategy) -> String {
    s.sign_string()
}

/// Parses `++-|+-+`-style strategies.
pub fn parse_strategy(s: &str) -> Result<DeterministicStrategy> {
    let parties = s
        .trim()
        .split('|')
        .map(|p| {
            let signs = p
                .chars()
                .map(|c| match c {
                    '+' => Ok(1),
                    '-' => Ok(-1),
                    _ => Err(Error::parse(
                        0,
                        format!("bad sign character {c:?} in {s:?}"),
                    )),
                })
                .collect::<Result<Vec<i8>>>()?;
            SignVector::from_signs(&signs)
        })
        .collect::<Result<Vec<_>>>()?;
    DeterministicStrategy::new(parties)
}
