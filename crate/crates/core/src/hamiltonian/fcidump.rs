//! FCIDUMP reader and writer.
//!
//! Header: a `&FCI` namelist with `NORB`, `NELEC` and optionally `MS2`,
//! closed by `&END` or `/`. Body: `value i j k l` with 1-based indices,
//! `i j 0 0` for one-electron integrals, `0 0 0 0` for the nuclear
//! repulsion, `i 0 0 0` (orbital energies) ignored, otherwise `(ij|kl)`.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use super::MolecularIntegrals;
use crate::error::{Error, Result};

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn parse_value(tok: &str, line: usize) -> Result<f64> {
    tok.replace(['D', 'd'], "E")
        .parse::<f64>()
        .map_err(|_| parse_err(line, format!("non-numeric token '{tok}'")))
}

fn parse_index(tok: &str, line: usize) -> Result<usize> {
    tok.parse::<usize>()
        .map_err(|_| parse_err(line, format!("invalid index '{tok}'")))
}

/// Key/value pairs of the namelist header; returns them with the line after `&END`.
fn parse_header<'a>(
    lines: &mut impl Iterator<Item = (usize, &'a str)>,
) -> Result<(HashMap<String, Vec<String>>, usize)> {
    let mut fields: HashMap<String, Vec<String>> = HashMap::new();
    let mut current: Option<String> = None;
    let mut started = false;
    let mut last_line = 0;
    for (no, raw) in lines {
        last_line = no;
        let mut text = raw.trim().to_string();
        if !started {
            if text.is_empty() {
                continue;
            }
            let upper = text.to_ascii_uppercase();
            if !upper.starts_with("&FCI") {
                return Err(parse_err(no, "expected '&FCI' header"));
            }
            text = text[4..].to_string();
            started = true;
        }
        let upper = text.to_ascii_uppercase();
        let (body, done) = if let Some(pos) = upper.find("&END") {
            (&text[..pos], true)
        } else if upper.trim() == "/" || upper.trim_end().ends_with('/') {
            let pos = text.rfind('/').unwrap_or(text.len());
            (&text[..pos], true)
        } else {
            (text.as_str(), false)
        };
        for tok in body
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
        {
            if let Some((k, v)) = tok.split_once('=') {
                let key = k.trim().to_ascii_uppercase();
                let entry = fields.entry(key.clone()).or_default();
                if !v.trim().is_empty() {
                    entry.push(v.trim().to_string());
                }
                current = Some(key);
            } else if let Some(key) = &current {
                fields.get_mut(key).expect("key inserted").push(tok.to_string());
            } else {
                return Err(parse_err(no, format!("unexpected header token '{tok}'")));
            }
        }
        if done {
            return Ok((fields, no));
        }
    }
    Err(parse_err(last_line, "header not terminated by &END"))
}

fn header_usize(fields: &HashMap<String, Vec<String>>, key: &str, line: usize) -> Result<usize> {
    let v = fields
        .get(key)
        .and_then(|v| v.first())
        .ok_or_else(|| parse_err(line, format!("missing header field {key}")))?;
    v.parse::<usize>()
        .map_err(|_| parse_err(line, format!("invalid {key} value '{v}'")))
}

pub fn parse_fcidump(text: &str) -> Result<MolecularIntegrals> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (fields, end_line) = parse_header(&mut lines)?;
    let n_orb = header_usize(&fields, "NORB", end_line)?;
    let n_elec = header_usize(&fields, "NELEC", end_line)?;
    let ms2 = match fields.get("MS2").and_then(|v| v.first()) {
        Some(v) => v
            .parse::<i64>()
            .map_err(|_| parse_err(end_line, format!("invalid MS2 value '{v}'")))?,
        None => 0,
    };

    let mut ints = MolecularIntegrals::new(n_orb, n_elec);
    ints.ms2 = ms2;
    for (no, raw) in lines {
        let toks: Vec<&str> = raw.split_whitespace().collect();
        if toks.is_empty() {
            continue;
        }
        if toks.len() != 5 {
            return Err(parse_err(no, format!("expected 5 fields, found {}", toks.len())));
        }
        let v = parse_value(toks[0], no)?;
        let idx = [
            parse_index(toks[1], no)?,
            parse_index(toks[2], no)?,
            parse_index(toks[3], no)?,
            parse_index(toks[4], no)?,
        ];
        if let Some(&bad) = idx.iter().find(|&&i| i > n_orb) {
            return Err(parse_err(no, format!("index {bad} exceeds NORB={n_orb}")));
        }
        match idx {
            [0, 0, 0, 0] => ints.e_nucl = v,
            [i, 0, 0, 0] if i > 0 => {}
            [i, j, 0, 0] if i > 0 && j > 0 => ints.set_h(i - 1, j - 1, v),
            [i, j, k, l] if i > 0 && j > 0 && k > 0 && l > 0 => ints.set_eri(i - 1, j - 1, k - 1, l - 1, v),
            _ => return Err(parse_err(no, format!("unsupported index pattern {idx:?}"))),
        }
    }
    Ok(ints)
}

pub fn read_fcidump(path: impl AsRef<Path>) -> Result<MolecularIntegrals> {
    let text = std::fs::read_to_string(path)?;
    parse_fcidump(&text)
}

/// Writes the unique non-zero integrals; `parse_fcidump` restores them exactly.
pub fn write_fcidump(ints: &MolecularIntegrals) -> String {
    let n = ints.n_orb;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "&FCI NORB={},NELEC={},MS2={},\n ORBSYM={}\n ISYM=1,\n&END",
        n,
        ints.n_elec,
        ints.ms2,
        "1,".repeat(n)
    );
    for p in 0..n {
        for q in 0..=p {
            for r in 0..n {
                for s in 0..=r {
                    if p * (p + 1) / 2 + q < r * (r + 1) / 2 + s {
                        continue;
                    }
                    let v = ints.eri(p, q, r, s);
                    if v != 0.0 {
                        let _ = writeln!(out, "{:.17e} {} {} {} {}", v, p + 1, q + 1, r + 1, s + 1);
                    }
                }
            }
        }
    }
    for p in 0..n {
        for q in 0..=p {
            let v = ints.h(p, q);
            if v != 0.0 {
                let _ = writeln!(out, "{:.17e} {} {} 0 0", v, p + 1, q + 1);
            }
        }
    }
    let _ = writeln!(out, "{:.17e} 0 0 0 0", ints.e_nucl);
    out
}
