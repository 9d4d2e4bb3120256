use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use regex::Regex;

use super::{eri_permutations, MolecularIntegrals};
use crate::{Error, Result};

const DUPLICATE_TOL: f64 = 1e-12;

fn err(line: usize, msg: impl Into<String>) -> Error {
    Error::Fcidump { line, msg: msg.into() }
}

struct Header {
    norb: usize,
    nelec: usize,
    ms2: i64,
    /// Number of lines consumed, including the terminator.
    lines: usize,
}

fn is_terminator(line: &str) -> bool {
    let t = line.trim().to_ascii_uppercase();
    t == "/" || t == "&END" || t.ends_with("&END") || t.ends_with('/')
}

fn parse_header(text: &str) -> Result<Header> {
    let mut collected = String::new();
    let mut consumed = None;
    for (i, line) in text.lines().enumerate() {
        if i == 0 && !line.trim_start().to_ascii_uppercase().starts_with("&FCI") {
            return Err(err(1, "expected &FCI namelist"));
        }
        if is_terminator(line) {
            let t = line.trim();
            let body = t
                .strip_suffix("&END")
                .or_else(|| t.strip_suffix("&end"))
                .or_else(|| t.strip_suffix('/'))
                .unwrap_or(t);
            collected.push_str(body);
            consumed = Some(i + 1);
            break;
        }
        collected.push_str(line);
        collected.push(' ');
    }
    let lines = consumed.ok_or_else(|| err(1, "namelist not terminated by &END or /"))?;
    let body = collected.trim_start();
    let body = &body[4.min(body.len())..]; // "&FCI"

    let key_re = Regex::new(r"([A-Za-z_][A-Za-z0-9_]*)\s*=").expect("static regex");
    let keys: Vec<_> = key_re
        .captures_iter(body)
        .map(|c| {
            let m = c.get(0).unwrap();
            (c[1].to_ascii_uppercase(), m.start(), m.end())
        })
        .collect();
    let mut values: HashMap<String, Vec<String>> = HashMap::new();
    for (k, (name, _, end)) in keys.iter().enumerate() {
        let stop = keys.get(k + 1).map_or(body.len(), |next| next.1);
        let raw = &body[*end..stop];
        let toks: Vec<String> = raw
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .map(str::to_string)
            .collect();
        values.insert(name.clone(), toks);
    }

    let scalar = |name: &str| -> Result<Option<i64>> {
        match values.get(name) {
            None => Ok(None),
            Some(v) if v.len() == 1 => v[0]
                .parse::<i64>()
                .map(Some)
                .map_err(|_| err(1, format!("{name} is not an integer: {:?}", v[0]))),
            Some(v) => Err(err(1, format!("{name} expects one value, got {}", v.len()))),
        }
    };
    let norb = scalar("NORB")?.ok_or_else(|| err(1, "missing NORB"))?;
    let nelec = scalar("NELEC")?.ok_or_else(|| err(1, "missing NELEC"))?;
    let ms2 = scalar("MS2")?.unwrap_or(0);
    if norb < 1 {
        return Err(err(1, "NORB must be positive"));
    }
    if nelec < 0 || nelec > 2 * norb {
        return Err(err(1, format!("NELEC {nelec} outside [0, 2*NORB]")));
    }
    // ORBSYM / ISYM are accepted and ignored.
    Ok(Header {
        norb: norb as usize,
        nelec: nelec as usize,
        ms2,
        lines,
    })
}

/// Canonical representative of an integral's permutation class, used to
/// detect conflicting duplicates.
fn canonical(i: usize, j: usize, k: usize, l: usize) -> (usize, usize, usize, usize) {
    if k == 0 && l == 0 {
        return (i.max(j), i.min(j), 0, 0);
    }
    eri_permutations(i, j, k, l).into_iter().max().unwrap()
}

/// Parses an FCIDUMP document. Indices are 1-based; `(pq|rs)` entries are
/// expanded over all eight permutations.
pub fn parse_fcidump(text: &str) -> Result<MolecularIntegrals> {
    let header = parse_header(text)?;
    let mut mi = MolecularIntegrals::zeros(header.norb, header.nelec);
    mi.ms2 = header.ms2;
    let n = header.norb;
    let mut seen: HashMap<(usize, usize, usize, usize), f64> = HashMap::new();

    for (lineno, line) in text.lines().enumerate().skip(header.lines) {
        let lineno = lineno + 1;
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.is_empty() {
            continue;
        }
        if toks.len() != 5 {
            return Err(err(lineno, format!("expected 5 fields, got {}", toks.len())));
        }
        let value: f64 = toks[0]
            .replace(['D', 'd'], "e")
            .parse()
            .map_err(|_| err(lineno, format!("bad value {:?}", toks[0])))?;
        let mut idx = [0usize; 4];
        for (slot, tok) in idx.iter_mut().zip(&toks[1..]) {
            let v: i64 = tok.parse().map_err(|_| err(lineno, format!("bad index {tok:?}")))?;
            if v < 0 || v as usize > n {
                return Err(err(lineno, format!("index {v} out of range [1, {n}]")));
            }
            *slot = v as usize;
        }
        let [i, j, k, l] = idx;

        let key = canonical(i, j, k, l);
        if let Some(prev) = seen.insert(key, value) {
            if (prev - value).abs() > DUPLICATE_TOL {
                return Err(err(
                    lineno,
                    format!("conflicting duplicate entry {i} {j} {k} {l}: {prev} vs {value}"),
                ));
            }
        }

        match (i, j, k, l) {
            (0, 0, 0, 0) => mi.core_energy = value,
            (i, j, 0, 0) if i > 0 && j > 0 => mi.set_h1(i - 1, j - 1, value),
            (_, 0, 0, 0) => {
                // orbital energy line; not needed
            }
            (i, j, k, l) if i > 0 && j > 0 && k > 0 && l > 0 => mi.set_eri(i - 1, j - 1, k - 1, l - 1, value),
            _ => return Err(err(lineno, format!("unsupported index pattern {i} {j} {k} {l}"))),
        }
    }
    Ok(mi)
}

pub fn read_fcidump(path: impl AsRef<Path>) -> Result<MolecularIntegrals> {
    let text = std::fs::read_to_string(path)?;
    parse_fcidump(&text)
}

/// Serializes integrals to FCIDUMP, one line per nonzero permutation class.
/// Values use Rust's shortest round-trip float formatting.
pub fn write_fcidump(mi: &MolecularIntegrals) -> String {
    let n = mi.norb;
    let mut out = String::new();
    let _ = writeln!(out, " &FCI NORB={},NELEC={},MS2={},", n, mi.nelec, mi.ms2);
    let _ = writeln!(out, " &END");
    for p in 0..n {
        for q in 0..=p {
            for r in 0..n {
                for s in 0..=r {
                    if p * (p + 1) / 2 + q < r * (r + 1) / 2 + s {
                        continue;
                    }
                    let v = mi.eri(p, q, r, s);
                    if v != 0.0 {
                        let _ = writeln!(out, "{:e} {} {} {} {}", v, p + 1, q + 1, r + 1, s + 1);
                    }
                }
            }
        }
    }
    for p in 0..n {
        for q in 0..=p {
            let v = mi.h1[(p, q)];
            if v != 0.0 {
                let _ = writeln!(out, "{:e} {} {} 0 0", v, p + 1, q + 1);
            }
        }
    }
    let _ = writeln!(out, "{:e} 0 0 0 0", mi.core_energy);
    out
}
