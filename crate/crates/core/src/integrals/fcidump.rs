//! FCIDUMP text files: a `&FCI ... &END` namelist header followed by
//! `value i j k l` lines with 1-based chemists'-notation indices. One-body
//! terms have `k = l = 0`, the core energy has all four indices zero.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DMatrix;

use super::MolecularProblem;
use crate::error::{Error, Result};

pub fn load_fcidump(path: impl AsRef<Path>) -> Result<MolecularProblem> {
    parse_fcidump(&std::fs::read_to_string(path)?)
}

pub fn parse_fcidump(text: &str) -> Result<MolecularProblem> {
    let mut header = String::new();
    let mut body_start = None;
    let mut lines = text.lines().enumerate();
    for (i, line) in lines.by_ref() {
        header.push_str(line);
        header.push(' ');
        let t = line.trim().to_ascii_uppercase();
        if t.ends_with("&END") || t == "/" || t.ends_with('/') {
            body_start = Some(i + 1);
            break;
        }
    }
    if body_start.is_none() {
        return Err(Error::FcidumpParse {
            line: text.lines().count().max(1),
            reason: "unterminated header (missing &END)".into(),
        });
    }

    let norb = header_value(&header, "NORB").ok_or_else(|| Error::FcidumpParse {
        line: 1,
        reason: "NORB missing from header".into(),
    })?;
    let nelec = header_value(&header, "NELEC").ok_or_else(|| Error::FcidumpParse {
        line: 1,
        reason: "NELEC missing from header".into(),
    })?;
    if norb == 0 {
        return Err(Error::FcidumpParse {
            line: 1,
            reason: "NORB must be positive".into(),
        });
    }

    let n = norb;
    let mut h = DMatrix::<f64>::zeros(n, n);
    let mut eri = vec![0.0; n.pow(4)];
    let idx = |p: usize, q: usize, r: usize, s: usize| ((p * n + q) * n + r) * n + s;
    let mut e_nuc = 0.0;

    for (i, line) in lines {
        let line_no = i + 1;
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        let err = |reason: String| Error::FcidumpParse {
            line: line_no,
            reason,
        };
        let tokens: Vec<&str> = t.split_whitespace().collect();
        if tokens.len() != 5 {
            return Err(err(format!("expected 5 fields, found {}", tokens.len())));
        }
        let value: f64 = tokens[0]
            .replace(['D', 'd'], "E")
            .parse()
            .map_err(|_| err(format!("bad value `{}`", tokens[0])))?;
        let mut ix = [0usize; 4];
        for (k, tok) in tokens[1..].iter().enumerate() {
            ix[k] = tok
                .parse()
                .map_err(|_| err(format!("bad index `{tok}`")))?;
            if ix[k] > n {
                return Err(err(format!("index {} exceeds NORB = {n}", ix[k])));
            }
        }
        match ix {
            [0, 0, 0, 0] => e_nuc = value,
            [p, q, 0, 0] if p > 0 && q > 0 => {
                h[(p - 1, q - 1)] = value;
                h[(q - 1, p - 1)] = value;
            }
            [p, q, r, s] if p > 0 && q > 0 && r > 0 && s > 0 => {
                let (p, q, r, s) = (p - 1, q - 1, r - 1, s - 1);
                for (a, b, c, d) in [
                    (p, q, r, s),
                    (q, p, r, s),
                    (p, q, s, r),
                    (q, p, s, r),
                    (r, s, p, q),
                    (s, r, p, q),
                    (r, s, q, p),
                    (s, r, q, p),
                ] {
                    eri[idx(a, b, c, d)] = value;
                }
            }
            // orbital-energy lines (i 0 0 0) carry no Hamiltonian information
            [_, 0, 0, 0] => {}
            _ => return Err(err(format!("unsupported index pattern {ix:?}"))),
        }
    }
    Ok(MolecularProblem::from_spatial(h, eri, e_nuc, nelec))
}

pub fn write_fcidump(problem: &MolecularProblem) -> String {
    let n = problem.n_spatial;
    let mut out = String::new();
    let orbsym = vec!["1"; n].join(",");
    let _ = writeln!(
        out,
        " &FCI NORB={n},NELEC={},MS2={},\n  ORBSYM={orbsym},\n  ISYM=1,\n &END",
        problem.n_electrons,
        problem.n_electrons % 2
    );
    let pair = |p: usize, q: usize| p * (p + 1) / 2 + q;
    for p in 0..n {
        for q in 0..=p {
            for r in 0..n {
                for s in 0..=r {
                    if pair(p, q) < pair(r, s) {
                        continue;
                    }
                    let v = problem.eri_spatial(p, q, r, s);
                    if v != 0.0 {
                        let _ = writeln!(out, "{v:e} {} {} {} {}", p + 1, q + 1, r + 1, s + 1);
                    }
                }
            }
        }
    }
    for p in 0..n {
        for q in 0..=p {
            let v = problem.h_spatial()[(p, q)];
            if v != 0.0 {
                let _ = writeln!(out, "{v:e} {} {} 0 0", p + 1, q + 1);
            }
        }
    }
    let _ = writeln!(out, "{:e} 0 0 0 0", problem.e_nuc);
    out
}

fn header_value(header: &str, key: &str) -> Option<usize> {
    let upper = header.to_ascii_uppercase();
    let mut search = 0;
    while let Some(pos) = upper[search..].find(key) {
        let start = search + pos;
        let before_ok = start == 0
            || !upper.as_bytes()[start - 1].is_ascii_alphanumeric();
        let rest = upper[start + key.len()..].trim_start();
        if before_ok {
            if let Some(rest) = rest.strip_prefix('=') {
                let digits: String = rest
                    .trim_start()
                    .chars()
                    .take_while(|c| c.is_ascii_digit())
                    .collect();
                return digits.parse().ok();
            }
        }
        search = start + key.len();
    }
    None
}
