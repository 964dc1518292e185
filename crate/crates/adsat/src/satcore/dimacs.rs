//! DIMACS CNF export/import so third-party solvers can cross-check.

use super::{CnfFormula, Lit};
use crate::{Error, Result};
use std::fmt::Write as _;

pub(super) fn to_dimacs(f: &CnfFormula) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "p cnf {} {}", f.n_vars(), f.n_clauses());
    for clause in f.clauses() {
        for lit in clause {
            let v = lit.var as i64 + 1;
            let _ = write!(out, "{} ", if lit.negated { -v } else { v });
        }
        let _ = writeln!(out, "0");
    }
    out
}

pub(super) fn from_dimacs(text: &str) -> Result<CnfFormula> {
    let mut header: Option<(usize, usize)> = None;
    let mut clauses: Vec<Vec<Lit>> = Vec::new();
    let mut current: Vec<Lit> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        if line.starts_with('p') {
            if header.is_some() {
                return Err(parse(i, "duplicate problem line"));
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks.len() != 4 || toks[1] != "cnf" {
                return Err(parse(i, "expected `p cnf <vars> <clauses>`"));
            }
            let n = toks[2].parse().map_err(|_| parse(i, "bad var count"))?;
            let m = toks[3].parse().map_err(|_| parse(i, "bad clause count"))?;
            header = Some((n, m));
            continue;
        }
        let (n_vars, _) = header.ok_or_else(|| parse(i, "clause before problem line"))?;
        for tok in line.split_whitespace() {
            let x: i64 = tok.parse().map_err(|_| parse(i, "bad literal"))?;
            if x == 0 {
                clauses.push(std::mem::take(&mut current));
            } else {
                let var = x.unsigned_abs() - 1;
                if var as usize >= n_vars {
                    return Err(parse(i, "literal outside declared variable range"));
                }
                current.push(Lit {
                    var: var as u32,
                    negated: x < 0,
                });
            }
        }
    }
    let (n_vars, m) = header.ok_or_else(|| parse(0, "missing problem line"))?;
    if !current.is_empty() {
        return Err(parse(0, "unterminated clause at end of input"));
    }
    if clauses.len() != m {
        return Err(parse(
            0,
            "clause count does not match the problem line",
        ));
    }
    CnfFormula::new(n_vars, clauses)
}

fn parse(line: usize, msg: &str) -> Error {
    Error::Parse {
        line: line + 1,
        msg: msg.to_string(),
    }
}
