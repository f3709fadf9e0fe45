//! Line-oriented certificate format.
//!
//! ```text
//! NK 3 4 CASE 1
//! D 1 1 2 3 1
//! AX SUB {Z1} {X1} MUL 1/1
//! AX PSYM 2,1,3,4 {W1,Z1,X4} MUL -1/1
//! TARGET 4/1 M + 8/1 R >= 11/1
//! ```

use super::axiom::Axiom;
use super::entropy::{RandomVar, VarSet};
use super::tables::{Case, DemandTable};
use super::{Certificate, Target};
use crate::model::Demand;
use crate::{fmt_ratio, parse_ratio, Rational};
use std::fmt::Write;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}: {msg}")]
pub struct ParseError {
    pub line: usize,
    pub msg: String,
}

pub fn write_certificate(cert: &Certificate) -> String {
    let t = &cert.table;
    let mut out = String::new();
    writeln!(out, "NK {} {} CASE {}", t.n, t.k, t.case.number()).unwrap();
    for (id, d) in t.demands.iter().enumerate() {
        let files: Vec<String> = d.as_slice().iter().map(ToString::to_string).collect();
        writeln!(out, "D {} {}", id + 1, files.join(" ")).unwrap();
    }
    for (ax, m) in &cert.axioms {
        writeln!(out, "AX {ax} MUL {}", fmt_ratio(m)).unwrap();
    }
    let g = &cert.target;
    writeln!(out, "TARGET {} M + {} R >= {}", fmt_ratio(&g.cm), fmt_ratio(&g.cr), fmt_ratio(&g.c)).unwrap();
    out
}

struct Line<'a> {
    no: usize,
    tokens: Vec<&'a str>,
    pos: usize,
}

impl<'a> Line<'a> {
    fn err<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError { line: self.no, msg: msg.into() })
    }

    fn next(&mut self) -> Result<&'a str, ParseError> {
        let tok = self.tokens.get(self.pos).copied();
        self.pos += 1;
        tok.map_or_else(|| self.err("unexpected end of line"), Ok)
    }

    fn expect(&mut self, word: &str) -> Result<(), ParseError> {
        let tok = self.next()?;
        if tok == word {
            Ok(())
        } else {
            self.err(format!("expected {word}, found {tok}"))
        }
    }

    fn usize(&mut self) -> Result<usize, ParseError> {
        let tok = self.next()?;
        tok.parse().or_else(|_| self.err(format!("expected an integer, found {tok}")))
    }

    fn ratio(&mut self) -> Result<Rational, ParseError> {
        let tok = self.next()?;
        parse_ratio(tok).map_or_else(|| self.err(format!("expected u/v, found {tok}")), Ok)
    }

    fn set(&mut self) -> Result<VarSet, ParseError> {
        let tok = self.next()?;
        let inner = tok
            .strip_prefix('{')
            .and_then(|s| s.strip_suffix('}'))
            .map_or_else(|| self.err(format!("expected {{...}}, found {tok}")), Ok)?;
        let mut out = VarSet::new();
        for v in inner.split(',').filter(|v| !v.is_empty()) {
            match RandomVar::parse(v) {
                Some(var) => out = out.with(var),
                None => return self.err(format!("unknown variable {v}")),
            }
        }
        Ok(out)
    }

    fn done(&self) -> Result<(), ParseError> {
        if self.pos < self.tokens.len() {
            self.err(format!("trailing token {}", self.tokens[self.pos]))
        } else {
            Ok(())
        }
    }
}

fn parse_axiom(l: &mut Line<'_>) -> Result<Axiom, ParseError> {
    let kind = l.next()?;
    Ok(match kind {
        "SUB" => Axiom::Submodularity { a: l.set()?, b: l.set()? },
        "MONO" => Axiom::Monotonicity { a: l.set()?, b: l.set()? },
        "DEC" => Axiom::Decodability { user: l.usize()?, demand: l.usize()?, set: l.set()? },
        "TOT" => Axiom::Totality { set: l.set()? },
        "CACHE" => Axiom::CacheBound { user: l.usize()? },
        "RATE" => Axiom::RateBound { demand: l.usize()? },
        "FIND" => Axiom::FileIndependence { files: l.set()? },
        "PSYM" => {
            let tok = l.next()?;
            let perm = tok
                .split(',')
                .map(str::parse)
                .collect::<Result<Vec<usize>, _>>()
                .or_else(|_| l.err(format!("bad permutation {tok}")))?;
            Axiom::PermSymmetry { perm, set: l.set()? }
        }
        "FSYM" => Axiom::FileSymmetry { n: l.usize()?, p: l.usize()?, user: l.usize()? },
        other => return l.err(format!("unknown axiom kind {other}")),
    })
}

pub fn parse_certificate(text: &str) -> Result<Certificate, ParseError> {
    let mut header: Option<(usize, usize, Case)> = None;
    let mut demands: Vec<Demand> = Vec::new();
    let mut axioms = Vec::new();
    let mut target = None;
    for (idx, raw) in text.lines().enumerate() {
        let tokens: Vec<&str> = raw.split_whitespace().collect();
        if tokens.is_empty() {
            continue;
        }
        let mut l = Line { no: idx + 1, tokens, pos: 0 };
        match l.next()? {
            "NK" => {
                let n = l.usize()?;
                let k = l.usize()?;
                l.expect("CASE")?;
                let case = match l.usize()? {
                    1 => Case::ManyFiles,
                    2 => Case::FewFiles,
                    c => return l.err(format!("unknown case {c}")),
                };
                header = Some((n, k, case));
            }
            "D" => {
                let id = l.usize()?;
                if id != demands.len() + 1 {
                    return l.err(format!("demand ids must run 1, 2, ...; got {id}"));
                }
                let mut files = Vec::new();
                while l.pos < l.tokens.len() {
                    files.push(l.usize()?);
                }
                demands.push(Demand::from_vec(files));
            }
            "AX" => {
                let ax = parse_axiom(&mut l)?;
                l.expect("MUL")?;
                axioms.push((ax, l.ratio()?));
            }
            "TARGET" => {
                let cm = l.ratio()?;
                l.expect("M")?;
                l.expect("+")?;
                let cr = l.ratio()?;
                l.expect("R")?;
                l.expect(">=")?;
                target = Some(Target { cm, cr, c: l.ratio()? });
            }
            other => return l.err(format!("unknown record {other}")),
        }
        l.done()?;
    }
    let (n, k, case) = header.ok_or(ParseError { line: 0, msg: "missing NK header".into() })?;
    let target = target.ok_or(ParseError { line: 0, msg: "missing TARGET line".into() })?;
    Ok(Certificate { table: DemandTable { n, k, case, demands }, axioms, target })
}
