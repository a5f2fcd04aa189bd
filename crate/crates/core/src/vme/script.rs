//! Line-oriented conformance scripts.
//!
//! ```text
//! # CYCLE DIR ADDRESS DATA... [EXPECT ...], numbers in hex
//! D16  W  00800010 BEEF
//! D16  R  00800010          EXPECT BEEF
//! D08  W  00800011 7F
//! BLT  W  00800100 0001 0002 0003
//! BLT  R  00800100 3        EXPECT 0001 0002 0003
//! RMW  RW 00800100 FFFF 0100 EXPECT 0001
//! ADO  -  00800200
//! D16  R  00800201          EXPECT BERR
//! IRQ  -  3 A5 D08
//! IACK R  3                 EXPECT A5
//! IACK R  5                 EXPECT NORESP
//! ```
//!
//! `BLT R` takes a word count, `IACK` a level, and `IRQ` is a pseudo-line that
//! raises an interrupt as `IRQ - LEVEL STATUS WIDTH`. `EXPECT` is followed by
//! data words, `DTACK` (any data), `BERR` or `NORESP`. Without it the line
//! must end in DTACK. For `IRQ`, `DTACK` means the request was accepted and
//! `BERR` that it was refused.

use super::{Backing, Outcome, StatusWidth, VmeSlave, VmeTransaction};
use std::fmt;
use std::io::Write;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ScriptOp {
    Txn(VmeTransaction),
    Raise {
        level: u8,
        status_id: u16,
        width: StatusWidth,
    },
}

impl fmt::Display for ScriptOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScriptOp::Txn(t) => t.fmt(f),
            ScriptOp::Raise {
                level,
                status_id,
                width,
            } => write!(f, "IRQ - {level:X} {status_id:X} {width}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expectation {
    Dtack,
    Data(Vec<u16>),
    Berr,
    NoResponse,
}

impl fmt::Display for Expectation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expectation::Dtack => f.write_str("DTACK"),
            Expectation::Berr => f.write_str("BERR"),
            Expectation::NoResponse => f.write_str("NORESP"),
            Expectation::Data(words) => f.write_str(&hex_words(words)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScriptLine {
    /// 1-based source line.
    pub line: usize,
    pub op: ScriptOp,
    pub expect: Option<Expectation>,
}

impl fmt::Display for ScriptLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.op.fmt(f)?;
        if let Some(e) = &self.expect {
            write!(f, " EXPECT {e}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}: {message}")]
pub struct ScriptError {
    pub line: usize,
    pub message: String,
}

fn hex(tok: &str) -> Result<u32, String> {
    let digits = tok
        .strip_prefix("0x")
        .or_else(|| tok.strip_prefix("0X"))
        .unwrap_or(tok)
        .replace('_', "");
    u32::from_str_radix(&digits, 16).map_err(|_| format!("{tok:?} is not a hex number"))
}

fn hex_max(tok: &str, max: u32, what: &str) -> Result<u32, String> {
    let v = hex(tok)?;
    if v > max {
        return Err(format!("{what} {tok} exceeds {max:#X}"));
    }
    Ok(v)
}

fn hex_words(words: &[u16]) -> String {
    words
        .iter()
        .map(|w| format!("{w:04X}"))
        .collect::<Vec<_>>()
        .join(" ")
}

fn parse_op(cycle: &str, dir: &str, args: &[&str]) -> Result<ScriptOp, String> {
    use VmeTransaction::*;
    let cycle = cycle.to_ascii_uppercase();
    let dir = dir.to_ascii_uppercase();
    let arity = |n: usize| {
        if args.len() == n {
            Ok(())
        } else {
            Err(format!(
                "{cycle} {dir} takes {n} operand(s), found {}",
                args.len()
            ))
        }
    };
    let word = |t: &str| hex_max(t, 0xFFFF, "word").map(|v| v as u16);
    let txn = match (cycle.as_str(), dir.as_str()) {
        ("D16", "R") => {
            arity(1)?;
            D16Read {
                address: hex(args[0])?,
            }
        }
        ("D16", "W") => {
            arity(2)?;
            D16Write {
                address: hex(args[0])?,
                data: word(args[1])?,
            }
        }
        ("D08", "R") => {
            arity(1)?;
            D08Read {
                address: hex(args[0])?,
            }
        }
        ("D08", "W") => {
            arity(2)?;
            D08Write {
                address: hex(args[0])?,
                data: hex_max(args[1], 0xFF, "byte")? as u8,
            }
        }
        ("BLT", "R") => {
            arity(2)?;
            BltRead {
                address: hex(args[0])?,
                count: hex(args[1])? as usize,
            }
        }
        ("BLT", "W") => {
            if args.len() < 2 {
                return Err("BLT W needs an address and at least one word".into());
            }
            BltWrite {
                address: hex(args[0])?,
                data: args[1..]
                    .iter()
                    .map(|t| word(t))
                    .collect::<Result<_, _>>()?,
            }
        }
        ("RMW", "RW") => {
            arity(3)?;
            Rmw {
                address: hex(args[0])?,
                and: word(args[1])?,
                or: word(args[2])?,
            }
        }
        ("ADO", "-") => {
            arity(1)?;
            Ado {
                address: hex(args[0])?,
            }
        }
        ("IACK", "R") => {
            arity(1)?;
            Iack {
                level: hex_max(args[0], 0xFF, "level")? as u8,
            }
        }
        ("IRQ", "-") => {
            arity(3)?;
            let width = match args[2].to_ascii_uppercase().as_str() {
                "D08" => StatusWidth::D08,
                "D16" => StatusWidth::D16,
                other => return Err(format!("unknown Status/ID width {other:?}")),
            };
            return Ok(ScriptOp::Raise {
                level: hex_max(args[0], 0xFF, "level")? as u8,
                status_id: word(args[1])?,
                width,
            });
        }
        _ => return Err(format!("unknown cycle {cycle} {dir}")),
    };
    Ok(ScriptOp::Txn(txn))
}

fn parse_expect(toks: &[&str]) -> Result<Expectation, String> {
    match toks {
        [] => Err("EXPECT needs a value".into()),
        [t] if t.eq_ignore_ascii_case("DTACK") => Ok(Expectation::Dtack),
        [t] if t.eq_ignore_ascii_case("BERR") => Ok(Expectation::Berr),
        [t] if t.eq_ignore_ascii_case("NORESP") => Ok(Expectation::NoResponse),
        words => words
            .iter()
            .map(|t| hex_max(t, 0xFFFF, "word").map(|v| v as u16))
            .collect::<Result<_, _>>()
            .map(Expectation::Data),
    }
}

/// Parses a whole script. Blank lines and `#` comments are skipped.
pub fn parse_script(text: &str) -> Result<Vec<ScriptLine>, ScriptError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("");
        let toks: Vec<&str> = body.split_whitespace().collect();
        if toks.is_empty() {
            continue;
        }
        let err = |message: String| ScriptError { line, message };
        let split = toks.iter().position(|t| t.eq_ignore_ascii_case("EXPECT"));
        let (head, expect) = match split {
            Some(p) => (&toks[..p], Some(parse_expect(&toks[p + 1..]).map_err(err)?)),
            None => (&toks[..], None),
        };
        if head.len() < 2 {
            return Err(err("expected `CYCLE DIR ...`".into()));
        }
        let op = parse_op(head[0], head[1], &head[2..]).map_err(err)?;
        out.push(ScriptLine { line, op, expect });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReportEntry {
    pub index: usize,
    pub line: usize,
    pub op: String,
    /// `DTACK`, `BERR` or `NORESP`.
    pub outcome: &'static str,
    /// BERR reason or refusal message.
    pub detail: String,
    pub data: Vec<u16>,
    pub cycles: u32,
    pub expected: String,
    pub pass: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ConformanceReport {
    pub entries: Vec<ReportEntry>,
}

impl ConformanceReport {
    pub fn passed(&self) -> bool {
        self.entries.iter().all(|e| e.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &ReportEntry> {
        self.entries.iter().filter(|e| !e.pass)
    }

    pub fn total_cycles(&self) -> u64 {
        self.entries.iter().map(|e| e.cycles as u64).sum()
    }

    /// `index,line,op,outcome,detail,data,cycles,expected,pass`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(
            out,
            "index,line,op,outcome,detail,data,cycles,expected,pass"
        )?;
        for e in &self.entries {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                e.index,
                e.line,
                e.op,
                e.outcome,
                e.detail.replace(',', ";"),
                hex_words(&e.data),
                e.cycles,
                e.expected,
                e.pass
            )?;
        }
        Ok(())
    }
}

fn matches(expect: &Expectation, outcome: &Outcome) -> bool {
    match (expect, outcome) {
        (Expectation::Dtack, Outcome::Dtack(_)) => true,
        (Expectation::Data(want), Outcome::Dtack(got)) => want == got,
        (Expectation::Berr, Outcome::Berr(_)) => true,
        (Expectation::NoResponse, Outcome::NoResponse) => true,
        _ => false,
    }
}

/// Runs the script in order and checks each line against its expectation.
pub fn run_conformance<B: Backing>(
    slave: &mut VmeSlave<B>,
    script: &[ScriptLine],
) -> ConformanceReport {
    let entries = script
        .iter()
        .enumerate()
        .map(|(index, sl)| {
            let expect = sl.expect.clone().unwrap_or(Expectation::Dtack);
            let (outcome, cycles) = match &sl.op {
                ScriptOp::Txn(t) => {
                    let r = slave.execute(t);
                    (r.outcome, r.cycles)
                }
                ScriptOp::Raise {
                    level,
                    status_id,
                    width,
                } => match slave.raise_interrupt(*level, *status_id, *width) {
                    Ok(()) => (Outcome::Dtack(vec![]), 0),
                    Err(e) => (Outcome::Berr(super::BerrReason::Device(e.to_string())), 0),
                },
            };
            let pass = matches(&expect, &outcome);
            if !pass {
                log::warn!(
                    "line {}: `{}` expected {expect}, got {outcome:?}",
                    sl.line,
                    sl.op
                );
            }
            let (name, detail, data) = match outcome {
                Outcome::Dtack(d) => ("DTACK", String::new(), d),
                Outcome::Berr(r) => ("BERR", r.to_string(), vec![]),
                Outcome::NoResponse => ("NORESP", String::new(), vec![]),
            };
            ReportEntry {
                index,
                line: sl.line,
                op: sl.op.to_string(),
                outcome: name,
                detail,
                data,
                cycles,
                expected: expect.to_string(),
                pass,
            }
        })
        .collect();
    ConformanceReport { entries }
}
