//! Plain-text event-log format.
//!
//! ```text
//! # key=value            (optional metadata lines)
//! sign,agent,price_changed
//! B,member17,0
//! -1,member03,1
//! ```
//!
//! `sign` accepts `B`/`S`, `+1`/`-1` or `1`; `price_changed` is `0`/`1` and the column may be
//! omitted. Export always writes `+1`/`-1` and the flag column, plus two reserved metadata
//! keys (`registry`, `price_flags`) so that exporting and re-ingesting reproduces the log
//! exactly.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{AgentRegistry, EventLog, Metadata};
use crate::error::{Error, Result};

const REGISTRY_KEY: &str = "registry";
const FLAGS_KEY: &str = "price_flags";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
}

pub fn ingest_path(path: impl AsRef<Path>) -> Result<EventLog> {
    ingest(path, Format::Csv)
}

pub fn ingest(path: impl AsRef<Path>, format: Format) -> Result<EventLog> {
    let file = File::open(path)?;
    ingest_reader(BufReader::new(file), format)
}

pub fn ingest_reader<R: Read>(reader: R, format: Format) -> Result<EventLog> {
    match format {
        Format::Csv => read_csv(BufReader::new(reader)),
    }
}

fn parse_sign(token: &str) -> Option<i8> {
    match token {
        "B" | "+1" | "1" => Some(1),
        "S" | "-1" => Some(-1),
        _ => None,
    }
}

fn read_csv<R: BufRead>(reader: R) -> Result<EventLog> {
    let mut metadata = Metadata::default();
    let mut has_flag_column = None;
    let mut registry = AgentRegistry::new();
    let mut signs = Vec::new();
    let mut agents = Vec::new();
    let mut flags = Vec::new();
    let mut record = 0usize;

    for (lineno, line) in reader.lines().enumerate() {
        let lineno = lineno + 1;
        let line = line?;
        let line = line.strip_suffix('\r').unwrap_or(&line);
        if line.is_empty() {
            continue;
        }
        let Some(with_flags) = has_flag_column else {
            if let Some(comment) = line.strip_prefix('#') {
                if let Some((k, v)) = comment.trim_start().split_once('=') {
                    metadata.set(k.trim(), v.trim());
                }
                continue;
            }
            let header: Vec<&str> = line.split(',').map(str::trim).collect();
            has_flag_column = Some(match header.as_slice() {
                ["sign", "agent"] => false,
                ["sign", "agent", "price_changed"] => true,
                _ => {
                    return Err(Error::Parse {
                        record: 0,
                        line: lineno,
                        message: format!(
                            "expected header `sign,agent[,price_changed]`, found `{line}`"
                        ),
                    })
                }
            });
            continue;
        };

        record += 1;
        let err = |message: String| Error::Parse {
            record,
            line: lineno,
            message,
        };
        let mut fields = line.split(',');
        let sign_tok = fields.next().unwrap_or("").trim();
        let sign = parse_sign(sign_tok).ok_or_else(|| err(format!("bad sign `{sign_tok}`")))?;
        let agent = fields
            .next()
            .map(str::trim)
            .filter(|a| !a.is_empty())
            .ok_or_else(|| err("missing agent".into()))?;
        let flag = if with_flags {
            match fields.next().map(str::trim) {
                Some("0") => false,
                Some("1") => true,
                Some(other) => return Err(err(format!("bad price_changed `{other}`"))),
                None => return Err(err("missing price_changed".into())),
            }
        } else {
            false
        };
        if fields.next().is_some() {
            return Err(err("too many fields".into()));
        }
        signs.push(sign);
        agents.push(registry.intern(agent).0);
        flags.push(flag);
    }

    if signs.is_empty() {
        return Err(Error::EmptyLog);
    }

    // An exported registry fixes ids, including agents without events.
    if let Some(labels) = metadata.remove(REGISTRY_KEY) {
        let mut fixed = AgentRegistry::new();
        for label in labels.split(',') {
            fixed.intern(label);
        }
        for a in agents.iter_mut() {
            let label = registry.label(super::AgentId(*a));
            *a = fixed
                .get(label)
                .ok_or_else(|| {
                    Error::InvalidParameter(format!("agent `{label}` missing from registry line"))
                })?
                .0;
        }
        registry = fixed;
    }
    let flags_absent = metadata.remove(FLAGS_KEY).as_deref() == Some("absent");
    let flags = (has_flag_column == Some(true) && !flags_absent).then_some(flags);

    let mut log = EventLog::from_columns(signs, agents, flags, registry)?;
    log.metadata = metadata;
    Ok(log)
}

/// Writes `log` in the CSV format; `extra` metadata lines are written after the log's own.
pub fn export<W: Write>(log: &EventLog, writer: W) -> Result<()> {
    let mut w = BufWriter::new(writer);
    for (k, v) in log.metadata.iter() {
        writeln!(w, "# {k}={v}")?;
    }
    writeln!(w, "# {REGISTRY_KEY}={}", log.registry().labels().join(","))?;
    if !log.has_price_flags() {
        writeln!(w, "# {FLAGS_KEY}=absent")?;
    }
    writeln!(w, "sign,agent,price_changed")?;
    let labels = log.registry().labels();
    for ((&s, &a), &f) in log
        .signs()
        .iter()
        .zip(log.agents())
        .zip(log.price_flags())
    {
        let sign = if s > 0 { "+1" } else { "-1" };
        writeln!(w, "{sign},{},{}", labels[a as usize], f as u8)?;
    }
    w.flush()?;
    Ok(())
}

pub fn export_to_path(log: &EventLog, path: impl AsRef<Path>) -> Result<()> {
    export(log, File::create(path)?)
}
