//! Line-delimited corpus files.
//!
//! * tickets: one JSON object per line, `{"id", "text", "entities": [[name, count], ...]}`
//! * routing: one JSON object per line, `{"ticket_id", "sequence": [group ids]}`
//! * groups: one group id per line
//!
//! Blank lines are ignored everywhere. Line numbers in errors are 1-based.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::model::{Corpus, GroupRegistry, RoutingRecord, Ticket};
use crate::error::{Error, Result};

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TicketLine {
    id: String,
    #[serde(default)]
    text: String,
    entities: Vec<(String, u32)>,
}

#[derive(Serialize)]
struct TicketLineRef<'a> {
    id: &'a str,
    text: &'a str,
    entities: &'a [(String, u32)],
}

/// A routing record as stored on disk, before group ids are resolved.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawRecord {
    pub ticket_id: String,
    pub sequence: Vec<String>,
}

fn lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty())
}

fn at_line(source: &str, line: usize, err: Error) -> Error {
    match err {
        Error::Validation(m) => Error::Validation(format!("{source}:{line}: {m}")),
        Error::UnknownGroup(g) => Error::Validation(format!("{source}:{line}: unknown group `{g}`")),
        other => other,
    }
}

pub fn parse_tickets(text: &str, source: &str) -> Result<Vec<Ticket>> {
    lines(text)
        .map(|(n, line)| {
            let raw: TicketLine =
                serde_json::from_str(line).map_err(|e| Error::parse(source, n, e.to_string()))?;
            Ticket::new(raw.id, raw.text, raw.entities).map_err(|e| at_line(source, n, e))
        })
        .collect()
}

pub fn parse_routing(text: &str, source: &str) -> Result<Vec<RawRecord>> {
    lines(text)
        .map(|(n, line)| serde_json::from_str(line).map_err(|e| Error::parse(source, n, e.to_string())))
        .collect()
}

pub fn parse_registry(text: &str, source: &str) -> Result<GroupRegistry> {
    let mut ids = Vec::new();
    for (n, line) in lines(text) {
        if line.contains(char::is_whitespace) {
            return Err(Error::parse(source, n, "group id contains whitespace"));
        }
        ids.push((n, line));
    }
    let mut registry = GroupRegistry::default();
    for (n, id) in ids {
        registry.push(id).map_err(|e| at_line(source, n, e))?;
    }
    Ok(registry)
}

pub fn write_tickets<W: Write>(mut out: W, tickets: &[Ticket]) -> Result<()> {
    for t in tickets {
        let line = TicketLineRef {
            id: &t.id,
            text: &t.text,
            entities: &t.entities,
        };
        serde_json::to_writer(&mut out, &line)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn write_routing<W: Write>(mut out: W, records: &[RoutingRecord], registry: &GroupRegistry) -> Result<()> {
    for r in records {
        let raw = RawRecord {
            ticket_id: r.ticket_id.clone(),
            sequence: r.sequence.iter().map(|&g| registry.id(g).to_string()).collect(),
        };
        serde_json::to_writer(&mut out, &raw)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn write_registry<W: Write>(mut out: W, registry: &GroupRegistry) -> Result<()> {
    for (_, g) in registry.groups() {
        writeln!(out, "{}", g.id)?;
    }
    Ok(())
}

/// Locations of the three corpus files.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CorpusPaths {
    pub tickets: PathBuf,
    pub routing: PathBuf,
    pub groups: PathBuf,
}

impl CorpusPaths {
    /// `tickets.jsonl`, `routing.jsonl` and `groups.txt` inside `dir`.
    pub fn in_dir(dir: impl AsRef<Path>) -> Self {
        let dir = dir.as_ref();
        CorpusPaths {
            tickets: dir.join("tickets.jsonl"),
            routing: dir.join("routing.jsonl"),
            groups: dir.join("groups.txt"),
        }
    }

    pub fn all(&self) -> [&Path; 3] {
        [&self.tickets, &self.routing, &self.groups]
    }
}

impl Corpus {
    /// Resolves raw records against the registry and validates the whole corpus.
    pub fn from_raw(tickets: Vec<Ticket>, raw: Vec<RawRecord>, registry: GroupRegistry) -> Result<Self> {
        let records = raw
            .into_iter()
            .map(|r| {
                let seq = r
                    .sequence
                    .iter()
                    .map(|g| registry.lookup(g))
                    .collect::<Result<Vec<_>>>()?;
                RoutingRecord::new(r.ticket_id, seq)
            })
            .collect::<Result<Vec<_>>>()?;
        Corpus::new(tickets, records, registry)
    }

    pub fn parse(tickets: &str, routing: &str, groups: &str) -> Result<Self> {
        let registry = parse_registry(groups, "groups")?;
        let tickets = parse_tickets(tickets, "tickets")?;
        let raw = parse_routing(routing, "routing")?;
        let mut records = Vec::with_capacity(raw.len());
        for (n, r) in lines(routing).map(|(n, _)| n).zip(raw) {
            let seq = r
                .sequence
                .iter()
                .map(|g| registry.lookup(g))
                .collect::<Result<Vec<_>>>()
                .map_err(|e| at_line("routing", n, e))?;
            records.push(RoutingRecord::new(r.ticket_id, seq).map_err(|e| at_line("routing", n, e))?);
        }
        Corpus::new(tickets, records, registry)
    }

    pub fn load(paths: &CorpusPaths) -> Result<Self> {
        let read = |p: &Path| {
            fs::read_to_string(p).map_err(|e| {
                Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", p.display())))
            })
        };
        Corpus::parse(&read(&paths.tickets)?, &read(&paths.routing)?, &read(&paths.groups)?)
    }

    pub fn save(&self, paths: &CorpusPaths) -> Result<()> {
        for p in paths.all() {
            if let Some(parent) = p.parent() {
                fs::create_dir_all(parent)?;
            }
        }
        let (t, r, g) = self.to_strings()?;
        fs::write(&paths.tickets, t)?;
        fs::write(&paths.routing, r)?;
        fs::write(&paths.groups, g)?;
        Ok(())
    }

    /// Serialized (tickets, routing, groups) file contents.
    pub fn to_strings(&self) -> Result<(String, String, String)> {
        let mut t = Vec::new();
        write_tickets(&mut t, self.tickets())?;
        let mut r = Vec::new();
        write_routing(&mut r, self.records(), self.registry())?;
        let mut g = Vec::new();
        write_registry(&mut g, self.registry())?;
        let s = |v: Vec<u8>| String::from_utf8(v).expect("serializers emit utf-8");
        Ok((s(t), s(r), s(g)))
    }
}
