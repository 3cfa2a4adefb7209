//! Tickets, expert groups and routing sequences.
//!
//! A [`Corpus`] is immutable once constructed. All cross references between
//! routing records, tickets and the group registry are validated up front so
//! downstream models can index without further checks.

mod io;
mod model;
mod stats;
mod synthetic;

pub use io::{
    parse_registry, parse_routing, parse_tickets, write_registry, write_routing, write_tickets,
    CorpusPaths, RawRecord,
};
pub use model::{Corpus, ExpertGroup, GroupIdx, GroupRegistry, RoutingRecord, Ticket};
pub use stats::{corpus_stats, CorpusStats};
pub use synthetic::{generate_synthetic, GeneratorConfig};
