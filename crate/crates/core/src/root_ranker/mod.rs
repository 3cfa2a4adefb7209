//! Candidate generation: retrieval-based root prediction followed by
//! expansion along the root-level network.

mod candidates;
mod index;

pub use candidates::{candidates_to_jsonl, generate_candidates, CandidateSet};
pub use index::{TicketIndex, VOTE_DEPTH};
