//! Ticket routing as learning to rank.
//!
//! Initial group assignment and inter-group transfer are scored by one model:
//! given a ticket, the groups that already failed to resolve it and a
//! candidate group, rank candidates by how likely they are to resolve it.
//!
//! * [`corpus`]: tickets, expert groups, routing records, synthetic data
//! * [`text_models`]: entity language models, clarity, retrieval scores, embeddings
//! * [`group_network`]: transfer / resolver-distance / root networks, priors, centralities
//! * [`features`]: the 35-slot ticket/group feature vector
//! * [`root_ranker`]: retrieval-based root prediction and candidate expansion
//! * [`ltr`]: training-set construction, random forest and LambdaMART rankers
//! * [`routing_sim`]: routing simulation, metrics and transition baselines
//! * [`pipeline`]: the offline pipeline behind the command-line tool

pub mod corpus;
pub mod error;
pub mod ltr;
pub mod pipeline;
pub mod root_ranker;
pub mod routing_sim;
pub mod features;
pub mod group_network;
pub mod text_models;

pub use error::{Error, Result};
