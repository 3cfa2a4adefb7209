use serde::Serialize;

use super::index::TicketIndex;
use crate::corpus::{GroupIdx, GroupRegistry, Ticket};
use crate::error::{Error, Result};
use crate::group_network::{NetworkKind, RoutingNetwork};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CandidateSet {
    pub ticket_id: String,
    pub predicted_root: String,
    /// predicted root first, then expanded roots by descending edge weight
    pub roots: Vec<String>,
    /// member groups in registry order
    pub groups: Vec<String>,
    #[serde(skip)]
    pub members: Vec<GroupIdx>,
}

impl CandidateSet {
    pub fn contains(&self, g: GroupIdx) -> bool {
        self.members.binary_search(&g).is_ok()
    }
}

pub fn generate_candidates(
    ticket: &Ticket,
    n: usize,
    root_net: &RoutingNetwork,
    index: &TicketIndex,
    registry: &GroupRegistry,
) -> Result<CandidateSet> {
    if root_net.kind != NetworkKind::RootLevel {
        return Err(Error::Validation(format!(
            "candidate expansion needs the root-level network, got {}",
            root_net.kind.name()
        )));
    }
    let predicted = index.predict_root(ticket);
    let mut roots = vec![predicted.clone()];
    if let Some(node) = root_net.node(&predicted) {
        let mut nbrs: Vec<(&str, f64)> = root_net
            .out_edges(node)
            .iter()
            .map(|&(t, w)| (root_net.label(t), w))
            .collect();
        nbrs.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(b.0)));
        roots.extend(nbrs.into_iter().take(n).map(|(r, _)| r.to_string()));
    }
    let members: Vec<GroupIdx> = registry
        .groups()
        .filter(|(_, g)| roots.contains(&g.root))
        .map(|(i, _)| i)
        .collect();
    Ok(CandidateSet {
        ticket_id: ticket.id.clone(),
        predicted_root: predicted,
        groups: members.iter().map(|&g| registry.id(g).to_string()).collect(),
        roots,
        members,
    })
}

/// One JSON object per line.
pub fn candidates_to_jsonl(sets: &[CandidateSet]) -> String {
    let mut s = String::new();
    for c in sets {
        s.push_str(&serde_json::to_string(c).expect("candidate set serializes"));
        s.push('\n');
    }
    s
}
