use serde::Serialize;

use crate::corpus::{GroupIdx, GroupRegistry, RoutingRecord};
use crate::error::{Error, Result};

/// Laplace-smoothed role probabilities for every group.
#[derive(Clone, Debug, Serialize)]
pub struct RolePrior {
    pub counts: Vec<u64>,
    pub probs: Vec<f64>,
}

impl RolePrior {
    fn from_counts(counts: Vec<u64>, tickets: usize) -> Self {
        let denom = (tickets + counts.len()) as f64;
        let probs = counts.iter().map(|&c| (c as f64 + 1.0) / denom).collect();
        RolePrior { counts, probs }
    }

    pub fn prob(&self, g: GroupIdx) -> f64 {
        self.probs[g.index()]
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GroupPriors {
    pub tickets: usize,
    pub initial: RolePrior,
    pub resolver: RolePrior,
    pub participant: RolePrior,
}

impl GroupPriors {
    /// `group,p_participant,p_initial,p_resolver` with a header line.
    pub fn to_csv(&self, registry: &GroupRegistry) -> String {
        let mut s = String::from("group,p_participant,p_initial,p_resolver\n");
        for (g, eg) in registry.groups() {
            s.push_str(&format!(
                "{},{},{},{}\n",
                eg.id,
                self.participant.prob(g),
                self.initial.prob(g),
                self.resolver.prob(g)
            ));
        }
        s
    }
}

pub fn compute_priors(records: &[RoutingRecord], registry: &GroupRegistry) -> Result<GroupPriors> {
    let n = registry.len();
    let mut initial = vec![0u64; n];
    let mut resolver = vec![0u64; n];
    let mut participant = vec![0u64; n];
    let mut seen = vec![usize::MAX; n];
    for (i, r) in records.iter().enumerate() {
        if let Some(g) = r.sequence.iter().find(|g| g.index() >= n) {
            return Err(Error::UnknownGroup(format!("{g} in routing record for `{}`", r.ticket_id)));
        }
        initial[r.initial().index()] += 1;
        resolver[r.resolver().index()] += 1;
        for g in &r.sequence {
            if seen[g.index()] != i {
                seen[g.index()] = i;
                participant[g.index()] += 1;
            }
        }
    }
    let t = records.len();
    Ok(GroupPriors {
        tickets: t,
        initial: RolePrior::from_counts(initial, t),
        resolver: RolePrior::from_counts(resolver, t),
        participant: RolePrior::from_counts(participant, t),
    })
}
