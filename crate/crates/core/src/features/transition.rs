use std::collections::HashMap;

use crate::corpus::{GroupIdx, RoutingRecord};
use crate::error::{Error, Result};
use crate::group_network::{GroupPriors, RoutingNetwork};

/// Longest sequence suffix used by the variable-order estimate.
pub const VMS_MAX_ORDER: usize = 2;

/// Transition statistics from training routing sequences.
#[derive(Clone, Debug)]
pub struct TransitionModel {
    num_groups: usize,
    /// normalized transfer network
    transfer: Vec<Vec<(usize, f64)>>,
    /// context (1 or 2 groups) -> (next-group counts, total)
    contexts: HashMap<Vec<GroupIdx>, (HashMap<GroupIdx, u32>, u32)>,
    /// per group, indices of training tickets whose sequence contains it
    containing: Vec<Vec<u32>>,
    resolvers: Vec<GroupIdx>,
    p_resolver: Vec<f64>,
}

/// Per-step state shared by all candidates of one sequence prefix.
#[derive(Clone, Debug)]
pub struct TransitionContext<'a> {
    model: &'a TransitionModel,
    sequence: Vec<GroupIdx>,
    /// resolver histogram over tickets containing any sequence group
    coll: HashMap<GroupIdx, u32>,
    coll_total: u32,
}

impl TransitionModel {
    pub fn build(records: &[RoutingRecord], transfer: &RoutingNetwork, priors: &GroupPriors) -> Result<Self> {
        let n = transfer.node_count();
        if priors.resolver.probs.len() != n {
            return Err(Error::Validation(format!(
                "priors cover {} groups, transfer network {n}",
                priors.resolver.probs.len()
            )));
        }
        let mut contexts: HashMap<Vec<GroupIdx>, (HashMap<GroupIdx, u32>, u32)> = HashMap::new();
        let mut containing = vec![Vec::new(); n];
        let mut resolvers = Vec::with_capacity(records.len());
        for (i, r) in records.iter().enumerate() {
            let seq = &r.sequence;
            if let Some(g) = seq.iter().find(|g| g.index() >= n) {
                return Err(Error::UnknownGroup(g.to_string()));
            }
            for t in 1..seq.len() {
                for k in 1..=VMS_MAX_ORDER.min(t) {
                    let e = contexts.entry(seq[t - k..t].to_vec()).or_default();
                    *e.0.entry(seq[t]).or_default() += 1;
                    e.1 += 1;
                }
            }
            let mut seen: Vec<GroupIdx> = seq.clone();
            seen.sort_unstable();
            seen.dedup();
            for g in seen {
                containing[g.index()].push(i as u32);
            }
            resolvers.push(r.resolver());
        }
        Ok(TransitionModel {
            num_groups: n,
            transfer: (0..n).map(|u| transfer.out_edges(u).to_vec()).collect(),
            contexts,
            containing,
            resolvers,
            p_resolver: priors.resolver.probs.clone(),
        })
    }

    pub fn num_groups(&self) -> usize {
        self.num_groups
    }

    /// Normalized transfer probability `from -> to`.
    pub fn transfer_prob(&self, from: GroupIdx, to: GroupIdx) -> f64 {
        let es = &self.transfer[from.index()];
        es.binary_search_by_key(&to.index(), |e| e.0).map_or(0.0, |i| es[i].1)
    }

    /// Raw count of `context` being immediately followed by `next`, and of
    /// `context` being followed by anything.
    pub fn context_counts(&self, context: &[GroupIdx], next: GroupIdx) -> (u32, u32) {
        self.contexts
            .get(context)
            .map_or((0, 0), |(m, total)| (m.get(&next).copied().unwrap_or(0), *total))
    }

    pub fn context(&self, sequence: &[GroupIdx]) -> Result<TransitionContext<'_>> {
        if let Some(g) = sequence.iter().find(|g| g.index() >= self.num_groups) {
            return Err(Error::UnknownGroup(g.to_string()));
        }
        let mut coll = HashMap::new();
        let mut coll_total = 0;
        if !sequence.is_empty() {
            let mut tickets: Vec<u32> = sequence
                .iter()
                .flat_map(|g| self.containing[g.index()].iter().copied())
                .collect();
            tickets.sort_unstable();
            tickets.dedup();
            for t in tickets {
                *coll.entry(self.resolvers[t as usize]).or_insert(0u32) += 1;
                coll_total += 1;
            }
        }
        Ok(TransitionContext {
            model: self,
            sequence: sequence.to_vec(),
            coll,
            coll_total,
        })
    }
}

impl TransitionContext<'_> {
    pub fn sequence(&self) -> &[GroupIdx] {
        &self.sequence
    }

    /// `(|S|, P_FMS, P_VMS, P_coll)` for a candidate not already in `S`.
    pub fn features(&self, g: GroupIdx) -> Result<[f64; 4]> {
        let m = self.model;
        if g.index() >= m.num_groups {
            return Err(Error::UnknownGroup(g.to_string()));
        }
        if self.sequence.contains(&g) {
            return Err(Error::Validation(format!("candidate {g} already visited")));
        }
        if self.sequence.is_empty() {
            let p = m.p_resolver[g.index()];
            return Ok([0.0, p, p, p]);
        }
        let fms = self
            .sequence
            .iter()
            .map(|&r| m.transfer_prob(r, g))
            .fold(0.0, f64::max);
        let len = self.sequence.len();
        let vms = (1..=VMS_MAX_ORDER.min(len))
            .map(|k| {
                let (c, total) = m.context_counts(&self.sequence[len - k..], g);
                (c as f64 + 1.0) / (total as f64 + m.num_groups as f64)
            })
            .fold(0.0, f64::max);
        let coll = if self.coll_total == 0 {
            0.0
        } else {
            self.coll.get(&g).copied().unwrap_or(0) as f64 / self.coll_total as f64
        };
        Ok([len as f64, fms, vms, coll])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::GroupRegistry;
    use crate::group_network::{build_networks, compute_priors};

    fn records(seqs: &[&[u32]]) -> Vec<RoutingRecord> {
        seqs.iter()
            .enumerate()
            .map(|(i, s)| RoutingRecord::new(format!("t{i}"), s.iter().map(|&g| GroupIdx(g)).collect()).unwrap())
            .collect()
    }

    fn model(seqs: &[&[u32]], n: usize) -> (TransitionModel, GroupPriors) {
        let reg = GroupRegistry::new((0..n).map(|i| format!("G{i}"))).unwrap();
        let recs = records(seqs);
        let nets = build_networks(&recs, &reg).unwrap();
        let pri = compute_priors(&recs, &reg).unwrap();
        (TransitionModel::build(&recs, &nets.transfer, &pri).unwrap(), pri)
    }

    #[test]
    fn empty_sequence_uses_resolver_prior() {
        let (m, pri) = model(&[&[0, 1], &[1]], 3);
        let f = m.context(&[]).unwrap().features(GroupIdx(1)).unwrap();
        let p = pri.resolver.prob(GroupIdx(1));
        assert_eq!(f, [0.0, p, p, p]);
    }

    #[test]
    fn deterministic_transfer() {
        let (m, _) = model(&[&[1, 2], &[0, 1, 2], &[1, 2, 3]], 4);
        let f = m.context(&[GroupIdx(1)]).unwrap().features(GroupIdx(2)).unwrap();
        assert_eq!(f[1], 1.0);
        // B is followed by C three times: (3+1)/(3+4)
        assert!((f[2] - 4.0 / 7.0).abs() < 1e-15);
        // tickets containing B: all three; resolved by C: two
        assert!((f[3] - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn visited_candidate_rejected() {
        let (m, _) = model(&[&[0, 1]], 2);
        assert!(m.context(&[GroupIdx(0)]).unwrap().features(GroupIdx(0)).is_err());
        assert!(m.context(&[GroupIdx(5)]).is_err());
    }
}
