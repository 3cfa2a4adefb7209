use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::router::{rank_step, Router};
use crate::corpus::{GroupIdx, GroupRegistry, RoutingRecord, Ticket};
use crate::error::{Error, Result};

pub const STEP_CAP: usize = 10;
pub const LOO_POOL: usize = 50;
pub const HIT_CUTOFFS: [usize; 3] = [1, 3, 5];

/// Groups a router may recommend for each ticket.
#[derive(Clone, Debug)]
pub enum CandidatePools {
    /// every ticket sees the same list
    Shared(Vec<GroupIdx>),
    PerTicket(HashMap<String, Vec<GroupIdx>>),
}

impl CandidatePools {
    pub fn registry(registry: &GroupRegistry) -> Self {
        CandidatePools::Shared(registry.indices().collect())
    }

    pub fn get(&self, ticket_id: &str) -> Result<&[GroupIdx]> {
        match self {
            CandidatePools::Shared(v) => Ok(v),
            CandidatePools::PerTicket(m) => m
                .get(ticket_id)
                .map(Vec::as_slice)
                .ok_or_else(|| Error::Validation(format!("no candidate pool for ticket `{ticket_id}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Episode {
    pub ticket_id: String,
    pub truth: Vec<GroupIdx>,
    /// groups appended after failed steps; excludes the resolver
    pub simulated: Vec<GroupIdx>,
    pub recommendations: Vec<Vec<GroupIdx>>,
    pub resolved: bool,
    /// step at which the resolver was hit, or the cap
    pub steps: usize,
}

impl Episode {
    /// Visited groups including the resolver when it was reached.
    pub fn visited(&self) -> Vec<GroupIdx> {
        let mut v = self.simulated.clone();
        if self.resolved {
            v.push(*self.truth.last().unwrap());
        }
        v
    }
}

/// 1/2^d for a group `d` steps before the resolver on the ground-truth
/// path (nearest occurrence), 0 for groups off the path.
pub fn phi(g: GroupIdx, truth: &[GroupIdx]) -> f64 {
    let last = truth.len() - 1;
    truth
        .iter()
        .rposition(|&x| x == g)
        .map_or(0.0, |p| 0.5f64.powi((last - p) as i32))
}

/// Runs one ticket: success when the resolver is in the top `k`; after a
/// miss the next unvisited ground-truth group is appended, or the top
/// recommendation once the ground truth is used up.
pub fn simulate_episode(
    router: &dyn Router,
    ticket: &Ticket,
    record: &RoutingRecord,
    pool: &[GroupIdx],
    registry: &GroupRegistry,
    k: usize,
    cap: usize,
) -> Result<Episode> {
    if k == 0 || cap == 0 {
        return Err(Error::Config("top-k and step cap must be at least 1".into()));
    }
    let resolver = record.resolver();
    let path = &record.sequence[..record.len() - 1];
    let mut seq: Vec<GroupIdx> = Vec::new();
    let mut recs = Vec::new();
    let mut next_truth = 0usize;
    for step in 1..=cap {
        let cands: Vec<GroupIdx> = pool.iter().copied().filter(|g| !seq.contains(g)).collect();
        if cands.is_empty() {
            break;
        }
        let top = rank_step(router, ticket, &seq, &cands, registry, k)?;
        let hit = top.contains(&resolver);
        let first = top[0];
        recs.push(top);
        if hit {
            return Ok(Episode {
                ticket_id: ticket.id.clone(),
                truth: record.sequence.clone(),
                simulated: seq,
                recommendations: recs,
                resolved: true,
                steps: step,
            });
        }
        while next_truth < path.len() && seq.contains(&path[next_truth]) {
            next_truth += 1;
        }
        if next_truth < path.len() {
            seq.push(path[next_truth]);
            next_truth += 1;
        } else {
            seq.push(first);
        }
    }
    Ok(Episode {
        ticket_id: ticket.id.clone(),
        truth: record.sequence.clone(),
        simulated: seq,
        recommendations: recs,
        resolved: false,
        steps: cap,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MstrRr {
    pub mstr: f64,
    /// `rr[n - 1]` is the share resolved within `n` steps
    pub rr: Vec<f64>,
}

fn episodes(
    router: &dyn Router,
    tests: &[(&Ticket, &RoutingRecord)],
    pools: &CandidatePools,
    registry: &GroupRegistry,
    k: usize,
    cap: usize,
) -> Result<Vec<Episode>> {
    if tests.is_empty() {
        return Err(Error::Empty("empty test set".into()));
    }
    tests
        .par_iter()
        .map(|(t, r)| simulate_episode(router, t, r, pools.get(&t.id)?, registry, k, cap))
        .collect()
}

fn summarize(steps: &[(bool, usize)], cap: usize) -> MstrRr {
    let n = steps.len() as f64;
    let mstr = steps.iter().map(|&(ok, s)| if ok { s } else { cap } as f64).sum::<f64>() / n;
    let rr = (1..=cap)
        .map(|b| steps.iter().filter(|&&(ok, s)| ok && s <= b).count() as f64 / n)
        .collect();
    MstrRr { mstr, rr }
}

/// Top-1 simulation over a test set.
pub fn simulate_mstr_rr(
    router: &dyn Router,
    tests: &[(&Ticket, &RoutingRecord)],
    pools: &CandidatePools,
    registry: &GroupRegistry,
    cap: usize,
) -> Result<(MstrRr, Vec<Episode>)> {
    let eps = episodes(router, tests, pools, registry, 1, cap)?;
    let steps: Vec<(bool, usize)> = eps.iter().map(|e| (e.resolved, e.steps)).collect();
    Ok((summarize(&steps, cap), eps))
}

fn ticket_madr(e: &Episode) -> f64 {
    let v = e.visited();
    if v.is_empty() {
        0.0
    } else {
        v.iter().map(|&g| phi(g, &e.truth)).sum::<f64>() / v.len() as f64
    }
}

/// Mean over tickets of the mean path score of the simulated sequence,
/// with a top-`k` hit rule.
pub fn madr_eval(
    router: &dyn Router,
    tests: &[(&Ticket, &RoutingRecord)],
    pools: &CandidatePools,
    registry: &GroupRegistry,
    k: usize,
    cap: usize,
) -> Result<f64> {
    if k == 0 {
        return Err(Error::Config("MADR needs k >= 1".into()));
    }
    let eps = episodes(router, tests, pools, registry, k, cap)?;
    Ok(eps.iter().map(ticket_madr).sum::<f64>() / eps.len() as f64)
}

/// Archived routing as a reference system: steps = routing length.
pub fn human_reference(tests: &[(&Ticket, &RoutingRecord)], cap: usize) -> Result<(MstrRr, f64)> {
    if tests.is_empty() {
        return Err(Error::Empty("empty test set".into()));
    }
    let steps: Vec<(bool, usize)> = tests.iter().map(|(_, r)| (r.len() <= cap, r.len().min(cap))).collect();
    let madr = tests
        .iter()
        .map(|(_, r)| r.sequence.iter().map(|&g| phi(g, &r.sequence)).sum::<f64>() / r.len() as f64)
        .sum::<f64>()
        / tests.len() as f64;
    Ok((summarize(&steps, cap), madr))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HitRates {
    pub trials: usize,
    /// at cutoffs 1, 3, 5
    pub hr: [f64; 3],
}

/// Ranks the resolver within a pool of `pool_size` groups: the resolver,
/// the other archived groups, random candidates, then random registry
/// groups if still short.
pub fn leave_one_out_hit_rate(
    router: &dyn Router,
    tests: &[(&Ticket, &RoutingRecord)],
    pools: &CandidatePools,
    registry: &GroupRegistry,
    pool_size: usize,
    seed: u64,
) -> Result<HitRates> {
    if tests.is_empty() {
        return Err(Error::Empty("empty test set".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let all: Vec<GroupIdx> = registry.indices().collect();
    let mut trials = Vec::with_capacity(tests.len());
    for (t, r) in tests {
        let mut pool: Vec<GroupIdx> = vec![r.resolver()];
        for &g in &r.sequence {
            if !pool.contains(&g) {
                pool.push(g);
            }
        }
        if pool_size < pool.len() {
            return Err(Error::Validation(format!(
                "pool of {pool_size} cannot hold the {} archived groups of `{}`",
                pool.len(),
                t.id
            )));
        }
        for source in [pools.get(&t.id)?, all.as_slice()] {
            let mut rest: Vec<GroupIdx> = source.iter().copied().filter(|g| !pool.contains(g)).collect();
            rest.sort_unstable();
            rest.dedup();
            rest.shuffle(&mut rng);
            let take = pool_size.saturating_sub(pool.len()).min(rest.len());
            pool.extend_from_slice(&rest[..take]);
        }
        pool.sort_unstable();
        trials.push((*t, r.resolver(), pool));
    }
    let ranks: Vec<usize> = trials
        .par_iter()
        .map(|(t, resolver, pool)| {
            let ranked = rank_step(router, t, &[], pool, registry, pool.len())?;
            Ok(ranked.iter().position(|g| g == resolver).expect("resolver in pool"))
        })
        .collect::<Result<_>>()?;
    let n = ranks.len() as f64;
    let hr = HIT_CUTOFFS.map(|k| ranks.iter().filter(|&&r| r < k).count() as f64 / n);
    Ok(HitRates { trials: ranks.len(), hr })
}
