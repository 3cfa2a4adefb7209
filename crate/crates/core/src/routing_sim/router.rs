use std::collections::HashMap;

use crate::corpus::{GroupIdx, GroupRegistry, Ticket};
use crate::error::{Error, Result};
use crate::features::{FeatureExtractor, NormalizationTable};
use crate::ltr::RankerModel;

/// Scores candidate groups for a ticket given the groups visited so far.
pub trait Router: Sync {
    fn name(&self) -> &str;
    fn score(&self, ticket: &Ticket, sequence: &[GroupIdx], candidates: &[GroupIdx]) -> Result<Vec<f64>>;
}

/// Top-`k` candidates by descending score, ties by group id.
pub fn rank_step(
    router: &dyn Router,
    ticket: &Ticket,
    sequence: &[GroupIdx],
    candidates: &[GroupIdx],
    registry: &GroupRegistry,
    k: usize,
) -> Result<Vec<GroupIdx>> {
    if candidates.is_empty() {
        return Err(Error::Empty(format!("no candidates for ticket `{}`", ticket.id)));
    }
    let scores = router.score(ticket, sequence, candidates)?;
    if scores.len() != candidates.len() {
        return Err(Error::Model(format!("{} returned {} scores for {} candidates", router.name(), scores.len(), candidates.len())));
    }
    let mut order: Vec<usize> = (0..candidates.len()).collect();
    order.sort_by(|&a, &b| {
        scores[b]
            .total_cmp(&scores[a])
            .then_with(|| registry.id(candidates[a]).cmp(registry.id(candidates[b])))
    });
    Ok(order.into_iter().take(k).map(|i| candidates[i]).collect())
}

/// Scores with a trained model over normalized features.
pub struct ModelRouter<'a> {
    pub label: String,
    pub extractor: &'a FeatureExtractor,
    pub norm: &'a NormalizationTable,
    pub model: &'a RankerModel,
}

impl Router for ModelRouter<'_> {
    fn name(&self) -> &str {
        &self.label
    }

    fn score(&self, ticket: &Ticket, sequence: &[GroupIdx], candidates: &[GroupIdx]) -> Result<Vec<f64>> {
        let t = self.extractor.ticket(ticket)?;
        let step = self.extractor.step(sequence)?;
        candidates
            .iter()
            .map(|&g| {
                let v = self.extractor.assemble(&t, &step, g, self.norm)?;
                self.model.score(v.as_slice())
            })
            .collect()
    }
}

/// Knows every resolver: scores it 1 and everything else 0.
pub struct OracleRouter {
    pub resolvers: HashMap<String, GroupIdx>,
}

impl Router for OracleRouter {
    fn name(&self) -> &str {
        "oracle"
    }

    fn score(&self, ticket: &Ticket, _: &[GroupIdx], candidates: &[GroupIdx]) -> Result<Vec<f64>> {
        let r = self.resolvers.get(&ticket.id).copied();
        Ok(candidates.iter().map(|&g| if Some(g) == r { 1.0 } else { 0.0 }).collect())
    }
}

/// Never puts the resolver first.
pub struct AdversarialRouter {
    pub resolvers: HashMap<String, GroupIdx>,
}

impl Router for AdversarialRouter {
    fn name(&self) -> &str {
        "adversarial"
    }

    fn score(&self, ticket: &Ticket, _: &[GroupIdx], candidates: &[GroupIdx]) -> Result<Vec<f64>> {
        let r = self.resolvers.get(&ticket.id).copied();
        Ok(candidates.iter().map(|&g| if Some(g) == r { -1.0 } else { 0.0 }).collect())
    }
}

/// Uniform pseudo-random scores, a pure function of the seed and inputs.
pub struct RandomRouter {
    pub seed: u64,
}

fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl Router for RandomRouter {
    fn name(&self) -> &str {
        "random"
    }

    fn score(&self, ticket: &Ticket, sequence: &[GroupIdx], candidates: &[GroupIdx]) -> Result<Vec<f64>> {
        let mut h = mix(self.seed);
        for b in ticket.id.bytes() {
            h = mix(h ^ b as u64);
        }
        for g in sequence {
            h = mix(h ^ ((g.0 as u64 + 1) << 8));
        }
        Ok(candidates
            .iter()
            .map(|g| (mix(h ^ ((g.0 as u64) << 32)) >> 11) as f64 / (1u64 << 53) as f64)
            .collect())
    }
}
