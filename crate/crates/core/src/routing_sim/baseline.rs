use std::str::FromStr;

use super::router::Router;
use crate::corpus::{GroupIdx, Ticket};
use crate::error::{Error, Result};
use crate::features::{TransitionModel, VMS_MAX_ORDER};
use crate::group_network::GroupPriors;
use crate::text_models::EmbeddingProvider;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TerVariant {
    /// transfer probability from the last visited group
    Fm,
    /// best transfer probability from any visited group
    Fms,
    /// best smoothed continuation probability over short suffixes
    Vms,
}

impl TerVariant {
    pub const ALL: [TerVariant; 3] = [TerVariant::Fm, TerVariant::Fms, TerVariant::Vms];

    pub fn label(self) -> &'static str {
        match self {
            TerVariant::Fm => "ter-fm",
            TerVariant::Fms => "ter-fms",
            TerVariant::Vms => "ter-vms",
        }
    }
}

impl FromStr for TerVariant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fm" | "ter-fm" => Ok(TerVariant::Fm),
            "fms" | "ter-fms" => Ok(TerVariant::Fms),
            "vms" | "ter-vms" => Ok(TerVariant::Vms),
            other => Err(Error::Config(format!("unknown baseline `{other}`"))),
        }
    }
}

/// Two-stage baseline: nearest group centroid in embedding space for the
/// first assignment, transition statistics afterwards.
pub struct TerRouter<'a> {
    pub variant: TerVariant,
    pub transitions: &'a TransitionModel,
    pub embeddings: &'a EmbeddingProvider,
    pub priors: &'a GroupPriors,
}

impl TerRouter<'_> {
    fn initial(&self, ticket: &Ticket, candidates: &[GroupIdx]) -> Vec<f64> {
        let tv = self.embeddings.ticket_vector(ticket);
        candidates
            .iter()
            .map(|&g| {
                let gv = self.embeddings.group_vector(g);
                if gv.iter().all(|&x| x == 0.0) {
                    return f64::NEG_INFINITY;
                }
                -tv.iter().zip(gv).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt()
            })
            .collect()
    }

    fn prior(&self, candidates: &[GroupIdx]) -> Vec<f64> {
        candidates.iter().map(|&g| self.priors.resolver.prob(g)).collect()
    }
}

impl Router for TerRouter<'_> {
    fn name(&self) -> &str {
        self.variant.label()
    }

    fn score(&self, ticket: &Ticket, sequence: &[GroupIdx], candidates: &[GroupIdx]) -> Result<Vec<f64>> {
        if let Some(g) = candidates.iter().find(|g| g.index() >= self.transitions.num_groups()) {
            return Err(Error::UnknownGroup(g.to_string()));
        }
        if sequence.is_empty() {
            let s = self.initial(ticket, candidates);
            return Ok(if s.iter().all(|v| *v == f64::NEG_INFINITY) { self.prior(candidates) } else { s });
        }
        let m = self.transitions;
        let scores: Vec<f64> = match self.variant {
            TerVariant::Fm => {
                let last = *sequence.last().unwrap();
                candidates.iter().map(|&g| m.transfer_prob(last, g)).collect()
            }
            TerVariant::Fms => candidates
                .iter()
                .map(|&g| sequence.iter().map(|&r| m.transfer_prob(r, g)).fold(0.0, f64::max))
                .collect(),
            TerVariant::Vms => {
                let len = sequence.len();
                let suffixes: Vec<&[GroupIdx]> = (1..=VMS_MAX_ORDER.min(len)).map(|k| &sequence[len - k..]).collect();
                let seen = suffixes.iter().any(|s| m.context_counts(s, GroupIdx(0)).1 > 0);
                if !seen {
                    return Ok(self.prior(candidates));
                }
                let n = m.num_groups() as f64;
                candidates
                    .iter()
                    .map(|&g| {
                        suffixes
                            .iter()
                            .map(|s| {
                                let (c, total) = m.context_counts(s, g);
                                (c as f64 + 1.0) / (total as f64 + n)
                            })
                            .fold(0.0, f64::max)
                    })
                    .collect()
            }
        };
        Ok(if scores.iter().all(|&v| v == 0.0) { self.prior(candidates) } else { scores })
    }
}
