use crate::corpus::{Corpus, GroupIdx, GroupRegistry, Ticket};
use crate::error::{Error, Result};
use crate::group_network::{
    build_networks, compute_centralities, compute_priors, CentralityTable, GroupPriors, Networks,
};
use crate::text_models::{ticket_block, Query, TextModels};

use super::normalize::NormalizationTable;
use super::schema::{FeatureVector, NUM_FEATURES};
use super::transition::{TransitionContext, TransitionModel};

/// Every model a feature vector depends on, built from the training split.
#[derive(Clone, Debug)]
pub struct FeatureExtractor {
    pub registry: GroupRegistry,
    pub text: TextModels,
    pub networks: Networks,
    pub priors: GroupPriors,
    /// centralities on the resolver-distance network
    pub centrality: CentralityTable,
    pub transitions: TransitionModel,
}

/// Per-ticket state shared across steps and candidates.
#[derive(Clone, Debug)]
pub struct TicketContext {
    query: Query,
    vector: Vec<f64>,
    t_block: [f64; 5],
}

/// Per-prefix state shared across candidates.
pub type StepContext<'a> = TransitionContext<'a>;

impl FeatureExtractor {
    pub fn build(train: &Corpus, text: TextModels) -> Result<Self> {
        let registry = train.registry().clone();
        let networks = build_networks(train.records(), &registry)?;
        let priors = compute_priors(train.records(), &registry)?;
        let centrality = compute_centralities(&networks.resolver)?;
        let transitions = TransitionModel::build(train.records(), &networks.transfer, &priors)?;
        Ok(FeatureExtractor {
            registry,
            text,
            networks,
            priors,
            centrality,
            transitions,
        })
    }

    pub fn ticket(&self, ticket: &Ticket) -> Result<TicketContext> {
        Ok(TicketContext {
            query: self.text.collection.encode(ticket),
            vector: self.text.embeddings.ticket_vector(ticket),
            t_block: ticket_block(ticket, &self.text.collection)?,
        })
    }

    pub fn step(&self, sequence: &[GroupIdx]) -> Result<StepContext<'_>> {
        self.transitions.context(sequence)
    }

    /// Unnormalized features in schema order.
    pub fn raw(&self, t: &TicketContext, step: &StepContext<'_>, g: GroupIdx) -> Result<[f64; NUM_FEATURES]> {
        if g.index() >= self.registry.len() {
            return Err(Error::UnknownGroup(g.to_string()));
        }
        let profile = self
            .text
            .profiles
            .get(g)
            .ok_or_else(|| Error::UnknownGroup(g.to_string()))?;
        let rel = crate::text_models::relevance_for_query(&t.query, profile, &self.text.profiles, &self.text.collection);
        let sim = crate::text_models::similarity_for_query(&t.query, &t.vector, g, profile, &self.text.embeddings);
        let c = &self.centrality.nodes[g.index()];
        let gg = step.features(g)?;
        let mut x = [0.0; NUM_FEATURES];
        x[..5].copy_from_slice(&t.t_block);
        x[5] = self.priors.participant.prob(g).ln();
        x[6] = self.priors.initial.prob(g).ln();
        x[7] = self.priors.resolver.prob(g).ln();
        x[8..24].copy_from_slice(&c.values());
        x[24..31].copy_from_slice(&[
            rel.log_p_group,
            sim.cos_ent,
            sim.cos_emb,
            sim.emb_distance,
            rel.qlm,
            rel.bm25,
            rel.sdm,
        ]);
        x[31..].copy_from_slice(&gg);
        Ok(x)
    }

    /// Normalized feature vector for one triplet.
    pub fn assemble(
        &self,
        t: &TicketContext,
        step: &StepContext<'_>,
        g: GroupIdx,
        norm: &NormalizationTable,
    ) -> Result<FeatureVector> {
        let raw = self.raw(t, step, g)?;
        Ok(FeatureVector(norm.apply(&raw)?))
    }
}
