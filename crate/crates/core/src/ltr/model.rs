use serde::{Deserialize, Serialize};

use super::tree::Tree;
use crate::error::{Error, Result};
use crate::features::{schema_hash, Block, BlockMask, FEATURE_NAMES, NUM_FEATURES};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    PointwiseForest,
    PairwiseGbt,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::PointwiseForest => "pointwise-forest",
            ModelKind::PairwiseGbt => "pairwise-gbt",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelMetadata {
    pub seed: u64,
    pub trees: usize,
    pub learning_rate: f64,
    /// boosting rounds run before early stopping; equals `trees` for forests
    pub rounds_run: usize,
    /// training NDCG@10 after each kept round, starting with the empty model
    #[serde(default)]
    pub ndcg_history: Vec<f64>,
}

/// A trained tree ensemble. Score = `base + weight * sum of tree outputs`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RankerModel {
    pub kind: ModelKind,
    pub schema_hash: String,
    pub mask: BlockMask,
    pub base: f64,
    pub tree_weight: f64,
    pub trees: Vec<Tree>,
    /// per slot, sums to 1
    pub importance: Vec<f64>,
    pub metadata: ModelMetadata,
}

impl RankerModel {
    pub fn score(&self, x: &[f64]) -> Result<f64> {
        if x.len() != NUM_FEATURES {
            return Err(Error::Model(format!(
                "feature vector has {} slots, model expects {NUM_FEATURES}",
                x.len()
            )));
        }
        let mut v = [0.0; NUM_FEATURES];
        v.copy_from_slice(x);
        self.mask.apply(&mut v);
        let sum: f64 = self.trees.iter().map(|t| t.predict(&v)).sum();
        Ok(self.base + self.tree_weight * sum)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_hash != schema_hash() {
            return Err(Error::SchemaMismatch {
                expected: schema_hash(),
                found: self.schema_hash.clone(),
            });
        }
        if self.importance.len() != NUM_FEATURES {
            return Err(Error::Model(format!(
                "importance has {} entries, expected {NUM_FEATURES}",
                self.importance.len()
            )));
        }
        if !(self.base.is_finite() && self.tree_weight.is_finite()) {
            return Err(Error::Model("non-finite ensemble weights".into()));
        }
        for t in &self.trees {
            t.validate(NUM_FEATURES)?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let m: RankerModel = serde_json::from_str(text)?;
        m.validate()?;
        Ok(m)
    }
}

/// Normalizes raw per-slot gains; all-zero gains become uniform.
pub(crate) fn normalize_importance(raw: &[f64]) -> Vec<f64> {
    let total: f64 = raw.iter().sum();
    if total > 0.0 {
        raw.iter().map(|v| v / total).collect()
    } else {
        vec![1.0 / raw.len() as f64; raw.len()]
    }
}

/// Slots ranked by importance, ties by slot order.
pub fn feature_importance(model: &RankerModel) -> Vec<(&'static str, f64, Block)> {
    let mut v: Vec<(usize, f64)> = model.importance.iter().copied().enumerate().collect();
    v.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    v.into_iter()
        .map(|(i, w)| (FEATURE_NAMES[i], w, Block::of_slot(i)))
        .collect()
}
