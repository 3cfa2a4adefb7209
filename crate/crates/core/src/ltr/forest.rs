use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dataset::Dataset;
use super::model::{normalize_importance, ModelKind, ModelMetadata, RankerModel};
use super::tree::{grow, Binned, GrowParams};
use crate::error::{Error, Result};
use crate::features::{schema_hash, BlockMask, NUM_FEATURES};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForestParams {
    pub trees: usize,
    pub max_features: usize,
    pub min_samples_leaf: usize,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            trees: 200,
            max_features: (NUM_FEATURES as f64).sqrt() as usize,
            min_samples_leaf: 1,
        }
    }
}

/// Bootstrapped regression forest on the instance labels.
pub fn train_pointwise(data: &Dataset, params: &ForestParams, mask: BlockMask, seed: u64) -> Result<RankerModel> {
    if data.is_empty() {
        return Err(Error::Empty("empty training set".into()));
    }
    if params.trees == 0 || params.max_features == 0 || params.min_samples_leaf == 0 {
        return Err(Error::Config("forest needs trees, max_features and min_samples_leaf >= 1".into()));
    }
    let masked = data.masked(mask);
    let rows: Vec<&[f64]> = masked.x.iter().map(|r| r.as_slice()).collect();
    let binned = Binned::new(&rows, NUM_FEATURES);
    let n = data.len();
    let mut master = ChaCha8Rng::seed_from_u64(seed);
    let seeds: Vec<u64> = (0..params.trees).map(|_| master.gen()).collect();
    let grow_params = GrowParams {
        max_leaves: usize::MAX,
        min_samples_leaf: params.min_samples_leaf,
        max_features: params.max_features,
    };
    let fitted: Vec<_> = seeds
        .par_iter()
        .map(|&s| {
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            let mut counts = vec![0.0f64; n];
            for _ in 0..n {
                counts[rng.gen_range(0..n)] += 1.0;
            }
            let g: Vec<f64> = counts.iter().zip(&masked.y).map(|(c, y)| c * y).collect();
            let samples: Vec<u32> = (0..n as u32).filter(|&i| counts[i as usize] > 0.0).collect();
            let mut imp = vec![0.0; NUM_FEATURES];
            let tree = grow(&binned, samples, &g, &counts, &grow_params, &mut rng, &mut imp);
            (tree, imp)
        })
        .collect();
    let mut raw_imp = vec![0.0; NUM_FEATURES];
    let mut trees = Vec::with_capacity(fitted.len());
    for (t, imp) in fitted {
        raw_imp.iter_mut().zip(&imp).for_each(|(a, b)| *a += b);
        trees.push(t);
    }
    Ok(RankerModel {
        kind: ModelKind::PointwiseForest,
        schema_hash: schema_hash(),
        mask,
        base: 0.0,
        tree_weight: 1.0 / trees.len() as f64,
        importance: normalize_importance(&raw_imp),
        metadata: ModelMetadata {
            seed,
            trees: trees.len(),
            learning_rate: 1.0,
            rounds_run: trees.len(),
            ndcg_history: Vec::new(),
        },
        trees,
    })
}
