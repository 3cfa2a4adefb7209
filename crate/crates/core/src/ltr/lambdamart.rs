use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::dataset::Dataset;
use super::metrics::{ndcg_at, TiePolicy};
use super::model::{normalize_importance, ModelKind, ModelMetadata, RankerModel};
use super::tree::{grow, Binned, GrowParams};
use crate::error::{Error, Result};
use crate::features::{schema_hash, BlockMask, NUM_FEATURES};

const SIGMA: f64 = 1.0;
const NDCG_K: usize = 10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoostParams {
    pub rounds: usize,
    pub learning_rate: f64,
    pub max_leaves: usize,
    pub min_samples_leaf: usize,
    /// stop after this many rounds without improvement
    pub patience: usize,
    pub min_improvement: f64,
}

impl Default for BoostParams {
    fn default() -> Self {
        BoostParams {
            rounds: 300,
            learning_rate: 0.1,
            max_leaves: 16,
            min_samples_leaf: 1,
            patience: 25,
            min_improvement: 1e-6,
        }
    }
}

/// Mean NDCG@10 over queries with a positive label; ties count against the model.
fn mean_ndcg(data: &Dataset, scores: &[f64]) -> f64 {
    let vals: Vec<f64> = data
        .queries
        .iter()
        .filter_map(|q| ndcg_at(&scores[q.clone()], &data.y[q.clone()], NDCG_K, TiePolicy::Pessimistic))
        .collect();
    if vals.is_empty() {
        0.0
    } else {
        vals.iter().sum::<f64>() / vals.len() as f64
    }
}

/// LambdaRank gradients and Newton weights for one round.
fn lambdas(data: &Dataset, scores: &[f64], grad: &mut [f64], hess: &mut [f64]) {
    grad.iter_mut().for_each(|v| *v = 0.0);
    hess.iter_mut().for_each(|v| *v = 0.0);
    for q in &data.queries {
        let idx: Vec<usize> = q.clone().collect();
        let labels = &data.y;
        let mut ideal: Vec<f64> = idx.iter().map(|&i| labels[i]).collect();
        ideal.sort_by(|a, b| b.total_cmp(a));
        let idcg: f64 = ideal
            .iter()
            .enumerate()
            .map(|(r, &l)| (l.exp2() - 1.0) / ((r + 2) as f64).log2())
            .sum();
        if idcg <= 0.0 {
            continue;
        }
        let mut order = idx.clone();
        order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
        let mut rank = vec![0usize; data.len().min(q.end) - q.start];
        for (r, &i) in order.iter().enumerate() {
            rank[i - q.start] = r;
        }
        for &i in &idx {
            for &j in &idx {
                if labels[i] <= labels[j] {
                    continue;
                }
                let disc = |r: usize| 1.0 / ((r + 2) as f64).log2();
                let delta = ((labels[i].exp2() - labels[j].exp2())
                    * (disc(rank[i - q.start]) - disc(rank[j - q.start])))
                .abs()
                    / idcg;
                let rho = 1.0 / (1.0 + (SIGMA * (scores[i] - scores[j])).exp());
                let l = SIGMA * rho * delta;
                let w = SIGMA * SIGMA * rho * (1.0 - rho) * delta;
                grad[i] += l;
                grad[j] -= l;
                hess[i] += w;
                hess[j] += w;
            }
        }
    }
}

/// LambdaMART with Newton leaf values and early stopping on training NDCG@10.
pub fn train_pairwise(data: &Dataset, params: &BoostParams, mask: BlockMask, seed: u64) -> Result<RankerModel> {
    if data.is_empty() {
        return Err(Error::Empty("empty training set".into()));
    }
    if params.max_leaves < 2 || params.learning_rate <= 0.0 || params.min_samples_leaf == 0 {
        return Err(Error::Config("boosting needs max_leaves >= 2, learning_rate > 0, min_samples_leaf >= 1".into()));
    }
    let has_pair = data.queries.iter().any(|q| {
        let ys = &data.y[q.clone()];
        ys.iter().any(|a| ys.iter().any(|b| a != b))
    });
    if !has_pair {
        return Err(Error::Validation("no query has two instances with different labels".into()));
    }
    let masked = data.masked(mask);
    let rows: Vec<&[f64]> = masked.x.iter().map(|r| r.as_slice()).collect();
    let binned = Binned::new(&rows, NUM_FEATURES);
    let n = data.len();
    let grow_params = GrowParams {
        max_leaves: params.max_leaves,
        min_samples_leaf: params.min_samples_leaf,
        max_features: NUM_FEATURES,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut scores = vec![0.0; n];
    let (mut grad, mut hess) = (vec![0.0; n], vec![0.0; n]);
    let mut trees = Vec::new();
    let mut gains: Vec<Vec<f64>> = Vec::new();
    let mut history = vec![mean_ndcg(&masked, &scores)];
    let (mut best, mut best_round) = (history[0], 0usize);
    let mut rounds_run = 0;
    for round in 1..=params.rounds {
        rounds_run = round;
        lambdas(&masked, &scores, &mut grad, &mut hess);
        let mut imp = vec![0.0; NUM_FEATURES];
        let tree = grow(&binned, (0..n as u32).collect(), &grad, &hess, &grow_params, &mut rng, &mut imp);
        for (s, r) in scores.iter_mut().zip(&rows) {
            *s += params.learning_rate * tree.predict(r);
        }
        trees.push(tree);
        gains.push(imp);
        let ndcg = mean_ndcg(&masked, &scores);
        history.push(ndcg);
        if ndcg > best + params.min_improvement {
            best = ndcg;
            best_round = round;
        } else if round - best_round >= params.patience {
            break;
        }
    }
    trees.truncate(best_round);
    history.truncate(best_round + 1);
    let mut raw_imp = vec![0.0; NUM_FEATURES];
    for imp in &gains[..best_round] {
        raw_imp.iter_mut().zip(imp).for_each(|(a, b)| *a += b);
    }
    Ok(RankerModel {
        kind: ModelKind::PairwiseGbt,
        schema_hash: schema_hash(),
        mask,
        base: 0.0,
        tree_weight: params.learning_rate,
        importance: normalize_importance(&raw_imp),
        metadata: ModelMetadata {
            seed,
            trees: trees.len(),
            learning_rate: params.learning_rate,
            rounds_run,
            ndcg_history: history,
        },
        trees,
    })
}
