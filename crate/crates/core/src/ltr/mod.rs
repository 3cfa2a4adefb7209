//! Learning to rank: training-set construction, a pointwise regression
//! forest and pairwise LambdaMART, both over histogram-binned trees.

mod dataset;
mod forest;
mod lambdamart;
mod metrics;
mod model;
mod tree;

pub use dataset::{build_training_set, enumerate_instances, featurize, Dataset, PairSpec, QueryKey};
pub use forest::{train_pointwise, ForestParams};
pub use lambdamart::{train_pairwise, BoostParams};
pub use metrics::{dcg_at, ndcg_at, TiePolicy};
pub use model::{feature_importance, ModelKind, ModelMetadata, RankerModel};
pub use tree::{Node, Tree};
