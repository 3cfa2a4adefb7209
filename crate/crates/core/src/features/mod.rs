//! The 35-slot feature vector for a (ticket, sequence so far, candidate)
//! triplet, and its min-max normalization.

mod extractor;
mod normalize;
mod schema;
mod transition;

pub use extractor::{FeatureExtractor, StepContext, TicketContext};
pub use normalize::{FeatureMatrix, FeatureRow, NormalizationTable};
pub use schema::{schema_hash, Block, BlockMask, FeatureVector, FEATURE_NAMES, NUM_FEATURES, SCHEMA_VERSION};
pub use transition::{TransitionContext, TransitionModel, VMS_MAX_ORDER};
