//! The offline pipeline behind the command-line tool: each stage reads the
//! artifacts of the previous one from a work directory and writes its own.

mod config;
mod stages;
mod state;

pub use config::{PipelineConfig, WorkPaths};
pub use stages::{
    ablate, build, evaluate, gen_data, report, run_all, train, AblationRow, BuildSummary, CandidateCurvePoint,
    Evaluation, TrainedModels,
};
pub use state::{BuiltState, POINTWISE_LABEL, PAIRWISE_LABEL, HUMAN_LABEL};
