//! Routing simulation and evaluation: step ranking, mean steps to
//! resolver, resolution rate, distance-weighted scores, leave-one-out hit
//! rates, and the transition-based baselines.

mod baseline;
mod report;
mod router;
mod simulate;
mod testsets;

pub use baseline::{TerRouter, TerVariant};
pub use report::{MetricsReport, ReportSet};
pub use router::{rank_step, AdversarialRouter, ModelRouter, OracleRouter, RandomRouter, Router};
pub use simulate::{
    human_reference, leave_one_out_hit_rate, madr_eval, phi, simulate_episode, simulate_mstr_rr,
    CandidatePools, Episode, HitRates, MstrRr, HIT_CUTOFFS, LOO_POOL, STEP_CAP,
};
pub use testsets::{split_test_sets, TestSplit, TEST_LENGTHS};
