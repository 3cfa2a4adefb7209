use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::error::{Error, Result};

/// Routing lengths that get their own test set.
pub const TEST_LENGTHS: [usize; 4] = [1, 2, 3, 4];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TestSplit {
    pub seed: u64,
    pub per_length: usize,
    /// ("S1", ticket ids), ... in length order; sets with no tickets are omitted
    pub test_sets: Vec<(String, Vec<String>)>,
    pub train: Vec<String>,
}

impl TestSplit {
    pub fn test_ids(&self) -> BTreeSet<&str> {
        self.test_sets.iter().flat_map(|(_, v)| v.iter().map(String::as_str)).collect()
    }
}

/// Samples up to `per_length` routed tickets of each length in
/// [`TEST_LENGTHS`]; every other routed ticket is training data.
pub fn split_test_sets(corpus: &Corpus, per_length: usize, seed: u64) -> Result<TestSplit> {
    if per_length == 0 {
        return Err(Error::Config("test sets need at least one ticket per length".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut test_sets = Vec::new();
    for len in TEST_LENGTHS {
        let mut ids: Vec<String> = corpus
            .records()
            .iter()
            .filter(|r| r.len() == len)
            .map(|r| r.ticket_id.clone())
            .collect();
        ids.sort();
        ids.shuffle(&mut rng);
        ids.truncate(per_length);
        ids.sort();
        if !ids.is_empty() {
            test_sets.push((format!("S{len}"), ids));
        }
    }
    let split = TestSplit {
        seed,
        per_length,
        train: Vec::new(),
        test_sets,
    };
    let test = split.test_ids();
    let train: Vec<String> = corpus
        .records()
        .iter()
        .map(|r| r.ticket_id.clone())
        .filter(|id| !test.contains(id.as_str()))
        .collect();
    if train.is_empty() {
        return Err(Error::Empty("no training tickets left after the test split".into()));
    }
    Ok(TestSplit { train, ..split })
}
