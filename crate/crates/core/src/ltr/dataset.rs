use std::ops::Range;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::corpus::{Corpus, GroupIdx, RoutingRecord};
use crate::error::{Error, Result};
use crate::features::{BlockMask, FeatureExtractor, NormalizationTable, NUM_FEATURES};

/// (ticket id, number of groups already visited)
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QueryKey {
    pub ticket_id: String,
    pub step: usize,
}

/// One (query, candidate, label) triple before featurization.
#[derive(Clone, Debug, PartialEq)]
pub struct PairSpec {
    /// index into the record list
    pub record: usize,
    pub step: usize,
    pub group: GroupIdx,
    pub label: f64,
}

/// Labelled, featurized instances grouped into contiguous queries.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Dataset {
    pub keys: Vec<QueryKey>,
    pub queries: Vec<Range<usize>>,
    pub groups: Vec<GroupIdx>,
    pub x: Vec<[f64; NUM_FEATURES]>,
    pub y: Vec<f64>,
}

impl Dataset {
    /// Builds a dataset from rows and a per-row query id; rows of one query
    /// must be contiguous.
    pub fn from_rows(x: Vec<[f64; NUM_FEATURES]>, y: Vec<f64>, query: &[usize]) -> Result<Self> {
        if x.len() != y.len() || x.len() != query.len() {
            return Err(Error::Validation("row, label and query lengths differ".into()));
        }
        let mut queries = Vec::new();
        let mut keys = Vec::new();
        let mut start = 0;
        for i in 1..=query.len() {
            if i == query.len() || query[i] != query[start] {
                if queries.iter().any(|r: &Range<usize>| query[r.start] == query[start]) {
                    return Err(Error::Validation(format!("query {} is not contiguous", query[start])));
                }
                keys.push(QueryKey {
                    ticket_id: format!("q{}", query[start]),
                    step: 0,
                });
                queries.push(start..i);
                start = i;
            }
        }
        Ok(Dataset {
            keys,
            queries,
            groups: vec![GroupIdx(0); x.len()],
            x,
            y,
        })
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    /// Copy with inactive blocks zeroed.
    pub fn masked(&self, mask: BlockMask) -> Dataset {
        let mut d = self.clone();
        d.x.iter_mut().for_each(|r| mask.apply(r));
        d
    }

    /// Normalizes rows in place with a fitted table.
    pub fn normalize(&mut self, table: &NormalizationTable) -> Result<()> {
        for r in &mut self.x {
            *r = table.apply(r)?;
        }
        Ok(())
    }
}

/// Enumerates positives and sampled negatives for every step of every
/// record. `universes[i]` is the negative pool for record `i`.
pub fn enumerate_instances(
    records: &[RoutingRecord],
    universes: &[Vec<GroupIdx>],
    ratio: usize,
    seed: u64,
) -> Result<Vec<PairSpec>> {
    if universes.len() != records.len() {
        return Err(Error::Validation("one candidate universe per record required".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for (ri, (rec, universe)) in records.iter().zip(universes).enumerate() {
        let seq = &rec.sequence;
        let last = seq.len() - 1;
        let mut pool: Vec<GroupIdx> = universe.iter().copied().filter(|g| !seq.contains(g)).collect();
        pool.sort_unstable();
        pool.dedup();
        for t in 0..seq.len() {
            let prefix = &seq[..t];
            // nearest occurrence to the resolver wins for repeated groups
            let mut pos: Vec<(GroupIdx, f64)> = Vec::new();
            for (p, &g) in seq.iter().enumerate().skip(t) {
                if prefix.contains(&g) {
                    continue;
                }
                let label = 0.5f64.powi((last - p) as i32);
                match pos.iter_mut().find(|e| e.0 == g) {
                    Some(e) => e.1 = e.1.max(label),
                    None => pos.push((g, label)),
                }
            }
            let need = ratio * pos.len();
            if pool.len() < need {
                return Err(Error::Validation(format!(
                    "ticket `{}` step {t}: {} negatives needed, universe has {}",
                    rec.ticket_id,
                    need,
                    pool.len()
                )));
            }
            for (g, label) in pos {
                out.push(PairSpec {
                    record: ri,
                    step: t,
                    group: g,
                    label,
                });
            }
            let mut picks = sample(&mut rng, pool.len(), need).into_vec();
            picks.sort_unstable();
            for i in picks {
                out.push(PairSpec {
                    record: ri,
                    step: t,
                    group: pool[i],
                    label: 0.0,
                });
            }
        }
    }
    Ok(out)
}

/// Raw feature rows for enumerated pairs, grouped into queries.
pub fn featurize(corpus: &Corpus, specs: &[PairSpec], extractor: &FeatureExtractor) -> Result<Dataset> {
    let records = corpus.records();
    let mut ranges: Vec<Range<usize>> = Vec::new();
    let mut start = 0;
    for i in 1..=specs.len() {
        if i == specs.len() || (specs[i].record, specs[i].step) != (specs[start].record, specs[start].step) {
            ranges.push(start..i);
            start = i;
        }
    }
    let rows: Vec<Vec<[f64; NUM_FEATURES]>> = ranges
        .par_iter()
        .map(|r| {
            let head = &specs[r.start];
            let rec = records
                .get(head.record)
                .ok_or_else(|| Error::Validation(format!("record {} out of range", head.record)))?;
            let ticket = corpus
                .ticket(&rec.ticket_id)
                .ok_or_else(|| Error::Validation(format!("missing ticket `{}`", rec.ticket_id)))?;
            let tctx = extractor.ticket(ticket)?;
            let step = extractor.step(&rec.sequence[..head.step])?;
            specs[r.clone()].iter().map(|s| extractor.raw(&tctx, &step, s.group)).collect()
        })
        .collect::<Result<_>>()?;
    let keys = ranges
        .iter()
        .map(|r| QueryKey {
            ticket_id: records[specs[r.start].record].ticket_id.clone(),
            step: specs[r.start].step,
        })
        .collect();
    Ok(Dataset {
        keys,
        queries: ranges,
        groups: specs.iter().map(|s| s.group).collect(),
        x: rows.into_iter().flatten().collect(),
        y: specs.iter().map(|s| s.label).collect(),
    })
}

/// Enumerates, featurizes, fits normalization on the result and applies it.
pub fn build_training_set(
    corpus: &Corpus,
    universes: &[Vec<GroupIdx>],
    extractor: &FeatureExtractor,
    ratio: usize,
    seed: u64,
) -> Result<(Dataset, NormalizationTable)> {
    let specs = enumerate_instances(corpus.records(), universes, ratio, seed)?;
    let mut ds = featurize(corpus, &specs, extractor)?;
    let table = NormalizationTable::fit(ds.x.iter())?;
    ds.normalize(&table)?;
    Ok((ds, table))
}
