//! Entity embeddings and the ticket / group vectors derived from them.
//!
//! The default provider factorizes nothing: it takes positive PMI of entity
//! co-occurrence inside a sliding window over each ticket's entity sequence
//! and projects each PPMI row through a seeded random ±1/√d matrix.

use std::collections::HashMap;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::relevance::SDM_WINDOW;
use crate::corpus::{Corpus, GroupIdx, Ticket};
use crate::error::{Error, Result};

pub const DEFAULT_EMBEDDING_DIM: usize = 64;

#[derive(Clone, Debug)]
pub struct EmbeddingProvider {
    dim: usize,
    names: Vec<String>,
    index: HashMap<String, usize>,
    vectors: Vec<Vec<f64>>,
    groups: Vec<Vec<f64>>,
}

impl EmbeddingProvider {
    /// Builds a provider from explicit vectors; all must have length `dim`.
    pub fn from_vectors(dim: usize, entries: Vec<(String, Vec<f64>)>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Config("embedding dimension must be positive".into()));
        }
        let mut p = EmbeddingProvider {
            dim,
            names: Vec::with_capacity(entries.len()),
            index: HashMap::with_capacity(entries.len()),
            vectors: Vec::with_capacity(entries.len()),
            groups: Vec::new(),
        };
        for (name, v) in entries {
            if v.len() != dim {
                return Err(Error::Validation(format!(
                    "embedding for `{name}` has dimension {}, expected {dim}",
                    v.len()
                )));
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::Validation(format!("embedding for `{name}` is not finite")));
            }
            if p.index.insert(name.clone(), p.names.len()).is_some() {
                return Err(Error::Validation(format!("duplicate embedding for `{name}`")));
            }
            p.names.push(name);
            p.vectors.push(v);
        }
        Ok(p)
    }

    /// PPMI co-occurrence rows, randomly projected to `dim` dimensions.
    pub fn from_cooccurrence(tickets: &[Ticket], dim: usize, seed: u64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Config("embedding dimension must be positive".into()));
        }
        let mut names: Vec<String> = Vec::new();
        let mut index: HashMap<String, usize> = HashMap::new();
        let mut pairs: HashMap<(usize, usize), f64> = HashMap::new();
        for t in tickets {
            let seq: Vec<usize> = t
                .entity_sequence()
                .into_iter()
                .map(|n| {
                    *index.entry(n.to_string()).or_insert_with(|| {
                        names.push(n.to_string());
                        names.len() - 1
                    })
                })
                .collect();
            for i in 0..seq.len() {
                for &b in seq.iter().take((i + SDM_WINDOW).min(seq.len())).skip(i + 1) {
                    let a = seq[i];
                    if a != b {
                        *pairs.entry((a, b)).or_insert(0.0) += 1.0;
                        *pairs.entry((b, a)).or_insert(0.0) += 1.0;
                    }
                }
            }
        }
        // Entities listed without appearing in any sequence still get a vector.
        for t in tickets {
            for (n, _) in &t.entities {
                if !index.contains_key(n) {
                    index.insert(n.clone(), names.len());
                    names.push(n.clone());
                }
            }
        }
        let v = names.len();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let scale = 1.0 / (dim as f64).sqrt();
        let projection: Vec<Vec<f64>> = (0..v)
            .map(|_| (0..dim).map(|_| if rng.gen::<bool>() { scale } else { -scale }).collect())
            .collect();

        let mut row_sum = vec![0.0; v];
        let mut total = 0.0;
        for (&(a, _), &c) in &pairs {
            row_sum[a] += c;
            total += c;
        }
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); v];
        for (&(a, b), &c) in &pairs {
            let pmi = (c * total / (row_sum[a] * row_sum[b])).ln();
            if pmi > 0.0 {
                rows[a].push((b, pmi));
            }
        }
        let vectors = rows
            .into_iter()
            .enumerate()
            .map(|(e, mut row)| {
                // fixed summation order keeps the output seed-deterministic
                row.sort_by_key(|&(b, _)| b);
                let mut vec = projection[e].clone();
                for (b, w) in row {
                    for (x, p) in vec.iter_mut().zip(&projection[b]) {
                        *x += w * p;
                    }
                }
                let n = vec.iter().map(|x| x * x).sum::<f64>().sqrt();
                if n > 0.0 {
                    vec.iter_mut().for_each(|x| *x /= n);
                }
                vec
            })
            .collect();
        Ok(EmbeddingProvider {
            dim,
            names,
            index,
            vectors,
            groups: Vec::new(),
        })
    }

    /// Parses the `entity d1 ... dn` text format.
    pub fn parse(text: &str, source: &str) -> Result<Self> {
        let mut entries = Vec::new();
        let mut dim = None;
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let name = parts.next().expect("non-empty line").to_string();
            let v = parts
                .map(|x| x.parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::parse(source, i + 1, format!("bad component: {e}")))?;
            match dim {
                None if v.is_empty() => return Err(Error::parse(source, i + 1, "no components")),
                None => dim = Some(v.len()),
                Some(d) if d != v.len() => {
                    return Err(Error::parse(
                        source,
                        i + 1,
                        format!("dimension {} differs from {d}", v.len()),
                    ))
                }
                _ => {}
            }
            entries.push((name, v));
        }
        let dim = dim.ok_or_else(|| Error::Empty(format!("{source}: no embeddings")))?;
        EmbeddingProvider::from_vectors(dim, entries)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (name, v) in self.names.iter().zip(&self.vectors) {
            out.push_str(name);
            for x in v {
                write!(out, " {x}").unwrap();
            }
            out.push('\n');
        }
        out
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn vector(&self, entity: &str) -> Option<&[f64]> {
        self.index.get(entity).map(|&i| self.vectors[i].as_slice())
    }

    /// Occurrence-weighted mean of the ticket's known entity vectors (zero
    /// when none are known).
    pub fn ticket_vector(&self, ticket: &Ticket) -> Vec<f64> {
        let mut acc = vec![0.0; self.dim];
        let mut weight = 0.0;
        for (name, count) in &ticket.entities {
            if let Some(v) = self.vector(name) {
                let w = *count as f64;
                acc.iter_mut().zip(v).for_each(|(a, x)| *a += w * x);
                weight += w;
            }
        }
        if weight > 0.0 {
            acc.iter_mut().for_each(|a| *a /= weight);
        }
        acc
    }

    /// Computes group centroids from the corpus' resolved tickets.
    pub fn with_groups(mut self, corpus: &Corpus) -> Result<Self> {
        let n = corpus.registry().len();
        let mut sums = vec![vec![0.0; self.dim]; n];
        let mut counts = vec![0usize; n];
        for (ticket, record) in corpus.routed() {
            let g = record.resolver().index();
            let tv = self.ticket_vector(ticket);
            sums[g].iter_mut().zip(&tv).for_each(|(s, x)| *s += x);
            counts[g] += 1;
        }
        for (s, &c) in sums.iter_mut().zip(&counts) {
            if c > 0 {
                s.iter_mut().for_each(|x| *x /= c as f64);
            }
        }
        self.groups = sums;
        Ok(self)
    }

    pub fn num_groups(&self) -> usize {
        self.groups.len()
    }

    /// Centroid of the group's resolved tickets; zero for groups that
    /// resolved nothing.
    pub fn group_vector(&self, g: GroupIdx) -> &[f64] {
        &self.groups[g.index()]
    }

    /// Sets group vectors directly.
    pub fn set_group_vectors(&mut self, groups: Vec<Vec<f64>>) -> Result<()> {
        if groups.iter().any(|g| g.len() != self.dim) {
            return Err(Error::Validation("group vector dimension mismatch".into()));
        }
        self.groups = groups;
        Ok(())
    }
}
