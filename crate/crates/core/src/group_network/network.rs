use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::corpus::{GroupRegistry, RoutingRecord};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NetworkKind {
    Transfer,
    ResolverDistance,
    RootLevel,
}

impl NetworkKind {
    pub fn name(self) -> &'static str {
        match self {
            NetworkKind::Transfer => "transfer",
            NetworkKind::ResolverDistance => "resolver-distance",
            NetworkKind::RootLevel => "root-level",
        }
    }
}

/// A weighted directed graph whose out-weights are normalized per node.
#[derive(Clone, Debug, PartialEq)]
pub struct RoutingNetwork {
    pub kind: NetworkKind,
    labels: Vec<String>,
    /// normalized out-edges, sorted by target
    out: Vec<Vec<(usize, f64)>>,
    /// unnormalized accumulated weights, same layout as `out`
    raw: Vec<Vec<(usize, f64)>>,
}

impl RoutingNetwork {
    /// Builds a network from accumulated raw weights; self-loops are dropped.
    pub fn from_raw(kind: NetworkKind, labels: Vec<String>, raw: BTreeMap<(usize, usize), f64>) -> Self {
        let n = labels.len();
        let mut raw_adj = vec![Vec::new(); n];
        for ((s, t), w) in raw {
            if s != t && w > 0.0 {
                raw_adj[s].push((t, w));
            }
        }
        let out = raw_adj
            .iter()
            .map(|edges: &Vec<(usize, f64)>| {
                let total: f64 = edges.iter().map(|e| e.1).sum();
                edges.iter().map(|&(t, w)| (t, w / total)).collect()
            })
            .collect();
        RoutingNetwork {
            kind,
            labels,
            out,
            raw: raw_adj,
        }
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn edge_count(&self) -> usize {
        self.out.iter().map(Vec::len).sum()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, node: usize) -> &str {
        &self.labels[node]
    }

    pub fn node(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Normalized out-edges of a node.
    pub fn out_edges(&self, node: usize) -> &[(usize, f64)] {
        &self.out[node]
    }

    pub fn raw_out_edges(&self, node: usize) -> &[(usize, f64)] {
        &self.raw[node]
    }

    /// Normalized weight of `src -> dst`, zero when absent.
    pub fn weight(&self, src: usize, dst: usize) -> f64 {
        self.out[src]
            .binary_search_by_key(&dst, |e| e.0)
            .map_or(0.0, |i| self.out[src][i].1)
    }

    pub fn raw_weight(&self, src: usize, dst: usize) -> f64 {
        self.raw[src]
            .binary_search_by_key(&dst, |e| e.0)
            .map_or(0.0, |i| self.raw[src][i].1)
    }

    /// In-edges of every node as (source, normalized weight).
    pub fn in_adjacency(&self) -> Vec<Vec<(usize, f64)>> {
        let mut inc = vec![Vec::new(); self.node_count()];
        for (s, edges) in self.out.iter().enumerate() {
            for &(t, w) in edges {
                inc[t].push((s, w));
            }
        }
        inc
    }

    /// All normalized edges as (src label, dst label, weight).
    pub fn edges(&self) -> Vec<(&str, &str, f64)> {
        self.out
            .iter()
            .enumerate()
            .flat_map(|(s, es)| es.iter().map(move |&(t, w)| (s, t, w)))
            .map(|(s, t, w)| (self.labels[s].as_str(), self.labels[t].as_str(), w))
            .collect()
    }

    /// `src dst weight` per line, normalized weights.
    pub fn to_edge_list(&self) -> String {
        let mut s = String::new();
        for (a, b, w) in self.edges() {
            writeln!(s, "{a} {b} {w}").unwrap();
        }
        s
    }

    /// Reads an edge list; nodes are `labels` followed by any new labels in
    /// order of appearance. Weights are kept as written.
    pub fn from_edge_list(kind: NetworkKind, labels: Vec<String>, text: &str, source: &str) -> Result<Self> {
        let mut labels = labels;
        let mut raw = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let parts: Vec<&str> = line.split_whitespace().collect();
            let [src, dst, w] = parts[..] else {
                return Err(Error::parse(source, i + 1, "expected `src dst weight`"));
            };
            let w: f64 = w
                .parse()
                .map_err(|e| Error::parse(source, i + 1, format!("bad weight: {e}")))?;
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::parse(source, i + 1, "weight must be positive and finite"));
            }
            if src == dst {
                return Err(Error::parse(source, i + 1, "self-loop"));
            }
            let mut node = |l: &str| match labels.iter().position(|x| x == l) {
                Some(p) => p,
                None => {
                    labels.push(l.to_string());
                    labels.len() - 1
                }
            };
            let (s, t) = (node(src), node(dst));
            if raw.insert((s, t), w).is_some() {
                return Err(Error::parse(source, i + 1, "duplicate edge"));
            }
        }
        let mut out = vec![Vec::new(); labels.len()];
        for ((s, t), w) in raw {
            out[s].push((t, w));
        }
        Ok(RoutingNetwork {
            kind,
            labels,
            raw: out.clone(),
            out,
        })
    }
}

/// The three routing networks built from one set of records.
#[derive(Clone, Debug)]
pub struct Networks {
    pub transfer: RoutingNetwork,
    pub resolver: RoutingNetwork,
    pub root: RoutingNetwork,
}

pub fn build_networks(records: &[RoutingRecord], registry: &GroupRegistry) -> Result<Networks> {
    let labels: Vec<String> = registry.groups().map(|(_, g)| g.id.clone()).collect();
    let mut trans = BTreeMap::new();
    let mut res = BTreeMap::new();
    for r in records {
        if let Some(g) = r.sequence.iter().find(|g| g.index() >= registry.len()) {
            return Err(Error::UnknownGroup(format!(
                "{g} in routing record for `{}`",
                r.ticket_id
            )));
        }
        for pair in r.sequence.windows(2) {
            *trans.entry((pair[0].index(), pair[1].index())).or_insert(0.0) += 1.0;
        }
        let resolver = r.resolver().index();
        let last = r.len() - 1;
        // per ticket a group keeps its nearest occurrence to the resolver
        let mut contrib: BTreeMap<usize, f64> = BTreeMap::new();
        for (pos, g) in r.sequence[..last].iter().enumerate() {
            let w = 0.5f64.powi((last - pos - 1) as i32);
            let e = contrib.entry(g.index()).or_insert(0.0);
            *e = e.max(w);
        }
        for (g, w) in contrib {
            *res.entry((g, resolver)).or_insert(0.0) += w;
        }
    }
    let transfer = RoutingNetwork::from_raw(NetworkKind::Transfer, labels.clone(), trans);
    let mut root_raw = BTreeMap::new();
    for (&(s, t), &w) in &res {
        let (rs, rt) = (
            registry.root_index(crate::corpus::GroupIdx(s as u32)),
            registry.root_index(crate::corpus::GroupIdx(t as u32)),
        );
        if rs != rt {
            *root_raw.entry((rs, rt)).or_insert(0.0) += w;
        }
    }
    let resolver = RoutingNetwork::from_raw(NetworkKind::ResolverDistance, labels, res);
    let root = RoutingNetwork::from_raw(NetworkKind::RootLevel, registry.roots().to_vec(), root_raw);
    Ok(Networks {
        transfer,
        resolver,
        root,
    })
}
