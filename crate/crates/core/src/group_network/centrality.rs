use std::collections::VecDeque;

use serde::Serialize;

use super::network::RoutingNetwork;
use crate::error::{Error, Result};

const MAX_ITER: usize = 200;
const TOL: f64 = 1e-9;
const DAMPING: f64 = 0.85;

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct NodeCentrality {
    pub in_degree: f64,
    pub out_degree: f64,
    pub total_degree: f64,
    pub weighted_in: f64,
    pub weighted_out: f64,
    pub weighted_total: f64,
    pub harmonic: f64,
    pub closeness: f64,
    pub betweenness: f64,
    pub eigenvector: f64,
    /// eigenvector centrality of the reversed graph
    pub eigenvector_out: f64,
    pub pagerank: f64,
    pub hub: f64,
    pub authority: f64,
    pub clustering: f64,
    pub eccentricity: f64,
}

impl NodeCentrality {
    pub const NAMES: [&'static str; 16] = [
        "in_degree",
        "out_degree",
        "total_degree",
        "weighted_in",
        "weighted_out",
        "weighted_total",
        "harmonic",
        "closeness",
        "betweenness",
        "eigenvector",
        "eigenvector_out",
        "pagerank",
        "hub",
        "authority",
        "clustering",
        "eccentricity",
    ];

    pub fn values(&self) -> [f64; 16] {
        [
            self.in_degree,
            self.out_degree,
            self.total_degree,
            self.weighted_in,
            self.weighted_out,
            self.weighted_total,
            self.harmonic,
            self.closeness,
            self.betweenness,
            self.eigenvector,
            self.eigenvector_out,
            self.pagerank,
            self.hub,
            self.authority,
            self.clustering,
            self.eccentricity,
        ]
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CentralityTable {
    pub labels: Vec<String>,
    pub nodes: Vec<NodeCentrality>,
}

impl CentralityTable {
    pub fn to_csv(&self) -> String {
        let mut s = format!("group,{}\n", NodeCentrality::NAMES.join(","));
        for (l, c) in self.labels.iter().zip(&self.nodes) {
            s.push_str(l);
            for v in c.values() {
                s.push_str(&format!(",{v}"));
            }
            s.push('\n');
        }
        s
    }
}

/// Hop distances from `src` along out-edges; `usize::MAX` when unreachable.
pub(crate) fn bfs(net: &RoutingNetwork, src: usize) -> Vec<usize> {
    let mut dist = vec![usize::MAX; net.node_count()];
    dist[src] = 0;
    let mut q = VecDeque::from([src]);
    while let Some(u) = q.pop_front() {
        for &(v, _) in net.out_edges(u) {
            if dist[v] == usize::MAX {
                dist[v] = dist[u] + 1;
                q.push_back(v);
            }
        }
    }
    dist
}

pub fn compute_centralities(net: &RoutingNetwork) -> Result<CentralityTable> {
    let n = net.node_count();
    if n == 0 {
        return Err(Error::Empty("network has no nodes".into()));
    }
    let inc = net.in_adjacency();
    let mut nodes = vec![NodeCentrality::default(); n];
    for (u, c) in nodes.iter_mut().enumerate() {
        c.out_degree = net.out_edges(u).len() as f64;
        c.in_degree = inc[u].len() as f64;
        c.total_degree = c.in_degree + c.out_degree;
        c.weighted_out = net.out_edges(u).iter().map(|e| e.1).sum();
        c.weighted_in = inc[u].iter().map(|e| e.1).sum();
        c.weighted_total = c.weighted_in + c.weighted_out;
        let dist = bfs(net, u);
        let (mut reach, mut sum, mut harm, mut ecc) = (0usize, 0usize, 0.0, 0usize);
        for (v, &d) in dist.iter().enumerate() {
            if v != u && d != usize::MAX {
                reach += 1;
                sum += d;
                harm += 1.0 / d as f64;
                ecc = ecc.max(d);
            }
        }
        c.harmonic = harm;
        c.closeness = if sum == 0 { 0.0 } else { reach as f64 / sum as f64 };
        c.eccentricity = ecc as f64;
    }
    let out: Vec<Vec<(usize, f64)>> = (0..n).map(|u| net.out_edges(u).to_vec()).collect();
    for (c, b) in nodes.iter_mut().zip(betweenness(&out)) {
        c.betweenness = b;
    }
    for (c, x) in nodes.iter_mut().zip(eigenvector(&inc)) {
        c.eigenvector = x;
    }
    for (c, x) in nodes.iter_mut().zip(eigenvector(&out)) {
        c.eigenvector_out = x;
    }
    for (c, x) in nodes.iter_mut().zip(pagerank(&out, &inc)) {
        c.pagerank = x;
    }
    let (hub, auth) = hits(&out, &inc);
    for (u, c) in nodes.iter_mut().enumerate() {
        c.hub = hub[u];
        c.authority = auth[u];
    }
    for (c, x) in nodes.iter_mut().zip(clustering(&out, &inc)) {
        c.clustering = x;
    }
    Ok(CentralityTable {
        labels: net.labels().to_vec(),
        nodes,
    })
}

/// Brandes' algorithm on the unweighted directed graph, unnormalized.
fn betweenness(out: &[Vec<(usize, f64)>]) -> Vec<f64> {
    let n = out.len();
    let mut bc = vec![0.0; n];
    let mut stack = Vec::with_capacity(n);
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut sigma = vec![0.0f64; n];
    let mut dist = vec![usize::MAX; n];
    let mut delta = vec![0.0f64; n];
    for s in 0..n {
        stack.clear();
        for v in 0..n {
            preds[v].clear();
            sigma[v] = 0.0;
            dist[v] = usize::MAX;
            delta[v] = 0.0;
        }
        sigma[s] = 1.0;
        dist[s] = 0;
        let mut q = VecDeque::from([s]);
        while let Some(v) = q.pop_front() {
            stack.push(v);
            for &(w, _) in &out[v] {
                if dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    q.push_back(w);
                }
                if dist[w] == dist[v] + 1 {
                    sigma[w] += sigma[v];
                    preds[w].push(v);
                }
            }
        }
        while let Some(w) = stack.pop() {
            for &v in &preds[w] {
                delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
            }
            if w != s {
                bc[w] += delta[w];
            }
        }
    }
    bc
}

/// Shifted power iteration `x <- x + A^T x` over `inc` (in-edges), L2-normalized.
fn eigenvector(inc: &[Vec<(usize, f64)>]) -> Vec<f64> {
    let n = inc.len();
    let mut x = vec![1.0 / n as f64; n];
    for _ in 0..MAX_ITER {
        let mut next: Vec<f64> = (0..n)
            .map(|v| x[v] + inc[v].iter().map(|&(u, w)| w * x[u]).sum::<f64>())
            .collect();
        let norm = next.iter().map(|v| v * v).sum::<f64>().sqrt();
        next.iter_mut().for_each(|v| *v /= norm);
        let diff: f64 = next.iter().zip(&x).map(|(a, b)| (a - b).abs()).sum();
        x = next;
        if diff < n as f64 * TOL {
            break;
        }
    }
    x
}

fn pagerank(out: &[Vec<(usize, f64)>], inc: &[Vec<(usize, f64)>]) -> Vec<f64> {
    let n = out.len();
    let nf = n as f64;
    let mut x = vec![1.0 / nf; n];
    for _ in 0..MAX_ITER {
        let dangling: f64 = (0..n).filter(|&u| out[u].is_empty()).map(|u| x[u]).sum();
        let base = (1.0 - DAMPING) / nf + DAMPING * dangling / nf;
        let next: Vec<f64> = (0..n)
            .map(|v| base + DAMPING * inc[v].iter().map(|&(u, w)| w * x[u]).sum::<f64>())
            .collect();
        let diff: f64 = next.iter().zip(&x).map(|(a, b)| (a - b).abs()).sum();
        x = next;
        if diff < nf * TOL {
            break;
        }
    }
    let total: f64 = x.iter().sum();
    x.iter_mut().for_each(|v| *v /= total);
    x
}

fn normalize_sum(v: &mut [f64]) {
    let s: f64 = v.iter().sum();
    if s > 0.0 {
        v.iter_mut().for_each(|x| *x /= s);
    }
}

/// Weighted HITS, both vectors normalized to unit sum every iteration.
fn hits(out: &[Vec<(usize, f64)>], inc: &[Vec<(usize, f64)>]) -> (Vec<f64>, Vec<f64>) {
    let n = out.len();
    let mut hub = vec![1.0 / n as f64; n];
    let mut auth = vec![0.0; n];
    for _ in 0..MAX_ITER {
        auth = (0..n)
            .map(|v| inc[v].iter().map(|&(u, w)| w * hub[u]).sum())
            .collect();
        normalize_sum(&mut auth);
        let mut next: Vec<f64> = (0..n)
            .map(|u| out[u].iter().map(|&(v, w)| w * auth[v]).sum())
            .collect();
        normalize_sum(&mut next);
        let diff: f64 = next.iter().zip(&hub).map(|(a, b)| (a - b).abs()).sum();
        hub = next;
        if diff < n as f64 * TOL {
            break;
        }
    }
    (hub, auth)
}

/// Unweighted directed clustering: directed triangles through a node over
/// the number of possible ones.
fn clustering(out: &[Vec<(usize, f64)>], inc: &[Vec<(usize, f64)>]) -> Vec<f64> {
    let n = out.len();
    let succ: Vec<Vec<usize>> = out.iter().map(|es| es.iter().map(|e| e.0).collect()).collect();
    let mut pred: Vec<Vec<usize>> = inc.iter().map(|es| es.iter().map(|e| e.0).collect()).collect();
    pred.iter_mut().for_each(|p| p.sort_unstable());
    let overlap = |a: &[usize], b: &[usize]| {
        let (mut i, mut j, mut c) = (0, 0, 0usize);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    c += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
        c
    };
    (0..n)
        .map(|u| {
            let (p, s) = (&pred[u], &succ[u]);
            let mut t = 0usize;
            // reciprocal neighbours are visited twice
            for &w in p.iter().chain(s) {
                t += overlap(p, &pred[w]) + overlap(p, &succ[w]) + overlap(s, &pred[w]) + overlap(s, &succ[w]);
            }
            let dt = p.len() + s.len();
            let db = overlap(p, s);
            let denom = 2 * (dt * dt.saturating_sub(1)).saturating_sub(2 * db);
            if t == 0 || denom == 0 {
                0.0
            } else {
                t as f64 / denom as f64
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;
    use crate::group_network::NetworkKind;

    fn net(n: usize, edges: &[(usize, usize, f64)]) -> RoutingNetwork {
        let labels = (0..n).map(|i| format!("N{i}")).collect();
        let raw: BTreeMap<_, _> = edges.iter().map(|&(s, t, w)| ((s, t), w)).collect();
        RoutingNetwork::from_raw(NetworkKind::ResolverDistance, labels, raw)
    }

    /// Counts shortest paths by enumerating all simple paths.
    fn brute_betweenness(n: usize, adj: &[Vec<bool>]) -> Vec<f64> {
        fn walk(adj: &[Vec<bool>], path: &mut Vec<usize>, t: usize, out: &mut Vec<Vec<usize>>) {
            let u = *path.last().unwrap();
            if u == t {
                out.push(path.clone());
                return;
            }
            for v in 0..adj.len() {
                if adj[u][v] && !path.contains(&v) {
                    path.push(v);
                    walk(adj, path, t, out);
                    path.pop();
                }
            }
        }
        let mut bc = vec![0.0; n];
        for s in 0..n {
            for t in 0..n {
                if s == t {
                    continue;
                }
                let mut paths = Vec::new();
                walk(adj, &mut vec![s], t, &mut paths);
                let Some(min) = paths.iter().map(Vec::len).min() else { continue };
                let shortest: Vec<_> = paths.iter().filter(|p| p.len() == min).collect();
                for v in 0..n {
                    let through = shortest.iter().filter(|p| p[1..p.len() - 1].contains(&v)).count();
                    bc[v] += through as f64 / shortest.len() as f64;
                }
            }
        }
        bc
    }

    #[test]
    fn betweenness_matches_path_enumeration() {
        let edges = [(0, 1), (0, 2), (1, 3), (2, 3), (3, 4), (4, 0), (1, 2), (5, 3), (4, 5)];
        let g = net(6, &edges.map(|(a, b)| (a, b, 1.0)));
        let mut adj = vec![vec![false; 6]; 6];
        for (a, b) in edges {
            adj[a][b] = true;
        }
        let oracle = brute_betweenness(6, &adj);
        let t = compute_centralities(&g).unwrap();
        for (c, o) in t.nodes.iter().zip(oracle) {
            assert!((c.betweenness - o).abs() < 1e-12, "{} vs {o}", c.betweenness);
        }
    }

    #[test]
    fn cycle_is_symmetric() {
        let g = net(3, &[(0, 1, 1.0), (1, 2, 1.0), (2, 0, 1.0)]);
        let t = compute_centralities(&g).unwrap();
        for c in &t.nodes {
            assert!((c.pagerank - 1.0 / 3.0).abs() < 1e-9);
            assert!((c.eigenvector - 1.0 / 3f64.sqrt()).abs() < 1e-9);
            assert_eq!(c.eccentricity, 2.0);
            assert!((c.harmonic - 1.5).abs() < 1e-15);
            assert!((c.closeness - 2.0 / 3.0).abs() < 1e-15);
            assert_eq!(c.clustering, 0.5);
        }
    }

    #[test]
    fn pagerank_with_dangling_node_sums_to_one() {
        let g = net(4, &[(0, 1, 1.0), (0, 2, 3.0), (1, 2, 1.0)]);
        let t = compute_centralities(&g).unwrap();
        let s: f64 = t.nodes.iter().map(|c| c.pagerank).sum();
        assert!((s - 1.0).abs() < 1e-12);
        // closed form: node 3 has only teleport and dangling mass
        assert!(t.nodes[2].pagerank > t.nodes[1].pagerank);
        assert!((t.nodes[0].pagerank - t.nodes[3].pagerank).abs() < 1e-12);
        assert!((t.nodes[0].weighted_out - 1.0).abs() < 1e-15);
        assert!((t.nodes[2].weighted_in - 1.75).abs() < 1e-15);
    }

    #[test]
    fn complete_graph_clustering_is_one() {
        let mut e = Vec::new();
        for a in 0..4 {
            for b in 0..4 {
                if a != b {
                    e.push((a, b, 1.0));
                }
            }
        }
        let t = compute_centralities(&net(4, &e)).unwrap();
        for c in &t.nodes {
            assert!((c.clustering - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn hits_star_graph() {
        let g = net(3, &[(0, 1, 1.0), (0, 2, 1.0)]);
        let t = compute_centralities(&g).unwrap();
        assert!((t.nodes[0].hub - 1.0).abs() < 1e-12);
        assert!((t.nodes[1].authority - 0.5).abs() < 1e-12);
        assert_eq!(t.nodes[1].eccentricity, 0.0);
        assert_eq!(t.nodes[1].closeness, 0.0);
    }

    #[test]
    fn empty_network_rejected() {
        assert!(compute_centralities(&net(0, &[])).is_err());
        assert!(compute_centralities(&net(2, &[])).is_ok());
    }
}
