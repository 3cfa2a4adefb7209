use serde::Serialize;

use super::centrality::{bfs, compute_centralities};
use super::network::RoutingNetwork;
use crate::error::Result;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NetworkStats {
    pub nodes: usize,
    pub edges: usize,
    pub diameter: usize,
    /// edges per node
    pub average_degree: f64,
    /// total normalized out-weight per node
    pub average_weighted_degree: f64,
    /// mean hop distance over reachable ordered pairs
    pub average_path_length: f64,
    pub average_clustering: f64,
}

pub fn network_stats(net: &RoutingNetwork) -> Result<NetworkStats> {
    let table = compute_centralities(net)?;
    let n = net.node_count();
    let (mut pairs, mut total, mut diameter) = (0usize, 0usize, 0usize);
    for u in 0..n {
        for (v, d) in bfs(net, u).into_iter().enumerate() {
            if v != u && d != usize::MAX {
                pairs += 1;
                total += d;
                diameter = diameter.max(d);
            }
        }
    }
    let weight: f64 = table.nodes.iter().map(|c| c.weighted_out).sum();
    Ok(NetworkStats {
        nodes: n,
        edges: net.edge_count(),
        diameter,
        average_degree: net.edge_count() as f64 / n as f64,
        average_weighted_degree: weight / n as f64,
        average_path_length: if pairs == 0 { 0.0 } else { total as f64 / pairs as f64 },
        average_clustering: table.nodes.iter().map(|c| c.clustering).sum::<f64>() / n as f64,
    })
}
