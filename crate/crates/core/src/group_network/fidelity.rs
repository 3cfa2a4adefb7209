use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::priors::GroupPriors;
use crate::corpus::{GroupRegistry, RoutingRecord};
use crate::error::{Error, Result};

/// Source label for tickets resolved by the first group they reached.
pub const DISPATCH: &str = "dispatch";

const K: usize = 3;
const RESTARTS: usize = 20;
const LLOYD_ITER: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Fidelity {
    High,
    Medium,
    Low,
}

/// Where a resolver's tickets came from. `ranked[0]` is always the dispatch
/// share; the remaining sources follow in descending share.
#[derive(Clone, Debug, Serialize)]
pub struct SourceProfile {
    pub resolver: String,
    pub tickets: usize,
    pub ranked: Vec<(String, f64)>,
}

impl SourceProfile {
    /// Shares padded with zeros or truncated to `width`.
    pub fn vector(&self, width: usize) -> Vec<f64> {
        let mut v: Vec<f64> = self.ranked.iter().map(|r| r.1).take(width).collect();
        v.resize(width, 0.0);
        v
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct KMeansFit {
    pub centers: Vec<Vec<f64>>,
    pub assignment: Vec<usize>,
    pub inertia: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct FidelityClusters {
    pub profiles: Vec<SourceProfile>,
    pub fit: KMeansFit,
    /// label of each center
    pub center_labels: Vec<Fidelity>,
}

impl FidelityClusters {
    pub fn label_of(&self, profile: usize) -> Fidelity {
        self.center_labels[self.fit.assignment[profile]]
    }
}

#[derive(Clone, Copy, Debug, Default, Serialize)]
pub struct RoleMoments {
    pub skewness: f64,
    pub kurtosis: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct FidelityReport {
    pub leaf: FidelityClusters,
    pub root: FidelityClusters,
    pub initial: RoleMoments,
    pub resolver: RoleMoments,
    pub participant: RoleMoments,
}

fn profiles<F>(records: &[RoutingRecord], key: F) -> Vec<SourceProfile>
where
    F: Fn(crate::corpus::GroupIdx) -> String,
{
    let mut by_resolver: BTreeMap<String, BTreeMap<String, usize>> = BTreeMap::new();
    for r in records {
        let src = if r.len() == 1 {
            DISPATCH.to_string()
        } else {
            key(r.sequence[r.len() - 2])
        };
        *by_resolver.entry(key(r.resolver())).or_default().entry(src).or_default() += 1;
    }
    by_resolver
        .into_iter()
        .map(|(resolver, mut counts)| {
            let total: usize = counts.values().sum();
            let share = |c: usize| c as f64 / total as f64;
            let dispatch = counts.remove(DISPATCH).unwrap_or(0);
            let mut rest: Vec<(String, f64)> = counts.into_iter().map(|(s, c)| (s, share(c))).collect();
            rest.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
            let mut ranked = vec![(DISPATCH.to_string(), share(dispatch))];
            ranked.extend(rest);
            SourceProfile {
                resolver,
                tickets: total,
                ranked,
            }
        })
        .collect()
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest(p: &[f64], centers: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (i, c) in centers.iter().enumerate() {
        let d = sq_dist(p, c);
        if d < best.1 {
            best = (i, d);
        }
    }
    best
}

fn lloyd(points: &[Vec<f64>], mut centers: Vec<Vec<f64>>) -> KMeansFit {
    let dim = points[0].len();
    let mut assignment = vec![usize::MAX; points.len()];
    for _ in 0..LLOYD_ITER {
        let next: Vec<usize> = points.iter().map(|p| nearest(p, &centers).0).collect();
        if next == assignment {
            break;
        }
        assignment = next;
        for (c, center) in centers.iter_mut().enumerate() {
            let members: Vec<&Vec<f64>> =
                points.iter().zip(&assignment).filter(|(_, &a)| a == c).map(|(p, _)| p).collect();
            if members.is_empty() {
                continue;
            }
            *center = (0..dim)
                .map(|d| members.iter().map(|p| p[d]).sum::<f64>() / members.len() as f64)
                .collect();
        }
    }
    let inertia = points.iter().zip(&assignment).map(|(p, &a)| sq_dist(p, &centers[a])).sum();
    KMeansFit {
        centers,
        assignment,
        inertia,
    }
}

/// k-means with k-means++ seeding; the best of `restarts` runs by inertia.
pub fn kmeans(points: &[Vec<f64>], k: usize, restarts: usize, seed: u64) -> Result<KMeansFit> {
    if points.len() < k || k == 0 {
        return Err(Error::Validation(format!(
            "k-means needs at least {k} points, got {}",
            points.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<KMeansFit> = None;
    for _ in 0..restarts.max(1) {
        let mut centers = vec![points[rng.gen_range(0..points.len())].clone()];
        while centers.len() < k {
            let d: Vec<f64> = points.iter().map(|p| nearest(p, &centers).1).collect();
            let total: f64 = d.iter().sum();
            let idx = if total <= 0.0 {
                rng.gen_range(0..points.len())
            } else {
                let mut target = rng.gen::<f64>() * total;
                let mut pick = points.len() - 1;
                for (i, &di) in d.iter().enumerate() {
                    if target < di {
                        pick = i;
                        break;
                    }
                    target -= di;
                }
                pick
            };
            centers.push(points[idx].clone());
        }
        let fit = lloyd(points, centers);
        if best.as_ref().is_none_or(|b| fit.inertia < b.inertia) {
            best = Some(fit);
        }
    }
    Ok(best.unwrap())
}

/// Low: the center whose top non-dispatch share most exceeds its dispatch
/// share. High: the remaining center with the larger peak component.
fn label_centers(centers: &[Vec<f64>]) -> Vec<Fidelity> {
    let margin = |c: &Vec<f64>| c.get(1).copied().unwrap_or(0.0) - c[0];
    let peak = |c: &Vec<f64>| c.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let low = (0..centers.len())
        .max_by(|&a, &b| margin(&centers[a]).total_cmp(&margin(&centers[b])).then(b.cmp(&a)))
        .unwrap();
    let rest: Vec<usize> = (0..centers.len()).filter(|&i| i != low).collect();
    let high = *rest
        .iter()
        .max_by(|&&a, &&b| peak(&centers[a]).total_cmp(&peak(&centers[b])).then(b.cmp(&a)))
        .unwrap();
    (0..centers.len())
        .map(|i| match i {
            _ if i == low => Fidelity::Low,
            _ if i == high => Fidelity::High,
            _ => Fidelity::Medium,
        })
        .collect()
}

fn cluster(profiles: Vec<SourceProfile>, width: usize, seed: u64, level: &str) -> Result<FidelityClusters> {
    if profiles.len() < K {
        return Err(Error::Validation(format!(
            "{level}-level fidelity needs at least {K} resolvers, got {}",
            profiles.len()
        )));
    }
    let points: Vec<Vec<f64>> = profiles.iter().map(|p| p.vector(width)).collect();
    let fit = kmeans(&points, K, RESTARTS, seed)?;
    let center_labels = label_centers(&fit.centers);
    Ok(FidelityClusters {
        profiles,
        fit,
        center_labels,
    })
}

/// Sample skewness and excess kurtosis (population moments).
pub fn moments(xs: &[f64]) -> RoleMoments {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return RoleMoments::default();
    }
    let mean = xs.iter().sum::<f64>() / n;
    let m2 = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    if m2 <= 0.0 {
        return RoleMoments::default();
    }
    let m3 = xs.iter().map(|x| (x - mean).powi(3)).sum::<f64>() / n;
    let m4 = xs.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / n;
    RoleMoments {
        skewness: m3 / m2.powf(1.5),
        kurtosis: m4 / (m2 * m2) - 3.0,
    }
}

pub fn fidelity_and_roles(
    records: &[RoutingRecord],
    registry: &GroupRegistry,
    priors: &GroupPriors,
    width: usize,
    seed: u64,
) -> Result<FidelityReport> {
    let leaf = cluster(profiles(records, |g| registry.id(g).to_string()), width, seed, "leaf")?;
    let root = cluster(profiles(records, |g| registry.root_of(g).to_string()), width, seed, "root")?;
    let logs = |p: &[f64]| p.iter().map(|x| x.ln()).collect::<Vec<_>>();
    Ok(FidelityReport {
        leaf,
        root,
        initial: moments(&logs(&priors.initial.probs)),
        resolver: moments(&logs(&priors.resolver.probs)),
        participant: moments(&logs(&priors.participant.probs)),
    })
}
