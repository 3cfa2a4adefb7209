use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const MAX_BINS: usize = 255;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Node {
    /// `x[feature] <= threshold` goes left
    Split {
        feature: usize,
        threshold: f64,
        left: u32,
        right: u32,
    },
    Leaf { value: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn predict(&self, x: &[f64]) -> f64 {
        let mut i = 0usize;
        loop {
            match &self.nodes[i] {
                Node::Leaf { value } => return *value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if x[*feature] <= *threshold { *left } else { *right } as usize,
            }
        }
    }

    pub fn leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf { .. })).count()
    }

    /// Checks indices point forward and values are finite.
    pub fn validate(&self, num_features: usize) -> Result<()> {
        if self.nodes.is_empty() {
            return Err(Error::Model("empty tree".into()));
        }
        for (i, n) in self.nodes.iter().enumerate() {
            match n {
                Node::Leaf { value } if !value.is_finite() => {
                    return Err(Error::Model(format!("non-finite leaf at node {i}")));
                }
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    let ok = |c: u32| (c as usize) > i && (c as usize) < self.nodes.len();
                    if *feature >= num_features || !threshold.is_finite() || !ok(*left) || !ok(*right) {
                        return Err(Error::Model(format!("malformed split at node {i}")));
                    }
                }
                _ => {}
            }
        }
        Ok(())
    }
}

/// Column-major bin codes plus the cut points that define them.
#[derive(Clone, Debug)]
pub(crate) struct Binned {
    /// `cuts[f][b]`: bin `b` holds values `<= cuts[f][b]`
    pub cuts: Vec<Vec<f64>>,
    pub codes: Vec<Vec<u8>>,
}

impl Binned {
    pub fn new(rows: &[&[f64]], num_features: usize) -> Self {
        let mut cuts = Vec::with_capacity(num_features);
        let mut codes = Vec::with_capacity(num_features);
        for f in 0..num_features {
            let mut vals: Vec<f64> = rows.iter().map(|r| r[f]).collect();
            vals.sort_by(f64::total_cmp);
            let mut distinct = vals.clone();
            distinct.dedup();
            let c: Vec<f64> = if distinct.len() <= MAX_BINS {
                distinct.windows(2).map(|w| w[0] + (w[1] - w[0]) / 2.0).collect()
            } else {
                let mut q: Vec<f64> = (1..MAX_BINS).map(|i| vals[i * vals.len() / MAX_BINS]).collect();
                q.dedup();
                if q.last() == distinct.last() {
                    q.pop();
                }
                q
            };
            codes.push(rows.iter().map(|r| c.partition_point(|&cut| cut < r[f]) as u8).collect());
            cuts.push(c);
        }
        Binned { cuts, codes }
    }

    pub fn num_features(&self) -> usize {
        self.cuts.len()
    }
}

#[derive(Clone, Debug)]
pub(crate) struct GrowParams {
    pub max_leaves: usize,
    pub min_samples_leaf: usize,
    /// features examined per split
    pub max_features: usize,
}

#[derive(Clone, Copy, Debug)]
struct Split {
    feature: usize,
    bin: usize,
    gain: f64,
}

struct Open {
    node: usize,
    samples: Vec<u32>,
    split: Option<Split>,
}

fn score(g: f64, h: f64) -> f64 {
    if h > 0.0 {
        g * g / h
    } else {
        0.0
    }
}

fn leaf_value(g: f64, h: f64) -> f64 {
    if h > 0.0 {
        g / h
    } else {
        0.0
    }
}

fn best_split<R: Rng>(
    binned: &Binned,
    samples: &[u32],
    g: &[f64],
    h: &[f64],
    params: &GrowParams,
    rng: &mut R,
) -> Option<Split> {
    if samples.len() < 2 * params.min_samples_leaf {
        return None;
    }
    let nf = binned.num_features();
    let mut feats: Vec<usize> = if params.max_features >= nf {
        (0..nf).collect()
    } else {
        sample(rng, nf, params.max_features).into_vec()
    };
    feats.sort_unstable();
    let (gt, ht): (f64, f64) = samples.iter().fold((0.0, 0.0), |a, &s| (a.0 + g[s as usize], a.1 + h[s as usize]));
    let parent = score(gt, ht);
    let mut best: Option<Split> = None;
    let mut hist = vec![(0.0f64, 0.0f64, 0usize); MAX_BINS + 1];
    for f in feats {
        let nb = binned.cuts[f].len() + 1;
        if nb < 2 {
            continue;
        }
        hist[..nb].iter_mut().for_each(|e| *e = (0.0, 0.0, 0));
        let codes = &binned.codes[f];
        for &s in samples {
            let e = &mut hist[codes[s as usize] as usize];
            e.0 += g[s as usize];
            e.1 += h[s as usize];
            e.2 += 1;
        }
        let (mut gl, mut hl, mut nl) = (0.0, 0.0, 0usize);
        for (b, e) in hist[..nb - 1].iter().enumerate() {
            gl += e.0;
            hl += e.1;
            nl += e.2;
            let nr = samples.len() - nl;
            if e.2 == 0 || nl < params.min_samples_leaf || nr < params.min_samples_leaf {
                continue;
            }
            let (gr, hr) = (gt - gl, ht - hl);
            if hl <= 0.0 || hr <= 0.0 {
                continue;
            }
            let gain = score(gl, hl) + score(gr, hr) - parent;
            if gain > 1e-12 * parent.abs().max(1e-3) && best.is_none_or(|b| gain > b.gain) {
                best = Some(Split { feature: f, bin: b, gain });
            }
        }
    }
    best
}

/// Grows one tree best-first on gradient sums `g` and weights `h`; leaf
/// values are `sum g / sum h`. Split gains are added to `importance`.
pub(crate) fn grow<R: Rng>(
    binned: &Binned,
    samples: Vec<u32>,
    g: &[f64],
    h: &[f64],
    params: &GrowParams,
    rng: &mut R,
    importance: &mut [f64],
) -> Tree {
    let mut nodes: Vec<Node> = vec![Node::Leaf { value: 0.0 }];
    let split = best_split(binned, &samples, g, h, params, rng);
    let mut open = vec![Open { node: 0, samples, split }];
    let mut leaves = 1usize;
    while leaves < params.max_leaves {
        let pick = open
            .iter()
            .enumerate()
            .filter_map(|(i, o)| o.split.map(|s| (i, s.gain, o.node)))
            .max_by(|a, b| a.1.total_cmp(&b.1).then(b.2.cmp(&a.2)));
        let Some((i, _, _)) = pick else { break };
        let leaf = open.swap_remove(i);
        let s = leaf.split.unwrap();
        importance[s.feature] += s.gain;
        let codes = &binned.codes[s.feature];
        let (l, r): (Vec<u32>, Vec<u32>) = leaf.samples.iter().partition(|&&x| (codes[x as usize] as usize) <= s.bin);
        let (li, ri) = (nodes.len(), nodes.len() + 1);
        nodes.push(Node::Leaf { value: 0.0 });
        nodes.push(Node::Leaf { value: 0.0 });
        nodes[leaf.node] = Node::Split {
            feature: s.feature,
            threshold: binned.cuts[s.feature][s.bin],
            left: li as u32,
            right: ri as u32,
        };
        leaves += 1;
        for (node, smp) in [(li, l), (ri, r)] {
            let split = best_split(binned, &smp, g, h, params, rng);
            open.push(Open { node, samples: smp, split });
        }
    }
    for o in open {
        let (gs, hs) = o.samples.iter().fold((0.0, 0.0), |a, &s| (a.0 + g[s as usize], a.1 + h[s as usize]));
        nodes[o.node] = Node::Leaf { value: leaf_value(gs, hs) };
    }
    Tree { nodes }
}
