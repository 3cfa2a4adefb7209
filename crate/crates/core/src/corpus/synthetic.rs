//! Seeded synthetic corpora with planted routing structure.
//!
//! Every group owns a private entity topic, every root a shared one, and a
//! common background vocabulary is shared by all tickets. Multi-step routings
//! pass through groups of the resolver's root (often its front-line group),
//! or through an affinity partner root.

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::model::{Corpus, GroupIdx, GroupRegistry, RoutingRecord, Ticket};
use crate::error::{Error, Result};

const ROOT_CODES: [&str; 16] = [
    "AC", "PM", "FI", "HR", "SD", "BW", "CR", "MM", "QM", "PS", "WM", "LO", "EH", "TR", "GR", "IS",
];
const COMPONENTS: [&str; 8] = ["BE", "FE", "DB", "IN", "SE", "UI", "NW", "AN"];
const FILLER: [&str; 48] = [
    "the", "a", "we", "is", "are", "not", "when", "after", "error", "issue", "please", "help",
    "system", "running", "shows", "message", "cannot", "since", "update", "on", "in", "with",
    "our", "users", "report", "failed", "again", "still", "customer", "urgent", "production",
    "check", "log", "attached", "screen", "dump", "short", "time", "today", "yesterday", "set",
    "up", "new", "old", "value", "wrong", "missing", "data",
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeneratorConfig {
    pub roots: usize,
    /// Total number of leaf groups, spread evenly over the roots.
    pub groups: usize,
    pub tickets: usize,
    pub entities_per_group: usize,
    pub entities_per_root: usize,
    pub common_entities: usize,
    /// Probability that a ticket is resolved by its initial group.
    pub one_step_prob: f64,
    /// Probability that a predecessor of the resolver sits in the same root.
    pub within_root_prob: f64,
    /// Probability that a predecessor is drawn from an arbitrary other root.
    pub cross_root_noise: f64,
    /// Probability that a multi-step ticket starts at a root's front-line group.
    pub frontline_prob: f64,
    /// Root index pairs whose groups exchange tickets.
    pub affinity_pairs: Vec<(usize, usize)>,
    /// Relative weights of routing lengths 2, 3, 4, ...
    pub length_weights: Vec<f64>,
    /// Share of entity occurrences drawn from the resolver's own topic.
    pub group_topic_share: f64,
    /// Share drawn from the resolver root's topic.
    pub root_topic_share: f64,
    /// Share drawn from the initial group's topic on multi-step tickets.
    pub confusion_share: f64,
    pub entities_per_ticket: (usize, usize),
    pub filler_tokens: (usize, usize),
    /// Zipf exponent of resolver popularity.
    pub popularity_skew: f64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            roots: 8,
            groups: 50,
            tickets: 2000,
            entities_per_group: 12,
            entities_per_root: 20,
            common_entities: 40,
            one_step_prob: 0.58,
            within_root_prob: 0.8,
            cross_root_noise: 0.0,
            frontline_prob: 0.5,
            affinity_pairs: vec![(0, 1), (2, 3), (4, 5), (6, 7)],
            length_weights: vec![0.45, 0.3, 0.17, 0.08],
            group_topic_share: 0.5,
            root_topic_share: 0.2,
            confusion_share: 0.15,
            entities_per_ticket: (6, 16),
            filler_tokens: (15, 60),
            popularity_skew: 0.6,
        }
    }
}

impl GeneratorConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if self.roots == 0 || self.groups == 0 || self.tickets == 0 {
            return fail("roots, groups and tickets must be positive".into());
        }
        if self.groups < self.roots {
            return fail(format!("{} groups cannot populate {} roots", self.groups, self.roots));
        }
        if self.entities_per_group == 0 {
            return fail("entities_per_group must be positive".into());
        }
        for (name, p) in [
            ("one_step_prob", self.one_step_prob),
            ("within_root_prob", self.within_root_prob),
            ("cross_root_noise", self.cross_root_noise),
            ("frontline_prob", self.frontline_prob),
            ("group_topic_share", self.group_topic_share),
            ("root_topic_share", self.root_topic_share),
            ("confusion_share", self.confusion_share),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return fail(format!("{name} = {p} is not a probability"));
            }
        }
        if self.within_root_prob + self.cross_root_noise > 1.0 + 1e-12 {
            return fail("within_root_prob + cross_root_noise exceeds 1".into());
        }
        if self.group_topic_share + self.root_topic_share + self.confusion_share > 1.0 + 1e-12 {
            return fail("topic shares exceed 1".into());
        }
        if self.root_topic_share > 0.0 && self.entities_per_root == 0 {
            return fail("root_topic_share needs entities_per_root > 0".into());
        }
        let background = 1.0 - self.group_topic_share - self.root_topic_share - self.confusion_share;
        if background > 1e-12 && self.common_entities == 0 {
            return fail("background share needs common_entities > 0".into());
        }
        for &(a, b) in &self.affinity_pairs {
            if a >= self.roots || b >= self.roots || a == b {
                return fail(format!("affinity pair ({a}, {b}) is invalid for {} roots", self.roots));
            }
        }
        if self.one_step_prob < 1.0 {
            if self.length_weights.is_empty()
                || self.length_weights.iter().any(|w| !w.is_finite() || *w < 0.0)
                || self.length_weights.iter().sum::<f64>() <= 0.0
            {
                return fail("length_weights must be non-negative with positive sum".into());
            }
            let longest = self.length_weights.len() + 1;
            if longest > self.groups {
                return fail(format!("routing length {longest} exceeds the group count"));
            }
        }
        if self.entities_per_ticket.0 == 0 || self.entities_per_ticket.0 > self.entities_per_ticket.1 {
            return fail("entities_per_ticket must be a non-empty positive range".into());
        }
        if self.filler_tokens.0 > self.filler_tokens.1 {
            return fail("filler_tokens range is inverted".into());
        }
        if !(self.popularity_skew.is_finite() && self.popularity_skew >= 0.0) {
            return fail("popularity_skew must be non-negative".into());
        }
        Ok(())
    }
}

fn root_code(i: usize) -> String {
    match ROOT_CODES.get(i) {
        Some(c) => c.to_string(),
        None => format!("R{i}"),
    }
}

fn zipf_weights(n: usize, s: f64) -> Vec<f64> {
    (0..n).map(|r| 1.0 / ((r + 1) as f64).powf(s)).collect()
}

struct Layout {
    registry: GroupRegistry,
    /// groups of each root, the first one is the front-line group
    members: Vec<Vec<GroupIdx>>,
    root_of: Vec<usize>,
    partners: Vec<Vec<usize>>,
    group_topics: Vec<Vec<String>>,
    root_topics: Vec<Vec<String>>,
    common: Vec<String>,
}

fn layout(config: &GeneratorConfig) -> Result<Layout> {
    let mut ids = Vec::with_capacity(config.groups);
    let mut members = vec![Vec::new(); config.roots];
    let mut root_of = Vec::with_capacity(config.groups);
    let base = config.groups / config.roots;
    let extra = config.groups % config.roots;
    for r in 0..config.roots {
        let n = base + usize::from(r < extra);
        for j in 0..n {
            let idx = GroupIdx(ids.len() as u32);
            ids.push(format!(
                "{}.{}.L{}",
                root_code(r),
                COMPONENTS[j % COMPONENTS.len()],
                j / COMPONENTS.len()
            ));
            members[r].push(idx);
            root_of.push(r);
        }
    }
    let registry = GroupRegistry::new(&ids)?;
    let mut partners = vec![Vec::new(); config.roots];
    for &(a, b) in &config.affinity_pairs {
        if !partners[a].contains(&b) {
            partners[a].push(b);
        }
        if !partners[b].contains(&a) {
            partners[b].push(a);
        }
    }
    let group_topics = (0..config.groups)
        .map(|g| (0..config.entities_per_group).map(|k| format!("ent_g{g}_{k}")).collect())
        .collect();
    let root_topics = (0..config.roots)
        .map(|r| (0..config.entities_per_root).map(|k| format!("ent_r{r}_{k}")).collect())
        .collect();
    let common = (0..config.common_entities).map(|k| format!("ent_c{k}")).collect();
    Ok(Layout {
        registry,
        members,
        root_of,
        partners,
        group_topics,
        root_topics,
        common,
    })
}

/// Draws a routing sequence ending at `resolver`.
fn draw_sequence(
    rng: &mut ChaCha8Rng,
    config: &GeneratorConfig,
    lay: &Layout,
    resolver: GroupIdx,
    length: usize,
) -> Vec<GroupIdx> {
    let home = lay.root_of[resolver.index()];
    let mut preds: Vec<GroupIdx> = Vec::with_capacity(length);
    let pick_root = |rng: &mut ChaCha8Rng| -> usize {
        let u: f64 = rng.gen();
        if u < config.within_root_prob || (lay.partners[home].is_empty() && u < 1.0 - config.cross_root_noise) {
            home
        } else if u < config.within_root_prob + config.cross_root_noise || lay.partners[home].is_empty() {
            let others: Vec<usize> = (0..config.roots).filter(|&r| r != home).collect();
            *others.choose(rng).unwrap_or(&home)
        } else {
            *lay.partners[home].choose(rng).expect("non-empty")
        }
    };
    while preds.len() + 1 < length {
        let first = preds.is_empty();
        let root = pick_root(rng);
        let mut pool: Vec<GroupIdx> = lay.members[root]
            .iter()
            .copied()
            .filter(|g| *g != resolver && !preds.contains(g))
            .collect();
        if pool.is_empty() {
            pool = lay
                .registry
                .indices()
                .filter(|g| *g != resolver && !preds.contains(g))
                .collect();
        }
        let frontline = lay.members[root][0];
        let g = if first && pool.contains(&frontline) && rng.gen::<f64>() < config.frontline_prob {
            frontline
        } else {
            *pool.choose(rng).expect("validated: enough groups")
        };
        preds.push(g);
    }
    preds.push(resolver);
    preds
}

fn draw_ticket(
    rng: &mut ChaCha8Rng,
    config: &GeneratorConfig,
    lay: &Layout,
    id: String,
    sequence: &[GroupIdx],
) -> Result<Ticket> {
    let resolver = *sequence.last().unwrap();
    let initial = sequence[0];
    let confusion = if sequence.len() > 1 { config.confusion_share } else { 0.0 };
    let group_topic = &lay.group_topics[resolver.index()];
    let initial_topic = &lay.group_topics[initial.index()];
    let root_topic = &lay.root_topics[lay.root_of[resolver.index()]];
    let group_w = WeightedIndex::new(zipf_weights(group_topic.len(), 0.8)).expect("non-empty topic");
    let root_w = (!root_topic.is_empty()).then(|| WeightedIndex::new(zipf_weights(root_topic.len(), 0.8)).unwrap());
    let common_w = (!lay.common.is_empty()).then(|| WeightedIndex::new(zipf_weights(lay.common.len(), 1.0)).unwrap());

    let n = rng.gen_range(config.entities_per_ticket.0..=config.entities_per_ticket.1);
    let mut mentions: Vec<&str> = Vec::with_capacity(n);
    for _ in 0..n {
        let u: f64 = rng.gen();
        let e = if u < config.group_topic_share {
            &group_topic[group_w.sample(rng)]
        } else if u < config.group_topic_share + config.root_topic_share {
            &root_topic[root_w.as_ref().unwrap().sample(rng)]
        } else if u < config.group_topic_share + config.root_topic_share + confusion {
            &initial_topic[group_w.sample(rng) % initial_topic.len()]
        } else if let Some(w) = &common_w {
            &lay.common[w.sample(rng)]
        } else {
            &group_topic[group_w.sample(rng)]
        };
        mentions.push(e);
    }

    let fillers = rng.gen_range(config.filler_tokens.0..=config.filler_tokens.1);
    let mut tokens: Vec<&str> = mentions.clone();
    for _ in 0..fillers {
        let pos = rng.gen_range(0..=tokens.len());
        tokens.insert(pos, FILLER[rng.gen_range(0..FILLER.len())]);
    }
    let text = tokens.join(" ");

    let mut entities: Vec<(String, u32)> = Vec::new();
    for t in tokens.iter().filter(|t| t.starts_with("ent_")) {
        match entities.iter_mut().find(|(e, _)| e == t) {
            Some((_, c)) => *c += 1,
            None => entities.push((t.to_string(), 1)),
        }
    }
    Ticket::new(id, text, entities)
}

/// Generates a corpus that is a pure function of `(config, seed)`.
pub fn generate_synthetic(config: &GeneratorConfig, seed: u64) -> Result<Corpus> {
    config.validate()?;
    let lay = layout(config)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // Resolver popularity: Zipf over a seeded permutation of the groups.
    let mut order: Vec<usize> = (0..config.groups).collect();
    order.shuffle(&mut rng);
    let mut popularity = vec![0.0; config.groups];
    for (rank, &g) in order.iter().enumerate() {
        popularity[g] = 1.0 / ((rank + 1) as f64).powf(config.popularity_skew);
    }
    let resolver_w = WeightedIndex::new(&popularity).expect("positive weights");
    let length_w = if config.one_step_prob < 1.0 {
        Some(WeightedIndex::new(&config.length_weights).expect("validated"))
    } else {
        None
    };

    let width = config.tickets.to_string().len();
    let mut tickets = Vec::with_capacity(config.tickets);
    let mut records = Vec::with_capacity(config.tickets);
    for i in 0..config.tickets {
        let resolver = GroupIdx(resolver_w.sample(&mut rng) as u32);
        let length = match &length_w {
            Some(w) if rng.gen::<f64>() >= config.one_step_prob => w.sample(&mut rng) + 2,
            _ => 1,
        };
        let sequence = draw_sequence(&mut rng, config, &lay, resolver, length);
        let id = format!("T{i:0width$}");
        tickets.push(draw_ticket(&mut rng, config, &lay, id.clone(), &sequence)?);
        records.push(RoutingRecord::new(id, sequence)?);
    }
    Corpus::new(tickets, records, lay.registry)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(tickets: usize, one_step_prob: f64) -> GeneratorConfig {
        GeneratorConfig {
            tickets,
            one_step_prob,
            ..GeneratorConfig::default()
        }
    }

    #[test]
    fn forced_one_step() {
        let c = generate_synthetic(&small(100, 1.0), 7).unwrap();
        assert_eq!(c.records().len(), 100);
        assert!(c.records().iter().all(|r| r.len() == 1));
    }

    #[test]
    fn one_step_fraction_tracks_config() {
        let c = generate_synthetic(&small(2000, 0.55), 42).unwrap();
        let ones = c.records().iter().filter(|r| r.len() == 1).count();
        let frac = ones as f64 / 2000.0;
        assert!((frac - 0.55).abs() <= 0.05, "fraction {frac}");
    }

    #[test]
    fn deterministic_per_seed() {
        let a = generate_synthetic(&small(300, 0.55), 3).unwrap().to_strings().unwrap();
        let b = generate_synthetic(&small(300, 0.55), 3).unwrap().to_strings().unwrap();
        let c = generate_synthetic(&small(300, 0.55), 4).unwrap().to_strings().unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn default_layout() {
        let c = generate_synthetic(&small(50, 0.5), 1).unwrap();
        assert_eq!(c.registry().len(), 50);
        assert_eq!(c.registry().roots().len(), 8);
        for r in c.records() {
            let mut seen = r.sequence.clone();
            seen.sort();
            seen.dedup();
            assert_eq!(seen.len(), r.len(), "no revisits in generated routes");
        }
    }

    #[test]
    fn inconsistent_configs() {
        for bad in [
            GeneratorConfig { groups: 0, ..Default::default() },
            GeneratorConfig { groups: 4, roots: 8, ..Default::default() },
            GeneratorConfig { one_step_prob: 1.5, ..Default::default() },
            GeneratorConfig { affinity_pairs: vec![(0, 9)], ..Default::default() },
            GeneratorConfig { entities_per_ticket: (0, 3), ..Default::default() },
        ] {
            assert!(matches!(generate_synthetic(&bad, 1), Err(Error::Config(_))), "{bad:?}");
        }
    }
}
