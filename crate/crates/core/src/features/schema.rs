use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;
pub const NUM_FEATURES: usize = 35;

pub const FEATURE_NAMES: [&str; NUM_FEATURES] = [
    // T
    "t_length",
    "t_clarity",
    "t_entity_occurrences",
    "t_entity_density",
    "t_ief_sum",
    // G
    "g_log_p_participant",
    "g_log_p_initial",
    "g_log_p_resolver",
    "g_in_degree",
    "g_out_degree",
    "g_total_degree",
    "g_weighted_in",
    "g_weighted_out",
    "g_weighted_total",
    "g_harmonic",
    "g_closeness",
    "g_betweenness",
    "g_eigenvector",
    "g_eigenvector_out",
    "g_pagerank",
    "g_hub",
    "g_authority",
    "g_clustering",
    "g_eccentricity",
    // TG
    "tg_log_p_group",
    "tg_cos_entity",
    "tg_cos_embedding",
    "tg_embedding_distance",
    "tg_qlm",
    "tg_bm25",
    "tg_sdm",
    // GG
    "gg_sequence_length",
    "gg_p_fms",
    "gg_p_vms",
    "gg_p_collocation",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Block {
    T,
    G,
    TG,
    GG,
}

impl Block {
    pub const ALL: [Block; 4] = [Block::T, Block::G, Block::TG, Block::GG];

    pub fn range(self) -> Range<usize> {
        match self {
            Block::T => 0..5,
            Block::G => 5..24,
            Block::TG => 24..31,
            Block::GG => 31..35,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Block::T => "T",
            Block::G => "G",
            Block::TG => "TG",
            Block::GG => "GG",
        }
    }

    pub fn of_slot(slot: usize) -> Block {
        Block::ALL.into_iter().find(|b| b.range().contains(&slot)).expect("slot out of range")
    }
}

impl fmt::Display for Block {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Block {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "T" => Ok(Block::T),
            "G" => Ok(Block::G),
            "TG" => Ok(Block::TG),
            "GG" => Ok(Block::GG),
            other => Err(Error::Config(format!("unknown feature block `{other}`"))),
        }
    }
}

/// Which blocks are active. Masked slots are forced to zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockMask {
    pub t: bool,
    pub g: bool,
    pub tg: bool,
    pub gg: bool,
}

impl Default for BlockMask {
    fn default() -> Self {
        BlockMask::all()
    }
}

impl BlockMask {
    pub fn all() -> Self {
        BlockMask {
            t: true,
            g: true,
            tg: true,
            gg: true,
        }
    }

    pub fn none() -> Self {
        BlockMask {
            t: false,
            g: false,
            tg: false,
            gg: false,
        }
    }

    pub fn contains(&self, b: Block) -> bool {
        match b {
            Block::T => self.t,
            Block::G => self.g,
            Block::TG => self.tg,
            Block::GG => self.gg,
        }
    }

    pub fn set(&mut self, b: Block, on: bool) {
        match b {
            Block::T => self.t = on,
            Block::G => self.g = on,
            Block::TG => self.tg = on,
            Block::GG => self.gg = on,
        }
    }

    pub fn without(mut self, b: Block) -> Self {
        self.set(b, false);
        self
    }

    pub fn blocks(&self) -> Vec<Block> {
        Block::ALL.into_iter().filter(|&b| self.contains(b)).collect()
    }

    pub fn slot_active(&self, slot: usize) -> bool {
        self.contains(Block::of_slot(slot))
    }

    /// Zeroes the slots of inactive blocks.
    pub fn apply(&self, x: &mut [f64]) {
        for b in Block::ALL {
            if !self.contains(b) {
                x[b.range()].iter_mut().for_each(|v| *v = 0.0);
            }
        }
    }

    /// Parses a comma list such as `T,G,TG`.
    pub fn parse(s: &str) -> Result<Self> {
        let mut m = BlockMask::none();
        for part in s.split(',').filter(|p| !p.trim().is_empty()) {
            m.set(part.parse()?, true);
        }
        if m == BlockMask::none() {
            return Err(Error::Config("block list selects no features".into()));
        }
        Ok(m)
    }
}

impl fmt::Display for BlockMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = self.blocks().into_iter().map(Block::name).collect();
        f.write_str(&names.join(","))
    }
}

/// Hex SHA-256 over the schema version and slot names.
pub fn schema_hash() -> String {
    let mut h = Sha256::new();
    h.update(SCHEMA_VERSION.to_le_bytes());
    for n in FEATURE_NAMES {
        h.update(n.as_bytes());
        h.update([0u8]);
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// A feature vector in schema order.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureVector(pub [f64; NUM_FEATURES]);

impl FeatureVector {
    pub fn block(&self, b: Block) -> &[f64] {
        &self.0[b.range()]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}
