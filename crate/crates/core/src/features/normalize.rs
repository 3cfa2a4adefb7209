use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::schema::{schema_hash, FEATURE_NAMES, NUM_FEATURES};
use crate::error::{Error, Result};

/// Per-slot (min, max) from training rows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormalizationTable {
    pub schema_hash: String,
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl NormalizationTable {
    /// Fits on raw rows; non-finite values are ignored.
    pub fn fit<'a, I>(rows: I) -> Result<Self>
    where
        I: IntoIterator<Item = &'a [f64; NUM_FEATURES]>,
    {
        let mut min = vec![f64::INFINITY; NUM_FEATURES];
        let mut max = vec![f64::NEG_INFINITY; NUM_FEATURES];
        let mut n = 0usize;
        for row in rows {
            n += 1;
            for (i, &v) in row.iter().enumerate() {
                if v.is_finite() {
                    min[i] = min[i].min(v);
                    max[i] = max[i].max(v);
                }
            }
        }
        if n == 0 {
            return Err(Error::Empty("no training rows to fit normalization".into()));
        }
        for i in 0..NUM_FEATURES {
            if !min[i].is_finite() {
                min[i] = 0.0;
                max[i] = 0.0;
            }
        }
        Ok(NormalizationTable {
            schema_hash: schema_hash(),
            min,
            max,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_hash != schema_hash() {
            return Err(Error::SchemaMismatch {
                expected: schema_hash(),
                found: self.schema_hash.clone(),
            });
        }
        if self.min.len() != NUM_FEATURES || self.max.len() != NUM_FEATURES {
            return Err(Error::Validation(format!(
                "normalization table has {} / {} slots, expected {NUM_FEATURES}",
                self.min.len(),
                self.max.len()
            )));
        }
        for i in 0..NUM_FEATURES {
            if !(self.min[i].is_finite() && self.max[i].is_finite() && self.min[i] <= self.max[i]) {
                return Err(Error::Validation(format!("bad range for slot {}", FEATURE_NAMES[i])));
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let t: NormalizationTable = serde_json::from_str(text)?;
        t.validate()?;
        Ok(t)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("table serializes")
    }

    /// Normalizes one slot: clamped to [0, 1], degenerate or non-finite -> 0.
    pub fn scale(&self, slot: usize, v: f64) -> f64 {
        let (lo, hi) = (self.min[slot], self.max[slot]);
        if !v.is_finite() || hi <= lo {
            return 0.0;
        }
        ((v - lo) / (hi - lo)).clamp(0.0, 1.0)
    }

    pub fn apply(&self, raw: &[f64; NUM_FEATURES]) -> Result<[f64; NUM_FEATURES]> {
        if self.min.len() != NUM_FEATURES || self.max.len() != NUM_FEATURES {
            return Err(Error::Validation("normalization table is not fitted to this schema".into()));
        }
        let mut out = [0.0; NUM_FEATURES];
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.scale(i, raw[i]);
        }
        Ok(out)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FeatureRow {
    pub ticket_id: String,
    pub step: usize,
    pub group_id: String,
    pub label: f64,
    pub values: [f64; NUM_FEATURES],
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct FeatureMatrix {
    pub rows: Vec<FeatureRow>,
}

impl FeatureMatrix {
    pub fn header() -> String {
        format!("ticket_id,step,group_id,label,{}", FEATURE_NAMES.join(","))
    }

    pub fn to_csv(&self) -> String {
        let mut s = Self::header();
        s.push('\n');
        for r in &self.rows {
            write!(s, "{},{},{},{}", r.ticket_id, r.step, r.group_id, r.label).unwrap();
            for v in &r.values {
                write!(s, ",{v}").unwrap();
            }
            s.push('\n');
        }
        s
    }
}
