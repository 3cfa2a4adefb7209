use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// All metrics of one system on one test set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricsReport {
    pub test_set: String,
    pub system: String,
    pub tickets: usize,
    pub mstr: f64,
    /// RR(1..=10)
    pub rr: Vec<f64>,
    /// MADR@1..=10
    pub madr: Vec<f64>,
    /// HR@1, HR@3, HR@5
    pub hr: Option<[f64; 3]>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportSet {
    pub reports: Vec<MetricsReport>,
}

impl ReportSet {
    pub fn get(&self, test_set: &str, system: &str) -> Option<&MetricsReport> {
        self.reports.iter().find(|r| r.test_set == test_set && r.system == system)
    }

    /// One row per test set, system, metric and cutoff.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("test_set,system,metric,k,value\n");
        for r in &self.reports {
            let mut row = |m: &str, k: Option<usize>, v: f64| {
                let k = k.map(|k| k.to_string()).unwrap_or_default();
                writeln!(s, "{},{},{m},{k},{v}", r.test_set, r.system).unwrap();
            };
            row("mstr", None, r.mstr);
            for (i, v) in r.rr.iter().enumerate() {
                row("rr", Some(i + 1), *v);
            }
            for (i, v) in r.madr.iter().enumerate() {
                row("madr", Some(i + 1), *v);
            }
            if let Some(hr) = r.hr {
                for (k, v) in [1, 3, 5].into_iter().zip(hr) {
                    row("hr", Some(k), v);
                }
            }
        }
        s
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}
