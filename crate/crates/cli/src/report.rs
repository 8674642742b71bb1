//! Run configuration, per-instance records and deterministic report
//! emission.
//!
//! Reports are JSON Lines: one record per instance followed by a summary
//! object. Identical configurations produce byte-identical reports at any
//! thread count, so wall-clock timings stay out of the report body and go to
//! stderr instead.

use serde::Serialize;
use serde_json::{Map, Value};

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub suite: String,
    pub seed: u64,
    pub instances: Option<usize>,
    pub tolerance: f64,
    /// 0 uses the default rayon pool.
    pub threads: usize,
}

impl RunConfig {
    pub fn new(suite: &str, seed: u64) -> Self {
        RunConfig {
            suite: suite.to_string(),
            seed,
            instances: None,
            tolerance: 1e-9,
            threads: 0,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct InstanceRecord {
    pub instance: usize,
    pub seed: u64,
    pub digest: String,
    pub pass: bool,
    pub quantities: Map<String, Value>,
}

impl InstanceRecord {
    pub fn new(instance: usize, seed: u64, inputs: &str, pass: bool) -> Self {
        InstanceRecord {
            instance,
            seed,
            digest: format!("{:016x}", fnv64(inputs.as_bytes())),
            pass,
            quantities: Map::new(),
        }
    }

    pub fn put(&mut self, key: &str, value: impl Into<Value>) {
        self.quantities.insert(key.to_string(), value.into());
    }

    pub fn number(&self, key: &str) -> Option<f64> {
        self.quantities.get(key).and_then(|v| v.as_f64())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RatioSummary {
    pub name: String,
    pub min: f64,
    pub median: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub suite: String,
    pub build: String,
    pub seed: u64,
    pub instances: usize,
    pub passed: usize,
    pub failed: usize,
    pub ratios: Vec<RatioSummary>,
}

#[derive(Debug, Clone)]
pub struct Report {
    pub records: Vec<InstanceRecord>,
    pub summary: Summary,
}

impl Report {
    pub fn all_pass(&self) -> bool {
        self.summary.failed == 0
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&serde_json::to_string(r).expect("record serializes"));
            out.push('\n');
        }
        let tagged = serde_json::json!({ "summary": self.summary });
        out.push_str(&serde_json::to_string(&tagged).expect("summary serializes"));
        out.push('\n');
        out
    }

    /// Ratio table: per-instance rows for each summarized key, then the
    /// min/median summary rows.
    pub fn to_csv(&self, keys: &[&str]) -> String {
        let mut out = String::from("instance,name,value\n");
        for r in &self.records {
            for &k in keys {
                if let Some(v) = r.number(k) {
                    out.push_str(&format!("{},{},{}\n", r.instance, k, v));
                }
            }
        }
        for rs in &self.summary.ratios {
            out.push_str(&format!("min,{},{}\n", rs.name, rs.min));
            out.push_str(&format!("median,{},{}\n", rs.name, rs.median));
        }
        out
    }
}

pub fn fnv64(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Per-instance seed derived from (run seed, suite name, instance index);
/// instance k is independent of the instance count.
pub fn instance_seed(seed: u64, suite: &str, idx: usize) -> u64 {
    splitmix64(seed ^ fnv64(suite.as_bytes()).rotate_left(17) ^ splitmix64(idx as u64))
}

pub fn build_digest() -> String {
    let basis = format!(
        "{}-{}-report-v1",
        env!("CARGO_PKG_NAME"),
        env!("CARGO_PKG_VERSION")
    );
    format!("{:016x}", fnv64(basis.as_bytes()))
}

fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

pub fn summarize(
    suite: &str,
    seed: u64,
    records: &[InstanceRecord],
    ratio_keys: &[&str],
) -> Summary {
    let passed = records.iter().filter(|r| r.pass).count();
    let ratios = ratio_keys
        .iter()
        .filter_map(|&k| {
            let mut vals: Vec<f64> = records.iter().filter_map(|r| r.number(k)).collect();
            if vals.is_empty() {
                return None;
            }
            vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
            Some(RatioSummary {
                name: k.to_string(),
                min: vals[0],
                median: median(&vals),
            })
        })
        .collect();
    Summary {
        suite: suite.to_string(),
        build: build_digest(),
        seed,
        instances: records.len(),
        passed,
        failed: records.len() - passed,
        ratios,
    }
}
