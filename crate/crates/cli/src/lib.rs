//! Experiment drivers and report plumbing behind the `addcomb` binary.

pub mod report;
pub mod suites;

use anyhow::{bail, Context};

use report::{summarize, Report, RunConfig};
use suites::{find_suite, make_rng};

/// Runs a named suite under the given configuration. Records are computed in
/// parallel but keyed by instance index, so the report bytes do not depend on
/// the thread count.
pub fn run_suite(cfg: &RunConfig) -> anyhow::Result<Report> {
    let suite = find_suite(&cfg.suite).with_context(|| {
        format!(
            "unknown suite '{}'; available: {}",
            cfg.suite,
            suites::suite_names().join(", ")
        )
    })?;
    let n = cfg.instances.unwrap_or_else(|| suite.default_instances());
    let tolerance = cfg.tolerance;
    let run_all = || -> Vec<report::InstanceRecord> {
        use rayon::prelude::*;
        (0..n)
            .into_par_iter()
            .map(|idx| {
                let seed = report::instance_seed(cfg.seed, suite.name(), idx);
                let mut rng = make_rng(cfg.seed, suite.name(), idx);
                let mut rec = suite.run_instance(idx, &mut rng, tolerance);
                rec.instance = idx;
                rec.seed = seed;
                rec
            })
            .collect()
    };
    let records = if cfg.threads == 0 {
        run_all()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.threads)
            .build()
            .context("building thread pool")?;
        pool.install(run_all)
    };
    let summary = summarize(suite.name(), cfg.seed, &records, suite.ratio_keys());
    Ok(Report { records, summary })
}

/// Convenience wrapper used by tests: run and return the JSONL bytes.
pub fn run_suite_jsonl(cfg: &RunConfig) -> anyhow::Result<String> {
    Ok(run_suite(cfg)?.to_jsonl())
}

pub fn ratio_keys_of(suite: &str) -> anyhow::Result<&'static [&'static str]> {
    match find_suite(suite) {
        Some(s) => Ok(s.ratio_keys()),
        None => bail!("unknown suite '{suite}'"),
    }
}
