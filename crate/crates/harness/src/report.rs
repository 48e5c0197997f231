//! Summary table over one or more metrics files.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::Result;
use crate::runner::{read_metrics, MetricsRecord};
use crate::stats::mean_stderr;

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub env: String,
    pub algo: String,
    pub reps: usize,
    pub final_mean: f64,
    pub final_stderr: f64,
    pub step_time_ns: f64,
    /// Mean over replications of the final node count.
    pub nodes: f64,
    /// Final size relative to the fixed-grid counterpart on the same environment.
    pub size_ratio: Option<f64>,
}

fn counterpart(algo: &str) -> Option<&'static str> {
    match algo {
        "adaql" => Some("eps_ql"),
        "adamb" => Some("eps_mb"),
        _ => None,
    }
}

pub fn summarize(records: &[MetricsRecord]) -> Vec<ReportRow> {
    let mut groups: BTreeMap<(&str, &str), Vec<&MetricsRecord>> = BTreeMap::new();
    for r in records {
        groups.entry((&r.env, &r.algo)).or_default().push(r);
    }
    let mut rows: Vec<ReportRow> = groups
        .iter()
        .map(|(&(env, algo), recs)| {
            let mut finals: BTreeMap<usize, &MetricsRecord> = BTreeMap::new();
            for r in recs {
                let slot = finals.entry(r.rep).or_insert(r);
                if r.episode > slot.episode {
                    *slot = r;
                }
            }
            let cum: Vec<f64> = finals.values().map(|r| r.cum_reward).collect();
            let (final_mean, final_stderr) = mean_stderr(&cum);
            let nodes = finals.values().map(|r| r.nodes as f64).sum::<f64>() / finals.len() as f64;
            let step_time_ns =
                recs.iter().map(|r| r.step_time_ns as f64).sum::<f64>() / recs.len() as f64;
            ReportRow {
                env: env.to_string(),
                algo: algo.to_string(),
                reps: finals.len(),
                final_mean,
                final_stderr,
                step_time_ns,
                nodes,
                size_ratio: None,
            }
        })
        .collect();
    let sizes: BTreeMap<(String, String), f64> = rows
        .iter()
        .map(|r| ((r.env.clone(), r.algo.clone()), r.nodes))
        .collect();
    for row in &mut rows {
        row.size_ratio = counterpart(&row.algo)
            .and_then(|u| sizes.get(&(row.env.clone(), u.to_string())))
            .map(|&uniform| row.nodes / uniform);
    }
    rows
}

pub fn to_tsv(rows: &[ReportRow]) -> String {
    let mut out = String::from(
        "env\talgo\treps\tfinal_cum_reward\tstderr\tstep_time_ns\tnodes\tsize_ratio\n",
    );
    for r in rows {
        let ratio = r
            .size_ratio
            .map_or_else(|| "-".to_string(), |v| format!("{v:.4}"));
        out.push_str(&format!(
            "{}\t{}\t{}\t{:.4}\t{:.4}\t{:.1}\t{:.1}\t{}\n",
            r.env, r.algo, r.reps, r.final_mean, r.final_stderr, r.step_time_ns, r.nodes, ratio
        ));
    }
    out
}

pub fn report_files<P: AsRef<Path>>(paths: &[P]) -> Result<Vec<ReportRow>> {
    let mut records = Vec::new();
    for p in paths {
        records.extend(read_metrics(p.as_ref())?);
    }
    Ok(summarize(&records))
}
