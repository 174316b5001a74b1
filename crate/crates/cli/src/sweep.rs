//! One report per value of a scalar config field.

use std::fmt::Write as _;

use crate::build::{build, Experiment};
use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::runner::{num, run_experiment, AggregateReport, Stats, VERSION};

#[derive(Debug, Clone)]
pub struct SweepTable {
    pub param: String,
    pub base_fingerprint: String,
    pub seed: u64,
    pub dim: usize,
    pub rows: Vec<(f64, AggregateReport)>,
}

pub fn sweep(config: &ExperimentConfig, param: &str, values: &[f64]) -> Result<SweepTable, CliError> {
    if values.is_empty() {
        return Err(CliError::Sweep("no values given".into()));
    }
    let mut rows = Vec::with_capacity(values.len());
    let mut dim = 0;
    for &v in values {
        let exp: Experiment = build(&config.with_scalar(param, v)?)?;
        dim = exp.preset.dim();
        rows.push((v, run_experiment(&exp)?.0));
    }
    Ok(SweepTable { param: param.to_string(), base_fingerprint: config.fingerprint(), seed: config.seed, dim, rows })
}

impl SweepTable {
    /// `sweep.csv`: the swept value first, then the final-index statistics of
    /// every start and the per-value fingerprint.
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# sadi {VERSION}");
        let _ = writeln!(s, "# sweep: {}", self.param);
        let _ = writeln!(s, "# fingerprint: {}", self.base_fingerprint);
        let _ = writeln!(s, "# seed: {}", self.seed);
        let mut header = vec![self.param.clone(), "start".into()];
        header.extend(Stats::csv_header(self.dim));
        header.extend(["failures".into(), "fingerprint".into()]);
        let _ = writeln!(s, "{}", header.join(","));
        for (v, rep) in &self.rows {
            for (i, st) in rep.starts.iter().enumerate() {
                let mut row = vec![num(*v), i.to_string()];
                row.extend(st.final_stats().csv_fields());
                row.extend([st.failures.len().to_string(), rep.provenance.fingerprint.clone()]);
                let _ = writeln!(s, "{}", row.join(","));
            }
        }
        s
    }
}
