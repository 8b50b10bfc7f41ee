//! Protocol × network size × seed experiment matrices.
//!
//! Output files in the target directory:
//!
//! - `summary.csv`: one row per run, columns from [`metrics::summary_header`].
//! - `regional.csv`: `protocol,seed,n,region_lo,region_hi,mean_e`.
//! - `comparison.csv`: per size and metric, the mean/min/max over seeds for
//!   each protocol and the GEAMS minus GPSR difference of means.
//! - `packets.csv` (optional): one row per packet.
//!
//! Rows always follow plan order, independent of how many runs execute in
//! parallel.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use thiserror::Error;

use crate::metrics::{self, MetricsReport};
use crate::routing::Protocol;
use crate::sim::config::ScenarioConfig;
use crate::sim::{self, SimError};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv output {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("invalid plan: {0}")]
    Plan(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Cell {
    pub protocol: Protocol,
    pub n_sensors: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentPlan {
    pub protocols: Vec<Protocol>,
    pub node_counts: Vec<usize>,
    pub seeds: Vec<u64>,
    pub scenario: ScenarioConfig,
}

impl ExperimentPlan {
    pub fn from_scenario(scenario: ScenarioConfig) -> Self {
        Self {
            protocols: scenario.protocols.clone(),
            node_counts: scenario.node_counts.clone(),
            seeds: scenario.seeds.clone(),
            scenario,
        }
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        if self.protocols.is_empty() || self.node_counts.is_empty() || self.seeds.is_empty() {
            return Err(ExperimentError::Plan("protocols, node counts and seeds must be nonempty".into()));
        }
        fn has_dupes<T: Ord + Clone>(v: &[T]) -> bool {
            let mut s = v.to_vec();
            s.sort();
            s.windows(2).any(|w| w[0] == w[1])
        }
        if has_dupes(&self.protocols) || has_dupes(&self.node_counts) || has_dupes(&self.seeds) {
            return Err(ExperimentError::Plan("duplicate entries would run a cell twice".into()));
        }
        if self.node_counts.contains(&0) {
            return Err(ExperimentError::Plan("sensor counts must be positive".into()));
        }
        self.scenario.validate().map_err(SimError::from)?;
        Ok(())
    }

    /// Every combination exactly once, protocol-major then size then seed.
    pub fn cells(&self) -> Vec<Cell> {
        let mut out = Vec::with_capacity(self.protocols.len() * self.node_counts.len() * self.seeds.len());
        for &protocol in &self.protocols {
            for &n_sensors in &self.node_counts {
                for &seed in &self.seeds {
                    out.push(Cell {
                        protocol,
                        n_sensors,
                        seed,
                    });
                }
            }
        }
        out
    }
}

/// Runs every cell, on `jobs` threads when `jobs > 1`. Reports come back in
/// [`ExperimentPlan::cells`] order.
pub fn run_plan(plan: &ExperimentPlan, jobs: usize) -> Result<Vec<MetricsReport>, ExperimentError> {
    plan.validate()?;
    let cells = plan.cells();
    let run_cell = |c: &Cell| sim::run(&plan.scenario, c.protocol, c.n_sensors, c.seed);
    let results: Vec<Result<MetricsReport, SimError>> = if jobs > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| ExperimentError::Plan(format!("thread pool: {e}")))?;
        pool.install(|| cells.par_iter().map(run_cell).collect())
    } else {
        cells.iter().map(run_cell).collect()
    };
    results.into_iter().map(|r| r.map_err(Into::into)).collect()
}

/// One line of `comparison.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub n_sensors: usize,
    pub metric: &'static str,
    pub geams: Option<Aggregate>,
    pub gpsr: Option<Aggregate>,
}

impl ComparisonRow {
    pub fn delta_mean(&self) -> Option<f64> {
        Some(self.geams?.mean - self.gpsr?.mean)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aggregate {
    pub mean: f64,
    pub min: f64,
    pub max: f64,
}

impl Aggregate {
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        Some(Self {
            mean: values.iter().sum::<f64>() / values.len() as f64,
            min: values.iter().copied().fold(f64::INFINITY, f64::min),
            max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        })
    }
}

type MetricFn = fn(&MetricsReport) -> Option<f64>;

pub const COMPARED_METRICS: [(&str, MetricFn); 7] = [
    ("dead", |r| Some(r.dead_nodes as f64)),
    ("mean_e", |r| r.mean_energy),
    ("var_e", |r| r.energy_variance),
    ("delay_mean", |r| r.delay_mean),
    ("delay_var", |r| r.delay_variance),
    ("delivered", |r| Some(r.delivered as f64)),
    ("lost_total", |r| Some(r.lost_total() as f64)),
];

/// Aggregates over seeds, ordered by first appearance of each size.
pub fn comparison(reports: &[MetricsReport]) -> Vec<ComparisonRow> {
    let mut sizes: Vec<usize> = Vec::new();
    for r in reports {
        if !sizes.contains(&r.n_sensors) {
            sizes.push(r.n_sensors);
        }
    }
    let agg = |protocol: Protocol, n: usize, f: MetricFn| {
        let values: Vec<f64> = reports
            .iter()
            .filter(|r| r.protocol == protocol && r.n_sensors == n)
            .filter_map(f)
            .collect();
        Aggregate::of(&values)
    };
    let mut rows = Vec::new();
    for n in sizes {
        for (metric, f) in COMPARED_METRICS {
            rows.push(ComparisonRow {
                n_sensors: n,
                metric,
                geams: agg(Protocol::Geams, n, f),
                gpsr: agg(Protocol::Gpsr, n, f),
            });
        }
    }
    rows
}

pub const COMPARISON_HEADER: [&str; 9] = [
    "n",
    "metric",
    "geams_mean",
    "geams_min",
    "geams_max",
    "gpsr_mean",
    "gpsr_min",
    "gpsr_max",
    "delta_mean",
];

fn comparison_record(row: &ComparisonRow) -> Vec<String> {
    let cell = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    vec![
        row.n_sensors.to_string(),
        row.metric.to_string(),
        cell(row.geams.map(|a| a.mean)),
        cell(row.geams.map(|a| a.min)),
        cell(row.geams.map(|a| a.max)),
        cell(row.gpsr.map(|a| a.mean)),
        cell(row.gpsr.map(|a| a.min)),
        cell(row.gpsr.map(|a| a.max)),
        cell(row.delta_mean()),
    ]
}

/// Paths of the files written by [`write_outputs`].
#[derive(Debug, Clone, PartialEq)]
pub struct OutputFiles {
    pub summary: PathBuf,
    pub regional: PathBuf,
    pub comparison: PathBuf,
    pub packets: Option<PathBuf>,
}

fn create(path: &Path) -> Result<BufWriter<File>, ExperimentError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|source| ExperimentError::Io {
            path: path.to_path_buf(),
            source,
        })
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> ExperimentError + '_ {
    move |source| ExperimentError::Csv {
        path: path.to_path_buf(),
        source,
    }
}

pub fn write_outputs(dir: &Path, reports: &[MetricsReport], with_packets: bool) -> Result<OutputFiles, ExperimentError> {
    std::fs::create_dir_all(dir).map_err(|source| ExperimentError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let summary = dir.join("summary.csv");
    metrics::write_csv(create(&summary)?, &metrics::summary_header(), reports.iter().map(metrics::summary_row))
        .map_err(csv_err(&summary))?;

    let regional = dir.join("regional.csv");
    metrics::write_csv(
        create(&regional)?,
        &metrics::REGIONAL_HEADER,
        reports.iter().flat_map(metrics::regional_rows),
    )
    .map_err(csv_err(&regional))?;

    let comparison_path = dir.join("comparison.csv");
    metrics::write_csv(
        create(&comparison_path)?,
        &COMPARISON_HEADER,
        comparison(reports).iter().map(comparison_record),
    )
    .map_err(csv_err(&comparison_path))?;

    let packets = if with_packets {
        let path = dir.join("packets.csv");
        metrics::write_csv(create(&path)?, &metrics::PACKET_HEADER, reports.iter().flat_map(metrics::packet_rows))
            .map_err(csv_err(&path))?;
        Some(path)
    } else {
        None
    };

    Ok(OutputFiles {
        summary,
        regional,
        comparison: comparison_path,
        packets,
    })
}

/// Runs a plan and writes its outputs.
pub fn run_experiment(plan: &ExperimentPlan, jobs: usize, out_dir: &Path, with_packets: bool) -> Result<(Vec<MetricsReport>, OutputFiles), ExperimentError> {
    let reports = run_plan(plan, jobs)?;
    let files = write_outputs(out_dir, &reports, with_packets)?;
    Ok((reports, files))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_plan_has_160_cells() {
        let plan = ExperimentPlan::from_scenario(ScenarioConfig::default());
        let cells = plan.cells();
        assert_eq!(cells.len(), 2 * 4 * 20);
        let mut uniq = cells.iter().map(|c| (c.protocol, c.n_sensors, c.seed)).collect::<Vec<_>>();
        uniq.sort();
        uniq.dedup();
        assert_eq!(uniq.len(), 160);
    }

    #[test]
    fn duplicate_seeds_rejected() {
        let mut plan = ExperimentPlan::from_scenario(ScenarioConfig::default());
        plan.seeds = vec![1, 1];
        assert!(plan.validate().is_err());
    }

    #[test]
    fn aggregate_of_values() {
        let a = Aggregate::of(&[1.0, 3.0, 2.0]).unwrap();
        assert_eq!((a.mean, a.min, a.max), (2.0, 1.0, 3.0));
        assert_eq!(Aggregate::of(&[]), None);
    }
}
