//! Seeded Monte Carlo sweeps over one generator parameter.
//!
//! Replicate `r` of sweep value `v` uses seeds `derive_seed(master, [v, r, s])`
//! with `s = 0` for the ground truth, `1` for adjacency sampling and `2` for
//! the fit. Cells run in parallel; aggregation walks replicates in index
//! order, so the table does not depend on the worker count.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{evaluate, ErrorReport};
use crate::netmodel::{generate_truth, sample_adjacency, DimpleConfig, ModelKind};
use crate::rng::derive_seed;
use crate::spectral::{fit_dimple, fit_stack, FitOptions, KMeansOptions, SquareMode};

pub const DEFAULT_REPLICATES: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepAxis {
    #[serde(rename = "n")]
    Nodes,
    #[serde(rename = "L")]
    Layers,
    #[serde(rename = "w")]
    Assortativity,
    #[serde(rename = "d")]
    Density,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::Nodes => "n",
            SweepAxis::Layers => "L",
            SweepAxis::Assortativity => "w",
            SweepAxis::Density => "d",
        }
    }

    fn is_integer(self) -> bool {
        matches!(self, SweepAxis::Nodes | SweepAxis::Layers)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    RBl,
    RWl,
    RSAve,
    RSMax,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::RBl => "r_bl",
            Metric::RWl => "r_wl",
            Metric::RSAve => "r_s_ave",
            Metric::RSMax => "r_s_max",
        }
    }

    fn extract(self, report: &ErrorReport) -> Option<f64> {
        match self {
            Metric::RBl => Some(report.r_bl),
            Metric::RWl => report.r_wl,
            Metric::RSAve => Some(report.r_s_ave),
            Metric::RSMax => Some(report.r_s_max),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
}

/// One experiment: a base configuration swept along one axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentGrid {
    pub model: ModelKind,
    /// Base generator configuration; its `seed` is ignored.
    pub base: DimpleConfig,
    pub sweep: Sweep,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    #[serde(default)]
    pub master_seed: u64,
    pub metrics: Vec<Metric>,
    /// Fit the probability layers themselves instead of sampled adjacency.
    #[serde(default)]
    pub noiseless: bool,
    #[serde(default)]
    pub kmeans: KMeansOptions,
}

fn default_replicates() -> usize {
    DEFAULT_REPLICATES
}

impl ExperimentGrid {
    pub fn from_toml(text: &str) -> Result<Self> {
        let grid: Self = toml::from_str(text).map_err(|e| Error::Config(format!("grid file: {e}")))?;
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        if self.replicates == 0 {
            return Err(Error::Config("replicates must be at least 1".into()));
        }
        if self.sweep.values.is_empty() {
            return Err(Error::Config("sweep has no values".into()));
        }
        if self.sweep.values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("sweep values must be strictly increasing".into()));
        }
        if self.metrics.is_empty() {
            return Err(Error::Config("no metrics requested".into()));
        }
        if self.model == ModelKind::Gdpg && self.metrics.contains(&Metric::RWl) {
            return Err(Error::Config("r_wl is undefined for the gdpg model".into()));
        }
        for (i, _) in self.sweep.values.iter().enumerate() {
            self.config_at(i, 0)?.validate(self.model == ModelKind::Gdpg)?;
        }
        Ok(())
    }

    /// Generator configuration of sweep cell `index` with seed `seed`.
    pub fn config_at(&self, index: usize, seed: u64) -> Result<DimpleConfig> {
        let v = self.sweep.values[index];
        let mut cfg = self.base.clone();
        cfg.seed = seed;
        if self.sweep.axis.is_integer() && (v.fract() != 0.0 || v < 1.0) {
            return Err(Error::Config(format!("{} must be a positive integer, got {v}", self.sweep.axis.name())));
        }
        match self.sweep.axis {
            SweepAxis::Nodes => cfg.n = v as usize,
            SweepAxis::Layers => cfg.num_layers = v as usize,
            SweepAxis::Assortativity => cfg.w = v,
            SweepAxis::Density => cfg.d_hi = v,
        }
        Ok(cfg)
    }

    /// Seed of stage `stage` in replicate `rep` of cell `index`.
    pub fn replicate_seed(&self, index: usize, rep: usize, stage: u64) -> u64 {
        derive_seed(self.master_seed, &[index as u64, rep as u64, stage])
    }

    fn run_replicate(&self, index: usize, rep: usize) -> Result<ErrorReport> {
        let cfg = self.config_at(index, self.replicate_seed(index, rep, 0))?;
        let truth = generate_truth::<f64>(self.model, &cfg)?;
        let mut opts = FitOptions {
            kmeans: self.kmeans,
            subspaces_only: self.model == ModelKind::Gdpg,
            squares: SquareMode::BiasAdjusted,
        };
        let fit_seed = self.replicate_seed(index, rep, 2);
        let fit = if self.noiseless {
            opts.squares = SquareMode::Exact;
            fit_stack(&truth.probability_stack(), cfg.num_groups, &cfg.community_counts, &opts, fit_seed)?
        } else {
            let net = sample_adjacency(&truth, self.replicate_seed(index, rep, 1));
            fit_dimple::<f64>(&net, cfg.num_groups, &cfg.community_counts, &opts, fit_seed)?
        };
        evaluate(&fit, &truth)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridRow {
    pub model: ModelKind,
    pub axis: SweepAxis,
    pub axis_value: f64,
    pub metric: Metric,
    /// Mean over successful replicates (NaN if none succeeded).
    pub mean: f64,
    /// Sample standard deviation (0 for fewer than two successes).
    pub std: f64,
    pub replicates: usize,
    pub failed_count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridTable {
    pub rows: Vec<GridRow>,
}

pub const CSV_HEADER: &str = "model,axis_name,axis_value,metric,mean,std,replicates,failed_count";

impl GridTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let value = if r.axis.is_integer() {
                format!("{}", r.axis_value as u64)
            } else {
                format!("{}", r.axis_value)
            };
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                r.model.name(),
                r.axis.name(),
                value,
                r.metric.name(),
                r.mean,
                r.std,
                r.replicates,
                r.failed_count
            );
        }
        out
    }

    pub fn get(&self, axis_value: f64, metric: Metric) -> Option<&GridRow> {
        self.rows.iter().find(|r| r.axis_value == axis_value && r.metric == metric)
    }
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Runs every replicate of every cell and aggregates the requested metrics.
///
/// `workers` bounds the thread count (default: available parallelism).
pub fn run_grid(grid: &ExperimentGrid, workers: Option<usize>) -> Result<GridTable> {
    grid.validate()?;
    let jobs: Vec<(usize, usize)> = (0..grid.sweep.values.len())
        .flat_map(|i| (0..grid.replicates).map(move |r| (i, r)))
        .collect();
    let run = || -> Vec<Result<ErrorReport>> {
        jobs.par_iter().map(|&(i, r)| grid.run_replicate(i, r)).collect()
    };
    let outcomes = match workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w.max(1))
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?
            .install(run),
        None => run(),
    };

    let mut rows = Vec::new();
    for (i, &value) in grid.sweep.values.iter().enumerate() {
        let cell = &outcomes[i * grid.replicates..(i + 1) * grid.replicates];
        let failed = cell.iter().filter(|o| o.is_err()).count();
        for &metric in &grid.metrics {
            let vals: Vec<f64> = cell
                .iter()
                .filter_map(|o| o.as_ref().ok())
                .filter_map(|rep| metric.extract(rep))
                .collect();
            let (mean, std) = mean_std(&vals);
            rows.push(GridRow {
                model: grid.model,
                axis: grid.sweep.axis,
                axis_value: value,
                metric,
                mean,
                std,
                replicates: grid.replicates,
                failed_count: failed,
            });
        }
    }
    Ok(GridTable { rows })
}
