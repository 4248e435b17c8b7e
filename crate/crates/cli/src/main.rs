//! `dimple`: generate, fit, simulate, rank-select and ingest multiplex networks.
//!
//! Exit codes: 0 success, 2 usage error, 3 data error, 4 numerical failure.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use dimple::io::{
    binarize_weighted, filter_nodes_by_weight, load_stack, load_truth, read_labels, save_network_named, save_truth,
    write_id_map, write_results, WeightedEdgeList,
};
use dimple::linalg::{eigengap_select, gram_from_bases};
use dimple::metrics::evaluate_parts;
use dimple::netmodel::{generate_truth, sample_adjacency, DimpleConfig, ModelKind};
use dimple::simharness::{run_grid, ExperimentGrid};
use dimple::spectral::{
    aggregate_groups, fit_stack, layer_embeddings, layer_squares, FitOptions, KMeansOptions, LayerPartition, SquareMode,
};
use dimple::{Error, Stack};

/// Best eigengap ratio below which a rank suggestion is flagged as weak.
const LOW_CONFIDENCE_RATIO: f64 = 1.5;
const FULL_REPLICATES: usize = 500;

#[derive(Parser)]
#[command(name = "dimple", version, about = "Spectral clustering of multiplex networks with grouped layers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Model {
    Dimple,
    Gdpg,
}

#[derive(Clone, Copy, ValueEnum)]
enum RankTarget {
    Layers,
    Groups,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a synthetic network and write it with its ground truth.
    Generate {
        #[arg(long, value_enum)]
        model: Model,
        #[arg(long)]
        n: usize,
        #[arg(long = "L")]
        layers: usize,
        #[arg(long = "M")]
        groups: usize,
        /// Communities (or subspace dimension) per group: one value or M values.
        #[arg(long = "K", value_delimiter = ',', required = true)]
        k: Vec<usize>,
        #[arg(long, default_value_t = 0.0)]
        c: f64,
        #[arg(long)]
        d: f64,
        #[arg(long)]
        w: f64,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Cluster layers, estimate group subspaces and cluster nodes.
    Fit {
        #[arg(long)]
        input: PathBuf,
        #[arg(long = "M")]
        groups: usize,
        #[arg(long = "K", value_delimiter = ',', required = true)]
        k: Vec<usize>,
        /// Stop after subspace estimation.
        #[arg(long)]
        subspaces_only: bool,
        /// k-means restarts.
        #[arg(long)]
        epsilon_restarts: Option<usize>,
        /// Square layers exactly instead of bias-adjusting (for noiseless input).
        #[arg(long)]
        exact: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Ground-truth directory written by `generate`; adds error rates.
        #[arg(long)]
        truth: Option<PathBuf>,
    },
    /// Run a Monte Carlo grid and write its CSV table.
    Simulate {
        #[arg(long)]
        grid: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Override the grid's replicate count.
        #[arg(long)]
        reps: Option<usize>,
        /// Use 500 replicates per cell.
        #[arg(long, conflicts_with = "reps")]
        full: bool,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Print spectra and eigengap suggestions for M or for each K_m.
    Rank {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value = "layers")]
        what: RankTarget,
        /// Number of groups (required for `--what groups`).
        #[arg(long = "M")]
        groups: Option<usize>,
        /// Layer label file, e.g. `layer_labels.txt` from a previous fit.
        #[arg(long)]
        labels: Option<PathBuf>,
        /// Largest rank considered.
        #[arg(long, default_value_t = 10)]
        k_max: usize,
        #[arg(long)]
        exact: bool,
    },
    /// Threshold weighted (possibly directed) edge lists into a network.
    Ingest {
        #[arg(long)]
        n: usize,
        /// Edge files with `i j w` lines, one per layer.
        #[arg(long, value_delimiter = ',', required = true)]
        layers: Vec<PathBuf>,
        /// One threshold for all layers or one per layer.
        #[arg(long, value_delimiter = ',', required = true)]
        thresholds: Vec<f64>,
        /// Ambient dimension per layer: one value or one per layer.
        #[arg(long = "K", value_delimiter = ',', required = true)]
        k: Vec<usize>,
        /// Drop nodes whose total weight over all layers is below this.
        #[arg(long)]
        min_total_weight: Option<f64>,
        #[arg(long, value_delimiter = ',')]
        names: Option<Vec<String>>,
        #[arg(long)]
        out: PathBuf,
    },
}

enum Failure {
    Usage(String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) | Failure::Lib(Error::Config(_)) => 2,
            Failure::Lib(e) if e.is_numerical() => 4,
            Failure::Lib(_) => 3,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) => write!(f, "usage error: {m}"),
            Failure::Lib(e) => write!(f, "{e}"),
        }
    }
}

type CliResult = std::result::Result<(), Failure>;

fn usage<T>(msg: impl Into<String>) -> std::result::Result<T, Failure> {
    Err(Failure::Usage(msg.into()))
}

/// Expands a one-or-`len` list, rejecting other lengths.
fn broadcast<T: Copy>(values: &[T], len: usize, what: &str) -> std::result::Result<Vec<T>, Failure> {
    match values.len() {
        1 => Ok(vec![values[0]; len]),
        l if l == len => Ok(values.to_vec()),
        l => usage(format!("{what} has {l} values; give one or {len}")),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let outcome = match cli.command {
        Command::Generate { model, n, layers, groups, k, c, d, w, alpha, seed, out } => {
            generate(model, n, layers, groups, &k, c, d, w, alpha, seed, &out)
        }
        Command::Fit { input, groups, k, subspaces_only, epsilon_restarts, exact, seed, out, truth } => {
            fit(&input, groups, &k, subspaces_only, epsilon_restarts, exact, seed, &out, truth.as_deref())
        }
        Command::Simulate { grid, out, reps, full, workers } => {
            simulate(&grid, &out, if full { Some(FULL_REPLICATES) } else { reps }, workers)
        }
        Command::Rank { input, what, groups, labels, k_max, exact } => {
            rank(&input, what, groups, labels.as_deref(), k_max, exact)
        }
        Command::Ingest { n, layers, thresholds, k, min_total_weight, names, out } => {
            ingest(n, &layers, &thresholds, &k, min_total_weight, names, &out)
        }
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("dimple: {f}");
            ExitCode::from(f.code())
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn generate(
    model: Model,
    n: usize,
    layers: usize,
    groups: usize,
    k: &[usize],
    c: f64,
    d: f64,
    w: f64,
    alpha: Option<f64>,
    seed: u64,
    out: &Path,
) -> CliResult {
    let kind = match model {
        Model::Dimple => ModelKind::Dimple,
        Model::Gdpg => ModelKind::Gdpg,
    };
    if groups == 0 {
        return usage("--M must be at least 1");
    }
    let cfg = DimpleConfig {
        n,
        num_layers: layers,
        num_groups: groups,
        community_counts: broadcast(k, groups, "--K")?,
        c_lo: c,
        d_hi: d,
        w,
        alpha,
        seed,
    };
    cfg.validate(kind == ModelKind::Gdpg)?;
    let truth = generate_truth::<f64>(kind, &cfg)?;
    let net = sample_adjacency(&truth, seed);
    save_network_named(&net, None, out)?;
    save_truth(&truth, &out.join("truth"))?;
    for l in 0..net.num_layers() {
        println!("layer {l}: {} edges, density {:.4}", net.edge_count(l), net.density(l));
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn fit(
    input: &Path,
    groups: usize,
    k: &[usize],
    subspaces_only: bool,
    restarts: Option<usize>,
    exact: bool,
    seed: u64,
    out: &Path,
    truth: Option<&Path>,
) -> CliResult {
    if groups == 0 {
        return usage("--M must be at least 1");
    }
    if k.contains(&0) {
        return usage("--K values must be positive");
    }
    if k.len() != 1 && k.len() != groups {
        return usage(format!("--K has {} values; give one or {groups}", k.len()));
    }
    if restarts == Some(0) {
        return usage("--epsilon-restarts must be at least 1");
    }
    let stack: Stack = load_stack(input)?;
    if groups > stack.num_layers() {
        return usage(format!("--M {groups} exceeds the {} layers of the input", stack.num_layers()));
    }
    let truth = truth.map(load_truth).transpose()?;
    let mut kmeans = KMeansOptions::default();
    if let Some(r) = restarts {
        kmeans.restarts = r;
    }
    let opts = FitOptions {
        kmeans,
        subspaces_only,
        squares: if exact { SquareMode::Exact } else { SquareMode::BiasAdjusted },
    };
    let result = fit_stack(&stack, groups, k, &opts, seed)?;
    let report = truth
        .map(|t| evaluate_parts(&result, &t.layer_partition, t.node_partition.as_ref(), &t.subspaces))
        .transpose()?;
    write_results(&result, report.as_ref(), out)?;
    println!("layer group sizes: {:?}", result.group_sizes);
    if let Some(r) = report {
        println!("r_bl = {}", r.r_bl);
        if let Some(v) = r.r_wl {
            println!("r_wl = {v}");
        }
        println!("r_s_max = {}\nr_s_ave = {}", r.r_s_max, r.r_s_ave);
    }
    Ok(())
}

fn simulate(grid_path: &Path, out: &Path, reps: Option<usize>, workers: Option<usize>) -> CliResult {
    if workers == Some(0) {
        return usage("--workers must be at least 1");
    }
    let text = fs::read_to_string(grid_path).map_err(|e| Failure::Usage(format!("{}: {e}", grid_path.display())))?;
    let mut grid = ExperimentGrid::from_toml(&text)?;
    if let Some(r) = reps {
        grid.replicates = r;
        grid.validate()?;
    }
    let table = run_grid(&grid, workers)?;
    fs::write(out, table.to_csv()).map_err(|e| Error::Io {
        path: out.to_path_buf(),
        source: e,
    })?;
    let failed: usize = table.rows.iter().map(|r| r.failed_count).max().unwrap_or(0);
    println!("{} rows written to {}", table.rows.len(), out.display());
    if failed > 0 {
        eprintln!("warning: some cells had failed replicates (up to {failed} per cell)");
    }
    Ok(())
}

/// Prints the spectrum and the eigengap choice; warns when the gap is weak.
fn report_rank(title: &str, mags: &[f64], k_max: usize) -> CliResult {
    let spectrum: Vec<String> = mags.iter().map(|v| format!("{v:.6}")).collect();
    println!("{title} spectrum: {}", spectrum.join(" "));
    if mags.len() < 2 || mags[0] <= 0.0 {
        println!("{title} suggestion: 1");
        eprintln!("warning: {title}: spectrum too short or zero; suggestion has low confidence");
        return Ok(());
    }
    let k_max = k_max.min(mags.len() - 1);
    let k = eigengap_select(mags, k_max)?;
    let ratio = mags[k - 1] / mags[k].max(1e-12 * mags[0]);
    println!("{title} suggestion: {k} (gap ratio {ratio:.3})");
    if ratio < LOW_CONFIDENCE_RATIO {
        eprintln!("warning: {title}: largest eigengap ratio {ratio:.3} < {LOW_CONFIDENCE_RATIO}; low confidence");
    }
    Ok(())
}

fn sorted_magnitudes(values: &[f64]) -> Vec<f64> {
    let mut m: Vec<f64> = values.iter().map(|v| v.abs()).collect();
    m.sort_by(|a, b| b.total_cmp(a));
    m
}

fn rank(input: &Path, what: RankTarget, groups: Option<usize>, labels: Option<&Path>, k_max: usize, exact: bool) -> CliResult {
    if k_max == 0 {
        return usage("--k-max must be at least 1");
    }
    match what {
        RankTarget::Layers => {
            let stack: Stack = load_stack(input)?;
            let bases = layer_embeddings(&stack)?;
            let gram = gram_from_bases(&bases)?;
            let eig = gram.eigen()?;
            report_rank("M", &sorted_magnitudes(&eig.values), k_max)
        }
        RankTarget::Groups => {
            let (Some(m), Some(labels)) = (groups, labels) else {
                return usage("--what groups needs --M and --labels");
            };
            if m == 0 {
                return usage("--M must be at least 1");
            }
            let stack: Stack = load_stack(input)?;
            let labels = read_labels(labels)?;
            if labels.len() != stack.num_layers() {
                return Err(Error::Input(format!("{} labels for {} layers", labels.len(), stack.num_layers())).into());
            }
            let part = LayerPartition::new(labels, m)?;
            let mode = if exact { SquareMode::Exact } else { SquareMode::BiasAdjusted };
            let h = aggregate_groups(&layer_squares(&stack, mode)?, &part)?;
            for (g, hm) in h.iter().enumerate() {
                let eig = hm.eigen()?;
                let mags = sorted_magnitudes(&eig.values);
                let keep = (k_max + 1).min(mags.len());
                report_rank(&format!("K_{}", g + 1), &mags[..keep], k_max)?;
            }
            Ok(())
        }
    }
}

fn ingest(
    n: usize,
    files: &[PathBuf],
    thresholds: &[f64],
    k: &[usize],
    min_total: Option<f64>,
    names: Option<Vec<String>>,
    out: &Path,
) -> CliResult {
    let l = files.len();
    let thresholds = broadcast(thresholds, l, "--thresholds")?;
    let dims = broadcast(k, l, "--K")?;
    if let Some(names) = &names {
        if names.len() != l {
            return usage(format!("--names has {} values for {l} layers", names.len()));
        }
    }
    let mut layers = files
        .iter()
        .map(|f| WeightedEdgeList::read(f, n))
        .collect::<dimple::Result<Vec<_>>>()?;
    let mut kept = None;
    if let Some(t) = min_total {
        let (filtered, ids) = filter_nodes_by_weight(&layers, t)?;
        println!("kept {} of {n} nodes", ids.len());
        layers = filtered;
        kept = Some(ids);
    }
    let n_kept = kept.as_ref().map_or(n, Vec::len);
    let net = binarize_weighted(&layers, n_kept, &thresholds, dims)?;
    save_network_named(&net, names, out)?;
    if let Some(ids) = kept {
        write_id_map(&out.join("node_ids.txt"), &ids)?;
    }
    for i in 0..net.num_layers() {
        println!("layer {i}: {} edges, density {:.4}", net.edge_count(i), net.density(i));
    }
    Ok(())
}
