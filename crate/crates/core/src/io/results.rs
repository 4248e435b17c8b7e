//! Label, matrix and summary files for fits and ground truth.
//!
//! Labels are written 1-based, one per line. Matrices are whitespace-separated
//! rows. Group files are numbered from 1 to match the labels.

use std::fmt::Write as _;
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::{
    create_dir, data_lines, load_weighted_layers, parse_error, parse_value, read_file, save_weighted_layers,
    write_file, FORMAT_VERSION,
};
use crate::error::{Error, Result};
use crate::linalg::OrthonormalBasis;
use crate::metrics::ErrorReport;
use crate::netmodel::{GroundTruth, LayerStack, ModelKind};
use crate::scalar::Scalar;
use crate::spectral::{FitResult, LayerPartition, NodePartition, SubspaceSet};

pub const SUMMARY_HEADER: &str = "format_version,n,L,M,K,r_bl,r_wl,r_s_max,r_s_ave";

pub fn write_labels(path: &Path, labels: &[usize]) -> Result<()> {
    let mut out = format!("# dimple labels v{FORMAT_VERSION} (1-based)\n");
    for &l in labels {
        let _ = writeln!(out, "{}", l + 1);
    }
    write_file(path, &out)
}

/// Reads a label file back to 0-based labels.
pub fn read_labels(path: &Path) -> Result<Vec<usize>> {
    let text = read_file(path)?;
    data_lines(&text)
        .map(|(line, tokens)| {
            if tokens.len() != 1 {
                return Err(parse_error(path, line, "expected one label per line"));
            }
            match tokens[0].parse::<usize>() {
                Ok(v) if v >= 1 => Ok(v - 1),
                _ => Err(parse_error(path, line, format!("invalid label {:?}", tokens[0]))),
            }
        })
        .collect()
}

pub fn write_matrix<T: Scalar>(path: &Path, m: &Array2<T>) -> Result<()> {
    let mut out = format!("# dimple matrix v{FORMAT_VERSION} rows={} cols={}\n", m.nrows(), m.ncols());
    for row in m.rows() {
        let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        let _ = writeln!(out, "{}", cells.join(" "));
    }
    write_file(path, &out)
}

pub fn read_matrix<T: Scalar>(path: &Path) -> Result<Array2<T>> {
    let text = read_file(path)?;
    let mut values = Vec::new();
    let mut cols = None;
    let mut rows = 0;
    for (line, tokens) in data_lines(&text) {
        if *cols.get_or_insert(tokens.len()) != tokens.len() {
            return Err(parse_error(path, line, "ragged matrix row"));
        }
        for t in tokens {
            values.push(parse_value::<T>(t, path, line)?);
        }
        rows += 1;
    }
    Array2::from_shape_vec((rows, cols.unwrap_or(0)), values)
        .map_err(|e| Error::Input(format!("{}: {e}", path.display())))
}

pub fn write_vector<T: Scalar>(path: &Path, v: &[T]) -> Result<()> {
    let mut out = format!("# dimple vector v{FORMAT_VERSION} len={}\n", v.len());
    for x in v {
        let _ = writeln!(out, "{x}");
    }
    write_file(path, &out)
}

pub fn read_vector<T: Scalar>(path: &Path) -> Result<Vec<T>> {
    let m = read_matrix::<T>(path)?;
    if m.ncols() > 1 {
        return Err(Error::Input(format!("{}: expected one value per line", path.display())));
    }
    Ok(m.into_iter().collect())
}

fn fmt_metric(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}

/// Writes a fit to `out`:
///
/// - `layer_labels.txt`, `node_labels_group{m}.txt` (when within-layer
///   clustering ran), `basis_group{m}.txt` (`n x K_m`);
/// - `gram_spectrum.txt` and `group_spectrum{m}.txt` (leading eigenvalues);
/// - `summary.csv`, one row with [`SUMMARY_HEADER`] columns; `K` is
///   `;`-separated and metric fields are empty when not computed.
pub fn write_results<T: Scalar>(fit: &FitResult<T>, report: Option<&ErrorReport>, out: &Path) -> Result<()> {
    create_dir(out)?;
    write_labels(&out.join("layer_labels.txt"), fit.layer_partition.labels())?;
    write_vector(&out.join("gram_spectrum.txt"), &fit.gram_spectrum.values)?;
    for (m, basis) in fit.subspaces.bases.iter().enumerate() {
        write_matrix(&out.join(format!("basis_group{}.txt", m + 1)), basis.columns())?;
        write_vector(&out.join(format!("group_spectrum{}.txt", m + 1)), &fit.subspaces.eigenvalues[m])?;
    }
    if let Some(nodes) = &fit.node_partition {
        for m in 0..nodes.num_groups() {
            write_labels(&out.join(format!("node_labels_group{}.txt", m + 1)), nodes.group(m))?;
        }
    }
    let ks: Vec<String> = fit.group_dims.iter().map(|k| k.to_string()).collect();
    let mut csv = format!("{SUMMARY_HEADER}\n");
    let _ = writeln!(
        csv,
        "{FORMAT_VERSION},{},{},{},{},{},{},{},{}",
        fit.n(),
        fit.layer_partition.num_layers(),
        fit.num_groups(),
        ks.join(";"),
        fmt_metric(report.map(|r| r.r_bl)),
        fmt_metric(report.and_then(|r| r.r_wl)),
        fmt_metric(report.map(|r| r.r_s_max)),
        fmt_metric(report.map(|r| r.r_s_ave)),
    );
    write_file(&out.join("summary.csv"), &csv)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TruthMeta {
    format_version: u32,
    model: ModelKind,
    n: usize,
    #[serde(rename = "L")]
    num_layers: usize,
    #[serde(rename = "M")]
    num_groups: usize,
    group_dims: Vec<usize>,
    has_communities: bool,
}

/// Ground truth as read back from disk.
#[derive(Debug, Clone)]
pub struct TruthFiles {
    pub model: ModelKind,
    pub layer_partition: LayerPartition,
    pub node_partition: Option<NodePartition>,
    pub subspaces: SubspaceSet<f64>,
    pub probabilities: LayerStack<f64>,
}

/// Writes `truth.toml`, label and basis files in the [`write_results`]
/// layout, and the probability layers as a weighted network under
/// `probabilities/`.
pub fn save_truth<T: Scalar>(truth: &GroundTruth<T>, dir: &Path) -> Result<()> {
    create_dir(dir)?;
    let meta = TruthMeta {
        format_version: FORMAT_VERSION,
        model: truth.model_kind,
        n: truth.n(),
        num_layers: truth.num_layers(),
        num_groups: truth.num_groups,
        group_dims: truth.group_dims.clone(),
        has_communities: truth.communities.is_some(),
    };
    let text = toml::to_string(&meta).map_err(|e| Error::Input(format!("truth metadata: {e}")))?;
    write_file(&dir.join("truth.toml"), &text)?;
    write_labels(&dir.join("layer_labels.txt"), &truth.layer_labels)?;
    for (m, basis) in truth.bases.iter().enumerate() {
        write_matrix(&dir.join(format!("basis_group{}.txt", m + 1)), basis.columns())?;
    }
    if let Some(comms) = &truth.communities {
        for (m, z) in comms.iter().enumerate() {
            write_labels(&dir.join(format!("node_labels_group{}.txt", m + 1)), z)?;
        }
    }
    save_weighted_layers(&truth.probability_stack(), &dir.join("probabilities"))
}

pub fn load_truth(dir: &Path) -> Result<TruthFiles> {
    let meta_path = dir.join("truth.toml");
    let meta: TruthMeta = toml::from_str(&read_file(&meta_path)?)
        .map_err(|e| Error::Input(format!("{}: {e}", meta_path.display())))?;
    if meta.format_version != FORMAT_VERSION || meta.group_dims.len() != meta.num_groups {
        return Err(Error::Input(format!("{}: inconsistent metadata", meta_path.display())));
    }
    let layer_labels = read_labels(&dir.join("layer_labels.txt"))?;
    if layer_labels.len() != meta.num_layers {
        return Err(Error::Input(format!("{} layer labels, expected {}", layer_labels.len(), meta.num_layers)));
    }
    let layer_partition = LayerPartition::new(layer_labels, meta.num_groups)?;
    let bases = (1..=meta.num_groups)
        .map(|m| OrthonormalBasis::new(read_matrix::<f64>(&dir.join(format!("basis_group{m}.txt")))?))
        .collect::<Result<Vec<_>>>()?;
    let node_partition = if meta.has_communities {
        let labels = (1..=meta.num_groups)
            .map(|m| read_labels(&dir.join(format!("node_labels_group{m}.txt"))))
            .collect::<Result<Vec<_>>>()?;
        Some(NodePartition::new(labels, meta.group_dims.clone())?)
    } else {
        None
    };
    let probabilities = load_weighted_layers(&dir.join("probabilities"))?;
    if probabilities.n() != meta.n || probabilities.num_layers() != meta.num_layers {
        return Err(Error::Input(format!("{}: probability layers disagree with metadata", dir.display())));
    }
    Ok(TruthFiles {
        model: meta.model,
        layer_partition,
        node_partition,
        subspaces: SubspaceSet::from_bases(bases),
        probabilities,
    })
}
