//! Text formats for networks, weighted layers, fit results and ground truth.
//!
//! A network directory holds `manifest.toml` plus one edge file per layer.
//! Edge files list `i j` pairs (0-based, `i < j`, sorted), or `i j w` triples
//! for weighted layers; `#` starts a comment. Everything written here reads
//! back bit-exactly.

mod results;

use std::collections::HashSet;
use std::fmt::{Display, Write as _};
use std::fs;
use std::path::Path;
use std::str::FromStr;

use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::SymmetricMatrix;
use crate::netmodel::{LayerStack, MultiplexNetwork};
use crate::scalar::Scalar;

pub use results::{
    load_truth, read_labels, read_matrix, read_vector, save_truth, write_labels, write_matrix, write_results,
    write_vector, TruthFiles, SUMMARY_HEADER,
};

pub const FORMAT_VERSION: u32 = 1;
pub const MANIFEST_FILE: &str = "manifest.toml";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub format_version: u32,
    pub n: usize,
    #[serde(rename = "L")]
    pub num_layers: usize,
    pub layer_files: Vec<String>,
    pub ambient_dims: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layer_names: Option<Vec<String>>,
    #[serde(default)]
    pub weighted: bool,
}

impl Manifest {
    fn for_layers(n: usize, ambient_dims: &[usize], weighted: bool) -> Self {
        let l = ambient_dims.len();
        Manifest {
            format_version: FORMAT_VERSION,
            n,
            num_layers: l,
            layer_files: (0..l).map(|i| format!("layer_{i:03}.edges")).collect(),
            ambient_dims: ambient_dims.to_vec(),
            layer_names: None,
            weighted,
        }
    }

    pub fn read(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST_FILE);
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let m: Manifest =
            toml::from_str(&text).map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
        m.validate(&path)?;
        Ok(m)
    }

    fn validate(&self, path: &Path) -> Result<()> {
        let bad = |msg: String| Err(Error::Input(format!("{}: {msg}", path.display())));
        if self.format_version != FORMAT_VERSION {
            return bad(format!("unsupported format_version {}", self.format_version));
        }
        if self.layer_files.len() != self.num_layers || self.ambient_dims.len() != self.num_layers {
            return bad(format!("L = {} but lists have other lengths", self.num_layers));
        }
        if let Some(names) = &self.layer_names {
            if names.len() != self.num_layers {
                return bad(format!("L = {} but {} layer names", self.num_layers, names.len()));
            }
        }
        Ok(())
    }

    fn write(&self, dir: &Path) -> Result<()> {
        let text = toml::to_string(self).map_err(|e| Error::Input(format!("manifest: {e}")))?;
        write_file(&dir.join(MANIFEST_FILE), &text)
    }
}

pub(crate) fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub(crate) fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub(crate) fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// Data lines of a text file: comments stripped, blank lines skipped,
/// paired with their 1-based line numbers.
pub(crate) fn data_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, line)| {
        let body = line.split('#').next().unwrap_or("");
        let tokens: Vec<&str> = body.split_whitespace().collect();
        (!tokens.is_empty()).then_some((i + 1, tokens))
    })
}

fn parse_error(path: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        msg: msg.into(),
    }
}

fn parse_node(tok: &str, n: usize, path: &Path, line: usize) -> Result<usize> {
    let v: usize = tok
        .parse()
        .map_err(|_| parse_error(path, line, format!("invalid node id {tok:?}")))?;
    if v >= n {
        return Err(parse_error(path, line, format!("node id {v} out of range for n = {n}")));
    }
    Ok(v)
}

fn parse_value<T: FromStr>(tok: &str, path: &Path, line: usize) -> Result<T> {
    tok.parse()
        .map_err(|_| parse_error(path, line, format!("invalid number {tok:?}")))
}

/// Parses an unweighted edge list into an `n x n` adjacency matrix.
///
/// Rejects self-loops, duplicate pairs (in either orientation), ids `>= n`
/// and lines that are not exactly two ids.
pub fn parse_edge_list(text: &str, n: usize, path: &Path) -> Result<Array2<u8>> {
    let mut a = Array2::<u8>::zeros((n, n));
    for (line, tokens) in data_lines(text) {
        if tokens.len() != 2 {
            return Err(parse_error(path, line, format!("expected \"i j\", found {} fields", tokens.len())));
        }
        let i = parse_node(tokens[0], n, path, line)?;
        let j = parse_node(tokens[1], n, path, line)?;
        if i == j {
            return Err(parse_error(path, line, format!("self-loop on node {i}")));
        }
        if a[[i, j]] == 1 {
            return Err(parse_error(path, line, format!("duplicate edge {} {}", i.min(j), i.max(j))));
        }
        a[[i, j]] = 1;
        a[[j, i]] = 1;
    }
    Ok(a)
}

pub fn format_edge_list(layer: &Array2<u8>) -> String {
    let n = layer.nrows();
    let mut out = format!("# dimple edge list v{FORMAT_VERSION} n={n}\n");
    for i in 0..n {
        for j in i + 1..n {
            if layer[[i, j]] != 0 {
                let _ = writeln!(out, "{i} {j}");
            }
        }
    }
    out
}

pub fn save_network(net: &MultiplexNetwork, dir: &Path) -> Result<()> {
    save_network_named(net, None, dir)
}

/// Like [`save_network`], recording optional human-readable layer names.
pub fn save_network_named(net: &MultiplexNetwork, names: Option<Vec<String>>, dir: &Path) -> Result<()> {
    if let Some(names) = &names {
        if names.len() != net.num_layers() {
            return Err(Error::Input(format!("{} names for {} layers", names.len(), net.num_layers())));
        }
    }
    create_dir(dir)?;
    let mut manifest = Manifest::for_layers(net.n(), net.ambient_dims(), false);
    manifest.layer_names = names;
    for (file, layer) in manifest.layer_files.iter().zip(net.layers()) {
        write_file(&dir.join(file), &format_edge_list(layer))?;
    }
    manifest.write(dir)
}

pub fn load_network(dir: &Path) -> Result<MultiplexNetwork> {
    let manifest = Manifest::read(dir)?;
    if manifest.weighted {
        return Err(Error::Input(format!("{} holds weighted layers", dir.display())));
    }
    let layers = manifest
        .layer_files
        .par_iter()
        .map(|file| {
            let path = dir.join(file);
            parse_edge_list(&read_file(&path)?, manifest.n, &path)
        })
        .collect::<Result<Vec<_>>>()?;
    MultiplexNetwork::new(manifest.n, layers, manifest.ambient_dims)
}

/// Symmetric weighted layer: `i j w` lines with `i <= j`; absent pairs are 0.
pub fn parse_symmetric_weights<T: Scalar>(text: &str, n: usize, path: &Path) -> Result<SymmetricMatrix<T>> {
    let mut a = Array2::<T>::zeros((n, n));
    let mut seen = HashSet::new();
    for (line, tokens) in data_lines(text) {
        if tokens.len() != 3 {
            return Err(parse_error(path, line, format!("expected \"i j w\", found {} fields", tokens.len())));
        }
        let i = parse_node(tokens[0], n, path, line)?;
        let j = parse_node(tokens[1], n, path, line)?;
        let w: T = parse_value(tokens[2], path, line)?;
        if !w.is_finite() {
            return Err(parse_error(path, line, "non-finite weight"));
        }
        if !seen.insert((i.min(j), i.max(j))) {
            return Err(parse_error(path, line, format!("duplicate entry {} {}", i.min(j), i.max(j))));
        }
        a[[i, j]] = w;
        a[[j, i]] = w;
    }
    SymmetricMatrix::new(a)
}

pub fn format_symmetric_weights<T: Scalar>(layer: &SymmetricMatrix<T>) -> String {
    let n = layer.n();
    let mut out = format!("# dimple weighted layer v{FORMAT_VERSION} n={n}\n");
    for i in 0..n {
        for j in i..n {
            let w = layer.get(i, j);
            if w != T::zero() {
                let _ = writeln!(out, "{i} {j} {w}");
            }
        }
    }
    out
}

/// Writes real-valued symmetric layers (e.g. edge probabilities).
pub fn save_weighted_layers<T: Scalar>(stack: &LayerStack<T>, dir: &Path) -> Result<()> {
    create_dir(dir)?;
    let manifest = Manifest::for_layers(stack.n(), stack.ambient_dims(), true);
    for (file, layer) in manifest.layer_files.iter().zip(stack.layers()) {
        write_file(&dir.join(file), &format_symmetric_weights(layer))?;
    }
    manifest.write(dir)
}

pub fn load_weighted_layers<T: Scalar>(dir: &Path) -> Result<LayerStack<T>> {
    let manifest = Manifest::read(dir)?;
    if !manifest.weighted {
        return Err(Error::Input(format!("{} holds unweighted layers", dir.display())));
    }
    let layers = manifest
        .layer_files
        .par_iter()
        .map(|file| {
            let path = dir.join(file);
            parse_symmetric_weights(&read_file(&path)?, manifest.n, &path)
        })
        .collect::<Result<Vec<_>>>()?;
    LayerStack::new(layers, manifest.ambient_dims)
}

/// Loads either kind of network directory as real-valued layers.
pub fn load_stack<T: Scalar>(dir: &Path) -> Result<LayerStack<T>> {
    if Manifest::read(dir)?.weighted {
        load_weighted_layers(dir)
    } else {
        Ok(load_network(dir)?.to_stack())
    }
}

/// Possibly directed weighted records over nodes `0..n`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedEdgeList {
    pub n: usize,
    pub records: Vec<(usize, usize, f64)>,
}

impl WeightedEdgeList {
    pub fn new(n: usize, records: Vec<(usize, usize, f64)>) -> Result<Self> {
        for &(i, j, w) in &records {
            if i >= n || j >= n {
                return Err(Error::Input(format!("record ({i}, {j}) out of range for n = {n}")));
            }
            check_weight(w)?;
        }
        Ok(WeightedEdgeList { n, records })
    }

    /// Parses `i j w` lines; repeated directed pairs are summed.
    pub fn parse(text: &str, n: usize, path: &Path) -> Result<Self> {
        let mut records = Vec::new();
        for (line, tokens) in data_lines(text) {
            if tokens.len() != 3 {
                return Err(parse_error(path, line, format!("expected \"i j w\", found {} fields", tokens.len())));
            }
            let i = parse_node(tokens[0], n, path, line)?;
            let j = parse_node(tokens[1], n, path, line)?;
            let w: f64 = parse_value(tokens[2], path, line)?;
            check_weight(w).map_err(|_| parse_error(path, line, format!("invalid weight {w}")))?;
            records.push((i, j, w));
        }
        Ok(WeightedEdgeList { n, records })
    }

    pub fn read(path: &Path, n: usize) -> Result<Self> {
        Self::parse(&read_file(path)?, n, path)
    }

    /// `s(i, j) = w(i -> j) + w(j -> i)`; self-loops dropped.
    pub fn symmetrized(&self) -> Array2<f64> {
        let mut s = Array2::<f64>::zeros((self.n, self.n));
        for &(i, j, w) in &self.records {
            if i != j {
                s[[i, j]] += w;
                s[[j, i]] += w;
            }
        }
        s
    }

    /// Total weight touching each node (in plus out, self-loops included once).
    pub fn node_totals(&self) -> Vec<f64> {
        let mut t = vec![0.0; self.n];
        for &(i, j, w) in &self.records {
            t[i] += w;
            if i != j {
                t[j] += w;
            }
        }
        t
    }
}

fn check_weight(w: f64) -> Result<()> {
    if w.is_finite() && w >= 0.0 {
        Ok(())
    } else {
        Err(Error::Input(format!("weight {w} is not a nonnegative finite number")))
    }
}

/// Thresholds symmetrized weights: `A(i, j) = 1` iff `s(i, j) >= threshold_l`
/// and `i != j`. A threshold of 0 therefore connects every pair.
pub fn binarize_weighted(
    layers: &[WeightedEdgeList],
    n: usize,
    thresholds: &[f64],
    ambient_dims: Vec<usize>,
) -> Result<MultiplexNetwork> {
    if thresholds.len() != layers.len() {
        return Err(Error::Input(format!("{} thresholds for {} layers", thresholds.len(), layers.len())));
    }
    let mut out = Vec::with_capacity(layers.len());
    for (layer, &t) in layers.iter().zip(thresholds) {
        if layer.n != n {
            return Err(Error::Input(format!("layer over {} nodes, expected {n}", layer.n)));
        }
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::Input(format!("threshold {t} is not a nonnegative number")));
        }
        for &(_, _, w) in &layer.records {
            check_weight(w)?;
        }
        let s = layer.symmetrized();
        out.push(Array2::from_shape_fn((n, n), |(i, j)| u8::from(i != j && s[[i, j]] >= t)));
    }
    MultiplexNetwork::new(n, out, ambient_dims)
}

/// Keeps nodes whose total weight summed over all layers is at least
/// `min_total`, re-indexing them densely. Returns the filtered layers and the
/// original id of each kept node.
pub fn filter_nodes_by_weight(layers: &[WeightedEdgeList], min_total: f64) -> Result<(Vec<WeightedEdgeList>, Vec<usize>)> {
    let n = layers.first().map_or(0, |l| l.n);
    if layers.iter().any(|l| l.n != n) {
        return Err(Error::Input("layers disagree on n".into()));
    }
    let mut totals = vec![0.0; n];
    for l in layers {
        for (t, v) in totals.iter_mut().zip(l.node_totals()) {
            *t += v;
        }
    }
    let kept: Vec<usize> = (0..n).filter(|&i| totals[i] >= min_total).collect();
    let mut new_id = vec![usize::MAX; n];
    for (k, &i) in kept.iter().enumerate() {
        new_id[i] = k;
    }
    let filtered = layers
        .iter()
        .map(|l| WeightedEdgeList {
            n: kept.len(),
            records: l
                .records
                .iter()
                .filter(|&&(i, j, _)| new_id[i] != usize::MAX && new_id[j] != usize::MAX)
                .map(|&(i, j, w)| (new_id[i], new_id[j], w))
                .collect(),
        })
        .collect();
    Ok((filtered, kept))
}

/// Sidecar mapping dense ids to original ids (or names), one per line.
pub fn write_id_map<D: Display>(path: &Path, ids: &[D]) -> Result<()> {
    let mut out = format!("# dimple node id map v{FORMAT_VERSION}: line k holds the original id of node k\n");
    for id in ids {
        let _ = writeln!(out, "{id}");
    }
    write_file(path, &out)
}
