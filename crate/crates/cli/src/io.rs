//! On-disk formats.
//!
//! Point sets travel as plain CSV (see the core crate for the column
//! convention). Graphs are written as an `i,j,weight` edge list with
//! 12 significant digits next to a JSON header file (same path with
//! `.json` appended) describing how the graph was built.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use nnk_core::dataset::{format_significant, PointSet};
use nnk_core::graph::{BuilderTag, SparseGraph};
use nnk_core::kernel::KernelSpec;

use crate::error::CliError;

pub fn fmt12(x: f64) -> String {
    format_significant(x, 12)
}

pub fn read_points(path: &Path, has_labels: bool, skip_header: bool) -> Result<PointSet, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
    PointSet::from_csv(&text, has_labels, skip_header)
        .map_err(|e| CliError::data(format!("{}: {e}", path.display())))
    }

pub fn write_points(path: &Path, ps: &PointSet) -> Result<(), CliError> {
    fs::write(path, ps.to_csv())
        .map_err(|e| CliError::data(format!("{}: {e}", path.display())))
}

pub fn read_idx_points(images: &Path, labels: &Path) -> Result<PointSet, CliError> {
    let img = fs::read(images).map_err(|e| CliError::data(format!("{}: {e}", images.display())))?;
    let lab = fs::read(labels).map_err(|e| CliError::data(format!("{}: {e}", labels.display())))?;
    PointSet::from_idx(&img, &lab).map_err(CliError::from)
}

/// Metadata written next to every edge list.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraphHeader {
    pub n: usize,
    pub builder_tag: BuilderTag,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kernel: Option<KernelSpec>,
    pub k: usize,
    pub threshold: f64,
}

impl GraphHeader {
    pub fn of(g: &SparseGraph) -> Self {
        GraphHeader {
            n: g.n,
            builder_tag: g.builder,
            kernel: g.kernel,
            k: g.k,
            threshold: g.zero_tol,
        }
    }
}

pub fn header_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".json");
    PathBuf::from(name)
}

/// Writes `<out>` as the edge list and `<out>.json` as the header.
pub fn write_graph(out: &Path, g: &SparseGraph) -> Result<(), CliError> {
    let mut csv = String::with_capacity(g.edges.len() * 24);
    for e in &g.edges {
        csv.push_str(&format!("{},{},{}\n", e.i, e.j, fmt12(e.weight)));
    }
    fs::write(out, csv).map_err(|e| CliError::data(format!("{}: {e}", out.display())))?;

    let header = GraphHeader::of(g);
    let json = serde_json::to_string_pretty(&header)
        .map_err(|e| CliError::data(format!("header serialization: {e}")))?;
    let hp = header_path(out);
    fs::write(&hp, json).map_err(|e| CliError::data(format!("{}: {e}", hp.display())))?;
    Ok(())
}
