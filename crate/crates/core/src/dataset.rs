//! Point-cloud datasets: validation, text/binary parsing, synthesis.
//!
//! Parsing operates on in-memory text or bytes so it stays usable
//! without `std`; reading files is the companion crate's job.
//!
//! CSV convention: comma-separated values, no header unless skipped
//! explicitly, and when labels are present they occupy the last column.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::math;

const IDX_IMAGES_MAGIC: u32 = 0x0000_0803;
const IDX_LABELS_MAGIC: u32 = 0x0000_0801;

#[derive(Debug, Clone, PartialEq)]
pub enum DatasetError {
    /// A text cell failed to parse or the table shape is inconsistent.
    Parse { line: usize, msg: String },
    /// A binary payload does not follow the expected IDX layout.
    Format(String),
    /// Image and label payloads disagree on the record count.
    Mismatch { images: usize, labels: usize },
    /// A class has fewer members than a subsampling rule requests.
    InsufficientSamples { class: i32, have: usize, need: usize },
    /// Values or labels violate the point-set invariants.
    InvalidData(String),
    /// A generator configuration is out of range.
    InvalidConfig(String),
}

impl core::fmt::Display for DatasetError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            DatasetError::Parse { line, msg } => write!(f, "parse error on line {line}: {msg}"),
            DatasetError::Format(msg) => write!(f, "format error: {msg}"),
            DatasetError::Mismatch { images, labels } => {
                write!(f, "{images} images but {labels} labels")
            }
            DatasetError::InsufficientSamples { class, have, need } => {
                write!(f, "class {class} has {have} samples, {need} requested")
            }
            DatasetError::InvalidData(msg) => write!(f, "invalid data: {msg}"),
            DatasetError::InvalidConfig(msg) => write!(f, "invalid config: {msg}"),
        }
    }
}

impl core::error::Error for DatasetError {}

/// N points in d dimensions with optional class labels.
///
/// Labels use -1 for "unlabeled"; non-negative labels must cover at
/// least two classes. `ids` are stable row identifiers that survive
/// subsetting.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    n: usize,
    d: usize,
    data: Vec<f64>,
    labels: Option<Vec<i32>>,
    ids: Vec<usize>,
}

impl PointSet {
    pub fn new(data: Vec<f64>, n: usize, d: usize) -> Result<Self, DatasetError> {
        if n == 0 || d == 0 {
            return Err(DatasetError::InvalidData("need n >= 1 and d >= 1".into()));
        }
        if data.len() != n * d {
            return Err(DatasetError::InvalidData(format!(
                "buffer holds {} values, expected {}x{}",
                data.len(),
                n,
                d
            )));
        }
        if !data.iter().all(|v| v.is_finite()) {
            return Err(DatasetError::InvalidData("non-finite value".into()));
        }
        Ok(PointSet { n, d, data, labels: None, ids: (0..n).collect() })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, DatasetError> {
        if rows.is_empty() {
            return Err(DatasetError::InvalidData("no rows".into()));
        }
        let d = rows[0].len();
        if rows.iter().any(|r| r.len() != d) {
            return Err(DatasetError::InvalidData("ragged rows".into()));
        }
        let mut data = Vec::with_capacity(rows.len() * d);
        for r in rows {
            data.extend_from_slice(r);
        }
        PointSet::new(data, rows.len(), d)
    }

    pub fn with_labels(mut self, labels: Vec<i32>) -> Result<Self, DatasetError> {
        if labels.len() != self.n {
            return Err(DatasetError::InvalidData(format!(
                "{} labels for {} points",
                labels.len(),
                self.n
            )));
        }
        if labels.iter().any(|&l| l < -1) {
            return Err(DatasetError::InvalidData("labels must be >= -1".into()));
        }
        let max = labels.iter().copied().max().unwrap_or(-1);
        if max == 0 {
            return Err(DatasetError::InvalidData(
                "labeled data needs at least two classes".into(),
            ));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn point(&self, i: usize) -> &[f64] {
        &self.data[i * self.d..(i + 1) * self.d]
    }

    pub fn labels(&self) -> Option<&[i32]> {
        self.labels.as_deref()
    }

    pub fn ids(&self) -> &[usize] {
        &self.ids
    }

    /// Number of classes (max label + 1), when labels are present.
    pub fn num_classes(&self) -> Option<usize> {
        let labels = self.labels.as_ref()?;
        Some((labels.iter().copied().max().unwrap_or(-1) + 1) as usize)
    }

    #[inline]
    pub fn squared_distance(&self, i: usize, j: usize) -> f64 {
        let (a, b) = (self.point(i), self.point(j));
        let mut s = 0.0;
        for k in 0..self.d {
            let diff = a[k] - b[k];
            s += diff * diff;
        }
        s
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        math::sqrt(self.squared_distance(i, j))
    }

    /// Rows at `idx`, in the given order, keeping labels and ids.
    pub fn subset(&self, idx: &[usize]) -> PointSet {
        let mut data = Vec::with_capacity(idx.len() * self.d);
        for &i in idx {
            data.extend_from_slice(self.point(i));
        }
        PointSet {
            n: idx.len(),
            d: self.d,
            data,
            labels: self.labels.as_ref().map(|l| idx.iter().map(|&i| l[i]).collect()),
            ids: idx.iter().map(|&i| self.ids[i]).collect(),
        }
    }

    /// Parses the CSV convention described at module level.
    pub fn from_csv(text: &str, has_labels: bool, skip_header: bool) -> Result<Self, DatasetError> {
        let mut rows: Vec<Vec<f64>> = Vec::new();
        let mut labels: Vec<i32> = Vec::new();
        let mut width = None;
        for (lineno, raw) in text.lines().enumerate() {
            if skip_header && lineno == 0 {
                continue;
            }
            let line = raw.trim_end_matches('\r');
            if line.is_empty() {
                continue;
            }
            let cells: Vec<&str> = line.split(',').collect();
            match width {
                None => {
                    if has_labels && cells.len() < 2 {
                        return Err(DatasetError::Parse {
                            line: lineno + 1,
                            msg: "need at least one feature column besides the label".into(),
                        });
                    }
                    width = Some(cells.len());
                }
                Some(w) if w != cells.len() => {
                    return Err(DatasetError::Parse {
                        line: lineno + 1,
                        msg: format!("expected {w} columns, found {}", cells.len()),
                    });
                }
                _ => {}
            }
            let feat_cols = if has_labels { cells.len() - 1 } else { cells.len() };
            let mut row = Vec::with_capacity(feat_cols);
            for cell in &cells[..feat_cols] {
                let v: f64 = cell.trim().parse().map_err(|_| DatasetError::Parse {
                    line: lineno + 1,
                    msg: format!("not a number: {cell:?}"),
                })?;
                if !v.is_finite() {
                    return Err(DatasetError::Parse {
                        line: lineno + 1,
                        msg: format!("non-finite value: {cell:?}"),
                    });
                }
                row.push(v);
            }
            if has_labels {
                let cell = cells[cells.len() - 1].trim();
                let v: f64 = cell.parse().map_err(|_| DatasetError::Parse {
                    line: lineno + 1,
                    msg: format!("not a label: {cell:?}"),
                })?;
                if !v.is_finite() || v != math::round(v) || v < -1.0 || v > i32::MAX as f64 {
                    return Err(DatasetError::Parse {
                        line: lineno + 1,
                        msg: format!("label must be an integer >= -1: {cell:?}"),
                    });
                }
                labels.push(v as i32);
            }
            rows.push(row);
        }
        if rows.is_empty() {
            return Err(DatasetError::Parse { line: 0, msg: "no data rows".into() });
        }
        let ps = PointSet::from_rows(&rows)?;
        if has_labels {
            ps.with_labels(labels)
        } else {
            Ok(ps)
        }
    }

    /// Serializes with the same convention `from_csv` reads, 12
    /// significant digits per value.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for i in 0..self.n {
            let mut first = true;
            for v in self.point(i) {
                if !first {
                    out.push(',');
                }
                out.push_str(&format_significant(*v, 12));
                first = false;
            }
            if let Some(labels) = &self.labels {
                out.push(',');
                out.push_str(&labels[i].to_string());
            }
            out.push('\n');
        }
        out
    }

    /// Parses big-endian IDX image and label payloads (the standard
    /// MNIST file layout). Pixels are scaled from [0, 255] to [0, 1].
    pub fn from_idx(images: &[u8], labels: &[u8]) -> Result<Self, DatasetError> {
        let (n_images, rows, cols, pixels) = parse_idx_images(images)?;
        let label_vals = parse_idx_labels(labels)?;
        if n_images != label_vals.len() {
            return Err(DatasetError::Mismatch { images: n_images, labels: label_vals.len() });
        }
        let d = rows * cols;
        let data: Vec<f64> = pixels.iter().map(|&p| p as f64 / 255.0).collect();
        PointSet::new(data, n_images, d)?
            .with_labels(label_vals.iter().map(|&l| l as i32).collect())
    }
}

fn read_u32_be(bytes: &[u8], offset: usize) -> Result<u32, DatasetError> {
    let end = offset + 4;
    if bytes.len() < end {
        return Err(DatasetError::Format("truncated header".into()));
    }
    Ok(u32::from_be_bytes([bytes[offset], bytes[offset + 1], bytes[offset + 2], bytes[offset + 3]]))
}

fn parse_idx_images(bytes: &[u8]) -> Result<(usize, usize, usize, &[u8]), DatasetError> {
    let magic = read_u32_be(bytes, 0)?;
    if magic != IDX_IMAGES_MAGIC {
        return Err(DatasetError::Format(format!(
            "bad image magic {magic:#010x}, expected {IDX_IMAGES_MAGIC:#010x}"
        )));
    }
    let n = read_u32_be(bytes, 4)? as usize;
    let rows = read_u32_be(bytes, 8)? as usize;
    let cols = read_u32_be(bytes, 12)? as usize;
    let need = 16 + n * rows * cols;
    if bytes.len() < need {
        return Err(DatasetError::Format(format!(
            "truncated image payload: {} bytes, expected {need}",
            bytes.len()
        )));
    }
    Ok((n, rows, cols, &bytes[16..need]))
}

fn parse_idx_labels(bytes: &[u8]) -> Result<&[u8], DatasetError> {
    let magic = read_u32_be(bytes, 0)?;
    if magic != IDX_LABELS_MAGIC {
        return Err(DatasetError::Format(format!(
            "bad label magic {magic:#010x}, expected {IDX_LABELS_MAGIC:#010x}"
        )));
    }
    let n = read_u32_be(bytes, 4)? as usize;
    let need = 8 + n;
    if bytes.len() < need {
        return Err(DatasetError::Format(format!(
            "truncated label payload: {} bytes, expected {need}",
            bytes.len()
        )));
    }
    Ok(&bytes[8..need])
}

/// Formats with `digits` significant digits, preferring fixed notation
/// for moderate exponents (the `%g` convention).
pub fn format_significant(x: f64, digits: usize) -> String {
    assert!(digits >= 1);
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent in sci format");
    let exp: i32 = exp.parse().expect("numeric exponent");
    if exp >= -4 && exp < digits as i32 {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_fraction(format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_fraction(mantissa.to_string()))
    }
}

fn trim_fraction(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// How the swiss-roll arc parameter is sampled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Sampling {
    Uniform,
    /// Density proportional to 1/t, concentrating points on the inner coil.
    Nonuniform,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SwissRollConfig {
    pub n_points: usize,
    pub noise_std: f64,
    pub sampling: Sampling,
    pub seed: u64,
}

const SWISS_T_MIN: f64 = 1.5 * core::f64::consts::PI;
const SWISS_T_MAX: f64 = 4.5 * core::f64::consts::PI;
const SWISS_HEIGHT: f64 = 20.0;

/// Samples a noisy swiss roll: (t cos t, h, t sin t) with t in
/// [1.5 pi, 4.5 pi], h uniform in [0, 20], and isotropic Gaussian
/// noise of the configured standard deviation. Deterministic in the
/// seed.
pub fn make_swiss_roll(cfg: &SwissRollConfig) -> Result<PointSet, DatasetError> {
    if cfg.n_points < 10 {
        return Err(DatasetError::InvalidConfig("need at least 10 points".into()));
    }
    if !cfg.noise_std.is_finite() || cfg.noise_std < 0.0 {
        return Err(DatasetError::InvalidConfig("noise_std must be finite and >= 0".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut gauss = GaussSampler::new();
    let mut data = Vec::with_capacity(cfg.n_points * 3);
    let log_ratio = math::ln(SWISS_T_MAX / SWISS_T_MIN);
    for _ in 0..cfg.n_points {
        let u: f64 = rng.gen();
        let t = match cfg.sampling {
            Sampling::Uniform => SWISS_T_MIN + u * (SWISS_T_MAX - SWISS_T_MIN),
            // inverse CDF of density ~ 1/t on [t_min, t_max]
            Sampling::Nonuniform => SWISS_T_MIN * math::exp(u * log_ratio),
        };
        let h: f64 = rng.gen::<f64>() * SWISS_HEIGHT;
        let mut p = [t * math::cos(t), h, t * math::sin(t)];
        if cfg.noise_std > 0.0 {
            for v in &mut p {
                *v += cfg.noise_std * gauss.next(&mut rng);
            }
        }
        data.extend_from_slice(&p);
    }
    PointSet::new(data, cfg.n_points, 3)
}

/// Labeled Gaussian blobs, one class per center. Deterministic in the
/// seed.
pub fn make_blobs(
    centers: &[Vec<f64>],
    n_per_class: usize,
    noise_std: f64,
    seed: u64,
) -> Result<PointSet, DatasetError> {
    if centers.len() < 2 {
        return Err(DatasetError::InvalidConfig("need at least two blob centers".into()));
    }
    let d = centers[0].len();
    if d == 0 || centers.iter().any(|c| c.len() != d) {
        return Err(DatasetError::InvalidConfig("centers must share a positive dimension".into()));
    }
    if n_per_class == 0 {
        return Err(DatasetError::InvalidConfig("need at least one point per class".into()));
    }
    if !noise_std.is_finite() || noise_std < 0.0 {
        return Err(DatasetError::InvalidConfig("noise_std must be finite and >= 0".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut gauss = GaussSampler::new();
    let mut data = Vec::with_capacity(centers.len() * n_per_class * d);
    let mut labels = Vec::with_capacity(centers.len() * n_per_class);
    for (cls, center) in centers.iter().enumerate() {
        for _ in 0..n_per_class {
            for &c in center {
                data.push(c + noise_std * gauss.next(&mut rng));
            }
            labels.push(cls as i32);
        }
    }
    PointSet::new(data, centers.len() * n_per_class, d)?.with_labels(labels)
}

/// Non-uniform class subsample: with classes ranked 1..=10 by ascending
/// label, class c contributes round(2.6 c^2) points, 1001 in total.
pub fn subsample_usps_style(ps: &PointSet, seed: u64) -> Result<PointSet, DatasetError> {
    let labels = ps
        .labels()
        .ok_or_else(|| DatasetError::InvalidData("subsampling needs labels".into()))?;
    let mut classes: Vec<i32> = labels.iter().copied().filter(|&l| l >= 0).collect();
    classes.sort_unstable();
    classes.dedup();
    if classes.len() != 10 {
        return Err(DatasetError::InvalidData(format!(
            "expected 10 classes, found {}",
            classes.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked: Vec<usize> = Vec::new();
    for (rank, &cls) in classes.iter().enumerate() {
        let c = (rank + 1) as f64;
        let need = math::round(2.6 * c * c) as usize;
        let mut members: Vec<usize> =
            (0..ps.n()).filter(|&i| labels[i] == cls).collect();
        if members.len() < need {
            return Err(DatasetError::InsufficientSamples {
                class: cls,
                have: members.len(),
                need,
            });
        }
        // Fisher-Yates prefix shuffle, then restore row order
        for i in 0..need {
            let j = rng.gen_range(i..members.len());
            members.swap(i, j);
        }
        members.truncate(need);
        members.sort_unstable();
        picked.extend_from_slice(&members);
    }
    picked.sort_unstable();
    Ok(ps.subset(&picked))
}

/// Box-Muller standard normal sampler; keeps the spare draw.
struct GaussSampler {
    spare: Option<f64>,
}

impl GaussSampler {
    fn new() -> Self {
        GaussSampler { spare: None }
    }

    fn next<R: Rng>(&mut self, rng: &mut R) -> f64 {
        if let Some(v) = self.spare.take() {
            return v;
        }
        let u1: f64 = 1.0 - rng.gen::<f64>(); // in (0, 1]
        let u2: f64 = rng.gen();
        let r = math::sqrt(-2.0 * math::ln(u1));
        let theta = 2.0 * core::f64::consts::PI * u2;
        self.spare = Some(r * math::sin(theta));
        r * math::cos(theta)
    }
}
