//! Trial ingestion, model files, and curve/histogram output.
//!
//! # Model file format
//!
//! Model files are pretty-printed JSON objects:
//!
//! ```json
//! {
//!   "format": "snr-prior-model",
//!   "version": 1,
//!   "kind": "z-mixture",
//!   "weights": [0.32, 0.31, 0.3, 0.07],
//!   "sds": [1.19, 1.71, 2.4, 5.65],
//!   "provenance": { "data_sha256": "…", "n_observations": 23747, … }
//! }
//! ```
//!
//! `kind` is `z-mixture` (sds are the σ_k of the z-value) or `snr-prior`
//! (sds are the τ_k of the SNR). Numbers are written in shortest round-trip
//! form, so reading a file back reproduces every parameter bit for bit.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analytics::{exaggeration_given_sig, power, power_sample};
use crate::em::{EmConfig, FitDiagnostics};
use crate::error::{Error, Result};
use crate::model::{NormalMixture, SnrPrior, TrialRecord, ZMixture};
use crate::posterior::{conditional_coverage, ratio_quartiles_given_z, RatioEstimator};

pub const MODEL_FORMAT: &str = "snr-prior-model";
pub const MODEL_VERSION: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RejectReason {
    Malformed,
    MissingField,
    NonNumeric,
    NonFinite,
    NonpositiveStandardError,
}

impl std::fmt::Display for RejectReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            RejectReason::Malformed => "malformed-row",
            RejectReason::MissingField => "missing-field",
            RejectReason::NonNumeric => "non-numeric",
            RejectReason::NonFinite => "non-finite",
            RejectReason::NonpositiveStandardError => "nonpositive-standard-error",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rejection {
    /// 1-based line number in the input file.
    pub row: u64,
    pub reason: RejectReason,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IngestReport {
    pub n_accepted: usize,
    pub n_rejected: usize,
    pub rejections: Vec<Rejection>,
}

fn sniff_delimiter(first_line: &str) -> u8 {
    if first_line.contains('\t') {
        b'\t'
    } else if first_line.contains(';') && !first_line.contains(',') {
        b';'
    } else {
        b','
    }
}

fn parse_field(raw: Option<&str>) -> std::result::Result<f64, RejectReason> {
    let raw = raw.ok_or(RejectReason::MissingField)?;
    if raw.is_empty() {
        return Err(RejectReason::MissingField);
    }
    let v: f64 = raw.parse().map_err(|_| RejectReason::NonNumeric)?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(RejectReason::NonFinite)
    }
}

/// Reads delimited text with a header naming columns `b`, `s` and
/// optionally `id` (comma, tab or semicolon separated). Bad rows are
/// rejected and reported, never fatal.
pub fn read_trials(path: impl AsRef<Path>) -> Result<(Vec<TrialRecord>, IngestReport)> {
    let path = path.as_ref();
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Err(Error::FileNotFound(path.to_path_buf())),
        Err(e) => return Err(e.into()),
    };
    let delimiter = sniff_delimiter(text.lines().next().unwrap_or(""));
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader.headers()?.clone();
    let column = |name: &str| headers.iter().position(|h| h.eq_ignore_ascii_case(name));
    let (b_col, s_col) = match (column("b"), column("s")) {
        (Some(b), Some(s)) => (b, s),
        _ => {
            return Err(Error::SchemaMismatch(format!(
                "{} needs header columns 'b' and 's'",
                path.display()
            )))
        }
    };
    let id_col = column("id");

    let mut trials = Vec::new();
    let mut report = IngestReport::default();
    for (i, record) in reader.records().enumerate() {
        let row = i as u64 + 2;
        let parsed = record.map_err(|_| RejectReason::Malformed).and_then(|rec| {
            let b = parse_field(rec.get(b_col))?;
            let s = parse_field(rec.get(s_col))?;
            if s <= 0.0 {
                return Err(RejectReason::NonpositiveStandardError);
            }
            let id = id_col
                .and_then(|c| rec.get(c))
                .filter(|v| !v.is_empty())
                .map_or_else(|| format!("row{row}"), str::to_owned);
            TrialRecord::new(id, b, s).map_err(|_| RejectReason::NonFinite)
        });
        match parsed {
            Ok(t) => trials.push(t),
            Err(reason) => report.rejections.push(Rejection { row, reason }),
        }
    }
    report.n_accepted = trials.len();
    report.n_rejected = report.rejections.len();
    if trials.is_empty() {
        return Err(Error::EmptyAfterFiltering { total: report.n_rejected });
    }
    Ok((trials, report))
}

/// Writes trials as `id,b,s`.
pub fn write_trials(trials: &[TrialRecord], path: impl AsRef<Path>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["id", "b", "s"])?;
    for t in trials {
        w.write_record([t.id().to_owned(), t.b().to_string(), t.s().to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Either kind of mixture a model file can hold.
#[derive(Debug, Clone, PartialEq)]
pub enum MixtureModel {
    Z(ZMixture),
    Snr(SnrPrior),
}

impl MixtureModel {
    fn kind(&self) -> &'static str {
        match self {
            MixtureModel::Z(_) => "z-mixture",
            MixtureModel::Snr(_) => "snr-prior",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data_sha256: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_observations: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub em_config: Option<EmConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostics: Option<FitDiagnostics>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub bic_by_k: Vec<(usize, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelFile {
    pub model: MixtureModel,
    pub provenance: Provenance,
}

impl ModelFile {
    pub fn new(model: MixtureModel) -> Self {
        Self { model, provenance: Provenance::default() }
    }
}

#[derive(Serialize, Deserialize)]
struct RawModel {
    format: String,
    version: u64,
    kind: String,
    weights: Vec<f64>,
    sds: Vec<f64>,
    #[serde(default)]
    provenance: Provenance,
}

pub fn model_to_string(file: &ModelFile) -> Result<String> {
    let (weights, sds) = match &file.model {
        MixtureModel::Z(m) => (m.weights().to_vec(), m.sigmas().to_vec()),
        MixtureModel::Snr(p) => (p.weights().to_vec(), p.taus().to_vec()),
    };
    let raw = RawModel {
        format: MODEL_FORMAT.into(),
        version: MODEL_VERSION,
        kind: file.model.kind().into(),
        weights,
        sds,
        provenance: file.provenance.clone(),
    };
    Ok(serde_json::to_string_pretty(&raw)? + "\n")
}

pub fn model_from_str(text: &str) -> Result<ModelFile> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| Error::SchemaMismatch(format!("not a JSON model file: {e}")))?;
    let obj = value
        .as_object()
        .ok_or_else(|| Error::SchemaMismatch("model file must be a JSON object".into()))?;
    match obj.get("format").and_then(|f| f.as_str()) {
        Some(MODEL_FORMAT) => {}
        other => return Err(Error::SchemaMismatch(format!("format tag {other:?}, expected {MODEL_FORMAT:?}"))),
    }
    match obj.get("version") {
        None => return Err(Error::VersionUnsupported("missing version field".into())),
        Some(v) if v.as_u64() == Some(MODEL_VERSION) => {}
        Some(v) => return Err(Error::VersionUnsupported(v.to_string())),
    }
    let raw: RawModel = serde_json::from_value(value).map_err(|e| Error::SchemaMismatch(e.to_string()))?;
    let model = match raw.kind.as_str() {
        "z-mixture" => MixtureModel::Z(ZMixture::new(raw.weights, raw.sds)?),
        "snr-prior" => MixtureModel::Snr(SnrPrior::new(raw.weights, raw.sds)?),
        other => return Err(Error::SchemaMismatch(format!("unknown model kind {other:?}"))),
    };
    Ok(ModelFile { model, provenance: raw.provenance })
}

pub fn write_model(file: &ModelFile, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, model_to_string(file)?)?;
    Ok(())
}

pub fn read_model(path: impl AsRef<Path>) -> Result<ModelFile> {
    let path = path.as_ref();
    match fs::read_to_string(path) {
        Ok(text) => model_from_str(&text),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Err(Error::FileNotFound(path.to_path_buf())),
        Err(e) => Err(e.into()),
    }
}

/// Grids and sampling settings for [`emit_curves`].
#[derive(Debug, Clone, PartialEq)]
pub struct CurveGrid {
    pub snr_max: f64,
    pub snr_step: f64,
    pub z_max: f64,
    pub z_step: f64,
    pub power_sample_size: usize,
    pub power_bins: usize,
    pub seed: u64,
}

impl Default for CurveGrid {
    fn default() -> Self {
        Self {
            snr_max: 6.0,
            snr_step: 0.05,
            z_max: 6.0,
            z_step: 0.05,
            power_sample_size: 1_000_000,
            power_bins: 95,
            seed: 0,
        }
    }
}

impl CurveGrid {
    fn validate(&self) -> Result<()> {
        let ok = |max: f64, step: f64| max.is_finite() && step.is_finite() && step > 0.0 && max >= step;
        if !ok(self.snr_max, self.snr_step) || !ok(self.z_max, self.z_step) {
            return Err(Error::invalid("curve grids need 0 < step <= max"));
        }
        if self.power_sample_size == 0 || self.power_bins == 0 {
            return Err(Error::invalid("power histogram needs a positive sample size and bin count"));
        }
        Ok(())
    }

    /// `0, step, 2·step, …, max`.
    pub fn points(max: f64, step: f64) -> Vec<f64> {
        let n = (max / step + 1e-9).floor() as usize;
        (0..=n).map(|i| i as f64 * step).collect()
    }
}

/// Delimited table with a `# figure:` comment line and a column header.
struct Table {
    figure: &'static str,
    columns: &'static [&'static str],
    rows: Vec<Vec<f64>>,
}

impl Table {
    fn write(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(fs::File::create(path)?);
        writeln!(w, "# figure: {}", self.figure)?;
        writeln!(w, "{}", self.columns.join(","))?;
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            writeln!(w, "{}", line.join(","))?;
        }
        w.flush()?;
        Ok(())
    }
}

pub const POWER_VS_SNR: &str = "power_vs_snr.csv";
pub const EXAGGERATION_VS_SNR: &str = "exaggeration_vs_snr.csv";
pub const EXAGGERATION_VS_POWER: &str = "exaggeration_vs_power.csv";
pub const RATIO_RAW_VS_Z: &str = "ratio_quartiles_raw_vs_z.csv";
pub const RATIO_SHRUNK_VS_Z: &str = "ratio_quartiles_shrunk_vs_z.csv";
pub const COVERAGE_VS_Z: &str = "coverage_vs_z.csv";
pub const POWER_HISTOGRAM: &str = "power_histogram.csv";

/// Writes every curve table into `dir` and returns the paths written.
pub fn emit_curves(p: &SnrPrior, grid: &CurveGrid, dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    grid.validate()?;
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;

    let snr: Vec<f64> = CurveGrid::points(grid.snr_max, grid.snr_step);
    let z: Vec<f64> = CurveGrid::points(grid.z_max, grid.z_step);
    let mut tables = Vec::new();

    tables.push((
        POWER_VS_SNR,
        Table {
            figure: "achieved power of the 5% two-sided test vs |SNR|",
            columns: &["abs_snr", "power"],
            rows: snr.iter().map(|&x| vec![x, power(x)]).collect(),
        },
    ));
    let ex_rows = snr
        .iter()
        .filter(|&&x| x > 0.0)
        .map(|&x| Ok((x, power(x), exaggeration_given_sig(x)?)))
        .collect::<Result<Vec<_>>>()?;
    tables.push((
        EXAGGERATION_VS_SNR,
        Table {
            figure: "exaggeration ratio given significance vs |SNR|",
            columns: &["abs_snr", "exaggeration"],
            rows: ex_rows.iter().map(|&(x, _, e)| vec![x, e]).collect(),
        },
    ));
    tables.push((
        EXAGGERATION_VS_POWER,
        Table {
            figure: "exaggeration ratio given significance vs power",
            columns: &["power", "exaggeration"],
            rows: ex_rows.iter().map(|&(_, pw, e)| vec![pw, e]).collect(),
        },
    ));
    for (name, figure, estimator) in [
        (RATIO_RAW_VS_Z, "quartiles of |b|/|beta| given z", RatioEstimator::Raw),
        (RATIO_SHRUNK_VS_Z, "quartiles of |shrunk b|/|beta| given z", RatioEstimator::Shrunk),
    ] {
        let rows = z
            .iter()
            .filter(|&&x| x > 0.0)
            .map(|&x| {
                let q = ratio_quartiles_given_z(p, x, estimator)?;
                Ok(vec![x, q.q25, q.q50, q.q75])
            })
            .collect::<Result<Vec<_>>>()?;
        tables.push((name, Table { figure, columns: &["z", "q25", "q50", "q75"], rows }));
    }
    tables.push((
        COVERAGE_VS_Z,
        Table {
            figure: "conditional coverage of the 95% confidence interval given z",
            columns: &["z", "coverage"],
            rows: z
                .iter()
                .map(|&x| Ok(vec![x, conditional_coverage(p, x)?]))
                .collect::<Result<Vec<_>>>()?,
        },
    ));

    let sample = power_sample(p, grid.power_sample_size, grid.seed)?;
    let floor = power(0.0);
    let width = (1.0 - floor) / grid.power_bins as f64;
    let mut counts = vec![0usize; grid.power_bins];
    for &pw in &sample {
        let bin = (((pw - floor) / width).floor().max(0.0) as usize).min(grid.power_bins - 1);
        counts[bin] += 1;
    }
    let n = sample.len() as f64;
    tables.push((
        POWER_HISTOGRAM,
        Table {
            figure: "histogram of a seeded sample of achieved power",
            columns: &["bin_lo", "bin_hi", "count", "density"],
            rows: counts
                .iter()
                .enumerate()
                .map(|(i, &c)| {
                    let lo = floor + i as f64 * width;
                    vec![lo, lo + width, c as f64, c as f64 / (n * width)]
                })
                .collect(),
        },
    ));

    let mut written = Vec::new();
    for (name, table) in tables {
        let path = dir.join(name);
        table.write(&path)?;
        written.push(path);
    }
    Ok(written)
}

#[derive(Debug, Clone, PartialEq)]
pub struct HistogramSpec {
    pub bins: usize,
    /// Half-width of the symmetric range `[-r, r]`; defaults to max |z|.
    pub range: Option<f64>,
}

impl Default for HistogramSpec {
    fn default() -> Self {
        Self { bins: 80, range: None }
    }
}

/// Histogram on a symmetric range, so bin `i` mirrors bin `bins − 1 − i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
    pub density: Vec<f64>,
    pub symmetrized: bool,
}

/// Bin index chosen from |z| and then mirrored, so z and −z always land in
/// mirror-image bins (z = 0 goes to the right-hand side).
fn mirrored_bin(z: f64, width: f64, bins: usize) -> usize {
    let half = bins / 2;
    if bins.is_multiple_of(2) {
        let j = ((z.abs() / width).floor() as usize).min(half - 1);
        if z >= 0.0 {
            half + j
        } else {
            half - 1 - j
        }
    } else {
        let j = (((z.abs() + 0.5 * width) / width).floor() as usize).min(half);
        if z >= 0.0 {
            half + j
        } else {
            half - j
        }
    }
}

pub fn histogram(zs: &[f64], spec: &HistogramSpec, symmetrize: bool) -> Result<Histogram> {
    if zs.is_empty() || spec.bins == 0 {
        return Err(Error::invalid("histogram needs data and at least one bin"));
    }
    let max_abs = zs.iter().map(|z| z.abs()).fold(0.0, f64::max);
    let r = match spec.range {
        Some(r) if r > 0.0 && r.is_finite() => r,
        Some(r) => return Err(Error::invalid(format!("histogram range must be > 0, got {r}"))),
        None if max_abs > 0.0 => max_abs,
        None => 1.0,
    };
    let bins = spec.bins;
    let width = 2.0 * r / bins as f64;
    let edges: Vec<f64> = (0..=bins).map(|i| -r + i as f64 * width).collect();
    let mut counts = vec![0usize; bins];
    let mut inside = 0usize;
    for &z in zs {
        if !z.is_finite() || z.abs() > r {
            continue;
        }
        counts[mirrored_bin(z, width, bins)] += 1;
        inside += 1;
    }
    let mut total = inside as f64;
    if symmetrize {
        counts = (0..bins).map(|i| counts[i] + counts[bins - 1 - i]).collect();
        total *= 2.0;
    }
    let density = counts.iter().map(|&c| c as f64 / (total * width)).collect();
    Ok(Histogram { edges, counts, density, symmetrized: symmetrize })
}

/// Writes the histogram of `zs` together with the bin-averaged density of
/// the fitted mixture.
pub fn emit_histogram(
    zs: &[f64],
    spec: &HistogramSpec,
    symmetrize: bool,
    overlay: &ZMixture,
    path: impl AsRef<Path>,
) -> Result<Histogram> {
    let h = histogram(zs, spec, symmetrize)?;
    let rows = h
        .counts
        .iter()
        .enumerate()
        .map(|(i, &c)| {
            let (lo, hi) = (h.edges[i], h.edges[i + 1]);
            let fit = (overlay.cdf(hi) - overlay.cdf(lo)) / (hi - lo);
            vec![lo, hi, c as f64, h.density[i], fit]
        })
        .collect();
    Table {
        figure: if symmetrize {
            "symmetrized histogram of z-values with fitted mixture"
        } else {
            "histogram of z-values with fitted mixture"
        },
        columns: &["bin_lo", "bin_hi", "count", "density", "fit_density"],
        rows,
    }
    .write(path.as_ref())?;
    Ok(h)
}
