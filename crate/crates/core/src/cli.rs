//! The `snr-prior` command line: `fit`, `analyze`, `shrink`, `simulate` and
//! `report`. Model files are the only hand-off between `fit` and the rest.
//!
//! Failures print one line to stderr,
//! `error: kind=<kind> message="<text>"`, exit with status 1, and remove any
//! output files the command had started writing.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::analytics::{summary_table, DEFAULT_PROBS};
use crate::deconv::{convolve, deconvolve};
use crate::em::{fit_em, select_components, EmConfig};
use crate::error::{Error, Result};
use crate::io::{
    self, emit_curves, emit_histogram, read_model, read_trials, write_model, write_trials, CurveGrid, HistogramSpec,
    MixtureModel, ModelFile, Provenance,
};
use crate::model::{SnrPrior, ZMixture};
use crate::posterior::{
    conditional_coverage, credible_interval, ratio_quartiles_given_z, shrink_estimate, RatioEstimator, RatioQuartiles,
};
use crate::sim::{sample_trials, SDistSpec};

#[derive(Debug, Parser)]
#[command(name = "snr-prior", version, about = "Fit, deconvolve and apply an SNR prior for trial z-values")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a zero-mean normal mixture to the z-values of a trial file.
    Fit(FitArgs),
    /// Quantile summary plus every curve table for a model.
    Analyze(AnalyzeArgs),
    /// Shrink one trial estimate or a file of them.
    Shrink(ShrinkArgs),
    /// Simulate a trial file from a model.
    Simulate(SimulateArgs),
    /// Histogram of observed z-values with the fitted density.
    Report(ReportArgs),
}

fn parse_k_range(text: &str) -> std::result::Result<RangeInclusive<usize>, String> {
    let (a, b) = text
        .split_once("..=")
        .or_else(|| text.split_once(".."))
        .ok_or_else(|| format!("expected A..B, got '{text}'"))?;
    let a: usize = a.trim().parse().map_err(|_| format!("bad range start '{a}'"))?;
    let b: usize = b.trim().parse().map_err(|_| format!("bad range end '{b}'"))?;
    Ok(a..=b)
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("k").required(true).args(["components", "select_k"])))]
pub struct FitArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Fixed number of components.
    #[arg(long)]
    pub components: Option<usize>,
    /// Choose the number of components by BIC over an inclusive range, e.g. 1..6.
    #[arg(long, value_parser = parse_k_range)]
    pub select_k: Option<RangeInclusive<usize>>,
    #[arg(long, default_value_t = 10)]
    pub restarts: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 2000)]
    pub max_iter: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Comma-separated probabilities for the quantile table.
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_PROBS.to_vec())]
    pub probs: Vec<f64>,
    /// Seed for the sampled power histogram.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1_000_000)]
    pub power_sample: usize,
}

#[derive(Debug, Args)]
pub struct ShrinkArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    pub b: Option<f64>,
    #[arg(long)]
    pub s: Option<f64>,
    /// Trial file for batch mode (needs --out).
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub n: usize,
    /// fixed:S, lognormal:MU,SIGMA (of ln s) or list:S1,S2,...
    #[arg(long, default_value = "fixed:1")]
    pub s_dist: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub model: PathBuf,
    /// Pool counts of mirror-image bins.
    #[arg(long)]
    pub symmetrize: bool,
    #[arg(long, default_value_t = 80)]
    pub bins: usize,
    #[arg(long)]
    pub out: PathBuf,
}

/// Deletes registered outputs unless the command finished.
struct Outputs {
    paths: Vec<PathBuf>,
    done: bool,
}

impl Outputs {
    fn new() -> Self {
        Self { paths: Vec::new(), done: false }
    }

    fn track(&mut self, p: impl Into<PathBuf>) -> PathBuf {
        let p = p.into();
        self.paths.push(p.clone());
        p
    }
}

impl Drop for Outputs {
    fn drop(&mut self) {
        if !self.done {
            for p in &self.paths {
                let _ = fs::remove_file(p);
            }
        }
    }
}

fn prior_from(file: &ModelFile, err: &mut dyn Write) -> Result<SnrPrior> {
    Ok(match &file.model {
        MixtureModel::Snr(p) => p.clone(),
        MixtureModel::Z(m) => {
            let d = deconvolve(m, 0.0)?;
            for w in &d.warnings {
                writeln!(err, "warning: {w}")?;
            }
            d.prior
        }
    })
}

fn z_mixture_from(file: &ModelFile) -> ZMixture {
    match &file.model {
        MixtureModel::Z(m) => m.clone(),
        MixtureModel::Snr(p) => convolve(p),
    }
}

fn join(xs: &[f64]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

/// Runs a parsed command, writing results to `out` and warnings to `err`.
pub fn run(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let mut outputs = Outputs::new();
    match cli.command {
        Command::Fit(a) => fit(a, &mut outputs, out, err)?,
        Command::Analyze(a) => analyze(a, &mut outputs, out, err)?,
        Command::Shrink(a) => shrink(a, &mut outputs, out, err)?,
        Command::Simulate(a) => simulate(a, &mut outputs, out, err)?,
        Command::Report(a) => report(a, &mut outputs, out)?,
    }
    outputs.done = true;
    Ok(())
}

fn fit(a: FitArgs, outputs: &mut Outputs, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let cfg = EmConfig { max_iter: a.max_iter, restarts: a.restarts, seed: a.seed, ..EmConfig::default() };
    cfg.validate()?;
    let bytes = match fs::read(&a.input) {
        Ok(b) => b,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Err(Error::FileNotFound(a.input)),
        Err(e) => return Err(e.into()),
    };
    let (trials, ingest) = read_trials(&a.input)?;
    writeln!(err, "ingest: accepted {}, rejected {}", ingest.n_accepted, ingest.n_rejected)?;
    for r in &ingest.rejections {
        writeln!(err, "  row {}: {}", r.row, r.reason)?;
    }
    let zs: Vec<f64> = trials.iter().map(|t| t.z()).collect();
    let (mixture, diagnostics, k, bic_by_k) = match (a.components, a.select_k) {
        (Some(k), None) => {
            let (m, d) = fit_em(&zs, k, &cfg)?;
            (m, d, k, Vec::new())
        }
        (None, Some(range)) => {
            let s = select_components(&zs, range, &cfg)?;
            (s.mixture, s.diagnostics, s.chosen_k, s.bic_by_k)
        }
        _ => return Err(Error::invalid("give exactly one of --components and --select-k")),
    };
    let provenance = Provenance {
        data_sha256: Some(io::sha256_hex(&bytes)),
        n_observations: Some(zs.len()),
        em_config: Some(cfg),
        diagnostics: Some(diagnostics.clone()),
        bic_by_k: bic_by_k.clone(),
        note: None,
    };
    let path = outputs.track(&a.out);
    write_model(&ModelFile { model: MixtureModel::Z(mixture.clone()), provenance }, &path)?;

    writeln!(out, "components: {k}")?;
    for (kk, b) in &bic_by_k {
        writeln!(out, "bic[{kk}]: {b}")?;
    }
    writeln!(out, "loglik: {}", diagnostics.loglik)?;
    writeln!(out, "bic: {}", diagnostics.bic)?;
    writeln!(out, "iterations: {}", diagnostics.n_iter)?;
    writeln!(out, "converged: {}", diagnostics.converged)?;
    writeln!(out, "restart: {}", diagnostics.restart_index)?;
    writeln!(out, "weights: {}", join(mixture.weights()))?;
    writeln!(out, "z_sds: {}", join(mixture.sigmas()))?;
    let d = deconvolve(&mixture, 0.0)?;
    for w in &d.warnings {
        writeln!(err, "warning: {w}")?;
    }
    writeln!(out, "snr_sds: {}", join(d.prior.taus()))?;
    Ok(())
}

fn analyze(a: AnalyzeArgs, outputs: &mut Outputs, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let file = read_model(&a.model)?;
    let prior = prior_from(&file, err)?;
    let grid = CurveGrid { power_sample_size: a.power_sample, seed: a.seed, ..CurveGrid::default() };
    let table = summary_table(&prior, &a.probs)?;

    fs::create_dir_all(&a.out_dir)?;
    for name in [
        io::POWER_VS_SNR,
        io::EXAGGERATION_VS_SNR,
        io::EXAGGERATION_VS_POWER,
        io::RATIO_RAW_VS_Z,
        io::RATIO_SHRUNK_VS_Z,
        io::COVERAGE_VS_Z,
        io::POWER_HISTOGRAM,
    ] {
        outputs.track(a.out_dir.join(name));
    }
    let summary_path = outputs.track(a.out_dir.join(SUMMARY_FILE));
    write_summary(&table, &summary_path)?;
    emit_curves(&prior, &grid, &a.out_dir)?;

    writeln!(out, "{:<14}{}", "probability", fmt_row(&table.probabilities))?;
    writeln!(out, "{:<14}{}", "|SNR|", fmt_row(&table.snr_abs_quantiles))?;
    writeln!(out, "{:<14}{}", "power", fmt_row(&table.power_at_quantiles))?;
    writeln!(out, "{:<14}{}", "exaggeration", fmt_row(&table.exaggeration_at_quantiles))?;
    writeln!(out, "mean power: {:.4}", table.mean_power)?;
    writeln!(out, "P(power < 0.80): {:.4}", table.frac_power_below_080)?;
    Ok(())
}

pub const SUMMARY_FILE: &str = "summary_table.csv";

fn fmt_row(xs: &[f64]) -> String {
    xs.iter().map(|x| format!("{x:>9.3}")).collect()
}

fn write_summary(t: &crate::analytics::SummaryTable, path: &Path) -> Result<()> {
    let mut w = std::io::BufWriter::new(fs::File::create(path)?);
    writeln!(w, "# figure: quantiles of |SNR| with power and exaggeration at each quantile")?;
    writeln!(w, "# mean_power: {}", t.mean_power)?;
    writeln!(w, "# frac_power_below_0.80: {}", t.frac_power_below_080)?;
    writeln!(w, "probability,abs_snr,power,exaggeration")?;
    for i in 0..t.probabilities.len() {
        writeln!(
            w,
            "{},{},{},{}",
            t.probabilities[i], t.snr_abs_quantiles[i], t.power_at_quantiles[i], t.exaggeration_at_quantiles[i]
        )?;
    }
    w.flush()?;
    Ok(())
}

struct Shrunk {
    z: f64,
    estimate: f64,
    interval: crate::posterior::Interval,
    coverage: f64,
    raw: Option<RatioQuartiles>,
    shrunk: Option<RatioQuartiles>,
}

fn shrink_one(p: &SnrPrior, b: f64, s: f64, level: f64) -> Result<Shrunk> {
    let estimate = shrink_estimate(p, b, s)?;
    let interval = credible_interval(p, b, s, level)?;
    let z = b / s;
    let quartiles = |e| if z == 0.0 { Ok(None) } else { ratio_quartiles_given_z(p, z, e).map(Some) };
    Ok(Shrunk {
        z,
        estimate,
        interval,
        coverage: conditional_coverage(p, z)?,
        raw: quartiles(RatioEstimator::Raw)?,
        shrunk: quartiles(RatioEstimator::Shrunk)?,
    })
}

fn quartile_cells(q: Option<RatioQuartiles>) -> [String; 3] {
    match q {
        Some(q) => [q.q25.to_string(), q.q50.to_string(), q.q75.to_string()],
        None => [String::new(), String::new(), String::new()],
    }
}

fn shrink(a: ShrinkArgs, outputs: &mut Outputs, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    if !(a.level > 0.0 && a.level < 1.0) {
        return Err(Error::invalid(format!("--level must lie in (0, 1), got {}", a.level)));
    }
    match (&a.b, &a.s, &a.input, &a.out) {
        (Some(_), Some(_), None, None) | (None, None, Some(_), Some(_)) => {}
        _ => return Err(Error::invalid("use either --b and --s, or --input with --out")),
    }
    let file = read_model(&a.model)?;
    let prior = prior_from(&file, err)?;

    if let (Some(b), Some(s)) = (a.b, a.s) {
        let r = shrink_one(&prior, b, s, a.level)?;
        writeln!(out, "z: {}", r.z)?;
        writeln!(out, "estimate: {}", r.estimate)?;
        writeln!(out, "interval: {},{}", r.interval.lo, r.interval.hi)?;
        writeln!(out, "coverage_of_naive_interval: {}", r.coverage)?;
        writeln!(out, "raw_ratio_quartiles: {}", quartile_cells(r.raw).join(","))?;
        writeln!(out, "shrunk_ratio_quartiles: {}", quartile_cells(r.shrunk).join(","))?;
        return Ok(());
    }

    let (input, dest) = (a.input.unwrap(), a.out.unwrap());
    let (trials, ingest) = read_trials(&input)?;
    writeln!(err, "ingest: accepted {}, rejected {}", ingest.n_accepted, ingest.n_rejected)?;
    let path = outputs.track(&dest);
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record([
        "id", "b", "s", "z", "estimate", "lo", "hi", "coverage", "raw_q25", "raw_q50", "raw_q75", "shrunk_q25",
        "shrunk_q50", "shrunk_q75",
    ])?;
    for t in &trials {
        let r = shrink_one(&prior, t.b(), t.s(), a.level)?;
        let mut row = vec![
            t.id().to_owned(),
            t.b().to_string(),
            t.s().to_string(),
            r.z.to_string(),
            r.estimate.to_string(),
            r.interval.lo.to_string(),
            r.interval.hi.to_string(),
            r.coverage.to_string(),
        ];
        row.extend(quartile_cells(r.raw));
        row.extend(quartile_cells(r.shrunk));
        w.write_record(&row)?;
    }
    w.flush()?;
    writeln!(out, "wrote {} rows to {}", trials.len(), dest.display())?;
    Ok(())
}

fn simulate(a: SimulateArgs, outputs: &mut Outputs, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let spec: SDistSpec = a.s_dist.parse()?;
    if a.n == 0 {
        return Err(Error::invalid("--n must be >= 1"));
    }
    let file = read_model(&a.model)?;
    let prior = prior_from(&file, err)?;
    let trials = sample_trials(&prior, &spec, a.n, a.seed)?;
    let path = outputs.track(&a.out);
    write_trials(&trials, &path)?;
    writeln!(out, "wrote {} trials to {}", trials.len(), a.out.display())?;
    Ok(())
}

fn report(a: ReportArgs, outputs: &mut Outputs, out: &mut dyn Write) -> Result<()> {
    if a.bins == 0 {
        return Err(Error::invalid("--bins must be >= 1"));
    }
    let file = read_model(&a.model)?;
    let overlay = z_mixture_from(&file);
    let (trials, _) = read_trials(&a.input)?;
    let zs: Vec<f64> = trials.iter().map(|t| t.z()).collect();
    let path = outputs.track(&a.out);
    let h = emit_histogram(&zs, &HistogramSpec { bins: a.bins, range: None }, a.symmetrize, &overlay, &path)?;
    writeln!(
        out,
        "wrote {} bins over [{}, {}]{} to {}",
        h.counts.len(),
        h.edges[0],
        h.edges[h.edges.len() - 1],
        if h.symmetrized { " (symmetrized)" } else { "" },
        a.out.display()
    )?;
    Ok(())
}

/// One-line error record for stderr.
pub fn error_line(e: &Error) -> String {
    let msg = e.to_string().replace('\n', " ").replace('"', "'");
    format!("error: kind={} message=\"{}\"", e.kind(), msg)
}

/// Parses `args`, runs the command on the process's stdio and returns the
/// exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    match run(cli, &mut stdout.lock(), &mut stderr.lock()) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{}", error_line(&e));
            1
        }
    }
}
