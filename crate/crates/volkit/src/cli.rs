//! Subcommand parsing and dispatch. Every run writes its resolved
//! configuration to `config.json` next to its outputs and prints a short
//! summary table; failures print a JSON error on stderr.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand, ValueEnum};
use roughvol::covstruct::{fsv_m2_curve, smoothed_m2, smoothing_bias_regression, SmoothingSpec};
use roughvol::forecast::{evaluate_p_ratio, HarnessConfig, HurstSource, ModelSpec, Target};
use roughvol::fracproc::{fou_simulate_batch, simulate_batch, write_binary, write_csv, FbmParams, FouParams};
use roughvol::memdiag::{acf_with_bands, frac_diff, vt_scaling, AcfReport, VtOptions, VtReport, DEFAULT_MIN_BLOCKS};
use roughvol::microsim::{
    coarse_grain_to_vol, cumulative_flow_hurst, hawkes_simulate_batch, HawkesParams, Kernel, DEFAULT_EVENT_BUDGET,
};
use roughvol::scaling::{
    default_delta_grid, fit_scaling, increment_moments, split_reestimate, ScalingReport, Units, VolSeries,
    DEFAULT_Q_GRID,
};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ingest::{ingest, resolve_data_path, DataFormat, DatasetSpec, DroppedRow};
use crate::study::{run_simulation_study, StudyConfig, StudyReport, WindowSpec, DEFAULT_STEPS_PER_DAY};

#[derive(Debug, Parser)]
#[command(name = "volkit", version, about = "Rough volatility estimation, simulation and forecasting")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case", tag = "command")]
pub enum Command {
    /// Fit the structure-function scaling of a volatility series.
    Estimate(EstimateArgs),
    /// Simulate fBM or fOU paths.
    Simulate(SimulateArgs),
    /// Rolling out-of-sample comparison of RFSV, AR and HAR forecasts.
    Forecast(ForecastArgs),
    /// V(t) scaling, fractional differencing and autocorrelation bands.
    DiagnoseMemory(MemoryArgs),
    /// Simulate Hawkes order flow and measure the roughness it induces.
    Hawkes(HawkesArgs),
    /// Smoothing-bias regression for window-averaged variance.
    SmoothingBias(SmoothingArgs),
    /// Simulated RFSV prices with spot and windowed realized-variance proxies.
    Study(StudyArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Estimate(_) => "estimate",
            Command::Simulate(_) => "simulate",
            Command::Forecast(_) => "forecast",
            Command::DiagnoseMemory(_) => "diagnose-memory",
            Command::Hawkes(_) => "hawkes",
            Command::SmoothingBias(_) => "smoothing-bias",
            Command::Study(_) => "study",
        }
    }

    fn out_dir(&self) -> &Path {
        match self {
            Command::Estimate(a) => &a.out.out,
            Command::Simulate(a) => &a.out.out,
            Command::Forecast(a) => &a.out.out,
            Command::DiagnoseMemory(a) => &a.out.out,
            Command::Hawkes(a) => &a.out.out,
            Command::SmoothingBias(a) => &a.out.out,
            Command::Study(a) => &a.out.out,
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct OutArgs {
    /// Output directory (created if missing).
    #[arg(long, default_value = "volkit-out")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DataArgs {
    /// CSV file; relative paths resolve against $VOLKIT_DATA_DIR when set.
    #[arg(long)]
    pub data: PathBuf,
    /// Defaults to oxford-man-csv when --asset is given, else generic-csv.
    #[arg(long, value_enum)]
    pub format: Option<DataFormat>,
    /// Column key, e.g. SPX2.rv.
    #[arg(long)]
    pub asset: Option<String>,
    /// What the values measure: vol, var or logvar.
    #[arg(long, default_value = "var")]
    pub units: Units,
    #[arg(long)]
    pub from: Option<NaiveDate>,
    #[arg(long)]
    pub to: Option<NaiveDate>,
}

impl DataArgs {
    fn spec(&self) -> DatasetSpec {
        let format = self.format.unwrap_or(if self.asset.is_some() {
            DataFormat::OxfordManCsv
        } else {
            DataFormat::GenericCsv
        });
        DatasetSpec {
            path: resolve_data_path(&self.data),
            format,
            asset: self.asset.clone(),
            units: self.units,
            from: self.from,
            to: self.to,
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EstimateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub data: DataArgs,
    /// Moment orders q.
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_Q_GRID.to_vec())]
    pub q: Vec<f64>,
    /// Largest lag Δ (lags 1..=max-lag).
    #[arg(long, default_value_t = 30)]
    pub max_lag: usize,
    /// Also fit this many contiguous segments separately.
    #[arg(long)]
    pub split: Option<usize>,
    /// Lags for increment histograms.
    #[arg(long, value_delimiter = ',', default_values_t = vec![1usize, 5, 25, 125])]
    pub histogram_lags: Vec<usize>,
    #[arg(long, default_value_t = 50)]
    pub bins: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Process {
    Fbm,
    Fou,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SimulateArgs {
    #[arg(long, value_enum, default_value = "fou")]
    pub process: Process,
    #[arg(long, default_value_t = 0.14)]
    pub hurst: f64,
    /// Grid points per path.
    #[arg(long, default_value_t = 3500)]
    pub n: usize,
    #[arg(long, default_value_t = 1.0)]
    pub dt: f64,
    #[arg(long, default_value_t = 0.3)]
    pub nu: f64,
    #[arg(long, default_value_t = 5e-4)]
    pub alpha: f64,
    #[arg(long, default_value_t = -5.0, allow_hyphen_values = true)]
    pub mean: f64,
    #[arg(long, default_value_t = -5.0, allow_hyphen_values = true)]
    pub x0: f64,
    #[arg(long, default_value_t = 1)]
    pub count: usize,
    /// Write the binary path format instead of CSV.
    #[arg(long)]
    pub binary: bool,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TargetArg {
    Logvar,
    Var,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ForecastArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub data: DataArgs,
    #[arg(long, value_delimiter = ',', default_values_t = vec![1usize, 5, 20])]
    pub horizons: Vec<usize>,
    /// Training window in observations.
    #[arg(long, default_value_t = 500)]
    pub window: usize,
    #[arg(long, value_enum, default_value = "logvar")]
    pub target: TargetArg,
    /// Re-estimate H on every training window instead of once per series.
    #[arg(long)]
    pub rolling_hurst: bool,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct MemoryArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub data: DataArgs,
    /// Fractional differencing order.
    #[arg(long, default_value_t = 0.4)]
    pub d: f64,
    #[arg(long, default_value_t = 500)]
    pub truncation: usize,
    #[arg(long, default_value_t = 100)]
    pub max_lag: usize,
    /// Largest block length t for V(t).
    #[arg(long, default_value_t = 50)]
    pub t_max: usize,
    #[arg(long)]
    pub overlapping: bool,
    #[arg(long, default_value_t = DEFAULT_MIN_BLOCKS)]
    pub min_blocks: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelArg {
    Zero,
    Exponential,
    PowerLaw,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct HawkesArgs {
    #[arg(long, default_value_t = 2.0)]
    pub mu: f64,
    #[arg(long, value_enum, default_value = "power-law")]
    pub kernel: KernelArg,
    /// L¹ norm of the kernel.
    #[arg(long, default_value_t = 0.98)]
    pub norm: f64,
    /// Power-law tail exponent.
    #[arg(long, default_value_t = 1.6)]
    pub beta: f64,
    /// Power-law time offset.
    #[arg(long, default_value_t = 1e-3)]
    pub t0: f64,
    /// Exponential decay rate.
    #[arg(long, default_value_t = 1.0)]
    pub decay: f64,
    #[arg(long, default_value_t = 1e4)]
    pub horizon: f64,
    /// Bin width for coarse-graining.
    #[arg(long, default_value_t = 10.0)]
    pub bin: f64,
    #[arg(long, default_value_t = 1)]
    pub runs: usize,
    #[arg(long, default_value_t = DEFAULT_EVENT_BUDGET)]
    pub event_budget: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SmoothingArgs {
    #[arg(long, default_value_t = 0.14)]
    pub hurst: f64,
    /// Spot m(2, Δ) amplitude.
    #[arg(long, default_value_t = 0.3)]
    pub alpha: f64,
    /// Averaging window length in days.
    #[arg(long, default_value_t = 1.0 / 24.0)]
    pub window: f64,
    #[arg(long, default_value_t = 100)]
    pub max_lag: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct StudyArgs {
    #[arg(long, default_value_t = 0.14)]
    pub hurst: f64,
    #[arg(long, default_value_t = 0.3)]
    pub nu: f64,
    #[arg(long, default_value_t = 5e-4)]
    pub alpha: f64,
    #[arg(long, default_value_t = -5.0, allow_hyphen_values = true)]
    pub mean: f64,
    #[arg(long, default_value_t = 2000)]
    pub days: usize,
    #[arg(long, default_value_t = DEFAULT_STEPS_PER_DAY)]
    pub steps_per_day: usize,
    #[arg(long, default_value_t = 5e-4)]
    pub tick: f64,
    /// Number of independent runs; run i uses seed + i.
    #[arg(long, default_value_t = 1)]
    pub runs: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutArgs,
}

/// Written to `config.json` in every output directory.
#[derive(Debug, Serialize)]
struct RunConfig<'a> {
    tool: &'static str,
    version: &'static str,
    #[serde(flatten)]
    command: &'a Command,
}

/// Parses `argv` (program name first), runs the command and returns the
/// process exit status.
pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind as K;
            if matches!(e.kind(), K::DisplayHelp | K::DisplayVersion | K::DisplayHelpOnMissingArgumentOrSubcommand) {
                let _ = e.print();
                return 0;
            }
            report_error("usage", &e.to_string());
            return 2;
        }
    };
    match execute(&cli.command) {
        Ok(summary) => {
            print!("{summary}");
            0
        }
        Err(e) => {
            let kind = match e.exit_code() {
                2 => "usage",
                3 => "data",
                _ => "numerical",
            };
            report_error(kind, &e.to_string());
            e.exit_code()
        }
    }
}

fn report_error(kind: &str, message: &str) {
    let body = serde_json::json!({ "error": { "kind": kind, "message": message.trim_end() } });
    eprintln!("{body}");
}

/// Runs one command, writing its outputs; returns the summary text.
pub fn execute(cmd: &Command) -> Result<String> {
    let out = cmd.out_dir();
    fs::create_dir_all(out)?;
    write_json(
        &out.join("config.json"),
        &RunConfig {
            tool: "volkit",
            version: env!("CARGO_PKG_VERSION"),
            command: cmd,
        },
    )?;
    match cmd {
        Command::Estimate(a) => estimate(a),
        Command::Simulate(a) => simulate(a),
        Command::Forecast(a) => forecast(a),
        Command::DiagnoseMemory(a) => diagnose_memory(a),
        Command::Hawkes(a) => hawkes(a),
        Command::SmoothingBias(a) => smoothing_bias(a),
        Command::Study(a) => study(a),
    }
    .map(|s| format!("volkit {} -> {}\n{s}", cmd.name(), out.display()))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut f = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut f, value)?;
    writeln!(f)?;
    f.flush()?;
    Ok(())
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut width: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for r in rows {
        for (w, c) in width.iter_mut().zip(r) {
            *w = (*w).max(c.len());
        }
    }
    let line = |cells: Vec<&str>| {
        let mut s = cells
            .iter()
            .zip(&width)
            .map(|(c, w)| format!("{c:>w$}"))
            .collect::<Vec<_>>()
            .join("  ");
        s.push('\n');
        s
    };
    let mut out = line(header.to_vec());
    out.push_str(&line(width.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>().iter().map(String::as_str).collect()));
    for r in rows {
        out.push_str(&line(r.iter().map(String::as_str).collect()));
    }
    out
}

fn f4(x: f64) -> String {
    format!("{x:.4}")
}

fn load(data: &DataArgs) -> Result<(VolSeries<f64>, Vec<DroppedRow>)> {
    let ing = ingest(&data.spec())?;
    Ok((ing.series, ing.dropped))
}

fn lag_grid(max_lag: usize) -> Result<Vec<usize>> {
    if max_lag < 2 {
        return Err(Error::Usage("max lag must be at least 2".into()));
    }
    Ok((1..=max_lag).collect())
}

#[derive(Serialize)]
struct EstimateOutput<'a> {
    label: &'a str,
    n_obs: usize,
    first_date: Option<NaiveDate>,
    last_date: Option<NaiveDate>,
    dropped_rows: &'a [DroppedRow],
    scaling: &'a ScalingReport<f64>,
    segments: Option<Vec<ScalingReport<f64>>>,
}

fn estimate(a: &EstimateArgs) -> Result<String> {
    let (series, dropped) = load(&a.data)?;
    let deltas = lag_grid(a.max_lag)?;
    let report = fit_scaling(&series, &a.q, &deltas)?;
    let segments = a.split.map(|n| split_reestimate(&series, n, &a.q, &deltas)).transpose()?;
    let out = &a.out.out;
    report.write_csv(create(&out.join("m_q_delta.csv"))?)?;
    let moments = a
        .histogram_lags
        .iter()
        .filter(|&&d| d + 1 < series.len())
        .map(|&d| increment_moments(&series, d, a.bins, Some(report.hurst_hat)))
        .collect::<roughvol::Result<Vec<_>>>()?;
    write_json(&out.join("increments.json"), &moments)?;
    write_json(
        &out.join("scaling.json"),
        &EstimateOutput {
            label: series.label(),
            n_obs: series.len(),
            first_date: series.dates().first().copied(),
            last_date: series.dates().last().copied(),
            dropped_rows: &dropped,
            scaling: &report,
            segments: segments.clone(),
        },
    )?;
    let mut rows: Vec<Vec<String>> = report
        .fits
        .iter()
        .map(|f| vec![f.q.to_string(), f4(f.zeta), f4(f.zeta_stderr), f4(f.zeta / f.q), f4(f.r_squared)])
        .collect();
    rows.push(vec![
        "H".into(),
        f4(report.hurst_hat),
        String::new(),
        format!("nu {}", f4(report.nu_hat)),
        String::new(),
    ]);
    let mut s = format!(
        "{}: {} observations, {} rows dropped\n",
        series.label(),
        series.len(),
        dropped.len()
    );
    s.push_str(&table(&["q", "zeta_q", "stderr", "zeta_q/q", "R^2"], &rows));
    if let Some(seg) = segments {
        let rows: Vec<Vec<String>> = seg.iter().map(|r| vec![r.label.clone(), f4(r.hurst_hat), f4(r.nu_hat)]).collect();
        s.push_str(&table(&["segment", "H", "nu"], &rows));
    }
    Ok(s)
}

#[derive(Serialize)]
struct SimulatedPath {
    file: String,
    n_points: usize,
    hurst_hat: Option<f64>,
}

fn simulate(a: &SimulateArgs) -> Result<String> {
    let fbm = FbmParams::new(a.hurst, a.n, a.dt, a.seed)?;
    let paths = match a.process {
        Process::Fbm => simulate_batch(&fbm, a.count)?,
        Process::Fou => fou_simulate_batch(
            &FouParams {
                fbm,
                nu: a.nu,
                alpha: a.alpha,
                mean_level: a.mean,
                x0: a.x0,
            },
            a.count,
        )?,
    };
    let deltas = default_delta_grid();
    let mut summary = Vec::new();
    for (i, p) in paths.iter().enumerate() {
        let file = format!("path_{i}.{}", if a.binary { "bin" } else { "csv" });
        let w = create(&a.out.out.join(&file))?;
        if a.binary {
            write_binary(p, w)?;
        } else {
            write_csv(p, w)?;
        }
        let hurst_hat = (p.len() > 2 * deltas.len())
            .then(|| {
                roughvol::scaling::fit_scaling_log(&p.values, "path", &[1.0, 2.0], &deltas).map(|r| r.hurst_hat)
            })
            .transpose()?;
        summary.push(SimulatedPath {
            file,
            n_points: p.len(),
            hurst_hat,
        });
    }
    write_json(&a.out.out.join("simulate.json"), &summary)?;
    let rows: Vec<Vec<String>> = summary
        .iter()
        .map(|s| vec![s.file.clone(), s.n_points.to_string(), s.hurst_hat.map(f4).unwrap_or_default()])
        .collect();
    Ok(table(&["path", "points", "H (fitted)"], &rows))
}

fn forecast(a: &ForecastArgs) -> Result<String> {
    let (series, _) = load(&a.data)?;
    let mut models = ModelSpec::standard_set();
    if a.rolling_hurst {
        for m in &mut models {
            if let ModelSpec::Rfsv { hurst } = m {
                *hurst = HurstSource::Rolling;
            }
        }
    }
    let config = HarnessConfig {
        horizons: a.horizons.clone(),
        training_window: a.window,
        target: match a.target {
            TargetArg::Logvar => Target::LogVariance,
            TargetArg::Var => Target::Variance,
        },
        models: models.clone(),
    };
    let mut table_out = evaluate_p_ratio(&series, &config)?;
    for r in &mut table_out.rows {
        r.asset = series.label().to_string();
    }
    write_json(&a.out.out.join("ptable.json"), &table_out)?;
    table_out.write_records_csv(create(&a.out.out.join("forecasts.csv"))?)?;
    let labels: Vec<String> = models.iter().map(|m| m.label()).collect();
    let mut header = vec!["horizon"];
    header.extend(labels.iter().map(String::as_str));
    let rows: Vec<Vec<String>> = table_out
        .rows
        .iter()
        .map(|r| {
            let mut row = vec![r.horizon.to_string()];
            row.extend(labels.iter().map(|l| r.p.get(l).map(|&p| f4(p)).unwrap_or_default()));
            row
        })
        .collect();
    Ok(format!(
        "{}: P ratios, H = {}, nu = {}\n{}",
        series.label(),
        f4(table_out.hurst),
        f4(table_out.nu),
        table(&header, &rows)
    ))
}

#[derive(Serialize)]
struct MemoryOutput {
    label: String,
    vt: VtReport<f64>,
    d: f64,
    frac_diff_tail_mass: f64,
    frac_diff_tail_warning: bool,
    acf_log_vol: AcfReport<f64>,
    acf_frac_diff: AcfReport<f64>,
}

fn diagnose_memory(a: &MemoryArgs) -> Result<String> {
    let (series, _) = load(&a.data)?;
    let t_grid: Vec<usize> = (1..=a.t_max).collect();
    let vt = vt_scaling(
        &series,
        &t_grid,
        VtOptions {
            overlapping: a.overlapping,
            min_blocks: a.min_blocks,
        },
    )?;
    let log_vol = series.log_vol();
    let fd = frac_diff(&log_vol, a.d, a.truncation)?;
    let acf_raw = acf_with_bands(&log_vol, a.max_lag)?;
    let acf_fd = acf_with_bands(&fd.values, a.max_lag)?;
    let out = &a.out.out;
    vt.write_csv(create(&out.join("vt.csv"))?)?;
    acf_raw.write_csv(create(&out.join("acf_log_vol.csv"))?)?;
    acf_fd.write_csv(create(&out.join("acf_frac_diff.csv"))?)?;
    let rows = vec![
        vec!["V(t) slope".into(), f4(vt.slope)],
        vec!["V(t) R^2".into(), f4(vt.r_squared)],
        vec!["ACF inside bands, log-vol".into(), f4(acf_raw.inside_fraction)],
        vec![format!("ACF inside bands, d = {}", a.d), f4(acf_fd.inside_fraction)],
        vec!["frac-diff tail mass".into(), f4(fd.tail_mass)],
    ];
    write_json(
        &out.join("memory.json"),
        &MemoryOutput {
            label: series.label().into(),
            vt,
            d: a.d,
            frac_diff_tail_mass: fd.tail_mass,
            frac_diff_tail_warning: fd.tail_warning,
            acf_log_vol: acf_raw,
            acf_frac_diff: acf_fd,
        },
    )?;
    Ok(table(&["diagnostic", "value"], &rows))
}

#[derive(Serialize)]
struct HawkesRun {
    events: usize,
    rate: f64,
    /// H of the log coarse-grained counts.
    log_count_hurst: f64,
    /// H of the centered cumulative counts.
    cumulative_flow_hurst: f64,
    floored_bins: usize,
}

#[derive(Serialize)]
struct HawkesOutput {
    params: HawkesParams<f64>,
    stationary_rate: f64,
    kernel_components: usize,
    kernel_relative_error: f64,
    runs: Vec<HawkesRun>,
}

fn hawkes(a: &HawkesArgs) -> Result<String> {
    let kernel = match a.kernel {
        KernelArg::Zero => Kernel::Zero,
        KernelArg::Exponential => Kernel::Exponential {
            a: a.norm * a.decay,
            b: a.decay,
        },
        KernelArg::PowerLaw => Kernel::power_law_with_norm(a.norm, a.beta, a.t0),
    };
    let mut params = HawkesParams::new(a.mu, kernel, a.horizon, a.seed)?;
    params.event_budget = a.event_budget;
    let streams = hawkes_simulate_batch(&params, a.runs)?;
    let deltas = default_delta_grid();
    let mut runs = Vec::with_capacity(streams.len());
    for s in &streams {
        let cg = coarse_grain_to_vol(s, a.bin)?;
        runs.push(HawkesRun {
            events: s.len(),
            rate: s.len() as f64 / a.horizon,
            log_count_hurst: fit_scaling(&cg.series, &[2.0], &deltas)?.hurst_hat,
            cumulative_flow_hurst: cumulative_flow_hurst(s, a.bin, &deltas)?,
            floored_bins: cg.floored_bins,
        });
    }
    if let Some(first) = streams.first() {
        first.write_csv(create(&a.out.out.join("events.csv"))?)?;
    }
    let rows: Vec<Vec<String>> = runs
        .iter()
        .enumerate()
        .map(|(i, r)| {
            vec![
                i.to_string(),
                r.events.to_string(),
                f4(r.rate),
                f4(r.log_count_hurst),
                f4(r.cumulative_flow_hurst),
            ]
        })
        .collect();
    let first = streams.first();
    write_json(
        &a.out.out.join("hawkes.json"),
        &HawkesOutput {
            params,
            stationary_rate: params.stationary_rate(),
            kernel_components: first.map_or(0, |s| s.kernel_components),
            kernel_relative_error: first.map_or(0.0, |s| s.kernel_relative_error),
            runs,
        },
    )?;
    Ok(format!(
        "stationary rate {}\n{}",
        f4(params.stationary_rate()),
        table(&["run", "events", "rate", "H log-count", "H cum. flow"], &rows)
    ))
}

#[derive(Serialize)]
struct SmoothingOutput {
    hurst: f64,
    alpha: f64,
    window: f64,
    alpha_hat: f64,
    hurst_hat: f64,
}

fn smoothing_bias(a: &SmoothingArgs) -> Result<String> {
    let lags: Vec<f64> = lag_grid(a.max_lag)?.into_iter().map(|l| l as f64).collect();
    let spec = SmoothingSpec {
        hurst: a.hurst,
        alpha_amp: a.alpha,
        window: a.window,
        lags: lags.clone(),
    };
    let fit = smoothing_bias_regression(&spec)?;
    let smoothed = smoothed_m2(&spec)?;
    let spot = fsv_m2_curve(a.hurst, a.alpha, 0.0, &lags)?;
    let mut w = create(&a.out.out.join("m2.csv"))?;
    writeln!(w, "delta,spot,smoothed")?;
    for ((d, s), m) in lags.iter().zip(&spot).zip(&smoothed) {
        writeln!(w, "{d},{s},{m}")?;
    }
    w.flush()?;
    write_json(
        &a.out.out.join("smoothing.json"),
        &SmoothingOutput {
            hurst: a.hurst,
            alpha: a.alpha,
            window: a.window,
            alpha_hat: fit.alpha_hat,
            hurst_hat: fit.hurst_hat,
        },
    )?;
    Ok(table(
        &["window", "alpha_hat", "H_hat"],
        &[vec![f4(a.window), format!("{:.3}", fit.alpha_hat), format!("{:.3}", fit.hurst_hat)]],
    ))
}

#[derive(Serialize)]
struct StudyOutput {
    runs: Vec<StudyReport>,
    mean_hurst: [f64; 3],
}

fn study(a: &StudyArgs) -> Result<String> {
    if a.runs == 0 {
        return Err(Error::Usage("runs must be positive".into()));
    }
    let base = StudyConfig {
        hurst: a.hurst,
        nu: a.nu,
        alpha: a.alpha,
        mean_level: a.mean,
        x0: a.mean,
        days: a.days,
        steps_per_day: a.steps_per_day,
        tick: a.tick,
        ..StudyConfig::default()
    };
    let mut reports = Vec::with_capacity(a.runs);
    for i in 0..a.runs {
        let cfg = StudyConfig {
            seed: a.seed + i as u64,
            ..base.clone()
        };
        reports.push(run_simulation_study(&cfg)?);
    }
    let first = &reports[0];
    let out = &a.out.out;
    first.spot.write_csv(create(&out.join("m_spot.csv"))?)?;
    first.short_window.write_csv(create(&out.join("m_short_window.csv"))?)?;
    first.long_window.write_csv(create(&out.join("m_long_window.csv"))?)?;
    let n = reports.len() as f64;
    let mean = |f: fn(&StudyReport) -> f64| reports.iter().map(f).sum::<f64>() / n;
    let mean_hurst = [
        mean(|r| r.spot.hurst_hat),
        mean(|r| r.short_window.hurst_hat),
        mean(|r| r.long_window.hurst_hat),
    ];
    let mean_nu = [
        mean(|r| r.spot.nu_hat),
        mean(|r| r.short_window.nu_hat),
        mean(|r| r.long_window.nu_hat),
    ];
    let windows: [(&str, Option<WindowSpec>); 3] = [
        ("spot", None),
        ("short window", Some(base.short_window)),
        ("long window", Some(base.long_window)),
    ];
    let rows: Vec<Vec<String>> = windows
        .iter()
        .enumerate()
        .map(|(k, (name, w))| {
            vec![
                name.to_string(),
                w.map(|w| format!("{}h @ {}min", w.hours, w.sampling_minutes)).unwrap_or_else(|| "-".into()),
                f4(mean_hurst[k]),
                f4(mean_nu[k]),
            ]
        })
        .collect();
    write_json(&out.join("study.json"), &StudyOutput { runs: reports, mean_hurst })?;
    Ok(format!(
        "{} run(s), {} days, {} steps/day\n{}",
        a.runs,
        a.days,
        a.steps_per_day,
        table(&["proxy", "window", "H", "nu"], &rows)
    ))
}
