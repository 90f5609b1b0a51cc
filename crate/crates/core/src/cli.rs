//! Command-line front end. Every figure command writes a data table as CSV
//! or JSON to `--output` (stdout by default); diagnostics go to stderr.
//!
//! Exit codes: 0 success, 1 other failure, 2 usage error, 3 configuration
//! error, 4 Monte Carlo validation failure.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::architecture::{
    chain_time, expected_max_rounds, f_waiting, range_limits, spdc_time, Architecture,
};
use crate::entanglement::ef_of_mode;
use crate::error::Error;
use crate::model::Model;
use crate::montecarlo::{mc_chain_time, mc_expected_max_rounds, McConfig, McEstimate};
use crate::params::{load_config, Config, Lifetime, PlatformParams, WaitingExponent, WV_MUX_QM};
use crate::sweep::{sweep, SweepRecord};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;
pub const EXIT_MC: i32 = 4;

/// Agreement threshold for Monte Carlo checks, in standard errors.
const MC_SIGMAS: f64 = 3.0;

#[derive(Parser, Debug)]
#[command(
    name = "qrepeater",
    version,
    about = "Quantum repeater rate model and optimizer"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// JSON configuration file; defaults are used when absent.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file; stdout when absent.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv, global = true)]
    format: Format,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Csv,
    Json,
}

/// `start:stop:points`, linearly spaced unless `--log` is given.
#[derive(Debug, Clone, Copy, PartialEq)]
struct GridSpec {
    start: f64,
    stop: f64,
    points: usize,
}

impl FromStr for GridSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let [start, stop, points] = parts[..] else {
            return Err(format!("expected start:stop:points, got {s:?}"));
        };
        let num = |x: &str| x.trim().parse::<f64>().map_err(|e| format!("{x:?}: {e}"));
        let (start, stop) = (num(start)?, num(stop)?);
        let points: usize = points
            .trim()
            .parse()
            .map_err(|e| format!("{points:?}: {e}"))?;
        if !(start.is_finite() && stop.is_finite() && start < stop) {
            return Err(format!("grid start {start} must be below stop {stop}"));
        }
        if points < 2 {
            return Err(format!("grid needs at least 2 points, got {points}"));
        }
        Ok(Self {
            start,
            stop,
            points,
        })
    }
}

#[derive(Args, Debug, Clone)]
struct GridArgs {
    /// Grid as start:stop:points.
    #[arg(long)]
    grid: Option<GridSpec>,
    /// Space grid points logarithmically.
    #[arg(long)]
    log: bool,
}

impl GridArgs {
    fn values(&self, default: GridSpec) -> Result<Vec<f64>, CliError> {
        let g = self.grid.unwrap_or(default);
        let n = g.points;
        let last = (n - 1) as f64;
        if self.log {
            if g.start <= 0.0 {
                return Err(CliError::Usage(format!(
                    "log grid needs a positive start, got {}",
                    g.start
                )));
            }
            let (a, b) = (g.start.ln(), g.stop.ln());
            Ok((0..n)
                .map(|i| match i {
                    0 => g.start,
                    i if i == n - 1 => g.stop,
                    i => (a + (b - a) * i as f64 / last).exp(),
                })
                .collect())
        } else {
            Ok((0..n)
                .map(|i| {
                    if i == n - 1 {
                        g.stop
                    } else {
                        g.start + (g.stop - g.start) * i as f64 / last
                    }
                })
                .collect())
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// ENG success probability against elementary link length.
    PgCurve {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        grid: GridArgs,
        /// Comma-separated platform names; multimode platforms by default.
        #[arg(long, value_delimiter = ',')]
        platforms: Vec<String>,
    },
    /// Entanglement of formation against storage time L0/c, per wavevector
    /// and averaged over the spectrum.
    EfCurve {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, default_value = WV_MUX_QM)]
        platform: String,
        /// Wavevectors in mm⁻¹.
        #[arg(long, value_delimiter = ',', default_values_t = [10.0, 100.0, 1000.0])]
        k: Vec<f64>,
    },
    /// Time per ebit against total distance, at the optimal node count,
    /// with the repeaterless SPDC reference.
    RateCurve {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, value_delimiter = ',')]
        platforms: Vec<String>,
        /// Architectures (ahierarchical, semihierarchical); both by default.
        #[arg(long, value_delimiter = ',')]
        architectures: Vec<String>,
    },
    /// Optimal node count and chain probabilities against distance.
    Optimize {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, value_delimiter = ',')]
        platforms: Vec<String>,
        #[arg(long, value_delimiter = ',')]
        architectures: Vec<String>,
    },
    /// Maximal ranges set by the longest-lived mode.
    Limits {
        #[command(flatten)]
        common: Common,
        /// Reference wavevector in mm⁻¹; the band minimum by default.
        #[arg(long)]
        k_ref: Option<f64>,
        /// Node count for the finite-chain limits.
        #[arg(long)]
        nodes: Option<u32>,
    },
    /// Repeaterless SPDC time per ebit against distance.
    Spdc {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Compare analytic results with Monte Carlo estimates.
    McValidate {
        #[command(flatten)]
        common: Common,
        /// Trials per waiting-factor cell.
        #[arg(long, default_value_t = 1_000_000)]
        samples: u64,
        /// Trials per chain-time cell.
        #[arg(long, default_value_t = 100_000)]
        chain_samples: u64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// Platform parameter presets.
    Presets {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Config(Error),
    Mc(String),
    Other(String),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Mc(_) => EXIT_MC,
            CliError::Other(_) => EXIT_FAILURE,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Mc(m) | CliError::Other(m) => f.write_str(m),
            CliError::Config(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Io { .. } | Error::Parse(_) | Error::Validation { .. } => CliError::Config(e),
            Error::RoundCapExceeded { .. } => CliError::Mc(e.to_string()),
            Error::InvalidArgument { .. } => CliError::Other(e.to_string()),
        }
    }
}

/// Parse `argv` (including the program name), execute, and return the exit
/// code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return EXIT_OK;
            }
            let text = e.to_string();
            let line = text.lines().next().unwrap_or("invalid arguments");
            eprintln!("{}", line.trim());
            return EXIT_USAGE;
        }
    };
    match execute(cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {}", e.to_string().replace('\n', " "));
            e.exit_code()
        }
    }
}

fn load(common: &Common) -> Result<Model, CliError> {
    let config = match &common.config {
        Some(path) => load_config(path)?,
        None => Config::default(),
    };
    Ok(Model::new(config)?)
}

fn select_platforms(
    model: &Model,
    names: &[String],
    default: impl Fn(&PlatformParams) -> bool,
) -> Result<Vec<PlatformParams>, CliError> {
    if names.is_empty() {
        return Ok(model
            .config
            .platforms
            .iter()
            .filter(|p| default(p))
            .cloned()
            .collect());
    }
    names
        .iter()
        .map(|n| {
            model
                .config
                .platform(n)
                .cloned()
                .ok_or_else(|| CliError::Usage(format!("unknown platform {n:?}")))
        })
        .collect()
}

fn select_architectures(names: &[String]) -> Result<Vec<Architecture>, CliError> {
    if names.is_empty() {
        return Ok(Architecture::ALL.to_vec());
    }
    names
        .iter()
        .map(|n| n.parse().map_err(|e: Error| CliError::Usage(e.to_string())))
        .collect()
}

fn grid(start: f64, stop: f64, points: usize) -> GridSpec {
    GridSpec {
        start,
        stop,
        points,
    }
}

fn execute(command: Command) -> Result<(), CliError> {
    match command {
        Command::PgCurve {
            common,
            grid: g,
            platforms,
        } => {
            let model = load(&common)?;
            let platforms = select_platforms(&model, &platforms, |p| p.modes > 1)?;
            let mut table = Table::new(&["L0_km", "platform", "p_g"]);
            for l0 in g.values(grid(10.0, 250.0, 100))? {
                for p in &platforms {
                    let budget = model.link_budget(p, l0)?;
                    table.push(vec![l0.into(), p.name.as_str().into(), budget.p_g.into()]);
                }
            }
            table.emit(&common)
        }
        Command::EfCurve {
            common,
            grid: g,
            platform,
            k,
        } => {
            let model = load(&common)?;
            let p = select_platforms(&model, &[platform], |_| true)?.remove(0);
            if let Some(bad) = k.iter().find(|&&k| !(k > 0.0)) {
                return Err(CliError::Usage(format!(
                    "wavevector {bad} must be positive"
                )));
            }
            let mut headers = vec!["L0_km".to_owned(), "t_us".to_owned()];
            headers.extend(k.iter().map(|k| format!("EF_K{k}")));
            headers.push("EF_mean".to_owned());
            let mut table = Table::with_headers(headers);
            let chi = model.chi_eff(&p);
            for l0 in g.values(grid(0.0, 300.0, 151))? {
                let t = l0 / model.c();
                let mut row: Vec<Cell> = vec![l0.into(), t.into()];
                row.extend(
                    k.iter()
                        .map(|&k| ef_of_mode(model.decoherence(&p, k), t, chi).into()),
                );
                row.push(model.mean_ef(&p, t, 1).into());
                table.push(row);
            }
            table.emit(&common)
        }
        Command::RateCurve {
            common,
            grid: g,
            platforms,
            architectures,
        } => {
            let model = load(&common)?;
            let platforms = select_platforms(&model, &platforms, |_| true)?;
            let archs = select_architectures(&architectures)?;
            let distances = g.values(grid(50.0, 1500.0, 30))?;
            let records = sweep(&distances, &platforms, &archs, &model)?;
            let mut table = Table::new(&["L_km", "platform", "architecture", "N", "T_s"]);
            let per_l = platforms.len() * archs.len();
            for (i, &l) in distances.iter().enumerate() {
                for r in &records[i * per_l..(i + 1) * per_l] {
                    table.push(vec![
                        r.l_km.into(),
                        r.platform.as_str().into(),
                        r.architecture.as_str().into(),
                        Cell::Int(r.nodes.into()),
                        r.t_ebit_s.into(),
                    ]);
                }
                let t = spdc_time(l, &model.config.spdc, &model.config.constants)? / 1e6;
                table.push(vec![
                    l.into(),
                    "SPDC".into(),
                    "direct".into(),
                    Cell::Empty,
                    t.into(),
                ]);
            }
            table.emit(&common)
        }
        Command::Optimize {
            common,
            grid: g,
            platforms,
            architectures,
        } => {
            let model = load(&common)?;
            let platforms = select_platforms(&model, &platforms, |_| true)?;
            let archs = select_architectures(&architectures)?;
            let records = sweep(
                &g.values(grid(50.0, 1500.0, 30))?,
                &platforms,
                &archs,
                &model,
            )?;
            sweep_table(&records).emit(&common)
        }
        Command::Limits {
            common,
            k_ref,
            nodes,
        } => {
            let model = load(&common)?;
            let k_ref = k_ref.unwrap_or(model.space.k_min);
            let mut table = Table::new(&[
                "platform",
                "K_ref_per_mm",
                "tau_us",
                "L0_max_ahier_km",
                "L_max_ahier_km",
                "L_max_semihier_km",
            ]);
            for p in &model.config.platforms {
                let lim = range_limits(
                    p,
                    &model.space,
                    k_ref,
                    nodes,
                    model.chi_eff(p).min(1.0),
                    model.c(),
                )?;
                table.push(vec![
                    p.name.as_str().into(),
                    lim.k_ref.map_or(Cell::Empty, Cell::Num),
                    lim.tau_us.into(),
                    lim.l0_max_ahier_km.into(),
                    lim.l_max_ahier_km.map_or(Cell::Empty, Cell::Num),
                    lim.l_max_semihier_km.into(),
                ]);
            }
            table.emit(&common)
        }
        Command::Spdc { common, grid: g } => {
            let model = load(&common)?;
            let mut table = Table::new(&["L_km", "T_s", "T_days"]);
            for l in g.values(grid(0.0, 800.0, 17))? {
                let t = spdc_time(l, &model.config.spdc, &model.config.constants)? / 1e6;
                table.push(vec![l.into(), t.into(), (t / 86_400.0).into()]);
            }
            table.emit(&common)
        }
        Command::McValidate {
            common,
            samples,
            chain_samples,
            seed,
        } => {
            let model = load(&common)?;
            let table = mc_validation(&model, samples, chain_samples, seed)?;
            let failed = table
                .rows
                .iter()
                .filter(|r| matches!(r.last(), Some(Cell::Bool(false))))
                .count();
            let total = table.rows.len();
            table.emit(&common)?;
            if failed > 0 {
                return Err(CliError::Mc(format!(
                    "{failed} of {total} Monte Carlo checks outside {MC_SIGMAS} standard errors"
                )));
            }
            eprintln!("mc-validate: {total} of {total} checks within {MC_SIGMAS} standard errors");
            Ok(())
        }
        Command::Presets { common } => {
            let model = load(&common)?;
            let platforms = &model.config.platforms;
            if common.format == Format::Json {
                let text = serde_json::to_string_pretty(platforms)
                    .map_err(|e| CliError::Other(e.to_string()))?;
                return write_output(&common, &(text + "\n"));
            }
            let mut table = Table::new(&[
                "name",
                "modes",
                "chi",
                "eta_x",
                "eta_r",
                "eta_s",
                "eta_m",
                "multiplexed",
                "enc_detection",
                "decoherence",
                "tau_ms",
            ]);
            for p in platforms {
                table.push(vec![
                    p.name.as_str().into(),
                    Cell::Int(p.modes.into()),
                    p.chi.into(),
                    p.eta_x.into(),
                    p.eta_r.into(),
                    p.eta_s.into(),
                    p.eta_m.into(),
                    Cell::Bool(p.multiplexed),
                    serde_label(&p.enc_detection).into(),
                    serde_label(&p.decoherence).into(),
                    match p.lifetime {
                        Lifetime::Fixed { tau_ms } => Cell::Num(tau_ms),
                        Lifetime::ModeDependent => "mode-dependent".into(),
                    },
                ]);
            }
            table.emit(&common)
        }
    }
}

fn serde_label<T: serde::Serialize>(value: &T) -> String {
    match serde_json::to_value(value) {
        Ok(serde_json::Value::String(s)) => s,
        other => format!("{other:?}"),
    }
}

fn sweep_table(records: &[SweepRecord]) -> Table {
    let mut table = Table::new(&[
        "L_km",
        "platform",
        "architecture",
        "N",
        "L0_km",
        "p1",
        "p_g",
        "P_ENG",
        "P_ENC",
        "mean_EF",
        "T_tot_s",
        "R_per_s",
        "Q_per_s",
        "T_ebit_s",
    ]);
    for r in records {
        table.push(vec![
            r.l_km.into(),
            r.platform.as_str().into(),
            r.architecture.as_str().into(),
            Cell::Int(r.nodes.into()),
            r.l0_km.into(),
            r.p1.into(),
            r.p_g.into(),
            r.p_eng.into(),
            r.p_enc.into(),
            r.mean_ef.into(),
            r.t_tot_s.into(),
            r.rate.into(),
            r.q.into(),
            r.t_ebit_s.into(),
        ]);
    }
    table
}

fn mc_validation(
    model: &Model,
    samples: u64,
    chain_samples: u64,
    seed: u64,
) -> Result<Table, CliError> {
    let mut table = Table::new(&[
        "check",
        "case",
        "analytic",
        "mc_mean",
        "std_error",
        "z",
        "pass",
    ]);
    let mut push = |check: &str, case: String, analytic: f64, est: McEstimate| {
        let z = est.z_score(analytic);
        table.push(vec![
            check.into(),
            case.into(),
            analytic.into(),
            est.mean.into(),
            est.std_error.into(),
            z.into(),
            Cell::Bool(z <= MC_SIGMAS),
        ]);
    };
    let cfg = McConfig {
        samples,
        seed,
        ..McConfig::default()
    };
    let tol = model.config.model.series_tolerance;

    let est = mc_expected_max_rounds(2, 0.5, &cfg)?;
    push(
        "max_rounds",
        "links=2 p_g=0.5".into(),
        expected_max_rounds(2, 0.5, tol)?,
        est,
    );
    for nodes in [2u32, 5, 10, 50] {
        for p in [0.01, 0.1, 0.5, 0.9] {
            let analytic = f_waiting(nodes, p, tol, WaitingExponent::Links)? / p;
            let est = mc_expected_max_rounds(nodes - 1, p, &cfg)?;
            push(
                "waiting_factor",
                format!("N={nodes} p_g={p}"),
                analytic,
                est,
            );
        }
    }

    let chain_cfg = McConfig {
        samples: chain_samples,
        ..cfg
    };
    let mux = model
        .config
        .platform(WV_MUX_QM)
        .ok_or_else(|| CliError::Usage(format!("configuration lacks platform {WV_MUX_QM:?}")))?;
    for (arch, nodes, l) in [
        (Architecture::Ahierarchical, 5, 550.0),
        (Architecture::Semihierarchical, 4, 660.0),
    ] {
        let plan = chain_time(arch, mux, nodes, l, model)?;
        let est = mc_chain_time(arch, mux, nodes, l, model, &chain_cfg)?;
        let case = format!("{} {arch} N={nodes} L={l}", mux.name);
        push("t_tot_us", case.clone(), plan.t_tot_us, est.t_tot_us);
        if arch == Architecture::Ahierarchical {
            let per_round = plan.p_eng * plan.p_enc * plan.final_detection;
            push("round_success", case, per_round, est.success_probability());
        }
    }
    Ok(table)
}

#[derive(Debug, Clone, PartialEq)]
enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Bool(bool),
    Empty,
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_owned())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(x) if x.is_finite() => format!("{x:.14e}"),
            Cell::Num(x) if x.is_nan() => "nan".to_owned(),
            Cell::Num(x) => if *x > 0.0 { "inf" } else { "-inf" }.to_owned(),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> String {
        match self {
            Cell::Num(x) if x.is_finite() => format!("{x:.16e}"),
            Cell::Num(_) | Cell::Empty => "null".to_owned(),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => serde_json::Value::from(s.as_str()).to_string(),
            Cell::Bool(b) => b.to_string(),
        }
    }
}

/// A rectangular result table.
#[derive(Debug, Clone)]
struct Table {
    headers: Vec<String>,
    rows: Vec<Vec<Cell>>,
}

impl Table {
    fn new(headers: &[&str]) -> Self {
        Self::with_headers(headers.iter().map(|h| (*h).to_owned()).collect())
    }

    fn with_headers(headers: Vec<String>) -> Self {
        Self {
            headers,
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }

    fn to_csv(&self) -> Result<String, CliError> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::CRLF)
            .from_writer(Vec::new());
        let io = |e: csv::Error| CliError::Other(e.to_string());
        w.write_record(&self.headers).map_err(io)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::csv)).map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Other(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| CliError::Other(e.to_string()))
    }

    fn to_json(&self) -> String {
        let mut out = String::from("[");
        for (i, row) in self.rows.iter().enumerate() {
            out.push_str(if i == 0 { "\n  {" } else { ",\n  {" });
            for (j, (h, cell)) in self.headers.iter().zip(row).enumerate() {
                if j > 0 {
                    out.push_str(", ");
                }
                let _ = write!(
                    out,
                    "{}: {}",
                    serde_json::Value::from(h.as_str()),
                    cell.json()
                );
            }
            out.push('}');
        }
        out.push_str(if self.rows.is_empty() { "]\n" } else { "\n]\n" });
        out
    }

    fn emit(&self, common: &Common) -> Result<(), CliError> {
        let text = match common.format {
            Format::Csv => self.to_csv()?,
            Format::Json => self.to_json(),
        };
        write_output(common, &text)
    }
}

fn write_output(common: &Common, text: &str) -> Result<(), CliError> {
    match &common.output {
        Some(path) => write_file(path, text),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|()| out.flush())
                .map_err(|e| CliError::Other(format!("cannot write to stdout: {e}")))
        }
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text)
        .map_err(|e| CliError::Other(format!("cannot write {}: {e}", path.display())))
}
