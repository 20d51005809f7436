//! `crtdesign`: locally optimal designs, maximin designs, power and the
//! reference tables from the command line.
//!
//! A scenario is assembled from up to three layers, later ones winning: a
//! built-in `--preset`, a `--config` file (TOML, or JSON when the file ends
//! in `.json`) with the same keys as the HTTP request bodies, and flags.
//!
//! Exit codes: 0 success, 2 invalid input, 3 numerically degenerate input,
//! 1 anything else (I/O).

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::net::IpAddr;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use crt_design::lod::{CompoundWeighting, Rounding};
use crt_design::ops::{self, PowerDocument, PowerMode, SCHEMA_VERSION};
use crt_design::power::{Approximation, AteVariance};
use crt_design::reproduce::{preset, reproduce, TABLE_IDS};
use crt_design::{DesignError, EffectTest, ScenarioConfig, Table};
use crt_design_service::ServiceConfig;
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::json;

/// Environment variable holding the thread count of grid sweeps.
pub const THREADS_ENV: &str = "CRT_DESIGN_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "crtdesign",
    version,
    about = "Cost-constrained designs for cluster randomized trials"
)]
struct Cli {
    /// Built-in setup used as the bottom layer: k10, k20, kdpp, kdpp-bmi, kdpp-ifg.
    #[arg(long, global = true)]
    preset: Option<String>,
    /// Scenario file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Print a JSON document instead of a table.
    #[arg(long, global = true, conflicts_with = "csv")]
    json: bool,
    /// Print CSV instead of a table.
    #[arg(long, global = true)]
    csv: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Locally optimal design for known ICCs.
    Lod {
        #[arg(value_parser = ["hte", "ate", "compound"])]
        kind: String,
        #[command(flatten)]
        scenario: ScenarioArgs,
    },
    /// Maximin design over an ICC rectangle.
    Maximin {
        #[arg(value_parser = ["hte", "ate", "compound"])]
        kind: String,
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Write the whole criterion surface to this CSV file.
        #[arg(long)]
        emit_surface: Option<PathBuf>,
    },
    /// Power at a point, its bounds over an ICC rectangle, or a power curve.
    Power {
        #[arg(value_parser = ["point", "bounds", "curve"])]
        mode: String,
        #[command(flatten)]
        scenario: ScenarioArgs,
    },
    /// Regenerate a reference table or figure dataset.
    Reproduce {
        #[arg(value_parser = TABLE_IDS)]
        table_id: String,
    },
    /// Run the HTTP service. Defaults come from the CRT_DESIGN_* variables.
    Serve {
        #[arg(long)]
        bind: Option<IpAddr>,
        #[arg(long)]
        port: Option<u16>,
        #[arg(long)]
        workers: Option<usize>,
    },
}

fn serde_value<T: DeserializeOwned>(s: &str) -> Result<T, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string())).map_err(|e| e.to_string())
}

#[derive(Debug, Default, Args)]
struct ScenarioArgs {
    #[arg(long)]
    budget: Option<f64>,
    #[arg(long)]
    cluster_cost: Option<f64>,
    #[arg(long)]
    indiv_cost: Option<f64>,

    /// Outcome variance given the covariate.
    #[arg(long, conflicts_with = "sd_y")]
    var_y: Option<f64>,
    #[arg(long)]
    sd_y: Option<f64>,
    #[arg(long, conflicts_with = "sd_x")]
    var_x: Option<f64>,
    #[arg(long)]
    sd_x: Option<f64>,
    #[arg(long)]
    var_w: Option<f64>,

    #[arg(long)]
    rho_y: Option<f64>,
    #[arg(long)]
    rho_x: Option<f64>,
    #[arg(long)]
    rho_y_min: Option<f64>,
    #[arg(long)]
    rho_y_max: Option<f64>,
    #[arg(long)]
    rho_x_min: Option<f64>,
    #[arg(long)]
    rho_x_max: Option<f64>,
    /// Intervals per ICC axis.
    #[arg(long)]
    grid_steps: Option<u32>,
    /// Comma-separated outcome-ICC levels of a power curve.
    #[arg(long, value_delimiter = ',')]
    rho_y_levels: Vec<f64>,

    #[arg(long)]
    min_cluster_size: Option<u32>,
    #[arg(long)]
    max_cluster_size: Option<u32>,
    #[arg(long)]
    min_clusters: Option<u32>,
    #[arg(long)]
    reference_min_cluster_size: Option<u32>,
    #[arg(long)]
    reference_max_cluster_size: Option<u32>,
    #[arg(long)]
    reference_min_clusters: Option<u32>,

    #[arg(long)]
    lambda: Option<f64>,
    /// floor or best_neighbor.
    #[arg(long, value_parser = serde_value::<Rounding>)]
    rounding: Option<Rounding>,
    /// unadjusted or consistent.
    #[arg(long, value_parser = serde_value::<CompoundWeighting>)]
    compound_weighting: Option<CompoundWeighting>,

    #[arg(short = 'm', long = "cluster-size")]
    m: Option<u32>,
    /// Defaults to what the budget buys.
    #[arg(short = 'n', long = "clusters")]
    n: Option<u32>,
    #[arg(long, allow_negative_numbers = true)]
    beta_ate: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    beta_hte: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    /// normal or student_t.
    #[arg(long, value_parser = serde_value::<Approximation>)]
    approximation: Option<Approximation>,
    /// residual or total.
    #[arg(long, value_parser = serde_value::<AteVariance>)]
    ate_variance: Option<AteVariance>,
    /// hte or ate; without it every test with an effect is reported.
    #[arg(long, value_parser = serde_value::<EffectTest>)]
    test: Option<EffectTest>,
}

impl ScenarioArgs {
    fn into_config(self) -> ScenarioConfig {
        ScenarioConfig {
            budget: self.budget,
            cluster_cost: self.cluster_cost,
            indiv_cost: self.indiv_cost,
            var_y: self.var_y.or(self.sd_y.map(|s| s * s)),
            var_x: self.var_x.or(self.sd_x.map(|s| s * s)),
            var_w: self.var_w,
            rho_y: self.rho_y,
            rho_x: self.rho_x,
            rho_y_min: self.rho_y_min,
            rho_y_max: self.rho_y_max,
            rho_x_min: self.rho_x_min,
            rho_x_max: self.rho_x_max,
            grid_steps: self.grid_steps,
            rho_y_levels: (!self.rho_y_levels.is_empty()).then_some(self.rho_y_levels),
            min_cluster_size: self.min_cluster_size,
            max_cluster_size: self.max_cluster_size,
            min_clusters: self.min_clusters,
            reference_min_cluster_size: self.reference_min_cluster_size,
            reference_max_cluster_size: self.reference_max_cluster_size,
            reference_min_clusters: self.reference_min_clusters,
            lambda: self.lambda,
            rounding: self.rounding,
            compound_weighting: self.compound_weighting,
            m: self.m,
            n: self.n,
            beta_ate: self.beta_ate,
            beta_hte: self.beta_hte,
            alpha: self.alpha,
            approximation: self.approximation,
            ate_variance: self.ate_variance,
            test: self.test,
        }
    }
}

#[derive(Debug)]
enum Failure {
    Design(DesignError),
    Usage(String),
    Io(String),
    /// The reader went away, as with `| head`.
    ClosedPipe,
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Design(e) if e.is_numerical() => 3,
            Failure::Design(_) | Failure::Usage(_) => 2,
            Failure::Io(_) => 1,
            Failure::ClosedPipe => 0,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Design(e) => write!(f, "{e}"),
            Failure::Usage(m) | Failure::Io(m) => f.write_str(m),
            Failure::ClosedPipe => f.write_str("output closed"),
        }
    }
}

impl From<DesignError> for Failure {
    fn from(e: DesignError) -> Self {
        Failure::Design(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        if e.kind() == std::io::ErrorKind::BrokenPipe {
            return Failure::ClosedPipe;
        }
        Failure::Io(e.to_string())
    }
}

/// Reads a scenario file; the format follows the extension.
pub fn read_config(path: &Path) -> Result<ScenarioConfig, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let parsed = if path.extension().is_some_and(|e| e == "json") {
        serde_json::from_str(&text).map_err(|e| e.to_string())
    } else {
        toml::from_str(&text).map_err(|e| e.to_string())
    };
    parsed.map_err(|e| format!("invalid config {}: {e}", path.display()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Text,
    Json,
    Csv,
}

struct Output<'a> {
    format: Format,
    out: &'a mut (dyn Write + Send),
}

impl Output<'_> {
    fn emit<T: Serialize>(
        &mut self,
        command: &str,
        inputs: Option<&ScenarioConfig>,
        result: &T,
        tables: &[Table],
    ) -> Result<(), Failure> {
        match self.format {
            Format::Json => {
                let mut doc = json!({
                    "schema_version": SCHEMA_VERSION,
                    "command": command,
                    "result": result,
                });
                if let Some(inputs) = inputs {
                    doc["inputs"] = json!(inputs);
                }
                let text = serde_json::to_string_pretty(&doc).map_err(|e| Failure::Io(e.to_string()))?;
                writeln!(self.out, "{text}")?;
            }
            Format::Csv => {
                for (i, t) in tables.iter().enumerate() {
                    if i > 0 {
                        writeln!(self.out)?;
                    }
                    write!(self.out, "{}", t.to_csv())?;
                }
            }
            Format::Text => {
                for (i, t) in tables.iter().enumerate() {
                    if i > 0 {
                        writeln!(self.out)?;
                    }
                    write!(self.out, "{}", t.to_text())?;
                }
            }
        }
        Ok(())
    }
}

fn scenario(
    cli_preset: Option<&str>,
    config: Option<&Path>,
    args: ScenarioArgs,
) -> Result<ScenarioConfig, Failure> {
    let mut cfg = match cli_preset {
        Some(name) => preset(name)?,
        None => ScenarioConfig::default(),
    };
    if let Some(path) = config {
        cfg = cfg.overlay(read_config(path).map_err(Failure::Usage)?);
    }
    Ok(cfg.overlay(args.into_config()))
}

fn dispatch(cli: Cli, out: &mut (dyn Write + Send), err: &mut (dyn Write + Send)) -> Result<(), Failure> {
    let format = match (cli.json, cli.csv) {
        (true, _) => Format::Json,
        (_, true) => Format::Csv,
        _ => Format::Text,
    };
    let mut output = Output { format, out };
    let preset = cli.preset.as_deref();
    let config = cli.config.as_deref();
    match cli.command {
        Command::Lod { kind, scenario: args } => {
            let cfg = scenario(preset, config, args)?;
            let doc = ops::lod(&cfg, &kind)?;
            let mut tables = vec![doc.to_table()];
            if !doc.power.is_empty() {
                let (rho_y, rho_x) = (cfg.rho_y.unwrap_or(f64::NAN), cfg.rho_x.unwrap_or(f64::NAN));
                let p = PowerDocument::Point {
                    m: doc.m,
                    n: doc.n,
                    rho_y,
                    rho_x,
                    reports: doc.power.clone(),
                };
                tables.push(p.to_table());
            }
            output.emit(&format!("lod {kind}"), Some(&cfg), &doc, &tables)
        }
        Command::Maximin {
            kind,
            scenario: args,
            emit_surface,
        } => {
            let cfg = scenario(preset, config, args)?;
            let mut doc = ops::maximin(&cfg, &kind, emit_surface.is_some())?;
            if let Some(path) = &emit_surface {
                let table = doc.surface_table().expect("surface requested");
                let file =
                    fs::File::create(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
                table.write_csv(file).map_err(|e| Failure::Io(e.to_string()))?;
                writeln!(err, "wrote {} surface rows to {}", table.len(), path.display())?;
                doc.surface = None;
            }
            let table = doc.to_table();
            output.emit(&format!("maximin {kind}"), Some(&cfg), &doc, &[table])
        }
        Command::Power { mode, scenario: args } => {
            let cfg = scenario(preset, config, args)?;
            let mode: PowerMode = mode.parse()?;
            let doc = ops::power_document(&cfg, mode)?;
            let table = doc.to_table();
            output.emit("power", Some(&cfg), &doc, &[table])
        }
        Command::Reproduce { table_id } => {
            let table = reproduce(&table_id)?;
            output.emit(&format!("reproduce {table_id}"), None, &table.to_json(), &[table])
        }
        Command::Serve { bind, port, workers } => {
            let mut config =
                ServiceConfig::from_env().map_err(|e| Failure::Usage(format!("{}: {e}", e.field)))?;
            if let Some(b) = bind {
                config.bind = b;
            }
            if let Some(p) = port {
                config.port = p;
            }
            if workers.is_some() {
                config.workers = workers;
            }
            let _ = tracing_subscriber::fmt().with_writer(std::io::stderr).try_init();
            crt_design_service::run(config)?;
            Ok(())
        }
    }
}

fn thread_pool(value: Option<String>) -> Result<Option<rayon::ThreadPool>, Failure> {
    let Some(v) = value else { return Ok(None) };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| Failure::Usage(format!("{THREADS_ENV} must be a positive integer, got '{v}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build()
        .map(Some)
        .map_err(|e| Failure::Io(e.to_string()))
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(args: I, out: &mut (dyn Write + Send), err: &mut (dyn Write + Send)) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                2
            } else {
                let _ = write!(out, "{text}");
                0
            };
        }
    };
    let result = thread_pool(std::env::var(THREADS_ENV).ok()).and_then(|pool| match pool {
        Some(pool) => pool.install(|| dispatch(cli, out, err)),
        None => dispatch(cli, out, err),
    });
    match result {
        Ok(()) | Err(Failure::ClosedPipe) => 0,
        Err(f) => {
            let _ = writeln!(err, "error: {f}");
            f.code()
        }
    }
}
