use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lzdeph::model::GammaProfile;
use lzdeph::verify::{verify, Suite};
use lzdeph_cli::config::{parse_config, Assignments, OutputFormat, SweepConfig};
use lzdeph_cli::error::{CliError, Result};
use lzdeph_cli::expansion::{expansion_csv, expansion_table, ExpansionSpec};
use lzdeph_cli::output::{fit_summary, to_csv, to_json};
use lzdeph_cli::sweep::{run_sweep, SweepReport};

#[derive(Parser)]
#[command(name = "lzdeph", version, about = "Landau-Zener transitions under dephasing")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Measure a single (g, ε, γ) cell.
    Transition(CellArgs),
    /// Run a grid from a config file; flags override file entries.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Run built-in property checks.
    Verify {
        #[arg(long, default_value = "all")]
        suite: String,
    },
    /// Tabulate the first- and second-order expansion terms over an s grid.
    Expansion {
        #[arg(long, default_value_t = 1.0)]
        g: f64,
        #[arg(long, default_value = "const:0.5")]
        gamma: String,
        #[arg(long, default_value_t = -20.0, allow_hyphen_values = true)]
        s_prime: f64,
        #[arg(long, default_value_t = -20.0, allow_hyphen_values = true)]
        s_min: f64,
        #[arg(long, default_value_t = 20.0, allow_hyphen_values = true)]
        s_max: f64,
        #[arg(long, default_value_t = 201)]
        points: usize,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args)]
struct CellArgs {
    #[arg(long)]
    g: f64,
    #[arg(long)]
    epsilon: f64,
    #[arg(long, default_value = "const:0")]
    gamma: String,
    #[arg(long = "T", default_value = "auto")]
    horizon: String,
    #[arg(long)]
    rtol: Option<f64>,
    #[arg(long)]
    atol: Option<f64>,
    #[arg(long)]
    qtol: Option<f64>,
    #[arg(long, default_value = "csv")]
    format: String,
}

#[derive(Args, Default)]
struct Overrides {
    #[arg(long)]
    g: Option<String>,
    #[arg(long)]
    epsilon: Option<String>,
    #[arg(long)]
    gamma: Option<String>,
    #[arg(long = "T")]
    horizon: Option<String>,
    #[arg(long)]
    rtol: Option<String>,
    #[arg(long)]
    atol: Option<String>,
    #[arg(long)]
    qtol: Option<String>,
    #[arg(long)]
    output: Option<String>,
    #[arg(long)]
    format: Option<String>,
    #[arg(long)]
    parallelism: Option<String>,
}

impl Overrides {
    fn assignments(&self) -> Result<Assignments> {
        let mut a = Assignments::default();
        let pairs = [
            ("g_values", &self.g),
            ("epsilon_values", &self.epsilon),
            ("gamma_specs", &self.gamma),
            ("T", &self.horizon),
            ("rtol", &self.rtol),
            ("atol", &self.atol),
            ("qtol", &self.qtol),
            ("output", &self.output),
            ("format", &self.format),
            ("parallelism", &self.parallelism),
        ];
        for (key, value) in pairs {
            if let Some(v) = value {
                a.set(key, v)?;
            }
        }
        Ok(a)
    }
}

fn write_output(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|source| CliError::Io { path: p.display().to_string(), source }),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|source| CliError::Io { path: "<stdout>".into(), source }),
    }
}

fn render(cfg: &SweepConfig, report: &SweepReport) -> String {
    match cfg.format {
        OutputFormat::Csv => to_csv(&report.records),
        OutputFormat::Json => to_json(report),
    }
}

fn transition(args: &CellArgs) -> Result<u8> {
    let mut a = Assignments::default();
    a.set("g", &args.g.to_string())?;
    a.set("epsilon", &args.epsilon.to_string())?;
    a.set("gamma", &args.gamma)?;
    a.set("T", &args.horizon)?;
    a.set("format", &args.format)?;
    a.set("parallelism", "1")?;
    for (k, v) in [("rtol", args.rtol), ("atol", args.atol), ("qtol", args.qtol)] {
        if let Some(v) = v {
            a.set(k, &v.to_string())?;
        }
    }
    let cfg = a.build()?;
    let report = run_sweep(&cfg)?;
    if let Some(f) = report.failures.first() {
        return Err(CliError::Run(f.reason.clone()));
    }
    write_output(None, &render(&cfg, &report))?;
    Ok(0)
}

fn sweep(config: &Path, overrides: &Overrides) -> Result<u8> {
    let text = std::fs::read_to_string(config).map_err(|source| CliError::Io { path: config.display().to_string(), source })?;
    let cfg = parse_config(&text, &overrides.assignments()?)?;
    log::info!("sweep over {} cells, T = {}", cfg.grid_size(), cfg.horizon_value());
    let report = run_sweep(&cfg)?;
    write_output(cfg.output.as_deref(), &render(&cfg, &report))?;
    eprint!("{}", fit_summary(&report.order_fits));
    for f in &report.failures {
        eprintln!("failed cell g={} gamma={} epsilon={}: {}", f.cell.g, f.cell.gamma, f.cell.epsilon, f.reason);
    }
    eprintln!("{} of {} cells completed", report.records.len(), cfg.grid_size());
    Ok(if report.is_complete() { 0 } else { 1 })
}

fn run_verify(suite: &str) -> Result<u8> {
    let suite: Suite = suite.parse().map_err(|e: lzdeph::error::Error| CliError::Config(e.to_string()))?;
    let report = verify(suite);
    let mut text = String::new();
    for c in &report.checks {
        text.push_str(&format!("{c}\n"));
    }
    let failed = report.failures().count();
    text.push_str(&format!("{} checks, {failed} failed\n", report.checks.len()));
    write_output(None, &text)?;
    Ok(if report.passed() { 0 } else { 3 })
}

#[allow(clippy::too_many_arguments)]
fn expansion(g: f64, gamma: &str, s_prime: f64, s_min: f64, s_max: f64, points: usize, output: Option<&Path>) -> Result<u8> {
    let gamma: GammaProfile = gamma.parse().map_err(|e: lzdeph::error::Error| CliError::Config(e.to_string()))?;
    let spec = ExpansionSpec { g, gamma, s_prime, s_min, s_max, points };
    let rows = expansion_table(&spec)?;
    write_output(output, &expansion_csv(&rows))?;
    Ok(0)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Transition(args) => transition(args),
        Command::Sweep { config, overrides } => sweep(config, overrides),
        Command::Verify { suite } => run_verify(suite),
        Command::Expansion { g, gamma, s_prime, s_min, s_max, points, output } => {
            expansion(*g, gamma, *s_prime, *s_min, *s_max, *points, output.as_deref())
        }
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
