use std::fmt;
use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hybrid_teleport::analysis::{self, grid, SweepConfig, Table, Value};
use hybrid_teleport::channel_gen::GenerationConfig;
use hybrid_teleport::{Complex64, Method, Qubit};

/// Sweeps and checks for hybrid-entanglement teleportation.
///
/// Every table is written as CSV with a header row. Grids accept either a
/// comma-separated list (`0.1,0.3,0.5`) or `lo:hi:count`. Settings given on
/// the command line override those read from `--config`.
///
/// Exit status: 0 on success, 2 when a tolerance check fails, 1 on usage or
/// I/O errors.
#[derive(Parser, Debug)]
#[command(name = "hybrid-teleport", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    settings: Settings,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Fidelity against α and t for the qubit (1, i)/√2 [alpha 0:0.8:17, t 0.55:1:10]
    FidelitySurface,
    /// Alice's outcome probabilities without modulation [alpha 0.03]
    DirectProbs,
    /// Outcome probabilities with amplitude modulation (--mod) [alpha 0.06,0.1,0.2,0.3]
    AmProbs,
    /// Demodulation success, closed form against circuit (--method) [coherent 0.1,0.3,0.5; swap 0.2,0.4,0.6]
    Demod,
    /// Bob's state before classical communication [alpha 0.05,0.2,0.5; qubit (1, i)/√2]
    RhoB,
    /// Herald table of the channel generation circuit [alpha 0.03, t √0.99]
    ChannelGen,
    /// Teleports a qubit and its orthogonal partner [alpha 0.1; qubit (√0.8, i√0.2)]
    Orthogonal,
    /// Runs the full acceptance suite
    Accept,
}

#[derive(Args, Debug, Default, Clone)]
struct Settings {
    /// Displacement amplitudes α (grid)
    #[arg(long, global = true, value_parser = parse_grid)]
    alpha: Option<Grid>,
    /// Beam splitter transmittances t (grid) [√0.99]
    #[arg(long, global = true, value_parser = parse_grid)]
    t: Option<Grid>,
    /// Cat amplitude β [0.3]
    #[arg(long, global = true)]
    beta: Option<f64>,
    /// Qubit amplitudes |a1| (grid) [0:1:21]
    #[arg(long = "a1-grid", global = true, value_parser = parse_grid)]
    a1_grid: Option<Grid>,
    /// Fock cutoff per mode [24]
    #[arg(long, global = true)]
    cutoff: Option<usize>,
    /// Output path, `-` for stdout [-]
    #[arg(long, global = true)]
    out: Option<String>,
    /// Significant digits in CSV output [12]
    #[arg(long, global = true)]
    precision: Option<usize>,
    /// Plain-text key=value file with defaults for any of these settings
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Modulation index, 0 or 1; for `orthogonal` a pair such as `0,1` [0]
    #[arg(long = "mod", global = true, value_parser = parse_mods)]
    modulation: Option<(usize, usize)>,
    /// Demodulation method, coherent or swap [coherent]
    #[arg(long, global = true)]
    method: Option<Method>,
    /// Qubit as `a0_re,a0_im,a1_re,a1_im`, normalized on input
    #[arg(long, global = true, value_parser = parse_qubit)]
    qubit: Option<Qubit>,
    /// Reserved; every computation is deterministic
    #[arg(long, global = true)]
    seed: Option<u64>,
}

/// A grid of reals; wrapped so clap treats it as one value.
#[derive(Debug, Clone, PartialEq)]
struct Grid(Vec<f64>);

#[derive(Debug)]
enum CliError {
    Usage(String),
    Io(io::Error),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "{msg}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.into())
    }
}

impl From<hybrid_teleport::Error> for CliError {
    fn from(e: hybrid_teleport::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

fn parse_grid(s: &str) -> Result<Grid, String> {
    grid_values(s).map(Grid)
}

fn grid_values(s: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() == 3 {
        let lo = parse_real(parts[0])?;
        let hi = parse_real(parts[1])?;
        let n: usize = parts[2].trim().parse().map_err(|_| format!("bad grid count '{}'", parts[2]))?;
        if n == 0 {
            return Err("grid count must be positive".into());
        }
        return Ok(grid(lo, hi, n));
    }
    s.split(',').map(parse_real).collect()
}

fn parse_real(s: &str) -> Result<f64, String> {
    let s = s.trim();
    let x: f64 = s.parse().map_err(|_| format!("'{s}' is not a number"))?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(format!("'{s}' is not finite"))
    }
}

fn parse_mod(s: &str) -> Result<usize, String> {
    match s.trim() {
        "0" => Ok(0),
        "1" => Ok(1),
        other => Err(format!("modulation index must be 0 or 1, got '{other}'")),
    }
}

fn parse_mods(s: &str) -> Result<(usize, usize), String> {
    match s.split_once(',') {
        Some((a, b)) => Ok((parse_mod(a)?, parse_mod(b)?)),
        None => parse_mod(s).map(|k| (k, k)),
    }
}

fn parse_qubit(s: &str) -> Result<Qubit, String> {
    let v = s.split(',').map(parse_real).collect::<Result<Vec<_>, _>>()?;
    let [a, b, c, d] = v[..] else {
        return Err("qubit needs four numbers: a0_re,a0_im,a1_re,a1_im".into());
    };
    Qubit::single_rail(Complex64::new(a, b), Complex64::new(c, d))
        .normalized()
        .map_err(|e| e.to_string())
}

impl Settings {
    fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)?;
        let mut s = Settings::default();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |msg: String| CliError::Usage(format!("{}:{}: {msg}", path.display(), lineno + 1));
            let (key, value) = line.split_once('=').ok_or_else(|| bad("expected key=value".into()))?;
            let value = value.trim();
            match key.trim().replace('_', "-").as_str() {
                "alpha" => s.alpha = Some(parse_grid(value).map_err(bad)?),
                "t" => s.t = Some(parse_grid(value).map_err(bad)?),
                "beta" => s.beta = Some(parse_real(value).map_err(bad)?),
                "a1-grid" => s.a1_grid = Some(parse_grid(value).map_err(bad)?),
                "cutoff" => s.cutoff = Some(value.parse().map_err(|_| bad(format!("bad cutoff '{value}'")))?),
                "out" => s.out = Some(value.to_string()),
                "precision" => s.precision = Some(value.parse().map_err(|_| bad(format!("bad precision '{value}'")))?),
                "mod" => s.modulation = Some(parse_mods(value).map_err(bad)?),
                "method" => s.method = Some(value.parse().map_err(|e: hybrid_teleport::Error| bad(e.to_string()))?),
                "qubit" => s.qubit = Some(parse_qubit(value).map_err(bad)?),
                "seed" => s.seed = Some(value.parse().map_err(|_| bad(format!("bad seed '{value}'")))?),
                other => return Err(bad(format!("unknown key '{other}'"))),
            }
        }
        Ok(s)
    }

    /// Fills every unset field from `fallback`.
    fn or(self, fallback: Settings) -> Settings {
        Settings {
            alpha: self.alpha.or(fallback.alpha),
            t: self.t.or(fallback.t),
            beta: self.beta.or(fallback.beta),
            a1_grid: self.a1_grid.or(fallback.a1_grid),
            cutoff: self.cutoff.or(fallback.cutoff),
            out: self.out.or(fallback.out),
            precision: self.precision.or(fallback.precision),
            config: self.config,
            modulation: self.modulation.or(fallback.modulation),
            method: self.method.or(fallback.method),
            qubit: self.qubit.or(fallback.qubit),
            seed: self.seed.or(fallback.seed),
        }
    }

    fn sweep(&self, default_alpha: Vec<f64>, default_t: Vec<f64>) -> Result<SweepConfig, CliError> {
        let base = SweepConfig::default();
        let cfg = SweepConfig {
            alpha_grid: self.alpha.clone().map_or(default_alpha, |g| g.0),
            t_grid: self.t.clone().map_or(default_t, |g| g.0),
            a1_grid: self.a1_grid.clone().map_or(base.a1_grid, |g| g.0),
            beta: self.beta.unwrap_or(base.beta),
            cutoff: self.cutoff.unwrap_or(base.cutoff),
            output_path: self.out.clone().unwrap_or(base.output_path),
            precision: self.precision.unwrap_or(base.precision),
            n_max: base.n_max,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

fn default_t() -> Vec<f64> {
    SweepConfig::default().t_grid
}

/// Stacks tables that share a header, prefixing each row with `keys`.
fn stack(parts: Vec<(Vec<(&str, Value)>, Table)>) -> Table {
    let mut out = Table::default();
    for (keys, table) in parts {
        if out.header.is_empty() {
            out.header = keys.iter().map(|(k, _)| k.to_string()).chain(table.header.iter().cloned()).collect();
        }
        for row in table.rows {
            out.rows.push(keys.iter().map(|(_, v)| v.clone()).chain(row).collect());
        }
        out.violations.extend(table.violations);
        out.notes.extend(table.notes);
    }
    out
}

fn open_output(path: &str) -> Result<Box<dyn Write>, CliError> {
    if path == "-" {
        Ok(Box::new(io::stdout().lock()))
    } else {
        Ok(Box::new(io::BufWriter::new(File::create(path)?)))
    }
}

fn write_table(table: &Table, path: &str, precision: usize) -> Result<(), CliError> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(open_output(path)?);
    w.write_record(&table.header)?;
    for row in table.rendered(precision) {
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

fn build_table(command: Command, s: &Settings) -> Result<(Table, SweepConfig), CliError> {
    Ok(match command {
        Command::FidelitySurface => {
            let cfg = s.sweep(grid(0.0, 0.8, 17), grid(0.55, 1.0, 10))?;
            (analysis::fidelity_surface(&cfg)?, cfg)
        }
        Command::DirectProbs => {
            let cfg = s.sweep(vec![0.03], default_t())?;
            (analysis::direct_probs(&cfg)?, cfg)
        }
        Command::AmProbs => {
            let cfg = s.sweep(vec![0.06, 0.1, 0.2, 0.3], default_t())?;
            let (k, _) = s.modulation.unwrap_or((0, 0));
            (analysis::am_probs(&cfg, k)?, cfg)
        }
        Command::Demod => {
            let method = s.method.unwrap_or(Method::Coherent);
            let alphas = match method {
                Method::Coherent => vec![0.1, 0.3, 0.5],
                Method::Swap => vec![0.2, 0.4, 0.6],
            };
            let cfg = s.sweep(alphas, default_t())?;
            (analysis::demod_table(&cfg, method)?, cfg)
        }
        Command::RhoB => {
            let cfg = s.sweep(vec![0.05, 0.2, 0.5], default_t())?;
            let q = s.qubit.unwrap_or_else(analysis::surface_qubit);
            let mut parts = Vec::new();
            for &a in &cfg.alpha_grid {
                parts.push((vec![], analysis::rho_b_table(&analysis::rho_b(a, cfg.beta, &q, cfg.cutoff)?)));
            }
            (stack(parts), cfg)
        }
        Command::ChannelGen => {
            let cfg = s.sweep(vec![0.03], default_t())?;
            let mut parts = Vec::new();
            for &a in &cfg.alpha_grid {
                for &t in &cfg.t_grid {
                    let gen = GenerationConfig::balanced(a, t, cfg.cutoff)?;
                    let keys = vec![("alpha", Value::Real(a)), ("t", Value::Real(t)), ("beta", Value::Real(gen.beta))];
                    parts.push((keys, analysis::channel_gen_table(&gen)?));
                }
            }
            (stack(parts), cfg)
        }
        Command::Orthogonal => {
            let cfg = s.sweep(vec![0.1], default_t())?;
            let q = s.qubit.unwrap_or_else(|| {
                Qubit::single_rail(Complex64::new(0.8f64.sqrt(), 0.0), Complex64::new(0.0, 0.2f64.sqrt()))
            });
            let mods = s.modulation.unwrap_or((0, 0));
            let mut parts = Vec::new();
            for &a in &cfg.alpha_grid {
                let report = analysis::orthogonal_scenario(a, (q, analysis::orthogonal_partner(&q)), mods, cfg.beta, cfg.cutoff)?;
                parts.push((vec![("alpha", Value::Real(a))], analysis::orthogonal_table(&report)));
            }
            (stack(parts), cfg)
        }
        Command::Accept => unreachable!("handled separately"),
    })
}

fn run_accept(s: &Settings) -> Result<ExitCode, CliError> {
    let results = hybrid_teleport::acceptance::run_all();
    let mut out = open_output(s.out.as_deref().unwrap_or("-"))?;
    for r in &results {
        writeln!(out, "{}", r.line())?;
    }
    let failed = results.iter().filter(|r| !r.passed).count();
    writeln!(out, "acceptance: {} passed, {failed} failed", results.len() - failed)?;
    out.flush()?;
    Ok(if failed == 0 { ExitCode::SUCCESS } else { ExitCode::from(2) })
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    let settings = match &cli.settings.config {
        Some(path) => {
            let file = Settings::from_file(path)?;
            cli.settings.clone().or(file)
        }
        None => cli.settings.clone(),
    };
    if cli.command == Command::Accept {
        return run_accept(&settings);
    }
    let (table, cfg) = build_table(cli.command, &settings)?;
    write_table(&table, &cfg.output_path, cfg.precision)?;
    for note in &table.notes {
        eprintln!("note: {note}");
    }
    for v in &table.violations {
        eprintln!("violation: {v}");
    }
    Ok(if table.is_valid() { ExitCode::SUCCESS } else { ExitCode::from(2) })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
