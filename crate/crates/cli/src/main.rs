//! `pseudoprop`: batch front end for the reproduction experiments.
//!
//! Every table is written as CSV, either to `DIR/<name>.csv` (with `--out`)
//! or to standard output. Exit status is 0 on success, 1 for invalid input and
//! 2 when a numerical step fails.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use log::info;
use pseudoprop_core::experiments::{self, Experiment, Params, Table};
use pseudoprop_core::Error;

#[derive(Debug, Parser)]
#[command(name = "pseudoprop", version, about = "Pseudomode propagation experiments", allow_negative_numbers = true)]
struct Cli {
    /// table1..table5, figure1, figure2, gibbs or custom
    experiment: String,

    /// Interval length
    #[arg(long)]
    a: Option<String>,
    /// Diffusion coefficient (convection-diffusion runs)
    #[arg(long)]
    b: Option<String>,
    /// Convection speed
    #[arg(long)]
    c: Option<String>,
    /// Truncation
    #[arg(long = "N")]
    n: Option<String>,
    /// Cutoff steepness
    #[arg(long)]
    alpha: Option<String>,
    /// Grid points per unit length
    #[arg(long)]
    ppu: Option<String>,
    /// Whether the grid includes 0 and a
    #[arg(long)]
    endpoints: Option<String>,
    /// Comma-separated output times
    #[arg(long)]
    t: Option<String>,
    /// Initial function: gauss_pair, gauss, constant_one or custom_csv:PATH
    #[arg(long)]
    f: Option<String>,
    /// Error norm: l2, sup, l1 or euclidean
    #[arg(long)]
    norm: Option<String>,
    /// Directory to cache certified families in
    #[arg(long = "family-cache")]
    family_cache: Option<String>,

    /// Output directory; tables go to stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,
    /// File of key=value lines, overridden by flags
    #[arg(long)]
    config: Option<PathBuf>,
    /// Also write a gnuplot script next to each figure (needs --out)
    #[arg(long)]
    gnuplot: bool,
    /// More log output (repeatable)
    #[arg(short, long, action = clap::ArgAction::Count)]
    verbose: u8,
}

impl Cli {
    fn flag_values(&self) -> Vec<(&'static str, &str)> {
        [
            ("a", &self.a),
            ("b", &self.b),
            ("c", &self.c),
            ("N", &self.n),
            ("alpha", &self.alpha),
            ("ppu", &self.ppu),
            ("endpoints", &self.endpoints),
            ("t", &self.t),
            ("f", &self.f),
            ("norm", &self.norm),
            ("family_cache", &self.family_cache),
        ]
        .into_iter()
        .filter_map(|(k, v)| v.as_deref().map(|v| (k, v)))
        .collect()
    }
}

/// Failure with the exit status it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: if e.is_validation() { 1 } else { 2 },
            message: e.to_string(),
        }
    }
}

fn validation(message: String) -> Failure {
    Failure { code: 1, message }
}

/// Applies a key=value config file. Blank lines and `#` comments are skipped.
/// Returns the `out` entry if present, since that is not an experiment parameter.
fn apply_config(path: &Path, params: &mut Params) -> Result<Option<PathBuf>, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| validation(format!("cannot read config {}: {e}", path.display())))?;
    let mut out = None;
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| validation(format!("{}:{}: expected key=value", path.display(), i + 1)))?;
        let key = key.trim();
        if key == "out" {
            out = Some(PathBuf::from(value.trim()));
            continue;
        }
        params
            .set(key, value)
            .map_err(|e| validation(format!("{}:{}: {e}", path.display(), i + 1)))?;
    }
    Ok(out)
}

fn file_name(experiment: Experiment, table: &Table, count: usize) -> String {
    if count == 1 {
        format!("{}.csv", table.name)
    } else {
        format!("{experiment}_{}.csv", table.name)
    }
}

fn gnuplot_script(table: &Table, csv: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "set datafile separator ','");
    let _ = writeln!(s, "set key autotitle columnhead");
    let _ = writeln!(s, "set xlabel 'x'");
    let _ = writeln!(s, "set terminal pngcairo size 900,600");
    let _ = writeln!(s, "set output '{}.png'", table.name);
    let plots: Vec<String> = (2..=table.header.len())
        .map(|col| {
            let style = if col == 2 { "lines lw 2" } else { "lines dt 2" };
            format!("'{csv}' using 1:{col} with {style}")
        })
        .collect();
    let _ = writeln!(s, "plot {}", plots.join(", \\\n     "));
    s
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let experiment: Experiment = cli.experiment.parse()?;
    let mut params = Params::default();
    let mut out = None;
    if let Some(path) = &cli.config {
        out = apply_config(path, &mut params)?;
    }
    for (key, value) in cli.flag_values() {
        params.set(key, value)?;
    }
    if cli.out.is_some() {
        out = cli.out.clone();
    }
    if cli.gnuplot && out.is_none() {
        return Err(validation("--gnuplot needs --out".into()));
    }

    let tables = experiments::run(experiment, &params)?;
    match out {
        Some(dir) => {
            fs::create_dir_all(&dir).map_err(Error::from)?;
            for table in &tables {
                let name = file_name(experiment, table, tables.len());
                let path = dir.join(&name);
                table.write_csv(fs::File::create(&path).map_err(Error::from)?)?;
                info!("wrote {}", path.display());
                if cli.gnuplot && matches!(experiment, Experiment::Figure1 | Experiment::Figure2) {
                    let script = dir.join(format!("{}.gp", table.name));
                    fs::write(&script, gnuplot_script(table, &name)).map_err(Error::from)?;
                    info!("wrote {}", script.display());
                }
            }
        }
        None => match print_tables(&tables) {
            // A closed pipe (`| head`) is not a failure.
            Err(Error::Io(e)) if e.kind() == io::ErrorKind::BrokenPipe => {}
            other => other?,
        },
    }
    Ok(())
}

fn print_tables(tables: &[Table]) -> Result<(), Error> {
    let mut lock = io::stdout().lock();
    for (i, table) in tables.iter().enumerate() {
        if tables.len() > 1 {
            if i > 0 {
                writeln!(lock)?;
            }
            writeln!(lock, "# {}", table.name)?;
        }
        table.write_csv(&mut lock)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("pseudoprop: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
