//! Command-line front end.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use crate::report::{emit_csv, summary_table, Table};
use crate::sampling::DEFAULT_SEED;
use crate::suites::{run_suite, SuiteOptions, SuiteOutput};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "cclab", version, about = "Numerical checks of cross-curvature for optimal-transport costs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a verification suite.
    Verify {
        suite: Suite,
        #[command(flatten)]
        common: Common,
    },
    /// Exhibit a known counterexample.
    Counterexample {
        which: Counterexample,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Sphere,
    Product,
    Submersion,
    Cross,
    Dasm,
    TimeConvexity,
    All,
}

impl Suite {
    fn name(self) -> &'static str {
        match self {
            Suite::Sphere => "sphere",
            Suite::Product => "product",
            Suite::Submersion => "submersion",
            Suite::Cross => "cross",
            Suite::Dasm => "dasm",
            Suite::TimeConvexity => "time-convexity",
            Suite::All => "all",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Counterexample {
    LogProduct,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Manifold descriptor such as S2, CP1 or S2xR1.
    #[arg(long)]
    pub manifold: Option<String>,
    /// half-square, log or radial:<profile>.
    #[arg(long)]
    pub cost: Option<String>,
    /// Sample, pair or scenario count.
    #[arg(long, visible_alias = "scenarios")]
    pub samples: Option<usize>,
    #[arg(long, env = "CCLAB_SEED", default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Sphere scan grid, e.g. 48x24x24.
    #[arg(long, value_parser = parse_grid)]
    pub grid: Option<[usize; 3]>,
    /// Write the reports as a JSON array ("-" for stdout).
    #[arg(long)]
    pub json: Option<PathBuf>,
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Worker threads; defaults to the available cores.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Reduced sample counts and grids.
    #[arg(long)]
    pub quick: bool,
    /// Factors of the product suite, e.g. S2,S2.
    #[arg(long)]
    pub factors: Option<String>,
    #[arg(long)]
    pub total: Option<String>,
    #[arg(long)]
    pub base: Option<String>,
    #[arg(long)]
    pub dim: Option<usize>,
    /// nonneg, a3w, a3s or almost-positive.
    #[arg(long)]
    pub claim: Option<String>,
    /// Loosen a tolerance: --tol claim=value (repeatable).
    #[arg(long = "tol", value_parser = parse_tol)]
    pub tolerances: Vec<(String, f64)>,
}

pub fn parse_grid(s: &str) -> std::result::Result<[usize; 3], String> {
    let parts: Vec<&str> = s.split('x').collect();
    if parts.len() != 3 {
        return Err(format!("expected AxBxC, got '{s}'"));
    }
    let mut g = [0; 3];
    for (slot, p) in g.iter_mut().zip(parts) {
        *slot = p.parse().map_err(|_| format!("bad grid size '{p}'"))?;
        if *slot == 0 {
            return Err("grid sizes must be positive".into());
        }
    }
    Ok(g)
}

fn parse_tol(s: &str) -> std::result::Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected claim=value, got '{s}'"))?;
    let v: f64 = v.parse().map_err(|_| format!("bad tolerance '{v}'"))?;
    Ok((k.to_owned(), v))
}

impl Common {
    pub fn options(&self) -> SuiteOptions {
        SuiteOptions {
            seed: self.seed,
            samples: self.samples,
            quick: self.quick,
            grid: self.grid,
            manifold: self.manifold.clone(),
            cost: self.cost.clone(),
            factors: self.factors.clone(),
            total: self.total.clone(),
            base: self.base.clone(),
            dim: self.dim,
            claim: self.claim.clone(),
            tolerances: self.tolerances.iter().cloned().collect::<BTreeMap<_, _>>(),
            table: self.csv.is_some(),
        }
    }
}

fn io_error(path: &std::path::Path, e: io::Error) -> Error {
    Error::Parse(format!("cannot write {}: {e}", path.display()))
}

fn write_outputs(out: &SuiteOutput, common: &Common) -> Result<()> {
    let json_to_stdout = common.json.as_deref().is_some_and(|p| p.as_os_str() == "-");
    {
        let mut lines: Box<dyn Write> = if json_to_stdout {
            Box::new(io::stderr())
        } else {
            Box::new(io::stdout())
        };
        for r in &out.reports {
            let _ = writeln!(lines, "{}", r.summary());
        }
    }
    if let Some(path) = &common.json {
        let body = serde_json::to_string_pretty(&out.reports).map_err(|e| Error::Parse(e.to_string()))?;
        if json_to_stdout {
            println!("{body}");
        } else {
            let mut f = File::create(path).map_err(|e| io_error(path, e))?;
            writeln!(f, "{body}").map_err(|e| io_error(path, e))?;
        }
    }
    if let Some(path) = &common.csv {
        let table = match &out.table {
            Some(t) => t.clone(),
            None => {
                let (names, t) = summary_table(&out.reports);
                // claim names are not numeric; prepend them as a text column
                return write_named_csv(path, &names, &t);
            }
        };
        let f = File::create(path).map_err(|e| io_error(path, e))?;
        emit_csv(&table, BufWriter::new(f)).map_err(|e| io_error(path, e))?;
    }
    Ok(())
}

fn write_named_csv(path: &std::path::Path, names: &[String], t: &Table) -> Result<()> {
    let mut buf = Vec::new();
    emit_csv(t, &mut buf).map_err(|e| io_error(path, e))?;
    let text = String::from_utf8(buf).expect("csv is ascii");
    let mut lines = text.lines();
    let mut f = BufWriter::new(File::create(path).map_err(|e| io_error(path, e))?);
    let header = lines.next().unwrap_or_default();
    writeln!(f, "claim,{header}").map_err(|e| io_error(path, e))?;
    for (name, line) in names.iter().zip(lines) {
        writeln!(f, "{name},{line}").map_err(|e| io_error(path, e))?;
    }
    f.flush().map_err(|e| io_error(path, e))
}

fn execute(cli: &Cli) -> Result<bool> {
    let (suite, common) = match &cli.command {
        Command::Verify { suite, common } => (suite.name(), common),
        Command::Counterexample { which, common } => match which {
            Counterexample::LogProduct => ("counterexample", common),
        },
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(common.threads.unwrap_or(0))
        .build()
        .map_err(|e| Error::Parse(e.to_string()))?;
    let opts = common.options();
    let mut out = pool.install(|| run_suite(suite, &opts))?;
    for r in &mut out.reports {
        r.extra.insert("seed".into(), opts.seed.into());
    }
    write_outputs(&out, common)?;
    Ok(out.pass())
}

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: &Cli) -> i32 {
    match execute(cli) {
        Ok(true) => EXIT_PASS,
        Ok(false) => EXIT_FAIL,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}

/// Parses `args` (including the program name) and runs them.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(&cli),
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_PASS };
            let _ = e.print();
            code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids_parse() {
        assert_eq!(parse_grid("48x24x24").unwrap(), [48, 24, 24]);
        assert!(parse_grid("48x24").is_err());
        assert!(parse_grid("0x1x1").is_err());
    }

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(run_from(["cclab", "verify", "torus"]), EXIT_ERROR);
        assert_eq!(run_from(["cclab", "verify", "sphere", "--grid", "3x3"]), EXIT_ERROR);
    }

    #[test]
    fn bad_manifold_exits_two() {
        assert_eq!(run_from(["cclab", "verify", "dasm", "--manifold", "T2", "--samples", "1"]), EXIT_ERROR);
    }

    #[test]
    fn tightened_tolerance_exits_two() {
        assert_eq!(
            run_from(["cclab", "verify", "cross", "--quick", "--tol", "euclidean_zero=1e-9", "--samples", "2"]),
            EXIT_ERROR
        );
    }
}
