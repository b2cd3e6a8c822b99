use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use heisenberg_lab::abelian::{parse_subgroup, ElementSubgroup, FiniteAbelianGroup};
use heisenberg_lab::repfile::parse_rep;
use heisenberg_lab::report::{
    decompose_report, duality_suite, verify_finite, verify_product, verify_real, SuiteOptions,
    VerificationReport,
};
use heisenberg_lab::weyl::GridSpec;
use heisenberg_lab::Error;

const MIN_GRID_POINTS: usize = 8;
const MAX_GRID_POINTS: usize = 256;

#[derive(Parser, Debug)]
#[command(
    name = "hlab",
    version,
    about = "Verification suites for Heisenberg group representations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Finite group, e.g. `Z4` or `Z2xZ4`.
    #[arg(long, global = true)]
    group: Option<String>,

    /// Subgroup generators, e.g. `[2]` or `[(1,0),(0,2)]`.
    #[arg(long, global = true)]
    subgroup: Option<String>,

    /// Spatial dimension of the grid (1 or 2).
    #[arg(long = "grid-n", global = true)]
    grid_n: Option<usize>,

    /// Points per grid axis; even, between 8 and 256.
    #[arg(long = "grid-N", global = true)]
    grid_points: Option<usize>,

    /// Grid step; decimals or fractions such as `1/8`.
    #[arg(long = "grid-h", global = true, value_parser = parse_step)]
    grid_h: Option<f64>,

    #[arg(long, global = true, env = "HLAB_SEED", default_value_t = 0)]
    seed: u64,

    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Include eigenspace bases in the report.
    #[arg(long = "include-bases", global = true)]
    include_bases: bool,

    /// Directory for CSV exports of intertwiners and phase-space grids.
    #[arg(long, global = true)]
    csv: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Eigenspaces, transitivity, commutant, synthesis and uniqueness for a finite group.
    VerifyFinite,
    /// Gaussian projector, Weyl law and synthesis on the grid model of ℝⁿ.
    VerifyReal,
    /// Block decomposition and combined intertwiner for E × ℝⁿ.
    VerifyProduct,
    /// Duality identities for every group of order at most `max-order`.
    Duality {
        #[arg(long = "max-order", default_value_t = 16)]
        max_order: u64,
    },
    /// Decompose a representation read from a file.
    Decompose { file: PathBuf },
}

fn parse_step(s: &str) -> Result<f64, String> {
    let v = match s.split_once('/') {
        Some((a, b)) => {
            let a: f64 = a
                .trim()
                .parse()
                .map_err(|_| format!("bad numerator in `{s}`"))?;
            let b: f64 = b
                .trim()
                .parse()
                .map_err(|_| format!("bad denominator in `{s}`"))?;
            a / b
        }
        None => s
            .trim()
            .parse()
            .map_err(|_| format!("`{s}` is not a number"))?,
    };
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(format!("grid step must be positive, got `{s}`"))
    }
}

enum Failure {
    Usage(String),
    Lab(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lab(e)
    }
}

impl Cli {
    fn subgroup(&self, default_group: &str) -> Result<ElementSubgroup, Failure> {
        let spec = self.group.as_deref().unwrap_or(default_group);
        let group = FiniteAbelianGroup::parse(spec).map_err(|e| context("--group", e))?;
        let sub = self.subgroup.as_deref().unwrap_or("[]");
        parse_subgroup(&group, sub).map_err(|e| context("--subgroup", e))
    }

    fn grid(&self, points: usize, h: f64) -> Result<GridSpec, Failure> {
        let points = self.grid_points.unwrap_or(points);
        if !points.is_multiple_of(2) || !(MIN_GRID_POINTS..=MAX_GRID_POINTS).contains(&points) {
            return Err(Failure::Usage(format!(
                "--grid-N must be even and between {MIN_GRID_POINTS} and {MAX_GRID_POINTS}, got {points}"
            )));
        }
        Ok(GridSpec::new(
            self.grid_n.unwrap_or(1),
            points,
            self.grid_h.unwrap_or(h),
        )?)
    }

    fn options(&self) -> SuiteOptions {
        SuiteOptions {
            seed: self.seed,
            include_bases: self.include_bases,
            csv: self.csv.is_some(),
        }
    }
}

fn context(flag: &str, e: Error) -> Failure {
    match e {
        Error::Parse { position, message } => Failure::Usage(format!(
            "{flag}: parse error at position {position}: {message}"
        )),
        other => Failure::Usage(format!("{flag}: {other}")),
    }
}

fn run(cli: &Cli) -> Result<VerificationReport, Failure> {
    let opts = cli.options();
    match &cli.command {
        Command::VerifyFinite => Ok(verify_finite(&cli.subgroup("Z4")?, opts)?),
        Command::VerifyReal => Ok(verify_real(&cli.grid(128, 0.125)?, opts)?),
        Command::VerifyProduct => {
            let sub = cli.subgroup("Z4")?;
            Ok(verify_product(&sub, &cli.grid(32, 0.25)?, opts)?)
        }
        Command::Duality { max_order } => Ok(duality_suite(*max_order, opts)?),
        Command::Decompose { file } => {
            let text = fs::read_to_string(file).map_err(Error::from)?;
            let rho = parse_rep(&text)?;
            let sub = parse_subgroup(rho.group(), cli.subgroup.as_deref().unwrap_or("[]"))
                .map_err(|e| context("--subgroup", e))?;
            Ok(decompose_report(&rho, &sub, opts)?)
        }
    }
}

fn write_outputs(cli: &Cli, report: &VerificationReport) -> std::io::Result<()> {
    let json = serde_json::to_string_pretty(&report.to_json()).expect("report serializes");
    match &cli.out {
        Some(path) => fs::write(path, json + "\n")?,
        None => println!("{json}"),
    }
    if let Some(dir) = &cli.csv {
        fs::create_dir_all(dir)?;
        for a in &report.artifacts {
            let name = format!("{}_{}.csv", report.suite, a.name);
            fs::write(Path::new(dir).join(name), &a.csv)?;
        }
    }
    Ok(())
}

fn summarize(report: &VerificationReport) {
    for r in &report.records {
        let tag = if r.pass { "PASS" } else { "FAIL" };
        eprintln!(
            "{tag} {:<40} {:>11.3e} <= {:.1e}",
            r.check_id, r.metric_value, r.tolerance
        );
    }
    if report.details["tolerances"]["relaxed"] == serde_json::json!(true) {
        eprintln!(
            "note: coarse grid, Gaussian tolerance relaxed to {:.3e}",
            report.details["tolerances"]["gaussian"]
                .as_f64()
                .unwrap_or(f64::NAN)
        );
    }
    eprintln!(
        "{}: {}",
        report.suite,
        if report.pass { "pass" } else { "FAIL" }
    );
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(report) => {
            summarize(&report);
            if let Err(e) = write_outputs(&cli, &report) {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
            ExitCode::from(if report.pass { 0 } else { 1 })
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Lab(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
