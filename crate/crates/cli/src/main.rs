use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bellfringe::analytics::{analytic_boundary_sigma, analytic_boundary_t};
use bellfringe_cli::analytic::{analytic_csv, analytic_rows, thresholds_csv};
use bellfringe_cli::cache::SpectrumCache;
use bellfringe_cli::config::{Grid, NoiseKind, OutputFormat};
use bellfringe_cli::mc::{mc_csv, mc_json, run_mc};
use bellfringe_cli::output::{boundary_csv, crossings_csv, scan_csv, scan_json, write_file};
use bellfringe_cli::{
    extract_region_boundary, find_zero_crossing, run_scan, CliError, Column, ScanSpec, Scanner, THREADS_ENV,
};
use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "bellfringe", version, about = "Bell-correlation witness scans for a bosonic Josephson junction")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// JSON scan specification.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Overrides the seed of the specification.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (BELLFRINGE_THREADS takes precedence).
    #[arg(long)]
    threads: Option<usize>,
    /// Directory for memoized spectra.
    #[arg(long)]
    cache: Option<PathBuf>,
    /// Never rotate the moments, whatever the sign of Λ.
    #[arg(long)]
    no_rotation: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate the witness over the Λ × noise grid.
    Scan(Common),
    /// Refine the zero crossings of A or B along Λ.
    Crossings {
        #[command(flatten)]
        common: Common,
        /// a_param or b_param.
        #[arg(long, default_value = "b_param")]
        column: String,
    },
    /// Noise level at which B changes sign, for every Λ.
    Boundary(Common),
    /// Monte-Carlo check of the fitted-phase variance.
    McVerify(Common),
    /// Large-N predictions and thresholds.
    Analytics(Common),
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
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn setup_threads(requested: Option<usize>) -> Result<(), CliError> {
    let threads = match std::env::var(THREADS_ENV) {
        Ok(v) => Some(v.trim().parse::<usize>().map_err(|_| CliError::Config(format!("{THREADS_ENV}={v} is not a count")))?),
        Err(_) => requested,
    };
    if let Some(n) = threads {
        if n == 0 {
            return Err(CliError::Config("thread count must be positive".into()));
        }
        // Fails only if a pool already exists, which is harmless.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

fn load_spec(common: &Common) -> Result<ScanSpec, CliError> {
    let path = common.config.as_ref().ok_or_else(|| CliError::Config("--config is required".into()))?;
    let mut spec = ScanSpec::load(path)?;
    if let Some(seed) = common.seed {
        spec.seed = seed;
    }
    spec.no_rotation |= common.no_rotation;
    Ok(spec)
}

fn scanner(spec: ScanSpec, common: &Common) -> Result<Scanner, CliError> {
    let cache = common.cache.as_ref().map(SpectrumCache::new).transpose()?;
    Ok(Scanner::new(spec).with_cache(cache))
}

fn report(path: &Path, name: &str) {
    println!("wrote {}", path.join(name).display());
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Scan(common) => {
            setup_threads(common.threads)?;
            let spec = load_spec(&common)?;
            let scanner = scanner(spec, &common)?;
            let rows = run_scan(&scanner);
            let failed = rows.iter().filter(|r| r.error.is_some()).count();
            for format in &scanner.spec.outputs {
                match format {
                    OutputFormat::Csv => {
                        write_file(&common.out, "scan.csv", &scan_csv(&rows))?;
                        report(&common.out, "scan.csv");
                    }
                    OutputFormat::Json => {
                        write_file(&common.out, "scan.json", &scan_json(&scanner.spec, &rows)?)?;
                        report(&common.out, "scan.json");
                    }
                }
            }
            println!("{} rows, {} with errors", rows.len(), failed);
        }
        Command::Crossings { common, column } => {
            setup_threads(common.threads)?;
            let column: Column = column.parse()?;
            let spec = load_spec(&common)?;
            let scanner = scanner(spec, &common)?;
            let rows = run_scan(&scanner);
            let found: Vec<(f64, Vec<f64>)> = scanner
                .spec
                .noise_values()
                .into_iter()
                .map(|v| (v, find_zero_crossing(&scanner, &rows, column, v)))
                .collect();
            for (v, lambdas) in &found {
                println!("noise {v}: {} crossings of {} at {:?}", lambdas.len(), column.name(), lambdas);
            }
            write_file(&common.out, "crossings.csv", &crossings_csv(column.name(), &found))?;
            report(&common.out, "crossings.csv");
        }
        Command::Boundary(common) => {
            setup_threads(common.threads)?;
            let spec = load_spec(&common)?;
            if spec.noise_axis.kind == NoiseKind::None {
                return Err(CliError::Config("boundary needs a noise axis".into()));
            }
            let scanner = scanner(spec, &common)?;
            let rows = run_scan(&scanner);
            let points = extract_region_boundary(&rows, &scanner.spec.noise_values())?;
            let k = scanner.spec.k_fringe;
            let analytic: Vec<Option<f64>> = points
                .iter()
                .map(|p| match scanner.spec.noise_axis.kind {
                    NoiseKind::Temperature => analytic_boundary_t(p.lambda).ok(),
                    NoiseKind::SigmaDetector => analytic_boundary_sigma(p.lambda, k).ok(),
                    _ => None,
                })
                .collect();
            write_file(&common.out, "boundary.csv", &boundary_csv(&points, &analytic))?;
            report(&common.out, "boundary.csv");
            println!("{} of {} Λ values change sign", points.len(), scanner.spec.lambdas().len());
        }
        Command::McVerify(common) => {
            setup_threads(common.threads)?;
            let spec = load_spec(&common)?;
            let block = spec.mc_block.clone().ok_or_else(|| CliError::Config("mc-verify needs an mc_block".into()))?;
            let rows = run_mc(&block, spec.k_fringe, spec.seed)?;
            for r in &rows {
                println!(
                    "ξ²={} ν={}: variance {:.4e} predicted {:.4e} ratio {:.3}, bias {:.2e} ± {:.2e}",
                    r.xi2, r.nu, r.empirical_variance, r.predicted_variance, r.ratio, r.bias, r.bias_standard_error
                );
            }
            for format in &spec.outputs {
                match format {
                    OutputFormat::Csv => {
                        write_file(&common.out, "mc.csv", &mc_csv(&rows))?;
                        report(&common.out, "mc.csv");
                    }
                    OutputFormat::Json => {
                        write_file(&common.out, "mc.json", &mc_json(&spec, &rows)?)?;
                        report(&common.out, "mc.json");
                    }
                }
            }
        }
        Command::Analytics(common) => {
            let (lambdas, k) = match &common.config {
                Some(_) => {
                    let spec = load_spec(&common)?;
                    (spec.lambdas(), spec.k_fringe)
                }
                None => (Grid::Range { start: -1.6, stop: 10.0, step: 0.01 }.values()?, 1.0),
            };
            write_file(&common.out, "analytics.csv", &analytic_csv(&analytic_rows(&lambdas, k)))?;
            report(&common.out, "analytics.csv");
            write_file(&common.out, "thresholds.csv", &thresholds_csv())?;
            report(&common.out, "thresholds.csv");
        }
    }
    Ok(())
}
