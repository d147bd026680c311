//! `subgauss`: polynomial transformations of long-memory Gaussian
//! sequences from the command line: exact Hermite algebra, dependence
//! classification, exact/Monte-Carlo variance growth, central-limit checks,
//! path simulation, and the rank-lowering counterexample pipeline.
//!
//! Every command emits a JSON report `{config, result}` to stdout (or
//! `--out`); the echoed config re-runs to the same result. Exit codes:
//! 0 success, 1 runtime/model error, 2 usage/parse error.

mod settings;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use settings::{CliError, RunConfig, Settings};
use subgauss::dependence::{classify, find_q, Classification};
use subgauss::experiments::{
    clt_experiment, counterexample_run, dichotomy_scan, fit_growth, write_fit_line,
    write_plot_data, write_points_csv, PropositionCase, ScanRow, Tolerances,
};
use subgauss::hermite::compose;
use subgauss::hermite::parse::{parse_hermite, parse_monomial};
use subgauss::simulate::{sample_paths, subordinate, write_binary, write_csv, SimulationConfig};

#[derive(Parser)]
#[command(
    name = "subgauss",
    version,
    about = "Hermite-rank dependence analysis and exact simulation of subordinated Gaussian sequences"
)]
struct Cli {
    /// Config file with `key = value` lines mirroring the long flags;
    /// flags override file values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (default: SUBGAUSS_THREADS or all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Normalize a polynomial to the Hermite basis and show both expansions.
    Expand {
        #[arg(long)]
        poly: Option<String>,
    },
    /// Hermite rank of a polynomial (null for constants).
    Rank {
        #[arg(long)]
        poly: Option<String>,
    },
    /// Hermite expansion of q∘p (q in the power basis).
    Compose {
        #[arg(long)]
        p: Option<String>,
        #[arg(long)]
        q: Option<String>,
    },
    /// SRD/LRD/boundary classification of (rank, hurst).
    Classify {
        #[arg(long)]
        poly: Option<String>,
        #[arg(long)]
        rank: Option<usize>,
        #[arg(long)]
        hurst: Option<f64>,
    },
    /// Search monomial powers for a rank-lowering transformation.
    FindQ {
        #[arg(long)]
        poly: Option<String>,
        #[arg(long)]
        hurst: Option<f64>,
        #[arg(long)]
        max_power: Option<u32>,
    },
    /// Simulate seeded Gaussian paths (optionally subordinated) and export them.
    Simulate {
        #[arg(long)]
        family: Option<String>,
        #[arg(long)]
        hurst: Option<f64>,
        #[arg(long)]
        slowly_varying: Option<String>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        r: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        poly: Option<String>,
        #[arg(long)]
        format: Option<String>,
        /// Path data destination (CSV or binary).
        #[arg(long)]
        data_out: Option<PathBuf>,
    },
    /// Fit the partial-sum variance growth exponent over a grid of N.
    VarianceGrowth {
        #[arg(long)]
        poly: Option<String>,
        #[arg(long)]
        family: Option<String>,
        #[arg(long)]
        hurst: Option<f64>,
        #[arg(long)]
        slowly_varying: Option<String>,
        /// Geometric grid `start:stop:points`.
        #[arg(long)]
        grid: Option<String>,
        /// `exact` or `mc`.
        #[arg(long)]
        mode: Option<String>,
        #[arg(long)]
        r: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Emit `n,variance[,std_error]` rows here.
        #[arg(long)]
        points_csv: Option<PathBuf>,
        /// Prefix for plot files: writes `<prefix>.points.csv` with
        /// `(log N, log s²)` rows and a `<prefix>.fit.csv` fitted-line sidecar.
        #[arg(long)]
        plot_data: Option<PathBuf>,
    },
    /// Compare standardized partial sums against the standard normal.
    CltCheck {
        #[arg(long)]
        poly: Option<String>,
        #[arg(long)]
        family: Option<String>,
        #[arg(long)]
        hurst: Option<f64>,
        #[arg(long)]
        slowly_varying: Option<String>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        r: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run the rank-lowering counterexample pipeline (cases a/b).
    Counterexample {
        /// `a` (even rank, square) or `b` (odd rank, cube).
        #[arg(long)]
        case: Option<String>,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long)]
        hurst: Option<f64>,
        #[arg(long)]
        grid: Option<String>,
        #[arg(long)]
        mode: Option<String>,
        #[arg(long)]
        r: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        slope_tol: Option<f64>,
    },
    /// Map the (m, H) parameter space: class, located Q, applicability.
    Scan {
        /// Inclusive rank range `lo:hi`.
        #[arg(long)]
        m_range: Option<String>,
        /// Linear Hurst grid `lo:hi:points`.
        #[arg(long)]
        hurst_grid: Option<String>,
        #[arg(long)]
        max_power: Option<u32>,
    },
}

#[derive(Serialize)]
struct Report<T: Serialize> {
    config: RunConfig,
    result: T,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

fn init_threads(explicit: Option<usize>) -> Result<(), CliError> {
    let count = match explicit {
        Some(t) => Some(t),
        None => match std::env::var("SUBGAUSS_THREADS") {
            Ok(v) => Some(v.parse().map_err(|_| {
                CliError::usage(format!(
                    "SUBGAUSS_THREADS must be a positive integer, got '{v}'"
                ))
            })?),
            Err(_) => None,
        },
    };
    if let Some(count) = count {
        if count == 0 {
            return Err(CliError::usage("thread count must be positive".into()));
        }
        // a second CLI invocation in-process would already have a pool; fine
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(count)
            .build_global();
    }
    Ok(())
}

fn emit<T: Serialize>(out: &Option<PathBuf>, report: &Report<T>) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(report)
        .map_err(|e| CliError::runtime(format!("report serialization failed: {e}")))?;
    text.push('\n');
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::runtime(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn exact_strings<T: std::fmt::Display>(values: &[T]) -> Vec<String> {
    values.iter().map(|c| c.to_string()).collect()
}

fn run(cli: Cli) -> Result<(), CliError> {
    init_threads(cli.threads)?;
    let settings = Settings::load(cli.config.as_deref())?;
    let out = cli.out;
    match cli.command {
        Command::Expand { poly } => {
            let poly = settings.require_string(poly, "poly")?;
            let p = parse_hermite(&poly)?;
            let monomial = p.to_monomial();
            let (mean, variance) = p.gaussian_moments();
            #[derive(Serialize)]
            struct Expansion {
                hermite: String,
                monomial: String,
                hermite_coefficients: Vec<String>,
                monomial_coefficients: Vec<String>,
                degree: usize,
                rank: Option<usize>,
                mean: String,
                variance: String,
            }
            let result = Expansion {
                hermite: p.to_string(),
                monomial: monomial.to_string(),
                hermite_coefficients: exact_strings(p.coeffs()),
                monomial_coefficients: exact_strings(monomial.coeffs()),
                degree: p.degree(),
                rank: p.rank(),
                mean: mean.to_string(),
                variance: variance.to_string(),
            };
            emit(
                &out,
                &Report {
                    config: RunConfig::new("expand").poly(&poly),
                    result,
                },
            )
        }
        Command::Rank { poly } => {
            let poly = settings.require_string(poly, "poly")?;
            let p = parse_hermite(&poly)?;
            #[derive(Serialize)]
            struct RankResult {
                rank: Option<usize>,
            }
            emit(
                &out,
                &Report {
                    config: RunConfig::new("rank").poly(&poly),
                    result: RankResult { rank: p.rank() },
                },
            )
        }
        Command::Compose { p, q } => {
            let p_text = settings.require_string(p, "p")?;
            let q_text = settings.require_string(q, "q")?;
            let p = parse_hermite(&p_text)?;
            let q = parse_monomial(&q_text)?;
            let composed = compose(&q, &p)?;
            #[derive(Serialize)]
            struct Composed {
                hermite: String,
                hermite_coefficients: Vec<String>,
                degree: usize,
                rank: Option<usize>,
            }
            let result = Composed {
                hermite: composed.to_string(),
                hermite_coefficients: exact_strings(composed.coeffs()),
                degree: composed.degree(),
                rank: composed.rank(),
            };
            emit(
                &out,
                &Report {
                    config: RunConfig::new("compose").p(&p_text).q(&q_text),
                    result,
                },
            )
        }
        Command::Classify { poly, rank, hurst } => {
            let hurst = settings.require(hurst, "hurst")?;
            let poly = settings.string(poly, "poly");
            let rank_flag = settings.get(rank, "rank")?;
            let (rank, config) = match (&poly, rank_flag) {
                (Some(text), None) => {
                    let p = parse_hermite(text)?;
                    let rank = p.rank().ok_or_else(|| {
                        CliError::usage(format!("'{text}' is constant and has no Hermite rank"))
                    })?;
                    (rank, RunConfig::new("classify").poly(text).hurst(hurst))
                }
                (None, Some(rank)) if rank >= 1 => {
                    (rank, RunConfig::new("classify").rank(rank).hurst(hurst))
                }
                (None, Some(_)) => {
                    return Err(CliError::usage("--rank must be at least 1".into()));
                }
                (Some(_), Some(_)) => {
                    return Err(CliError::usage(
                        "give exactly one of --poly or --rank".into(),
                    ));
                }
                (None, None) => {
                    return Err(CliError::usage(
                        "one of --poly or --rank is required".into(),
                    ));
                }
            };
            let class = classify(rank, hurst)?;
            if class.classification == Classification::Boundary {
                eprintln!(
                    "warning: boundary case (2H-2)m+1 = 0 at rank {rank}, H = {hurst}; \
                     growth experiments exclude it"
                );
            }
            #[derive(Serialize)]
            struct ClassifyResult {
                rank: usize,
                exponent_value: f64,
                classification: Classification,
            }
            emit(
                &out,
                &Report {
                    config,
                    result: ClassifyResult {
                        rank,
                        exponent_value: class.exponent_value,
                        classification: class.classification,
                    },
                },
            )
        }
        Command::FindQ {
            poly,
            hurst,
            max_power,
        } => {
            let poly = settings.require_string(poly, "poly")?;
            let hurst = settings.require(hurst, "hurst")?;
            let max_power = settings.get(max_power, "max-power")?.unwrap_or(4);
            let p = parse_hermite(&poly)?;
            let found = find_q(&p, hurst, max_power)?;
            #[derive(Serialize)]
            struct FindQResult {
                found: bool,
                #[serde(skip_serializing_if = "Option::is_none")]
                q: Option<String>,
                #[serde(skip_serializing_if = "Option::is_none")]
                power: Option<u32>,
                #[serde(skip_serializing_if = "Option::is_none")]
                composed_rank: Option<usize>,
                #[serde(skip_serializing_if = "Option::is_none")]
                exponent_value: Option<f64>,
            }
            let result = match found {
                Some(f) => FindQResult {
                    found: true,
                    q: Some(f.q.to_string()),
                    power: Some(f.power),
                    composed_rank: Some(f.composed_rank),
                    exponent_value: Some((2.0 * hurst - 2.0) * f.composed_rank as f64 + 1.0),
                },
                None => FindQResult {
                    found: false,
                    q: None,
                    power: None,
                    composed_rank: None,
                    exponent_value: None,
                },
            };
            emit(
                &out,
                &Report {
                    config: RunConfig::new("find-q")
                        .poly(&poly)
                        .hurst(hurst)
                        .max_power(max_power),
                    result,
                },
            )
        }
        Command::Simulate {
            family,
            hurst,
            slowly_varying,
            n,
            r,
            seed,
            poly,
            format,
            data_out,
        } => {
            let model_spec = settings.model(family, hurst, slowly_varying)?;
            let model = model_spec.build()?;
            let n = settings.require(n, "n")?;
            let r = settings.require(r, "r")?;
            let seed = settings.require_seed(seed)?;
            let format = settings
                .string(format, "format")
                .unwrap_or_else(|| "csv".into());
            let poly = settings.string(poly, "poly");
            let data_out = data_out
                .or_else(|| settings.path("data-out"))
                .ok_or_else(|| CliError::usage("--data-out is required for simulate".into()))?;
            let config = SimulationConfig::new(model, n, r, seed)?;
            let spectrum = subgauss::simulate::embedding_spectrum(&model, n);
            let batch = sample_paths(&config)?;
            let transformed = match &poly {
                Some(text) => Some(subordinate(&batch, &parse_hermite(text)?)),
                None => None,
            };
            let file = File::create(&data_out).map_err(|e| {
                CliError::runtime(format!("cannot create {}: {e}", data_out.display()))
            })?;
            let mut w = BufWriter::new(file);
            match format.as_str() {
                "csv" => write_csv(&mut w, &batch, transformed.as_ref())
                    .map_err(|e| CliError::runtime(format!("csv export failed: {e}")))?,
                "binary" | "bin" => {
                    let exported = transformed.as_ref().unwrap_or(&batch);
                    write_binary(&mut w, exported)
                        .map_err(|e| CliError::runtime(format!("binary export failed: {e}")))?;
                }
                other => {
                    return Err(CliError::usage(format!(
                        "unknown format '{other}' (expected csv or binary)"
                    )));
                }
            }
            w.flush()
                .map_err(|e| CliError::runtime(format!("flush failed: {e}")))?;
            #[derive(Serialize)]
            struct SimulateResult {
                n: usize,
                r: usize,
                master_seed: u64,
                min_eigenvalue: f64,
                subordinated: bool,
                format: String,
                data_out: String,
            }
            let mut run_config = RunConfig::new("simulate")
                .model(&model_spec)
                .n(n)
                .r(r)
                .seed(seed)
                .format(&format)
                .data_out(&data_out);
            if let Some(text) = &poly {
                run_config = run_config.poly(text);
            }
            emit(
                &out,
                &Report {
                    config: run_config,
                    result: SimulateResult {
                        n,
                        r,
                        master_seed: seed,
                        min_eigenvalue: spectrum.min_eigenvalue,
                        subordinated: transformed.is_some(),
                        format,
                        data_out: data_out.display().to_string(),
                    },
                },
            )
        }
        Command::VarianceGrowth {
            poly,
            family,
            hurst,
            slowly_varying,
            grid,
            mode,
            r,
            seed,
            points_csv,
            plot_data,
        } => {
            let poly = settings.require_string(poly, "poly")?;
            let model_spec = settings.model(family, hurst, slowly_varying)?;
            let model = model_spec.build()?;
            let grid_text = settings.require_string(grid, "grid")?;
            let grid = settings::parse_grid(&grid_text)?;
            let mode_text = settings
                .string(mode, "mode")
                .unwrap_or_else(|| "exact".into());
            let (fit_mode, r, seed) = settings.fit_mode(&mode_text, r, seed)?;
            let p = parse_hermite(&poly)?;
            let report = fit_growth(&p, &model, &grid, fit_mode)?;
            if let Some(path) = points_csv.or_else(|| settings.path("points-csv")) {
                let mut file = BufWriter::new(File::create(&path).map_err(|e| {
                    CliError::runtime(format!("cannot create {}: {e}", path.display()))
                })?);
                write_points_csv(&mut file, &report)
                    .map_err(|e| CliError::runtime(format!("points export failed: {e}")))?;
            }
            if let Some(prefix) = plot_data.or_else(|| settings.path("plot-data")) {
                let create = |suffix: &str| {
                    let mut path = prefix.clone().into_os_string();
                    path.push(suffix);
                    let path = PathBuf::from(path);
                    File::create(&path).map(BufWriter::new).map_err(|e| {
                        CliError::runtime(format!("cannot create {}: {e}", path.display()))
                    })
                };
                write_plot_data(&mut create(".points.csv")?, &report)
                    .map_err(|e| CliError::runtime(format!("plot export failed: {e}")))?;
                write_fit_line(&mut create(".fit.csv")?, &report)
                    .map_err(|e| CliError::runtime(format!("fit export failed: {e}")))?;
            }
            let mut run_config = RunConfig::new("variance-growth")
                .poly(&poly)
                .model(&model_spec)
                .grid(&grid_text)
                .mode(&mode_text);
            if let Some(r) = r {
                run_config = run_config.r(r);
            }
            if let Some(seed) = seed {
                run_config = run_config.seed(seed);
            }
            emit(
                &out,
                &Report {
                    config: run_config,
                    result: report,
                },
            )
        }
        Command::CltCheck {
            poly,
            family,
            hurst,
            slowly_varying,
            n,
            r,
            seed,
        } => {
            let poly = settings.require_string(poly, "poly")?;
            let model_spec = settings.model(family, hurst, slowly_varying)?;
            let model = model_spec.build()?;
            let n = settings.require(n, "n")?;
            let r = settings.require(r, "r")?;
            let seed = settings.require_seed(seed)?;
            let p = parse_hermite(&poly)?;
            let report = clt_experiment(&p, &model, n, r, seed)?;
            emit(
                &out,
                &Report {
                    config: RunConfig::new("clt-check")
                        .poly(&poly)
                        .model(&model_spec)
                        .n(n)
                        .r(r)
                        .seed(seed),
                    result: report,
                },
            )
        }
        Command::Counterexample {
            case,
            m,
            hurst,
            grid,
            mode,
            r,
            seed,
            slope_tol,
        } => {
            let case_text = settings.require_string(case, "case")?;
            let case = match case_text.as_str() {
                "a" => PropositionCase::EvenSquare,
                "b" => PropositionCase::OddCube,
                other => {
                    return Err(CliError::usage(format!(
                        "unknown case '{other}' (expected a or b)"
                    )));
                }
            };
            let m = settings.require(m, "m")?;
            let hurst = settings.require(hurst, "hurst")?;
            let grid_text = settings.require_string(grid, "grid")?;
            let grid = settings::parse_grid(&grid_text)?;
            let mode_text = settings
                .string(mode, "mode")
                .unwrap_or_else(|| "exact".into());
            let (fit_mode, r, seed) = settings.fit_mode(&mode_text, r, seed)?;
            let mut tolerances = Tolerances::default();
            if let Some(tol) = settings.get(slope_tol, "slope-tol")? {
                if tol.is_nan() || tol <= 0.0 {
                    return Err(CliError::usage("slope tolerance must be positive".into()));
                }
                tolerances.slope = tol;
            }
            let report = counterexample_run(case, m, hurst, &grid, fit_mode, &tolerances)?;
            let mut run_config = RunConfig::new("counterexample")
                .case(&case_text)
                .m(m)
                .hurst(hurst)
                .grid(&grid_text)
                .mode(&mode_text)
                .slope_tol(tolerances.slope);
            if let Some(r) = r {
                run_config = run_config.r(r);
            }
            if let Some(seed) = seed {
                run_config = run_config.seed(seed);
            }
            emit(
                &out,
                &Report {
                    config: run_config,
                    result: report,
                },
            )
        }
        Command::Scan {
            m_range,
            hurst_grid,
            max_power,
        } => {
            let m_text = settings.require_string(m_range, "m-range")?;
            let hurst_text = settings.require_string(hurst_grid, "hurst-grid")?;
            let max_power = settings.get(max_power, "max-power")?.unwrap_or(4);
            let m_values = settings::parse_m_range(&m_text)?;
            let hurst_values = settings::parse_hurst_grid(&hurst_text)?;
            let rows = dichotomy_scan(&m_values, &hurst_values, max_power)?;
            #[derive(Serialize)]
            struct ScanResult {
                rows: Vec<ScanRow>,
            }
            emit(
                &out,
                &Report {
                    config: RunConfig::new("scan")
                        .m_range(&m_text)
                        .hurst_grid(&hurst_text)
                        .max_power(max_power),
                    result: ScanResult { rows },
                },
            )
        }
    }
}
