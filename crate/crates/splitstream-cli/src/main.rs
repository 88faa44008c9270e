//! Batch front end: experiment configs, subcommand dispatch, CSV/JSON
//! emission, and the validation harness tying simulation to analytics.
//!
//! Exit codes: 0 ok, 1 validation-criterion failure, 2 usage/config error.

mod config;
mod output;

use clap::{Parser, Subcommand};
use config::{
    env_seed, load_law, load_measure, parse_arrivals, parse_bracket, parse_count,
    parse_count_list, parse_float_grid, ExperimentConfig,
};
use output::{emit, json_with_provenance, num, Csv, Provenance};
use serde::Serialize;
use splitstream::analytic::{
    assemble_matrix, asymptotic_slope, find_lambda_c, mean_tree_size, periodic_fluctuation,
    solve_constants, AsymptoticSlope, SeriesParams, SlopeVariant,
};
use splitstream::arprocess::{laplace_binary_closed, laplace_x_inf};
use splitstream::protocol::{estimate_mean_size, stability_probe, ArrivalLaw};
use splitstream::rng;
use splitstream::splitting::{BranchingLaw, SplittingMeasure};
use splitstream::validation::{self, Status, SuiteConfig};
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "splitstream",
    version,
    about = "Simulation and exact analytics for splitting-tree collision resolution with arrivals"
)]
struct Cli {
    /// Experiment config JSON supplying defaults (flags take precedence).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Cap the worker threads (default: machine parallelism). Results do
    /// not depend on this.
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Derive the splitting measure of a branching law; prints (w, q) CSV.
    DeriveMeasure {
        #[arg(long)]
        law: Option<PathBuf>,
        /// Write the CSV here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the measure as JSON for the measure-based commands.
        #[arg(long)]
        emit_measure: Option<PathBuf>,
    },
    /// Check the standing assumptions of a measure (delta, span, moments).
    Check {
        #[arg(long)]
        law: Option<PathBuf>,
        #[arg(long)]
        measure: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo mean tree size.
    Simulate {
        #[arg(long)]
        law: Option<PathBuf>,
        /// none | poisson:RATE | det:K | pmf:v:p,...
        #[arg(long)]
        arrivals: Option<String>,
        #[arg(long)]
        n: u64,
        #[arg(long)]
        d: Option<u64>,
        #[arg(long, value_parser = parse_count)]
        trials: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        /// Node budget per tree (runs beyond it are censored).
        #[arg(long, value_parser = parse_count)]
        budget: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Stability probe over an arrival-rate grid.
    Probe {
        #[arg(long)]
        law: Option<PathBuf>,
        #[arg(long)]
        d: Option<u64>,
        /// start:end:step
        #[arg(long)]
        lambda_grid: String,
        #[arg(long, value_parser = parse_count)]
        horizon: Option<u64>,
        #[arg(long, value_parser = parse_count)]
        reps: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo Laplace transform of the stationary limit.
    Xinf {
        #[arg(long)]
        measure: Option<PathBuf>,
        #[arg(long)]
        law: Option<PathBuf>,
        #[arg(long)]
        s: f64,
        #[arg(long, value_parser = parse_count)]
        samples: Option<u64>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Assemble the stability matrix and solve for the constants.
    Solve {
        #[arg(long)]
        measure: Option<PathBuf>,
        #[arg(long)]
        law: Option<PathBuf>,
        #[arg(long)]
        lambda: f64,
        #[arg(long)]
        d: Option<u64>,
        #[arg(long)]
        kmax: Option<usize>,
        #[arg(long, value_parser = parse_count)]
        paths: Option<u64>,
        #[arg(long)]
        xinf_tol: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        /// Disable the tail regularization (invariance checks only).
        #[arg(long)]
        no_regularize: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Locate the critical arrival rate by determinant bisection.
    LambdaC {
        #[arg(long)]
        measure: Option<PathBuf>,
        #[arg(long)]
        law: Option<PathBuf>,
        #[arg(long)]
        d: Option<u64>,
        /// lo:hi with opposite determinant signs.
        #[arg(long)]
        bracket: String,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        kmax: Option<usize>,
        #[arg(long, value_parser = parse_count)]
        paths: Option<u64>,
        #[arg(long)]
        xinf_tol: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact expected tree sizes over an item-count grid.
    MeanSize {
        #[arg(long)]
        measure: Option<PathBuf>,
        #[arg(long)]
        law: Option<PathBuf>,
        #[arg(long)]
        lambda: f64,
        #[arg(long)]
        d: Option<u64>,
        /// Comma-separated item counts, e.g. 64,256,1024.
        #[arg(long)]
        n_grid: String,
        #[arg(long)]
        kmax: Option<usize>,
        #[arg(long, value_parser = parse_count)]
        paths: Option<u64>,
        #[arg(long)]
        xinf_tol: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Linear-growth slope, or the sampled fluctuation curve when the
    /// measure is arithmetic.
    Asymptotics {
        #[arg(long)]
        measure: Option<PathBuf>,
        #[arg(long)]
        law: Option<PathBuf>,
        #[arg(long)]
        lambda: f64,
        #[arg(long)]
        d: Option<u64>,
        /// corrected | as-printed
        #[arg(long, default_value = "corrected")]
        variant: String,
        #[arg(long, default_value_t = 64)]
        curve_points: usize,
        #[arg(long)]
        kmax: Option<usize>,
        #[arg(long, value_parser = parse_count)]
        paths: Option<u64>,
        #[arg(long)]
        xinf_tol: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the cross-validation battery; exit 1 on any criterion failure.
    Validate {
        /// Comma-separated criterion ids to run (default: all plus the
        /// config's experiment rows).
        #[arg(long)]
        only: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_parser = parse_count)]
        paths: Option<u64>,
        /// Write the JSON report here (in addition to the config's
        /// `outputs` directory, when set).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() {
    std::process::exit(run());
}

fn run() -> i32 {
    let cli = Cli::parse();
    if let Some(workers) = cli.workers {
        if rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build_global()
            .is_err()
        {
            eprintln!("error: could not configure {workers} workers");
            return 2;
        }
    }
    let cfg = match &cli.config {
        Some(path) => match ExperimentConfig::load(path) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("error: {e}");
                return 2;
            }
        },
        None => ExperimentConfig::default(),
    };
    match dispatch(cli.command, &cfg) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

/// Resolve the measure for measure-based commands: an explicit measure
/// file, or a law to derive it from, with flags beating the config.
fn resolve_measure(
    measure_flag: &Option<PathBuf>,
    law_flag: &Option<PathBuf>,
    cfg: &ExperimentConfig,
) -> Result<SplittingMeasure, String> {
    if let Some(path) = measure_flag.as_ref().or(cfg.measure.as_ref()) {
        return load_measure(path);
    }
    if let Some(path) = law_flag.as_ref().or(cfg.law.as_ref()) {
        return load_law(path)?
            .splitting_measure()
            .map_err(|e| e.to_string());
    }
    Err("no measure: pass --measure or --law (or set them in the config)".into())
}

fn resolve_law(law_flag: &Option<PathBuf>, cfg: &ExperimentConfig) -> Result<BranchingLaw, String> {
    match law_flag.as_ref().or(cfg.law.as_ref()) {
        Some(path) => load_law(path),
        None => Err("no law: pass --law (or set it in the config)".into()),
    }
}

fn resolve_seed(flag: Option<u64>, cfg: &ExperimentConfig) -> Result<u64, String> {
    match flag.or(cfg.seed) {
        Some(s) => Ok(s),
        None => env_seed(),
    }
}

fn resolve_series(
    m: &SplittingMeasure,
    cfg: &ExperimentConfig,
    kmax: Option<usize>,
    paths: Option<u64>,
    xinf_tol: Option<f64>,
    no_regularize: bool,
    seed: u64,
) -> SeriesParams {
    let base = SeriesParams::for_measure(m);
    let series = cfg.series.clone().unwrap_or_default();
    SeriesParams {
        k_max: kmax.or(series.k_max).unwrap_or(base.k_max),
        mc_paths: paths.or(series.mc_paths).unwrap_or(base.mc_paths),
        xinf_tol: xinf_tol.or(series.xinf_tol).unwrap_or(base.xinf_tol),
        seed,
        regularize: if no_regularize {
            false
        } else {
            series.regularize.unwrap_or(true)
        },
    }
}

fn resolve_d(flag: Option<u64>, cfg: &ExperimentConfig) -> Result<u64, String> {
    let d = flag.or(cfg.d).unwrap_or(2);
    if d < 1 {
        return Err("d must be at least 1".into());
    }
    Ok(d)
}

#[derive(Serialize)]
struct MeasureParams<'a> {
    atoms: &'a [splitstream::splitting::Atom],
}

fn dispatch(command: Command, cfg: &ExperimentConfig) -> Result<i32, String> {
    match command {
        Command::DeriveMeasure {
            law,
            out,
            emit_measure,
        } => {
            let law = resolve_law(&law, cfg)?;
            let measure = law.splitting_measure().map_err(|e| e.to_string())?;
            let (mean_g, mean_abs_log_w, mean_w) = measure.moments();
            let prov = Provenance::new(
                "derive-measure",
                resolve_seed(None, cfg)?,
                &MeasureParams {
                    atoms: measure.atoms(),
                },
            );
            let mut csv = Csv::new(&prov, "w,q");
            for atom in measure.atoms() {
                csv.row(&[num(atom.w), num(atom.q)]);
            }
            let mut text = csv.render();
            text.push_str(&format!(
                "# mean_g={} mean_abs_log_w={} mean_w={}\n",
                num(mean_g),
                num(mean_abs_log_w),
                num(mean_w)
            ));
            emit(&text, out.as_deref())?;
            if let Some(path) = emit_measure {
                emit(&(measure.to_json() + "\n"), Some(&path))?;
            }
            Ok(0)
        }

        Command::Check { law, measure, out } => {
            let measure = resolve_measure(&measure, &law, cfg)?;
            let report = measure.check_assumptions();
            let prov = Provenance::new("check", resolve_seed(None, cfg)?, &report);
            let mut csv = Csv::new(&prov, "delta,h2_value,span,mean_abs_log_w");
            csv.row(&[
                num(report.delta),
                num(report.h2_value),
                report.span.map_or("absent".into(), num),
                num(report.mean_abs_log_w),
            ]);
            emit(&csv.render(), out.as_deref())?;
            Ok(0)
        }

        Command::Simulate {
            law,
            arrivals,
            n,
            d,
            trials,
            seed,
            budget,
            out,
        } => {
            let law = resolve_law(&law, cfg)?;
            let arrivals = parse_arrivals(
                arrivals
                    .or_else(|| cfg.arrivals.clone())
                    .unwrap_or_else(|| "none".into())
                    .as_str(),
            )?;
            let d = resolve_d(d, cfg)?;
            let seed = resolve_seed(seed, cfg)?;
            let trials = trials.unwrap_or(100_000);
            let budget = budget.unwrap_or(10_000_000);
            // BranchingLaw has a JSON form of its own; hash that.
            #[derive(Serialize)]
            struct Hashable {
                law_json: String,
                arrivals: ArrivalLaw,
                n: u64,
                d: u64,
                trials: u64,
                budget: u64,
            }
            let prov = Provenance::new(
                "simulate",
                seed,
                &Hashable {
                    law_json: law.to_json(),
                    arrivals: arrivals.clone(),
                    n,
                    d,
                    trials,
                    budget,
                },
            );
            let est = estimate_mean_size(n, d, &arrivals, &law, trials, budget, seed);
            let mut csv = Csv::new(&prov, "n,mean,std_error,trials,censored");
            csv.row(&[
                n.to_string(),
                num(est.mean),
                num(est.std_error),
                est.trials.to_string(),
                est.censored.to_string(),
            ]);
            let mut text = csv.render();
            if !est.trusted {
                text.push_str("# untrusted: censored fraction above 1%\n");
            }
            emit(&text, out.as_deref())?;
            Ok(0)
        }

        Command::Probe {
            law,
            d,
            lambda_grid,
            horizon,
            reps,
            seed,
            out,
        } => {
            let law = resolve_law(&law, cfg)?;
            let d = resolve_d(d, cfg)?;
            let seed = resolve_seed(seed, cfg)?;
            let horizon = horizon.unwrap_or(100_000);
            let reps = reps.unwrap_or(20);
            let grid = parse_float_grid(&lambda_grid)?;
            #[derive(Serialize)]
            struct Hashable {
                law_json: String,
                d: u64,
                grid: Vec<f64>,
                horizon: u64,
                reps: u64,
            }
            let prov = Provenance::new(
                "probe",
                seed,
                &Hashable {
                    law_json: law.to_json(),
                    d,
                    grid: grid.clone(),
                    horizon,
                    reps,
                },
            );
            let mut csv = Csv::new(&prov, "lambda,drift,classification");
            for &lam in &grid {
                let report = stability_probe(d, &law, &ArrivalLaw::Poisson(lam), horizon, reps, seed);
                csv.row(&[
                    num(lam),
                    num(report.slope),
                    report.classification.to_string(),
                ]);
            }
            emit(&csv.render(), out.as_deref())?;
            Ok(0)
        }

        Command::Xinf {
            measure,
            law,
            s,
            samples,
            tol,
            seed,
            out,
        } => {
            let measure = resolve_measure(&measure, &law, cfg)?;
            let seed = resolve_seed(seed, cfg)?;
            let samples = samples.unwrap_or(1_000_000);
            let tol = tol.unwrap_or(1e-10);
            if s < 0.0 {
                return Err("s must be nonnegative".into());
            }
            #[derive(Serialize)]
            struct Hashable<'a> {
                atoms: &'a [splitstream::splitting::Atom],
                s: f64,
                samples: u64,
                tol: f64,
            }
            let prov = Provenance::new(
                "xinf",
                seed,
                &Hashable {
                    atoms: measure.atoms(),
                    s,
                    samples,
                    tol,
                },
            );
            let mut r = rng::derive(seed, rng::STREAM_XINF, 0);
            let (est, se) = laplace_x_inf(&measure, s, samples, tol, &mut r);
            let closed = match measure.binary_p() {
                Some(p) if (p - 0.5).abs() < 1e-12 => Some((-2.0 * s).exp()),
                Some(p) if s > 0.0 => laplace_binary_closed(p, s).ok(),
                Some(_) => Some(1.0),
                None => None,
            };
            let mut csv = Csv::new(&prov, "estimate,std_error,closed_form");
            csv.row(&[
                num(est),
                num(se),
                closed.map_or(String::new(), num),
            ]);
            emit(&csv.render(), out.as_deref())?;
            Ok(0)
        }

        Command::Solve {
            measure,
            law,
            lambda,
            d,
            kmax,
            paths,
            xinf_tol,
            seed,
            no_regularize,
            out,
        } => {
            let measure = resolve_measure(&measure, &law, cfg)?;
            let d = resolve_d(d, cfg)?;
            let seed = resolve_seed(seed, cfg)?;
            let params = resolve_series(&measure, cfg, kmax, paths, xinf_tol, no_regularize, seed);
            if lambda < 0.0 {
                return Err("lambda must be nonnegative".into());
            }
            #[derive(Serialize)]
            struct Hashable<'a> {
                atoms: &'a [splitstream::splitting::Atom],
                lambda: f64,
                d: u64,
                params: &'a SeriesParams,
            }
            let prov = Provenance::new(
                "solve",
                seed,
                &Hashable {
                    atoms: measure.atoms(),
                    lambda,
                    d,
                    params: &params,
                },
            );
            let matrix = assemble_matrix(&measure, lambda, d, &params);
            let constants = solve_constants(&matrix).map_err(|e| e.to_string())?;
            let body = serde_json::json!({
                "lambda": lambda,
                "d": d,
                "regularized": matrix.regularized,
                "c": constants.c,
                "c_inf": constants.c_inf,
                "c_std_errors": constants.std_errors,
                "residuals": {
                    "stationary": constants.residuals.stationary,
                    "stationary_sigma": constants.residuals.stationary_sigma,
                    "boundary": constants.residuals.boundary,
                },
                "matrix": {
                    "entries": matrix.entries,
                    "std_errors": matrix.std_errors,
                    "ill_conditioned": matrix.ill_conditioned,
                },
            });
            emit(&json_with_provenance(&prov, body)?, out.as_deref())?;
            Ok(0)
        }

        Command::LambdaC {
            measure,
            law,
            d,
            bracket,
            tol,
            kmax,
            paths,
            xinf_tol,
            seed,
            out,
        } => {
            let measure = resolve_measure(&measure, &law, cfg)?;
            let d = resolve_d(d, cfg)?;
            let seed = resolve_seed(seed, cfg)?;
            let params = resolve_series(&measure, cfg, kmax, paths, xinf_tol, false, seed);
            let bracket = parse_bracket(&bracket)?;
            let tol = tol.unwrap_or(1e-3);
            #[derive(Serialize)]
            struct Hashable<'a> {
                atoms: &'a [splitstream::splitting::Atom],
                d: u64,
                bracket: (f64, f64),
                tol: f64,
                params: &'a SeriesParams,
            }
            let prov = Provenance::new(
                "lambda-c",
                seed,
                &Hashable {
                    atoms: measure.atoms(),
                    d,
                    bracket,
                    tol,
                    params: &params,
                },
            );
            let root = find_lambda_c(&measure, d, &params, bracket, tol)
                .map_err(|e| e.to_string())?;
            let mut csv = Csv::new(&prov, "lambda_c,jitter");
            csv.row(&[num(root.value), num(root.uncertainty)]);
            emit(&csv.render(), out.as_deref())?;
            Ok(0)
        }

        Command::MeanSize {
            measure,
            law,
            lambda,
            d,
            n_grid,
            kmax,
            paths,
            xinf_tol,
            seed,
            out,
        } => {
            let measure = resolve_measure(&measure, &law, cfg)?;
            let d = resolve_d(d, cfg)?;
            let seed = resolve_seed(seed, cfg)?;
            let params = resolve_series(&measure, cfg, kmax, paths, xinf_tol, false, seed);
            let grid = parse_count_list(&n_grid)?;
            #[derive(Serialize)]
            struct Hashable<'a> {
                atoms: &'a [splitstream::splitting::Atom],
                lambda: f64,
                d: u64,
                grid: &'a [u64],
                params: &'a SeriesParams,
            }
            let prov = Provenance::new(
                "mean-size",
                seed,
                &Hashable {
                    atoms: measure.atoms(),
                    lambda,
                    d,
                    grid: &grid,
                    params: &params,
                },
            );
            let matrix = assemble_matrix(&measure, lambda, d, &params);
            let constants = solve_constants(&matrix).map_err(|e| e.to_string())?;
            let mut csv = Csv::new(&prov, "n,analytic,tail_bound");
            let mut untrusted = Vec::new();
            for &n in &grid {
                let v = mean_tree_size(&measure, lambda, d, &constants, n, &params);
                if !v.trusted {
                    untrusted.push(n);
                }
                csv.row(&[
                    n.to_string(),
                    num(v.value),
                    num(v.tail_fraction * v.value.abs()),
                ]);
            }
            let mut text = csv.render();
            if !untrusted.is_empty() {
                text.push_str(&format!(
                    "# untrusted (truncation tail above 1e-6 of total): n={untrusted:?}\n"
                ));
            }
            emit(&text, out.as_deref())?;
            Ok(0)
        }

        Command::Asymptotics {
            measure,
            law,
            lambda,
            d,
            variant,
            curve_points,
            kmax,
            paths,
            xinf_tol,
            seed,
            out,
        } => {
            let measure = resolve_measure(&measure, &law, cfg)?;
            let d = resolve_d(d, cfg)?;
            let seed = resolve_seed(seed, cfg)?;
            let params = resolve_series(&measure, cfg, kmax, paths, xinf_tol, false, seed);
            let variant = match variant.as_str() {
                "corrected" => SlopeVariant::Corrected,
                "as-printed" | "as_printed" => SlopeVariant::AsPrinted,
                other => return Err(format!("unknown variant {other} (corrected | as-printed)")),
            };
            #[derive(Serialize)]
            struct Hashable<'a> {
                atoms: &'a [splitstream::splitting::Atom],
                lambda: f64,
                d: u64,
                variant: SlopeVariant,
                params: &'a SeriesParams,
            }
            let prov = Provenance::new(
                "asymptotics",
                seed,
                &Hashable {
                    atoms: measure.atoms(),
                    lambda,
                    d,
                    variant,
                    params: &params,
                },
            );
            let matrix = assemble_matrix(&measure, lambda, d, &params);
            let constants = solve_constants(&matrix).map_err(|e| e.to_string())?;
            let slope = asymptotic_slope(&measure, lambda, d, &constants, variant, &params);
            match slope {
                AsymptoticSlope::Flat(v) => {
                    let mut csv = Csv::new(&prov, "slope");
                    csv.row(&[num(v)]);
                    emit(&csv.render(), out.as_deref())?;
                }
                AsymptoticSlope::Periodic(desc) => {
                    let columns = std::iter::once("x".to_string())
                        .chain((1..d).map(|i| format!("f_{i}")))
                        .collect::<Vec<_>>()
                        .join(",");
                    let mut csv = Csv::new(&prov, &columns);
                    for t in 0..curve_points {
                        let x = t as f64 / curve_points as f64;
                        let mut cells = vec![num(x)];
                        for i in 1..d {
                            cells.push(num(
                                periodic_fluctuation(&measure, i, x, variant)
                                    .map_err(|e| e.to_string())?,
                            ));
                        }
                        csv.row(&cells);
                    }
                    let mut text = csv.render();
                    text.push_str(&format!(
                        "# slope_period_mean={} span={}\n",
                        num(desc.mean()),
                        num(desc.span)
                    ));
                    emit(&text, out.as_deref())?;
                }
            }
            Ok(0)
        }

        Command::Validate {
            only,
            seed,
            paths,
            out,
        } => {
            let seed = resolve_seed(seed, cfg)?;
            let series = cfg.series.clone().unwrap_or_default();
            let experiment = match (&cfg.law, &cfg.arrivals) {
                (Some(law_path), arrivals) => {
                    let law = load_law(law_path)?;
                    let arrivals = parse_arrivals(
                        arrivals.clone().unwrap_or_else(|| "none".into()).as_str(),
                    )?;
                    Some(validation::Experiment {
                        law,
                        d: cfg.d.unwrap_or(2),
                        arrivals,
                    })
                }
                _ => None,
            };
            let suite = SuiteConfig {
                seed,
                mc_paths: paths.or(series.mc_paths).unwrap_or(100_000),
                experiment,
            };
            let only_list: Option<Vec<String>> = only
                .map(|s| s.split(',').map(|p| p.trim().to_string()).collect());
            if let Some(names) = &only_list {
                let known: Vec<&str> = validation::CRITERIA.iter().map(|(id, _)| *id).collect();
                for n in names {
                    if !known.contains(&n.as_str()) {
                        return Err(format!("unknown criterion {n}; known: {known:?}"));
                    }
                }
            }
            let results = validation::run_suite(&suite, only_list.as_deref());
            for r in &results {
                println!("{}", r.line());
            }
            let failed = results.iter().filter(|r| r.status == Status::Fail).count();
            let passed = results.iter().filter(|r| r.status == Status::Pass).count();
            let skipped = results.iter().filter(|r| r.status == Status::Skipped).count();
            println!("passed {passed}, failed {failed}, skipped {skipped}");

            #[derive(Serialize)]
            struct Hashable {
                seed: u64,
                mc_paths: u64,
                only: Option<Vec<String>>,
            }
            let prov = Provenance::new(
                "validate",
                seed,
                &Hashable {
                    seed,
                    mc_paths: suite.mc_paths,
                    only: only_list.clone(),
                },
            );
            let body = serde_json::json!({
                "results": results,
                "passed": failed == 0,
            });
            let report = json_with_provenance(&prov, body)?;
            if let Some(path) = out {
                emit(&report, Some(&path))?;
            }
            if let Some(dir) = &cfg.outputs {
                emit(&report, Some(&dir.join("validate-report.json")))?;
            }
            Ok(if failed == 0 { 0 } else { 1 })
        }
    }
}
