//! Command-line front end: simulate datasets, run curves and sweeps, and
//! print bound / diagnostics reports.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use fedsysid::bounds::{empirical_diagnostics, federated_bound, measure_heterogeneity};
use fedsysid::error::Error;
use fedsysid::estimation::pooled_ls;
use fedsysid::experiments::config::PRESET_NAMES;
use fedsysid::experiments::{
    emit_plot_script, preset, read_config_file, run_error_curve, run_sweep, trial_data,
    write_curves_csv, ExperimentConfig,
};
use fedsysid::federation::{admissible_step_limit, UpdateRule};

const SEED_ENV_VAR: &str = "FEDSYSID_SEED";

#[derive(Parser)]
#[command(
    name = "fedsysid",
    about = "Federated identification of linear time-invariant systems",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Config file path or preset name (paper_defaults, fig1a, fig1b, fig1c,
    /// fig1a_M50, fig3_compare). Defaults to paper_defaults.
    #[arg(long, global = true)]
    config: Option<String>,

    /// Master seed override (highest precedence; FEDSYSID_SEED is lowest).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output path (CSV for run/sweep, text report otherwise).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Update rule override.
    #[arg(long, global = true, value_parser = parse_rule)]
    rule: Option<UpdateRule>,

    /// Global round count override.
    #[arg(long, global = true)]
    rounds: Option<usize>,

    /// Suppress progress output.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Generate one trial's ensemble and datasets and print a summary.
    Simulate,
    /// Run a single error curve and write it as CSV.
    Run,
    /// Run the configured sweep: multi-curve CSV plus a plot script.
    Sweep,
    /// Evaluate the federated error bound for the configured ensemble.
    Bound,
    /// Measure concentration diagnostics on one simulated trial.
    Diagnose,
}

fn parse_rule(s: &str) -> Result<UpdateRule, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // Usage and parse problems are config errors (exit 1); explicit
            // help/version requests are successes.
            let _ = err.print();
            return if err.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            let mut source = std::error::Error::source(&err);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            match err {
                Error::Config(_) | Error::Io { .. } | Error::InvalidArgument(_) => {
                    ExitCode::from(1)
                }
                _ => ExitCode::from(2),
            }
        }
    }
}

fn resolve_config(cli: &Cli) -> Result<ExperimentConfig, Error> {
    let mut config = match cli.config.as_deref() {
        None => ExperimentConfig::benchmark_defaults(),
        Some(name) => {
            let path = PathBuf::from(name);
            if path.is_file() {
                read_config_file(&path)?
            } else if let Some(preset) = preset(name) {
                preset
            } else {
                return Err(Error::Config(format!(
                    "'{name}' is neither a config file nor a preset (presets: {})",
                    PRESET_NAMES.join(", ")
                )));
            }
        }
    };

    // Seed precedence: --seed, then the config file, then the environment.
    // The default config leaves the seed at its built-in value, which the
    // environment variable may replace.
    let config_pinned_seed =
        cli.config.is_some() && config.seed != ExperimentConfig::benchmark_defaults().seed;
    if let Some(seed) = cli.seed {
        set_seed(&mut config, seed);
    } else if !config_pinned_seed {
        if let Some(env_seed) = std::env::var(SEED_ENV_VAR)
            .ok()
            .and_then(|v| v.parse::<u64>().ok())
        {
            set_seed(&mut config, env_seed);
        }
    }

    if let Some(rule) = cli.rule {
        config.federation.rule = rule;
        if !config.schedule_explicit {
            config.federation.schedule =
                ExperimentConfig::default_schedule(rule, config.federation.schedule.alpha0());
        }
    }
    if let Some(rounds) = cli.rounds {
        config.federation.rounds = rounds;
    }
    config.validate()?;
    Ok(config)
}

fn set_seed(config: &mut ExperimentConfig, seed: u64) {
    config.seed = seed;
    config.federation.seed = seed;
}

fn deliver(report: String, out: &Option<PathBuf>, quiet: bool) -> Result<(), Error> {
    if let Some(path) = out {
        std::fs::write(path, &report).map_err(|source| Error::Io {
            path: path.clone(),
            source,
        })?;
        if !quiet {
            println!("wrote {}", path.display());
        }
    } else {
        print!("{report}");
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Error> {
    let config = resolve_config(&cli)?;
    match cli.command {
        Command::Simulate => simulate(&cli, &config),
        Command::Run => run_curve(&cli, &config),
        Command::Sweep => sweep(&cli, &config),
        Command::Bound => bound(&cli, &config),
        Command::Diagnose => diagnose(&cli, &config),
    }
}

fn simulate(cli: &Cli, config: &ExperimentConfig) -> Result<(), Error> {
    let (systems, datasets) = trial_data(config, 0)?;
    let eps = measure_heterogeneity(&systems)?;
    let mut report = String::new();
    let _ = writeln!(report, "clients = {}", datasets.len());
    let _ = writeln!(
        report,
        "per-client data = {} rollouts x horizon {} ({} columns)",
        config.data.rollouts_per_client,
        config.data.horizon,
        datasets[0].cols()
    );
    let _ = writeln!(report, "measured heterogeneity = {eps:.6e}");
    let _ = writeln!(
        report,
        "configured epsilon = {:.6e}",
        config.ensemble.epsilon
    );
    for (i, ds) in datasets.iter().enumerate() {
        let residual = ds.reconstruction_residual(&systems[i])?;
        let _ = writeln!(
            report,
            "client {i}: reconstruction residual = {residual:.3e}, \
             admissible step limit = {:.6e}",
            admissible_step_limit(ds)
        );
    }
    let pooled = pooled_ls(&datasets)?;
    let _ = writeln!(
        report,
        "pooled LS computed ({}x{} parameter block)",
        pooled.theta().nrows(),
        pooled.theta().ncols()
    );
    deliver(report, &cli.out, cli.quiet)
}

fn run_curve(cli: &Cli, config: &ExperimentConfig) -> Result<(), Error> {
    if !cli.quiet {
        println!(
            "running {} trials of {} rounds ({} clients, rule {})",
            config.trials,
            config.federation.rounds,
            config.federation.clients,
            config.federation.rule
        );
    }
    let curve = run_error_curve(config)?;
    let out = cli
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from("fedsysid_run.csv"));
    write_curves_csv(std::slice::from_ref(&curve), &out, &config.render())?;
    if !cli.quiet {
        println!(
            "final e_R = {:.6e}; wrote {}",
            curve.final_error(),
            out.display()
        );
    }
    Ok(())
}

fn sweep(cli: &Cli, config: &ExperimentConfig) -> Result<(), Error> {
    if config.sweep.is_none() {
        return Err(Error::Config(
            "sweep needs a sweep_* axis in the config (or use a sweep preset)".into(),
        ));
    }
    let curves = run_sweep(config)?;
    let out = cli
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from("fedsysid_sweep.csv"));
    write_curves_csv(&curves, &out, &config.render())?;
    let script = out.with_extension("py");
    emit_plot_script(&out, &script)?;
    if !cli.quiet {
        for curve in &curves {
            println!(
                "rule={} M={} N_i={} epsilon={}: final e_R = {:.6e}",
                curve.meta.rule,
                curve.meta.clients,
                curve.meta.rollouts_per_client,
                curve.meta.epsilon,
                curve.final_error()
            );
        }
        println!("wrote {} and {}", out.display(), script.display());
    }
    Ok(())
}

fn bound(cli: &Cli, config: &ExperimentConfig) -> Result<(), Error> {
    let (systems, _) = trial_data(config, 0)?;
    let noises = vec![config.data.noise; systems.len()];
    let counts = vec![config.data.rollouts_per_client; systems.len()];
    let report = federated_bound(
        &systems,
        &noises,
        &counts,
        config.data.horizon,
        config.ensemble.epsilon,
        config.delta,
    )?;
    let mut text = String::new();
    let _ = writeln!(text, "C0 = {:.12e}", report.c0);
    let _ = writeln!(text, "C1 = {:.12e}", report.c1);
    let _ = writeln!(text, "C2 = {:.12e}", report.c2);
    let _ = writeln!(text, "term_noise = {:.12e}", report.term_noise);
    let _ = writeln!(text, "term_hetero = {:.12e}", report.term_hetero);
    let _ = writeln!(text, "total = {:.12e}", report.total);
    let _ = writeln!(text, "delta = {}", report.delta);
    let _ = writeln!(text, "sample_ok = {}", report.sample_ok);
    deliver(text, &cli.out, cli.quiet)
}

fn diagnose(cli: &Cli, config: &ExperimentConfig) -> Result<(), Error> {
    let (systems, datasets) = trial_data(config, 0)?;
    let report = empirical_diagnostics(&systems, &datasets, config.delta)?;
    let mut text = String::new();
    let _ = writeln!(text, "wz_norm = {:.12e}", report.wz_norm);
    let _ = writeln!(text, "wz_bound = {:.12e}", report.wz_bound);
    let _ = writeln!(
        text,
        "wz_within_bound = {}",
        report.wz_norm <= report.wz_bound
    );
    for i in 0..report.dz_norms.len() {
        let _ = writeln!(
            text,
            "client {i}: dz_norm = {:.12e}, dz_bound = {:.12e}, \
             gram_lambda_min = {:.12e}, gram_threshold = {:.12e}, psd_margin = {:.12e}",
            report.dz_norms[i],
            report.dz_bounds[i],
            report.gram_checks[i].lambda_min_gram,
            report.gram_checks[i].lambda_min_threshold,
            report.gram_checks[i].psd_margin,
        );
    }
    let _ = writeln!(text, "beta = {:.12e}", report.beta);
    let _ = writeln!(text, "n_threshold_gram = {:.6}", report.n_threshold_gram);
    let _ = writeln!(text, "n_threshold_wz = {:.6}", report.n_threshold_wz);
    let meets = config.data.rollouts_per_client as f64
        >= report.n_threshold_gram.max(report.n_threshold_wz);
    let _ = writeln!(text, "sample_ok = {meets}");
    deliver(text, &cli.out, cli.quiet)
}
