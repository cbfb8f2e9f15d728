use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gvm::config::Settings;
use gvm::error::{Error, Result};
use gvm::experiments::{self, EnsembleRun};
use gvm::model::{self, ModelFile, TrainingRecord};
use gvm::report;
use gvm_core::ensemble::ScanResult;

#[derive(Parser)]
#[command(name = "gvm", version, about = "Train and evaluate general vector machines")]
struct Cli {
    /// Repeat for more log output
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit one machine to a generated regression set
    Fit {
        #[command(flatten)]
        common: Common,
        /// Training trace CSV (step, cost, accept_rate)
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Sweep one control parameter and report each ensemble
    Scan {
        #[command(flatten)]
        common: Common,
    },
    /// Train an ensemble on MNIST and score it on the test split
    Recognize {
        #[command(flatten)]
        common: Common,
    },
    /// Train an ensemble on the Wisconsin table and score it on the test split
    ClassifyWisconsin {
        #[command(flatten)]
        common: Common,
    },
    /// Rank training samples by their worst output margin
    Wash {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    /// TOML file with experiment settings; flags override it
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output CSV; standard output when absent
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-member metrics CSV
    #[arg(long)]
    members_out: Option<PathBuf>,
    /// Write trained model(s) as JSON
    #[arg(long)]
    model_out: Option<PathBuf>,
    /// Read model(s) instead of training
    #[arg(long)]
    model_in: Option<PathBuf>,
    #[command(flatten)]
    settings: Settings,
}

impl Common {
    fn settings(&self) -> Result<Settings> {
        let file = match &self.config {
            Some(path) => Settings::load(path)?,
            None => Settings::default(),
        };
        Ok(file.overlay(self.settings.clone()))
    }
}

fn emit(out: Option<&Path>, body: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    match out {
        Some(path) => report::to_file(path, |mut f| body(&mut f)),
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            body(&mut lock)
        }
    }
}

fn init_threads(settings: &Settings) -> Result<()> {
    if let Some(n) = settings.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    }
    Ok(())
}

fn fit(common: &Common, trace: Option<&Path>) -> Result<()> {
    let s = common.settings()?;
    let run = experiments::run_fit(&s)?;
    log::info!(
        "steps {} accepted {} cost {:.6e} fit error {:.6e}",
        run.outcome.steps,
        run.outcome.accepted,
        run.outcome.final_cost,
        run.fit_error
    );
    if let Some(path) = &common.model_out {
        let record = TrainingRecord {
            seed: run.seed,
            steps: run.outcome.steps,
            accepted: run.outcome.accepted,
            final_cost: run.outcome.final_cost,
            converged: run.outcome.converged,
            dataset_digest: model::dataset_digest(&run.task.data),
        };
        let file = ModelFile::from_params(&run.outcome.params).with_control(&run.control).with_training(record);
        model::save_model(path, &file)?;
    }
    if let Some(path) = trace {
        report::to_file(path, |f| report::write_trace(f, &run.outcome.history))?;
    }
    if run.task.grid.dim() == 1 {
        let xs: Vec<f64> = run.task.grid.iter().map(|x| x[0]).collect();
        emit(common.out.as_deref(), |w| report::write_curve(w, &xs, &run.prediction, Some(&run.goal_values)))?;
    } else {
        let items = [("fit_error", run.fit_error.to_string()), ("final_cost", run.outcome.final_cost.to_string())];
        emit(common.out.as_deref(), |w| report::write_summary(w, &items))?;
    }
    if run.control.stop_cost > 0.0 && !run.outcome.converged {
        return Err(Error::NonConvergence(format!(
            "cost {:.6e} above {:.6e} after {} steps",
            run.outcome.final_cost, run.control.stop_cost, run.outcome.steps
        )));
    }
    Ok(())
}

fn scan(common: &Common) -> Result<()> {
    let s = common.settings()?;
    init_threads(&s)?;
    let result: ScanResult = experiments::run_scan(&s)?;
    let at = |k: Option<usize>| k.map(|k| result.reports[k].axis_value.to_string()).unwrap_or_else(|| "none".into());
    log::info!(
        "best mean at {} = {}, lowest design risk at {}, lowest sensitivity at {}",
        result.axis.name(),
        at(result.turning_point),
        at(result.min_design_risk),
        at(result.min_sensitivity)
    );
    emit(common.out.as_deref(), |w| report::write_scan(w, &result))
}

fn ensemble_outputs(common: &Common, run: &EnsembleRun) -> Result<()> {
    let r = &run.report;
    let items = [
        ("members", run.config.n_members.to_string()),
        ("converged", r.n_converged.to_string()),
        ("mean_accuracy", r.mean_metric.to_string()),
        ("design_risk", r.design_risk.to_string()),
        ("jgvm_accuracy", r.jgvm_metric.to_string()),
        ("avg_rs", r.avg_rs.to_string()),
    ];
    emit(common.out.as_deref(), |w| report::write_summary(w, &items))?;
    if let Some(path) = &common.members_out {
        report::to_file(path, |f| report::write_members(f, r))?;
    }
    if let Some(path) = &common.model_out {
        let files: Vec<ModelFile> =
            run.ensemble.members.iter().map(|m| ModelFile::from_params(m).with_control(&run.config.control)).collect();
        model::save_models(path, &files)?;
    }
    Ok(())
}

fn classify(common: &Common, wisconsin: bool) -> Result<()> {
    let s = common.settings()?;
    init_threads(&s)?;
    let run = if wisconsin { experiments::run_wisconsin(&s)? } else { experiments::run_recognize(&s)? };
    ensemble_outputs(common, &run)
}

fn wash(common: &Common) -> Result<()> {
    let s = common.settings()?;
    init_threads(&s)?;
    let members = match &common.model_in {
        Some(path) => Some(model::load_models(path)?.iter().map(ModelFile::to_params).collect::<Result<Vec<_>>>()?),
        None => None,
    };
    let run = experiments::run_wash(&s, members)?;
    if let Some(recall) = run.recall {
        log::info!("recall of {} flipped labels: {recall:.4}", run.flipped.len());
    }
    if let Some(path) = &common.model_out {
        let files: Vec<ModelFile> = run.trained.iter().map(ModelFile::from_params).collect();
        model::save_models(path, &files)?;
    }
    emit(common.out.as_deref(), |w| report::write_wash(w, &run.report))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    let result = match &cli.command {
        Command::Fit { common, trace } => fit(common, trace.as_deref()),
        Command::Scan { common } => scan(common),
        Command::Recognize { common } => classify(common, false),
        Command::ClassifyWisconsin { common } => classify(common, true),
        Command::Wash { common } => wash(common),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
