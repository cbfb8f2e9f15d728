//! Experiment drivers behind the command line. Each driver resolves its
//! settings against the defaults of its experiment family, loads or
//! generates data, trains and scores. Writing results is left to callers.

use std::path::PathBuf;

use gvm_core::data::{
    augment_noise, augment_shift, default_regression_controls, flip_labels, gauss_smooth, gen_regression,
    mnist_controls, wisconsin_controls,
};
use gvm_core::ensemble::{evaluate, Ensemble, EnsembleConfig, EnsembleReport, Evaluation, Grid, ScanAxis, ScanResult};
use gvm_core::sensitivity::NORM_GRID_POINTS;
use gvm_core::trainer::{auto_grow_train, train_seeded, TrainOutcome};
use gvm_core::{ControlParams, Dataset, GoalFunction, GvmParams, TransferKind};

use crate::config::Settings;
use crate::error::{Error, Result};
use crate::mnist::{load_split, Split};
use crate::wash::{recall, wash, WashReport};
use crate::wisconsin::load_wisconsin;
use crate::{parallel, wisconsin};

pub const DEFAULT_SEED: u64 = 0;
pub const REGRESSION_SAMPLES: usize = 20;
pub const GRID_POINTS_2D: usize = 101;
pub const SCAN_MEMBERS: usize = 500;
pub const MNIST_MEMBERS: usize = 100;
pub const MNIST_FRACTION: f64 = 0.01;
pub const SHIFT_PIXELS: usize = 2;
pub const NOISE_SIGMA_RAW: f64 = 80.0;
pub const NOISE_COPIES: usize = 10;
/// Steps per hidden neuron for fixed-length smoothing runs.
pub const SMOOTHING_STEPS_PER_NEURON: u64 = 100_000;
pub const DEFAULT_TOP_K: usize = 10;

/// A generated regression set and the grid its curves are scored on.
#[derive(Debug, Clone)]
pub struct RegressionTask {
    pub goal: GoalFunction,
    pub c_x: f64,
    pub noise_sigma: f64,
    pub data: Dataset,
    pub grid: Grid,
}

impl RegressionTask {
    pub fn evaluation(&self) -> Evaluation<'_> {
        Evaluation::Regression { goal: self.goal, grid: &self.grid }
    }
}

pub fn regression_task(s: &Settings) -> Result<RegressionTask> {
    let goal = s.goal_or(GoalFunction::Sin)?;
    let c_x = s.c_x.unwrap_or_else(|| goal.default_half_width());
    let noise_sigma = s.noise_sigma.unwrap_or(0.0);
    let samples = s.samples.unwrap_or(match goal.dim() {
        1 => REGRESSION_SAMPLES,
        _ => REGRESSION_SAMPLES * REGRESSION_SAMPLES,
    });
    let data = gen_regression(goal, c_x, samples, noise_sigma, s.seed_or(DEFAULT_SEED))?;
    let points = s.grid_points.unwrap_or(match goal.dim() {
        1 => NORM_GRID_POINTS,
        _ => GRID_POINTS_2D,
    });
    let grid = Grid::uniform(c_x, goal.dim(), points)?;
    Ok(RegressionTask { goal, c_x, noise_sigma, data, grid })
}

/// Function-fitting controls. Noisy sets default to a fixed run of
/// `10⁵·N` steps with no cost threshold.
pub fn regression_control(s: &Settings, task: &RegressionTask) -> Result<ControlParams> {
    let mut base = default_regression_controls(task.c_x);
    if task.noise_sigma > 0.0 {
        let n = s.n_hidden.unwrap_or(base.n_hidden) as u64;
        base = base.with_stop(0.0, SMOOTHING_STEPS_PER_NEURON * n);
    }
    s.control_from(base)
}

#[derive(Debug, Clone)]
pub struct FitRun {
    pub task: RegressionTask,
    pub control: ControlParams,
    pub kind: TransferKind,
    pub seed: u64,
    pub outcome: TrainOutcome,
    pub prediction: Vec<f64>,
    pub goal_values: Vec<f64>,
    /// RMS distance between prediction and goal over the grid.
    pub fit_error: f64,
}

/// Trains one machine. With a growth schedule, hidden sizes are tried in
/// turn and exhausting the schedule is an error.
pub fn run_fit(s: &Settings) -> Result<FitRun> {
    let task = regression_task(s)?;
    let control = regression_control(s, &task)?;
    let kind = s.transfer_or(TransferKind::Gauss)?;
    let seed = s.seed_or(DEFAULT_SEED);
    let outcome = match &s.grow {
        Some(schedule) if !schedule.is_empty() => auto_grow_train(&task.data, &control, kind, seed, schedule)?,
        _ => train_seeded(&task.data, &control, kind, seed)?,
    };
    let control = ControlParams { n_hidden: outcome.params.hidden_dim(), ..control };
    let prediction = gvm_core::ensemble::member_curve(&outcome.params, &task.grid)?;
    let goal_values = task.grid.goal_values(task.goal)?;
    let fit_error = gvm_core::ensemble::rms_distance(&prediction, &goal_values);
    Ok(FitRun { task, control, kind, seed, outcome, prediction, goal_values, fit_error })
}

/// Training and test sets of a classification experiment.
#[derive(Debug, Clone)]
pub struct ClassificationTask {
    pub train: Dataset,
    pub test: Dataset,
    /// Training set before augmentation; sensitivity is averaged over it.
    pub original: Dataset,
    /// Indices of the training samples whose labels were corrupted.
    pub flipped: Vec<usize>,
}

impl ClassificationTask {
    pub fn evaluation(&self) -> Evaluation<'_> {
        Evaluation::Classification { test: &self.test, rs_inputs: &self.original }
    }

    fn corrupt(mut self, count: usize, seed: u64) -> Result<Self> {
        if count > 0 {
            let (train, flipped) = flip_labels(&self.train, count, seed)?;
            self.original = train.clone();
            self.train = train;
            self.flipped = flipped;
        }
        Ok(self)
    }
}

pub fn wisconsin_path(s: &Settings) -> PathBuf {
    s.wisconsin.clone().unwrap_or_else(|| s.data_dir().join(wisconsin::FILE_NAME))
}

pub fn wisconsin_task(s: &Settings) -> Result<ClassificationTask> {
    let (train, test) = load_wisconsin(&wisconsin_path(s))?;
    let task = ClassificationTask { original: train.clone(), train, test, flipped: Vec::new() };
    task.corrupt(s.flip.unwrap_or(0), s.seed_or(DEFAULT_SEED))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pretreatment {
    None,
    /// Eight 2-pixel shifted copies of every training image.
    Shift,
    /// Gaussian blur of training and test images.
    Smooth,
    /// Ten noisy copies of every training image.
    Noise,
}

impl Pretreatment {
    pub fn from_name(name: &str) -> Result<Pretreatment> {
        match name {
            "none" => Ok(Pretreatment::None),
            "shift" => Ok(Pretreatment::Shift),
            "smooth" => Ok(Pretreatment::Smooth),
            "noise" => Ok(Pretreatment::Noise),
            other => Err(Error::Config(format!("unknown pretreatment {other:?}"))),
        }
    }
}

/// MNIST subsets with an optional pretreatment. Labels are corrupted before
/// augmentation, so every copy of a flipped sample carries the wrong label.
pub fn mnist_task(s: &Settings) -> Result<ClassificationTask> {
    let dir = s.data_dir().join("mnist");
    let train = load_split(&dir, Split::Train, s.fraction.unwrap_or(MNIST_FRACTION))?;
    let test = load_split(&dir, Split::Test, s.test_fraction.unwrap_or(1.0))?;
    let seed = s.seed_or(DEFAULT_SEED);
    let task = ClassificationTask { original: train.clone(), train, test, flipped: Vec::new() }
        .corrupt(s.flip.unwrap_or(0), seed)?;
    let pretreatment = Pretreatment::from_name(s.pretreatment.as_deref().unwrap_or("none"))?;
    Ok(match pretreatment {
        Pretreatment::None => task,
        Pretreatment::Shift => ClassificationTask { train: augment_shift(&task.train, SHIFT_PIXELS)?, ..task },
        Pretreatment::Noise => {
            ClassificationTask { train: augment_noise(&task.train, NOISE_SIGMA_RAW, NOISE_COPIES, seed)?, ..task }
        }
        Pretreatment::Smooth => {
            let train = gauss_smooth(&task.train)?;
            ClassificationTask {
                original: train.clone(),
                train,
                test: gauss_smooth(&task.test)?,
                flipped: task.flipped,
            }
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Regression,
    Wisconsin,
    Mnist,
}

impl Family {
    pub fn from_settings(s: &Settings) -> Result<Family> {
        match s.dataset.as_deref().unwrap_or("regression") {
            "regression" => Ok(Family::Regression),
            "wisconsin" => Ok(Family::Wisconsin),
            "mnist" => Ok(Family::Mnist),
            other => Err(Error::Config(format!("unknown dataset {other:?}"))),
        }
    }

    fn default_members(self) -> usize {
        match self {
            Family::Mnist => MNIST_MEMBERS,
            _ => SCAN_MEMBERS,
        }
    }

    fn default_kind(self) -> TransferKind {
        match self {
            Family::Wisconsin => TransferKind::Sigmoid,
            _ => TransferKind::Gauss,
        }
    }
}

pub fn classification_control(s: &Settings, family: Family) -> Result<ControlParams> {
    match family {
        Family::Wisconsin => s.control_from(wisconsin_controls()),
        Family::Mnist => s.control_from(mnist_controls()),
        Family::Regression => Err(Error::Config("regression sets have no classification controls".into())),
    }
}

pub fn ensemble_config(s: &Settings, family: Family, control: ControlParams) -> Result<EnsembleConfig> {
    let config = EnsembleConfig {
        n_members: s.members.unwrap_or(family.default_members()),
        control,
        kind: s.transfer_or(family.default_kind())?,
        base_seed: s.seed_or(DEFAULT_SEED),
    };
    config.validate()?;
    Ok(config)
}

/// A trained ensemble with its scores.
#[derive(Debug, Clone)]
pub struct EnsembleRun {
    pub config: EnsembleConfig,
    pub task: ClassificationTask,
    pub ensemble: Ensemble,
    pub report: EnsembleReport,
}

fn run_classification(s: &Settings, family: Family, task: ClassificationTask) -> Result<EnsembleRun> {
    let control = classification_control(s, family)?;
    let config = ensemble_config(s, family, control)?;
    let ensemble = parallel::design_ensemble(&config, &task.train)?;
    let axis_value = config.control.cost.margin().unwrap_or(f64::NAN);
    let report = evaluate(&ensemble, task.evaluation(), axis_value)?;
    Ok(EnsembleRun { config, task, ensemble, report })
}

pub fn run_recognize(s: &Settings) -> Result<EnsembleRun> {
    run_classification(s, Family::Mnist, mnist_task(s)?)
}

pub fn run_wisconsin(s: &Settings) -> Result<EnsembleRun> {
    run_classification(s, Family::Wisconsin, wisconsin_task(s)?)
}

pub fn scan_axis(s: &Settings) -> Result<ScanAxis> {
    let name = s.axis.as_deref().unwrap_or("c_beta");
    ScanAxis::from_name(name).ok_or_else(|| Error::Config(format!("unknown scan axis {name:?}")))
}

/// Sweeps one control parameter over `values` for the configured family.
pub fn run_scan(s: &Settings) -> Result<ScanResult> {
    let family = Family::from_settings(s)?;
    let axis = scan_axis(s)?;
    let values = s.values.clone().filter(|v| !v.is_empty()).ok_or_else(|| Error::Config("scan needs values".into()))?;
    match family {
        Family::Regression => {
            let task = regression_task(s)?;
            let config = ensemble_config(s, family, regression_control(s, &task)?)?;
            parallel::scan(axis, &values, &config, &task.data, task.evaluation())
        }
        Family::Wisconsin | Family::Mnist => {
            let task = if family == Family::Wisconsin { wisconsin_task(s)? } else { mnist_task(s)? };
            let config = ensemble_config(s, family, classification_control(s, family)?)?;
            parallel::scan(axis, &values, &config, &task.train, task.evaluation())
        }
    }
}

#[derive(Debug, Clone)]
pub struct WashRun {
    pub report: WashReport,
    pub flipped: Vec<usize>,
    /// Share of the flipped samples among the reported ones.
    pub recall: Option<f64>,
    /// Members trained by the run; empty when they were supplied.
    pub trained: Vec<GvmParams>,
}

/// Ranks the training samples of a classification set by worst margin.
/// Members are trained on the (possibly corrupted) training set unless
/// `members` is given. The test split is never consulted.
pub fn run_wash(s: &Settings, members: Option<Vec<GvmParams>>) -> Result<WashRun> {
    let family = Family::from_settings(s)?;
    let task = match family {
        Family::Wisconsin => wisconsin_task(s)?,
        Family::Mnist => mnist_task(s)?,
        Family::Regression => return Err(Error::Config("washing needs a classification dataset".into())),
    };
    let (members, trained) = match members {
        Some(m) => (m, Vec::new()),
        None => {
            let config = ensemble_config(s, family, classification_control(s, family)?)?;
            let m = parallel::design_ensemble(&config, &task.train)?.members;
            (m.clone(), m)
        }
    };
    let top_k = s.top_k.unwrap_or(if task.flipped.is_empty() { DEFAULT_TOP_K } else { 2 * task.flipped.len() });
    let report = wash(&members, &task.original, top_k)?;
    let recall = (!task.flipped.is_empty()).then(|| recall(&report, &task.flipped));
    Ok(WashRun { report, flipped: task.flipped, recall, trained })
}
