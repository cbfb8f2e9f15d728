//! Families of machines trained at one control point: design risk, average
//! fitting error, averaged sensitivity, the joint machine (J-GVM), and sweeps
//! over one control parameter.
//!
//! Aggregations fold over members in index order, so results do not depend on
//! the order in which members finished training.

use alloc::vec;
use alloc::vec::Vec;

use crate::data::GoalFunction;
use crate::machine::{classify, ControlParams, Dataset, GvmParams, TransferKind};
use crate::sensitivity::{machine_rs, uniform_grid, SensitivityMode, FULL_MODE_MAX_INPUTS};
use crate::trainer::{train_seeded, TrainOutcome};
use crate::{CostSpec, GvmError, Result};

/// Flattened evaluation points of dimension `dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    dim: usize,
    points: Vec<f64>,
}

impl Grid {
    pub fn new(dim: usize, points: Vec<f64>) -> Result<Self> {
        if dim == 0 || points.is_empty() {
            return Err(GvmError::EmptyInput);
        }
        if !points.len().is_multiple_of(dim) {
            return Err(GvmError::DimensionMismatch { expected: dim, found: points.len() % dim });
        }
        Ok(Grid { dim, points })
    }

    /// `points` per axis on `[-c, c]^dim`, endpoints included.
    pub fn uniform(c: f64, dim: usize, points: usize) -> Result<Self> {
        if points == 0 {
            return Err(GvmError::EmptyInput);
        }
        Grid::new(dim, uniform_grid(c, dim, points))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, k: usize) -> &[f64] {
        &self.points[k * self.dim..(k + 1) * self.dim]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.points.chunks_exact(self.dim)
    }

    /// Keeps the points satisfying `keep`.
    pub fn filter(&self, keep: impl Fn(&[f64]) -> bool) -> Result<Grid> {
        let points = self.iter().filter(|x| keep(x)).flatten().copied().collect();
        Grid::new(self.dim, points)
    }

    pub fn goal_values(&self, goal: GoalFunction) -> Result<Vec<f64>> {
        if goal.dim() != self.dim {
            return Err(GvmError::DimensionMismatch { expected: goal.dim(), found: self.dim });
        }
        Ok(self.iter().map(|x| goal.eval(x)).collect())
    }
}

/// Scalar output of `params` at every grid point.
pub fn member_curve(params: &GvmParams, grid: &Grid) -> Result<Vec<f64>> {
    let mut out = [0.0];
    if params.output_dim() != 1 {
        return Err(GvmError::DimensionMismatch { expected: 1, found: params.output_dim() });
    }
    grid.iter()
        .map(|x| {
            params.output_into(x, &mut out)?;
            Ok(out[0])
        })
        .collect()
}

/// Squared RMS distance between two curves on the same grid.
fn mean_square_distance(a: &[f64], b: &[f64]) -> f64 {
    let sq: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    sq / a.len() as f64
}

/// RMS distance between two curves on the same grid.
pub fn rms_distance(a: &[f64], b: &[f64]) -> f64 {
    libm::sqrt(mean_square_distance(a, b))
}

/// Pointwise mean of equal-length curves, summed in member order.
pub fn mean_curve(curves: &[Vec<f64>]) -> Result<Vec<f64>> {
    let first = curves.first().ok_or(GvmError::EmptyInput)?;
    if first.is_empty() {
        return Err(GvmError::EmptyInput);
    }
    let mut mean = vec![0.0; first.len()];
    for c in curves {
        if c.len() != mean.len() {
            return Err(GvmError::DimensionMismatch { expected: mean.len(), found: c.len() });
        }
        for (m, v) in mean.iter_mut().zip(c) {
            *m += v;
        }
    }
    let n = curves.len() as f64;
    mean.iter_mut().for_each(|m| *m /= n);
    Ok(mean)
}

/// `E = √((1/n) Σᵢ ‖Πᵢ − ⟨Π⟩‖²)` with the RMS grid norm, and `⟨Π⟩`.
pub fn design_risk_regression(curves: &[Vec<f64>]) -> Result<(f64, Vec<f64>)> {
    let mean = mean_curve(curves)?;
    let total: f64 = curves.iter().map(|c| mean_square_distance(c, &mean)).sum();
    Ok((libm::sqrt(total / curves.len() as f64), mean))
}

/// `⟨Θ⟩ = √((1/n) Σᵢ ‖Πᵢ − g‖²)` with the RMS grid norm.
pub fn avg_fit_error(curves: &[Vec<f64>], goal: &[f64]) -> Result<f64> {
    if curves.is_empty() || goal.is_empty() {
        return Err(GvmError::EmptyInput);
    }
    let mut total = 0.0;
    for c in curves {
        if c.len() != goal.len() {
            return Err(GvmError::DimensionMismatch { expected: goal.len(), found: c.len() });
        }
        total += mean_square_distance(c, goal);
    }
    Ok(libm::sqrt(total / curves.len() as f64))
}

/// Fraction of `test` classified correctly by `params`.
pub fn accuracy(params: &GvmParams, test: &Dataset) -> Result<f64> {
    let labels = test.labels().ok_or_else(|| GvmError::InvalidDataset("accuracy needs class labels".into()))?;
    if test.is_empty() {
        return Err(GvmError::EmptyInput);
    }
    let mut out = vec![0.0; params.output_dim()];
    let mut correct = 0usize;
    for (x, &label) in test.iter_inputs().zip(labels) {
        params.output_into(x, &mut out)?;
        correct += (classify(&out) == label) as usize;
    }
    Ok(correct as f64 / test.len() as f64)
}

/// Mean and population standard deviation.
pub fn mean_and_std(values: &[f64]) -> Result<(f64, f64)> {
    if values.is_empty() {
        return Err(GvmError::EmptyInput);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    Ok((mean, libm::sqrt(var)))
}

/// Member accuracies, their mean `⟨Π⟩` and design risk (population std).
pub fn classification_stats(members: &[GvmParams], test: &Dataset) -> Result<(Vec<f64>, f64, f64)> {
    let accs = members.iter().map(|m| accuracy(m, test)).collect::<Result<Vec<_>>>()?;
    let (mean, std) = mean_and_std(&accs)?;
    Ok((accs, mean, std))
}

/// Joint machine whose output fields are the member average.
#[derive(Debug, Clone, PartialEq)]
pub struct Jgvm {
    members: Vec<GvmParams>,
}

impl Jgvm {
    pub fn new(members: Vec<GvmParams>) -> Result<Self> {
        let first = members.first().ok_or(GvmError::EmptyInput)?;
        let (m, l) = (first.input_dim(), first.output_dim());
        for p in &members {
            if p.input_dim() != m {
                return Err(GvmError::DimensionMismatch { expected: m, found: p.input_dim() });
            }
            if p.output_dim() != l {
                return Err(GvmError::DimensionMismatch { expected: l, found: p.output_dim() });
            }
        }
        Ok(Jgvm { members })
    }

    pub fn members(&self) -> &[GvmParams] {
        &self.members
    }

    pub fn output_into(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        jgvm_fields(&self.members, x, out)
    }

    /// Averaged fields and the argmax class.
    pub fn predict(&self, x: &[f64]) -> Result<(Vec<f64>, usize)> {
        jgvm_predict(&self.members, x)
    }

    pub fn curve(&self, grid: &Grid) -> Result<Vec<f64>> {
        let curves = self.members.iter().map(|m| member_curve(m, grid)).collect::<Result<Vec<_>>>()?;
        mean_curve(&curves)
    }

    pub fn accuracy(&self, test: &Dataset) -> Result<f64> {
        let labels = test.labels().ok_or_else(|| GvmError::InvalidDataset("accuracy needs class labels".into()))?;
        if test.is_empty() {
            return Err(GvmError::EmptyInput);
        }
        let mut out = vec![0.0; self.members[0].output_dim()];
        let mut correct = 0usize;
        for (x, &label) in test.iter_inputs().zip(labels) {
            self.output_into(x, &mut out)?;
            correct += (classify(&out) == label) as usize;
        }
        Ok(correct as f64 / test.len() as f64)
    }
}

fn jgvm_fields(members: &[GvmParams], x: &[f64], out: &mut [f64]) -> Result<()> {
    if members.is_empty() {
        return Err(GvmError::EmptyInput);
    }
    let mut buf = vec![0.0; out.len()];
    out.iter_mut().for_each(|o| *o = 0.0);
    for p in members {
        p.output_into(x, &mut buf)?;
        for (o, b) in out.iter_mut().zip(&buf) {
            *o += b;
        }
    }
    let n = members.len() as f64;
    out.iter_mut().for_each(|o| *o /= n);
    Ok(())
}

/// Member-averaged output fields at `x` and their argmax.
pub fn jgvm_predict(members: &[GvmParams], x: &[f64]) -> Result<(Vec<f64>, usize)> {
    let l = members.first().ok_or(GvmError::EmptyInput)?.output_dim();
    let mut out = vec![0.0; l];
    jgvm_fields(members, x, &mut out)?;
    let class = classify(&out);
    Ok((out, class))
}

/// `n_members` machines sharing one control point, seeded `base_seed + i`.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleConfig {
    pub n_members: usize,
    pub control: ControlParams,
    pub kind: TransferKind,
    pub base_seed: u64,
}

impl EnsembleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_members == 0 {
            return Err(GvmError::InvalidControl("n_members must be >= 1"));
        }
        self.kind.validate()?;
        self.control.validate()
    }

    pub fn member_seed(&self, index: usize) -> u64 {
        self.base_seed.wrapping_add(index as u64)
    }
}

/// Trains member `index` of the ensemble.
pub fn train_member(config: &EnsembleConfig, data: &Dataset, index: usize) -> Result<TrainOutcome> {
    train_seeded(data, &config.control, config.kind, config.member_seed(index))
}

/// Converged members in index order, plus the number dropped.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    pub members: Vec<GvmParams>,
    pub n_failed: usize,
}

impl Ensemble {
    /// Keeps the converged outcomes, in the given order.
    pub fn from_outcomes(outcomes: Vec<TrainOutcome>) -> Result<Self> {
        let total = outcomes.len();
        let members: Vec<GvmParams> = outcomes.into_iter().filter(|o| o.converged).map(|o| o.params).collect();
        if members.is_empty() {
            return Err(GvmError::AllMembersFailed(total));
        }
        Ok(Ensemble { n_failed: total - members.len(), members })
    }
}

/// Trains every member sequentially.
pub fn design_ensemble(config: &EnsembleConfig, data: &Dataset) -> Result<Ensemble> {
    config.validate()?;
    let outcomes = (0..config.n_members).map(|i| train_member(config, data, i)).collect::<Result<Vec<_>>>()?;
    Ensemble::from_outcomes(outcomes)
}

/// How members are scored.
#[derive(Debug, Clone, Copy)]
pub enum Evaluation<'a> {
    /// Curves over `grid` against `goal`; `R_s` is averaged over the grid.
    Regression { goal: GoalFunction, grid: &'a Grid },
    /// Accuracy on `test`; `R_s` is averaged over `rs_inputs`.
    Classification { test: &'a Dataset, rs_inputs: &'a Dataset },
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleReport {
    pub axis_value: f64,
    /// `Πᵢ`: fitting error `‖Πᵢ − g‖` (regression) or test accuracy.
    pub member_metrics: Vec<f64>,
    /// `⟨Π⟩`: average fitting error `⟨Θ⟩` (regression) or mean accuracy.
    pub mean_metric: f64,
    /// `E[Π] ≥ 0`.
    pub design_risk: f64,
    pub avg_rs: f64,
    /// `‖Πᴶ − g‖` (regression) or J-GVM accuracy.
    pub jgvm_metric: f64,
    pub n_converged: usize,
    pub n_failed: usize,
}

impl EnsembleReport {
    /// Report for a control point at which no member converged.
    pub fn failed(axis_value: f64, n_failed: usize) -> Self {
        EnsembleReport {
            axis_value,
            member_metrics: Vec::new(),
            mean_metric: f64::NAN,
            design_risk: f64::NAN,
            avg_rs: f64::NAN,
            jgvm_metric: f64::NAN,
            n_converged: 0,
            n_failed,
        }
    }
}

fn sensitivity_mode(m: usize) -> SensitivityMode {
    if m > FULL_MODE_MAX_INPUTS {
        SensitivityMode::Diagonal
    } else {
        SensitivityMode::Full
    }
}

/// Scores an ensemble.
pub fn evaluate(ensemble: &Ensemble, eval: Evaluation<'_>, axis_value: f64) -> Result<EnsembleReport> {
    let members = &ensemble.members;
    let first = members.first().ok_or(GvmError::EmptyInput)?;
    let mode = sensitivity_mode(first.input_dim());
    let (member_metrics, mean_metric, design_risk, jgvm_metric, rs_inputs): (_, _, _, _, Vec<&[f64]>) = match eval {
        Evaluation::Regression { goal, grid } => {
            let g = grid.goal_values(goal)?;
            let curves = members.iter().map(|m| member_curve(m, grid)).collect::<Result<Vec<_>>>()?;
            let (risk, mean) = design_risk_regression(&curves)?;
            let per_member: Vec<f64> = curves.iter().map(|c| rms_distance(c, &g)).collect();
            let theta = avg_fit_error(&curves, &g)?;
            (per_member, theta, risk, rms_distance(&mean, &g), grid.iter().collect())
        }
        Evaluation::Classification { test, rs_inputs } => {
            let (accs, mean, std) = classification_stats(members, test)?;
            let joint = Jgvm::new(members.clone())?.accuracy(test)?;
            (accs, mean, std, joint, rs_inputs.iter_inputs().collect())
        }
    };
    let mut rs_total = 0.0;
    for m in members {
        rs_total += machine_rs(m, rs_inputs.iter().copied(), mode)?.r_s;
    }
    Ok(EnsembleReport {
        axis_value,
        member_metrics,
        mean_metric,
        design_risk,
        avg_rs: rs_total / members.len() as f64,
        jgvm_metric,
        n_converged: members.len(),
        n_failed: ensemble.n_failed,
    })
}

/// Control parameter swept by [`scan`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScanAxis {
    CBeta,
    /// Separation margin `d` of a margin cost.
    Margin,
    NHidden,
}

impl ScanAxis {
    pub fn name(self) -> &'static str {
        match self {
            ScanAxis::CBeta => "c_beta",
            ScanAxis::Margin => "d",
            ScanAxis::NHidden => "n_hidden",
        }
    }

    pub fn from_name(name: &str) -> Option<ScanAxis> {
        match name {
            "c_beta" => Some(ScanAxis::CBeta),
            "d" => Some(ScanAxis::Margin),
            "n_hidden" => Some(ScanAxis::NHidden),
            _ => None,
        }
    }

    /// `control` with this axis set to `value`.
    pub fn apply(self, control: &ControlParams, value: f64) -> Result<ControlParams> {
        let mut c = control.clone();
        match self {
            ScanAxis::CBeta => c.c_beta = value,
            ScanAxis::Margin => {
                if c.cost == CostSpec::Empirical {
                    return Err(GvmError::InvalidControl("the empirical cost has no margin"));
                }
                c.cost = c.cost.with_margin(value);
            }
            ScanAxis::NHidden => {
                if !(value >= 1.0 && libm::trunc(value) == value) {
                    return Err(GvmError::InvalidControl("n_hidden must be a positive integer"));
                }
                c.n_hidden = value as usize;
            }
        }
        c.validate()?;
        Ok(c)
    }
}

/// Reports along a sweep plus the locations of its extrema.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanResult {
    pub axis: ScanAxis,
    pub reports: Vec<EnsembleReport>,
    /// Index of the best `⟨Π⟩`: lowest fitting error or highest accuracy.
    pub turning_point: Option<usize>,
    /// Index of the lowest design risk.
    pub min_design_risk: Option<usize>,
    /// Index of the lowest `⟨R_s⟩`.
    pub min_sensitivity: Option<usize>,
}

/// Index of the extremal finite value; ties go to the first.
pub fn arg_extreme(values: impl IntoIterator<Item = f64>, maximize: bool) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (k, v) in values.into_iter().enumerate() {
        if !v.is_finite() {
            continue;
        }
        let better = match best {
            None => true,
            Some((_, b)) => (maximize && v > b) || (!maximize && v < b),
        };
        if better {
            best = Some((k, v));
        }
    }
    best.map(|(k, _)| k)
}

impl ScanResult {
    pub fn new(axis: ScanAxis, reports: Vec<EnsembleReport>, maximize_metric: bool) -> Self {
        let turning_point = arg_extreme(reports.iter().map(|r| r.mean_metric), maximize_metric);
        let min_design_risk = arg_extreme(reports.iter().map(|r| r.design_risk), false);
        let min_sensitivity = arg_extreme(reports.iter().map(|r| r.avg_rs), false);
        ScanResult { axis, reports, turning_point, min_design_risk, min_sensitivity }
    }
}

/// Trains and scores one ensemble per axis value. A point where every member
/// fails yields [`EnsembleReport::failed`] rather than aborting the sweep.
pub fn scan(
    axis: ScanAxis,
    values: &[f64],
    config: &EnsembleConfig,
    data: &Dataset,
    eval: Evaluation<'_>,
) -> Result<ScanResult> {
    if values.is_empty() {
        return Err(GvmError::EmptyInput);
    }
    let mut reports = Vec::with_capacity(values.len());
    for &v in values {
        let point = EnsembleConfig { control: axis.apply(&config.control, v)?, ..config.clone() };
        reports.push(match design_ensemble(&point, data) {
            Ok(ensemble) => evaluate(&ensemble, eval, v)?,
            Err(GvmError::AllMembersFailed(n)) => EnsembleReport::failed(v, n),
            Err(e) => return Err(e),
        });
    }
    let maximize = matches!(eval, Evaluation::Classification { .. });
    Ok(ScanResult::new(axis, reports, maximize))
}
