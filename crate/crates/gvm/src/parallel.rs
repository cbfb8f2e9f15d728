//! Threaded ensemble training. Members train concurrently; results are
//! collected by member index, so output never depends on completion order.

use gvm_core::ensemble::{
    evaluate, train_member, Ensemble, EnsembleConfig, EnsembleReport, Evaluation, ScanAxis, ScanResult,
};
use gvm_core::trainer::TrainOutcome;
use gvm_core::{Dataset, GvmError};
use rayon::prelude::*;

use crate::error::Result;

/// Trains every member of `config` on `data`, in parallel.
pub fn train_all(config: &EnsembleConfig, data: &Dataset) -> Result<Vec<TrainOutcome>> {
    config.validate()?;
    let outcomes: Vec<_> = (0..config.n_members)
        .into_par_iter()
        .map(|i| train_member(config, data, i))
        .collect::<std::result::Result<_, GvmError>>()?;
    Ok(outcomes)
}

/// Parallel counterpart of `gvm_core::ensemble::design_ensemble`.
pub fn design_ensemble(config: &EnsembleConfig, data: &Dataset) -> Result<Ensemble> {
    let outcomes = train_all(config, data)?;
    let ensemble = Ensemble::from_outcomes(outcomes)?;
    if ensemble.n_failed > 0 {
        log::warn!(
            "{} of {} members did not reach the stop cost and were dropped",
            ensemble.n_failed,
            config.n_members
        );
    }
    Ok(ensemble)
}

/// Parallel counterpart of `gvm_core::ensemble::scan`.
pub fn scan(
    axis: ScanAxis,
    values: &[f64],
    config: &EnsembleConfig,
    data: &Dataset,
    eval: Evaluation<'_>,
) -> Result<ScanResult> {
    if values.is_empty() {
        return Err(GvmError::EmptyInput.into());
    }
    let mut reports = Vec::with_capacity(values.len());
    for &v in values {
        let point = EnsembleConfig { control: axis.apply(&config.control, v)?, ..config.clone() };
        let report = match design_ensemble(&point, data) {
            Ok(ensemble) => evaluate(&ensemble, eval, v)?,
            Err(crate::Error::Core(GvmError::AllMembersFailed(n))) => {
                log::warn!("{}={v}: no member converged", axis.name());
                EnsembleReport::failed(v, n)
            }
            Err(e) => return Err(e),
        };
        log::info!(
            "{}={v}: mean {:.6e} design risk {:.6e} converged {}",
            axis.name(),
            report.mean_metric,
            report.design_risk,
            report.n_converged
        );
        reports.push(report);
    }
    let maximize = matches!(eval, Evaluation::Classification { .. });
    Ok(ScanResult::new(axis, reports, maximize))
}
