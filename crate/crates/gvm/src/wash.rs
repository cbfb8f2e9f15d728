//! Ranking training samples by their worst output margin.
//!
//! `score(μ) = min_l s_lᵘ h_lᵘ` with `s_lᵘ = +1` for the labelled class and
//! `−1` otherwise. Low scores flag samples the machine(s) could not separate.

use gvm_core::ensemble::Jgvm;
use gvm_core::{Dataset, GvmError, GvmParams};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct WashEntry {
    pub index: usize,
    pub score: f64,
    pub label: usize,
    pub fields: Vec<f64>,
}

/// Entries sorted by ascending score; indices are unique.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct WashReport {
    pub entries: Vec<WashEntry>,
}

pub fn margin_score(fields: &[f64], label: usize) -> f64 {
    fields.iter().enumerate().map(|(l, &h)| if l == label { h } else { -h }).fold(f64::INFINITY, f64::min)
}

/// Scores every training sample with the member-averaged fields and returns
/// the `top_k` lowest. Ties keep sample order.
pub fn wash(members: &[GvmParams], train: &Dataset, top_k: usize) -> Result<WashReport> {
    let labels = train.labels().ok_or_else(|| Error::Data("washing needs a labelled training set".into()))?;
    if top_k > train.len() {
        return Err(GvmError::TooManyRequested { requested: top_k, available: train.len() }.into());
    }
    let joint = Jgvm::new(members.to_vec())?;
    let mut entries = Vec::with_capacity(train.len());
    for (index, (x, &label)) in train.iter_inputs().zip(labels).enumerate() {
        let (fields, _) = joint.predict(x)?;
        entries.push(WashEntry { index, score: margin_score(&fields, label), label, fields });
    }
    entries.sort_by(|a, b| a.score.total_cmp(&b.score).then(a.index.cmp(&b.index)));
    entries.truncate(top_k);
    Ok(WashReport { entries })
}

/// Fraction of `flipped` found among the report's indices.
pub fn recall(report: &WashReport, flipped: &[usize]) -> f64 {
    if flipped.is_empty() {
        return 1.0;
    }
    let found = flipped.iter().filter(|mu| report.entries.iter().any(|e| e.index == **mu)).count();
    found as f64 / flipped.len() as f64
}
