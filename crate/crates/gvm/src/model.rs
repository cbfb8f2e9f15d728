//! JSON model files. Floats are written in shortest round-trip form, so a
//! reload reproduces every parameter bit-exactly.

use std::path::Path;

use gvm_core::{ControlParams, CostSpec, Dataset, GvmParams, TransferKind};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TransferRecord {
    Gauss,
    Sigmoid,
    Polynomial { exponent: u32 },
    Relu,
}

impl From<TransferKind> for TransferRecord {
    fn from(k: TransferKind) -> Self {
        match k {
            TransferKind::Gauss => TransferRecord::Gauss,
            TransferKind::Sigmoid => TransferRecord::Sigmoid,
            TransferKind::Polynomial(n) => TransferRecord::Polynomial { exponent: n },
            TransferKind::Relu => TransferRecord::Relu,
        }
    }
}

impl From<&TransferRecord> for TransferKind {
    fn from(r: &TransferRecord) -> Self {
        match *r {
            TransferRecord::Gauss => TransferKind::Gauss,
            TransferRecord::Sigmoid => TransferKind::Sigmoid,
            TransferRecord::Polynomial { exponent } => TransferKind::Polynomial(exponent),
            TransferRecord::Relu => TransferKind::Relu,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CostRecord {
    Empirical,
    F1 { d: f64 },
    F2 { d: f64 },
    F3 { d1: f64, d2: f64 },
    F2Bar { d: f64 },
}

impl From<CostSpec> for CostRecord {
    fn from(c: CostSpec) -> Self {
        match c {
            CostSpec::Empirical => CostRecord::Empirical,
            CostSpec::F1 { d } => CostRecord::F1 { d },
            CostSpec::F2 { d } => CostRecord::F2 { d },
            CostSpec::F3 { d1, d2 } => CostRecord::F3 { d1, d2 },
            CostSpec::F2Bar { d } => CostRecord::F2Bar { d },
        }
    }
}

impl From<&CostRecord> for CostSpec {
    fn from(c: &CostRecord) -> Self {
        match *c {
            CostRecord::Empirical => CostSpec::Empirical,
            CostRecord::F1 { d } => CostSpec::F1 { d },
            CostRecord::F2 { d } => CostSpec::F2 { d },
            CostRecord::F3 { d1, d2 } => CostSpec::F3 { d1, d2 },
            CostRecord::F2Bar { d } => CostSpec::F2Bar { d },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlRecord {
    pub c_w: f64,
    pub c_beta: f64,
    pub c_b: f64,
    pub n_hidden: usize,
    pub cost: CostRecord,
    pub stop_cost: f64,
    pub max_steps: u64,
    pub proposal_fraction: f64,
    pub proposal_decades: f64,
}

impl From<&ControlParams> for ControlRecord {
    fn from(c: &ControlParams) -> Self {
        ControlRecord {
            c_w: c.c_w,
            c_beta: c.c_beta,
            c_b: c.c_b,
            n_hidden: c.n_hidden,
            cost: c.cost.into(),
            stop_cost: c.stop_cost,
            max_steps: c.max_steps,
            proposal_fraction: c.proposal_fraction,
            proposal_decades: c.proposal_decades,
        }
    }
}

impl ControlRecord {
    pub fn to_control(&self) -> ControlParams {
        let mut c = ControlParams::new(self.c_w, self.c_beta, self.c_b, self.n_hidden, (&self.cost).into())
            .with_stop(self.stop_cost, self.max_steps);
        c.proposal_fraction = self.proposal_fraction;
        c.proposal_decades = self.proposal_decades;
        c
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingRecord {
    pub seed: u64,
    pub steps: u64,
    pub accepted: u64,
    pub final_cost: f64,
    pub converged: bool,
    /// SHA-256 of the training inputs and targets.
    pub dataset_digest: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub version: u32,
    pub input_dim: usize,
    pub hidden_dim: usize,
    pub output_dim: usize,
    pub transfer: TransferRecord,
    pub control: Option<ControlRecord>,
    /// `N × M`, row-major.
    pub hidden_weights: Vec<f64>,
    pub betas: Vec<f64>,
    pub biases: Vec<f64>,
    /// `L × N`, row-major, each `±1`.
    pub output_weights: Vec<i8>,
    pub training: Option<TrainingRecord>,
}

impl ModelFile {
    pub fn from_params(params: &GvmParams) -> Self {
        ModelFile {
            version: FORMAT_VERSION,
            input_dim: params.input_dim(),
            hidden_dim: params.hidden_dim(),
            output_dim: params.output_dim(),
            transfer: params.transfer().into(),
            control: None,
            hidden_weights: params.hidden_weights().to_vec(),
            betas: params.betas().to_vec(),
            biases: params.biases().to_vec(),
            output_weights: params.output_weights().to_vec(),
            training: None,
        }
    }

    pub fn with_control(mut self, control: &ControlParams) -> Self {
        self.control = Some(control.into());
        self
    }

    pub fn with_training(mut self, training: TrainingRecord) -> Self {
        self.training = Some(training);
        self
    }

    pub fn to_params(&self) -> Result<GvmParams> {
        if self.hidden_weights.len() != self.hidden_dim * self.input_dim
            || self.betas.len() != self.hidden_dim
            || self.output_weights.len() != self.output_dim * self.hidden_dim
        {
            return Err(Error::Data("model file: array sizes disagree with dimensions".into()));
        }
        Ok(GvmParams::new(
            (&self.transfer).into(),
            self.input_dim,
            self.output_dim,
            self.hidden_weights.clone(),
            self.betas.clone(),
            self.biases.clone(),
            self.output_weights.clone(),
        )?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model files always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Header {
            version: u32,
        }
        let header: Header = serde_json::from_str(text).map_err(|e| Error::Data(format!("corrupt model file: {e}")))?;
        if header.version != FORMAT_VERSION {
            return Err(Error::Data(format!(
                "model file version {} is not supported (expected {FORMAT_VERSION})",
                header.version
            )));
        }
        let model: ModelFile =
            serde_json::from_str(text).map_err(|e| Error::Data(format!("corrupt model file: {e}")))?;
        model.to_params()?;
        Ok(model)
    }
}

pub fn save_model(path: &Path, model: &ModelFile) -> Result<()> {
    std::fs::write(path, model.to_json()).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: &Path) -> Result<ModelFile> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    ModelFile::from_json(&text)
}

/// Several models in one JSON array, for ensembles.
pub fn save_models(path: &Path, models: &[ModelFile]) -> Result<()> {
    let text = serde_json::to_string(models).expect("model files always serialize");
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Reads either a single model or an array of models.
pub fn load_models(path: &Path) -> Result<Vec<ModelFile>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| Error::Data(format!("corrupt model file: {e}")))?;
    match value {
        serde_json::Value::Array(items) => items.into_iter().map(|v| ModelFile::from_json(&v.to_string())).collect(),
        _ => Ok(vec![ModelFile::from_json(&text)?]),
    }
}

/// Hex SHA-256 over the dimensions, inputs and targets of `data`.
pub fn dataset_digest(data: &Dataset) -> String {
    let mut h = Sha256::new();
    h.update((data.input_dim() as u64).to_le_bytes());
    h.update((data.output_dim() as u64).to_le_bytes());
    for v in data.inputs() {
        h.update(v.to_le_bytes());
    }
    match data.labels() {
        Some(labels) => labels.iter().for_each(|&l| h.update((l as u64).to_le_bytes())),
        None => {
            for mu in 0..data.len() {
                for v in data.target(mu).unwrap_or(&[]) {
                    h.update(v.to_le_bytes());
                }
            }
        }
    }
    format!("{:x}", h.finalize())
}
