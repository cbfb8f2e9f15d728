//! Experiment settings. A TOML file holds one experiment; command-line flags
//! override the file key by key. Every field is optional and falls back to
//! the defaults of the chosen experiment.

use std::path::{Path, PathBuf};

use clap::Args;
use gvm_core::{ControlParams, CostSpec, GoalFunction, TransferKind};
use serde::Deserialize;

use crate::error::{Error, Result};

/// Environment variable naming the default data directory.
pub const DATA_DIR_ENV: &str = "GVM_DATA_DIR";

#[derive(Debug, Clone, Default, PartialEq, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    /// Base seed; member i uses seed + i
    #[arg(long)]
    pub seed: Option<u64>,
    /// gauss, sigmoid, polynomial or relu
    #[arg(long)]
    pub transfer: Option<String>,
    /// Exponent of the polynomial transfer function
    #[arg(long)]
    pub exponent: Option<u32>,
    #[arg(long = "hidden")]
    pub n_hidden: Option<usize>,
    #[arg(long)]
    pub c_w: Option<f64>,
    #[arg(long)]
    pub c_beta: Option<f64>,
    #[arg(long)]
    pub c_b: Option<f64>,
    /// fe, f1, f2, f3 or f2bar
    #[arg(long)]
    pub cost: Option<String>,
    /// Separation margin (lower margin for f3)
    #[arg(long)]
    pub d: Option<f64>,
    /// Upper margin for f3
    #[arg(long)]
    pub d2: Option<f64>,
    /// Stop once the cost is at or below this value; 0 trains for max-steps
    #[arg(long)]
    pub stop_cost: Option<f64>,
    #[arg(long)]
    pub max_steps: Option<u64>,
    #[arg(long)]
    pub proposal_fraction: Option<f64>,
    /// Spread proposal sizes log-uniformly over this many decades below the maximum
    #[arg(long)]
    pub proposal_decades: Option<f64>,

    /// sin, sinc, hermite5, hermite7, square_wave or sinc2d
    #[arg(long)]
    pub goal: Option<String>,
    /// Half width of the input interval
    #[arg(long)]
    pub c_x: Option<f64>,
    /// Number of training samples for generated sets
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub noise_sigma: Option<f64>,
    /// Points of the evaluation grid per dimension
    #[arg(long)]
    pub grid_points: Option<usize>,

    /// regression, wisconsin or mnist
    #[arg(long)]
    pub dataset: Option<String>,
    #[arg(long)]
    pub data_dir: Option<PathBuf>,
    /// Leading fraction of the MNIST training file to use
    #[arg(long)]
    pub fraction: Option<f64>,
    /// Leading fraction of the MNIST test file to use
    #[arg(long)]
    pub test_fraction: Option<f64>,
    /// none, shift, smooth or noise
    #[arg(long)]
    pub pretreatment: Option<String>,
    /// Path of the Wisconsin table
    #[arg(long)]
    pub wisconsin: Option<PathBuf>,

    #[arg(long)]
    pub members: Option<usize>,
    /// c_beta, d or n_hidden
    #[arg(long)]
    pub axis: Option<String>,
    #[arg(long, value_delimiter = ',')]
    pub values: Option<Vec<f64>>,
    /// Hidden sizes tried in turn until one reaches the stop cost
    #[arg(long, value_delimiter = ',')]
    pub grow: Option<Vec<usize>>,

    #[arg(long)]
    pub top_k: Option<usize>,
    /// Number of training labels to corrupt before training
    #[arg(long)]
    pub flip: Option<usize>,
    #[arg(long)]
    pub threads: Option<usize>,
}

macro_rules! overlay {
    ($base:ident, $top:ident, $($field:ident),* $(,)?) => {
        Settings { $($field: $top.$field.or($base.$field)),* }
    };
}

impl Settings {
    pub fn from_toml(text: &str) -> Result<Settings> {
        toml::from_str(text).map_err(|e| Error::Config(format!("config file: {e}")))
    }

    pub fn load(path: &Path) -> Result<Settings> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Settings::from_toml(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    /// Values set in `top` win over values in `self`.
    pub fn overlay(self, top: Settings) -> Settings {
        let base = self;
        overlay!(
            base,
            top,
            seed,
            transfer,
            exponent,
            n_hidden,
            c_w,
            c_beta,
            c_b,
            cost,
            d,
            d2,
            stop_cost,
            max_steps,
            proposal_fraction,
            proposal_decades,
            goal,
            c_x,
            samples,
            noise_sigma,
            grid_points,
            dataset,
            data_dir,
            fraction,
            test_fraction,
            pretreatment,
            wisconsin,
            members,
            axis,
            values,
            grow,
            top_k,
            flip,
            threads,
        )
    }

    pub fn seed_or(&self, default: u64) -> u64 {
        self.seed.unwrap_or(default)
    }

    pub fn transfer_or(&self, default: TransferKind) -> Result<TransferKind> {
        let kind = match self.transfer.as_deref() {
            None => default,
            Some("gauss") => TransferKind::Gauss,
            Some("sigmoid") => TransferKind::Sigmoid,
            Some("relu") => TransferKind::Relu,
            Some("polynomial") => TransferKind::Polynomial(self.exponent.unwrap_or(match default {
                TransferKind::Polynomial(n) => n,
                _ => 2,
            })),
            Some(other) => return Err(Error::Config(format!("unknown transfer function {other:?}"))),
        };
        match (kind, self.exponent) {
            (TransferKind::Polynomial(_), Some(n)) => Ok(TransferKind::Polynomial(n)),
            _ => Ok(kind),
        }
    }

    /// The cost named by `cost` (or `default`), with `d`/`d2` applied.
    pub fn cost_or(&self, default: CostSpec) -> Result<CostSpec> {
        let base_d = default.margin().unwrap_or(1.0);
        let d = self.d.unwrap_or(base_d);
        let spec = match self.cost.as_deref() {
            None => default.with_margin(d),
            Some("fe") => CostSpec::Empirical,
            Some("f1") => CostSpec::F1 { d },
            Some("f2") => CostSpec::F2 { d },
            Some("f2bar") => CostSpec::F2Bar { d },
            Some("f3") => CostSpec::F3 { d1: d, d2: d },
            Some(other) => return Err(Error::Config(format!("unknown cost {other:?}"))),
        };
        let spec = match spec {
            CostSpec::F3 { d1, d2 } => CostSpec::F3 {
                d1,
                d2: self.d2.unwrap_or(match default {
                    CostSpec::F3 { d1: b1, d2: b2 } => d1 + (b2 - b1),
                    _ => d2,
                }),
            },
            other => other,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// `base` with every control-level override applied.
    pub fn control_from(&self, base: ControlParams) -> Result<ControlParams> {
        let mut c = base;
        if let Some(v) = self.c_w {
            c.c_w = v;
        }
        if let Some(v) = self.c_beta {
            c.c_beta = v;
        }
        if let Some(v) = self.c_b {
            c.c_b = v;
        }
        if let Some(v) = self.n_hidden {
            c.n_hidden = v;
        }
        if let Some(v) = self.stop_cost {
            c.stop_cost = v;
        }
        if let Some(v) = self.max_steps {
            c.max_steps = v;
        }
        if let Some(v) = self.proposal_fraction {
            c.proposal_fraction = v;
        }
        if let Some(v) = self.proposal_decades {
            c.proposal_decades = v;
        }
        c.cost = self.cost_or(c.cost)?;
        c.validate()?;
        Ok(c)
    }

    pub fn goal_or(&self, default: GoalFunction) -> Result<GoalFunction> {
        match self.goal.as_deref() {
            None => Ok(default),
            Some(name) => {
                GoalFunction::from_name(name).ok_or_else(|| Error::Config(format!("unknown goal function {name:?}")))
            }
        }
    }

    /// Flag or file value, then the environment, then `./data`.
    pub fn data_dir(&self) -> PathBuf {
        self.data_dir
            .clone()
            .or_else(|| std::env::var_os(DATA_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("data"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file_values() {
        let file = Settings::from_toml("c_beta = 0.5\nmembers = 20\ngoal = \"sin\"\nvalues = [0.1, 0.2]\n").unwrap();
        let flags = Settings { c_beta: Some(2.0), seed: Some(9), ..Settings::default() };
        let s = file.overlay(flags);
        assert_eq!(s.c_beta, Some(2.0));
        assert_eq!(s.members, Some(20));
        assert_eq!(s.seed, Some(9));
        assert_eq!(s.values, Some(vec![0.1, 0.2]));
        assert_eq!(s.goal_or(GoalFunction::Sinc).unwrap(), GoalFunction::Sin);
    }

    #[test]
    fn unknown_keys_and_names_are_config_errors() {
        assert_eq!(Settings::from_toml("c_gamma = 1.0").unwrap_err().exit_code(), 2);
        let bad = Settings { transfer: Some("step".into()), ..Settings::default() };
        assert_eq!(bad.transfer_or(TransferKind::Gauss).unwrap_err().exit_code(), 2);
        let bad = Settings { cost: Some("f9".into()), ..Settings::default() };
        assert!(bad.cost_or(CostSpec::Empirical).is_err());
        let bad = Settings { c_w: Some(-1.0), ..Settings::default() };
        assert_eq!(
            bad.control_from(ControlParams::new(1.0, 1.0, 1.0, 1, CostSpec::Empirical)).unwrap_err().exit_code(),
            2
        );
    }

    #[test]
    fn resolution_against_defaults() {
        let s = Settings { transfer: Some("polynomial".into()), exponent: Some(6), ..Settings::default() };
        assert_eq!(s.transfer_or(TransferKind::Gauss).unwrap(), TransferKind::Polynomial(6));
        assert_eq!(Settings::default().transfer_or(TransferKind::Sigmoid).unwrap(), TransferKind::Sigmoid);

        let s = Settings { d: Some(8.0), ..Settings::default() };
        assert_eq!(s.cost_or(CostSpec::F1 { d: 16.0 }).unwrap(), CostSpec::F1 { d: 8.0 });
        let s = Settings { cost: Some("f3".into()), d: Some(2.0), d2: Some(5.0), ..Settings::default() };
        assert_eq!(s.cost_or(CostSpec::F2 { d: 30.0 }).unwrap(), CostSpec::F3 { d1: 2.0, d2: 5.0 });

        let base = ControlParams::new(1.0, 1.0, 10.0, 200, CostSpec::F1 { d: 16.0 });
        let s = Settings { n_hidden: Some(500), max_steps: Some(77), ..Settings::default() };
        let c = s.control_from(base.clone()).unwrap();
        assert_eq!((c.n_hidden, c.max_steps, c.c_b), (500, 77, 10.0));
        assert_eq!(Settings::default().control_from(base.clone()).unwrap(), base);
    }

    #[test]
    fn explicit_data_dir_wins() {
        let s = Settings { data_dir: Some("/tmp/x".into()), ..Settings::default() };
        assert_eq!(s.data_dir(), PathBuf::from("/tmp/x"));
    }
}
