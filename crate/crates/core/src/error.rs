use alloc::string::String;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GvmError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid control parameters: {0}")]
    InvalidControl(&'static str),
    #[error("invalid dataset: {0}")]
    InvalidDataset(String),
    #[error("empty input")]
    EmptyInput,
    #[error("index {index} out of range (< {bound})")]
    IndexOutOfRange { index: usize, bound: usize },
    #[error("cost {cost} is not defined for {task} data")]
    CostMismatch { cost: &'static str, task: &'static str },
    #[error("full sensitivity mode needs M <= {limit}, got M = {m}")]
    SensitivityTooCostly { m: usize, limit: usize },
    #[error("goal function {0} has no usable second derivative")]
    NonSmoothGoal(&'static str),
    #[error("dataset is not made of 28x28 images (M = {0})")]
    NotImage(usize),
    #[error("no hidden-layer size in the growth schedule reached the stop cost")]
    ScheduleExhausted,
    #[error("none of the {0} ensemble members converged")]
    AllMembersFailed(usize),
    #[error("requested {requested} items but only {available} exist")]
    TooManyRequested { requested: usize, available: usize },
}
