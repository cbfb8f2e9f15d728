//! Machine parameters, transfer functions and the forward map.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cost::CostSpec;
use crate::math;
use crate::{GvmError, Result};

/// Hidden-layer transfer function. One kind is used for every hidden neuron.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransferKind {
    /// `e^{-z²}`
    Gauss,
    /// `tanh z`
    Sigmoid,
    /// `zⁿ`, `n ≥ 1`
    Polynomial(u32),
    /// `max(0, z)`; kept as a baseline, its curvature vanishes almost everywhere.
    Relu,
}

/// Value and analytic second derivative of a transfer function at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferValue {
    pub value: f64,
    pub second_derivative: f64,
    /// Set only for ReLU at `z == 0`, where `f″` does not exist.
    pub degenerate: bool,
}

impl TransferKind {
    pub fn validate(self) -> Result<()> {
        match self {
            TransferKind::Polynomial(0) => Err(GvmError::InvalidControl("polynomial exponent must be >= 1")),
            _ => Ok(()),
        }
    }

    #[inline]
    pub fn value(self, z: f64) -> f64 {
        match self {
            TransferKind::Gauss => math::exp(-z * z),
            TransferKind::Sigmoid => math::tanh(z),
            TransferKind::Polynomial(n) => powi(z, n),
            TransferKind::Relu => {
                if z > 0.0 {
                    z
                } else {
                    0.0
                }
            }
        }
    }

    #[inline]
    pub fn second_derivative(self, z: f64) -> f64 {
        match self {
            TransferKind::Gauss => (4.0 * z * z - 2.0) * math::exp(-z * z),
            TransferKind::Sigmoid => {
                let t = math::tanh(z);
                -2.0 * t * (1.0 - t * t)
            }
            TransferKind::Polynomial(n) => {
                if n < 2 {
                    0.0
                } else {
                    (n as f64) * ((n - 1) as f64) * powi(z, n - 2)
                }
            }
            TransferKind::Relu => 0.0,
        }
    }

    pub fn eval(self, z: f64) -> TransferValue {
        TransferValue {
            value: self.value(z),
            second_derivative: self.second_derivative(z),
            degenerate: matches!(self, TransferKind::Relu) && z == 0.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            TransferKind::Gauss => "gauss",
            TransferKind::Sigmoid => "sigmoid",
            TransferKind::Polynomial(_) => "polynomial",
            TransferKind::Relu => "relu",
        }
    }
}

/// `f(z)` and `f″(z)` for the given transfer kind.
pub fn transfer_eval(kind: TransferKind, z: f64) -> TransferValue {
    kind.eval(z)
}

#[inline]
fn powi(z: f64, n: u32) -> f64 {
    let mut acc = 1.0;
    let mut base = z;
    let mut e = n;
    while e > 0 {
        if e & 1 == 1 {
            acc *= base;
        }
        base *= base;
        e >>= 1;
    }
    acc
}

/// Which hidden parameter classes the Monte Carlo walk may change.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParamClasses {
    pub weights: bool,
    pub betas: bool,
    pub biases: bool,
}

impl Default for ParamClasses {
    fn default() -> Self {
        ParamClasses { weights: true, betas: true, biases: true }
    }
}

/// The knobs that define a family of statistically identical machines.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlParams {
    /// Hidden weights live in `[-c_w, c_w]`.
    pub c_w: f64,
    /// Transfer coefficients live in `[-c_beta, c_beta]`.
    pub c_beta: f64,
    /// Biases live in `[-c_b, c_b]`.
    pub c_b: f64,
    pub n_hidden: usize,
    pub cost: CostSpec,
    /// Training stops once the cost is `<= stop_cost` (F0). Zero leaves only
    /// the step budget, and exhausting it then counts as completion.
    pub stop_cost: f64,
    /// ... or after this many Monte Carlo steps (t0).
    pub max_steps: u64,
    /// Proposals are drawn uniformly from `[-2δc, 2δc]` for a class bound `c`.
    pub proposal_fraction: f64,
    pub proposal_decades: f64,
    pub classes: ParamClasses,
}

impl ControlParams {
    pub const DEFAULT_PROPOSAL_FRACTION: f64 = 0.05;
    pub const DEFAULT_MAX_STEPS: u64 = 10_000_000;

    pub fn new(c_w: f64, c_beta: f64, c_b: f64, n_hidden: usize, cost: CostSpec) -> Self {
        ControlParams {
            c_w,
            c_beta,
            c_b,
            n_hidden,
            cost,
            stop_cost: 0.0,
            max_steps: Self::DEFAULT_MAX_STEPS,
            proposal_fraction: Self::DEFAULT_PROPOSAL_FRACTION,
            proposal_decades: 0.0,
            classes: ParamClasses::default(),
        }
    }

    pub fn with_stop(mut self, stop_cost: f64, max_steps: u64) -> Self {
        self.stop_cost = stop_cost;
        self.max_steps = max_steps;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c_w > 0.0 && self.c_w.is_finite()) {
            return Err(GvmError::InvalidControl("c_w must be positive and finite"));
        }
        if !(self.c_beta > 0.0 && self.c_beta.is_finite()) {
            return Err(GvmError::InvalidControl("c_beta must be positive and finite"));
        }
        if !(self.c_b >= 0.0 && self.c_b.is_finite()) {
            return Err(GvmError::InvalidControl("c_b must be non-negative and finite"));
        }
        if self.n_hidden == 0 {
            return Err(GvmError::InvalidControl("n_hidden must be >= 1"));
        }
        if !(self.stop_cost >= 0.0) {
            return Err(GvmError::InvalidControl("stop cost must be >= 0"));
        }
        if self.max_steps == 0 {
            return Err(GvmError::InvalidControl("max_steps must be >= 1"));
        }
        if !(self.proposal_fraction > 0.0 && self.proposal_fraction <= 1.0) {
            return Err(GvmError::InvalidControl("proposal fraction must lie in (0, 1]"));
        }
        self.cost.validate()
    }
}

/// All parameters of one machine.
///
/// Hidden weights are stored row-major (`N × M`), output weights row-major
/// (`L × N`).
#[derive(Debug, Clone, PartialEq)]
pub struct GvmParams {
    m: usize,
    n: usize,
    l: usize,
    transfer: TransferKind,
    hidden_weights: Vec<f64>,
    betas: Vec<f64>,
    biases: Vec<f64>,
    output_weights: Vec<i8>,
}

/// Intermediate and final fields of one forward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardPass {
    pub hidden_fields: Vec<f64>,
    pub hidden_outputs: Vec<f64>,
    pub output_fields: Vec<f64>,
}

impl GvmParams {
    pub fn new(
        transfer: TransferKind,
        m: usize,
        l: usize,
        hidden_weights: Vec<f64>,
        betas: Vec<f64>,
        biases: Vec<f64>,
        output_weights: Vec<i8>,
    ) -> Result<Self> {
        transfer.validate()?;
        let n = betas.len();
        if n == 0 || m == 0 || l == 0 {
            return Err(GvmError::EmptyInput);
        }
        check_len(biases.len(), n)?;
        check_len(hidden_weights.len(), n * m)?;
        check_len(output_weights.len(), l * n)?;
        if output_weights.iter().any(|&w| w != 1 && w != -1) {
            return Err(GvmError::InvalidControl("output weights must be +1 or -1"));
        }
        Ok(GvmParams { m, n, l, transfer, hidden_weights, betas, biases, output_weights })
    }

    pub fn input_dim(&self) -> usize {
        self.m
    }

    pub fn hidden_dim(&self) -> usize {
        self.n
    }

    pub fn output_dim(&self) -> usize {
        self.l
    }

    pub fn transfer(&self) -> TransferKind {
        self.transfer
    }

    pub fn hidden_weights(&self) -> &[f64] {
        &self.hidden_weights
    }

    pub fn weight_row(&self, i: usize) -> &[f64] {
        &self.hidden_weights[i * self.m..(i + 1) * self.m]
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.hidden_weights[i * self.m + j]
    }

    pub fn betas(&self) -> &[f64] {
        &self.betas
    }

    pub fn biases(&self) -> &[f64] {
        &self.biases
    }

    pub fn output_weights(&self) -> &[i8] {
        &self.output_weights
    }

    #[inline]
    pub fn output_weight(&self, l: usize, i: usize) -> f64 {
        self.output_weights[l * self.n + i] as f64
    }

    pub(crate) fn set_weight(&mut self, i: usize, j: usize, value: f64) {
        self.hidden_weights[i * self.m + j] = value;
    }

    pub(crate) fn set_beta(&mut self, i: usize, value: f64) {
        self.betas[i] = value;
    }

    pub(crate) fn set_bias(&mut self, i: usize, value: f64) {
        self.biases[i] = value;
    }

    /// Local field `h̄ᵢ = Σⱼ w̄ᵢⱼ xⱼ − bᵢ` of hidden neuron `i`, without `βᵢ`.
    #[inline]
    pub fn hidden_field(&self, i: usize, x: &[f64]) -> f64 {
        dot(self.weight_row(i), x) - self.biases[i]
    }

    pub fn forward(&self, x: &[f64]) -> Result<ForwardPass> {
        check_len(x.len(), self.m)?;
        let hidden_fields: Vec<f64> = (0..self.n).map(|i| self.hidden_field(i, x)).collect();
        let hidden_outputs: Vec<f64> =
            hidden_fields.iter().zip(&self.betas).map(|(&h, &beta)| self.transfer.value(beta * h)).collect();
        let mut output_fields = vec![0.0; self.l];
        for (l, out) in output_fields.iter_mut().enumerate() {
            let row = &self.output_weights[l * self.n..(l + 1) * self.n];
            *out = row.iter().zip(&hidden_outputs).map(|(&w, &y)| w as f64 * y).sum();
        }
        Ok(ForwardPass { hidden_fields, hidden_outputs, output_fields })
    }

    /// Output fields only, written into `out` (length `L`).
    pub fn output_into(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        check_len(x.len(), self.m)?;
        check_len(out.len(), self.l)?;
        out.fill(0.0);
        for i in 0..self.n {
            let y = self.transfer.value(self.betas[i] * self.hidden_field(i, x));
            for (l, o) in out.iter_mut().enumerate() {
                *o += self.output_weights[l * self.n + i] as f64 * y;
            }
        }
        Ok(())
    }

    pub fn output(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.l];
        self.output_into(x, &mut out)?;
        Ok(out)
    }

    /// Whether every hidden parameter lies inside the bounds of `control`.
    pub fn within_bounds(&self, control: &ControlParams) -> bool {
        self.hidden_weights.iter().all(|w| w.abs() <= control.c_w)
            && self.betas.iter().all(|b| b.abs() <= control.c_beta)
            && self.biases.iter().all(|b| b.abs() <= control.c_b)
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn check_len(found: usize, expected: usize) -> Result<()> {
    if found == expected {
        Ok(())
    } else {
        Err(GvmError::DimensionMismatch { expected, found })
    }
}

/// Draws a fresh machine: hidden parameters uniform in their ranges, output
/// weights fair `±1`. Deterministic in `seed`.
pub fn init_random(
    control: &ControlParams,
    m: usize,
    l: usize,
    transfer: TransferKind,
    seed: u64,
) -> Result<GvmParams> {
    for bound in [control.c_w, control.c_beta, control.c_b] {
        if !(bound >= 0.0 && bound.is_finite()) {
            return Err(GvmError::InvalidControl("parameter bounds must be finite and >= 0"));
        }
    }
    if control.n_hidden == 0 {
        return Err(GvmError::InvalidControl("n_hidden must be >= 1"));
    }
    let n = control.n_hidden;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = |c: f64| if c == 0.0 { 0.0 } else { rng.random_range(-c..=c) };
    let hidden_weights = (0..n * m).map(|_| draw(control.c_w)).collect();
    let betas = (0..n).map(|_| draw(control.c_beta)).collect();
    let biases = (0..n).map(|_| draw(control.c_b)).collect();
    let output_weights = (0..l * n).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect();
    GvmParams::new(transfer, m, l, hidden_weights, betas, biases, output_weights)
}

/// Index of the largest output field; ties go to the lowest index.
pub fn classify(output_fields: &[f64]) -> usize {
    let mut best = 0;
    for (l, &h) in output_fields.iter().enumerate().skip(1) {
        if h > output_fields[best] {
            best = l;
        }
    }
    best
}

/// Training or evaluation targets.
#[derive(Debug, Clone, PartialEq)]
pub enum Targets {
    /// `P × L` real targets, row-major.
    Regression(Vec<f64>),
    /// One class index in `0..L` per sample.
    Classes(Vec<usize>),
}

/// An ordered set of `P` samples with `M`-dimensional inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    m: usize,
    l: usize,
    inputs: Vec<f64>,
    targets: Targets,
    /// Free-form provenance, e.g. `"mnist train[0..600]"`.
    pub name: String,
}

impl Dataset {
    pub fn regression(m: usize, inputs: Vec<f64>, l: usize, targets: Vec<f64>) -> Result<Self> {
        if m == 0 || l == 0 {
            return Err(GvmError::EmptyInput);
        }
        if !inputs.len().is_multiple_of(m) {
            return Err(GvmError::InvalidDataset("input length is not a multiple of M".into()));
        }
        let p = inputs.len() / m;
        check_len(targets.len(), p * l)?;
        Ok(Dataset { m, l, inputs, targets: Targets::Regression(targets), name: String::new() })
    }

    pub fn classification(m: usize, inputs: Vec<f64>, l: usize, labels: Vec<usize>) -> Result<Self> {
        if m == 0 || l == 0 {
            return Err(GvmError::EmptyInput);
        }
        if !inputs.len().is_multiple_of(m) {
            return Err(GvmError::InvalidDataset("input length is not a multiple of M".into()));
        }
        check_len(labels.len(), inputs.len() / m)?;
        if let Some(&bad) = labels.iter().find(|&&c| c >= l) {
            return Err(GvmError::IndexOutOfRange { index: bad, bound: l });
        }
        Ok(Dataset { m, l, inputs, targets: Targets::Classes(labels), name: String::new() })
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn input_dim(&self) -> usize {
        self.m
    }

    pub fn output_dim(&self) -> usize {
        self.l
    }

    pub fn len(&self) -> usize {
        self.inputs.len() / self.m
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn is_classification(&self) -> bool {
        matches!(self.targets, Targets::Classes(_))
    }

    pub fn inputs(&self) -> &[f64] {
        &self.inputs
    }

    #[inline]
    pub fn input(&self, mu: usize) -> &[f64] {
        &self.inputs[mu * self.m..(mu + 1) * self.m]
    }

    pub fn iter_inputs(&self) -> impl Iterator<Item = &[f64]> {
        self.inputs.chunks_exact(self.m)
    }

    pub fn targets(&self) -> &Targets {
        &self.targets
    }

    /// Class labels, if this is a classification set.
    pub fn labels(&self) -> Option<&[usize]> {
        match &self.targets {
            Targets::Classes(c) => Some(c),
            Targets::Regression(_) => None,
        }
    }

    /// Regression target row of sample `mu`, if this is a regression set.
    pub fn target(&self, mu: usize) -> Option<&[f64]> {
        match &self.targets {
            Targets::Regression(t) => Some(&t[mu * self.l..(mu + 1) * self.l]),
            Targets::Classes(_) => None,
        }
    }

    /// The first `count` samples.
    pub fn prefix(&self, count: usize) -> Dataset {
        let count = count.min(self.len());
        let targets = match &self.targets {
            Targets::Regression(t) => Targets::Regression(t[..count * self.l].to_vec()),
            Targets::Classes(c) => Targets::Classes(c[..count].to_vec()),
        };
        Dataset {
            m: self.m,
            l: self.l,
            inputs: self.inputs[..count * self.m].to_vec(),
            targets,
            name: self.name.clone(),
        }
    }

    /// Samples `range.start..range.end`.
    pub fn slice(&self, range: core::ops::Range<usize>) -> Dataset {
        let (a, b) = (range.start.min(self.len()), range.end.min(self.len()));
        let targets = match &self.targets {
            Targets::Regression(t) => Targets::Regression(t[a * self.l..b * self.l].to_vec()),
            Targets::Classes(c) => Targets::Classes(c[a..b].to_vec()),
        };
        Dataset {
            m: self.m,
            l: self.l,
            inputs: self.inputs[a * self.m..b * self.m].to_vec(),
            targets,
            name: self.name.clone(),
        }
    }

    /// Replaces the inputs, keeping targets. Used by pretreatments.
    pub fn map_inputs(&self, inputs: Vec<f64>) -> Result<Dataset> {
        check_len(inputs.len(), self.inputs.len())?;
        Ok(Dataset { inputs, ..self.clone() })
    }

    /// Replaces class labels, keeping inputs.
    pub fn with_labels(&self, labels: Vec<usize>) -> Result<Dataset> {
        Dataset::classification(self.m, self.inputs.clone(), self.l, labels).map(|d| d.with_name(self.name.clone()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const EPS: f64 = 1e-12;

    fn one_neuron(w: f64, b: f64, beta: f64, kind: TransferKind, out: i8) -> GvmParams {
        GvmParams::new(kind, 1, 1, vec![w], vec![beta], vec![b], vec![out]).unwrap()
    }

    #[test]
    fn transfer_values_at_named_points() {
        let g0 = transfer_eval(TransferKind::Gauss, 0.0);
        assert_eq!((g0.value, g0.second_derivative), (1.0, -2.0));

        let s0 = transfer_eval(TransferKind::Sigmoid, 0.0);
        assert_eq!((s0.value, s0.second_derivative), (0.0, 0.0));

        let z = 1.5f64.sqrt();
        let g = transfer_eval(TransferKind::Gauss, z);
        assert!((g.value - (-1.5f64).exp()).abs() < EPS);
        assert!((g.second_derivative - 4.0 * (-1.5f64).exp()).abs() < EPS);
        assert!((g.second_derivative - 0.892_520_640_593_719_3).abs() < 1e-12);

        let p = transfer_eval(TransferKind::Polynomial(6), 1.0);
        assert_eq!((p.value, p.second_derivative), (1.0, 30.0));
    }

    #[test]
    fn relu_kink_is_flagged() {
        let r = transfer_eval(TransferKind::Relu, 0.0);
        assert_eq!((r.value, r.second_derivative, r.degenerate), (0.0, 0.0, true));
        assert!(!transfer_eval(TransferKind::Relu, 0.3).degenerate);
        assert_eq!(TransferKind::Relu.value(-2.0), 0.0);
        assert_eq!(TransferKind::Relu.value(2.0), 2.0);
    }

    #[test]
    fn second_derivative_matches_finite_difference() {
        let eps = 1e-4;
        let kinds = [
            TransferKind::Gauss,
            TransferKind::Sigmoid,
            TransferKind::Polynomial(2),
            TransferKind::Polynomial(6),
            TransferKind::Polynomial(7),
            TransferKind::Relu,
        ];
        for kind in kinds {
            let mut z: f64 = -3.0;
            while z <= 3.0 {
                if !(matches!(kind, TransferKind::Relu) && z.abs() < 2.0 * eps) {
                    let fd = (kind.value(z + eps) - 2.0 * kind.value(z) + kind.value(z - eps)) / (eps * eps);
                    let an = kind.second_derivative(z);
                    // Near zeros of f″ compare absolutely, with the FD truncation floor.
                    let tol = 1e-4 * an.abs().max(1e-2 * (1.0 + kind.value(z).abs()));
                    assert!((fd - an).abs() <= tol, "{kind:?} z={z} fd={fd} an={an}");
                }
                z += 0.0137;
            }
        }
    }

    #[test]
    fn curvature_ranges_on_dense_grid() {
        let (mut gmin, mut gmax, mut smax) = (f64::MAX, f64::MIN, 0.0f64);
        for k in -200_000..=200_000 {
            let z = k as f64 * 5e-5;
            let g = TransferKind::Gauss.second_derivative(z);
            gmin = gmin.min(g);
            gmax = gmax.max(g);
            smax = smax.max(TransferKind::Sigmoid.second_derivative(z).abs());
        }
        // The maximum sits at z = ±√1.5 and equals 4e^{-1.5} ≈ 0.892521.
        let gauss_peak = 4.0 * (-1.5f64).exp();
        assert!(gmin >= -2.0 && gmax <= gauss_peak + 1e-12 && gmax <= 0.9, "{gmin} {gmax}");
        assert!((gmin + 2.0).abs() < 1e-12);
        let bound = 4.0 / (3.0 * 3.0f64.sqrt());
        assert!(smax <= 0.7699 + 1e-3 && (smax - bound).abs() < 1e-6, "{smax}");
    }

    #[test]
    fn forward_hand_examples() {
        let gvm = one_neuron(1.0, 0.0, 1.0, TransferKind::Gauss, 1);
        let f = gvm.forward(&[0.0]).unwrap();
        assert_eq!((f.hidden_fields[0], f.hidden_outputs[0], f.output_fields[0]), (0.0, 1.0, 1.0));
        let f = gvm.forward(&[1.0]).unwrap();
        assert!((f.output_fields[0] - 0.367_879_441_171_442_3).abs() < EPS);

        let gvm = one_neuron(2.0, 1.0, 0.5, TransferKind::Sigmoid, -1);
        let f = gvm.forward(&[1.0]).unwrap();
        assert_eq!(f.hidden_fields[0], 1.0);
        assert!((f.hidden_outputs[0] - 0.462_117_157_260_009_74).abs() < EPS);
        assert!((f.output_fields[0] + 0.462_117_157_260_009_74).abs() < EPS);
        assert_eq!(gvm.output(&[1.0]).unwrap(), f.output_fields);
    }

    #[test]
    fn forward_rejects_wrong_input_length() {
        let gvm = one_neuron(1.0, 0.0, 1.0, TransferKind::Gauss, 1);
        assert_eq!(gvm.forward(&[0.0, 1.0]), Err(GvmError::DimensionMismatch { expected: 1, found: 2 }));
    }

    #[test]
    fn output_weights_must_be_signs() {
        let r = GvmParams::new(TransferKind::Gauss, 1, 1, vec![1.0], vec![1.0], vec![0.0], vec![2]);
        assert!(r.is_err());
        assert!(TransferKind::Polynomial(0).validate().is_err());
    }

    fn control(c_w: f64, c_beta: f64, c_b: f64, n: usize) -> ControlParams {
        ControlParams::new(c_w, c_beta, c_b, n, CostSpec::Empirical)
    }

    #[test]
    fn init_random_degenerate_range_and_determinism() {
        let zero = init_random(&control(0.0, 0.0, 0.0, 7), 3, 2, TransferKind::Gauss, 5).unwrap();
        assert!(zero.hidden_weights().iter().all(|&w| w == 0.0));
        assert!(zero.betas().iter().chain(zero.biases()).all(|&v| v == 0.0));

        let c = control(1.0, 0.5, 10.0, 20);
        let a = init_random(&c, 4, 3, TransferKind::Sigmoid, 42).unwrap();
        let b = init_random(&c, 4, 3, TransferKind::Sigmoid, 42).unwrap();
        let other = init_random(&c, 4, 3, TransferKind::Sigmoid, 43).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, other);
        assert!(a.output_weights().iter().all(|&w| w == 1 || w == -1));
    }

    #[test]
    fn init_random_weight_mean_and_bounds() {
        let c = control(1.0, 0.3, 2.0, 1000);
        let g = init_random(&c, 1000, 1, TransferKind::Gauss, 9).unwrap();
        let mean = g.hidden_weights().iter().sum::<f64>() / 1e6;
        assert!(mean.abs() < 0.01, "{mean}");
        assert!(g.within_bounds(&c));
        let ups = g.output_weights().iter().filter(|&&w| w == 1).count();
        assert!((400..600).contains(&ups));
    }

    #[test]
    fn classify_examples() {
        assert_eq!(classify(&[5.0, -1.0, -3.0]), 0);
        assert_eq!(classify(&[-2.0, -1.0]), 1);
        assert_eq!(classify(&[3.0, 3.0]), 0);
    }

    #[test]
    fn control_validation() {
        assert!(control(1.0, 1.0, 0.0, 1).validate().is_ok());
        assert!(control(0.0, 1.0, 0.0, 1).validate().is_err());
        assert!(control(1.0, 1.0, -1.0, 1).validate().is_err());
        assert!(control(1.0, 1.0, 1.0, 0).validate().is_err());
        let mut c = control(1.0, 1.0, 1.0, 1);
        c.proposal_fraction = 0.0;
        assert!(c.validate().is_err());
        assert!(control(1.0, 1.0, 1.0, 1).with_stop(f64::INFINITY, 1).validate().is_ok());
        let c = ControlParams::new(1.0, 1.0, 1.0, 1, CostSpec::F3 { d1: 3.0, d2: 2.0 });
        assert!(c.validate().is_err());
    }

    #[test]
    fn dataset_construction_and_views() {
        let d = Dataset::classification(2, vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0], 3, vec![0, 2, 1]).unwrap();
        assert_eq!((d.len(), d.input_dim(), d.output_dim()), (3, 2, 3));
        assert_eq!(d.input(1), &[2.0, 3.0]);
        assert_eq!(d.prefix(2).labels().unwrap(), &[0, 2]);
        assert_eq!(d.slice(1..3).input(0), &[2.0, 3.0]);
        assert!(Dataset::classification(1, vec![0.0], 2, vec![2]).is_err());
        assert!(Dataset::regression(2, vec![0.0; 3], 1, vec![0.0]).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn output_is_linear_in_hidden_outputs(seed in 0u64..1000, alpha in -3.0f64..3.0) {
                let c = control(1.0, 1.0, 1.0, 6);
                let g = init_random(&c, 3, 4, TransferKind::Gauss, seed).unwrap();
                let f = g.forward(&[0.3, -0.2, 0.9]).unwrap();
                for l in 0..4 {
                    let scaled: f64 = (0..6)
                        .map(|i| g.output_weight(l, i) * alpha * f.hidden_outputs[i])
                        .sum();
                    prop_assert!((scaled - alpha * f.output_fields[l]).abs() < 1e-12);
                }
            }

            #[test]
            fn init_stays_within_bounds(seed in any::<u64>(), cw in 0.0f64..5.0, cb in 0.0f64..20.0) {
                let c = control(cw, 0.7, cb, 50);
                let g = init_random(&c, 2, 2, TransferKind::Sigmoid, seed).unwrap();
                prop_assert!(g.within_bounds(&c));
            }

            #[test]
            fn classify_is_shift_invariant(
                h in proptest::collection::vec(-50i32..50, 2..12),
                shift in -1000i32..1000,
            ) {
                let a: Vec<f64> = h.iter().map(|&v| v as f64).collect();
                let b: Vec<f64> = a.iter().map(|v| v + shift as f64).collect();
                prop_assert_eq!(classify(&a), classify(&b));
            }
        }
    }
}
