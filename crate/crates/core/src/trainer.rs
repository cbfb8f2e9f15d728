//! Monte Carlo training.
//!
//! Output weights stay frozen. Each step picks one hidden parameter (a weight
//! `w̄ᵢⱼ`, a transfer coefficient `βᵢ` or a bias `bᵢ`), shifts it by a random
//! `ε`, and keeps the change iff the cost does not get worse. All local fields
//! are cached, so a proposal on neuron `i` only touches row `i` of the hidden
//! caches plus the output fields of the samples whose hidden output moved:
//!
//! * weight `w̄ᵢⱼ += ε`: `h̄ᵢᵘ += ε xⱼᵘ`, only for samples with `xⱼᵘ ≠ 0`
//! * bias `bᵢ += ε`: `h̄ᵢᵘ −= ε`
//! * coefficient `βᵢ += ε`: `h̄ᵢᵘ` unchanged (it excludes `β`), `ȳᵢᵘ` recomputed
//!
//! followed by `h_lᵘ += w_lᵢ (ȳᵢᵘ − ȳᵢᵘ_old)` for every output `l`.
//!
//! The cost is kept as one cached term per sample. A candidate cost is the
//! plain sum of those terms with the touched ones replaced, so the cached cost
//! is always bit-identical to summing the cached terms. The incremental field
//! updates do drift by rounding; a full refresh runs every
//! [`Trainer::DEFAULT_REFRESH_INTERVAL`] accepted steps.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::cost::{sample_target, CostSpec, SampleTarget};
use crate::machine::{init_random, ControlParams, Dataset, GvmParams, Targets, TransferKind};
use crate::math;
use crate::{GvmError, Result};

/// Cached fields of a machine on a dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainerState {
    /// `N × P`, neuron-major: `h̄ᵢᵘ = Σⱼ w̄ᵢⱼ xⱼᵘ − bᵢ`.
    pub hbar: Vec<f64>,
    /// `N × P`, neuron-major: `ȳᵢᵘ = f(βᵢ h̄ᵢᵘ)`.
    pub ybar: Vec<f64>,
    /// `P × L`, sample-major output fields `h_lᵘ`.
    pub hout: Vec<f64>,
    /// Unnormalized cost contribution of each sample.
    pub sample_costs: Vec<f64>,
    pub cost: f64,
    pub steps: u64,
    pub accepted: u64,
}

impl TrainerState {
    /// Full forward pass over all samples.
    pub fn compute(params: &GvmParams, data: &Dataset, cost: &CostSpec) -> Result<Self> {
        if data.input_dim() != params.input_dim() {
            return Err(GvmError::DimensionMismatch { expected: params.input_dim(), found: data.input_dim() });
        }
        if data.output_dim() != params.output_dim() {
            return Err(GvmError::DimensionMismatch { expected: params.output_dim(), found: data.output_dim() });
        }
        if data.is_empty() {
            return Err(GvmError::EmptyInput);
        }
        cost.check_data(data)?;
        let (p, n, l) = (data.len(), params.hidden_dim(), params.output_dim());
        let kind = params.transfer();
        let mut hbar = vec![0.0; n * p];
        let mut ybar = vec![0.0; n * p];
        for i in 0..n {
            let beta = params.betas()[i];
            for (mu, x) in data.iter_inputs().enumerate() {
                let h = params.hidden_field(i, x);
                hbar[i * p + mu] = h;
                ybar[i * p + mu] = kind.value(beta * h);
            }
        }
        let mut hout = vec![0.0; p * l];
        for i in 0..n {
            let yrow = &ybar[i * p..(i + 1) * p];
            for lo in 0..l {
                let w = params.output_weight(lo, i);
                for (mu, &y) in yrow.iter().enumerate() {
                    hout[mu * l + lo] += w * y;
                }
            }
        }
        let sample_costs: Vec<f64> =
            (0..p).map(|mu| cost.sample_term(&hout[mu * l..(mu + 1) * l], sample_target(data, mu))).collect();
        let total = cost.finish(sample_costs.iter().sum(), p, l);
        Ok(TrainerState { hbar, ybar, hout, sample_costs, cost: total, steps: 0, accepted: 0 })
    }

    /// Largest element-wise `|self − other| / (1 + |other|)` over all caches
    /// and the cost.
    pub fn max_discrepancy(&self, other: &TrainerState) -> f64 {
        let pairs = [(&self.hbar, &other.hbar), (&self.ybar, &other.ybar), (&self.hout, &other.hout)];
        let mut worst = rel(self.cost, other.cost);
        for (a, b) in pairs {
            for (x, y) in a.iter().zip(b.iter()) {
                worst = worst.max(rel(*x, *y));
            }
        }
        worst
    }
}

fn rel(cached: f64, fresh: f64) -> f64 {
    (cached - fresh).abs() / (1.0 + fresh.abs())
}

/// Builds the cache for `params` on `data`.
pub fn init_state(params: &GvmParams, data: &Dataset, cost: &CostSpec) -> Result<TrainerState> {
    TrainerState::compute(params, data, cost)
}

/// One hidden parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamRef {
    Weight { i: usize, j: usize },
    Beta(usize),
    Bias(usize),
}

impl ParamRef {
    pub fn neuron(self) -> usize {
        match self {
            ParamRef::Weight { i, .. } | ParamRef::Beta(i) | ParamRef::Bias(i) => i,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Proposal {
    pub target: ParamRef,
    pub epsilon: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepOutcome {
    Accepted,
    /// The cost would have increased.
    Rejected,
    /// The new value would have left its range.
    OutOfRange,
    /// No parameter class is both enabled and has a non-zero range.
    Frozen,
}

/// One point of the training trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TracePoint {
    pub step: u64,
    pub cost: f64,
    /// Fraction of proposals accepted since the previous trace point.
    pub accept_rate: f64,
}

/// Result of [`train`].
#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub params: GvmParams,
    /// Non-increasing cost trace, starting at step 0 and ending at the last step.
    pub history: Vec<TracePoint>,
    /// Whether the stop cost was reached; `false` means the step budget ran out.
    pub converged: bool,
    pub steps: u64,
    pub accepted: u64,
    pub final_cost: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Class {
    Weight,
    Beta,
    Bias,
}

/// Owns a machine being trained on a borrowed dataset.
pub struct Trainer<'a> {
    params: GvmParams,
    data: &'a Dataset,
    control: ControlParams,
    state: TrainerState,
    /// `M × P` feature-major copy of the inputs.
    columns: Vec<f64>,
    /// Per input feature, the samples where it is non-zero.
    support: Vec<Vec<u32>>,
    all_samples: Vec<u32>,
    classes: Vec<Class>,
    scratch_costs: Vec<f64>,
    scratch_hbar: Vec<f64>,
    scratch_ybar: Vec<f64>,
    scratch_dy: Vec<f64>,
    out_col: Vec<f64>,
    fields: Vec<f64>,
    refresh_interval: u64,
    since_refresh: u64,
}

impl<'a> Trainer<'a> {
    pub const DEFAULT_REFRESH_INTERVAL: u64 = 100_000;

    pub fn new(params: GvmParams, data: &'a Dataset, control: &ControlParams) -> Result<Self> {
        control.validate()?;
        if params.hidden_dim() != control.n_hidden {
            return Err(GvmError::DimensionMismatch { expected: control.n_hidden, found: params.hidden_dim() });
        }
        let state = TrainerState::compute(&params, data, &control.cost)?;
        let (p, m) = (data.len(), data.input_dim());
        let mut columns = vec![0.0; m * p];
        for (mu, x) in data.iter_inputs().enumerate() {
            for (j, &v) in x.iter().enumerate() {
                columns[j * p + mu] = v;
            }
        }
        let support =
            (0..m).map(|j| (0..p as u32).filter(|&mu| columns[j * p + mu as usize] != 0.0).collect()).collect();
        let mut classes = Vec::with_capacity(3);
        if control.classes.weights && control.c_w > 0.0 {
            classes.push(Class::Weight);
        }
        if control.classes.betas && control.c_beta > 0.0 {
            classes.push(Class::Beta);
        }
        if control.classes.biases && control.c_b > 0.0 {
            classes.push(Class::Bias);
        }
        let l = params.output_dim();
        Ok(Trainer {
            params,
            data,
            control: control.clone(),
            state,
            columns,
            support,
            all_samples: (0..p as u32).collect(),
            classes,
            scratch_costs: vec![0.0; p],
            scratch_hbar: vec![0.0; p],
            scratch_ybar: vec![0.0; p],
            scratch_dy: vec![0.0; p],
            out_col: vec![0.0; l],
            fields: vec![0.0; l],
            refresh_interval: Self::DEFAULT_REFRESH_INTERVAL,
            since_refresh: 0,
        })
    }

    /// Accepted steps between full cache refreshes.
    pub fn set_refresh_interval(&mut self, interval: u64) {
        self.refresh_interval = interval.max(1);
    }

    pub fn params(&self) -> &GvmParams {
        &self.params
    }

    pub fn into_params(self) -> GvmParams {
        self.params
    }

    pub fn state(&self) -> &TrainerState {
        &self.state
    }

    pub fn cost(&self) -> f64 {
        self.state.cost
    }

    pub fn control(&self) -> &ControlParams {
        &self.control
    }

    /// A from-scratch cache for the current parameters, for coherence checks.
    pub fn recompute(&self) -> TrainerState {
        let mut fresh = TrainerState::compute(&self.params, self.data, &self.control.cost)
            .expect("dimensions were checked at construction");
        fresh.steps = self.state.steps;
        fresh.accepted = self.state.accepted;
        fresh
    }

    /// Replaces every cached field with a fresh forward pass.
    pub fn refresh(&mut self) {
        self.state = self.recompute();
        self.since_refresh = 0;
    }

    fn bound(&self, target: ParamRef) -> f64 {
        match target {
            ParamRef::Weight { .. } => self.control.c_w,
            ParamRef::Beta(_) => self.control.c_beta,
            ParamRef::Bias(_) => self.control.c_b,
        }
    }

    fn current(&self, target: ParamRef) -> f64 {
        match target {
            ParamRef::Weight { i, j } => self.params.weight(i, j),
            ParamRef::Beta(i) => self.params.betas()[i],
            ParamRef::Bias(i) => self.params.biases()[i],
        }
    }

    /// Draws a proposal: a class uniformly among the changeable ones, an index
    /// uniformly within it, and `ε ~ U[−2δc, 2δc]`.
    pub fn draw_proposal<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<Proposal> {
        if self.classes.is_empty() {
            return None;
        }
        let class = self.classes[rng.random_range(0..self.classes.len())];
        let (n, m) = (self.params.hidden_dim(), self.params.input_dim());
        let target = match class {
            Class::Weight => ParamRef::Weight { i: rng.random_range(0..n), j: rng.random_range(0..m) },
            Class::Beta => ParamRef::Beta(rng.random_range(0..n)),
            Class::Bias => ParamRef::Bias(rng.random_range(0..n)),
        };
        let half = 2.0 * self.control.proposal_fraction * self.bound(target);
        let decades = self.control.proposal_decades;
        let epsilon = if decades > 0.0 {
            let magnitude = half * math::exp(-decades * core::f64::consts::LN_10 * rng.random::<f64>());
            if rng.random::<bool>() {
                magnitude
            } else {
                -magnitude
            }
        } else {
            rng.random_range(-half..=half)
        };
        Some(Proposal { target, epsilon })
    }

    /// One Monte Carlo step.
    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> StepOutcome {
        match self.draw_proposal(rng) {
            Some(p) => self.apply(p),
            None => {
                self.state.steps += 1;
                StepOutcome::Frozen
            }
        }
    }

    /// Evaluates `proposal` and keeps it iff the cost does not increase.
    pub fn apply(&mut self, proposal: Proposal) -> StepOutcome {
        self.state.steps += 1;
        let target = proposal.target;
        let new_value = self.current(target) + proposal.epsilon;
        if !(new_value.abs() <= self.bound(target)) {
            return StepOutcome::OutOfRange;
        }
        let candidate = self.candidate_cost(target, proposal.epsilon, new_value);
        if candidate <= self.state.cost {
            self.commit(target, new_value, candidate);
            StepOutcome::Accepted
        } else {
            StepOutcome::Rejected
        }
    }

    fn affected(&self, target: ParamRef) -> &[u32] {
        match target {
            ParamRef::Weight { j, .. } => &self.support[j],
            _ => &self.all_samples,
        }
    }

    /// Fills the scratch buffers for `target` moving by `eps` to `new_value`
    /// and returns the resulting cost.
    fn candidate_cost(&mut self, target: ParamRef, eps: f64, new_value: f64) -> f64 {
        let Trainer {
            params,
            data,
            control,
            state,
            columns,
            support,
            all_samples,
            scratch_costs,
            scratch_hbar,
            scratch_ybar,
            scratch_dy,
            out_col,
            fields,
            ..
        } = self;
        let i = target.neuron();
        let p = data.len();
        let l = params.output_dim();
        let kind: TransferKind = params.transfer();
        let beta = match target {
            ParamRef::Beta(_) => new_value,
            _ => params.betas()[i],
        };
        for (lo, w) in out_col.iter_mut().enumerate() {
            *w = params.output_weight(lo, i);
        }

        let idx: &[u32] = match target {
            ParamRef::Weight { j, .. } => &support[j],
            _ => all_samples,
        };
        let count = idx.len();
        let hrow = &state.hbar[i * p..(i + 1) * p];
        let yrow = &state.ybar[i * p..(i + 1) * p];
        let new_h = &mut scratch_hbar[..count];
        match target {
            ParamRef::Weight { j, .. } => {
                let col = &columns[j * p..(j + 1) * p];
                for (h, &mu) in new_h.iter_mut().zip(idx) {
                    *h = hrow[mu as usize] + eps * col[mu as usize];
                }
            }
            ParamRef::Bias(_) => {
                for (h, &old) in new_h.iter_mut().zip(hrow) {
                    *h = old - eps;
                }
            }
            ParamRef::Beta(_) => new_h.copy_from_slice(hrow),
        }
        for k in 0..count {
            let y = kind.value(beta * new_h[k]);
            scratch_ybar[k] = y;
            scratch_dy[k] = y - yrow[idx[k] as usize];
        }

        scratch_costs.copy_from_slice(&state.sample_costs);
        let cost = control.cost;
        for (k, &mu) in idx.iter().enumerate() {
            let mu = mu as usize;
            let dy = scratch_dy[k];
            let old = &state.hout[mu * l..(mu + 1) * l];
            for ((f, &o), &w) in fields.iter_mut().zip(old).zip(out_col.iter()) {
                *f = o + w * dy;
            }
            let target = match data.targets() {
                Targets::Classes(labels) => SampleTarget::Class(labels[mu]),
                Targets::Regression(t) => SampleTarget::Values(&t[mu * l..(mu + 1) * l]),
            };
            scratch_costs[mu] = cost.sample_term(fields, target);
        }
        control.cost.finish(scratch_costs.iter().sum(), p, l)
    }

    fn commit(&mut self, target: ParamRef, new_value: f64, cost: f64) {
        let i = target.neuron();
        let p = self.data.len();
        let l = self.params.output_dim();
        let count = self.affected(target).len();
        for k in 0..count {
            let mu = self.affected(target)[k] as usize;
            self.state.hbar[i * p + mu] = self.scratch_hbar[k];
            self.state.ybar[i * p + mu] = self.scratch_ybar[k];
            let dy = self.scratch_dy[k];
            for (lo, &w) in self.out_col.iter().enumerate() {
                let o = &mut self.state.hout[mu * l + lo];
                *o += w * dy;
            }
        }
        core::mem::swap(&mut self.state.sample_costs, &mut self.scratch_costs);
        self.state.cost = cost;
        self.state.accepted += 1;
        match target {
            ParamRef::Weight { i, j } => self.params.set_weight(i, j, new_value),
            ParamRef::Beta(i) => self.params.set_beta(i, new_value),
            ParamRef::Bias(i) => self.params.set_bias(i, new_value),
        }
        self.since_refresh += 1;
        if self.since_refresh >= self.refresh_interval {
            self.refresh();
        }
    }

    /// Whether the stop rule has been met. With a zero stop cost the rule is
    /// the step budget alone, so reaching `max_steps` counts.
    pub fn converged(&self) -> bool {
        self.state.cost <= self.control.stop_cost
            || (self.control.stop_cost == 0.0 && self.state.steps >= self.control.max_steps)
    }

    /// Runs steps until the cost reaches `stop_cost` or `max_steps` steps
    /// have been taken, recording a trace point every `trace_every` steps.
    pub fn run<R: Rng + ?Sized>(&mut self, rng: &mut R, trace_every: u64) -> Vec<TracePoint> {
        let trace_every = trace_every.max(1);
        let mut history = vec![TracePoint { step: self.state.steps, cost: self.state.cost, accept_rate: 0.0 }];
        let (mut window_steps, mut window_accepts) = (0u64, 0u64);
        while !self.converged() && self.state.steps < self.control.max_steps {
            if self.step(rng) == StepOutcome::Accepted {
                window_accepts += 1;
            }
            window_steps += 1;
            if window_steps == trace_every {
                history.push(TracePoint {
                    step: self.state.steps,
                    cost: self.state.cost,
                    accept_rate: window_accepts as f64 / window_steps as f64,
                });
                window_steps = 0;
                window_accepts = 0;
            }
        }
        if window_steps > 0 {
            history.push(TracePoint {
                step: self.state.steps,
                cost: self.state.cost,
                accept_rate: window_accepts as f64 / window_steps as f64,
            });
        }
        history
    }
}

/// Trace granularity used by [`train`].
pub const DEFAULT_TRACE_EVERY: u64 = 1000;

/// Trains `params` on `data` until `F <= F0` or `t >= t0`.
///
/// Running out of steps is reported through [`TrainOutcome::converged`], not
/// as an error.
pub fn train<R: Rng + ?Sized>(
    params: GvmParams,
    data: &Dataset,
    control: &ControlParams,
    rng: &mut R,
) -> Result<TrainOutcome> {
    let mut trainer = Trainer::new(params, data, control)?;
    let history = trainer.run(rng, DEFAULT_TRACE_EVERY);
    let converged = trainer.converged();
    let TrainerState { steps, accepted, cost, .. } = *trainer.state();
    Ok(TrainOutcome { params: trainer.into_params(), history, converged, steps, accepted, final_cost: cost })
}

/// Initializes from `seed` and trains; the RNG stream for training is derived
/// from the same seed.
pub fn train_seeded(data: &Dataset, control: &ControlParams, kind: TransferKind, seed: u64) -> Result<TrainOutcome> {
    let params = init_random(control, data.input_dim(), data.output_dim(), kind, seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    train(params, data, control, &mut rng)
}

/// Trains with each hidden size of `schedule` in turn and returns the first
/// run that reaches the stop cost.
pub fn auto_grow_train(
    data: &Dataset,
    control: &ControlParams,
    kind: TransferKind,
    seed: u64,
    schedule: &[usize],
) -> Result<TrainOutcome> {
    for &n in schedule {
        let mut c = control.clone();
        c.n_hidden = n;
        let outcome = train_seeded(data, &c, kind, seed)?;
        if outcome.converged {
            return Ok(outcome);
        }
    }
    Err(GvmError::ScheduleExhausted)
}
