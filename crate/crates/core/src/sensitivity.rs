//! Second-derivative input-output sensitivity.
//!
//! A hidden neuron's curvature with respect to inputs `j, k` is
//! `γⱼₖⁱ = βᵢ² w̄ᵢⱼ w̄ᵢₖ f″(βᵢ h̄ᵢ)`, and the machine's curvature is the
//! output-weighted sum `Σᵢ w_lᵢ γⱼₖⁱ`. The machine estimate `R_s` averages the
//! magnitude of that sum over output/input index triples and over inputs.

use alloc::vec;
use alloc::vec::Vec;

use crate::data::{linspace, GoalFunction};
use crate::machine::GvmParams;
use crate::{GvmError, Result};

/// Largest input dimension for which [`SensitivityMode::Full`] is allowed.
pub const FULL_MODE_MAX_INPUTS: usize = 100;

/// Grid points per input dimension for function norms.
pub const NORM_GRID_POINTS: usize = 1001;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SensitivityMode {
    /// Every `(l, j, k)` triple.
    Full,
    /// Only `(l, j, j)` triples.
    Diagonal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SensitivityReport {
    /// `R_s ≥ 0`.
    pub r_s: f64,
    pub mode: SensitivityMode,
    pub n_inputs: usize,
    /// Hidden-neuron evaluations that hit the ReLU kink, where `f″` is taken as 0.
    pub n_degenerate: usize,
}

/// `βᵢ² f″(βᵢ h̄ᵢ(x))` for every hidden neuron, plus the degenerate count.
fn curvature_factors(params: &GvmParams, x: &[f64], out: &mut [f64]) -> usize {
    let kind = params.transfer();
    let mut degenerate = 0;
    for (i, slot) in out.iter_mut().enumerate() {
        let beta = params.betas()[i];
        let t = kind.eval(beta * params.hidden_field(i, x));
        degenerate += t.degenerate as usize;
        *slot = beta * beta * t.second_derivative;
    }
    degenerate
}

/// `γⱼₖⁱ` at input `x`.
pub fn neuron_gamma(params: &GvmParams, i: usize, j: usize, k: usize, x: &[f64]) -> Result<f64> {
    let (n, m) = (params.hidden_dim(), params.input_dim());
    if i >= n {
        return Err(GvmError::IndexOutOfRange { index: i, bound: n });
    }
    if j >= m || k >= m {
        return Err(GvmError::IndexOutOfRange { index: j.max(k), bound: m });
    }
    if x.len() != m {
        return Err(GvmError::DimensionMismatch { expected: m, found: x.len() });
    }
    let beta = params.betas()[i];
    let fpp = params.transfer().second_derivative(beta * params.hidden_field(i, x));
    Ok(beta * beta * fpp * (params.weight(i, j) * params.weight(i, k)))
}

/// `∂²h_l/∂xⱼ∂xₖ = Σᵢ w_lᵢ γⱼₖⁱ` at `x`, as an `L×M×M` row-major tensor.
pub fn machine_hessian(params: &GvmParams, x: &[f64]) -> Result<Vec<f64>> {
    let (n, m, l) = (params.hidden_dim(), params.input_dim(), params.output_dim());
    if x.len() != m {
        return Err(GvmError::DimensionMismatch { expected: m, found: x.len() });
    }
    let mut factors = vec![0.0; n];
    curvature_factors(params, x, &mut factors);
    let mut out = vec![0.0; l * m * m];
    for (i, &g) in factors.iter().enumerate() {
        if g == 0.0 {
            continue;
        }
        let row = params.weight_row(i);
        for out_l in 0..l {
            let coef = params.output_weight(out_l, i) * g;
            let block = &mut out[out_l * m * m..(out_l + 1) * m * m];
            for j in 0..m {
                let cj = coef * row[j];
                for k in 0..m {
                    block[j * m + k] += cj * row[k];
                }
            }
        }
    }
    Ok(out)
}

/// Machine estimate `R_s`, averaged over index triples and over `inputs`.
pub fn machine_rs<'a, I>(params: &GvmParams, inputs: I, mode: SensitivityMode) -> Result<SensitivityReport>
where
    I: IntoIterator<Item = &'a [f64]>,
{
    let (n, m, l) = (params.hidden_dim(), params.input_dim(), params.output_dim());
    if mode == SensitivityMode::Full && m > FULL_MODE_MAX_INPUTS {
        return Err(GvmError::SensitivityTooCostly { m, limit: FULL_MODE_MAX_INPUTS });
    }
    let mut factors = vec![0.0; n];
    let mut diag = vec![0.0; m];
    let mut total = 0.0;
    let mut count = 0usize;
    let mut n_degenerate = 0;
    for x in inputs {
        if x.len() != m {
            return Err(GvmError::DimensionMismatch { expected: m, found: x.len() });
        }
        let per_input = match mode {
            SensitivityMode::Full => {
                machine_hessian(params, x)?.iter().map(|v| v.abs()).sum::<f64>() / (l * m * m) as f64
            }
            SensitivityMode::Diagonal => {
                n_degenerate += curvature_factors(params, x, &mut factors);
                let mut acc = 0.0;
                for out_l in 0..l {
                    diag.iter_mut().for_each(|d| *d = 0.0);
                    for (i, &g) in factors.iter().enumerate() {
                        if g == 0.0 {
                            continue;
                        }
                        let coef = params.output_weight(out_l, i) * g;
                        for (d, &w) in diag.iter_mut().zip(params.weight_row(i)) {
                            *d += coef * w * w;
                        }
                    }
                    acc += diag.iter().map(|v| v.abs()).sum::<f64>();
                }
                acc / (l * m) as f64
            }
        };
        if mode == SensitivityMode::Full {
            n_degenerate += curvature_factors(params, x, &mut factors);
        }
        total += per_input;
        count += 1;
    }
    if count == 0 {
        return Err(GvmError::EmptyInput);
    }
    Ok(SensitivityReport { r_s: total / count as f64, mode, n_inputs: count, n_degenerate })
}

/// Points of a uniform grid on `[-c, c]^dim` with `points` per axis, flattened.
pub fn uniform_grid(c: f64, dim: usize, points: usize) -> Vec<f64> {
    let axis = linspace(c, points);
    match dim {
        1 => axis,
        2 => {
            let mut v = Vec::with_capacity(2 * points * points);
            for &a in &axis {
                for &b in &axis {
                    v.push(a);
                    v.push(b);
                }
            }
            v
        }
        _ => unreachable!("goal functions are one- or two-dimensional"),
    }
}

/// Reference curvature of a goal: RMS of its Hessian entries over a uniform
/// grid on `[-c, c]^dim` with `grid_points` per axis.
pub fn goal_curvature(goal: GoalFunction, c: f64, grid_points: usize) -> Result<f64> {
    if grid_points == 0 {
        return Err(GvmError::EmptyInput);
    }
    let dim = goal.dim();
    let grid = uniform_grid(c, dim, grid_points);
    let mut sq = 0.0;
    let mut count = 0usize;
    for x in grid.chunks_exact(dim) {
        for j in 0..dim {
            for k in 0..dim {
                let v = goal.second_derivative(x, j, k)?;
                sq += v * v;
                count += 1;
            }
        }
    }
    Ok(libm::sqrt(sq / count as f64))
}
