//! Synthetic goal functions, regression set generation, image pretreatments
//! and the default control points of the three experiment families.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::cost::CostSpec;
use crate::machine::{ControlParams, Dataset};
use crate::{GvmError, Result};

/// Side of an MNIST image.
pub const IMAGE_SIDE: usize = 28;
pub const IMAGE_PIXELS: usize = IMAGE_SIDE * IMAGE_SIDE;
/// Raw 0–255 grey levels are multiplied by this before use as inputs.
pub const PIXEL_SCALE: f64 = 0.1;

/// Synthetic regression targets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GoalFunction {
    Sin,
    /// `sin x / x`, with value 1 at the origin.
    Sinc,
    /// `(63x⁵ − 70x³ + 15x) / 8`
    Hermite5,
    /// `(429x⁷ − 693x⁵ + 315x³ − 35x) / 16`
    Hermite7,
    /// `+1` on `[0, h)`, `−1` on `[h, 2h)`, repeated with period `2h`.
    SquareWave {
        half_period: f64,
    },
    /// `sin r / r` with `r = √(x² + y²)`.
    Sinc2d,
}

impl GoalFunction {
    pub const SQUARE_WAVE: GoalFunction = GoalFunction::SquareWave { half_period: 5.0 };

    pub fn name(&self) -> &'static str {
        match self {
            GoalFunction::Sin => "sin",
            GoalFunction::Sinc => "sinc",
            GoalFunction::Hermite5 => "hermite5",
            GoalFunction::Hermite7 => "hermite7",
            GoalFunction::SquareWave { .. } => "square_wave",
            GoalFunction::Sinc2d => "sinc2d",
        }
    }

    pub fn from_name(name: &str) -> Option<GoalFunction> {
        Some(match name {
            "sin" => GoalFunction::Sin,
            "sinc" => GoalFunction::Sinc,
            "hermite5" => GoalFunction::Hermite5,
            "hermite7" => GoalFunction::Hermite7,
            "square_wave" => GoalFunction::SQUARE_WAVE,
            "sinc2d" => GoalFunction::Sinc2d,
            _ => return None,
        })
    }

    pub fn dim(&self) -> usize {
        match self {
            GoalFunction::Sinc2d => 2,
            _ => 1,
        }
    }

    /// Half-width `c_x` of the sampling interval used by the experiments.
    pub fn default_half_width(&self) -> f64 {
        match self {
            GoalFunction::Sin => core::f64::consts::PI,
            GoalFunction::Sinc | GoalFunction::SquareWave { .. } | GoalFunction::Sinc2d => 10.0,
            GoalFunction::Hermite5 | GoalFunction::Hermite7 => 1.0,
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match *self {
            GoalFunction::Sin => libm::sin(x[0]),
            GoalFunction::Sinc => sinc(x[0]),
            GoalFunction::Hermite5 => {
                let t = x[0];
                let t2 = t * t;
                t * (15.0 + t2 * (-70.0 + 63.0 * t2)) / 8.0
            }
            GoalFunction::Hermite7 => {
                let t = x[0];
                let t2 = t * t;
                t * (-35.0 + t2 * (315.0 + t2 * (-693.0 + 429.0 * t2))) / 16.0
            }
            GoalFunction::SquareWave { half_period } => {
                let period = 2.0 * half_period;
                let phase = x[0] - period * libm::floor(x[0] / period);
                if phase < half_period {
                    1.0
                } else {
                    -1.0
                }
            }
            GoalFunction::Sinc2d => sinc(libm::hypot(x[0], x[1])),
        }
    }

    /// Hessian entry `∂²g/∂x_j∂x_k` at `x`.
    pub fn second_derivative(&self, x: &[f64], j: usize, k: usize) -> Result<f64> {
        let dim = self.dim();
        if j >= dim || k >= dim {
            return Err(GvmError::IndexOutOfRange { index: j.max(k), bound: dim });
        }
        Ok(match *self {
            GoalFunction::Sin => -libm::sin(x[0]),
            GoalFunction::Sinc => sinc_second(x[0]),
            GoalFunction::Hermite5 => {
                let t = x[0];
                (1260.0 * t * t * t - 420.0 * t) / 8.0
            }
            GoalFunction::Hermite7 => {
                let t = x[0];
                let t2 = t * t;
                t * (1890.0 + t2 * (-13860.0 + 18018.0 * t2)) / 16.0
            }
            GoalFunction::SquareWave { .. } => return Err(GvmError::NonSmoothGoal("square_wave")),
            GoalFunction::Sinc2d => {
                let r = libm::hypot(x[0], x[1]);
                let delta = if j == k { 1.0 } else { 0.0 };
                if r == 0.0 {
                    -delta / 3.0
                } else {
                    let (uj, uk) = (x[j] / r, x[k] / r);
                    sinc_second(r) * uj * uk + sinc_first_over_r(r) * (delta - uj * uk)
                }
            }
        })
    }
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 - x * x / 6.0
    } else {
        libm::sin(x) / x
    }
}

fn sinc_second(x: f64) -> f64 {
    if x.abs() < 1e-2 {
        let x2 = x * x;
        -1.0 / 3.0 + x2 * (1.0 / 10.0 + x2 * (-1.0 / 168.0 + x2 / 6480.0))
    } else {
        let (s, c) = (libm::sin(x), libm::cos(x));
        -s / x - 2.0 * c / (x * x) + 2.0 * s / (x * x * x)
    }
}

/// `sinc′(r) / r`.
fn sinc_first_over_r(r: f64) -> f64 {
    if r < 1e-2 {
        let r2 = r * r;
        -1.0 / 3.0 + r2 * (1.0 / 30.0 - r2 / 840.0)
    } else {
        (libm::cos(r) / r - libm::sin(r) / (r * r)) / r
    }
}

/// `n` evenly spaced points on `[-c, c]`, endpoints included.
pub fn linspace(c: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![0.0];
    }
    (0..n).map(|k| -c + 2.0 * c * k as f64 / (n - 1) as f64).collect()
}

/// `P` grid samples of `goal` on `[-c_x, c_x]^dim` plus Gaussian noise of
/// standard deviation `noise_sigma`. Two-dimensional goals need a square `P`.
pub fn gen_regression(goal: GoalFunction, c_x: f64, p: usize, noise_sigma: f64, seed: u64) -> Result<Dataset> {
    if p < 2 {
        return Err(GvmError::InvalidDataset(format!("need at least 2 samples, got {p}")));
    }
    if !(noise_sigma >= 0.0) || !(c_x > 0.0) {
        return Err(GvmError::InvalidDataset("c_x must be > 0 and sigma >= 0".into()));
    }
    let inputs = match goal.dim() {
        1 => linspace(c_x, p),
        _ => {
            let side = libm::round(libm::sqrt(p as f64)) as usize;
            if side * side != p {
                return Err(GvmError::InvalidDataset(format!("{p} is not a perfect square")));
            }
            let axis = linspace(c_x, side);
            let mut v = Vec::with_capacity(2 * p);
            for &a in &axis {
                for &b in &axis {
                    v.push(a);
                    v.push(b);
                }
            }
            v
        }
    };
    let dim = goal.dim();
    let mut targets: Vec<f64> = inputs.chunks_exact(dim).map(|x| goal.eval(x)).collect();
    if noise_sigma > 0.0 {
        let normal = Normal::new(0.0, noise_sigma).map_err(|_| GvmError::InvalidDataset("bad noise sigma".into()))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for t in &mut targets {
            *t += normal.sample(&mut rng);
        }
    }
    Ok(Dataset::regression(dim, inputs, 1, targets)?
        .with_name(format!("{} p={p} c_x={c_x} sigma={noise_sigma}", goal.name())))
}

/// Function-fitting defaults for inputs in `[-c_x, c_x]`: `c_w = 10/c_x`,
/// `c_b = 10`, `c_β = 0.5`, a 100-neuron hidden layer and `F_e < 10⁻⁴`.
pub fn default_regression_controls(c_x: f64) -> ControlParams {
    ControlParams::new(10.0 / c_x, 0.5, 10.0, 100, CostSpec::Empirical).with_stop(1e-4, 50_000_000)
}

/// Wisconsin defaults: `c_β = 1`, `c_w = 1`, `c_b = 10`, `N = 200`, F1 with
/// `d = 16`, stop at `F1 < 10⁻³`.
pub fn wisconsin_controls() -> ControlParams {
    ControlParams::new(1.0, 1.0, 10.0, 200, CostSpec::F1 { d: 16.0 }).with_stop(1e-3, 20_000_000)
}

/// MNIST defaults: `c_w = 1`, `c_b = 100`, `c_β = 0.005`, `N = 1000`, F2
/// with `d = 30`, stop at `F2 < 1`.
pub fn mnist_controls() -> ControlParams {
    ControlParams::new(1.0, 0.005, 100.0, 1000, CostSpec::F2 { d: 30.0 }).with_stop(1.0, 200_000_000)
}

fn check_image(data: &Dataset) -> Result<()> {
    if data.input_dim() == IMAGE_PIXELS {
        Ok(())
    } else {
        Err(GvmError::NotImage(data.input_dim()))
    }
}

/// Translation `(rows, cols)` of the eight neighbor shifts, in output order:
/// N, S, E, W, NE, NW, SE, SW.
pub const SHIFT_DIRECTIONS: [(i32, i32); 8] = [(-1, 0), (1, 0), (0, 1), (0, -1), (-1, 1), (-1, -1), (1, 1), (1, -1)];

/// Moves the image content by `(dr, dc)` pixels, zero-filling exposed pixels.
pub fn shift_image(image: &[f64], dr: i32, dc: i32) -> Vec<f64> {
    let side = IMAGE_SIDE as i32;
    let mut out = vec![0.0; IMAGE_PIXELS];
    for r in 0..side {
        for c in 0..side {
            let (sr, sc) = (r - dr, c - dc);
            if (0..side).contains(&sr) && (0..side).contains(&sc) {
                out[(r * side + c) as usize] = image[(sr * side + sc) as usize];
            }
        }
    }
    out
}

/// Eight copies of every image, shifted by `pixels` toward each neighbor
/// direction. Output has `8P` samples, grouped by source sample.
pub fn augment_shift(data: &Dataset, pixels: usize) -> Result<Dataset> {
    check_image(data)?;
    let labels = data.labels().ok_or(GvmError::InvalidDataset("shift needs labels".into()))?;
    let px = pixels as i32;
    let mut inputs = Vec::with_capacity(8 * data.inputs().len());
    let mut out_labels = Vec::with_capacity(8 * data.len());
    for (x, &label) in data.iter_inputs().zip(labels) {
        for (dr, dc) in SHIFT_DIRECTIONS {
            inputs.extend(shift_image(x, dr * px, dc * px));
            out_labels.push(label);
        }
    }
    Ok(Dataset::classification(IMAGE_PIXELS, inputs, data.output_dim(), out_labels)?
        .with_name(format!("{} shift{pixels}x8", data.name)))
}

/// `copies` noisy versions of every image. `sigma_raw` is in raw 0–255 grey
/// levels and is rescaled by [`PIXEL_SCALE`] like the inputs were.
pub fn augment_noise(data: &Dataset, sigma_raw: f64, copies: usize, seed: u64) -> Result<Dataset> {
    check_image(data)?;
    let labels = data.labels().ok_or(GvmError::InvalidDataset("noise needs labels".into()))?;
    let sigma = sigma_raw * PIXEL_SCALE;
    let normal = Normal::new(0.0, sigma).map_err(|_| GvmError::InvalidDataset("bad noise sigma".into()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut inputs = Vec::with_capacity(copies * data.inputs().len());
    let mut out_labels = Vec::with_capacity(copies * data.len());
    for (x, &label) in data.iter_inputs().zip(labels) {
        for _ in 0..copies {
            if sigma == 0.0 {
                inputs.extend_from_slice(x);
            } else {
                inputs.extend(x.iter().map(|v| v + normal.sample(&mut rng)));
            }
            out_labels.push(label);
        }
    }
    Ok(Dataset::classification(IMAGE_PIXELS, inputs, data.output_dim(), out_labels)?
        .with_name(format!("{} noise{sigma_raw}x{copies}", data.name)))
}

/// Normalized 1D Gaussian taps `-radius..=radius`.
pub fn gaussian_kernel(sigma: f64, radius: usize) -> Vec<f64> {
    let r = radius as i64;
    let taps: Vec<f64> = (-r..=r).map(|k| libm::exp(-((k * k) as f64) / (2.0 * sigma * sigma))).collect();
    let total: f64 = taps.iter().sum();
    taps.into_iter().map(|t| t / total).collect()
}

/// Separable Gaussian blur of one 28×28 image with zero padding.
pub fn gaussian_blur(image: &[f64], sigma: f64, radius: usize) -> Vec<f64> {
    let kernel = gaussian_kernel(sigma, radius);
    let side = IMAGE_SIDE as i64;
    let r = radius as i64;
    let pass = |src: &[f64], horizontal: bool| {
        let mut dst = vec![0.0; IMAGE_PIXELS];
        for row in 0..side {
            for col in 0..side {
                let mut acc = 0.0;
                for (t, &w) in kernel.iter().enumerate() {
                    let off = t as i64 - r;
                    let (sr, sc) = if horizontal { (row, col + off) } else { (row + off, col) };
                    if (0..side).contains(&sr) && (0..side).contains(&sc) {
                        acc += w * src[(sr * side + sc) as usize];
                    }
                }
                dst[(row * side + col) as usize] = acc;
            }
        }
        dst
    };
    pass(&pass(image, true), false)
}

/// Gaussian smoothing pretreatment: `σ = 1` pixel, kernel radius 3.
pub fn gauss_smooth(data: &Dataset) -> Result<Dataset> {
    check_image(data)?;
    let mut inputs = Vec::with_capacity(data.inputs().len());
    for x in data.iter_inputs() {
        inputs.extend(gaussian_blur(x, 1.0, 3));
    }
    Ok(data.map_inputs(inputs)?.with_name(format!("{} smooth", data.name)))
}

/// Reassigns `count` distinct samples, chosen uniformly, to a different class
/// drawn uniformly. Returns the corrupted set and the flipped indices, ascending.
pub fn flip_labels(data: &Dataset, count: usize, seed: u64) -> Result<(Dataset, Vec<usize>)> {
    let labels = data.labels().ok_or(GvmError::InvalidDataset("flipping needs labels".into()))?;
    let l = data.output_dim();
    if count > data.len() {
        return Err(GvmError::TooManyRequested { requested: count, available: data.len() });
    }
    if l < 2 && count > 0 {
        return Err(GvmError::InvalidDataset("flipping needs at least two classes".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chosen = rand::seq::index::sample(&mut rng, data.len(), count).into_vec();
    chosen.sort_unstable();
    let mut out = labels.to_vec();
    for &mu in &chosen {
        let shift = rng.random_range(1..l);
        out[mu] = (out[mu] + shift) % l;
    }
    Ok((data.with_labels(out)?, chosen))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn image_set(images: Vec<Vec<f64>>) -> Dataset {
        let n = images.len();
        Dataset::classification(IMAGE_PIXELS, images.concat(), 10, vec![3; n]).unwrap()
    }

    fn at(r: usize, c: usize) -> usize {
        r * IMAGE_SIDE + c
    }

    #[test]
    fn goal_values() {
        assert_eq!(GoalFunction::Sinc.eval(&[0.0]), 1.0);
        assert_eq!(GoalFunction::Hermite5.eval(&[1.0]), 1.0);
        assert_eq!(GoalFunction::Hermite7.eval(&[1.0]), 1.0);
        assert!((GoalFunction::Hermite7.eval(&[0.5]) - 0.223_144_531_25).abs() < 1e-12);
        let sq = GoalFunction::SQUARE_WAVE;
        assert_eq!((sq.eval(&[0.0]), sq.eval(&[4.9]), sq.eval(&[5.0]), sq.eval(&[-0.1])), (1.0, 1.0, -1.0, -1.0));
        assert!((GoalFunction::Sinc2d.eval(&[3.0, 4.0]) - libm::sin(5.0) / 5.0).abs() < 1e-15);
        for g in [GoalFunction::Sin, GoalFunction::Sinc, GoalFunction::Hermite5, GoalFunction::Sinc2d] {
            assert_eq!(GoalFunction::from_name(g.name()), Some(g));
        }
    }

    #[test]
    fn goal_second_derivatives_match_finite_differences() {
        let h = 1e-4;
        for g in [GoalFunction::Sin, GoalFunction::Sinc, GoalFunction::Hermite5, GoalFunction::Hermite7] {
            for k in -20..=20 {
                let x = k as f64 * 0.049 * g.default_half_width();
                let fd = (g.eval(&[x + h]) - 2.0 * g.eval(&[x]) + g.eval(&[x - h])) / (h * h);
                let an = g.second_derivative(&[x], 0, 0).unwrap();
                assert!((fd - an).abs() < 1e-5 * (1.0 + an.abs()), "{g:?} {x} {fd} {an}");
            }
        }
        let g = GoalFunction::Sinc2d;
        for &(x, y) in &[(0.3, -1.2), (2.0, 0.5), (0.004, 0.002), (-3.0, 4.0)] {
            let e = |a: f64, b: f64| g.eval(&[a, b]);
            let hxx = (e(x + h, y) - 2.0 * e(x, y) + e(x - h, y)) / (h * h);
            let hxy = (e(x + h, y + h) - e(x + h, y - h) - e(x - h, y + h) + e(x - h, y - h)) / (4.0 * h * h);
            assert!((g.second_derivative(&[x, y], 0, 0).unwrap() - hxx).abs() < 1e-5);
            assert!((g.second_derivative(&[x, y], 0, 1).unwrap() - hxy).abs() < 1e-5);
        }
        assert!(GoalFunction::SQUARE_WAVE.second_derivative(&[1.0], 0, 0).is_err());
    }

    #[test]
    fn regression_grid_examples() {
        let d = gen_regression(GoalFunction::Sin, core::f64::consts::PI, 3, 0.0, 0).unwrap();
        assert_eq!(d.inputs(), &[-core::f64::consts::PI, 0.0, core::f64::consts::PI]);
        for mu in 0..3 {
            assert!(d.target(mu).unwrap()[0].abs() < 1e-15);
        }
        let d = gen_regression(GoalFunction::Hermite5, 1.0, 20, 0.0, 0).unwrap();
        assert_eq!(d.target(19).unwrap()[0], 1.0);
        for (mu, x) in d.iter_inputs().enumerate() {
            assert_eq!(d.target(mu).unwrap()[0], GoalFunction::Hermite5.eval(x));
        }
        let noisy = gen_regression(GoalFunction::Sinc, 10.0, 100, 0.1, 7).unwrap();
        assert_eq!((noisy.len(), noisy.input_dim()), (100, 1));
        let resid: f64 = noisy
            .iter_inputs()
            .enumerate()
            .map(|(mu, x)| (noisy.target(mu).unwrap()[0] - GoalFunction::Sinc.eval(x)).powi(2))
            .sum::<f64>()
            / 100.0;
        assert!((resid.sqrt() - 0.1).abs() < 0.03);
        assert_eq!(noisy, gen_regression(GoalFunction::Sinc, 10.0, 100, 0.1, 7).unwrap());

        let grid = gen_regression(GoalFunction::Sinc2d, 10.0, 100, 0.0, 0).unwrap();
        assert_eq!((grid.len(), grid.input_dim()), (100, 2));
        assert!(gen_regression(GoalFunction::Sinc2d, 10.0, 99, 0.0, 0).is_err());
        assert!(gen_regression(GoalFunction::Sin, 1.0, 1, 0.0, 0).is_err());
    }

    #[test]
    fn default_controls() {
        let c = default_regression_controls(core::f64::consts::PI);
        assert!((c.c_w - 3.183_098_861_837_907).abs() < 1e-12);
        assert_eq!((c.c_b, c.c_beta), (10.0, 0.5));
        assert_eq!(default_regression_controls(10.0).c_w, 1.0);
        assert_eq!(default_regression_controls(1.0).c_w, 10.0);
        let w = wisconsin_controls();
        assert_eq!((w.c_b, w.n_hidden, w.cost.margin()), (10.0, 200, Some(16.0)));
        assert_eq!((w.c_w, w.c_beta), (1.0, 1.0));
    }

    #[test]
    fn shift_examples() {
        let mut img = vec![0.0; IMAGE_PIXELS];
        img[at(14, 14)] = 25.5;
        let d = image_set(vec![img.clone(), vec![0.0; IMAGE_PIXELS]]);
        let s = augment_shift(&d, 2).unwrap();
        assert_eq!(s.len(), 16);
        assert_eq!(s.labels().unwrap(), &[3; 16]);
        // Third direction is E.
        assert_eq!(s.input(2)[at(14, 16)], 25.5);
        assert_eq!(s.input(0)[at(12, 14)], 25.5);
        assert_eq!(s.input(7)[at(16, 12)], 25.5);
        for k in 0..8 {
            assert_eq!(s.input(k).iter().sum::<f64>(), 25.5);
            assert!(s.input(8 + k).iter().all(|&v| v == 0.0));
        }
        // Mass shifted off the border disappears.
        let mut edge = vec![0.0; IMAGE_PIXELS];
        edge[at(0, 27)] = 1.0;
        edge[at(10, 10)] = 2.0;
        let s = augment_shift(&image_set(vec![edge]), 2).unwrap();
        assert_eq!(s.input(2).iter().sum::<f64>(), 2.0);
        assert_eq!(s.input(3).iter().sum::<f64>(), 3.0);
        assert!(augment_shift(&Dataset::classification(4, vec![0.0; 4], 2, vec![0]).unwrap(), 2).is_err());
    }

    #[test]
    fn noise_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let images: Vec<Vec<f64>> = (0..15)
            .map(|_| (0..IMAGE_PIXELS).map(|_| rand::Rng::random_range(&mut rng, 0.0..25.5)).collect())
            .collect();
        let d = image_set(images);
        let exact = augment_noise(&d, 0.0, 10, 1).unwrap();
        assert_eq!(exact.len(), 150);
        assert_eq!(exact.input(13), d.input(1));

        let noisy = augment_noise(&d, 80.0, 10, 1).unwrap();
        let mut sq = 0.0;
        let mut count = 0usize;
        for mu in 0..noisy.len() {
            for (a, b) in noisy.input(mu).iter().zip(d.input(mu / 10)) {
                sq += (a - b) * (a - b);
                count += 1;
            }
        }
        assert!(count >= 100_000);
        let std = (sq / count as f64).sqrt();
        assert!((std - 8.0).abs() < 0.02 * 8.0, "{std}");
    }

    #[test]
    fn smoothing_examples() {
        let d = image_set(vec![vec![3.0; IMAGE_PIXELS]]);
        let s = gauss_smooth(&d).unwrap();
        for r in 3..25 {
            for c in 3..25 {
                assert!((s.input(0)[at(r, c)] - 3.0).abs() < 1e-12);
            }
        }

        // Delta image: the blurred result is the 2D kernel table.
        let mut delta = vec![0.0; IMAGE_PIXELS];
        delta[at(14, 14)] = 1.0;
        let out = gaussian_blur(&delta, 1.0, 3);
        let mut table = [[0.0f64; 7]; 7];
        let mut total = 0.0;
        for (a, row) in table.iter_mut().enumerate() {
            for (b, v) in row.iter_mut().enumerate() {
                let (da, db) = (a as f64 - 3.0, b as f64 - 3.0);
                *v = (-(da * da + db * db) / 2.0).exp();
                total += *v;
            }
        }
        for a in 0..7 {
            for b in 0..7 {
                let expected = table[a][b] / total;
                assert!((out[at(11 + a, 11 + b)] - expected).abs() < 1e-15);
            }
        }
        assert!((out[at(14, 14)] - 1.0 / total).abs() < 1e-15);
        assert_eq!(out[at(14, 18)], 0.0);

        // Blurring twice with σ=1 is close to one blur with σ=√2.
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut img = vec![0.0; IMAGE_PIXELS];
        for r in 6..22 {
            for c in 6..22 {
                img[at(r, c)] = rand::Rng::random_range(&mut rng, 0.0..1.0);
            }
        }
        let twice = gaussian_blur(&gaussian_blur(&img, 1.0, 3), 1.0, 3);
        let once = gaussian_blur(&img, 2f64.sqrt(), 5);
        for r in 6..22 {
            for c in 6..22 {
                assert!((twice[at(r, c)] - once[at(r, c)]).abs() < 1e-2);
            }
        }
    }

    #[test]
    fn flip_examples() {
        let d = Dataset::classification(1, (0..50).map(f64::from).collect(), 10, (0..50).map(|k| k % 10).collect())
            .unwrap();
        let (bad, idx) = flip_labels(&d, 5, 3).unwrap();
        assert_eq!(idx.len(), 5);
        assert!(idx.windows(2).all(|w| w[0] < w[1]));
        for mu in 0..50 {
            let changed = bad.labels().unwrap()[mu] != d.labels().unwrap()[mu];
            assert_eq!(changed, idx.contains(&mu));
        }
        assert_eq!(bad.inputs(), d.inputs());
        assert_eq!(flip_labels(&d, 5, 3).unwrap().1, idx);
        assert!(flip_labels(&d, 51, 3).is_err());
        assert_eq!(flip_labels(&d, 0, 3).unwrap().0, d);
    }
}
