//! Cost functions.
//!
//! Regression uses the RMS training error. Classification uses margin costs
//! on the output fields `h` and the sign pattern `s` of the true class
//! (`s = +1` on the true class, `−1` elsewhere). All classification costs are
//! averaged over the `P·L` entries.
//!
//! Every cost here is a sum of per-sample terms followed by a normalization,
//! which lets the trainer cache one term per sample and re-evaluate only the
//! samples a proposal touches.

use alloc::vec::Vec;

use crate::{Dataset, GvmError, Result};

/// Selects the cost and carries its margins.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CostSpec {
    /// Empirical risk `√((1/P) Σ |t − y|²)`.
    Empirical,
    /// Penalizes only entries with `h·s < d`.
    F1 { d: f64 },
    /// Pulls every `h·s` onto `d`.
    F2 { d: f64 },
    /// Drives `h·s` into `[d1, d2]`.
    F3 { d1: f64, d2: f64 },
    /// Pulls every gap `h_ν − h_l` (`l ≠ ν`) onto `d`.
    F2Bar { d: f64 },
}

/// Target of one sample as seen by a cost term.
#[derive(Debug, Clone, Copy)]
pub enum SampleTarget<'a> {
    Values(&'a [f64]),
    Class(usize),
}

impl CostSpec {
    pub fn name(&self) -> &'static str {
        match self {
            CostSpec::Empirical => "Fe",
            CostSpec::F1 { .. } => "F1",
            CostSpec::F2 { .. } => "F2",
            CostSpec::F3 { .. } => "F3",
            CostSpec::F2Bar { .. } => "F2bar",
        }
    }

    pub fn is_regression(&self) -> bool {
        matches!(self, CostSpec::Empirical)
    }

    /// Margin `d` (or `d1` for F3), if any.
    pub fn margin(&self) -> Option<f64> {
        match *self {
            CostSpec::Empirical => None,
            CostSpec::F1 { d } | CostSpec::F2 { d } | CostSpec::F2Bar { d } => Some(d),
            CostSpec::F3 { d1, .. } => Some(d1),
        }
    }

    /// Same cost kind with a new margin; F3 keeps its interval width.
    pub fn with_margin(self, d: f64) -> CostSpec {
        match self {
            CostSpec::Empirical => CostSpec::Empirical,
            CostSpec::F1 { .. } => CostSpec::F1 { d },
            CostSpec::F2 { .. } => CostSpec::F2 { d },
            CostSpec::F2Bar { .. } => CostSpec::F2Bar { d },
            CostSpec::F3 { d1, d2 } => CostSpec::F3 { d1: d, d2: d + (d2 - d1) },
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            CostSpec::Empirical => Ok(()),
            CostSpec::F1 { d } | CostSpec::F2 { d } | CostSpec::F2Bar { d } => {
                if d > 0.0 && d.is_finite() {
                    Ok(())
                } else {
                    Err(GvmError::InvalidControl("margin d must be positive"))
                }
            }
            CostSpec::F3 { d1, d2 } => {
                if d1 > 0.0 && d2 > d1 && d2.is_finite() {
                    Ok(())
                } else {
                    Err(GvmError::InvalidControl("F3 needs 0 < d1 < d2"))
                }
            }
        }
    }

    /// Checks that this cost can be used with the targets of `data`.
    pub fn check_data(&self, data: &Dataset) -> Result<()> {
        match (self.is_regression(), data.is_classification()) {
            (true, true) => Err(GvmError::CostMismatch { cost: self.name(), task: "classification" }),
            (false, false) => Err(GvmError::CostMismatch { cost: self.name(), task: "regression" }),
            _ => Ok(()),
        }
    }

    /// Unnormalized contribution of one sample with output fields `h`.
    #[inline]
    pub fn sample_term(&self, h: &[f64], target: SampleTarget<'_>) -> f64 {
        match (*self, target) {
            (CostSpec::Empirical, SampleTarget::Values(t)) => h.iter().zip(t).map(|(y, t)| (t - y) * (t - y)).sum(),
            (CostSpec::F1 { d }, SampleTarget::Class(nu)) => {
                let mut acc = 0.0;
                for (l, &hl) in h.iter().enumerate() {
                    let m = if l == nu { hl } else { -hl };
                    if m < d {
                        acc += (m - d) * (m - d);
                    }
                }
                acc
            }
            (CostSpec::F2 { d }, SampleTarget::Class(nu)) => {
                let mut acc = 0.0;
                for (l, &hl) in h.iter().enumerate() {
                    let m = if l == nu { hl } else { -hl };
                    acc += (m - d) * (m - d);
                }
                acc
            }
            (CostSpec::F3 { d1, d2 }, SampleTarget::Class(nu)) => {
                let mut acc = 0.0;
                for (l, &hl) in h.iter().enumerate() {
                    let m = if l == nu { hl } else { -hl };
                    if m < d1 {
                        acc += (m - d1) * (m - d1);
                    } else if m > d2 {
                        acc += (m - d2) * (m - d2);
                    }
                }
                acc
            }
            (CostSpec::F2Bar { d }, SampleTarget::Class(nu)) => {
                let hn = h[nu];
                let mut acc = 0.0;
                for (l, &hl) in h.iter().enumerate() {
                    if l != nu {
                        let g = hn - hl - d;
                        acc += g * g;
                    }
                }
                acc
            }
            // check_data rules these out before training starts.
            _ => f64::NAN,
        }
    }

    /// Turns a sum of sample terms into the cost value.
    #[inline]
    pub fn finish(&self, sum: f64, p: usize, l: usize) -> f64 {
        match self {
            CostSpec::Empirical => libm::sqrt(sum / p as f64),
            _ => sum / (p * l) as f64,
        }
    }

    /// Cost of the `P × L` field matrix `fields` against `data`'s targets.
    pub fn evaluate(&self, fields: &[f64], data: &Dataset) -> Result<f64> {
        self.check_data(data)?;
        let (p, l) = (data.len(), data.output_dim());
        if p == 0 {
            return Err(GvmError::EmptyInput);
        }
        if fields.len() != p * l {
            return Err(GvmError::DimensionMismatch { expected: p * l, found: fields.len() });
        }
        let sum: f64 = (0..p).map(|mu| self.sample_term(&fields[mu * l..(mu + 1) * l], sample_target(data, mu))).sum();
        Ok(self.finish(sum, p, l))
    }
}

#[inline]
pub(crate) fn sample_target(data: &Dataset, mu: usize) -> SampleTarget<'_> {
    match data.labels() {
        Some(labels) => SampleTarget::Class(labels[mu]),
        None => SampleTarget::Values(data.target(mu).unwrap_or(&[])),
    }
}

/// `P × L` matrix of `±1` with exactly one `+1` (the true class) per row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignMatrix {
    l: usize,
    signs: Vec<i8>,
}

impl SignMatrix {
    pub fn from_labels(labels: &[usize], l: usize) -> Result<Self> {
        let mut signs = alloc::vec![-1i8; labels.len() * l];
        for (mu, &nu) in labels.iter().enumerate() {
            if nu >= l {
                return Err(GvmError::IndexOutOfRange { index: nu, bound: l });
            }
            signs[mu * l + nu] = 1;
        }
        Ok(SignMatrix { l, signs })
    }

    pub fn rows(&self) -> usize {
        self.signs.len() / self.l
    }

    pub fn cols(&self) -> usize {
        self.l
    }

    #[inline]
    pub fn get(&self, mu: usize, l: usize) -> f64 {
        self.signs[mu * self.l + l] as f64
    }
}

fn check_shape(fields: &[f64], s: &SignMatrix) -> Result<()> {
    if fields.len() != s.signs.len() {
        return Err(GvmError::DimensionMismatch { expected: s.signs.len(), found: fields.len() });
    }
    if s.signs.is_empty() {
        return Err(GvmError::EmptyInput);
    }
    Ok(())
}

fn margin_sum(fields: &[f64], s: &SignMatrix, mut term: impl FnMut(f64) -> f64) -> Result<f64> {
    check_shape(fields, s)?;
    let sum: f64 = fields.iter().zip(&s.signs).map(|(&h, &si)| term(h * si as f64)).sum();
    Ok(sum / fields.len() as f64)
}

/// `√((1/P) Σ_μ |tᵘ − yᵘ|²)` over `P × L` row-major matrices.
pub fn empirical_risk(outputs: &[f64], targets: &[f64], l: usize) -> Result<f64> {
    if outputs.len() != targets.len() {
        return Err(GvmError::DimensionMismatch { expected: targets.len(), found: outputs.len() });
    }
    if outputs.is_empty() || l == 0 {
        return Err(GvmError::EmptyInput);
    }
    let p = outputs.len() / l;
    let sum: f64 = outputs.iter().zip(targets).map(|(y, t)| (t - y) * (t - y)).sum();
    Ok(libm::sqrt(sum / p as f64))
}

pub fn cost_f1(fields: &[f64], s: &SignMatrix, d: f64) -> Result<f64> {
    margin_sum(fields, s, |m| if m < d { (m - d) * (m - d) } else { 0.0 })
}

pub fn cost_f2(fields: &[f64], s: &SignMatrix, d: f64) -> Result<f64> {
    margin_sum(fields, s, |m| (m - d) * (m - d))
}

/// Interval cost; the upper branch is anchored at `d2`.
pub fn cost_f3(fields: &[f64], s: &SignMatrix, d1: f64, d2: f64) -> Result<f64> {
    if d1 > d2 {
        return Err(GvmError::InvalidControl("F3 needs d1 <= d2"));
    }
    margin_sum(fields, s, |m| {
        if m < d1 {
            (m - d1) * (m - d1)
        } else if m > d2 {
            (m - d2) * (m - d2)
        } else {
            0.0
        }
    })
}

pub fn cost_f2bar(fields: &[f64], labels: &[usize], l: usize, d: f64) -> Result<f64> {
    if fields.len() != labels.len() * l {
        return Err(GvmError::DimensionMismatch { expected: labels.len() * l, found: fields.len() });
    }
    if labels.is_empty() {
        return Err(GvmError::EmptyInput);
    }
    let spec = CostSpec::F2Bar { d };
    let mut sum = 0.0;
    for (mu, &nu) in labels.iter().enumerate() {
        if nu >= l {
            return Err(GvmError::IndexOutOfRange { index: nu, bound: l });
        }
        sum += spec.sample_term(&fields[mu * l..(mu + 1) * l], SampleTarget::Class(nu));
    }
    Ok(sum / fields.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    fn signs(labels: &[usize], l: usize) -> SignMatrix {
        SignMatrix::from_labels(labels, l).unwrap()
    }

    #[test]
    fn empirical_risk_examples() {
        assert_eq!(empirical_risk(&[1.0, 2.0], &[1.0, 2.0], 1).unwrap(), 0.0);
        assert_eq!(empirical_risk(&[0.0], &[1.0], 1).unwrap(), 1.0);
        let v = empirical_risk(&[1.0, 0.0], &[0.0, 0.0], 1).unwrap();
        assert!((v - 0.5f64.sqrt()).abs() < 1e-15);
        assert_eq!(empirical_risk(&[], &[], 1), Err(GvmError::EmptyInput));
    }

    #[test]
    fn f1_examples() {
        let s = signs(&[0], 2);
        assert_eq!(cost_f1(&[5.0, -5.0], &s, 3.0).unwrap(), 0.0);
        assert_eq!(cost_f1(&[1.0, -5.0], &s, 3.0).unwrap(), 2.0);
        assert_eq!(cost_f1(&[0.5, -0.5], &s, 1e-9).unwrap(), 0.0);
    }

    #[test]
    fn f2_examples() {
        let s = signs(&[0], 2);
        assert_eq!(cost_f2(&[3.0, -3.0], &s, 3.0).unwrap(), 0.0);
        assert_eq!(cost_f2(&[5.0, -5.0], &s, 3.0).unwrap(), 4.0);
        assert_eq!(cost_f2(&[0.0], &signs(&[0], 1), 3.0).unwrap(), 9.0);
    }

    #[test]
    fn f3_examples() {
        let s = signs(&[0, 1], 2);
        assert_eq!(cost_f3(&[2.5, -3.0, -4.0, 5.9], &s, 2.0, 6.0).unwrap(), 0.0);
        assert_eq!(cost_f3(&[10.0], &signs(&[0], 1), 2.0, 6.0).unwrap(), 16.0);
        let h = [1.0, 40.0, -7.0, 2.0];
        let f1 = cost_f1(&h, &s, 2.0).unwrap();
        assert_eq!(cost_f3(&h, &s, 2.0, 1e300).unwrap(), f1);
    }

    #[test]
    fn f2bar_examples() {
        assert_eq!(cost_f2bar(&[4.0, 1.0, 0.0, 3.0], &[0, 1], 2, 3.0).unwrap(), 0.0);
        assert_eq!(cost_f2bar(&[4.0, 1.0], &[0], 2, 3.0).unwrap(), 0.0);
        assert_eq!(cost_f2bar(&[4.0, 1.0, 4.0], &[0], 3, 3.0).unwrap(), 3.0);
    }

    #[test]
    fn evaluate_matches_free_functions() {
        let data = Dataset::classification(1, vec![0.0, 1.0, 2.0], 3, vec![2, 0, 1]).unwrap();
        let h = [0.4, -2.0, 7.0, 3.0, 1.0, -1.5, -0.2, 9.0, 0.1];
        let s = signs(&[2, 0, 1], 3);
        let pairs = [
            (CostSpec::F1 { d: 2.0 }, cost_f1(&h, &s, 2.0).unwrap()),
            (CostSpec::F2 { d: 2.0 }, cost_f2(&h, &s, 2.0).unwrap()),
            (CostSpec::F3 { d1: 1.0, d2: 4.0 }, cost_f3(&h, &s, 1.0, 4.0).unwrap()),
            (CostSpec::F2Bar { d: 2.0 }, cost_f2bar(&h, &[2, 0, 1], 3, 2.0).unwrap()),
        ];
        for (spec, expected) in pairs {
            assert!((spec.evaluate(&h, &data).unwrap() - expected).abs() < 1e-14, "{spec:?}");
        }
        assert!(CostSpec::Empirical.evaluate(&h, &data).is_err());
    }

    #[test]
    fn validation_rules() {
        assert!(CostSpec::F1 { d: 0.0 }.validate().is_err());
        assert!(CostSpec::F3 { d1: 2.0, d2: 2.0 }.validate().is_err());
        assert!(CostSpec::F3 { d1: 1.0, d2: 2.0 }.validate().is_ok());
        assert_eq!(CostSpec::F3 { d1: 1.0, d2: 3.0 }.with_margin(5.0), CostSpec::F3 { d1: 5.0, d2: 7.0 });
    }

    fn field_case() -> impl Strategy<Value = (Vec<f64>, Vec<usize>, usize, f64)> {
        (1usize..6, 1usize..8).prop_flat_map(|(l, p)| {
            (
                proptest::collection::vec(-50.0f64..50.0, p * l),
                proptest::collection::vec(0..l, p),
                Just(l),
                0.1f64..40.0,
            )
        })
    }

    proptest! {
        #[test]
        fn f1_never_exceeds_f2((h, labels, l, d) in field_case()) {
            let s = signs(&labels, l);
            let f1 = cost_f1(&h, &s, d).unwrap();
            let f2 = cost_f2(&h, &s, d).unwrap();
            prop_assert!(f1 >= 0.0 && f1 <= f2);
            prop_assert!(cost_f3(&h, &s, d, d + 5.0).unwrap() >= 0.0);
            prop_assert!(cost_f2bar(&h, &labels, l, d).unwrap() >= 0.0);
        }

        #[test]
        fn f3_collapses_to_f2((h, labels, l, d) in field_case()) {
            let s = signs(&labels, l);
            let a = cost_f3(&h, &s, d, d).unwrap();
            let b = cost_f2(&h, &s, d).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + b));
        }

        #[test]
        fn f1_f2_ignore_sample_order((h, labels, l, d) in field_case()) {
            let p = labels.len();
            let mut rh = Vec::new();
            let mut rl = Vec::new();
            for mu in (0..p).rev() {
                rh.extend_from_slice(&h[mu * l..(mu + 1) * l]);
                rl.push(labels[mu]);
            }
            let (s, rs) = (signs(&labels, l), signs(&rl, l));
            let tol = 1e-12 * (1.0 + cost_f2(&h, &s, d).unwrap());
            prop_assert!((cost_f1(&h, &s, d).unwrap() - cost_f1(&rh, &rs, d).unwrap()).abs() <= tol);
            prop_assert!((cost_f2(&h, &s, d).unwrap() - cost_f2(&rh, &rs, d).unwrap()).abs() <= tol);
        }

        #[test]
        fn f2bar_ignores_per_sample_shifts(
            (h, labels, l, d) in field_case(),
            shifts in proptest::collection::vec(-30.0f64..30.0, 8),
        ) {
            let shifted: Vec<f64> = h
                .iter()
                .enumerate()
                .map(|(k, v)| v + shifts[k / l])
                .collect();
            let a = cost_f2bar(&h, &labels, l, d).unwrap();
            let b = cost_f2bar(&shifted, &labels, l, d).unwrap();
            prop_assert!((a - b).abs() <= 1e-9 * (1.0 + a));
        }
    }

    #[test]
    fn f1_f2_are_not_shift_invariant() {
        let s = signs(&[0], 2);
        let h = [3.0, -3.0];
        let shifted = [8.0, 2.0];
        assert_ne!(cost_f2(&h, &s, 3.0).unwrap(), cost_f2(&shifted, &s, 3.0).unwrap());
        assert_ne!(cost_f1(&h, &s, 3.0).unwrap(), cost_f1(&shifted, &s, 3.0).unwrap());
        assert_eq!(cost_f2bar(&h, &[0], 2, 6.0).unwrap(), cost_f2bar(&shifted, &[0], 2, 6.0).unwrap());
    }
}
