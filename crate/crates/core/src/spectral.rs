//! Spectra of Hermitian operators, fractional `k`-positivity, and the
//! weighted eigenvalue-sum bound.

use alloc::vec::Vec;
use core::fmt;

use crate::curvature::{CurvatureOperatorMatrix, OperatorKind};
use crate::linalg::{hermitian_eigen, CMatrix, LinalgError};

#[allow(unused_imports)]
use num_traits::Float;

/// Relative margin used for the nonnegative/positive decisions.
pub const POSITIVITY_EPS: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub enum SpectralError {
    Linalg(LinalgError),
    /// `k` must be positive and at most the dimension.
    InvalidK { k: f64, dim: usize },
    /// Weights must lie in `[0, max_weight]` and sum to `total_weight`.
    WeightConstraint { detail: &'static str, index: Option<usize>, value: f64 },
}

impl fmt::Display for SpectralError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpectralError::Linalg(e) => write!(f, "{e}"),
            SpectralError::InvalidK { k, dim } => write!(f, "k = {k} is outside (0, {dim}]"),
            SpectralError::WeightConstraint { detail, index: Some(i), value } => {
                write!(f, "weight constraint violated ({detail}) at index {i}: {value}")
            }
            SpectralError::WeightConstraint { detail, index: None, value } => {
                write!(f, "weight constraint violated ({detail}): {value}")
            }
        }
    }
}

impl core::error::Error for SpectralError {}

impl From<LinalgError> for SpectralError {
    fn from(e: LinalgError) -> Self {
        SpectralError::Linalg(e)
    }
}

/// Ascending eigenvalues, optionally with unitary eigenvectors as columns.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    pub values: Vec<f64>,
    pub vectors: Option<CMatrix>,
    pub source: Option<OperatorKind>,
}

impl Spectrum {
    /// A spectrum given directly by its eigenvalues; they are sorted here.
    pub fn from_values(mut values: Vec<f64>) -> Self {
        values.sort_by(f64::total_cmp);
        Spectrum { values, vectors: None, source: None }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// `max |λ|`.
    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn scaled(&self, c: f64) -> Self {
        let mut s = self.clone();
        for v in s.values.iter_mut() {
            *v *= c;
        }
        if c < 0.0 {
            s.values.reverse();
            if let Some(u) = s.vectors.as_mut() {
                let m = u.cols();
                let old = u.clone();
                for col in 0..m {
                    u.set_column(col, &old.column(m - 1 - col));
                }
            }
        }
        s
    }

    /// `max |U Uᴴ − I|`, or `None` without eigenvectors.
    pub fn orthonormality_residual(&self) -> Option<f64> {
        self.vectors.as_ref().map(|u| u.unitarity_residual())
    }

    /// `max |U diag(λ) Uᴴ − H|`, or `None` without eigenvectors.
    pub fn reconstruction_residual(&self, h: &CMatrix) -> Option<f64> {
        self.vectors.as_ref().map(|u| {
            let d = CMatrix::diagonal(&self.values);
            u.mul(&d).mul(&u.adjoint()).max_abs_diff(h)
        })
    }
}

/// Full eigendecomposition: ascending eigenvalues, ties broken
/// lexicographically on the phase-normalized eigenvectors.
pub fn eigensystem(h: &CMatrix) -> Result<Spectrum, SpectralError> {
    let e = hermitian_eigen(h)?;
    Ok(Spectrum { values: e.values, vectors: Some(e.vectors), source: None })
}

pub fn operator_spectrum(op: &CurvatureOperatorMatrix) -> Result<Spectrum, SpectralError> {
    let mut s = eigensystem(&op.matrix)?;
    s.source = Some(op.kind);
    Ok(s)
}

/// Result of the fractional `k`-positivity test.
#[derive(Clone, Debug, PartialEq)]
pub struct PositivityReport {
    pub k: f64,
    /// `λ_1 + … + λ_⌊k⌋ + (k − ⌊k⌋) λ_{⌊k⌋+1}`.
    pub partial_sum: f64,
    pub nonneg: bool,
    pub positive: bool,
    /// Largest `κ` with `partial_sum ≥ κ k`, i.e. `partial_sum / k`.
    pub kappa_bound: Option<f64>,
    /// Margin `ε · k · max|λ|` used for both decisions.
    pub margin: f64,
}

/// The `k`-th partial sum, with fractional `k` allowed. When `⌊k⌋` equals the
/// dimension the fractional term is dropped.
pub fn partial_sum(values: &[f64], k: f64) -> f64 {
    let fl = k.floor() as usize;
    let whole: f64 = values[..fl.min(values.len())].iter().sum();
    if fl < values.len() {
        whole + (k - fl as f64) * values[fl]
    } else {
        whole
    }
}

/// `k`-nonnegativity (`≥ −margin`) and `k`-positivity (`> margin`), where the
/// margin is [`POSITIVITY_EPS`]` · k · max|λ|`. Scaling the margin with `k`
/// keeps both flags monotone in `k`, since `partial_sum(k) / k` is nondecreasing.
pub fn k_test(s: &Spectrum, k: f64) -> Result<PositivityReport, SpectralError> {
    k_test_with_eps(s, k, POSITIVITY_EPS)
}

pub fn k_test_with_eps(s: &Spectrum, k: f64, eps: f64) -> Result<PositivityReport, SpectralError> {
    let dim = s.dim();
    if !(k > 0.0) || k > dim as f64 {
        return Err(SpectralError::InvalidK { k, dim });
    }
    let sum = partial_sum(&s.values, k);
    let margin = eps * k * s.sup_norm();
    Ok(PositivityReport {
        k,
        partial_sum: sum,
        nonneg: sum >= -margin,
        positive: sum > margin,
        kappa_bound: Some(sum / k),
        margin,
    })
}

/// Outcome of the weighted-sum bound.
#[derive(Clone, Debug, PartialEq)]
pub enum WeightBound {
    /// `Σ w_ν λ_ν ≥ κ · total_weight` is certified.
    Certified {
        bound: f64,
        /// `Υ = total_weight / max_weight`.
        upsilon: f64,
        /// The intermediate lower bounds of the chain, in order:
        /// `λ_{⌊Υ⌋+1} W + Σ_{ν ≤ ⌊Υ⌋} (λ_ν − λ_{⌊Υ⌋+1}) w_ν`,
        /// then `(W/Υ) · partial_sum(Υ)`, then `κ W`.
        chain: [f64; 3],
        direct: f64,
    },
    /// The spectrum fails `partial_sum(Υ) ≥ κΥ`.
    Refused { upsilon: f64, partial_sum: f64, direct: f64 },
}

impl WeightBound {
    pub fn direct(&self) -> f64 {
        match self {
            WeightBound::Certified { direct, .. } | WeightBound::Refused { direct, .. } => *direct,
        }
    }
}

/// Given weights `0 ≤ w_ν ≤ M` with `Σ w_ν = W` attached to the ascending
/// eigenvalues, certifies `Σ w_ν λ_ν ≥ κ W` whenever the spectrum is
/// `κ`-bounded at `Υ = W/M` in the sense `partial_sum(Υ) ≥ κ Υ`.
///
/// `tol` is the relative slack allowed in the weight constraints.
pub fn weight_principle(
    s: &Spectrum,
    weights: &[f64],
    total_weight: f64,
    max_weight: f64,
    kappa: f64,
    tol: f64,
) -> Result<WeightBound, SpectralError> {
    let m = s.dim();
    if weights.len() != m {
        return Err(SpectralError::WeightConstraint { detail: "length", index: None, value: weights.len() as f64 });
    }
    if kappa > 0.0 {
        return Err(SpectralError::WeightConstraint { detail: "kappa must be <= 0", index: None, value: kappa });
    }
    if !(max_weight > 0.0) {
        return Err(SpectralError::WeightConstraint { detail: "max weight must be positive", index: None, value: max_weight });
    }
    let slack = tol * max_weight.max(total_weight);
    for (i, &w) in weights.iter().enumerate() {
        if w < -slack || w > max_weight + slack {
            return Err(SpectralError::WeightConstraint { detail: "weight outside [0, max]", index: Some(i), value: w });
        }
    }
    let sum_w: f64 = weights.iter().sum();
    if (sum_w - total_weight).abs() > slack {
        return Err(SpectralError::WeightConstraint { detail: "weights do not sum to total", index: None, value: sum_w });
    }
    let upsilon = total_weight / max_weight;
    if upsilon > m as f64 * (1.0 + tol) {
        return Err(SpectralError::WeightConstraint { detail: "total/max exceeds dimension", index: None, value: upsilon });
    }
    let upsilon = upsilon.min(m as f64);
    let direct: f64 = weights.iter().zip(&s.values).map(|(w, l)| w * l).sum();
    if upsilon == 0.0 {
        return Ok(WeightBound::Certified { bound: 0.0, upsilon, chain: [0.0; 3], direct });
    }
    let ps = partial_sum(&s.values, upsilon);
    let margin = POSITIVITY_EPS * upsilon * s.sup_norm();
    if ps < kappa * upsilon - margin {
        return Ok(WeightBound::Refused { upsilon, partial_sum: ps, direct });
    }
    let fl = (upsilon.floor() as usize).min(m);
    let pivot = if fl < m { s.values[fl] } else { s.values[m - 1] };
    let step1 = pivot * total_weight + (0..fl).map(|i| (s.values[i] - pivot) * weights[i]).sum::<f64>();
    let step2 = total_weight / upsilon * ps;
    let bound = kappa * total_weight;
    Ok(WeightBound::Certified { bound, upsilon, chain: [step1, step2, bound], direct })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::C64;
    use alloc::vec;

    #[test]
    fn identity_and_diagonal() {
        let s = eigensystem(&CMatrix::identity(4)).unwrap();
        assert!(s.values.iter().all(|&v| (v - 1.0).abs() < 1e-15));
        let s = eigensystem(&CMatrix::diagonal(&[2.0, -1.0, 0.0])).unwrap();
        assert_eq!(s.values, vec![-1.0, 0.0, 2.0]);
    }

    #[test]
    fn reconstruction_of_a_fixed_hermitian_matrix() {
        let m = 10;
        let h = CMatrix::from_fn(m, m, |r, c| {
            let (a, b) = (r as f64, c as f64);
            if r == c {
                C64::new((a * 0.7).sin(), 0.0)
            } else if r < c {
                C64::new((a + 2.0 * b).cos(), (a * b * 0.1).sin())
            } else {
                C64::new((b + 2.0 * a).cos(), -(a * b * 0.1).sin())
            }
        });
        let s = eigensystem(&h).unwrap();
        assert!(s.orthonormality_residual().unwrap() < 1e-10);
        assert!(s.reconstruction_residual(&h).unwrap() < 1e-10);
    }

    #[test]
    fn k_test_examples() {
        let s = Spectrum::from_values(vec![1.0, -1.0, 1.0]);
        let r1 = k_test(&s, 1.0).unwrap();
        assert_eq!(r1.partial_sum, -1.0);
        assert!(!r1.nonneg);
        let r2 = k_test(&s, 2.0).unwrap();
        assert_eq!(r2.partial_sum, 0.0);
        assert!(r2.nonneg && !r2.positive);
        let r15 = k_test(&s, 1.5).unwrap();
        assert_eq!(r15.partial_sum, -0.5);
        assert!(!r15.nonneg);
        let full = k_test(&s, 3.0).unwrap();
        assert_eq!(full.partial_sum, 1.0);
        assert!(matches!(k_test(&s, 0.0), Err(SpectralError::InvalidK { .. })));
        assert!(matches!(k_test(&s, 3.5), Err(SpectralError::InvalidK { .. })));
    }

    #[test]
    fn negative_scaling_reverses_order() {
        let s = eigensystem(&CMatrix::diagonal(&[1.0, 2.0, 3.0])).unwrap();
        let t = s.scaled(-1.0);
        assert_eq!(t.values, vec![-3.0, -2.0, -1.0]);
        let h = CMatrix::diagonal(&[-1.0, -2.0, -3.0]);
        assert!(t.reconstruction_residual(&h).unwrap() < 1e-15);
    }

    #[test]
    fn weight_principle_examples() {
        let s = Spectrum::from_values(vec![0.0, 1.0, 2.0]);
        let w = [1.0, 1.0, 1.0];
        match weight_principle(&s, &w, 3.0, 1.0, 0.0, 1e-12).unwrap() {
            WeightBound::Certified { bound, direct, .. } => {
                assert_eq!(bound, 0.0);
                assert!(direct >= bound);
            }
            other => panic!("{other:?}"),
        }
        let s = Spectrum::from_values(vec![-2.0, 1.0, 1.0]);
        let w = [1.0, 0.0, 0.0];
        // Υ = 1: λ_1 = −2 < 0
        assert!(matches!(weight_principle(&s, &w, 1.0, 1.0, 0.0, 1e-12).unwrap(), WeightBound::Refused { .. }));
        assert!(weight_principle(&s, &[2.0, 0.0, 0.0], 2.0, 1.0, 0.0, 1e-12).is_err());
    }
}
