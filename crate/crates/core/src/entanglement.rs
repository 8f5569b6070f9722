//! Cut spectra, entropies and truncation errors of disentangled tensors.
//!
//! The cut is the `(i, a) | (j, b)` bipartition of `(U·A)[i, j, a, b]`.
//! Entropies are in nats.

use crate::disentangle::Disentangler;
use crate::error::{Error, Result};
use crate::linalg::{singular_values, CMat, C64};
use crate::tensor::{Grouping, Tensor3};

/// Relative cutoff below which a singular value counts as zero.
pub const ZERO_CUTOFF: f64 = 1e-10;

/// Non-increasing singular values with their normalized weights
/// `p_i = λ_i² / Σ_j λ_j²`.
#[derive(Debug, Clone, PartialEq)]
pub struct SingularSpectrum {
    values: Vec<f64>,
    probs: Vec<f64>,
}

impl SingularSpectrum {
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::Parameter("singular values must be finite and non-negative".into()));
        }
        values.sort_by(|a, b| b.total_cmp(a));
        let total: f64 = values.iter().map(|v| v * v).sum();
        if !(total > 0.0) {
            return Err(Error::ZeroInput);
        }
        let probs = values.iter().map(|v| v * v / total).collect();
        Ok(Self { values, probs })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `S = −Σ p_i ln p_i`, with `0·ln 0 = 0`.
    pub fn von_neumann_entropy(&self) -> f64 {
        let s: f64 = self
            .probs
            .iter()
            .filter(|&&p| p > 0.0)
            .map(|&p| -p * p.ln())
            .sum();
        s.max(0.0)
    }

    /// `S_α = ln(Σ p_i^α) / (1 − α)` for `α > 0`, `α ≠ 1`.
    pub fn renyi_entropy(&self, alpha: f64) -> Result<f64> {
        if !(alpha > 0.0) || alpha == 1.0 || !alpha.is_finite() {
            return Err(Error::Parameter(format!("Renyi order must be positive and != 1, got {alpha}")));
        }
        let sum: f64 = self.probs.iter().filter(|&&p| p > 0.0).map(|&p| p.powf(alpha)).sum();
        Ok((sum.ln() / (1.0 - alpha)).max(0.0))
    }

    /// `ε_χ = Σ_{i ≥ χ} p_i²` (0-based): the squared weights discarded when
    /// keeping the first `chi` singular values.
    pub fn truncation_error(&self, chi: usize) -> Result<f64> {
        if chi > self.len() {
            return Err(Error::RankOutOfRange { k: chi, max: self.len() });
        }
        Ok(self.probs[chi..].iter().map(|p| p * p).sum())
    }

    /// `Σ_{i ≥ χ} p_i`: the plain probability weight discarded when keeping
    /// the first `chi` singular values.
    pub fn discarded_weight(&self, chi: usize) -> Result<f64> {
        if chi > self.len() {
            return Err(Error::RankOutOfRange { k: chi, max: self.len() });
        }
        Ok(self.probs[chi..].iter().sum())
    }

    /// Number of values `≤ rel·λ_max`.
    pub fn zero_count(&self, rel: f64) -> usize {
        let cut = rel * self.values[0];
        self.values.iter().filter(|&&v| v <= cut).count()
    }
}

pub fn nats_to_bits(nats: f64) -> f64 {
    nats / std::f64::consts::LN_2
}

/// Order-4 tensor `T[i, j, a, b]`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor4 {
    dims: [usize; 4],
    data: Vec<C64>,
}

impl Tensor4 {
    pub fn dims(&self) -> [usize; 4] {
        self.dims
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn get(&self, i: usize, j: usize, a: usize, b: usize) -> C64 {
        let [_, d1, d2, d3] = self.dims;
        self.data[((i * d1 + j) * d2 + a) * d3 + b]
    }

    pub fn norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Reads the first leg of `a` as the pair `(i, j)` with `k = i·χ2 + j`.
    pub fn split_first(a: &Tensor3, chi1: usize, chi2: usize) -> Result<Tensor4> {
        let [d0, d1, d2] = a.dims();
        if chi1 * chi2 != d0 {
            return Err(Error::Shape(format!("{chi1}×{chi2} does not split a leg of size {d0}")));
        }
        Ok(Tensor4 { dims: [chi1, chi2, d1, d2], data: a.data().to_vec() })
    }

    /// The `(χ1·χ3) × (χ2·χ4)` matrix with rows `(i, a)` and columns `(j, b)`.
    pub fn cut_matrix(&self) -> CMat {
        let [c1, c2, c3, c4] = self.dims;
        CMat::from_fn(c1 * c3, c2 * c4, |r, c| self.get(r / c3, c / c4, r % c3, c % c4))
    }
}

/// `(U·A)[i, j, a, b] = Σ_k U[(i, j), k]·A[k, a, b]`.
pub fn apply_disentangler(u: &Disentangler, a: &Tensor3) -> Result<Tensor4> {
    let [d0, d1, d2] = a.dims();
    if u.matrix().ncols() != d0 {
        return Err(Error::Shape(format!(
            "disentangler acts on a leg of size {}, tensor leg has size {d0}",
            u.matrix().ncols()
        )));
    }
    let p = u.matrix() * a.group(Grouping::LastTwo).to_matrix();
    let mut data = Vec::with_capacity(p.len());
    for r in 0..p.nrows() {
        data.extend(p.row(r).iter().copied());
    }
    Ok(Tensor4 { dims: [u.chi1(), u.chi2(), d1, d2], data })
}

pub fn cut_spectrum(t: &Tensor4) -> Result<SingularSpectrum> {
    SingularSpectrum::new(singular_values(&t.cut_matrix())?)
}

/// Cut spectrum of `U·A`.
pub fn disentangled_spectrum(u: &Disentangler, a: &Tensor3) -> Result<SingularSpectrum> {
    cut_spectrum(&apply_disentangler(u, a)?)
}

/// Von Neumann entropy of `U·A` across the cut.
pub fn disentangled_entropy(u: &Disentangler, a: &Tensor3) -> Result<f64> {
    Ok(disentangled_spectrum(u, a)?.von_neumann_entropy())
}
