//! Benchmark tensor families and random qubit states.

use nalgebra::DVector;
use rand::Rng;

use crate::disentangle::Dims;
use crate::error::{Error, Result};
use crate::linalg::{random_unitary, CMat, C64};
use crate::rng::{complex_gaussian, complex_gaussian_vec};
use crate::tensor::Tensor3;
use crate::wavefunction::QubitState;

/// Largest qubit count accepted by [`random_state`].
pub const MAX_QUBITS: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SpectrumKind {
    /// i.i.d. standard complex Gaussian entries.
    Gaussian,
    /// Fixed cut spectrum `λ_i = 1/i`.
    InverseSpectrum,
    /// Fixed cut spectrum `λ_i = 2^{-i}`.
    ExponentialSpectrum,
    /// Sum of `χ1²` product terms with weights `μ_i = 1/i`.
    InverseOuter,
    /// Product of three Gaussian matrices; `m3_rank` limits the rank of the
    /// middle factor.
    Ansatz { m3_rank: Option<usize> },
}

impl SpectrumKind {
    pub fn generate<R: Rng + ?Sized>(&self, d: Dims, rng: &mut R) -> Result<Tensor3> {
        let n = d.chi1 * d.chi1;
        match *self {
            SpectrumKind::Gaussian => Ok(gaussian_tensor(d, rng)),
            SpectrumKind::InverseSpectrum => {
                spectrum_tensor(d, &(1..=n).map(|i| 1.0 / i as f64).collect::<Vec<_>>(), rng)
            }
            SpectrumKind::ExponentialSpectrum => {
                spectrum_tensor(d, &(1..=n).map(|i| 0.5f64.powi(i as i32)).collect::<Vec<_>>(), rng)
            }
            SpectrumKind::InverseOuter => {
                outer_product_tensor(d, &(1..=n).map(|i| 1.0 / i as f64).collect::<Vec<_>>(), rng)
            }
            SpectrumKind::Ansatz { m3_rank } => random_ansatz(d, m3_rank, rng),
        }
    }
}

fn gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMat {
    CMat::from_fn(rows, cols, |_, _| complex_gaussian(rng))
}

fn unit_vector<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<C64> {
    let v = complex_gaussian_vec(n, rng);
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / norm).collect()
}

/// Shape `(χ1χ2) × χ3 × χ4`, i.i.d. standard complex Gaussian entries.
pub fn gaussian_tensor<R: Rng + ?Sized>(d: Dims, rng: &mut R) -> Tensor3 {
    let dims = d.tensor_dims();
    let data = complex_gaussian_vec(dims.iter().product(), rng);
    Tensor3::new(dims, data).expect("Gaussian entries are finite")
}

fn square_dims(d: Dims) -> Result<()> {
    if d.chi1 != d.chi2 || d.chi3 != d.chi4 {
        return Err(Error::Shape(format!("need χ1 = χ2 and χ3 = χ4, got {:?}", d.as_array())));
    }
    Ok(())
}

/// `A[(k1, k2), a, b] = Σ_i λ_i W[(k1, a), i]·V[(k2, b), i]` with independent
/// Haar semi-unitaries `W`, `V` of shape `(χ1χ3) × χ1²`. The spectrum of `A`
/// across `(k1, a) | (k2, b)` is exactly `λ`.
pub fn spectrum_tensor<R: Rng + ?Sized>(d: Dims, lambda: &[f64], rng: &mut R) -> Result<Tensor3> {
    square_dims(d)?;
    let (c1, c3) = (d.chi1, d.chi3);
    let n = c1 * c1;
    if lambda.len() != n {
        return Err(Error::Shape(format!("need {n} spectrum values, got {}", lambda.len())));
    }
    if c1 > c3 {
        return Err(Error::Shape(format!("χ1² = {n} values do not fit a cut of rank χ1χ3 = {}", c1 * c3)));
    }
    let w = random_unitary(c1 * c3, rng).columns(0, n).into_owned();
    let v = random_unitary(c1 * c3, rng).columns(0, n).into_owned();
    let lam = DVector::from_iterator(n, lambda.iter().map(|&x| C64::new(x, 0.0)));
    let m = (w * CMat::from_diagonal(&lam)) * v.transpose();
    Tensor3::from_fn([n, c3, c3], |k, a, b| {
        let (k1, k2) = (k / c1, k % c1);
        m[(k1 * c3 + a, k2 * c3 + b)]
    })
}

/// `A = Σ_i μ_i v1⊗v2⊗v3⊗v4` with fresh normalized complex Gaussian vectors
/// for every term, legs grouped as `((k1, k2), a, b)`.
pub fn outer_product_tensor<R: Rng + ?Sized>(d: Dims, mu: &[f64], rng: &mut R) -> Result<Tensor3> {
    square_dims(d)?;
    let n = d.chi1 * d.chi1;
    if mu.len() != n {
        return Err(Error::Shape(format!("need {n} weights, got {}", mu.len())));
    }
    let dims = d.tensor_dims();
    let mut data = vec![C64::new(0.0, 0.0); dims.iter().product()];
    for &m in mu {
        let v1 = unit_vector(d.chi1, rng);
        let v2 = unit_vector(d.chi2, rng);
        let v3 = unit_vector(d.chi3, rng);
        let v4 = unit_vector(d.chi4, rng);
        let mut idx = 0;
        for x1 in &v1 {
            for x2 in &v2 {
                let w = x1 * x2 * m;
                for x3 in &v3 {
                    let w3 = w * x3;
                    for x4 in &v4 {
                        data[idx] += w3 * x4;
                        idx += 1;
                    }
                }
            }
        }
    }
    Tensor3::new(dims, data)
}

/// `A[(k1, k2), (a1, a2), (b1, b2)] = M1[k1, a1]·M2[k2, b2]·M3[a2, b1]`.
///
/// `m1` is `χ1 × χ3'`, `m2` is `χ2 × χ4''`, `m3` is `χ3'' × χ4'`; the result
/// has shape `(χ1χ2) × (χ3'χ3'') × (χ4'χ4'')`.
pub fn ansatz_tensor(m1: &CMat, m2: &CMat, m3: &CMat) -> Result<Tensor3> {
    let (c1, a1n) = m1.shape();
    let (c2, b2n) = m2.shape();
    let (a2n, b1n) = m3.shape();
    if [c1, a1n, c2, b2n, a2n, b1n].contains(&0) {
        return Err(Error::Shape("ansatz factors must be non-empty".into()));
    }
    Tensor3::from_fn([c1 * c2, a1n * a2n, b1n * b2n], |k, a, b| {
        let (k1, k2) = (k / c2, k % c2);
        let (a1, a2) = (a / a2n, a % a2n);
        let (b1, b2) = (b / b2n, b % b2n);
        m1[(k1, a1)] * m2[(k2, b2)] * m3[(a2, b1)]
    })
}

/// Ansatz tensor with square Gaussian `M1` (`χ1×χ1`), `M2` (`χ2×χ2`) and a
/// Gaussian `M3` of shape `(χ3/χ1) × (χ4/χ2)`, optionally of limited rank.
pub fn random_ansatz<R: Rng + ?Sized>(d: Dims, m3_rank: Option<usize>, rng: &mut R) -> Result<Tensor3> {
    if d.chi3 % d.chi1 != 0 || d.chi4 % d.chi2 != 0 {
        return Err(Error::Shape(format!("ansatz needs χ1 | χ3 and χ2 | χ4, got {:?}", d.as_array())));
    }
    let (r3, c3) = (d.chi3 / d.chi1, d.chi4 / d.chi2);
    let m1 = gaussian_matrix(d.chi1, d.chi1, rng);
    let m2 = gaussian_matrix(d.chi2, d.chi2, rng);
    let m3 = match m3_rank {
        Some(r) if r == 0 || r > r3.min(c3) => {
            return Err(Error::Parameter(format!("M3 rank {r} out of range 1..={}", r3.min(c3))))
        }
        Some(r) => gaussian_matrix(r3, r, rng) * gaussian_matrix(r, c3, rng),
        None => gaussian_matrix(r3, c3, rng),
    };
    ansatz_tensor(&m1, &m2, &m3)
}

/// Normalized state of `n` qubits with i.i.d. complex Gaussian amplitudes.
pub fn random_state<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<QubitState> {
    if !(2..=MAX_QUBITS).contains(&n) {
        return Err(Error::Parameter(format!("qubit count {n} out of range 2..={MAX_QUBITS}")));
    }
    QubitState::new(n, unit_vector(1 << n, rng))
}
