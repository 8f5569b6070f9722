//! Riemannian steepest descent of the cut entropy over the unitary group.
//!
//! This is the iterative baseline the fast algorithm is measured against:
//! it estimates the minimal entropy `S_min`, provides the comparison curves of
//! the qubit-chain experiment, and can be warm-started from a fast result.
//!
//! The Euclidean gradient `G` of `S(U)` is taken with respect to the real
//! inner product `Re tr(X†Y)`. The Riemannian gradient at a unitary `U` is
//! `U·skew(U†G)`, and steps are retracted with a phase-fixed QR factor, so every
//! iterate is unitary to machine precision. Step sizes start from a
//! Barzilai–Borwein guess and are backtracked until the Armijo condition
//! holds, which keeps the entropy sequence non-increasing.

use std::time::{Duration, Instant};

use nalgebra::SymmetricEigen;
use rand::Rng;

use crate::disentangle::{disentangle_once, Dims};
use crate::error::{Error, Result};
use crate::linalg::{check_finite, qr_unitary, random_unitary, CMat, C64};
use crate::tensor::{Grouping, Tensor3};

/// Smoothing inside `p·ln(p + ε)` for the gradient only.
pub const GRADIENT_EPS: f64 = 1e-12;
const ARMIJO_C: f64 = 1e-4;
const MAX_STEP: f64 = 1e3;
const STATIONARY_GRAD: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DescentConfig {
    pub initial_step: f64,
    /// Step shrink factor in `(0, 1)` for backtracking.
    pub backtrack: f64,
    /// The descent halts once backtracking falls below this step.
    pub min_step: f64,
    pub max_iters: usize,
    /// Halt when an accepted step lowers the entropy by less than this.
    pub tolerance: f64,
    /// Number of starting points used by [`estimate_min_entropy`].
    pub restarts: usize,
    /// Halt as soon as the entropy reaches this value.
    pub target: Option<f64>,
}

impl Default for DescentConfig {
    fn default() -> Self {
        Self {
            initial_step: 0.1,
            backtrack: 0.5,
            min_step: 1e-8,
            max_iters: 3000,
            tolerance: 1e-12,
            restarts: 8,
            target: None,
        }
    }
}

impl DescentConfig {
    /// Per-gate budget for qubit-chain sweeps: 200 iterations, one start.
    pub fn for_sweeps() -> Self {
        Self { max_iters: 200, restarts: 1, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [self.initial_step, self.min_step, self.tolerance]
            .iter()
            .all(|x| x.is_finite() && *x > 0.0);
        if !positive || !(self.backtrack > 0.0 && self.backtrack < 1.0) {
            return Err(Error::Parameter(format!("invalid descent configuration {self:?}")));
        }
        if self.max_iters == 0 || self.restarts == 0 {
            return Err(Error::Parameter("max_iters and restarts must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Halt {
    MinStep,
    Tolerance,
    MaxIterations,
    Target,
    Stationary,
}

#[derive(Debug, Clone)]
pub struct DescentTrace {
    /// Entropy of the starting point followed by one entry per accepted step.
    pub entropies: Vec<f64>,
    /// Accepted step sizes.
    pub steps: Vec<f64>,
    /// Riemannian gradient norm at each visited iterate.
    pub grad_norms: Vec<f64>,
    pub unitary: CMat,
    /// Objective evaluations, including rejected line-search candidates.
    pub evaluations: usize,
    pub elapsed: Duration,
    pub halt: Halt,
}

impl DescentTrace {
    pub fn final_entropy(&self) -> f64 {
        *self.entropies.last().expect("trace has the initial entropy")
    }

    pub fn iterations(&self) -> usize {
        self.steps.len()
    }
}

/// Cut entropy `S(U)` of `U·A` for a fixed `A`, with its gradient.
#[derive(Debug, Clone)]
pub struct EntropyObjective {
    dims: Dims,
    /// `A` as a `(χ1χ2) × (χ3χ4)` matrix.
    a_mat: CMat,
}

impl EntropyObjective {
    pub fn new(a: &Tensor3, chi1: usize, chi2: usize) -> Result<Self> {
        let dims = Dims::of(a, chi1, chi2)?;
        Ok(Self { dims, a_mat: a.group(Grouping::LastTwo).to_matrix() })
    }

    pub fn size(&self) -> usize {
        self.dims.chi1 * self.dims.chi2
    }

    fn check(&self, u: &CMat) -> Result<()> {
        let n = self.size();
        if u.shape() != (n, n) {
            return Err(Error::Shape(format!("expected a {n}×{n} unitary, got {:?}", u.shape())));
        }
        Ok(())
    }

    fn cut_matrix(&self, u: &CMat) -> CMat {
        let Dims { chi1, chi2, chi3, chi4 } = self.dims;
        let p = u * &self.a_mat;
        CMat::from_fn(chi1 * chi3, chi2 * chi4, |r, c| {
            let (i, a) = (r / chi3, r % chi3);
            let (j, b) = (c / chi4, c % chi4);
            p[(i * chi2 + j, a * chi4 + b)]
        })
    }

    /// Gram matrix of the cut matrix on its smaller side.
    fn gram(m: &CMat) -> CMat {
        if m.nrows() <= m.ncols() {
            m * m.adjoint()
        } else {
            m.adjoint() * m
        }
    }

    pub fn entropy(&self, u: &CMat) -> Result<f64> {
        Ok(self.evaluate(u)?.entropy)
    }

    /// Cut matrix, its Gram eigendecomposition and the exact entropy at `U`.
    pub fn evaluate(&self, u: &CMat) -> Result<Evaluation> {
        self.check(u)?;
        let m = self.cut_matrix(u);
        let rho = Self::gram(&m);
        check_finite(&rho)?;
        let eig = SymmetricEigen::new(rho);
        let mu: Vec<f64> = eig.eigenvalues.iter().map(|x| x.max(0.0)).collect();
        let entropy = entropy_of_weights(&mu)?;
        Ok(Evaluation { entropy, m, mu, eig })
    }

    pub fn entropy_and_gradient(&self, u: &CMat) -> Result<(f64, CMat)> {
        let ev = self.evaluate(u)?;
        Ok((ev.entropy, self.gradient(&ev)))
    }

    /// Euclidean gradient with respect to `U` at an evaluated point.
    ///
    /// With `ρ = M·M†` (or `M†·M`), `N = tr ρ` and `q = eig(ρ)/N`, the
    /// gradient of `f = −Σ q ln(q + ε)` with respect to the cut matrix is
    /// `(2/N)·F(ρ)·M` (or `(2/N)·M·F(ρ)`), where `F` applies
    /// `h(q) = −ln(q + ε) − q/(q + ε)` minus its `q`-weighted mean to the
    /// eigenvalues. It stays finite at vanishing singular values.
    pub fn gradient(&self, ev: &Evaluation) -> CMat {
        let Dims { chi1, chi2, chi3, chi4 } = self.dims;
        let total: f64 = ev.mu.iter().sum();
        let q: Vec<f64> = ev.mu.iter().map(|x| x / total).collect();
        let h: Vec<f64> = q.iter().map(|&p| -(p + GRADIENT_EPS).ln() - p / (p + GRADIENT_EPS)).collect();
        let mean_h: f64 = q.iter().zip(&h).map(|(p, x)| p * x).sum();
        let mut xs = ev.eig.eigenvectors.clone();
        for (k, hk) in h.iter().enumerate() {
            xs.column_mut(k).scale_mut(2.0 / total * (hk - mean_h));
        }
        let f = xs * ev.eig.eigenvectors.adjoint();
        let m = &ev.m;
        let grad_cut = if m.nrows() <= m.ncols() { f * m } else { m * f };

        let mut grad_p = CMat::zeros(chi1 * chi2, chi3 * chi4);
        for r in 0..chi1 * chi3 {
            let (i, a) = (r / chi3, r % chi3);
            for c in 0..chi2 * chi4 {
                let (j, b) = (c / chi4, c % chi4);
                grad_p[(i * chi2 + j, a * chi4 + b)] = grad_cut[(r, c)];
            }
        }
        grad_p * self.a_mat.adjoint()
    }
}

/// Objective state at one point, reused to form the gradient on demand.
pub struct Evaluation {
    pub entropy: f64,
    m: CMat,
    mu: Vec<f64>,
    eig: SymmetricEigen<C64, nalgebra::Dyn>,
}

/// `−Σ p ln p` for `p = w / Σ w`, with `w` the squared singular values.
fn entropy_of_weights(w: &[f64]) -> Result<f64> {
    let total: f64 = w.iter().map(|x| x.max(0.0)).sum();
    if !(total > 0.0) {
        return Err(Error::ZeroInput);
    }
    Ok(w.iter()
        .map(|x| x.max(0.0) / total)
        .filter(|&p| p > 0.0)
        .map(|p| -p * p.ln())
        .sum::<f64>()
        .max(0.0))
}

/// Entropy of `U·A` and its Euclidean gradient with respect to `U`.
pub fn entropy_and_gradient(u: &CMat, a: &Tensor3, chi1: usize, chi2: usize) -> Result<(f64, CMat)> {
    EntropyObjective::new(a, chi1, chi2)?.entropy_and_gradient(u)
}

/// `U·skew(U†G)` with `skew(X) = (X − X†)/2`.
fn riemannian_gradient(u: &CMat, g: &CMat) -> CMat {
    let x = u.adjoint() * g;
    let skew = (&x - x.adjoint()).scale(0.5);
    u * skew
}

fn real_inner(x: &CMat, y: &CMat) -> f64 {
    x.iter().zip(y.iter()).map(|(a, b)| (a.conj() * b).re).sum()
}

pub fn riemannian_descent(a: &Tensor3, chi1: usize, chi2: usize, u0: &CMat, cfg: &DescentConfig) -> Result<DescentTrace> {
    let objective = EntropyObjective::new(a, chi1, chi2)?;
    descend(&objective, u0, cfg)
}

/// Runs the descent on a prepared objective.
pub fn descend(objective: &EntropyObjective, u0: &CMat, cfg: &DescentConfig) -> Result<DescentTrace> {
    cfg.validate()?;
    let start = Instant::now();
    let mut u = u0.clone();
    let (mut f, g) = objective.entropy_and_gradient(&u)?;
    let mut rgrad = riemannian_gradient(&u, &g);
    let mut prev: Option<(CMat, CMat)> = None;
    let mut step = cfg.initial_step;

    let mut entropies = vec![f];
    let mut steps = Vec::new();
    let mut grad_norms = Vec::new();
    let mut evaluations = 1;

    let halt = loop {
        let gn2 = real_inner(&rgrad, &rgrad);
        grad_norms.push(gn2.sqrt());
        if cfg.target.is_some_and(|t| f <= t) {
            break Halt::Target;
        }
        if gn2.sqrt() <= STATIONARY_GRAD {
            break Halt::Stationary;
        }
        if steps.len() >= cfg.max_iters {
            break Halt::MaxIterations;
        }
        if let Some((u_prev, r_prev)) = &prev {
            let s = &u - u_prev;
            let y = &rgrad - r_prev;
            let sy = real_inner(&s, &y);
            if sy > 0.0 {
                step = (real_inner(&s, &s) / sy).clamp(cfg.min_step, MAX_STEP);
            }
        }

        let accepted = loop {
            let candidate = qr_unitary(&(&u - rgrad.scale(step)));
            let ev = objective.evaluate(&candidate)?;
            evaluations += 1;
            if ev.entropy <= f - ARMIJO_C * step * gn2 {
                break Some((candidate, ev));
            }
            step *= cfg.backtrack;
            if step < cfg.min_step {
                break None;
            }
        };
        let Some((candidate, ev)) = accepted else { break Halt::MinStep };

        let fc = ev.entropy;
        let decrease = f - fc;
        let r_new = riemannian_gradient(&candidate, &objective.gradient(&ev));
        prev = Some((std::mem::replace(&mut u, candidate), std::mem::replace(&mut rgrad, r_new)));
        f = fc;
        entropies.push(f);
        steps.push(step);
        if decrease < cfg.tolerance {
            grad_norms.push(real_inner(&rgrad, &rgrad).sqrt());
            break Halt::Tolerance;
        }
    };

    Ok(DescentTrace { entropies, steps, grad_norms, unitary: u, evaluations, elapsed: start.elapsed(), halt })
}

#[derive(Debug, Clone)]
pub struct MinEntropy {
    pub entropy: f64,
    pub unitary: CMat,
    /// Final entropy of every restart, the fast-seeded one first.
    pub restarts: Vec<f64>,
    pub elapsed: Duration,
}

/// Best final entropy over `cfg.restarts` descents: the first starts from a
/// fast disentangler, the rest from Haar-random unitaries.
pub fn estimate_min_entropy<R: Rng + ?Sized>(
    a: &Tensor3,
    chi1: usize,
    chi2: usize,
    cfg: &DescentConfig,
    rng: &mut R,
) -> Result<MinEntropy> {
    cfg.validate()?;
    let start = Instant::now();
    let objective = EntropyObjective::new(a, chi1, chi2)?;
    let n = objective.size();
    let mut best: Option<(f64, CMat)> = None;
    let mut finals = Vec::with_capacity(cfg.restarts);
    for r in 0..cfg.restarts {
        let u0 = if r == 0 {
            disentangle_once(a, chi1, chi2, false, rng)?.into_matrix()
        } else {
            random_unitary(n, rng)
        };
        let trace = descend(&objective, &u0, cfg)?;
        let f = trace.final_entropy();
        finals.push(f);
        if best.as_ref().is_none_or(|(b, _)| f < *b) {
            best = Some((f, trace.unitary));
        }
    }
    let (entropy, unitary) = best.expect("restarts >= 1");
    Ok(MinEntropy { entropy, unitary, restarts: finals, elapsed: start.elapsed() })
}

/// Cut entropy of `U·A` for a Haar-random `U`.
pub fn random_unitary_entropy<R: Rng + ?Sized>(a: &Tensor3, chi1: usize, chi2: usize, rng: &mut R) -> Result<f64> {
    let objective = EntropyObjective::new(a, chi1, chi2)?;
    objective.entropy(&random_unitary(objective.size(), rng))
}
