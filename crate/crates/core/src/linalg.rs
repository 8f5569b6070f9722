//! Dense complex linear-algebra kernels: SVD variants, a dominant singular
//! pair, ordered Gram–Schmidt and Haar-random unitaries.
//!
//! Singular vectors are phase-normalized: the largest-magnitude component of
//! every left singular vector is real and non-negative, and the matching
//! right vector is rotated by the same phase so that `U·diag(S)·V†` is
//! unchanged.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::{complex_gaussian, complex_gaussian_vec, seeded};

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

const SVD_MAX_ITERS: usize = 10_000;
/// Below this min(rows, cols) the dominant pair is read off a full SVD.
const DOMINANT_DENSE_LIMIT: usize = 32;
const LANCZOS_MAX_DIM: usize = 40;
const LANCZOS_MAX_RESTARTS: usize = 50;

#[derive(Debug, Clone)]
pub struct SvdResult {
    /// Left singular vectors as columns.
    pub u: CMat,
    /// Singular values, non-increasing.
    pub s: Vec<f64>,
    /// Right singular vectors as columns (`M ≈ U·diag(S)·V†`).
    pub v: CMat,
}

impl SvdResult {
    pub fn reconstruct(&self) -> CMat {
        let mut us = self.u.clone();
        for (c, &s) in self.s.iter().enumerate() {
            us.column_mut(c).scale_mut(s);
        }
        us * self.v.adjoint()
    }
}

pub fn check_finite(m: &CMat) -> Result<()> {
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

pub fn frobenius(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn vec_norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `Σ conj(x_i) y_i`
fn inner(x: &[C64], y: &[C64]) -> C64 {
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

fn argmax_abs<'a>(it: impl Iterator<Item = &'a C64>) -> Option<C64> {
    let mut best: Option<C64> = None;
    for &z in it {
        if best.is_none_or(|b| z.norm() > b.norm()) {
            best = Some(z);
        }
    }
    best
}

fn phase_normalize(u: &mut CMat, v: &mut CMat) {
    for c in 0..u.ncols() {
        let Some(pivot) = argmax_abs(u.column(c).iter()) else { continue };
        if pivot.norm() == 0.0 {
            continue;
        }
        let phase = pivot.conj() / pivot.norm();
        for z in u.column_mut(c).iter_mut() {
            *z *= phase;
        }
        for z in v.column_mut(c).iter_mut() {
            *z *= phase;
        }
    }
}

/// Thin SVD with `min(rows, cols)` singular triples, sorted descending.
pub fn svd_full(m: &CMat) -> Result<SvdResult> {
    check_finite(m)?;
    let p = m.nrows().min(m.ncols());
    if p == 0 {
        return Err(Error::Shape("empty matrix".into()));
    }
    let svd = m
        .clone()
        .try_svd(true, true, f64::EPSILON, SVD_MAX_ITERS)
        .ok_or(Error::SvdNoConvergence)?;
    let (u, v_t) = match (svd.u, svd.v_t) {
        (Some(u), Some(v_t)) => (u, v_t),
        _ => return Err(Error::SvdNoConvergence),
    };
    let values: Vec<f64> = svd.singular_values.iter().copied().collect();
    if values.iter().any(|s| !s.is_finite()) {
        return Err(Error::SvdNoConvergence);
    }
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));

    let mut uu = CMat::zeros(m.nrows(), p);
    let mut vv = CMat::zeros(m.ncols(), p);
    let mut s = Vec::with_capacity(p);
    for (dst, &src) in order.iter().enumerate() {
        uu.set_column(dst, &u.column(src));
        vv.set_column(dst, &v_t.row(src).adjoint());
        s.push(values[src]);
    }
    phase_normalize(&mut uu, &mut vv);
    Ok(SvdResult { u: uu, s, v: vv })
}

/// Singular values only, sorted descending.
pub fn singular_values(m: &CMat) -> Result<Vec<f64>> {
    check_finite(m)?;
    let svd = m
        .clone()
        .try_svd(false, false, f64::EPSILON, SVD_MAX_ITERS)
        .ok_or(Error::SvdNoConvergence)?;
    let mut s: Vec<f64> = svd.singular_values.iter().copied().collect();
    if s.iter().any(|x| !x.is_finite()) {
        return Err(Error::SvdNoConvergence);
    }
    s.sort_by(|a, b| b.total_cmp(a));
    Ok(s)
}

/// Right singular vectors (as columns) and singular values, descending. The
/// left factor is never formed.
pub fn right_singular_vectors(m: &CMat) -> Result<(Vec<f64>, CMat)> {
    check_finite(m)?;
    let svd = m
        .clone()
        .try_svd(false, true, f64::EPSILON, SVD_MAX_ITERS)
        .ok_or(Error::SvdNoConvergence)?;
    let v_t = svd.v_t.ok_or(Error::SvdNoConvergence)?;
    let values: Vec<f64> = svd.singular_values.iter().copied().collect();
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    let mut v = CMat::zeros(m.ncols(), values.len());
    for (dst, &src) in order.iter().enumerate() {
        v.set_column(dst, &v_t.row(src).adjoint());
    }
    Ok((order.iter().map(|&i| values[i]).collect(), v))
}

/// The top-`k` singular triples.
pub fn svd_truncated(m: &CMat, k: usize) -> Result<SvdResult> {
    let max = m.nrows().min(m.ncols());
    if k == 0 || k > max {
        return Err(Error::RankOutOfRange { k, max });
    }
    let full = svd_full(m)?;
    Ok(SvdResult {
        u: full.u.columns(0, k).into_owned(),
        s: full.s[..k].to_vec(),
        v: full.v.columns(0, k).into_owned(),
    })
}

/// Dominant singular triple `(left, right, sigma)` with `M·right ≈ sigma·left`.
///
/// Small matrices go through a full SVD; larger ones use a restarted Lanczos
/// iteration on the smaller Gram matrix, which costs `O(rows·cols)` per step.
pub fn dominant_singular_pair(m: &CMat) -> Result<(CVec, CVec, f64)> {
    check_finite(m)?;
    if frobenius(m) == 0.0 {
        return Err(Error::ZeroInput);
    }
    if m.nrows().min(m.ncols()) > DOMINANT_DENSE_LIMIT {
        if let Some(pair) = dominant_pair_lanczos(m) {
            return Ok(pair);
        }
    }
    let svd = svd_full(m)?;
    Ok((svd.u.column(0).into_owned(), svd.v.column(0).into_owned(), svd.s[0]))
}

fn dominant_pair_lanczos(m: &CMat) -> Option<(CVec, CVec, f64)> {
    let on_right = m.ncols() <= m.nrows();
    let dim = if on_right { m.ncols() } else { m.nrows() };
    let md = m.adjoint();
    let apply = |x: &CVec| -> CVec {
        if on_right {
            &md * (m * x)
        } else {
            m * (&md * x)
        }
    };

    // Fixed-seed start vector: generic with probability one, and keeps the
    // routine a pure function of its input.
    let mut start = CVec::from_vec(complex_gaussian_vec(dim, &mut seeded(0x5eed)));
    let kmax = LANCZOS_MAX_DIM.min(dim);

    for _ in 0..LANCZOS_MAX_RESTARTS {
        let n0 = start.norm();
        if n0 == 0.0 {
            return None;
        }
        let mut basis: Vec<CVec> = vec![start.unscale(n0)];
        let mut alpha: Vec<f64> = Vec::new();
        let mut beta: Vec<f64> = Vec::new();
        for j in 0..kmax {
            let mut w = apply(&basis[j]);
            alpha.push(basis[j].dotc(&w).re);
            for _ in 0..2 {
                for q in &basis {
                    let c = q.dotc(&w);
                    w.axpy(-c, q, C64::new(1.0, 0.0));
                }
            }
            let b = w.norm();
            if j + 1 == kmax || b <= 1e-14 * alpha[0].abs().max(f64::MIN_POSITIVE) {
                beta.push(b);
                break;
            }
            beta.push(b);
            basis.push(w.unscale(b));
        }
        let k = alpha.len();
        let mut t = DMatrix::<f64>::zeros(k, k);
        for i in 0..k {
            t[(i, i)] = alpha[i];
            if i + 1 < k {
                t[(i, i + 1)] = beta[i];
                t[(i + 1, i)] = beta[i];
            }
        }
        let eig = SymmetricEigen::new(t);
        let (imax, theta) = eig
            .eigenvalues
            .iter()
            .copied()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(&b.1))?;
        if theta <= 0.0 {
            return None;
        }
        let z = eig.eigenvectors.column(imax);
        let mut y = CVec::zeros(dim);
        for (i, q) in basis.iter().enumerate().take(k) {
            y.axpy(C64::new(z[i], 0.0), q, C64::new(1.0, 0.0));
        }
        let y = y.normalize();
        let resid = (apply(&y) - y.scale(theta)).norm();
        if resid <= 1e-11 * theta {
            let (mut left, mut right) = if on_right {
                (m * &y, y)
            } else {
                let r = &md * &y;
                (y, r)
            };
            let sigma = if on_right { left.norm() } else { right.norm() };
            if on_right {
                left.unscale_mut(sigma);
            } else {
                right.unscale_mut(sigma);
            }
            let pivot = argmax_abs(left.iter())?;
            let phase = pivot.conj() / pivot.norm();
            left *= phase;
            right *= phase;
            return Some((left, right, sigma));
        }
        start = y;
    }
    None
}

/// Orthonormalizes the rows of a square matrix in the given order.
///
/// Processing rows in `order`, each output row is the normalized residual of
/// the corresponding input row against the rows already produced (two
/// classical Gram–Schmidt passes). Output rows keep the index of their input
/// row. A residual with norm below `1e-12·‖B‖_F/√n` marks the row as
/// dependent; it is replaced by a random vector orthonormal to all other
/// output rows.
pub fn gram_schmidt_rows<R: Rng + ?Sized>(b: &CMat, order: &[usize], rng: &mut R) -> Result<CMat> {
    let n = b.nrows();
    if b.ncols() != n {
        return Err(Error::Shape(format!("Gram–Schmidt needs a square matrix, got {}×{}", n, b.ncols())));
    }
    let mut seen = vec![false; n];
    if order.len() != n || order.iter().any(|&r| r >= n || std::mem::replace(&mut seen[r], true)) {
        return Err(Error::Parameter("row ordering must be a permutation".into()));
    }
    check_finite(b)?;
    let tol = 1e-12 * frobenius(b) / (n as f64).sqrt();

    let mut done: Vec<Vec<C64>> = Vec::with_capacity(n);
    let mut dependent = Vec::new();
    let mut out = CMat::zeros(n, n);
    for &r in order {
        let mut w: Vec<C64> = b.row(r).iter().copied().collect();
        orthogonalize(&mut w, &done);
        let norm = vec_norm(&w);
        if !(norm > tol) {
            dependent.push(r);
            continue;
        }
        w.iter_mut().for_each(|z| *z /= norm);
        out.row_mut(r).iter_mut().zip(&w).for_each(|(o, z)| *o = *z);
        done.push(w);
    }
    // Dependent rows are completed last, orthogonal to every other output
    // row. The independent rows are then exactly the Gram–Schmidt rows of
    // the input, and triangularity is unaffected.
    for r in dependent {
        let (w, norm) = loop {
            let mut w = complex_gaussian_vec(n, rng);
            orthogonalize(&mut w, &done);
            let norm = vec_norm(&w);
            if norm > 1e-8 {
                break (w, norm);
            }
        };
        let w: Vec<C64> = w.into_iter().map(|z| z / norm).collect();
        out.row_mut(r).iter_mut().zip(&w).for_each(|(o, z)| *o = *z);
        done.push(w);
    }
    Ok(out)
}

fn orthogonalize(w: &mut [C64], basis: &[Vec<C64>]) {
    for _ in 0..2 {
        let coeffs: Vec<C64> = basis.iter().map(|q| inner(q, w)).collect();
        for (q, c) in basis.iter().zip(coeffs) {
            for (wi, qi) in w.iter_mut().zip(q) {
                *wi -= c * qi;
            }
        }
    }
}

/// Unitary factor `Q` of `M = Q·R` with the diagonal of `R` made real
/// positive. For square full-rank `M` this is unique.
pub fn qr_unitary(m: &CMat) -> CMat {
    let qr = m.clone().qr();
    let mut q = qr.q();
    let r = qr.r();
    for c in 0..q.ncols().min(r.nrows()) {
        let d = r[(c, c)];
        if d.norm() > 0.0 {
            let phase = d / d.norm();
            for z in q.column_mut(c).iter_mut() {
                *z *= phase;
            }
        }
    }
    q
}

/// Haar-random `n×n` unitary: phase-fixed QR of a complex Gaussian matrix.
pub fn random_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMat {
    assert!(n >= 1, "random_unitary needs n >= 1");
    qr_unitary(&CMat::from_fn(n, n, |_, _| complex_gaussian(rng)))
}

/// `max |U†U − 1|` over entries.
pub fn unitarity_error(u: &CMat) -> f64 {
    let p = u.adjoint() * u;
    let mut err: f64 = 0.0;
    for i in 0..p.nrows() {
        for j in 0..p.ncols() {
            let target = if i == j { 1.0 } else { 0.0 };
            err = err.max((p[(i, j)] - C64::new(target, 0.0)).norm());
        }
    }
    err
}

/// Closest unitary in Frobenius norm (`W·Z†` from `M = W·Σ·Z†`).
pub fn polar_unitary(m: &CMat) -> Result<CMat> {
    let svd = svd_full(m)?;
    Ok(svd.u * svd.v.adjoint())
}
