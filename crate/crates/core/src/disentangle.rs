//! The fast disentangling algorithm and its dimension extensions.
//!
//! Input is a tensor `A[k, a, b]` of shape `(χ1·χ2) × χ3 × χ4`; output is a
//! unitary `U[(i, j), k]` (row index `i·χ2 + j`) chosen so that `U·A` has
//! little entanglement across the `(i, a) | (j, b)` cut.
//!
//! The base algorithm (`χ1 ≤ χ3`, `χ2 ≤ χ4`):
//!
//! 1. draw a complex Gaussian vector `r` over `k`;
//! 2. take the dominant singular pair of `(r·A)[a, b]`: `α3 = conj(left)`,
//!    `α4 = right`;
//! 3. `V3` = top `χ1` right singular vectors of `Σ_b A[k, a, b]·α4[b]`;
//! 4. `V4` = top `χ2` right singular vectors of `Σ_a A[k, a, b]·α3[a]`;
//! 5. `B[k, (i, j)] = Σ_ab A[k, a, b]·V3[a, i]·V4[b, j]`;
//! 6. `U` = Gram–Schmidt of the rows of `B†`, processed in the order given
//!    by the key `χ2·i + j` when `χ1 ≤ χ2` and `χ1·j + i` otherwise.
//!
//! Step 6 guarantees `(U·B)[(i, j), (i', j')] = 0` whenever
//! `key(i, j) > key(i', j')`, which is the source of the exact zero singular
//! values counted by [`zero_singular_lower_bound`].

use rand::Rng;

use crate::entanglement::disentangled_entropy;
use crate::error::{Error, Result};
use crate::linalg::{
    dominant_singular_pair, gram_schmidt_rows, right_singular_vectors, svd_truncated, unitarity_error,
    CMat, C64,
};
use crate::rng::{complex_gaussian_vec, derive_seed, seeded};
use crate::tensor::{Grouping, Tensor3};

/// Bond dimensions: `χ1`, `χ2` are the output legs of the disentangler,
/// `χ3`, `χ4` the retained legs of `A`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Dims {
    pub chi1: usize,
    pub chi2: usize,
    pub chi3: usize,
    pub chi4: usize,
}

impl Dims {
    pub fn new(chi1: usize, chi2: usize, chi3: usize, chi4: usize) -> Result<Self> {
        if chi1 == 0 || chi2 == 0 || chi3 == 0 || chi4 == 0 {
            return Err(Error::Parameter("bond dimensions must be positive".into()));
        }
        Ok(Self { chi1, chi2, chi3, chi4 })
    }

    /// Dimensions of `a` with its first leg split as `chi1 × chi2`.
    pub fn of(a: &Tensor3, chi1: usize, chi2: usize) -> Result<Self> {
        let [d0, d1, d2] = a.dims();
        if chi1 * chi2 != d0 {
            return Err(Error::Shape(format!("{chi1}×{chi2} does not split a leg of size {d0}")));
        }
        Self::new(chi1, chi2, d1, d2)
    }

    pub fn as_array(&self) -> [usize; 4] {
        [self.chi1, self.chi2, self.chi3, self.chi4]
    }

    pub fn tensor_dims(&self) -> [usize; 3] {
        [self.chi1 * self.chi2, self.chi3, self.chi4]
    }

    /// `(χ_{4→3}, χ'_4) = (⌈χ1/χ3⌉, ⌈χ4/χ_{4→3}⌉)`.
    pub fn extension(&self) -> (usize, usize) {
        let fold = self.chi1.div_ceil(self.chi3);
        (fold, self.chi4.div_ceil(fold))
    }

    pub fn swapped(&self) -> Dims {
        Dims { chi1: self.chi2, chi2: self.chi1, chi3: self.chi4, chi4: self.chi3 }
    }

    pub fn regime(&self) -> Result<Regime> {
        if self.chi1 <= self.chi3 && self.chi2 <= self.chi4 {
            return Ok(Regime::Base);
        }
        if self.chi1 > self.chi3 && self.chi2 <= self.extension().1 {
            return Ok(Regime::Extended);
        }
        let s = self.swapped();
        if s.chi1 > s.chi3 && s.chi2 <= s.extension().1 {
            return Ok(Regime::SwappedExtended);
        }
        Err(Error::Regime(self.as_array()))
    }
}

/// Which variant of the algorithm applies to a set of dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    /// `χ1 ≤ χ3` and `χ2 ≤ χ4`.
    Base,
    /// `χ1 > χ3` and `χ2 ≤ χ'_4`: fold part of the `b` leg into `a` first.
    Extended,
    /// The extended case after exchanging the roles of the two output legs.
    SwappedExtended,
}

/// Row ordering for the Gram–Schmidt step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StepOrdering {
    /// Key `χ2·i + j`.
    RowMajor,
    /// Key `χ1·j + i`.
    ColumnMajor,
}

impl StepOrdering {
    pub fn default_for(chi1: usize, chi2: usize) -> Self {
        if chi1 <= chi2 {
            StepOrdering::RowMajor
        } else {
            StepOrdering::ColumnMajor
        }
    }

    pub fn key(self, chi1: usize, chi2: usize, i: usize, j: usize) -> usize {
        match self {
            StepOrdering::RowMajor => chi2 * i + j,
            StepOrdering::ColumnMajor => chi1 * j + i,
        }
    }

    /// Row indices `i·χ2 + j` listed by increasing key.
    pub fn row_order(self, chi1: usize, chi2: usize) -> Vec<usize> {
        let n = chi1 * chi2;
        match self {
            StepOrdering::RowMajor => (0..n).collect(),
            StepOrdering::ColumnMajor => (0..n).map(|key| (key % chi1) * chi2 + key / chi1).collect(),
        }
    }
}

/// Unitary `U[(i, j), k]` with row index `i·χ2 + j`.
#[derive(Debug, Clone, PartialEq)]
pub struct Disentangler {
    chi1: usize,
    chi2: usize,
    matrix: CMat,
}

impl Disentangler {
    /// Wraps a square matrix with rows `(i, j)` and columns `k`. Unitarity is
    /// not checked here; see [`Disentangler::unitarity_error`].
    pub fn new(chi1: usize, chi2: usize, matrix: CMat) -> Result<Self> {
        let n = chi1 * chi2;
        if n == 0 || matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::Shape(format!(
                "disentangler {chi1}×{chi2} needs a {n}×{n} matrix, got {}×{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Self { chi1, chi2, matrix })
    }

    pub fn identity(chi1: usize, chi2: usize) -> Self {
        let n = chi1 * chi2;
        Self { chi1, chi2, matrix: CMat::identity(n, n) }
    }

    pub fn chi1(&self) -> usize {
        self.chi1
    }

    pub fn chi2(&self) -> usize {
        self.chi2
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMat {
        self.matrix
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> C64 {
        self.matrix[(i * self.chi2 + j, k)]
    }

    /// Largest deviation from either identity `Σ_k U U* = δδ`, `Σ_ij U* U = δ`.
    pub fn unitarity_error(&self) -> f64 {
        unitarity_error(&self.matrix).max(unitarity_error(&self.matrix.adjoint()))
    }

    /// Exchanges the two output legs: `U'[(j, i), k] = U[(i, j), k]`.
    pub fn swap_legs(&self) -> Disentangler {
        let (c1, c2) = (self.chi1, self.chi2);
        let n = c1 * c2;
        let m = CMat::from_fn(n, n, |r, k| {
            let (j, i) = (r / c1, r % c1);
            self.matrix[(i * c2 + j, k)]
        });
        Disentangler { chi1: c2, chi2: c1, matrix: m }
    }
}

/// Intermediate results of one base-regime run, exposed for inspection.
#[derive(Debug, Clone)]
pub struct FastRun {
    pub disentangler: Disentangler,
    /// `B[k, (i, j)]` from step 5.
    pub b: CMat,
    pub ordering: StepOrdering,
}

fn check_nonzero(a: &Tensor3) -> Result<()> {
    if a.norm() == 0.0 {
        Err(Error::ZeroInput)
    } else {
        Ok(())
    }
}

/// Steps 1–5: returns `B` as a `(χ1χ2) × (χ1χ2)` matrix with columns `(i, j)`.
fn projected_core<R: Rng + ?Sized>(a: &Tensor3, d: Dims, rng: &mut R) -> Result<CMat> {
    let [n, c3, c4] = a.dims();
    let data = a.data();

    let r = complex_gaussian_vec(n, rng);
    let mut ra = CMat::zeros(c3, c4);
    for (k, rk) in r.iter().enumerate() {
        for x in 0..c3 {
            let row = &data[(k * c3 + x) * c4..(k * c3 + x + 1) * c4];
            for (y, v) in row.iter().enumerate() {
                ra[(x, y)] += rk * v;
            }
        }
    }
    let (left, right, _) = dominant_singular_pair(&ra)?;
    let alpha3: Vec<C64> = left.iter().map(|z| z.conj()).collect();
    let alpha4: Vec<C64> = right.iter().copied().collect();

    let mut c3m = CMat::zeros(n, c3);
    let mut c4m = CMat::zeros(n, c4);
    for k in 0..n {
        for x in 0..c3 {
            let row = &data[(k * c3 + x) * c4..(k * c3 + x + 1) * c4];
            let mut acc = C64::new(0.0, 0.0);
            for (y, v) in row.iter().enumerate() {
                acc += v * alpha4[y];
                c4m[(k, y)] += v * alpha3[x];
            }
            c3m[(k, x)] = acc;
        }
    }
    let v3 = svd_truncated(&c3m, d.chi1)?.v;
    let v4 = svd_truncated(&c4m, d.chi2)?.v;

    let t = a.contract_middle(&v3)?.contract_last(&v4)?;
    Ok(t.group(Grouping::LastTwo).to_matrix())
}

/// Step 6.
fn orthonormalize<R: Rng + ?Sized>(b: &CMat, d: Dims, ordering: StepOrdering, rng: &mut R) -> Result<Disentangler> {
    let order = ordering.row_order(d.chi1, d.chi2);
    let u = gram_schmidt_rows(&b.adjoint(), &order, rng)?;
    Disentangler::new(d.chi1, d.chi2, u)
}

fn base_run<R: Rng + ?Sized>(a: &Tensor3, d: Dims, ordering: StepOrdering, rng: &mut R) -> Result<FastRun> {
    if d.regime()? != Regime::Base {
        return Err(Error::Regime(d.as_array()));
    }
    check_nonzero(a)?;
    let b = projected_core(a, d, rng)?;
    let disentangler = orthonormalize(&b, d, ordering, rng)?;
    Ok(FastRun { disentangler, b, ordering })
}

/// The base algorithm; requires `χ1 ≤ χ3` and `χ2 ≤ χ4`.
pub fn fast_disentangle<R: Rng + ?Sized>(a: &Tensor3, chi1: usize, chi2: usize, rng: &mut R) -> Result<Disentangler> {
    let d = Dims::of(a, chi1, chi2)?;
    Ok(base_run(a, d, StepOrdering::default_for(chi1, chi2), rng)?.disentangler)
}

/// The base algorithm with an explicit step-6 ordering, returning `B` too.
pub fn fast_disentangle_with<R: Rng + ?Sized>(
    a: &Tensor3,
    chi1: usize,
    chi2: usize,
    ordering: StepOrdering,
    rng: &mut R,
) -> Result<FastRun> {
    base_run(a, Dims::of(a, chi1, chi2)?, ordering, rng)
}

/// Folds `b` into `a` for `χ1 > χ3`: returns `A'[k, (a, a'), b']` of shape
/// `(χ1χ2) × (χ3·χ_{4→3}) × χ'_4`.
pub fn fold_tensor(a: &Tensor3, d: Dims) -> Result<Tensor3> {
    let (fold, chi4p) = d.extension();
    let [n, c3, c4] = a.dims();
    // only the right singular vectors of A viewed as (k, a) × b
    let (_, v1) = right_singular_vectors(&a.group(Grouping::FirstTwo).to_matrix())?;
    let width = fold * chi4p;
    let mut vpad = CMat::zeros(c4, width);
    let keep = v1.ncols().min(width);
    vpad.columns_mut(0, keep).copy_from(&v1.columns(0, keep));
    // column index a'·χ'4 + b' splits row-major, so (k, a, a'·χ'4 + b') and
    // (k, a·χ_{4→3} + a', b') share the same linear layout
    let folded = a.contract_last(&vpad)?;
    Tensor3::new([n, c3 * fold, chi4p], folded.data().to_vec())
}

/// The `χ1 > χ3` extension; requires `χ2 ≤ ⌈χ4 / ⌈χ1/χ3⌉⌉`.
pub fn extended_disentangle<R: Rng + ?Sized>(a: &Tensor3, chi1: usize, chi2: usize, rng: &mut R) -> Result<Disentangler> {
    let d = Dims::of(a, chi1, chi2)?;
    if d.regime()? != Regime::Extended {
        return Err(Error::Regime(d.as_array()));
    }
    check_nonzero(a)?;
    let folded = fold_tensor(a, d)?;
    let fd = Dims::of(&folded, chi1, chi2)?;
    Ok(base_run(&folded, fd, StepOrdering::RowMajor, rng)?.disentangler)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DisentangleOptions {
    /// Independent attempts; the one with the lowest cut entropy is kept.
    pub trials: usize,
    /// In the base regime, also try the other step-6 ordering.
    pub try_both_orderings: bool,
    /// Root seed; attempt `t` uses [`trial_seed`]`(seed, t)`.
    pub seed: u64,
}

impl Default for DisentangleOptions {
    fn default() -> Self {
        Self { trials: 1, try_both_orderings: false, seed: 0 }
    }
}

pub fn trial_seed(seed: u64, trial: usize) -> u64 {
    derive_seed(seed, trial as u64)
}

/// One attempt in whichever regime applies.
pub fn disentangle_once<R: Rng + ?Sized>(
    a: &Tensor3,
    chi1: usize,
    chi2: usize,
    try_both_orderings: bool,
    rng: &mut R,
) -> Result<Disentangler> {
    let d = Dims::of(a, chi1, chi2)?;
    check_nonzero(a)?;
    match d.regime()? {
        Regime::Base if try_both_orderings => {
            let b = projected_core(a, d, rng)?;
            let first = orthonormalize(&b, d, StepOrdering::RowMajor, rng)?;
            let second = orthonormalize(&b, d, StepOrdering::ColumnMajor, rng)?;
            if disentangled_entropy(&second, a)? < disentangled_entropy(&first, a)? {
                Ok(second)
            } else {
                Ok(first)
            }
        }
        Regime::Base => fast_disentangle(a, chi1, chi2, rng),
        Regime::Extended => extended_disentangle(a, chi1, chi2, rng),
        Regime::SwappedExtended => {
            let swapped = extended_disentangle(&a.transpose_last(), chi2, chi1, rng)?;
            Ok(swapped.swap_legs())
        }
    }
}

/// Best of `opts.trials` attempts by cut entropy (ties go to the earliest).
pub fn disentangle_auto(a: &Tensor3, chi1: usize, chi2: usize, opts: &DisentangleOptions) -> Result<(Disentangler, f64)> {
    if opts.trials == 0 {
        return Err(Error::Parameter("trials must be at least 1".into()));
    }
    let mut best: Option<(Disentangler, f64)> = None;
    for t in 0..opts.trials {
        let mut rng = seeded(trial_seed(opts.seed, t));
        let u = disentangle_once(a, chi1, chi2, opts.try_both_orderings, &mut rng)?;
        let s = disentangled_entropy(&u, a)?;
        if best.as_ref().is_none_or(|(_, b)| s < *b) {
            best = Some((u, s));
        }
    }
    Ok(best.expect("at least one trial"))
}

/// Guaranteed number of zero singular values of `U·A` across the cut in the
/// base regime: `max(0, χ1(χ1−1)/2 − max(χ1χ3, χ2χ4) + χ2²)` for `χ1 ≤ χ2`.
/// Dimensions with `χ1 > χ2` are mirrored first.
pub fn zero_singular_lower_bound(d: Dims) -> usize {
    let d = if d.chi1 <= d.chi2 { d } else { d.swapped() };
    let (c1, c2, c3, c4) = (d.chi1 as i64, d.chi2 as i64, d.chi3 as i64, d.chi4 as i64);
    let bound = c1 * (c1 - 1) / 2 - (c1 * c3).max(c2 * c4) + c2 * c2;
    bound.max(0) as usize
}
