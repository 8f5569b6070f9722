//! Dense order-3 complex tensors and their matrix views.

use crate::error::{Error, Result};
use crate::linalg::{CMat, C64};

/// Dense complex tensor `T[k, a, b]` stored row-major over `(k, a, b)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor3 {
    dims: [usize; 3],
    data: Vec<C64>,
}

impl Tensor3 {
    pub fn new(dims: [usize; 3], data: Vec<C64>) -> Result<Self> {
        if dims.contains(&0) {
            return Err(Error::Shape(format!("tensor dimensions must be positive, got {dims:?}")));
        }
        let len = dims.iter().product::<usize>();
        if data.len() != len {
            return Err(Error::Shape(format!(
                "tensor {dims:?} needs {len} entries, got {}",
                data.len()
            )));
        }
        if data.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::NonFinite);
        }
        Ok(Self { dims, data })
    }

    pub fn from_fn(dims: [usize; 3], mut f: impl FnMut(usize, usize, usize) -> C64) -> Result<Self> {
        let mut data = Vec::with_capacity(dims.iter().product());
        for k in 0..dims[0] {
            for a in 0..dims[1] {
                for b in 0..dims[2] {
                    data.push(f(k, a, b));
                }
            }
        }
        Self::new(dims, data)
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    #[inline]
    pub fn index(&self, k: usize, a: usize, b: usize) -> usize {
        (k * self.dims[1] + a) * self.dims[2] + b
    }

    #[inline]
    pub fn get(&self, k: usize, a: usize, b: usize) -> C64 {
        self.data[self.index(k, a, b)]
    }

    pub fn norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Swaps the last two legs: `T'[k, b, a] = T[k, a, b]`.
    pub fn transpose_last(&self) -> Tensor3 {
        let [d0, d1, d2] = self.dims;
        let mut data = Vec::with_capacity(self.data.len());
        for k in 0..d0 {
            for b in 0..d2 {
                for a in 0..d1 {
                    data.push(self.get(k, a, b));
                }
            }
        }
        Tensor3 { dims: [d0, d2, d1], data }
    }

    pub fn group(&self, grouping: Grouping) -> MatrixView<'_> {
        MatrixView { tensor: self, grouping }
    }

    /// Contracts the last leg with a matrix: `T'[k, a, c] = Σ_b T[k, a, b]·M[b, c]`.
    pub fn contract_last(&self, m: &CMat) -> Result<Tensor3> {
        let [d0, d1, d2] = self.dims;
        if m.nrows() != d2 {
            return Err(Error::Shape(format!("cannot contract leg of size {d2} with {} rows", m.nrows())));
        }
        let out = self.group(Grouping::FirstTwo).to_matrix() * m;
        Tensor3::from_fn([d0, d1, m.ncols()], |k, a, c| out[(k * d1 + a, c)])
    }

    /// Contracts the middle leg with a matrix: `T'[k, c, b] = Σ_a T[k, a, b]·M[a, c]`.
    pub fn contract_middle(&self, m: &CMat) -> Result<Tensor3> {
        let t = self.transpose_last().contract_last(m)?;
        Ok(t.transpose_last())
    }
}

/// Which two adjacent legs of a [`Tensor3`] are merged into one matrix index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Grouping {
    /// `(k, a) × b`
    FirstTwo,
    /// `k × (a, b)`
    LastTwo,
}

impl Grouping {
    /// Grouping from the pair of leg positions to merge.
    pub fn merge(first: usize, second: usize) -> Result<Self> {
        match (first.min(second), first.max(second)) {
            (0, 1) => Ok(Grouping::FirstTwo),
            (1, 2) => Ok(Grouping::LastTwo),
            _ => Err(Error::InvalidGrouping(first, second)),
        }
    }
}

/// A tensor viewed as a matrix under a [`Grouping`]. Entries are read from
/// the tensor, never copied, until [`MatrixView::to_matrix`] is called.
#[derive(Debug, Clone, Copy)]
pub struct MatrixView<'a> {
    tensor: &'a Tensor3,
    grouping: Grouping,
}

impl MatrixView<'_> {
    pub fn rows(&self) -> usize {
        let [d0, d1, _] = self.tensor.dims;
        match self.grouping {
            Grouping::FirstTwo => d0 * d1,
            Grouping::LastTwo => d0,
        }
    }

    pub fn cols(&self) -> usize {
        let [_, d1, d2] = self.tensor.dims;
        match self.grouping {
            Grouping::FirstTwo => d2,
            Grouping::LastTwo => d1 * d2,
        }
    }

    pub fn grouping(&self) -> Grouping {
        self.grouping
    }

    // Row-major storage makes both groupings a plain `r·cols + c` offset.
    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.tensor.data[r * self.cols() + c]
    }

    pub fn to_matrix(&self) -> CMat {
        CMat::from_row_slice(self.rows(), self.cols(), &self.tensor.data)
    }
}

/// Inverse of [`MatrixView::to_matrix`].
pub fn ungroup(m: &CMat, dims: [usize; 3], grouping: Grouping) -> Result<Tensor3> {
    let (rows, cols) = match grouping {
        Grouping::FirstTwo => (dims[0] * dims[1], dims[2]),
        Grouping::LastTwo => (dims[0], dims[1] * dims[2]),
    };
    if (m.nrows(), m.ncols()) != (rows, cols) {
        return Err(Error::Shape(format!(
            "{}×{} matrix does not ungroup to {dims:?}",
            m.nrows(),
            m.ncols()
        )));
    }
    let mut data = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        data.extend(m.row(r).iter().copied());
    }
    Tensor3::new(dims, data)
}
