//! Fast approximate disentangling of order-3 tensors.
//!
//! Given a tensor `A[k, a, b]` of shape `(χ1·χ2) × χ3 × χ4`, the routines in
//! [`disentangle`] produce a unitary `U[(i, j), k]` that splits the first leg
//! into two legs of sizes `χ1` and `χ2` while keeping the entanglement across
//! the `(i, a) | (j, b)` cut small. The remaining modules provide the
//! supporting pieces: dense linear algebra ([`linalg`], [`tensor`]), cut
//! spectra and entropies ([`entanglement`]), benchmark tensor families
//! ([`generators`]), a Riemannian gradient-descent baseline ([`descent`]) and
//! the 1D qubit-chain sweep experiment ([`wavefunction`]).
//!
//! All index formulas are 0-based and tensors are stored row-major.

pub mod descent;
pub mod disentangle;
pub mod entanglement;
pub mod error;
pub mod generators;
pub mod linalg;
pub mod rng;
pub mod tensor;
pub mod wavefunction;

pub use disentangle::{
    disentangle_auto, extended_disentangle, fast_disentangle, zero_singular_lower_bound, Dims,
    DisentangleOptions, Disentangler, Regime,
};
pub use entanglement::{apply_disentangler, cut_spectrum, SingularSpectrum, Tensor4};
pub use error::{Error, Result};
pub use tensor::{Grouping, MatrixView, Tensor3};
pub use linalg::{CMat, C64};
