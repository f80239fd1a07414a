//! Exact and numerical tools for twisted homology growth of cyclic covers
//! and random walks on the Torelli group.

pub mod hermitian;
pub mod homology;
pub mod mahler;
pub mod matrix;
pub mod ring;
pub mod walks;

pub use mahler::{
    build_k_alpha, constraint_check, kronecker_zero_test, mahler_measure, ConstraintParams,
    ConstraintVerdict, KAlphaSet, MahlerError, MahlerResult,
};
pub use matrix::Mat;
pub use ring::{cyclotomic, totient, CycElem, CyclotomicTable, LaurentPoly, RingElem, RingError};
