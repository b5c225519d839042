//! Passive array imaging of sound sources in a random medium.
//!
//! The crate covers the full chain of a desk-scale experiment:
//!
//! * [`scales`]: statistical and resolution scales derived from the physical
//!   parameters, plus the validity ratios of the random travel time regime.
//! * [`medium`]: seeded random Fourier series realizations of the fluctuation
//!   field and the travel time perturbation along straight rays.
//! * [`forward`]: pulse spectrum, random travel time Green's function and the
//!   synthesis of noisy frequency-domain array recordings.
//! * [`imaging`]: windowed cross-correlations, the CINT image, the two-point
//!   image used to estimate source offsets, and peak extraction.
//! * [`kernel`]: the closed-form envelope of the two-point imaging kernel.
//! * [`constellation`]: offset-set algebra and the recursive search that
//!   recovers a constellation of sources from its offset vectors.
//!
//! Lengths are measured in units of the correlation length and frequencies in
//! units of the central frequency, so `omega0 = 1` throughout.
//!
//! The crate is `no_std` (with `alloc`) when the default `std` feature is
//! disabled. The `rayon` feature evaluates images in parallel; results do not
//! depend on the number of worker threads.

#![cfg_attr(not(feature = "std"), no_std)]
// Negated comparisons reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod constellation;
mod error;
pub mod forward;
pub mod imaging;
pub mod kernel;
pub mod medium;
mod point;
pub mod scales;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use point::Point;

pub(crate) mod prelude {
    pub(crate) use alloc::{format, string::String, string::ToString, vec, vec::Vec};
    #[allow(unused_imports)]
    pub(crate) use num_traits::Float;
}
