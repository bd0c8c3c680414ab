//! Migdal–Kadanoff renormalization dynamics of the Ising model on the
//! diamond hierarchical lattice.
//!
//! The crate is organised bottom-up:
//!
//! * [`geometry`] – projective points, the physical chart `Ψ`, linear forms
//!   and parametrized slices.
//! * [`poly`] – dense complex polynomials with FFT multiplication.
//! * [`renorm`] – the degree-4 map `R̂`, its physical conjugate, the
//!   one-dimensional Fisher map, derivatives and inverse branches.
//! * [`slice`] – exact partition functions restricted to slices.
//! * [`roots`] – Aberth–Ehrlich root finding and zero distributions.
//! * [`green`] – the Green potential and free-energy convergence.
//! * [`dynamics`] – basins, Julia rasters, critical locus, volume lemmas,
//!   the measure of maximal entropy and algebraic stability.
//! * [`io`], [`cli`] and [`acceptance`] – artifacts, the `dhl` command and
//!   the end-to-end acceptance checks.

pub mod acceptance;
pub mod cli;
pub mod dd;
pub mod dynamics;
pub mod error;
pub mod geometry;
pub mod green;
pub mod io;
pub mod poly;
pub mod renorm;
pub mod roots;
pub mod slice;

pub use error::{Error, Result};
pub use geometry::{LinearForm, PhysPoint, ProjPoint, RationalSlice, SliceKind};
pub use num_complex::Complex64;
pub use poly::CPoly;

/// Shorthand for building a complex number.
#[inline]
pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}
