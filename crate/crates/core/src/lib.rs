//! Transform-method analysis of linear evolution equations
//! `q_t + a (-i d/dx)^n q = 0` on `[0, 1]` with `n` linear boundary
//! conditions coupling the endpoint derivatives.
//!
//! The crate classifies boundary conditions, builds the characteristic
//! matrix as an exponential polynomial, decides well-posedness from the
//! growth of that determinant, locates its zeros, and evaluates the solution
//! either as a contour integral or as a residue series.

pub type C64 = num_complex::Complex64;

pub mod charmat;
pub mod cli;
pub mod exppoly;
pub mod ibvp;
pub mod numeric;
pub mod oracle;
pub mod solution;
pub mod spectrum;
pub mod wellposed;

#[cfg(test)]
mod testutil;

#[doc = include_str!("../../../book/src/chapter_1.md")]
pub mod chapter1 {}
#[doc = include_str!("../../../book/src/chapter_2.md")]
pub mod chapter2 {}
#[doc = include_str!("../../../book/src/chapter_3.md")]
pub mod chapter3 {}
#[doc = include_str!("../../../book/src/chapter_4.md")]
pub mod chapter4 {}
#[doc = include_str!("../../../book/src/chapter_5.md")]
pub mod chapter5 {}
#[doc = include_str!("../../../book/src/chapter_6.md")]
pub mod chapter6 {}
#[doc = include_str!("../../../book/src/chapter_7.md")]
pub mod chapter7 {}
