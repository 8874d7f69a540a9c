//! Rigorous integration of dissipative parabolic PDEs `u_t = Lu + Q(u)` with
//! even periodic data.
//!
//! Solutions over one time step are expanded in Fourier modes in space and
//! Chebyshev polynomials in rescaled time. A Newton-Kantorovich argument,
//! phrased through a radii polynomial, certifies a ball around the numerical
//! coefficients that contains the true solution. The radius is a uniform
//! (C⁰) error bound which is threaded into the next step.

#![no_std]

extern crate alloc;

pub mod certify;
pub mod integrate;
pub mod largek;
pub mod model;
pub mod rigor;
pub mod seqspace;
pub mod smallk;

pub use rigor::{RigorError, RigorousMatrix, RigorousScalar};
pub use seqspace::{CoeffGrid, FourierVector};
