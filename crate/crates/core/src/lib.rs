//! Numerical toolkit for transverse vector fields on R³ and the one-parameter
//! family of self-adjoint extensions of the l = 1 radial operator.
//!
//! The crate is organised bottom-up:
//!
//! * [`sphere`]: scalar and vector spherical harmonics, product quadrature on S².
//! * [`radial`]: graded radial grids, `T_l`, its Green kernel and the two
//!   half-axis scalar products.
//! * [`extension`]: the κ-family `Ť_{1κ}`, its continuum and bound-state kernels
//!   and the forward/inverse spectral transforms.
//! * [`quadform`]: the gradient quadratic form, its boundary-subtracted κ
//!   extension and the spectral kernels.
//! * [`fieldops`]: VSH decomposition and reconstruction of sampled fields.
//! * [`fock`]: exact polynomial-times-Gaussian algebra for finite mode sets.
//! * [`cli`]: the batch front-end used by the `transfield` binary.
//!
//! Data-parallel loops go through [`exec::Execution`]; with the `parallel`
//! feature disabled every loop runs serially and results are bit-identical.

// `!(x > 0.0)` is used throughout to reject NaN together with non-positive input.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod exec;
pub mod extension;
pub mod fieldops;
pub mod fock;
pub mod numerics;
pub mod quadform;
pub mod radial;
pub mod special;
pub mod sphere;

pub use error::{Error, Result};
pub use exec::Execution;
