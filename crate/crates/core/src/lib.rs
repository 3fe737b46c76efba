//! Dirichlet problems for graphs of prescribed mean curvature along the
//! flow of a conformal Killing field.
//!
//! The ambient metric is `λ²(t)(dt²/γ(u) + σ)` on `𝕀 × M`; a graph is
//! `Σ(z) = {(z(u), u)}` over a domain `Ω ⊂ M`. The crate assembles the
//! quasilinear operator `Q` on P1 triangle meshes, solves `Q[z] = 0` by
//! Newton continuation in a homotopy parameter `τ`, and checks existence
//! hypotheses and barrier certificates.
//!
//! Conventions: the graph normal satisfies `⟨N, Y⟩ > 0`; the mean curvature
//! of the Killing cylinder over `Γ = ∂Ω` and of `Γ` itself are taken with
//! respect to the inward normal, so a round disk has positive `H_Γ`.

// `!(x > 0.0)` is used on purpose so that NaN fails the test.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod error;
pub mod geometry;
pub mod operator;
pub mod report;
pub mod solver;

pub use error::{Error, Result};
