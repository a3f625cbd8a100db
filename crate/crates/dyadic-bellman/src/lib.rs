//! Bellman functions for weak-type estimates of dyadic martingale transforms.
//!
//! The library has three layers:
//!
//! * an **exact rational layer** ([`dyadic`], [`transform`]): dyadic step
//!   functions, Haar expansions, martingale transforms T_ε, A₁ weights and
//!   their characteristic, weighted level-set measures, and the explicit
//!   depth-2 extremal triple whose level set grows linearly in the weight
//!   average;
//! * a **closed-form layer** ([`closed_form`]): the exact Bellman function of
//!   the unweighted weak-type problem, its boundary restriction, Hessian and
//!   Monge–Ampère structure, extremal-line fan, and a supersolution verifier;
//! * a **numerical layer** ([`grid`], [`envelope`], [`weighted`]): finite
//!   dynamic-programming envelopes converging to the Bellman functions from
//!   below — a 2-d grid iteration for the |ε_J| ≤ 1 class, a certified tree
//!   search for ε_J = ±1 with exactly replayable witnesses, and a 3-d grid
//!   iteration for A₁ weights with the weak-type statistic R(Q) and its
//!   diagnostics (β averaging, γ operator, root a(x₄), scaling-ray bounds).
//!
//! The `dyadic-bellman` binary exposes these as subcommands (`exact`,
//! `dp-unweighted`, `pm-search`, `dp-weighted`, `lower-bound`, `diagnostics`,
//! `replay`); `examples/` holds one runnable example per capability.

pub mod closed_form;
pub mod dyadic;
pub mod envelope;
pub mod error;
pub mod grid;
pub mod report;
pub mod transform;
pub mod weighted;

pub mod cli;

pub use error::{Error, Result};
