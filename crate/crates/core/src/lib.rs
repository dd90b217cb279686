//! Adiabatic transition probabilities for the Landau-Zener model driven by a
//! dephasing Lindbladian.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod algebra;
pub mod error;
pub mod lindblad;
pub mod model;
pub mod ode;
pub mod quad;
pub mod adiabatic;
pub mod propagate;
pub mod transition;
pub mod verify;
