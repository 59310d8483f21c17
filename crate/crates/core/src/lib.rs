//! Exact polynomial algebra, blowup charts and Euler–Lagrange experiments
//! for logarithmic and weakly logarithmic vector fields.
//!
//! - [`symcore`]: rationals, sparse polynomials, rational functions, fields.
//! - [`logcheck`]: exact logarithmic test, shell sampling of `V(U)/U`.
//! - [`blowup`]: coordinate-center blowup charts, field pullback/pushout,
//!   principalization schedules.
//! - [`dynamics`]: ε-scaled Euler–Lagrange integration and escape experiments.

// NaN-rejecting guards such as `!(dt > 0.0)` are deliberate.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod symcore;
pub mod logcheck;
pub mod blowup;
pub mod dynamics;
