//! Euler–Lagrange flows of `L = ½ g_x(v, v) − s·U(x)`.
//!
//! `s = 1` is the physical system; `s = ε⁻²` is the ε-rescaled family whose
//! solutions `x_ε(τ) = x^ε(τ/ε)` start at a zero `p` of `U` with velocity
//! `V(p)`. Integration is fixed-step and single-threaded per trajectory,
//! so every run is bit-reproducible; independent members of a family or a
//! probe bundle may run in parallel.

mod family;
mod integrate;
mod metric;
mod potential;
mod stability;
mod system;

pub use family::{epsilon_family, holonomy, limit_curve_evidence, EpsMember, EpsilonFamilyReport, FamilyConfig, LimitCurveEvidence};
pub use integrate::{field_flow, integrate, step_halving, HalvingEstimate, IntegrateConfig, Method, Stepper, Trajectory};
pub use metric::KineticMetric;
pub use potential::{laloy, laloy_gradient, laloy_y, laloy_y_derivative, wintner, wintner_derivative, PotentialSpec};
pub use stability::{stability_probe, BundleMember, EnergyProbe, StabilityConfig, StabilityReport};
pub use system::MechanicalSystem;

use thiserror::Error;

use crate::symcore::SymError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynError {
    #[error(transparent)]
    Sym(#[from] SymError),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("metric is not symmetric positive definite{0}")]
    MetricNotSpd(String),
    #[error("velocity Verlet needs a position-independent metric; use rk4")]
    VerletNeedsConstantMetric,
    #[error("V(p) = 0: the field must not vanish at the start point")]
    ZeroField,
    #[error("p is not a zero of U: U(p) = {0:e}")]
    NotOnZeroLocus(f64),
    #[error("unknown builtin potential `{0}` (expected wintner or laloy)")]
    UnknownBuiltin(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// Order-preserving map that runs in parallel when the `parallel` feature is on.
fn par_map<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}
