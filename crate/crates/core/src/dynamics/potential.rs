use serde::Serialize;

use super::DynError;
use crate::symcore::{FastPoly, Polynomial};

/// Below this magnitude the flat builtins return their smooth extension, 0.
const FLAT_CUTOFF: f64 = 1e-8;

/// `exp(-x⁻²)·cos(x⁻¹)`, extended by 0 at the origin.
pub fn wintner(x: f64) -> f64 {
    if x.abs() < FLAT_CUTOFF {
        return 0.0;
    }
    (-1.0 / (x * x)).exp() * (1.0 / x).cos()
}

pub fn wintner_derivative(x: f64) -> f64 {
    if x.abs() < FLAT_CUTOFF {
        return 0.0;
    }
    let e = (-1.0 / (x * x)).exp();
    let inv = 1.0 / x;
    e * (2.0 * inv.powi(3) * inv.cos() + inv * inv * inv.sin())
}

/// The second coordinate of Laloy's potential: `−exp(-y⁻²)·(cos(y⁻¹) + y²)`.
pub fn laloy_y(y: f64) -> f64 {
    if y.abs() < FLAT_CUTOFF {
        return 0.0;
    }
    -(-1.0 / (y * y)).exp() * ((1.0 / y).cos() + y * y)
}

pub fn laloy_y_derivative(y: f64) -> f64 {
    if y.abs() < FLAT_CUTOFF {
        return 0.0;
    }
    let e = (-1.0 / (y * y)).exp();
    let inv = 1.0 / y;
    -(2.0 * inv.powi(3) * e * (inv.cos() + y * y) + e * (inv * inv * inv.sin() + 2.0 * y))
}

/// `U(x, y) = wintner(x) + laloy_y(y)`: decoupled, so each coordinate keeps its own energy.
pub fn laloy(x: f64, y: f64) -> f64 {
    wintner(x) + laloy_y(y)
}

pub fn laloy_gradient(x: f64, y: f64) -> [f64; 2] {
    [wintner_derivative(x), laloy_y_derivative(y)]
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PotentialSpec {
    Polynomial(Polynomial),
    Wintner,
    Laloy,
}

impl PotentialSpec {
    pub fn builtin(name: &str) -> Result<Self, DynError> {
        match name.trim().to_ascii_lowercase().as_str() {
            "wintner" => Ok(PotentialSpec::Wintner),
            "laloy" => Ok(PotentialSpec::Laloy),
            other => Err(DynError::UnknownBuiltin(other.to_string())),
        }
    }

    pub fn num_vars(&self) -> usize {
        match self {
            PotentialSpec::Polynomial(p) => p.num_vars(),
            PotentialSpec::Wintner => 1,
            PotentialSpec::Laloy => 2,
        }
    }

    /// A sum of one-variable functions, one per coordinate.
    pub fn is_separable(&self) -> bool {
        !matches!(self, PotentialSpec::Polynomial(_))
    }

    /// The one-variable summand for coordinate `i` of a separable potential.
    pub fn coordinate_value(&self, i: usize, t: f64) -> Option<f64> {
        match (self, i) {
            (PotentialSpec::Wintner, 0) | (PotentialSpec::Laloy, 0) => Some(wintner(t)),
            (PotentialSpec::Laloy, 1) => Some(laloy_y(t)),
            _ => None,
        }
    }

    pub(crate) fn compile(&self) -> Result<CompiledPotential, DynError> {
        Ok(match self {
            PotentialSpec::Polynomial(p) => CompiledPotential::Poly {
                u: p.to_fast(),
                grad: (0..p.num_vars()).map(|i| p.partial(i).map(|d| d.to_fast())).collect::<Result<_, _>>()?,
            },
            PotentialSpec::Wintner => CompiledPotential::Wintner,
            PotentialSpec::Laloy => CompiledPotential::Laloy,
        })
    }
}

impl std::fmt::Display for PotentialSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PotentialSpec::Polynomial(p) => write!(f, "{p}"),
            PotentialSpec::Wintner => write!(f, "wintner"),
            PotentialSpec::Laloy => write!(f, "laloy"),
        }
    }
}

#[derive(Clone, Debug)]
pub(crate) enum CompiledPotential {
    Poly { u: FastPoly, grad: Vec<FastPoly> },
    Wintner,
    Laloy,
}

impl CompiledPotential {
    pub(crate) fn value(&self, x: &[f64]) -> f64 {
        match self {
            CompiledPotential::Poly { u, .. } => u.eval(x),
            CompiledPotential::Wintner => wintner(x[0]),
            CompiledPotential::Laloy => laloy(x[0], x[1]),
        }
    }

    pub(crate) fn gradient(&self, x: &[f64], out: &mut [f64]) {
        match self {
            CompiledPotential::Poly { grad, .. } => {
                for (o, g) in out.iter_mut().zip(grad) {
                    *o = g.eval(x);
                }
            }
            CompiledPotential::Wintner => out[0] = wintner_derivative(x[0]),
            CompiledPotential::Laloy => {
                let g = laloy_gradient(x[0], x[1]);
                out[..2].copy_from_slice(&g);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn central(f: impl Fn(f64) -> f64, x: f64) -> f64 {
        let h = 1e-6 * x.abs().max(1e-3);
        (f(x + h) - f(x - h)) / (2.0 * h)
    }

    #[test]
    fn derivatives_match_differences() {
        for &x in &[0.2, 0.31, -0.45, 0.7, 1.3, -2.0] {
            let (a, b) = (wintner_derivative(x), central(wintner, x));
            assert!((a - b).abs() <= 1e-6 * (1.0 + a.abs()), "{x}: {a} vs {b}");
            let (a, b) = (laloy_y_derivative(x), central(laloy_y, x));
            assert!((a - b).abs() <= 1e-6 * (1.0 + a.abs()), "{x}: {a} vs {b}");
        }
    }

    #[test]
    fn flat_at_origin() {
        for f in [wintner, wintner_derivative, laloy_y, laloy_y_derivative] {
            assert_eq!(f(0.0), 0.0);
            assert_eq!(f(1e-9), 0.0);
            assert!(f(0.01).abs() < 1e-300);
        }
    }
}
