use std::fmt;

use super::{mismatch, parse_list, FastPoly, Polynomial, RationalFunction, SymError, VarSet, WeightVector};

/// Polynomial vector field `Σ V^i ∂_i`, one component per variable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyVectorField {
    vars: VarSet,
    components: Vec<Polynomial>,
}

impl PolyVectorField {
    pub fn new(vars: &VarSet, components: Vec<Polynomial>) -> Result<Self, SymError> {
        if components.len() != vars.len() {
            return Err(SymError::DimensionMismatch {
                expected: vars.len(),
                got: components.len(),
            });
        }
        for c in &components {
            if c.vars() != vars {
                return Err(mismatch(vars, c.vars()));
            }
        }
        Ok(PolyVectorField {
            vars: vars.clone(),
            components,
        })
    }

    /// Parses `"x,2*y,1"`.
    pub fn parse(text: &str, vars: &VarSet) -> Result<Self, SymError> {
        Self::new(vars, parse_list(text, vars)?)
    }

    pub fn zero(vars: &VarSet) -> Self {
        PolyVectorField {
            vars: vars.clone(),
            components: vec![Polynomial::zero(vars); vars.len()],
        }
    }

    /// The coordinate field `∂_i`.
    pub fn coordinate(vars: &VarSet, index: usize) -> Result<Self, SymError> {
        vars.check_index(index)?;
        let mut f = Self::zero(vars);
        f.components[index] = Polynomial::one(vars);
        Ok(f)
    }

    pub fn vars(&self) -> &VarSet {
        &self.vars
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn components(&self) -> &[Polynomial] {
        &self.components
    }

    pub fn component(&self, i: usize) -> &Polynomial {
        &self.components[i]
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(Polynomial::is_zero)
    }

    /// `V(f) = Σ V^i ∂_i f`.
    pub fn apply(&self, f: &Polynomial) -> Result<Polynomial, SymError> {
        apply_field(self, f)
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self, SymError> {
        if self.vars != other.vars {
            return Err(mismatch(&self.vars, &other.vars));
        }
        let components = self.components.iter().zip(&other.components).map(|(a, b)| a + b).collect();
        Ok(PolyVectorField {
            vars: self.vars.clone(),
            components,
        })
    }

    /// Multiplies every component by `f`.
    pub fn mul_poly(&self, f: &Polynomial) -> Result<Self, SymError> {
        if self.vars != *f.vars() {
            return Err(mismatch(&self.vars, f.vars()));
        }
        Ok(PolyVectorField {
            vars: self.vars.clone(),
            components: self.components.iter().map(|c| c * f).collect(),
        })
    }

    pub fn eval_f64(&self, point: &[f64]) -> Result<Vec<f64>, SymError> {
        self.components.iter().map(|c| c.eval_f64(point)).collect()
    }

    /// Tangency to `𝒱(x_i : i ∈ center)`: each center component vanishes
    /// once all center variables are set to zero. Zero components count as tangent.
    pub fn is_tangent_to_center(&self, center: &[usize]) -> bool {
        center
            .iter()
            .all(|&i| i < self.num_vars() && self.components[i].restrict_to_zero(center).is_zero())
    }

    pub fn to_fast(&self) -> Vec<FastPoly> {
        self.components.iter().map(Polynomial::to_fast).collect()
    }
}

impl fmt::Display for PolyVectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.components.iter().map(|c| c.to_string()).collect();
        write!(f, "({})", parts.join(", "))
    }
}

/// Vector field with rational-function components (pushout results).
#[derive(Clone, Debug, PartialEq)]
pub struct RationalVectorField {
    vars: VarSet,
    components: Vec<RationalFunction>,
}

impl RationalVectorField {
    pub fn new(vars: &VarSet, components: Vec<RationalFunction>) -> Result<Self, SymError> {
        if components.len() != vars.len() {
            return Err(SymError::DimensionMismatch {
                expected: vars.len(),
                got: components.len(),
            });
        }
        for c in &components {
            if c.vars() != vars {
                return Err(mismatch(vars, c.vars()));
            }
        }
        Ok(RationalVectorField {
            vars: vars.clone(),
            components,
        })
    }

    pub fn vars(&self) -> &VarSet {
        &self.vars
    }

    pub fn components(&self) -> &[RationalFunction] {
        &self.components
    }

    pub fn component(&self, i: usize) -> &RationalFunction {
        &self.components[i]
    }

    /// Polynomial field when every component simplifies to a polynomial.
    pub fn to_polynomial(&self) -> Option<PolyVectorField> {
        let comps: Option<Vec<Polynomial>> = self.components.iter().map(RationalFunction::to_polynomial).collect();
        comps.map(|components| PolyVectorField {
            vars: self.vars.clone(),
            components,
        })
    }

    pub fn is_polynomial(&self) -> bool {
        self.to_polynomial().is_some()
    }

    pub fn eval_f64(&self, point: &[f64]) -> Result<Vec<f64>, SymError> {
        self.components.iter().map(|c| c.eval_f64(point)).collect()
    }
}

impl From<PolyVectorField> for RationalVectorField {
    fn from(v: PolyVectorField) -> Self {
        RationalVectorField {
            vars: v.vars,
            components: v.components.into_iter().map(RationalFunction::from_poly).collect(),
        }
    }
}

impl fmt::Display for RationalVectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.components.iter().map(|c| c.to_string()).collect();
        write!(f, "({})", parts.join(", "))
    }
}

/// Directional derivative `V(f) = Σ V^i ∂_i f`.
pub fn apply_field(v: &PolyVectorField, f: &Polynomial) -> Result<Polynomial, SymError> {
    if v.vars() != f.vars() {
        return Err(mismatch(v.vars(), f.vars()));
    }
    let mut acc = Polynomial::zero(f.vars());
    for (i, c) in v.components.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        acc = &acc + &(c * &f.partial(i)?);
    }
    Ok(acc)
}

/// Euler field `Σ λ_i x_i ∂_i`.
pub fn euler_field(vars: &VarSet, weights: &WeightVector) -> Result<PolyVectorField, SymError> {
    if weights.len() != vars.len() {
        return Err(SymError::DimensionMismatch {
            expected: vars.len(),
            got: weights.len(),
        });
    }
    let components = weights
        .weights
        .iter()
        .enumerate()
        .map(|(i, w)| Polynomial::var(vars, i).map(|x| x.scale(w)))
        .collect::<Result<Vec<_>, _>>()?;
    PolyVectorField::new(vars, components)
}
