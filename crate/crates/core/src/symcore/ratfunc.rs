use std::fmt;

use num_traits::One;

use super::{mismatch, Polynomial, Rational, SymError, VarSet};

/// Quotient of two polynomials over the same variables.
///
/// Normal form cancels the common monomial content of numerator and
/// denominator and scales the denominator to a monic leading term. No
/// multivariate gcd is attempted beyond that.
#[derive(Clone, Debug)]
pub struct RationalFunction {
    num: Polynomial,
    den: Polynomial,
}

impl RationalFunction {
    pub fn new(num: Polynomial, den: Polynomial) -> Result<Self, SymError> {
        if num.vars() != den.vars() {
            return Err(mismatch(num.vars(), den.vars()));
        }
        if den.is_zero() {
            return Err(SymError::ZeroDivisor);
        }
        Ok(Self::normalized(num, den))
    }

    fn normalized(num: Polynomial, den: Polynomial) -> Self {
        if num.is_zero() {
            let vars = num.vars().clone();
            return RationalFunction {
                num,
                den: Polynomial::one(&vars),
            };
        }
        let a = num.monomial_content();
        let b = den.monomial_content();
        let common: Vec<u32> = a.iter().zip(&b).map(|(x, y)| *x.min(y)).collect();
        let mut num = num.div_monomial(&common).expect("content divides");
        let mut den = den.div_monomial(&common).expect("content divides");
        let lc = den.leading_term().map(|(_, c)| c.clone()).expect("nonzero");
        if !lc.is_one() {
            let inv = Rational::one() / lc;
            num = num.scale(&inv);
            den = den.scale(&inv);
        }
        RationalFunction { num, den }
    }

    pub fn from_poly(p: Polynomial) -> Self {
        let vars = p.vars().clone();
        RationalFunction {
            num: p,
            den: Polynomial::one(&vars),
        }
    }

    pub fn vars(&self) -> &VarSet {
        self.num.vars()
    }

    pub fn numer(&self) -> &Polynomial {
        &self.num
    }

    pub fn denom(&self) -> &Polynomial {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// Polynomial value when the denominator divides the numerator exactly.
    pub fn to_polynomial(&self) -> Option<Polynomial> {
        self.num.exact_divide(&self.den).ok().flatten()
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self, SymError> {
        if self.vars() != other.vars() {
            return Err(mismatch(self.vars(), other.vars()));
        }
        if self.den == other.den {
            return Ok(Self::normalized(&self.num + &other.num, self.den.clone()));
        }
        if let Some(k) = other.den.exact_divide(&self.den)? {
            return Ok(Self::normalized(&(&self.num * &k) + &other.num, other.den.clone()));
        }
        if let Some(k) = self.den.exact_divide(&other.den)? {
            return Ok(Self::normalized(&self.num + &(&other.num * &k), self.den.clone()));
        }
        let num = &(&self.num * &other.den) + &(&other.num * &self.den);
        Ok(Self::normalized(num, &self.den * &other.den))
    }

    pub fn neg(&self) -> Self {
        RationalFunction {
            num: -&self.num,
            den: self.den.clone(),
        }
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self, SymError> {
        self.checked_add(&other.neg())
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self, SymError> {
        if self.vars() != other.vars() {
            return Err(mismatch(self.vars(), other.vars()));
        }
        Ok(Self::normalized(&self.num * &other.num, &self.den * &other.den))
    }

    pub fn checked_div(&self, other: &Self) -> Result<Self, SymError> {
        if other.is_zero() {
            return Err(SymError::ZeroDivisor);
        }
        if self.vars() != other.vars() {
            return Err(mismatch(self.vars(), other.vars()));
        }
        Ok(Self::normalized(&self.num * &other.den, &self.den * &other.num))
    }

    pub fn mul_poly(&self, p: &Polynomial) -> Result<Self, SymError> {
        self.checked_mul(&Self::from_poly(p.clone()))
    }

    pub fn eval_f64(&self, point: &[f64]) -> Result<f64, SymError> {
        Ok(self.num.eval_f64(point)? / self.den.eval_f64(point)?)
    }

    /// Composition with rational images, one per variable, sharing a target set.
    pub fn substitute_all(&self, images: &[RationalFunction]) -> Result<Self, SymError> {
        let n = substitute_poly(&self.num, images)?;
        let d = substitute_poly(&self.den, images)?;
        n.checked_div(&d)
    }

    /// Sets every variable in `indices` to zero in numerator and denominator.
    pub fn restrict_to_zero(&self, indices: &[usize]) -> (Polynomial, Polynomial) {
        (self.num.restrict_to_zero(indices), self.den.restrict_to_zero(indices))
    }
}

/// `p(images)` where each image is a rational function.
pub(crate) fn substitute_poly(p: &Polynomial, images: &[RationalFunction]) -> Result<RationalFunction, SymError> {
    if images.len() != p.num_vars() {
        return Err(SymError::DimensionMismatch {
            expected: p.num_vars(),
            got: images.len(),
        });
    }
    let target = images[0].vars().clone();
    let mut acc = RationalFunction::from_poly(Polynomial::zero(&target));
    for (m, c) in p.terms() {
        let mut term = RationalFunction::from_poly(Polynomial::constant(&target, c.clone()));
        for (i, &e) in m.exps().iter().enumerate() {
            for _ in 0..e {
                term = term.checked_mul(&images[i])?;
            }
        }
        acc = acc.checked_add(&term)?;
    }
    Ok(acc)
}

impl PartialEq for RationalFunction {
    fn eq(&self, other: &Self) -> bool {
        self.vars() == other.vars() && &self.num * &other.den == &other.num * &self.den
    }
}

impl fmt::Display for RationalFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let den_one = self.den.is_constant() && self.den.constant_term().is_one();
        if den_one {
            write!(f, "{}", self.num)
        } else if self.num.is_zero() {
            write!(f, "0")
        } else {
            write!(f, "({}) / ({})", self.num, self.den)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symcore::parse;

    #[test]
    fn cancels_monomial_content() {
        let v = VarSet::parse("x,y").unwrap();
        let r = RationalFunction::new(parse("2*x^3*y + 4*x^2*y^2", &v).unwrap(), parse("2*x^2*y", &v).unwrap()).unwrap();
        assert_eq!(r.numer(), &parse("x + 2*y", &v).unwrap());
        assert!(r.denom().is_constant());
        assert_eq!(r.to_polynomial(), Some(parse("x + 2*y", &v).unwrap()));
    }

    #[test]
    fn quotient_of_example_two_three() {
        let v = VarSet::parse("x,y,z").unwrap();
        let p = RationalFunction::new(parse("2*x^2+4*y^2", &v).unwrap(), parse("x^2+y^2", &v).unwrap()).unwrap();
        assert!(p.to_polynomial().is_none());
        assert_eq!(p.eval_f64(&[1.0, 0.0, 5.0]).unwrap(), 2.0);
        assert_eq!(p.eval_f64(&[0.0, 1.0, 5.0]).unwrap(), 4.0);
    }

    #[test]
    fn rejects_zero_denominator() {
        let v = VarSet::parse("x").unwrap();
        assert_eq!(
            RationalFunction::new(Polynomial::one(&v), Polynomial::zero(&v)).unwrap_err(),
            SymError::ZeroDivisor
        );
    }

    #[test]
    fn add_and_equality() {
        let v = VarSet::parse("x,y").unwrap();
        let a = RationalFunction::new(parse("y", &v).unwrap(), parse("x", &v).unwrap()).unwrap();
        let b = RationalFunction::new(parse("1", &v).unwrap(), parse("x", &v).unwrap()).unwrap();
        let s = a.checked_add(&b).unwrap();
        let expect = RationalFunction::new(parse("2*y + 2", &v).unwrap(), parse("2*x", &v).unwrap()).unwrap();
        assert_eq!(s, expect);
    }
}
