use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Signed, ToPrimitive, Zero};

use super::{mismatch, Rational, SymError, VarSet};

/// Exponent vector ordered graded-lexicographically: total degree first,
/// then exponents compared left to right in declared variable order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Monomial(Vec<u32>);

impl Monomial {
    pub fn new(exps: Vec<u32>) -> Self {
        Monomial(exps)
    }

    pub fn one(num_vars: usize) -> Self {
        Monomial(vec![0; num_vars])
    }

    pub fn exps(&self) -> &[u32] {
        &self.0
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_one(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    pub fn divides(&self, other: &Monomial) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// `self / other`; caller guarantees `other.divides(self)`.
    fn div(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Sparse multivariate polynomial with exact rational coefficients.
///
/// Terms are kept in a map keyed by graded-lex monomials, so the leading
/// term is the last entry. No stored coefficient is zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Polynomial {
    vars: VarSet,
    terms: BTreeMap<Monomial, Rational>,
}

impl Polynomial {
    pub fn zero(vars: &VarSet) -> Self {
        Polynomial {
            vars: vars.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn one(vars: &VarSet) -> Self {
        Self::constant(vars, Rational::one())
    }

    pub fn constant(vars: &VarSet, c: Rational) -> Self {
        let mut p = Self::zero(vars);
        p.add_term(Monomial::one(vars.len()), c);
        p
    }

    pub fn var(vars: &VarSet, index: usize) -> Result<Self, SymError> {
        vars.check_index(index)?;
        let mut exps = vec![0; vars.len()];
        exps[index] = 1;
        Ok(Self::monomial(vars, exps, Rational::one()))
    }

    /// `coeff * prod x_i^exps[i]`. Panics if `exps` has the wrong length.
    pub fn monomial(vars: &VarSet, exps: Vec<u32>, coeff: Rational) -> Self {
        assert_eq!(exps.len(), vars.len(), "exponent vector length");
        let mut p = Self::zero(vars);
        p.add_term(Monomial(exps), coeff);
        p
    }

    pub fn from_terms<I>(vars: &VarSet, terms: I) -> Result<Self, SymError>
    where
        I: IntoIterator<Item = (Vec<u32>, Rational)>,
    {
        let mut p = Self::zero(vars);
        for (exps, c) in terms {
            if exps.len() != vars.len() {
                return Err(SymError::DimensionMismatch {
                    expected: vars.len(),
                    got: exps.len(),
                });
            }
            p.add_term(Monomial(exps), c);
        }
        Ok(p)
    }

    pub(crate) fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(existing) => {
                *existing += c;
                if existing.is_zero() {
                    self.terms.remove(&m);
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn vars(&self) -> &VarSet {
        &self.vars
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(Monomial::is_one)
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Terms in descending graded-lex order.
    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter().rev()
    }

    pub fn coefficient(&self, exps: &[u32]) -> Rational {
        self.terms
            .get(&Monomial(exps.to_vec()))
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    pub fn constant_term(&self) -> Rational {
        self.coefficient(&vec![0; self.num_vars()])
    }

    pub fn leading_term(&self) -> Option<(&Monomial, &Rational)> {
        self.terms.iter().next_back()
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn total_degree(&self) -> Option<u32> {
        self.leading_term().map(|(m, _)| m.degree())
    }

    pub fn degree_in(&self, index: usize) -> u32 {
        self.terms.keys().map(|m| m.0[index]).max().unwrap_or(0)
    }

    fn same_vars(&self, other: &Polynomial) -> Result<(), SymError> {
        if self.vars == other.vars {
            Ok(())
        } else {
            Err(mismatch(&self.vars, &other.vars))
        }
    }

    pub fn checked_add(&self, other: &Polynomial) -> Result<Polynomial, SymError> {
        self.same_vars(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn checked_sub(&self, other: &Polynomial) -> Result<Polynomial, SymError> {
        self.same_vars(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), -c.clone());
        }
        Ok(out)
    }

    pub fn checked_mul(&self, other: &Polynomial) -> Result<Polynomial, SymError> {
        self.same_vars(other)?;
        let mut out = Polynomial::zero(&self.vars);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: &Rational) -> Polynomial {
        if c.is_zero() {
            return Polynomial::zero(&self.vars);
        }
        Polynomial {
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(m, v)| (m.clone(), v * c)).collect(),
        }
    }

    pub fn pow(&self, exp: u32) -> Polynomial {
        let mut result = Polynomial::one(&self.vars);
        let mut base = self.clone();
        let mut e = exp;
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        result
    }

    /// Multiplies by `prod x_i^exps[i]`.
    pub fn mul_monomial(&self, exps: &[u32]) -> Polynomial {
        let m = Monomial(exps.to_vec());
        Polynomial {
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(k, v)| (k.mul(&m), v.clone())).collect(),
        }
    }

    /// Componentwise minimum exponent over all terms: the largest monomial
    /// dividing the polynomial. All zeros for the zero polynomial.
    pub fn monomial_content(&self) -> Vec<u32> {
        let mut iter = self.terms.keys();
        let Some(first) = iter.next() else {
            return vec![0; self.num_vars()];
        };
        let mut content = first.0.clone();
        for m in iter {
            for (c, e) in content.iter_mut().zip(&m.0) {
                *c = (*c).min(*e);
            }
        }
        content
    }

    /// Divides by a monomial, or returns `None` when some term is not a multiple.
    pub fn div_monomial(&self, exps: &[u32]) -> Option<Polynomial> {
        let m = Monomial(exps.to_vec());
        if !self.terms.keys().all(|k| m.divides(k)) {
            return None;
        }
        Some(Polynomial {
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(k, v)| (k.div(&m), v.clone())).collect(),
        })
    }

    /// Exact formal partial derivative with respect to variable `index`.
    pub fn partial(&self, index: usize) -> Result<Polynomial, SymError> {
        self.vars.check_index(index)?;
        let mut out = Polynomial::zero(&self.vars);
        for (m, c) in &self.terms {
            let e = m.0[index];
            if e == 0 {
                continue;
            }
            let mut exps = m.0.clone();
            exps[index] -= 1;
            out.add_term(Monomial(exps), c * Rational::from_integer(e.into()));
        }
        Ok(out)
    }

    /// Sets every variable in `indices` to zero.
    pub fn restrict_to_zero(&self, indices: &[usize]) -> Polynomial {
        Polynomial {
            vars: self.vars.clone(),
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| indices.iter().all(|&i| m.0[i] == 0))
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    /// Composition `p(images[0], ..., images[n-1])`. All images must share
    /// one target variable set.
    pub fn substitute_all(&self, images: &[Polynomial]) -> Result<Polynomial, SymError> {
        if images.len() != self.num_vars() {
            return Err(SymError::DimensionMismatch {
                expected: self.num_vars(),
                got: images.len(),
            });
        }
        let target = images[0].vars.clone();
        for img in images {
            if img.vars != target {
                return Err(mismatch(&target, &img.vars));
            }
        }
        let mut powers: Vec<Vec<Polynomial>> = images
            .iter()
            .map(|img| vec![Polynomial::one(&target), img.clone()])
            .collect();
        let mut out = Polynomial::zero(&target);
        for (m, c) in &self.terms {
            let mut term = Polynomial::constant(&target, c.clone());
            for (i, &e) in m.0.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let e = e as usize;
                while powers[i].len() <= e {
                    let next = &powers[i][powers[i].len() - 1] * &images[i];
                    powers[i].push(next);
                }
                term = &term * &powers[i][e];
            }
            for (tm, tc) in term.terms {
                out.add_term(tm, tc);
            }
        }
        Ok(out)
    }

    /// Substitutes the mapped variables. Unmapped variables are sent to the
    /// variable of the same name in the images' common target set (or stay
    /// put when the map is empty).
    pub fn substitute(&self, map: &BTreeMap<usize, Polynomial>) -> Result<Polynomial, SymError> {
        for &i in map.keys() {
            self.vars.check_index(i)?;
        }
        let target = match map.values().next() {
            Some(p) => p.vars.clone(),
            None => return Ok(self.clone()),
        };
        let mut images = Vec::with_capacity(self.num_vars());
        for i in 0..self.num_vars() {
            match map.get(&i) {
                Some(img) => images.push(img.clone()),
                None => {
                    let name = self.vars.name(i);
                    let j = target.index_of(name).ok_or_else(|| mismatch(&self.vars, &target))?;
                    images.push(Polynomial::var(&target, j)?);
                }
            }
        }
        self.substitute_all(&images)
    }

    /// Re-expresses the polynomial over another variable set, matching
    /// variables by name. Fails when a variable that actually occurs is missing.
    pub fn embed(&self, target: &VarSet) -> Result<Polynomial, SymError> {
        let mut index_map = Vec::with_capacity(self.num_vars());
        for i in 0..self.num_vars() {
            let used = self.degree_in(i) > 0;
            match target.index_of(self.vars.name(i)) {
                Some(j) => index_map.push(Some(j)),
                None if used => return Err(mismatch(&self.vars, target)),
                None => index_map.push(None),
            }
        }
        let mut out = Polynomial::zero(target);
        for (m, c) in &self.terms {
            let mut exps = vec![0; target.len()];
            for (i, &e) in m.0.iter().enumerate() {
                if let Some(j) = index_map[i] {
                    exps[j] = e;
                }
            }
            out.add_term(Monomial(exps), c.clone());
        }
        Ok(out)
    }

    /// Exact single-divisor division in graded-lex order.
    ///
    /// Returns `Ok(None)` when the divisor does not divide `self`: with one
    /// divisor, every remainder of a true multiple is itself a multiple, so
    /// a leading term not divisible by the divisor's leading term is final.
    pub fn exact_divide(&self, divisor: &Polynomial) -> Result<Option<Polynomial>, SymError> {
        self.same_vars(divisor)?;
        let (lm_d, lc_d) = match divisor.leading_term() {
            Some((m, c)) => (m.clone(), c.clone()),
            None => return Err(SymError::ZeroDivisor),
        };
        let mut rem = self.clone();
        let mut quotient = Polynomial::zero(&self.vars);
        while let Some((lm_r, lc_r)) = rem.leading_term() {
            if !lm_d.divides(lm_r) {
                return Ok(None);
            }
            let m = lm_r.div(&lm_d);
            let c = lc_r / &lc_d;
            for (dm, dc) in &divisor.terms {
                rem.add_term(dm.mul(&m), -(dc * &c));
            }
            quotient.add_term(m, c);
        }
        Ok(Some(quotient))
    }

    pub fn eval_rational(&self, point: &[Rational]) -> Result<Rational, SymError> {
        self.check_point(point.len())?;
        let mut acc = Rational::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (x, &e) in point.iter().zip(&m.0) {
                if e > 0 {
                    t *= num_traits::pow(x.clone(), e as usize);
                }
            }
            acc += t;
        }
        Ok(acc)
    }

    pub fn eval_f64(&self, point: &[f64]) -> Result<f64, SymError> {
        self.check_point(point.len())?;
        Ok(self.to_fast().eval(point))
    }

    fn check_point(&self, len: usize) -> Result<(), SymError> {
        if len == self.num_vars() {
            Ok(())
        } else {
            Err(SymError::DimensionMismatch {
                expected: self.num_vars(),
                got: len,
            })
        }
    }

    /// Floating point snapshot for repeated numeric evaluation.
    pub fn to_fast(&self) -> FastPoly {
        FastPoly {
            num_vars: self.num_vars(),
            terms: self
                .terms()
                .map(|(m, c)| (c.to_f64().unwrap_or(f64::NAN), m.0.clone()))
                .collect(),
        }
    }

    fn fmt_coefficient(c: &Rational) -> String {
        if c.is_integer() {
            c.numer().to_string()
        } else {
            format!("{}/{}", c.numer(), c.denom())
        }
    }

    fn fmt_term(&self, m: &Monomial, c_abs: &Rational) -> String {
        if m.is_one() {
            return Self::fmt_coefficient(c_abs);
        }
        let mono: Vec<String> = m
            .0
            .iter()
            .enumerate()
            .filter(|(_, &e)| e > 0)
            .map(|(i, &e)| {
                if e == 1 {
                    self.vars.name(i).to_string()
                } else {
                    format!("{}^{}", self.vars.name(i), e)
                }
            })
            .collect();
        let mono = mono.join("*");
        if c_abs.is_one() {
            mono
        } else {
            format!("{}*{}", Self::fmt_coefficient(c_abs), mono)
        }
    }
}

/// Serialized in canonical text form.
impl serde::Serialize for Polynomial {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl fmt::Display for Polynomial {
    /// Canonical form: graded-lex descending, e.g. `x^4 + x^2*y^2 - 1/2*z`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (k, (m, c)) in self.terms().enumerate() {
            let body = self.fmt_term(m, &c.abs());
            match (k, c.is_negative()) {
                (0, false) => write!(f, "{body}")?,
                (0, true) => write!(f, "-{body}")?,
                (_, false) => write!(f, " + {body}")?,
                (_, true) => write!(f, " - {body}")?,
            }
        }
        Ok(())
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $checked:ident) => {
        impl $trait<&Polynomial> for &Polynomial {
            type Output = Polynomial;
            /// Panics when the operands live over different variable sets;
            /// use the `checked_*` methods for fallible arithmetic.
            fn $method(self, rhs: &Polynomial) -> Polynomial {
                self.$checked(rhs).expect("polynomial arithmetic across variable sets")
            }
        }
        impl $trait<Polynomial> for Polynomial {
            type Output = Polynomial;
            fn $method(self, rhs: Polynomial) -> Polynomial {
                (&self).$method(&rhs)
            }
        }
    };
}

binop!(Add, add, checked_add);
binop!(Sub, sub, checked_sub);
binop!(Mul, mul, checked_mul);

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        self.scale(&-Rational::one())
    }
}

impl Neg for Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        -&self
    }
}

/// Floating point view of a polynomial used by the numeric engines.
#[derive(Clone, Debug, PartialEq)]
pub struct FastPoly {
    num_vars: usize,
    terms: Vec<(f64, Vec<u32>)>,
}

impl FastPoly {
    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Direct term-by-term evaluation; `point.len()` must equal `num_vars`.
    pub fn eval(&self, point: &[f64]) -> f64 {
        debug_assert_eq!(point.len(), self.num_vars);
        let mut acc = 0.0;
        for (c, exps) in &self.terms {
            let mut t = *c;
            for (x, &e) in point.iter().zip(exps) {
                match e {
                    0 => {}
                    1 => t *= x,
                    2 => t *= x * x,
                    _ => t *= x.powi(e as i32),
                }
            }
            acc += t;
        }
        acc
    }
}
