use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::{Polynomial, Rational};

/// Weights `λ_i` and total weight `λ` with `f(t^λ_1 x_1, …) = t^λ f`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightVector {
    pub weights: Vec<Rational>,
    pub total: Rational,
}

impl WeightVector {
    pub fn new(weights: Vec<Rational>, total: Rational) -> Self {
        WeightVector { weights, total }
    }

    pub fn from_integers(weights: &[i64], total: i64) -> Self {
        WeightVector {
            weights: weights.iter().map(|&w| Rational::from_integer(w.into())).collect(),
            total: Rational::from_integer(total.into()),
        }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Primitive integer multiple with nonnegative total weight.
    pub fn normalized(&self) -> WeightVector {
        let mut all = self.weights.clone();
        all.push(self.total.clone());
        let all = primitive(&all);
        let mut all = all;
        if all.last().is_some_and(|l| l.is_negative()) {
            for v in &mut all {
                *v = -v.clone();
            }
        }
        let total = all.pop().expect("nonempty");
        WeightVector { weights: all, total }
    }

    /// `Σ λ_i α_i` for an exponent vector.
    pub fn weighted_degree(&self, exps: &[u32]) -> Rational {
        self.weights
            .iter()
            .zip(exps)
            .map(|(w, &e)| w * Rational::from_integer(e.into()))
            .fold(Rational::zero(), |a, b| a + b)
    }

    /// True when every term of `f` has weighted degree `total`.
    pub fn validates(&self, f: &Polynomial) -> bool {
        self.len() == f.num_vars() && f.terms().all(|(m, _)| self.weighted_degree(m.exps()) == self.total)
    }
}

impl fmt::Display for WeightVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let w: Vec<String> = self.weights.iter().map(|w| w.to_string()).collect();
        write!(f, "({}) total {}", w.join(","), self.total)
    }
}

/// Scales a rational vector to coprime integers, keeping signs.
fn primitive(v: &[Rational]) -> Vec<Rational> {
    let mut lcm = BigInt::one();
    for x in v {
        lcm = lcm.lcm(x.denom());
    }
    let ints: Vec<BigInt> = v.iter().map(|x| (x * Rational::from_integer(lcm.clone())).to_integer()).collect();
    let mut g = BigInt::zero();
    for x in &ints {
        g = g.gcd(x);
    }
    if g.is_zero() {
        g = BigInt::one();
    }
    ints.into_iter().map(|x| Rational::from_integer(x / &g)).collect()
}

/// Reduced row echelon form in place; returns the pivot column of each pivot row.
fn rref(rows: &mut [Vec<Rational>]) -> Vec<usize> {
    let ncols = rows.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = Rational::one() / &rows[r][c];
        for x in rows[r].iter_mut() {
            *x = &*x * &inv;
        }
        let pivot_row = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i != r && !row[c].is_zero() {
                let k = row[c].clone();
                for (x, p) in row.iter_mut().zip(&pivot_row) {
                    *x -= &k * p;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    pivots
}

/// Finds weights making `f` quasi-homogeneous.
///
/// Canonical choice: variables absent from `f` get weight 0; a homogeneous
/// `f` of positive degree gets weight 1 on every present variable;
/// otherwise the first nullspace basis vector of `Σ λ_i α_i − λ = 0` with
/// `λ ≠ 0`, made primitive with `λ > 0`. `None` when no such solution exists.
pub fn quasi_homogeneity(f: &Polynomial) -> Option<WeightVector> {
    if f.is_zero() {
        return None;
    }
    let n = f.num_vars();
    let present: Vec<usize> = (0..n).filter(|&i| f.degree_in(i) > 0).collect();
    if present.is_empty() {
        return None;
    }
    let degrees: Vec<u32> = f.terms().map(|(m, _)| m.degree()).collect();
    if degrees.iter().all(|&d| d == degrees[0]) {
        let mut weights = vec![Rational::zero(); n];
        for &i in &present {
            weights[i] = Rational::one();
        }
        return Some(WeightVector::new(weights, Rational::from_integer(degrees[0].into())));
    }

    let k = present.len();
    let mut rows: Vec<Vec<Rational>> = f
        .terms()
        .map(|(m, _)| {
            let mut row: Vec<Rational> = present.iter().map(|&i| Rational::from_integer(m.exps()[i].into())).collect();
            row.push(-Rational::one());
            row
        })
        .collect();
    let pivots = rref(&mut rows);
    let free: Vec<usize> = (0..=k).filter(|c| !pivots.contains(c)).collect();
    for &fc in &free {
        let mut sol = vec![Rational::zero(); k + 1];
        sol[fc] = Rational::one();
        for (row, &pc) in rows.iter().zip(&pivots) {
            sol[pc] = -row[fc].clone();
        }
        if sol[k].is_zero() {
            continue;
        }
        let mut weights = vec![Rational::zero(); n];
        for (j, &i) in present.iter().enumerate() {
            weights[i] = sol[j].clone();
        }
        return Some(WeightVector::new(weights, sol[k].clone()).normalized());
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symcore::{int, parse, VarSet};

    #[test]
    fn table_of_examples() {
        let v = VarSet::parse("x,y,z").unwrap();
        let w = quasi_homogeneity(&parse("x^4+y^4-z^6", &v).unwrap()).unwrap();
        assert_eq!(w, WeightVector::from_integers(&[3, 3, 2], 12));

        let v2 = VarSet::parse("x,y").unwrap();
        let w = quasi_homogeneity(&parse("x^2*y^2", &v2).unwrap()).unwrap();
        assert_eq!(w, WeightVector::from_integers(&[1, 1], 4));

        let v1 = VarSet::parse("x").unwrap();
        assert_eq!(quasi_homogeneity(&parse("x+x^2+x^5", &v1).unwrap()), None);
        assert_eq!(quasi_homogeneity(&parse("7", &v1).unwrap()), None);
    }

    #[test]
    fn absent_variables_get_zero_weight() {
        let v = VarSet::parse("x,y,z").unwrap();
        let w = quasi_homogeneity(&parse("x^3+y^2", &v).unwrap()).unwrap();
        assert_eq!(w, WeightVector::from_integers(&[2, 3, 0], 6));
        assert_eq!(w.total, int(6));
    }

    #[test]
    fn normalizes_rational_input() {
        let w = WeightVector::new(vec![crate::symcore::rat(-1, 2), crate::symcore::rat(-1, 3)], int(-1));
        assert_eq!(w.normalized(), WeightVector::from_integers(&[3, 2], 6));
    }
}
