use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Serialize, Serializer};

use super::DynError;
use crate::symcore::Polynomial;

/// The kinetic term `½ g_x(v, v)`.
#[derive(Clone, Debug, PartialEq)]
pub enum KineticMetric {
    Identity,
    ConstantSpd(DMatrix<f64>),
    /// Symmetric matrix of polynomial entries; positive definiteness is
    /// checked wherever it is evaluated.
    Polynomial(Vec<Vec<Polynomial>>),
}

impl KineticMetric {
    pub fn constant(m: DMatrix<f64>) -> Result<Self, DynError> {
        if !m.is_square() {
            return Err(DynError::MetricNotSpd(": matrix is not square".into()));
        }
        let scale = m.amax().max(1.0);
        if (&m - m.transpose()).amax() > 1e-12 * scale {
            return Err(DynError::MetricNotSpd(": matrix is not symmetric".into()));
        }
        if m.iter().any(|x| !x.is_finite()) || m.clone().cholesky().is_none() {
            return Err(DynError::MetricNotSpd(String::new()));
        }
        Ok(KineticMetric::ConstantSpd(m))
    }

    /// Constant metric from its rows.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, DynError> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(DynError::MetricNotSpd(": matrix is not square".into()));
        }
        Self::constant(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn diagonal(d: &[f64]) -> Result<Self, DynError> {
        Self::constant(DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(d)))
    }

    /// `A·Aᵀ + I` with entries of `A` uniform in `[-1, 1]`, from a fixed seed.
    pub fn random_spd(n: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        let m = &a * a.transpose() + DMatrix::identity(n, n);
        Self::constant((&m + m.transpose()) * 0.5).expect("A·Aᵀ + I is SPD")
    }

    pub fn polynomial(entries: Vec<Vec<Polynomial>>) -> Result<Self, DynError> {
        let n = entries.len();
        for (a, row) in entries.iter().enumerate() {
            if row.len() != n {
                return Err(DynError::MetricNotSpd(": matrix is not square".into()));
            }
            for (b, e) in row.iter().enumerate() {
                if e.num_vars() != n {
                    return Err(DynError::DimensionMismatch {
                        expected: n,
                        got: e.num_vars(),
                    });
                }
                if *e != entries[b][a] {
                    return Err(DynError::MetricNotSpd(": matrix is not symmetric".into()));
                }
            }
        }
        Ok(KineticMetric::Polynomial(entries))
    }

    pub fn is_constant(&self) -> bool {
        !matches!(self, KineticMetric::Polynomial(_))
    }

    pub fn dim(&self) -> Option<usize> {
        match self {
            KineticMetric::Identity => None,
            KineticMetric::ConstantSpd(m) => Some(m.nrows()),
            KineticMetric::Polynomial(e) => Some(e.len()),
        }
    }

    pub fn label(&self) -> String {
        match self {
            KineticMetric::Identity => "identity".into(),
            KineticMetric::ConstantSpd(m) => {
                let rows: Vec<String> = m
                    .row_iter()
                    .map(|r| r.iter().map(|x| format!("{x}")).collect::<Vec<_>>().join(","))
                    .collect();
                format!("[{}]", rows.join(";"))
            }
            KineticMetric::Polynomial(e) => {
                let rows: Vec<String> = e
                    .iter()
                    .map(|r| r.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","))
                    .collect();
                format!("[{}]", rows.join(";"))
            }
        }
    }
}

impl Serialize for KineticMetric {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        #[serde(rename_all = "lowercase")]
        enum Repr<'a> {
            Identity,
            Constant(Vec<Vec<f64>>),
            Polynomial(&'a Vec<Vec<Polynomial>>),
        }
        match self {
            KineticMetric::Identity => Repr::Identity.serialize(s),
            KineticMetric::ConstantSpd(m) => {
                Repr::Constant(m.row_iter().map(|r| r.iter().copied().collect()).collect()).serialize(s)
            }
            KineticMetric::Polynomial(e) => Repr::Polynomial(e).serialize(s),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(KineticMetric::diagonal(&[1.0, 2.0, 3.0]).is_ok());
        assert!(KineticMetric::diagonal(&[1.0, -2.0]).is_err());
        assert!(KineticMetric::constant(DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.4, 1.0])).is_err());
        let r = KineticMetric::random_spd(3, 11);
        assert_eq!(r, KineticMetric::random_spd(3, 11));
        assert_eq!(r.dim(), Some(3));
    }
}
