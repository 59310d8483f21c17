use nalgebra::{DMatrix, DVector};

use super::potential::CompiledPotential;
use super::{DynError, KineticMetric, PotentialSpec};
use crate::symcore::FastPoly;

#[derive(Clone, Debug)]
enum CompiledMetric {
    Identity,
    /// Row-major `g` and `g⁻¹`.
    Constant { g: Vec<f64>, ginv: Vec<f64> },
    /// `g[a*n + b]` and `dg[c*n*n + a*n + b] = ∂_c g_ab`.
    Poly { g: Vec<FastPoly>, dg: Vec<FastPoly> },
}

/// Potential plus kinetic metric on `ℝⁿ`.
#[derive(Clone, Debug)]
pub struct MechanicalSystem {
    potential: PotentialSpec,
    metric: KineticMetric,
    n: usize,
    pot: CompiledPotential,
    met: CompiledMetric,
}

impl MechanicalSystem {
    pub fn new(potential: PotentialSpec, metric: KineticMetric) -> Result<Self, DynError> {
        let n = potential.num_vars();
        if let Some(d) = metric.dim() {
            if d != n {
                return Err(DynError::DimensionMismatch { expected: n, got: d });
            }
        }
        let met = match &metric {
            KineticMetric::Identity => CompiledMetric::Identity,
            KineticMetric::ConstantSpd(m) => {
                let inv = m.clone().cholesky().ok_or_else(|| DynError::MetricNotSpd(String::new()))?.inverse();
                CompiledMetric::Constant {
                    g: m.transpose().iter().copied().collect(),
                    ginv: inv.transpose().iter().copied().collect(),
                }
            }
            KineticMetric::Polynomial(e) => {
                let g = e.iter().flatten().map(|p| p.to_fast()).collect();
                let mut dg = Vec::with_capacity(n * n * n);
                for c in 0..n {
                    for row in e {
                        for p in row {
                            dg.push(p.partial(c)?.to_fast());
                        }
                    }
                }
                CompiledMetric::Poly { g, dg }
            }
        };
        let pot = potential.compile()?;
        Ok(MechanicalSystem {
            potential,
            metric,
            n,
            pot,
            met,
        })
    }

    pub fn num_vars(&self) -> usize {
        self.n
    }

    pub fn potential_spec(&self) -> &PotentialSpec {
        &self.potential
    }

    pub fn metric(&self) -> &KineticMetric {
        &self.metric
    }

    pub fn potential(&self, x: &[f64]) -> f64 {
        self.pot.value(x)
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.n];
        self.pot.gradient(x, &mut g);
        g
    }

    pub(crate) fn has_constant_metric(&self) -> bool {
        !matches!(self.met, CompiledMetric::Poly { .. })
    }

    /// `g(x)`, verified positive definite for polynomial metrics.
    pub fn metric_at(&self, x: &[f64]) -> Result<DMatrix<f64>, DynError> {
        let n = self.n;
        match &self.met {
            CompiledMetric::Identity => Ok(DMatrix::identity(n, n)),
            CompiledMetric::Constant { g, .. } => Ok(DMatrix::from_row_slice(n, n, g)),
            CompiledMetric::Poly { g, .. } => {
                let m = DMatrix::from_iterator(n, n, g.iter().map(|p| p.eval(x))).transpose();
                if m.clone().cholesky().is_none() {
                    return Err(DynError::MetricNotSpd(format!(" at x = {x:?}")));
                }
                Ok(m)
            }
        }
    }

    /// `g_x(a, b)`.
    pub fn inner(&self, x: &[f64], a: &[f64], b: &[f64]) -> Result<f64, DynError> {
        match &self.met {
            CompiledMetric::Identity => Ok(a.iter().zip(b).map(|(p, q)| p * q).sum()),
            CompiledMetric::Constant { g, .. } => Ok(quad(g, a, b)),
            CompiledMetric::Poly { .. } => {
                let g = self.metric_at(x)?;
                Ok((DVector::from_column_slice(a).transpose() * g * DVector::from_column_slice(b))[(0, 0)])
            }
        }
    }

    pub fn norm(&self, x: &[f64], v: &[f64]) -> Result<f64, DynError> {
        Ok(self.inner(x, v, v)?.max(0.0).sqrt())
    }

    /// `½ g_x(v, v) + s·U(x)`.
    pub fn energy(&self, x: &[f64], v: &[f64], scale: f64) -> Result<f64, DynError> {
        Ok(0.5 * self.inner(x, v, v)? + scale * self.potential(x))
    }

    /// Euler–Lagrange acceleration `a = −g⁻¹(w + s∇U)` with
    /// `w_a = Σ_ij (∂_i g_aj − ½ ∂_a g_ij) vⁱ vʲ`, i.e. `Γ^a_ij vⁱ vʲ` lowered.
    pub fn accel(&self, x: &[f64], v: &[f64], scale: f64) -> Result<Vec<f64>, DynError> {
        let mut out = vec![0.0; self.n];
        let mut scratch = vec![0.0; self.n];
        self.accel_into(x, v, scale, &mut out, &mut scratch)?;
        Ok(out)
    }

    pub(crate) fn accel_into(
        &self,
        x: &[f64],
        v: &[f64],
        scale: f64,
        out: &mut [f64],
        scratch: &mut [f64],
    ) -> Result<(), DynError> {
        let n = self.n;
        self.pot.gradient(x, scratch);
        match &self.met {
            CompiledMetric::Identity => {
                for (o, g) in out.iter_mut().zip(scratch.iter()) {
                    *o = -scale * g;
                }
            }
            CompiledMetric::Constant { ginv, .. } => {
                for a in 0..n {
                    let row = &ginv[a * n..(a + 1) * n];
                    out[a] = -scale * row.iter().zip(scratch.iter()).map(|(p, q)| p * q).sum::<f64>();
                }
            }
            CompiledMetric::Poly { g, dg } => {
                let gm = DMatrix::from_iterator(n, n, g.iter().map(|p| p.eval(x))).transpose();
                let chol = gm
                    .cholesky()
                    .ok_or_else(|| DynError::MetricNotSpd(format!(" at x = {x:?}")))?;
                let d: Vec<f64> = dg.iter().map(|p| p.eval(x)).collect();
                let idx = |c: usize, a: usize, b: usize| c * n * n + a * n + b;
                let mut rhs = DVector::zeros(n);
                for a in 0..n {
                    let mut w = 0.0;
                    for i in 0..n {
                        for j in 0..n {
                            w += (d[idx(i, a, j)] - 0.5 * d[idx(a, i, j)]) * v[i] * v[j];
                        }
                    }
                    rhs[a] = -(w + scale * scratch[a]);
                }
                let sol = chol.solve(&rhs);
                out.copy_from_slice(sol.as_slice());
            }
        }
        Ok(())
    }
}

fn quad(g: &[f64], a: &[f64], b: &[f64]) -> f64 {
    let n = a.len();
    let mut s = 0.0;
    for i in 0..n {
        let row = &g[i * n..(i + 1) * n];
        s += a[i] * row.iter().zip(b).map(|(p, q)| p * q).sum::<f64>();
    }
    s
}
