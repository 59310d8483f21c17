//! Logarithmic and weakly logarithmic tests for a field `V` and potential `U`.
//!
//! The exact test asks whether `U` divides `V(U)`. The weak test can only
//! gather evidence: it samples `|V(U)/U|` on shrinking shells around a point
//! of the zero locus and flags apparent growth. It never proves boundedness.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;
use thiserror::Error;

use crate::symcore::{FastPoly, PolyVectorField, Polynomial, SymError};

/// Values of `|U|` below this are treated as lying on the zero locus.
pub const U_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LogError {
    #[error(transparent)]
    Sym(#[from] SymError),
    #[error("the potential is the zero polynomial")]
    ZeroPotential,
    #[error("base point is not on the zero locus: U(base) = {0:e}")]
    BaseOffZeroLocus(f64),
    #[error("every sample on shell {shell} hit the zero locus")]
    DegenerateRegion { shell: usize },
    #[error("the curve lies in the zero locus of U")]
    CurveInZeroLocus,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", content = "p")]
pub enum LogStatus {
    Logarithmic(Polynomial),
    NotPolynomialQuotient,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LogVerdict {
    pub status: LogStatus,
    pub vu: Polynomial,
}

impl LogVerdict {
    pub fn is_logarithmic(&self) -> bool {
        matches!(self.status, LogStatus::Logarithmic(_))
    }

    pub fn multiplier(&self) -> Option<&Polynomial> {
        match &self.status {
            LogStatus::Logarithmic(p) => Some(p),
            LogStatus::NotPolynomialQuotient => None,
        }
    }
}

impl fmt::Display for LogVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "V(U) = {}", self.vu)?;
        match &self.status {
            LogStatus::Logarithmic(p) => writeln!(f, "status: logarithmic, P = {p}"),
            LogStatus::NotPolynomialQuotient => writeln!(f, "status: not logarithmic (V(U)/U is not a polynomial)"),
        }
    }
}

/// Exact test: `Logarithmic(P)` iff `V(U) = P·U` for a polynomial `P`.
pub fn check_logarithmic(v: &PolyVectorField, u: &Polynomial) -> Result<LogVerdict, LogError> {
    if u.is_zero() {
        return Err(LogError::ZeroPotential);
    }
    let vu = v.apply(u)?;
    let status = match vu.exact_divide(u)? {
        Some(p) => LogStatus::Logarithmic(p),
        None => LogStatus::NotPolynomialQuotient,
    };
    Ok(LogVerdict { status, vu })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SamplerConfig {
    pub r0: f64,
    pub num_scales: usize,
    pub samples: usize,
    pub seed: u64,
    /// Per-step factor the shell sup must exceed over each of the last 3 steps.
    pub growth_factor: f64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            r0: 1.0,
            num_scales: 12,
            samples: 4096,
            seed: 0,
            growth_factor: 1.5,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeakLogReport {
    pub base_point: Vec<f64>,
    pub scales: Vec<f64>,
    pub per_scale_sup: Vec<f64>,
    pub per_scale_inf: Vec<f64>,
    pub global_sup_estimate: f64,
    pub growth_flag: bool,
    pub samples_per_scale: usize,
    /// Draws rejected for landing within `U_FLOOR` of the zero locus.
    pub discarded: usize,
}

impl WeakLogReport {
    pub fn r_min(&self) -> f64 {
        *self.scales.last().expect("at least two scales")
    }
}

impl fmt::Display for WeakLogReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:>12} {:>12} {:>14} {:>14}", "r_outer", "r_inner", "sup|P|", "inf|P|")?;
        for k in 0..self.per_scale_sup.len() {
            writeln!(
                f,
                "{:>12.4e} {:>12.4e} {:>14.6} {:>14.6}",
                self.scales[k],
                self.scales[k + 1],
                self.per_scale_sup[k],
                self.per_scale_inf[k]
            )?;
        }
        writeln!(f, "samples per shell: {}, discarded: {}", self.samples_per_scale, self.discarded)?;
        writeln!(f, "global sup estimate: {:.6}", self.global_sup_estimate)?;
        if self.growth_flag {
            writeln!(f, "growth detected: |P| grows as the shells shrink (not weakly logarithmic here)")
        } else {
            writeln!(f, "no growth detected up to scale r_min = {:.4e}", self.r_min())
        }
    }
}

/// Samples `|V(U)/U|` on the shells `r_{k+1} ≤ |x − base| ≤ r_k`, `r_k = r0·2^-k`.
///
/// Points are uniform in shell volume; draws with `|U| < U_FLOOR` are
/// rejected and redrawn. Shell `k` uses its own stream seeded by
/// `seed ^ k`, so the report does not depend on evaluation order.
pub fn weaklog_sample(
    v: &PolyVectorField,
    u: &Polynomial,
    base_point: &[f64],
    cfg: &SamplerConfig,
) -> Result<WeakLogReport, LogError> {
    if u.is_zero() {
        return Err(LogError::ZeroPotential);
    }
    if !(cfg.r0 > 0.0) || cfg.num_scales == 0 || cfg.samples == 0 {
        return Err(LogError::InvalidParameter("need r0 > 0, num_scales ≥ 1, samples ≥ 1".into()));
    }
    let u_base = u.eval_f64(base_point)?;
    if u_base.abs() > 1e-12 {
        return Err(LogError::BaseOffZeroLocus(u_base));
    }
    let vu = v.apply(u)?;
    let (uf, vuf) = (u.to_fast(), vu.to_fast());
    let scales: Vec<f64> = (0..=cfg.num_scales).map(|k| cfg.r0 * 0.5f64.powi(k as i32)).collect();

    let shell = |k: usize| sample_shell(&uf, &vuf, base_point, scales[k + 1], scales[k], cfg.samples, cfg.seed ^ k as u64, k);
    #[cfg(feature = "parallel")]
    let shells: Vec<_> = {
        use rayon::prelude::*;
        (0..cfg.num_scales).into_par_iter().map(shell).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let shells: Vec<_> = (0..cfg.num_scales).map(shell).collect();

    let mut per_scale_sup = Vec::with_capacity(cfg.num_scales);
    let mut per_scale_inf = Vec::with_capacity(cfg.num_scales);
    let mut discarded = 0;
    for s in shells {
        let s = s?;
        per_scale_sup.push(s.sup);
        per_scale_inf.push(s.inf);
        discarded += s.discarded;
    }
    let global_sup_estimate = per_scale_sup.iter().cloned().fold(0.0, f64::max);
    let growth_flag = growth(&per_scale_sup, cfg.growth_factor);
    Ok(WeakLogReport {
        base_point: base_point.to_vec(),
        scales,
        per_scale_sup,
        per_scale_inf,
        global_sup_estimate,
        growth_flag,
        samples_per_scale: cfg.samples,
        discarded,
    })
}

/// True when each of the last three steps multiplies the sup by `factor` or more.
pub fn growth(sups: &[f64], factor: f64) -> bool {
    if sups.len() < 4 {
        return false;
    }
    sups[sups.len() - 4..].windows(2).all(|w| w[0] > 0.0 && w[1] >= factor * w[0])
}

struct ShellStats {
    sup: f64,
    inf: f64,
    discarded: usize,
}

#[allow(clippy::too_many_arguments)]
fn sample_shell(
    u: &FastPoly,
    vu: &FastPoly,
    base: &[f64],
    r_in: f64,
    r_out: f64,
    samples: usize,
    seed: u64,
    shell: usize,
) -> Result<ShellStats, LogError> {
    let n = base.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = (r_in.powi(n as i32), r_out.powi(n as i32));
    let max_draws = samples.saturating_mul(64);
    let mut stats = ShellStats {
        sup: 0.0,
        inf: f64::INFINITY,
        discarded: 0,
    };
    let mut accepted = 0;
    let mut point = vec![0.0; n];
    let mut draws = 0;
    while accepted < samples && draws < max_draws {
        draws += 1;
        let mut norm = 0.0;
        for p in point.iter_mut() {
            let g: f64 = rng.sample(StandardNormal);
            *p = g;
            norm += g * g;
        }
        let norm = norm.sqrt();
        if norm == 0.0 {
            continue;
        }
        let radius = (lo + rng.gen::<f64>() * (hi - lo)).powf(1.0 / n as f64);
        for (p, b) in point.iter_mut().zip(base) {
            *p = b + *p / norm * radius;
        }
        let uval = u.eval(&point);
        if !(uval.abs() >= U_FLOOR) {
            stats.discarded += 1;
            continue;
        }
        let p = (vu.eval(&point) / uval).abs();
        stats.sup = stats.sup.max(p);
        stats.inf = stats.inf.min(p);
        accepted += 1;
    }
    if accepted == 0 {
        return Err(LogError::DegenerateRegion { shell });
    }
    Ok(stats)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CurveWitness {
    pub curve: Vec<Polynomial>,
    /// `(s, |P(γ(s))|)`, skipping parameters where `U(γ(s))` vanishes.
    pub p_values: Vec<(f64, f64)>,
    pub divergent: bool,
}

impl fmt::Display for CurveWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = self.curve.iter().map(|c| c.to_string()).collect();
        writeln!(f, "curve: ({})", names.join(", "))?;
        writeln!(f, "{:>12} {:>16}", "s", "|P(curve(s))|")?;
        for (s, p) in &self.p_values {
            writeln!(f, "{s:>12.4e} {p:>16.6e}")?;
        }
        writeln!(f, "divergent: {}", self.divergent)
    }
}

/// Geometric grid `s = 10^{-k/2}`, `k = 2..=12`.
pub fn default_s_grid() -> Vec<f64> {
    (2..=12).map(|k| 10f64.powf(-(k as f64) / 2.0)).collect()
}

/// Evaluates `|V(U)/U|` along a polynomial curve `γ(s)`.
///
/// `U∘γ` and `V(U)∘γ` are composed exactly before evaluation, so the ratio
/// does not suffer cancellation as `s → 0`. Divergent iff the last five
/// values strictly increase and the last is at least `threshold` times the
/// first of those five.
pub fn divergence_witness(
    v: &PolyVectorField,
    u: &Polynomial,
    curve: &[Polynomial],
    s_grid: &[f64],
    threshold: f64,
) -> Result<CurveWitness, LogError> {
    if u.is_zero() {
        return Err(LogError::ZeroPotential);
    }
    let vu = v.apply(u)?;
    let u_s = u.substitute_all(curve)?;
    if u_s.is_zero() {
        return Err(LogError::CurveInZeroLocus);
    }
    if u_s.num_vars() != 1 {
        return Err(LogError::InvalidParameter("the curve must depend on a single parameter".into()));
    }
    let vu_s = vu.substitute_all(curve)?;
    let (uf, vuf) = (u_s.to_fast(), vu_s.to_fast());
    let mut p_values = Vec::with_capacity(s_grid.len());
    for &s in s_grid {
        let den = uf.eval(&[s]);
        if !(den.abs() >= U_FLOOR) {
            continue;
        }
        p_values.push((s, (vuf.eval(&[s]) / den).abs()));
    }
    let divergent = p_values.len() >= 5 && {
        let tail: Vec<f64> = p_values[p_values.len() - 5..].iter().map(|&(_, p)| p).collect();
        tail.windows(2).all(|w| w[1] > w[0]) && tail[4] >= threshold * tail[0]
    };
    Ok(CurveWitness {
        curve: curve.to_vec(),
        p_values,
        divergent,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symcore::{int, parse, parse_list, VarSet};

    #[test]
    fn exact_verdicts() {
        let v = VarSet::parse("x,y,z").unwrap();
        let u = parse("x^4+y^4-z^6", &v).unwrap();
        let e = PolyVectorField::parse("3*x,3*y,2*z", &v).unwrap();
        let verdict = check_logarithmic(&e, &u).unwrap();
        assert_eq!(verdict.multiplier(), Some(&Polynomial::constant(&v, int(12))));

        let u = parse("x^2+y^2", &v).unwrap();
        let f = PolyVectorField::parse("x,2*y,1", &v).unwrap();
        let verdict = check_logarithmic(&f, &u).unwrap();
        assert_eq!(verdict.status, LogStatus::NotPolynomialQuotient);
        assert_eq!(verdict.vu, parse("2*x^2+4*y^2", &v).unwrap());

        let v2 = VarSet::parse("x,y").unwrap();
        let verdict = check_logarithmic(&PolyVectorField::parse("x,y", &v2).unwrap(), &parse("x^2*y^2", &v2).unwrap()).unwrap();
        assert_eq!(verdict.multiplier(), Some(&Polynomial::constant(&v2, int(4))));

        assert_eq!(check_logarithmic(&f, &Polynomial::zero(&v)), Err(LogError::ZeroPotential));
    }

    #[test]
    fn growth_rule() {
        assert!(growth(&[1.0, 2.0, 4.0, 8.0], 1.5));
        assert!(!growth(&[1.0, 2.0, 4.0, 5.0], 1.5));
        assert!(!growth(&[4.0, 4.0, 4.0, 4.0], 1.5));
        assert!(!growth(&[1.0, 2.0, 4.0], 1.5));
    }

    #[test]
    fn rejects_base_off_locus() {
        let v = VarSet::parse("x,y").unwrap();
        let u = parse("x^2+y^2", &v).unwrap();
        let f = PolyVectorField::parse("x,y", &v).unwrap();
        assert!(matches!(
            weaklog_sample(&f, &u, &[1.0, 0.0], &SamplerConfig::default()),
            Err(LogError::BaseOffZeroLocus(_))
        ));
    }

    #[test]
    fn witness_errors_on_locus_curve() {
        let v = VarSet::parse("x,y").unwrap();
        let s = VarSet::parse("s").unwrap();
        let u = parse("x^2*(x^2+y^2)", &v).unwrap();
        let f = PolyVectorField::parse("0,1", &v).unwrap();
        let curve = parse_list("0,s", &s).unwrap();
        assert_eq!(
            divergence_witness(&f, &u, &curve, &default_s_grid(), 2.0),
            Err(LogError::CurveInZeroLocus)
        );
    }
}
