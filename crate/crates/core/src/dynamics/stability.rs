use std::f64::consts::PI;
use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use super::{par_map, DynError, KineticMetric, MechanicalSystem, Method, Stepper};

const BARRIER_STEP: f64 = 1e-4;
const BARRIER_RANGE: f64 = 10.0;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StabilityConfig {
    pub energies: Vec<f64>,
    pub t_long: f64,
    pub dt: f64,
    /// Number of shell directions (2 in one dimension regardless).
    pub bundle: usize,
    pub method: Option<Method>,
    /// Seeds the extra directions used in three or more dimensions.
    pub seed: u64,
}

impl Default for StabilityConfig {
    fn default() -> Self {
        StabilityConfig {
            energies: vec![1e-6],
            t_long: 1e3,
            dt: 1e-3,
            bundle: 8,
            method: None,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BundleMember {
    pub v0: Vec<f64>,
    /// `max ‖x(t) − p‖` over `[0, T]`.
    pub max_excursion: f64,
    /// Same over `[0, T/2]`.
    pub max_excursion_half: f64,
    pub coord_min: Vec<f64>,
    pub coord_max: Vec<f64>,
    /// Conserved per-coordinate energies (separable potential, identity metric).
    pub coord_energy: Option<Vec<f64>>,
    /// Largest numerical deviation of each coordinate energy along the run.
    pub coord_energy_error: Option<Vec<f64>>,
    /// First point on each side of `p_i` where the coordinate potential reaches
    /// its energy plus the measured deviation, i.e. the numerically reachable interval.
    pub barriers: Option<Vec<(f64, f64)>>,
    pub trapped: Option<bool>,
    pub drift: f64,
    pub truncated: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnergyProbe {
    pub energy: f64,
    pub members: Vec<BundleMember>,
    pub max_excursion: f64,
    /// `max_excursion(T) / max_excursion(T/2)`: ≈ 1 when trapped, ≈ 2 for linear escape.
    pub excursion_growth: f64,
    pub trapped: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StabilityReport {
    pub potential: String,
    pub metric: String,
    pub p: Vec<f64>,
    pub method: Method,
    pub config: StabilityConfig,
    pub probes: Vec<EnergyProbe>,
}

impl fmt::Display for StabilityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "U = {}   metric = {}   p = {:?}", self.potential, self.metric, self.p)?;
        writeln!(f, "T = {}   dt = {}   method = {}", self.config.t_long, self.config.dt, self.method.name())?;
        writeln!(f, "{:>10} {:>8} {:>14} {:>10} {:>8}", "energy", "members", "max excursion", "growth", "trapped")?;
        for pr in &self.probes {
            writeln!(
                f,
                "{:>10.3e} {:>8} {:>14.6} {:>10.4} {:>8}",
                pr.energy,
                pr.members.len(),
                pr.max_excursion,
                pr.excursion_growth,
                match pr.trapped {
                    Some(true) => "yes",
                    Some(false) => "no",
                    None => "n/a",
                }
            )?;
            for m in &pr.members {
                if let Some(b) = &m.barriers {
                    let parts: Vec<String> = (0..b.len())
                        .map(|i| format!("x{}: [{:.5}, {:.5}] within [{:.5}, {:.5}]", i + 1, m.coord_min[i], m.coord_max[i], b[i].0, b[i].1))
                        .collect();
                    writeln!(f, "    v0 = {:?}: {}", m.v0, parts.join("; "))?;
                }
            }
        }
        writeln!(f, "finite-horizon evidence only; not a proof of stability")
    }
}

/// First `t` beyond `start` in direction `dir` with `u(t) ≥ level`, located to
/// bisection precision; `None` if nothing within `BARRIER_RANGE`.
fn barrier(u: impl Fn(f64) -> f64, start: f64, dir: f64, level: f64) -> Option<f64> {
    let steps = (BARRIER_RANGE / BARRIER_STEP) as usize;
    let mut prev = start;
    for k in 1..=steps {
        let t = start + dir * k as f64 * BARRIER_STEP;
        if u(t) >= level {
            let (mut lo, mut hi) = (prev, t);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if u(mid) >= level {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            return Some(hi);
        }
        prev = t;
    }
    None
}

fn directions(n: usize, bundle: usize, seed: u64) -> Vec<Vec<f64>> {
    match n {
        1 => vec![vec![1.0], vec![-1.0]],
        2 => (0..bundle.max(1))
            .map(|k| {
                let th = 2.0 * PI * k as f64 / bundle.max(1) as f64;
                vec![th.cos(), th.sin()]
            })
            .collect(),
        _ => {
            let mut out = Vec::new();
            for i in 0..n {
                for s in [1.0, -1.0] {
                    let mut d = vec![0.0; n];
                    d[i] = s;
                    out.push(d);
                }
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            while out.len() < bundle {
                let d: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
                let r = d.iter().map(|z| z * z).sum::<f64>().sqrt();
                if r > 1e-12 {
                    out.push(d.iter().map(|z| z / r).collect());
                }
            }
            out
        }
    }
}

fn run_member(
    sys: &MechanicalSystem,
    p: &[f64],
    v0: Vec<f64>,
    cfg: &StabilityConfig,
    method: Method,
) -> Result<BundleMember, DynError> {
    let n = p.len();
    let steps = (cfg.t_long / cfg.dt).round() as usize;
    let mut st = Stepper::new(sys, p, &v0, cfg.dt, 1.0, method)?;
    let h0 = sys.energy(p, &v0, 1.0)?;
    let (mut lo, mut hi) = (p.to_vec(), p.to_vec());
    let (mut exc, mut exc_half, mut dh) = (0.0f64, 0.0f64, 0.0f64);
    let mut truncated = None;
    let spec = sys.potential_spec();
    let separable = spec.is_separable() && matches!(sys.metric(), KineticMetric::Identity);
    let coord_energy = |i: usize, x: f64, v: f64| 0.5 * v * v + spec.coordinate_value(i, x).expect("separable");
    let ce0: Vec<f64> = if separable { (0..n).map(|i| coord_energy(i, p[i], v0[i])).collect() } else { Vec::new() };
    let mut ce_err = vec![0.0f64; ce0.len()];
    for k in 1..=steps {
        st.step()?;
        if !st.is_finite() {
            truncated = Some(format!("non-finite state at t = {}", k as f64 * cfg.dt));
            break;
        }
        let x = st.x();
        let mut r2 = 0.0;
        for i in 0..n {
            lo[i] = lo[i].min(x[i]);
            hi[i] = hi[i].max(x[i]);
            r2 += (x[i] - p[i]) * (x[i] - p[i]);
        }
        exc = exc.max(r2.sqrt());
        for (i, e) in ce_err.iter_mut().enumerate() {
            *e = e.max((coord_energy(i, x[i], st.v()[i]) - ce0[i]).abs());
        }
        if 2 * k <= steps {
            exc_half = exc;
        }
        // Energy is sampled sparsely; the probes are long.
        if k % 64 == 0 || k == steps {
            dh = dh.max((sys.energy(x, st.v(), 1.0)? - h0).abs());
        }
    }

    let (barriers, trapped) = if separable {
        let bs: Option<Vec<(f64, f64)>> = (0..n)
            .map(|i| {
                let u = |t: f64| spec.coordinate_value(i, t).expect("separable");
                let level = ce0[i] + ce_err[i];
                Some((barrier(u, p[i], -1.0, level)?, barrier(u, p[i], 1.0, level)?))
            })
            .collect();
        let trapped = bs
            .as_ref()
            .map(|b| truncated.is_none() && (0..n).all(|i| lo[i] >= b[i].0 && hi[i] <= b[i].1));
        (bs, trapped)
    } else {
        (None, None)
    };
    Ok(BundleMember {
        v0,
        max_excursion: exc,
        max_excursion_half: exc_half,
        coord_min: lo,
        coord_max: hi,
        coord_energy: separable.then(|| ce0.clone()),
        coord_energy_error: separable.then_some(ce_err),
        barriers,
        trapped,
        drift: dh / h0.abs().max(1.0),
        truncated,
    })
}

/// Integrates a bundle of shell initial conditions `(p, v)`, `H = E`, for each
/// energy and reports the excursions. A finite-horizon contrast, not a proof.
pub fn stability_probe(sys: &MechanicalSystem, p: &[f64], cfg: &StabilityConfig) -> Result<StabilityReport, DynError> {
    let n = sys.num_vars();
    if p.len() != n {
        return Err(DynError::DimensionMismatch { expected: n, got: p.len() });
    }
    if !(cfg.t_long > 0.0) || !(cfg.dt > 0.0) || cfg.energies.is_empty() {
        return Err(DynError::InvalidParameter("need t_long > 0, dt > 0 and at least one energy".into()));
    }
    let method = cfg.method.unwrap_or_else(|| Method::auto(sys));
    let u_p = sys.potential(p);
    let dirs = directions(n, cfg.bundle, cfg.seed);

    let mut jobs = Vec::new();
    for (e_idx, &e) in cfg.energies.iter().enumerate() {
        let kinetic = e - u_p;
        if !(kinetic > 0.0) {
            return Err(DynError::InvalidParameter(format!("energy {e} is not above U(p) = {u_p}")));
        }
        for d in &dirs {
            // Scale so that ½ g_p(v, v) = E − U(p).
            let norm = sys.norm(p, d)?;
            let v0: Vec<f64> = d.iter().map(|z| z * (2.0 * kinetic).sqrt() / norm).collect();
            jobs.push((e_idx, v0));
        }
    }
    let results = par_map(&jobs, |(_, v0)| run_member(sys, p, v0.clone(), cfg, method));

    let mut probes: Vec<EnergyProbe> = cfg
        .energies
        .iter()
        .map(|&energy| EnergyProbe {
            energy,
            members: Vec::new(),
            max_excursion: 0.0,
            excursion_growth: 0.0,
            trapped: None,
        })
        .collect();
    for ((e_idx, _), r) in jobs.iter().zip(results) {
        probes[*e_idx].members.push(r?);
    }
    for pr in &mut probes {
        pr.max_excursion = pr.members.iter().map(|m| m.max_excursion).fold(0.0, f64::max);
        let half = pr.members.iter().map(|m| m.max_excursion_half).fold(0.0, f64::max);
        pr.excursion_growth = if half > 0.0 { pr.max_excursion / half } else { 1.0 };
        pr.trapped = pr.members.iter().map(|m| m.trapped).collect::<Option<Vec<bool>>>().map(|t| t.iter().all(|&b| b));
    }
    Ok(StabilityReport {
        potential: sys.potential_spec().to_string(),
        metric: sys.metric().label(),
        p: p.to_vec(),
        method,
        config: cfg.clone(),
        probes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::wintner;

    #[test]
    fn wintner_first_barrier() {
        let b = barrier(wintner, 0.0, 1.0, 1e-6).unwrap();
        assert!(b > 0.6 && b < 0.66, "{b}");
        assert!(wintner(b) >= 1e-6 && wintner(b - 1e-9) < 1e-6);
        assert_eq!(barrier(wintner, 0.0, -1.0, 1e-6).map(|x| -x), Some(b));
    }

    #[test]
    fn shell_directions() {
        assert_eq!(directions(1, 8, 0).len(), 2);
        assert_eq!(directions(2, 8, 0).len(), 8);
        let d = directions(3, 10, 4);
        assert_eq!(d.len(), 10);
        assert!(d.iter().all(|v| (v.iter().map(|z| z * z).sum::<f64>() - 1.0).abs() < 1e-12));
    }
}
