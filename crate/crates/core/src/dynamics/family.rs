use std::fmt;

use serde::Serialize;

use super::{par_map, DynError, MechanicalSystem, Method, Stepper, Trajectory};
use crate::symcore::{FastPoly, PolyVectorField};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FamilyConfig {
    pub eps: Vec<f64>,
    /// Horizon in rescaled time τ.
    pub t_rescaled: f64,
    /// Recording grid spacing; the integration step is `dt_base / round(1/ε)`.
    pub dt_base: f64,
    pub escape_radius: f64,
    /// `None` picks [`Method::auto`].
    pub method: Option<Method>,
    pub speed_tol: f64,
    pub potential_tol: f64,
    pub energy_tol: f64,
    pub halving_check: bool,
    pub halving_tol: f64,
}

impl Default for FamilyConfig {
    fn default() -> Self {
        FamilyConfig {
            eps: (0..=8).map(|n| 0.5f64.powi(n)).collect(),
            t_rescaled: 2.0,
            dt_base: 1e-3,
            escape_radius: 0.5,
            method: None,
            speed_tol: 1e-6,
            potential_tol: 1e-9,
            energy_tol: 1e-5,
            halving_check: true,
            halving_tol: 1e-3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EpsMember {
    pub eps: f64,
    pub dt: f64,
    pub steps: usize,
    pub max_speed: f64,
    pub speed_bound: f64,
    pub max_u: f64,
    /// `ε²‖V(p)‖²/2`.
    pub u_bound: f64,
    pub lemma1_speed_ok: bool,
    pub lemma1_potential_ok: bool,
    /// Allowances added to the configured tolerances for the measured energy drift.
    pub speed_allowance: f64,
    pub potential_allowance: f64,
    /// First τ with `dist_g(x, p) > escape_radius`, linearly interpolated.
    pub escape_time: Option<f64>,
    /// Measured `ẏ(0)` from the first four full-resolution holonomy values.
    pub holonomy_slope: f64,
    /// `(τ, y(τ))` every 0.1 in τ.
    pub holonomy_samples: Vec<(f64, f64)>,
    pub max_ydot: f64,
    /// `max ‖V‖_g · max ‖ẋ‖_g` along the path.
    pub lipschitz_bound: f64,
    pub lipschitz_ok: bool,
    pub drift: f64,
    pub conservative: bool,
    pub halving_error: Option<f64>,
    pub halving_ok: bool,
    pub truncated: Option<String>,
    /// The member on the common τ grid (spacing `dt_base`).
    #[serde(skip)]
    pub trajectory: Trajectory,
    /// `y(τ)` on the common grid.
    #[serde(skip)]
    pub holonomy: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EpsilonFamilyReport {
    pub potential: String,
    pub metric: String,
    pub p: Vec<f64>,
    pub v_p: Vec<f64>,
    pub v_norm: f64,
    pub config: FamilyConfig,
    pub members: Vec<EpsMember>,
    /// Sup distance between consecutive members on the common grid.
    pub pairwise_sup_distance: Vec<f64>,
}

impl EpsilonFamilyReport {
    pub fn all_escape(&self) -> bool {
        self.members.iter().all(|m| m.escape_time.is_some())
    }

    pub fn lemma1_ok(&self) -> bool {
        self.members.iter().all(|m| m.lemma1_speed_ok && m.lemma1_potential_ok)
    }
}

impl fmt::Display for EpsilonFamilyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "U = {}   metric = {}", self.potential, self.metric)?;
        writeln!(f, "p = {:?}   V(p) = {:?}   |V(p)|_g = {:.6}", self.p, self.v_p, self.v_norm)?;
        writeln!(
            f,
            "{:>10} {:>10} {:>11} {:>11} {:>11} {:>5} {:>9} {:>11} {:>11} {:>9} {:>9}",
            "eps", "dt", "max|x'|", "max U", "U bound", "L1", "escape", "y'(0)", "|V(p)|^2", "drift", "halving"
        )?;
        for m in &self.members {
            writeln!(
                f,
                "{:>10.4e} {:>10.3e} {:>11.8} {:>11.3e} {:>11.3e} {:>5} {:>9} {:>11.8} {:>11.8} {:>9.2e} {:>9}",
                m.eps,
                m.dt,
                m.max_speed,
                m.max_u,
                m.u_bound,
                if m.lemma1_speed_ok && m.lemma1_potential_ok { "ok" } else { "FAIL" },
                m.escape_time.map_or("none".to_string(), |t| format!("{t:.5}")),
                m.holonomy_slope,
                self.v_norm * self.v_norm,
                m.drift,
                m.halving_error.map_or("-".to_string(), |e| format!("{e:.1e}")),
            )?;
        }
        let d: Vec<String> = self.pairwise_sup_distance.iter().map(|x| format!("{x:.3e}")).collect();
        writeln!(f, "consecutive sup distances: [{}]", d.join(", "))?;
        writeln!(f, "escape for every eps: {}", if self.all_escape() { "yes" } else { "no" })
    }
}

struct Run {
    traj: Trajectory,
    holonomy: Vec<f64>,
    first_y: Vec<f64>,
    dt: f64,
    steps: usize,
    max_speed: f64,
    max_u: f64,
    max_ydot: f64,
    max_vnorm: f64,
    max_dh: f64,
    drift: f64,
    escape_time: Option<f64>,
}

fn quad_form(g: &nalgebra::DMatrix<f64>, d: &[f64]) -> f64 {
    let n = d.len();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            s += d[i] * g[(i, j)] * d[j];
        }
    }
    s
}

#[allow(clippy::too_many_arguments)]
fn run_member(
    sys: &MechanicalSystem,
    p: &[f64],
    vp: &[f64],
    field: &[FastPoly],
    eps: f64,
    cfg: &FamilyConfig,
    method: Method,
    refine: usize,
) -> Result<Run, DynError> {
    let n = sys.num_vars();
    let stride = ((1.0 / eps).round() as usize).max(1) * refine;
    let dt = cfg.dt_base / stride as f64;
    let grid_steps = (cfg.t_rescaled / cfg.dt_base).round() as usize;
    let steps = grid_steps * stride;
    let scale = 1.0 / (eps * eps);
    let gp = sys.metric_at(p)?;
    let mut st = Stepper::new(sys, p, vp, dt, scale, method)?;

    let mut traj = Trajectory {
        num_vars: n,
        method,
        dt,
        record_stride: stride,
        potential_scale: scale,
        times: Vec::with_capacity(grid_steps + 1),
        positions: Vec::with_capacity((grid_steps + 1) * n),
        velocities: Vec::with_capacity((grid_steps + 1) * n),
        energies: Vec::with_capacity(grid_steps + 1),
        potentials: Vec::with_capacity(grid_steps + 1),
        drift: 0.0,
        conservative: true,
        truncated: None,
    };
    let mut vx = vec![0.0; n];
    let mut diff = vec![0.0; n];
    let h0 = sys.energy(p, vp, scale)?;
    let mut run = Run {
        traj: Trajectory { ..traj.clone() },
        holonomy: Vec::with_capacity(grid_steps + 1),
        first_y: Vec::with_capacity(4),
        dt,
        steps,
        max_speed: 0.0,
        max_u: f64::NEG_INFINITY,
        max_ydot: 0.0,
        max_vnorm: 0.0,
        max_dh: 0.0,
        drift: 0.0,
        escape_time: None,
    };
    let (mut y, mut f_prev, mut dist_prev) = (0.0, 0.0, 0.0);
    for k in 0..=steps {
        if k > 0 {
            st.step()?;
            if !st.is_finite() {
                traj.truncated = Some(format!("non-finite state at tau = {}", k as f64 * dt));
                break;
            }
        }
        let (x, v) = (st.x(), st.v());
        for (o, fp) in vx.iter_mut().zip(field) {
            *o = fp.eval(x);
        }
        let speed = sys.norm(x, v)?;
        let u = sys.potential(x);
        let h = 0.5 * speed * speed + scale * u;
        let f_now = sys.inner(x, &vx, v)?;
        run.max_speed = run.max_speed.max(speed);
        run.max_u = run.max_u.max(u);
        run.max_ydot = run.max_ydot.max(f_now.abs());
        run.max_vnorm = run.max_vnorm.max(sys.norm(x, &vx)?);
        run.max_dh = run.max_dh.max((h - h0).abs());
        if k > 0 {
            y += 0.5 * dt * (f_prev + f_now);
        }
        f_prev = f_now;
        if run.first_y.len() < 4 {
            run.first_y.push(y);
        }
        for i in 0..n {
            diff[i] = x[i] - p[i];
        }
        let dist = quad_form(&gp, &diff).max(0.0).sqrt();
        if run.escape_time.is_none() && dist > cfg.escape_radius {
            let frac = if k == 0 { 0.0 } else { (cfg.escape_radius - dist_prev) / (dist - dist_prev) };
            run.escape_time = Some((k as f64 - 1.0 + frac).max(0.0) * dt);
        }
        dist_prev = dist;
        if k % stride == 0 {
            traj.times.push((k / stride) as f64 * cfg.dt_base);
            traj.positions.extend_from_slice(x);
            traj.velocities.extend_from_slice(v);
            traj.energies.push(h);
            traj.potentials.push(u);
            run.holonomy.push(y);
        }
    }
    run.drift = run.max_dh / h0.abs().max(1.0);
    traj.drift = run.drift;
    traj.conservative = traj.truncated.is_none() && run.drift <= cfg.energy_tol;
    run.traj = traj;
    Ok(run)
}

fn sup_distance(a: &Trajectory, b: &Trajectory) -> f64 {
    let m = a.len().min(b.len());
    (0..m)
        .map(|k| {
            a.position(k)
                .iter()
                .zip(b.position(k))
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt()
        })
        .fold(0.0, f64::max)
}

/// Integrates `ẍ + Γ(ẋ, ẋ) + ε⁻² g⁻¹∇U = 0`, `x(0) = p`, `ẋ(0) = V(p)`, for every ε.
pub fn epsilon_family(
    sys: &MechanicalSystem,
    p: &[f64],
    v: &PolyVectorField,
    cfg: &FamilyConfig,
) -> Result<EpsilonFamilyReport, DynError> {
    let n = sys.num_vars();
    if p.len() != n || v.num_vars() != n {
        return Err(DynError::DimensionMismatch {
            expected: n,
            got: if p.len() != n { p.len() } else { v.num_vars() },
        });
    }
    if cfg.eps.is_empty() || cfg.eps.iter().any(|&e| !(e > 0.0)) {
        return Err(DynError::InvalidParameter("eps values must be positive".into()));
    }
    if !(cfg.t_rescaled > 0.0) || !(cfg.dt_base > 0.0) || !(cfg.escape_radius > 0.0) {
        return Err(DynError::InvalidParameter("need t_rescaled, dt_base, escape_radius > 0".into()));
    }
    let u_p = sys.potential(p);
    if u_p.abs() > 1e-12 {
        return Err(DynError::NotOnZeroLocus(u_p));
    }
    let vp = v.eval_f64(p)?;
    let v_norm = sys.norm(p, &vp)?;
    if v_norm == 0.0 {
        return Err(DynError::ZeroField);
    }
    let method = cfg.method.unwrap_or_else(|| Method::auto(sys));
    let field = v.to_fast();

    let members = par_map(&cfg.eps, |&eps| -> Result<EpsMember, DynError> {
        let run = run_member(sys, p, &vp, &field, eps, cfg, method, 1)?;
        let halving_error = if cfg.halving_check {
            let fine = run_member(sys, p, &vp, &field, eps, cfg, method, 2)?;
            Some(sup_distance(&run.traj, &fine.traj))
        } else {
            None
        };
        let speed_allowance = (v_norm * v_norm + 2.0 * run.max_dh).sqrt() - v_norm;
        let potential_allowance = eps * eps * run.max_dh;
        let u_bound = eps * eps * v_norm * v_norm / 2.0;
        let y = &run.first_y;
        let holonomy_slope = if y.len() == 4 {
            (-11.0 * y[0] + 18.0 * y[1] - 9.0 * y[2] + 2.0 * y[3]) / (6.0 * run.dt)
        } else {
            f64::NAN
        };
        let every = ((0.1 / cfg.dt_base).round() as usize).max(1);
        let holonomy_samples = run
            .holonomy
            .iter()
            .enumerate()
            .step_by(every)
            .map(|(k, &y)| (run.traj.times[k], y))
            .collect();
        let lipschitz_bound = run.max_vnorm * run.max_speed;
        Ok(EpsMember {
            eps,
            dt: run.dt,
            steps: run.steps,
            max_speed: run.max_speed,
            speed_bound: v_norm,
            max_u: run.max_u,
            u_bound,
            lemma1_speed_ok: run.max_speed <= v_norm + cfg.speed_tol + speed_allowance,
            lemma1_potential_ok: run.max_u <= u_bound + cfg.potential_tol + potential_allowance,
            speed_allowance,
            potential_allowance,
            escape_time: run.escape_time,
            holonomy_slope,
            holonomy_samples,
            max_ydot: run.max_ydot,
            lipschitz_bound,
            lipschitz_ok: run.max_ydot <= lipschitz_bound * (1.0 + 1e-12) + 1e-12,
            drift: run.drift,
            conservative: run.traj.conservative,
            halving_ok: halving_error.is_none_or(|e| e <= cfg.halving_tol),
            halving_error,
            truncated: run.traj.truncated.clone(),
            trajectory: run.traj,
            holonomy: run.holonomy,
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>, _>>()?;

    let pairwise_sup_distance = members
        .windows(2)
        .map(|w| sup_distance(&w[0].trajectory, &w[1].trajectory))
        .collect();
    Ok(EpsilonFamilyReport {
        potential: sys.potential_spec().to_string(),
        metric: sys.metric().label(),
        p: p.to_vec(),
        v_p: vp,
        v_norm,
        config: cfg.clone(),
        members,
        pairwise_sup_distance,
    })
}

/// `y(τ) = ∫₀^τ ⟨V(x), ẋ⟩_g` by the trapezoid rule over the recorded samples.
pub fn holonomy(traj: &Trajectory, v: &PolyVectorField, sys: &MechanicalSystem) -> Result<Vec<f64>, DynError> {
    if v.num_vars() != traj.num_vars || sys.num_vars() != traj.num_vars {
        return Err(DynError::DimensionMismatch {
            expected: traj.num_vars,
            got: v.num_vars(),
        });
    }
    let field = v.to_fast();
    let mut out = Vec::with_capacity(traj.len());
    let mut y = 0.0;
    let mut prev = 0.0;
    for k in 0..traj.len() {
        let x = traj.position(k);
        let vx: Vec<f64> = field.iter().map(|f| f.eval(x)).collect();
        let now = sys.inner(x, &vx, traj.velocity(k))?;
        if k > 0 {
            y += 0.5 * (traj.times[k] - traj.times[k - 1]) * (prev + now);
        }
        prev = now;
        out.push(y);
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LimitCurveEvidence {
    pub eps: Vec<f64>,
    pub distances: Vec<f64>,
    /// Consecutive distances never grow (5% slack, round-off floor 1e-10).
    pub cauchy_trend: bool,
    pub finest_max_u: f64,
    pub finest_u_bound: f64,
}

impl fmt::Display for LimitCurveEvidence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (w, d) in self.eps.windows(2).zip(&self.distances) {
            writeln!(f, "sup |x_{:.4e} - x_{:.4e}| = {:.4e}", w[0], w[1], d)?;
        }
        writeln!(f, "Cauchy trend: {}", if self.cauchy_trend { "yes" } else { "no" })?;
        writeln!(f, "finest member: max U = {:.3e}, bound eps^2|V(p)|^2/2 = {:.3e}", self.finest_max_u, self.finest_u_bound)
    }
}

/// Convergence evidence for the rescaled family; never constructs the limit.
pub fn limit_curve_evidence(report: &EpsilonFamilyReport) -> Result<LimitCurveEvidence, DynError> {
    if report.members.len() < 3 {
        return Err(DynError::InvalidParameter("limit-curve evidence needs at least 3 eps values".into()));
    }
    let d = report.pairwise_sup_distance.clone();
    // Distances at round-off level count as zero.
    let floor = 1e-10;
    let cauchy_trend = d.windows(2).all(|w| w[1] <= 1.05 * w[0] + floor);
    let finest = report.members.last().expect("nonempty");
    Ok(LimitCurveEvidence {
        eps: report.members.iter().map(|m| m.eps).collect(),
        distances: d,
        cauchy_trend,
        finest_max_u: finest.max_u,
        finest_u_bound: finest.u_bound,
    })
}
