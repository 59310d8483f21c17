use std::fmt::Write as _;
use std::str::FromStr;

use serde::Serialize;

use super::{DynError, MechanicalSystem};
use crate::symcore::PolyVectorField;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Velocity Verlet (Störmer–Verlet); position-independent metrics only.
    Verlet,
    /// Classical fourth-order Runge–Kutta.
    Rk4,
}

impl Method {
    /// Verlet when the metric is constant, RK4 otherwise.
    pub fn auto(sys: &MechanicalSystem) -> Method {
        if sys.has_constant_metric() {
            Method::Verlet
        } else {
            Method::Rk4
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Method::Verlet => "verlet",
            Method::Rk4 => "rk4",
        }
    }
}

impl FromStr for Method {
    type Err = DynError;
    fn from_str(s: &str) -> Result<Self, DynError> {
        match s {
            "verlet" => Ok(Method::Verlet),
            "rk4" => Ok(Method::Rk4),
            other => Err(DynError::InvalidParameter(format!("unknown method `{other}`"))),
        }
    }
}

/// Fixed-step integrator state.
pub struct Stepper<'a> {
    sys: &'a MechanicalSystem,
    method: Method,
    dt: f64,
    scale: f64,
    x: Vec<f64>,
    v: Vec<f64>,
    /// Verlet: acceleration at the current position.
    a: Vec<f64>,
    scratch: Vec<f64>,
    k: [Vec<f64>; 8],
    tmp_x: Vec<f64>,
    tmp_v: Vec<f64>,
}

impl<'a> Stepper<'a> {
    pub fn new(
        sys: &'a MechanicalSystem,
        x0: &[f64],
        v0: &[f64],
        dt: f64,
        scale: f64,
        method: Method,
    ) -> Result<Self, DynError> {
        let n = sys.num_vars();
        for len in [x0.len(), v0.len()] {
            if len != n {
                return Err(DynError::DimensionMismatch { expected: n, got: len });
            }
        }
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(DynError::InvalidParameter("dt must be positive".into()));
        }
        if method == Method::Verlet && !sys.has_constant_metric() {
            return Err(DynError::VerletNeedsConstantMetric);
        }
        let mut s = Stepper {
            sys,
            method,
            dt,
            scale,
            x: x0.to_vec(),
            v: v0.to_vec(),
            a: vec![0.0; n],
            scratch: vec![0.0; n],
            k: std::array::from_fn(|_| vec![0.0; n]),
            tmp_x: vec![0.0; n],
            tmp_v: vec![0.0; n],
        };
        if method == Method::Verlet {
            sys.accel_into(&s.x, &s.v, scale, &mut s.a, &mut s.scratch)?;
        }
        Ok(s)
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn v(&self) -> &[f64] {
        &self.v
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn is_finite(&self) -> bool {
        self.x.iter().chain(&self.v).all(|z| z.is_finite())
    }

    pub fn step(&mut self) -> Result<(), DynError> {
        let (dt, n) = (self.dt, self.x.len());
        match self.method {
            Method::Verlet => {
                for i in 0..n {
                    self.v[i] += 0.5 * dt * self.a[i];
                    self.x[i] += dt * self.v[i];
                }
                self.sys.accel_into(&self.x, &self.v, self.scale, &mut self.a, &mut self.scratch)?;
                for i in 0..n {
                    self.v[i] += 0.5 * dt * self.a[i];
                }
            }
            Method::Rk4 => {
                let [k1x, k1v, k2x, k2v, k3x, k3v, k4x, k4v] = &mut self.k;
                k1x.copy_from_slice(&self.v);
                self.sys.accel_into(&self.x, &self.v, self.scale, k1v, &mut self.scratch)?;
                rk_stage(self.sys, self.scale, &self.x, &self.v, 0.5 * dt, k1x, k1v, &mut self.tmp_x, &mut self.tmp_v, k2x, k2v, &mut self.scratch)?;
                rk_stage(self.sys, self.scale, &self.x, &self.v, 0.5 * dt, k2x, k2v, &mut self.tmp_x, &mut self.tmp_v, k3x, k3v, &mut self.scratch)?;
                rk_stage(self.sys, self.scale, &self.x, &self.v, dt, k3x, k3v, &mut self.tmp_x, &mut self.tmp_v, k4x, k4v, &mut self.scratch)?;
                for i in 0..n {
                    self.x[i] += dt / 6.0 * (k1x[i] + 2.0 * k2x[i] + 2.0 * k3x[i] + k4x[i]);
                    self.v[i] += dt / 6.0 * (k1v[i] + 2.0 * k2v[i] + 2.0 * k3v[i] + k4v[i]);
                }
            }
        }
        Ok(())
    }
}

/// One RK4 stage: evaluates the vector field at `(x, v) + h·(px, pv)`.
#[allow(clippy::too_many_arguments)]
fn rk_stage(
    sys: &MechanicalSystem,
    scale: f64,
    x: &[f64],
    v: &[f64],
    h: f64,
    px: &[f64],
    pv: &[f64],
    tmp_x: &mut [f64],
    tmp_v: &mut [f64],
    kx: &mut [f64],
    kv: &mut [f64],
    scratch: &mut [f64],
) -> Result<(), DynError> {
    for i in 0..x.len() {
        tmp_x[i] = x[i] + h * px[i];
        tmp_v[i] = v[i] + h * pv[i];
    }
    kx.copy_from_slice(tmp_v);
    sys.accel_into(tmp_x, tmp_v, scale, kv, scratch)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IntegrateConfig {
    pub dt: f64,
    pub t_end: f64,
    /// `None` picks [`Method::auto`].
    pub method: Option<Method>,
    /// Keep every `record_stride`-th step.
    pub record_stride: usize,
    /// Factor `s` in front of `U`.
    pub potential_scale: f64,
    /// Largest relative energy drift for a run to count as conservative.
    pub energy_tol: f64,
}

impl Default for IntegrateConfig {
    fn default() -> Self {
        IntegrateConfig {
            dt: 1e-3,
            t_end: 10.0,
            method: None,
            record_stride: 1,
            potential_scale: 1.0,
            energy_tol: 1e-5,
        }
    }
}

/// Sampled solution. Positions and velocities are stored row-major.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Trajectory {
    pub num_vars: usize,
    pub method: Method,
    pub dt: f64,
    pub record_stride: usize,
    pub potential_scale: f64,
    pub times: Vec<f64>,
    pub positions: Vec<f64>,
    pub velocities: Vec<f64>,
    pub energies: Vec<f64>,
    pub potentials: Vec<f64>,
    /// `max |H(t) − H(0)| / max(|H(0)|, 1)` over every step.
    pub drift: f64,
    pub conservative: bool,
    /// Set when the run stopped early on a non-finite state.
    pub truncated: Option<String>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn position(&self, k: usize) -> &[f64] {
        &self.positions[k * self.num_vars..(k + 1) * self.num_vars]
    }

    pub fn velocity(&self, k: usize) -> &[f64] {
        &self.velocities[k * self.num_vars..(k + 1) * self.num_vars]
    }

    /// `tau,x1..xn,v1..vn,energy,U`.
    pub fn to_csv(&self) -> String {
        let n = self.num_vars;
        let mut out = String::from("tau");
        for i in 1..=n {
            let _ = write!(out, ",x{i}");
        }
        for i in 1..=n {
            let _ = write!(out, ",v{i}");
        }
        out.push_str(",energy,U\n");
        for k in 0..self.len() {
            let _ = write!(out, "{}", self.times[k]);
            for z in self.position(k).iter().chain(self.velocity(k)) {
                let _ = write!(out, ",{z}");
            }
            let _ = writeln!(out, ",{},{}", self.energies[k], self.potentials[k]);
        }
        out
    }
}

/// Integrates from `(x0, v0)` for `round(t_end/dt)` steps.
pub fn integrate(sys: &MechanicalSystem, x0: &[f64], v0: &[f64], cfg: &IntegrateConfig) -> Result<Trajectory, DynError> {
    if !(cfg.t_end > 0.0) || cfg.record_stride == 0 {
        return Err(DynError::InvalidParameter("need t_end > 0 and record_stride ≥ 1".into()));
    }
    let method = cfg.method.unwrap_or_else(|| Method::auto(sys));
    let mut st = Stepper::new(sys, x0, v0, cfg.dt, cfg.potential_scale, method)?;
    let steps = (cfg.t_end / cfg.dt).round() as usize;
    let n = sys.num_vars();
    let cap = steps / cfg.record_stride + 1;
    let mut tr = Trajectory {
        num_vars: n,
        method,
        dt: cfg.dt,
        record_stride: cfg.record_stride,
        potential_scale: cfg.potential_scale,
        times: Vec::with_capacity(cap),
        positions: Vec::with_capacity(cap * n),
        velocities: Vec::with_capacity(cap * n),
        energies: Vec::with_capacity(cap),
        potentials: Vec::with_capacity(cap),
        drift: 0.0,
        conservative: true,
        truncated: None,
    };
    let h0 = sys.energy(x0, v0, cfg.potential_scale)?;
    let denom = h0.abs().max(1.0);
    let record = |tr: &mut Trajectory, t: f64, x: &[f64], v: &[f64], h: f64| {
        tr.times.push(t);
        tr.positions.extend_from_slice(x);
        tr.velocities.extend_from_slice(v);
        tr.energies.push(h);
        tr.potentials.push(sys.potential(x));
    };
    record(&mut tr, 0.0, x0, v0, h0);
    for k in 1..=steps {
        st.step()?;
        let t = k as f64 * cfg.dt;
        if !st.is_finite() {
            tr.truncated = Some(format!("non-finite state at t = {t}"));
            break;
        }
        let h = sys.energy(st.x(), st.v(), cfg.potential_scale)?;
        tr.drift = tr.drift.max((h - h0).abs() / denom);
        if k % cfg.record_stride == 0 {
            record(&mut tr, t, st.x(), st.v(), h);
        }
    }
    tr.conservative = tr.truncated.is_none() && tr.drift <= cfg.energy_tol;
    Ok(tr)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HalvingEstimate {
    /// Sup distance between the `dt` and `dt/2` positions on the common grid.
    pub position_error: f64,
    pub drift_dt: f64,
    pub drift_half: f64,
    /// `drift_dt / drift_half`: ≈ 4 for second-order, ≈ 16 for fourth-order energy error.
    pub drift_ratio: f64,
}

/// Reruns with half the step and compares on the coarse grid.
pub fn step_halving(sys: &MechanicalSystem, x0: &[f64], v0: &[f64], cfg: &IntegrateConfig) -> Result<HalvingEstimate, DynError> {
    let coarse = integrate(sys, x0, v0, cfg)?;
    let fine_cfg = IntegrateConfig {
        dt: cfg.dt / 2.0,
        record_stride: cfg.record_stride * 2,
        ..cfg.clone()
    };
    let fine = integrate(sys, x0, v0, &fine_cfg)?;
    let m = coarse.len().min(fine.len());
    let mut err: f64 = 0.0;
    for k in 0..m {
        for (a, b) in coarse.position(k).iter().zip(fine.position(k)) {
            err = err.max((a - b).abs());
        }
    }
    Ok(HalvingEstimate {
        position_error: err,
        drift_dt: coarse.drift,
        drift_half: fine.drift,
        drift_ratio: if fine.drift > 0.0 { coarse.drift / fine.drift } else { f64::INFINITY },
    })
}

/// Time-`t_end` map of the first-order flow `ẋ = V(x)`, by fixed-step RK4.
pub fn field_flow(v: &PolyVectorField, x0: &[f64], t_end: f64, dt: f64) -> Result<Vec<f64>, DynError> {
    let n = v.num_vars();
    if x0.len() != n {
        return Err(DynError::DimensionMismatch { expected: n, got: x0.len() });
    }
    if !(dt > 0.0) || !(t_end >= 0.0) {
        return Err(DynError::InvalidParameter("need dt > 0 and t_end ≥ 0".into()));
    }
    let f = v.to_fast();
    let eval = |x: &[f64]| -> Vec<f64> { f.iter().map(|c| c.eval(x)).collect() };
    let axpy = |x: &[f64], h: f64, k: &[f64]| -> Vec<f64> { x.iter().zip(k).map(|(a, b)| a + h * b).collect() };
    let steps = (t_end / dt).round() as usize;
    let h = if steps == 0 { 0.0 } else { t_end / steps as f64 };
    let mut x = x0.to_vec();
    for _ in 0..steps {
        let k1 = eval(&x);
        let k2 = eval(&axpy(&x, 0.5 * h, &k1));
        let k3 = eval(&axpy(&x, 0.5 * h, &k2));
        let k4 = eval(&axpy(&x, h, &k3));
        for i in 0..n {
            x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    Ok(x)
}
