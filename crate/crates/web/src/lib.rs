//! wasm-bindgen wrappers behind `www/index.html`.
//!
//! Each export takes plain strings and returns a JSON string; errors come back
//! as a thrown JS string. The `*_json` functions are the native-testable cores.

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;
use weaklog::blowup::{run_schedule, to_monomial_unit, unit_box, Monomialization, Schedule};
use weaklog::dynamics::{epsilon_family, FamilyConfig, KineticMetric, MechanicalSystem, PotentialSpec};
use weaklog::logcheck::check_logarithmic;
use weaklog::symcore::{parse, PolyVectorField, VarSet};

/// Longest path handed to the page per ε-member.
const MAX_PATH_POINTS: usize = 400;

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

/// Exact check-log verdict plus |V(U)/U| on an `n × n` grid over
/// `[-h, h]²` in the first two variables (the rest held at 0).
pub fn p_field_json(vars: &str, u: &str, v: &str, half_width: f64, n: usize) -> Result<Value, String> {
    let vs = VarSet::parse(vars).map_err(err)?;
    if vs.len() < 2 {
        return Err("the heatmap needs at least two variables".into());
    }
    if half_width.is_nan() || half_width <= 0.0 || !(2..=400).contains(&n) {
        return Err("need half width > 0 and 2 ≤ n ≤ 400".into());
    }
    let u = parse(u, &vs).map_err(err)?;
    let f = PolyVectorField::parse(v, &vs).map_err(err)?;
    let verdict = check_logarithmic(&f, &u).map_err(err)?;
    let mut values = Vec::with_capacity(n * n);
    let mut q = vec![0.0; vs.len()];
    for row in 0..n {
        q[1] = half_width - 2.0 * half_width * row as f64 / (n - 1) as f64;
        for col in 0..n {
            q[0] = -half_width + 2.0 * half_width * col as f64 / (n - 1) as f64;
            let den = u.eval_f64(&q).map_err(err)?;
            let num = verdict.vu.eval_f64(&q).map_err(err)?;
            let p = (num / den).abs();
            // On the zero locus the ratio is undefined; the page greys it out.
            values.push(if p.is_finite() && den.abs() > 1e-300 { Some(p) } else { None });
        }
    }
    Ok(json!({
        "logarithmic": verdict.is_logarithmic(),
        "status": verdict.to_string().trim(),
        "vu": verdict.vu.to_string(),
        "multiplier": verdict.multiplier().map(|p| p.to_string()),
        "axes": [vs.names()[0], vs.names()[1]],
        "half_width": half_width,
        "n": n,
        "values": values,
    }))
}

fn metric(spec: &str, n: usize) -> Result<KineticMetric, String> {
    let (kind, rest) = spec.split_once(':').unwrap_or((spec, ""));
    match kind.trim() {
        "identity" => Ok(KineticMetric::Identity),
        "diag" => {
            let d = rest.split(',').map(|t| t.trim().parse::<f64>().map_err(err)).collect::<Result<Vec<_>, _>>()?;
            KineticMetric::diagonal(&d).map_err(err)
        }
        "random" => Ok(KineticMetric::random_spd(n, rest.trim().parse().unwrap_or(7))),
        other => Err(format!("unknown metric `{other}` (identity, diag:a,b,.., random[:seed])")),
    }
}

/// The ε-family from the origin (which must be a zero of U) with recorded paths.
pub fn eps_paths_json(vars: &str, u: &str, v: &str, metric_spec: &str, n_max: u32) -> Result<Value, String> {
    let vs = VarSet::parse(vars).map_err(err)?;
    if n_max > 8 {
        return Err("n max is capped at 8 in the browser".into());
    }
    let sys = MechanicalSystem::new(PotentialSpec::Polynomial(parse(u, &vs).map_err(err)?), metric(metric_spec, vs.len())?)
        .map_err(err)?;
    let f = PolyVectorField::parse(v, &vs).map_err(err)?;
    let cfg = FamilyConfig {
        eps: (0..=n_max as i32).map(|k| 2f64.powi(-k)).collect(),
        halving_check: false,
        ..Default::default()
    };
    let rep = epsilon_family(&sys, &vec![0.0; vs.len()], &f, &cfg).map_err(err)?;
    let members: Vec<Value> = rep
        .members
        .iter()
        .map(|m| {
            let tr = &m.trajectory;
            let stride = tr.len().div_ceil(MAX_PATH_POINTS).max(1);
            let path: Vec<Vec<f64>> = (0..tr.len()).step_by(stride).map(|k| tr.position(k).to_vec()).collect();
            let times: Vec<f64> = (0..tr.len()).step_by(stride).map(|k| tr.times[k]).collect();
            json!({
                "eps": m.eps,
                "escape_time": m.escape_time,
                "max_speed": m.max_speed,
                "speed_bound": m.speed_bound,
                "max_u": m.max_u,
                "u_bound": m.u_bound,
                "holonomy_slope": m.holonomy_slope,
                "times": times,
                "path": path,
            })
        })
        .collect();
    Ok(json!({
        "vars": vs.names(),
        "metric": rep.metric,
        "v_p": rep.v_p,
        "v_norm": rep.v_norm,
        "escape_radius": cfg.escape_radius,
        "all_escape": rep.all_escape(),
        "lemma1_ok": rep.lemma1_ok(),
        "members": members,
    }))
}

/// Runs a blowup schedule and reports each chart's total and strict transform.
pub fn blowup_trace_json(vars: &str, u: &str, schedule: &str) -> Result<Value, String> {
    let vs = VarSet::parse(vars).map_err(err)?;
    let u = parse(u, &vs).map_err(err)?;
    let sched = Schedule::parse(schedule).map_err(err)?;
    let trace = run_schedule(&u, &sched).map_err(err)?;
    let steps: Vec<Value> = trace
        .steps
        .iter()
        .map(|s| {
            json!({
                "vars": s.vars.names(),
                "total": s.total.to_string(),
                "exceptional_exponent": s.exceptional_exponent,
                "strict": s.strict.to_string(),
            })
        })
        .collect();
    let last = trace.final_total();
    let mono = to_monomial_unit(last, &unit_box(last.num_vars())).map_err(err)?;
    let fin = match &mono {
        Monomialization::Form(f) => json!({
            "monomialized": true,
            "monomial": f.monomial_text(last.vars()),
            "exponents": f.exponents,
            "sign": f.sign,
            "unit": f.unit.to_string(),
            "certified_positive": f.certified_positive,
        }),
        Monomialization::NotMonomialized { cofactor, reason } => json!({
            "monomialized": false,
            "reason": reason.to_string(),
            "cofactor": cofactor.to_string(),
        }),
    };
    Ok(json!({ "input": u.to_string(), "steps": steps, "final": fin }))
}

fn to_js(r: Result<Value, String>) -> Result<String, JsValue> {
    r.map(|v| v.to_string()).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn p_field(vars: &str, u: &str, v: &str, half_width: f64, n: usize) -> Result<String, JsValue> {
    to_js(p_field_json(vars, u, v, half_width, n))
}

#[wasm_bindgen]
pub fn eps_paths(vars: &str, u: &str, v: &str, metric: &str, n_max: u32) -> Result<String, JsValue> {
    to_js(eps_paths_json(vars, u, v, metric, n_max))
}

#[wasm_bindgen]
pub fn blowup_trace(vars: &str, u: &str, schedule: &str) -> Result<String, JsValue> {
    to_js(blowup_trace_json(vars, u, schedule))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn heatmap_of_the_quadratic_example() {
        let j = p_field_json("x,y,z", "x^2+y^2", "x,2*y,1", 1.0, 21).unwrap();
        assert_eq!(j["logarithmic"], false);
        assert_eq!(j["vu"], "2*x^2 + 4*y^2");
        let vals = j["values"].as_array().unwrap();
        assert_eq!(vals.len(), 441);
        // Centre is on the zero locus.
        assert!(vals[220].is_null());
        // |P| = 2(1 + sin²θ) ∈ [2, 4] everywhere else.
        for v in vals.iter().filter_map(|v| v.as_f64()) {
            assert!((2.0 - 1e-12..=4.0 + 1e-12).contains(&v));
        }
        assert!(p_field_json("x", "x", "1", 1.0, 10).is_err());
    }

    #[test]
    fn z_axis_paths_escape() {
        let j = eps_paths_json("x,y,z", "x^2+y^2", "x,2*y,1", "diag:1,2,3", 3).unwrap();
        assert_eq!(j["all_escape"], true);
        let m = j["members"].as_array().unwrap();
        assert_eq!(m.len(), 4);
        for mem in m {
            assert!((mem["escape_time"].as_f64().unwrap() - 0.5 / 3f64.sqrt()).abs() < 1e-9);
            assert!(mem["path"].as_array().unwrap().len() <= MAX_PATH_POINTS);
        }
        assert!(eps_paths_json("x", "x^2", "1", "nope", 1).is_err());
    }

    #[test]
    fn sextic_trace() {
        let j = blowup_trace_json(
            "x,y,z",
            "x^6+y^2",
            "blowup center=x,y pivot=x\nblowup center=x,y_1 pivot=x\nblowup center=x,y_2 pivot=x",
        )
        .unwrap();
        assert_eq!(j["steps"].as_array().unwrap().len(), 3);
        assert_eq!(j["final"]["exponents"], json!([6, 0, 0]));
        assert_eq!(j["final"]["certified_positive"], true);
    }
}
