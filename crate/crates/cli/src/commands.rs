use std::fmt::Write as _;
use std::fs;

use anyhow::{anyhow, bail, Context, Result};
use serde_json::json;
use weaklog::blowup::{
    make_chart, pullback_field, pushout_field, run_schedule, strict_transform, to_monomial_unit, BlowupChart,
    BlowupError, Center, Monomialization, MonomialUnitForm, Schedule,
};
use weaklog::dynamics::{
    epsilon_family, integrate, limit_curve_evidence, stability_probe, FamilyConfig, IntegrateConfig, KineticMetric,
    MechanicalSystem, Method, PotentialSpec, StabilityConfig,
};
use weaklog::logcheck::{check_logarithmic, default_s_grid, divergence_witness, weaklog_sample, SamplerConfig};
use weaklog::symcore::{parse, parse_list, PolyVectorField, Polynomial, RationalVectorField, VarSet};

use crate::args::{ChartArgs, Command, Common, FamilyArgs, SamplerArgs, ScheduleArgs, SimulateArgs, StabilityArgs, SystemArgs, WitnessArgs};
use crate::{registry, Outcome, RunConfig, Verdict};

pub(crate) fn execute(cmd: &Command) -> Result<Outcome> {
    let common = cmd.common();
    let (params, body) = match cmd {
        Command::CheckLog { common } => (json!({ "common": common }), check_log(common)?),
        Command::CheckWeaklog { common, sampler } => (json!({ "common": common, "sampler": sampler }), check_weaklog(common, sampler)?),
        Command::Witness { common, witness: w } => (json!({ "common": common, "witness": w }), witness(common, w)?),
        Command::Blowup { common, chart } => (json!({ "common": common, "chart": chart }), blowup(common, chart)?),
        Command::Pullback { common, chart } => (json!({ "common": common, "chart": chart }), pullback(common, chart)?),
        Command::Pushout { common, chart } => (json!({ "common": common, "chart": chart }), pushout(common, chart)?),
        Command::Principalize { common, schedule } => (json!({ "common": common, "schedule": schedule }), principalize(common, schedule)?),
        Command::Simulate { common, system, sim } => (json!({ "common": common, "system": system, "simulate": sim }), simulate(common, system, sim)?),
        Command::EpsFamily { common, system, family } => (json!({ "common": common, "system": system, "family": family }), eps_family(common, system, family)?),
        Command::Stability { common, system, probe } => (json!({ "common": common, "system": system, "probe": probe }), stability(common, system, probe)?),
        Command::Reproduce { common, id, all, list } => (json!({ "common": common, "id": id, "all": all, "list": list }), reproduce(common, id.as_deref(), *all, *list)?),
    };
    Ok(Outcome {
        config: RunConfig {
            command: cmd.name().to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed: common.seed,
            format: common.format,
            out: common.out.clone(),
            params,
        },
        text: body.text,
        json: body.json,
        csv: body.csv,
        verdict: body.verdict,
    })
}

/// A command's report before the run configuration is attached.
pub(crate) struct Body {
    pub text: String,
    pub json: serde_json::Value,
    pub csv: Vec<(String, String)>,
    pub verdict: Verdict,
}

// ---- input parsing ----------------------------------------------------------

fn vars(c: &Common) -> Result<VarSet> {
    let v = c.vars.as_deref().ok_or_else(|| anyhow!("missing --vars"))?;
    VarSet::parse(v).with_context(|| format!("--vars `{v}`"))
}

fn potential(c: &Common, vars: &VarSet) -> Result<Polynomial> {
    let u = c.u.as_deref().ok_or_else(|| anyhow!("missing --U"))?;
    parse(u, vars).with_context(|| format!("--U `{u}`"))
}

fn field(c: &Common, vars: &VarSet) -> Result<PolyVectorField> {
    let v = c.v.as_deref().ok_or_else(|| anyhow!("missing --V"))?;
    PolyVectorField::parse(v, vars).with_context(|| format!("--V `{v}`"))
}

pub(crate) fn floats(text: &str, what: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|t| t.trim().parse::<f64>().with_context(|| format!("{what}: `{t}` is not a number")))
        .collect()
}

fn point(text: Option<&str>, n: usize, what: &str) -> Result<Vec<f64>> {
    match text {
        None => Ok(vec![0.0; n]),
        Some(t) => {
            let p = floats(t, what)?;
            if p.len() != n {
                bail!("{what}: expected {n} coordinates, got {}", p.len());
            }
            Ok(p)
        }
    }
}

fn split_names(text: &str) -> Vec<String> {
    text.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect()
}

fn chart(vars: &VarSet, a: &ChartArgs) -> Result<BlowupChart> {
    let center = Center::from_names(vars, &split_names(&a.center))?;
    let pivot = vars.index_of(a.pivot.trim()).ok_or_else(|| anyhow!("--pivot `{}` is not a variable", a.pivot))?;
    Ok(make_chart(&center, pivot, vars)?)
}

/// `identity`, `diag:a,b,..`, `random[:seed]`, `const:r1;r2;..`, `poly:r1;r2;..`.
pub(crate) fn metric(spec: &str, n: usize, seed: u64, vars: Option<&VarSet>) -> Result<KineticMetric> {
    let (kind, rest) = spec.split_once(':').unwrap_or((spec, ""));
    let rows = |rest: &str| -> Vec<String> { rest.split(';').map(|r| r.trim().to_string()).collect() };
    Ok(match kind.trim() {
        "identity" => KineticMetric::Identity,
        "diag" => KineticMetric::diagonal(&floats(rest, "--metric diag")?)?,
        "random" => {
            let s = if rest.is_empty() { seed } else { rest.trim().parse().context("--metric random seed")? };
            KineticMetric::random_spd(n, s)
        }
        "const" => {
            let r = rows(rest).iter().map(|row| floats(row, "--metric const")).collect::<Result<Vec<_>>>()?;
            KineticMetric::from_rows(&r)?
        }
        "poly" => {
            let vars = vars.ok_or_else(|| anyhow!("--metric poly needs a polynomial potential with --vars"))?;
            let entries = rows(rest)
                .iter()
                .map(|row| parse_list(row, vars))
                .collect::<Result<Vec<_>, _>>()
                .context("--metric poly")?;
            KineticMetric::polynomial(entries)?
        }
        other => bail!("unknown metric `{other}` (identity, diag:, random:, const:, poly:)"),
    })
}

fn method(system: &SystemArgs) -> Result<Option<Method>> {
    system.method.as_deref().map(|m| m.parse::<Method>()).transpose().map_err(Into::into)
}

/// Builds the mechanical system from `--builtin` or `--vars/--U`.
fn system(c: &Common, s: &SystemArgs) -> Result<(MechanicalSystem, Option<VarSet>)> {
    let (spec, vars) = match (&s.builtin, &c.u) {
        (Some(_), Some(_)) => bail!("give either --builtin or --U, not both"),
        (Some(b), None) => (PotentialSpec::builtin(b)?, None),
        (None, _) => {
            let vars = vars(c)?;
            (PotentialSpec::Polynomial(potential(c, &vars)?), Some(vars))
        }
    };
    let m = metric(&s.metric, spec.num_vars(), c.seed, vars.as_ref())?;
    Ok((MechanicalSystem::new(spec, m)?, vars))
}

// ---- commands ---------------------------------------------------------------

fn check_log(c: &Common) -> Result<Body> {
    let vars = vars(c)?;
    let (u, v) = (potential(c, &vars)?, field(c, &vars)?);
    let verdict = check_logarithmic(&v, &u)?;
    Ok(Body {
        text: verdict.to_string(),
        json: serde_json::to_value(&verdict)?,
        csv: Vec::new(),
        verdict: Verdict::from_bool(verdict.is_logarithmic()),
    })
}

fn check_weaklog(c: &Common, a: &SamplerArgs) -> Result<Body> {
    let vars = vars(c)?;
    let (u, v) = (potential(c, &vars)?, field(c, &vars)?);
    let base = point(a.base.as_deref(), vars.len(), "--base")?;
    let cfg = SamplerConfig {
        r0: a.r0,
        num_scales: a.scales,
        samples: a.samples,
        seed: c.seed,
        growth_factor: a.growth_factor,
    };
    let report = weaklog_sample(&v, &u, &base, &cfg)?;
    let mut text = report.to_string();
    if report.growth_flag {
        text.push_str(
            "hint: |V(U)/U| grows toward the base point; run `witness --curve ...` along a curve into the base point \
             (for instance the diagonal) to exhibit the divergence\n",
        );
    }
    let mut csv = String::from("r_outer,r_inner,sup_abs_p,inf_abs_p\n");
    for k in 0..report.per_scale_sup.len() {
        let _ = writeln!(csv, "{},{},{},{}", report.scales[k], report.scales[k + 1], report.per_scale_sup[k], report.per_scale_inf[k]);
    }
    Ok(Body {
        text,
        json: serde_json::to_value(&report)?,
        csv: vec![("shells.csv".into(), csv)],
        verdict: Verdict::from_bool(!report.growth_flag),
    })
}

fn witness(c: &Common, a: &WitnessArgs) -> Result<Body> {
    let vars = vars(c)?;
    let (u, v) = (potential(c, &vars)?, field(c, &vars)?);
    let pv = VarSet::parse(&a.param).context("--param")?;
    let curve = parse_list(&a.curve, &pv).with_context(|| format!("--curve `{}`", a.curve))?;
    if curve.len() != vars.len() {
        bail!("--curve: expected {} components, got {}", vars.len(), curve.len());
    }
    let grid = match &a.s_grid {
        Some(g) => floats(g, "--s-grid")?,
        None => default_s_grid(),
    };
    let w = divergence_witness(&v, &u, &curve, &grid, a.threshold)?;
    let mut csv = String::from("s,abs_p\n");
    for (s, p) in &w.p_values {
        let _ = writeln!(csv, "{s},{p}");
    }
    Ok(Body {
        text: w.to_string(),
        json: serde_json::to_value(&w)?,
        csv: vec![("witness.csv".into(), csv)],
        verdict: Verdict::from_bool(w.divergent),
    })
}

fn chart_json(ch: &BlowupChart) -> serde_json::Value {
    json!({
        "source": ch.source(),
        "target": ch.target(),
        "images": ch.images(),
        "codim_one": ch.is_codim_one(),
    })
}

fn blowup(c: &Common, a: &ChartArgs) -> Result<Body> {
    let vars = vars(c)?;
    let u = potential(c, &vars)?;
    let ch = chart(&vars, a)?;
    let t = strict_transform(&u, &ch)?;
    let mut text = format!("chart: {ch}\n");
    let _ = writeln!(text, "total:    {}", t.total);
    let _ = writeln!(text, "exponent: {}", t.exceptional_exponent);
    let _ = writeln!(text, "strict:   {}", t.strict);
    Ok(Body {
        text,
        json: json!({ "chart": chart_json(&ch), "transform": t }),
        csv: Vec::new(),
        verdict: Verdict::Affirmative,
    })
}

fn pullback(c: &Common, a: &ChartArgs) -> Result<Body> {
    let vars = vars(c)?;
    let v = field(c, &vars)?;
    let ch = chart(&vars, a)?;
    let up = match pullback_field(&v, &ch) {
        Ok(f) => f,
        Err(e @ BlowupError::NotTangent(_)) => return Ok(negative(format!("tangency violation: {e}"))),
        Err(e) => return Err(e.into()),
    };
    let mut text = format!("chart: {ch}\npullback: {up}\n");
    let mut doc = json!({ "chart": chart_json(&ch), "pullback": up.components() });
    if c.u.is_some() {
        // Transport of the logarithmic identity through the chart.
        let u = potential(c, &vars)?;
        let before = check_logarithmic(&v, &u)?;
        let t = strict_transform(&u, &ch)?;
        let after = check_logarithmic(&up, &t.total)?;
        let _ = writeln!(text, "U∘π:      {}", t.total);
        let _ = write!(text, "before:   {before}");
        let _ = write!(text, "after:    {after}");
        doc["before"] = serde_json::to_value(&before)?;
        doc["after"] = serde_json::to_value(&after)?;
    }
    Ok(Body {
        text,
        json: doc,
        csv: Vec::new(),
        verdict: Verdict::Affirmative,
    })
}

fn negative(message: String) -> Body {
    Body {
        text: format!("{message}\n"),
        json: json!({ "error": message }),
        csv: Vec::new(),
        verdict: Verdict::Negative,
    }
}

fn pushout(c: &Common, a: &ChartArgs) -> Result<Body> {
    let vars = vars(c)?;
    let ch = chart(&vars, a)?;
    let w = field(c, ch.target()).context("--V is read in chart coordinates")?;
    let down = match pushout_field(&RationalVectorField::from(w), &ch) {
        Ok(d) => d,
        Err(e @ BlowupError::NotTangentToExceptional(_)) => return Ok(negative(format!("tangency violation: {e}"))),
        Err(e) => return Err(e.into()),
    };
    let mut text = format!("chart: {ch}\npushout: {}\n", down.field);
    match &down.polynomial {
        Some(p) => {
            let _ = writeln!(text, "polynomial: {p}");
        }
        None => text.push_str("polynomial: no (rational components)\n"),
    }
    let comps: Vec<String> = down.field.components().iter().map(|r| r.to_string()).collect();
    Ok(Body {
        text,
        json: json!({
            "chart": chart_json(&ch),
            "pushout": comps,
            "polynomial": down.polynomial.as_ref().map(|p| p.components().to_vec()),
        }),
        csv: Vec::new(),
        verdict: Verdict::Affirmative,
    })
}

pub(crate) fn form_text(form: &MonomialUnitForm, vars: &VarSet) -> String {
    let sign = if form.sign < 0 { "-" } else { "" };
    let mono = form.monomial_text(vars);
    if form.unit.is_constant() {
        let c = form.unit.to_string();
        if mono == "1" {
            format!("{sign}{c}")
        } else if c == "1" {
            format!("{sign}{mono}")
        } else {
            format!("{sign}{c}*{mono}")
        }
    } else if mono == "1" {
        format!("{sign}({})", form.unit)
    } else {
        format!("{sign}{mono}*({})", form.unit)
    }
}

fn unit_bounds(text: &str, n: usize) -> Result<Vec<(f64, f64)>> {
    let (lo, hi) = text.split_once(':').ok_or_else(|| anyhow!("--unit-box: expected lo:hi"))?;
    let (lo, hi): (f64, f64) = (lo.trim().parse().context("--unit-box")?, hi.trim().parse().context("--unit-box")?);
    if lo.is_nan() || hi.is_nan() || lo >= hi {
        bail!("--unit-box: need lo < hi");
    }
    Ok(vec![(lo, hi); n])
}

fn principalize(c: &Common, a: &ScheduleArgs) -> Result<Body> {
    let vars = vars(c)?;
    let u = potential(c, &vars)?;
    let text_in = fs::read_to_string(&a.schedule).with_context(|| format!("reading {}", a.schedule.display()))?;
    let schedule = Schedule::parse(&text_in)?;
    let trace = run_schedule(&u, &schedule)?;
    let last = trace.final_total();
    let mono = to_monomial_unit(last, &unit_bounds(&a.unit_box, last.num_vars())?)?;
    let mut text = trace.to_string();
    match &mono {
        Monomialization::Form(f) => {
            let _ = writeln!(text, "final: {}", form_text(f, last.vars()));
            let _ = writeln!(text, "unit positive on the box: {}", if f.certified_positive { "yes (sampled)" } else { "no" });
        }
        Monomialization::NotMonomialized { cofactor, reason } => {
            let _ = writeln!(text, "not monomialized: {reason}; cofactor {cofactor}");
        }
    }
    Ok(Body {
        text,
        json: json!({ "schedule": schedule, "trace": trace, "monomialization": mono }),
        csv: Vec::new(),
        verdict: Verdict::from_bool(mono.form().is_some_and(|f| f.certified_positive)),
    })
}

fn simulate(c: &Common, s: &SystemArgs, a: &SimulateArgs) -> Result<Body> {
    let (sys, _) = system(c, s)?;
    let n = sys.num_vars();
    let x0 = point(Some(&a.x0), n, "--x0")?;
    let v0 = point(Some(&a.v0), n, "--v0")?;
    let cfg = IntegrateConfig {
        dt: a.dt,
        t_end: a.t_end,
        method: method(s)?,
        record_stride: a.stride,
        potential_scale: a.scale,
        ..Default::default()
    };
    let tr = integrate(&sys, &x0, &v0, &cfg)?;
    let k = tr.len() - 1;
    let mut text = format!("U = {}   metric = {}   method = {}\n", sys.potential_spec(), sys.metric().label(), tr.method.name());
    let _ = writeln!(text, "dt = {}   T = {}   samples = {}", tr.dt, a.t_end, tr.len());
    let _ = writeln!(text, "x(T) = {:?}\nv(T) = {:?}", tr.position(k), tr.velocity(k));
    let _ = writeln!(text, "relative energy drift = {:.3e}   conservative = {}", tr.drift, tr.conservative);
    if let Some(t) = &tr.truncated {
        let _ = writeln!(text, "truncated: {t}");
    }
    Ok(Body {
        text,
        json: json!({
            "method": tr.method,
            "dt": tr.dt,
            "samples": tr.len(),
            "final_position": tr.position(k),
            "final_velocity": tr.velocity(k),
            "drift": tr.drift,
            "conservative": tr.conservative,
            "truncated": tr.truncated,
        }),
        csv: vec![("trajectory.csv".into(), tr.to_csv())],
        verdict: Verdict::from_bool(tr.conservative),
    })
}

fn eps_list(a: &FamilyArgs) -> Result<Vec<f64>> {
    match &a.eps {
        Some(e) => floats(e, "--eps"),
        None => Ok((0..=a.n_max).map(|n| 0.5f64.powi(n as i32)).collect()),
    }
}

fn eps_family(c: &Common, s: &SystemArgs, a: &FamilyArgs) -> Result<Body> {
    let (sys, vars) = system(c, s)?;
    let vars = match vars {
        Some(v) => v,
        None => vars_for_builtin(c, sys.num_vars())?,
    };
    let v = field(c, &vars)?;
    let p = point(a.p.as_deref(), sys.num_vars(), "--p")?;
    let cfg = FamilyConfig {
        eps: eps_list(a)?,
        t_rescaled: a.t_rescaled,
        dt_base: a.dt_base,
        escape_radius: a.escape_radius,
        method: method(s)?,
        halving_check: !a.no_halving,
        ..Default::default()
    };
    let rep = epsilon_family(&sys, &p, &v, &cfg)?;
    let mut text = rep.to_string();
    let mut doc = serde_json::to_value(&rep)?;
    if rep.members.len() >= 3 {
        let ev = limit_curve_evidence(&rep)?;
        text.push_str(&ev.to_string());
        doc["limit_curve"] = serde_json::to_value(&ev)?;
    }
    let mut summary = String::from(
        "eps,dt,max_speed,speed_bound,max_u,u_bound,lemma1_speed_ok,lemma1_potential_ok,escape_time,holonomy_slope,v_norm_sq,drift,halving_error\n",
    );
    let mut csv = Vec::new();
    for (k, m) in rep.members.iter().enumerate() {
        let _ = writeln!(
            summary,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            m.eps,
            m.dt,
            m.max_speed,
            m.speed_bound,
            m.max_u,
            m.u_bound,
            m.lemma1_speed_ok,
            m.lemma1_potential_ok,
            m.escape_time.map_or(String::new(), |t| t.to_string()),
            m.holonomy_slope,
            rep.v_norm * rep.v_norm,
            m.drift,
            m.halving_error.map_or(String::new(), |e| e.to_string()),
        );
        csv.push((format!("eps_{k}.csv"), m.trajectory.to_csv()));
    }
    csv.insert(0, ("family.csv".into(), summary));
    Ok(Body {
        text,
        json: doc,
        csv,
        verdict: Verdict::from_bool(rep.lemma1_ok() && rep.all_escape()),
    })
}

/// Builtins have fixed dimension; `--vars` is optional and defaults to `x` or `x,y`.
fn vars_for_builtin(c: &Common, n: usize) -> Result<VarSet> {
    match &c.vars {
        Some(_) => {
            let v = vars(c)?;
            if v.len() != n {
                bail!("--vars: the builtin has {n} variables");
            }
            Ok(v)
        }
        None => Ok(VarSet::parse(if n == 1 { "x" } else { "x,y" })?),
    }
}

fn stability(c: &Common, s: &SystemArgs, a: &StabilityArgs) -> Result<Body> {
    let (sys, _) = system(c, s)?;
    let p = point(a.p.as_deref(), sys.num_vars(), "--p")?;
    let cfg = StabilityConfig {
        energies: floats(&a.energies, "--energies")?,
        t_long: a.t_long,
        dt: a.dt,
        bundle: a.bundle,
        method: method(s)?,
        seed: c.seed,
    };
    let rep = stability_probe(&sys, &p, &cfg)?;
    let mut csv = String::from("energy,member,max_excursion,max_excursion_half,trapped\n");
    for pr in &rep.probes {
        for (k, m) in pr.members.iter().enumerate() {
            let t = m.trapped.map_or(String::new(), |b| b.to_string());
            let _ = writeln!(csv, "{},{},{},{},{}", pr.energy, k, m.max_excursion, m.max_excursion_half, t);
        }
    }
    let escaped = rep.probes.iter().any(|p| p.trapped == Some(false));
    Ok(Body {
        text: rep.to_string(),
        json: serde_json::to_value(&rep)?,
        csv: vec![("stability.csv".into(), csv)],
        verdict: Verdict::from_bool(!escaped),
    })
}

fn reproduce(c: &Common, id: Option<&str>, all: bool, list: bool) -> Result<Body> {
    if list {
        let mut text = String::new();
        for e in registry::entries() {
            let _ = writeln!(text, "{:<22} {}", e.id, e.description);
        }
        let ids: Vec<&str> = registry::entries().iter().map(|e| e.id).collect();
        return Ok(Body { text, json: json!(ids), csv: Vec::new(), verdict: Verdict::Affirmative });
    }
    let outcomes = match (id, all) {
        (Some(_), true) => bail!("give an example id or --all, not both"),
        (None, false) => bail!("give an example id or --all (see --list)"),
        (Some(id), false) => vec![registry::run(registry::find(id)?)],
        (None, true) => registry::run_all(),
    };
    let mut text = String::new();
    for o in &outcomes {
        text.push_str(&o.to_string());
    }
    let passed = outcomes.iter().filter(|o| o.passed).count();
    let _ = writeln!(text, "{passed}/{} examples passed", outcomes.len());
    let mut csv = String::from("id,check,source,passed,expected,observed\n");
    for o in &outcomes {
        for ch in &o.checks {
            let _ = writeln!(csv, "{},\"{}\",{},{},\"{}\",\"{}\"", o.id, ch.name, ch.source, ch.passed, ch.expected, ch.observed);
        }
    }
    let _ = c;
    Ok(Body {
        text,
        json: serde_json::to_value(&outcomes)?,
        csv: vec![("reproduce.csv".into(), csv)],
        verdict: Verdict::from_bool(passed == outcomes.len()),
    })
}
