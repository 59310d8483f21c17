//! Canned examples with their expected outcomes.
//!
//! Every expectation records where its target value comes from: stated in
//! the source text (`paper`), immediate from the definitions (`trivial`),
//! or computed by an independent argument (`derived`).

use std::fmt;

use anyhow::{anyhow, Result};
use serde::Serialize;
use weaklog::blowup::{make_chart, run_schedule, strict_transform, to_monomial_unit, unit_box, Center, Schedule};
use weaklog::dynamics::{
    epsilon_family, field_flow, stability_probe, FamilyConfig, KineticMetric, MechanicalSystem, PotentialSpec,
    StabilityConfig,
};
use weaklog::logcheck::{check_logarithmic, default_s_grid, divergence_witness, weaklog_sample, SamplerConfig};
use weaklog::symcore::{euler_field, int, parse, parse_list, quasi_homogeneity, PolyVectorField, Polynomial, VarSet, WeightVector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Paper,
    Trivial,
    Derived,
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Source::Paper => "paper",
            Source::Trivial => "trivial",
            Source::Derived => "derived",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub source: Source,
    pub expected: String,
    pub observed: String,
    pub passed: bool,
}

fn check(name: &str, source: Source, expected: impl fmt::Display, observed: impl fmt::Display, passed: bool) -> Check {
    Check {
        name: name.to_string(),
        source,
        expected: expected.to_string(),
        observed: observed.to_string(),
        passed,
    }
}

pub struct Entry {
    pub id: &'static str,
    pub description: &'static str,
    pub inputs: &'static [(&'static str, &'static str)],
    run: fn() -> Result<Vec<Check>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExampleOutcome {
    pub id: String,
    pub description: String,
    pub inputs: Vec<(String, String)>,
    pub checks: Vec<Check>,
    /// Set when the experiment itself failed to run.
    pub error: Option<String>,
    pub passed: bool,
}

impl fmt::Display for ExampleOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "== {}: {}", self.id, self.description)?;
        for (k, v) in &self.inputs {
            writeln!(f, "   {k} = {v}")?;
        }
        for c in &self.checks {
            writeln!(
                f,
                "   [{:<7}] {}  {}\n              expected: {}\n              observed: {}",
                c.source,
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.expected,
                c.observed
            )?;
        }
        if let Some(e) = &self.error {
            writeln!(f, "   error: {e}")?;
        }
        writeln!(f, "   result: {}", if self.passed { "PASS" } else { "FAIL" })
    }
}

pub fn entries() -> &'static [Entry] {
    ENTRIES
}

pub fn find(id: &str) -> Result<&'static Entry> {
    ENTRIES.iter().find(|e| e.id == id).ok_or_else(|| {
        let ids: Vec<&str> = ENTRIES.iter().map(|e| e.id).collect();
        anyhow!("unknown example `{id}`; known: {}", ids.join(", "))
    })
}

pub fn run(e: &Entry) -> ExampleOutcome {
    let (checks, error) = match (e.run)() {
        Ok(c) => (c, None),
        Err(err) => (Vec::new(), Some(format!("{err:#}"))),
    };
    let passed = error.is_none() && !checks.is_empty() && checks.iter().all(|c| c.passed);
    ExampleOutcome {
        id: e.id.to_string(),
        description: e.description.to_string(),
        inputs: e.inputs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect(),
        checks,
        error,
        passed,
    }
}

/// Runs the whole registry; entries are independent and run concurrently,
/// results come back in registry order.
pub fn run_all() -> Vec<ExampleOutcome> {
    std::thread::scope(|s| {
        let handles: Vec<_> = ENTRIES.iter().map(|e| s.spawn(move || run(e))).collect();
        handles.into_iter().map(|h| h.join().expect("registry entry panicked")).collect()
    })
}

static ENTRIES: &[Entry] = &[
    Entry {
        id: "euler-quasihom",
        description: "quasi-homogeneous quartic/sextic with its Euler field",
        inputs: &[("vars", "x,y,z"), ("U", "x^4+y^4-z^6"), ("V", "3*x,3*y,2*z")],
        run: euler_quasihom,
    },
    Entry {
        id: "example-2-1",
        description: "x^2(x^2+y^2) with V = d/dy: not logarithmic at the origin",
        inputs: &[("vars", "x,y"), ("U", "x^2*(x^2+y^2)"), ("V", "0,1"), ("curve", "s,s")],
        run: example_2_1,
    },
    Entry {
        id: "example-2-2-whitney",
        description: "Whitney-style potential: candidate fields fail to preserve the four lines",
        inputs: &[
            ("vars", "x,y,z"),
            ("U", "x^2*y^2*(x-y)^2*(x-z*y)^2"),
            ("candidates", "0,0,1 | x,y,1 | y,0,1"),
            ("base", "(0,0,1/2)"),
        ],
        run: example_2_2_whitney,
    },
    Entry {
        id: "example-2-3",
        description: "x^2+y^2 with V = x d/dx + 2y d/dy + d/dz: weakly logarithmic, not logarithmic",
        inputs: &[("vars", "x,y,z"), ("U", "x^2+y^2"), ("V", "x,2*y,1")],
        run: example_2_3,
    },
    Entry {
        id: "cone",
        description: "blowup of the cone at the origin gives a cylinder",
        inputs: &[("vars", "x,y,z"), ("U", "y^2+z^2-x^2"), ("center", "x,y,z"), ("pivot", "x")],
        run: cone,
    },
    Entry {
        id: "x6y2",
        description: "three point blowups principalize x^6+y^2",
        inputs: &[("vars", "x,y,z"), ("U", "x^6+y^2"), ("schedule", "3 x blowup center=x,y pivot=x")],
        run: x6y2,
    },
    Entry {
        id: "zaxis-instability",
        description: "eps-family along the force-free z-axis under three kinetic metrics",
        inputs: &[("vars", "x,y,z"), ("U", "x^2+y^2"), ("V", "x,2*y,1"), ("p", "0,0,0"), ("metrics", "identity | diag:1,2,3 | random:7")],
        run: zaxis_instability,
    },
    Entry {
        id: "x2y2-instability",
        description: "eps-family for x^2*y^2 along the x-axis under three kinetic metrics",
        inputs: &[("vars", "x,y,z"), ("U", "x^2*y^2"), ("V", "1,0,0"), ("p", "0,0,0"), ("metrics", "identity | diag:1,2,3 | random:7")],
        run: x2y2_instability,
    },
    Entry {
        id: "wintner-stability",
        description: "flat oscillating potential: small-energy motions stay in the first well",
        inputs: &[("builtin", "wintner"), ("energy", "1e-6"), ("T", "1000"), ("dt", "1e-3")],
        run: wintner_stability,
    },
    Entry {
        id: "laloy-stability",
        description: "decoupled two-variable potential: per-coordinate trapping",
        inputs: &[("builtin", "laloy"), ("energies", "1e-6,1e-5"), ("T", "100"), ("dt", "1e-3"), ("bundle", "8")],
        run: laloy_stability,
    },
];

// ---- helpers ------------------------------------------------------------------

fn vs(names: &str) -> Result<VarSet> {
    Ok(VarSet::parse(names)?)
}

fn p(text: &str, v: &VarSet) -> Result<Polynomial> {
    Ok(parse(text, v)?)
}

fn fld(text: &str, v: &VarSet) -> Result<PolyVectorField> {
    Ok(PolyVectorField::parse(text, v)?)
}

fn yes(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

// ---- examples -------------------------------------------------------------------

fn euler_quasihom() -> Result<Vec<Check>> {
    let v = vs("x,y,z")?;
    let u = p("x^4+y^4-z^6", &v)?;
    let e = fld("3*x,3*y,2*z", &v)?;
    let w = quasi_homogeneity(&u);
    let expected_w = WeightVector::from_integers(&[3, 3, 2], 12);
    let verdict = check_logarithmic(&e, &u)?;
    let twelve = Polynomial::constant(&v, int(12));
    let rep = weaklog_sample(&e, &u, &[0.0; 3], &SamplerConfig::default())?;
    let built = euler_field(&v, &expected_w)?;
    Ok(vec![
        check(
            "weights solve the quasi-homogeneity system",
            Source::Derived,
            &expected_w,
            w.as_ref().map_or("none".into(), |w| w.to_string()),
            w.as_ref() == Some(&expected_w),
        ),
        check("Euler field of the weights", Source::Trivial, &e, &built, built == e),
        check(
            "check-log multiplier",
            Source::Trivial,
            "logarithmic, P = 12",
            verdict.to_string().trim().replace('\n', "; "),
            verdict.multiplier() == Some(&twelve),
        ),
        check(
            "sampled |P| is the constant 12",
            Source::Trivial,
            "sup = 12 (1e-9), no growth",
            format!("sup = {}, growth = {}", rep.global_sup_estimate, rep.growth_flag),
            (rep.global_sup_estimate - 12.0).abs() < 1e-9 && !rep.growth_flag,
        ),
    ])
}

fn example_2_1() -> Result<Vec<Check>> {
    let v = vs("x,y")?;
    let u = p("x^2*(x^2+y^2)", &v)?;
    let f = fld("0,1", &v)?;
    let verdict = check_logarithmic(&f, &u)?;
    let vu = p("2*x^2*y", &v)?;
    let rep = weaklog_sample(&f, &u, &[0.0, 0.0], &SamplerConfig::default())?;
    let s = vs("s")?;
    let curve = parse_list("s,s", &s)?;
    let w = divergence_witness(&f, &u, &curve, &default_s_grid(), 10.0)?;
    let at = |target: f64| w.p_values.iter().find(|(s, _)| (s / target - 1.0).abs() < 1e-9).map(|&(_, p)| p);
    let (p1, p3) = (at(1e-1).unwrap_or(f64::NAN), at(1e-3).unwrap_or(f64::NAN));
    let worst = w.p_values.iter().map(|(s, p)| (s * p - 1.0).abs()).fold(0.0, f64::max);
    Ok(vec![
        check("V(U) exactly", Source::Derived, &vu, &verdict.vu, verdict.vu == vu),
        check(
            "check-log verdict",
            Source::Paper,
            "not logarithmic",
            if verdict.is_logarithmic() { "logarithmic" } else { "not logarithmic" },
            !verdict.is_logarithmic(),
        ),
        check("shell sampling flags growth", Source::Paper, "growth = true", format!("growth = {}", rep.growth_flag), rep.growth_flag),
        check("witness along (s,s) diverges", Source::Paper, "divergent", if w.divergent { "divergent" } else { "bounded" }, w.divergent),
        check(
            "|P| grows from s = 1e-1 to s = 1e-3",
            Source::Paper,
            "ratio >= 50",
            format!("ratio = {}", p3 / p1),
            p3 / p1 >= 50.0,
        ),
        check("P(s,s) = 1/s on the grid", Source::Derived, "max |s*P - 1| < 1e-9", format!("{worst:e}"), worst < 1e-9),
    ])
}

/// Residuals of the four lines through the z-axis in the plane of `q`.
fn line_residuals(q: &[f64]) -> [f64; 4] {
    let (x, y, z) = (q[0], q[1], q[2]);
    [x.abs(), y.abs(), (x - y).abs(), (x - z * y).abs()]
}

fn example_2_2_whitney() -> Result<Vec<Check>> {
    let v = vs("x,y,z")?;
    let u = p("x^2*y^2*(x-y)^2*(x-z*y)^2", &v)?;
    let base = [0.0, 0.0, 0.5];
    let names = ["x = 0", "y = 0", "x = y", "x = z*y"];
    // A point on each line, off the axis, in the plane z = 1/2.
    let starts = [[0.0, 0.1, 0.5], [0.1, 0.0, 0.5], [0.1, 0.1, 0.5], [0.05, 0.1, 0.5]];
    let mut out = Vec::new();
    // The four lines lie in the zero locus of every plane z = const.
    let on_locus = starts
        .iter()
        .enumerate()
        .all(|(k, s)| line_residuals(s)[k] == 0.0 && u.eval_f64(s).map(|x| x == 0.0).unwrap_or(false));
    out.push(check("the four lines lie in the zero locus", Source::Trivial, "U = 0 on each", yes(on_locus), on_locus));
    for cand in ["0,0,1", "x,y,1", "y,0,1"] {
        let f = fld(cand, &v)?;
        let at = f.eval_f64(&base)?;
        let normalized = at[2] == 1.0 && f.component(2) == &Polynomial::one(&v);
        out.push(check(
            &format!("({cand}) is normalized, non-null at the base"),
            Source::Trivial,
            "z-component 1",
            format!("{at:?}"),
            normalized,
        ));
        let verdict = check_logarithmic(&f, &u)?;
        out.push(check(
            &format!("({cand}) is not logarithmic"),
            Source::Derived,
            "not logarithmic",
            if verdict.is_logarithmic() { "logarithmic" } else { "not logarithmic" },
            !verdict.is_logarithmic(),
        ));
        let mut broken = Vec::new();
        for (k, s) in starts.iter().enumerate() {
            let end = field_flow(&f, s, 0.2, 1e-3)?;
            let r = line_residuals(&end)[k];
            if r > 1e-6 {
                broken.push(format!("{} (residual {r:.3e})", names[k]));
            }
        }
        out.push(check(
            &format!("flow of ({cand}) for t = 0.2 breaks some line"),
            Source::Paper,
            "at least one of the four lines not preserved",
            if broken.is_empty() { "all preserved".to_string() } else { broken.join(", ") },
            !broken.is_empty(),
        ));
    }
    Ok(out)
}

fn example_2_3() -> Result<Vec<Check>> {
    let v = vs("x,y,z")?;
    let u = p("x^2+y^2", &v)?;
    let f = fld("x,2*y,1", &v)?;
    let verdict = check_logarithmic(&f, &u)?;
    let vu = p("2*x^2+4*y^2", &v)?;
    let rep = weaklog_sample(&f, &u, &[0.0; 3], &SamplerConfig::default())?;
    let mut worst: f64 = 0.0;
    for k in 0..8 {
        let th = 0.37 + k as f64 * 0.8;
        let (x, y) = (0.3 * th.cos(), 0.3 * th.sin());
        let q = [x, y, 0.1];
        let direct = verdict.vu.eval_f64(&q)? / u.eval_f64(&q)?;
        worst = worst.max((direct - 2.0 * (1.0 + th.sin().powi(2))).abs());
    }
    Ok(vec![
        check("V(U) exactly", Source::Paper, &vu, &verdict.vu, verdict.vu == vu),
        check(
            "check-log verdict",
            Source::Paper,
            "not logarithmic",
            if verdict.is_logarithmic() { "logarithmic" } else { "not logarithmic" },
            !verdict.is_logarithmic(),
        ),
        check("P = 2(1 + sin^2 theta)", Source::Paper, "max deviation < 1e-12", format!("{worst:e}"), worst < 1e-12),
        check(
            "sup estimate",
            Source::Paper,
            "in [3.9, 4.0]",
            rep.global_sup_estimate,
            (3.9..=4.0).contains(&rep.global_sup_estimate),
        ),
        check("no growth", Source::Paper, "growth = false", format!("growth = {}", rep.growth_flag), !rep.growth_flag),
    ])
}

fn cone() -> Result<Vec<Check>> {
    let v = vs("x,y,z")?;
    let u = p("y^2+z^2-x^2", &v)?;
    let ch = make_chart(&Center::from_names(&v, &["x", "y", "z"])?, 0, &v)?;
    let t = strict_transform(&u, &ch)?;
    let strict = p("xi_y^2+xi_z^2-1", ch.target())?;
    let total = p("x^2*(xi_y^2+xi_z^2-1)", ch.target())?;
    Ok(vec![
        check("exceptional exponent", Source::Paper, 2, t.exceptional_exponent, t.exceptional_exponent == 2),
        check("strict transform (cylinder)", Source::Paper, &strict, &t.strict, t.strict == strict),
        check("total transform", Source::Derived, &total, &t.total, t.total == total),
    ])
}

fn x6y2() -> Result<Vec<Check>> {
    let v = vs("x,y,z")?;
    let u = p("x^6+y^2", &v)?;
    let trace = run_schedule(&u, &Schedule::repeated(&["x", "y"], "x", 3))?;
    let mut out = Vec::new();
    let expected = ["x^2*(x^4+y_1^2)", "x^4*(x^2+y_2^2)", "x^6*(1+y_3^2)"];
    for (k, (step, want)) in trace.steps.iter().zip(expected).enumerate() {
        let want_p = p(want, &step.vars)?;
        out.push(check(&format!("total after step {}", k + 1), Source::Paper, want, &step.total, step.total == want_p));
        let d = 2 * (k as u32 + 1);
        out.push(check(
            &format!("exceptional exponent at step {}", k + 1),
            Source::Paper,
            d,
            step.exceptional_exponent,
            step.exceptional_exponent == d,
        ));
    }
    let last = trace.final_total();
    let m = to_monomial_unit(last, &unit_box(last.num_vars()))?;
    let (exps, unit, certified) = match m.form() {
        Some(f) => (format!("{:?}", f.exponents), f.unit.to_string(), f.certified_positive),
        None => ("none".into(), "none".into(), false),
    };
    let unit_ok = m.form().is_some_and(|f| f.unit == p("1+y_3^2", last.vars()).unwrap_or_else(|_| Polynomial::zero(last.vars())));
    out.push(check("monomial exponents", Source::Paper, "[6, 0, 0]", &exps, exps == "[6, 0, 0]" && certified));
    out.push(check("unit", Source::Paper, "y_3^2 + 1", &unit, unit_ok));
    out.push(check("steps run", Source::Trivial, 3, trace.steps.len(), trace.steps.len() == 3));
    Ok(out)
}

pub(crate) fn three_metrics() -> Vec<(&'static str, KineticMetric)> {
    vec![
        ("identity", KineticMetric::Identity),
        ("diag(1,2,3)", KineticMetric::diagonal(&[1.0, 2.0, 3.0]).expect("SPD")),
        ("random SPD (seed 7)", KineticMetric::random_spd(3, 7)),
    ]
}

/// Escape, speed and potential bounds, holonomy slope and exactness of the axis
/// solution, for one potential/field pair under the three metrics.
fn axis_experiment(u_text: &str, v_text: &str, axis: usize) -> Result<Vec<Check>> {
    let v = vs("x,y,z")?;
    let field = fld(v_text, &v)?;
    let mut out = Vec::new();
    let mut verdicts = Vec::new();
    for (label, metric) in three_metrics() {
        let sys = MechanicalSystem::new(PotentialSpec::Polynomial(p(u_text, &v)?), metric)?;
        let rep = epsilon_family(&sys, &[0.0; 3], &field, &FamilyConfig::default())?;
        let g = sys.metric_at(&[0.0; 3])?[(axis, axis)];
        let want_t = 0.5 / g.sqrt();
        let times: Vec<Option<f64>> = rep.members.iter().map(|m| m.escape_time).collect();
        let escaped = times.iter().all(|t| t.is_some_and(|t| t <= 1.0));
        verdicts.push(rep.all_escape());
        out.push(check(
            &format!("{label}: escape beyond 0.5 for every eps, tau <= 1"),
            Source::Derived,
            format!("escape at tau = {want_t:.6}"),
            format!(
                "escape times {}",
                times.iter().map(|t| t.map_or("none".into(), |t| format!("{t:.6}"))).collect::<Vec<_>>().join(" ")
            ),
            escaped && times.iter().all(|t| t.is_some_and(|t| (t - want_t).abs() < 1e-9)),
        ));
        let lemma_ok = rep.members.iter().all(|m| {
            m.lemma1_speed_ok
                && m.lemma1_potential_ok
                && m.max_speed <= m.speed_bound + 1e-6
                && m.max_u <= m.u_bound + 1e-9
        });
        let worst_speed = rep.members.iter().map(|m| m.max_speed - m.speed_bound).fold(f64::NEG_INFINITY, f64::max);
        out.push(check(
            &format!("{label}: speed and potential bounds"),
            Source::Paper,
            "max|x'| <= |V(p)| + 1e-6, max U <= eps^2|V(p)|^2/2 + 1e-9",
            format!("worst speed excess {worst_speed:.2e}"),
            lemma_ok,
        ));
        let target = rep.v_norm * rep.v_norm;
        let worst = rep.members.iter().map(|m| (m.holonomy_slope - target).abs()).fold(0.0, f64::max);
        out.push(check(
            &format!("{label}: holonomy slope"),
            Source::Paper,
            format!("|V(p)|_g^2 = {target:.6} (1e-3)"),
            format!("max deviation {worst:.2e}"),
            worst < 1e-3,
        ));
        let dist = rep.pairwise_sup_distance.iter().copied().fold(0.0, f64::max);
        out.push(check(
            &format!("{label}: members coincide"),
            Source::Derived,
            "sup distance 0 (1e-9)",
            format!("{dist:e}"),
            dist < 1e-9,
        ));
    }
    let same = verdicts.windows(2).all(|w| w[0] == w[1]);
    out.push(check(
        "escape verdict independent of the metric",
        Source::Paper,
        "identical verdicts",
        format!("{verdicts:?}"),
        same && verdicts.iter().all(|&b| b),
    ));
    Ok(out)
}

fn zaxis_instability() -> Result<Vec<Check>> {
    axis_experiment("x^2+y^2", "x,2*y,1", 2)
}

fn x2y2_instability() -> Result<Vec<Check>> {
    axis_experiment("x^2*y^2", "1,0,0", 0)
}

fn wintner_stability() -> Result<Vec<Check>> {
    let sys = MechanicalSystem::new(PotentialSpec::Wintner, KineticMetric::Identity)?;
    let cfg = StabilityConfig { energies: vec![1e-6], t_long: 1e3, dt: 1e-3, ..Default::default() };
    let rep = stability_probe(&sys, &[0.0], &cfg)?;
    let pr = &rep.probes[0];
    let barrier = pr.members.iter().filter_map(|m| m.barriers.as_ref().map(|b| b[0].1)).fold(f64::INFINITY, f64::min);
    Ok(vec![
        check(
            "excursion within the first barrier over T = 1000",
            Source::Paper,
            format!("max |x| <= {barrier:.6}"),
            format!("{:.6}", pr.max_excursion),
            pr.trapped == Some(true) && pr.max_excursion <= barrier,
        ),
        check(
            "no growth between T/2 and T",
            Source::Derived,
            "growth ratio 1",
            format!("{:.6}", pr.excursion_growth),
            (pr.excursion_growth - 1.0).abs() < 1e-9,
        ),
    ])
}

fn laloy_stability() -> Result<Vec<Check>> {
    let sys = MechanicalSystem::new(PotentialSpec::Laloy, KineticMetric::Identity)?;
    let cfg = StabilityConfig { energies: vec![1e-6, 1e-5], t_long: 1e2, dt: 1e-3, bundle: 8, ..Default::default() };
    let rep = stability_probe(&sys, &[0.0, 0.0], &cfg)?;
    Ok(rep
        .probes
        .iter()
        .map(|pr| {
            let n_trapped = pr.members.iter().filter(|m| m.trapped == Some(true)).count();
            check(
                &format!("energy {:e}: every coordinate stays within its barriers", pr.energy),
                Source::Paper,
                format!("{} of {} members trapped", pr.members.len(), pr.members.len()),
                format!("{n_trapped} of {} members trapped", pr.members.len()),
                pr.trapped == Some(true),
            )
        })
        .collect())
}
