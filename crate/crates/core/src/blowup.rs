//! Blowups along coordinate centers in a single affine chart.
//!
//! For a center `𝒱(x_i : i ∈ S)` and pivot `p ∈ S`, the chart map `π` sends
//! `x_i ↦ x_p·ξ_i` for `i ∈ S \ {p}` and fixes every other coordinate.
//! Chart coordinates keep the source positions: slot `i` holds `ξ_i`.

use std::collections::BTreeSet;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::symcore::{
    mismatch, PolyVectorField, Polynomial, RationalFunction, RationalVectorField, SymError, VarSet,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BlowupError {
    #[error(transparent)]
    Sym(#[from] SymError),
    #[error("empty center")]
    EmptyCenter,
    #[error("pivot `{0}` is not in the center")]
    PivotOutsideCenter(String),
    #[error("field is not tangent to the center {{{0}}}")]
    NotTangent(String),
    #[error("field is not tangent to the exceptional hyperplane {0} = 0")]
    NotTangentToExceptional(String),
    #[error("cannot transform the zero polynomial")]
    ZeroPolynomial,
    #[error("schedule line {line}: {message}")]
    ScheduleSyntax { line: usize, message: String },
    #[error("schedule step {step}: {message}")]
    InvalidStep { step: usize, message: String },
}

/// Coordinate center `𝒱(x_i : i ∈ S)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Center {
    vars: BTreeSet<usize>,
}

impl Center {
    pub fn new(indices: impl IntoIterator<Item = usize>, num_vars: usize) -> Result<Self, BlowupError> {
        let vars: BTreeSet<usize> = indices.into_iter().collect();
        if vars.is_empty() {
            return Err(BlowupError::EmptyCenter);
        }
        if let Some(&i) = vars.iter().find(|&&i| i >= num_vars) {
            return Err(SymError::IndexOutOfRange { index: i, num_vars }.into());
        }
        Ok(Center { vars })
    }

    pub fn from_names<S: AsRef<str>>(vars: &VarSet, names: &[S]) -> Result<Self, BlowupError> {
        let mut idx = Vec::with_capacity(names.len());
        for n in names {
            let n = n.as_ref().trim();
            let i = vars.index_of(n).ok_or_else(|| SymError::UnknownVariable {
                name: n.to_string(),
                column: 0,
            })?;
            idx.push(i);
        }
        Self::new(idx, vars.len())
    }

    pub fn indices(&self) -> Vec<usize> {
        self.vars.iter().copied().collect()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.vars.contains(&i)
    }

    /// A single-variable center: the blowup is an isomorphism that only
    /// turns the center into an exceptional divisor.
    pub fn is_codim_one(&self) -> bool {
        self.vars.len() == 1
    }

    pub fn names(&self, vars: &VarSet) -> Vec<String> {
        self.vars.iter().map(|&i| vars.name(i).to_string()).collect()
    }
}

/// How new chart coordinates are named.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChartNaming {
    /// `xi_<name>`.
    Xi,
    /// Step-indexed: `y → y_k` (a trailing `_<digits>` is replaced).
    Step(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct BlowupChart {
    center: Center,
    pivot: usize,
    source: VarSet,
    target: VarSet,
    /// Image of each source variable as a polynomial in chart coordinates.
    images: Vec<Polynomial>,
}

fn step_name(name: &str, k: usize) -> String {
    let base = match name.rsplit_once('_') {
        Some((b, digits)) if !b.is_empty() && !digits.is_empty() && digits.bytes().all(|c| c.is_ascii_digit()) => b,
        _ => name,
    };
    format!("{base}_{k}")
}

/// Chart for `center` with the given pivot, ξ-coordinates named `xi_<name>`.
pub fn make_chart(center: &Center, pivot: usize, vars: &VarSet) -> Result<BlowupChart, BlowupError> {
    make_chart_named(center, pivot, vars, ChartNaming::Xi)
}

pub fn make_chart_named(
    center: &Center,
    pivot: usize,
    vars: &VarSet,
    naming: ChartNaming,
) -> Result<BlowupChart, BlowupError> {
    for i in center.indices() {
        vars.check_index(i)?;
    }
    if !center.contains(pivot) {
        let name = if pivot < vars.len() { vars.name(pivot).to_string() } else { pivot.to_string() };
        return Err(BlowupError::PivotOutsideCenter(name));
    }
    let mut names: Vec<String> = vars.names().to_vec();
    for i in center.indices() {
        if i == pivot {
            continue;
        }
        let old = vars.name(i);
        let mut new = match naming {
            ChartNaming::Xi => format!("xi_{old}"),
            ChartNaming::Step(k) => step_name(old, k),
        };
        let taken = |cand: &str, names: &[String]| names.iter().enumerate().any(|(j, n)| j != i && n == cand);
        if taken(&new, &names) {
            new = match naming {
                ChartNaming::Xi => format!("xi{i}_{old}"),
                ChartNaming::Step(k) => format!("xi{k}_{old}"),
            };
        }
        if taken(&new, &names) {
            return Err(SymError::InvalidVars(format!("cannot name chart coordinate for `{old}`")).into());
        }
        names[i] = new;
    }
    let target = VarSet::new(names)?;
    let x_p = Polynomial::var(&target, pivot)?;
    let images = (0..vars.len())
        .map(|i| {
            let t = Polynomial::var(&target, i)?;
            Ok(if center.contains(i) && i != pivot { &x_p * &t } else { t })
        })
        .collect::<Result<Vec<_>, SymError>>()?;
    Ok(BlowupChart {
        center: center.clone(),
        pivot,
        source: vars.clone(),
        target,
        images,
    })
}

impl BlowupChart {
    pub fn center(&self) -> &Center {
        &self.center
    }

    pub fn pivot(&self) -> usize {
        self.pivot
    }

    pub fn source(&self) -> &VarSet {
        &self.source
    }

    pub fn target(&self) -> &VarSet {
        &self.target
    }

    pub fn images(&self) -> &[Polynomial] {
        &self.images
    }

    pub fn is_codim_one(&self) -> bool {
        self.center.is_codim_one()
    }

    /// Non-pivot center indices, i.e. the ξ slots.
    pub fn xi_indices(&self) -> Vec<usize> {
        self.center.indices().into_iter().filter(|&i| i != self.pivot).collect()
    }

    /// Evaluates `π` at a chart point.
    pub fn map_point(&self, q: &[f64]) -> Vec<f64> {
        (0..q.len())
            .map(|i| if self.center.contains(i) && i != self.pivot { q[self.pivot] * q[i] } else { q[i] })
            .collect()
    }

    fn check_source(&self, vars: &VarSet) -> Result<(), BlowupError> {
        if *vars != self.source {
            return Err(mismatch(&self.source, vars).into());
        }
        Ok(())
    }
}

impl fmt::Display for BlowupChart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let maps: Vec<String> = self
            .xi_indices()
            .iter()
            .map(|&i| format!("{} -> {}", self.source.name(i), self.images[i]))
            .collect();
        write!(
            f,
            "center {{{}}} pivot {}: {}",
            self.center.names(&self.source).join(","),
            self.source.name(self.pivot),
            if maps.is_empty() { "identity".to_string() } else { maps.join(", ") }
        )?;
        if self.is_codim_one() {
            write!(f, " (codimension one)")?;
        }
        Ok(())
    }
}

/// `f∘π` in chart coordinates.
pub fn total_transform(f: &Polynomial, chart: &BlowupChart) -> Result<Polynomial, BlowupError> {
    chart.check_source(f.vars())?;
    Ok(f.substitute_all(&chart.images)?)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TransformResult {
    pub total: Polynomial,
    pub exceptional_exponent: u32,
    pub strict: Polynomial,
}

/// Splits `f∘π = x_p^d · strict` with `d` maximal.
pub fn strict_transform(f: &Polynomial, chart: &BlowupChart) -> Result<TransformResult, BlowupError> {
    if f.is_zero() {
        return Err(BlowupError::ZeroPolynomial);
    }
    let total = total_transform(f, chart)?;
    let d = total.monomial_content()[chart.pivot];
    let mut exps = vec![0; total.num_vars()];
    exps[chart.pivot] = d;
    let strict = total.div_monomial(&exps).expect("pivot power divides");
    Ok(TransformResult {
        total,
        exceptional_exponent: d,
        strict,
    })
}

/// Lifts a field tangent to the center to the chart:
/// pivot `V^p∘π`, ξ-slot `(V^i∘π − ξ_i·V^p∘π)/x_p`, elsewhere `V^j∘π`.
pub fn pullback_field(v: &PolyVectorField, chart: &BlowupChart) -> Result<PolyVectorField, BlowupError> {
    chart.check_source(v.vars())?;
    let center = chart.center.indices();
    if !v.is_tangent_to_center(&center) {
        return Err(BlowupError::NotTangent(chart.center.names(&chart.source).join(",")));
    }
    let lifted: Vec<Polynomial> = v
        .components()
        .iter()
        .map(|c| c.substitute_all(&chart.images))
        .collect::<Result<_, _>>()?;
    let x_p = Polynomial::var(&chart.target, chart.pivot)?;
    let mut out = lifted.clone();
    for i in chart.xi_indices() {
        let xi = Polynomial::var(&chart.target, i)?;
        let num = &lifted[i] - &(&xi * &lifted[chart.pivot]);
        out[i] = num
            .exact_divide(&x_p)?
            .ok_or_else(|| BlowupError::NotTangent(chart.center.names(&chart.source).join(",")))?;
    }
    Ok(PolyVectorField::new(&chart.target, out)?)
}

#[derive(Clone, Debug, PartialEq)]
pub struct PushoutResult {
    pub field: RationalVectorField,
    /// The simplified polynomial field, when every component is polynomial.
    pub polynomial: Option<PolyVectorField>,
}

/// Pushes a chart field down: pivot `W^p`, ξ-slot `x_p·W^{ξ_i} + ξ_i·W^p`,
/// elsewhere unchanged, then `ξ_i = x_i/x_p`.
pub fn pushout_field(w: &RationalVectorField, chart: &BlowupChart) -> Result<PushoutResult, BlowupError> {
    if *w.vars() != chart.target {
        return Err(mismatch(&chart.target, w.vars()).into());
    }
    let p = chart.pivot;
    let wp = w.component(p);
    let (num0, den0) = wp.restrict_to_zero(&[p]);
    if !num0.is_zero() || den0.is_zero() {
        return Err(BlowupError::NotTangentToExceptional(chart.target.name(p).to_string()));
    }
    let t = &chart.target;
    let x_p = RationalFunction::from_poly(Polynomial::var(t, p)?);
    let mut up: Vec<RationalFunction> = w.components().to_vec();
    for i in chart.xi_indices() {
        let xi = RationalFunction::from_poly(Polynomial::var(t, i)?);
        up[i] = x_p.checked_mul(w.component(i))?.checked_add(&xi.checked_mul(wp)?)?;
    }
    let s = &chart.source;
    let y_p = Polynomial::var(s, p)?;
    let back: Vec<RationalFunction> = (0..s.len())
        .map(|i| {
            let y = Polynomial::var(s, i)?;
            if chart.center.contains(i) && i != p {
                RationalFunction::new(y, y_p.clone())
            } else {
                Ok(RationalFunction::from_poly(y))
            }
        })
        .collect::<Result<_, _>>()?;
    let comps: Vec<RationalFunction> = up.iter().map(|c| c.substitute_all(&back)).collect::<Result<_, _>>()?;
    let field = RationalVectorField::new(s, comps)?;
    let polynomial = field.to_polynomial();
    Ok(PushoutResult { field, polynomial })
}

/// One line of a schedule file: `blowup center=x,y pivot=x`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ScheduleStep {
    pub center: Vec<String>,
    pub pivot: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Schedule {
    pub steps: Vec<ScheduleStep>,
}

impl Schedule {
    /// Parses the line-oriented schedule format; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, BlowupError> {
        let mut steps = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: &str| BlowupError::ScheduleSyntax {
                line: n + 1,
                message: message.to_string(),
            };
            let mut words = line.split_whitespace();
            if words.next() != Some("blowup") {
                return Err(err("expected `blowup center=<vars> pivot=<var>`"));
            }
            let (mut center, mut pivot) = (None, None);
            for w in words {
                match w.split_once('=') {
                    Some(("center", v)) => center = Some(v.split(',').map(|s| s.trim().to_string()).collect::<Vec<_>>()),
                    Some(("pivot", v)) => pivot = Some(v.trim().to_string()),
                    _ => return Err(err(&format!("unexpected `{w}`"))),
                }
            }
            let center = center.ok_or_else(|| err("missing center="))?;
            let pivot = pivot.ok_or_else(|| err("missing pivot="))?;
            if center.iter().any(String::is_empty) || pivot.is_empty() {
                return Err(err("empty variable name"));
            }
            steps.push(ScheduleStep { center, pivot });
        }
        Ok(Schedule { steps })
    }

    /// The same step repeated, renaming the non-pivot center variable by step index.
    pub fn repeated(center: &[&str], pivot: &str, times: usize) -> Self {
        let mut steps = Vec::with_capacity(times);
        let mut names: Vec<String> = center.iter().map(|s| s.to_string()).collect();
        for k in 1..=times {
            steps.push(ScheduleStep {
                center: names.clone(),
                pivot: pivot.to_string(),
            });
            names = names.iter().map(|n| if n == pivot { n.clone() } else { step_name(n, k) }).collect();
        }
        Schedule { steps }
    }
}

impl fmt::Display for Schedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.steps {
            writeln!(f, "blowup center={} pivot={}", s.center.join(","), s.pivot)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceStep {
    pub vars: VarSet,
    pub center: Vec<String>,
    pub pivot: String,
    pub codim_one: bool,
    /// Pullback of the original polynomial to this chart.
    pub total: Polynomial,
    pub exceptional_exponent: u32,
    pub strict: Polynomial,
    /// Exponents of the largest monomial dividing `total`.
    pub monomial_exponents: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PrincipalizationTrace {
    pub initial: Polynomial,
    pub steps: Vec<TraceStep>,
}

impl PrincipalizationTrace {
    /// The pullback of the input in the last chart.
    pub fn final_total(&self) -> &Polynomial {
        self.steps.last().map_or(&self.initial, |s| &s.total)
    }
}

impl fmt::Display for PrincipalizationTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "U = {}", self.initial)?;
        for (k, s) in self.steps.iter().enumerate() {
            writeln!(f, "step {}: blowup center={} pivot={}{}", k + 1, s.center.join(","), s.pivot, if s.codim_one { " (codimension one)" } else { "" })?;
            writeln!(f, "  chart:    {}", s.vars)?;
            writeln!(f, "  total:    {}", s.total)?;
            writeln!(f, "  exponent: {}", s.exceptional_exponent)?;
            writeln!(f, "  strict:   {}", s.strict)?;
            writeln!(f, "  monomial: {:?}", s.monomial_exponents)?;
        }
        Ok(())
    }
}

/// Applies each step to the running pullback of `u`. Step `k` (1-based)
/// renames its ξ coordinates by step index.
pub fn run_schedule(u: &Polynomial, schedule: &Schedule) -> Result<PrincipalizationTrace, BlowupError> {
    if u.is_zero() {
        return Err(BlowupError::ZeroPolynomial);
    }
    let mut current = u.clone();
    let mut steps = Vec::with_capacity(schedule.steps.len());
    for (k, step) in schedule.steps.iter().enumerate() {
        let invalid = |e: BlowupError| BlowupError::InvalidStep {
            step: k + 1,
            message: e.to_string(),
        };
        let vars = current.vars().clone();
        let center = Center::from_names(&vars, &step.center).map_err(invalid)?;
        let pivot = vars.index_of(&step.pivot).ok_or_else(|| {
            invalid(BlowupError::Sym(SymError::UnknownVariable {
                name: step.pivot.clone(),
                column: 0,
            }))
        })?;
        let chart = make_chart_named(&center, pivot, &vars, ChartNaming::Step(k + 1)).map_err(invalid)?;
        let t = strict_transform(&current, &chart)?;
        steps.push(TraceStep {
            vars: chart.target.clone(),
            center: step.center.clone(),
            pivot: step.pivot.clone(),
            codim_one: center.is_codim_one(),
            monomial_exponents: t.total.monomial_content(),
            total: t.total.clone(),
            exceptional_exponent: t.exceptional_exponent,
            strict: t.strict,
        });
        current = t.total;
    }
    Ok(PrincipalizationTrace { initial: u.clone(), steps })
}

/// `sign · x^exponents · unit`, with the unit's constant term positive.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MonomialUnitForm {
    pub sign: i8,
    pub exponents: Vec<u32>,
    pub unit: Polynomial,
    /// Every sampled value of the unit on the box was positive. Evidence, not proof.
    pub certified_positive: bool,
}

impl MonomialUnitForm {
    pub fn monomial_text(&self, vars: &VarSet) -> String {
        let parts: Vec<String> = self
            .exponents
            .iter()
            .enumerate()
            .filter(|(_, &e)| e > 0)
            .map(|(i, &e)| if e == 1 { vars.name(i).to_string() } else { format!("{}^{}", vars.name(i), e) })
            .collect();
        if parts.is_empty() { "1".into() } else { parts.join("*") }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind")]
pub enum Monomialization {
    Form(MonomialUnitForm),
    NotMonomialized { cofactor: Polynomial, reason: String },
}

impl Monomialization {
    pub fn form(&self) -> Option<&MonomialUnitForm> {
        match self {
            Monomialization::Form(f) => Some(f),
            Monomialization::NotMonomialized { .. } => None,
        }
    }
}

pub const UNIT_SAMPLES: usize = 4096;

/// Factors out the monomial content and tests the cofactor for being a
/// unit: nonzero constant term and no sign change over `UNIT_SAMPLES`
/// deterministic points of the box.
pub fn to_monomial_unit(f: &Polynomial, bounds: &[(f64, f64)]) -> Result<Monomialization, BlowupError> {
    if f.is_zero() {
        return Err(BlowupError::ZeroPolynomial);
    }
    if bounds.len() != f.num_vars() {
        return Err(SymError::DimensionMismatch {
            expected: f.num_vars(),
            got: bounds.len(),
        }
        .into());
    }
    let exponents = f.monomial_content();
    let cofactor = f.div_monomial(&exponents).expect("content divides");
    let c0 = cofactor.constant_term();
    if num_traits::Zero::is_zero(&c0) {
        return Ok(Monomialization::NotMonomialized {
            cofactor,
            reason: "cofactor vanishes at the origin".into(),
        });
    }
    let sign: i8 = if num_traits::Signed::is_negative(&c0) { -1 } else { 1 };
    let unit = if sign < 0 { -&cofactor } else { cofactor.clone() };
    let fast = unit.to_fast();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut point = vec![0.0; bounds.len()];
    let mut all_positive = true;
    for _ in 0..UNIT_SAMPLES {
        for (x, &(lo, hi)) in point.iter_mut().zip(bounds) {
            *x = lo + rng.gen::<f64>() * (hi - lo);
        }
        let val = fast.eval(&point);
        if val < 0.0 {
            return Ok(Monomialization::NotMonomialized {
                cofactor,
                reason: format!("cofactor changes sign on the box (e.g. at {point:?})"),
            });
        }
        all_positive &= val > 0.0;
    }
    Ok(Monomialization::Form(MonomialUnitForm {
        sign,
        exponents,
        unit,
        certified_positive: all_positive,
    }))
}

/// The default box `[-1, 1]^n`.
pub fn unit_box(n: usize) -> Vec<(f64, f64)> {
    vec![(-1.0, 1.0); n]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symcore::parse;

    #[test]
    fn chart_naming() {
        let v = VarSet::parse("x,y,z").unwrap();
        let c = Center::from_names(&v, &["y", "z"]).unwrap();
        let ch = make_chart(&c, 1, &v).unwrap();
        assert_eq!(ch.target().names(), &["x", "y", "xi_z"]);
        assert_eq!(ch.images()[2].to_string(), "y*xi_z");
        assert!(make_chart(&c, 0, &v).is_err());

        let c1 = Center::from_names(&v, &["x"]).unwrap();
        let ch = make_chart(&c1, 0, &v).unwrap();
        assert!(ch.is_codim_one());
        assert_eq!(ch.target(), &v);
        assert!(ch.to_string().contains("identity"));
    }

    #[test]
    fn step_names() {
        assert_eq!(step_name("y", 1), "y_1");
        assert_eq!(step_name("y_1", 2), "y_2");
        assert_eq!(step_name("xi_z", 3), "xi_z_3");
        assert_eq!(step_name("_7", 3), "_7_3");
    }

    #[test]
    fn repeated_schedule_round_trips() {
        let s = Schedule::repeated(&["x", "y"], "x", 3);
        assert_eq!(s.to_string(), "blowup center=x,y pivot=x\nblowup center=x,y_1 pivot=x\nblowup center=x,y_2 pivot=x\n");
        assert_eq!(Schedule::parse(&s.to_string()).unwrap(), s);
        assert!(Schedule::parse("blowup center=x").is_err());
        assert!(Schedule::parse("blow center=x pivot=x").is_err());
        assert_eq!(Schedule::parse("# nothing\n\n").unwrap().steps.len(), 0);
    }

    #[test]
    fn unit_form_examples() {
        let v = VarSet::parse("x,y").unwrap();
        let m = to_monomial_unit(&parse("-x^2*y^4", &v).unwrap(), &unit_box(2)).unwrap();
        let f = m.form().unwrap();
        assert_eq!((f.sign, f.exponents.clone()), (-1, vec![2, 4]));
        assert_eq!(f.unit, Polynomial::one(&v));
        assert!(f.certified_positive);
        assert!(to_monomial_unit(&parse("x^4+y^2", &v).unwrap(), &unit_box(2)).unwrap().form().is_none());
        assert!(to_monomial_unit(&parse("x*(1-2*y)", &v).unwrap(), &unit_box(2)).unwrap().form().is_none());
    }
}
