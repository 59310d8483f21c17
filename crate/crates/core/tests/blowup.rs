use proptest::prelude::*;
use weaklog::blowup::{
    make_chart, pullback_field, pushout_field, run_schedule, strict_transform, to_monomial_unit, total_transform,
    unit_box, BlowupChart, BlowupError, Center, Schedule,
};
use weaklog::logcheck::check_logarithmic;
use weaklog::symcore::{int, parse, PolyVectorField, Polynomial, RationalVectorField, VarSet};

fn chart(vars: &str, center: &[&str], pivot: &str) -> BlowupChart {
    let v = VarSet::parse(vars).unwrap();
    let c = Center::from_names(&v, center).unwrap();
    make_chart(&c, v.index_of(pivot).unwrap(), &v).unwrap()
}

#[test]
fn cone_becomes_cylinder() {
    let ch = chart("x,y,z", &["x", "y", "z"], "x");
    let f = parse("y^2+z^2-x^2", ch.source()).unwrap();
    let t = strict_transform(&f, &ch).unwrap();
    assert_eq!(t.exceptional_exponent, 2);
    assert_eq!(t.strict, parse("xi_y^2+xi_z^2-1", ch.target()).unwrap());
    assert_eq!(t.total, parse("x^2*xi_y^2+x^2*xi_z^2-x^2", ch.target()).unwrap());
    assert_eq!(t.strict.to_string(), "xi_y^2 + xi_z^2 - 1");
}

#[test]
fn center_off_locus_keeps_everything() {
    let ch = chart("x,y,z", &["x", "y"], "x");
    let f = parse("1+x*y", ch.source()).unwrap();
    let t = strict_transform(&f, &ch).unwrap();
    assert_eq!(t.exceptional_exponent, 0);
    assert_eq!(t.strict, t.total);
    let c = Polynomial::constant(ch.source(), int(5));
    assert_eq!(total_transform(&c, &ch).unwrap(), Polynomial::constant(ch.target(), int(5)));
}

#[test]
fn sextic_three_step_principalization() {
    let v = VarSet::parse("x,y,z").unwrap();
    let u = parse("x^6+y^2", &v).unwrap();
    let sched = Schedule::parse("blowup center=x,y pivot=x\nblowup center=x,y_1 pivot=x # again\nblowup center=x,y_2 pivot=x\n").unwrap();
    let trace = run_schedule(&u, &sched).unwrap();
    let expected = [
        ("x,y_1,z", "x^2*(x^4+y_1^2)", 2, "x^4+y_1^2"),
        ("x,y_2,z", "x^4*(x^2+y_2^2)", 4, "x^2+y_2^2"),
        ("x,y_3,z", "x^6*(1+y_3^2)", 6, "1+y_3^2"),
    ];
    for (step, (vars, total, d, strict)) in trace.steps.iter().zip(expected) {
        let cv = VarSet::parse(vars).unwrap();
        assert_eq!(step.vars, cv);
        assert_eq!(step.total, parse(total, &cv).unwrap());
        assert_eq!(step.exceptional_exponent, d);
        assert_eq!(step.strict, parse(strict, &cv).unwrap());
    }
    let m = to_monomial_unit(trace.final_total(), &unit_box(3)).unwrap();
    let form = m.form().expect("monomialized");
    assert_eq!(form.exponents, vec![6, 0, 0]);
    assert_eq!(form.sign, 1);
    assert!(form.certified_positive);
    assert_eq!(form.unit, parse("1+y_3^2", trace.final_total().vars()).unwrap());

    // The intermediate chart is not yet principal.
    assert!(to_monomial_unit(&trace.steps[0].strict, &unit_box(3)).unwrap().form().is_none());
}

#[test]
fn schedule_edge_cases() {
    let v = VarSet::parse("x,y").unwrap();
    let u = parse("x^3*y", &v).unwrap();
    let trace = run_schedule(&u, &Schedule::default()).unwrap();
    assert!(trace.steps.is_empty());
    assert_eq!(to_monomial_unit(trace.final_total(), &unit_box(2)).unwrap().form().unwrap().exponents, vec![3, 1]);

    let bad = Schedule::parse("blowup center=x,y pivot=x\nblowup center=x,y pivot=x").unwrap();
    match run_schedule(&u, &bad) {
        Err(BlowupError::InvalidStep { step, .. }) => assert_eq!(step, 2),
        other => panic!("{other:?}"),
    }
    let bad = Schedule::parse("blowup center=x pivot=y").unwrap();
    assert!(matches!(run_schedule(&u, &bad), Err(BlowupError::InvalidStep { step: 1, .. })));

    let v3 = VarSet::parse("x,y,z").unwrap();
    let trace = run_schedule(&parse("x^2+y^2", &v3).unwrap(), &Schedule::parse("blowup center=x,y pivot=x").unwrap()).unwrap();
    let cv = &trace.steps[0].vars;
    assert_eq!(trace.steps[0].total, parse("x^2*(1+y_1^2)", cv).unwrap());
    assert!(to_monomial_unit(&trace.steps[0].strict, &unit_box(3)).unwrap().form().unwrap().certified_positive);
}

#[test]
fn cylinder_field_pullback_and_back() {
    let ch = chart("x,y,z", &["x", "y"], "x");
    let v = PolyVectorField::parse("x,2*y,1", ch.source()).unwrap();
    let up = pullback_field(&v, &ch).unwrap();
    // Chain rule: ξ' = (y'x − y x')/x² = (2y·x − y·x)/x² = ξ.
    assert_eq!(up, PolyVectorField::parse("x,xi_y,1", ch.target()).unwrap());
    let down = pushout_field(&up.into(), &ch).unwrap();
    assert_eq!(down.polynomial, Some(v));
}

#[test]
fn non_tangent_fields_rejected() {
    let ch = chart("x,y,z", &["x", "y"], "x");
    let v = PolyVectorField::parse("1,0,0", ch.source()).unwrap();
    assert!(matches!(pullback_field(&v, &ch), Err(BlowupError::NotTangent(_))));
    let w = PolyVectorField::parse("1,0,0", ch.target()).unwrap();
    assert!(matches!(pushout_field(&w.into(), &ch), Err(BlowupError::NotTangentToExceptional(_))));
}

/// The four generator identities for center {y1,y2,y3} ⊂ R⁴, pivot y1.
#[test]
fn generator_table() {
    let ch = chart("y1,y2,y3,w", &["y1", "y2", "y3"], "y1");
    let (s, t) = (ch.source(), ch.target());
    assert_eq!(t.names(), &["y1", "xi_y2", "xi_y3", "w"]);

    // (1) (y_j ∂_{y_i})* = ξ_j ∂_{ξ_i}, i, j ≠ pivot, and ξ_pivot = 1.
    let v = PolyVectorField::parse("0,y3,0,0", s).unwrap();
    assert_eq!(pullback_field(&v, &ch).unwrap(), PolyVectorField::parse("0,xi_y3,0,0", t).unwrap());
    let v = PolyVectorField::parse("0,y1,0,0", s).unwrap();
    assert_eq!(pullback_field(&v, &ch).unwrap(), PolyVectorField::parse("0,1,0,0", t).unwrap());

    // (2) (y_j ∂_{y_1})* = ξ_j (y_1 ∂_{y_1} − Σ ξ_i ∂_{ξ_i}).
    let v = PolyVectorField::parse("y2,0,0,0", s).unwrap();
    assert_eq!(
        pullback_field(&v, &ch).unwrap(),
        PolyVectorField::parse("xi_y2*y1,-xi_y2*xi_y2,-xi_y2*xi_y3,0", t).unwrap()
    );

    // (3) (∂_{ξ_i})_* = y_1 ∂_{y_i}.
    let w = PolyVectorField::parse("0,0,1,0", t).unwrap();
    assert_eq!(pushout_field(&w.into(), &ch).unwrap().polynomial, Some(PolyVectorField::parse("0,0,y1,0", s).unwrap()));

    // (4) (y_1 ∂_{y_1})_* = Σ_{i ∈ center} y_i ∂_{y_i}.
    let w = PolyVectorField::parse("y1,0,0,0", t).unwrap();
    assert_eq!(pushout_field(&w.into(), &ch).unwrap().polynomial, Some(PolyVectorField::parse("y1,y2,y3,0", s).unwrap()));
}

#[test]
fn pushout_can_be_rational() {
    let ch = chart("x,y", &["x", "y"], "x");
    // ξ² ∂_ξ pushes down to x·(y/x)² ∂_y = y²/x ∂_y.
    let w = PolyVectorField::parse("0,xi_y^2", ch.target()).unwrap();
    let out = pushout_field(&RationalVectorField::from(w), &ch).unwrap();
    assert!(out.polynomial.is_none());
    assert_eq!(out.field.component(1).eval_f64(&[2.0, 3.0]).unwrap(), 4.5);
}

// ---- random instances -------------------------------------------------------

fn var_names(n: usize) -> VarSet {
    VarSet::new(["x", "y", "z", "w"].iter().take(n).map(|s| s.to_string())).unwrap()
}

fn poly_terms(n: usize, max_deg: u32) -> impl Strategy<Value = Vec<(Vec<u32>, i64)>> {
    prop::collection::vec((prop::collection::vec(0..=max_deg, n), -5i64..=5), 0..5).prop_map(move |ts| {
        ts.into_iter()
            .map(|(mut e, c)| {
                // Cap total degree.
                while e.iter().sum::<u32>() > max_deg {
                    let k = e.iter().position(|&x| x > 0).unwrap();
                    e[k] -= 1;
                }
                (e, c)
            })
            .collect()
    })
}

fn to_poly(vars: &VarSet, terms: &[(Vec<u32>, i64)]) -> Polynomial {
    Polynomial::from_terms(vars, terms.iter().map(|(e, c)| (e.clone(), int(*c)))).unwrap()
}

/// Random field tangent to a random center: subtract each center
/// component's restriction to the center.
#[derive(Debug, Clone)]
struct TangentCase {
    n: usize,
    center: Vec<usize>,
    pivot: usize,
    comps: Vec<Vec<(Vec<u32>, i64)>>,
}

impl TangentCase {
    fn build(&self) -> (BlowupChart, PolyVectorField) {
        let vars = var_names(self.n);
        let c = Center::new(self.center.clone(), self.n).unwrap();
        let ch = make_chart(&c, self.pivot, &vars).unwrap();
        let comps = self
            .comps
            .iter()
            .enumerate()
            .map(|(i, t)| {
                let p = to_poly(&vars, t);
                if c.contains(i) {
                    &p - &p.restrict_to_zero(&self.center)
                } else {
                    p
                }
            })
            .collect();
        (ch, PolyVectorField::new(&vars, comps).unwrap())
    }
}

fn tangent_case() -> impl Strategy<Value = TangentCase> {
    (1usize..=4)
        .prop_flat_map(|n| {
            let center = prop::sample::subsequence((0..n).collect::<Vec<_>>(), 1..=n);
            (Just(n), center, prop::collection::vec(poly_terms(n, 3), n))
        })
        .prop_flat_map(|(n, center, comps)| {
            let k = center.len();
            (Just(n), Just(center), 0..k, Just(comps))
        })
        .prop_map(|(n, center, pk, comps)| TangentCase {
            n,
            pivot: center[pk],
            center,
            comps,
        })
}

/// Finite-difference Jacobian of π at `q` applied to `w`.
fn push_vector(ch: &BlowupChart, q: &[f64], w: &[f64]) -> Vec<f64> {
    let h = 1e-6;
    let plus: Vec<f64> = q.iter().zip(w).map(|(a, b)| a + h * b).collect();
    let minus: Vec<f64> = q.iter().zip(w).map(|(a, b)| a - h * b).collect();
    let (fp, fm) = (ch.map_point(&plus), ch.map_point(&minus));
    fp.iter().zip(&fm).map(|(a, b)| (a - b) / (2.0 * h)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn pushout_inverts_pullback(case in tangent_case()) {
        let (ch, v) = case.build();
        prop_assert!(v.is_tangent_to_center(&case.center));
        let up = pullback_field(&v, &ch).unwrap();
        let down = pushout_field(&up.into(), &ch).unwrap();
        prop_assert_eq!(down.polynomial, Some(v));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn pullback_projects_to_field(case in tangent_case(), pts in prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 4), 20)) {
        let (ch, v) = case.build();
        let up = pullback_field(&v, &ch).unwrap();
        for p in pts {
            let mut q: Vec<f64> = p[..case.n].to_vec();
            if q[case.pivot].abs() < 0.1 {
                q[case.pivot] = 0.1f64.copysign(q[case.pivot] + 1e-300);
            }
            let w = up.eval_f64(&q).unwrap();
            let lhs = push_vector(&ch, &q, &w);
            let rhs = v.eval_f64(&ch.map_point(&q)).unwrap();
            for (a, b) in lhs.iter().zip(&rhs) {
                prop_assert!((a - b).abs() <= 1e-6 * (1.0 + b.abs()), "{a} vs {b}");
            }
        }
    }

    #[test]
    fn transforms_are_multiplicative(
        a in poly_terms(3, 4), b in poly_terms(3, 4), pk in 0usize..2,
    ) {
        let vars = var_names(3);
        let (f, g) = (to_poly(&vars, &a), to_poly(&vars, &b));
        prop_assume!(!f.is_zero() && !g.is_zero());
        let ch = make_chart(&Center::new([0, 1], 3).unwrap(), pk, &vars).unwrap();
        let (tf, tg) = (strict_transform(&f, &ch).unwrap(), strict_transform(&g, &ch).unwrap());
        let tfg = strict_transform(&(&f * &g), &ch).unwrap();
        prop_assert_eq!(&tfg.total, &(&tf.total * &tg.total));
        prop_assert_eq!(tfg.exceptional_exponent, tf.exceptional_exponent + tg.exceptional_exponent);
        prop_assert_eq!(&tfg.strict, &(&tf.strict * &tg.strict));
        // Exactness: pivot^d · strict = total, and strict has a pivot-free term.
        let mut e = vec![0; 3];
        e[pk] = tf.exceptional_exponent;
        prop_assert_eq!(tf.strict.mul_monomial(&e), tf.total.clone());
        prop_assert!(tf.strict.terms().any(|(m, _)| m.exps()[pk] == 0));
    }
}

// ---- logarithmic transport --------------------------------------------------

/// Quasi-homogeneous U with weights `w`, and V = q·E_w + x_c·r·(U_j ∂_i − U_i ∂_j)
/// with `c` in the center, so V(U) = λ·q·U and V is tangent to the center.
#[derive(Debug, Clone)]
struct TransportCase {
    weights: Vec<u32>,
    degree: u32,
    picks: Vec<(usize, i64)>,
    q: Vec<(Vec<u32>, i64)>,
    r: Vec<(Vec<u32>, i64)>,
    center: Vec<usize>,
    pivot: usize,
    ij: (usize, usize),
}

fn exponents_of_weight(w: &[u32], target: u32) -> Vec<Vec<u32>> {
    fn go(w: &[u32], target: u32, acc: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if acc.len() == w.len() {
            let s: u32 = acc.iter().zip(w).map(|(a, b)| a * b).sum();
            if s == target {
                out.push(acc.clone());
            }
            return;
        }
        let wi = w[acc.len()];
        for e in 0..=target / wi {
            acc.push(e);
            go(w, target, acc, out);
            acc.pop();
        }
    }
    let mut out = Vec::new();
    go(w, target, &mut Vec::new(), &mut out);
    out
}

fn transport_case() -> impl Strategy<Value = TransportCase> {
    (
        prop::collection::vec(1u32..=3, 3),
        4u32..=8,
        prop::collection::vec((0usize..64, -3i64..=3), 1..4),
        poly_terms(3, 2),
        poly_terms(3, 1),
        prop::sample::subsequence(vec![0usize, 1, 2], 2..=3),
        0usize..3,
        (0usize..3, 0usize..3),
    )
        .prop_map(|(weights, degree, picks, q, r, center, pk, ij)| TransportCase {
            weights,
            degree,
            picks,
            q,
            r,
            pivot: center[pk % center.len()],
            center,
            ij,
        })
}

impl TransportCase {
    fn build(&self) -> Option<(BlowupChart, PolyVectorField, Polynomial, Polynomial)> {
        let vars = var_names(3);
        let mons = exponents_of_weight(&self.weights, self.degree);
        if mons.is_empty() {
            return None;
        }
        let u = Polynomial::from_terms(&vars, self.picks.iter().map(|&(k, c)| (mons[k % mons.len()].clone(), int(c)))).unwrap();
        if u.is_zero() {
            return None;
        }
        let q = to_poly(&vars, &self.q);
        let r = to_poly(&vars, &self.r);
        let euler: Vec<Polynomial> = (0..3)
            .map(|i| Polynomial::var(&vars, i).unwrap().scale(&int(self.weights[i] as i64)))
            .collect();
        let mut comps: Vec<Polynomial> = euler.iter().map(|e| e * &q).collect();
        let (i, j) = self.ij;
        if i != j {
            let xc = Polynomial::var(&vars, self.center[0]).unwrap();
            let k = &xc * &r;
            comps[i] = &comps[i] + &(&k * &u.partial(j).unwrap());
            comps[j] = &comps[j] - &(&k * &u.partial(i).unwrap());
        }
        let v = PolyVectorField::new(&vars, comps).unwrap();
        let p = q.scale(&int(self.degree as i64));
        let c = Center::new(self.center.clone(), 3).unwrap();
        let ch = make_chart(&c, self.pivot, &vars).unwrap();
        Some((ch, v, u, p))
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn logarithmic_status_survives_pullback(case in transport_case()) {
        let Some((ch, v, u, p)) = case.build() else {
            return Ok(());
        };
        let verdict = check_logarithmic(&v, &u).unwrap();
        prop_assert_eq!(verdict.multiplier(), Some(&p));
        prop_assert!(v.is_tangent_to_center(&case.center));
        let up = pullback_field(&v, &ch).unwrap();
        let u_up = total_transform(&u, &ch).unwrap();
        let p_up = total_transform(&p, &ch).unwrap();
        let lifted = check_logarithmic(&up, &u_up).unwrap();
        prop_assert_eq!(lifted.multiplier(), Some(&p_up));
    }
}
