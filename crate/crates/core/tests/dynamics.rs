use proptest::prelude::*;
use weaklog::dynamics::{
    epsilon_family, holonomy, integrate, laloy, limit_curve_evidence, stability_probe, step_halving, DynError,
    FamilyConfig, IntegrateConfig, KineticMetric, MechanicalSystem, Method, PotentialSpec, StabilityConfig,
};
use weaklog::symcore::{parse, PolyVectorField, VarSet};

fn system(u: &str, vars: &str, metric: KineticMetric) -> (MechanicalSystem, VarSet) {
    let v = VarSet::parse(vars).unwrap();
    let s = MechanicalSystem::new(PotentialSpec::Polynomial(parse(u, &v).unwrap()), metric).unwrap();
    (s, v)
}

fn three_metrics() -> Vec<KineticMetric> {
    vec![
        KineticMetric::Identity,
        KineticMetric::diagonal(&[1.0, 2.0, 3.0]).unwrap(),
        KineticMetric::random_spd(3, 7),
    ]
}

#[test]
fn free_motion_is_a_straight_line() {
    let (s, _) = system("0", "x,y", KineticMetric::Identity);
    let cfg = IntegrateConfig { dt: 1e-2, t_end: 5.0, ..Default::default() };
    let tr = integrate(&s, &[1.0, 2.0], &[0.5, -1.0], &cfg).unwrap();
    assert_eq!(tr.method, Method::Verlet);
    assert_eq!(tr.len(), 501);
    for k in 0..tr.len() {
        let t = tr.times[k];
        let x = tr.position(k);
        assert!((x[0] - (1.0 + 0.5 * t)).abs() < 1e-12 && (x[1] - (2.0 - t)).abs() < 1e-12);
    }
    assert_eq!(tr.drift, 0.0);
    assert!(tr.conservative);
    let csv = tr.to_csv();
    assert!(csv.starts_with("tau,x1,x2,v1,v2,energy,U\n"));
    assert_eq!(csv.lines().count(), 502);
}

/// Upward zero crossings of x(t), linearly interpolated.
fn crossings(times: &[f64], xs: &[f64]) -> Vec<f64> {
    let mut out = Vec::new();
    for k in 1..xs.len() {
        if xs[k - 1] < 0.0 && xs[k] >= 0.0 {
            let f = -xs[k - 1] / (xs[k] - xs[k - 1]);
            out.push(times[k - 1] + f * (times[k] - times[k - 1]));
        }
    }
    out
}

#[test]
fn harmonic_period() {
    // ẍ = −2x: period 2π/√2.
    let (s, _) = system("x^2", "x", KineticMetric::Identity);
    let expected = 2.0 * std::f64::consts::PI / 2f64.sqrt();
    for method in [Method::Verlet, Method::Rk4] {
        let cfg = IntegrateConfig { dt: 1e-4, t_end: 20.0, method: Some(method), ..Default::default() };
        let tr = integrate(&s, &[0.0], &[1.0], &cfg).unwrap();
        let c = crossings(&tr.times, &tr.positions);
        assert!(c.len() >= 3);
        for w in c.windows(2) {
            assert!((w[1] - w[0] - expected).abs() < 1e-4, "{method:?}: {}", w[1] - w[0]);
        }
    }
}

#[test]
fn energy_drift_and_halving_order() {
    let (s, _) = system("x^2+y^2+x^4", "x,y", KineticMetric::Identity);
    let (x0, v0) = ([0.3, -0.2], [0.1, 0.4]);
    let cfg = IntegrateConfig { dt: 1e-3, t_end: 10.0, ..Default::default() };
    let h = step_halving(&s, &x0, &v0, &cfg).unwrap();
    assert!(h.drift_dt <= 1e-6, "verlet drift {}", h.drift_dt);
    assert!((3.0..=5.0).contains(&h.drift_ratio), "verlet ratio {}", h.drift_ratio);
    assert!(h.position_error < 1e-5);

    let cfg = IntegrateConfig { method: Some(Method::Rk4), ..cfg };
    let h = step_halving(&s, &x0, &v0, &cfg).unwrap();
    assert!(h.drift_dt <= 1e-5, "rk4 drift {}", h.drift_dt);
    // At dt = 1e-3 the RK4 energy error sits at round-off; the order shows at a coarse step.
    let coarse = IntegrateConfig { dt: 0.05, ..cfg };
    let h = step_halving(&s, &x0, &v0, &coarse).unwrap();
    assert!((12.0..=40.0).contains(&h.drift_ratio), "rk4 ratio {}", h.drift_ratio);
}

#[test]
fn verlet_rejects_position_dependent_metric() {
    let v = VarSet::parse("x,y").unwrap();
    let g = vec![
        vec![parse("1", &v).unwrap(), parse("0", &v).unwrap()],
        vec![parse("0", &v).unwrap(), parse("1+x^2", &v).unwrap()],
    ];
    let s = MechanicalSystem::new(PotentialSpec::Polynomial(parse("y^2", &v).unwrap()), KineticMetric::polynomial(g).unwrap()).unwrap();
    assert_eq!(Method::auto(&s), Method::Rk4);
    let cfg = IntegrateConfig { method: Some(Method::Verlet), ..Default::default() };
    assert_eq!(integrate(&s, &[0.0, 0.0], &[1.0, 0.0], &cfg).unwrap_err(), DynError::VerletNeedsConstantMetric);
}

#[test]
fn z_axis_family_is_exact_under_three_metrics() {
    for metric in three_metrics() {
        let (s, v) = system("x^2+y^2", "x,y,z", metric.clone());
        let field = PolyVectorField::parse("x,2*y,1", &v).unwrap();
        let rep = epsilon_family(&s, &[0.0; 3], &field, &FamilyConfig::default()).unwrap();
        let gzz = s.metric_at(&[0.0; 3]).unwrap()[(2, 2)];
        assert!((rep.v_norm - gzz.sqrt()).abs() < 1e-12);
        assert_eq!(rep.members.len(), 9);
        for m in &rep.members {
            // The z-axis is force-free and invariant: x(τ) = (0, 0, τ).
            let tr = &m.trajectory;
            for k in 0..tr.len() {
                let x = tr.position(k);
                assert!(x[0].abs() < 1e-12 && x[1].abs() < 1e-12 && (x[2] - tr.times[k]).abs() < 1e-9);
            }
            let t = m.escape_time.expect("escape");
            assert!((t - 0.5 / gzz.sqrt()).abs() < 1e-9, "{}: {t}", metric.label());
            assert!(m.lemma1_speed_ok && m.lemma1_potential_ok);
            assert!((m.max_speed - rep.v_norm).abs() < 1e-12);
            assert_eq!(m.max_u, 0.0);
            assert!(m.halving_ok && m.conservative && m.lipschitz_ok);
            assert!((m.holonomy_slope - gzz).abs() < 1e-9);
        }
        let ev = limit_curve_evidence(&rep).unwrap();
        assert!(ev.distances.iter().all(|&d| d < 1e-9));
        assert!(ev.cauchy_trend);
    }
}

#[test]
fn x2y2_family_escapes_along_the_axis() {
    for metric in three_metrics() {
        let (s, v) = system("x^2*y^2", "x,y,z", metric.clone());
        let field = PolyVectorField::parse("1,0,0", &v).unwrap();
        let rep = epsilon_family(&s, &[0.0; 3], &field, &FamilyConfig::default()).unwrap();
        assert!(rep.all_escape() && rep.lemma1_ok(), "{}", metric.label());
        let gxx = s.metric_at(&[0.0; 3]).unwrap()[(0, 0)];
        for m in &rep.members {
            assert!(m.escape_time.unwrap() <= 1.0);
            assert!((m.escape_time.unwrap() - 0.5 / gxx.sqrt()).abs() < 1e-9);
        }
        assert!(rep.pairwise_sup_distance.iter().all(|&d| d < 1e-9));
    }
}

#[test]
fn polynomial_metric_family_uses_rk4() {
    let v = VarSet::parse("x,y").unwrap();
    let g = vec![
        vec![parse("1", &v).unwrap(), parse("0", &v).unwrap()],
        vec![parse("0", &v).unwrap(), parse("1+x^2", &v).unwrap()],
    ];
    let s = MechanicalSystem::new(PotentialSpec::Polynomial(parse("x^2*y^2", &v).unwrap()), KineticMetric::polynomial(g).unwrap()).unwrap();
    let field = PolyVectorField::parse("1,0", &v).unwrap();
    let cfg = FamilyConfig { eps: vec![1.0, 0.5, 0.25], ..Default::default() };
    let rep = epsilon_family(&s, &[0.0, 0.0], &field, &cfg).unwrap();
    for m in &rep.members {
        assert_eq!(m.trajectory.method, Method::Rk4);
        assert!((m.escape_time.unwrap() - 0.5).abs() < 1e-9);
    }
}

#[test]
fn generic_family_bounds_and_slope() {
    // U = x²(x²+y²) vanishes on the y-axis; V(p) is transverse to it.
    let (s, v) = system("x^2*(x^2+y^2)", "x,y", KineticMetric::Identity);
    let field = PolyVectorField::parse("1+y,x-1", &v).unwrap();
    let p = [0.0, 0.5];
    let rep = epsilon_family(&s, &p, &field, &FamilyConfig::default()).unwrap();
    let target = rep.v_norm * rep.v_norm;
    assert!((target - 3.25).abs() < 1e-12);
    for m in &rep.members {
        assert!(m.lemma1_speed_ok, "eps {}: {} > {}", m.eps, m.max_speed, m.speed_bound);
        assert!(m.lemma1_potential_ok, "eps {}: {} > {}", m.eps, m.max_u, m.u_bound);
        assert!((m.holonomy_slope - target).abs() < 1e-3, "eps {}: {}", m.eps, m.holonomy_slope);
        assert!(m.lipschitz_ok);
        assert!(m.halving_ok, "eps {}: {:?}", m.eps, m.halving_error);
        assert_eq!(m.holonomy[0], 0.0);
    }
    let ev = limit_curve_evidence(&rep).unwrap();
    assert_eq!(ev.distances.len(), 8);
    assert!(ev.finest_max_u <= ev.finest_u_bound + 1e-9);

    // The report holonomy agrees with the standalone functional on the grid.
    let m = &rep.members[2];
    let y = holonomy(&m.trajectory, &field, &s).unwrap();
    for (a, b) in y.iter().zip(&m.holonomy).step_by(50) {
        assert!((a - b).abs() < 1e-3 * (1.0 + b.abs()), "{a} vs {b}");
    }
}

#[test]
fn time_rescaling_equivalence() {
    let (s, v) = system("x^2*(x^2+y^2)", "x,y", KineticMetric::Identity);
    let field = PolyVectorField::parse("1,3/10", &v).unwrap();
    let p = [0.0, 0.5];
    let eps = 0.25;
    let cfg = FamilyConfig { eps: vec![eps], halving_check: false, ..Default::default() };
    let rep = epsilon_family(&s, &p, &field, &cfg).unwrap();
    let m = &rep.members[0];
    // Unscaled: ẋ(0) = εV(p), t = τ/ε, dt_t = dt_τ/ε.
    let stride = m.trajectory.record_stride;
    let icfg = IntegrateConfig {
        dt: m.dt / eps,
        t_end: cfg.t_rescaled / eps,
        record_stride: stride,
        ..Default::default()
    };
    let tr = integrate(&s, &p, &[eps, 0.3 * eps], &icfg).unwrap();
    assert_eq!(tr.len(), m.trajectory.len());
    for k in 0..tr.len() {
        for (a, b) in tr.position(k).iter().zip(m.trajectory.position(k)) {
            assert!((a - b).abs() < 1e-9, "k {k}: {a} vs {b}");
        }
    }
}

#[test]
fn families_are_deterministic() {
    let (s, v) = system("x^2*(x^2+y^2)", "x,y", KineticMetric::random_spd(2, 3));
    let field = PolyVectorField::parse("1,y", &v).unwrap();
    let cfg = FamilyConfig { eps: vec![1.0, 0.5, 0.25, 0.125], ..Default::default() };
    let a = epsilon_family(&s, &[0.0, 0.2], &field, &cfg).unwrap();
    let b = epsilon_family(&s, &[0.0, 0.2], &field, &cfg).unwrap();
    assert_eq!(a, b);
    for (ma, mb) in a.members.iter().zip(&b.members) {
        assert!(ma.trajectory.positions.iter().zip(&mb.trajectory.positions).all(|(x, y)| x.to_bits() == y.to_bits()));
    }
}

#[test]
fn family_preconditions() {
    let (s, v) = system("x^2+y^2", "x,y,z", KineticMetric::Identity);
    let field = PolyVectorField::parse("x,2*y,1", &v).unwrap();
    let cfg = FamilyConfig::default();
    assert!(matches!(epsilon_family(&s, &[1.0, 0.0, 0.0], &field, &cfg), Err(DynError::NotOnZeroLocus(_))));
    let zero_at_p = PolyVectorField::parse("x,y,z", &v).unwrap();
    assert_eq!(epsilon_family(&s, &[0.0; 3], &zero_at_p, &cfg).unwrap_err(), DynError::ZeroField);
    let short = FamilyConfig { eps: vec![1.0, 0.5], halving_check: false, ..cfg };
    let rep = epsilon_family(&s, &[0.0; 3], &field, &short).unwrap();
    assert!(limit_curve_evidence(&rep).is_err());
}

#[test]
fn holonomy_oracles() {
    let (s, v) = system("0", "x,y", KineticMetric::diagonal(&[1.0, 3.0]).unwrap());
    let cfg = IntegrateConfig { dt: 1e-2, t_end: 2.0, ..Default::default() };
    let tr = integrate(&s, &[0.0, 0.0], &[0.5, 2.0], &cfg).unwrap();
    // ⟨(2, -1), (0.5, 2)⟩_g = 1 − 6 = −5.
    let y = holonomy(&tr, &PolyVectorField::parse("2,-1", &v).unwrap(), &s).unwrap();
    assert_eq!(y[0], 0.0);
    for (k, yk) in y.iter().enumerate() {
        assert!((yk + 5.0 * tr.times[k]).abs() < 1e-12);
    }
    let y = holonomy(&tr, &PolyVectorField::zero(&v), &s).unwrap();
    assert!(y.iter().all(|&z| z == 0.0));
}

#[test]
fn wintner_is_trapped_in_the_first_well() {
    let s = MechanicalSystem::new(PotentialSpec::Wintner, KineticMetric::Identity).unwrap();
    let cfg = StabilityConfig { energies: vec![1e-6], t_long: 1e3, dt: 1e-3, ..Default::default() };
    let rep = stability_probe(&s, &[0.0], &cfg).unwrap();
    let pr = &rep.probes[0];
    assert_eq!(pr.members.len(), 2);
    assert_eq!(pr.trapped, Some(true), "{rep}\n{:?}", pr.members);
    for m in &pr.members {
        let (lo, hi) = m.barriers.as_ref().unwrap()[0];
        assert!(hi > 0.6 && hi < 0.66 && (lo + hi).abs() < 1e-12);
        assert!(m.coord_max[0] <= hi && m.coord_min[0] >= lo);
        // It does travel: the well is wide at this energy.
        assert!(m.max_excursion > 0.3);
    }
}

#[test]
fn laloy_coordinates_are_trapped_separately() {
    assert_eq!(laloy(0.0, 0.0), 0.0);
    let s = MechanicalSystem::new(PotentialSpec::Laloy, KineticMetric::Identity).unwrap();
    let cfg = StabilityConfig { energies: vec![1e-6, 1e-5], t_long: 1e2, dt: 1e-3, bundle: 8, ..Default::default() };
    let rep = stability_probe(&s, &[0.0, 0.0], &cfg).unwrap();
    for pr in &rep.probes {
        assert_eq!(pr.trapped, Some(true), "energy {}", pr.energy);
        for m in &pr.members {
            let ce = m.coord_energy.as_ref().unwrap();
            assert!((ce.iter().sum::<f64>() - pr.energy).abs() < 1e-15);
        }
    }
    assert!(rep.to_string().contains("not a proof"));
}

#[test]
fn free_axis_excursion_grows_linearly() {
    let (s, _) = system("x^2+y^2", "x,y,z", KineticMetric::Identity);
    let cfg = StabilityConfig { energies: vec![1e-6], t_long: 100.0, dt: 1e-2, bundle: 6, ..Default::default() };
    let rep = stability_probe(&s, &[0.0; 3], &cfg).unwrap();
    let pr = &rep.probes[0];
    assert_eq!(pr.trapped, None);
    let speed = (2e-6f64).sqrt();
    assert!((pr.max_excursion - speed * 100.0).abs() < 1e-9);
    assert!((pr.excursion_growth - 2.0).abs() < 1e-6);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn verlet_conserves_energy(a in 2u32..12, b in 2u32..12, c in 0u32..8,
                               x0 in prop::array::uniform2(-0.5f64..0.5), v0 in prop::array::uniform2(-0.5f64..0.5)) {
        let v = VarSet::parse("x,y").unwrap();
        let u = parse(&format!("{a}/4*x^2+{b}/4*y^2+{c}/4*x^2*y^2"), &v).unwrap();
        let s = MechanicalSystem::new(PotentialSpec::Polynomial(u), KineticMetric::Identity).unwrap();
        let cfg = IntegrateConfig { dt: 1e-3, t_end: 2.0, record_stride: 100, ..Default::default() };
        let tr = integrate(&s, &x0, &v0, &cfg).unwrap();
        prop_assert!(tr.drift <= 1e-6, "drift {}", tr.drift);
        let again = integrate(&s, &x0, &v0, &cfg).unwrap();
        prop_assert_eq!(tr, again);
    }

    #[test]
    fn lemma1_bounds_hold(a in 1u32..8, vx in 1i32..8, vy in -6i32..6, py in -0.5f64..0.5) {
        // U = a·x²(x² + y² + 1) vanishes exactly on the y-axis.
        let v = VarSet::parse("x,y").unwrap();
        let u = parse(&format!("{a}/4*x^2*(x^2+y^2+1)"), &v).unwrap();
        let s = MechanicalSystem::new(PotentialSpec::Polynomial(u), KineticMetric::Identity).unwrap();
        let field = PolyVectorField::parse(&format!("{vx}/5,{vy}/5"), &v).unwrap();
        let cfg = FamilyConfig { eps: vec![1.0, 0.25, 0.0625], t_rescaled: 1.0, halving_check: false, ..Default::default() };
        let rep = epsilon_family(&s, &[0.0, py], &field, &cfg).unwrap();
        for m in &rep.members {
            prop_assert!(m.lemma1_speed_ok && m.lemma1_potential_ok && m.lipschitz_ok);
            prop_assert!((m.holonomy_slope - rep.v_norm.powi(2)).abs() < 1e-3);
        }
    }
}
