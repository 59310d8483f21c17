use std::collections::BTreeMap;

use proptest::prelude::*;
use weaklog::symcore::{
    apply_field, euler_field, int, parse, quasi_homogeneity, rat, PolyVectorField, Polynomial, Rational, VarSet,
    WeightVector,
};

fn vars(n: usize) -> VarSet {
    VarSet::new(["x", "y", "z", "w"].iter().take(n).map(|s| s.to_string())).unwrap()
}

fn poly(n: usize, max_deg: u32) -> impl Strategy<Value = Polynomial> {
    prop::collection::vec((prop::collection::vec(0..=max_deg, n), -9i64..=9, 1i64..=4), 0..6).prop_map(move |ts| {
        let v = vars(n);
        Polynomial::from_terms(
            &v,
            ts.into_iter().map(|(mut e, c, d)| {
                while e.iter().sum::<u32>() > max_deg {
                    let k = e.iter().position(|&x| x > 0).unwrap();
                    e[k] -= 1;
                }
                (e, rat(c, d))
            }),
        )
        .unwrap()
    })
}

fn field(n: usize, max_deg: u32) -> impl Strategy<Value = PolyVectorField> {
    prop::collection::vec(poly(n, max_deg), n).prop_map(move |c| PolyVectorField::new(&vars(n), c).unwrap())
}

fn rational_point(n: usize) -> impl Strategy<Value = Vec<Rational>> {
    prop::collection::vec((-20i64..=20, 1i64..=7), n).prop_map(|v| v.into_iter().map(|(a, b)| rat(a, b)).collect())
}

#[test]
fn spec_examples() {
    let v = VarSet::parse("x,y").unwrap();
    let a = parse("x^2+y^2", &v).unwrap();
    let b = parse("x^2", &v).unwrap();
    assert_eq!(&a * &b, parse("x^4+x^2*y^2", &v).unwrap());
    assert_eq!(&a + &Polynomial::zero(&v), a);
    assert_eq!(&parse("x+y", &v).unwrap() * &parse("x-y", &v).unwrap(), parse("x^2-y^2", &v).unwrap());

    let u = parse("x^4+x^2*y^2", &v).unwrap();
    assert_eq!(u.partial(0).unwrap(), parse("4*x^3+2*x*y^2", &v).unwrap());
    assert_eq!(a.eval_rational(&[int(3), int(4)]).unwrap(), int(25));
    assert_eq!(parse("x^2*y^2", &v).unwrap().eval_rational(&[rat(1, 2), rat(1, 3)]).unwrap(), rat(1, 36));

    let v3 = VarSet::parse("x,y,z").unwrap();
    assert!(parse("x^2+y^2", &v3).unwrap().partial(2).unwrap().is_zero());
    let f = parse("x^4+y^4-z^6", &v3).unwrap();
    assert_eq!(f.scale(&int(12)).exact_divide(&f).unwrap(), Some(Polynomial::constant(&v3, int(12))));
    let q = parse("2*x^2+4*y^2", &v3).unwrap();
    assert_eq!(q.exact_divide(&parse("x^2+y^2", &v3).unwrap()).unwrap(), None);
    assert_eq!(u.exact_divide(&a).unwrap(), Some(b));
}

#[test]
fn partial_matches_finite_differences() {
    // ∂_y(x²y²) = 2x²y against a central difference at rational points.
    let v = VarSet::parse("x,y").unwrap();
    let f = parse("x^2*y^2", &v).unwrap();
    let df = f.partial(1).unwrap();
    assert_eq!(df, parse("2*x^2*y", &v).unwrap());
    let points = [(1, 3, 2, 5), (-7, 2, 9, 4), (5, 1, -1, 3), (3, 7, 8, 3), (-2, 9, -9, 2), (11, 4, 1, 6), (4, 3, 4, 3), (-1, 1, 1, 1), (6, 5, -3, 7), (2, 9, 7, 2)];
    for (a, b, c, d) in points {
        let (x, y) = (a as f64 / b as f64, c as f64 / d as f64);
        let h = 1e-5;
        let fd = (f.eval_f64(&[x, y + h]).unwrap() - f.eval_f64(&[x, y - h]).unwrap()) / (2.0 * h);
        let exact = df.eval_f64(&[x, y]).unwrap();
        assert!((fd - exact).abs() <= 1e-9 * exact.abs().max(1.0), "{fd} vs {exact}");
    }
}

#[test]
fn substitution_identity_and_errors() {
    let v = VarSet::parse("x,y").unwrap();
    let p = parse("x^3-2*x*y+1/5", &v).unwrap();
    assert_eq!(p.substitute(&BTreeMap::new()).unwrap(), p);
    let other = VarSet::parse("s,t").unwrap();
    let mut m = BTreeMap::new();
    m.insert(0, parse("s", &other).unwrap());
    m.insert(1, Polynomial::var(&v, 0).unwrap());
    assert!(p.substitute(&m).is_err());
}

#[test]
fn euler_weights_three_three_two() {
    let v = VarSet::parse("x,y,z").unwrap();
    let w = WeightVector::from_integers(&[3, 3, 2], 12);
    let e = euler_field(&v, &w).unwrap();
    let u = parse("x^4+y^4-z^6", &v).unwrap();
    assert_eq!(apply_field(&e, &u).unwrap(), u.scale(&int(12)));
    assert_eq!(euler_field(&VarSet::parse("x,y").unwrap(), &WeightVector::from_integers(&[1, 1], 2)).unwrap().to_string(), "(x, y)");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ring_axioms((n, p, q, r) in (1usize..=4).prop_flat_map(|n| (Just(n), poly(n, 6), poly(n, 6), poly(n, 6)))) {
        prop_assert_eq!(&(&p + &q) + &r, &p + &(&q + &r));
        prop_assert_eq!(&(&p * &q) * &r, &p * &(&q * &r));
        prop_assert_eq!(&p * &(&q + &r), &(&p * &q) + &(&p * &r));
        prop_assert_eq!(&p + &q, &q + &p);
        prop_assert_eq!(&p * &q, &q * &p);
        prop_assert!((&p - &p).is_zero());
        prop_assert_eq!(&p * &Polynomial::one(&vars(n)), p.clone());
        prop_assert_eq!(p.pow(2), &p * &p);
    }

    #[test]
    fn derivation_laws(v in field(3, 3), w in field(3, 3), f in poly(3, 4), g in poly(3, 4), c in -5i64..=5) {
        let fg = &f * &g;
        prop_assert_eq!(apply_field(&v, &fg).unwrap(), &(&apply_field(&v, &f).unwrap() * &g) + &(&f * &apply_field(&v, &g).unwrap()));
        let lin_f = &f.scale(&int(c)) + &g;
        prop_assert_eq!(apply_field(&v, &lin_f).unwrap(), &apply_field(&v, &f).unwrap().scale(&int(c)) + &apply_field(&v, &g).unwrap());
        let vw = v.checked_add(&w).unwrap();
        prop_assert_eq!(apply_field(&vw, &f).unwrap(), &apply_field(&v, &f).unwrap() + &apply_field(&w, &f).unwrap());
    }

    #[test]
    fn exact_divide_complete_and_sound(q in poly(3, 5), u in poly(3, 5), extra in poly(3, 2)) {
        prop_assume!(!u.is_zero());
        let prod = &q * &u;
        prop_assert_eq!(prod.exact_divide(&u).unwrap(), Some(q.clone()));
        let shifted = &prod + &extra;
        if let Some(k) = shifted.exact_divide(&u).unwrap() {
            prop_assert_eq!(&k * &u, shifted);
        }
    }

    #[test]
    fn substitution_commutes_with_evaluation(p in poly(3, 4), images in prop::collection::vec(poly(2, 3), 3), pts in prop::collection::vec(rational_point(2), 20)) {
        let target = vars(2);
        let images: Vec<Polynomial> = images.into_iter().map(|i| i.embed(&target).unwrap()).collect();
        let composed = p.substitute_all(&images).unwrap();
        for x in pts {
            let inner: Vec<Rational> = images.iter().map(|i| i.eval_rational(&x).unwrap()).collect();
            prop_assert_eq!(composed.eval_rational(&x).unwrap(), p.eval_rational(&inner).unwrap());
        }
    }

    #[test]
    fn euler_identity_holds(weights in prop::collection::vec(1u32..=4, 3), total in 2u32..=10, picks in prop::collection::vec((0usize..50, -6i64..=6), 1..5)) {
        let v = vars(3);
        let mut mons = Vec::new();
        for a in 0..=total {
            for b in 0..=total {
                for c in 0..=total {
                    if a * weights[0] + b * weights[1] + c * weights[2] == total {
                        mons.push(vec![a, b, c]);
                    }
                }
            }
        }
        prop_assume!(!mons.is_empty());
        let f = Polynomial::from_terms(&v, picks.iter().map(|&(k, c)| (mons[k % mons.len()].clone(), int(c)))).unwrap();
        prop_assume!(!f.is_zero());
        if let Some(w) = quasi_homogeneity(&f) {
            prop_assert!(w.validates(&f));
            let e = euler_field(&v, &w).unwrap();
            prop_assert_eq!(apply_field(&e, &f).unwrap(), f.scale(&w.total));
        } else {
            prop_assert!(false, "weights exist by construction");
        }
    }

    #[test]
    fn parse_format_round_trip(p in poly(4, 5)) {
        prop_assert_eq!(parse(&p.to_string(), p.vars()).unwrap(), p);
    }
}
