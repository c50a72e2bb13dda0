use proptest::prelude::*;
use qcurves::quadfield::*;

fn field() -> impl Strategy<Value = Field> {
    prop::sample::select(vec![1i64, 2, 3, 5, 6, 7, 10, 11, 14, 15, 23, 26, 30, 35, 47, 105])
        .prop_map(|d| Field::new(d).unwrap())
}

fn elt(f: Field) -> impl Strategy<Value = QuadElement> {
    (-60i64..60, -60i64..60, prop::sample::select(vec![1i64, 2, 3, 4, 6, 9]))
        .prop_filter("nonzero", |(a, b, _)| *a != 0 || *b != 0)
        .prop_map(move |(a, b, den)| {
            QuadElement::new(f.d, a.into(), b.into(), den.into())
        })
}

fn primes_of(f: &Field) -> Vec<PrimeIdeal> {
    [2u64, 3, 5, 7, 11, 13]
        .iter()
        .flat_map(|&p| split_prime(f, p).primes_above)
        .collect()
}

proptest! {
    #[test]
    fn field_ops_roundtrip((f, x, y) in field().prop_flat_map(|f| (Just(f), elt(f), elt(f)))) {
        prop_assert_eq!(&(&x + &y) - &y, x.clone());
        prop_assert_eq!((&x * &y).div(&y).unwrap(), x.clone());
        let (n1, d1) = x.norm();
        let (n2, d2) = y.norm();
        let (n, d) = (&x * &y).norm();
        prop_assert_eq!(n * d1 * d2, n1 * n2 * d);
        let _ = f;
    }

    #[test]
    fn valuation_is_additive((f, x, y) in field().prop_flat_map(|f| (Just(f), elt(f), elt(f)))) {
        for p in primes_of(&f) {
            let vx = p.valuation(&x).unwrap();
            let vy = p.valuation(&y).unwrap();
            prop_assert_eq!(p.valuation(&(&x * &y)).unwrap(), vx + vy);
            let s = &x + &y;
            if !s.is_zero() {
                prop_assert!(p.valuation(&s).unwrap() >= vx.min(vy));
            }
            // Sum over primes above p recovers the p-adic valuation of the norm.
        }
        for q in [2u64, 3, 5, 7, 11, 13] {
            let sd = split_prime(&f, q);
            let tot: i64 = sd.primes_above.iter().map(|p| p.f() as i64 * p.valuation(&x).unwrap()).sum();
            let (n, d) = x.norm();
            let vn = qcurves::arith::val_big(&n, q) as i64 - qcurves::arith::val_big(&d, q) as i64;
            prop_assert_eq!(tot, vn);
        }
    }

    #[test]
    fn reduction_is_a_homomorphism((f, x, y) in field().prop_flat_map(|f| (Just(f), elt(f), elt(f)))) {
        for p in primes_of(&f) {
            let rf = p.residue_field();
            if let (Some(rx), Some(ry)) = (p.reduce(&x), p.reduce(&y)) {
                prop_assert_eq!(p.reduce(&(&x * &y)).unwrap(), rf.mul(rx, ry));
                prop_assert_eq!(p.reduce(&(&x + &y)).unwrap(), rf.add(rx, ry));
                prop_assert_eq!(rx == (0, 0), p.valuation(&x).unwrap() > 0);
                prop_assert_eq!(p.reduce(&p.lift(rx)).unwrap(), rx);
            }
        }
    }

    #[test]
    fn form_composition_matches_ideal_product(f in field(), i in 0usize..40, j in 0usize..40) {
        let ideals = ideals_up_to(&f, 30);
        let a = ideals[i % ideals.len()];
        let b = ideals[j % ideals.len()];
        let ab = a.mul(&f, &b);
        prop_assert_eq!(ab.norm, a.norm * b.norm);
        prop_assert_eq!(compose_forms(ideal_class(&f, &a), ideal_class(&f, &b)), ideal_class(&f, &ab));
        let principal = ideal_class(&f, &ab) == identity_form(f.disc);
        prop_assert_eq!(principal, principal_generator(&f, &ab).is_some());
        if let Some(g) = principal_generator(&f, &ab) {
            prop_assert_eq!(QuadIdeal::principal(&f, &g), ab);
        }
    }

    #[test]
    fn class_group_logs_are_consistent(f in field()) {
        let cg = class_group_avoiding(&f, 30);
        prop_assert_eq!(cg.dlog.len(), cg.h);
        let prod: u32 = cg.orders.iter().product();
        prop_assert_eq!(prod as usize, cg.h);
        for t in two_torsion_ideals(&f) {
            prop_assert!(cg.element_order(&t) <= 2);
        }
        for g in &cg.gens {
            prop_assert!(30 % g.p != 0);
        }
        for (form, exps) in &cg.dlog {
            let mut acc = identity_form(f.disc);
            for (g, &e) in cg.gens.iter().zip(exps) {
                for _ in 0..e {
                    acc = compose_forms(acc, ideal_class(&f, &g.ideal));
                }
            }
            prop_assert_eq!(acc, *form);
        }
    }
}
