use qcurves::descent::*;
use qcurves::ellcurve::Equation;
use qcurves::heckechar::{Mu8, HeckeError};
use qcurves::quadfield::{Field, SplitKind};

fn levels(eq: Equation, d: u64) -> Vec<String> {
    level_candidates(eq, d).unwrap().level_candidates.iter().map(|l| l.factored.clone()).collect()
}

#[test]
fn first_equation_levels() {
    assert_eq!(levels(Equation::Eq24p, 5), ["2^6·5^2", "2^8·5^2"]);
    assert_eq!(levels(Equation::Eq24p, 6), ["2^8·3", "2^9·3"]);
    assert_eq!(levels(Equation::Eq24p, 7), ["2·7^2", "2^8·7^2"]);
    let d5 = level_candidates(Equation::Eq24p, 5).unwrap();
    assert_eq!((d5.epsilon.order, d5.epsilon.conductor), (4, 20));
    let d7 = level_candidates(Equation::Eq24p, 7).unwrap();
    assert_eq!((d7.epsilon.order, d7.epsilon.conductor), (1, 1));
    assert!(!d5.twist_variants.is_empty());
    // Before the twist trick the 2-exponent ranges over 2..6 and 8.
    assert_eq!(d5.exponents[0].exponents, [2, 3, 4, 5, 6, 8]);
}

#[test]
fn second_equation_levels() {
    assert_eq!(levels(Equation::Benchen, 5), ["2^4·3^2·5^2", "2^4·3^3·5^2"]);
    assert_eq!(levels(Equation::Benchen, 6), ["2^8·3^5"]);
    assert_eq!(levels(Equation::Benchen, 7), ["2·3·7^2", "2^2·3·7^2", "2·3^3·7^2", "2^2·3^3·7^2"]);
    let d6 = level_candidates(Equation::Benchen, 6).unwrap();
    assert_eq!(d6.epsilon.conductor, 12);
    let d7 = level_candidates(Equation::Benchen, 7).unwrap();
    assert!(d7.flags.iter().any(|f| f.contains("at 2")));
}

#[test]
fn bianchi_levels_for_d2() {
    let d2 = level_candidates(Equation::Benchen, 2).unwrap();
    assert_eq!(d2.bianchi_levels.unwrap().join(", "), "3(1+√−2), 3(1−√−2), 9, 27");
    assert!(level_candidates(Equation::Benchen, 5).unwrap().bianchi_levels.is_none());
}

#[test]
fn exponent_menus_by_splitting() {
    // Menus at 2 for the first equation, over all small d.
    for d in 1..80u64 {
        let Ok(f) = Field::new(d as i64) else { continue };
        let Ok(dd) = level_candidates(Equation::Eq24p, d) else { continue };
        let e2: Vec<u32> = dd.level_candidates.iter().map(|l| qcurves::arith::val_u64(l.n, 2)).collect();
        let kind = qcurves::quadfield::split_prime(&f, 2).kind;
        let want: Vec<u32> = match kind {
            SplitKind::Split => vec![1, 8],
            SplitKind::Inert => vec![8],
            SplitKind::Ramified if d % 2 == 0 => vec![8, 9],
            SplitKind::Ramified => vec![6, 8],
        };
        assert_eq!(e2, want, "d={}", d);
        // Odd part: q for Q3, q² for Q1, Q5, Q7.
        for l in &dd.level_candidates {
            assert_eq!(l.n >> l.n.trailing_zeros(), odd_level_by_classes(d), "d={}", d);
        }
    }
    for d in [1u64, 2, 5, 6, 7, 10, 11, 13, 14, 15, 19, 21, 22, 23, 30, 31, 35, 39, 42] {
        let f = Field::new(d as i64).unwrap();
        let dd = match level_candidates(Equation::Benchen, d) {
            Ok(x) => x,
            Err(DescentError::Character(HeckeError::Unsupported(_))) => continue,
            Err(e) => panic!("d={} {:?}", d, e),
        };
        let a: std::collections::BTreeSet<u32> = dd.level_candidates.iter().map(|l| qcurves::arith::val_u64(l.n, 2)).collect();
        let b: std::collections::BTreeSet<u32> = dd.level_candidates.iter().map(|l| qcurves::arith::val_u64(l.n, 3)).collect();
        let want_a: Vec<u32> = match qcurves::quadfield::split_prime(&f, 2).kind {
            SplitKind::Inert => vec![2],
            SplitKind::Split => vec![1, 2],
            SplitKind::Ramified if d % 2 == 0 => vec![8],
            SplitKind::Ramified => vec![4],
        };
        let want_b: Vec<u32> = match qcurves::quadfield::split_prime(&f, 3).kind {
            SplitKind::Split => vec![2, 3],
            SplitKind::Inert => vec![1, 3],
            SplitKind::Ramified => vec![5],
        };
        assert_eq!(a.into_iter().collect::<Vec<_>>(), want_a, "d={}", d);
        assert_eq!(b.into_iter().collect::<Vec<_>>(), want_b, "d={}", d);
    }
}

#[test]
fn nebentypus_conductor_divides_level() {
    for eq in [Equation::Eq24p, Equation::Benchen] {
        for d in [1u64, 2, 3, 5, 6, 7] {
            if eq == Equation::Benchen && d == 3 {
                continue;
            }
            let dd = level_candidates(eq, d).unwrap();
            for l in &dd.level_candidates {
                assert_eq!(l.n % dd.epsilon.conductor, 0, "{:?} d={} {}", eq, d, l);
            }
        }
    }
}

#[test]
fn induction_formula() {
    // Odd ramified prime, good reduction, χ of conductor 𝔮: q².
    let v = twist_exponent(LocalRep::Good, 1, 2);
    assert_eq!(descended_exponent(SplitKind::Ramified, 1, 1, v), 2);
    assert_eq!(descended_exponent(SplitKind::Ramified, 1, 1, twist_exponent(LocalRep::Good, 0, 1)), 1);
    // Inert 3 with an order-4 tame type twisted by an order-4 character.
    assert_eq!(twist_exponent(LocalRep::Tame { inertia_order: 4 }, 1, 4), 1);
    assert_eq!(induced_exponent(2, 0, 8), 16);
}

#[test]
fn trace_hint() {
    let h = coeff_field_trace_hint(5, 0, Mu8::I, Mu8::MINUS_I, 11).unwrap();
    assert_eq!(h, CyclotomicInt([0, 0, -22, 0]));
    let h = coeff_field_trace_hint(7, 3, Mu8::ONE, Mu8::ONE, 5).unwrap();
    assert_eq!(h.to_string(), "13");
    assert!(coeff_field_trace_hint(7, 3, Mu8::ONE, Mu8::ONE, 2).is_err());
    let d5 = level_candidates(Equation::Benchen, 5).unwrap();
    assert_eq!(d5.coeff_field_contains, ["√−1", "√−2"]);
}

mod against_tate {
    use super::*;
    use proptest::prelude::*;
    use qcurves::ellcurve::FreyInput;
    use qcurves::localred::{prime_above, tate};

    // Non-split primes, where the local types do not depend on C being a
    // high power.
    fn check(eq: Equation, d: u64, a: i64, b: i64) -> Result<(), TestCaseError> {
        let input = FreyInput::new(eq, d as i64, a, b);
        prop_assume!(input.is_primitive() && a != 0 && b != 0);
        let curve = input.curve().unwrap();
        let f = Field::new(d as i64).unwrap();
        let mut ps: Vec<u64> = qcurves::arith::factor_u64(d).iter().map(|x| x.0).collect();
        ps.push(2);
        if eq == Equation::Benchen {
            ps.push(3);
        }
        ps.sort();
        ps.dedup();
        // v_q(Cᵖ) must be 0 or at least p; small inputs can only meet the first.
        let cp = input.cp();
        for &p in &ps {
            let split = qcurves::quadfield::split_prime(&f, p).kind == SplitKind::Split;
            prop_assume!(split || qcurves::arith::val_big(&cp, p) == 0);
        }
        for p in ps {
            if qcurves::quadfield::split_prime(&f, p).kind == SplitKind::Split {
                continue;
            }
            let r = tate(&curve, &prime_above(&f, p, 0));
            let menu: Vec<u32> = frey_local_types(eq, d, p).iter().map(|t| t.exponent()).collect();
            prop_assert!(menu.contains(&r.f), "{:?} d={} A={} B={} p={}: f={} menu {:?}", eq, d, a, b, p, r.f, menu);
        }
        Ok(())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]
        #[test]
        fn first_equation(di in 0usize..6, a in -300i64..300, b in -300i64..300) {
            let d = [1u64, 2, 5, 6, 3, 11][di];
            check(Equation::Eq24p, d, a, b)?;
        }

        #[test]
        fn second_equation(di in 0usize..7, a in -300i64..300, b in -60i64..60) {
            let d = [2u64, 5, 6, 3, 11, 10, 13][di];
            check(Equation::Benchen, d, a, b)?;
        }
    }
}
