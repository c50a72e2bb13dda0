use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use proptest::prelude::*;
use qcurves::arith::{is_prime, kronecker, primes_up_to};
use qcurves::eliminate::*;
use qcurves::ellcurve::Equation;
use qcurves::heckechar::Mu8;
use std::collections::{BTreeMap, BTreeSet};

fn fixture(name: &str) -> Vec<NewformRecord> {
    let path = format!("{}/fixtures/{}", env!("CARGO_MANIFEST_DIR"), name);
    load_newforms(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn rational_form(label: &str, level: u64, a: &[(u64, i64)]) -> NewformRecord {
    NewformRecord {
        label: label.into(),
        level,
        neben: CharSpec::trivial(),
        field_minpoly: vec![0, 1],
        eigenvalues: a.iter().map(|&(q, v)| (q, vec![v])).collect(),
        has_cm: false,
    }
}

fn set(v: &[i64]) -> BTreeSet<i64> {
    v.iter().copied().collect()
}

#[test]
fn kraus_bounds() {
    let k = kraus_bound(5, 2);
    assert_eq!((k.ell, k.raw_bound, k.modulus_used), (241, 273, 80));
    assert!((271..=273).contains(&k.raw_bound));
    assert!((k.raw_bound + 1..277).all(|n| !is_prime(n)));
    let k = kraus_bound(7, 2);
    assert_eq!((k.ell, k.raw_bound, k.modulus_used), (113, 135, 112));
    assert_eq!(stated_kraus_threshold(7, 2), Some(137));
    let k = kraus_bound(2, 3);
    assert_eq!((k.ell, k.modulus_used), (19, 9));
    let first = (k.raw_bound + 1..).find(|&n| is_prime(n)).unwrap();
    assert!(first > 23, "smallest admissible prime {}", first);
    for (d, t) in [(1u64, 2u64), (3, 2), (5, 3), (7, 3), (10, 2), (11, 3)] {
        let k = kraus_bound(d, t);
        assert_eq!(k.ell % k.modulus_used, 1);
        assert!(is_prime(k.ell));
        let disc = qcurves::quadfield::Field::new(d as i64).unwrap().disc;
        assert_eq!(kronecker(disc, k.ell as i64), 1);
        // floor(ℓ + 1 + 2√ℓ) without floating point
        let r = k.raw_bound - k.ell - 1;
        assert!(r * r <= 4 * k.ell && (r + 1) * (r + 1) > 4 * k.ell);
    }
}

#[test]
fn ellenberg_constants() {
    let table = [(2, 353), (3, 137), (5, 439), (6, 569), (7, 137)];
    for (d, n) in table {
        assert_eq!(ellenberg_floor(d, false).unwrap(), n);
        assert_eq!(ellenberg_floor(d, true).unwrap(), 11);
    }
    assert!(matches!(ellenberg_floor(10, false), Err(EliminateError::NoData(10))));
    assert!(ellenberg_floor(1, false).is_err());
}

/// Direct count on y² = x³ + a₂x² + a₄x over F_p.
fn naive_trace(p: i64, a2: i64, a4: i64) -> i64 {
    let mut n = 1;
    for x in 0..p {
        for y in 0..p {
            if (y * y - x * x * x - a2 * x * x - a4 * x).rem_euclid(p) == 0 {
                n += 1;
            }
        }
    }
    p + 1 - n
}

#[test]
fn cm_curve_trace_by_direct_count() {
    // A = 1, B = 0 over Q(i): y² = x³ + 4x² + 2x, and 5 splits.
    let want = naive_trace(5, 4, 2);
    for which in 0..2 {
        assert_eq!(frey_trace(Equation::Eq24p, 1, 1, 0, 5, which).unwrap(), want);
    }
    for p in [13i64, 17, 29, 37] {
        assert_eq!(frey_trace(Equation::Eq24p, 1, 1, 0, p as u64, 0).unwrap(), naive_trace(p, 4, 2));
    }
}

/// Traces of the second Frey curve over F_q[r]/(r² + d), by enumeration.
fn naive_benchen_traces(d: i64, q: i64) -> BTreeMap<(i64, i64), i64> {
    let mul = |x: (i64, i64), y: (i64, i64)| ((x.0 * y.0 - d * x.1 * y.1).rem_euclid(q), (x.0 * y.1 + x.1 * y.0).rem_euclid(q));
    let add = |x: (i64, i64), y: (i64, i64)| ((x.0 + y.0).rem_euclid(q), (x.1 + y.1).rem_euclid(q));
    let elems: Vec<(i64, i64)> = (0..q).flat_map(|a| (0..q).map(move |b| (a, b))).collect();
    let mut out = BTreeMap::new();
    for a in 0..q {
        for b in 0..q {
            if (a, b) == (0, 0) {
                continue;
            }
            // y² + 6√−d·B·xy − 4d(A + B³√−d)·y = x³
            let a1 = (0, 6 * b);
            let a3 = ((-4 * d * a).rem_euclid(q), (-4 * d * b * b * b).rem_euclid(q));
            let mut n = 1;
            for &x in &elems {
                let x3 = mul(mul(x, x), x);
                for &y in &elems {
                    if add(add(mul(y, y), mul(mul(a1, x), y)), mul(a3, y)) == x3 {
                        n += 1;
                    }
                }
            }
            out.insert((a, b), q * q + 1 - n);
        }
    }
    out
}

#[test]
fn a5_fingerprint_d2() {
    let got = trace_fingerprint(Equation::Benchen, 2, 5).unwrap();
    let naive = naive_benchen_traces(2, 5);
    let ctx = Context::new(Equation::Benchen, 2).unwrap();
    for p in frey_data(&ctx, 5).unwrap() {
        let PairCase::Inert { trace, .. } = p.case else { panic!("5 is inert in Q(√−2)") };
        assert_eq!(trace, naive[&(p.a as i64, p.b as i64)], "({}, {})", p.a, p.b);
    }
    assert_eq!(got, set(&[-10, -7, 2]));
    // Contained in the published set; 0 is listed there but never occurs.
    assert!(got.is_subset(&set(&[2, 0, -7, -10])));
}

#[test]
fn additive_prime_is_an_error() {
    // Type IV* at the prime above 7 | d.
    let e = frey_trace(Equation::Benchen, 7, 1, 1, 7, 0).unwrap_err();
    assert!(e.to_string().contains("case-3"), "{}", e);
}

#[test]
fn d7_rational_form() {
    let forms = fixture("d7_level98.json");
    let ctx = Context::new(Equation::Eq24p, 7).unwrap();
    let g = forms.iter().find(|f| f.label == "98.a").unwrap();
    let data = frey_data(&ctx, 3).unwrap();
    let c = mazur_c(g, &ctx, 3, &data).unwrap();
    assert!(!c.is_zero());
    assert_eq!(c.primes(), vec![BigInt::from(2)]);
    let r = eliminate_form(g, &ctx, &[3]).unwrap();
    assert_eq!(r.mazur_survivors.as_u64().unwrap(), vec![2, 3]);
    // The Q(√2) orbit matches some residue pair at q = 3.
    let h = forms.iter().find(|f| f.label == "98.b").unwrap();
    assert!(mazur_c(h, &ctx, 3, &data).unwrap().is_zero());
}

#[test]
fn mazur_case_formulas() {
    // d = 7: χ quadratic, ε trivial; rational g, so every norm is a 4th power.
    let ctx = Context::new(Equation::Eq24p, 7).unwrap();
    let g = rational_form("g", 98, &[(11, 3), (3, 1)]);
    for p in frey_data(&ctx, 11).unwrap() {
        let b = mazur_b(&g, &ctx, 11, &p).unwrap();
        let want: BigInt = match p.case {
            PairCase::Split { traces, chi } => (0..2)
                .map(|i| {
                    let s = if chi[i] == Mu8::ONE { 1 } else { -1 };
                    BigInt::from(s * traces[i] - 3).pow(4)
                })
                .product(),
            PairCase::Divides => BigInt::from(144 - 9).pow(4),
            PairCase::Inert { .. } => panic!("11 splits in Q(√−7)"),
        };
        assert_eq!(b, want, "({}, {})", p.a, p.b);
    }
    for p in frey_data(&ctx, 3).unwrap() {
        let PairCase::Inert { trace, chi } = p.case else { panic!("3 is inert") };
        let s = if chi == Mu8::ONE { 1 } else { -1 };
        assert_eq!(mazur_b(&g, &ctx, 3, &p).unwrap(), BigInt::from(1 - s * trace - 6).pow(4));
    }
}

#[test]
fn form_matching_the_frey_family_is_not_eliminated() {
    let ctx = Context::new(Equation::Eq24p, 7).unwrap();
    let qs = [11u64, 23, 29];
    let a: Vec<(u64, i64)> = qs
        .iter()
        .map(|&q| match frey_case_for(&ctx, q, 1, 1).unwrap() {
            PairCase::Split { traces, chi } => (q, if chi[0] == Mu8::ONE { traces[0] } else { -traces[0] }),
            other => panic!("{:?}", other),
        })
        .collect();
    let g = rational_form("frey-like", 98, &a);
    let r = eliminate_form(&g, &ctx, &qs).unwrap();
    assert_eq!(r.mazur_survivors, Survivors::All);
    assert_eq!(r.surviving_primes, Survivors::All);
    assert!(r.method_notes.iter().any(|n| n.contains("not eliminated")));
    assert!(r.per_q.iter().all(|c| c.value().is_zero()));
}

#[test]
fn trivial_b_gives_no_information() {
    // C = 1 when every B is 1: nothing divides it, so only q itself survives.
    let c = CValue { q: 5, pairs: 24, zero_pairs: vec![], factorization: vec![] };
    assert_eq!(c.value(), BigInt::from(1));
    assert!(c.primes().is_empty());
}

#[test]
fn cm_raising() {
    let mut g = rational_form("cm", 98, &[(3, 0)]);
    g.has_cm = true;
    assert_eq!(cm_raising_check(&g, Mu8::ONE, 3).unwrap(), vec![BigInt::from(2)]);
    // Q(√−1) with a₃ = 1 + i and ε(3) = −1: N(−16 − 2i) over F ⊗ Q(ζ₈).
    let h = NewformRecord {
        label: "h".into(),
        level: 20,
        neben: CharSpec { modulus: 4, zeta_order: 2, values: vec![(3, 1)] },
        field_minpoly: vec![1, 0, 1],
        eigenvalues: [(3, vec![1, 1])].into(),
        has_cm: true,
    };
    let ps = cm_raising_check(&h, Mu8::MINUS_ONE, 3).unwrap();
    // |−16 − 2i|² = 260 = 2²·5·13
    assert_eq!(ps, [2, 5, 13].map(BigInt::from).to_vec());
    let alg = TensorAlgebra::new(&h.field_minpoly);
    let a = alg.from_field(&[1, 1]);
    let e = alg.sub(&alg.from_mu8(Mu8::MINUS_ONE, &BigInt::from(16)), &alg.mul(&a, &a));
    let exact = alg.norm(&e).to_f64().unwrap();
    assert!((exact - alg.norm_numeric(&e)).abs() <= 1e-6 * exact.abs());
    assert_eq!(alg.norm(&e), BigInt::from(260).pow(4));
    assert!(matches!(cm_raising_check(&rational_form("x", 98, &[]), Mu8::ONE, 3), Err(EliminateError::MissingEigenvalue { .. })));
}

#[test]
fn cm_forms_follow_the_multiplicative_prime_branch() {
    let forms = fixture("d6_benchen.json");
    let ctx = Context::new(Equation::Benchen, 6).unwrap();
    let cm = forms.iter().find(|f| f.has_cm).unwrap();
    let r = eliminate_form(cm, &ctx, &[5]).unwrap();
    assert_eq!(r.mazur_survivors, Survivors::Finite(BTreeSet::new()));
    assert_eq!(r.surviving_primes.as_u64().unwrap(), vec![2, 3, 5, 7, 11]);
    // Without a guaranteed multiplicative prime the raising test applies.
    let ctx7 = Context::new(Equation::Eq24p, 7).unwrap();
    let mut g = rational_form("cm7", 98, &[(3, 0), (5, 0)]);
    g.has_cm = true;
    let r = eliminate_form(&g, &ctx7, &[5]).unwrap();
    assert_eq!(r.mazur_survivors.as_u64().unwrap(), vec![2]);
    assert_eq!(r.floors.value, 135);
}

#[test]
fn synthetic_space_against_divisibility_oracle() {
    let forms = fixture("d6_benchen.json");
    let ctx = Context::new(Equation::Benchen, 6).unwrap();
    let qs = [5u64, 11, 13, 17, 19];
    let data = frey_data_for(&ctx, &qs).unwrap();
    let space = eliminate_space(&forms, &ctx, &qs).unwrap();
    let small = primes_up_to(400);
    for (g, r) in forms.iter().zip(&space.forms) {
        if g.has_cm {
            continue;
        }
        // ℓ survives q when ℓ = q or ℓ divides some B(q,g), tested one B at a time.
        let mut expect: Option<BTreeSet<u64>> = None;
        for &q in &qs {
            let bs: Vec<BigInt> = data[&q].iter().map(|p| mazur_b(g, &ctx, q, p).unwrap()).collect();
            if bs.iter().any(|b| b.is_zero()) {
                continue;
            }
            let s: BTreeSet<u64> = small
                .iter()
                .copied()
                .filter(|&l| l == q || bs.iter().any(|b| (b % l).is_zero()))
                .collect();
            expect = Some(match expect {
                None => s,
                Some(e) => e.intersection(&s).copied().collect(),
            });
        }
        let got = r.mazur_survivors.as_u64().unwrap();
        assert!(got.iter().all(|&p| p < 400), "{}: {:?}", g.label, got);
        assert_eq!(got.into_iter().collect::<BTreeSet<_>>(), expect.unwrap(), "{}", g.label);
    }
    assert_eq!(space.surviving_primes.as_u64().unwrap(), vec![2, 3, 5, 7, 11]);
}

#[test]
fn conjugate_primes_agree_after_twisting() {
    // a_𝔮(E)χ(𝔮) = a_𝔮̄(E)χ(𝔮̄), both being a_q(g); the bare traces can differ in sign.
    let mut sign_flips = 0;
    for (eq, d) in [(Equation::Eq24p, 7u64), (Equation::Eq24p, 5), (Equation::Benchen, 6), (Equation::Benchen, 7)] {
        let ctx = Context::new(eq, d).unwrap();
        for q in primes_up_to(40).into_iter().filter(|&q| q > 3 && kronecker(ctx.field.disc, q as i64) == 1) {
            for (a, b) in [(1i64, 1i64), (2, 3), (5, 1), (3, 7)] {
                let PairCase::Split { traces, chi } = frey_case_for(&ctx, q, a, b).unwrap() else { continue };
                let alg = TensorAlgebra::new(&[0, 1]);
                let x = alg.from_mu8(chi[0], &traces[0].into());
                let y = alg.from_mu8(chi[1], &traces[1].into());
                assert_eq!(x, y, "{:?} d={} ({},{}) q={}", eq, d, a, b, q);
                sign_flips += (traces[0] != traces[1]) as usize;
            }
        }
    }
    assert!(sign_flips > 0);
}

#[test]
fn adding_q_never_enlarges_survivors() {
    let forms = fixture("d6_benchen.json");
    let ctx = Context::new(Equation::Benchen, 6).unwrap();
    let qs = [5u64, 7, 11, 13, 17, 19, 23];
    let data = frey_data_for(&ctx, &qs).unwrap();
    for g in forms.iter().filter(|g| !g.has_cm) {
        let mut prev = Survivors::All;
        for k in 1..=qs.len() {
            let r = eliminate_form_with(g, &ctx, &qs[..k], &data).unwrap();
            if let (Survivors::Finite(a), Survivors::Finite(b)) = (&prev, &r.mazur_survivors) {
                assert!(b.is_subset(a), "{} after adding {}", g.label, qs[k - 1]);
            }
            assert!(!(matches!(prev, Survivors::Finite(_)) && r.mazur_survivors == Survivors::All));
            prev = r.mazur_survivors;
        }
    }
}

#[test]
fn input_errors() {
    let ctx = Context::new(Equation::Eq24p, 7).unwrap();
    let g = rational_form("g", 98, &[(3, 2)]);
    assert!(matches!(eliminate_form(&g, &ctx, &[]), Err(EliminateError::EmptyQList)));
    let h = rational_form("h", 98 * 11, &[(11, 2)]);
    assert!(matches!(eliminate_form(&h, &ctx, &[11]), Err(EliminateError::QDividesLevel { q: 11, .. })));
    assert!(matches!(eliminate_form(&g, &ctx, &[7]), Err(EliminateError::BadAuxiliary(7))));
    assert!(matches!(eliminate_form(&g, &ctx, &[11]), Err(EliminateError::MissingEigenvalue { q: 11, .. })));
    let bad_neben = NewformRecord { neben: CharSpec { modulus: 3, zeta_order: 2, values: vec![(2, 1)] }, ..g.clone() };
    let data = frey_data(&ctx, 5).unwrap();
    let mut bn = bad_neben.clone();
    bn.eigenvalues.insert(5, vec![0]);
    assert!(matches!(mazur_c(&bn, &ctx, 5, &data), Err(EliminateError::Neben { q: 5, .. })));

    let ok = r#"[{"label":"x","level":11,"neben":{"modulus":1,"zeta_order":1,"values":[]},
        "field_minpoly":[-2,0,1],"eigenvalues":{"3":[0,1]},"has_cm":false}]"#;
    assert_eq!(load_newforms(ok).unwrap()[0].eigenvalues[&3], vec![0, 1]);
    let hasse = ok.replace("[0,1]}", "[0,3]}");
    assert!(matches!(load_newforms(&hasse), Err(EliminateError::Hasse { q: 3, .. })));
    let nonmonic = ok.replace("[-2,0,1]", "[-2,0,2]");
    assert!(matches!(load_newforms(&nonmonic), Err(EliminateError::Schema { index: 0, .. })));
    let missing = ok.replace(r#""has_cm":false"#, r#""cm":false"#);
    assert!(matches!(load_newforms(&missing), Err(EliminateError::Schema { index: 0, .. })));
    let odd_order = ok.replace(r#""zeta_order":1"#, r#""zeta_order":3"#);
    assert!(matches!(load_newforms(&odd_order), Err(EliminateError::Schema { .. })));
    assert!(matches!(load_newforms("{"), Err(EliminateError::Json(_))));
}

#[test]
fn character_spec() {
    let e = CharSpec { modulus: 12, zeta_order: 2, values: vec![(5, 1), (7, 1)] };
    let eps = qcurves::heckechar::build_epsilon(6, 3).unwrap();
    for n in [1u64, 5, 7, 11, 13, 17, 19, 23] {
        assert_eq!(e.eval(n), eps.eval(n as i64), "n = {}", n);
    }
    assert_eq!(e.eval(6), None);
    let inconsistent = CharSpec { modulus: 5, zeta_order: 4, values: vec![(2, 1), (4, 1)] };
    assert_eq!(inconsistent.eval(2), None);
}

#[test]
fn fixtures_load() {
    let d7 = fixture("d7_level98.json");
    assert_eq!(d7.len(), 2);
    assert!(d7.iter().all(|f| f.level == 98 && !f.has_cm));
    let d6 = fixture("d6_benchen.json");
    assert!(d6.iter().all(|f| f.level == 62208 && f.label.starts_with("synthetic")));
}

fn residue_pairs(q: u64) -> Vec<(u64, u64)> {
    (0..q).flat_map(|a| (0..q).map(move |b| (a, b))).filter(|&p| p != (0, 0)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn norm_matches_embedding_product(
        field in 0usize..4,
        coeffs in proptest::collection::vec(-6i64..7, 16),
    ) {
        let m: &[i64] = [&[0, 1][..], &[1, 0, 1], &[-2, 0, 1], &[-1, -1, 0, 1]][field];
        let alg = TensorAlgebra::new(m);
        let mut e = alg.zero();
        for (i, c) in coeffs.iter().take(alg.dim()).enumerate() {
            e.c[i] = (*c).into();
        }
        let exact = alg.norm(&e).to_f64().unwrap();
        let numeric = alg.norm_numeric(&e);
        prop_assert!((exact - numeric).abs() <= 1e-6 * exact.abs().max(1.0), "{} vs {}", exact, numeric);
    }

    #[test]
    fn b_depends_only_on_residues(
        case in 0usize..4,
        idx in 0usize..1000,
        k in -3i64..4,
        l in -3i64..4,
    ) {
        let (eq, d, q) = [(Equation::Eq24p, 7u64, 11u64), (Equation::Eq24p, 5, 3), (Equation::Benchen, 6, 5), (Equation::Benchen, 7, 5)][case];
        let ctx = Context::new(eq, d).unwrap();
        let (a, b) = residue_pairs(q)[idx % (q * q - 1) as usize];
        let (la, lb) = (a as i64 + k * q as i64, b as i64 + l * q as i64);
        prop_assume!(la != 0 && lb != 0);
        let lifted = frey_case_for(&ctx, q, la, lb).unwrap();
        let data = frey_data(&ctx, q).unwrap();
        let base = data.iter().find(|p| (p.a, p.b) == (a, b)).unwrap();
        prop_assert_eq!(&lifted, &base.case);
        let g = rational_form("g", 1, &[(q, 1)]);
        let pd = PairData { a, b, case: lifted };
        prop_assert_eq!(mazur_b(&g, &ctx, q, &pd).unwrap(), mazur_b(&g, &ctx, q, base).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn hasse_bound(
        case in 0usize..6,
        a in -200i64..200,
        b in 1i64..200,
        qi in 0usize..8,
    ) {
        let (eq, d) = [(Equation::Eq24p, 1u64), (Equation::Eq24p, 5), (Equation::Eq24p, 7), (Equation::Benchen, 2), (Equation::Benchen, 6), (Equation::Benchen, 7)][case];
        let q = [5u64, 11, 13, 17, 19, 23, 29, 31][qi];
        prop_assume!(a != 0 && d % q != 0);
        prop_assume!(eq.lhs(d as i64, &a.into(), &b.into()) % q != BigInt::zero());
        let t = frey_trace(eq, d, a, b, q, 0).unwrap();
        let disc = qcurves::quadfield::Field::new(d as i64).unwrap().disc;
        let nq = if kronecker(disc, q as i64) == 1 { q } else { q * q } as i64;
        prop_assert!(t * t <= 4 * nq, "a = {} over N = {}", t, nq);
    }
}
