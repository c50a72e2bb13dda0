//! Shared fixtures for the integration tests: the reduction matrix with its
//! independent predictions, taken case by case from the conductor lemmas.
#![allow(dead_code)]

use num_bigint::BigInt;
use num_integer::Integer;
use qcurves::ellcurve::{Equation, FreyInput};
use qcurves::localred::{tate, Kodaira};
use qcurves::quadfield::{split_prime, Field, QuadElement, SplitKind};

/// Allowed outcome at the primes above p.
#[derive(Clone, Debug)]
pub enum Expect {
    /// Every prime above p has this type (when given) and exponent.
    Each(Option<Kodaira>, u32),
    /// Every prime above p has an exponent in the set.
    EachIn(Vec<u32>),
    /// Every prime above p has the same exponent, lying in the set.
    EqualIn(Vec<u32>),
    /// Two primes above p: one exponent from each set, in either order.
    Pair(Vec<u32>, Vec<u32>),
}

#[derive(Clone, Debug)]
pub struct ReductionCase {
    pub label: &'static str,
    pub input: FreyInput,
    pub p: u64,
    pub expect: Expect,
}

impl ReductionCase {
    /// Run Tate's algorithm at every prime above p and compare.
    pub fn check(&self) -> Result<(), String> {
        let c = self.input.curve().map_err(|e| e.to_string())?;
        let got: Vec<(Kodaira, u32)> = split_prime(&c.field, self.p)
            .primes_above
            .iter()
            .map(|pr| {
                let r = tate(&c, pr);
                (r.kodaira, r.f)
            })
            .collect();
        let ok = match &self.expect {
            Expect::Each(k, f) => got.iter().all(|(gk, gf)| gf == f && k.map_or(true, |k| k == *gk)),
            Expect::EachIn(fs) => got.iter().all(|(_, gf)| fs.contains(gf)),
            Expect::EqualIn(fs) => got.iter().all(|(_, gf)| fs.contains(gf) && *gf == got[0].1),
            Expect::Pair(x, y) => {
                got.len() == 2
                    && ((x.contains(&got[0].1) && y.contains(&got[1].1))
                        || (y.contains(&got[0].1) && x.contains(&got[1].1)))
            }
        };
        if ok {
            Ok(())
        } else {
            Err(format!("{}: {:?} at {} gave {:?}, expected {:?}", self.label, self.input, self.p, got, self.expect))
        }
    }
}

fn v2(x: &BigInt) -> u64 {
    x.trailing_zeros().unwrap_or(u64::MAX)
}

fn v3(x: &BigInt) -> u32 {
    qcurves::arith::val_big(x, 3)
}

/// First `n` primitive (A, B) with gcd(A, d) = 1 satisfying the filter.
fn find(eq: Equation, d: i64, n: usize, arange: i64, brange: i64, filt: impl Fn(i64, i64, &BigInt) -> bool) -> Vec<FreyInput> {
    let mut out = vec![];
    for a in 1..=arange {
        for b in 1..=brange {
            if a.gcd(&b) != 1 || a.gcd(&d) != 1 {
                continue;
            }
            let inp = FreyInput::new(eq, d, a, b);
            let cp = inp.cp();
            if !inp.is_primitive() || !filt(a, b, &cp) {
                continue;
            }
            out.push(inp);
            if out.len() == n {
                return out;
            }
        }
    }
    out
}

/// For the curve family of x² + dy⁶: does 9 divide a1·a3⁷ − a3¹⁸ − 2a3²?
pub fn inert3_nine_divides(input: &FreyInput) -> bool {
    let f = Field::new(input.d).unwrap();
    let c = input.curve().unwrap();
    let (a1, a3) = (&c.a1, &c.a3);
    let x: QuadElement = a1 * &a3.pow(7) - a3.pow(18) - a3 * a3 * 2;
    let q = x.div(&f.int(9)).unwrap();
    q.is_integral()
}

/// The reduction fixture matrix. Each expectation is read off from the
/// parity and valuation hypotheses of the corresponding case.
pub fn reduction_matrix() -> Vec<ReductionCase> {
    use Equation::*;
    let mut cases = vec![];
    let mut push = |label: &'static str, inputs: Vec<FreyInput>, p: u64, expect: Expect| {
        assert!(!inputs.is_empty(), "no inputs for {label}");
        for input in inputs {
            cases.push(ReductionCase { label, input, p, expect: expect.clone() });
        }
    };
    // x⁴ + dy² = zᵖ: at 2, inert.
    for d in [3, 11, 19] {
        push("E, 2 inert: III, f=8", find(Eq24p, d, 2, 6, 6, |_, _, c| v2(c) == 0), 2, Expect::Each(Some(Kodaira::III), 8));
    }
    // 2 ramified.
    for d in [2, 6, 10, 14] {
        push("E, 2 | d, B odd: I2*, f=12", find(Eq24p, d, 2, 9, 9, |_, b, _| b % 2 == 1), 2, Expect::Each(Some(Kodaira::InStar(2)), 12));
        push("E, 2 | d, B even: I4*, f=10", find(Eq24p, d, 2, 9, 9, |_, b, _| b % 2 == 0), 2, Expect::Each(Some(Kodaira::InStar(4)), 10));
    }
    for d in [1, 5, 13] {
        push("E, d = 1 mod 4, B even: I2*, f=12", find(Eq24p, d, 2, 9, 9, |a, b, _| b % 2 == 0 && a % 2 == 1), 2, Expect::Each(Some(Kodaira::InStar(2)), 12));
        push("E, d = 1 mod 4, B odd: I4*, f=10", find(Eq24p, d, 2, 9, 9, |a, b, _| b % 2 == 1 && a % 2 == 0), 2, Expect::Each(Some(Kodaira::InStar(4)), 10));
    }
    // 2 split.
    for d in [7, 15] {
        push("E, 2 split, A or B even: III, f=8", find(Eq24p, d, 2, 8, 8, |a, b, _| (a * b) % 2 == 0), 2, Expect::Each(Some(Kodaira::III), 8));
        push(
            "E, 2 split, A, B odd: f=6 and f in {1,4}",
            find(Eq24p, d, 2, 40, 4096, |a, b, c| a % 2 == 1 && b % 2 == 1 && v2(c) >= 12),
            2,
            Expect::Pair(vec![6], vec![1, 4]),
        );
    }
    // Odd primes for E: ramified ones are good, others dividing the discriminant multiplicative.
    push("E, odd ramified: good", find(Eq24p, 15, 2, 8, 8, |_, _, _| true), 3, Expect::Each(Some(Kodaira::I0), 0));
    push("E, odd ramified: good", find(Eq24p, 35, 1, 8, 8, |_, _, _| true), 7, Expect::Each(Some(Kodaira::I0), 0));
    push("E, odd prime of C: multiplicative", vec![FreyInput::new(Eq24p, 6, 11, 19)], 7, Expect::Each(None, 1));
    push("E, odd prime of C: multiplicative", vec![FreyInput::new(Eq24p, 5, 1, 2)], 3, Expect::Each(None, 1));

    // x² + dy⁶ = zᵖ at 2.
    for d in [3, 11] {
        push("E~, 2 inert: IV*, f=2", find(Benchen, d, 2, 6, 6, |_, _, c| v2(c) == 0), 2, Expect::Each(Some(Kodaira::IVStar), 2));
    }
    for d in [7, 15] {
        push("E~, 2 split, A or B even: IV*, f=2", find(Benchen, d, 2, 6, 6, |a, b, _| (a * b) % 2 == 0), 2, Expect::Each(Some(Kodaira::IVStar), 2));
        push("E~, 2 split, A, B odd: f in {1,2}", find(Benchen, d, 2, 200, 50, |a, b, c| a % 2 == 1 && b % 2 == 1 && v2(c) >= 5), 2, Expect::EachIn(vec![1, 2]));
    }
    for d in [1, 5, 13] {
        push("E~, 2 ramified, d odd: IV, f=2", find(Benchen, d, 2, 6, 6, |a, b, _| (a + b) % 2 == 1), 2, Expect::Each(Some(Kodaira::IV), 2));
    }
    for d in [2, 6, 10] {
        push("E~, 2 | d: good", find(Benchen, d, 2, 6, 6, |_, _, _| true), 2, Expect::Each(Some(Kodaira::I0), 0));
    }
    // At 3.
    for d in [1, 7, 10] {
        let sample = find(Benchen, d, 12, 30, 6, |_, _, c| v3(c) == 0);
        let (typ3, typ2): (Vec<_>, Vec<_>) = sample.into_iter().partition(|i| !inert3_nine_divides(i));
        push("E~, 3 inert, II branch: f=3", typ3.into_iter().take(2).collect(), 3, Expect::Each(Some(Kodaira::II), 3));
        if !typ2.is_empty() {
            push("E~, 3 inert, III branch: f=2", typ2.into_iter().take(2).collect(), 3, Expect::Each(Some(Kodaira::III), 2));
        }
    }
    for d in [2, 5] {
        // With 3 | B the exponent is 3 unless a3⁴ ≡ 7 mod 9 at the prime, where it drops to 2.
        push("E~, 3 split, 3 | B: equal f in {2,3}", find(Benchen, d, 3, 8, 9, |_, b, _| b % 3 == 0), 3, Expect::EqualIn(vec![2, 3]));
        push("E~, 3 split, 3 | A: equal f in {2,3}", find(Benchen, d, 3, 9, 8, |a, _, _| a % 3 == 0), 3, Expect::EqualIn(vec![2, 3]));
        push(
            "E~, 3 split, 3 does not divide AB: f=1 and f=2",
            find(Benchen, d, 2, 400, 100, |a, b, c| a % 3 != 0 && b % 3 != 0 && v3(c) >= 5),
            3,
            Expect::Pair(vec![1], vec![2]),
        );
    }
    for d in [3, 6, 15] {
        push("E~, 3 ramified: IV*, f=8", find(Benchen, d, 2, 6, 6, |_, _, _| true), 3, Expect::Each(Some(Kodaira::IVStar), 8));
    }
    for (d, q) in [(5, 5), (7, 7), (10, 5), (14, 7), (11, 11), (13, 13)] {
        push("E~, odd ramified q > 3: IV*, f=2", find(Benchen, d, 1, 6, 6, |_, _, _| true), q, Expect::Each(Some(Kodaira::IVStar), 2));
    }
    push("E~, odd prime of C: multiplicative", vec![FreyInput::new(Benchen, 2, 3, 1)], 11, Expect::Each(None, 1));
    push("E~, odd prime of C: multiplicative", vec![FreyInput::new(Benchen, 7, 2, 1)], 11, Expect::Each(None, 1));
    cases
}

/// Kinds of splitting exercised by the matrix, for coverage reporting.
pub fn matrix_coverage(cases: &[ReductionCase]) -> Vec<(u64, SplitKind)> {
    let mut v: Vec<(u64, SplitKind)> = cases
        .iter()
        .map(|c| (c.p.min(5), split_prime(&Field::new(c.input.d).unwrap(), c.p).kind))
        .collect();
    v.sort_by_key(|x| (x.0, format!("{:?}", x.1)));
    v.dedup();
    v
}
