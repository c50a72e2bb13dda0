//! Exhaustive search for solutions of x⁴ + dy² = zᵖ and x² + dy⁶ = zᵖ with
//! 0 ≤ x, y ≤ max and p ≥ p_min, including non-prime exponents.
//!
//! The scan runs over the outer variable (x for the first equation, y for the
//! second) and the exponent, and for each base C in the admissible window
//! tests whether the remaining term is a square. Negative x, y give the same
//! hits and are not listed.

use crate::ellcurve::Equation;
use num_bigint::BigInt;
use num_integer::Integer;
use rayon::prelude::*;
use serde::Serialize;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum SearchError {
    #[error("max must be at least 1")]
    EmptyBox,
    #[error("box too large for 128-bit arithmetic (max = {0}, d = {1})")]
    TooLarge(u64, u64),
    #[error("p_min must be at least 2")]
    ExponentTooSmall,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct SolutionHit {
    pub a: u64,
    pub b: u64,
    /// Smallest base: the value is c^p with p maximal.
    pub c: u128,
    /// Maximal exponent; 0 when the value is 1 (every exponent).
    pub p: u32,
    /// All exponents k ≥ 2 with the value a k-th power.
    pub exponents: Vec<u32>,
    pub primitive: bool,
    pub trivial: bool,
}

impl SolutionHit {
    /// Re-evaluates both sides with big integers.
    pub fn verify(&self, eq: Equation, d: u64) -> bool {
        let lhs = eq.lhs(d as i64, &BigInt::from(self.a), &BigInt::from(self.b));
        if self.p == 0 {
            return lhs == BigInt::from(1);
        }
        lhs == num_traits::pow(BigInt::from(self.c), self.p as usize)
    }
}

/// floor(v^(1/k)).
fn iroot(v: u128, k: u32) -> u128 {
    if v < 2 || k == 1 {
        return v;
    }
    let mut r = (v as f64).powf(1.0 / k as f64) as u128;
    while r > 0 && r.checked_pow(k).is_none_or(|x| x > v) {
        r -= 1;
    }
    while (r + 1).checked_pow(k).is_some_and(|x| x <= v) {
        r += 1;
    }
    r
}

fn isqrt_exact(v: u128) -> Option<u128> {
    let r = iroot(v, 2);
    (r * r == v).then_some(r)
}

/// (c, m) with v = c^m and m maximal; None for v ≤ 1.
fn max_power(v: u128) -> Option<(u128, u32)> {
    if v < 2 {
        return None;
    }
    let top = 127 - v.leading_zeros();
    (2..=top.max(2)).rev().find_map(|k| {
        let r = iroot(v, k);
        (r.checked_pow(k) == Some(v)).then_some((r, k))
    }).or(Some((v, 1)))
}

fn make_hit(eq: Equation, d: u64, a: u64, b: u64, v: u128) -> SolutionHit {
    let (c, p, exponents) = match max_power(v) {
        None => (1, 0, vec![]),
        Some((c, m)) => (c, m, (2..=m).filter(|k| m % k == 0).collect()),
    };
    let primitive = (a.gcd(&b) as u128).gcd(&c) == 1;
    let trivial = (a == 1 && b == 0) || (eq == Equation::Eq24p && a == 0 && b == d && exponents.contains(&3));
    SolutionHit { a, b, c, p, exponents, primitive, trivial }
}

/// All hits in the box with some exponent ≥ p_min (value 1 always included).
pub fn scan(eq: Equation, d: u64, max: u64, p_min: u32) -> Result<Vec<SolutionHit>, SearchError> {
    if max < 1 {
        return Err(SearchError::EmptyBox);
    }
    if p_min < 2 {
        return Err(SearchError::ExponentTooSmall);
    }
    let (m, dd) = (max as u128, d as u128);
    let top = match eq {
        Equation::Eq24p => m.checked_pow(4).zip(m.checked_mul(m).and_then(|s| s.checked_mul(dd))).and_then(|(x, y)| x.checked_add(y)),
        Equation::Benchen => m.checked_pow(6).and_then(|s| s.checked_mul(dd)).and_then(|y| y.checked_add(m * m)),
    }
    .ok_or(SearchError::TooLarge(max, d))?;
    let p_max = (128 - top.leading_zeros()).max(p_min);

    let mut hits: Vec<SolutionHit> = (0..=max)
        .into_par_iter()
        .flat_map_iter(|outer| {
            let o = outer as u128;
            // fixed term, coefficient of the square, and the range of the square
            let (fixed, coef) = match eq {
                Equation::Eq24p => (o.pow(4), dd),
                Equation::Benchen => (dd * o.pow(6), 1),
            };
            let hi = fixed + coef * m * m;
            let mut found = vec![];
            for p in p_min..=p_max {
                let mut c = iroot(fixed, p);
                if c.pow(p) < fixed {
                    c += 1;
                }
                while let Some(cp) = c.checked_pow(p).filter(|&x| x <= hi) {
                    let rest = cp - fixed;
                    if cp > 0 && rest % coef == 0 {
                        if let Some(s) = isqrt_exact(rest / coef) {
                            let (a, b) = match eq {
                                Equation::Eq24p => (outer, s as u64),
                                Equation::Benchen => (s as u64, outer),
                            };
                            found.push((a, b, cp));
                        }
                    }
                    c += 1;
                }
            }
            found
        })
        .map(|(a, b, v)| make_hit(eq, d, a, b, v))
        .collect();
    hits.sort();
    hits.dedup();
    debug_assert!(hits.iter().all(|h| h.verify(eq, d)));
    Ok(hits)
}

/// Per-pair perfect-power test over the whole box; quadratic in max.
pub fn scan_naive(eq: Equation, d: u64, max: u64, p_min: u32) -> Vec<SolutionHit> {
    let mut hits = vec![];
    for a in 0..=max {
        for b in 0..=max {
            if (a, b) == (0, 0) {
                continue;
            }
            let v = match eq {
                Equation::Eq24p => (a as u128).pow(4) + d as u128 * (b as u128).pow(2),
                Equation::Benchen => (a as u128).pow(2) + d as u128 * (b as u128).pow(6),
            };
            let h = make_hit(eq, d, a, b, v);
            if h.p == 0 || h.p >= p_min {
                hits.push(h);
            }
        }
    }
    hits
}
