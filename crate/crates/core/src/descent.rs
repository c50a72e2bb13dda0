//! Level and Nebentypus of the rational newform attached to ρ_{E,p} ⊗ χ,
//! before and after removing the primes of multiplicative reduction.
//!
//! Exponents at 2, at 3 and at odd ramified primes are derived locally: the
//! reduction type of the Frey curve at 𝔮 gives the conductor of ρ ⊗ χ_𝔮,
//! and at non-split q the descended representation has half the conductor
//! of the induction, f·(2δ + v).

use crate::arith::{factor_u64, kronecker};
use crate::ellcurve::Equation;
use crate::heckechar::{build_chi, build_epsilon, classify_divisors, DivisorClass, HeckeCharacter, HeckeError, Mu8};
use crate::quadfield::{split_prime, Field, SplitKind};
use serde::Serialize;
use std::collections::BTreeSet;
use std::fmt;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum DescentError {
    #[error(transparent)]
    Character(#[from] HeckeError),
    #[error("{0} is not inert in Q(√−{1})")]
    NotInert(u64, u64),
}

/// Local representation at a prime of K before twisting.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum LocalRep {
    Good,
    /// Split or non-split multiplicative reduction (exponent 1).
    Steinberg,
    /// Steinberg twisted by a ramified character θ with a(θ) = theta_conductor.
    TwistedSteinberg { theta_conductor: u32 },
    /// Tame potentially good reduction, exponent 2, inertia acting through
    /// a cyclic group of this order.
    Tame { inertia_order: u32 },
    /// Wild, with conductor exponent at least 3.
    Wild { exponent: u32 },
}

impl LocalRep {
    /// Conductor exponent of the untwisted representation.
    pub fn exponent(self) -> u32 {
        match self {
            LocalRep::Good => 0,
            LocalRep::Steinberg => 1,
            LocalRep::TwistedSteinberg { theta_conductor } => 2 * theta_conductor,
            LocalRep::Tame { .. } => 2,
            LocalRep::Wild { exponent } => exponent,
        }
    }
}

/// Possible local types of the Frey curve at the primes above p, for p = 2,
/// p = 3 (second equation) or p an odd prime dividing d.
pub fn frey_local_types(eq: Equation, d: u64, p: u64) -> Vec<LocalRep> {
    let field = Field::new(d as i64).expect("square-free d");
    let kind = split_prime(&field, p).kind;
    if p == 2 {
        types_at_two(eq, d, kind)
    } else if p == 3 && eq == Equation::Benchen {
        types_at_three(kind)
    } else {
        vec![type_at_odd_ramified(eq, p)]
    }
}

/// Conductor exponent of ρ ⊗ χ_𝔮, with a(χ_𝔮) = chi_conductor and χ_𝔮
/// of order chi_inertia_order on inertia when tame.
///
/// A twisted Steinberg is assumed to be untwisted by χ_𝔮 when the conductors
/// agree (χ_𝔮 is chosen that way at split 2). A tame type is cut to exponent 1
/// when χ_𝔮 has the same inertia order, which kills one of the two characters.
pub fn twist_exponent(rep: LocalRep, chi_conductor: u32, chi_inertia_order: u32) -> u32 {
    let a = chi_conductor;
    match rep {
        LocalRep::Good => 2 * a,
        LocalRep::Steinberg => {
            if a == 0 {
                1
            } else {
                2 * a
            }
        }
        LocalRep::TwistedSteinberg { theta_conductor } => {
            if a == theta_conductor {
                1
            } else {
                2 * a.max(theta_conductor)
            }
        }
        LocalRep::Tame { inertia_order } => {
            if a >= 2 {
                2 * a
            } else if a == 1 && inertia_order > 2 && chi_inertia_order == inertia_order {
                1
            } else {
                2
            }
        }
        LocalRep::Wild { exponent } => exponent.max(2 * a),
    }
}

/// Conductor exponent at q of the induction from K_𝔮 to Q_q.
pub fn induced_exponent(residue_degree: u32, different: u32, v: u32) -> u32 {
    residue_degree * (2 * different + v)
}

/// Exponent at q of the descended 2-dimensional representation.
///
/// For split q it is the exponent of ρ ⊗ χ at 𝔮. Otherwise the induction is
/// the sum of the descended representation and its twist by the character of
/// K_𝔮/Q_q, which have the same conductor.
pub fn descended_exponent(kind: SplitKind, residue_degree: u32, different: u32, v: u32) -> u32 {
    match kind {
        SplitKind::Split => v,
        _ => induced_exponent(residue_degree, different, v) / 2,
    }
}

/// Local types of the Frey curve at the primes above 2, one entry per case.
fn types_at_two(eq: Equation, d: u64, kind: SplitKind) -> Vec<LocalRep> {
    use LocalRep::*;
    match (eq, kind) {
        (Equation::Eq24p, SplitKind::Inert) => vec![Wild { exponent: 8 }],
        (Equation::Eq24p, SplitKind::Ramified) => vec![Wild { exponent: 10 }, Wild { exponent: 12 }],
        // Either exponent 8 at both primes, or exponent 6 at one prime where the
        // curve is a twist of multiplicative reduction by a character of conductor 𝔭³.
        (Equation::Eq24p, SplitKind::Split) => vec![Wild { exponent: 8 }, TwistedSteinberg { theta_conductor: 3 }],
        (Equation::Benchen, SplitKind::Inert) => vec![Tame { inertia_order: 3 }],
        (Equation::Benchen, SplitKind::Split) => vec![Steinberg, Tame { inertia_order: 3 }],
        (Equation::Benchen, SplitKind::Ramified) if d % 2 == 0 => vec![Good],
        (Equation::Benchen, SplitKind::Ramified) => vec![Tame { inertia_order: 3 }],
    }
}

/// Local types of Ẽ at the primes above 3.
fn types_at_three(kind: SplitKind) -> Vec<LocalRep> {
    use LocalRep::*;
    match kind {
        SplitKind::Inert => vec![Tame { inertia_order: 4 }, Wild { exponent: 3 }],
        SplitKind::Split => vec![Steinberg, Tame { inertia_order: 4 }, Wild { exponent: 3 }],
        SplitKind::Ramified => vec![Wild { exponent: 8 }],
    }
}

/// Local type at an odd prime q | d other than 3 (for the second equation).
fn type_at_odd_ramified(eq: Equation, q: u64) -> LocalRep {
    match eq {
        Equation::Eq24p => LocalRep::Good,
        // Good reduction over K_𝔮((−d)^{1/6}): inertia of order 3 or 6.
        Equation::Benchen => LocalRep::Tame { inertia_order: if q % 3 == 1 { 3 } else { 6 } },
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Level {
    pub n: u64,
    pub factored: String,
}

impl Level {
    pub fn new(n: u64) -> Level {
        Level { n, factored: format_factored(n) }
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.factored)
    }
}

/// "2^6·5^2" style, primes ascending.
pub fn format_factored(n: u64) -> String {
    if n == 1 {
        return "1".into();
    }
    factor_u64(n)
        .iter()
        .map(|&(p, e)| if e == 1 { p.to_string() } else { format!("{}^{}", p, e) })
        .collect::<Vec<_>>()
        .join("·")
}

#[derive(Clone, Debug, Serialize)]
pub struct CharacterSummary {
    pub conductor: u64,
    pub order: u32,
}

#[derive(Clone, Debug, Serialize)]
pub struct PrimeExponents {
    pub p: u64,
    pub splitting: String,
    pub exponents: Vec<u32>,
}

#[derive(Clone, Debug, Serialize)]
pub struct DescentData {
    pub equation: Equation,
    pub d: u64,
    pub t: u64,
    pub epsilon: CharacterSummary,
    pub chi: CharacterSummary,
    /// Exponents at each prime of the lowered level, before any reduction.
    pub exponents: Vec<PrimeExponents>,
    pub level_candidates: Vec<Level>,
    pub coeff_field_note: String,
    pub coeff_field_contains: Vec<String>,
    pub twist_variants: Vec<String>,
    pub flags: Vec<String>,
    /// Conductors at 3 of Ẽ as ideals of K, when 2 | d and 3 splits.
    pub bianchi_levels: Option<Vec<String>>,
}

fn splitting_name(k: SplitKind) -> &'static str {
    match k {
        SplitKind::Split => "split",
        SplitKind::Inert => "inert",
        SplitKind::Ramified => "ramified",
    }
}

fn different_exponent(field: &Field, p: u64) -> u32 {
    crate::arith::val_u64(field.disc.unsigned_abs(), p)
}

/// The component of χ at a prime above p as (conductor exponent, order).
fn chi_local(chi: &HeckeCharacter, p: u64) -> (u32, u32) {
    chi.components.iter().find(|c| c.p == p).map_or((0, 1), |c| (c.conductor, c.order))
}

fn exponents_at(field: &Field, chi: &HeckeCharacter, p: u64, types: &[LocalRep]) -> BTreeSet<u32> {
    let sp = split_prime(field, p);
    let (a, ord) = chi_local(chi, p);
    let delta = if sp.kind == SplitKind::Ramified { different_exponent(field, p) } else { 0 };
    types
        .iter()
        .map(|&r| descended_exponent(sp.kind, sp.residue_degree, delta, twist_exponent(r, a, ord)))
        .collect()
}

/// Levels of the newform attached to a solution, after level lowering.
pub fn level_candidates(eq: Equation, d: u64) -> Result<DescentData, DescentError> {
    let t = eq.t() as u64;
    let field = Field::new(d as i64).map_err(HeckeError::from)?;
    let eps = build_epsilon(d, t)?;
    let chi = build_chi(d, t)?;
    let two = split_prime(&field, 2).kind;
    let mut exponents = vec![];
    let mut flags = vec![];
    let mut twist_variants = vec![];

    let mut e2 = exponents_at(&field, &chi, 2, &types_at_two(eq, d, two));
    if eq == Equation::Eq24p && two == SplitKind::Ramified && d % 2 == 1 {
        // Exponent 10 at 𝔮: the twist by a conductor-𝔮⁵ quadratic character can
        // lower the curve's exponent to any of 0,2,4,6,8, so the descended
        // exponent is in {2,...,6}. Twisting χ by ψ₂ moves all of these to 6.
        e2.remove(&((4 + 10) / 2));
        e2.extend([2, 3, 4, 5, 6]);
        exponents.push(PrimeExponents { p: 2, splitting: "ramified".into(), exponents: e2.iter().copied().collect() });
        e2.retain(|&e| e >= 6);
        twist_variants.push("χ·ψ₂ (2-exponent 6 covers 2..6)".into());
    } else {
        exponents.push(PrimeExponents {
            p: 2,
            splitting: splitting_name(two).into(),
            exponents: e2.iter().copied().collect(),
        });
    }
    if two == SplitKind::Split && e2.len() > 1 {
        flags.push("2-exponent depends on the reduction of the solution at 2".into());
    }

    let mut e3: BTreeSet<u32> = [0].into();
    if eq == Equation::Benchen {
        let k3 = split_prime(&field, 3).kind;
        e3 = exponents_at(&field, &chi, 3, &types_at_three(k3));
        // Multiplicative reduction at 3 is removed by level lowering unless it
        // is twisted; the Steinberg entry only matters through its twist.
        exponents.push(PrimeExponents { p: 3, splitting: splitting_name(k3).into(), exponents: e3.iter().copied().collect() });
        if e3.len() > 1 {
            flags.push("3-exponent depends on the reduction of the solution at 3".into());
        }
    }

    let mut odd_part = 1u64;
    for (q, _) in factor_u64(d) {
        if q == 2 || (eq == Equation::Benchen && q == 3) {
            continue;
        }
        let v = exponents_at(&field, &chi, q, &[type_at_odd_ramified(eq, q)]);
        let e = *v.iter().next().expect("one type");
        exponents.push(PrimeExponents { p: q, splitting: "ramified".into(), exponents: vec![e] });
        odd_part *= q.pow(e);
    }

    let mut levels = BTreeSet::new();
    for &a in &e2 {
        for &b in &e3 {
            levels.insert(2u64.pow(a) * 3u64.pow(b) * odd_part);
        }
    }
    let (note, contains) = coefficient_field(chi.order());
    if eq == Equation::Eq24p && d % 8 == 1 {
        twist_variants.push("ρ_{g,K,p} ⊗ χ⁻¹ψ₂".into());
    }
    let bianchi_levels = if eq == Equation::Benchen && d % 2 == 0 { bianchi_levels_at_three(&field) } else { None };
    Ok(DescentData {
        equation: eq,
        d,
        t,
        epsilon: CharacterSummary { conductor: eps.conductor(), order: eps.order() },
        chi: CharacterSummary { conductor: chi.conductor_norm(), order: chi.order() },
        exponents,
        level_candidates: levels.into_iter().map(Level::new).collect(),
        coeff_field_note: note,
        coeff_field_contains: contains,
        twist_variants,
        flags,
        bianchi_levels,
    })
}

fn coefficient_field(chi_order: u32) -> (String, Vec<String>) {
    let (name, gens): (&str, Vec<&str>) = match chi_order {
        1 | 2 => ("Q", vec![]),
        4 => ("Q(√−1)", vec!["√−1"]),
        _ => ("Q(ζ8) = Q(√−1, √−2)", vec!["√−1", "√−2"]),
    };
    (format!("a quadratic extension of Q(χ) = {}", name), gens.into_iter().map(String::from).collect())
}

/// 3-parts of the conductor of Ẽ when 2 | d and 3 = 𝔮𝔮̄ with 𝔮 principal.
///
/// Ẽ has good reduction above 2 and exponents (2,2), (3,3), or (2,1) in
/// either order at (𝔮, 𝔮̄). Returns None if 3 does not split or 𝔮 is not
/// principal.
pub fn bianchi_levels_at_three(field: &Field) -> Option<Vec<String>> {
    if field.d % 2 != 0 || kronecker(field.disc, 3) != 1 {
        return None;
    }
    // A generator a + b√−d of norm 3, with b > 0.
    let d = field.d;
    let (a, b) = (0..=2i64).flat_map(|b| (0..=2i64).map(move |a| (a, b))).find(|&(a, b)| b > 0 && a * a + d * b * b == 3)?;
    let gen = |sign: &str| {
        let root = format!("√−{}", d);
        if a == 0 {
            format!("{}{}", sign, root)
        } else {
            format!("{}{}{}", a, if sign.is_empty() { "+" } else { "−" }, if b == 1 { root } else { format!("{}{}", b, root) })
        }
    };
    Some(vec![
        format!("3({})", gen("")),
        format!("3({})", gen("−")),
        "9".to_string(),
        "27".to_string(),
    ])
}

/// An element of Z[ζ₈] as coefficients of 1, ζ₈, ζ₈², ζ₈³.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct CyclotomicInt(pub [i64; 4]);

impl CyclotomicInt {
    pub fn from_mu8(z: Mu8, scale: i64) -> CyclotomicInt {
        let k = z.k() as usize;
        let mut c = [0i64; 4];
        c[k % 4] = if k >= 4 { -scale } else { scale };
        CyclotomicInt(c)
    }

    pub fn add(self, o: CyclotomicInt) -> CyclotomicInt {
        CyclotomicInt([0, 1, 2, 3].map(|i| self.0[i] + o.0[i]))
    }
}

impl fmt::Display for CyclotomicInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = ["", "ζ8", "ζ8^2", "ζ8^3"];
        let mut s = String::new();
        for (i, &c) in self.0.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let sign = if c < 0 { "-" } else if s.is_empty() { "" } else { "+" };
            let mag = c.unsigned_abs();
            let body = match (i, mag) {
                (0, m) => m.to_string(),
                (_, 1) => names[i].to_string(),
                (_, m) => format!("{}*{}", m, names[i]),
            };
            s.push_str(&format!("{}{}", sign, body));
        }
        if s.is_empty() {
            s.push('0');
        }
        write!(f, "{}", s)
    }
}

/// trace(ρ̃(Frob_p))² = a_p·χ(Frob_p) + 2ε(Frob_p)·p for p inert in K.
pub fn coeff_field_trace_hint(d: u64, a_p: i64, chi_val: Mu8, eps_val: Mu8, p: u64) -> Result<CyclotomicInt, DescentError> {
    let field = Field::new(d as i64).map_err(HeckeError::from)?;
    if kronecker(field.disc, p as i64) != -1 {
        return Err(DescentError::NotInert(p, d));
    }
    Ok(CyclotomicInt::from_mu8(chi_val, a_p).add(CyclotomicInt::from_mu8(eps_val, 2 * p as i64)))
}

/// Divisor classes of d that contribute q or q² to the lowered level, as a
/// cross-check of the local derivation (first equation).
pub fn odd_level_by_classes(d: u64) -> u64 {
    let qs = classify_divisors(d, 2).expect("t = 2");
    let mut n = 1;
    for &q in qs.get(DivisorClass::Q3) {
        n *= q;
    }
    for c in [DivisorClass::Q1, DivisorClass::Q5, DivisorClass::Q7] {
        for &q in qs.get(c) {
            n *= q * q;
        }
    }
    n
}
