//! Splitting characters for the Frey Q-curves: a Nebentypus ε of Q and a Hecke
//! character χ of K = Q(√−d) with χ² = ε∘N and ^τχ = χ·(ψ₋ₜ∘N), for t = 2 and
//! for primes t ≡ 3 (mod 4).
//!
//! Values are eighth roots of unity stored by exponent. A character of K is
//! given by its restrictions to the residue-unit groups (O/𝔭ⁿ)^× at finitely
//! many primes and by its values on split primes generating the class group.
//! The value on an ideal I coprime to the conductor is computed by moving I to
//! a principal ideal (γ) with the class-group generators, and χ((γ)) is the
//! product of the inverses of the local values at γ.

use crate::arith::{self, kronecker};
use crate::quadfield::{
    class_group_avoiding, ideals_up_to, principal_generator, split_prime, ClassGroup, Field,
    FieldError, PrimeIdeal, QuadElement, QuadIdeal, SplitKind,
};
use num_integer::Integer;
use num_traits::ToPrimitive;
use serde::{Serialize, Serializer};
use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt;
use std::ops::Mul;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum HeckeError {
    #[error("t = {0} must be 2 or a prime congruent to 3 mod 4")]
    InvalidT(u64),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("inconsistent character data: {0}")]
    Inconsistent(String),
    #[error("ideal {0} is not coprime to the conductor")]
    NotCoprime(String),
}

/// ζ₈ᵏ, stored as k mod 8.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Mu8(u8);

impl Mu8 {
    pub const ONE: Mu8 = Mu8(0);
    pub const I: Mu8 = Mu8(2);
    pub const MINUS_ONE: Mu8 = Mu8(4);
    pub const MINUS_I: Mu8 = Mu8(6);

    pub fn new(k: i64) -> Mu8 {
        Mu8(k.rem_euclid(8) as u8)
    }

    pub fn k(self) -> u8 {
        self.0
    }

    pub fn sign(s: i32) -> Mu8 {
        if s < 0 {
            Mu8::MINUS_ONE
        } else {
            Mu8::ONE
        }
    }

    pub fn inv(self) -> Mu8 {
        Mu8::new(-(self.0 as i64))
    }

    pub fn pow(self, e: i64) -> Mu8 {
        Mu8::new(self.0 as i64 * e)
    }

    pub fn order(self) -> u32 {
        8 / (self.0 as u32).gcd(&8)
    }

    pub fn is_one(self) -> bool {
        self.0 == 0
    }

    /// The square roots in μ₈, smallest exponent first (none if self ∉ μ₄).
    pub fn sqrts(self) -> Vec<Mu8> {
        if self.0 % 2 == 1 {
            return vec![];
        }
        vec![Mu8(self.0 / 2), Mu8(self.0 / 2 + 4)]
    }
}

impl Mul for Mu8 {
    type Output = Mu8;
    fn mul(self, o: Mu8) -> Mu8 {
        Mu8((self.0 + o.0) % 8)
    }
}

impl std::iter::Product for Mu8 {
    fn product<I: Iterator<Item = Mu8>>(iter: I) -> Mu8 {
        iter.fold(Mu8::ONE, |a, b| a * b)
    }
}

impl fmt::Display for Mu8 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            0 => write!(f, "1"),
            2 => write!(f, "i"),
            4 => write!(f, "-1"),
            6 => write!(f, "-i"),
            k => write!(f, "z8^{}", k),
        }
    }
}

impl Serialize for Mu8 {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u8(self.0)
    }
}

fn check_t(t: u64) -> Result<(), HeckeError> {
    if t == 2 || (t % 4 == 3 && arith::is_prime(t)) {
        Ok(())
    } else {
        Err(HeckeError::InvalidT(t))
    }
}

// ---------------------------------------------------------------------------
// Divisor classes

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum DivisorClass {
    #[serde(rename = "1 mod 8")]
    Q1,
    #[serde(rename = "3 mod 8")]
    Q3,
    #[serde(rename = "5 mod 8")]
    Q5,
    #[serde(rename = "7 mod 8")]
    Q7,
    /// Square mod 4 and square mod t.
    #[serde(rename = "sq4 sqt")]
    PlusPlus,
    #[serde(rename = "sq4 nsqt")]
    PlusMinus,
    #[serde(rename = "nsq4 sqt")]
    MinusPlus,
    #[serde(rename = "nsq4 nsqt")]
    MinusMinus,
}

/// The odd prime divisors of d (prime to t) sorted into four classes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DivisorSets {
    pub d: u64,
    pub t: u64,
    pub sets: BTreeMap<DivisorClass, Vec<u64>>,
}

impl DivisorSets {
    pub fn get(&self, c: DivisorClass) -> &[u64] {
        self.sets.get(&c).map(|v| v.as_slice()).unwrap_or(&[])
    }

    pub fn count(&self, c: DivisorClass) -> usize {
        self.get(c).len()
    }

    pub fn class_of(&self, p: u64) -> Option<DivisorClass> {
        self.sets.iter().find(|(_, v)| v.contains(&p)).map(|(c, _)| *c)
    }
}

pub fn classify_divisors(d: u64, t: u64) -> Result<DivisorSets, HeckeError> {
    check_t(t)?;
    use DivisorClass::*;
    let classes = if t == 2 { [Q1, Q3, Q5, Q7] } else { [PlusPlus, PlusMinus, MinusPlus, MinusMinus] };
    let mut sets: BTreeMap<DivisorClass, Vec<u64>> = classes.iter().map(|c| (*c, vec![])).collect();
    for (p, _) in arith::factor_u64(d) {
        if p == 2 || p == t {
            continue;
        }
        let c = if t == 2 {
            match p % 8 {
                1 => Q1,
                3 => Q3,
                5 => Q5,
                _ => Q7,
            }
        } else {
            let sq4 = p % 4 == 1;
            let sqt = kronecker(p as i64, t as i64) == 1;
            match (sq4, sqt) {
                (true, true) => PlusPlus,
                (true, false) => PlusMinus,
                (false, true) => MinusPlus,
                (false, false) => MinusMinus,
            }
        };
        sets.get_mut(&c).unwrap().push(p);
    }
    Ok(DivisorSets { d, t, sets })
}

// ---------------------------------------------------------------------------
// Local characters

#[derive(Clone, Debug, Serialize)]
pub struct GeneratorValue {
    pub element: String,
    pub coords: (i64, i64),
    pub order: u32,
    pub value: Mu8,
}

/// A character of (Z/pⁿ)^× or of (O/𝔭ⁿ)^×, defined by values on generators
/// and tabulated on the whole group.
#[derive(Clone, Debug, Serialize)]
pub struct LocalCharacter {
    pub p: u64,
    /// The prime ideal for a character of K; None for a character of Z_p^×.
    pub prime: Option<QuadIdeal>,
    /// The modulus is prime^exponent.
    pub exponent: u32,
    pub generators: Vec<GeneratorValue>,
    pub order: u32,
    /// Exponent of the conductor.
    pub conductor: u32,
    #[serde(skip)]
    field: Option<Field>,
    #[serde(skip)]
    modulus: QuadIdeal,
    #[serde(skip)]
    table: HashMap<(i128, i128), Mu8>,
}

impl LocalCharacter {
    /// Character of (Z/pⁿ)^× with the given values on integer generators.
    pub fn rational(p: u64, n: u32, gens: &[(i64, Mu8)]) -> Result<LocalCharacter, HeckeError> {
        let m = (p as i128).pow(n);
        let gens: Vec<_> = gens.iter().map(|&(g, v)| ((g as i128, 0), v, g.to_string())).collect();
        LocalCharacter::build(p, None, None, n, QuadIdeal::rational(m), gens)
    }

    /// Character of (O/𝔭ⁿ)^× with values on generators given in (1, ω) coordinates.
    pub fn over_prime(
        field: &Field,
        prime: &PrimeIdeal,
        n: u32,
        gens: &[((i128, i128), Mu8)],
    ) -> Result<LocalCharacter, HeckeError> {
        let modulus = prime.ideal.pow(field, n);
        let gens: Vec<_> = gens
            .iter()
            .map(|&(g, v)| (g, v, field.from_basis(g.0, g.1).to_string()))
            .collect();
        LocalCharacter::build(prime.p, Some(prime.ideal), Some(*field), n, modulus, gens)
    }

    fn mul_red(&self, x: (i128, i128), y: (i128, i128)) -> (i128, i128) {
        match &self.field {
            Some(f) => self.modulus.reduce(f.mul_basis(x, y)),
            None => ((x.0 * y.0).rem_euclid(self.modulus.a()), 0),
        }
    }

    fn red(&self, x: (i128, i128)) -> (i128, i128) {
        match &self.field {
            Some(_) => self.modulus.reduce(x),
            None => (x.0.rem_euclid(self.modulus.a()), 0),
        }
    }

    fn group_order(&self) -> u64 {
        let q = match &self.prime {
            Some(pr) => pr.norm as u64,
            None => self.p,
        };
        q.pow(self.exponent - 1) * (q - 1)
    }

    fn is_unit(&self, x: (i128, i128)) -> bool {
        match &self.prime {
            Some(pr) => !pr.contains(x),
            None => x.0.rem_euclid(self.p as i128) != 0,
        }
    }

    fn build(
        p: u64,
        prime: Option<QuadIdeal>,
        field: Option<Field>,
        n: u32,
        modulus: QuadIdeal,
        gens: Vec<((i128, i128), Mu8, String)>,
    ) -> Result<LocalCharacter, HeckeError> {
        let mut lc = LocalCharacter {
            p,
            prime,
            exponent: n,
            generators: vec![],
            order: 1,
            conductor: 0,
            field,
            modulus,
            table: HashMap::new(),
        };
        let one = lc.red((1, 0));
        let mut reduced = vec![];
        for (g, v, label) in gens {
            let g = lc.red(g);
            if !lc.is_unit(g) {
                return Err(HeckeError::Inconsistent(format!("generator {} is not a unit", label)));
            }
            let mut ord = 1u32;
            let mut x = g;
            while x != one {
                x = lc.mul_red(x, g);
                ord += 1;
            }
            lc.generators.push(GeneratorValue {
                element: label,
                coords: (g.0 as i64, g.1 as i64),
                order: ord,
                value: v,
            });
            reduced.push((g, v));
        }
        // Breadth-first closure; a second route to the same residue must agree.
        lc.table.insert(one, Mu8::ONE);
        let mut queue = VecDeque::from([one]);
        while let Some(x) = queue.pop_front() {
            let vx = lc.table[&x];
            for &(g, vg) in &reduced {
                let y = lc.mul_red(x, g);
                match lc.table.get(&y) {
                    Some(&vy) if vy != vx * vg => {
                        return Err(HeckeError::Inconsistent(format!(
                            "values on generators modulo {}^{} do not define a character",
                            p, n
                        )))
                    }
                    Some(_) => {}
                    None => {
                        lc.table.insert(y, vx * vg);
                        queue.push_back(y);
                    }
                }
            }
        }
        if lc.table.len() as u64 != lc.group_order() {
            return Err(HeckeError::Inconsistent(format!(
                "generators span {} of {} residue units",
                lc.table.len(),
                lc.group_order()
            )));
        }
        let g = lc.generators.iter().fold(8u32, |acc, gv| acc.gcd(&(gv.value.k() as u32)));
        lc.order = 8 / g;
        lc.conductor = lc.compute_conductor();
        Ok(lc)
    }

    fn compute_conductor(&self) -> u32 {
        for m in 0..=self.exponent {
            let trivial = self.table.iter().all(|(&x, &v)| {
                v.is_one() || {
                    let y = (x.0 - 1, x.1);
                    let in_pm = match (&self.field, &self.prime) {
                        (Some(f), Some(pr)) => pr.pow(f, m).contains(y),
                        _ => y.0.rem_euclid((self.p as i128).pow(m)) == 0,
                    };
                    !in_pm
                }
            });
            if trivial {
                return m;
            }
        }
        self.exponent
    }

    /// Value at an integral element given in (1, ω) coordinates; None unless a unit.
    pub fn eval_coords(&self, x: (i128, i128)) -> Option<Mu8> {
        self.table.get(&self.red(x)).copied()
    }

    pub fn eval_int(&self, n: i64) -> Option<Mu8> {
        self.eval_coords((n as i128, 0))
    }

    /// Value at an element of K that is a unit at the prime.
    pub fn eval(&self, x: &QuadElement) -> Option<Mu8> {
        let f = self.field.as_ref()?;
        if let Some((u, v)) = x.basis_coords() {
            return self.eval_coords((u.to_i128()?, v.to_i128()?));
        }
        let num = f.big(x.a.clone(), x.b.clone());
        let (u, v) = num.basis_coords()?;
        let top = self.eval_coords((u.to_i128()?, v.to_i128()?))?;
        let den = x.den.mod_floor(&num_bigint::BigInt::from(self.modulus.a())).to_i128()?;
        let bottom = self.eval_coords((den, 0))?;
        Some(top * bottom.inv())
    }

    pub fn is_trivial(&self) -> bool {
        self.conductor == 0
    }
}

/// δ₋₁, δ₂ or δ₋₂ on (Z/8)^×, presented by the generators −1 and 5.
pub fn delta_two(s: i64) -> LocalCharacter {
    let (a, b) = match s {
        -1 => (Mu8::MINUS_ONE, Mu8::ONE),
        2 => (Mu8::ONE, Mu8::MINUS_ONE),
        -2 => (Mu8::MINUS_ONE, Mu8::MINUS_ONE),
        1 => (Mu8::ONE, Mu8::ONE),
        _ => panic!("no 2-adic character attached to {}", s),
    };
    LocalCharacter::rational(2, 3, &[(-1, a), (5, b)]).expect("(Z/8)^× = <−1> × <5>")
}

/// The quadratic character of (Z/p)^×.
pub fn delta_odd(p: u64) -> LocalCharacter {
    odd_order_2k(p, 1)
}

/// The character of (Z/p)^× of order 2^k sending the least primitive root to
/// ζ₈^(8/2^k).
fn odd_order_2k(p: u64, k: u32) -> LocalCharacter {
    let g = arith::primitive_root(p) as i64;
    LocalCharacter::rational(p, 1, &[(g, Mu8::new(8 >> k))]).expect("cyclic group")
}

/// Table of δ₋₁, δ₋₂, δ₂ on the residues 1, 3, 5, 7.
pub fn two_adic_table() -> Vec<(i64, [i32; 4])> {
    [-1i64, -2, 2]
        .iter()
        .map(|&s| {
            let c = delta_two(s);
            let row = [1, 3, 5, 7].map(|r| if c.eval_int(r).unwrap().is_one() { 1 } else { -1 });
            (s, row)
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Characters of Q

/// A finite-order character of the ideles of Q given by its local components.
#[derive(Clone, Debug, Serialize)]
pub struct RationalCharacter {
    pub components: Vec<LocalCharacter>,
    pub infinity_sign: i32,
}

impl RationalCharacter {
    fn from_components(mut comps: Vec<LocalCharacter>) -> Result<RationalCharacter, HeckeError> {
        comps.retain(|c| !c.is_trivial());
        comps.sort_by_key(|c| c.p);
        let mut r = RationalCharacter { components: comps, infinity_sign: 1 };
        // Choose the sign at infinity that makes the product formula hold.
        let at_minus_one: Mu8 = r.components.iter().map(|c| c.eval_int(-1).unwrap()).product();
        r.infinity_sign = if at_minus_one.is_one() { 1 } else { -1 };
        if at_minus_one.k() % 4 != 0 {
            return Err(HeckeError::Inconsistent("local components at −1 are not ±1".into()));
        }
        Ok(r)
    }

    /// ∏ φ_p(−1) · φ_∞(−1); 1 for a Hecke character.
    pub fn product_formula(&self) -> Mu8 {
        let fin: Mu8 = self.components.iter().map(|c| c.eval_int(-1).unwrap()).product();
        fin * Mu8::sign(self.infinity_sign)
    }

    /// Value on an integer prime to the conductor: ∏_p φ_p(n)⁻¹.
    pub fn eval(&self, n: i64) -> Option<Mu8> {
        let mut v = Mu8::ONE;
        for c in &self.components {
            v = v * c.eval_int(n)?.inv();
        }
        Some(v)
    }

    pub fn conductor(&self) -> u64 {
        self.components.iter().map(|c| c.p.pow(c.conductor)).product()
    }

    pub fn order(&self) -> u32 {
        self.components.iter().fold(1, |a, c| a.lcm(&c.order))
    }

    pub fn is_even(&self) -> bool {
        self.infinity_sign == 1
    }

    pub fn component(&self, p: u64) -> Option<&LocalCharacter> {
        self.components.iter().find(|c| c.p == p)
    }
}

/// The quadratic character ψ₋ₜ of Q(√−t).
pub fn psi_minus_t(t: u64) -> Result<RationalCharacter, HeckeError> {
    check_t(t)?;
    let c = if t == 2 { delta_two(-2) } else { delta_odd(t) };
    RationalCharacter::from_components(vec![c])
}

fn parity(n: usize) -> bool {
    n % 2 == 1
}

/// The Nebentypus ε.
pub fn build_epsilon(d: u64, t: u64) -> Result<RationalCharacter, HeckeError> {
    use DivisorClass::*;
    let qs = classify_divisors(d, t)?;
    let mut comps = vec![];
    let v2 = arith::val_u64(d, 2) as usize;
    if t == 2 {
        for &p in qs.get(Q3) {
            comps.push(delta_odd(p));
        }
        for &p in qs.get(Q5) {
            comps.push(odd_order_2k(p, 2));
        }
        if parity(qs.count(Q3) + qs.count(Q5)) {
            comps.push(delta_two(-1));
        }
    } else {
        for &p in qs.get(PlusPlus).iter().chain(qs.get(MinusPlus)) {
            comps.push(delta_odd(p));
        }
        for &p in qs.get(PlusMinus) {
            let k = arith::val_u64(p - 1, 2);
            if k > 3 {
                return Err(HeckeError::Unsupported(format!(
                    "a character of order 2^{} at {} needs roots of unity beyond μ₈",
                    k, p
                )));
            }
            comps.push(odd_order_2k(p, k));
        }
        let vt = arith::val_u64(d, t) as usize;
        let extra = if t % 8 == 3 { v2 } else { 0 };
        if parity(qs.count(PlusMinus) + qs.count(MinusMinus) + vt + extra + 1) {
            comps.push(delta_odd(t));
        }
        if parity(qs.count(MinusPlus) + qs.count(MinusMinus) + vt + extra + 1) {
            comps.push(delta_two(-1));
        }
    }
    let eps = RationalCharacter::from_components(comps)?;
    if !eps.is_even() {
        return Err(HeckeError::Inconsistent("ε is not even".into()));
    }
    Ok(eps)
}

// ---------------------------------------------------------------------------
// Characters of K

/// Which pair of local characters to use at the two primes above 2 when
/// d ≡ 7 (mod 8): (δ₋₂, 1) or (δ₂, δ₋₁).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum SplitTwoChoice {
    #[default]
    Primary,
    Alternative,
}

#[derive(Clone, Debug, Serialize)]
pub struct ClassValue {
    pub ideal: QuadIdeal,
    pub norm: u64,
    /// Order of the class modulo the classes of the earlier generators.
    pub relative_order: u32,
    pub value: Mu8,
}

#[derive(Clone, Debug, Serialize)]
pub struct HeckeCharacter {
    pub d: i64,
    pub t: u64,
    pub components: Vec<LocalCharacter>,
    pub class_values: Vec<ClassValue>,
    #[serde(skip)]
    field: Field,
    #[serde(skip)]
    classgroup: ClassGroup,
}

/// Generators of (O/2ⁿ)^× at a non-split prime above 2, as (label, coords),
/// together with the prime and the exponent of the modulus as a power of it.
pub fn two_adic_generators(field: &Field) -> Option<(PrimeIdeal, u32, Vec<(&'static str, (i128, i128))>)> {
    let d = field.d;
    let pr = split_prime(field, 2).primes_above[0].clone();
    match d.rem_euclid(8) {
        7 => None,
        3 => {
            // An element of order 3: ω has order 3 in F₄^× and (O/8)^× has order 48.
            let mut z = (1i128, 0i128);
            for _ in 0..16 {
                z = field.mul_basis(z, (0, 1));
            }
            let z = QuadIdeal::rational(8).reduce(z);
            // √−d = 2ω − 1, 3 + 2√−d = 1 + 4ω
            Some((pr, 3, vec![("zeta3", z), ("r", (-1, 2)), ("3+2r", (1, 4)), ("-1", (-1, 0))]))
        }
        1 => Some((pr, 6, vec![("r", (0, 1)), ("1+2r", (1, 2)), ("5", (5, 0))])),
        5 => Some((pr, 6, vec![("r", (0, 1)), ("1+2r", (1, 2)), ("-1", (-1, 0))])),
        _ => Some((pr, 4, vec![("1+r", (1, 1)), ("-1", (-1, 0))])),
    }
}

fn two_adic_values_t2(d: i64, odd_parity: bool) -> Vec<Mu8> {
    let (m, i) = (Mu8::MINUS_ONE, Mu8::I);
    let one = Mu8::ONE;
    match d.rem_euclid(16) {
        1 => vec![one, one, m],
        9 => vec![m, one, m],
        3 | 11 => vec![one, i, one, one],
        5 => vec![one, one, m],
        13 => vec![m, one, m],
        r if r % 8 == 2 => {
            if odd_parity {
                vec![i, m]
            } else {
                vec![one, one]
            }
        }
        _ => {
            if odd_parity {
                vec![i, one]
            } else {
                vec![one, m]
            }
        }
    }
}

fn prime_above(field: &Field, p: u64) -> PrimeIdeal {
    split_prime(field, p).primes_above[0].clone()
}

fn residue_char(field: &Field, p: u64, k: Mu8) -> Result<LocalCharacter, HeckeError> {
    let g = arith::primitive_root(p) as i128;
    LocalCharacter::over_prime(field, &prime_above(field, p), 1, &[((g, 0), k)])
}

/// Least generator of (O/t)^× ≅ F_{t²}^× in the order (v, u) for u + vω.
fn inert_generator(field: &Field, t: u64) -> (i128, i128) {
    let m = QuadIdeal::rational(t as i128);
    let n = t * t - 1;
    let pow = |x: (i128, i128), mut e: u64| {
        let (mut r, mut b) = ((1i128, 0i128), x);
        while e > 0 {
            if e & 1 == 1 {
                r = m.reduce(field.mul_basis(r, b));
            }
            b = m.reduce(field.mul_basis(b, b));
            e >>= 1;
        }
        r
    };
    let rs: Vec<u64> = arith::factor_u64(n).into_iter().map(|(r, _)| r).collect();
    for v in 1..t as i128 {
        for u in 0..t as i128 {
            let x = (u, v);
            if rs.iter().all(|&r| pow(x, n / r) != (1, 0)) {
                return x;
            }
        }
    }
    unreachable!("F_{{t²}}^× is cyclic")
}

pub fn build_chi(d: u64, t: u64) -> Result<HeckeCharacter, HeckeError> {
    build_chi_with(d, t, SplitTwoChoice::Primary)
}

pub fn build_chi_with(d: u64, t: u64, choice: SplitTwoChoice) -> Result<HeckeCharacter, HeckeError> {
    use DivisorClass::*;
    let qs = classify_divisors(d, t)?;
    let field = Field::new(d as i64)?;
    let eps = build_epsilon(d, t)?;
    let mut comps = vec![];
    let (m1, i) = (Mu8::MINUS_ONE, Mu8::I);
    if t == 2 {
        for &p in qs.get(Q1).iter().chain(qs.get(Q7)) {
            comps.push(residue_char(&field, p, m1)?);
        }
        // ε_p δ_p with ε_p sending the primitive root to i
        for &p in qs.get(Q5) {
            comps.push(residue_char(&field, p, i * m1)?);
        }
        let odd_parity = parity(qs.count(Q3) + qs.count(Q5));
        match two_adic_generators(&field) {
            None => {
                let ps = split_prime(&field, 2).primes_above;
                let gens = |s: i64| {
                    let c = delta_two(s);
                    vec![((-1, 0), c.eval_int(-1).unwrap()), ((5, 0), c.eval_int(5).unwrap())]
                };
                let (a, b) = match choice {
                    SplitTwoChoice::Primary => (-2, 1),
                    SplitTwoChoice::Alternative => (2, -1),
                };
                comps.push(LocalCharacter::over_prime(&field, &ps[0], 3, &gens(a))?);
                comps.push(LocalCharacter::over_prime(&field, &ps[1], 3, &gens(b))?);
            }
            Some((pr, n, gens)) => {
                let vals = two_adic_values_t2(d as i64, odd_parity);
                let gv: Vec<_> = gens.iter().zip(vals).map(|(g, v)| (g.1, v)).collect();
                comps.push(LocalCharacter::over_prime(&field, &pr, n, &gv)?);
            }
        }
    } else {
        for &p in qs.get(MinusMinus) {
            comps.push(residue_char(&field, p, m1)?);
        }
        for &p in qs.get(PlusMinus) {
            let e = eps.component(p).expect("ε ramifies on this class");
            comps.push(residue_char(&field, p, e.generators[0].value * m1)?);
        }
        let split = split_prime(&field, t);
        match split.kind {
            SplitKind::Ramified => {
                if let Some(e) = eps.component(t) {
                    comps.push(residue_char(&field, t, e.generators[0].value)?);
                }
            }
            SplitKind::Split => {
                let g = arith::primitive_root(t) as i128;
                comps.push(LocalCharacter::over_prime(&field, &split.primes_above[0], 1, &[((g, 0), m1)])?);
            }
            SplitKind::Inert => {
                let g = inert_generator(&field, t);
                comps.push(LocalCharacter::over_prime(&field, &split.primes_above[0], 1, &[(g, i)])?);
            }
        }
        let p2 = prime_above(&field, 2);
        if d % 2 == 0 {
            let minus = if t % 8 == 3 { m1 } else { Mu8::ONE };
            // χ₂(1+√−d)² must equal ε₂(1 + d): order four only when ε₂ = δ₋₁.
            let e2 = eps.component(2).map_or(Mu8::ONE, |c| c.eval_int(1 + d as i64).unwrap());
            let gens = [((1, 1), e2.sqrts()[0]), ((-1, 0), minus), ((5, 0), m1)];
            comps.push(LocalCharacter::over_prime(&field, &p2, 5, &gens)?);
        } else if d % 4 == 1 && t % 8 == 3 {
            comps.push(LocalCharacter::over_prime(&field, &p2, 2, &[((0, 1), m1)])?);
        }
    }
    comps.retain(|c| !c.is_trivial());
    let classgroup = class_group_avoiding(&field, 2 * t as i64 * d as i64);
    let mut chi = HeckeCharacter { d: d as i64, t, components: comps, class_values: vec![], field, classgroup };
    chi.assign_class_values(&eps)?;
    let bad: Vec<String> = chi
        .unit_compatibility()
        .into_iter()
        .filter(|(_, v)| !v.is_one())
        .map(|(u, v)| format!("{} -> {}", u, v))
        .collect();
    if !bad.is_empty() {
        return Err(HeckeError::Inconsistent(format!("units: {}", bad.join(", "))));
    }
    Ok(chi)
}

impl HeckeCharacter {
    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn classgroup(&self) -> &ClassGroup {
        &self.classgroup
    }

    /// χ((α)) = ∏ χ_𝔭(α)⁻¹ for integral α prime to the conductor.
    pub fn eval_principal(&self, x: (i128, i128)) -> Option<Mu8> {
        let mut v = Mu8::ONE;
        for c in &self.components {
            v = v * c.eval_coords(x)?.inv();
        }
        Some(v)
    }

    /// Product over the local components at an element (the idele of a unit).
    pub fn local_product(&self, x: &QuadElement) -> Option<Mu8> {
        let mut v = Mu8::ONE;
        for c in &self.components {
            v = v * c.eval(x)?;
        }
        Some(v)
    }

    /// The value on each unit of O_K of the product of the local components.
    pub fn unit_compatibility(&self) -> Vec<(String, Mu8)> {
        self.field
            .units()
            .iter()
            .map(|u| (u.to_string(), self.local_product(u).expect("units are local units")))
            .collect()
    }

    fn ideal_of(&self, j: usize) -> QuadIdeal {
        self.classgroup.gens[j].ideal
    }

    /// Generator of I·∏ conj(g_j)^{e_j}, principal by the choice of e.
    fn reduce_to_principal(&self, i: &QuadIdeal, e: &[u32]) -> Result<(i128, i128), HeckeError> {
        let f = &self.field;
        let mut j_ideal = *i;
        for (k, &ek) in e.iter().enumerate() {
            if ek > 0 {
                j_ideal = j_ideal.mul(f, &self.ideal_of(k).conj(f).pow(f, ek));
            }
        }
        let g = principal_generator(f, &j_ideal)
            .ok_or_else(|| HeckeError::Inconsistent(format!("{} is not principal", j_ideal)))?;
        let (u, v) = g.basis_coords().expect("integral");
        Ok((u.to_i128().unwrap(), v.to_i128().unwrap()))
    }

    /// χ(conj g_j) = χ((q_j)) / χ(g_j)
    fn conj_gen_value(&self, j: usize, c: Mu8) -> Mu8 {
        let q = self.classgroup.gens[j].p as i128;
        self.eval_principal((q, 0)).expect("generators avoid the conductor") * c.inv()
    }

    fn assign_class_values(&mut self, eps: &RationalCharacter) -> Result<(), HeckeError> {
        let ngens = self.classgroup.gens.len();
        // For each generator: the targets c² = ε(q) and the relation
        // c^{o} · ∏_{j<k} χ(conj g_j)^{r_j} = χ((γ_k)).
        let mut rels = vec![];
        for k in 0..ngens {
            let g = &self.classgroup.gens[k];
            let o = self.classgroup.orders[k];
            let f = &self.field;
            let gk = g.ideal.pow(f, o);
            let r = self.classgroup.log(&gk);
            let gamma = self.reduce_to_principal(&gk, &r)?;
            let target = self.eval_principal(gamma).expect("coprime");
            let sq = eps.eval(g.p as i64).expect("generators avoid the conductor of ε");
            if sq.sqrts().is_empty() {
                return Err(HeckeError::Unsupported(format!("χ({}) needs a square root of {} outside μ8", g.ideal, sq)));
            }
            rels.push((o, r, target, sq));
        }
        let mut chosen: Vec<Mu8> = vec![];
        if !self.search_class_values(&rels, &mut chosen) {
            return Err(HeckeError::Inconsistent("no consistent class-group extension".into()));
        }
        self.class_values = chosen
            .iter()
            .enumerate()
            .map(|(k, &value)| ClassValue {
                ideal: self.ideal_of(k),
                norm: self.classgroup.gens[k].p,
                relative_order: self.classgroup.orders[k],
                value,
            })
            .collect();
        Ok(())
    }

    fn search_class_values(&self, rels: &[(u32, Vec<u32>, Mu8, Mu8)], chosen: &mut Vec<Mu8>) -> bool {
        let k = chosen.len();
        if k == rels.len() {
            return true;
        }
        let (o, r, target, sq) = &rels[k];
        for c in sq.sqrts() {
            let mut lhs = c.pow(*o as i64);
            for j in 0..k {
                lhs = lhs * self.conj_gen_value(j, chosen[j]).pow(r[j] as i64);
            }
            if lhs == *target {
                chosen.push(c);
                if self.search_class_values(rels, chosen) {
                    return true;
                }
                chosen.pop();
            }
        }
        false
    }

    pub fn is_coprime(&self, i: &QuadIdeal) -> bool {
        self.components.iter().all(|c| {
            let pr = c.prime.expect("components of K");
            !pr.contains_ideal(i)
        })
    }

    /// χ(I) for an integral ideal prime to the conductor.
    pub fn eval(&self, i: &QuadIdeal) -> Result<Mu8, HeckeError> {
        if !self.is_coprime(i) {
            return Err(HeckeError::NotCoprime(i.to_string()));
        }
        let e = self.classgroup.log(i);
        let gamma = self.reduce_to_principal(i, &e)?;
        let mut v = self.eval_principal(gamma).expect("coprime");
        for (j, &ej) in e.iter().enumerate() {
            v = v * self.conj_gen_value(j, self.class_values[j].value).inv().pow(ej as i64);
        }
        Ok(v)
    }

    /// Conductor as (prime ideal, exponent) pairs.
    pub fn conductor(&self) -> Vec<(QuadIdeal, u32)> {
        self.components.iter().map(|c| (c.prime.unwrap(), c.conductor)).collect()
    }

    pub fn conductor_norm(&self) -> u64 {
        self.components
            .iter()
            .map(|c| (c.prime.unwrap().norm as u64).pow(c.conductor))
            .product()
    }

    pub fn conductor_exponent(&self, p: u64) -> u32 {
        self.components.iter().filter(|c| c.p == p).map(|c| c.conductor).max().unwrap_or(0)
    }

    /// Rational primes below the conductor.
    pub fn ramified_primes(&self) -> Vec<u64> {
        let mut v: Vec<u64> = self.components.iter().map(|c| c.p).collect();
        v.sort();
        v.dedup();
        v
    }

    pub fn order(&self) -> u32 {
        let g = self
            .components
            .iter()
            .flat_map(|c| c.generators.iter().map(|g| g.value))
            .chain(self.class_values.iter().map(|c| c.value))
            .fold(8u32, |a, v| a.gcd(&(v.k() as u32)));
        8 / g
    }

    /// Product of the components above 2 on the rational residues 1, 3, 5, 7.
    pub fn two_adic_restriction(&self) -> [Mu8; 4] {
        [1i128, 3, 5, 7].map(|r| {
            self.components
                .iter()
                .filter(|c| c.p == 2)
                .map(|c| c.eval_coords((r, 0)).unwrap())
                .product()
        })
    }

    /// A copy with the value of one generator of one local component replaced.
    pub fn with_local_value(&self, comp: usize, gen: usize, value: Mu8) -> Result<HeckeCharacter, HeckeError> {
        let c = &self.components[comp];
        let gens: Vec<((i128, i128), Mu8)> = c
            .generators
            .iter()
            .enumerate()
            .map(|(k, g)| ((g.coords.0 as i128, g.coords.1 as i128), if k == gen { value } else { g.value }))
            .collect();
        let pr = split_prime(&self.field, c.p)
            .primes_above
            .into_iter()
            .find(|p| Some(p.ideal) == c.prime)
            .unwrap();
        let mut out = self.clone();
        out.components[comp] = LocalCharacter::over_prime(&self.field, &pr, c.exponent, &gens)?;
        Ok(out)
    }
}

/// Exponent of the conductor of the 2-adic component for t = 2, by the case
/// list on d (for d ≡ 7 mod 8, that of the primary choice).
pub fn chi_conductor_2part(d: u64, t: u64) -> Result<u32, HeckeError> {
    check_t(t)?;
    if t != 2 {
        return Err(HeckeError::Unsupported("read the 2-part from build_chi for odd t".into()));
    }
    let qs = classify_divisors(d, 2)?;
    let odd = parity(qs.count(DivisorClass::Q3) + qs.count(DivisorClass::Q5));
    Ok(match d % 8 {
        1 | 5 => 5,
        3 | 7 => 3,
        2 => {
            if odd {
                3
            } else {
                0
            }
        }
        _ => 4,
    })
}

// ---------------------------------------------------------------------------
// Verification

#[derive(Clone, Debug, Serialize)]
pub struct Counterexample {
    pub ideal: String,
    pub norm: i128,
    pub lhs: Mu8,
    pub rhs: Mu8,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub d: i64,
    pub t: u64,
    pub norm_bound: i128,
    pub ideals_checked: usize,
    /// χ(I)² = ε(N I)
    pub square_failures: Vec<Counterexample>,
    /// χ(conj I) = χ(I) ψ₋ₜ(N I)
    pub galois_failures: Vec<Counterexample>,
    pub ramified_claim: Vec<u64>,
    pub ramified_found: Vec<u64>,
    pub ramification_ok: bool,
    pub units_ok: bool,
    pub epsilon_product_formula: bool,
    pub passed: bool,
}

impl VerificationReport {
    pub fn summary(&self) -> String {
        let first = |v: &[Counterexample]| {
            v.first().map_or(String::new(), |c| format!(" (first at {} of norm {})", c.ideal, c.norm))
        };
        format!(
            "d={} t={}: {} ideals of norm <= {}; {} square failures{}; {} conjugation failures{}; ramification {}; units {}",
            self.d,
            self.t,
            self.ideals_checked,
            self.norm_bound,
            self.square_failures.len(),
            first(&self.square_failures),
            self.galois_failures.len(),
            first(&self.galois_failures),
            if self.ramification_ok { "ok" } else { "mismatch" },
            if self.units_ok { "ok" } else { "fail" },
        )
    }
}

/// Odd primes at which χ must ramify, and whether 2 is allowed.
fn ramification_claim(d: u64, t: u64) -> Result<Vec<u64>, HeckeError> {
    use DivisorClass::*;
    let qs = classify_divisors(d, t)?;
    let mut v: Vec<u64> = if t == 2 {
        [Q1, Q5, Q7].iter().flat_map(|c| qs.get(*c).to_vec()).collect()
    } else {
        [PlusMinus, MinusMinus].iter().flat_map(|c| qs.get(*c).to_vec()).collect()
    };
    v.sort();
    Ok(v)
}

/// Check the defining identities on all ideals of norm ≤ `bound` prime to 2td.
pub fn verify_character(chi: &HeckeCharacter, eps: &RationalCharacter, bound: i128) -> VerificationReport {
    let (d, t) = (chi.d as u64, chi.t);
    let psi = psi_minus_t(t).expect("valid t");
    let f = chi.field;
    let bad = (2 * t * d) as i128;
    let ideals: Vec<QuadIdeal> =
        ideals_up_to(&f, bound).into_iter().filter(|i| i.norm.gcd(&bad) == 1).collect();
    let mut square_failures = vec![];
    let mut galois_failures = vec![];
    for i in &ideals {
        let n = i.norm as i64;
        let x = chi.eval(i).expect("coprime by construction");
        let e = eps.eval(n).expect("coprime");
        if x * x != e {
            square_failures.push(Counterexample { ideal: i.to_string(), norm: i.norm, lhs: x * x, rhs: e });
        }
        let y = chi.eval(&i.conj(&f)).expect("coprime");
        let rhs = x * psi.eval(n).expect("coprime");
        if y != rhs {
            galois_failures.push(Counterexample { ideal: i.to_string(), norm: i.norm, lhs: y, rhs });
        }
    }
    let claim = ramification_claim(d, t).expect("valid t");
    let found = chi.ramified_primes();
    let found_odd: Vec<u64> = found.iter().copied().filter(|&p| p != 2 && p != t).collect();
    let claim_odd: Vec<u64> = claim.iter().copied().filter(|&p| p != t).collect();
    let allowed = |p: u64| p == 2 || p == t || claim.contains(&p);
    let ramification_ok = found_odd == claim_odd && found.iter().all(|&p| allowed(p));
    let units_ok = chi.unit_compatibility().iter().all(|(_, v)| v.is_one());
    let epsilon_product_formula = eps.product_formula().is_one();
    let passed = square_failures.is_empty()
        && galois_failures.is_empty()
        && ramification_ok
        && units_ok
        && epsilon_product_formula;
    VerificationReport {
        d: chi.d,
        t,
        norm_bound: bound,
        ideals_checked: ideals.len(),
        square_failures,
        galois_failures,
        ramified_claim: claim,
        ramified_found: found,
        ramification_ok,
        units_ok,
        epsilon_product_formula,
        passed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mu8_arithmetic() {
        assert_eq!(Mu8::I * Mu8::I, Mu8::MINUS_ONE);
        assert_eq!(Mu8::new(3).inv(), Mu8::new(5));
        assert_eq!(Mu8::new(1).order(), 8);
        assert_eq!(Mu8::MINUS_ONE.order(), 2);
        assert_eq!(Mu8::MINUS_ONE.sqrts(), vec![Mu8::I, Mu8::MINUS_I]);
        assert!(Mu8::new(1).sqrts().is_empty());
        assert_eq!(Mu8::new(3).to_string(), "z8^3");
    }

    #[test]
    fn divisor_classes() {
        use DivisorClass::*;
        let s = classify_divisors(5, 2).unwrap();
        assert_eq!(s.get(Q5), &[5]);
        assert_eq!(s.count(Q1) + s.count(Q3) + s.count(Q7), 0);
        let s = classify_divisors(5, 3).unwrap();
        assert_eq!(s.get(PlusMinus), &[5]);
        let s = classify_divisors(2, 3).unwrap();
        assert!(s.sets.values().all(|v| v.is_empty()));
        let s = classify_divisors(7, 3).unwrap();
        assert_eq!(s.get(MinusPlus), &[7]);
        assert!(classify_divisors(5, 5).is_err());
        assert!(classify_divisors(5, 4).is_err());
    }

    #[test]
    fn epsilon_examples() {
        let e = build_epsilon(6, 2).unwrap();
        assert_eq!((e.order(), e.conductor()), (2, 12));
        let e = build_epsilon(7, 2).unwrap();
        assert_eq!(e.conductor(), 1);
        let e = build_epsilon(7, 3).unwrap();
        assert_eq!((e.order(), e.conductor()), (2, 21));
        let e = build_epsilon(5, 2).unwrap();
        assert_eq!((e.order(), e.conductor()), (4, 20));
        let e = build_epsilon(5, 3).unwrap();
        assert_eq!((e.order(), e.conductor()), (4, 20));
        assert_eq!(build_epsilon(2, 3).unwrap().conductor(), 1);
        assert_eq!(build_epsilon(6, 3).unwrap().conductor(), 12);
    }

    #[test]
    fn two_adic_table_values() {
        let t = two_adic_table();
        assert_eq!(t[0], (-1, [1, -1, 1, -1]));
        assert_eq!(t[1], (-2, [1, 1, -1, -1]));
        assert_eq!(t[2], (2, [1, -1, -1, 1]));
    }

    #[test]
    fn chi_examples() {
        let chi = build_chi(7, 2).unwrap();
        assert_eq!(chi.order(), 2);
        assert_eq!(chi.conductor_norm(), 56);
        assert_eq!(build_chi(5, 2).unwrap().order(), 8);
        let chi = build_chi(6, 3).unwrap();
        assert_eq!(chi.conductor_exponent(2), 5);
        assert_eq!(chi.conductor_exponent(3), 1);
    }

    #[test]
    fn conductor_two_part() {
        assert_eq!(chi_conductor_2part(5, 2), Ok(5));
        assert_eq!(chi_conductor_2part(3, 2), Ok(3));
        assert_eq!(chi_conductor_2part(2, 2), Ok(0));
        assert!(chi_conductor_2part(5, 3).is_err());
    }

    #[test]
    fn eval_rejects_conductor_primes() {
        let chi = build_chi(7, 2).unwrap();
        let f = Field::new(7).unwrap();
        let p7 = split_prime(&f, 7).primes_above[0].ideal;
        assert!(matches!(chi.eval(&p7), Err(HeckeError::NotCoprime(_))));
    }
}
