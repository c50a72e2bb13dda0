//! Exact arithmetic in K = Q(√−d): elements, ideals in Hermite normal form,
//! prime splitting, valuations, residue fields and the class group.
//!
//! Integral elements are written over the basis (1, ω) with ω = √−d, or
//! ω = (1+√−d)/2 when d ≡ 3 (mod 4). Field elements are stored as
//! (a + b√−d)/den with a common positive denominator.

use crate::arith::{self, kronecker};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum FieldError {
    #[error("d = {0} is not a positive square-free integer")]
    NotSquareFree(i64),
    #[error("valuation of zero")]
    ZeroValuation,
    #[error("division by zero")]
    DivisionByZero,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Field {
    pub d: i64,
    pub disc: i64,
    pub half_basis: bool,
}

impl Field {
    pub fn new(d: i64) -> Result<Field, FieldError> {
        if d < 1 || !arith::is_squarefree(d as u64) {
            return Err(FieldError::NotSquareFree(d));
        }
        let half_basis = d % 4 == 3;
        let disc = if half_basis { -d } else { -4 * d };
        Ok(Field { d, disc, half_basis })
    }

    /// Trace and norm of ω, so that ω² = tω − n.
    pub fn omega_tn(&self) -> (i64, i64) {
        if self.half_basis {
            (1, (1 + self.d) / 4)
        } else {
            (0, self.d)
        }
    }

    pub fn elt(&self, a: i64, b: i64) -> QuadElement {
        QuadElement::new(self.d, BigInt::from(a), BigInt::from(b), BigInt::one())
    }

    pub fn int(&self, a: i64) -> QuadElement {
        self.elt(a, 0)
    }

    pub fn big(&self, a: BigInt, b: BigInt) -> QuadElement {
        QuadElement::new(self.d, a, b, BigInt::one())
    }

    /// r = √−d.
    pub fn sqrt_neg_d(&self) -> QuadElement {
        self.elt(0, 1)
    }

    /// u + vω as a field element.
    pub fn from_basis(&self, u: i128, v: i128) -> QuadElement {
        if self.half_basis {
            QuadElement::new(
                self.d,
                BigInt::from(2 * u + v),
                BigInt::from(v),
                BigInt::from(2),
            )
        } else {
            QuadElement::new(self.d, BigInt::from(u), BigInt::from(v), BigInt::one())
        }
    }

    /// Units of O_K.
    pub fn units(&self) -> Vec<QuadElement> {
        match self.d {
            1 => vec![self.int(1), self.elt(0, 1), self.int(-1), self.elt(0, -1)],
            3 => {
                let z = QuadElement::new(3, BigInt::from(-1), BigInt::one(), BigInt::from(2));
                let mut v = vec![self.int(1)];
                for i in 1..6 {
                    let next = &v[i - 1] * &z;
                    v.push(next);
                }
                v
            }
            _ => vec![self.int(1), self.int(-1)],
        }
    }

    /// Multiplication of integral elements in basis coordinates.
    pub fn mul_basis(&self, x: (i128, i128), y: (i128, i128)) -> (i128, i128) {
        let (t, n) = self.omega_tn();
        let (t, n) = (t as i128, n as i128);
        (
            x.0 * y.0 - n * x.1 * y.1,
            x.0 * y.1 + x.1 * y.0 + t * x.1 * y.1,
        )
    }

    pub fn conj_basis(&self, x: (i128, i128)) -> (i128, i128) {
        let (t, _) = self.omega_tn();
        (x.0 + x.1 * t as i128, -x.1)
    }

    pub fn norm_basis(&self, x: (i128, i128)) -> i128 {
        let (t, n) = self.omega_tn();
        x.0 * x.0 + t as i128 * x.0 * x.1 + n as i128 * x.1 * x.1
    }
}

/// (a + b√−d)/den, normalised with den > 0 and gcd(a, b, den) = 1.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct QuadElement {
    pub d: i64,
    pub a: BigInt,
    pub b: BigInt,
    pub den: BigInt,
}

impl QuadElement {
    pub fn new(d: i64, a: BigInt, b: BigInt, den: BigInt) -> QuadElement {
        assert!(!den.is_zero(), "zero denominator");
        let (mut a, mut b, mut den) = (a, b, den);
        if den.is_negative() {
            a = -a;
            b = -b;
            den = -den;
        }
        let g = a.gcd(&b).gcd(&den);
        if !g.is_one() && !g.is_zero() {
            a /= &g;
            b /= &g;
            den /= &g;
        }
        QuadElement { d, a, b, den }
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    /// The rational integer value, if this element is one.
    pub fn to_integer(&self) -> Option<BigInt> {
        if self.b.is_zero() && self.den.is_one() {
            Some(self.a.clone())
        } else {
            None
        }
    }

    pub fn conj(&self) -> QuadElement {
        QuadElement { d: self.d, a: self.a.clone(), b: -&self.b, den: self.den.clone() }
    }

    /// Norm as a reduced fraction (num, den).
    pub fn norm(&self) -> (BigInt, BigInt) {
        let num = &self.a * &self.a + BigInt::from(self.d) * &self.b * &self.b;
        let den = &self.den * &self.den;
        let g = num.gcd(&den);
        (num / &g, den / g)
    }

    pub fn norm_int(&self) -> Option<BigInt> {
        let (n, d) = self.norm();
        if d.is_one() {
            Some(n)
        } else {
            None
        }
    }

    pub fn is_integral(&self) -> bool {
        if self.den.is_one() {
            return true;
        }
        self.den == BigInt::from(2) && self.d % 4 == 3 && self.a.is_odd() && self.b.is_odd()
    }

    /// Coordinates (u, v) over (1, ω) of an integral element.
    pub fn basis_coords(&self) -> Option<(BigInt, BigInt)> {
        if !self.is_integral() {
            return None;
        }
        if self.d % 4 == 3 {
            let two = BigInt::from(2);
            let aa = &self.a * &two / &self.den;
            let bb = &self.b * &two / &self.den;
            Some(((&aa - &bb) / 2, bb))
        } else {
            Some((self.a.clone(), self.b.clone()))
        }
    }

    pub fn inv(&self) -> Result<QuadElement, FieldError> {
        if self.is_zero() {
            return Err(FieldError::DivisionByZero);
        }
        let n = &self.a * &self.a + BigInt::from(self.d) * &self.b * &self.b;
        Ok(QuadElement::new(self.d, &self.a * &self.den, -&self.b * &self.den, n))
    }

    pub fn div(&self, other: &QuadElement) -> Result<QuadElement, FieldError> {
        Ok(self * &other.inv()?)
    }

    pub fn pow(&self, e: u32) -> QuadElement {
        let mut r = QuadElement::new(self.d, BigInt::one(), BigInt::zero(), BigInt::one());
        let mut b = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                r = &r * &b;
            }
            b = &b * &b;
            e >>= 1;
        }
        r
    }

    pub fn scale(&self, k: &BigInt) -> QuadElement {
        QuadElement::new(self.d, &self.a * k, &self.b * k, self.den.clone())
    }

    pub fn small(&self) -> Option<(i64, i64, i64)> {
        Some((self.a.to_i64()?, self.b.to_i64()?, self.den.to_i64()?))
    }
}

impl fmt::Debug for QuadElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for QuadElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let num = if self.b.is_zero() {
            format!("{}", self.a)
        } else if self.a.is_zero() {
            format!("{}*r", self.b)
        } else if self.b.is_negative() {
            format!("{} - {}*r", self.a, -&self.b)
        } else {
            format!("{} + {}*r", self.a, self.b)
        };
        if self.den.is_one() {
            write!(f, "{}", num)
        } else {
            write!(f, "({})/{}", num, self.den)
        }
    }
}

fn add_impl(x: &QuadElement, y: &QuadElement, sign: i32) -> QuadElement {
    assert_eq!(x.d, y.d, "elements of different fields");
    let (a2, b2) = if sign > 0 { (y.a.clone(), y.b.clone()) } else { (-&y.a, -&y.b) };
    if x.den == y.den {
        return QuadElement::new(x.d, &x.a + a2, &x.b + b2, x.den.clone());
    }
    QuadElement::new(
        x.d,
        &x.a * &y.den + a2 * &x.den,
        &x.b * &y.den + b2 * &x.den,
        &x.den * &y.den,
    )
}

fn mul_impl(x: &QuadElement, y: &QuadElement) -> QuadElement {
    assert_eq!(x.d, y.d, "elements of different fields");
    let d = BigInt::from(x.d);
    QuadElement::new(
        x.d,
        &x.a * &y.a - d * &x.b * &y.b,
        &x.a * &y.b + &x.b * &y.a,
        &x.den * &y.den,
    )
}

macro_rules! binop {
    ($tr:ident, $m:ident, $body:expr) => {
        impl<'a, 'b> $tr<&'b QuadElement> for &'a QuadElement {
            type Output = QuadElement;
            fn $m(self, rhs: &'b QuadElement) -> QuadElement {
                $body(self, rhs)
            }
        }
        impl $tr<QuadElement> for QuadElement {
            type Output = QuadElement;
            fn $m(self, rhs: QuadElement) -> QuadElement {
                $body(&self, &rhs)
            }
        }
        impl<'a> $tr<&'a QuadElement> for QuadElement {
            type Output = QuadElement;
            fn $m(self, rhs: &'a QuadElement) -> QuadElement {
                $body(&self, rhs)
            }
        }
        impl<'a> $tr<QuadElement> for &'a QuadElement {
            type Output = QuadElement;
            fn $m(self, rhs: QuadElement) -> QuadElement {
                $body(self, &rhs)
            }
        }
    };
}

binop!(Add, add, |x, y| add_impl(x, y, 1));
binop!(Sub, sub, |x, y| add_impl(x, y, -1));
binop!(Mul, mul, mul_impl);

impl Neg for &QuadElement {
    type Output = QuadElement;
    fn neg(self) -> QuadElement {
        QuadElement { d: self.d, a: -&self.a, b: -&self.b, den: self.den.clone() }
    }
}

impl Neg for QuadElement {
    type Output = QuadElement;
    fn neg(self) -> QuadElement {
        -&self
    }
}

impl Mul<i64> for &QuadElement {
    type Output = QuadElement;
    fn mul(self, k: i64) -> QuadElement {
        self.scale(&BigInt::from(k))
    }
}

impl Mul<i64> for QuadElement {
    type Output = QuadElement;
    fn mul(self, k: i64) -> QuadElement {
        self.scale(&BigInt::from(k))
    }
}

/// An ideal of O_K with Z-basis {a, b + cω}, where c | a and c | b.
/// Stored as the lower-triangular matrix [[a, 0], [b, c]].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct QuadIdeal {
    pub hnf: [[i128; 2]; 2],
    pub norm: i128,
}

impl QuadIdeal {
    /// Hermite normal form of the Z-lattice spanned by `vecs`; must be of full rank.
    pub fn from_lattice(vecs: &[(i128, i128)]) -> QuadIdeal {
        let mut rows: Vec<(i128, i128)> = vecs.iter().copied().filter(|v| *v != (0, 0)).collect();
        // Eliminate the second coordinate down to a single row.
        let mut pivot: Option<(i128, i128)> = None;
        let mut rest = vec![];
        for r in rows.drain(..) {
            match pivot {
                None => {
                    if r.1 != 0 {
                        pivot = Some(r);
                    } else {
                        rest.push(r.0);
                    }
                }
                Some(p) => {
                    if r.1 == 0 {
                        rest.push(r.0);
                        continue;
                    }
                    let (g, x, y) = arith::ext_gcd(p.1, r.1);
                    let newp = (x * p.0 + y * r.0, g);
                    let (pa, ra) = (p.1 / g, r.1 / g);
                    // r*pa - p*ra has zero second coordinate.
                    rest.push(r.0 * pa - p.0 * ra);
                    pivot = Some(newp);
                }
            }
        }
        let (mut b, mut c) = pivot.expect("lattice of full rank");
        if c < 0 {
            b = -b;
            c = -c;
        }
        let mut a = 0i128;
        for x in rest {
            a = a.gcd(&x);
        }
        assert!(a != 0, "lattice of full rank");
        b = b.rem_euclid(a);
        QuadIdeal { hnf: [[a, 0], [b, c]], norm: a * c }
    }

    pub fn a(&self) -> i128 {
        self.hnf[0][0]
    }
    pub fn b(&self) -> i128 {
        self.hnf[1][0]
    }
    pub fn c(&self) -> i128 {
        self.hnf[1][1]
    }

    pub fn basis(&self) -> [(i128, i128); 2] {
        [(self.a(), 0), (self.b(), self.c())]
    }

    pub fn unit() -> QuadIdeal {
        QuadIdeal { hnf: [[1, 0], [0, 1]], norm: 1 }
    }

    /// Ideal generated by the given integral elements (basis coordinates).
    pub fn generated(field: &Field, gens: &[(i128, i128)]) -> QuadIdeal {
        let mut vecs = vec![];
        for &g in gens {
            vecs.push(g);
            vecs.push(field.mul_basis(g, (0, 1)));
        }
        QuadIdeal::from_lattice(&vecs)
    }

    pub fn principal(field: &Field, x: &QuadElement) -> QuadIdeal {
        let (u, v) = x.basis_coords().expect("integral generator");
        QuadIdeal::generated(field, &[(u.to_i128().unwrap(), v.to_i128().unwrap())])
    }

    pub fn rational(n: i128) -> QuadIdeal {
        let n = n.abs();
        QuadIdeal { hnf: [[n, 0], [0, n]], norm: n * n }
    }

    pub fn contains(&self, x: (i128, i128)) -> bool {
        if x.1 % self.c() != 0 {
            return false;
        }
        let k = x.1 / self.c();
        (x.0 - k * self.b()) % self.a() == 0
    }

    pub fn contains_ideal(&self, other: &QuadIdeal) -> bool {
        other.basis().iter().all(|&v| self.contains(v))
    }

    pub fn mul(&self, field: &Field, other: &QuadIdeal) -> QuadIdeal {
        let mut vecs = vec![];
        for x in self.basis() {
            for y in other.basis() {
                vecs.push(field.mul_basis(x, y));
            }
        }
        QuadIdeal::from_lattice(&vecs)
    }

    pub fn pow(&self, field: &Field, e: u32) -> QuadIdeal {
        let mut r = QuadIdeal::unit();
        for _ in 0..e {
            r = r.mul(field, self);
        }
        r
    }

    pub fn conj(&self, field: &Field) -> QuadIdeal {
        let v: Vec<_> = self.basis().iter().map(|&x| field.conj_basis(x)).collect();
        QuadIdeal::from_lattice(&v)
    }

    /// Reduction of an integral element modulo this ideal, as a canonical pair.
    pub fn reduce(&self, x: (i128, i128)) -> (i128, i128) {
        let v = x.1.rem_euclid(self.c());
        let k = (x.1 - v) / self.c();
        let u = (x.0 - k * self.b()).rem_euclid(self.a());
        (u, v)
    }

    /// Largest rational integer contained in the ideal (the positive generator of I ∩ Z).
    pub fn min_integer(&self) -> i128 {
        self.a()
    }

    pub fn is_coprime_to(&self, n: i128) -> bool {
        self.norm.gcd(&n) == 1
    }
}

impl fmt::Display for QuadIdeal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}, {} + {}w>", self.a(), self.b(), self.c())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitKind {
    Split,
    Inert,
    Ramified,
}

/// A prime ideal together with the data needed for local computations.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PrimeIdeal {
    pub field: Field,
    pub p: u64,
    pub kind: SplitKind,
    pub ideal: QuadIdeal,
    /// Image of ω in the residue field for degree-one primes.
    pub rho: u64,
    /// Image of ω at the conjugate prime (split case).
    pub rho_bar: u64,
}

#[derive(Clone, Debug)]
pub struct SplittingData {
    pub kind: SplitKind,
    pub primes_above: Vec<PrimeIdeal>,
    pub residue_degree: u32,
    pub ramification_index: u32,
}

/// Roots of ω² − tω + n modulo p.
fn omega_roots(field: &Field, p: u64) -> Vec<u64> {
    let (t, n) = field.omega_tn();
    let tm = t.rem_euclid(p as i64) as u64;
    let nm = n.rem_euclid(p as i64) as u64;
    if p == 2 {
        return (0..2u64).filter(|&x| (x * x + tm * x + nm) % 2 == 0).collect();
    }
    // x = (t ± sqrt(t² − 4n))/2
    let disc = ((t as i128 * t as i128 - 4 * n as i128).rem_euclid(p as i128)) as u64;
    let inv2 = (p + 1) / 2;
    match arith::sqrt_mod(disc, p) {
        None => vec![],
        Some(s) => {
            let r1 = arith::mul_mod((tm + s) % p, inv2, p);
            let r2 = arith::mul_mod((tm + p - s) % p, inv2, p);
            let mut v = vec![r1.min(r2), r1.max(r2)];
            v.dedup();
            v
        }
    }
}

pub fn split_prime(field: &Field, p: u64) -> SplittingData {
    assert!(arith::is_prime(p), "{} is not prime", p);
    let k = kronecker(field.disc, p as i64);
    let roots = omega_roots(field, p);
    let mk = |rho: u64, rho_bar: u64, kind: SplitKind| {
        let ideal = if kind == SplitKind::Inert {
            QuadIdeal::rational(p as i128)
        } else {
            QuadIdeal::from_lattice(&[(p as i128, 0), (-(rho as i128), 1)])
        };
        PrimeIdeal { field: *field, p, kind, ideal, rho, rho_bar }
    };
    match k {
        1 => {
            let (r0, r1) = (roots[0], roots[1]);
            SplittingData {
                kind: SplitKind::Split,
                primes_above: vec![mk(r0, r1, SplitKind::Split), mk(r1, r0, SplitKind::Split)],
                residue_degree: 1,
                ramification_index: 1,
            }
        }
        0 => SplittingData {
            kind: SplitKind::Ramified,
            primes_above: vec![mk(roots[0], roots[0], SplitKind::Ramified)],
            residue_degree: 1,
            ramification_index: 2,
        },
        _ => SplittingData {
            kind: SplitKind::Inert,
            primes_above: vec![mk(0, 0, SplitKind::Inert)],
            residue_degree: 2,
            ramification_index: 1,
        },
    }
}

fn big_mod(x: &BigInt, p: u64) -> u64 {
    x.mod_floor(&BigInt::from(p)).to_u64().unwrap()
}

impl PrimeIdeal {
    pub fn e(&self) -> u32 {
        if self.kind == SplitKind::Ramified {
            2
        } else {
            1
        }
    }

    pub fn f(&self) -> u32 {
        if self.kind == SplitKind::Inert {
            2
        } else {
            1
        }
    }

    pub fn norm(&self) -> u64 {
        self.p.pow(self.f())
    }

    pub fn conj(&self) -> PrimeIdeal {
        if self.kind != SplitKind::Split {
            return self.clone();
        }
        let ideal = QuadIdeal::from_lattice(&[(self.p as i128, 0), (-(self.rho_bar as i128), 1)]);
        PrimeIdeal { ideal, rho: self.rho_bar, rho_bar: self.rho, ..self.clone() }
    }

    /// The uniformizer used for local computations: √−d or 1+√−d at ramified
    /// primes, p otherwise.
    pub fn uniformizer(&self) -> QuadElement {
        let f = &self.field;
        match self.kind {
            SplitKind::Ramified => {
                if self.p == 2 && f.d % 2 == 1 {
                    f.elt(1, 1)
                } else {
                    f.sqrt_neg_d()
                }
            }
            _ => f.int(self.p as i64),
        }
    }

    fn basis_coords_big(&self, x: &BigInt, y: &BigInt) -> (BigInt, BigInt) {
        // x + y√−d in (1, ω) coordinates.
        if self.field.half_basis {
            (x - y, y * 2)
        } else {
            (x.clone(), y.clone())
        }
    }

    fn val_integral(&self, mut u: BigInt, mut v: BigInt) -> i64 {
        let pb = BigInt::from(self.p);
        let mut k = 0i64;
        loop {
            if (&u % &pb).is_zero() && (&v % &pb).is_zero() {
                u /= &pb;
                v /= &pb;
                k += self.e() as i64;
            } else {
                break;
            }
        }
        let (t, n) = self.field.omega_tn();
        let norm = || &u * &u + BigInt::from(t) * &u * &v + BigInt::from(n) * &v * &v;
        match self.kind {
            SplitKind::Inert => {}
            SplitKind::Ramified => k += arith::val_big(&norm(), self.p) as i64,
            SplitKind::Split => {
                let r = (big_mod(&u, self.p) as u128 + big_mod(&v, self.p) as u128 * self.rho as u128)
                    % self.p as u128;
                if r == 0 {
                    k += arith::val_big(&norm(), self.p) as i64;
                }
            }
        }
        k
    }

    /// v_P(x) for nonzero x in K (negative when x has a pole at P).
    pub fn valuation(&self, x: &QuadElement) -> Result<i64, FieldError> {
        if x.is_zero() {
            return Err(FieldError::ZeroValuation);
        }
        let (u, v) = self.basis_coords_big(&x.a, &x.b);
        let vy = self.val_integral(u, v);
        Ok(vy - self.e() as i64 * arith::val_big(&x.den, self.p) as i64)
    }

    /// Valuation with +∞ (i64::MAX) for zero.
    pub fn val(&self, x: &QuadElement) -> i64 {
        self.valuation(x).unwrap_or(i64::MAX)
    }

    pub fn ideal_valuation(&self, i: &QuadIdeal) -> u32 {
        let f = self.field;
        let mut k = 0;
        let mut pk = self.ideal;
        while pk.contains_ideal(i) {
            k += 1;
            pk = pk.mul(&f, &self.ideal);
        }
        k
    }

    pub fn residue_field(&self) -> ResidueField {
        let (t, n) = self.field.omega_tn();
        ResidueField {
            p: self.p,
            deg: self.f(),
            t: t.rem_euclid(self.p as i64) as u64,
            n: n.rem_euclid(self.p as i64) as u64,
        }
    }

    fn reduce_basis(&self, u: &BigInt, v: &BigInt) -> FElem {
        let (um, vm) = (big_mod(u, self.p), big_mod(v, self.p));
        match self.kind {
            SplitKind::Inert => (um, vm),
            _ => (((um as u128 + vm as u128 * self.rho as u128) % self.p as u128) as u64, 0),
        }
    }

    /// Image of a P-integral element in the residue field.
    pub fn reduce(&self, x: &QuadElement) -> Option<FElem> {
        if x.is_zero() {
            return Some((0, 0));
        }
        if self.valuation(x).ok()? < 0 {
            return None;
        }
        let s = arith::val_big(&x.den, self.p);
        let pb = BigInt::from(self.p);
        let ps = num_traits::pow(pb.clone(), s as usize);
        let m = &x.den / &ps;
        let (mut u, mut v) = self.basis_coords_big(&x.a, &x.b);
        let mut w = (m.clone(), BigInt::zero());
        if self.kind == SplitKind::Split && s > 0 {
            // Multiply through by c^s with c = ω − ρ̄, a unit at P lying in P̄.
            let c = (BigInt::from(-(self.rho_bar as i64)), BigInt::one());
            for _ in 0..s {
                let (uu, vv) = mul_big(&self.field, (&u, &v), (&c.0, &c.1));
                u = uu;
                v = vv;
                let (wu, wv) = mul_big(&self.field, (&w.0, &w.1), (&c.0, &c.1));
                w = (wu, wv);
            }
        }
        debug_assert!((&u % &ps).is_zero() && (&v % &ps).is_zero());
        u /= &ps;
        v /= &ps;
        let rf = self.residue_field();
        let num = self.reduce_basis(&u, &v);
        let den = self.reduce_basis(&w.0, &w.1);
        Some(rf.mul(num, rf.inv(den)))
    }

    /// A lift of a residue-field element to O_K.
    pub fn lift(&self, y: FElem) -> QuadElement {
        self.field.from_basis(y.0 as i128, y.1 as i128)
    }
}

fn mul_big(field: &Field, x: (&BigInt, &BigInt), y: (&BigInt, &BigInt)) -> (BigInt, BigInt) {
    let (t, n) = field.omega_tn();
    (
        x.0 * y.0 - BigInt::from(n) * x.1 * y.1,
        x.0 * y.1 + x.1 * y.0 + BigInt::from(t) * x.1 * y.1,
    )
}

/// Residue-field element (u, v) meaning u + v·ω̄ (v = 0 in degree one).
pub type FElem = (u64, u64);

/// F_p, or F_p[ω]/(ω² − tω + n) when deg = 2.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ResidueField {
    pub p: u64,
    pub deg: u32,
    pub t: u64,
    pub n: u64,
}

impl ResidueField {
    pub fn prime(p: u64) -> ResidueField {
        ResidueField { p, deg: 1, t: 0, n: 0 }
    }

    pub fn size(&self) -> u64 {
        self.p.pow(self.deg)
    }

    pub fn elements(&self) -> impl Iterator<Item = FElem> + '_ {
        let p = self.p;
        let top = if self.deg == 2 { p } else { 1 };
        (0..top).flat_map(move |v| (0..p).map(move |u| (u, v)))
    }

    pub fn from_int(&self, k: i64) -> FElem {
        (k.rem_euclid(self.p as i64) as u64, 0)
    }

    pub fn add(&self, x: FElem, y: FElem) -> FElem {
        ((x.0 + y.0) % self.p, (x.1 + y.1) % self.p)
    }

    pub fn neg(&self, x: FElem) -> FElem {
        ((self.p - x.0) % self.p, (self.p - x.1) % self.p)
    }

    pub fn sub(&self, x: FElem, y: FElem) -> FElem {
        self.add(x, self.neg(y))
    }

    pub fn mul(&self, x: FElem, y: FElem) -> FElem {
        let p = self.p as u128;
        let (a, b, c, d) = (x.0 as u128, x.1 as u128, y.0 as u128, y.1 as u128);
        let bd = b * d % p;
        // (a + bω)(c + dω) = ac − n·bd + (ad + bc + t·bd)ω
        let u = (a * c % p + (p - self.n as u128 % p) * bd) % p;
        let v = (a * d + b * c + self.t as u128 * bd) % p;
        (u as u64, v as u64)
    }

    pub fn pow(&self, x: FElem, mut e: u64) -> FElem {
        let mut r = (1 % self.p, 0);
        let mut b = x;
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul(r, b);
            }
            b = self.mul(b, b);
            e >>= 1;
        }
        r
    }

    pub fn is_zero(&self, x: FElem) -> bool {
        x == (0, 0)
    }

    pub fn inv(&self, x: FElem) -> FElem {
        assert!(!self.is_zero(x), "inverse of zero in residue field");
        self.pow(x, self.size() - 2)
    }

    pub fn is_square(&self, x: FElem) -> bool {
        if self.is_zero(x) || self.p == 2 {
            return true;
        }
        self.pow(x, (self.size() - 1) / 2) == (1, 0)
    }

    /// Some y with y^k = x, by exhaustive search.
    pub fn root(&self, x: FElem, k: u32) -> Option<FElem> {
        self.elements().find(|&y| self.pow(y, k as u64) == x)
    }

    /// Roots of a polynomial (coefficients from constant term up).
    pub fn poly_roots(&self, coeffs: &[FElem]) -> Vec<FElem> {
        self.elements()
            .filter(|&y| {
                let mut acc = (0, 0);
                for c in coeffs.iter().rev() {
                    acc = self.add(self.mul(acc, y), *c);
                }
                self.is_zero(acc)
            })
            .collect()
    }
}

/// Reduced positive definite binary quadratic form (a, b, c).
pub type Form = (i64, i64, i64);

pub fn reduce_form(f: Form) -> Form {
    let (mut a, mut b, mut c) = f;
    let disc = b * b - 4 * a * c;
    loop {
        if b > a || b <= -a {
            let k = (a - b).div_euclid(2 * a);
            b += 2 * k * a;
            c = (b * b - disc) / (4 * a);
        }
        if a > c {
            (a, b, c) = (c, -b, a);
            continue;
        }
        if a == c && b < 0 {
            b = -b;
        }
        return (a, b, c);
    }
}

/// All reduced primitive forms of discriminant `disc` < 0.
pub fn reduced_forms(disc: i64) -> Vec<Form> {
    let mut out = vec![];
    let amax = ((-disc) as f64 / 3.0).sqrt() as i64 + 1;
    for a in 1..=amax {
        for b in -a + 1..=a {
            let num = b * b - disc;
            if num % (4 * a) != 0 {
                continue;
            }
            let c = num / (4 * a);
            if c < a {
                continue;
            }
            if a == c && b < 0 {
                continue;
            }
            if a.gcd(&b).gcd(&c) != 1 {
                continue;
            }
            out.push((a, b, c));
        }
    }
    out
}

pub fn class_number(disc: i64) -> usize {
    reduced_forms(disc).len()
}

/// Composition of primitive forms of the same discriminant, reduced.
pub fn compose_forms(f1: Form, f2: Form) -> Form {
    let disc = f1.1 * f1.1 - 4 * f1.0 * f1.2;
    let (mut f1, mut f2) = (f1, f2);
    if f1.0 > f2.0 {
        std::mem::swap(&mut f1, &mut f2);
    }
    let (a1, b1, _) = f1;
    let (a2, b2, c2) = f2;
    let s = (b1 + b2) / 2;
    let n = b2 - s;
    let (y1, d) = if a2 % a1 == 0 {
        (0i128, a1 as i128)
    } else {
        let (g, u, _v) = arith::ext_gcd(a2 as i128, a1 as i128);
        (u, g)
    };
    let (x2, y2, d1) = if (s as i128) % d == 0 {
        (0i128, -1i128, d)
    } else {
        let (g, x, y) = arith::ext_gcd(s as i128, d);
        (x, -y, g)
    };
    let v1 = a1 as i128 / d1;
    let v2 = a2 as i128 / d1;
    let r = (y1 * y2 * n as i128 - x2 * c2 as i128).rem_euclid(v1);
    let b3 = b2 as i128 + 2 * v2 * r;
    let a3 = v1 * v2;
    let num = b3 * b3 - disc as i128;
    assert_eq!(num % (4 * a3), 0, "composition failed");
    let c3 = num / (4 * a3);
    reduce_form((a3 as i64, b3 as i64, c3 as i64))
}

pub fn identity_form(disc: i64) -> Form {
    if disc.rem_euclid(4) == 0 {
        (1, 0, -disc / 4)
    } else {
        (1, 1, (1 - disc) / 4)
    }
}

pub fn inverse_form(f: Form) -> Form {
    reduce_form((f.0, -f.1, f.2))
}

/// Reduced form attached to the class of an ideal.
pub fn ideal_class(field: &Field, i: &QuadIdeal) -> Form {
    let c = i.c();
    let a = i.a() / c;
    let beta = i.b() / c;
    let bb = if field.half_basis { -(2 * beta + 1) } else { -2 * beta };
    let num = bb * bb - field.disc as i128;
    assert_eq!(num % (4 * a), 0);
    reduce_form((a as i64, bb as i64, (num / (4 * a)) as i64))
}

/// Class group presented by split prime generators with relative orders:
/// the class of gens[k]^orders[k] lies in the subgroup generated by gens[..k].
#[derive(Clone, Debug)]
pub struct ClassGroup {
    pub field: Field,
    pub h: usize,
    pub gens: Vec<PrimeIdeal>,
    pub orders: Vec<u32>,
    /// Reduced form -> exponent vector over gens.
    pub dlog: HashMap<Form, Vec<u32>>,
}

impl ClassGroup {
    pub fn order(&self) -> usize {
        self.h
    }

    /// Exponents e with [I] = ∏ [gens_k]^{e_k}.
    pub fn log(&self, i: &QuadIdeal) -> Vec<u32> {
        self.dlog[&ideal_class(&self.field, i)].clone()
    }

    /// Order of the class of an ideal.
    pub fn element_order(&self, i: &QuadIdeal) -> u32 {
        let f = ideal_class(&self.field, i);
        let id = identity_form(self.field.disc);
        let mut g = f;
        let mut k = 1;
        while g != id {
            g = compose_forms(g, f);
            k += 1;
        }
        k
    }
}

/// Class group with generators chosen among split primes not dividing `avoid`.
pub fn class_group_avoiding(field: &Field, avoid: i64) -> ClassGroup {
    let disc = field.disc;
    let h = class_number(disc);
    let id = identity_form(disc);
    let mut dlog: HashMap<Form, Vec<u32>> = HashMap::new();
    dlog.insert(id, vec![]);
    let mut gens = vec![];
    let mut orders = vec![];
    let mut p = 2u64;
    while dlog.len() < h {
        p += 1;
        if !arith::is_prime(p) || avoid % p as i64 == 0 || kronecker(disc, p as i64) != 1 {
            continue;
        }
        let prime = split_prime(field, p).primes_above[0].clone();
        let f = ideal_class(field, &prime.ideal);
        if dlog.contains_key(&f) {
            continue;
        }
        let mut n = 1u32;
        let mut g = f;
        while !dlog.contains_key(&g) {
            g = compose_forms(g, f);
            n += 1;
        }
        let old: Vec<(Form, Vec<u32>)> = dlog.iter().map(|(k, v)| (*k, v.clone())).collect();
        let mut new = HashMap::new();
        for (form, exps) in old {
            let mut cur = form;
            for i in 0..n {
                let mut e = exps.clone();
                e.resize(gens.len(), 0);
                e.push(i);
                new.insert(cur, e);
                cur = compose_forms(cur, f);
            }
        }
        dlog = new;
        for v in dlog.values_mut() {
            v.resize(gens.len() + 1, 0);
        }
        gens.push(prime);
        orders.push(n);
    }
    for v in dlog.values_mut() {
        v.resize(gens.len(), 0);
    }
    ClassGroup { field: *field, h, gens, orders, dlog }
}

pub fn class_group(field: &Field) -> ClassGroup {
    class_group_avoiding(field, 1)
}

/// The ideals ⟨q, √−d⟩ for odd primes q | d.
pub fn two_torsion_ideals(field: &Field) -> Vec<QuadIdeal> {
    arith::factor_u64(field.d as u64)
        .into_iter()
        .filter(|&(q, _)| q != 2)
        .map(|(q, _)| {
            let r = field.sqrt_neg_d().basis_coords().unwrap();
            QuadIdeal::generated(field, &[(q as i128, 0), (r.0.to_i128().unwrap(), r.1.to_i128().unwrap())])
        })
        .collect()
}

/// Lagrange-Gauss reduction of the lattice of `i` under the norm form.
/// Returns a shortest nonzero element in basis coordinates.
pub fn shortest_element(field: &Field, i: &QuadIdeal) -> (i128, i128) {
    let (t, n) = field.omega_tn();
    let (t, n) = (t as i128, n as i128);
    let q = |x: (i128, i128)| field.norm_basis(x);
    // 2B(x, y) = Q(x + y) − Q(x) − Q(y)
    let b2 = |x: (i128, i128), y: (i128, i128)| {
        2 * x.0 * y.0 + t * (x.0 * y.1 + x.1 * y.0) + 2 * n * x.1 * y.1
    };
    let [mut u, mut v] = i.basis();
    if q(u) > q(v) {
        std::mem::swap(&mut u, &mut v);
    }
    loop {
        let qu = q(u);
        // nearest integer to B(u, v)/Q(u)
        let num = b2(u, v);
        let mu = (num + qu).div_euclid(2 * qu);
        v = (v.0 - mu * u.0, v.1 - mu * u.1);
        if q(v) >= qu {
            return u;
        }
        std::mem::swap(&mut u, &mut v);
    }
}

/// A generator of a principal ideal: the shortest vector of a principal
/// lattice (α)O_K is α times a unit.
pub fn principal_generator(field: &Field, i: &QuadIdeal) -> Option<QuadElement> {
    let s = shortest_element(field, i);
    if field.norm_basis(s) == i.norm {
        Some(field.from_basis(s.0, s.1))
    } else {
        None
    }
}

/// All ideals of norm at most `bound`.
pub fn ideals_up_to(field: &Field, bound: i128) -> Vec<QuadIdeal> {
    let mut out = vec![];
    for n in 1..=bound {
        for c in 1..=n {
            if n % (c * c) != 0 {
                continue;
            }
            let a0 = n / (c * c);
            // Primitive ideals of norm a0: aZ + (b + ω)Z with N(b + ω) ≡ 0 mod a0.
            for b in 0..a0 {
                if field.norm_basis((b, 1)) % a0 != 0 {
                    continue;
                }
                out.push(QuadIdeal { hnf: [[a0 * c, 0], [b * c, c]], norm: n });
            }
        }
    }
    out
}
