//! Tate's algorithm at a prime of K: Kodaira type, conductor exponent and a
//! minimal model, computed with exact global arithmetic.

use crate::arith;
use crate::ellcurve::CurveModel;
use crate::quadfield::{split_prime, FElem, Field, PrimeIdeal, QuadElement, ResidueField, SplitKind};
use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive};
use serde::{Serialize, Serializer};
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Kodaira {
    I0,
    In(u32),
    II,
    III,
    IV,
    I0Star,
    InStar(u32),
    IVStar,
    IIIStar,
    IIStar,
}

impl Kodaira {
    /// Number of irreducible components of the special fibre.
    pub fn components(&self) -> u32 {
        match self {
            Kodaira::I0 => 1,
            Kodaira::In(n) => *n,
            Kodaira::II => 1,
            Kodaira::III => 2,
            Kodaira::IV => 3,
            Kodaira::I0Star => 5,
            Kodaira::InStar(n) => 5 + n,
            Kodaira::IVStar => 7,
            Kodaira::IIIStar => 8,
            Kodaira::IIStar => 9,
        }
    }
}

impl fmt::Display for Kodaira {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Kodaira::I0 => write!(f, "I0"),
            Kodaira::In(n) => write!(f, "I{}", n),
            Kodaira::II => write!(f, "II"),
            Kodaira::III => write!(f, "III"),
            Kodaira::IV => write!(f, "IV"),
            Kodaira::I0Star => write!(f, "I0*"),
            Kodaira::InStar(n) => write!(f, "I{}*", n),
            Kodaira::IVStar => write!(f, "IV*"),
            Kodaira::IIIStar => write!(f, "III*"),
            Kodaira::IIStar => write!(f, "II*"),
        }
    }
}

impl Serialize for Kodaira {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

#[derive(Clone, Debug)]
pub struct LocalReduction {
    pub prime: PrimeIdeal,
    pub kodaira: Kodaira,
    pub f: u32,
    pub vdisc_min: u32,
    pub model: CurveModel,
    /// For multiplicative reduction: whether the tangents are rational.
    pub split_multiplicative: Option<bool>,
}

impl LocalReduction {
    pub fn is_good(&self) -> bool {
        self.f == 0
    }
}

/// Arithmetic at a fixed prime: valuations, residues and lifts.
struct Local<'a> {
    pr: &'a PrimeIdeal,
    pi: QuadElement,
    rf: ResidueField,
    p: u64,
}

impl<'a> Local<'a> {
    fn new(pr: &'a PrimeIdeal) -> Local<'a> {
        Local { pr, pi: pr.uniformizer(), rf: pr.residue_field(), p: pr.p }
    }

    fn val(&self, x: &QuadElement) -> i64 {
        self.pr.val(x)
    }

    fn divides(&self, x: &QuadElement) -> bool {
        self.val(x) > 0
    }

    fn red(&self, x: &QuadElement) -> FElem {
        self.pr.reduce(x).expect("element integral at the prime")
    }

    fn lift(&self, y: FElem) -> QuadElement {
        self.pr.lift(y)
    }

    /// Lift of the residue of x (drops the P-adic tail, keeps a small representative).
    fn preduce(&self, x: &QuadElement) -> QuadElement {
        self.lift(self.red(x))
    }

    fn pinv(&self, x: &QuadElement) -> QuadElement {
        self.lift(self.rf.inv(self.red(x)))
    }

    /// p-th root in the residue field of characteristic p (Frobenius inverse).
    fn proot(&self, x: &QuadElement) -> QuadElement {
        let q = self.rf.size();
        self.lift(self.rf.pow(self.red(x), q / self.p))
    }

    fn half(&self) -> QuadElement {
        self.lift(self.rf.from_int(((self.p + 1) / 2) as i64))
    }

    fn pi_pow(&self, k: u32) -> QuadElement {
        self.pi.pow(k)
    }

    fn div_pi(&self, x: &QuadElement, k: u32) -> QuadElement {
        x.div(&self.pi_pow(k)).unwrap()
    }

    /// Whether a·X² + b·X + c has a root in the residue field.
    fn quad_has_root(&self, a: &QuadElement, b: &QuadElement, c: &QuadElement) -> bool {
        let (a, b, c) = (self.red(a), self.red(b), self.red(c));
        let rf = &self.rf;
        if rf.is_zero(a) {
            return !rf.is_zero(b) || rf.is_zero(c);
        }
        if self.p == 2 {
            return !rf.poly_roots(&[c, b, a]).is_empty();
        }
        let disc = rf.sub(rf.mul(b, b), rf.mul(rf.from_int(4), rf.mul(a, c)));
        rf.is_square(disc)
    }
}

fn rst(c: &CurveModel, r: &QuadElement, s: &QuadElement, t: &QuadElement) -> CurveModel {
    let one = c.field.int(1);
    c.transform(r, s, t, &one)
}

/// Tate's algorithm for an integral model at the given prime.
pub fn tate(curve: &CurveModel, pr: &PrimeIdeal) -> LocalReduction {
    let l = Local::new(pr);
    let f = curve.field;
    let zero = f.int(0);
    let p = l.p;
    let mut c = curve.clone();
    // Clear denominators at P if necessary.
    let minv = c
        .coeffs()
        .iter()
        .zip([1, 2, 3, 4, 6])
        .filter(|(a, _)| !a.is_zero())
        .map(|(a, w)| (l.val(a) as f64 / w as f64).floor() as i64)
        .min()
        .unwrap_or(0);
    if minv < 0 {
        let u = l.pi_pow((-minv) as u32).inv().unwrap();
        c = c.transform(&zero, &zero, &zero, &u);
    }
    loop {
        let inv = c.invariants();
        let vd = l.val(&inv.disc);
        assert!(vd != i64::MAX, "singular curve");
        let vd = vd as u32;
        let done = |kodaira: Kodaira, model: CurveModel, split: Option<bool>| {
            let m = kodaira.components();
            let fe = if kodaira == Kodaira::I0 { 0 } else { vd + 1 - m };
            let fe = match kodaira {
                Kodaira::In(_) => 1,
                _ => fe,
            };
            LocalReduction {
                prime: pr.clone(),
                kodaira,
                f: fe,
                vdisc_min: vd,
                model,
                split_multiplicative: split,
            }
        };
        if vd == 0 {
            return done(Kodaira::I0, c, None);
        }
        // Move the singular point to (0, 0).
        let (a1, a2, a3, a4, a6) = (&c.a1, &c.a2, &c.a3, &c.a4, &c.a6);
        let (b2, b4, b6) = (&inv.b2, &inv.b4, &inv.b6);
        let (r, t) = if p == 2 {
            if l.divides(b2) {
                let r = l.proot(a4);
                let t = l.proot(&(((&r + a2) * &r + a4) * &r + a6));
                (r, t)
            } else {
                let tmp = l.pinv(a1);
                let r = &tmp * a3;
                let t = &tmp * &(a4 + &r * &r);
                (r, t)
            }
        } else if p == 3 {
            let r = if l.divides(b2) { l.proot(&-b6) } else { -(l.pinv(b2) * b4) };
            let t = a1 * &r + a3;
            (r, t)
        } else {
            let r = if l.divides(&inv.c4) {
                -(l.pinv(&f.int(12)) * b2)
            } else {
                -(l.pinv(&(&inv.c4 * 12)) * (&inv.c6 + b2 * &inv.c4))
            };
            let t = -(l.half() * (a1 * &r + a3));
            (r, t)
        };
        let r = l.preduce(&r);
        let t = l.preduce(&t);
        c = rst(&c, &r, &zero, &t);
        let inv = c.invariants();
        let (a1, a2, a3, a6) = (c.a1.clone(), c.a2.clone(), c.a3.clone(), c.a6.clone());
        if !l.divides(&inv.c4) {
            let split = l.quad_has_root(&f.int(1), &a1, &-a2.clone());
            return done(Kodaira::In(vd), c, Some(split));
        }
        if l.val(&a6) < 2 {
            return done(Kodaira::II, c, None);
        }
        if l.val(&inv.b8) < 3 {
            return done(Kodaira::III, c, None);
        }
        if l.val(&inv.b6) < 3 {
            return done(Kodaira::IV, c, None);
        }
        // Arrange π | a1, a2; π² | a3, a4; π³ | a6.
        let (s, t) = if p == 2 {
            (l.proot(&a2), &l.pi * &l.proot(&l.div_pi(&a6, 2)))
        } else if p == 3 {
            (a1.clone(), a3.clone())
        } else {
            (-(&a1 * &l.half()), -(&a3 * &l.half()))
        };
        let s = l.preduce(&s);
        c = rst(&c, &zero, &s, &t);
        let (a2, a4, a6) = (c.a2.clone(), c.a4.clone(), c.a6.clone());
        // P(T) = T³ + bT² + cT + d
        let b = l.div_pi(&a2, 1);
        let cc = l.div_pi(&a4, 2);
        let d = l.div_pi(&a6, 3);
        let w = &d * &d * 27 - &b * &b * &cc * &cc + &b * &b * &b * &d * 4 - &b * &cc * &d * 18 + &cc * &cc * &cc * 4;
        let x = &cc * 3 - &b * &b;
        let mult = if l.divides(&w) {
            if l.divides(&x) {
                3
            } else {
                2
            }
        } else {
            1
        };
        if mult == 1 {
            return done(Kodaira::I0Star, c, None);
        }
        if mult == 2 {
            // Move the double root to 0.
            let root = double_root(&l, &b, &cc, &d);
            c = rst(&c, &(&l.pi * &root), &zero, &zero);
            let (mut ix, mut iy) = (3u32, 3u32);
            let mut mx = l.pi_pow(2);
            let mut my = l.pi_pow(2);
            loop {
                let a3t = c.a3.div(&my).unwrap();
                let a6t = c.a6.div(&(&mx * &my)).unwrap();
                if !l.divides(&(&a3t * &a3t + &a6t * 4)) {
                    break;
                }
                let t = if p == 2 { &my * &l.proot(&a6t) } else { &my * &l.preduce(&-(&a3t * &l.half())) };
                c = rst(&c, &zero, &zero, &t);
                my = &my * &l.pi;
                iy += 1;
                let a2t = l.div_pi(&c.a2, 1);
                let a4t = l.div_pi(&c.a4, 1).div(&mx).unwrap();
                let a6t = c.a6.div(&(&mx * &my)).unwrap();
                if !l.divides(&(&a4t * &a4t - &a6t * &a2t * 4)) {
                    break;
                }
                let r = if p == 2 {
                    &mx * &l.proot(&(&a6t * &l.pinv(&a2t)))
                } else {
                    &mx * &l.preduce(&-(&a4t * &l.pinv(&(&a2t * 2))))
                };
                c = rst(&c, &r, &zero, &zero);
                mx = &mx * &l.pi;
                ix += 1;
            }
            return done(Kodaira::InStar(ix + iy - 5), c, None);
        }
        // Triple root.
        let root = triple_root(&l, &b, &cc, &d);
        c = rst(&c, &(&l.pi * &root), &zero, &zero);
        let a3t = l.div_pi(&c.a3, 2);
        let a6t = l.div_pi(&c.a6, 4);
        if !l.divides(&(&a3t * &a3t + &a6t * 4)) {
            return done(Kodaira::IVStar, c, None);
        }
        let t = if p == 2 {
            l.pi_pow(2) * l.proot(&a6t)
        } else {
            l.pi_pow(2) * l.preduce(&-(&a3t * &l.half()))
        };
        c = rst(&c, &zero, &zero, &t);
        if l.val(&c.a4) < 4 {
            return done(Kodaira::IIIStar, c, None);
        }
        if l.val(&c.a6) < 6 {
            return done(Kodaira::IIStar, c, None);
        }
        // Not minimal: rescale by π and start again.
        let u = l.pi.clone();
        c = c.transform(&zero, &zero, &zero, &u);
    }
}

fn double_root(l: &Local, b: &QuadElement, c: &QuadElement, d: &QuadElement) -> QuadElement {
    let r = if l.p == 2 {
        l.proot(c)
    } else if l.p == 3 {
        c * &l.pinv(b)
    } else {
        let x = c * 3 - b * b;
        (b * c - d * 9) * l.pinv(&(x * 2))
    };
    l.preduce(&r)
}

fn triple_root(l: &Local, b: &QuadElement, _c: &QuadElement, d: &QuadElement) -> QuadElement {
    let r = if l.p == 2 {
        b.clone()
    } else if l.p == 3 {
        l.proot(&-d.clone())
    } else {
        -(b * &l.pinv(&l.pr.field.int(3)))
    };
    l.preduce(&r)
}

/// Local reduction at every prime dividing the discriminant.
#[derive(Clone, Debug)]
pub struct Conductor {
    pub local: Vec<LocalReduction>,
}

impl Conductor {
    /// Norm of the conductor ideal.
    pub fn norm(&self) -> BigInt {
        self.local
            .iter()
            .map(|l| BigInt::from(l.prime.norm()).pow(l.f))
            .product()
    }

    pub fn exponent_at(&self, pr: &PrimeIdeal) -> u32 {
        self.local.iter().find(|l| l.prime.ideal == pr.ideal).map(|l| l.f).unwrap_or(0)
    }

    pub fn bad_primes(&self) -> Vec<&LocalReduction> {
        self.local.iter().filter(|l| l.f > 0).collect()
    }
}

/// Rational primes dividing the norm of a nonzero element.
pub fn support(x: &QuadElement) -> Vec<u64> {
    let (n, d) = x.norm();
    let mut ps: Vec<u64> = arith::factor_big(&(n.abs() * d))
        .into_iter()
        .map(|(p, _)| p.to_u64().expect("prime fits in u64"))
        .collect();
    ps.sort_unstable();
    ps.dedup();
    ps
}

pub fn conductor(curve: &CurveModel, field: &Field) -> Conductor {
    let disc = curve.disc();
    let mut local = vec![];
    for p in support(&disc) {
        for pr in split_prime(field, p).primes_above {
            if pr.val(&disc) > 0 {
                local.push(tate(curve, &pr));
            }
        }
    }
    Conductor { local }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LocalTypeKind {
    PrincipalSeries,
    Supercuspidal,
    Steinberg,
    Unramified,
    Unclassified,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct LocalTypeHint {
    pub kind: LocalTypeKind,
    pub char_order: u32,
}

/// Coarse local type of the Ẽ family at a bad prime.
pub fn local_type_hint(curve: &CurveModel, pr: &PrimeIdeal) -> LocalTypeHint {
    let red = tate(curve, pr);
    let hint = |kind, char_order| LocalTypeHint { kind, char_order };
    match red.f {
        0 => return hint(LocalTypeKind::Unramified, 1),
        1 => return hint(LocalTypeKind::Steinberg, 1),
        _ => {}
    }
    if pr.kind == SplitKind::Ramified && pr.p > 3 {
        return if pr.p % 3 == 1 {
            hint(LocalTypeKind::PrincipalSeries, 3)
        } else {
            hint(LocalTypeKind::Supercuspidal, 3)
        };
    }
    if pr.p == 3 && pr.kind == SplitKind::Inert && red.kodaira == Kodaira::III {
        return hint(LocalTypeKind::PrincipalSeries, 4);
    }
    hint(LocalTypeKind::Unclassified, 0)
}

/// Classification from (v(c4), v(Δ)) in residue characteristic at least 5.
pub fn tame_classification(curve: &CurveModel, pr: &PrimeIdeal) -> (Kodaira, u32) {
    assert!(pr.p >= 5);
    let inv = curve.invariants();
    let mut vd = pr.val(&inv.disc);
    let mut v4 = if inv.c4.is_zero() { i64::MAX } else { pr.val(&inv.c4) };
    // Minimal model: remove multiples of 12 while both allow it.
    while vd >= 12 && v4 >= 4 {
        vd -= 12;
        v4 = v4.saturating_sub(4);
    }
    let vd = vd as u32;
    if vd == 0 {
        return (Kodaira::I0, 0);
    }
    if v4 == 0 {
        return (Kodaira::In(vd), 1);
    }
    let k = match vd {
        2 => Kodaira::II,
        3 => Kodaira::III,
        4 => Kodaira::IV,
        6 => Kodaira::I0Star,
        8 => Kodaira::IVStar,
        9 => Kodaira::IIIStar,
        10 => Kodaira::IIStar,
        n if n > 6 => Kodaira::InStar(n - 6),
        _ => panic!("impossible discriminant valuation {vd}"),
    };
    (k, 2)
}

/// The prime above p: the unique one when p is inert or ramified, the one
/// dividing the given element when p splits.
pub fn prime_above(field: &Field, p: u64, which: usize) -> PrimeIdeal {
    let sd = split_prime(field, p);
    sd.primes_above[which.min(sd.primes_above.len() - 1)].clone()
}
