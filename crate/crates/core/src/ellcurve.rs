//! Long Weierstrass models over K, their invariants, the Frey curves of the
//! two equations, twists and the explicit 2- and 3-isogenies.

use crate::quadfield::{Field, QuadElement};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum CurveError {
    #[error("singular model (discriminant zero)")]
    Singular,
    #[error("model is not of the required shape: {0}")]
    Shape(&'static str),
    #[error("twisting parameter is zero")]
    ZeroTwist,
    #[error("invalid input: {0}")]
    Input(String),
}

/// The two Diophantine equations: x⁴ + dy² = zᵖ and x² + dy⁶ = zᵖ.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, PartialOrd, Ord)]
#[serde(rename_all = "lowercase")]
pub enum Equation {
    Eq24p,
    Benchen,
}

impl Equation {
    pub fn t(&self) -> i64 {
        match self {
            Equation::Eq24p => 2,
            Equation::Benchen => 3,
        }
    }

    /// Value of the left-hand side at (A, B).
    pub fn lhs(&self, d: i64, a: &BigInt, b: &BigInt) -> BigInt {
        let d = BigInt::from(d);
        match self {
            Equation::Eq24p => a.pow(4) + d * b * b,
            Equation::Benchen => a * a + d * b.pow(6),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Equation::Eq24p => "eq24p",
            Equation::Benchen => "benchen",
        }
    }
}

impl std::str::FromStr for Equation {
    type Err = CurveError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "eq24p" => Ok(Equation::Eq24p),
            "benchen" => Ok(Equation::Benchen),
            _ => Err(CurveError::Input(format!("unknown equation {s}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FreyInput {
    pub equation: Equation,
    pub d: i64,
    pub a: BigInt,
    pub b: BigInt,
}

impl FreyInput {
    pub fn new(equation: Equation, d: i64, a: i64, b: i64) -> FreyInput {
        FreyInput { equation, d, a: a.into(), b: b.into() }
    }

    /// C^p, the value of the left-hand side.
    pub fn cp(&self) -> BigInt {
        self.equation.lhs(self.d, &self.a, &self.b)
    }

    pub fn is_primitive(&self) -> bool {
        self.a.gcd(&self.b).gcd(&self.cp()).is_one()
    }

    pub fn field(&self) -> Result<Field, CurveError> {
        Field::new(self.d).map_err(|e| CurveError::Input(e.to_string()))
    }

    pub fn curve(&self) -> Result<CurveModel, CurveError> {
        match self.equation {
            Equation::Eq24p => frey_e(self),
            Equation::Benchen => frey_etilde(self),
        }
    }
}

#[derive(Clone, PartialEq, Eq)]
pub struct CurveModel {
    pub field: Field,
    pub a1: QuadElement,
    pub a2: QuadElement,
    pub a3: QuadElement,
    pub a4: QuadElement,
    pub a6: QuadElement,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Invariants {
    pub b2: QuadElement,
    pub b4: QuadElement,
    pub b6: QuadElement,
    pub b8: QuadElement,
    pub c4: QuadElement,
    pub c6: QuadElement,
    pub disc: QuadElement,
    pub j: Option<QuadElement>,
}

impl fmt::Debug for CurveModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}, {}, {}, {}]", self.a1, self.a2, self.a3, self.a4, self.a6)
    }
}

impl fmt::Display for CurveModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self)
    }
}

impl CurveModel {
    pub fn new(field: Field, a: [QuadElement; 5]) -> CurveModel {
        let [a1, a2, a3, a4, a6] = a;
        CurveModel { field, a1, a2, a3, a4, a6 }
    }

    pub fn from_ints(field: Field, a: [i64; 5]) -> CurveModel {
        CurveModel::new(field, a.map(|x| field.int(x)))
    }

    pub fn coeffs(&self) -> [&QuadElement; 5] {
        [&self.a1, &self.a2, &self.a3, &self.a4, &self.a6]
    }

    pub fn invariants(&self) -> Invariants {
        let (a1, a2, a3, a4, a6) = (&self.a1, &self.a2, &self.a3, &self.a4, &self.a6);
        let b2 = a1 * a1 + a2 * 4;
        let b4 = a4 * 2 + a1 * a3;
        let b6 = a3 * a3 + a6 * 4;
        let b8 = a1 * a1 * a6 + a2 * a6 * 4 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4;
        let c4 = &b2 * &b2 - &b4 * 24;
        let c6 = -(&b2 * &b2 * &b2) + &b2 * &b4 * 36 - &b6 * 216;
        let disc = -(&b2 * &b2 * &b8) - &b4 * &b4 * &b4 * 8 - &b6 * &b6 * 27 + &b2 * &b4 * &b6 * 9;
        let j = if disc.is_zero() { None } else { Some((&c4 * &c4 * &c4).div(&disc).unwrap()) };
        Invariants { b2, b4, b6, b8, c4, c6, disc, j }
    }

    pub fn disc(&self) -> QuadElement {
        self.invariants().disc
    }

    pub fn j(&self) -> Option<QuadElement> {
        self.invariants().j
    }

    pub fn is_singular(&self) -> bool {
        self.disc().is_zero()
    }

    /// Model obtained by x = u²x' + r, y = u³y' + su²x' + t.
    pub fn transform(&self, r: &QuadElement, s: &QuadElement, t: &QuadElement, u: &QuadElement) -> CurveModel {
        let (a1, a2, a3, a4, a6) = (&self.a1, &self.a2, &self.a3, &self.a4, &self.a6);
        let ui = u.inv().expect("u nonzero");
        let u2 = &ui * &ui;
        let u3 = &u2 * &ui;
        let u4 = &u2 * &u2;
        let u6 = &u3 * &u3;
        let n1 = a1 + s * 2;
        let n2 = a2 - s * a1 + r * 3 - s * s;
        let n3 = a3 + r * a1 + t * 2;
        let n4 = a4 - s * a3 + r * a2 * 2 - (t + r * s) * a1 + r * r * 3 - s * t * 2;
        let n6 = a6 + r * a4 + r * r * a2 + r * r * r - t * a3 - t * t - r * t * a1;
        CurveModel {
            field: self.field,
            a1: n1 * ui,
            a2: n2 * u2,
            a3: n3 * u3,
            a4: n4 * u4,
            a6: n6 * u6,
        }
    }

    pub fn conj(&self) -> CurveModel {
        CurveModel {
            field: self.field,
            a1: self.a1.conj(),
            a2: self.a2.conj(),
            a3: self.a3.conj(),
            a4: self.a4.conj(),
            a6: self.a6.conj(),
        }
    }

    /// Short model y² = x³ + Ax + B with A = −c4/48, B = −c6/864.
    pub fn short_form(&self) -> (QuadElement, QuadElement) {
        let inv = self.invariants();
        let f = self.field;
        (
            -(inv.c4.div(&f.int(48)).unwrap()),
            -(inv.c6.div(&f.int(864)).unwrap()),
        )
    }

    pub fn is_integral(&self) -> bool {
        self.coeffs().iter().all(|a| a.is_integral())
    }
}

/// E_(A,B): y² = x³ + 4Ax² + 2(A² + rB)x with r² = −d.
pub fn frey_e(input: &FreyInput) -> Result<CurveModel, CurveError> {
    let f = input.field()?;
    let a = f.big(input.a.clone(), BigInt::zero());
    let b = f.big(input.b.clone(), BigInt::zero());
    let r = f.sqrt_neg_d();
    let e = CurveModel::new(
        f,
        [f.int(0), &a * 4, f.int(0), (&a * &a + &r * &b) * 2, f.int(0)],
    );
    if e.is_singular() {
        return Err(CurveError::Singular);
    }
    Ok(e)
}

/// Ẽ_(A,B): y² + 6Brxy − 4d(A + B³r)y = x³.
pub fn frey_etilde(input: &FreyInput) -> Result<CurveModel, CurveError> {
    let f = input.field()?;
    let a = f.big(input.a.clone(), BigInt::zero());
    let b = f.big(input.b.clone(), BigInt::zero());
    let r = f.sqrt_neg_d();
    let e = CurveModel::new(
        f,
        [
            &r * &b * 6,
            f.int(0),
            (&a + &b * &b * &b * &r) * (-4 * input.d),
            f.int(0),
            f.int(0),
        ],
    );
    if e.is_singular() {
        return Err(CurveError::Singular);
    }
    Ok(e)
}

/// Quadratic twist by K(√m), as y² = x³ + m·b2·x² + 8m²·b4·x + 16m³·b6.
pub fn quadratic_twist(c: &CurveModel, m: &QuadElement) -> Result<CurveModel, CurveError> {
    if m.is_zero() {
        return Err(CurveError::ZeroTwist);
    }
    let inv = c.invariants();
    let f = c.field;
    let m2 = m * m;
    Ok(CurveModel::new(
        f,
        [f.int(0), m * &inv.b2, f.int(0), &m2 * &inv.b4 * 8, &m2 * m * &inv.b6 * 16],
    ))
}

/// Quotient of y² = x³ + ax² + bx by ⟨(0,0)⟩.
pub fn two_isogeny_quotient(c: &CurveModel) -> Result<CurveModel, CurveError> {
    if !(c.a1.is_zero() && c.a3.is_zero() && c.a6.is_zero()) {
        return Err(CurveError::Shape("expected y^2 = x^3 + ax^2 + bx"));
    }
    let f = c.field;
    let (a, b) = (&c.a2, &c.a4);
    Ok(CurveModel::new(f, [f.int(0), a * -2, f.int(0), a * a - b * 4, f.int(0)]))
}

/// Quotient of the Kubert model y² + a1xy + a3y = x³ by ⟨(0,0)⟩.
pub fn three_isogeny_quotient(c: &CurveModel) -> Result<CurveModel, CurveError> {
    if !(c.a2.is_zero() && c.a4.is_zero() && c.a6.is_zero()) {
        return Err(CurveError::Shape("expected y^2 + a1xy + a3y = x^3"));
    }
    let (a1, a3) = (&c.a1, &c.a3);
    Ok(CurveModel {
        field: c.field,
        a1: a1.clone(),
        a2: c.field.int(0),
        a3: a3.clone(),
        a4: a1 * a3 * -5,
        a6: -(a1 * a1 * a1 * a3) - a3 * a3 * 7,
    })
}

/// Square root in K, if one exists.
pub fn quad_sqrt(x: &QuadElement) -> Option<QuadElement> {
    let f = Field::new(x.d).ok()?;
    if x.is_zero() {
        return Some(x.clone());
    }
    // x = y/den² with y = a·den + b·den·r integral in Z[r].
    let a = &x.a * &x.den;
    let b = &x.b * &x.den;
    let n2 = &a * &a + BigInt::from(x.d) * &b * &b;
    let n = crate::arith::exact_root(&n2, 2)?;
    for sign in [1, -1] {
        let s2x4: BigInt = (&a + &n * BigInt::from(sign)) * 2;
        if s2x4.is_negative() {
            continue;
        }
        let Some(big_s) = crate::arith::exact_root(&s2x4, 2) else { continue };
        if big_s.is_zero() {
            // Purely imaginary root: a = −dt², b = 0.
            let t2 = -&a / BigInt::from(x.d);
            if !(&t2 * BigInt::from(x.d) + &a).is_zero() || t2.is_negative() {
                continue;
            }
            if let Some(t) = crate::arith::exact_root(&(t2 * 4), 2) {
                let cand = QuadElement::new(x.d, BigInt::zero(), t, &x.den * 2);
                if &cand * &cand == *x {
                    return Some(cand);
                }
            }
            continue;
        }
        // s = S/2, t = b/S
        let cand = QuadElement::new(x.d, &big_s * &big_s, &b * 2, &big_s * 2)
            * QuadElement::new(x.d, BigInt::one(), BigInt::zero(), x.den.clone());
        if &cand * &cand == *x {
            return Some(cand);
        }
    }
    let _ = f;
    None
}

/// Cube root in K, if one exists.
pub fn quad_cbrt(x: &QuadElement) -> Option<QuadElement> {
    if x.is_zero() {
        return Some(x.clone());
    }
    // den·∛x is integral, so its coordinates are half-integers; locate them numerically.
    let den3 = x.den.pow(3);
    let y = x.scale(&den3);
    let sd = (x.d as f64).sqrt();
    let re: f64 = y.a.to_string().parse::<f64>().ok()? / y.den.to_string().parse::<f64>().ok()?;
    let im: f64 = y.b.to_string().parse::<f64>().ok()? * sd / y.den.to_string().parse::<f64>().ok()?;
    let z = num_complex::Complex64::new(re, im);
    let (rho, theta) = z.to_polar();
    for k in 0..3 {
        let w = num_complex::Complex64::from_polar(rho.cbrt(), (theta + 2.0 * std::f64::consts::PI * k as f64) / 3.0);
        let a2 = (2.0 * w.re).round() as i64;
        let b2 = (2.0 * w.im / sd).round() as i64;
        let cand = QuadElement::new(x.d, a2.into(), b2.into(), &x.den * 2);
        if &cand * &cand * &cand == *x {
            return Some(cand);
        }
    }
    None
}

/// λ = u² with c4' = λ²c4 and c6' = λ³c6, when the j-invariants agree.
pub fn isomorphism_lambda(e1: &CurveModel, e2: &CurveModel) -> Option<QuadElement> {
    let i1 = e1.invariants();
    let i2 = e2.invariants();
    if i1.disc.is_zero() || i2.disc.is_zero() || i1.j != i2.j {
        return None;
    }
    let lambda = if i1.c4.is_zero() {
        // j = 0: λ³ = c6'/c6.
        quad_cbrt(&i2.c6.div(&i1.c6).ok()?)?
    } else if i1.c6.is_zero() {
        // j = 1728: λ² = c4'/c4; prefer the sign that is a square in K.
        let l = quad_sqrt(&i2.c4.div(&i1.c4).ok()?)?;
        if quad_sqrt(&l).is_some() {
            l
        } else {
            -l
        }
    } else {
        // λ = (c6'/c6)/(c4'/c4)
        (&i2.c6 * &i1.c4).div(&(&i1.c6 * &i2.c4)).ok()?
    };
    let l2 = &lambda * &lambda;
    if i2.c4 != &l2 * &i1.c4 || i2.c6 != &l2 * &lambda * &i1.c6 {
        return None;
    }
    Some(lambda)
}

/// Isomorphic over K: λ exists and is a square in K.
pub fn is_isomorphic_over_k(e1: &CurveModel, e2: &CurveModel) -> bool {
    isomorphism_lambda(e1, e2).map(|l| quad_sqrt(&l).is_some()).unwrap_or(false)
}

/// Isomorphic over K(√m).
pub fn is_isomorphic_over(e1: &CurveModel, e2: &CurveModel, m: &QuadElement) -> bool {
    match isomorphism_lambda(e1, e2) {
        None => false,
        Some(l) => quad_sqrt(&l).is_some() || quad_sqrt(&(&l * m)).is_some(),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct QCurveReport {
    pub equation: Equation,
    pub d: i64,
    pub a: String,
    pub b: String,
    pub holds: bool,
    pub detail: String,
}

/// The Q-curve identity: the 2-isogeny quotient of E is the −2 twist of its
/// conjugate, and the 3-isogeny quotient of Ẽ is isomorphic over K to the −3
/// twist of its conjugate.
pub fn qcurve_identity_check(input: &FreyInput) -> Result<QCurveReport, CurveError> {
    let e = input.curve()?;
    let f = e.field;
    let (holds, detail) = match input.equation {
        Equation::Eq24p => {
            let q = two_isogeny_quotient(&e)?;
            let tw = quadratic_twist(&e.conj(), &f.int(-2))?;
            let lam = isomorphism_lambda(&q, &tw);
            let ok = lam.is_some()
                && is_isomorphic_over(&q, &tw, &f.int(-2));
            (ok, format!("lambda = {:?}", lam))
        }
        Equation::Benchen => {
            let q = three_isogeny_quotient(&e)?;
            let tw = quadratic_twist(&e.conj(), &f.int(-3))?;
            let lam = isomorphism_lambda(&q, &tw);
            let ok = lam.as_ref().map(|l| quad_sqrt(l).is_some()).unwrap_or(false)
                && q.short_form() == common_short_form(input);
            (ok, format!("lambda = {:?}", lam))
        }
    };
    Ok(QCurveReport {
        equation: input.equation,
        d: input.d,
        a: input.a.to_string(),
        b: input.b.to_string(),
        holds,
        detail,
    })
}

/// The common short model y² = x³ + (108ABdr − 135B⁴d²)x − 756AB³d²r + 594B⁶d³ − 108A²d².
pub fn common_short_form(input: &FreyInput) -> (QuadElement, QuadElement) {
    let f = Field::new(input.d).unwrap();
    let a = f.big(input.a.clone(), BigInt::zero());
    let b = f.big(input.b.clone(), BigInt::zero());
    let r = f.sqrt_neg_d();
    let d = input.d;
    let b3 = &b * &b * &b;
    let c4 = &a * &b * &r * (108 * d) - &b3 * &b * (135 * d * d);
    let c6 = &a * &b3 * &r * (-756 * d * d) + &b3 * &b3 * (594 * d * d * d) - &a * &a * (108 * d * d);
    (c4, c6)
}
