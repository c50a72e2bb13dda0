//! Elimination of newforms: traces of Frobenius of the Frey curves, the
//! quantities B(q,g) and C(q,g) of Mazur's trick, the raising-the-level test
//! for CM forms, and the explicit bounds that put a floor under the result.

use crate::arith::{factor_big, is_prime, isqrt_u64, kronecker, primes_up_to};
use crate::ellcurve::{CurveError, Equation, FreyInput};
use crate::heckechar::{build_chi, build_epsilon, HeckeCharacter, HeckeError, Mu8, RationalCharacter};
use crate::localred::tate;
use crate::quadfield::{split_prime, FElem, Field, QuadIdeal, ResidueField, SplitKind};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize, Serializer};
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

#[derive(Debug, thiserror::Error)]
pub enum EliminateError {
    #[error("record {index}: {msg}")]
    Schema { index: usize, msg: String },
    #[error("{label}: a_{q} violates the Hasse bound")]
    Hasse { label: String, q: u64 },
    #[error("{label}: no eigenvalue for q = {q}")]
    MissingEigenvalue { label: String, q: u64 },
    #[error("{label}: Nebentypus value at {q} disagrees with ε")]
    Neben { label: String, q: u64 },
    #[error("q = {q} divides the level {level}")]
    QDividesLevel { q: u64, level: u64 },
    #[error("q = {0} ramifies in K or divides 6t")]
    BadAuxiliary(u64),
    #[error("q = {0} is not a prime")]
    NotPrime(u64),
    #[error("additive reduction at the prime above {q}: use the case-3 branch")]
    Additive { q: u64 },
    #[error("empty list of auxiliary primes")]
    EmptyQList,
    #[error("no data for d = {0}")]
    NoData(u64),
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error(transparent)]
    Character(#[from] HeckeError),
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
}

// ---------------------------------------------------------------------------
// Newform records

/// A Dirichlet character given by its values ζ_m^e on generators of (Z/N)^×.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CharSpec {
    pub modulus: u64,
    pub zeta_order: u32,
    pub values: Vec<(u64, u32)>,
}

impl CharSpec {
    pub fn trivial() -> CharSpec {
        CharSpec { modulus: 1, zeta_order: 1, values: vec![] }
    }

    /// Exponent table n ↦ e with χ(n) = ζ_m^e, or an error message if the
    /// generator values are inconsistent.
    fn table(&self) -> Result<HashMap<u64, u32>, String> {
        let m = self.modulus.max(1);
        let ord = self.zeta_order.max(1);
        let mut t = HashMap::from([(1 % m, 0u32)]);
        let mut frontier = vec![1 % m];
        while let Some(n) = frontier.pop() {
            for &(g, e) in &self.values {
                let k = (n as u128 * g as u128 % m as u128) as u64;
                let v = (t[&n] + e) % ord;
                match t.get(&k) {
                    Some(&w) if w != v => return Err(format!("values on generators are inconsistent at {}", k)),
                    Some(_) => {}
                    None => {
                        t.insert(k, v);
                        frontier.push(k);
                    }
                }
            }
        }
        Ok(t)
    }

    /// χ(n) as an element of μ₈; None if n is not a unit or not reached.
    pub fn eval(&self, n: u64) -> Option<Mu8> {
        let t = self.table().ok()?;
        let e = *t.get(&(n % self.modulus.max(1)))?;
        Some(Mu8::new((e * 8 / self.zeta_order.max(1)) as i64))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NewformRecord {
    pub label: String,
    pub level: u64,
    pub neben: CharSpec,
    /// Monic minimal polynomial of the generator α, constant term first.
    pub field_minpoly: Vec<i64>,
    /// a_q as a polynomial in α, constant term first.
    pub eigenvalues: BTreeMap<u64, Vec<i64>>,
    pub has_cm: bool,
}

impl NewformRecord {
    pub fn degree(&self) -> usize {
        self.field_minpoly.len() - 1
    }

    pub fn a(&self, q: u64) -> Result<&[i64], EliminateError> {
        self.eigenvalues
            .get(&q)
            .map(|v| v.as_slice())
            .ok_or_else(|| EliminateError::MissingEigenvalue { label: self.label.clone(), q })
    }

    /// a_q at every complex embedding of the coefficient field.
    pub fn embeddings(&self, q: u64) -> Result<Vec<Complex64>, EliminateError> {
        let a = self.a(q)?;
        Ok(poly_roots(&self.field_minpoly).into_iter().map(|t| eval_poly(a, t)).collect())
    }

    fn validate(&self, index: usize) -> Result<(), EliminateError> {
        let bad = |msg: String| Err(EliminateError::Schema { index, msg });
        let m = &self.field_minpoly;
        if m.len() < 2 || *m.last().unwrap() != 1 {
            return bad("field_minpoly must be monic of degree at least 1".into());
        }
        if 8 % self.neben.zeta_order.max(1) != 0 {
            return bad(format!("zeta_order {} does not divide 8", self.neben.zeta_order));
        }
        if let Err(e) = self.neben.table() {
            return bad(e);
        }
        if self.level == 0 {
            return bad("level must be positive".into());
        }
        for (&q, a) in &self.eigenvalues {
            if !is_prime(q) {
                return bad(format!("eigenvalue key {} is not prime", q));
            }
            if a.len() > self.degree() {
                return bad(format!("a_{} has more coefficients than the field degree", q));
            }
        }
        // Hasse, with slack for the floating-point roots of the minimal polynomial.
        for &q in self.eigenvalues.keys() {
            if self.level % q == 0 {
                continue;
            }
            let bound = 2.0 * (q as f64).sqrt() + 1e-6;
            if self.embeddings(q)?.iter().any(|z| z.norm() > bound) {
                return Err(EliminateError::Hasse { label: self.label.clone(), q });
            }
        }
        Ok(())
    }
}

/// Parses and validates a JSON array of newform records.
pub fn load_newforms(json: &str) -> Result<Vec<NewformRecord>, EliminateError> {
    let raw: Vec<serde_json::Value> = serde_json::from_str(json)?;
    let mut out = vec![];
    for (index, v) in raw.into_iter().enumerate() {
        let r: NewformRecord =
            serde_json::from_value(v).map_err(|e| EliminateError::Schema { index, msg: e.to_string() })?;
        r.validate(index)?;
        out.push(r);
    }
    Ok(out)
}

fn eval_poly(c: &[i64], x: Complex64) -> Complex64 {
    c.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &k| acc * x + k as f64)
}

/// Complex roots of a monic integer polynomial (Durand–Kerner).
pub fn poly_roots(m: &[i64]) -> Vec<Complex64> {
    let n = m.len() - 1;
    if n == 1 {
        return vec![Complex64::new(-m[0] as f64, 0.0)];
    }
    let seed = Complex64::new(0.4, 0.9);
    let mut z: Vec<Complex64> = (0..n).map(|k| seed.powu(k as u32)).collect();
    for _ in 0..500 {
        let prev = z.clone();
        for i in 0..n {
            let mut den = Complex64::new(1.0, 0.0);
            for j in 0..n {
                if j != i {
                    den *= z[i] - z[j];
                }
            }
            let step = eval_poly(m, z[i]) / den;
            z[i] -= step;
        }
        if z.iter().zip(&prev).all(|(a, b)| (a - b).norm() < 1e-14 * (1.0 + a.norm())) {
            break;
        }
    }
    z
}

// ---------------------------------------------------------------------------
// Arithmetic in F ⊗ Q(ζ₈)

/// The algebra F ⊗ Q(ζ₈) with F = Q[α]/(m), as a free Z-module on α^i ζ^j.
///
/// Its norm to Q is the product over all pairs of embeddings, a power of the
/// norm from the compositum when F and Q(ζ₈) intersect, so it has the same
/// prime divisors.
#[derive(Clone, Debug)]
pub struct TensorAlgebra {
    minpoly: Vec<BigInt>,
    n: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TensorElem {
    /// Coefficient of α^i ζ^j at index 4i + j.
    pub c: Vec<BigInt>,
}

impl TensorAlgebra {
    pub fn new(minpoly: &[i64]) -> TensorAlgebra {
        assert!(minpoly.len() >= 2 && *minpoly.last().unwrap() == 1, "minimal polynomial must be monic");
        TensorAlgebra { minpoly: minpoly.iter().map(|&k| BigInt::from(k)).collect(), n: minpoly.len() - 1 }
    }

    pub fn dim(&self) -> usize {
        4 * self.n
    }

    pub fn zero(&self) -> TensorElem {
        TensorElem { c: vec![BigInt::zero(); self.dim()] }
    }

    /// An element of F given by its coordinates in powers of α.
    pub fn from_field(&self, a: &[i64]) -> TensorElem {
        let mut e = self.zero();
        for (i, &k) in a.iter().enumerate() {
            e.c[4 * i] = k.into();
        }
        e
    }

    /// scale · ζ₈^k.
    pub fn from_mu8(&self, z: Mu8, scale: &BigInt) -> TensorElem {
        let mut e = self.zero();
        let k = z.k() as usize;
        e.c[k % 4] = if k >= 4 { -scale.clone() } else { scale.clone() };
        e
    }

    pub fn add(&self, x: &TensorElem, y: &TensorElem) -> TensorElem {
        TensorElem { c: x.c.iter().zip(&y.c).map(|(a, b)| a + b).collect() }
    }

    pub fn sub(&self, x: &TensorElem, y: &TensorElem) -> TensorElem {
        TensorElem { c: x.c.iter().zip(&y.c).map(|(a, b)| a - b).collect() }
    }

    pub fn mul(&self, x: &TensorElem, y: &TensorElem) -> TensorElem {
        let n = self.n;
        // Product in Z[α][ζ]/(ζ⁴ + 1), then reduce α-degrees with the monic m.
        let mut wide = vec![[(); 4].map(|_| BigInt::zero()); 2 * n - 1];
        for (p, a) in x.c.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (r, b) in y.c.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                let (i, j) = (p / 4 + r / 4, p % 4 + r % 4);
                let v = a * b;
                if j >= 4 {
                    wide[i][j - 4] -= v;
                } else {
                    wide[i][j] += v;
                }
            }
        }
        for i in (n..2 * n - 1).rev() {
            let top = std::mem::replace(&mut wide[i], [(); 4].map(|_| BigInt::zero()));
            for (k, mk) in self.minpoly[..n].iter().enumerate() {
                for j in 0..4 {
                    wide[i - n + k][j] -= mk * &top[j];
                }
            }
        }
        TensorElem { c: wide[..n].iter().flat_map(|r| r.iter().cloned()).collect() }
    }

    /// Norm to Q: determinant of multiplication on the basis α^i ζ^j.
    pub fn norm(&self, x: &TensorElem) -> BigInt {
        let dim = self.dim();
        let mut cols = vec![];
        for b in 0..dim {
            let mut e = self.zero();
            e.c[b] = BigInt::one();
            cols.push(self.mul(x, &e).c);
        }
        let m: Vec<Vec<BigInt>> = (0..dim).map(|r| (0..dim).map(|c| cols[c][r].clone()).collect()).collect();
        det_bareiss(m)
    }

    /// Norm as the product of the values at every embedding pair, in floating point.
    pub fn norm_numeric(&self, x: &TensorElem) -> f64 {
        let m: Vec<i64> = self.minpoly.iter().map(|k| k.to_i64().expect("small minimal polynomial")).collect();
        let mut prod = Complex64::new(1.0, 0.0);
        for theta in poly_roots(&m) {
            for k in [1u32, 3, 5, 7] {
                let zeta = Complex64::from_polar(1.0, std::f64::consts::PI * k as f64 / 4.0);
                let mut v = Complex64::new(0.0, 0.0);
                for (idx, c) in x.c.iter().enumerate() {
                    v += c.to_f64().unwrap() * theta.powu((idx / 4) as u32) * zeta.powu((idx % 4) as u32);
                }
                prod *= v;
            }
        }
        prod.re
    }
}

/// Fraction-free Gaussian elimination.
pub fn det_bareiss(mut m: Vec<Vec<BigInt>>) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            match (k + 1..n).find(|&i| !m[i][k].is_zero()) {
                Some(i) => {
                    m.swap(i, k);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &m[i][j] * &m[k][k] - &m[i][k] * &m[k][j];
                m[i][j] = v / &prev;
            }
        }
        prev = m[k][k].clone();
    }
    sign * &m[n - 1][n - 1]
}

// ---------------------------------------------------------------------------
// Frey traces

/// Number of points on a Weierstrass model over a finite field.
pub fn count_points(rf: &ResidueField, a: [FElem; 5]) -> u64 {
    let [a1, a2, a3, a4, a6] = a;
    let mut n = 1u64;
    for x in rf.elements() {
        let x2 = rf.mul(x, x);
        let rhs = [rf.mul(x2, x), rf.mul(a2, x2), rf.mul(a4, x), a6].into_iter().fold((0, 0), |s, t| rf.add(s, t));
        let lin = rf.add(rf.mul(a1, x), a3);
        if rf.p == 2 {
            n += rf.elements().filter(|&y| rf.add(rf.mul(y, y), rf.mul(lin, y)) == rhs).count() as u64;
        } else {
            // (2y + a1x + a3)² = lin² + 4·rhs
            let disc = rf.add(rf.mul(lin, lin), rf.mul(rf.from_int(4), rhs));
            n += if rf.is_zero(disc) { 1 } else if rf.is_square(disc) { 2 } else { 0 };
        }
    }
    n
}

/// Trace of Frobenius of the Frey curve of (A, B) at a prime above q.
///
/// `which` picks the prime when q splits (index into the primes above q).
/// Multiplicative reduction gives +1 (split) or −1 (non-split).
pub fn frey_trace(eq: Equation, d: u64, a: i64, b: i64, q: u64, which: usize) -> Result<i64, EliminateError> {
    if !is_prime(q) {
        return Err(EliminateError::NotPrime(q));
    }
    let input = FreyInput::new(eq, d as i64, a, b);
    let curve = input.curve()?;
    let sp = split_prime(&curve.field, q);
    let pr = &sp.primes_above[which.min(sp.primes_above.len() - 1)];
    let red = tate(&curve, pr);
    if red.is_good() {
        let rf = pr.residue_field();
        let m = &red.model;
        let coeffs = [&m.a1, &m.a2, &m.a3, &m.a4, &m.a6].map(|c| pr.reduce(c).expect("integral minimal model"));
        Ok(rf.size() as i64 + 1 - count_points(&rf, coeffs) as i64)
    } else if red.f == 1 {
        Ok(if red.split_multiplicative == Some(true) { 1 } else { -1 })
    } else {
        Err(EliminateError::Additive { q })
    }
}

/// Frey trace for a residue pair, using a lift with A, B ≠ 0.
fn trace_for_residues(eq: Equation, d: u64, a: u64, b: u64, q: u64, which: usize) -> Result<i64, EliminateError> {
    let lift = |x: u64| if x == 0 { q as i64 } else { x as i64 };
    frey_trace(eq, d, lift(a), lift(b), q, which)
}

// ---------------------------------------------------------------------------
// Mazur's trick

/// The data of the equation and the characters, shared by all forms.
#[derive(Clone, Debug)]
pub struct Context {
    pub equation: Equation,
    pub d: u64,
    pub field: Field,
    pub chi: HeckeCharacter,
    pub eps: RationalCharacter,
}

impl Context {
    pub fn new(equation: Equation, d: u64) -> Result<Context, EliminateError> {
        let t = equation.t() as u64;
        let field = Field::new(d as i64).map_err(HeckeError::from)?;
        Ok(Context { equation, d, field, chi: build_chi(d, t)?, eps: build_epsilon(d, t)? })
    }

    fn eps_at(&self, q: u64) -> Mu8 {
        self.eps.eval(q as i64).expect("q prime to the conductor of ε")
    }
}

/// What B(q,g) needs from the Frey curve of one residue pair.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum PairCase {
    /// q | C^p: only ε(q) enters.
    Divides,
    /// q = 𝔮𝔮̄: traces and χ-values at both primes.
    Split { traces: [i64; 2], chi: [Mu8; 2] },
    Inert { trace: i64, chi: Mu8 },
}

#[derive(Clone, Debug, Serialize)]
pub struct PairData {
    pub a: u64,
    pub b: u64,
    pub case: PairCase,
}

/// Frey data at q for all (A, B) ∈ F_q² \ {0}, in lexicographic order.
pub fn frey_data(ctx: &Context, q: u64) -> Result<Vec<PairData>, EliminateError> {
    if !is_prime(q) {
        return Err(EliminateError::NotPrime(q));
    }
    let sp = split_prime(&ctx.field, q);
    if sp.kind == SplitKind::Ramified || (ctx.equation == Equation::Benchen && q <= 3) || q == 2 {
        return Err(EliminateError::BadAuxiliary(q));
    }
    let pairs: Vec<(u64, u64)> = (0..q).flat_map(|a| (0..q).map(move |b| (a, b))).filter(|&p| p != (0, 0)).collect();
    pairs
        .par_iter()
        .map(|&(a, b)| {
            let cp = ctx.equation.lhs(ctx.d as i64, &a.into(), &b.into());
            let case = if (cp % q).is_zero() {
                PairCase::Divides
            } else if sp.kind == SplitKind::Split {
                let mut traces = [0; 2];
                let mut chi = [Mu8::ONE; 2];
                for i in 0..2 {
                    traces[i] = trace_for_residues(ctx.equation, ctx.d, a, b, q, i)?;
                    chi[i] = ctx.chi.eval(&sp.primes_above[i].ideal)?;
                }
                PairCase::Split { traces, chi }
            } else {
                let trace = trace_for_residues(ctx.equation, ctx.d, a, b, q, 0)?;
                PairCase::Inert { trace, chi: ctx.chi.eval(&QuadIdeal::rational(q as i128))? }
            };
            Ok(PairData { a, b, case })
        })
        .collect()
}

fn check_form_at(g: &NewformRecord, ctx: &Context, q: u64) -> Result<(), EliminateError> {
    if g.level % q == 0 {
        return Err(EliminateError::QDividesLevel { q, level: g.level });
    }
    if let Some(v) = g.neben.eval(q) {
        if v != ctx.eps_at(q) {
            return Err(EliminateError::Neben { label: g.label.clone(), q });
        }
    }
    g.a(q).map(|_| ())
}

/// B(q,g) for one residue pair, as a non-negative integer.
pub fn mazur_b(g: &NewformRecord, ctx: &Context, q: u64, pair: &PairData) -> Result<BigInt, EliminateError> {
    let alg = TensorAlgebra::new(&g.field_minpoly);
    let ag = alg.from_field(g.a(q)?);
    Ok(b_value(&alg, &ag, ctx.eps_at(q), q, &pair.case))
}

fn b_value(alg: &TensorAlgebra, ag: &TensorElem, eps: Mu8, q: u64, case: &PairCase) -> BigInt {
    let qb = BigInt::from(q);
    let n = match case {
        PairCase::Divides => {
            let lhs = alg.from_mu8(eps.inv(), &((&qb + 1u32) * (&qb + 1u32)));
            alg.norm(&alg.sub(&lhs, &alg.mul(ag, ag)))
        }
        PairCase::Split { traces, chi } => (0..2)
            .map(|i| alg.norm(&alg.sub(&alg.from_mu8(chi[i], &traces[i].into()), ag)))
            .product(),
        PairCase::Inert { trace, chi } => {
            let e = alg.sub(&alg.mul(ag, ag), &alg.from_mu8(*chi, &(*trace).into()));
            alg.norm(&alg.sub(&e, &alg.from_mu8(eps, &(2u32 * &qb))))
        }
    };
    n.abs()
}

/// C(q,g) with its factorization, or the information that some B vanished.
#[derive(Clone, Debug, Serialize)]
pub struct CValue {
    pub q: u64,
    pub pairs: usize,
    /// Residue pairs with B(q,g) = 0; C = 0 then carries no information.
    pub zero_pairs: Vec<(u64, u64)>,
    #[serde(serialize_with = "ser_factors")]
    pub factorization: Vec<(BigInt, u32)>,
}

impl CValue {
    pub fn is_zero(&self) -> bool {
        !self.zero_pairs.is_empty()
    }

    pub fn value(&self) -> BigInt {
        if self.is_zero() {
            return BigInt::zero();
        }
        self.factorization.iter().map(|(p, e)| num_traits::pow(p.clone(), *e as usize)).product()
    }

    pub fn primes(&self) -> Vec<BigInt> {
        self.factorization.iter().map(|(p, _)| p.clone()).collect()
    }
}

/// C(q,g) = ∏ B(q,g) over the q² − 1 residue pairs.
pub fn mazur_c(g: &NewformRecord, ctx: &Context, q: u64, data: &[PairData]) -> Result<CValue, EliminateError> {
    check_form_at(g, ctx, q)?;
    let alg = TensorAlgebra::new(&g.field_minpoly);
    let ag = alg.from_field(g.a(q)?);
    let eps = ctx.eps_at(q);
    let values: Vec<BigInt> = data.par_iter().map(|p| b_value(&alg, &ag, eps, q, &p.case)).collect();
    let zero_pairs = data.iter().zip(&values).filter(|(_, v)| v.is_zero()).map(|(p, _)| (p.a, p.b)).collect();
    let mut exps: BTreeMap<BigInt, u32> = BTreeMap::new();
    let mut cache: HashMap<BigInt, Vec<(BigInt, u32)>> = HashMap::new();
    for v in values.iter().filter(|v| !v.is_zero()) {
        let f = cache.entry(v.clone()).or_insert_with(|| if v.is_one() { vec![] } else { factor_big(v) });
        for (p, e) in f.iter() {
            *exps.entry(p.clone()).or_default() += e;
        }
    }
    Ok(CValue { q, pairs: data.len(), zero_pairs, factorization: exps.into_iter().collect() })
}

/// Primes dividing N(ε⁻¹(q₀)(q₀+1)² − a_{q₀}(g)²), the condition for a CM
/// form to be congruent to a curve without multiplicative primes.
pub fn cm_raising_check(g: &NewformRecord, eps_q0: Mu8, q0: u64) -> Result<Vec<BigInt>, EliminateError> {
    let alg = TensorAlgebra::new(&g.field_minpoly);
    let a = alg.from_field(g.a(q0)?);
    let v = b_value(&alg, &a, eps_q0, q0, &PairCase::Divides);
    if v.is_zero() {
        return Ok(vec![]);
    }
    Ok(factor_big(&v).into_iter().map(|(p, _)| p).collect())
}

// ---------------------------------------------------------------------------
// Bounds

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct KrausBound {
    pub ell: u64,
    /// floor(ℓ + 1 + 2√ℓ).
    pub raw_bound: u64,
    pub modulus_used: u64,
}

/// The auxiliary prime ℓ of the irreducibility argument.
///
/// d̃ is the part of d prime to 2t; ℓ ≡ 1 (mod 16d̃) for t = 2 and
/// ℓ ≡ 1 (mod 9d̃) for t = 3, and ℓ must split in K.
pub fn kraus_bound(d: u64, t: u64) -> KrausBound {
    let mut dt = d;
    for p in [2, t] {
        while dt % p == 0 {
            dt /= p;
        }
    }
    let modulus = if t == 2 { 16 * dt } else { t * t * dt };
    let disc = Field::new(d as i64).expect("square-free d").disc;
    let ell = (1..)
        .map(|k| k * modulus + 1)
        .find(|&l| is_prime(l) && kronecker(disc, l as i64) == 1)
        .expect("Dirichlet");
    // floor(2√ℓ) = isqrt(4ℓ)
    KrausBound { ell, raw_bound: ell + 1 + isqrt_u64(4 * ell), modulus_used: modulus }
}

/// Published thresholds for the worked cases, reported beside raw_bound.
pub fn stated_kraus_threshold(d: u64, t: u64) -> Option<u64> {
    match (d, t) {
        (5, 2) => Some(273),
        (7, 2) => Some(137),
        (2, 3) => Some(23),
        _ => None,
    }
}

/// Ellenberg's bound N_d beyond which the projective image is large enough;
/// `improved` returns the value found by searching small p directly.
pub fn ellenberg_floor(d: u64, improved: bool) -> Result<u64, EliminateError> {
    let base = match d {
        2 => 353,
        3 => 137,
        5 => 439,
        6 => 569,
        7 => 137,
        1 if improved => 11,
        _ => return Err(EliminateError::NoData(d)),
    };
    Ok(if improved { 11 } else { base })
}

/// Whether every primitive solution has a prime of multiplicative reduction
/// (C prime to 6 when 6 | d), which excludes CM forms and the irreducibility
/// bound.
pub fn multiplicative_prime_guaranteed(d: u64) -> bool {
    d % 6 == 0
}

#[derive(Clone, Debug, Serialize)]
pub struct Floors {
    pub kraus: Option<KrausBound>,
    pub ellenberg: u64,
    /// Primes up to this value are not covered by the modular argument.
    pub value: u64,
}

pub fn floors(eq: Equation, d: u64) -> Result<Floors, EliminateError> {
    let ellenberg = ellenberg_floor(d, true)?;
    let kraus = (!multiplicative_prime_guaranteed(d)).then(|| kraus_bound(d, eq.t() as u64));
    let value = kraus.as_ref().map_or(0, |k| k.raw_bound).max(ellenberg);
    Ok(Floors { kraus, ellenberg, value })
}

// ---------------------------------------------------------------------------
// Reports

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Survivors {
    /// No information: every prime survives.
    All,
    Finite(BTreeSet<BigInt>),
}

impl Survivors {
    fn meet(self, other: BTreeSet<BigInt>) -> Survivors {
        match self {
            Survivors::All => Survivors::Finite(other),
            Survivors::Finite(s) => Survivors::Finite(s.intersection(&other).cloned().collect()),
        }
    }

    pub fn as_u64(&self) -> Option<Vec<u64>> {
        match self {
            Survivors::All => None,
            Survivors::Finite(s) => Some(s.iter().map(|p| p.to_u64().expect("prime fits in u64")).collect()),
        }
    }

    pub fn max(&self) -> Option<BigInt> {
        match self {
            Survivors::All => None,
            Survivors::Finite(s) => Some(s.iter().next_back().cloned().unwrap_or_else(BigInt::one)),
        }
    }
}

impl Serialize for Survivors {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Survivors::All => s.serialize_str("all"),
            Survivors::Finite(v) => s.collect_seq(v.iter().map(|p| p.to_string())),
        }
    }
}

impl fmt::Display for Survivors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Survivors::All => write!(f, "all primes"),
            Survivors::Finite(v) => {
                write!(f, "{{{}}}", v.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(", "))
            }
        }
    }
}

fn ser_factors<S: Serializer>(v: &[(BigInt, u32)], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|(p, e)| (p.to_string(), e)))
}

#[derive(Clone, Debug, Serialize)]
pub struct EliminationReport {
    pub form_label: String,
    pub has_cm: bool,
    pub per_q: Vec<CValue>,
    /// Primes not excluded by Mazur's trick (or by the CM test).
    pub mazur_survivors: Survivors,
    pub floors: Floors,
    /// mazur_survivors together with every prime up to the floor.
    pub surviving_primes: Survivors,
    pub method_notes: Vec<String>,
}

impl EliminationReport {
    /// Largest surviving prime, so that the form is discarded for p above it.
    pub fn bound(&self) -> Option<BigInt> {
        self.surviving_primes.max()
    }
}

fn primes_to(n: u64) -> BTreeSet<BigInt> {
    primes_up_to(n).into_iter().map(BigInt::from).collect()
}

fn with_floor(s: &Survivors, floor: u64) -> Survivors {
    match s {
        Survivors::All => Survivors::All,
        Survivors::Finite(v) => Survivors::Finite(v.iter().cloned().chain(primes_to(floor)).collect()),
    }
}

/// Frey data for several q, computed once and shared between forms.
pub fn frey_data_for(ctx: &Context, qs: &[u64]) -> Result<BTreeMap<u64, Vec<PairData>>, EliminateError> {
    qs.iter().map(|&q| Ok((q, frey_data(ctx, q)?))).collect()
}

pub fn eliminate_form(g: &NewformRecord, ctx: &Context, qs: &[u64]) -> Result<EliminationReport, EliminateError> {
    let data = frey_data_for(ctx, qs)?;
    eliminate_form_with(g, ctx, qs, &data)
}

pub fn eliminate_form_with(
    g: &NewformRecord,
    ctx: &Context,
    qs: &[u64],
    data: &BTreeMap<u64, Vec<PairData>>,
) -> Result<EliminationReport, EliminateError> {
    if qs.is_empty() {
        return Err(EliminateError::EmptyQList);
    }
    let floors = floors(ctx.equation, ctx.d)?;
    let mut notes = vec![];
    let mut per_q = vec![];
    let mut surv = Survivors::All;
    if g.has_cm {
        if multiplicative_prime_guaranteed(ctx.d) {
            notes.push("CM form: the Frey curve has a multiplicative prime, so no congruence is possible".into());
            surv = Survivors::Finite(BTreeSet::new());
        } else {
            let q0 = 3;
            if g.level % q0 == 0 {
                notes.push("CM form: 3 divides the level, raising-the-level test unavailable".into());
            } else {
                let ps = cm_raising_check(g, ctx.eps_at(q0), q0)?;
                notes.push(format!("CM form: primes dividing N(16ε⁻¹(3) − a₃²) are {:?}", ps.iter().map(|p| p.to_string()).collect::<Vec<_>>()));
                surv = Survivors::Finite(ps.into_iter().collect());
            }
        }
    } else {
        for &q in qs {
            let c = mazur_c(g, ctx, q, &data[&q])?;
            if c.is_zero() {
                notes.push(format!("C({},g) = 0: B vanishes at {} residue pairs", q, c.zero_pairs.len()));
            } else {
                // Mazur's trick needs q ≠ p.
                let mut s: BTreeSet<BigInt> = c.primes().into_iter().collect();
                s.insert(q.into());
                surv = surv.meet(s);
            }
            per_q.push(c);
        }
        if surv == Survivors::All {
            notes.push("every C(q,g) vanished: the form is not eliminated".into());
        }
    }
    Ok(EliminationReport {
        form_label: g.label.clone(),
        has_cm: g.has_cm,
        per_q,
        surviving_primes: with_floor(&surv, floors.value),
        mazur_survivors: surv,
        floors,
        method_notes: notes,
    })
}

/// Reports for a whole space together with the union of surviving primes.
#[derive(Clone, Debug, Serialize)]
pub struct SpaceReport {
    pub equation: Equation,
    pub d: u64,
    pub qs: Vec<u64>,
    pub forms: Vec<EliminationReport>,
    pub surviving_primes: Survivors,
}

pub fn eliminate_space(forms: &[NewformRecord], ctx: &Context, qs: &[u64]) -> Result<SpaceReport, EliminateError> {
    let data = frey_data_for(ctx, qs)?;
    let reports = forms.iter().map(|g| eliminate_form_with(g, ctx, qs, &data)).collect::<Result<Vec<_>, _>>()?;
    let mut all = Survivors::Finite(primes_to(floors(ctx.equation, ctx.d)?.value));
    for r in &reports {
        all = match (all, &r.surviving_primes) {
            (Survivors::Finite(a), Survivors::Finite(b)) => Survivors::Finite(a.union(b).cloned().collect()),
            _ => Survivors::All,
        };
    }
    Ok(SpaceReport { equation: ctx.equation, d: ctx.d, qs: qs.to_vec(), forms: reports, surviving_primes: all })
}

/// The set of traces a_q of the Frey curves over all residue pairs with good
/// reduction at the (first) prime above q.
pub fn trace_fingerprint(eq: Equation, d: u64, q: u64) -> Result<BTreeSet<i64>, EliminateError> {
    let ctx = Context::new(eq, d)?;
    let mut out = BTreeSet::new();
    for p in frey_data(&ctx, q)? {
        match p.case {
            PairCase::Divides => {}
            PairCase::Split { traces, .. } => {
                out.insert(traces[0]);
            }
            PairCase::Inert { trace, .. } => {
                out.insert(trace);
            }
        }
    }
    Ok(out)
}

/// Lifts a residue pair by multiples of q (for residue-dependence checks).
pub fn frey_case_for(ctx: &Context, q: u64, a: i64, b: i64) -> Result<PairCase, EliminateError> {
    let sp = split_prime(&ctx.field, q);
    let cp = ctx.equation.lhs(ctx.d as i64, &a.into(), &b.into());
    let qb = BigInt::from(q);
    if cp.mod_floor(&qb).is_zero() {
        return Ok(PairCase::Divides);
    }
    Ok(match sp.kind {
        SplitKind::Split => {
            let mut traces = [0; 2];
            let mut chi = [Mu8::ONE; 2];
            for i in 0..2 {
                traces[i] = frey_trace(ctx.equation, ctx.d, a, b, q, i)?;
                chi[i] = ctx.chi.eval(&sp.primes_above[i].ideal)?;
            }
            PairCase::Split { traces, chi }
        }
        _ => PairCase::Inert {
            trace: frey_trace(ctx.equation, ctx.d, a, b, q, 0)?,
            chi: ctx.chi.eval(&QuadIdeal::rational(q as i128))?,
        },
    })
}
