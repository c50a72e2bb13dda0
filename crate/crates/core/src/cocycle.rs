//! The isogeny 2-cocycle of the Frey Q-curve on Gal(L/Q), L = Q(√−d, √−2),
//! and maps β on the larger Galois groups whose coboundary β(g)β(h)/β(gh)
//! equals the inflated cocycle.
//!
//! Coefficients live in the group generated by ζ₈ and √2, so every value is
//! ζ₈ᵃ·√2ᵉ and equality is exact.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::ops::{Div, Mul};

/// ζ₈ᵃ·√2ᵉ with ζ₈ = e^{πi/4}. Then √−1 = ζ₈² and √−2 = ζ₈²·√2.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SurdValue {
    zeta: u8,
    sqrt2: i32,
}

impl SurdValue {
    pub const ONE: SurdValue = SurdValue { zeta: 0, sqrt2: 0 };

    pub fn new(zeta: i64, sqrt2: i32) -> SurdValue {
        SurdValue { zeta: zeta.rem_euclid(8) as u8, sqrt2 }
    }

    /// Product (−1)^a (√−1)^b (√2)^c (√−2)^e ζ₈^f, rewritten to normal form.
    pub fn from_exponents(minus_one: i64, sqrt_m1: i64, sqrt2: i32, sqrt_m2: i32, zeta8: i64) -> SurdValue {
        SurdValue::new(4 * minus_one + 2 * sqrt_m1 + 2 * sqrt_m2 as i64 + zeta8, sqrt2 + sqrt_m2)
    }

    pub fn minus_one() -> SurdValue {
        SurdValue::new(4, 0)
    }

    pub fn sqrt_m1() -> SurdValue {
        SurdValue::new(2, 0)
    }

    pub fn sqrt2() -> SurdValue {
        SurdValue::new(0, 1)
    }

    pub fn sqrt_m2() -> SurdValue {
        SurdValue::new(2, 1)
    }

    pub fn zeta8() -> SurdValue {
        SurdValue::new(1, 0)
    }

    /// ±2ᵏ as a surd; None for other integers.
    pub fn from_int(n: i64) -> Option<SurdValue> {
        if n == 0 || n.unsigned_abs().count_ones() != 1 {
            return None;
        }
        let k = n.unsigned_abs().trailing_zeros() as i32;
        Some(SurdValue::new(if n < 0 { 4 } else { 0 }, 2 * k))
    }

    pub fn zeta_exponent(self) -> u8 {
        self.zeta
    }

    pub fn sqrt2_exponent(self) -> i32 {
        self.sqrt2
    }

    pub fn inv(self) -> SurdValue {
        SurdValue::new(-(self.zeta as i64), -self.sqrt2)
    }

    pub fn pow(self, e: i64) -> SurdValue {
        SurdValue::new(self.zeta as i64 * e, self.sqrt2 * e as i32)
    }

    /// The value as a complex number, for display and cross-checks.
    pub fn to_complex(self) -> num_complex::Complex64 {
        let z = num_complex::Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4 * self.zeta as f64);
        z * 2f64.powf(self.sqrt2 as f64 / 2.0)
    }
}

impl Mul for SurdValue {
    type Output = SurdValue;
    fn mul(self, o: SurdValue) -> SurdValue {
        SurdValue::new(self.zeta as i64 + o.zeta as i64, self.sqrt2 + o.sqrt2)
    }
}

impl Div for SurdValue {
    type Output = SurdValue;
    fn div(self, o: SurdValue) -> SurdValue {
        self * o.inv()
    }
}

impl fmt::Display for SurdValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (sign, unit) = match self.zeta {
            0 => ("", ""),
            2 => ("", "√−1"),
            4 => ("−", ""),
            6 => ("−", "√−1"),
            1 => ("", "ζ8"),
            3 => ("", "ζ8^3"),
            5 => ("", "ζ8^5"),
            _ => ("", "ζ8^7"),
        };
        // Fold √−1·√2 into √−2 and keep whole powers of 2 as a coefficient.
        let (unit, root) = match (unit, self.sqrt2.rem_euclid(2)) {
            ("√−1", 1) => ("", "√−2"),
            (u, 1) => (u, "√2"),
            (u, _) => (u, ""),
        };
        let two = self.sqrt2.div_euclid(2);
        let mut parts: Vec<String> = vec![];
        if two > 0 {
            parts.push((1u64 << two).to_string());
        } else if two < 0 {
            parts.push(format!("1/{}", 1u64 << -two));
        }
        parts.extend([root, unit].iter().filter(|s| !s.is_empty()).map(|s| s.to_string()));
        if parts.is_empty() {
            parts.push("1".into());
        }
        write!(f, "{}{}", sign, parts.join("·"))
    }
}

/// The three shapes of Gal(N/Q).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Case {
    /// Q5 = Q7 = ∅: the dihedral group D4 = ⟨σ, τ⟩.
    D4,
    /// Q5 = ∅ ≠ Q7: D4 with a central μ, μ² = σ² (order 16).
    D4CentralZ4,
    /// Q5 ≠ ∅: D4 with a central μ of order 8, μ⁴ = σ² (order 32).
    D4CentralZ8,
}

impl Case {
    pub const ALL: [Case; 3] = [Case::D4, Case::D4CentralZ4, Case::D4CentralZ8];

    /// Number of distinct powers μ^k before μ^k lands in ⟨σ⟩.
    fn mu_period(self) -> u8 {
        match self {
            Case::D4 => 1,
            Case::D4CentralZ4 => 2,
            Case::D4CentralZ8 => 4,
        }
    }

    pub fn order(self) -> usize {
        8 * self.mu_period() as usize
    }

    pub fn label(self) -> &'static str {
        match self {
            Case::D4 => "dihedral",
            Case::D4CentralZ4 => "dihedral-central-z4",
            Case::D4CentralZ8 => "dihedral-central-z8",
        }
    }

    /// Case selected by the divisor classes of d (for t = 2).
    pub fn for_divisor_counts(q5: usize, q7: usize) -> Case {
        if q5 > 0 {
            Case::D4CentralZ8
        } else if q7 > 0 {
            Case::D4CentralZ4
        } else {
            Case::D4
        }
    }
}

/// σⁱτʲμᵏ in normal form: i mod 4, j mod 2, 0 ≤ k < period, with μ^period
/// rewritten as σ².
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GroupElement {
    pub case: Case,
    pub i: u8,
    pub j: u8,
    pub k: u8,
}

impl GroupElement {
    /// For the dihedral case there is no μ and k is ignored.
    pub fn new(case: Case, i: i64, j: i64, k: i64) -> GroupElement {
        let p = case.mu_period() as i64;
        let k = if case == Case::D4 { 0 } else { k };
        let i = i + 2 * k.div_euclid(p);
        GroupElement {
            case,
            i: i.rem_euclid(4) as u8,
            j: j.rem_euclid(2) as u8,
            k: k.rem_euclid(p) as u8,
        }
    }

    pub fn identity(case: Case) -> GroupElement {
        GroupElement::new(case, 0, 0, 0)
    }

    pub fn sigma(case: Case) -> GroupElement {
        GroupElement::new(case, 1, 0, 0)
    }

    pub fn tau(case: Case) -> GroupElement {
        GroupElement::new(case, 0, 1, 0)
    }

    pub fn mu(case: Case) -> GroupElement {
        GroupElement::new(case, 0, 0, 1)
    }

    pub fn all(case: Case) -> Vec<GroupElement> {
        let mut out = vec![];
        for k in 0..case.mu_period() {
            for j in 0..2 {
                for i in 0..4 {
                    out.push(GroupElement::new(case, i, j, k as i64));
                }
            }
        }
        out
    }

    /// τσ = σ³τ and μ central.
    pub fn mul(self, o: GroupElement) -> GroupElement {
        assert_eq!(self.case, o.case);
        let i2 = if self.j == 1 { -(o.i as i64) } else { o.i as i64 };
        GroupElement::new(self.case, self.i as i64 + i2, (self.j + o.j) as i64, (self.k + o.k) as i64)
    }

    pub fn pow(self, e: u32) -> GroupElement {
        (0..e).fold(GroupElement::identity(self.case), |acc, _| acc.mul(self))
    }

    pub fn inv(self) -> GroupElement {
        let n = self.case.order() as u32;
        self.pow(n - 1)
    }

    /// Restriction to Gal(L/Q): σ ↦ σ₂, τ ↦ σ_d, μ ↦ 1.
    pub fn restrict(self) -> KleinElement {
        KleinElement((self.i % 2) | (self.j << 1))
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let pow = |name: &str, e: u8| match e {
            0 => String::new(),
            1 => name.to_string(),
            _ => format!("{}^{}", name, e),
        };
        let s = format!("{}{}{}", pow("σ", self.i), pow("μ", self.k), pow("τ", self.j));
        if s.is_empty() {
            write!(f, "1")
        } else {
            write!(f, "{}", s)
        }
    }
}

/// Element of Gal(L/Q) ≅ (Z/2)²: bit 0 is σ₂, bit 1 is σ_d.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct KleinElement(pub u8);

impl KleinElement {
    pub const ONE: KleinElement = KleinElement(0);
    pub const SIGMA_2: KleinElement = KleinElement(1);
    pub const SIGMA_D: KleinElement = KleinElement(2);
    pub const SIGMA_2D: KleinElement = KleinElement(3);
    pub const ALL: [KleinElement; 4] = [Self::ONE, Self::SIGMA_2, Self::SIGMA_D, Self::SIGMA_2D];

    pub fn mul(self, o: KleinElement) -> KleinElement {
        KleinElement(self.0 ^ o.0)
    }
}

impl fmt::Display for KleinElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = ["1", "σ₂", "σ_d", "σ₂σ_d"][self.0 as usize];
        write!(f, "{}", s)
    }
}

/// c(g, h) on Gal(L/Q) with values ±1, ±2.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CocycleTable {
    pub values: [[i64; 4]; 4],
}

impl CocycleTable {
    /// φ₁, φ_{σ₂} the identity and φ_{σ_d}, φ_{σ₂σ_d} the 2-isogeny.
    pub fn standard() -> CocycleTable {
        CocycleTable {
            values: [[1, 1, 1, 1], [1, 1, -1, -1], [1, 1, -2, -2], [1, 1, 2, 2]],
        }
    }

    pub fn get(&self, g: KleinElement, h: KleinElement) -> i64 {
        self.values[g.0 as usize][h.0 as usize]
    }

    pub fn with_entry(&self, g: KleinElement, h: KleinElement, v: i64) -> CocycleTable {
        let mut out = self.clone();
        out.values[g.0 as usize][h.0 as usize] = v;
        out
    }

    /// Triples where c(g,h)c(gh,k) ≠ c(h,k)c(g,hk).
    pub fn cocycle_failures(&self) -> Vec<(KleinElement, KleinElement, KleinElement)> {
        let mut out = vec![];
        for g in KleinElement::ALL {
            for h in KleinElement::ALL {
                for k in KleinElement::ALL {
                    let lhs = self.get(g, h) * self.get(g.mul(h), k);
                    let rhs = self.get(h, k) * self.get(g, h.mul(k));
                    if lhs != rhs {
                        out.push((g, h, k));
                    }
                }
            }
        }
        out
    }
}

/// β on Gal(N/Q) as an explicit table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BetaTable {
    pub case: Case,
    pub values: Vec<(GroupElement, SurdValue)>,
}

/// β on D4: σⁱ ↦ (√−1)ⁱ and σⁱτ ↦ √−2·(√−1)^{−i}, i.e. τ, στ, σ²τ, σ³τ
/// go to √−2, √2, −√−2, −√2.
fn dihedral_beta(i: u8, j: u8) -> SurdValue {
    if j == 0 {
        SurdValue::sqrt_m1().pow(i as i64)
    } else {
        SurdValue::sqrt_m2() * SurdValue::sqrt_m1().pow(-(i as i64))
    }
}

/// β(σⁱτʲμᵏ) = β̃(σⁱτʲ)·uᵏ with u = 1, √−1, ζ₈ in the three cases.
pub fn beta(case: Case, g: GroupElement) -> SurdValue {
    assert_eq!(g.case, case);
    let u = match case {
        Case::D4 => SurdValue::ONE,
        Case::D4CentralZ4 => SurdValue::sqrt_m1(),
        Case::D4CentralZ8 => SurdValue::zeta8(),
    };
    dihedral_beta(g.i, g.j) * u.pow(g.k as i64)
}

impl BetaTable {
    pub fn standard(case: Case) -> BetaTable {
        BetaTable { case, values: GroupElement::all(case).into_iter().map(|g| (g, beta(case, g))).collect() }
    }

    pub fn get(&self, g: GroupElement) -> SurdValue {
        self.values.iter().find(|(h, _)| *h == g).expect("element of the group").1
    }

    pub fn with_entry(&self, g: GroupElement, v: SurdValue) -> BetaTable {
        let mut out = self.clone();
        for e in out.values.iter_mut().filter(|(h, _)| *h == g) {
            e.1 = v;
        }
        out
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Mismatch {
    pub g: String,
    pub h: String,
    pub coboundary: String,
    pub cocycle: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct TrivializationReport {
    pub case: Case,
    pub group_order: usize,
    pub pairs_checked: usize,
    pub beta_of_identity_is_one: bool,
    pub mismatches: Vec<Mismatch>,
}

impl TrivializationReport {
    pub fn passed(&self) -> bool {
        self.beta_of_identity_is_one && self.mismatches.is_empty()
    }
}

pub fn verify_trivialization(case: Case) -> TrivializationReport {
    verify_trivialization_with(&CocycleTable::standard(), &BetaTable::standard(case))
}

/// Checks β(g)β(h)/β(gh) = c(res g, res h) for every pair.
pub fn verify_trivialization_with(c: &CocycleTable, b: &BetaTable) -> TrivializationReport {
    let elems = GroupElement::all(b.case);
    let mut mismatches = vec![];
    for &g in &elems {
        for &h in &elems {
            let cob = b.get(g) * b.get(h) / b.get(g.mul(h));
            let cv = c.get(g.restrict(), h.restrict());
            let want = SurdValue::from_int(cv);
            if want != Some(cob) {
                mismatches.push(Mismatch {
                    g: g.to_string(),
                    h: h.to_string(),
                    coboundary: cob.to_string(),
                    cocycle: cv.to_string(),
                });
            }
        }
    }
    TrivializationReport {
        case: b.case,
        group_order: elems.len(),
        pairs_checked: elems.len() * elems.len(),
        beta_of_identity_is_one: b.get(GroupElement::identity(b.case)) == SurdValue::ONE,
        mismatches,
    }
}
