//! Exhaustive checks of the published tables against the library: the
//! 2-adic characters, the parity of the divisor classes, the unit groups at
//! 2, the cocycle c and the trivializing maps β.
//!
//! The cocycle and β tables under test are inputs, so that a mutated entry
//! can be fed in as a negative control.

use crate::cocycle::{verify_trivialization_with, BetaTable, Case, CocycleTable, GroupElement, KleinElement};
use crate::heckechar::{classify_divisors, two_adic_generators, two_adic_table, DivisorClass, LocalCharacter, Mu8};
use crate::quadfield::Field;
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TableCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl TableCheck {
    fn new(name: &str, failures: Vec<String>, ok_detail: String) -> TableCheck {
        let passed = failures.is_empty();
        let detail = if passed { ok_detail } else { failures.join("; ") };
        TableCheck { name: name.into(), passed, detail }
    }
}

/// Tables fed to the cocycle and trivialization checks.
#[derive(Clone, Debug)]
pub struct TableInputs {
    pub cocycle: CocycleTable,
    pub betas: Vec<BetaTable>,
}

impl Default for TableInputs {
    fn default() -> TableInputs {
        TableInputs { cocycle: CocycleTable::standard(), betas: Case::ALL.iter().map(|&c| BetaTable::standard(c)).collect() }
    }
}

impl TableInputs {
    pub fn beta(&self, case: Case) -> &BetaTable {
        self.betas.iter().find(|b| b.case == case).expect("one table per case")
    }

    pub fn beta_mut(&mut self, case: Case) -> &mut BetaTable {
        self.betas.iter_mut().find(|b| b.case == case).expect("one table per case")
    }
}

/// δ₋₁, δ₋₂, δ₂ on 1, 3, 5, 7.
const TWO_ADIC: [(i64, [i32; 4]); 3] = [(-1, [1, -1, 1, -1]), (-2, [1, 1, -1, -1]), (2, [1, -1, -1, 1])];

/// (#Q3, #Q5, #Q7) mod 2 by d mod 8.
const PARITY: [(u64, &[[u8; 3]]); 6] = [
    (1, &[[0, 0, 0], [1, 1, 1]]),
    (3, &[[0, 1, 1], [1, 0, 0]]),
    (5, &[[0, 1, 0], [1, 0, 1]]),
    (7, &[[0, 0, 1], [1, 1, 0]]),
    (2, &[[0, 0, 0], [0, 1, 0], [1, 0, 1], [1, 1, 1]]),
    (6, &[[0, 0, 1], [0, 1, 1], [1, 0, 0], [1, 1, 0]]),
];

/// (d, n, generator orders, norms mod 8) for (O/2ⁿ)^× at the prime above 2.
const UNIT_GROUPS: [(i64, u32, &[u32], &[i128]); 4] = [
    (1, 3, &[4, 4, 2], &[1, 5, 1]),
    (3, 3, &[3, 4, 2, 2], &[1, 3, 5, 1]),
    (5, 3, &[4, 4, 2], &[5, 5, 1]),
    (2, 2, &[4, 2], &[3, 1]),
];

/// c(g, h), rows and columns 1, σ₂, σ_d, σ₂σ_d.
const COCYCLE: [[i64; 4]; 4] = [[1, 1, 1, 1], [1, 1, -1, -1], [1, 1, -2, -2], [1, 1, 2, 2]];

/// Listed β values as (i, j, k) for σⁱμᵏτʲ.
const BETA_D4: [((i64, i64, i64), &str); 8] = [
    ((0, 0, 0), "1"),
    ((1, 0, 0), "√−1"),
    ((2, 0, 0), "−1"),
    ((3, 0, 0), "−√−1"),
    ((0, 1, 0), "√−2"),
    ((1, 1, 0), "√2"),
    ((2, 1, 0), "−√−2"),
    ((3, 1, 0), "−√2"),
];

const BETA_Z4: [((i64, i64, i64), &str); 16] = [
    ((0, 0, 0), "1"),
    ((1, 0, 0), "√−1"),
    ((2, 0, 0), "−1"),
    ((3, 0, 0), "−√−1"),
    ((0, 1, 0), "√−2"),
    ((0, 0, 1), "√−1"),
    ((1, 1, 0), "√2"),
    ((2, 1, 0), "−√−2"),
    ((3, 1, 0), "−√2"),
    ((1, 0, 1), "−1"),
    ((2, 0, 1), "−√−1"),
    ((3, 0, 1), "1"),
    ((0, 1, 1), "−√2"),
    ((1, 1, 1), "√−2"),
    ((2, 1, 1), "√2"),
    ((3, 1, 1), "−√−2"),
];

fn check_two_adic() -> TableCheck {
    let got = two_adic_table();
    let failures = TWO_ADIC
        .iter()
        .filter(|row| !got.contains(row))
        .map(|(s, row)| format!("δ_{} expected {:?}", s, row))
        .collect();
    TableCheck::new("two-adic characters", failures, "3 characters on 4 residues".into())
}

fn check_parity() -> TableCheck {
    let mut seen: BTreeMap<u64, BTreeSet<[u8; 3]>> = BTreeMap::new();
    let mut count = 0;
    for d in 1..4000u64 {
        if d % 4 == 0 || Field::new(d as i64).is_err() {
            continue;
        }
        let qs = classify_divisors(d, 2).expect("t = 2");
        let par = |c| (qs.count(c) % 2) as u8;
        let row = [par(DivisorClass::Q3), par(DivisorClass::Q5), par(DivisorClass::Q7)];
        seen.entry(d % 8).or_default().insert(row);
        count += 1;
    }
    let mut failures = vec![];
    for (r, rows) in PARITY {
        let want: BTreeSet<[u8; 3]> = rows.iter().copied().collect();
        let got = seen.remove(&r).unwrap_or_default();
        if got != want {
            failures.push(format!("d ≡ {} (mod 8): found {:?}", r, got));
        }
    }
    TableCheck::new("divisor parity", failures, format!("{} square-free d < 4000", count))
}

fn check_unit_groups() -> TableCheck {
    let mut failures = vec![];
    for (d, n, orders, norms) in UNIT_GROUPS {
        let f = Field::new(d).expect("square-free");
        let Some((pr, exp, gens)) = two_adic_generators(&f) else {
            failures.push(format!("d={}: no generators", d));
            continue;
        };
        if exp != n * pr.e() {
            failures.push(format!("d={}: modulus exponent {}", d, exp));
            continue;
        }
        // The trivial character on these generators only builds if they span.
        let coords: Vec<_> = gens.iter().map(|g| (g.1, Mu8::ONE)).collect();
        let got: Vec<u32> = match LocalCharacter::over_prime(&f, &pr, exp, &coords) {
            Ok(c) => c.generators.iter().map(|g| g.order).collect(),
            Err(e) => {
                failures.push(format!("d={}: {}", d, e));
                continue;
            }
        };
        let q = pr.norm();
        if got != orders || got.iter().product::<u32>() as u64 != q.pow(exp - 1) * (q - 1) {
            failures.push(format!("d={}: generator orders {:?}", d, got));
        }
        let nm: Vec<i128> = gens.iter().map(|g| f.norm_basis(g.1).rem_euclid(8)).collect();
        if nm != norms {
            failures.push(format!("d={}: norms {:?}", d, nm));
        }
    }
    TableCheck::new("two-adic unit groups", failures, "d = 1, 3, 5 and even d".into())
}

fn check_cocycle(c: &CocycleTable) -> TableCheck {
    let mut failures = vec![];
    for g in KleinElement::ALL {
        for h in KleinElement::ALL {
            let want = COCYCLE[g.0 as usize][h.0 as usize];
            if c.get(g, h) != want {
                failures.push(format!("c({}, {}) = {}, expected {}", g, h, c.get(g, h), want));
            }
        }
    }
    let bad = c.cocycle_failures();
    if let Some((g, h, k)) = bad.first() {
        failures.push(format!("cocycle condition fails at {} triples, first ({}, {}, {})", bad.len(), g, h, k));
    }
    TableCheck::new("cocycle", failures, "16 entries, 64 triples".into())
}

fn check_case(case: Case, c: &CocycleTable, b: &BetaTable) -> TableCheck {
    let listed: &[((i64, i64, i64), &str)] = match case {
        Case::D4 => &BETA_D4,
        Case::D4CentralZ4 => &BETA_Z4,
        Case::D4CentralZ8 => &[],
    };
    let mut failures = vec![];
    for &((i, j, k), v) in listed {
        let g = GroupElement::new(case, i, j, k);
        let got = b.get(g).to_string();
        if got != v {
            failures.push(format!("β({}) = {}, listed {}", g, got, v));
        }
    }
    let r = verify_trivialization_with(c, b);
    if !r.beta_of_identity_is_one {
        failures.push("β(1) ≠ 1".into());
    }
    if let Some(m) = r.mismatches.first() {
        failures.push(format!(
            "{} of {} pairs fail, first β({})β({})/β(gh) = {} vs c = {}",
            r.mismatches.len(),
            r.pairs_checked,
            m.g,
            m.h,
            m.coboundary,
            m.cocycle
        ));
    }
    let ok = format!("{} pairs, {} listed values", r.pairs_checked, listed.len());
    TableCheck::new(&format!("trivialization {}", case.label()), failures, ok)
}

/// Every table check, in a fixed order.
pub fn verify_tables(inputs: &TableInputs) -> Vec<TableCheck> {
    let mut out = vec![check_two_adic(), check_parity(), check_unit_groups(), check_cocycle(&inputs.cocycle)];
    for case in Case::ALL {
        out.push(check_case(case, &inputs.cocycle, inputs.beta(case)));
    }
    out
}

/// First failing check, if any.
pub fn first_failure(checks: &[TableCheck]) -> Option<&TableCheck> {
    checks.iter().find(|c| !c.passed)
}

