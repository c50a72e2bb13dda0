//! Documents emitted by the command-line front end, and their plain-text
//! rendering. Every document is deterministic in its inputs.

use crate::cocycle::{Case, GroupElement, KleinElement, SurdValue};
use crate::descent::{frey_local_types, level_candidates, DescentData, LocalRep};
use crate::eliminate::{
    eliminate_space, floors, load_newforms, stated_kraus_threshold, Context, EliminateError, EliminationReport, Floors,
    Survivors,
};
use crate::ellcurve::Equation;
use crate::heckechar::{build_chi, build_epsilon, classify_divisors, verify_character, DivisorSets, VerificationReport};
use crate::quadfield::Field;
use crate::search::{scan, SolutionHit};
use crate::tables::{first_failure, verify_tables, TableCheck, TableInputs};
use serde::Serialize;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

/// Environment variable overriding the fixtures directory.
pub const FIXTURES_ENV: &str = "QCURVES_FIXTURES";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Verification(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Verification(_) => 3,
        }
    }
}

fn input<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Input(e.to_string())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Table,
}

pub trait Render: Serialize {
    fn table(&self) -> String;

    fn render(&self, format: Format) -> String {
        match format {
            Format::Json => serde_json::to_string_pretty(self).expect("serializable") + "\n",
            Format::Table => self.table(),
        }
    }
}

pub fn fixtures_dir() -> PathBuf {
    match std::env::var_os(FIXTURES_ENV) {
        Some(p) if !p.is_empty() => PathBuf::from(p),
        _ => Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures"),
    }
}

/// A path as given if it exists, otherwise relative to the fixtures directory.
pub fn resolve_data_path(p: &Path) -> PathBuf {
    if p.exists() || p.is_absolute() {
        p.to_path_buf()
    } else {
        fixtures_dir().join(p)
    }
}

/// Short identifier of the run, carried by every document.
pub fn run_label(eq: Equation, d: u64) -> String {
    format!("{} d={} t={}", eq.name(), d, eq.t())
}

fn check_d(d: u64) -> Result<Field, CliError> {
    if d == 0 {
        return Err(CliError::Input("d must be positive".into()));
    }
    Field::new(d as i64).map_err(input)
}

#[derive(Clone, Debug)]
pub struct AnalysisConfig {
    pub equation: Equation,
    pub d: u64,
    pub t: u64,
    pub newform_data_path: Option<PathBuf>,
    pub q_list: Vec<u64>,
    /// Norm bound for verify_character; 0 skips it.
    pub norm_bound: i128,
}

impl AnalysisConfig {
    pub fn new(equation: Equation, d: u64) -> AnalysisConfig {
        AnalysisConfig { equation, d, t: equation.t() as u64, newform_data_path: None, q_list: vec![], norm_bound: 0 }
    }
}

// ---------------------------------------------------------------------------
// analyze

#[derive(Clone, Debug, Serialize)]
pub struct LocalTypes {
    pub p: u64,
    pub types: Vec<LocalRep>,
}

#[derive(Clone, Debug, Serialize)]
pub struct EpsilonInfo {
    pub conductor: u64,
    pub order: u32,
    pub even: bool,
    pub ramified_primes: Vec<u64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ChiInfo {
    pub conductor_norm: u64,
    pub order: u32,
    pub ramified_primes: Vec<u64>,
    pub conductor: Vec<(String, u32)>,
}

#[derive(Clone, Debug, Serialize)]
pub struct FloorInfo {
    pub floors: Option<Floors>,
    pub stated_kraus_threshold: Option<u64>,
    pub note: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct AnalysisReport {
    pub label: String,
    pub equation: Equation,
    pub d: u64,
    pub t: u64,
    pub divisor_sets: DivisorSets,
    pub epsilon: EpsilonInfo,
    pub chi: ChiInfo,
    pub descent: DescentData,
    pub local_types: Vec<LocalTypes>,
    pub floors: FloorInfo,
    pub character_check: Option<VerificationReport>,
    pub elimination: Option<EliminateDoc>,
}

fn floor_info(eq: Equation, d: u64) -> FloorInfo {
    let stated = stated_kraus_threshold(d, eq.t() as u64);
    match floors(eq, d) {
        Ok(f) => FloorInfo { floors: Some(f), stated_kraus_threshold: stated, note: None },
        Err(e) => FloorInfo { floors: None, stated_kraus_threshold: stated, note: Some(e.to_string()) },
    }
}

pub fn cmd_analyze(cfg: &AnalysisConfig) -> Result<AnalysisReport, CliError> {
    let (eq, d) = (cfg.equation, cfg.d);
    check_d(d)?;
    let t = eq.t() as u64;
    let divisor_sets = classify_divisors(d, t).map_err(input)?;
    let eps = build_epsilon(d, t).map_err(input)?;
    let chi = build_chi(d, t).map_err(input)?;
    let descent = level_candidates(eq, d).map_err(input)?;
    let mut primes = vec![2];
    if eq == Equation::Benchen {
        primes.push(3);
    }
    for (p, _) in crate::arith::factor_u64(d) {
        if !primes.contains(&p) {
            primes.push(p);
        }
    }
    let local_types = primes.iter().map(|&p| LocalTypes { p, types: frey_local_types(eq, d, p) }).collect();
    let character_check = (cfg.norm_bound > 0).then(|| verify_character(&chi, &eps, cfg.norm_bound));
    let elimination = match &cfg.newform_data_path {
        Some(p) => Some(cmd_eliminate(eq, d, p, &cfg.q_list)?),
        None => None,
    };
    Ok(AnalysisReport {
        label: run_label(eq, d),
        equation: eq,
        d,
        t,
        divisor_sets,
        epsilon: EpsilonInfo {
            conductor: eps.conductor(),
            order: eps.order(),
            even: eps.is_even(),
            ramified_primes: eps.components.iter().filter(|c| !c.is_trivial()).map(|c| c.p).collect(),
        },
        chi: ChiInfo {
            conductor_norm: chi.conductor_norm(),
            order: chi.order(),
            ramified_primes: chi.ramified_primes(),
            conductor: chi.conductor().iter().map(|(i, e)| (i.to_string(), *e)).collect(),
        },
        descent,
        local_types,
        floors: floor_info(eq, d),
        character_check,
        elimination,
    })
}

fn fmt_char(conductor: u64, order: u32) -> String {
    if order == 1 {
        "trivial".into()
    } else {
        format!("conductor {}, order {}", conductor, order)
    }
}

fn fmt_floors(f: &FloorInfo) -> String {
    match &f.floors {
        None => format!("unavailable ({})", f.note.as_deref().unwrap_or("")),
        Some(fl) => {
            let mut s = format!("{} (Ellenberg {}", fl.value, fl.ellenberg);
            if let Some(k) = &fl.kraus {
                write!(s, ", Kraus ℓ={} raw {}", k.ell, k.raw_bound).unwrap();
                if let Some(st) = f.stated_kraus_threshold {
                    write!(s, ", stated {}", st).unwrap();
                }
            } else {
                s.push_str(", Kraus bound not needed: 6 | d");
            }
            s.push(')');
            s
        }
    }
}

impl Render for AnalysisReport {
    fn table(&self) -> String {
        let mut s = String::new();
        writeln!(s, "run            {}", self.label).unwrap();
        let sets: Vec<String> = self
            .divisor_sets
            .sets
            .iter()
            .map(|(c, v)| format!("[{}]={:?}", serde_json::to_value(c).ok().and_then(|x| x.as_str().map(String::from)).unwrap_or_default(), v))
            .collect();
        writeln!(s, "divisor sets   {}", sets.join(" ")).unwrap();
        writeln!(s, "epsilon        {}", fmt_char(self.epsilon.conductor, self.epsilon.order)).unwrap();
        writeln!(s, "chi            {}", fmt_char(self.chi.conductor_norm, self.chi.order)).unwrap();
        let levels: Vec<String> = self.descent.level_candidates.iter().map(|l| l.factored.clone()).collect();
        writeln!(s, "levels         {{{}}}", levels.join(", ")).unwrap();
        for e in &self.descent.exponents {
            writeln!(s, "  exponent at {} ({}): {:?}", e.p, e.splitting, e.exponents).unwrap();
        }
        if let Some(b) = &self.descent.bianchi_levels {
            writeln!(s, "levels over K  {}", b.join(", ")).unwrap();
        }
        for lt in &self.local_types {
            writeln!(s, "local types {:<3}{:?}", lt.p, lt.types).unwrap();
        }
        writeln!(s, "coeff field    {}", self.descent.coeff_field_note).unwrap();
        for f in &self.descent.flags {
            writeln!(s, "flag           {}", f).unwrap();
        }
        writeln!(s, "floor          {}", fmt_floors(&self.floors)).unwrap();
        if let Some(c) = &self.character_check {
            writeln!(s, "character      {} [{}]", c.summary(), if c.passed { "pass" } else { "FAIL" }).unwrap();
        }
        if let Some(e) = &self.elimination {
            s.push_str(&e.table());
        }
        s
    }
}

// ---------------------------------------------------------------------------
// eliminate

#[derive(Clone, Debug, Serialize)]
pub struct EliminateDoc {
    pub label: String,
    pub equation: Equation,
    pub d: u64,
    pub data_file: String,
    pub qs: Vec<u64>,
    pub forms: Vec<EliminationReport>,
    pub floors: Floors,
    pub surviving_primes: Survivors,
    /// Largest surviving prime: every form is discarded for p above it.
    pub bound: Option<String>,
    pub status: String,
}

pub fn cmd_eliminate(eq: Equation, d: u64, data: &Path, qs: &[u64]) -> Result<EliminateDoc, CliError> {
    check_d(d)?;
    let path = resolve_data_path(data);
    let text = std::fs::read_to_string(&path).map_err(|e| CliError::Input(format!("{}: {}", path.display(), e)))?;
    let forms = load_newforms(&text).map_err(input)?;
    let ctx = Context::new(eq, d).map_err(input)?;
    let floors = floors(eq, d).map_err(input)?;
    let (forms, surviving) = if forms.is_empty() {
        let s = crate::arith::primes_up_to(floors.value).into_iter().map(Into::into).collect();
        (vec![], Survivors::Finite(s))
    } else {
        if qs.is_empty() {
            return Err(input(EliminateError::EmptyQList));
        }
        let r = eliminate_space(&forms, &ctx, qs).map_err(input)?;
        (r.forms, r.surviving_primes)
    };
    let bound = surviving.max().map(|b| b.to_string());
    let status = if forms.is_empty() {
        format!("vacuously eliminated: no forms, bound = floor {}", floors.value)
    } else if surviving == Survivors::All {
        "not eliminated: some form survives every q".into()
    } else {
        format!("eliminated for p > {}", bound.as_deref().unwrap_or("?"))
    };
    Ok(EliminateDoc {
        label: run_label(eq, d),
        equation: eq,
        d,
        data_file: data.display().to_string(),
        qs: qs.to_vec(),
        forms,
        floors,
        surviving_primes: surviving,
        bound,
        status,
    })
}

impl Render for EliminateDoc {
    fn table(&self) -> String {
        let mut s = String::new();
        writeln!(s, "run            {}", self.label).unwrap();
        writeln!(s, "data           {}", self.data_file).unwrap();
        writeln!(s, "q              {:?}", self.qs).unwrap();
        writeln!(s, "{:<20} {:>4}  {:<30} surviving", "form", "cm", "mazur").unwrap();
        for f in &self.forms {
            writeln!(s, "{:<20} {:>4}  {:<30} {}", f.form_label, if f.has_cm { "yes" } else { "no" }, f.mazur_survivors.to_string(), f.surviving_primes)
                .unwrap();
            for n in &f.method_notes {
                writeln!(s, "    {}", n).unwrap();
            }
        }
        writeln!(s, "floor          {}", self.floors.value).unwrap();
        writeln!(s, "surviving      {}", self.surviving_primes).unwrap();
        writeln!(s, "status         {}", self.status).unwrap();
        s
    }
}

// ---------------------------------------------------------------------------
// search

#[derive(Clone, Debug, Serialize)]
pub struct SearchDoc {
    pub label: String,
    pub equation: Equation,
    pub d: u64,
    pub max: u64,
    pub p_min: u32,
    pub hits: Vec<SolutionHit>,
    /// Primitive, non-trivial hits: candidate counterexamples.
    pub unflagged: usize,
}

pub fn cmd_search(eq: Equation, d: u64, max: u64, p_min: u32, primitive_only: bool) -> Result<SearchDoc, CliError> {
    check_d(d)?;
    let mut hits = scan(eq, d, max, p_min).map_err(input)?;
    if primitive_only {
        hits.retain(|h| h.primitive);
    }
    let unflagged = hits.iter().filter(|h| h.primitive && !h.trivial).count();
    Ok(SearchDoc { label: run_label(eq, d), equation: eq, d, max, p_min, hits, unflagged })
}

impl Render for SearchDoc {
    fn table(&self) -> String {
        let mut s = String::new();
        writeln!(s, "run            {}", self.label).unwrap();
        writeln!(s, "box            0 <= x, y <= {}, p >= {}", self.max, self.p_min).unwrap();
        writeln!(s, "{:>10} {:>10} {:>12} {:>4}  {:<12} flags", "x", "y", "z", "p", "exponents").unwrap();
        for h in &self.hits {
            let mut flags = vec![];
            if h.trivial {
                flags.push("trivial");
            }
            if !h.primitive {
                flags.push("non-primitive");
            }
            writeln!(s, "{:>10} {:>10} {:>12} {:>4}  {:<12} {}", h.a, h.b, h.c, h.p, format!("{:?}", h.exponents), flags.join(",")).unwrap();
        }
        writeln!(s, "hits           {} ({} primitive non-trivial)", self.hits.len(), self.unflagged).unwrap();
        s
    }
}

// ---------------------------------------------------------------------------
// verify-tables, verify-character

#[derive(Clone, Debug, Serialize)]
pub struct TablesDoc {
    pub checks: Vec<TableCheck>,
    pub passed: bool,
    pub first_failure: Option<String>,
}

/// A one-entry change to the cocycle or to a β table.
#[derive(Clone, Debug, PartialEq)]
pub enum Mutation {
    Cocycle { g: KleinElement, h: KleinElement, value: i64 },
    Beta { case: Case, i: i64, j: i64, k: i64, value: SurdValue },
}

fn klein(s: &str) -> Result<KleinElement, CliError> {
    match s {
        "1" | "0" => Ok(KleinElement::ONE),
        "s2" => Ok(KleinElement::SIGMA_2),
        "sd" => Ok(KleinElement::SIGMA_D),
        "s2sd" => Ok(KleinElement::SIGMA_2D),
        _ => Err(CliError::Input(format!("unknown element {s} (use 1, s2, sd, s2sd)"))),
    }
}

fn case_by_label(s: &str) -> Result<Case, CliError> {
    Case::ALL.into_iter().find(|c| c.label() == s).ok_or_else(|| CliError::Input(format!("unknown case {s}")))
}

fn int<T: std::str::FromStr>(s: &str) -> Result<T, CliError> {
    s.trim().parse().map_err(|_| CliError::Input(format!("not an integer: {s}")))
}

impl Mutation {
    /// "G,H,V" with G, H among 1, s2, sd, s2sd.
    pub fn parse_cocycle(s: &str) -> Result<Mutation, CliError> {
        let p: Vec<&str> = s.split(',').map(str::trim).collect();
        let [g, h, v] = p[..] else {
            return Err(CliError::Input(format!("expected G,H,VALUE: {s}")));
        };
        Ok(Mutation::Cocycle { g: klein(g)?, h: klein(h)?, value: int(v)? })
    }

    /// "CASE,I,J,K,Z,S" for β(σⁱμᵏτʲ) = ζ₈^Z·√2^S.
    pub fn parse_beta(s: &str) -> Result<Mutation, CliError> {
        let p: Vec<&str> = s.split(',').map(str::trim).collect();
        let [case, i, j, k, z, r] = p[..] else {
            return Err(CliError::Input(format!("expected CASE,I,J,K,Z,S: {s}")));
        };
        Ok(Mutation::Beta {
            case: case_by_label(case)?,
            i: int(i)?,
            j: int(j)?,
            k: int(k)?,
            value: SurdValue::new(int(z)?, int(r)?),
        })
    }

    fn apply(&self, inputs: &mut TableInputs) {
        match *self {
            Mutation::Cocycle { g, h, value } => inputs.cocycle = inputs.cocycle.with_entry(g, h, value),
            Mutation::Beta { case, i, j, k, value } => {
                let b = inputs.beta(case).with_entry(GroupElement::new(case, i, j, k), value);
                *inputs.beta_mut(case) = b;
            }
        }
    }
}

pub fn cmd_verify_tables(mutations: &[Mutation]) -> TablesDoc {
    let mut inputs = TableInputs::default();
    for m in mutations {
        m.apply(&mut inputs);
    }
    let checks = verify_tables(&inputs);
    let first = first_failure(&checks).map(|c| c.name.clone());
    TablesDoc { passed: first.is_none(), first_failure: first, checks }
}

impl Render for TablesDoc {
    fn table(&self) -> String {
        let mut s = String::new();
        for c in &self.checks {
            writeln!(s, "{:<4} {:<36} {}", if c.passed { "ok" } else { "FAIL" }, c.name, c.detail).unwrap();
        }
        match &self.first_failure {
            None => writeln!(s, "all {} table checks pass", self.checks.len()).unwrap(),
            Some(n) => writeln!(s, "first failing table: {}", n).unwrap(),
        }
        s
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CharacterDoc {
    pub label: String,
    pub report: VerificationReport,
}

pub fn cmd_verify_character(d: u64, t: u64, bound: i128) -> Result<CharacterDoc, CliError> {
    check_d(d)?;
    if bound < 1 {
        return Err(CliError::Input("norm bound must be positive".into()));
    }
    let chi = build_chi(d, t).map_err(input)?;
    let eps = build_epsilon(d, t).map_err(input)?;
    Ok(CharacterDoc { label: format!("character d={} t={}", d, t), report: verify_character(&chi, &eps, bound) })
}

impl Render for CharacterDoc {
    fn table(&self) -> String {
        let r = &self.report;
        format!("{}\n{}\n{}\n", self.label, r.summary(), if r.passed { "pass" } else { "FAIL" })
    }
}

