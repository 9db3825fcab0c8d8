//! Sequences of markings `(x_0, x_1, c_n)` of F, relators of their limit
//! groups with the index from which each must hold, and a harness that
//! compares both against exact evaluation.

use std::collections::BTreeSet;
use std::fmt;
use std::fmt::Write as _;
use std::str::FromStr;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dyadic::Dyadic;
use crate::metric::{relation_ball_with, Stabilization, StabilizationReport, TrivialityOracle};
use crate::normalform::homeo_to_word;
use crate::plhomeo::PLMap;
use crate::words::{Marking, Word};

/// How far threshold scans look when the family gives no closed form.
pub const THRESHOLD_SCAN: u64 = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LimitError {
    #[error("n = {n}: {clause}")]
    Hypothesis { n: u64, clause: String },
    #[error("empty parameter range {0}")]
    EmptyRange(String),
    #[error("unknown family `{0}` (expected xn, small or power)")]
    UnknownFamily(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyKind {
    Xn,
    Small,
    Power,
}

impl fmt::Display for FamilyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FamilyKind::Xn => "xn",
            FamilyKind::Small => "small",
            FamilyKind::Power => "power",
        })
    }
}

impl FromStr for FamilyKind {
    type Err = LimitError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "xn" => Ok(FamilyKind::Xn),
            "small" | "small-support" => Ok(FamilyKind::Small),
            "power" => Ok(FamilyKind::Power),
            _ => Err(LimitError::UnknownFamily(s.to_string())),
        }
    }
}

/// The data each family's theorem is stated in terms of.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Hypothesis {
    /// `supp(c) ⊆ [t, 1]` and `c` maps `[(3+t)/4, 1]` linearly onto `[(1+t)/2, 1]`.
    SupportFloor { t: Dyadic },
    /// `supp(c) ⊆ [r, s]` with `r < s < 2r`.
    SupportWindow { r: Dyadic, s: Dyadic },
    /// `c = a^n`.
    Power { n: u64 },
}

#[derive(Debug, Clone)]
pub struct FamilyMember {
    pub n: u64,
    pub c: PLMap,
    pub hypothesis: Hypothesis,
}

impl FamilyMember {
    /// Exact check of the family hypothesis.
    pub fn validate(&self) -> Result<(), LimitError> {
        let fail = |clause: String| Err(LimitError::Hypothesis { n: self.n, clause });
        match &self.hypothesis {
            Hypothesis::SupportFloor { t } => {
                if !self.c.support().within(t, &Dyadic::one()) {
                    return fail(format!("support {} not inside [{t}, 1]", self.c.support()));
                }
                let p = (&Dyadic::from_int(3) + t).mul_pow2(-2);
                let q = (&Dyadic::one() + t).half();
                let linear = self.c.apply(&p) == q
                    && !self.c.points().iter().any(|pt| pt.x > p && pt.x < Dyadic::one());
                if !linear {
                    return fail(format!("does not map [{p}, 1] linearly onto [{q}, 1]"));
                }
                Ok(())
            }
            Hypothesis::SupportWindow { r, s } => {
                if !(r > &Dyadic::zero() && r < s && s < &r.mul_pow2(1)) {
                    return fail(format!("window [{r}, {s}] violates r < s < 2r"));
                }
                if !self.c.support().within(r, s) {
                    return fail(format!("support {} escapes [{r}, {s}]", self.c.support()));
                }
                Ok(())
            }
            Hypothesis::Power { n } => {
                let relator = self.c.inverse().compose(&PLMap::generator(0).pow(*n as i64));
                if relator.is_identity() { Ok(()) } else { fail(format!("c is not a^{n}")) }
            }
        }
    }

    /// Whether `x_0(supp c)` and `supp c` have disjoint interiors.
    pub fn translate_disjoint(&self) -> bool {
        let supp = self.c.support();
        supp.image_under(&PLMap::generator(0)).interiors_disjoint(&supp)
    }

    pub fn marking(&self) -> Marking {
        Marking::new(vec![PLMap::generator(0), PLMap::generator(1), self.c.clone()])
    }
}

type Rule = Arc<dyn Fn(u64) -> (PLMap, Hypothesis) + Send + Sync>;

/// `n -> (a, b, c_n) = (x_0, x_1, c_n)`, `n >= 1`.
#[derive(Clone)]
pub struct MarkingFamily {
    pub name: String,
    pub kind: FamilyKind,
    rule: Rule,
}

impl fmt::Debug for MarkingFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MarkingFamily").field("name", &self.name).field("kind", &self.kind).finish()
    }
}

impl MarkingFamily {
    pub fn new<F>(name: &str, kind: FamilyKind, rule: F) -> Self
    where
        F: Fn(u64) -> (PLMap, Hypothesis) + Send + Sync + 'static,
    {
        MarkingFamily { name: name.to_string(), kind, rule: Arc::new(rule) }
    }

    /// The canonical family of the given kind.
    pub fn canonical(kind: FamilyKind) -> Self {
        match kind {
            FamilyKind::Xn => family_xn(),
            FamilyKind::Small => family_small_support(),
            FamilyKind::Power => family_power(),
        }
    }

    pub fn member_unchecked(&self, n: u64) -> FamilyMember {
        let (c, hypothesis) = (self.rule)(n);
        FamilyMember { n, c, hypothesis }
    }

    /// The `n`-th member, validated.
    pub fn member(&self, n: u64) -> Result<FamilyMember, LimitError> {
        let m = self.member_unchecked(n);
        m.validate()?;
        Ok(m)
    }

    pub fn marking(&self, n: u64) -> Result<Marking, LimitError> {
        Ok(self.member(n)?.marking())
    }

    pub fn marking_unchecked(&self, n: u64) -> Marking {
        self.member_unchecked(n).marking()
    }

    /// A word over `a, b` naming `c_n`.
    pub fn word(&self, n: u64) -> Word {
        homeo_to_word(&self.member_unchecked(n).c)
    }
}

/// `c_n = x_n`, `t_n = 1 - 2^-n`.
pub fn family_xn() -> MarkingFamily {
    MarkingFamily::new("xn", FamilyKind::Xn, |n| {
        (PLMap::generator(n), Hypothesis::SupportFloor { t: &Dyadic::one() - &Dyadic::pow2(-(n as i64)) })
    })
}

/// `c_n = w_n(x_0, x_1)` with a caller-supplied support floor `t_n`.
pub fn family_xn_custom<T, W>(name: &str, t_rule: T, words: W) -> MarkingFamily
where
    T: Fn(u64) -> Dyadic + Send + Sync + 'static,
    W: Fn(u64) -> Word + Send + Sync + 'static,
{
    let standard = Marking::standard();
    MarkingFamily::new(name, FamilyKind::Xn, move |n| {
        let c = standard.evaluate(&words(n)).unwrap_or_else(|_| PLMap::identity());
        (c, Hypothesis::SupportFloor { t: t_rule(n) })
    })
}

/// `c_n = x_0` rescaled into `[2^-(n+1), 3 * 2^-(n+2)]`.
pub fn family_small_support() -> MarkingFamily {
    MarkingFamily::new("small", FamilyKind::Small, |n| {
        let r = Dyadic::pow2(-(n as i64 + 1));
        let s = Dyadic::frac(3, n + 2);
        let c = PLMap::generator(0).rescale_into(&r, &s).expect("standard interval");
        (c, Hypothesis::SupportWindow { r, s })
    })
}

/// `c_n = g_n` with support window `[r_n, s_n]`, both supplied by the caller.
pub fn family_small_support_custom<G>(name: &str, rule: G) -> MarkingFamily
where
    G: Fn(u64) -> (PLMap, Dyadic, Dyadic) + Send + Sync + 'static,
{
    MarkingFamily::new(name, FamilyKind::Small, move |n| {
        let (c, r, s) = rule(n);
        (c, Hypothesis::SupportWindow { r, s })
    })
}

/// `c_n = x_0^n`.
pub fn family_power() -> MarkingFamily {
    MarkingFamily::new("power", FamilyKind::Power, |n| (PLMap::generator(0).pow(n as i64), Hypothesis::Power { n }))
}

/// Inclusive parameter ranges for relator schemas.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelatorRanges {
    pub i: (i64, i64),
    pub j: (i64, i64),
    pub k: (i64, i64),
}

impl RelatorRanges {
    pub fn default_for(kind: FamilyKind) -> Self {
        match kind {
            FamilyKind::Xn | FamilyKind::Small => RelatorRanges { i: (-3, 3), j: (0, 0), k: (0, 0) },
            FamilyKind::Power => RelatorRanges { i: (1, 3), j: (0, 4), k: (0, 4) },
        }
    }

    fn check(&self, kind: FamilyKind) -> Result<(), LimitError> {
        let mut named = vec![("i", self.i)];
        if kind == FamilyKind::Power {
            named.push(("j", self.j));
            named.push(("k", self.k));
        }
        for (name, (lo, hi)) in named {
            if lo > hi {
                return Err(LimitError::EmptyRange(format!("{name} = {lo}..{hi}")));
            }
        }
        if kind == FamilyKind::Power && (self.i.0 < 1 || self.j.0 < 0 || self.k.0 < 0) {
            return Err(LimitError::EmptyRange("power relators need i >= 1, j >= 0, k >= 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Params {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub i: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub j: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<i64>,
}

/// An instantiated relator of a limit group and the index from which it
/// provably holds in the family (none when no prediction is made).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LimitRelator {
    pub label: String,
    pub word: Word,
    pub params: Params,
    pub threshold: Option<u64>,
}

fn a_pow(e: i64) -> Word {
    Word::power_of(0, e)
}

fn conj(x: &Word, e: i64) -> Word {
    // a^e x a^-e
    Word::product([&a_pow(e), x, &a_pow(-e)])
}

pub fn r1() -> Word {
    let b = Word::letter(1);
    Word::commutator(&b.mul(&a_pow(-1)), &conj(&b, -1))
}

pub fn r2() -> Word {
    let b = Word::letter(1);
    Word::commutator(&b.mul(&a_pow(-1)), &conj(&b, -2))
}

pub fn r3() -> Word {
    let c = Word::letter(2);
    Word::commutator(&c.mul(&a_pow(-1)), &conj(&c, -1))
}

pub fn r4() -> Word {
    let c = Word::letter(2);
    Word::commutator(&c.mul(&a_pow(-1)), &conj(&c, -2))
}

/// `a^e x a^-e` written out, with trivial powers dropped.
fn conj_label(x: &str, e: i64) -> String {
    let pw = |e: i64| match e {
        0 => String::new(),
        1 => "a ".to_string(),
        _ => format!("a^{e} "),
    };
    format!("{}{x} {}", pw(e), pw(-e)).trim_end().to_string()
}

/// Smallest `N <= limit` such that `pred(n)` holds for all `N <= n <= limit`.
fn first_stable<P: Fn(u64) -> bool>(pred: P, limit: u64) -> Option<u64> {
    let last_fail = (1..=limit).rev().find(|&n| !pred(n));
    match last_fail {
        None => Some(1),
        Some(n) if n < limit => Some(n + 1),
        Some(_) => None,
    }
}

fn support_floor(family: &MarkingFamily, n: u64) -> Option<Dyadic> {
    match family.member_unchecked(n).hypothesis {
        Hypothesis::SupportFloor { t } => Some(t),
        _ => None,
    }
}

/// Relators of the limit group of `family`, each with its threshold.
pub fn limit_relators(family: &MarkingFamily, ranges: &RelatorRanges) -> Result<Vec<LimitRelator>, LimitError> {
    ranges.check(family.kind)?;
    let a = Word::letter(0);
    let b = Word::letter(1);
    let c = Word::letter(2);
    let plain = |label: &str, word: Word, threshold| LimitRelator {
        label: label.to_string(),
        word,
        params: Params::default(),
        threshold,
    };
    let mut out = vec![plain("R1", r1(), Some(1)), plain("R2", r2(), Some(1))];
    match family.kind {
        FamilyKind::Xn => {
            let half = Dyadic::frac(1, 1);
            let n0 = first_stable(|n| support_floor(family, n).is_some_and(|t| t >= half), THRESHOLD_SCAN);
            out.push(plain("R3", r3(), n0));
            out.push(plain("R4", r4(), n0));
            let three_quarters = Dyadic::frac(3, 2);
            for i in ranges.i.0..=ranges.i.1 {
                let ai = PLMap::generator(0).pow(i);
                let threshold = if i >= 1 {
                    first_stable(
                        |n| support_floor(family, n).is_some_and(|t| ai.apply(&t) >= three_quarters),
                        THRESHOLD_SCAN,
                    )
                } else {
                    None
                };
                out.push(LimitRelator {
                    label: format!("[ba^-1, {}]", conj_label("c", i)),
                    word: Word::commutator(&b.mul(&a_pow(-1)), &conj(&c, i)),
                    params: Params { i: Some(i), ..Params::default() },
                    threshold,
                });
            }
        }
        FamilyKind::Small => {
            let x0 = PLMap::generator(0);
            let x1 = PLMap::generator(1);
            for i in (ranges.i.0..=ranges.i.1).filter(|&i| i != 0) {
                let ai = x0.pow(i);
                let disjoint_from_c = |g: &PLMap, n: u64| {
                    let supp = family.member_unchecked(n).c.support();
                    supp.image_under(g).interiors_disjoint(&supp)
                };
                let cc = first_stable(|n| disjoint_from_c(&ai, n), THRESHOLD_SCAN);
                let bi_supp = x1.support().image_under(&ai);
                let bc = first_stable(
                    |n| family.member_unchecked(n).c.support().interiors_disjoint(&bi_supp),
                    THRESHOLD_SCAN,
                );
                let params = Params { i: Some(i), ..Params::default() };
                out.push(LimitRelator {
                    label: format!("[{}, c]", conj_label("c", i)),
                    word: Word::commutator(&conj(&c, i), &c),
                    params: params.clone(),
                    threshold: cc,
                });
                out.push(LimitRelator {
                    label: format!("[{}, c]", conj_label("b", i)),
                    word: Word::commutator(&conj(&b, i), &c),
                    params,
                    threshold: bc,
                });
            }
        }
        FamilyKind::Power => {
            out.push(plain("[c,a]", Word::commutator(&c, &a), Some(1)));
            for i in ranges.i.0..=ranges.i.1 {
                for j in ranges.j.0..=ranges.j.1 {
                    for k in ranges.k.0..=ranges.k.1 {
                        let left = conj(&b, -j).mul(&a_pow(-1));
                        let right = Word::product([&Word::power_of(2, -i), &conj(&b, -k), &Word::power_of(2, i)]);
                        let need = j - k + 1;
                        let threshold = if need <= 0 { 1 } else { (need + i - 1) / i }.max(1) as u64;
                        out.push(LimitRelator {
                            label: format!("[({}) a^-1, c^-{i} ({}) c^{i}]", conj_label("b", -j), conj_label("b", -k)),
                            word: Word::commutator(&left, &right),
                            params: Params { i: Some(i), j: Some(j), k: Some(k) },
                            threshold: Some(threshold),
                        });
                    }
                }
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Pass,
    Fail,
    /// No threshold is predicted; the pattern is reported as observed.
    Info,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Info => "INFO",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelatorCheck {
    pub relator: LimitRelator,
    pub length: usize,
    pub in_ball: bool,
    pub pattern: Vec<(u64, bool)>,
    /// Smallest tested `n` from which the relator holds for the rest of the window.
    pub observed_from: Option<u64>,
    /// Whether it fails at `threshold - 1`, when that index was tested.
    pub sharp: Option<bool>,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BallSummary {
    pub n: u64,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub family: String,
    pub radius: usize,
    pub n_lo: u64,
    pub n_hi: u64,
    pub hypothesis_failures: Vec<String>,
    pub relators: Vec<RelatorCheck>,
    pub balls: Vec<BallSummary>,
    pub tail_ball: Vec<Word>,
    /// Smallest tested `n` from which the relation ball no longer changes.
    pub stable_from: u64,
    /// Largest `r <= radius` for which every tested marking has the same ball of radius `r`.
    pub stabilized_r_star: usize,
    pub unstable: Vec<Word>,
    pub candidates: usize,
    pub all_nontrivial: usize,
    /// Classifications of every class trivial somewhere in the window.
    pub classifications: Vec<StabilizationReport>,
    pub passed: bool,
}

fn observed_from(pattern: &[(u64, bool)]) -> Option<u64> {
    let mut from = None;
    for &(n, t) in pattern.iter().rev() {
        if !t {
            break;
        }
        from = Some(n);
    }
    from
}

/// Checks relators against thresholds and tracks relation balls over `n_lo..=n_hi`.
pub fn verify_limit_convergence(
    family: &MarkingFamily,
    ranges: &RelatorRanges,
    radius: usize,
    n_lo: u64,
    n_hi: u64,
) -> Result<ConvergenceReport, LimitError> {
    if n_lo > n_hi || n_lo == 0 {
        return Err(LimitError::EmptyRange(format!("n = {n_lo}..{n_hi}")));
    }
    let relators = limit_relators(family, ranges)?;
    let ns: Vec<u64> = (n_lo..=n_hi).collect();
    let members: Vec<FamilyMember> = ns.iter().map(|&n| family.member_unchecked(n)).collect();
    let hypothesis_failures: Vec<String> =
        members.iter().filter_map(|m| m.validate().err()).map(|e| e.to_string()).collect();
    let oracles: Vec<TrivialityOracle> = members.par_iter().map(|m| TrivialityOracle::new(&m.marking())).collect();

    let checks: Vec<RelatorCheck> = relators
        .into_par_iter()
        .map(|rel| {
            let pattern: Vec<(u64, bool)> = ns.iter().zip(&oracles).map(|(&n, o)| (n, o.is_trivial(&rel.word))).collect();
            let verdict = match rel.threshold {
                Some(th) => {
                    if pattern.iter().all(|&(n, t)| n < th || t) { Verdict::Pass } else { Verdict::Fail }
                }
                None => Verdict::Info,
            };
            let sharp = rel
                .threshold
                .filter(|&th| th > 1)
                .and_then(|th| pattern.iter().find(|&&(n, _)| n == th - 1).map(|&(_, t)| !t));
            RelatorCheck {
                length: rel.word.len(),
                in_ball: rel.word.len() <= radius,
                observed_from: observed_from(&pattern),
                sharp,
                verdict,
                pattern,
                relator: rel,
            }
        })
        .collect();

    let balls: Vec<BTreeSet<Word>> = oracles.par_iter().map(|o| relation_ball_with(o, radius).relations).collect();
    let union: BTreeSet<Word> = balls.iter().flatten().cloned().collect();
    let classifications: Vec<StabilizationReport> = union
        .iter()
        .map(|w| {
            let pattern: Vec<(u64, bool)> = ns.iter().zip(&balls).map(|(&n, b)| (n, b.contains(w))).collect();
            StabilizationReport { word: w.clone(), classification: Stabilization::from_pattern(&pattern), pattern }
        })
        .collect();
    let unstable: Vec<Word> =
        classifications.iter().filter(|r| !r.classification.is_flip_free()).map(|r| r.word.clone()).collect();
    let tail = balls.last().expect("nonempty window").clone();
    let stable_from = ns
        .iter()
        .zip(&balls)
        .rev()
        .take_while(|(_, b)| **b == tail)
        .last()
        .map(|(&n, _)| n)
        .unwrap_or(n_hi);
    let stabilized_r_star = (0..=radius)
        .rev()
        .find(|&r| {
            let restricted = |b: &BTreeSet<Word>| b.iter().filter(|w| w.len() <= r).cloned().collect::<BTreeSet<_>>();
            let first = restricted(&balls[0]);
            balls.iter().all(|b| restricted(b) == first)
        })
        .unwrap_or(0);
    let candidates = crate::words::enumerate_relator_candidates(3, radius).count();
    let passed = hypothesis_failures.is_empty() && checks.iter().all(|c| c.verdict != Verdict::Fail);
    Ok(ConvergenceReport {
        family: family.name.clone(),
        radius,
        n_lo,
        n_hi,
        hypothesis_failures,
        relators: checks,
        balls: ns.iter().zip(&balls).map(|(&n, b)| BallSummary { n, size: b.len() }).collect(),
        tail_ball: tail.into_iter().collect(),
        stable_from,
        stabilized_r_star,
        unstable,
        candidates,
        all_nontrivial: candidates - union.len(),
        classifications,
        passed,
    })
}

fn pattern_string(pattern: &[(u64, bool)]) -> String {
    pattern.iter().map(|&(_, t)| if t { '1' } else { '0' }).collect()
}

fn opt<T: fmt::Display>(v: &Option<T>) -> String {
    v.as_ref().map_or_else(|| "-".to_string(), T::to_string)
}

impl ConvergenceReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Aligned table for reading.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "family {}  R = {}  n = {}..{}", self.family, self.radius, self.n_lo, self.n_hi);
        for f in &self.hypothesis_failures {
            let _ = writeln!(out, "hypothesis FAIL: {f}");
        }
        let width = self.relators.iter().map(|c| c.relator.label.len()).max().unwrap_or(0);
        let _ = writeln!(out, "{:<width$}  {:>4}  {:>4}  {:>5}  {:>8}  pattern  verdict", "relator", "len", "N", "from", "in_ball");
        for c in &self.relators {
            let _ = writeln!(
                out,
                "{:<width$}  {:>4}  {:>4}  {:>5}  {:>8}  {}  {}",
                c.relator.label,
                c.length,
                opt(&c.relator.threshold),
                opt(&c.observed_from),
                c.in_ball,
                pattern_string(&c.pattern),
                c.verdict
            );
        }
        let sizes: Vec<String> = self.balls.iter().map(|b| format!("{}:{}", b.n, b.size)).collect();
        let _ = writeln!(out, "ball sizes {}", sizes.join(" "));
        let _ = writeln!(out, "ball stable from n = {}; stabilized R* = {}", self.stable_from, self.stabilized_r_star);
        let _ = writeln!(
            out,
            "classes {}: {} trivial somewhere, {} all-nontrivial, {} unstable",
            self.candidates,
            self.classifications.len(),
            self.all_nontrivial,
            self.unstable.len()
        );
        for w in &self.unstable {
            let _ = writeln!(out, "unstable {w}");
        }
        let _ = writeln!(out, "{}", if self.passed { "PASS" } else { "FAIL" });
        out
    }

    /// One row per `(n, relator)` followed by a summary row.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("family,n,check,word,threshold,trivial,status\n");
        for c in &self.relators {
            for &(n, t) in &c.pattern {
                let status = match c.relator.threshold {
                    Some(th) if n >= th => {
                        if t { "PASS" } else { "FAIL" }
                    }
                    _ => "INFO",
                };
                let _ = writeln!(
                    out,
                    "{},{},\"{}\",{},{},{},{}",
                    self.family,
                    n,
                    c.relator.label,
                    c.relator.word,
                    opt(&c.relator.threshold),
                    t,
                    status
                );
            }
        }
        let _ = writeln!(
            out,
            "{},{}..{},summary,,R*={},{},{}",
            self.family,
            self.n_lo,
            self.n_hi,
            self.stabilized_r_star,
            self.stable_from,
            if self.passed { "PASS" } else { "FAIL" }
        );
        out
    }

    /// `(family, i, j, k, predicted N, observed first-pass n)`.
    pub fn threshold_csv(&self) -> String {
        let mut out = String::from("family,label,i,j,k,predicted,observed\n");
        for c in &self.relators {
            let p = &c.relator.params;
            let _ = writeln!(
                out,
                "{},\"{}\",{},{},{},{},{}",
                self.family,
                c.relator.label,
                opt(&p.i),
                opt(&p.j),
                opt(&p.k),
                opt(&c.relator.threshold),
                opt(&c.observed_from)
            );
        }
        out
    }
}
