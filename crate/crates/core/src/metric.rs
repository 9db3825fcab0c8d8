//! Relation balls of marked subgroups of F, girth, the `e^-R` distance
//! between markings, and stabilization of word triviality along families.

use std::collections::BTreeSet;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::dyadic::Dyadic;
use crate::plhomeo::Endpoint;
use crate::words::{relator_candidates_between, Marking, Word};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricError {
    #[error("markings have different ranks ({0} vs {1})")]
    RankMismatch(usize, usize),
    #[error("empty range {0}..{1}")]
    EmptyRange(u64, u64),
}

/// Decides whether words are trivial under a fixed marking.
///
/// Slope exponents at 0 and 1 are homomorphisms to Z, so a word with a
/// nonzero exponent sum at either end is nontrivial; probe points give a
/// second cheap refutation; only survivors are composed in full.
#[derive(Debug, Clone)]
pub struct TrivialityOracle {
    marking: Marking,
    slopes_at_zero: Vec<i64>,
    slopes_at_one: Vec<i64>,
    probes: Vec<Dyadic>,
}

fn default_probes() -> Vec<Dyadic> {
    (0..32).map(|j| Dyadic::frac(2 * j + 1, 6)).chain((2..12).map(|k| Dyadic::frac(3, k + 2))).collect()
}

impl TrivialityOracle {
    pub fn new(marking: &Marking) -> Self {
        let slope = |e| marking.maps().iter().map(|f| f.slope_at_endpoint(e)).collect();
        TrivialityOracle {
            marking: marking.clone(),
            slopes_at_zero: slope(Endpoint::Zero),
            slopes_at_one: slope(Endpoint::One),
            probes: default_probes(),
        }
    }

    /// Adds points likely to be moved by nontrivial words.
    pub fn with_probes<I: IntoIterator<Item = Dyadic>>(mut self, probes: I) -> Self {
        self.probes.extend(probes);
        self
    }

    pub fn marking(&self) -> &Marking {
        &self.marking
    }

    fn endpoint_exponents(&self, w: &Word) -> (i64, i64) {
        w.letters().iter().fold((0, 0), |(z, o), l| {
            (z + l.sign() * self.slopes_at_zero[l.gen()], o + l.sign() * self.slopes_at_one[l.gen()])
        })
    }

    /// Exact triviality of `w`; letters beyond the rank count as nontrivial.
    pub fn is_trivial(&self, w: &Word) -> bool {
        if self.marking.check_rank(w).is_err() {
            return false;
        }
        if self.endpoint_exponents(w) != (0, 0) {
            return false;
        }
        if self.probes.iter().any(|p| &self.marking.apply_unchecked(w, p) != p) {
            return false;
        }
        self.marking.evaluate_unchecked(w).is_identity()
    }
}

/// The trivial relator-candidate classes of length at most `radius`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationBall {
    pub radius: usize,
    pub relations: BTreeSet<Word>,
}

impl RelationBall {
    pub fn is_empty(&self) -> bool {
        self.relations.is_empty()
    }

    /// Classes of length at most `r`.
    pub fn restrict(&self, r: usize) -> RelationBall {
        RelationBall { radius: r.min(self.radius), relations: self.relations.iter().filter(|w| w.len() <= r).cloned().collect() }
    }

    /// Re-evaluates every stored relation in full.
    pub fn audit(&self, marking: &Marking) -> bool {
        self.relations.par_iter().all(|w| marking.evaluate(w).is_ok_and(|f| f.is_identity()))
    }
}

fn trivial_of_length(oracle: &TrivialityOracle, len: usize) -> BTreeSet<Word> {
    let rank = oracle.marking.rank();
    let candidates: Vec<Word> = relator_candidates_between(rank, len, len).collect();
    candidates.into_par_iter().filter(|w| oracle.is_trivial(w)).collect()
}

pub fn relation_ball(marking: &Marking, radius: usize) -> RelationBall {
    relation_ball_with(&TrivialityOracle::new(marking), radius)
}

pub fn relation_ball_with(oracle: &TrivialityOracle, radius: usize) -> RelationBall {
    let mut relations = BTreeSet::new();
    for len in 1..=radius {
        relations.extend(trivial_of_length(oracle, len));
    }
    RelationBall { radius, relations }
}

/// The shortlex-first relator of minimal length, searching lengths `1..=max_len` in order.
pub fn shortest_relator(marking: &Marking, max_len: usize) -> Option<(Word, usize)> {
    shortest_relator_with(&TrivialityOracle::new(marking), max_len)
}

pub fn shortest_relator_with(oracle: &TrivialityOracle, max_len: usize) -> Option<(Word, usize)> {
    let rank = oracle.marking.rank();
    (1..=max_len).find_map(|len| {
        let candidates: Vec<Word> = relator_candidates_between(rank, len, len).collect();
        candidates.into_par_iter().find_first(|w| oracle.is_trivial(w)).map(|w| (w, len))
    })
}

/// `R*` with the distance between two markings at most `e^-R*`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistanceBound {
    pub r_star: usize,
    pub r_max: usize,
    /// Shortlex-first class trivial in exactly one marking at length `r_star + 1`.
    pub first_difference: Option<Word>,
}

impl DistanceBound {
    /// The bound as the exact symbol `e^-R*`.
    pub fn symbol(&self) -> String {
        format!("e^-{}", self.r_star)
    }
}

impl fmt::Display for DistanceBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "R* = {} (distance <= {})", self.r_star, self.symbol())?;
        if let Some(w) = &self.first_difference {
            write!(f, ", first difference {w}")?;
        }
        Ok(())
    }
}

pub fn marked_distance_bound(m1: &Marking, m2: &Marking, r_max: usize) -> Result<DistanceBound, MetricError> {
    marked_distance_bound_with(&TrivialityOracle::new(m1), &TrivialityOracle::new(m2), r_max)
}

pub fn marked_distance_bound_with(
    o1: &TrivialityOracle,
    o2: &TrivialityOracle,
    r_max: usize,
) -> Result<DistanceBound, MetricError> {
    let (k1, k2) = (o1.marking.rank(), o2.marking.rank());
    if k1 != k2 {
        return Err(MetricError::RankMismatch(k1, k2));
    }
    for len in 1..=r_max {
        let (a, b) = rayon::join(|| trivial_of_length(o1, len), || trivial_of_length(o2, len));
        if a != b {
            let first = a.symmetric_difference(&b).min().cloned();
            return Ok(DistanceBound { r_star: len - 1, r_max, first_difference: first });
        }
    }
    Ok(DistanceBound { r_star: r_max, r_max, first_difference: None })
}

/// Largest `R <= r_max` whose relation ball is empty.
pub fn distance_to_free(marking: &Marking, r_max: usize) -> usize {
    distance_to_free_with(&TrivialityOracle::new(marking), r_max)
}

pub fn distance_to_free_with(oracle: &TrivialityOracle, r_max: usize) -> usize {
    match shortest_relator_with(oracle, r_max) {
        Some((_, g)) => g - 1,
        None => r_max,
    }
}

/// Stable identifier of a marking: SHA-256 of its JSON form.
pub fn marking_id(marking: &Marking) -> String {
    let json = serde_json::to_string(marking).expect("markings serialize");
    hex::encode(Sha256::digest(json.as_bytes()))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GirthCertificate {
    pub marking_id: String,
    /// No relator of length at most `bound` exists.
    pub bound: usize,
    pub searched_up_to: usize,
    pub shortest_relator: Option<Word>,
}

pub fn certify_girth(marking: &Marking, max_len: usize) -> GirthCertificate {
    certify_girth_with(&TrivialityOracle::new(marking), max_len)
}

pub fn certify_girth_with(oracle: &TrivialityOracle, max_len: usize) -> GirthCertificate {
    let found = shortest_relator_with(oracle, max_len);
    GirthCertificate {
        marking_id: marking_id(&oracle.marking),
        bound: found.as_ref().map_or(max_len, |(_, g)| g - 1),
        searched_up_to: max_len,
        shortest_relator: found.map(|(w, _)| w),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stabilization {
    AllTrivial,
    AllNontrivial,
    /// Values of `n` where triviality differs from `n - 1`.
    Flips(Vec<u64>),
}

impl Stabilization {
    pub fn from_pattern(pattern: &[(u64, bool)]) -> Self {
        if pattern.iter().all(|&(_, t)| t) {
            return Stabilization::AllTrivial;
        }
        if pattern.iter().all(|&(_, t)| !t) {
            return Stabilization::AllNontrivial;
        }
        Stabilization::Flips(pattern.windows(2).filter(|p| p[0].1 != p[1].1).map(|p| p[1].0).collect())
    }

    pub fn is_flip_free(&self) -> bool {
        !matches!(self, Stabilization::Flips(_))
    }
}

impl fmt::Display for Stabilization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Stabilization::AllTrivial => f.write_str("all-trivial"),
            Stabilization::AllNontrivial => f.write_str("all-nontrivial"),
            Stabilization::Flips(ns) => {
                let ns: Vec<String> = ns.iter().map(u64::to_string).collect();
                write!(f, "flips at {}", ns.join(","))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StabilizationReport {
    pub word: Word,
    pub pattern: Vec<(u64, bool)>,
    pub classification: Stabilization,
}

/// Triviality of `w` in each marking `family(n)`, `lo <= n <= hi`.
pub fn stabilization_check<F>(w: &Word, family: F, lo: u64, hi: u64) -> Result<StabilizationReport, MetricError>
where
    F: Fn(u64) -> Marking + Sync,
{
    Ok(stabilization_scan(std::slice::from_ref(w), family, lo, hi)?.pop().expect("one word"))
}

/// Patterns for many words, building each marking once.
pub fn stabilization_scan<F>(words: &[Word], family: F, lo: u64, hi: u64) -> Result<Vec<StabilizationReport>, MetricError>
where
    F: Fn(u64) -> Marking + Sync,
{
    if lo > hi {
        return Err(MetricError::EmptyRange(lo, hi));
    }
    let oracles: Vec<(u64, TrivialityOracle)> =
        (lo..=hi).into_par_iter().map(|n| (n, TrivialityOracle::new(&family(n)))).collect();
    Ok(words
        .par_iter()
        .map(|w| {
            let pattern: Vec<(u64, bool)> = oracles.iter().map(|(n, o)| (*n, o.is_trivial(w))).collect();
            let classification = Stabilization::from_pattern(&pattern);
            StabilizationReport { word: w.clone(), pattern, classification }
        })
        .collect())
}
