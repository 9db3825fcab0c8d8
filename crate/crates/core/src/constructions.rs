//! Witness tuples `u_1, ..., u_{k-1}` supported near 0 that make prescribed
//! free words nontrivial once `a` is sent to `x_0`, the generating sets
//! `S_{l,m}` of large girth built from them, and the free-reduction check
//! behind their correctness.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dyadic::Dyadic;
use crate::plhomeo::{local_map_through, PLMap, PlError, RawPl};
use crate::words::{enumerate_reduced, Letter, Marking, Word};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConstructionError {
    #[error("the empty word has no nontrivial witness")]
    EmptyWord,
    #[error("no words were given")]
    NoWords,
    #[error("epsilon must satisfy 0 < epsilon < 1/2 (got {0})")]
    Epsilon(Dyadic),
    #[error("rank must be at least {min} (got {rank})")]
    Rank { rank: usize, min: usize },
    #[error("word {word} uses generator {gen}, beyond rank {rank}")]
    WordRank { word: Word, gen: usize, rank: usize },
    #[error("word {word} reaches translate {needed}, beyond radius {radius}")]
    Radius { word: Word, needed: u64, radius: u64 },
    #[error("girth markings need l >= 3 and m >= 1 (got l = {l}, m = {m})")]
    GirthParams { l: usize, m: usize },
    #[error("resource cap exceeded: {0}")]
    CapExceeded(String),
    #[error("search pool exhausted without a witness for {0}")]
    PoolExhausted(Word),
    #[error("expected {expected} intervals, got {got}")]
    IntervalCount { expected: usize, got: usize },
    #[error("intervals must be nondegenerate, inside [0,1], with disjoint interiors")]
    Intervals,
    #[error("certificate check failed for {0}")]
    Certificate(Word),
    #[error(transparent)]
    Pl(#[from] PlError),
}

pub type Interval = (Dyadic, Dyadic);

fn translate(iv: &Interval, i: i64) -> Interval {
    (iv.0.mul_pow2(-i), iv.1.mul_pow2(-i))
}

/// Geometry shared by all words of one construction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstructionPlan {
    pub epsilon: Dyadic,
    pub rank: usize,
    pub radius: u64,
    /// `I_0`; its translates `x_0^i(I_0) = 2^-i I_0`, `|i| <= radius`, tile part of `(0, epsilon)`.
    pub base: Interval,
    /// Disjoint pieces `J_1, ..., J_q` of `I_0`, one per word.
    pub subintervals: Vec<Interval>,
}

impl ConstructionPlan {
    pub fn new(epsilon: Dyadic, rank: usize, radius: u64, pieces: usize) -> Result<Self, ConstructionError> {
        if epsilon <= Dyadic::zero() || epsilon >= Dyadic::frac(1, 1) {
            return Err(ConstructionError::Epsilon(epsilon));
        }
        if rank < 2 {
            return Err(ConstructionError::Rank { rank, min: 2 });
        }
        let scale = Self::scale_for(&epsilon);
        let base = (scale.mul_pow2(-(radius as i64 + 2)), scale.mul_pow2(-(radius as i64 + 1)));
        let slots = pieces.max(1).next_power_of_two();
        let width = (&base.1 - &base.0).mul_pow2(-(slots.trailing_zeros() as i64));
        let subintervals = (0..pieces)
            .map(|l| {
                let lo = &base.0 + &(&width * &Dyadic::from_int(l as i64));
                let hi = &lo + &width;
                (lo, hi)
            })
            .collect();
        Ok(ConstructionPlan { epsilon, rank, radius, base, subintervals })
    }

    /// Largest power of two not exceeding `min(epsilon, 1/4)`.
    fn scale_for(epsilon: &Dyadic) -> Dyadic {
        let cap = epsilon.clone().min(Dyadic::frac(1, 2));
        let mut k = -2;
        while Dyadic::pow2(k) > cap {
            k -= 1;
        }
        Dyadic::pow2(k)
    }

    pub fn scale(&self) -> Dyadic {
        Self::scale_for(&self.epsilon)
    }

    /// `x_0^i(iv)` for an interval inside the base region.
    pub fn translate(iv: &Interval, i: i64) -> Interval {
        translate(iv, i)
    }

    /// `(i, x_0^i(I_0))` for `-radius <= i <= radius`.
    pub fn translates(&self) -> Vec<(i64, Interval)> {
        let r = self.radius as i64;
        (-r..=r).map(|i| (i, translate(&self.base, i))).collect()
    }
}

/// A tracked point moved by a certified word.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WordCertificate {
    pub word: Word,
    pub point: Dyadic,
    pub image: Dyadic,
    /// Exponent sum of `a`; when zero the image stays in the starting subinterval.
    pub exp_a: i64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WitnessTuple {
    pub elements: Vec<PLMap>,
    pub plan: ConstructionPlan,
    pub certificates: Vec<WordCertificate>,
}

impl WitnessTuple {
    /// `(x_0, u_1, ..., u_{k-1})`.
    pub fn marking(&self) -> Marking {
        let mut maps = vec![PLMap::generator(0)];
        maps.extend(self.elements.iter().cloned());
        Marking::new(maps)
    }

    pub fn certificate_for(&self, w: &Word) -> Option<&WordCertificate> {
        self.certificates.iter().find(|c| &c.word == w)
    }

    /// Support containment for every `u_j`, then every certificate re-derived
    /// by exact pointwise evaluation.
    pub fn verify(&self) -> Result<(), ConstructionError> {
        for u in &self.elements {
            if let Some((_, hi)) = u.support().hull() {
                if hi >= self.plan.epsilon {
                    return Err(ConstructionError::Certificate(Word::empty()));
                }
            }
        }
        let marking = self.marking();
        let plan = &self.plan;
        self.certificates.par_iter().zip(plan.subintervals.par_iter()).try_for_each(|(c, j)| {
            let image = marking.apply(&c.word, &c.point).map_err(|_| ConstructionError::Certificate(c.word.clone()))?;
            let inside = image > j.0 && image < j.1;
            let ok = image == c.image
                && image != c.point
                && c.point < plan.epsilon
                && if c.exp_a == 0 { inside && image > c.point } else { !inside };
            if ok { Ok(()) } else { Err(ConstructionError::Certificate(c.word.clone())) }
        })
    }

    /// The slow check: each certified word, composed in full, is a
    /// non-identity map moving some point of `[0, epsilon)`.
    pub fn verify_by_composition(&self) -> Result<(), ConstructionError> {
        let marking = self.marking();
        let zero = Dyadic::zero();
        self.certificates.par_iter().try_for_each(|c| {
            let f = marking.evaluate(&c.word).map_err(|_| ConstructionError::Certificate(c.word.clone()))?;
            if !f.is_identity() && f.moves_point_in(&zero, &self.plan.epsilon) {
                Ok(())
            } else {
                Err(ConstructionError::Certificate(c.word.clone()))
            }
        })
    }
}

/// `w = a^{e_1} B_1 ... a^{e_r} B_r` with each `B_s` free of `a`.
fn blocks(w: &Word) -> Vec<(i64, Vec<Letter>)> {
    let mut out: Vec<(i64, Vec<Letter>)> = vec![(0, Vec::new())];
    for &l in w.letters() {
        let last = out.last_mut().expect("nonempty");
        if l.gen() == 0 {
            if last.1.is_empty() {
                last.0 += l.sign();
            } else {
                out.push((l.sign(), Vec::new()));
            }
        } else {
            last.1.push(l);
        }
    }
    out
}

struct Trace {
    /// `(n, translate index, z, u_n(z))`
    pairs: Vec<(usize, i64, Dyadic, Dyadic)>,
    certificate: WordCertificate,
}

/// Follows the base point of `j` through `w` from right to left, choosing
/// bisection sequences toward the right end of each visited translate.
fn trace_word(w: &Word, j: &Interval, radius: u64) -> Result<Trace, ConstructionError> {
    let start = j.0.midpoint(&j.1);
    let mut point = start.clone();
    let mut shift = 0i64;
    let mut pairs = Vec::new();
    for (e, b) in blocks(w).into_iter().rev() {
        let hi = translate(j, shift).1;
        let mut ys = vec![point.clone()];
        for _ in 0..b.len() {
            let next = ys.last().expect("nonempty").midpoint(&hi);
            ys.push(next);
        }
        let q = b.len();
        for (i, l) in b.iter().enumerate() {
            let lower = ys[q - 1 - i].clone();
            let upper = ys[q - i].clone();
            let (z, uz) = if l.is_inverse() { (upper, lower) } else { (lower, upper) };
            pairs.push((l.gen(), shift, z, uz));
        }
        point = ys.pop().expect("nonempty").mul_pow2(-e);
        shift += e;
        if shift.unsigned_abs() > radius {
            return Err(ConstructionError::Radius { word: w.clone(), needed: shift.unsigned_abs(), radius });
        }
    }
    Ok(Trace {
        pairs,
        certificate: WordCertificate { word: w.clone(), point: start, image: point, exp_a: w.exponent_sum(0) },
    })
}

/// Witnesses for several words at once, with explicit translate radius.
pub fn construct_witnesses(
    words: &[Word],
    epsilon: &Dyadic,
    rank: usize,
    radius: Option<u64>,
) -> Result<WitnessTuple, ConstructionError> {
    if words.is_empty() {
        return Err(ConstructionError::NoWords);
    }
    for w in words {
        if w.is_empty() {
            return Err(ConstructionError::EmptyWord);
        }
        if let Some(l) = w.letters().iter().find(|l| l.gen() >= rank) {
            return Err(ConstructionError::WordRank { word: w.clone(), gen: l.gen(), rank });
        }
    }
    let radius = radius.unwrap_or_else(|| words.iter().map(Word::len).max().unwrap_or(1) as u64);
    let plan = ConstructionPlan::new(epsilon.clone(), rank, radius, words.len())?;
    let traces: Vec<Trace> = words
        .par_iter()
        .zip(plan.subintervals.par_iter())
        .map(|(w, j)| trace_word(w, j, radius))
        .collect::<Result<_, _>>()?;

    let mut per_gen: Vec<BTreeMap<Dyadic, (Dyadic, Vec<(Dyadic, Dyadic)>)>> = vec![BTreeMap::new(); rank];
    for (trace, j) in traces.iter().zip(&plan.subintervals) {
        for (n, shift, z, uz) in &trace.pairs {
            let (lo, hi) = translate(j, *shift);
            per_gen[*n].entry(lo).or_insert_with(|| (hi, Vec::new())).1.push((z.clone(), uz.clone()));
        }
    }
    let elements: Vec<PLMap> = per_gen
        .into_par_iter()
        .skip(1)
        .map(|intervals| {
            let pieces: Vec<RawPl> = intervals
                .into_iter()
                .map(|(lo, (hi, mut pairs))| local_map_through(&lo, &hi, &mut pairs))
                .collect::<Result<_, _>>()?;
            PLMap::from_local_pieces(pieces)
        })
        .collect::<Result<_, PlError>>()?;
    Ok(WitnessTuple { elements, plan, certificates: traces.into_iter().map(|t| t.certificate).collect() })
}

/// Witnesses for one word; the rank is that of the word (at least 2).
pub fn construct_witnesses_single(w: &Word, epsilon: &Dyadic, radius: u64) -> Result<WitnessTuple, ConstructionError> {
    construct_witnesses(std::slice::from_ref(w), epsilon, w.rank().max(2), Some(radius))
}

/// One tuple witnessing every listed word, radius set to the longest word.
pub fn construct_witnesses_multi(words: &[Word], epsilon: &Dyadic, rank: usize) -> Result<WitnessTuple, ConstructionError> {
    construct_witnesses(words, epsilon, rank, None)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GirthMode {
    Faithful,
    Targeted,
}

impl fmt::Display for GirthMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GirthMode::Faithful => "faithful",
            GirthMode::Targeted => "targeted",
        })
    }
}

impl FromStr for GirthMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "faithful" => Ok(GirthMode::Faithful),
            "targeted" => Ok(GirthMode::Targeted),
            _ => Err(format!("unknown mode `{s}` (expected faithful or targeted)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Caps {
    pub max_words: usize,
    pub max_breakpoints: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Caps { max_words: 200_000, max_breakpoints: 5_000_000 }
    }
}

/// `S_{l,m} = (x_0, x_0^m u_1^m x_1, u_1, ..., u_{l-2})`.
#[derive(Debug, Clone)]
pub struct GirthMarking {
    pub l: usize,
    pub m: usize,
    pub mode: GirthMode,
    pub marking: Marking,
    pub witnesses: WitnessTuple,
}

/// Images of `alpha, beta, gamma_1, ...` with `x_1` deleted:
/// `a, a^m b_1^m, b_1, ..., b_{l-2}`.
pub fn derived_images(l: usize, m: usize) -> Vec<Word> {
    let m = m as i64;
    let mut images = vec![Word::letter(0), Word::power_of(0, m).mul(&Word::power_of(1, m))];
    images.extend((1..l - 1).map(Word::letter));
    images
}

/// The word `w_2` over `(a, b_1, ...)` that an `S_{l,m}` word reduces to once `x_1` is dropped.
pub fn derived_word(w: &Word, l: usize, m: usize) -> Word {
    w.substitute(&derived_images(l, m)).expect("rank checked by caller")
}

/// The distinct nonempty `w_2` over all reduced `S_{l,m}` words of length at most `m`.
pub fn targeted_words(l: usize, m: usize) -> Vec<Word> {
    let set: BTreeSet<Word> =
        enumerate_reduced(l, m).map(|w| derived_word(&w, l, m)).filter(|w| !w.is_empty()).collect();
    set.into_iter().collect()
}

pub fn girth_marking(l: usize, m: usize, mode: GirthMode) -> Result<GirthMarking, ConstructionError> {
    girth_marking_with_caps(l, m, mode, &Caps::default())
}

pub fn girth_marking_with_caps(l: usize, m: usize, mode: GirthMode, caps: &Caps) -> Result<GirthMarking, ConstructionError> {
    if l < 3 || m < 1 {
        return Err(ConstructionError::GirthParams { l, m });
    }
    let epsilon = Dyadic::pow2(-((m * m) as i64 + 2));
    let radius = 2 * (m * m) as u64;
    let words: Vec<Word> = match mode {
        GirthMode::Targeted => targeted_words(l, m),
        GirthMode::Faithful => {
            let count = crate::words::reduced_word_count(l - 1, radius as usize);
            if count > caps.max_words as u128 {
                return Err(ConstructionError::CapExceeded(format!(
                    "{count} words of length <= {radius} exceed the word cap {}",
                    caps.max_words
                )));
            }
            enumerate_reduced(l - 1, radius as usize).collect()
        }
    };
    if words.len() > caps.max_words {
        return Err(ConstructionError::CapExceeded(format!("{} words exceed the word cap {}", words.len(), caps.max_words)));
    }
    let witnesses = construct_witnesses(&words, &epsilon, l - 1, Some(radius))?;
    let witness_points: usize = witnesses.elements.iter().map(PLMap::num_breakpoints).sum();
    if witness_points > caps.max_breakpoints {
        return Err(ConstructionError::CapExceeded(format!(
            "witnesses have {witness_points} breakpoints, cap is {}",
            caps.max_breakpoints
        )));
    }
    let u1 = &witnesses.elements[0];
    let x0 = PLMap::generator(0);
    let beta = x0.pow(m as i64).compose(&u1.pow(m as i64)).compose(&PLMap::generator(1));
    let mut maps = vec![x0, beta];
    maps.extend(witnesses.elements.iter().cloned());
    let marking = Marking::new(maps);
    if marking.total_breakpoints() > caps.max_breakpoints {
        return Err(ConstructionError::CapExceeded(format!(
            "marking has {} breakpoints, cap is {}",
            marking.total_breakpoints(),
            caps.max_breakpoints
        )));
    }
    Ok(GirthMarking { l, m, mode, marking, witnesses })
}

/// One verified instance of the argument that a short `S_{l,m}` word is nontrivial.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ChainLink {
    pub word: Word,
    pub derived: Word,
    pub point: Dyadic,
    pub image: Dyadic,
}

impl GirthMarking {
    pub fn epsilon(&self) -> &Dyadic {
        &self.witnesses.plan.epsilon
    }

    /// Checks each step for `w`: `w_2` is nonempty, `w_2` moves its
    /// certified point, every `u_j` lives in `[0, epsilon)` away from
    /// `supp(x_1) = [1/2, 1]`, and `w` itself moves that point to the same image.
    pub fn check_chain(&self, w: &Word) -> Result<ChainLink, ConstructionError> {
        let fail = || ConstructionError::Certificate(w.clone());
        if w.is_empty() || w.len() > self.m || w.rank() > self.l {
            return Err(fail());
        }
        let derived = derived_word(w, self.l, self.m);
        if derived.is_empty() {
            return Err(fail());
        }
        let cert = self.witnesses.certificate_for(&derived).ok_or_else(fail)?;
        let wm = self.witnesses.marking();
        let image = wm.apply(&derived, &cert.point).map_err(|_| fail())?;
        if image == cert.point || cert.point >= *self.epsilon() {
            return Err(fail());
        }
        let half = Dyadic::frac(1, 1);
        for u in &self.witnesses.elements {
            if u.support().hull().is_some_and(|(_, hi)| hi >= *self.epsilon() || hi >= half) {
                return Err(fail());
            }
        }
        let direct = self.marking.apply(w, &cert.point).map_err(|_| fail())?;
        if direct != image {
            return Err(fail());
        }
        Ok(ChainLink { word: w.clone(), derived, point: cert.point.clone(), image })
    }
}

/// Outcome of checking that `d -> x^m y^m` kills no short reduced word over `x, y, d`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FactReport {
    pub m: usize,
    pub holds: bool,
    pub words_checked: usize,
    pub classes_checked: usize,
    pub counterexample: Option<Word>,
}

/// Image of a word over `x, y, d` in the free group on `x, y` under `d -> x^m y^m`.
pub fn fact_substitution(w: &Word, m: usize) -> Word {
    let m = m as i64;
    let images = [Word::letter(0), Word::letter(1), Word::power_of(0, m).mul(&Word::power_of(1, m))];
    w.substitute(&images).expect("rank 3 word")
}

pub fn verify_fact(m: usize) -> FactReport {
    let mut words_checked = 0;
    let mut classes_checked = 0;
    let mut counterexample = None;
    for w in enumerate_reduced(3, m) {
        words_checked += 1;
        if w.is_cyclic_canonical() {
            classes_checked += 1;
        }
        if fact_substitution(&w, m).is_empty() {
            counterexample = Some(w);
            break;
        }
    }
    FactReport { m, holds: counterexample.is_none(), words_checked, classes_checked, counterexample }
}

/// Per-word witnesses found by searching tuples of short `{x_0, x_1}` words,
/// each transplanted into its own interval and superimposed.
pub fn partition_witnesses(words: &[Word], rank: usize, intervals: &[Interval]) -> Result<Vec<PLMap>, ConstructionError> {
    partition_witnesses_with_cap(words, rank, intervals, 1_000_000)
}

pub fn partition_witnesses_with_cap(
    words: &[Word],
    rank: usize,
    intervals: &[Interval],
    max_tuples: usize,
) -> Result<Vec<PLMap>, ConstructionError> {
    if intervals.len() != words.len() {
        return Err(ConstructionError::IntervalCount { expected: words.len(), got: intervals.len() });
    }
    if rank < 1 {
        return Err(ConstructionError::Rank { rank, min: 1 });
    }
    let mut sorted = intervals.to_vec();
    sorted.sort();
    let valid = sorted.iter().all(|(lo, hi)| !lo.is_negative() && lo < hi && hi <= &Dyadic::one())
        && sorted.windows(2).all(|p| p[0].1 <= p[1].0);
    if !valid {
        return Err(ConstructionError::Intervals);
    }
    let standard = Marking::standard();
    let pool: Vec<PLMap> = enumerate_reduced(2, 6).map(|w| standard.evaluate(&w).expect("rank 2")).collect();

    let mut result = vec![PLMap::identity(); rank];
    for (w, (lo, hi)) in words.iter().zip(intervals) {
        if w.is_empty() {
            return Err(ConstructionError::EmptyWord);
        }
        if let Some(l) = w.letters().iter().find(|l| l.gen() >= rank) {
            return Err(ConstructionError::WordRank { word: w.clone(), gen: l.gen(), rank });
        }
        let tuple = search_tuple(w, rank, &pool, max_tuples).ok_or_else(|| ConstructionError::PoolExhausted(w.clone()))?;
        for (r, idx) in tuple.into_iter().enumerate() {
            let local = pool[idx].rescale_into(lo, hi)?;
            result[r] = result[r].compose(&local);
        }
    }
    let marking = Marking::new(result.clone());
    for (w, (lo, hi)) in words.iter().zip(intervals) {
        let f = marking.evaluate(w).expect("rank checked");
        if !f.moves_point_in(lo, hi) {
            return Err(ConstructionError::Certificate(w.clone()));
        }
    }
    Ok(result)
}

/// First tuple of pool indices, ordered by largest index then
/// lexicographically, under which `w` is not the identity.
fn search_tuple(w: &Word, rank: usize, pool: &[PLMap], max_tuples: usize) -> Option<Vec<usize>> {
    let mut tried = 0usize;
    for top in 0..pool.len() {
        let side = top + 1;
        let total = side.checked_pow(rank as u32)?;
        for code in 0..total {
            let mut digits = Vec::with_capacity(rank);
            let mut c = code;
            for _ in 0..rank {
                digits.push(c % side);
                c /= side;
            }
            digits.reverse();
            if !digits.contains(&top) {
                continue;
            }
            tried += 1;
            if tried > max_tuples {
                return None;
            }
            let marking = Marking::new(digits.iter().map(|&i| pool[i].clone()).collect());
            if !marking.evaluate(w).expect("rank checked").is_identity() {
                return Some(digits);
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    fn d(s: &str) -> Dyadic {
        s.parse().unwrap()
    }

    #[test]
    fn plan_geometry() {
        let plan = ConstructionPlan::new(d("1/8"), 2, 3, 3).unwrap();
        assert_eq!(plan.scale(), d("1/8"));
        assert_eq!(plan.base, (d("1/256"), d("1/128")));
        assert_eq!(plan.subintervals.len(), 3);
        assert_eq!(plan.subintervals[1], (d("5/1024"), d("6/1024")));
        let x0 = PLMap::generator(0);
        for (i, (lo, hi)) in plan.translates() {
            let p = x0.pow(i);
            assert_eq!(p.apply(&plan.base.0), lo);
            assert_eq!(p.apply(&plan.base.1), hi);
            assert!(lo > Dyadic::zero() && hi < plan.epsilon);
        }
        assert_eq!(ConstructionPlan::new(d("3/8"), 2, 1, 1).unwrap().scale(), d("1/4"));
        assert!(ConstructionPlan::new(d("1/2"), 2, 1, 1).is_err());
        assert!(ConstructionPlan::new(Dyadic::zero(), 2, 1, 1).is_err());
    }

    #[test]
    fn block_decomposition() {
        let b = blocks(&w("b a^2 B c A b"));
        let shape: Vec<(i64, usize)> = b.iter().map(|(e, l)| (*e, l.len())).collect();
        assert_eq!(shape, vec![(0, 1), (2, 2), (-1, 1)]);
        assert_eq!(blocks(&w("a")), vec![(1, vec![])]);
    }

    #[test]
    fn single_letter_moves_up() {
        let t = construct_witnesses_single(&w("b"), &d("1/4"), 1).unwrap();
        let c = &t.certificates[0];
        assert!(c.image > c.point);
        t.verify().unwrap();
        t.verify_by_composition().unwrap();
    }

    #[test]
    fn commutator_with_x0() {
        let word = w("a b A B");
        let t = construct_witnesses_single(&word, &d("1/8"), 4).unwrap();
        t.verify().unwrap();
        assert!(!t.marking().evaluate(&word).unwrap().is_identity());
        assert_eq!(t.certificates[0].exp_a, 0);
        assert!(t.certificates[0].image > t.certificates[0].point);
    }

    #[test]
    fn nonzero_exponent_leaves_base() {
        let word = w("a^2 b a B");
        let t = construct_witnesses_single(&word, &d("1/8"), 4).unwrap();
        t.verify().unwrap();
        let c = &t.certificates[0];
        let j = &t.plan.subintervals[0];
        assert!(!(c.image > j.0 && c.image < j.1));
    }

    #[test]
    fn all_short_rank_two_words() {
        let exact: Vec<Word> = crate::words::ReducedWords::new(2, 2, 2).collect();
        assert_eq!(exact.len(), 12);
        construct_witnesses_multi(&exact, &d("1/8"), 2).unwrap().verify_by_composition().unwrap();
        let words: Vec<Word> = enumerate_reduced(2, 2).collect();
        assert_eq!(words.len(), 16);
        let t = construct_witnesses_multi(&words, &d("1/8"), 2).unwrap();
        t.verify().unwrap();
        t.verify_by_composition().unwrap();
        for u in &t.elements {
            assert!(u.support().within(&Dyadic::zero(), &d("1/8")));
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert_eq!(construct_witnesses_multi(&[Word::empty()], &d("1/8"), 2).unwrap_err(), ConstructionError::EmptyWord);
        assert!(matches!(construct_witnesses_multi(&[w("c")], &d("1/8"), 2), Err(ConstructionError::WordRank { .. })));
        assert!(matches!(construct_witnesses_single(&w("b"), &d("1/2"), 1), Err(ConstructionError::Epsilon(_))));
        assert!(matches!(construct_witnesses_single(&w("a^3 b"), &d("1/8"), 2), Err(ConstructionError::Radius { .. })));
    }

    #[test]
    fn fact_small_cases() {
        for m in 1..=4 {
            let r = verify_fact(m);
            assert!(r.holds, "m = {m}");
        }
        for m in 1..=5 {
            let tight = Word::letter(2).mul(&Word::power_of(0, m as i64).mul(&Word::power_of(1, m as i64)).inverse());
            assert_eq!(tight.len(), 2 * m + 1);
            assert!(fact_substitution(&tight, m).is_empty());
        }
    }

    #[test]
    fn derived_words_shape() {
        assert_eq!(derived_word(&w("b"), 3, 4).to_string(), "a^4 b^4");
        assert_eq!(derived_word(&w("a c"), 3, 2), w("a b"));
        let t = targeted_words(3, 2);
        assert!(t.iter().all(|x| !x.is_empty() && x.len() <= 8));
    }

    #[test]
    fn girth_marking_small() {
        let g = girth_marking(3, 2, GirthMode::Targeted).unwrap();
        assert_eq!(g.marking.rank(), 3);
        assert_eq!(g.epsilon(), &d("1/64"));
        g.witnesses.verify().unwrap();
        for word in enumerate_reduced(3, 2) {
            g.check_chain(&word).unwrap();
        }
        assert!(girth_marking(2, 2, GirthMode::Targeted).is_err());
        let caps = Caps { max_words: 10, max_breakpoints: 100 };
        assert!(matches!(girth_marking_with_caps(3, 2, GirthMode::Faithful, &caps), Err(ConstructionError::CapExceeded(_))));
    }

    #[test]
    fn partition_search() {
        let full = (Dyadic::zero(), Dyadic::one());
        let u = partition_witnesses(&[w("a")], 1, &[full.clone()]).unwrap();
        assert_eq!(u[0], PLMap::generator(0));
        let u = partition_witnesses(&[w("A B a b")], 2, &[full]).unwrap();
        assert_eq!(u, vec![PLMap::generator(0), PLMap::generator(1)]);
        let halves = [(Dyadic::zero(), d("1/2")), (d("1/2"), Dyadic::one())];
        let u = partition_witnesses(&[w("a"), w("A B a b")], 2, &halves).unwrap();
        let m = Marking::new(u);
        assert!(m.evaluate(&w("A B a b")).unwrap().support().within(&d("1/2"), &Dyadic::one()));
        assert!(partition_witnesses(&[w("a")], 1, &[]).is_err());
    }
}
