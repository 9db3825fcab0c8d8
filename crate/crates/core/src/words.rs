//! Free-group words, markings of F, and evaluation of words as homeomorphisms.
//!
//! Generators are written `a, b, c, ...` (marking positions `0, 1, 2, ...`);
//! an uppercase letter is the inverse. A word acts with its rightmost letter
//! first, so `evaluate("a b")` is `x_0 ∘ x_1`.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::dyadic::Dyadic;
use crate::plhomeo::PLMap;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WordError {
    #[error("cannot parse word `{0}`")]
    Parse(String),
    #[error("word uses generator {gen} but only {rank} are available")]
    RankMismatch { gen: usize, rank: usize },
}

/// A generator or its inverse, packed as `2 * gen + inverse`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter(u32);

impl Letter {
    pub fn new(gen: usize, inverse: bool) -> Self {
        Letter((gen as u32) << 1 | inverse as u32)
    }

    pub fn gen(self) -> usize {
        (self.0 >> 1) as usize
    }

    pub fn is_inverse(self) -> bool {
        self.0 & 1 == 1
    }

    pub fn inverse(self) -> Self {
        Letter(self.0 ^ 1)
    }

    pub fn sign(self) -> i64 {
        if self.is_inverse() { -1 } else { 1 }
    }

    pub fn code(self) -> u32 {
        self.0
    }

    fn from_code(code: u32) -> Self {
        Letter(code)
    }

    fn symbol(self) -> char {
        let base = (b'a' + self.gen() as u8) as char;
        if self.is_inverse() { base.to_ascii_uppercase() } else { base }
    }
}

/// A freely reduced word.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Word {
    letters: Vec<Letter>,
}

impl Word {
    pub fn empty() -> Self {
        Word::default()
    }

    /// Free reduction of an arbitrary letter sequence.
    pub fn reduce<I: IntoIterator<Item = Letter>>(letters: I) -> Self {
        let mut out: Vec<Letter> = Vec::new();
        for l in letters {
            if out.last() == Some(&l.inverse()) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        Word { letters: out }
    }

    pub fn letter(gen: usize) -> Self {
        Word { letters: vec![Letter::new(gen, false)] }
    }

    /// `gen^e` for any integer `e`.
    pub fn power_of(gen: usize, e: i64) -> Self {
        let l = Letter::new(gen, e < 0);
        Word { letters: vec![l; e.unsigned_abs() as usize] }
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// One more than the largest generator index used.
    pub fn rank(&self) -> usize {
        self.letters.iter().map(|l| l.gen() + 1).max().unwrap_or(0)
    }

    pub fn inverse(&self) -> Word {
        Word { letters: self.letters.iter().rev().map(|l| l.inverse()).collect() }
    }

    /// Reduced product `self · other`.
    pub fn mul(&self, other: &Word) -> Word {
        Word::reduce(self.letters.iter().chain(other.letters.iter()).copied())
    }

    pub fn product<'a, I: IntoIterator<Item = &'a Word>>(parts: I) -> Word {
        Word::reduce(parts.into_iter().flat_map(|w| w.letters.iter().copied()))
    }

    pub fn pow(&self, e: i64) -> Word {
        let base = if e < 0 { self.inverse() } else { self.clone() };
        Word::product(std::iter::repeat(&base).take(e.unsigned_abs() as usize))
    }

    /// `x^-1 y^-1 x y`.
    pub fn commutator(x: &Word, y: &Word) -> Word {
        Word::product([&x.inverse(), &y.inverse(), x, y])
    }

    /// `g^-1 self g`.
    pub fn conjugate_by(&self, g: &Word) -> Word {
        Word::product([&g.inverse(), self, g])
    }

    /// Homomorphic image under `gen i -> images[i]`.
    pub fn substitute(&self, images: &[Word]) -> Result<Word, WordError> {
        let mut out = Vec::new();
        for l in &self.letters {
            let img = images.get(l.gen()).ok_or(WordError::RankMismatch { gen: l.gen(), rank: images.len() })?;
            if l.is_inverse() {
                out.extend(img.letters.iter().rev().map(|x| x.inverse()));
            } else {
                out.extend(img.letters.iter().copied());
            }
        }
        Ok(Word::reduce(out))
    }

    pub fn delete_generator(&self, gen: usize) -> Word {
        Word::reduce(self.letters.iter().copied().filter(|l| l.gen() != gen))
    }

    pub fn exponent_sum(&self, gen: usize) -> i64 {
        self.letters.iter().filter(|l| l.gen() == gen).map(|l| l.sign()).sum()
    }

    pub fn is_cyclically_reduced(&self) -> bool {
        match (self.letters.first(), self.letters.last()) {
            (Some(f), Some(l)) => self.letters.len() == 1 || *f != l.inverse(),
            _ => true,
        }
    }

    /// Strips matching inverse letters from the two ends.
    pub fn cyclic_reduction(&self) -> Word {
        let mut lo = 0;
        let mut hi = self.letters.len();
        while hi - lo >= 2 && self.letters[lo] == self.letters[hi - 1].inverse() {
            lo += 1;
            hi -= 1;
        }
        Word { letters: self.letters[lo..hi].to_vec() }
    }

    /// Least rotation of the cyclic reduction or of its inverse; words that
    /// are conjugate or mutually inverse share the same value.
    pub fn cyclic_canonical(&self) -> Word {
        let base = self.cyclic_reduction();
        let inv = base.inverse();
        let mut best = base.letters.clone();
        for w in [&base, &inv] {
            let n = w.letters.len();
            for r in 0..n {
                if rotation_cmp(&w.letters, r, &best) == Ordering::Less {
                    best = rotated(&w.letters, r);
                }
            }
        }
        Word { letters: best }
    }

    /// Whether the word is the representative of its rotation/inversion class.
    pub fn is_cyclic_canonical(&self) -> bool {
        if !self.is_cyclically_reduced() {
            return false;
        }
        let inv = self.inverse();
        let n = self.letters.len();
        (1..n).all(|r| rotation_cmp(&self.letters, r, &self.letters) != Ordering::Less)
            && (0..n).all(|r| rotation_cmp(&inv.letters, r, &self.letters) != Ordering::Less)
    }
}

fn rotation_cmp(w: &[Letter], r: usize, other: &[Letter]) -> Ordering {
    let n = w.len();
    for i in 0..n {
        match w[(r + i) % n].cmp(&other[i]) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    Ordering::Equal
}

fn rotated(w: &[Letter], r: usize) -> Vec<Letter> {
    w[r..].iter().chain(w[..r].iter()).copied().collect()
}

/// Shortlex: shorter words first, then lexicographic by letter code
/// (`a < A < b < B < ...`).
impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.letters.len().cmp(&other.letters.len()).then_with(|| self.letters.cmp(&other.letters))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return f.write_str("1");
        }
        let mut first = true;
        let mut i = 0;
        while i < self.letters.len() {
            let l = self.letters[i];
            let mut run = 1;
            while i + run < self.letters.len() && self.letters[i + run] == l {
                run += 1;
            }
            if !first {
                f.write_str(" ")?;
            }
            first = false;
            if run == 1 {
                write!(f, "{}", l.symbol())?;
            } else {
                write!(f, "{}^{}", l.symbol(), run)?;
            }
            i += run;
        }
        Ok(())
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Word({})", self)
    }
}

impl FromStr for Word {
    type Err = WordError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let err = || WordError::Parse(text.to_string());
        let t = text.trim();
        if t.is_empty() || t == "1" || t == "e" || t == "ε" {
            return Ok(Word::empty());
        }
        let chars: Vec<char> = t.chars().collect();
        let mut letters = Vec::new();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            if c.is_whitespace() {
                i += 1;
                continue;
            }
            if !c.is_ascii_alphabetic() {
                return Err(err());
            }
            let gen = (c.to_ascii_lowercase() as u8 - b'a') as usize;
            let mut exp: i64 = if c.is_ascii_uppercase() { -1 } else { 1 };
            i += 1;
            if i < chars.len() && chars[i] == '^' {
                i += 1;
                let start = i;
                if i < chars.len() && (chars[i] == '-' || chars[i] == '+') {
                    i += 1;
                }
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let num: String = chars[start..i].iter().collect();
                let e: i64 = num.parse().map_err(|_| err())?;
                exp *= e;
            }
            letters.extend(std::iter::repeat(Letter::new(gen, exp < 0)).take(exp.unsigned_abs() as usize));
        }
        Ok(Word::reduce(letters))
    }
}

impl Serialize for Word {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Word {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// An ordered tuple of elements of F interpreting the generators `a, b, c, ...`.
#[derive(Clone, PartialEq, Eq)]
pub struct Marking {
    maps: Vec<PLMap>,
    inverses: Vec<PLMap>,
}

impl Marking {
    pub fn new(maps: Vec<PLMap>) -> Self {
        let inverses = maps.iter().map(PLMap::inverse).collect();
        Marking { maps, inverses }
    }

    /// `(x_{n_1}, x_{n_2}, ...)`.
    pub fn from_generators(indices: &[u64]) -> Self {
        Marking::new(indices.iter().map(|&n| PLMap::generator(n)).collect())
    }

    /// The standard marking `{x_0, x_1}`.
    pub fn standard() -> Self {
        Marking::from_generators(&[0, 1])
    }

    pub fn rank(&self) -> usize {
        self.maps.len()
    }

    pub fn maps(&self) -> &[PLMap] {
        &self.maps
    }

    pub fn total_breakpoints(&self) -> usize {
        self.maps.iter().map(PLMap::num_breakpoints).sum()
    }

    fn image(&self, l: Letter) -> &PLMap {
        if l.is_inverse() { &self.inverses[l.gen()] } else { &self.maps[l.gen()] }
    }

    pub fn check_rank(&self, w: &Word) -> Result<(), WordError> {
        match w.letters.iter().find(|l| l.gen() >= self.rank()) {
            Some(l) => Err(WordError::RankMismatch { gen: l.gen(), rank: self.rank() }),
            None => Ok(()),
        }
    }

    /// The element of F that `w` names under this marking.
    pub fn evaluate(&self, w: &Word) -> Result<PLMap, WordError> {
        self.check_rank(w)?;
        Ok(self.evaluate_unchecked(w))
    }

    pub(crate) fn evaluate_unchecked(&self, w: &Word) -> PLMap {
        let mut acc = PLMap::identity();
        for &l in w.letters.iter().rev() {
            acc = self.image(l).compose(&acc);
        }
        acc
    }

    /// Image of a single point under the word, rightmost letter first.
    pub fn apply(&self, w: &Word, x: &Dyadic) -> Result<Dyadic, WordError> {
        self.check_rank(w)?;
        Ok(self.apply_unchecked(w, x))
    }

    pub(crate) fn apply_unchecked(&self, w: &Word, x: &Dyadic) -> Dyadic {
        w.letters.iter().rev().fold(x.clone(), |p, &l| self.image(l).apply(&p))
    }
}

impl fmt::Debug for Marking {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.maps.iter()).finish()
    }
}

impl Serialize for Marking {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.maps.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Marking {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        Ok(Marking::new(Vec::<PLMap>::deserialize(deserializer)?))
    }
}

/// All nonempty reduced words of rank `rank` with lengths in `min_len..=max_len`,
/// in shortlex order.
#[derive(Debug, Clone)]
pub struct ReducedWords {
    alphabet: u32,
    max_len: usize,
    current: Vec<u32>,
    started: bool,
}

impl ReducedWords {
    pub fn new(rank: usize, min_len: usize, max_len: usize) -> Self {
        let min_len = min_len.max(1);
        ReducedWords { alphabet: 2 * rank as u32, max_len, current: vec![0; min_len], started: false }
    }

    fn fill_minimal(&mut self, from: usize) {
        for p in from..self.current.len() {
            self.current[p] = if p > 0 && self.current[p - 1] == 1 { 1 } else { 0 };
        }
    }

    fn advance(&mut self) -> bool {
        for i in (0..self.current.len()).rev() {
            let forbidden = if i > 0 { Some(self.current[i - 1] ^ 1) } else { None };
            let mut c = self.current[i] + 1;
            if Some(c) == forbidden {
                c += 1;
            }
            if c < self.alphabet {
                self.current[i] = c;
                self.fill_minimal(i + 1);
                return true;
            }
        }
        let next = self.current.len() + 1;
        if next > self.max_len {
            return false;
        }
        self.current = vec![0; next];
        true
    }
}

impl Iterator for ReducedWords {
    type Item = Word;

    fn next(&mut self) -> Option<Word> {
        if self.alphabet == 0 || self.current.len() > self.max_len {
            return None;
        }
        if self.started {
            if !self.advance() {
                self.current = vec![0; self.max_len + 1];
                return None;
            }
        } else {
            self.started = true;
        }
        Some(Word { letters: self.current.iter().map(|&c| Letter::from_code(c)).collect() })
    }
}

/// Every nonempty reduced word of rank `rank` and length at most `max_len`.
pub fn enumerate_reduced(rank: usize, max_len: usize) -> ReducedWords {
    ReducedWords::new(rank, 1, max_len)
}

/// One representative per class of cyclically reduced words under rotation
/// and inversion, in shortlex order.
pub fn enumerate_relator_candidates(rank: usize, max_len: usize) -> impl Iterator<Item = Word> {
    relator_candidates_between(rank, 1, max_len)
}

pub fn relator_candidates_between(rank: usize, min_len: usize, max_len: usize) -> impl Iterator<Item = Word> {
    ReducedWords::new(rank, min_len, max_len).filter(Word::is_cyclic_canonical)
}

/// Number of nonempty reduced words of length at most `max_len`.
pub fn reduced_word_count(rank: usize, max_len: usize) -> u128 {
    let k = rank as u128;
    (1..=max_len as u32).map(|t| 2 * k * (2 * k - 1).pow(t - 1)).sum()
}
