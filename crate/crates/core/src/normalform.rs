//! Normal forms in the infinite presentation `<x_0, x_1, ... | x_i^-1 x_j x_i = x_{j+1}, i < j>`.
//!
//! Words over `{x_0, x_1}` are rewritten into `x_{i_1}^{r_1} ... x_{i_k}^{r_k} x_{j_l}^{-s_l} ... x_{j_1}^{-s_1}`
//! and then reduced until no index `i` has both `x_i` and `x_i^-1` without
//! `x_{i+1}^{±1}` also present. Maps go the other way through a tree pair of
//! standard dyadic subdivisions.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::dyadic::Dyadic;
use crate::plhomeo::{standard_pieces, PLMap, StdInterval};
use crate::words::{Letter, Word};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NfError {
    #[error("normal forms are computed for words over a, b only (found generator {0})")]
    NotRankTwo(usize),
    #[error("cannot parse normal form `{0}`")]
    Parse(String),
}

/// A product `P · N^-1` with `P`, `N` positive words kept as nondecreasing
/// index lists.
#[derive(Debug, Clone, Default)]
struct Seminormal {
    pos: Vec<u64>,
    neg: Vec<u64>,
}

/// `x_c · list` rewritten as a nondecreasing list.
fn insert_left(list: &mut Vec<u64>, mut c: u64) {
    let mut idx = 0;
    while idx < list.len() && list[idx] < c {
        c += 1;
        idx += 1;
    }
    list.insert(idx, c);
}

/// `list · x_c` rewritten as a nondecreasing list.
fn insert_right(list: &mut Vec<u64>, c: u64) {
    let mut i = list.len();
    while i > 0 && list[i - 1] > c {
        list[i - 1] += 1;
        i -= 1;
    }
    list.insert(i, c);
}

impl Seminormal {
    fn mul_right(&mut self, index: u64, inverse: bool) {
        if inverse {
            insert_left(&mut self.neg, index);
            return;
        }
        let mut c = index;
        let mut idx = 0;
        while idx < self.neg.len() {
            let n = self.neg[idx];
            if n == c {
                self.neg.remove(idx);
                return;
            }
            if n < c {
                c += 1;
            } else {
                self.neg[idx] += 1;
            }
            idx += 1;
        }
        insert_right(&mut self.pos, c);
    }

    /// Removes pairs `x_i ... x_i^-1` with no `x_{i+1}^{±1}` between them.
    fn reduce(&mut self) {
        loop {
            let bad = self
                .pos
                .iter()
                .rev()
                .copied()
                .find(|&i| self.neg.contains(&i) && !self.pos.contains(&(i + 1)) && !self.neg.contains(&(i + 1)));
            let Some(i) = bad else { return };
            for list in [&mut self.pos, &mut self.neg] {
                let at = list.iter().rposition(|&v| v == i).expect("present");
                list.remove(at);
                for v in list.iter_mut().skip(at) {
                    *v -= 1;
                }
            }
        }
    }
}

fn runs(list: &[u64]) -> Vec<(u64, u32)> {
    let mut out: Vec<(u64, u32)> = Vec::new();
    for &v in list {
        match out.last_mut() {
            Some((i, e)) if *i == v => *e += 1,
            _ => out.push((v, 1)),
        }
    }
    out
}

/// The reduced normal form of an element of F.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct NormalForm {
    positive: Vec<(u64, u32)>,
    negative: Vec<(u64, u32)>,
}

impl NormalForm {
    /// Normal form of a product of generators `x_i^{±1}`, read left to right.
    pub fn from_generator_letters<I: IntoIterator<Item = (u64, bool)>>(letters: I) -> Self {
        let mut s = Seminormal::default();
        for (i, inv) in letters {
            s.mul_right(i, inv);
        }
        Self::from_seminormal(s)
    }

    fn from_seminormal(mut s: Seminormal) -> Self {
        s.reduce();
        NormalForm { positive: runs(&s.pos), negative: runs(&s.neg) }
    }

    /// `(index, exponent)` pairs of the positive part, indices increasing.
    pub fn positive(&self) -> &[(u64, u32)] {
        &self.positive
    }

    /// `(index, exponent)` pairs of the negative part, indices increasing;
    /// the form applies them in decreasing index order.
    pub fn negative(&self) -> &[(u64, u32)] {
        &self.negative
    }

    pub fn is_identity(&self) -> bool {
        self.positive.is_empty() && self.negative.is_empty()
    }

    /// The occurrence condition: whenever `x_i` and `x_i^-1` both occur, so does `x_{i+1}^{±1}`.
    pub fn is_reduced(&self) -> bool {
        let has = |list: &[(u64, u32)], i: u64| list.iter().any(|&(j, _)| j == i);
        let increasing = |list: &[(u64, u32)]| list.windows(2).all(|w| w[0].0 < w[1].0);
        increasing(&self.positive)
            && increasing(&self.negative)
            && self.positive.iter().all(|&(_, e)| e > 0)
            && self.negative.iter().all(|&(_, e)| e > 0)
            && self.positive.iter().all(|&(i, _)| {
                !has(&self.negative, i) || has(&self.positive, i + 1) || has(&self.negative, i + 1)
            })
    }

    /// Generator letters in the order the form is written.
    pub fn letters(&self) -> Vec<(u64, bool)> {
        let mut out = Vec::new();
        for &(i, e) in &self.positive {
            out.extend(std::iter::repeat((i, false)).take(e as usize));
        }
        for &(i, e) in self.negative.iter().rev() {
            out.extend(std::iter::repeat((i, true)).take(e as usize));
        }
        out
    }

    pub fn to_homeo(&self) -> PLMap {
        let mut acc = PLMap::identity();
        for &(i, e) in &self.positive {
            acc = acc.compose(&PLMap::generator(i).pow(e as i64));
        }
        for &(i, e) in self.negative.iter().rev() {
            acc = acc.compose(&PLMap::generator(i).pow(-(e as i64)));
        }
        acc
    }

    /// A word over `a = x_0`, `b = x_1` using `x_{1+i} = a^-i b a^i`.
    pub fn to_word(&self) -> Word {
        let mut letters = Vec::new();
        for (i, inv) in self.letters() {
            letters.extend(generator_word(i, inv).letters().iter().copied());
        }
        Word::reduce(letters)
    }
}

fn generator_word(i: u64, inverse: bool) -> Word {
    let core = if i == 0 {
        Word::letter(0)
    } else {
        Word::letter(1).conjugate_by(&Word::power_of(0, i as i64 - 1))
    };
    if inverse { core.inverse() } else { core }
}

/// Normal form of a word over `a, b`.
pub fn word_to_normalform(w: &Word) -> Result<NormalForm, NfError> {
    if let Some(l) = w.letters().iter().find(|l| l.gen() > 1) {
        return Err(NfError::NotRankTwo(l.gen()));
    }
    Ok(NormalForm::from_generator_letters(w.letters().iter().map(|l: &Letter| (l.gen() as u64, l.is_inverse()))))
}

pub fn normalform_to_homeo(nf: &NormalForm) -> PLMap {
    nf.to_homeo()
}

/// Domain and range subdivisions into standard dyadic intervals such that
/// `f` maps each domain piece affinely onto the matching range piece.
fn tree_pair(f: &PLMap) -> (Vec<StdInterval>, Vec<StdInterval>) {
    let pts = f.points();
    let slopes = f.slopes();
    let mut domain = Vec::new();
    let mut range = Vec::new();
    for i in 0..slopes.len() {
        let (p, s) = (&pts[i], slopes[i]);
        let mut stack: Vec<StdInterval> = standard_pieces(&p.x, &pts[i + 1].x);
        stack.reverse();
        while let Some(piece) = stack.pop() {
            let y = &p.y + &(&piece.start - &p.x).mul_pow2(s);
            let range_level = piece.level as i64 - s;
            if y.is_multiple_of_pow2_neg(range_level) {
                range.push(StdInterval { start: y, level: range_level as u64 });
                domain.push(piece);
            } else {
                let level = piece.level + 1;
                let mid = &piece.start + &Dyadic::pow2(-(level as i64));
                stack.push(StdInterval { start: mid, level });
                stack.push(StdInterval { start: piece.start, level });
            }
        }
    }
    (domain, range)
}

/// Leaf exponents of the binary tree whose leaves are the given subdivision.
fn leaf_exponents(leaves: &[StdInterval]) -> Vec<u64> {
    leaves
        .iter()
        .map(|leaf| {
            let top_level = leaf.start.denominator_exp();
            let climbed = leaf.level - top_level;
            let top_end = &leaf.start + &Dyadic::pow2(-(top_level as i64));
            if top_end == Dyadic::one() {
                climbed.saturating_sub(1)
            } else {
                climbed
            }
        })
        .collect()
}

/// Normal form of the element a map represents.
pub fn homeo_to_normalform(f: &PLMap) -> NormalForm {
    let (domain, range) = tree_pair(f);
    let expand = |exps: Vec<u64>| -> Vec<u64> {
        exps.iter().enumerate().flat_map(|(k, &e)| std::iter::repeat(k as u64).take(e as usize)).collect()
    };
    NormalForm::from_seminormal(Seminormal {
        pos: expand(leaf_exponents(&range)),
        neg: expand(leaf_exponents(&domain)),
    })
}

/// A word over `a = x_0`, `b = x_1` evaluating to `f`.
pub fn homeo_to_word(f: &PLMap) -> Word {
    homeo_to_normalform(f).to_word()
}

impl fmt::Display for NormalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_identity() {
            return f.write_str("1");
        }
        let mut parts = Vec::new();
        for &(i, e) in &self.positive {
            parts.push(if e == 1 { format!("x{i}") } else { format!("x{i}^{e}") });
        }
        for &(i, e) in self.negative.iter().rev() {
            parts.push(format!("x{i}^-{e}"));
        }
        f.write_str(&parts.join(" "))
    }
}

impl fmt::Debug for NormalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "NormalForm({})", self)
    }
}

/// Accepts any product of tokens `x<i>` or `x<i>^<int>` and normalizes it.
impl FromStr for NormalForm {
    type Err = NfError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let err = || NfError::Parse(text.to_string());
        let t = text.trim();
        if t == "1" || t.is_empty() {
            return Ok(NormalForm::default());
        }
        let mut letters = Vec::new();
        for tok in t.split_whitespace() {
            let body = tok.strip_prefix('x').ok_or_else(err)?;
            let (idx, exp) = match body.split_once('^') {
                Some((i, e)) => (i, e.parse::<i64>().map_err(|_| err())?),
                None => (body, 1),
            };
            let idx: u64 = idx.parse().map_err(|_| err())?;
            letters.extend(std::iter::repeat((idx, exp < 0)).take(exp.unsigned_abs() as usize));
        }
        Ok(NormalForm::from_generator_letters(letters))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::words::Marking;

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    fn nf(s: &str) -> NormalForm {
        word_to_normalform(&w(s)).unwrap()
    }

    #[test]
    fn conjugation_raises_index() {
        let x2 = nf("A b a");
        assert_eq!(x2.to_string(), "x2");
        assert_eq!(x2.positive(), &[(2, 1)]);
    }

    #[test]
    fn presentation_relators_vanish() {
        let r1 = Word::commutator(&w("b A"), &w("A b a"));
        let r2 = Word::commutator(&w("b A"), &w("A^2 b a^2"));
        assert!(nf(&r1.to_string()).is_identity());
        assert!(nf(&r2.to_string()).is_identity());
    }

    #[test]
    fn positive_reordering() {
        let form = nf("b a");
        assert_eq!(form.to_string(), "x0 x2");
        let std = Marking::standard();
        assert_eq!(form.to_homeo(), std.evaluate(&w("b a")).unwrap());
    }

    #[test]
    fn to_homeo_examples() {
        assert!(NormalForm::default().to_homeo().is_identity());
        assert_eq!("x2".parse::<NormalForm>().unwrap().to_homeo(), PLMap::generator(2));
        let mixed: NormalForm = "x0 x1^-1".parse().unwrap();
        assert_eq!(mixed.to_homeo(), PLMap::generator(0).compose(&PLMap::generator(1).inverse()));
    }

    #[test]
    fn reduction_removes_bad_pairs() {
        // x_0 x_2 x_0^-1 = x_1
        let f = NormalForm::from_generator_letters([(0, false), (2, false), (0, true)]);
        assert_eq!(f.to_string(), "x1");
        // x_1 x_1^-1 style pairs with a blocking x_2 survive
        let g = NormalForm::from_generator_letters([(1, false), (2, false), (1, true)]);
        assert!(g.is_reduced());
        assert_eq!(g.to_homeo(), PLMap::generator(1).compose(&PLMap::generator(2)).compose(&PLMap::generator(1).inverse()));
    }

    #[test]
    fn text_roundtrip() {
        for s in ["1", "x0^2 x3 x5^-1 x1^-1", "x4^-3", "x0 x1 x2^2"] {
            let form: NormalForm = s.parse().unwrap();
            assert_eq!(form.to_string(), s);
            assert!(form.is_reduced());
        }
        assert!("y2".parse::<NormalForm>().is_err());
        assert!("x2^q".parse::<NormalForm>().is_err());
    }

    #[test]
    fn rank_check() {
        assert_eq!(word_to_normalform(&w("a c")), Err(NfError::NotRankTwo(2)));
    }

    #[test]
    fn homeo_back_to_words() {
        assert!(homeo_to_word(&PLMap::identity()).is_empty());
        let std = Marking::standard();
        for n in 0..6 {
            let g = PLMap::generator(n);
            let word = homeo_to_word(&g);
            assert_eq!(std.evaluate(&word).unwrap(), g, "x_{n}");
            assert_eq!(homeo_to_normalform(&g).to_string(), format!("x{n}"));
        }
        assert_eq!(homeo_to_word(&PLMap::generator(2)), w("A b a"));
        let inv = PLMap::generator(0).inverse();
        assert_eq!(homeo_to_normalform(&inv).to_string(), "x0^-1");
    }

    #[test]
    fn homeo_of_nonstandard_map() {
        let d = |s: &str| s.parse::<Dyadic>().unwrap();
        let f = PLMap::generator(0).rescale_into(&d("1/8"), &d("3/4")).unwrap();
        let word = homeo_to_word(&f);
        assert_eq!(Marking::standard().evaluate(&word).unwrap(), f);
    }
}
