//! End-to-end acceptance suite. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any criterion fails.

use std::collections::HashMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use thompson::constructions::{construct_witnesses_multi, girth_marking, verify_fact, GirthMode};
use thompson::dyadic::Dyadic;
use thompson::limits::{family_power, family_xn, r1, r2, r3, r4};
use thompson::metric::{certify_girth_with, marked_distance_bound, shortest_relator, stabilization_scan, TrivialityOracle};
use thompson::normalform::{homeo_to_word, word_to_normalform};
use thompson::plhomeo::PLMap;
use thompson::words::{enumerate_reduced, enumerate_relator_candidates, Letter, Marking, Word};

const STANDARD_GIRTH: usize = 10;
const STANDARD_RELATOR: &str = "a^2 B A b a b A^2 B";

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn w(s: &str) -> Word {
    s.parse().unwrap()
}

fn x(n: u64) -> PLMap {
    PLMap::generator(n)
}

fn d(s: &str) -> Dyadic {
    s.parse().unwrap()
}

fn within(elapsed: Duration, limit: Duration) -> Outcome {
    if elapsed <= limit {
        Ok(String::new())
    } else {
        Err(format!("took {elapsed:?}, limit {limit:?}"))
    }
}

fn presentation_soundness() -> Outcome {
    let start = Instant::now();
    let std = Marking::standard();
    // [x_1 x_0^-1, x_0^-1 x_1 x_0] and [x_1 x_0^-1, x_0^-2 x_1 x_0^2]
    let written = [w("b A"), w("A b a"), w("A^2 b a^2")];
    let rel1 = Word::commutator(&written[0], &written[1]);
    let rel2 = Word::commutator(&written[0], &written[2]);
    for (name, rel, lib) in [("first", rel1, r1()), ("second", rel2, r2())] {
        ensure!(rel == lib, "{name} relator differs from library: {rel} vs {lib}");
        ensure!(std.evaluate(&rel).unwrap().is_identity(), "{name} relator is not the identity");
    }
    let mut checked = 0;
    for i in 0..=8u64 {
        for j in i + 1..=8 {
            let lhs = x(i).inverse().compose(&x(j)).compose(&x(i));
            ensure!(lhs == x(j + 1), "x_{i}^-1 x_{j} x_{i} != x_{}", j + 1);
            checked += 1;
        }
    }
    within(start.elapsed(), Duration::from_secs(1))?;
    Ok(format!("2 relators, {checked} conjugation relations"))
}

fn support_formula() -> Outcome {
    let start = Instant::now();
    for n in 1..=12u64 {
        let expected = vec![(&Dyadic::one() - &Dyadic::pow2(-(n as i64)), Dyadic::one())];
        ensure!(x(n).support().intervals() == expected.as_slice(), "support(x_{n}) = {}", x(n).support());
    }
    let f = x(1).compose(&x(0).inverse());
    ensure!(f.support().intervals() == [(Dyadic::zero(), d("3/4"))], "support(x_1 x_0^-1) = {}", f.support());
    within(start.elapsed(), Duration::from_secs(1))?;
    Ok("x_1..x_12 and x_1 x_0^-1 exact".into())
}

fn normal_form_oracle() -> Outcome {
    let start = Instant::now();
    let std = Marking::standard();
    let words: Vec<Word> = enumerate_reduced(2, 6).collect();
    ensure!(words.len() == 1456, "expected 1456 words, got {}", words.len());
    let mut by_nf: HashMap<String, Vec<(Word, PLMap)>> = HashMap::new();
    for u in words {
        let f = std.evaluate(&u).unwrap();
        by_nf.entry(word_to_normalform(&u).unwrap().to_string()).or_default().push((u, f));
    }
    // same normal form => same map
    for (nf, bucket) in &by_nf {
        let f0 = &bucket[0].1;
        for (u, f) in bucket {
            ensure!(f == f0, "{u} and {} share normal form {nf} but differ as maps", bucket[0].0);
        }
    }
    // same map => same normal form
    let mut by_map: HashMap<&PLMap, &str> = HashMap::new();
    for (nf, bucket) in &by_nf {
        if let Some(other) = by_map.insert(&bucket[0].1, nf) {
            return Err(format!("normal forms {nf} and {other} give the same map"));
        }
    }
    within(start.elapsed(), Duration::from_secs(60))?;
    Ok(format!("1456 words, {} classes", by_nf.len()))
}

/// splitmix64
struct Rng(u64);

impl Rng {
    fn next(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    fn below(&mut self, n: u64) -> u64 {
        self.next() % n
    }
}

fn homeo_word_roundtrip() -> Outcome {
    let std = Marking::standard();
    let mut rng = Rng(0x5eed);
    for _ in 0..500 {
        let len = rng.below(11) as usize;
        let letters = (0..len).map(|_| Letter::new(rng.below(2) as usize, rng.below(2) == 1));
        let u = Word::reduce(letters);
        let f = std.evaluate(&u).unwrap();
        let back = std.evaluate(&homeo_to_word(&f)).unwrap();
        ensure!(back == f, "round trip failed for {u}");
    }
    Ok("500 seeded words".into())
}

fn standard_girth() -> Outcome {
    let start = Instant::now();
    let std = Marking::standard();
    let (rel, g) = shortest_relator(&std, 10).ok_or("no relator of length <= 10")?;
    ensure!(g == STANDARD_GIRTH, "girth {g}, frozen value {STANDARD_GIRTH}");
    ensure!(rel == w(STANDARD_RELATOR), "relator {rel}, frozen {STANDARD_RELATOR}");
    ensure!(std.evaluate(&rel).unwrap().is_identity(), "{rel} is not a relator");
    // full composition, no pruning
    for u in enumerate_relator_candidates(2, g - 1) {
        ensure!(!std.evaluate(&u).unwrap().is_identity(), "shorter relator {u}");
    }
    within(start.elapsed(), Duration::from_secs(600))?;
    Ok(format!("g = {g}, {rel}"))
}

fn girth_markings() -> Outcome {
    let mut notes = Vec::new();
    for m in 2..=5usize {
        let start = Instant::now();
        let gm = girth_marking(3, m, GirthMode::Targeted).map_err(|e| format!("m = {m}: {e}"))?;
        gm.witnesses.verify().map_err(|e| format!("m = {m}: {e}"))?;
        let probes = gm.witnesses.certificates.iter().map(|c| c.point.clone());
        let cert = certify_girth_with(&TrivialityOracle::new(&gm.marking).with_probes(probes), m);
        ensure!(cert.shortest_relator.is_none(), "m = {m}: relator {:?}", cert.shortest_relator);
        if m <= 4 {
            for u in enumerate_relator_candidates(3, m) {
                ensure!(!gm.marking.evaluate(&u).unwrap().is_identity(), "m = {m}: {u} is a relator");
            }
            within(start.elapsed(), Duration::from_secs(1800))?;
        }
        notes.push(format!("m={m} ({} bp, {:?})", gm.marking.total_breakpoints(), start.elapsed()));
    }
    Ok(notes.join(", "))
}

fn witness_tuples() -> Outcome {
    let words: Vec<Word> = enumerate_reduced(3, 4).collect();
    ensure!(words.len() == 936, "expected 936 words, got {}", words.len());
    let eps = Dyadic::pow2(-6);
    let t = construct_witnesses_multi(&words, &eps, 3).map_err(|e| e.to_string())?;
    let marking = t.marking();
    for (k, u) in marking.maps().iter().enumerate().skip(1) {
        if let Some((_, hi)) = u.support().hull() {
            ensure!(hi < eps, "u_{k} has support {}", u.support());
        }
    }
    let mut failures = 0;
    for u in &words {
        let f = marking.evaluate(u).unwrap();
        let moved = t
            .certificate_for(u)
            .is_some_and(|c| c.point >= Dyadic::zero() && c.point < eps && f.apply(&c.point) != c.point);
        if f.is_identity() || !moved {
            failures += 1;
        }
    }
    ensure!(failures == 0, "{failures} failures");
    Ok(format!("936 words, {} breakpoints", marking.total_breakpoints()))
}

/// Free reduction of the image of `u` under `x -> x, y -> y, d -> x^m y^m`.
fn substituted_reduces_to_empty(u: &Word, m: usize) -> bool {
    let mut stack: Vec<(usize, bool)> = Vec::new();
    let mut push = |g: usize, inv: bool| match stack.last() {
        Some(&(h, i)) if h == g && i != inv => {
            stack.pop();
        }
        _ => stack.push((g, inv)),
    };
    for l in u.letters() {
        let (g, inv) = (l.gen(), l.is_inverse());
        if g < 2 {
            push(g, inv);
            continue;
        }
        let image: Vec<(usize, bool)> = std::iter::repeat(0).take(m).chain(std::iter::repeat(1).take(m)).map(|g| (g, false)).collect();
        if inv {
            image.iter().rev().for_each(|&(g, _)| push(g, true));
        } else {
            image.iter().for_each(|&(g, _)| push(g, false));
        }
    }
    stack.is_empty()
}

fn fact_check() -> Outcome {
    for m in 1..=6 {
        let report = verify_fact(m);
        ensure!(report.holds, "m = {m}: counterexample {:?}", report.counterexample);
        for u in enumerate_reduced(3, m) {
            ensure!(!substituted_reduces_to_empty(&u, m), "m = {m}: oracle finds {u} killed");
        }
    }
    Ok("m = 1..6".into())
}

fn xn_thresholds() -> Outcome {
    let xn = family_xn();
    let b_a = w("b A");
    let c = Word::letter(2);
    for n in 1..=12 {
        let m = xn.marking(n).map_err(|e| e.to_string())?;
        ensure!(m.maps()[2] == x(n), "c_{n} is not x_{n}");
        for (name, rel) in [("R3", r3()), ("R4", r4())] {
            ensure!(m.evaluate(&rel).unwrap().is_identity(), "{name} nontrivial at n = {n}");
        }
    }
    let mut notes = Vec::new();
    for i in 1..=3i64 {
        // x_0^i(1 - 2^-n) = 1 - 2^-(n - i) >= 3/4 exactly when n >= i + 2
        let threshold = i as u64 + 2;
        let rel = Word::commutator(&b_a, &Word::product([&Word::power_of(0, i), &c, &Word::power_of(0, -i)]));
        for n in threshold..=12 {
            ensure!(xn.marking(n).unwrap().evaluate(&rel).unwrap().is_identity(), "i = {i}: nontrivial at n = {n}");
        }
        let sharp = !xn.marking(threshold - 1).unwrap().evaluate(&rel).unwrap().is_identity();
        if i == 1 {
            ensure!(sharp, "[ba^-1, a c a^-1] trivial at n = 2");
        }
        notes.push(format!("i={i}: N={threshold}{}", if sharp { " sharp" } else { "" }));
    }
    Ok(notes.join(", "))
}

fn power_grid() -> Outcome {
    let power = family_power();
    let mut checked = 0;
    let mut violations = Vec::new();
    for n in 1..=6u64 {
        let m = power.marking(n).map_err(|e| e.to_string())?;
        for i in 1..=3i64 {
            for j in 0..=4i64 {
                for k in 0..=4i64 {
                    if j + 2 > n as i64 * i + k + 1 {
                        continue;
                    }
                    // [x_{j+1} x_0^-1, c^-i x_{k+1} c^i] with c = x_0^n
                    let left = x(j as u64 + 1).compose(&x(0).inverse());
                    let ci = x(0).pow(n as i64 * i);
                    let right = ci.inverse().compose(&x(k as u64 + 1)).compose(&ci);
                    let maps_commute = left.compose(&right) == right.compose(&left);
                    let word = Word::commutator(
                        &Word::product([&Word::power_of(0, -j), &w("b"), &Word::power_of(0, j), &w("A")]),
                        &Word::product([&Word::power_of(2, -i), &Word::power_of(0, -k), &w("b"), &Word::power_of(0, k), &Word::power_of(2, i)]),
                    );
                    let word_trivial = m.evaluate(&word).unwrap().is_identity();
                    if !maps_commute || !word_trivial {
                        violations.push(format!("n={n} i={i} j={j} k={k}"));
                    }
                    checked += 1;
                }
            }
        }
    }
    ensure!(violations.is_empty(), "violations: {}", violations.join("; "));
    Ok(format!("{checked} grid points, 0 violations"))
}

fn stabilization() -> Outcome {
    let words: Vec<Word> = enumerate_relator_candidates(3, 5).collect();
    let mut notes = Vec::new();
    for (family, lo, hi) in [(family_power(), 10, 16), (family_xn(), 8, 14)] {
        let reports = stabilization_scan(&words, |n| family.marking_unchecked(n), lo, hi).map_err(|e| e.to_string())?;
        let flips: Vec<String> = reports
            .iter()
            .filter(|r| !r.classification.is_flip_free())
            .map(|r| format!("{} ({})", r.word, r.classification))
            .collect();
        ensure!(flips.is_empty(), "{} family flips: {}", family.name, flips.join("; "));
        notes.push(format!("{} n={lo}..{hi}", family.name));
    }
    Ok(format!("{} classes flip-free: {}", words.len(), notes.join(", ")))
}

fn distance_table() -> Outcome {
    let xn = family_xn();
    let mut r_stars = Vec::new();
    for n in 3..=6 {
        let bound = marked_distance_bound(&xn.marking(n).unwrap(), &xn.marking(n + 1).unwrap(), 6).map_err(|e| e.to_string())?;
        r_stars.push(bound.r_star);
    }
    ensure!(r_stars.windows(2).all(|p| p[0] <= p[1]), "R* not nondecreasing: {r_stars:?}");
    Ok(format!("R* = {r_stars:?}"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("presentation soundness", presentation_soundness),
        ("support formula", support_formula),
        ("normal form oracle equivalence", normal_form_oracle),
        ("homeo_to_word round trip", homeo_word_roundtrip),
        ("standard girth", standard_girth),
        ("large-girth markings", girth_markings),
        ("witness tuples, rank 3, length <= 4", witness_tuples),
        ("free-group fact", fact_check),
        ("xn family thresholds", xn_thresholds),
        ("power family threshold grid", power_grid),
        ("stabilization", stabilization),
        ("distance table", distance_table),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        match outcome {
            Ok(note) => println!("criterion {:>2} PASS  {name}: {note} [{elapsed:.2?}]", k + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {why} [{elapsed:.2?}]", k + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
