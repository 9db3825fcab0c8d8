//! Elements of Thompson's group F as exact piecewise-linear homeomorphisms of `[0, 1]`.
//!
//! A map is stored as its breakpoint list, endpoints included, with every
//! interior breakpoint a genuine change of slope. Composition follows the
//! usual function convention: `f.compose(&g)` is `x -> f(g(x))`.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dyadic::Dyadic;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PlError {
    #[error("a map needs at least two breakpoints")]
    TooFewPoints,
    #[error("breakpoints must start at (0,0) and end at (1,1)")]
    Endpoints,
    #[error("breakpoint coordinates must be strictly increasing (at index {0})")]
    NotIncreasing(usize),
    #[error("slope of segment {0} is not a power of two")]
    SlopeNotPowerOfTwo(usize),
    #[error("point {0} lies outside [0,1]")]
    OutOfRange(Dyadic),
    #[error("partitions have different lengths ({0} vs {1})")]
    PartitionLength(usize, usize),
    #[error("partition is not strictly increasing")]
    PartitionNotMonotone,
    #[error("partition must run from 0 to 1")]
    PartitionEndpoints,
    #[error("degenerate interval [{0}, {1}]")]
    DegenerateInterval(Dyadic, Dyadic),
    #[error("local pieces overlap or escape their intervals")]
    BadPieces,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Endpoint {
    Zero,
    One,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Point {
    pub x: Dyadic,
    pub y: Dyadic,
}

impl Point {
    pub fn new(x: Dyadic, y: Dyadic) -> Self {
        Point { x, y }
    }

    fn diag(v: Dyadic) -> Self {
        Point { x: v.clone(), y: v }
    }

    fn on_diagonal(&self) -> bool {
        self.x == self.y
    }
}

/// A standard dyadic interval `[start, start + 2^-level]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct StdInterval {
    pub start: Dyadic,
    pub level: u64,
}

impl StdInterval {
    fn halves(&self) -> [StdInterval; 2] {
        let level = self.level + 1;
        let mid = &self.start + &Dyadic::pow2(-(level as i64));
        [StdInterval { start: self.start.clone(), level }, StdInterval { start: mid, level }]
    }

    pub fn is_standard(lo: &Dyadic, hi: &Dyadic) -> Option<u64> {
        let len = hi - lo;
        let k = len.log2_exact()?;
        if k > 0 || !lo.is_multiple_of_pow2_neg(-k) {
            return None;
        }
        Some((-k) as u64)
    }
}

/// Greedy cover of `[lo, hi]` (inside `[0,1]`) by maximal standard dyadic intervals.
pub(crate) fn standard_pieces(lo: &Dyadic, hi: &Dyadic) -> Vec<StdInterval> {
    let mut out = Vec::new();
    let mut c = lo.clone();
    while &c < hi {
        let mut level = c.denominator_exp();
        loop {
            let end = &c + &Dyadic::pow2(-(level as i64));
            if &end <= hi {
                out.push(StdInterval { start: c, level });
                c = end;
                break;
            }
            level += 1;
        }
    }
    out
}

/// Halves the largest (leftmost among equals) piece until there are `n` pieces.
fn refine_to(mut pieces: Vec<StdInterval>, n: usize) -> Vec<StdInterval> {
    while pieces.len() < n {
        let (idx, _) = pieces
            .iter()
            .enumerate()
            .min_by_key(|(i, p)| (p.level, *i))
            .expect("nonempty piece list");
        let [l, r] = pieces[idx].halves();
        pieces.splice(idx..=idx, [l, r]);
    }
    pieces
}

fn slope_exponent(a: &Point, b: &Point) -> Option<i64> {
    let dx = &b.x - &a.x;
    let dy = &b.y - &a.y;
    let (ox, vx) = dx.two_adic()?;
    let (oy, vy) = dy.two_adic()?;
    (ox == oy).then_some(vy - vx)
}

/// A PL bijection between two intervals with power-of-two slopes.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub(crate) struct RawPl {
    points: Vec<Point>,
    slopes: Vec<i64>,
}

impl RawPl {
    fn checked(points: Vec<Point>) -> Result<Self, PlError> {
        if points.len() < 2 {
            return Err(PlError::TooFewPoints);
        }
        let mut slopes = Vec::with_capacity(points.len() - 1);
        for (i, w) in points.windows(2).enumerate() {
            if w[0].x >= w[1].x || w[0].y >= w[1].y {
                return Err(PlError::NotIncreasing(i + 1));
            }
            slopes.push(slope_exponent(&w[0], &w[1]).ok_or(PlError::SlopeNotPowerOfTwo(i))?);
        }
        Ok(RawPl { points, slopes }.canonical())
    }

    fn canonical(self) -> Self {
        if self.slopes.windows(2).all(|w| w[0] != w[1]) {
            return self;
        }
        let RawPl { points, slopes } = self;
        let n = points.len();
        let mut out_p = Vec::with_capacity(n);
        let mut out_s: Vec<i64> = Vec::with_capacity(n);
        for (i, p) in points.into_iter().enumerate() {
            if i > 0 && i < n - 1 && slopes[i - 1] == slopes[i] {
                continue;
            }
            if i < n - 1 {
                out_s.push(slopes[i]);
            }
            out_p.push(p);
        }
        RawPl { points: out_p, slopes: out_s }
    }

    fn identity_on(lo: Dyadic, hi: Dyadic) -> Self {
        RawPl { points: vec![Point::diag(lo), Point::diag(hi)], slopes: vec![0] }
    }

    fn inverse(&self) -> Self {
        RawPl {
            points: self.points.iter().map(|p| Point::new(p.y.clone(), p.x.clone())).collect(),
            slopes: self.slopes.iter().map(|s| -s).collect(),
        }
    }

    fn segment_of(&self, x: &Dyadic) -> usize {
        let idx = self.points.partition_point(|p| &p.x <= x);
        idx.saturating_sub(1).min(self.points.len() - 2)
    }

    fn eval_in(&self, seg: usize, x: &Dyadic) -> Dyadic {
        let p = &self.points[seg];
        &p.y + &(x - &p.x).mul_pow2(self.slopes[seg])
    }

    fn eval(&self, x: &Dyadic) -> Dyadic {
        self.eval_in(self.segment_of(x), x)
    }

    fn eval_inverse(&self, y: &Dyadic) -> Dyadic {
        let idx = self.points.partition_point(|p| &p.y <= y);
        let seg = idx.saturating_sub(1).min(self.points.len() - 2);
        let p = &self.points[seg];
        &p.x + &(y - &p.y).mul_pow2(-self.slopes[seg])
    }

    /// `self ∘ g`, where the range of `g` is the domain of `self`.
    fn compose(&self, g: &RawPl) -> RawPl {
        let f = self;
        let f_last = f.points.len() - 1;
        let mut points = Vec::with_capacity(f.points.len() + g.points.len());
        let mut slopes = Vec::with_capacity(f.points.len() + g.points.len());
        let mut j = 0usize;
        for i in 0..g.points.len() - 1 {
            let gp = &g.points[i];
            let s = g.slopes[i];
            while j + 1 < f_last && f.points[j + 1].x <= gp.y {
                j += 1;
            }
            points.push(Point::new(gp.x.clone(), f.eval_in(j, &gp.y)));
            slopes.push(s + f.slopes[j]);
            let next_y = &g.points[i + 1].y;
            let mut t = j + 1;
            while t < f_last && &f.points[t].x < next_y {
                let fp = &f.points[t];
                let x = &gp.x + &(&fp.x - &gp.y).mul_pow2(-s);
                points.push(Point::new(x, fp.y.clone()));
                slopes.push(s + f.slopes[t]);
                t += 1;
            }
            j = t - 1;
        }
        let last = g.points.last().expect("nonempty");
        points.push(Point::new(last.x.clone(), f.points[f_last].y.clone()));
        RawPl { points, slopes }.canonical()
    }

    /// Order-preserving PL map sending `xs[i]` to `ys[i]`, identity on any
    /// subinterval whose two endpoints are both fixed.
    fn through(xs: &[Dyadic], ys: &[Dyadic]) -> RawPl {
        let mut points = Vec::new();
        for i in 1..xs.len() {
            let (x0, x1, y0, y1) = (&xs[i - 1], &xs[i], &ys[i - 1], &ys[i]);
            if x0 == y0 && x1 == y1 {
                points.push(Point::diag(x0.clone()));
                continue;
            }
            let dom = standard_pieces(x0, x1);
            let ran = standard_pieces(y0, y1);
            let n = dom.len().max(ran.len());
            let dom = refine_to(dom, n);
            let ran = refine_to(ran, n);
            for (d, r) in dom.into_iter().zip(ran) {
                points.push(Point::new(d.start, r.start));
            }
        }
        points.push(Point::new(xs[xs.len() - 1].clone(), ys[ys.len() - 1].clone()));
        RawPl::checked(points).expect("standard pieces give power-of-two slopes")
    }

    /// A PL bijection `[0,1] -> [a,b]` with dyadic breakpoints.
    fn unit_onto(a: &Dyadic, b: &Dyadic) -> RawPl {
        if let Some(level) = StdInterval::is_standard(a, b) {
            return RawPl {
                points: vec![Point::new(Dyadic::zero(), a.clone()), Point::new(Dyadic::one(), b.clone())],
                slopes: vec![-(level as i64)],
            };
        }
        let ran = standard_pieces(a, b);
        let dom = refine_to(vec![StdInterval { start: Dyadic::zero(), level: 0 }], ran.len());
        let mut points: Vec<Point> =
            dom.into_iter().zip(ran).map(|(d, r)| Point::new(d.start, r.start)).collect();
        points.push(Point::new(Dyadic::one(), b.clone()));
        RawPl::checked(points).expect("standard pieces give power-of-two slopes")
    }
}

/// An element of Thompson's group F.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PLMap {
    raw: RawPl,
}

impl PLMap {
    pub fn identity() -> Self {
        PLMap { raw: RawPl::identity_on(Dyadic::zero(), Dyadic::one()) }
    }

    /// Builds a map from its breakpoints, validating and canonicalizing.
    pub fn from_points(points: Vec<(Dyadic, Dyadic)>) -> Result<Self, PlError> {
        let points: Vec<Point> = points.into_iter().map(|(x, y)| Point::new(x, y)).collect();
        Self::from_point_list(points)
    }

    fn from_point_list(points: Vec<Point>) -> Result<Self, PlError> {
        if points.len() < 2 {
            return Err(PlError::TooFewPoints);
        }
        let first = &points[0];
        let last = &points[points.len() - 1];
        if !first.x.is_zero() || !first.y.is_zero() || last.x != Dyadic::one() || last.y != Dyadic::one() {
            return Err(PlError::Endpoints);
        }
        Ok(PLMap { raw: RawPl::checked(points)? })
    }

    /// The generator `x_n` of the infinite presentation.
    pub fn generator(n: u64) -> Self {
        let x0 = PLMap {
            raw: RawPl {
                points: vec![
                    Point::diag(Dyadic::zero()),
                    Point::new(Dyadic::frac(1, 1), Dyadic::frac(1, 2)),
                    Point::new(Dyadic::frac(3, 2), Dyadic::frac(1, 1)),
                    Point::diag(Dyadic::one()),
                ],
                slopes: vec![-1, 0, 1],
            },
        };
        if n == 0 {
            return x0;
        }
        let a = &Dyadic::one() - &Dyadic::pow2(-(n as i64));
        x0.rescale_into(&a, &Dyadic::one()).expect("nondegenerate interval")
    }

    pub fn points(&self) -> &[Point] {
        &self.raw.points
    }

    /// Breakpoints as coordinate pairs, endpoints included.
    pub fn breakpoints(&self) -> Vec<(Dyadic, Dyadic)> {
        self.raw.points.iter().map(|p| (p.x.clone(), p.y.clone())).collect()
    }

    /// Slope exponents of the affine pieces, left to right.
    pub fn slopes(&self) -> &[i64] {
        &self.raw.slopes
    }

    pub fn num_breakpoints(&self) -> usize {
        self.raw.points.len()
    }

    pub fn is_identity(&self) -> bool {
        self.raw.points.len() == 2
    }

    /// `self ∘ g`.
    pub fn compose(&self, g: &PLMap) -> PLMap {
        PLMap { raw: self.raw.compose(&g.raw) }
    }

    pub fn inverse(&self) -> PLMap {
        PLMap { raw: self.raw.inverse() }
    }

    pub fn pow(&self, e: i64) -> PLMap {
        let base = if e < 0 { self.inverse() } else { self.clone() };
        let mut acc = PLMap::identity();
        for _ in 0..e.unsigned_abs() {
            acc = acc.compose(&base);
        }
        acc
    }

    pub fn evaluate(&self, x: &Dyadic) -> Result<Dyadic, PlError> {
        check_unit(x)?;
        Ok(self.raw.eval(x))
    }

    /// Evaluation without the range check; `x` must lie in `[0,1]`.
    pub fn apply(&self, x: &Dyadic) -> Dyadic {
        self.raw.eval(x)
    }

    pub fn apply_inverse(&self, y: &Dyadic) -> Dyadic {
        self.raw.eval_inverse(y)
    }

    /// Closure of the set of moved points.
    pub fn support(&self) -> SupportSet {
        let mut intervals: Vec<(Dyadic, Dyadic)> = Vec::new();
        for w in self.raw.points.windows(2) {
            if w[0].on_diagonal() && w[1].on_diagonal() {
                continue;
            }
            match intervals.last_mut() {
                Some(last) if last.1 == w[0].x => last.1 = w[1].x.clone(),
                _ => intervals.push((w[0].x.clone(), w[1].x.clone())),
            }
        }
        SupportSet { intervals }
    }

    /// Exponent `s` of the slope `2^s` of the first or last affine piece.
    pub fn slope_at_endpoint(&self, which: Endpoint) -> i64 {
        match which {
            Endpoint::Zero => self.raw.slopes[0],
            Endpoint::One => *self.raw.slopes.last().expect("at least one piece"),
        }
    }

    /// Some element `f` with `f(xs[i]) = ys[i]` for every `i`, acting as the
    /// identity on each `[xs[i-1], xs[i]]` whose endpoints are both fixed.
    pub fn from_partitions(xs: &[Dyadic], ys: &[Dyadic]) -> Result<PLMap, PlError> {
        if xs.len() != ys.len() {
            return Err(PlError::PartitionLength(xs.len(), ys.len()));
        }
        for part in [xs, ys] {
            if part.len() < 2 || !part[0].is_zero() || part[part.len() - 1] != Dyadic::one() {
                return Err(PlError::PartitionEndpoints);
            }
            if part.windows(2).any(|w| w[0] >= w[1]) {
                return Err(PlError::PartitionNotMonotone);
            }
        }
        Ok(PLMap { raw: RawPl::through(xs, ys) })
    }

    /// The copy of `self` conjugated into `[a, b]` and extended by the identity.
    pub fn rescale_into(&self, a: &Dyadic, b: &Dyadic) -> Result<PLMap, PlError> {
        if a >= b {
            return Err(PlError::DegenerateInterval(a.clone(), b.clone()));
        }
        check_unit(a)?;
        check_unit(b)?;
        let psi = RawPl::unit_onto(a, b);
        let inner = psi.compose(&self.raw.compose(&psi.inverse()));
        Ok(PLMap::from_local_pieces(vec![inner]).expect("conjugate preserves [a,b]"))
    }

    /// Glues maps of subintervals (each fixing its own endpoints) into one
    /// element that is the identity off their union.
    pub(crate) fn from_local_pieces(pieces: Vec<RawPl>) -> Result<PLMap, PlError> {
        let mut points: Vec<Point> = vec![Point::diag(Dyadic::zero())];
        let mut slopes: Vec<i64> = Vec::new();
        for piece in pieces {
            let first = &piece.points[0];
            let last = &piece.points[piece.points.len() - 1];
            if !first.on_diagonal() || !last.on_diagonal() {
                return Err(PlError::BadPieces);
            }
            let prev = points.last().expect("nonempty");
            if first.x < prev.x {
                return Err(PlError::BadPieces);
            }
            if first.x > prev.x {
                slopes.push(0);
                points.push(first.clone());
            }
            let RawPl { points: pp, slopes: ps } = piece;
            points.extend(pp.into_iter().skip(1));
            slopes.extend(ps);
        }
        let prev = points.last().expect("nonempty");
        if prev.x > Dyadic::one() {
            return Err(PlError::BadPieces);
        }
        if prev.x < Dyadic::one() {
            slopes.push(0);
            points.push(Point::diag(Dyadic::one()));
        }
        Ok(PLMap { raw: RawPl { points, slopes }.canonical() })
    }

    /// Whether some point of the half-open interval `[lo, hi)` is moved.
    pub fn moves_point_in(&self, lo: &Dyadic, hi: &Dyadic) -> bool {
        self.support().intervals().iter().any(|(a, b)| a < hi && b > lo)
    }
}

/// A PL map on the subinterval `[lo, hi]` hitting the prescribed pairs,
/// identity where nothing is prescribed. Pairs must be order-consistent and
/// interior to the interval.
pub(crate) fn local_map_through(
    lo: &Dyadic,
    hi: &Dyadic,
    pairs: &mut [(Dyadic, Dyadic)],
) -> Result<RawPl, PlError> {
    pairs.sort();
    let mut xs = vec![lo.clone()];
    let mut ys = vec![lo.clone()];
    for (z, w) in pairs.iter() {
        xs.push(z.clone());
        ys.push(w.clone());
    }
    xs.push(hi.clone());
    ys.push(hi.clone());
    for part in [&xs, &ys] {
        if part.windows(2).any(|w| w[0] >= w[1]) {
            return Err(PlError::PartitionNotMonotone);
        }
    }
    Ok(RawPl::through(&xs, &ys))
}

fn check_unit(x: &Dyadic) -> Result<(), PlError> {
    if x.is_negative() || x > &Dyadic::one() {
        Err(PlError::OutOfRange(x.clone()))
    } else {
        Ok(())
    }
}

impl fmt::Debug for PLMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("PLMap[")?;
        for (i, p) in self.raw.points.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "({}, {})", p.x, p.y)?;
        }
        f.write_str("]")
    }
}

#[derive(Serialize, Deserialize)]
struct PLMapRepr {
    breakpoints: Vec<(Dyadic, Dyadic)>,
}

impl Serialize for PLMap {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        PLMapRepr { breakpoints: self.breakpoints() }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for PLMap {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let repr = PLMapRepr::deserialize(deserializer)?;
        PLMap::from_points(repr.breakpoints).map_err(serde::de::Error::custom)
    }
}

/// Closure of the moved set, as disjoint closed intervals in increasing order.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SupportSet {
    intervals: Vec<(Dyadic, Dyadic)>,
}

impl SupportSet {
    pub fn intervals(&self) -> &[(Dyadic, Dyadic)] {
        &self.intervals
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    /// Smallest closed interval containing the support.
    pub fn hull(&self) -> Option<(Dyadic, Dyadic)> {
        Some((self.intervals.first()?.0.clone(), self.intervals.last()?.1.clone()))
    }

    pub fn within(&self, lo: &Dyadic, hi: &Dyadic) -> bool {
        self.intervals.iter().all(|(a, b)| a >= lo && b <= hi)
    }

    /// True when no interval of `self` overlaps an interval of `other` in
    /// more than an endpoint.
    pub fn interiors_disjoint(&self, other: &SupportSet) -> bool {
        self.intervals
            .iter()
            .all(|(a, b)| other.intervals.iter().all(|(c, d)| b <= c || d <= a))
    }

    /// Image of the set under an increasing homeomorphism.
    pub fn image_under(&self, f: &PLMap) -> SupportSet {
        SupportSet { intervals: self.intervals.iter().map(|(a, b)| (f.apply(a), f.apply(b))).collect() }
    }
}

impl fmt::Display for SupportSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.intervals.is_empty() {
            return f.write_str("{}");
        }
        for (i, (a, b)) in self.intervals.iter().enumerate() {
            if i > 0 {
                f.write_str(" u ")?;
            }
            write!(f, "[{}, {}]", a, b)?;
        }
        Ok(())
    }
}
