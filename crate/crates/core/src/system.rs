//! Linear systems `L(d, m0, m1, ..., mn)` of plane curves with general base
//! points, and their reading as divisor classes `dH - sum mi Ei` on the
//! blow-up of the plane.
//!
//! Slot 0 is always the distinguished point `p0`; slots `1..` form the tail.
//! The tail is kept in the order it was built in. [`LinearSystem::normalize`]
//! sorts it descending and drops zero entries; nothing else reorders it, so
//! slot indices stay meaningful across Cremona moves and curve splittings.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, ParseError, Result, Slot};

/// Upper bound accepted for a degree, multiplicity or run length in the text form.
const MAX_TEXT_VALUE: i64 = 1_000_000;

fn triangular(m: i64) -> i64 {
    m * (m + 1) / 2
}

/// The system of degree-`d` plane curves with multiplicity at least `mi` at `pi`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LinearSystem {
    degree: i64,
    m0: i64,
    tail: Vec<i64>,
}

impl LinearSystem {
    pub fn new(degree: i64, m0: i64, tail: Vec<i64>) -> Result<Self> {
        if degree < 0 {
            return Err(Error::NegativeEntry { slot: Slot::Degree, value: degree });
        }
        if m0 < 0 {
            return Err(Error::NegativeEntry { slot: Slot::Point(0), value: m0 });
        }
        if let Some((i, &m)) = tail.iter().enumerate().find(|(_, &m)| m < 0) {
            return Err(Error::NegativeEntry { slot: Slot::Point(i + 1), value: m });
        }
        Ok(Self { degree, m0, tail })
    }

    /// `L(d, m0, m^n)`.
    pub fn quasi_homogeneous(degree: i64, m0: i64, m: i64, n: usize) -> Result<Self> {
        Self::new(degree, m0, vec![m; n])
    }

    /// Builds a system from a flat slot vector `[m0, m1, ...]`; an empty vector means no points.
    pub fn from_slots(degree: i64, slots: &[i64]) -> Result<Self> {
        match slots.split_first() {
            Some((&m0, tail)) => Self::new(degree, m0, tail.to_vec()),
            None => Self::new(degree, 0, Vec::new()),
        }
    }

    pub fn degree(&self) -> i64 {
        self.degree
    }

    pub fn m0(&self) -> i64 {
        self.m0
    }

    pub fn tail(&self) -> &[i64] {
        &self.tail
    }

    /// Number of slots, `p0` included.
    pub fn slot_count(&self) -> usize {
        1 + self.tail.len()
    }

    /// Multiplicity at slot `i` (0 is `p0`); slots past the end read as 0.
    pub fn mult(&self, i: usize) -> i64 {
        match i {
            0 => self.m0,
            _ => self.tail.get(i - 1).copied().unwrap_or(0),
        }
    }

    /// All multiplicities in slot order, `m0` first.
    pub fn mults(&self) -> impl Iterator<Item = i64> + '_ {
        std::iter::once(self.m0).chain(self.tail.iter().copied())
    }

    pub fn slots(&self) -> Vec<i64> {
        self.mults().collect()
    }

    /// Number of base points with nonzero multiplicity.
    pub fn point_count(&self) -> usize {
        self.mults().filter(|&m| m > 0).count()
    }

    /// Sorted-descending tail with zero entries removed; `m0` stays in place.
    pub fn normalize(&self) -> Self {
        let mut tail: Vec<i64> = self.tail.iter().copied().filter(|&m| m > 0).collect();
        tail.sort_unstable_by(|a, b| b.cmp(a));
        Self { degree: self.degree, m0: self.m0, tail }
    }

    pub fn is_normalized(&self) -> bool {
        self.tail.windows(2).all(|w| w[0] >= w[1]) && self.tail.iter().all(|&m| m > 0)
    }

    /// All nonzero tail multiplicities coincide (zeros are padding).
    pub fn is_quasi_homogeneous(&self) -> bool {
        let mut nonzero = self.tail.iter().filter(|&&m| m > 0);
        match nonzero.next() {
            None => true,
            Some(&first) => nonzero.all(|&m| m == first),
        }
    }

    /// The common tail multiplicity of a quasi-homogeneous system, 0 when the tail is empty.
    pub fn tail_multiplicity(&self) -> Option<i64> {
        self.is_quasi_homogeneous()
            .then(|| self.tail.iter().copied().find(|&m| m > 0).unwrap_or(0))
    }

    /// Count of nonzero tail points.
    pub fn tail_points(&self) -> usize {
        self.tail.iter().filter(|&&m| m > 0).count()
    }

    /// `d(d+3)/2 - sum mi(mi+1)/2`.
    pub fn virtual_dim(&self) -> i64 {
        self.degree * (self.degree + 3) / 2 - self.mults().map(triangular).sum::<i64>()
    }

    /// `max(-1, v)`.
    pub fn expected_dim(&self) -> i64 {
        self.virtual_dim().max(-1)
    }

    /// Dimension of the space of degree-`d` forms, `(d+1)(d+2)/2`.
    pub fn monomial_count(&self) -> i64 {
        (self.degree + 1) * (self.degree + 2) / 2
    }

    /// Number of linear conditions imposed by the points, `sum mi(mi+1)/2`.
    pub fn condition_count(&self) -> i64 {
        self.mults().map(triangular).sum()
    }

    /// `d >= m1 + m2 + m3` for the three largest multiplicities (all slots).
    pub fn is_standard(&self) -> bool {
        let mut m = self.slots();
        m.sort_unstable_by(|a, b| b.cmp(a));
        let top: i64 = m.iter().take(3).sum();
        self.degree >= top
    }

    pub fn class(&self) -> DivisorClass {
        DivisorClass { degree: self.degree, mults: self.slots() }
    }

    /// Pads the tail with zeros up to `slots` total slots.
    pub fn padded(&self, slots: usize) -> Self {
        let mut tail = self.tail.clone();
        if slots > 1 + tail.len() {
            tail.resize(slots - 1, 0);
        }
        Self { degree: self.degree, m0: self.m0, tail }
    }
}

impl fmt::Display for LinearSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_form(f, self.degree, &self.slots())
    }
}

impl FromStr for LinearSystem {
    type Err = ParseError;

    fn from_str(s: &str) -> std::result::Result<Self, ParseError> {
        let (degree, slots) = parse_form(s, false)?;
        LinearSystem::from_slots(degree, &slots).map_err(|e| ParseError {
            input: s.to_string(),
            position: 0,
            message: e.to_string(),
        })
    }
}

impl Serialize for LinearSystem {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for LinearSystem {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// The class `dH - sum mi Ei` in the Picard group of the blow-up. Entries may be negative.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DivisorClass {
    degree: i64,
    mults: Vec<i64>,
}

impl DivisorClass {
    /// `mults[0]` is the coefficient at `E0`.
    pub fn new(degree: i64, mults: Vec<i64>) -> Self {
        Self { degree, mults }
    }

    pub fn zero(slots: usize) -> Self {
        Self { degree: 0, mults: vec![0; slots] }
    }

    pub fn degree(&self) -> i64 {
        self.degree
    }

    pub fn mults(&self) -> &[i64] {
        &self.mults
    }

    pub fn mult(&self, i: usize) -> i64 {
        self.mults.get(i).copied().unwrap_or(0)
    }

    pub fn slot_count(&self) -> usize {
        self.mults.len()
    }

    fn pair(&self, other: &Self) -> impl Iterator<Item = (i64, i64)> + '_ {
        let n = self.mults.len().max(other.mults.len());
        let other = other.mults.clone();
        (0..n).map(move |i| (self.mult(i), other.get(i).copied().unwrap_or(0)))
    }

    /// `d d' - sum mi mi'`; the shorter class is padded with zeros.
    pub fn intersect(&self, other: &Self) -> i64 {
        self.degree * other.degree - self.pair(other).map(|(a, b)| a * b).sum::<i64>()
    }

    pub fn self_intersection(&self) -> i64 {
        self.intersect(self)
    }

    /// `D.K` with `K = -3H + sum Ei`, i.e. `-3d + sum mi`.
    pub fn canonical_intersect(&self) -> i64 {
        -3 * self.degree + self.mults.iter().sum::<i64>()
    }

    /// `(D^2 + D.K)/2 + 1`.
    pub fn arithmetic_genus(&self) -> Result<i64> {
        let twice = self.self_intersection() + self.canonical_intersect();
        if twice % 2 != 0 {
            return Err(Error::GenusParity(twice));
        }
        Ok(twice / 2 + 1)
    }

    /// `D.(D - K)/2`.
    pub fn virtual_dim(&self) -> i64 {
        let twice = self.self_intersection() - self.canonical_intersect();
        debug_assert_eq!(twice % 2, 0);
        twice / 2
    }

    pub fn padded(&self, slots: usize) -> Self {
        let mut mults = self.mults.clone();
        if slots > mults.len() {
            mults.resize(slots, 0);
        }
        Self { degree: self.degree, mults }
    }

    /// Converts back to a linear system; fails on negative entries.
    pub fn to_system(&self) -> Result<LinearSystem> {
        LinearSystem::from_slots(self.degree, &self.mults)
    }

    pub fn is_effective_data(&self) -> bool {
        self.degree >= 0 && self.mults.iter().all(|&m| m >= 0)
    }
}

impl From<&LinearSystem> for DivisorClass {
    fn from(l: &LinearSystem) -> Self {
        l.class()
    }
}

impl Add for &DivisorClass {
    type Output = DivisorClass;

    fn add(self, rhs: Self) -> DivisorClass {
        DivisorClass {
            degree: self.degree + rhs.degree,
            mults: self.pair(rhs).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &DivisorClass {
    type Output = DivisorClass;

    fn sub(self, rhs: Self) -> DivisorClass {
        DivisorClass {
            degree: self.degree - rhs.degree,
            mults: self.pair(rhs).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul<&DivisorClass> for i64 {
    type Output = DivisorClass;

    fn mul(self, rhs: &DivisorClass) -> DivisorClass {
        DivisorClass {
            degree: self * rhs.degree,
            mults: rhs.mults.iter().map(|m| self * m).collect(),
        }
    }
}

impl Neg for &DivisorClass {
    type Output = DivisorClass;

    fn neg(self) -> DivisorClass {
        -1 * self
    }
}

impl fmt::Display for DivisorClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_form(f, self.degree, &self.mults)
    }
}

impl FromStr for DivisorClass {
    type Err = ParseError;

    fn from_str(s: &str) -> std::result::Result<Self, ParseError> {
        let (degree, mut mults) = parse_form(s, true)?;
        if mults.is_empty() {
            mults.push(0);
        }
        Ok(DivisorClass { degree, mults })
    }
}

impl Serialize for DivisorClass {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for DivisorClass {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// `L(d)` when there is nothing but a zero `m0`, otherwise `L(d,m0,<tail runs>)`.
fn write_form(f: &mut fmt::Formatter<'_>, degree: i64, slots: &[i64]) -> fmt::Result {
    write!(f, "L({degree}")?;
    if let Some((&m0, tail)) = slots.split_first() {
        if m0 != 0 || !tail.is_empty() {
            write!(f, ",{m0}")?;
        }
        let mut i = 0;
        while i < tail.len() {
            let run = tail[i..].iter().take_while(|&&m| m == tail[i]).count();
            if run == 1 {
                write!(f, ",{}", tail[i])?;
            } else {
                write!(f, ",{}^{}", tail[i], run)?;
            }
            i += run;
        }
    }
    write!(f, ")")
}

struct Cursor<'a> {
    input: &'a str,
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn error(&self, message: impl Into<String>) -> ParseError {
        ParseError { input: self.input.to_string(), position: self.pos, message: message.into() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.bytes.get(self.pos).copied()
    }

    fn expect(&mut self, c: u8) -> std::result::Result<(), ParseError> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(format!("expected '{}'", c as char)))
        }
    }

    fn integer(&mut self, allow_negative: bool) -> std::result::Result<i64, ParseError> {
        self.skip_ws();
        let start = self.pos;
        let negative = self.bytes.get(self.pos) == Some(&b'-');
        if negative {
            if !allow_negative {
                return Err(self.error("negative values are not allowed here"));
            }
            self.pos += 1;
        }
        let digits_start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos == digits_start {
            self.pos = start;
            return Err(self.error("expected an integer"));
        }
        let value: i64 = self.input[digits_start..self.pos]
            .parse()
            .ok()
            .filter(|v| *v <= MAX_TEXT_VALUE)
            .ok_or_else(|| {
                let mut e = self.error(format!("integer exceeds {MAX_TEXT_VALUE}"));
                e.position = digits_start;
                e
            })?;
        Ok(if negative { -value } else { value })
    }

    fn count(&mut self) -> std::result::Result<usize, ParseError> {
        let braced = self.peek() == Some(b'{');
        if braced {
            self.pos += 1;
        }
        let at = self.pos;
        let n = self.integer(false)?;
        if n == 0 {
            let mut e = self.error("run length must be at least 1");
            e.position = at;
            return Err(e);
        }
        if braced {
            self.expect(b'}')?;
        }
        Ok(n as usize)
    }
}

/// Grammar: `L(` d (`,` mult (`^` count)?)* `)`; counts may be braced, `6^{12}`.
fn parse_form(input: &str, allow_negative: bool) -> std::result::Result<(i64, Vec<i64>), ParseError> {
    let mut c = Cursor { input, bytes: input.as_bytes(), pos: 0 };
    c.expect(b'L')?;
    c.expect(b'(')?;
    let degree = c.integer(allow_negative)?;
    let mut slots = Vec::new();
    loop {
        match c.peek() {
            Some(b',') => {
                c.pos += 1;
                let m = c.integer(allow_negative)?;
                let run = if c.peek() == Some(b'^') {
                    c.pos += 1;
                    c.count()?
                } else {
                    1
                };
                if slots.len() + run > MAX_TEXT_VALUE as usize {
                    return Err(c.error("too many points"));
                }
                slots.extend(std::iter::repeat_n(m, run));
            }
            Some(b')') => {
                c.pos += 1;
                break;
            }
            _ => return Err(c.error("expected ',' or ')'")),
        }
    }
    if c.peek().is_some() {
        return Err(c.error("unexpected trailing input"));
    }
    Ok((degree, slots))
}

/// Parses with a richer error type; convenience for callers already in [`Result`].
pub fn parse_system(s: &str) -> Result<LinearSystem> {
    Ok(s.parse::<LinearSystem>()?)
}
