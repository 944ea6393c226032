//! The classification of (-1)-special systems `L(d,m0,6^n)` and the list of
//! low-degree exceptions, with CSV/JSON export and verification.

use std::fmt;
use std::io;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::neg_curves::{hh_dimension, is_minus_one_special};
use crate::oracle::{dimension_char_p, DEFAULT_PRIME, DEFAULT_TRIALS};
use crate::system::LinearSystem;

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// `(d_coef * d + n_coef * n + c) / den` with `den > 0` and the fraction in lowest terms.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Affine {
    pub d: i64,
    pub n: i64,
    pub c: i64,
    pub den: i64,
}

impl Affine {
    pub fn new(d: i64, n: i64, c: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        let s = den.signum();
        let g = gcd(gcd(gcd(d, n), c), den).max(1);
        Self { d: s * d / g, n: s * n / g, c: s * c / g, den: s * den / g }
    }

    pub fn integer(d: i64, n: i64, c: i64) -> Self {
        Self::new(d, n, c, 1)
    }

    /// Numerator at `(d, n)`; the value is this over `den`.
    pub fn numerator_at(&self, d: i64, n: i64) -> i64 {
        self.d * d + self.n * n + self.c
    }

    /// The value at `(d, n)` when it is an integer.
    pub fn eval(&self, d: i64, n: i64) -> Option<i64> {
        let num = self.numerator_at(d, n);
        (num % self.den == 0).then_some(num / self.den)
    }

    /// Whether `value >= self(d, n)`.
    pub fn is_at_most(&self, value: i64, d: i64, n: i64) -> bool {
        value * self.den >= self.numerator_at(d, n)
    }

    fn numerator_text(&self) -> String {
        let mut out = String::new();
        for (k, var) in [(self.d, "d"), (self.n, "n"), (self.c, "")] {
            if k == 0 {
                continue;
            }
            if k > 0 && !out.is_empty() {
                out.push('+');
            }
            match (k, var) {
                (1, v) if !v.is_empty() => out.push_str(v),
                (-1, v) if !v.is_empty() => {
                    out.push('-');
                    out.push_str(v)
                }
                (k, v) => out.push_str(&format!("{k}{v}")),
            }
        }
        if out.is_empty() {
            out.push('0');
        }
        out
    }
}

impl fmt::Display for Affine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let num = self.numerator_text();
        let terms = [self.d, self.n, self.c].iter().filter(|&&k| k != 0).count();
        match (self.den, terms) {
            (1, _) => f.write_str(&num),
            (den, 0 | 1) => write!(f, "{num}/{den}"),
            (den, _) => write!(f, "({num})/{den}"),
        }
    }
}

impl FromStr for Affine {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |why: &str| Error::Table(format!("malformed formula {s:?}: {why}"));
        let s = s.trim();
        let (num, den) = match s.rsplit_once('/') {
            Some((num, den)) => {
                let den: i64 = den.trim().parse().map_err(|_| bad("denominator"))?;
                let num = num.trim();
                let num = num.strip_prefix('(').and_then(|x| x.strip_suffix(')')).unwrap_or(num);
                (num, den)
            }
            None => (s, 1),
        };
        if den <= 0 {
            return Err(bad("denominator"));
        }
        let (mut cd, mut cn, mut cc) = (0, 0, 0);
        let bytes = num.as_bytes();
        let mut i = 0;
        while i < bytes.len() {
            let mut sign = 1;
            match bytes[i] {
                b'+' => i += 1,
                b'-' => {
                    sign = -1;
                    i += 1
                }
                _ if i > 0 => return Err(bad("expected a sign between terms")),
                _ => {}
            }
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let coef: Option<i64> = (i > start).then(|| num[start..i].parse()).transpose().map_err(|_| bad("coefficient"))?;
            let var = bytes.get(i).copied().filter(|b| b.is_ascii_alphabetic());
            if var.is_some() {
                i += 1;
            }
            match (var, coef) {
                (Some(b'd'), k) => cd += sign * k.unwrap_or(1),
                (Some(b'n'), k) => cn += sign * k.unwrap_or(1),
                (None, Some(k)) => cc += sign * k,
                _ => return Err(bad("unexpected term")),
            }
        }
        Ok(Affine::new(cd, cn, cc, den))
    }
}

/// `a * e + b` written in the variable `e`.
fn linear_text(a: i64, b: i64) -> String {
    let mut out = match a {
        0 => String::new(),
        1 => "e".into(),
        -1 => "-e".into(),
        a => format!("{a}e"),
    };
    if b != 0 || out.is_empty() {
        if b > 0 && !out.is_empty() {
            out.push('+');
        }
        out.push_str(&b.to_string());
    }
    out
}

/// A row or family of rows of the classification.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Template {
    /// `L(a e + b, a e + b - x, 6^{2e})` for `e_min <= e <= e_max`.
    EFamily { x: i64, d: (i64, i64), v: (i64, i64), ell: (i64, i64), e_min: i64, e_max: Option<i64> },
    /// `L(d, d - x, 6^n)` for `n >= 1` and `d >= bound(n)`. On `boundary`
    /// instances (`n` even and `d = boundary(n)`) the dimension exceeds `ell`.
    TwoParameter { x: i64, v: Affine, ell: Affine, bound: Affine, boundary: Option<Affine> },
    Sporadic { system: LinearSystem, v: i64, ell: i64 },
}

impl Template {
    pub fn x(&self) -> i64 {
        match self {
            Template::EFamily { x, .. } | Template::TwoParameter { x, .. } => *x,
            Template::Sporadic { system, .. } => system.degree() - system.m0(),
        }
    }

    /// Table order: by `d - m0`, then e-families by constant term, the
    /// two-parameter family, and sporadic rows by degree.
    pub fn sort_key(&self) -> (i64, u8, i64, usize) {
        match self {
            Template::EFamily { x, d, .. } => (*x, 0, d.1, 0),
            Template::TwoParameter { x, .. } => (*x, 1, 0, 0),
            Template::Sporadic { system, .. } => (self.x(), 2, system.degree(), system.point_count()),
        }
    }

    pub fn family_text(&self) -> String {
        match self {
            Template::EFamily { x, d, .. } => {
                format!("L({},{},6^2e)", linear_text(d.0, d.1), linear_text(d.0, d.1 - x))
            }
            Template::TwoParameter { x, .. } if *x == 0 => "L(d,d,6^n)".into(),
            Template::TwoParameter { x, .. } => format!("L(d,d-{x},6^n)"),
            Template::Sporadic { .. } => String::new(),
        }
    }

    /// The system at parameter `e` of an e-family.
    pub fn member(&self, e: i64) -> Option<LinearSystem> {
        let Template::EFamily { x, d, e_min, e_max, .. } = self else { return None };
        if e < *e_min || e_max.is_some_and(|hi| e > hi) {
            return None;
        }
        let deg = d.0 * e + d.1;
        LinearSystem::quasi_homogeneous(deg, deg - x, 6, 2 * e as usize).ok()
    }

    /// The tabulated dimension of `l` when this template covers it.
    pub fn ell_of(&self, l: &LinearSystem) -> Option<i64> {
        let l = l.normalize();
        if l.tail_points() > 0 && l.tail_multiplicity() != Some(6) {
            return None;
        }
        let (deg, m0, n) = (l.degree(), l.m0(), l.tail_points() as i64);
        match self {
            Template::EFamily { ell, .. } => {
                if n % 2 != 0 || n == 0 {
                    return None;
                }
                let e = n / 2;
                (self.member(e).as_ref() == Some(&l)).then_some(ell.0 * e + ell.1)
            }
            Template::TwoParameter { x, ell, bound, .. } => {
                (deg - m0 == *x && n >= 1 && bound.is_at_most(deg, 0, n)).then(|| ell.eval(deg, n)).flatten()
            }
            Template::Sporadic { system, ell, .. } => (system == &l).then_some(*ell),
        }
    }

    /// Rows for this template, instantiating e-families up to `e_max`.
    pub fn rows(&self, e_max: i64) -> Vec<ClassificationRow> {
        let x = self.x();
        match self {
            Template::EFamily { v, ell, e_min, e_max: hi, .. } => {
                let range = match hi {
                    Some(hi) => format!("{e_min} <= e <= {hi}"),
                    None => format!("e >= {e_min}"),
                };
                let top = hi.map_or(e_max, |hi| hi.min(e_max));
                (*e_min..=top)
                    .map(|e| ClassificationRow {
                        d_minus_m0: x,
                        family: self.family_text(),
                        param: Some(e),
                        system: self.member(e).expect("in range").to_string(),
                        v: (v.0 * e + v.1).to_string(),
                        ell: (ell.0 * e + ell.1).to_string(),
                        range: range.clone(),
                        boundary_case: String::new(),
                    })
                    .collect()
            }
            Template::TwoParameter { v, ell, bound, boundary, .. } => {
                let low = Affine::new(0, 0, bound.numerator_at(0, 1), bound.den);
                vec![ClassificationRow {
                    d_minus_m0: x,
                    family: self.family_text(),
                    param: None,
                    system: self.family_text(),
                    v: v.to_string(),
                    ell: ell.to_string(),
                    range: format!("d >= {bound} >= {low}"),
                    boundary_case: boundary.map(|b| format!("d = {b}, n even")).unwrap_or_default(),
                }]
            }
            Template::Sporadic { system, v, ell } => vec![ClassificationRow {
                d_minus_m0: x,
                family: String::new(),
                param: None,
                system: system.to_string(),
                v: v.to_string(),
                ell: ell.to_string(),
                range: String::new(),
                boundary_case: String::new(),
            }],
        }
    }
}

/// One line of the classification table.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassificationRow {
    pub d_minus_m0: i64,
    /// Template of the family the row belongs to; empty for sporadic rows.
    pub family: String,
    /// Value of `e` for e-family rows.
    pub param: Option<i64>,
    /// A concrete system, or the template of a two-parameter family.
    pub system: String,
    pub v: String,
    pub ell: String,
    pub range: String,
    pub boundary_case: String,
}

/// A concrete system covered by a row.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    pub system: LinearSystem,
    pub v: i64,
    pub ell: i64,
    /// Only `dimension >= ell` is claimed.
    pub at_least: bool,
}

impl ClassificationRow {
    pub fn is_symbolic(&self) -> bool {
        self.system.contains('d')
    }

    /// The concrete systems the row stands for: itself, or for a two-parameter
    /// row every in-range `(d, n)` with `d <= max_degree` and `n <= max_points`.
    pub fn instances(&self, max_degree: i64, max_points: usize) -> Result<Vec<Instance>> {
        if !self.is_symbolic() {
            let system: LinearSystem = self.system.parse()?;
            let num = |s: &str| s.parse::<i64>().map_err(|_| Error::Table(format!("malformed value {s:?}")));
            return Ok(vec![Instance { system, v: num(&self.v)?, ell: num(&self.ell)?, at_least: false }]);
        }
        let v: Affine = self.v.parse()?;
        let ell: Affine = self.ell.parse()?;
        let bound: Affine = self
            .range
            .strip_prefix("d >= ")
            .and_then(|r| r.split(" >= ").next())
            .ok_or_else(|| Error::Table(format!("malformed range {:?}", self.range)))?
            .parse()?;
        let boundary: Option<Affine> = match self.boundary_case.as_str() {
            "" => None,
            b => Some(
                b.strip_prefix("d = ")
                    .and_then(|b| b.strip_suffix(", n even"))
                    .ok_or_else(|| Error::Table(format!("malformed boundary case {b:?}")))?
                    .parse()?,
            ),
        };
        let x = self.d_minus_m0;
        let mut out = Vec::new();
        for n in 1..=max_points as i64 {
            for d in x.max(0)..=max_degree {
                if !bound.is_at_most(d, 0, n) {
                    continue;
                }
                let (Some(vv), Some(ll)) = (v.eval(d, n), ell.eval(d, n)) else {
                    return Err(Error::Table(format!("non-integral formula value at d={d}, n={n}")));
                };
                let at_least = boundary.is_some_and(|b| n % 2 == 0 && b.eval(0, n) == Some(d));
                out.push(Instance { system: LinearSystem::quasi_homogeneous(d, d - x, 6, n as usize)?, v: vv, ell: ll, at_least });
            }
        }
        Ok(out)
    }
}

/// The classification of (-1)-special systems `L(d,m0,6^n)` as published.
pub fn theorem2_templates() -> Vec<Template> {
    use Template::*;
    let e = |x, d, v, ell, hi| EFamily { x, d, v, ell, e_min: 1, e_max: hi };
    let two = |x, v: [i64; 3], ell: [i64; 3], bound: [i64; 3], boundary: Option<Affine>| TwoParameter {
        x,
        v: Affine::integer(v[0], v[1], v[2]),
        ell: Affine::integer(ell[0], ell[1], ell[2]),
        bound: Affine::new(0, bound[0], bound[1], bound[2]),
        boundary,
    };
    let s = |sys: &str, v, ell| Sporadic { system: sys.parse().expect("valid system"), v, ell };
    vec![
        two(0, [1, -21, 0], [1, -6, 0], [6, 0, 1], None),
        two(1, [2, -21, 0], [2, -11, 0], [11, 0, 2], None),
        e(2, (10, 0), (-12, -1), (0, 0), None),
        two(2, [3, -21, -1], [3, -15, -1], [15, 1, 3], None),
        e(3, (9, 0), (-6, -3), (0, 0), None),
        e(3, (9, 1), (-6, 1), (0, 2), None),
        two(3, [4, -21, -3], [4, -18, -3], [18, 3, 4], Some(Affine::new(0, 9, 2, 2))),
        e(4, (8, 0), (-2, -6), (0, 0), None),
        e(4, (8, 1), (-2, -1), (0, 2), None),
        e(4, (8, 2), (-2, 4), (0, 5), None),
        two(4, [5, -21, -6], [5, -20, -6], [20, 6, 5], Some(Affine::new(0, 4, 2, 1))),
        e(5, (7, 0), (0, -10), (0, 0), None),
        e(5, (7, 1), (0, -4), (0, 2), None),
        e(5, (7, 2), (0, 2), (0, 5), None),
        e(5, (7, 3), (0, 8), (0, 9), None),
        e(6, (6, 0), (0, -15), (0, 0), None),
        e(6, (6, 1), (0, -8), (0, 2), None),
        e(6, (6, 2), (0, -1), (0, 5), None),
        e(6, (6, 3), (0, 6), (0, 9), None),
        e(6, (6, 4), (0, 13), (0, 14), None),
        e(7, (5, 2), (-2, -5), (-2, 5), Some(2)),
        e(7, (5, 3), (-2, 3), (-2, 9), Some(4)),
        e(7, (5, 4), (-2, 11), (-2, 14), Some(7)),
        e(7, (5, 5), (-2, 19), (-2, 20), Some(10)),
        e(8, (4, 4), (-6, 8), (-6, 14), Some(2)),
        e(8, (4, 5), (-6, 17), (-6, 20), Some(2)),
        e(8, (4, 6), (-6, 26), (-6, 27), Some(4)),
        s("L(10,2,6^3)", -1, 2),
        s("L(24,16,6^9)", -1, 0),
        e(9, (3, 6), (-12, 24), (-12, 27), Some(2)),
        e(9, (3, 7), (-12, 34), (-12, 35), Some(2)),
        s("L(9,0,6^3)", -9, 0),
        s("L(10,1,6^3)", 1, 4),
        s("L(14,5,6^5)", -1, 0),
        s("L(18,9,6^7)", -3, 0),
        e(10, (2, 8), (-20, 43), (-20, 44), Some(2)),
        s("L(10,0,6^3)", 2, 5),
        s("L(14,4,6^5)", 4, 5),
        s("L(13,2,6^5)", -4, 2),
        s("L(14,3,6^5)", 8, 9),
        s("L(12,0,6^5)", -15, 0),
        s("L(13,1,6^5)", -2, 4),
        s("L(14,2,6^5)", 11, 12),
        s("L(13,0,6^5)", -1, 5),
        s("L(14,1,6^5)", 13, 14),
        s("L(14,0,6^5)", 14, 15),
    ]
}

pub fn rows_from_templates(templates: &[Template], e_max: i64) -> Vec<ClassificationRow> {
    templates.iter().flat_map(|t| t.rows(e_max)).collect()
}

/// The classification with e-families instantiated for `e <= e_max`.
pub fn theorem2_table(e_max: i64) -> Vec<ClassificationRow> {
    rows_from_templates(&theorem2_templates(), e_max)
}

/// The tabulated dimension of `l`, or `None` when no row covers it.
pub fn table_ell(templates: &[Template], l: &LinearSystem) -> Option<i64> {
    let direct = templates.iter().filter(|t| !matches!(t, Template::TwoParameter { .. }));
    let two = templates.iter().filter(|t| matches!(t, Template::TwoParameter { .. }));
    direct.chain(two).find_map(|t| t.ell_of(l))
}

pub fn write_csv<W: io::Write>(rows: &[ClassificationRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn to_csv(rows: &[ClassificationRow]) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf)?;
    String::from_utf8(buf).map_err(|e| Error::Table(e.to_string()))
}

pub fn read_csv<R: io::Read>(input: R) -> Result<Vec<ClassificationRow>> {
    csv::Reader::from_reader(input).deserialize().map(|r| r.map_err(Error::from)).collect()
}

/// Line endings and trailing whitespace removed, for golden comparisons.
pub fn normalize_text(s: &str) -> String {
    s.lines().map(str::trim_end).collect::<Vec<_>>().join("\n").trim_end().to_string() + "\n"
}

/// A system of the exception list whose verdict needed extra work.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Section7Row {
    pub d_minus_m0: i64,
    pub system: LinearSystem,
    pub status: ExpectedStatus,
    pub method: Method,
    /// The system whose verdict implies this one, for `Method::Implied`.
    pub source: Option<LinearSystem>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExpectedStatus {
    Empty,
    Regular,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ThreePointLemma,
    SplittingLines,
    Cremona,
    CremonaAndLines,
    /// Cremona reduction to a system settled by a known classification.
    CremonaAndKnown,
    Known,
    Implied,
    DirectComputation,
}

/// Low-degree systems not settled by degenerations alone, with their verdicts.
pub fn section7_exceptions() -> Vec<Section7Row> {
    use ExpectedStatus::{Empty as E, Regular as R};
    use Method::*;
    let raw: &[(i64, &str, ExpectedStatus, Method, &str)] = &[
        (8, "L(8,0,6^3)", E, ThreePointLemma, ""),
        (8, "L(9,1,6^3)", E, SplittingLines, ""),
        (14, "L(14,0,6^6)", E, CremonaAndLines, ""),
        (13, "L(14,1,6^6)", E, Implied, "L(14,0,6^6)"),
        (12, "L(14,2,6^6)", E, Implied, "L(14,0,6^6)"),
        (11, "L(14,3,6^6)", E, Implied, "L(14,0,6^6)"),
        (10, "L(14,4,6^6)", E, Implied, "L(14,0,6^6)"),
        (8, "L(14,6,6^5)", E, Implied, "L(14,0,6^6)"),
        (15, "L(15,0,6^7)", E, Cremona, ""),
        (15, "L(15,0,6^6)", R, Implied, "L(15,3,6^6)"),
        (14, "L(15,1,6^6)", R, Implied, "L(15,3,6^6)"),
        (13, "L(15,2,6^6)", R, Implied, "L(15,3,6^6)"),
        (12, "L(15,3,6^6)", R, CremonaAndKnown, ""),
        (11, "L(15,4,6^6)", E, CremonaAndLines, ""),
        (10, "L(15,5,6^6)", E, Implied, "L(15,4,6^6)"),
        (9, "L(15,6,6^6)", E, Implied, "L(15,4,6^6)"),
        (9, "L(15,6,6^5)", R, Implied, "L(15,0,6^6)"),
        (8, "L(15,7,6^5)", R, CremonaAndKnown, ""),
        (16, "L(16,0,6^8)", E, Implied, "L(16,3,6^7)"),
        (16, "L(16,0,6^7)", R, Implied, "L(16,2,6^7)"),
        (15, "L(16,1,6^7)", R, Implied, "L(16,2,6^7)"),
        (14, "L(16,2,6^7)", R, CremonaAndKnown, ""),
        (13, "L(16,3,6^7)", E, CremonaAndLines, ""),
        (12, "L(16,4,6^7)", E, Implied, "L(16,3,6^7)"),
        (11, "L(16,5,6^7)", E, Implied, "L(16,3,6^7)"),
        (10, "L(16,6,6^7)", E, Implied, "L(16,3,6^7)"),
        (10, "L(16,6,6^6)", R, Implied, "L(16,2,6^7)"),
        (9, "L(16,7,6^6)", E, CremonaAndLines, ""),
        (8, "L(16,8,6^6)", E, Implied, "L(16,7,6^6)"),
        (17, "L(17,0,6^8)", R, Implied, "L(17,1,6^8)"),
        (16, "L(17,1,6^8)", R, Cremona, ""),
        (15, "L(17,2,6^8)", E, CremonaAndLines, ""),
        (11, "L(17,6,6^7)", R, Implied, "L(17,1,6^8)"),
        (10, "L(17,7,6^7)", E, CremonaAndLines, ""),
        (9, "L(17,8,6^7)", E, Implied, "L(17,7,6^7)"),
        (8, "L(18,10,6^7)", E, CremonaAndLines, ""),
        (19, "L(19,0,6^10)", E, Known, ""),
        (18, "L(19,1,6^10)", E, Implied, "L(19,0,6^10)"),
        (17, "L(19,2,6^10)", E, Implied, "L(19,0,6^10)"),
        (15, "L(19,4,6^9)", R, Implied, "L(19,5,6^9)"),
        (14, "L(19,5,6^9)", R, Known, ""),
        (13, "L(19,6,6^9)", E, Implied, "L(19,0,6^10)"),
        (12, "L(19,7,6^9)", E, Implied, "L(19,0,6^10)"),
        (9, "L(19,10,6^7)", R, CremonaAndKnown, ""),
        (8, "L(19,11,6^7)", E, CremonaAndLines, ""),
        (12, "L(20,8,6^9)", R, DirectComputation, ""),
        (11, "L(20,9,6^9)", E, CremonaAndKnown, ""),
        (8, "L(20,12,6^7)", R, CremonaAndKnown, ""),
        (11, "L(21,10,6^9)", R, CremonaAndKnown, ""),
        (10, "L(21,11,6^9)", E, CremonaAndKnown, ""),
        (9, "L(21,12,6^8)", R, CremonaAndKnown, ""),
        (8, "L(21,13,6^8)", E, CremonaAndLines, ""),
        (22, "L(22,0,6^13)", R, Implied, "L(22,1,6^13)"),
        (21, "L(22,1,6^13)", R, Known, ""),
        (20, "L(22,2,6^13)", E, Known, ""),
        (19, "L(22,3,6^13)", E, Implied, "L(22,2,6^13)"),
        (16, "L(22,6,6^12)", R, Implied, "L(22,1,6^13)"),
        (15, "L(22,7,6^12)", E, DirectComputation, ""),
        (13, "L(22,9,6^11)", E, DirectComputation, ""),
        (11, "L(22,11,6^10)", E, CremonaAndKnown, ""),
        (10, "L(22,12,6^10)", E, Implied, "L(22,11,6^10)"),
        (10, "L(22,12,6^9)", R, CremonaAndKnown, ""),
        (9, "L(22,13,6^9)", E, CremonaAndLines, ""),
        (8, "L(22,14,6^9)", E, Implied, "L(22,13,6^9)"),
        (12, "L(23,11,6^11)", R, DirectComputation, ""),
        (10, "L(23,13,6^10)", E, CremonaAndKnown, ""),
        (9, "L(23,14,6^9)", R, CremonaAndKnown, ""),
        (8, "L(23,15,6^9)", E, CremonaAndLines, ""),
        (10, "L(24,14,6^10)", R, CremonaAndKnown, ""),
        (9, "L(24,15,6^10)", E, CremonaAndKnown, ""),
        (8, "L(24,16,6^10)", E, Implied, "L(24,15,6^10)"),
        (13, "L(25,12,6^13)", E, DirectComputation, ""),
        (10, "L(25,15,6^11)", E, CremonaAndKnown, ""),
        (12, "L(26,14,6^13)", E, DirectComputation, ""),
        (10, "L(29,19,6^13)", R, DirectComputation, ""),
        (13, "L(31,18,6^17)", E, DirectComputation, ""),
        (10, "L(31,21,6^14)", R, CremonaAndKnown, ""),
        (10, "L(38,28,6^18)", E, CremonaAndKnown, ""),
        (13, "L(40,27,6^23)", E, DirectComputation, ""),
        (10, "L(40,30,6^19)", E, DirectComputation, ""),
        (10, "L(46,36,6^22)", E, CremonaAndKnown, ""),
    ];
    raw.iter()
        .map(|&(x, sys, status, method, source)| Section7Row {
            d_minus_m0: x,
            system: sys.parse().expect("valid system"),
            status,
            method,
            source: (!source.is_empty()).then(|| source.parse().expect("valid system")),
        })
        .collect()
}

pub fn section7_to_csv(rows: &[Section7Row]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    String::from_utf8(w.into_inner().map_err(|e| Error::Table(e.to_string()))?).map_err(|e| Error::Table(e.to_string()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerifyMode {
    /// The v column against the virtual dimension.
    Formula,
    /// The ell column against the splitting prediction.
    Hh,
    /// The ell column against the interpolation-rank oracle.
    Oracle,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyLimits {
    /// Largest degree checked: instances of two-parameter rows, and every row in oracle mode.
    pub max_degree: i64,
    pub max_points: usize,
    pub prime: u64,
    pub seed: u64,
    pub trials: usize,
}

impl Default for VerifyLimits {
    fn default() -> Self {
        Self { max_degree: 26, max_points: 12, prime: DEFAULT_PRIME, seed: 0, trials: DEFAULT_TRIALS }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowCheck {
    /// Index of the row in the input.
    pub row: usize,
    pub system: String,
    pub expected: String,
    pub actual: String,
    pub passed: bool,
    /// Command line that recomputes `actual`.
    pub reproduce: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableReport {
    pub mode: VerifyMode,
    pub checks: Vec<RowCheck>,
    /// Instances beyond the limits.
    pub skipped: usize,
}

impl TableReport {
    pub fn failures(&self) -> impl Iterator<Item = &RowCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Checks every row, in parallel over rows; failures are reported, not returned as errors.
pub fn verify_table(rows: &[ClassificationRow], mode: VerifyMode, limits: VerifyLimits) -> TableReport {
    let per_row: Vec<(Vec<RowCheck>, usize)> = rows
        .par_iter()
        .enumerate()
        .map(|(i, row)| {
            let instances = match row.instances(limits.max_degree, limits.max_points) {
                Ok(x) => x,
                Err(e) => {
                    let check = RowCheck {
                        row: i,
                        system: row.system.clone(),
                        expected: String::new(),
                        actual: format!("malformed row: {e}"),
                        passed: false,
                        reproduce: String::new(),
                    };
                    return (vec![check], 0);
                }
            };
            let (run, skip): (Vec<_>, Vec<_>) = instances
                .into_iter()
                .partition(|inst| mode != VerifyMode::Oracle || inst.system.degree() <= limits.max_degree);
            (run.iter().map(|inst| check_instance(i, inst, mode, limits)).collect(), skip.len())
        })
        .collect();
    let skipped = per_row.iter().map(|(_, s)| s).sum();
    TableReport { mode, checks: per_row.into_iter().flat_map(|(c, _)| c).collect(), skipped }
}

fn check_instance(row: usize, inst: &Instance, mode: VerifyMode, limits: VerifyLimits) -> RowCheck {
    let sys = &inst.system;
    let ell_ok = |actual: i64| if inst.at_least { actual >= inst.ell } else { actual == inst.ell };
    let expected_ell = if inst.at_least { format!(">= {}", inst.ell) } else { inst.ell.to_string() };
    let (expected, actual, passed, reproduce) = match mode {
        VerifyMode::Formula => {
            let v = sys.virtual_dim();
            (inst.v.to_string(), v.to_string(), v == inst.v, format!("hhdim vdim '{sys}'"))
        }
        VerifyMode::Hh => {
            let reproduce = format!("hhdim classify '{sys}'");
            match (is_minus_one_special(sys), hh_dimension(sys)) {
                (Ok((special, _)), Ok(v)) => {
                    let ell = v.ell().unwrap_or(i64::MIN);
                    let shown = if special { ell.to_string() } else { format!("{ell} (not (-1)-special)") };
                    (expected_ell, shown, special && ell_ok(ell), reproduce)
                }
                (Err(e), _) | (_, Err(e)) => (expected_ell, format!("error: {e}"), false, reproduce),
            }
        }
        VerifyMode::Oracle => {
            let reproduce = format!(
                "hhdim oracle '{sys}' --prime {} --seed {} --trials {}",
                limits.prime, limits.seed, limits.trials
            );
            match dimension_char_p(sys, limits.seed, limits.prime, limits.trials) {
                Ok(r) => (expected_ell, r.ell.to_string(), ell_ok(r.ell), reproduce),
                Err(e) => (expected_ell, format!("error: {e}"), false, reproduce),
            }
        }
    };
    RowCheck { row, system: sys.to_string(), expected, actual, passed, reproduce }
}

/// A system on which the search and the table disagree.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Discrepancy {
    pub system: LinearSystem,
    /// Dimension found by splitting when the system is (-1)-special.
    pub found: Option<i64>,
    pub tabulated: Option<i64>,
}

/// Compares the table with an exhaustive (-1)-speciality scan over
/// `d <= max_degree`, `m0 <= d`, `1 <= n <= max_points`.
pub fn completeness_sweep(templates: &[Template], max_degree: i64, max_points: usize) -> Result<Vec<Discrepancy>> {
    let mut out = Vec::new();
    for d in 0..=max_degree {
        for m0 in 0..=d {
            for n in 1..=max_points {
                let l = LinearSystem::quasi_homogeneous(d, m0, 6, n)?;
                let found = match is_minus_one_special(&l)? {
                    (true, _) => hh_dimension(&l)?.ell(),
                    (false, _) => None,
                };
                let tabulated = table_ell(templates, &l);
                if found != tabulated {
                    out.push(Discrepancy { system: l, found, tabulated });
                }
            }
        }
    }
    Ok(out)
}
