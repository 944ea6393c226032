//! (-1)-curves and quasi-homogeneous (-1)-configurations with multiplicity at
//! most 3 on the tail, the splitting-off procedure built on them, and the
//! (-1)-speciality test for `L(d, m0, m^n)`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::system::{DivisorClass, LinearSystem};
use crate::tables::{rows_from_templates, table_ell, Affine, ClassificationRow, Template};
use crate::verdict::{DimVerdict, Status, Trace};

/// Placements enumerated per family by [`find_splittings`] before falling back to the canonical one.
pub const MAX_PLACEMENTS: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Simple,
    Compound,
}

/// The families of the catalog. `Pencil(1)` is the line `L(1,0,1^2)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CatalogCurve {
    /// `L(2,0,1^5)`
    Conic,
    /// `L(e,e-1,1^{2e})`, `e >= 1`
    Pencil(i64),
    /// `L(1,1,1)`
    BaseLine,
    /// `L(6,3,2^7)`
    Sextic,
    /// `L(12,8,3^9)`
    Dodecic,
    /// `L(k,k,1^k)`, `k >= 2`: `k` lines through `p0`
    Fan(i64),
    /// `L(3,0,2^3)`: the three lines through pairs of three points
    Triangle,
}

impl CatalogCurve {
    pub fn is_valid(self) -> bool {
        match self {
            CatalogCurve::Pencil(e) => e >= 1,
            CatalogCurve::Fan(k) => k >= 2,
            _ => true,
        }
    }

    pub fn kind(self) -> Kind {
        match self {
            CatalogCurve::Fan(_) | CatalogCurve::Triangle => Kind::Compound,
            _ => Kind::Simple,
        }
    }

    pub fn degree(self) -> i64 {
        match self {
            CatalogCurve::Conic => 2,
            CatalogCurve::Pencil(e) => e,
            CatalogCurve::BaseLine => 1,
            CatalogCurve::Sextic => 6,
            CatalogCurve::Dodecic => 12,
            CatalogCurve::Fan(k) => k,
            CatalogCurve::Triangle => 3,
        }
    }

    pub fn m0(self) -> i64 {
        match self {
            CatalogCurve::Conic | CatalogCurve::Triangle => 0,
            CatalogCurve::Pencil(e) => e - 1,
            CatalogCurve::BaseLine => 1,
            CatalogCurve::Sextic => 3,
            CatalogCurve::Dodecic => 8,
            CatalogCurve::Fan(k) => k,
        }
    }

    pub fn tail_mult(self) -> i64 {
        match self {
            CatalogCurve::Sextic | CatalogCurve::Triangle => 2,
            CatalogCurve::Dodecic => 3,
            _ => 1,
        }
    }

    /// Number of tail points the curve passes through.
    pub fn points(self) -> usize {
        match self {
            CatalogCurve::Conic => 5,
            CatalogCurve::Pencil(e) => 2 * e as usize,
            CatalogCurve::BaseLine => 1,
            CatalogCurve::Sextic => 7,
            CatalogCurve::Dodecic => 9,
            CatalogCurve::Fan(k) => k as usize,
            CatalogCurve::Triangle => 3,
        }
    }

    /// The simple curve a compound is made of; a simple curve is its own constituent.
    pub fn constituent(self) -> CatalogCurve {
        match self {
            CatalogCurve::Fan(_) => CatalogCurve::BaseLine,
            CatalogCurve::Triangle => CatalogCurve::Pencil(1),
            other => other,
        }
    }

    pub fn constituent_count(self) -> usize {
        match self {
            CatalogCurve::Fan(k) => k as usize,
            CatalogCurve::Triangle => 3,
            _ => 1,
        }
    }

    /// The class on `slot_count` slots with the tail multiplicity at `slots` (tail indices, 1-based).
    pub fn class_on(self, slots: &[usize], slot_count: usize) -> DivisorClass {
        let mut mults = vec![0; slot_count.max(1 + slots.iter().copied().max().unwrap_or(0))];
        mults[0] = self.m0();
        for &s in slots {
            mults[s] = self.tail_mult();
        }
        DivisorClass::new(self.degree(), mults)
    }

    /// Tail slots of each constituent when the curve sits on `slots`.
    pub fn constituent_slots(self, slots: &[usize]) -> Vec<Vec<usize>> {
        match self {
            CatalogCurve::Fan(_) => slots.iter().map(|&s| vec![s]).collect(),
            CatalogCurve::Triangle => vec![
                vec![slots[0], slots[1]],
                vec![slots[0], slots[2]],
                vec![slots[1], slots[2]],
            ],
            _ => vec![slots.to_vec()],
        }
    }

    /// The class on the first `points()` of `n` tail slots, or `None` if `n` is too small.
    pub fn instantiate(self, n: usize) -> Option<DivisorClass> {
        let r = self.points();
        (r <= n).then(|| self.class_on(&(1..=r).collect::<Vec<_>>(), n + 1))
    }
}

impl fmt::Display for CatalogCurve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let class = self.instantiate(self.points()).expect("own point count suffices");
        write!(f, "{class}")
    }
}

/// `D^2 = -1` and arithmetic genus 0.
pub fn is_minus_one_class(d: &DivisorClass) -> bool {
    d.self_intersection() == -1 && d.arithmetic_genus().is_ok_and(|g| g == 0)
}

/// Catalog curves fitting on `n` tail points with tail multiplicity at most `mult_cap`,
/// ordered by degree, then family.
pub fn catalog(n: usize, mult_cap: i64) -> Vec<CatalogCurve> {
    let mut out = vec![
        CatalogCurve::Conic,
        CatalogCurve::BaseLine,
        CatalogCurve::Sextic,
        CatalogCurve::Dodecic,
        CatalogCurve::Triangle,
    ];
    out.extend((1..=(n / 2) as i64).map(CatalogCurve::Pencil));
    out.extend((2..=n as i64).map(CatalogCurve::Fan));
    out.retain(|c| c.points() <= n && c.tail_mult() <= mult_cap);
    out.sort_by_key(|c| (c.degree(), *c));
    out
}

/// Sums the distinct permutations of `base` over `n` tail points. The tail of
/// `base`, padded with zeros to `n`, must be `(a, b^{n-1})` with `|a - b| = 1`.
pub fn configuration_total(base: &DivisorClass, n: usize) -> Result<DivisorClass> {
    let reject = |why: &str| Error::InvalidConfigurationBase(format!("{base} on {n} points: {why}"));
    if !is_minus_one_class(base) {
        return Err(reject("not a (-1)-class"));
    }
    if n < 2 || base.slot_count() > n + 1 {
        return Err(reject("point count does not fit"));
    }
    let padded = base.padded(n + 1);
    let tail = &padded.mults()[1..];
    let odd = (0..n).find(|&i| tail.iter().filter(|&&m| m == tail[i]).count() == 1);
    let Some(odd) = odd else {
        return Err(reject("tail is not of shape (a, b^{n-1})"));
    };
    let a = tail[odd];
    let b = tail[(odd + 1) % n];
    if tail.iter().enumerate().any(|(i, &m)| i != odd && m != b) || (a - b).abs() != 1 {
        return Err(reject("tail is not of shape (a, b^{n-1}) with |a - b| = 1"));
    }
    let n_i = n as i64;
    let mut mults = vec![a + (n_i - 1) * b; n + 1];
    mults[0] = n_i * base.mult(0);
    Ok(DivisorClass::new(n_i * base.degree(), mults))
}

fn combinations(n: usize, r: usize, mut f: impl FnMut(&[usize]) -> bool) {
    if r > n {
        return;
    }
    let mut idx: Vec<usize> = (1..=r).collect();
    loop {
        if !f(&idx) {
            return;
        }
        let mut i = r;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if idx[i] < n - r + i + 1 {
                break;
            }
        }
        idx[i] += 1;
        for t in i + 1..r {
            idx[t] = idx[t - 1] + 1;
        }
    }
}

/// A catalog curve placed on specific tail slots, with its intersection against a system.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Candidate {
    pub curve: CatalogCurve,
    pub slots: Vec<usize>,
    pub intersection: i64,
}

/// Tail slots sorted by value descending, ties by slot index.
fn ranked_tail(mults: &[i64]) -> Vec<usize> {
    let mut order: Vec<usize> = (1..mults.len()).collect();
    order.sort_by_key(|&s| (std::cmp::Reverse(mults[s]), s));
    order
}

/// All catalog placements meeting `l` negatively, by degree of the curve and then lexicographically.
/// A family with more than [`MAX_PLACEMENTS`] negative placements is reported at its first
/// `MAX_PLACEMENTS` placements only.
pub fn find_splittings(l: &LinearSystem) -> Vec<Candidate> {
    let n = l.tail().len();
    let class = l.class();
    let mults = l.slots();
    let order = ranked_tail(&mults);
    let mut out = Vec::new();
    for curve in catalog(n, 3) {
        let r = curve.points();
        let mut best: Vec<usize> = order[..r].to_vec();
        best.sort_unstable();
        if class.intersect(&curve.class_on(&best, n + 1)) >= 0 {
            continue;
        }
        let mut found = 0;
        combinations(n, r, |slots| {
            let i = class.intersect(&curve.class_on(slots, n + 1));
            if i < 0 {
                out.push(Candidate { curve, slots: slots.to_vec(), intersection: i });
                found += 1;
            }
            found < MAX_PLACEMENTS
        });
    }
    out.sort_by(|a, b| (a.curve.degree(), a.curve, &a.slots).cmp(&(b.curve.degree(), b.curve, &b.slots)));
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SplitCurve {
    Catalog { curve: CatalogCurve, slots: Vec<usize> },
    /// The exceptional curve over a point, removed when a slot went negative.
    Exceptional { slot: usize },
}

impl SplitCurve {
    /// Classes of the pairwise-disjoint constituents.
    pub fn constituent_classes(&self, slot_count: usize) -> Vec<DivisorClass> {
        match self {
            SplitCurve::Catalog { curve, slots } => curve
                .constituent_slots(slots)
                .iter()
                .map(|s| curve.constituent().class_on(s, slot_count))
                .collect(),
            SplitCurve::Exceptional { slot } => {
                let mut mults = vec![0; slot_count.max(slot + 1)];
                mults[*slot] = -1;
                vec![DivisorClass::new(0, mults)]
            }
        }
    }

    pub fn total_class(&self, slot_count: usize) -> DivisorClass {
        self.constituent_classes(slot_count)
            .iter()
            .fold(DivisorClass::zero(slot_count), |acc, c| &acc + c)
    }
}

/// `multiplicity` copies of every constituent of `curve` split off.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub curve: SplitCurve,
    pub multiplicity: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EmptyReason {
    MultiplicityExceedsDegree { slot: usize },
    /// Removing the fixed part would leave negative degree.
    FixedPartExceedsDegree { split: Split },
}

/// `residual = system - sum n_i A_i`, each `n_i = -(current residual).A_i` when split.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplittingWitness {
    pub system: LinearSystem,
    pub entries: Vec<Split>,
    pub residual: LinearSystem,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub empty: Option<EmptyReason>,
}

impl SplittingWitness {
    pub fn max_multiplicity(&self) -> i64 {
        self.entries.iter().map(|s| s.multiplicity).max().unwrap_or(0)
    }

    /// Some curve splits at least twice and the residual has `v >= 0`.
    pub fn shows_special(&self) -> bool {
        self.empty.is_none() && self.max_multiplicity() >= 2 && self.residual.virtual_dim() >= 0
    }

    /// Dimension the witness asserts.
    pub fn ell(&self) -> i64 {
        if self.empty.is_some() {
            -1
        } else {
            self.residual.expected_dim()
        }
    }

    /// Replays every split against the running residual.
    pub fn check(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Certificate(msg));
        let slots = self.system.slot_count().max(self.residual.slot_count());
        let mut cur = self.system.class().padded(slots);
        let mut v_shift = 0;
        for split in &self.entries {
            if let SplitCurve::Catalog { curve, slots: s } = &split.curve {
                let distinct = s.iter().enumerate().all(|(a, x)| !s[a + 1..].contains(x));
                if !curve.is_valid() || s.len() != curve.points() || !distinct || s.iter().any(|&x| x == 0 || x >= slots) {
                    return fail(format!("malformed placement {:?} of {curve:?}", s));
                }
            }
            let parts = split.curve.constituent_classes(slots);
            for p in &parts {
                if cur.intersect(p) != -split.multiplicity || split.multiplicity < 1 {
                    return fail(format!("{p} meets {cur} in {}, not -{}", cur.intersect(p), split.multiplicity));
                }
            }
            let n = split.multiplicity;
            for p in &parts {
                cur = &cur - &(n * p);
            }
            v_shift += parts.len() as i64 * (n - n * n) / 2;
        }
        if let Some(reason) = &self.empty {
            match reason {
                EmptyReason::MultiplicityExceedsDegree { slot } => {
                    if cur.mult(*slot) <= cur.degree() {
                        return fail(format!("slot {slot} of {cur} does not exceed the degree"));
                    }
                }
                EmptyReason::FixedPartExceedsDegree { split } => {
                    let parts = split.curve.constituent_classes(slots);
                    let negative = parts.iter().all(|p| cur.intersect(p) == -split.multiplicity);
                    let total = parts.iter().map(|p| p.degree()).sum::<i64>() * split.multiplicity;
                    if !negative || split.multiplicity < 1 || cur.degree() >= total {
                        return fail(format!("fixed part does not exceed the degree of {cur}"));
                    }
                }
            }
        }
        if cur != self.residual.class().padded(slots) {
            return fail(format!("residual {} does not match {}", self.residual, cur));
        }
        if self.system.virtual_dim() != self.residual.virtual_dim() + v_shift {
            return fail("virtual dimension bookkeeping is off".into());
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitOrder {
    /// Compounds first, then simple curves by descending degree.
    #[default]
    Standard,
    Reversed,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NegativePolicy {
    /// Skip a split that would leave a negative entry.
    #[default]
    Reject,
    /// Remove exceptional curves where a slot goes negative, and detect emptiness.
    ClampExceptional,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SplitOptions {
    pub order: SplitOrder,
    pub policy: NegativePolicy,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Rule {
    Fan,
    Triangle,
    Simple(CatalogCurve),
}

fn rules(n: usize, order: SplitOrder) -> Vec<Rule> {
    let mut simple: Vec<CatalogCurve> = catalog(n, 3).into_iter().filter(|c| c.kind() == Kind::Simple).collect();
    simple.sort_by_key(|c| (std::cmp::Reverse(c.degree()), *c));
    let mut out = vec![Rule::Fan, Rule::Triangle];
    out.extend(simple.into_iter().map(Rule::Simple));
    if order == SplitOrder::Reversed {
        out.reverse();
    }
    out
}

/// The placement a rule would use on the current data, if it meets it negatively.
fn propose(rule: Rule, d: i64, mults: &[i64]) -> Option<(CatalogCurve, Vec<usize>, i64)> {
    let order = ranked_tail(mults);
    let (curve, mut slots) = match rule {
        Rule::Fan => {
            let top = *order.first().map(|s| &mults[*s])?;
            let group: Vec<usize> = order.iter().copied().take_while(|&s| mults[s] == top).collect();
            if group.len() < 2 {
                return None;
            }
            (CatalogCurve::Fan(group.len() as i64), group)
        }
        Rule::Triangle => {
            if order.len() < 3 || mults[order[0]] != mults[order[2]] {
                return None;
            }
            (CatalogCurve::Triangle, order[..3].to_vec())
        }
        Rule::Simple(curve) => {
            let r = curve.points();
            if r > order.len() {
                return None;
            }
            (curve, order[..r].to_vec())
        }
    };
    slots.sort_unstable();
    let one = curve.constituent();
    let first = &curve.constituent_slots(&slots)[0];
    let meet = d * one.degree() - one.m0() * mults[0] - one.tail_mult() * first.iter().map(|&s| mults[s]).sum::<i64>();
    (meet < 0).then_some((curve, slots, -meet))
}

/// Repeatedly removes catalog curves meeting the running residual negatively.
pub fn split_off(l: &LinearSystem, opts: SplitOptions) -> Result<SplittingWitness> {
    let slot_count = l.slot_count();
    let mut d = l.degree();
    let mut mults = l.slots();
    let mut entries = Vec::new();
    let rules = rules(slot_count - 1, opts.order);
    let clamp = opts.policy == NegativePolicy::ClampExceptional;
    let bound = d as usize + 1;
    let mut steps = 0;
    let residual = |d: i64, m: &[i64]| LinearSystem::from_slots(d, m);
    let empty = loop {
        if clamp {
            if let Some(slot) = (0..slot_count).find(|&s| mults[s] > d) {
                break Some(EmptyReason::MultiplicityExceedsDegree { slot });
            }
        }
        let mut chosen = None;
        for &rule in &rules {
            let Some((curve, slots, n)) = propose(rule, d, &mults) else { continue };
            let split = Split { curve: SplitCurve::Catalog { curve, slots }, multiplicity: n };
            let total = split.curve.total_class(slot_count);
            let new_d = d - n * total.degree();
            let new_m: Vec<i64> = (0..slot_count).map(|s| mults[s] - n * total.mult(s)).collect();
            if new_d < 0 {
                if clamp {
                    chosen = Some(Err(split));
                    break;
                }
                continue;
            }
            if !clamp && new_m.iter().any(|&m| m < 0) {
                continue;
            }
            chosen = Some(Ok((split, new_d, new_m)));
            break;
        }
        match chosen {
            None => break None,
            Some(Err(split)) => break Some(EmptyReason::FixedPartExceedsDegree { split }),
            Some(Ok((split, new_d, new_m))) => {
                entries.push(split);
                d = new_d;
                mults = new_m;
                for (slot, m) in mults.iter_mut().enumerate() {
                    if *m < 0 {
                        entries.push(Split { curve: SplitCurve::Exceptional { slot }, multiplicity: -*m });
                        *m = 0;
                    }
                }
            }
        }
        steps += 1;
        if steps > bound {
            return Err(Error::NonTermination(bound));
        }
    };
    Ok(SplittingWitness { system: l.clone(), entries, residual: residual(d, &mults)?, empty })
}

/// Quasi-homogeneous with tail multiplicity at most 6.
pub fn in_regime(l: &LinearSystem) -> bool {
    l.tail_multiplicity().is_some_and(|m| m <= 6)
}

fn require_regime(l: &LinearSystem) -> Result<()> {
    if in_regime(l) {
        Ok(())
    } else {
        Err(Error::Precondition(format!("{l} is not quasi-homogeneous with tail multiplicity <= 6")))
    }
}

/// Whether `l` is (-1)-special, with the witness when it is.
pub fn is_minus_one_special(l: &LinearSystem) -> Result<(bool, Option<SplittingWitness>)> {
    require_regime(l)?;
    let w = split_off(l, SplitOptions::default())?;
    Ok(if w.shows_special() { (true, Some(w)) } else { (false, None) })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct HhOptions {
    pub order: SplitOrder,
    /// Accept systems outside the proven regime; the answer is then conjectural.
    pub conjecture_mode: bool,
}

/// The dimension predicted by removing all fixed (-1)-curves.
pub fn hh_dimension(l: &LinearSystem) -> Result<DimVerdict> {
    hh_dimension_with(l, HhOptions::default())
}

pub fn hh_dimension_with(l: &LinearSystem, opts: HhOptions) -> Result<DimVerdict> {
    if !opts.conjecture_mode {
        require_regime(l)?;
    }
    let witness = split_off(l, SplitOptions { order: opts.order, policy: NegativePolicy::ClampExceptional })?;
    let status = Status::from_ell(witness.ell(), l.expected_dim());
    Ok(DimVerdict { system: l.clone(), status, trace: Trace::Splitting { witness, residual: None } })
}

/// Search limits for [`classification_templates`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassificationBounds {
    /// Largest `e` tried along each pencil family; a family special up to here is reported unbounded.
    pub e_cap: i64,
    /// Box of the exhaustive scan for sporadic systems.
    pub max_degree: i64,
    pub max_points: usize,
}

impl Default for ClassificationBounds {
    fn default() -> Self {
        Self { e_cap: 16, max_degree: 26, max_points: 17 }
    }
}

/// The splitting dimension of `l` when it is (-1)-special.
fn special_ell(l: &LinearSystem) -> Result<Option<i64>> {
    if !is_minus_one_special(l)?.0 {
        return Ok(None);
    }
    Ok(hh_dimension(l)?.ell())
}

/// Families of (-1)-special systems `L(d,m0,6^n)` derived from the fixed
/// curves that can split off twice, checked against an exhaustive scan.
///
/// Lines `L(1,1,1)` meet `L(d,d-x,6^n)` in `x - 6`, so for `x <= 4` each splits
/// `6 - x` times and the residual gives a two-parameter family. A pencil curve
/// `L(e,e-1,1^{2e})` meets `L(d,d-x,6^{2e})` in `-mu` exactly when
/// `d = (12 - x) e + x - mu`; each `(x, mu)` is followed in `e` while its members
/// stay special. Systems in the scan box covered by neither are sporadic.
pub fn classification_templates(bounds: ClassificationBounds) -> Result<Vec<Template>> {
    let mut two = Vec::new();
    for x in 0..=4 {
        let mu = 6 - x;
        let gain = mu * (mu - 1) / 2;
        let c = (x - x * x) / 2;
        two.push(Template::TwoParameter {
            x,
            v: Affine::integer(x + 1, -21, c),
            ell: Affine::integer(x + 1, gain - 21, c),
            bound: Affine::new(0, 21 - gain, -c, x + 1),
            boundary: None,
        });
    }

    let mut families = Vec::new();
    for x in 0..12 {
        for mu in 2..=6 {
            let (a, b) = (12 - x, x - mu);
            let mut members = Vec::new();
            for e in 1..=bounds.e_cap {
                let d = a * e + b;
                let found = if d - x < 0 {
                    None
                } else {
                    let l = LinearSystem::quasi_homogeneous(d, d - x, 6, 2 * e as usize)?;
                    special_ell(&l)?.filter(|&ell| table_ell(&two, &l) != Some(ell)).map(|ell| (e, l.virtual_dim(), ell))
                };
                match found {
                    Some(m) => members.push(m),
                    None if members.is_empty() => continue,
                    None => break,
                }
            }
            if members.len() < 2 {
                continue;
            }
            let fit = |pick: fn(&(i64, i64, i64)) -> i64| -> Result<(i64, i64)> {
                let (p, q) = (&members[0], &members[1]);
                let slope = pick(q) - pick(p);
                let fit = (slope, pick(p) - slope * p.0);
                if members.iter().all(|m| fit.0 * m.0 + fit.1 == pick(m)) {
                    Ok(fit)
                } else {
                    Err(Error::Table(format!("family d = {a}e{b:+}, m0 = d - {x} is not affine in e")))
                }
            };
            let last = members.last().expect("nonempty").0;
            families.push(Template::EFamily {
                x,
                d: (a, b),
                v: fit(|m| m.1)?,
                ell: fit(|m| m.2)?,
                e_min: members[0].0,
                e_max: (last < bounds.e_cap).then_some(last),
            });
        }
    }

    for t in two.iter_mut() {
        let Template::TwoParameter { x, bound, boundary, .. } = t else { unreachable!() };
        let mut hits = families.iter().filter_map(|f| match f {
            Template::EFamily { x: fx, d: (a, b), e_min, .. } if fx == x => {
                bound.is_at_most(a * e_min + b, 0, 2 * e_min).then_some(Affine::new(0, *a, 2 * b, 2))
            }
            _ => None,
        });
        *boundary = hits.next();
        if hits.next().is_some() {
            return Err(Error::Table(format!("several families meet the range of L(d,d-{x},6^n)")));
        }
    }

    let mut templates: Vec<Template> = families.into_iter().chain(two).collect();
    let mut sporadic = Vec::new();
    for d in 0..=bounds.max_degree {
        for m0 in 0..=d {
            for n in 1..=bounds.max_points {
                let l = LinearSystem::quasi_homogeneous(d, m0, 6, n)?;
                match (special_ell(&l)?, table_ell(&templates, &l)) {
                    (found, tab) if found == tab => {}
                    (Some(ell), None) => sporadic.push(Template::Sporadic { v: l.virtual_dim(), system: l, ell }),
                    (found, tab) => {
                        return Err(Error::Table(format!("{l}: splitting gives {found:?}, family gives {tab:?}")));
                    }
                }
            }
        }
    }
    templates.extend(sporadic);
    templates.sort_by_key(Template::sort_key);
    Ok(templates)
}

/// The classification table derived by search, e-families instantiated for `e <= e_max`.
pub fn generate_classification(e_max: i64, bounds: ClassificationBounds) -> Result<Vec<ClassificationRow>> {
    Ok(rows_from_templates(&classification_templates(bounds)?, e_max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn l(s: &str) -> LinearSystem {
        s.parse().unwrap()
    }

    fn c(s: &str) -> DivisorClass {
        s.parse().unwrap()
    }

    #[test]
    fn minus_one_classes() {
        assert!(is_minus_one_class(&c("L(1,1,1)")));
        assert!(!is_minus_one_class(&c("L(1,0)")));
        for e in 1..=10 {
            assert!(is_minus_one_class(&CatalogCurve::Pencil(e).instantiate(2 * e as usize).unwrap()));
        }
    }

    #[test]
    fn catalog_contents() {
        let names = |n, cap| catalog(n, cap).iter().map(|c| c.to_string()).collect::<Vec<_>>();
        let mut five = names(5, 1);
        five.sort();
        let mut expect = vec![
            "L(2,0,1^5)", "L(1,1,1)", "L(1,0,1^2)", "L(2,1,1^4)", "L(5,5,1^5)", "L(4,4,1^4)", "L(3,3,1^3)", "L(2,2,1^2)",
        ];
        expect.sort();
        assert_eq!(five, expect);
        let seven = names(7, 2);
        assert!(seven.contains(&"L(6,3,2^7)".to_string()));
        assert!(seven.contains(&"L(3,0,2^3)".to_string()));
        assert_eq!(names(1, 1), vec!["L(1,1,1)"]);
        assert!(names(9, 3).contains(&"L(12,8,3^9)".to_string()));
    }

    #[test]
    fn configuration_totals() {
        assert_eq!(configuration_total(&c("L(1,1,1)"), 4).unwrap().to_string(), "L(4,4,1^4)");
        assert_eq!(configuration_total(&c("L(1,0,1^2)"), 3).unwrap().to_string(), "L(3,0,2^3)");
        assert_eq!(configuration_total(&c("L(1,1,1)"), 2).unwrap().to_string(), "L(2,2,1^2)");
        assert!(configuration_total(&c("L(2,0,1^5)"), 5).is_err());
        assert!(configuration_total(&c("L(1,0)"), 3).is_err());
    }

    #[test]
    fn compound_totals_match_configurations() {
        for k in 2..=8 {
            let fan = CatalogCurve::Fan(k).instantiate(k as usize).unwrap();
            assert_eq!(configuration_total(&c("L(1,1,1)"), k as usize).unwrap(), fan);
        }
        let tri = CatalogCurve::Triangle.instantiate(3).unwrap();
        assert_eq!(configuration_total(&c("L(1,0,1^2)"), 3).unwrap(), tri);
    }

    #[test]
    fn splittings_found() {
        let s = find_splittings(&l("L(10,8,6^2)"));
        let has = |curve, slots: &[usize], i| {
            s.contains(&Candidate { curve, slots: slots.to_vec(), intersection: i })
        };
        assert!(has(CatalogCurve::BaseLine, &[1], -4));
        assert!(has(CatalogCurve::BaseLine, &[2], -4));
        assert!(has(CatalogCurve::Pencil(1), &[1, 2], -2));
        assert!(find_splittings(&l("L(14,0,6^5)")).iter().any(|c| c.curve == CatalogCurve::Conic && c.intersection == -2));
        assert!(find_splittings(&l("L(5,0,1^2)")).is_empty());
    }

    #[test]
    fn special_examples() {
        let (yes, w) = is_minus_one_special(&l("L(10,2,6^3)")).unwrap();
        assert!(yes);
        let w = w.unwrap();
        assert_eq!(w.entries.len(), 1);
        assert_eq!(w.entries[0].curve, SplitCurve::Catalog { curve: CatalogCurve::Triangle, slots: vec![1, 2, 3] });
        assert_eq!(w.entries[0].multiplicity, 2);
        assert_eq!(w.residual.to_string(), "L(4,2,2^3)");
        assert_eq!(w.residual.virtual_dim(), 2);
        w.check().unwrap();

        assert!(is_minus_one_special(&l("L(14,5,6^5)")).unwrap().0);
        assert!(!is_minus_one_special(&l("L(7,0,1^3)")).unwrap().0);
        assert!(is_minus_one_special(&l("L(10,2,6,5)")).is_err());
    }

    #[test]
    fn hh_examples() {
        for (s, ell) in [("L(10,8,6^2)", 0), ("L(9,0,6^3)", 0), ("L(14,0,6^5)", 15), ("L(10,2,6^3)", 2), ("L(0)", 0)] {
            let v = hh_dimension(&l(s)).unwrap();
            assert_eq!(v.ell(), Some(ell), "{s}");
        }
        assert_eq!(hh_dimension(&l("L(14,0,6^6)")).unwrap().status, Status::Empty);
        assert!(hh_dimension(&l("L(10,2,6,5)")).is_err());
        let conj = HhOptions { conjecture_mode: true, ..Default::default() };
        assert!(hh_dimension_with(&l("L(10,2,6,5)"), conj).is_ok());
    }

    #[test]
    fn witness_json_round_trip() {
        let v = hh_dimension(&l("L(24,16,6^9)")).unwrap();
        let json = serde_json::to_string(&v).unwrap();
        let back: DimVerdict = serde_json::from_str(&json).unwrap();
        assert_eq!(back, v);
    }

    fn arb_regime() -> impl Strategy<Value = LinearSystem> {
        (0i64..30, 0i64..30, 1i64..=6, 0usize..10)
            .prop_map(|(d, m0, m, n)| LinearSystem::quasi_homogeneous(d, m0.min(d + 2), m, n).unwrap())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(500))]

        #[test]
        fn splitting_is_sound(s in arb_regime()) {
            for policy in [NegativePolicy::Reject, NegativePolicy::ClampExceptional] {
                let w = split_off(&s, SplitOptions { policy, ..Default::default() }).unwrap();
                w.check().unwrap();
                if w.shows_special() {
                    prop_assert!(w.residual.virtual_dim() > s.virtual_dim());
                }
            }
        }

        #[test]
        fn hh_bounds_expected(s in arb_regime()) {
            let hh = hh_dimension(&s).unwrap().ell().unwrap();
            let special = is_minus_one_special(&s).unwrap().0;
            prop_assert!(hh >= s.expected_dim());
            prop_assert_eq!(hh > s.expected_dim(), special, "{}", s);
        }

        #[test]
        fn split_order_does_not_matter(s in arb_regime()) {
            let a = hh_dimension_with(&s, HhOptions { order: SplitOrder::Standard, ..Default::default() }).unwrap();
            let b = hh_dimension_with(&s, HhOptions { order: SplitOrder::Reversed, ..Default::default() }).unwrap();
            let res = |v: &DimVerdict| match &v.trace {
                Trace::Splitting { witness, .. } => (witness.empty.is_some(), witness.residual.normalize()),
                _ => unreachable!(),
            };
            let (ea, ra) = res(&a);
            let (eb, rb) = res(&b);
            prop_assert_eq!(ea, eb);
            if !ea {
                prop_assert_eq!(ra, rb);
            }
            prop_assert_eq!(a.status, b.status);
        }
    }

    #[test]
    fn generated_block_five() {
        let rows = generate_classification(1, ClassificationBounds::default()).unwrap();
        let block: Vec<_> = rows.iter().filter(|r| r.d_minus_m0 == 5).map(|r| (r.system.as_str(), r.ell.as_str())).collect();
        assert_eq!(block, [("L(7,2,6^2)", "0"), ("L(8,3,6^2)", "2"), ("L(9,4,6^2)", "5"), ("L(10,5,6^2)", "9")]);
        let sporadic = rows.iter().find(|r| r.system == "L(18,9,6^7)").unwrap();
        assert_eq!((sporadic.v.as_str(), sporadic.ell.as_str()), ("-3", "0"));
        let lines = rows.iter().find(|r| r.d_minus_m0 == 0).unwrap();
        let first = &lines.instances(6, 1).unwrap()[0];
        assert_eq!((first.system.to_string(), first.v, first.ell), ("L(6,6,6)".to_string(), -15, 0));
    }

    #[test]
    fn generated_templates_agree_with_published_up_to_one_range() {
        let generated = classification_templates(ClassificationBounds::default()).unwrap();
        let published = crate::tables::theorem2_templates();
        assert_eq!(generated.len(), published.len());
        let differ: Vec<_> = generated.iter().zip(&published).filter(|(g, p)| g != p).collect();
        assert_eq!(differ.len(), 1);
        let (g, p) = differ[0];
        assert!(matches!(g, Template::EFamily { x: 8, d: (4, 5), e_max: Some(3), .. }));
        assert!(matches!(p, Template::EFamily { x: 8, d: (4, 5), e_max: Some(2), .. }));
    }

    #[test]
    fn generated_members_are_special() {
        let rows = generate_classification(3, ClassificationBounds::default()).unwrap();
        for r in &rows {
            for inst in r.instances(20, 6).unwrap() {
                let (special, _) = is_minus_one_special(&inst.system).unwrap();
                assert!(special, "{}", inst.system);
                assert_eq!(inst.v, inst.system.virtual_dim());
            }
        }
    }
}
