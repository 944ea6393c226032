//! Quadratic Cremona transformations on multiplicity data, splitting of fixed
//! lines, and reduction to standard form with a replayable transcript.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Slot};
use crate::system::{DivisorClass, LinearSystem};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MoveKind {
    Cremona,
    Line,
}

/// One atomic step of a reduction.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Move {
    #[serde(rename = "move")]
    pub kind: MoveKind,
    pub slots: Vec<usize>,
    pub before: LinearSystem,
    pub after: LinearSystem,
}

impl Move {
    /// Recomputes `after` from `before` and checks it matches.
    pub fn replay(&self) -> Result<()> {
        let after = match (self.kind, self.slots.as_slice()) {
            (MoveKind::Cremona, &[i, j, k]) => cremona(&self.before, i, j, k)?,
            (MoveKind::Line, &[i, j]) => split_fixed_line(&self.before, i, j)?,
            _ => {
                return Err(Error::Certificate(format!(
                    "{:?} move with {} slots",
                    self.kind,
                    self.slots.len()
                )))
            }
        };
        if after != self.after {
            return Err(Error::Certificate(format!(
                "move on {} yields {}, transcript says {}",
                self.before, after, self.after
            )));
        }
        Ok(())
    }
}

fn check_slots(l: &LinearSystem, slots: &[usize]) -> Result<()> {
    let points = l.slot_count();
    if let Some(&slot) = slots.iter().find(|&&s| s >= points) {
        return Err(Error::SlotOutOfRange { slot, points });
    }
    for (a, &s) in slots.iter().enumerate() {
        if slots[a + 1..].contains(&s) {
            return Err(Error::RepeatedSlot(slots.to_vec()));
        }
    }
    Ok(())
}

/// The transform of a class under the quadratic map based at slots `i, j, k`.
/// No sign conditions are imposed.
pub fn cremona_class(d: &DivisorClass, i: usize, j: usize, k: usize) -> DivisorClass {
    let slots = d.slot_count().max(i.max(j).max(k) + 1);
    let d = d.padded(slots);
    let (mi, mj, mk) = (d.mult(i), d.mult(j), d.mult(k));
    let deg = d.degree();
    let mut mults = d.mults().to_vec();
    mults[i] = deg - mj - mk;
    mults[j] = deg - mi - mk;
    mults[k] = deg - mi - mj;
    DivisorClass::new(2 * deg - mi - mj - mk, mults)
}

/// `L(2d - mi - mj - mk, ..., d - mj - mk, ..., d - mi - mk, ..., d - mi - mj, ...)`.
pub fn cremona(l: &LinearSystem, i: usize, j: usize, k: usize) -> Result<LinearSystem> {
    check_slots(l, &[i, j, k])?;
    let image = cremona_class(&l.class(), i, j, k);
    if image.degree() < 0 {
        return Err(Error::NegativeEntry { slot: Slot::Degree, value: image.degree() });
    }
    for s in [i, j, k] {
        if image.mult(s) < 0 {
            return Err(Error::NegativeEntry { slot: Slot::Point(s), value: image.mult(s) });
        }
    }
    image.to_system()
}

/// Removes one copy of the line through `pi` and `pj`, which is a fixed component when `d < mi + mj`.
pub fn split_fixed_line(l: &LinearSystem, i: usize, j: usize) -> Result<LinearSystem> {
    check_slots(l, &[i, j])?;
    let (mi, mj) = (l.mult(i), l.mult(j));
    let excess = l.degree() - mi - mj;
    if excess >= 0 || mi < 1 || mj < 1 {
        return Err(Error::NotFixed { i, j, excess });
    }
    let mut slots = l.slots();
    slots[i] -= 1;
    slots[j] -= 1;
    LinearSystem::from_slots(l.degree() - 1, &slots)
}

/// Why [`standard_reduce`] stopped.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ReductionEnd {
    /// `d >= m1 + m2 + m3`.
    Standard,
    /// A multiplicity exceeds the degree, so the system is empty.
    Empty { slot: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Reduction {
    pub transcript: Vec<Move>,
    pub result: LinearSystem,
    pub end: ReductionEnd,
}

/// Slot indices sorted by multiplicity descending, ties by slot index.
fn ranked_slots(l: &LinearSystem) -> Vec<usize> {
    let mut order: Vec<usize> = (0..l.slot_count()).collect();
    order.sort_by_key(|&s| (std::cmp::Reverse(l.mult(s)), s));
    order
}

/// Splits fixed lines and applies Cremona moves on the three largest
/// multiplicities until the system is in standard form or visibly empty.
pub fn standard_reduce(l: &LinearSystem) -> Reduction {
    let mut cur = l.clone();
    let mut transcript = Vec::new();
    loop {
        if let Some(slot) = (0..cur.slot_count()).find(|&s| cur.mult(s) > cur.degree()) {
            return Reduction { transcript, result: cur, end: ReductionEnd::Empty { slot } };
        }
        let order = ranked_slots(&cur);
        let top = |n: usize| order.iter().take(n).map(|&s| cur.mult(s)).sum::<i64>();
        let (kind, slots) = if order.len() >= 2 && top(2) > cur.degree() {
            (MoveKind::Line, vec![order[0], order[1]])
        } else if order.len() >= 3 && top(3) > cur.degree() {
            (MoveKind::Cremona, vec![order[0], order[1], order[2]])
        } else {
            return Reduction { transcript, result: cur, end: ReductionEnd::Standard };
        };
        let next = match kind {
            MoveKind::Line => split_fixed_line(&cur, slots[0], slots[1]),
            MoveKind::Cremona => cremona(&cur, slots[0], slots[1], slots[2]),
        }
        .expect("move preconditions hold by construction");
        assert!(next.degree() < cur.degree(), "reduction must lower the degree");
        transcript.push(Move { kind, slots, before: cur, after: next.clone() });
        cur = next;
    }
}

/// Replays a transcript from `start`, returning the final system.
pub fn replay(start: &LinearSystem, transcript: &[Move]) -> Result<LinearSystem> {
    let mut cur = start.clone();
    for m in transcript {
        if m.before != cur {
            return Err(Error::Certificate(format!("move starts at {}, expected {}", m.before, cur)));
        }
        m.replay()?;
        cur = m.after.clone();
    }
    Ok(cur)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn l(s: &str) -> LinearSystem {
        s.parse().unwrap()
    }

    #[test]
    fn cremona_examples() {
        let r = cremona(&l("L(20,12,6^4)"), 0, 1, 2).unwrap();
        assert_eq!(r.normalize().to_string(), "L(16,8,6^2,2^2)");
        let r = cremona(&l("L(14,5,6^5)"), 1, 2, 3).unwrap();
        assert_eq!(r.normalize().to_string(), "L(10,5,6^2,2^3)");
        match cremona(&l("L(10,2,6^3)"), 1, 2, 3) {
            Err(Error::NegativeEntry { slot: Slot::Point(1), value: -2 }) => {}
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(cremona(&l("L(5,1,1)"), 0, 1, 1), Err(Error::RepeatedSlot(_))));
        assert!(matches!(cremona(&l("L(5,1,1)"), 0, 1, 2), Err(Error::SlotOutOfRange { slot: 2, .. })));
    }

    #[test]
    fn line_examples() {
        let r = split_fixed_line(&l("L(11,6,6,3^2)"), 0, 1).unwrap();
        assert_eq!(r.to_string(), "L(10,5,5,3^2)");
        let r = split_fixed_line(&l("L(10,8,6,6)"), 0, 1).unwrap();
        assert_eq!(r.to_string(), "L(9,7,5,6)");
        assert!(matches!(split_fixed_line(&l("L(5,2,2)"), 0, 1), Err(Error::NotFixed { excess: 1, .. })));
    }

    #[test]
    fn reduce_examples() {
        let r = standard_reduce(&l("L(10,8,6^2)"));
        assert_eq!(r.end, ReductionEnd::Standard);
        assert_eq!(r.result.normalize().to_string(), "L(0)");
        assert_eq!(r.result.expected_dim(), 0);
        assert_eq!(replay(&l("L(10,8,6^2)"), &r.transcript).unwrap(), r.result);

        let r = standard_reduce(&l("L(7,0,2^5)"));
        assert!(r.transcript.is_empty());
        assert_eq!(r.result, l("L(7,0,2^5)"));

        let r = standard_reduce(&l("L(6,6,6)"));
        assert_eq!(r.result, l("L(0,0,0)"));
        assert_eq!(r.transcript.len(), 6);
        assert!(r.transcript.iter().all(|m| m.kind == MoveKind::Line));

        let r = standard_reduce(&l("L(3,5,1)"));
        assert_eq!(r.end, ReductionEnd::Empty { slot: 0 });
    }

    #[test]
    fn transcript_json_lines() {
        let r = standard_reduce(&l("L(14,5,6^5)"));
        let line = serde_json::to_string(&r.transcript[0]).unwrap();
        assert!(line.starts_with("{\"move\":"));
        let back: Move = serde_json::from_str(&line).unwrap();
        assert_eq!(back, r.transcript[0]);
    }

    fn arb_system() -> impl Strategy<Value = LinearSystem> {
        (0i64..40, prop::collection::vec(0i64..15, 3..9))
            .prop_map(|(d, slots)| LinearSystem::from_slots(d, &slots).unwrap())
    }

    fn arb_triple(n: usize) -> impl Strategy<Value = (usize, usize, usize)> {
        Just((0..n).collect::<Vec<_>>()).prop_shuffle().prop_map(|v| (v[0], v[1], v[2]))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn cremona_invariants((s, (i, j, k)) in arb_system().prop_flat_map(|s| {
            let n = s.slot_count();
            (Just(s), arb_triple(n))
        })) {
            if let Ok(t) = cremona(&s, i, j, k) {
                prop_assert_eq!(t.virtual_dim(), s.virtual_dim());
                prop_assert_eq!(cremona(&t, i, j, k).unwrap(), s.clone());
            }
            let c = s.class();
            let back = cremona_class(&cremona_class(&c, i, j, k), i, j, k);
            prop_assert_eq!(back, c.clone());
            prop_assert_eq!(cremona_class(&c, i, j, k).virtual_dim(), c.virtual_dim());
        }

        #[test]
        fn cremona_is_an_isometry(a in arb_system(), b in arb_system(), (i, j, k) in arb_triple(3)) {
            let (ca, cb) = (a.class(), b.class());
            let (ta, tb) = (cremona_class(&ca, i, j, k), cremona_class(&cb, i, j, k));
            prop_assert_eq!(ta.intersect(&tb), ca.intersect(&cb));
            prop_assert_eq!(ta.canonical_intersect(), ca.canonical_intersect());
        }

        #[test]
        fn line_split_shifts_v(s in arb_system(), (i, j, _k) in arb_triple(3)) {
            if let Ok(t) = split_fixed_line(&s, i, j) {
                let delta = s.mult(i) + s.mult(j) - s.degree() - 1;
                prop_assert_eq!(t.virtual_dim() - s.virtual_dim(), delta);
                prop_assert!(delta >= 0);
            }
        }

        #[test]
        fn reduction_terminates_in_standard_form(s in arb_system()) {
            let r = standard_reduce(&s);
            prop_assert_eq!(replay(&s, &r.transcript).unwrap(), r.result.clone());
            match r.end {
                ReductionEnd::Standard => prop_assert!(r.result.is_standard()),
                ReductionEnd::Empty { slot } => prop_assert!(r.result.mult(slot) > r.result.degree()),
            }
            prop_assert!(r.result.virtual_dim() >= s.virtual_dim());
        }
    }
}
