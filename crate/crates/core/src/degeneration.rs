//! `(k,b)`-degenerations of the plane, the dimension combiner for the limit
//! system, and a recursive prover producing replayable certificates.
//!
//! A degeneration sends `L(d, m0, m^n)` to a limit on two surfaces: the plane
//! `P` carrying `p0` and `n - b` points, and `F` carrying `b` points. The
//! restrictions are `L_P = L(d-k, m0, m^{n-b})` and `L_F = L(d, d-k, m^b)`,
//! with kernels `hatL_P = L(d-k-1, m0, m^{n-b})` and `hatL_F = L(d, d-k+1, m^b)`.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::cremona::{replay, standard_reduce, ReductionEnd};
use crate::error::{Error, Result};
use crate::neg_curves::{hh_dimension, in_regime};
use crate::oracle::{dimension_char_p, DEFAULT_PRIME, DEFAULT_TRIALS};
use crate::system::LinearSystem;
use crate::verdict::{Basis, Citation, DimVerdict, Lemma, Status, Trace};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegenerationSplit {
    pub system: LinearSystem,
    pub k: i64,
    pub b: usize,
    pub l_p: LinearSystem,
    pub l_f: LinearSystem,
    pub hat_l_p: LinearSystem,
    pub hat_l_f: LinearSystem,
    pub v: i64,
    pub v_p: i64,
    pub v_f: i64,
    pub hat_v_p: i64,
    pub hat_v_f: i64,
}

impl DegenerationSplit {
    /// `[L_P, L_F, hatL_P, hatL_F]`.
    pub fn parts(&self) -> [&LinearSystem; 4] {
        [&self.l_p, &self.l_f, &self.hat_l_p, &self.hat_l_f]
    }
}

pub fn degenerate(l: &LinearSystem, k: i64, b: usize) -> Result<DegenerationSplit> {
    let l = l.normalize();
    let m = l
        .tail_multiplicity()
        .ok_or_else(|| Error::NotQuasiHomogeneous(l.to_string()))?;
    let (d, m0, n) = (l.degree(), l.m0(), l.tail_points());
    if k < 1 || k >= d {
        return Err(Error::DegenerationRange(format!("k = {k} outside 1..{d}")));
    }
    if b > n {
        return Err(Error::DegenerationRange(format!("b = {b} exceeds n = {n}")));
    }
    let qh = |d, m0, count| LinearSystem::quasi_homogeneous(d, m0, m, count);
    let l_p = qh(d - k, m0, n - b)?;
    let l_f = qh(d, d - k, b)?;
    let hat_l_p = qh(d - k - 1, m0, n - b)?;
    let hat_l_f = qh(d, d - k + 1, b)?;
    let s = DegenerationSplit {
        k,
        b,
        v: l.virtual_dim(),
        v_p: l_p.virtual_dim(),
        v_f: l_f.virtual_dim(),
        hat_v_p: hat_l_p.virtual_dim(),
        hat_v_f: hat_l_f.virtual_dim(),
        system: l,
        l_p,
        l_f,
        hat_l_p,
        hat_l_f,
    };
    assert_eq!(s.v_p + s.hat_v_f, s.v - 1);
    assert_eq!(s.v_p - s.hat_v_p, d - k + 1);
    assert_eq!(s.v_f - s.hat_v_f, d - k + 1);
    Ok(s)
}

/// Dimension of the limit system from the four restricted dimensions.
pub fn key_lemma_dim(s: &DegenerationSplit, ell_p: i64, ell_f: i64, ell_hat_p: i64, ell_hat_f: i64) -> Result<i64> {
    let ells = [ell_p, ell_f, ell_hat_p, ell_hat_f];
    if ells.iter().any(|&e| e < -1) {
        return Err(Error::KeyLemma(format!("dimensions {ells:?} below -1")));
    }
    if ell_hat_p > ell_p || ell_hat_f > ell_f {
        return Err(Error::KeyLemma(format!("kernel larger than its system in {ells:?}")));
    }
    let room = s.system.degree() - s.k - 1;
    let r = (ell_p - ell_hat_p - 1) + (ell_f - ell_hat_f - 1);
    let kernels = ell_hat_p + ell_hat_f + 1;
    let restrictions = ell_p + ell_f - s.system.degree() + s.k;
    if r == room && kernels != restrictions {
        return Err(Error::KeyLemma(format!("branches disagree at r = {r}: {kernels} vs {restrictions}")));
    }
    Ok(if r <= room { kernels } else { restrictions })
}

fn nonspecial(l: &LinearSystem, st: Status) -> bool {
    matches!(st, Status::Regular(_) | Status::Empty) && st.ell() == Some(l.expected_dim())
}

/// Whether the lemma's hypotheses hold for the given part statuses, and if so the status it yields.
fn apply_lemma(lemma: Lemma, s: &DegenerationSplit, st: [Status; 4]) -> Result<Option<Status>> {
    if s.b >= s.system.tail_points() {
        return Ok(None);
    }
    if !nonspecial(&s.l_p, st[0]) || !nonspecial(&s.l_f, st[1]) {
        return Ok(None);
    }
    let holds = match lemma {
        Lemma::Emptiness => {
            s.v <= -1 && st[2] == Status::Empty && st[3] == Status::Empty && s.hat_v_p <= s.v
        }
        Lemma::NonSpeciality => {
            let (Some(hp), Some(hf)) = (st[2].ell(), st[3].ell()) else { return Ok(None) };
            s.v >= -1 && s.v_p >= -1 && s.v_f >= -1 && s.v > hp + hf
        }
    };
    if !holds {
        return Ok(None);
    }
    let ell = |i: usize| st[i].ell().expect("decided");
    let ell0 = key_lemma_dim(s, ell(0), ell(1), ell(2), ell(3))?;
    let expected = s.system.expected_dim();
    if ell0 != expected {
        return Err(Error::KeyLemma(format!(
            "{lemma:?} holds for ({}, {}) on {} but the limit has dimension {ell0}",
            s.k, s.b, s.system
        )));
    }
    Ok(Some(Status::from_ell(expected, expected)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleConfig {
    pub prime: u64,
    pub seed: u64,
    pub trials: usize,
    /// Largest `(d+1)(d+2)/2` the fallback will attempt.
    pub max_monomials: i64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self { prime: DEFAULT_PRIME, seed: 0, trials: DEFAULT_TRIALS, max_monomials: 5151 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProverConfig {
    pub citations: Vec<Citation>,
    pub oracle: Option<OracleConfig>,
    pub ks: Vec<i64>,
    pub max_depth: usize,
    pub max_nodes: usize,
    /// Accept emptiness shown by splitting off fixed curves.
    pub fixed_part_emptiness: bool,
}

impl Default for ProverConfig {
    fn default() -> Self {
        Self {
            citations: Citation::ALL.to_vec(),
            oracle: Some(OracleConfig::default()),
            ks: vec![5, 6],
            max_depth: 64,
            max_nodes: 20_000,
            fixed_part_emptiness: true,
        }
    }
}

/// Recursive dimension search with memoization on normalized systems.
pub struct Prover {
    pub config: ProverConfig,
    memo: HashMap<LinearSystem, DimVerdict>,
    nodes: usize,
}

impl Prover {
    pub fn new(config: ProverConfig) -> Self {
        Self { config, memo: HashMap::new(), nodes: 0 }
    }

    /// Nodes evaluated so far across calls.
    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn dim(&mut self, l: &LinearSystem) -> Result<DimVerdict> {
        if !in_regime(l) {
            return Err(Error::Precondition(format!("{l} is not quasi-homogeneous with tail multiplicity <= 6")));
        }
        self.node(&l.normalize(), 0)
    }

    fn unknown(l: &LinearSystem, reason: String) -> DimVerdict {
        DimVerdict { system: l.clone(), status: Status::Unknown, trace: Trace::Exhausted { reason } }
    }

    fn node(&mut self, l: &LinearSystem, depth: usize) -> Result<DimVerdict> {
        if let Some(v) = self.memo.get(l) {
            return Ok(v.clone());
        }
        if depth > self.config.max_depth {
            return Ok(Self::unknown(l, format!("depth limit {}", self.config.max_depth)));
        }
        if self.nodes >= self.config.max_nodes {
            return Ok(Self::unknown(l, format!("node limit {}", self.config.max_nodes)));
        }
        self.nodes += 1;
        let v = self.evaluate(l, depth)?;
        if v.status.is_decided() {
            self.memo.insert(l.clone(), v.clone());
        }
        Ok(v)
    }

    fn evaluate(&mut self, l: &LinearSystem, depth: usize) -> Result<DimVerdict> {
        if let Some(v) = self.split_fixed_part(l, depth)? {
            return Ok(v);
        }

        let red = standard_reduce(l);
        let expected = l.expected_dim();
        match red.end {
            ReductionEnd::Empty { slot } => {
                return Ok(DimVerdict {
                    system: l.clone(),
                    status: Status::Empty,
                    trace: Trace::Reduction {
                        transcript: red.transcript,
                        reduced: red.result,
                        basis: Basis::MultiplicityExceedsDegree { slot },
                    },
                })
            }
            ReductionEnd::Standard => {
                if let Some(&citation) = self.config.citations.iter().find(|c| c.covers(&red.result)) {
                    let ell = red.result.expected_dim();
                    return Ok(DimVerdict {
                        system: l.clone(),
                        status: Status::from_ell(ell, expected),
                        trace: Trace::Reduction {
                            transcript: red.transcript,
                            reduced: red.result,
                            basis: Basis::Cited { citation },
                        },
                    });
                }
            }
        }

        for lemma in lemmas_for(l.virtual_dim()) {
            for k in self.config.ks.clone() {
                for b in b_order(l, k) {
                    if let Some(v) = self.try_lemma(l, k, b, lemma, depth)? {
                        return Ok(v);
                    }
                }
            }
        }

        if let Some(oc) = self.config.oracle {
            if l.monomial_count() <= oc.max_monomials {
                let r = dimension_char_p(l, oc.seed, oc.prime, oc.trials)?;
                if r.certified_regular {
                    return Ok(DimVerdict {
                        system: l.clone(),
                        status: Status::from_ell(r.ell, expected),
                        trace: Trace::Oracle { prime: oc.prime, seed: oc.seed, trials: oc.trials, ell: r.ell },
                    });
                }
                return Ok(Self::unknown(l, format!("oracle reading {} above expected {expected}", r.ell)));
            }
        }
        Ok(Self::unknown(l, "no rule applies".into()))
    }

    /// Removes the fixed (-1)-curves and settles `l` through its residual.
    fn split_fixed_part(&mut self, l: &LinearSystem, depth: usize) -> Result<Option<DimVerdict>> {
        let Trace::Splitting { witness, .. } = hh_dimension(l)?.trace else { unreachable!("hh traces are splittings") };
        let expected = l.expected_dim();
        if witness.empty.is_some() {
            return Ok(self.config.fixed_part_emptiness.then(|| DimVerdict {
                system: l.clone(),
                status: Status::Empty,
                trace: Trace::Splitting { witness, residual: None },
            }));
        }
        if witness.entries.is_empty() || !in_regime(&witness.residual) {
            return Ok(None);
        }
        let child = self.node(&witness.residual.normalize(), depth + 1)?;
        let Some(ell) = child.ell() else { return Ok(None) };
        let status = Status::from_ell(ell, expected);
        if status == Status::Empty && !self.config.fixed_part_emptiness {
            return Ok(None);
        }
        Ok(Some(DimVerdict { system: l.clone(), status, trace: Trace::Splitting { witness, residual: Some(Box::new(child)) } }))
    }

    /// Evaluates the four parts of a `(k,b)`-degeneration and applies `lemma` if its hypotheses hold.
    pub fn try_lemma(&mut self, l: &LinearSystem, k: i64, b: usize, lemma: Lemma, depth: usize) -> Result<Option<DimVerdict>> {
        let s = degenerate(l, k, b)?;
        let numeric = match lemma {
            Lemma::Emptiness => s.v <= -1 && s.hat_v_p <= s.v,
            Lemma::NonSpeciality => s.v >= -1 && s.v_p >= -1 && s.v_f >= -1,
        };
        if !numeric {
            return Ok(None);
        }
        let mut parts = Vec::with_capacity(4);
        for (i, part) in s.parts().into_iter().enumerate() {
            let v = self.node(&part.normalize(), depth + 1)?;
            let usable = match (i, lemma) {
                (0 | 1, _) => nonspecial(part, v.status),
                (_, Lemma::Emptiness) => v.status == Status::Empty,
                (_, Lemma::NonSpeciality) => v.status.is_decided(),
            };
            if !usable {
                return Ok(None);
            }
            parts.push(v);
        }
        let st = [parts[0].status, parts[1].status, parts[2].status, parts[3].status];
        Ok(apply_lemma(lemma, &s, st)?.map(|status| DimVerdict {
            system: l.clone(),
            status,
            trace: Trace::Degeneration { k, b, lemma, parts },
        }))
    }

    pub fn prove_empty(&mut self, l: &LinearSystem, k: i64, b: usize) -> Result<bool> {
        if l.virtual_dim() > -1 {
            return Err(Error::Precondition(format!("{l} has v = {} > -1", l.virtual_dim())));
        }
        Ok(self.try_lemma(&l.normalize(), k, b, Lemma::Emptiness, 0)?.is_some())
    }

    pub fn prove_nonspecial(&mut self, l: &LinearSystem, k: i64, b: usize) -> Result<bool> {
        if l.virtual_dim() < -1 {
            return Err(Error::Precondition(format!("{l} has v = {} < -1", l.virtual_dim())));
        }
        Ok(self.try_lemma(&l.normalize(), k, b, Lemma::NonSpeciality, 0)?.is_some())
    }
}

fn lemmas_for(v: i64) -> Vec<Lemma> {
    let mut out = Vec::new();
    if v <= -1 {
        out.push(Lemma::Emptiness);
    }
    if v >= -1 {
        out.push(Lemma::NonSpeciality);
    }
    out
}

/// `b` descending from `min(n-1, floor(2d/7))`, then the remaining values below `n` ascending.
pub fn b_order(l: &LinearSystem, k: i64) -> Vec<usize> {
    let n = l.tail_points();
    let d = l.degree();
    if n == 0 || k >= d {
        return Vec::new();
    }
    let start = ((2 * d / 7) as usize).min(n - 1);
    let mut out: Vec<usize> = (1..=start).rev().collect();
    out.extend(start + 1..n);
    out
}

pub fn recursive_dim(l: &LinearSystem, config: ProverConfig) -> Result<DimVerdict> {
    Prover::new(config).dim(l)
}

pub fn prove_empty(l: &LinearSystem, k: i64, b: usize) -> Result<bool> {
    Prover::new(ProverConfig::default()).prove_empty(l, k, b)
}

pub fn prove_nonspecial(l: &LinearSystem, k: i64, b: usize) -> Result<bool> {
    Prover::new(ProverConfig::default()).prove_nonspecial(l, k, b)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CheckOptions {
    /// Re-run oracle leaves; otherwise they are counted but trusted.
    pub rerun_oracle: bool,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckReport {
    pub nodes: usize,
    pub oracle_leaves: usize,
    pub oracle_rerun: usize,
    pub unknown_leaves: usize,
}

/// Replays a verdict tree without any search.
pub fn check_certificate(v: &DimVerdict, opts: CheckOptions) -> Result<CheckReport> {
    let mut report = CheckReport::default();
    check_node(v, opts, &mut report)?;
    Ok(report)
}

fn reject<T>(v: &DimVerdict, msg: impl std::fmt::Display) -> Result<T> {
    Err(Error::Certificate(format!("{}: {msg}", v.system)))
}

fn check_node(v: &DimVerdict, opts: CheckOptions, report: &mut CheckReport) -> Result<()> {
    report.nodes += 1;
    let l = &v.system;
    let expected = l.expected_dim();
    match &v.trace {
        Trace::Splitting { witness, residual } => {
            if witness.system.normalize() != l.normalize() {
                return reject(v, "witness is for another system");
            }
            witness.check()?;
            let ok = match residual {
                None => v.status == Status::Empty && witness.empty.is_some(),
                Some(child) => {
                    if witness.empty.is_some() || child.system.normalize() != witness.residual.normalize() {
                        return reject(v, "residual verdict is for another system");
                    }
                    check_node(child, opts, report)?;
                    child.ell().is_some_and(|ell| v.status == Status::from_ell(ell, expected))
                }
            };
            if !ok {
                return reject(v, format!("splitting does not support {}", v.status));
            }
        }
        Trace::Reduction { transcript, reduced, basis } => {
            if &replay(l, transcript)? != reduced {
                return reject(v, "transcript does not end at the reduced system");
            }
            let ok = match basis {
                Basis::MultiplicityExceedsDegree { slot } => {
                    v.status == Status::Empty && reduced.mult(*slot) > reduced.degree()
                }
                Basis::Cited { citation } => {
                    reduced.is_standard()
                        && citation.covers(reduced)
                        && v.status == Status::from_ell(reduced.expected_dim(), expected)
                }
            };
            if !ok {
                return reject(v, format!("reduction basis {basis:?} does not give {}", v.status));
            }
        }
        Trace::Degeneration { k, b, lemma, parts } => {
            let s = degenerate(l, *k, *b)?;
            if parts.len() != 4 {
                return reject(v, "degeneration needs four parts");
            }
            for (part, sys) in parts.iter().zip(s.parts()) {
                if part.system.normalize() != sys.normalize() {
                    return reject(v, format!("part {} should be {sys}", part.system));
                }
                check_node(part, opts, report)?;
            }
            let st = [parts[0].status, parts[1].status, parts[2].status, parts[3].status];
            match apply_lemma(*lemma, &s, st)? {
                Some(status) if status == v.status => {}
                _ => return reject(v, format!("{lemma:?} does not yield {}", v.status)),
            }
        }
        Trace::Oracle { prime, seed, trials, ell } => {
            report.oracle_leaves += 1;
            if *ell != expected || v.status != Status::from_ell(*ell, expected) {
                return reject(v, "oracle leaf must read the expected dimension");
            }
            if opts.rerun_oracle {
                report.oracle_rerun += 1;
                let r = dimension_char_p(l, *seed, *prime, *trials)?;
                if r.ell != *ell {
                    return reject(v, format!("oracle re-run reads {}, certificate says {ell}", r.ell));
                }
            }
        }
        Trace::Exhausted { .. } => {
            report.unknown_leaves += 1;
            if v.status != Status::Unknown {
                return reject(v, "exhausted search cannot decide");
            }
        }
    }
    Ok(())
}
