use std::fs;
use std::path::Path;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use hhdim::cremona::{cremona as cremona_move, split_fixed_line, standard_reduce, Move, MoveKind, ReductionEnd};
use hhdim::degeneration::{check_certificate as check_tree, degenerate, recursive_dim, CheckOptions, Prover};
use hhdim::neg_curves::{generate_classification, hh_dimension, is_minus_one_special, ClassificationBounds};
use hhdim::oracle::dimension_char_p;
use hhdim::tables::{
    read_csv, section7_exceptions, section7_to_csv, theorem2_table, to_csv, verify_table, ExpectedStatus, VerifyLimits,
    VerifyMode,
};
use hhdim::verdict::Lemma;
use hhdim::{parse_system, DimVerdict, LinearSystem, Status};

use crate::settings::Settings;

fn parse(text: &str) -> Result<LinearSystem> {
    parse_system(text).map_err(|e| anyhow::anyhow!("{e}"))
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn code(ok: bool) -> ExitCode {
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn rule(v: &DimVerdict) -> &'static str {
    match &v.trace {
        hhdim::Trace::Splitting { .. } => "splitting",
        hhdim::Trace::Reduction { .. } => "reduction",
        hhdim::Trace::Degeneration { .. } => "degeneration",
        hhdim::Trace::Oracle { .. } => "oracle",
        hhdim::Trace::Exhausted { .. } => "exhausted",
    }
}

pub fn dim(s: &Settings, system: &str, certificate: Option<&Path>) -> Result<ExitCode> {
    let l = parse(system)?;
    let v = recursive_dim(&l, s.prover())?;
    if let Some(path) = certificate {
        fs::write(path, serde_json::to_string_pretty(&v)?).with_context(|| format!("writing {}", path.display()))?;
    }
    if s.json {
        print_json(&json!({
            "system": l.to_string(),
            "status": v.status,
            "v": l.virtual_dim(),
            "e": l.expected_dim(),
            "rule": rule(&v),
            "nodes": v.node_count(),
        }))?;
    } else {
        println!("{l}: {} (v = {}, e = {}, by {}, {} nodes)", v.status, l.virtual_dim(), l.expected_dim(), rule(&v), v.node_count());
        if let hhdim::Trace::Exhausted { reason } = &v.trace {
            println!("  {reason}");
        }
    }
    Ok(code(v.status.is_decided()))
}

pub fn vdim(s: &Settings, system: &str) -> Result<ExitCode> {
    let l = parse(system)?;
    if s.json {
        print_json(&json!({ "system": l.to_string(), "v": l.virtual_dim(), "e": l.expected_dim() }))?;
    } else {
        println!("{l}: v = {}, e = {}", l.virtual_dim(), l.expected_dim());
    }
    Ok(ExitCode::SUCCESS)
}

pub fn classify(s: &Settings, system: &str) -> Result<ExitCode> {
    let l = parse(system)?;
    let (special, witness) = is_minus_one_special(&l)?;
    let predicted = hh_dimension(&l)?;
    if s.json {
        print_json(&json!({
            "system": l.to_string(),
            "minus_one_special": special,
            "witness": witness,
            "predicted": predicted.status,
        }))?;
        return Ok(ExitCode::SUCCESS);
    }
    println!("{l}: {}", if special { "(-1)-special" } else { "not (-1)-special" });
    if let Some(w) = &witness {
        for e in &w.entries {
            println!("  fixed {} x {:?}", e.multiplicity, e.curve);
        }
        println!("  residual {} (v = {})", w.residual, w.residual.virtual_dim());
        if let Some(reason) = &w.empty {
            println!("  empty: {reason:?}");
        }
    }
    println!("  predicted {}", predicted.status);
    Ok(ExitCode::SUCCESS)
}

pub fn table_generate(s: &Settings, e_max: i64, search: bool) -> Result<ExitCode> {
    let rows = if search { generate_classification(e_max, ClassificationBounds::default())? } else { theorem2_table(e_max) };
    if s.json {
        print_json(&rows)?;
    } else {
        print!("{}", to_csv(&rows)?);
    }
    Ok(ExitCode::SUCCESS)
}

pub fn table_verify(
    s: &Settings,
    mode: VerifyMode,
    max_degree: i64,
    max_points: usize,
    input: Option<&Path>,
    e_max: i64,
) -> Result<ExitCode> {
    let rows = match input {
        Some(path) => {
            let file = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
            read_csv(file)?
        }
        None => theorem2_table(e_max),
    };
    let limits = VerifyLimits { max_degree, max_points, prime: s.prime, seed: s.seed, trials: s.trials };
    let report = verify_table(&rows, mode, limits);
    if s.json {
        print_json(&report)?;
    } else {
        for c in report.failures() {
            println!("FAIL row {}: {} expected {}, got {}", c.row, c.system, c.expected, c.actual);
            println!("  reproduce: {}", c.reproduce);
        }
        let failed = report.failures().count();
        println!("{} checks, {failed} failed, {} skipped", report.checks.len(), report.skipped);
    }
    Ok(code(report.passed()))
}

#[derive(Serialize)]
struct Section7Check {
    system: String,
    expected: ExpectedStatus,
    prover: Status,
    passed: bool,
}

pub fn section7(s: &Settings, check: bool) -> Result<ExitCode> {
    let rows = section7_exceptions();
    if !check {
        if s.json {
            print_json(&rows)?;
        } else {
            print!("{}", section7_to_csv(&rows)?);
        }
        return Ok(ExitCode::SUCCESS);
    }
    let config = s.prover();
    let checks = rows
        .par_iter()
        .map(|r| {
            let v = recursive_dim(&r.system, config.clone())?;
            let passed = matches!(
                (r.status, v.status),
                (ExpectedStatus::Empty, Status::Empty) | (ExpectedStatus::Regular, Status::Regular(_))
            );
            Ok(Section7Check { system: r.system.to_string(), expected: r.status, prover: v.status, passed })
        })
        .collect::<Result<Vec<_>>>()?;
    let ok = checks.iter().all(|c| c.passed);
    if s.json {
        print_json(&checks)?;
    } else {
        for c in checks.iter().filter(|c| !c.passed) {
            println!("FAIL {}: expected {:?}, prover {}", c.system, c.expected, c.prover);
        }
        println!("{} systems, {} failed", checks.len(), checks.iter().filter(|c| !c.passed).count());
    }
    Ok(code(ok))
}

fn parse_move(l: &LinearSystem, text: &str) -> Result<Move> {
    let slots = text
        .split(',')
        .map(|t| t.trim().parse::<usize>().with_context(|| format!("bad slot {t:?} in move {text:?}")))
        .collect::<Result<Vec<_>>>()?;
    let (kind, after) = match slots[..] {
        [i, j, k] => (MoveKind::Cremona, cremona_move(l, i, j, k)?),
        [i, j] => (MoveKind::Line, split_fixed_line(l, i, j)?),
        _ => bail!("move {text:?} needs two or three slots"),
    };
    Ok(Move { kind, slots, before: l.clone(), after })
}

pub fn cremona(s: &Settings, system: &str, moves: &[String]) -> Result<ExitCode> {
    let l = parse(system)?;
    let (transcript, result, end) = if moves.is_empty() {
        let r = standard_reduce(&l);
        (r.transcript, r.result, Some(r.end))
    } else {
        let mut cur = l.clone();
        let mut transcript = Vec::with_capacity(moves.len());
        for m in moves {
            let mv = parse_move(&cur, m)?;
            cur = mv.after.clone();
            transcript.push(mv);
        }
        (transcript, cur, None)
    };
    if s.json {
        print_json(&json!({ "system": l.to_string(), "transcript": transcript, "result": result, "end": end }))?;
        return Ok(ExitCode::SUCCESS);
    }
    for m in &transcript {
        let name = match m.kind {
            MoveKind::Cremona => "cremona",
            MoveKind::Line => "line",
        };
        println!("{} --{name} {:?}--> {}", m.before, m.slots, m.after);
    }
    match end {
        Some(ReductionEnd::Standard) => println!("standard form: {result} (v = {})", result.virtual_dim()),
        Some(ReductionEnd::Empty { slot }) => println!("empty: slot {slot} of {result} exceeds the degree"),
        None => println!("result: {result} (v = {})", result.virtual_dim()),
    }
    Ok(ExitCode::SUCCESS)
}

pub fn degen(s: &Settings, system: &str, k: i64, b: usize, prove: bool) -> Result<ExitCode> {
    let l = parse(system)?;
    let split = degenerate(&l, k, b)?;
    let proof = if prove {
        let lemma = if split.v <= -1 { Lemma::Emptiness } else { Lemma::NonSpeciality };
        let mut prover = Prover::new(s.prover());
        Some((lemma, prover.try_lemma(&l.normalize(), k, b, lemma, 0)?))
    } else {
        None
    };
    if s.json {
        let (lemma, verdict) = match &proof {
            Some((lemma, v)) => (Some(*lemma), v.as_ref().map(|v| v.status)),
            None => (None, None),
        };
        print_json(&json!({ "split": split, "lemma": lemma, "proved": verdict }))?;
    } else {
        println!("{} with k = {k}, b = {b} (v = {})", split.system, split.v);
        println!("  L_P    {} (v = {})", split.l_p, split.v_p);
        println!("  L_F    {} (v = {})", split.l_f, split.v_f);
        println!("  hatL_P {} (v = {})", split.hat_l_p, split.hat_v_p);
        println!("  hatL_F {} (v = {})", split.hat_l_f, split.hat_v_f);
        if let Some((lemma, v)) = &proof {
            match v {
                Some(v) => println!("  {lemma:?} lemma proves {}", v.status),
                None => println!("  {lemma:?} lemma does not apply"),
            }
        }
    }
    Ok(code(proof.is_none_or(|(_, v)| v.is_some())))
}

pub fn oracle(s: &Settings, system: &str) -> Result<ExitCode> {
    let l = parse(system)?;
    let r = dimension_char_p(&l, s.seed, s.prime, s.trials)?;
    if s.json {
        print_json(&r)?;
    } else {
        let verdict = if r.certified_regular { "certified regular" } else { "upper bound" };
        println!("{l}: ell = {} over F_{} (rank {}, {} trials, {verdict})", r.ell, r.prime, r.rank, r.trials_run);
    }
    Ok(ExitCode::SUCCESS)
}

pub fn check_certificate(s: &Settings, file: &Path, rerun_oracle: bool) -> Result<ExitCode> {
    let text = fs::read_to_string(file).with_context(|| format!("reading {}", file.display()))?;
    let v: DimVerdict = serde_json::from_str(&text).with_context(|| format!("parsing {}", file.display()))?;
    let result = check_tree(&v, CheckOptions { rerun_oracle });
    if s.json {
        match &result {
            Ok(report) => print_json(&json!({ "accepted": true, "status": v.status, "report": report }))?,
            Err(e) => print_json(&json!({ "accepted": false, "reason": e.to_string() }))?,
        }
    } else {
        match &result {
            Ok(r) => println!(
                "accepted {}: {} ({} nodes, {} oracle leaves, {} rerun, {} unknown)",
                v.system, v.status, r.nodes, r.oracle_leaves, r.oracle_rerun, r.unknown_leaves
            ),
            Err(e) => println!("rejected: {e}"),
        }
    }
    Ok(code(result.is_ok()))
}
