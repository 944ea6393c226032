//! Acceptance suite: one PASS/FAIL line per criterion. All comparisons are
//! exact (tolerance 0). Exits non-zero when a criterion fails for any reason
//! other than the single documented discrepancy of criterion 2.

use std::collections::BTreeSet;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use hhdim::cremona::{cremona, split_fixed_line};
use hhdim::degeneration::{
    check_certificate, degenerate, key_lemma_dim, recursive_dim, CheckOptions, CheckReport, ProverConfig,
};
use hhdim::neg_curves::{
    catalog, generate_classification, is_minus_one_class, ClassificationBounds, Kind, SplitCurve,
};
use hhdim::oracle::{dimension_char_p, DEFAULT_PRIME};
use hhdim::tables::{
    completeness_sweep, read_csv, section7_exceptions, theorem2_table, theorem2_templates, verify_table,
    ClassificationRow, ExpectedStatus, Method, Template, VerifyLimits, VerifyMode,
};
use hhdim::verdict::Citation;
use hhdim::{DimVerdict, LinearSystem, Status};

const P: u64 = DEFAULT_PRIME;
const SEED: u64 = 0;
const TRIALS: usize = 3;

enum Outcome {
    Pass(String),
    Fail(String),
    /// Fails exactly as analysed; does not fail the run.
    KnownFail(String),
}

fn oracle_ell(l: &LinearSystem) -> i64 {
    dimension_char_p(l, SEED, P, TRIALS).expect("oracle runs").ell
}

fn sys(s: &str) -> LinearSystem {
    s.parse().expect("valid system")
}

fn c1_formula() -> Outcome {
    let mut checked = 0;
    let mut bad = Vec::new();
    for t in theorem2_templates() {
        let symbolic = matches!(t, Template::TwoParameter { .. });
        for row in t.rows(4) {
            let limit = if symbolic { 40 } else { i64::MAX };
            for inst in row.instances(limit, 12).expect("well-formed row") {
                checked += 1;
                if inst.system.virtual_dim() != inst.v {
                    bad.push(format!("{}: table {} computed {}", inst.system, inst.v, inst.system.virtual_dim()));
                }
            }
        }
    }
    let report = verify_table(&theorem2_table(4), VerifyMode::Formula, VerifyLimits::default());
    if bad.is_empty() && report.passed() {
        Outcome::Pass(format!("{checked} instances (e <= 4, sporadic, two-parameter d <= 40)"))
    } else {
        Outcome::Fail(format!("{} mismatches: {:?}", bad.len(), bad))
    }
}

fn c2_classification() -> Outcome {
    let golden = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden/theorem2_e4.csv");
    let published = read_csv(fs::File::open(&golden).expect("golden present")).expect("golden parses");
    let generated = generate_classification(4, ClassificationBounds::default()).expect("search completes");
    let only_pub: Vec<&ClassificationRow> = published.iter().filter(|r| !generated.contains(r)).collect();
    let only_gen: Vec<&ClassificationRow> = generated.iter().filter(|r| !published.contains(r)).collect();
    let sweep = completeness_sweep(&theorem2_templates(), 26, 9).expect("sweep completes");
    if only_pub.is_empty() && only_gen.is_empty() && sweep.is_empty() {
        return Outcome::Pass(format!("{} rows byte-exact; sweep d <= 26, n <= 9 complete", published.len()));
    }

    // the one analysed discrepancy: L(4e+5,4e-3,6^2e) is special at e = 3 as well
    let family = "L(4e+5,4e-3,6^2e)";
    let pub_sys: BTreeSet<&str> = only_pub.iter().map(|r| r.system.as_str()).collect();
    let gen_sys: BTreeSet<&str> = only_gen.iter().map(|r| r.system.as_str()).collect();
    let extra = sys("L(17,9,6^6)");
    let known = only_pub.iter().chain(&only_gen).all(|r| r.family == family)
        && pub_sys == BTreeSet::from(["L(9,1,6^2)", "L(13,5,6^4)"])
        && gen_sys == BTreeSet::from(["L(9,1,6^2)", "L(13,5,6^4)", "L(17,9,6^6)"])
        && sweep.len() == 1
        && sweep[0].system == extra
        && sweep[0].found == Some(2)
        && sweep[0].tabulated.is_none()
        && oracle_ell(&extra) == 2
        && extra.expected_dim() == -1;
    let detail = format!(
        "{} published rows differ, {} generated rows differ, sweep finds {:?}",
        only_pub.len(),
        only_gen.len(),
        sweep.iter().map(|d| format!("{} ell={:?}", d.system, d.found)).collect::<Vec<_>>()
    );
    if known {
        Outcome::KnownFail(format!(
            "{detail}; L(17,9,6^6) (v=-1) is (-1)-special with ell=2, confirmed by the oracle, \
             so the range of {family} is 1 <= e <= 3 rather than 1 <= e <= 2"
        ))
    } else {
        Outcome::Fail(detail)
    }
}

fn c3_oracle_table() -> Outcome {
    let limits = VerifyLimits { max_degree: 26, max_points: 12, prime: P, seed: SEED, trials: TRIALS };
    let report = verify_table(&theorem2_table(4), VerifyMode::Oracle, limits);
    let fails: Vec<_> = report.failures().map(|c| format!("{} expected {} got {}", c.system, c.expected, c.actual)).collect();
    let detail = format!("{} instances with d <= 26 at p={P}, {} beyond the limit", report.checks.len(), report.skipped);
    if fails.is_empty() {
        Outcome::Pass(detail)
    } else {
        Outcome::Fail(format!("{detail}; failures: {fails:?}"))
    }
}

fn c4_section7(certs: &mut Vec<DimVerdict>) -> Outcome {
    let mut bad = Vec::new();
    let rows = section7_exceptions();
    let mut direct = 0;
    for r in &rows {
        let v = recursive_dim(&r.system, ProverConfig::default()).expect("prover runs");
        let ok = matches!(
            (r.status, v.status),
            (ExpectedStatus::Empty, Status::Empty) | (ExpectedStatus::Regular, Status::Regular(_))
        );
        if !ok {
            bad.push(format!("{}: expected {:?}, prover {}", r.system, r.status, v.status));
        }
        certs.push(v);
        if r.method == Method::DirectComputation {
            direct += 1;
            let o = dimension_char_p(&r.system, SEED, P, TRIALS).expect("oracle runs");
            let ok = match r.status {
                ExpectedStatus::Empty => o.ell == -1,
                ExpectedStatus::Regular => o.certified_regular,
            };
            if !ok {
                bad.push(format!("{}: oracle alone reads {}", r.system, o.ell));
            }
        }
    }
    if bad.is_empty() {
        Outcome::Pass(format!("{} systems, {direct} of them also by the oracle alone", rows.len()))
    } else {
        Outcome::Fail(format!("{bad:?}"))
    }
}

fn random_system(rng: &mut ChaCha8Rng, max_degree: i64, max_points: usize, max_mult: i64) -> LinearSystem {
    let d = rng.gen_range(1..=max_degree);
    let n = rng.gen_range(2..=max_points);
    let tail: Vec<i64> = (0..n).map(|_| rng.gen_range(0..=max_mult.min(d))).collect();
    LinearSystem::new(d, rng.gen_range(0..=max_mult.min(d)), tail).expect("nonnegative")
}

fn c5_cremona() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut bad = Vec::new();
    let mut moves = 0;
    while moves < 1000 {
        let l = random_system(&mut rng, 40, 10, 12);
        let slots = l.slot_count();
        let (i, j, k) = (rng.gen_range(0..slots), rng.gen_range(0..slots), rng.gen_range(0..slots));
        let Ok(img) = cremona(&l, i, j, k) else { continue };
        moves += 1;
        if img.virtual_dim() != l.virtual_dim() {
            bad.push(format!("{l} -> {img}: v changed"));
        }
        if cremona(&img, i, j, k).ok().as_ref() != Some(&l) {
            bad.push(format!("{l}: not an involution"));
        }
    }
    let mut oracle_checks = 0;
    while oracle_checks < 100 {
        let l = random_system(&mut rng, 15, 7, 6);
        let slots = l.slot_count();
        let (i, j) = (rng.gen_range(0..slots), rng.gen_range(0..slots));
        let k = rng.gen_range(0..slots);
        let image = if rng.gen_bool(0.5) { cremona(&l, i, j, k) } else { split_fixed_line(&l, i, j) };
        let Ok(img) = image else { continue };
        oracle_checks += 1;
        let (a, b) = (oracle_ell(&l), oracle_ell(&img));
        if a != b {
            bad.push(format!("{l} ({a}) -> {img} ({b})"));
        }
    }
    if bad.is_empty() {
        Outcome::Pass(format!("{moves} quadratic moves; {oracle_checks} oracle comparisons with d <= 15"))
    } else {
        Outcome::Fail(format!("{bad:?}"))
    }
}

fn c6_catalog() -> Outcome {
    let mut bad = Vec::new();
    let mut checked = 0;
    for c in catalog(20, 3) {
        let within = match c {
            hhdim::neg_curves::CatalogCurve::Pencil(e) | hhdim::neg_curves::CatalogCurve::Fan(e) => e <= 10,
            _ => true,
        };
        if !within {
            continue;
        }
        checked += 1;
        let n = c.points();
        let slots: Vec<usize> = (1..=n).collect();
        let parts = SplitCurve::Catalog { curve: c, slots }.constituent_classes(n + 1);
        if parts.iter().any(|p| !is_minus_one_class(p)) {
            bad.push(format!("{c}: constituent is not a (-1)-class"));
        }
        for (a, p) in parts.iter().enumerate() {
            for q in &parts[a + 1..] {
                if p.intersect(q) != 0 {
                    bad.push(format!("{c}: constituents meet"));
                }
            }
        }
        let total = parts.iter().fold(hhdim::DivisorClass::zero(n + 1), |acc, p| &acc + p);
        if total.self_intersection() != -(parts.len() as i64) {
            bad.push(format!("{c}: total self-intersection {}", total.self_intersection()));
        }
        if c.kind() == Kind::Simple && parts.len() != 1 {
            bad.push(format!("{c}: simple curve with {} constituents", parts.len()));
        }
    }
    if bad.is_empty() {
        Outcome::Pass(format!("{checked} catalog entries up to e = 10"))
    } else {
        Outcome::Fail(format!("{bad:?}"))
    }
}

fn c7_degeneration(certs: &mut Vec<DimVerdict>) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut bad = Vec::new();
    let mut overlap = 0;
    while overlap < 10_000 {
        let d = rng.gen_range(7..200);
        let s = degenerate(&LinearSystem::quasi_homogeneous(d, 0, 6, 1).expect("valid"), rng.gen_range(1..7), 0)
            .expect("valid split");
        let (hp, hf, rp) = (rng.gen_range(-1..50), rng.gen_range(-1..50), rng.gen_range(-1..50));
        let rf = d - s.k - 1 - rp;
        let (lp, lf) = (hp + rp + 1, hf + rf + 1);
        if rf < -1 {
            continue;
        }
        overlap += 1;
        let kernels = hp + hf + 1;
        let restrictions = lp + lf - d + s.k;
        if kernels != restrictions || key_lemma_dim(&s, lp, lf, hp, hf).ok() != Some(kernels) {
            bad.push(format!("key lemma at d={d} k={} ({lp},{lf},{hp},{hf})", s.k));
        }
    }
    let mut splits = 0usize;
    for _ in 0..1000 {
        let l = LinearSystem::quasi_homogeneous(
            rng.gen_range(2..80),
            rng.gen_range(0..80),
            rng.gen_range(1..7),
            rng.gen_range(0..20),
        )
        .expect("valid");
        for k in 1..l.degree() {
            for b in 0..=l.tail_points() {
                if let Ok(s) = degenerate(&l, k, b) {
                    splits += 1;
                    if s.v_p + s.hat_v_f != l.virtual_dim() - 1 {
                        bad.push(format!("v identity at {l} k={k} b={b}"));
                    }
                }
            }
        }
    }
    let mut compared = 0;
    let mut unknown = 0;
    for d in 0..=20 {
        for m0 in 0..=d {
            for n in 0..=6 {
                let l = LinearSystem::quasi_homogeneous(d, m0, 6, n).expect("valid");
                let v = recursive_dim(&l, ProverConfig::default()).expect("prover runs");
                match v.status.ell() {
                    Some(ell) => {
                        compared += 1;
                        let o = oracle_ell(&l);
                        if o != ell {
                            bad.push(format!("{l}: prover {} oracle {o}", v.status));
                        }
                    }
                    None => unknown += 1,
                }
                certs.push(v);
            }
        }
    }
    if bad.is_empty() && unknown == 0 {
        Outcome::Pass(format!(
            "{overlap} key-lemma overlaps, {splits} degenerations on 1000 systems, {compared} sweep verdicts match the oracle"
        ))
    } else {
        Outcome::Fail(format!("{unknown} unknown; {:?}", bad.iter().take(20).collect::<Vec<_>>()))
    }
}

fn c8_certificates(certs: &mut Vec<DimVerdict>) -> Outcome {
    // degeneration-only certificates, so that the lemma routes are replayed too
    let config = ProverConfig { citations: vec![Citation::AtMostNinePoints], oracle: None, ..ProverConfig::default() };
    let no_fixed = ProverConfig { fixed_part_emptiness: false, ..config.clone() };
    for d in 6..=24 {
        for m0 in 0..=d {
            for n in 1..=12 {
                let l = LinearSystem::quasi_homogeneous(d, m0, 6, n).expect("valid");
                certs.push(recursive_dim(&l, config.clone()).expect("prover runs"));
                certs.push(recursive_dim(&l, no_fixed.clone()).expect("prover runs"));
            }
        }
    }
    let mut total = CheckReport::default();
    let mut bad = Vec::new();
    let mut degenerations = 0;
    for v in certs.iter() {
        if matches!(v.trace, hhdim::Trace::Degeneration { .. }) {
            degenerations += 1;
        }
        match check_certificate(v, CheckOptions { rerun_oracle: true }) {
            Ok(r) => {
                total.nodes += r.nodes;
                total.oracle_leaves += r.oracle_leaves;
                total.oracle_rerun += r.oracle_rerun;
                total.unknown_leaves += r.unknown_leaves;
            }
            Err(e) => bad.push(format!("{}: {e}", v.system)),
        }
    }
    if bad.is_empty() {
        Outcome::Pass(format!(
            "{} certificates ({degenerations} by degeneration), {} nodes, {} oracle leaves re-run, {} unknown leaves",
            certs.len(),
            total.nodes,
            total.oracle_rerun,
            total.unknown_leaves
        ))
    } else {
        Outcome::Fail(format!("{} rejected: {:?}", bad.len(), bad.iter().take(10).collect::<Vec<_>>()))
    }
}

fn main() -> ExitCode {
    let mut certs = Vec::new();
    let mut unexpected = 0;
    let mut report = |n: u32, name: &str, f: &mut dyn FnMut() -> Outcome| {
        let start = Instant::now();
        let outcome = f();
        let secs = start.elapsed().as_secs_f64();
        let (tag, detail) = match outcome {
            Outcome::Pass(d) => ("PASS", d),
            Outcome::Fail(d) => {
                unexpected += 1;
                ("FAIL", d)
            }
            Outcome::KnownFail(d) => ("FAIL (documented)", d),
        };
        println!("criterion {n} [{tag}] {name} (tolerance 0, {secs:.1}s): {detail}");
    };
    report(1, "virtual-dimension formula suite", &mut c1_formula);
    report(2, "classification reproduction", &mut c2_classification);
    report(3, "oracle agreement on the classification", &mut c3_oracle_table);
    report(4, "low-degree exception regression", &mut || c4_section7(&mut certs));
    report(5, "Cremona invariance", &mut c5_cremona);
    report(6, "(-1)-catalog soundness", &mut c6_catalog);
    report(7, "degeneration consistency", &mut || c7_degeneration(&mut certs));
    report(8, "certificate replay", &mut || c8_certificates(&mut certs));
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{unexpected} criteria failed");
        ExitCode::FAILURE
    }
}
