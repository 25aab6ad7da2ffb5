//! Acceptance criteria, one line each. Runs without the libtest harness so
//! the lines always print; exits nonzero if any criterion fails.

mod support;

use std::collections::BTreeSet;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng as _, SeedableRng};

use pqg::cli;
use pqg::format::{load, save};
use pqg::formula::{parse, Formula, Schema};
use pqg::kripke::{closure_contrast_report, contrast_json};
use pqg::search::{
    audit_suite, enumerate_models, find_countermodel, random_evaluable_formula, random_formula, random_model,
    report_json, reverify, AuditReport, Bounds, Classification, Suite, Witness, DEFAULT_AUDIT_BOUNDS,
};
use pqg::{Evaluator, ValidModel};
use support::reference::{RefModel, Reference};

type Outcome = Result<String, String>;

fn wide() -> Bounds {
    Bounds { max_worlds: 3, max_tower_depth: 4, ..Bounds::all(3) }
}

fn within(limit: u64, t: Instant) -> Result<Duration, String> {
    let d = t.elapsed();
    if d > Duration::from_secs(limit) {
        Err(format!("took {:.1}s, limit {limit}s", d.as_secs_f64()))
    } else {
        Ok(d)
    }
}

/// Writes the witness model to disk and re-checks it with `pqg check`.
fn recheck(w: &Witness) -> Result<(), String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = dir.path().join("witness.json");
    std::fs::write(&path, save(&w.model)).map_err(|e| e.to_string())?;
    let args = ["pqg", "check", path.to_str().unwrap(), "--index", &w.index.to_string(), &w.formula.to_string()];
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = cli::run(args, &mut out, &mut err);
    if code == cli::EXIT_FALSE && out == b"false\n" && reverify(w) {
        Ok(())
    } else {
        Err(format!("check exited {code}: {}", String::from_utf8_lossy(&err)))
    }
}

fn refutation(text: &str, limit: u64) -> Outcome {
    let t = Instant::now();
    let out = find_countermodel(&Schema::parse(text).unwrap(), &DEFAULT_AUDIT_BOUNDS).map_err(|e| e.to_string())?;
    let d = within(limit, t)?;
    let w = out.witness.ok_or("no countermodel found")?;
    recheck(&w)?;
    Ok(format!("model {} at {} ({}), re-verified, {:.1}s", w.model_number, w.index, w.formula, d.as_secs_f64()))
}

fn t_validity() -> Outcome {
    let t = Instant::now();
    let out = find_countermodel(&Schema::parse("K phi -> phi").unwrap(), &DEFAULT_AUDIT_BOUNDS)
        .map_err(|e| e.to_string())?;
    let d = within(60, t)?;
    match out.witness {
        None => Ok(format!("{} models, {:.1}s", out.models_checked, d.as_secs_f64())),
        Some(w) => Err(format!("countermodel {} at {}", w.model_number, w.index)),
    }
}

fn population() -> Vec<ValidModel> {
    let mut models: Vec<ValidModel> = enumerate_models(&DEFAULT_AUDIT_BOUNDS).take(1000).collect();
    models.extend((0..500).map(|s| random_model(s, &wide())));
    models
}

/// Counts (model, index, atom) cases where `claim` fails.
fn over_population(models: &[ValidModel], claim: impl Fn(&dyn Fn(&str) -> bool, &str) -> bool) -> (u64, u64) {
    let (mut cases, mut violations) = (0, 0);
    for m in models {
        let ev = Evaluator::new(m);
        let atoms: Vec<String> = m.atoms().map(String::from).collect();
        for idx in m.indexes() {
            let at = |text: &str| ev.evaluate(&idx, &parse(text).unwrap()).unwrap();
            for p in &atoms {
                cases += 1;
                if !claim(&at, p) {
                    violations += 1;
                }
            }
        }
    }
    (cases, violations)
}

fn meta_descent(models: &[ValidModel]) -> Outcome {
    let (cases, violations) = over_population(models, |at, p| {
        (2..=3).all(|n| !at(&format!("Bm[{n}] {p}")) || at(&format!("Bm[{}] {p}", n - 1)))
    });
    let with_meta = over_population(models, |at, p| !at(&format!("Bm[2] {p}"))).1;
    if violations == 0 {
        Ok(format!("{} models, {cases} cases, Bm[2] true in {with_meta}", models.len()))
    } else {
        Err(format!("{violations} violations in {cases} cases"))
    }
}

fn exclusion(models: &[ValidModel]) -> Outcome {
    let (cases, violations) = over_population(models, |at, p| {
        let b = at(&format!("B {p}"));
        (!at(&format!("<s> {p}")) || !b) && (!at(&format!("[s] {p}")) || b)
    });
    let poss = over_population(models, |at, p| !at(&format!("<s> {p}"))).1;
    let nec = over_population(models, |at, p| !at(&format!("[s] {p}"))).1;
    if violations == 0 {
        Ok(format!("{cases} cases, <s> true in {poss}, [s] true in {nec}"))
    } else {
        Err(format!("{violations} violations in {cases} cases"))
    }
}

fn principle_audit(report: &AuditReport) -> Outcome {
    let e = report.entry("belief-or-knowledge-to-psy-necessity").ok_or("entry missing")?;
    if e.classification != Classification::Refuted {
        return Err("not refuted".into());
    }
    let w = e.witness.as_ref().ok_or("no witness")?;
    let phi = &w.instantiation["phi"];
    let pattern = &w.model.valuation[phi];
    let sim = w.model.sim(&w.index.sim).unwrap();
    let shaped = sim.belief_states.iter().filter_map(|b| w.model.belief_state(b)).any(|b| {
        pattern.matches(&b.target)
            && b.base().is_some_and(|d| d.rules.is_subset(&sim.active_rules) && !d.maximal.is_subset(&sim.active_rules))
    });
    if !shaped {
        return Err("witness has no belief state whose maximal tier exceeds the active rules".into());
    }
    let json = report_json(report);
    if !json.contains("\"belief-or-knowledge-to-psy-necessity\"") || json != cli::expected_report(Suite::Principles) {
        return Err("principles report differs from the shipped one".into());
    }
    Ok(format!("witness model {} at {}, 𝔛 ⊋ active rules", w.model_number, w.index))
}

fn closure_audit(report: &AuditReport) -> Outcome {
    let golden = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/expected/closure.json"))
        .map_err(|e| e.to_string())?;
    if report_json(report) != golden {
        return Err("closure report differs from golden".into());
    }
    let class = |n: &str| report.entry(n).map(|e| e.classification);
    let refuted = Some(Classification::Refuted);
    if class("known-implication") != refuted || class("conjunction-elimination") != refuted {
        return Err("K-closure or conjunction elimination not refuted".into());
    }
    for p in ["known-implication-to-pre-belief", "conjunction-to-pre-belief"] {
        if class(p).is_none() {
            return Err(format!("{p} missing"));
        }
    }
    let complex = class("belief-complex").ok_or("belief-complex missing")?;
    Ok(format!(
        "matches golden; P variants {} / {}; belief-complex {}",
        class("known-implication-to-pre-belief").unwrap().name(),
        class("conjunction-to-pre-belief").unwrap().name(),
        complex.name()
    ))
}

fn kripke_contrast() -> Result<(String, String), String> {
    let t = Instant::now();
    let report = closure_contrast_report(&DEFAULT_AUDIT_BOUNDS).map_err(|e| e.to_string())?;
    let d = within(120, t)?;
    let row = report.row("belief-closure").ok_or("belief-closure row missing")?;
    if row.kripke.classification != Classification::ValidOverBounds || row.pqg.classification != Classification::Refuted
    {
        return Err(format!(
            "kripke {} / pqg {}",
            row.kripke.classification.name(),
            row.pqg.classification.name()
        ));
    }
    Ok((format!("Kripke valid, PQG refuted, {:.1}s", d.as_secs_f64()), contrast_json(&report)))
}

fn round_trips() -> Outcome {
    let mut rng = pqg::search::Rng::seed_from_u64(2024);
    let atoms: Vec<String> = ["p", "q", "rain", "look"].map(String::from).to_vec();
    let mut failures = 0;
    for _ in 0..500 {
        let depth = rng.random_range(0..=6);
        let f: Formula = random_formula(&mut rng, &atoms, depth);
        if parse(&f.to_string()).ok().as_ref() != Some(&f) {
            failures += 1;
        }
    }
    for seed in 0..200 {
        let m = random_model(10_000 + seed, &wide());
        let text = save(&m);
        if load(&text).ok().as_ref() != Some(&m) {
            failures += 1;
        }
    }
    if failures == 0 {
        Ok("500 formulas, 200 models".into())
    } else {
        Err(format!("{failures} failures"))
    }
}

fn determinism(in_process: &[(Suite, String)]) -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    for (suite, text) in in_process {
        let path = dir.path().join(format!("{suite}.json"));
        let status = Command::new(env!("CARGO_BIN_EXE_pqg"))
            .env("PQG_THREADS", "1")
            .args(["audit", "--suite", suite.name(), "--no-expect", "--out", path.to_str().unwrap()])
            .output()
            .map_err(|e| e.to_string())?;
        if !status.status.success() {
            return Err(format!("{suite} audit failed"));
        }
        if std::fs::read_to_string(&path).map_err(|e| e.to_string())? != *text {
            return Err(format!("{suite} differs between PQG_THREADS=1 and PQG_THREADS=4"));
        }
    }
    Ok("axioms, principles, closure, contrast byte-identical at 4 and 1 threads".into())
}

fn oracle_equivalence() -> Outcome {
    let mut rng = pqg::search::Rng::seed_from_u64(11);
    let (mut agree, mut errors, mut truths) = (0u64, 0u64, 0u64);
    let mut disagreements = Vec::new();
    for i in 0..2000u64 {
        let m = random_model(50_000 + i, &wide());
        let rm = RefModel::new(&m);
        let (ev, r) = (Evaluator::new(&m), Reference::new(&rm));
        let atoms: Vec<String> = m.atoms().map(String::from).collect();
        let indexes = m.indexes();
        for _ in 0..5 {
            let depth = rng.random_range(1..=4);
            let f = random_evaluable_formula(&mut rng, &atoms, depth);
            let idx = &indexes[rng.random_range(0..indexes.len())];
            let (x, y) = (ev.evaluate(idx, &f).ok(), r.evaluate(idx, &f).ok());
            if x == y {
                agree += 1;
                errors += x.is_none() as u64;
                truths += (x == Some(true)) as u64;
            } else if disagreements.len() < 3 {
                disagreements.push(format!("{f} at {idx} in model {}", 50_000 + i));
            }
        }
    }
    if agree == 10_000 {
        Ok(format!("10000 triples agree ({truths} true, {errors} errors on both sides)"))
    } else {
        Err(format!("{} disagreements, e.g. {}", 10_000 - agree, disagreements.join("; ")))
    }
}

fn main() {
    // in-process searches use four workers; the determinism check reruns
    // the audits in a child process with one
    std::env::set_var("PQG_THREADS", "4");
    let mut results: Vec<(u32, &str, Outcome)> = Vec::new();
    let mut record = |n: u32, name: &'static str, o: Outcome| {
        let (tag, detail) = match &o {
            Ok(d) => ("PASS", d.clone()),
            Err(d) => ("FAIL", d.clone()),
        };
        println!("{tag} [{n:>2}] {name}: {detail}");
        results.push((n, name, o));
    };

    record(1, "T-validity", t_validity());
    record(2, "K-refutation", refutation("K(phi -> psi) -> (K phi -> K psi)", 120));
    record(3, "M-refutation", refutation("K(phi & psi) -> K phi & K psi", 120));
    let models = population();
    record(4, "meta-descent", meta_descent(&models));
    record(5, "exclusion", exclusion(&models));

    let principles = audit_suite(Suite::Principles, &DEFAULT_AUDIT_BOUNDS);
    record(6, "principle audit", principles.as_ref().map_err(|e| e.to_string()).and_then(principle_audit));
    let closure = audit_suite(Suite::Closure, &DEFAULT_AUDIT_BOUNDS);
    record(7, "closure audit", closure.as_ref().map_err(|e| e.to_string()).and_then(closure_audit));
    let contrast = kripke_contrast();
    record(8, "Kripke contrast", contrast.as_ref().map(|(d, _)| d.clone()).map_err(Clone::clone));
    record(9, "round trips", round_trips());

    let axioms = audit_suite(Suite::Axioms, &DEFAULT_AUDIT_BOUNDS);
    let determinism_result = match (&axioms, &principles, &closure, &contrast) {
        (Ok(a), Ok(p), Ok(c), Ok((_, k))) => determinism(&[
            (Suite::Axioms, report_json(a)),
            (Suite::Principles, report_json(p)),
            (Suite::Closure, report_json(c)),
            (Suite::Contrast, k.clone()),
        ]),
        _ => Err("an audit failed to run".into()),
    };
    record(10, "determinism", determinism_result);
    record(11, "oracle equivalence", oracle_equivalence());

    let failed: BTreeSet<u32> = results.iter().filter(|r| r.2.is_err()).map(|r| r.0).collect();
    println!("{} of {} criteria pass", results.len() - failed.len(), results.len());
    if !failed.is_empty() {
        std::process::exit(1);
    }
}
