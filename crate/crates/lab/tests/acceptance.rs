//! Acceptance gate. Each test prints one `criterion N: ... PASS|FAIL` line
//! to the real stdout, so the lines show up without `--nocapture`.

use std::io::Write;
use std::process::Command;
use std::time::{Duration, Instant};

use calabi_lab::report::{Record, Status};
use calabi_lab::suite::{self, Mutation, SuiteOptions};

const SEED: u64 = 20_240_601;

fn opts() -> SuiteOptions {
    SuiteOptions { seed: SEED, ..Default::default() }
}

fn summary(records: &[Record]) -> String {
    records
        .iter()
        .map(|r| {
            let res = r.residual.map(|x| format!("{x:.2e}")).unwrap_or_else(|| "-".into());
            let samples = r.values.get("samples").map(|s| format!(" n={s}")).unwrap_or_default();
            let mut line = format!("{} {} [{}{}]", r.name, r.status.as_str(), res, samples);
            if r.status == Status::Fail {
                if let Some(v) = r.values.get("violations").filter(|v| v.is_array()) {
                    line.push_str(&format!(" violations: {v}"));
                }
            }
            line
        })
        .collect::<Vec<_>>()
        .join("; ")
}

fn report(id: u32, title: &str, passed: bool, detail: &str, elapsed: Duration) {
    let line = format!(
        "criterion {id}: {title}: {} ({detail}; {:.2} s)\n",
        if passed { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64()
    );
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(line.as_bytes());
    let _ = out.flush();
}

/// Runs `f`, prints the criterion line and asserts it.
fn criterion(id: u32, title: &str, budget: Option<Duration>, f: impl FnOnce() -> Vec<Record>) {
    let start = Instant::now();
    let records = f();
    let elapsed = start.elapsed();
    let all_pass = !records.is_empty() && records.iter().all(|r| r.status == Status::Pass);
    let in_time = budget.is_none_or(|b| elapsed < b);
    let mut detail = summary(&records);
    if let Some(b) = budget {
        detail.push_str(&format!("; budget {:.0} s", b.as_secs_f64()));
    }
    report(id, title, all_pass && in_time, &detail, elapsed);
    assert!(all_pass, "criterion {id} failed: {detail}");
    assert!(in_time, "criterion {id} over budget: {elapsed:?}");
}

#[test]
fn criterion_01_calabi_round_trip() {
    criterion(1, "calabi round trip", Some(Duration::from_secs(30)), || vec![suite::round_trip(&[2, 3, 4], 200, opts())]);
}

#[test]
fn criterion_02_curvature_term() {
    criterion(2, "curvature term via calabi", Some(Duration::from_secs(300)), || {
        vec![suite::calabi_term(&[2, 3, 4], 100, 20, 4, opts())]
    });
}

#[test]
fn criterion_03_norm_formulas() {
    criterion(3, "norm formulas", None, || suite::norm_formulas(&[2, 3, 4], 1000, opts()));
}

#[test]
fn criterion_04_riemannian_identities() {
    criterion(4, "general riemannian identities", None, || suite::riemannian(2, 100, &[1, 2, 3], opts()));
}

#[test]
fn criterion_05_main_estimate() {
    criterion(5, "main estimate", None, || suite::main_estimate(&[1, 2, 3, 4], 10_000, opts()));
}

#[test]
fn criterion_06_thresholds() {
    criterion(6, "thresholds", Some(Duration::from_secs(1)), || suite::threshold_checks(1..=64));
}

#[test]
fn criterion_07_model_spaces() {
    criterion(7, "model spaces", None, || suite::model_space_checks(&[1, 2, 3, 4, 5, 6], &[2, 3, 4, 5, 6], true));
}

#[test]
fn criterion_08_certificate_soundness() {
    criterion(8, "certificate soundness", None, || {
        vec![suite::certificate_soundness(&suite::soundness_panel(&[1, 2, 3, 4], SEED), 1000, opts())]
    });
}

#[test]
fn criterion_09_determinism() {
    let run = |threads: &str| {
        let out = Command::new(env!("CARGO_BIN_EXE_calabi-lab"))
            .args(["verify", "--n", "3", "--trials", "50", "--seed", "42", "--format", "json"])
            .env("CALABI_LAB_THREADS", threads)
            .output()
            .expect("binary runs");
        (out.status.code(), out.stdout)
    };
    let start = Instant::now();
    let (code_a, a) = run("1");
    let (code_b, b) = run("1");
    let (_, c) = run("0");
    let elapsed = start.elapsed();
    let same = !a.is_empty() && a == b;
    let passed = same && code_a == Some(0) && code_b == Some(0);
    let detail = format!(
        "{} bytes, identical: {same}, identical across thread counts: {}, exit {code_a:?}",
        a.len(),
        a == c
    );
    report(9, "determinism", passed, &detail, elapsed);
    assert!(passed, "{detail}");
}

#[test]
fn criterion_10_mutation_sensitivity() {
    let bad = SuiteOptions { mutation: Mutation::NegateCalabi, ..opts() };
    let start = Instant::now();
    let term = suite::calabi_term(&[2, 3, 4], 100, 20, 4, bad);
    let sound = suite::certificate_soundness(&suite::soundness_panel(&[1, 2, 3, 4], SEED), 1000, bad);
    let elapsed = start.elapsed();
    let caught = term.status == Status::Fail && sound.status == Status::Fail;
    let detail = format!(
        "with the sign of the Calabi operator flipped: curvature term {} ({} violations), certificate soundness {} ({} violations)",
        term.status.as_str(),
        term.values["violations"],
        sound.status.as_str(),
        sound.values["violations"]
    );
    report(10, "mutation sensitivity", caught, &detail, elapsed);
    assert!(caught, "{detail}");
}
