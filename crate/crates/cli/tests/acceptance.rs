//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use subsphere_cli::formats::read_report;
use subsphere_cli::verify::{self, Check, KeystoneCase};
use subsphere_core::kernel::kernel_h;
use subsphere_core::phantom::{four_mode, hypothesis_check, single_mode};

const BIN: &str = env!("CARGO_BIN_EXE_subsphere");

struct Outcome {
    passed: bool,
    detail: String,
}

fn from_checks(checks: &[Check]) -> Outcome {
    let failed: Vec<&Check> = checks.iter().filter(|c| !c.passed()).collect();
    let worst = checks
        .iter()
        .map(|c| format!("{} {:.2e}/{:.0e}", c.name, c.residual, c.tolerance))
        .collect::<Vec<_>>()
        .join(", ");
    for c in &failed {
        eprintln!("    {c}");
    }
    Outcome { passed: failed.is_empty(), detail: worst }
}

fn criterion(id: usize, title: &str, budget: Duration, body: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let out = body();
    let elapsed = start.elapsed();
    let in_time = elapsed <= budget;
    let passed = out.passed && in_time;
    println!(
        "{} criterion {id} ({title}): {} [{:.1} s of {:.0} s]{}",
        if passed { "PASS" } else { "FAIL" },
        out.detail,
        elapsed.as_secs_f64(),
        budget.as_secs_f64(),
        if in_time { "" } else { " over budget" }
    );
    passed
}

fn run(args: &[&str]) -> (i32, String) {
    let out = Command::new(BIN).args(args).output().expect("binary runs");
    (out.status.code().unwrap_or(-1), String::from_utf8_lossy(&out.stderr).into_owned())
}

fn path(p: &Path) -> &str {
    p.to_str().expect("utf-8 temp path")
}

/// phantom -> forward -> invert for one `lambda`; returns the check lines.
fn end_to_end(dir: &Path, lambda: &str, checks: &mut Vec<String>) -> bool {
    let phantom = dir.join("four.phantom");
    let exact = dir.join("four.profiles");
    let sino = dir.join(format!("sino-{lambda}.txt"));
    let spectrum = dir.join(format!("spectrum-{lambda}.txt"));
    let report = dir.join(format!("report-{lambda}.csv"));
    let grid = ["--n", "3", "--c-min", "1e-3", "--c-max", "1e3", "--c-count", "4096"];
    let steps: Vec<Vec<&str>> = vec![
        [&["phantom", "--phantom", "four", "--out", path(&phantom), "--profiles-out", path(&exact)][..], &grid].concat(),
        [&["forward", "--lambda", lambda, "--psi-res", "256", "--in", path(&phantom), "--out", path(&sino)][..], &grid]
            .concat(),
        vec![
            "invert", "--n", "3", "--m-max", "6", "--in", path(&sino), "--out", path(&spectrum), "--reference",
            path(&exact), "--report", path(&report), "--eval-min", "0.2", "--eval-max", "5",
        ],
    ];
    for args in &steps {
        let (code, stderr) = run(args);
        if code != 0 {
            checks.push(format!("lambda {lambda}: `{}` exited {code}: {}", args[0], stderr.trim()));
            return false;
        }
    }
    let text = std::fs::read_to_string(&report).expect("report written");
    let rows = match read_report(&text) {
        Ok(r) => r,
        Err(e) => {
            checks.push(format!("lambda {lambda}: unreadable report: {e}"));
            return false;
        }
    };
    let active: Vec<_> = rows.iter().filter(|r| r.active).collect();
    let absent: Vec<_> = rows.iter().filter(|r| !r.active).collect();
    let worst_active = active.iter().map(|r| r.rel_l2_error).fold(0.0f64, f64::max);
    let worst_absent = absent.iter().map(|r| r.peak_ratio).fold(0.0f64, f64::max);
    let ok = active.len() == 4
        && active.iter().all(|r| r.rel_l2_error <= 1e-2)
        && absent.iter().all(|r| r.peak_ratio <= 1e-3);
    checks.push(format!(
        "lambda {lambda}: {} active rel L2 {worst_active:.2e}, {} absent {worst_absent:.2e} x peak",
        active.len(),
        absent.len()
    ));
    ok
}

fn main() {
    let secs = Duration::from_secs;
    let mut all = true;

    all &= criterion(1, "geometry", secs(5), || from_checks(&verify::tangency(500, 11)));
    all &= criterion(2, "measure", secs(30), || from_checks(&verify::measure(200, 12)));
    all &= criterion(3, "funk-hecke", secs(10), || from_checks(&[verify::funk_hecke(100, 10, 13)]));
    all &= criterion(4, "mellin", secs(30), || from_checks(&verify::mellin()));
    all &= criterion(5, "kernel", secs(10), || from_checks(&verify::kernel()));
    all &= criterion(6, "keystone", secs(120), || from_checks(&verify::keystone(&kernel_h, &KeystoneCase::standard())));

    let dir = tempfile::tempdir().expect("temp dir");
    all &= criterion(7, "end-to-end", secs(600), || {
        let mut lines = Vec::new();
        let a = end_to_end(dir.path(), "1", &mut lines);
        let b = end_to_end(dir.path(), "inf", &mut lines);
        Outcome { passed: a && b, detail: lines.join("; ") }
    });

    all &= criterion(8, "hypothesis gates", secs(30), || {
        let out = dir.path().join("bad.phantom");
        let (code, _) = run(&["phantom", "--n", "3", "--phantom", "0,1:rational:1:1/1", "--out", path(&out)]);
        let shipped = [
            ("single n=3", single_mode(3)),
            ("single n=4", single_mode(4)),
            ("four", four_mode()),
        ];
        let mut finite = Vec::new();
        let mut ok = code == 3;
        for (name, spec) in shipped {
            let f = spec.map(|s| hypothesis_check(&s).is_finite()).unwrap_or(false);
            ok &= f;
            finite.push(format!("{name} {}", if f { "finite" } else { "NOT finite" }));
        }
        Outcome { passed: ok, detail: format!("non-L1 phantom exit {code} (want 3); {}", finite.join(", ")) }
    });

    if !all {
        std::process::exit(1);
    }
}
