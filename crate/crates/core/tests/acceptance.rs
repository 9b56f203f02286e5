//! Acceptance criteria, one line each. Runs two independent full builds
//! from empty cache directories and compares their bytes.

use std::fs;
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use wedge32::battery::{CheckResult, Status};
use wedge32::cache::{CacheDir, CONSTRUCTION_FILE, E6_FILE, REPORT_FILE, W_FILE};
use wedge32::{run_battery, BatteryConfig, RootSystemModel, VerificationReport};

struct Line {
    ok: bool,
    text: String,
}

fn check<'a>(report: &'a VerificationReport, id: &str) -> &'a CheckResult {
    report.get(id).unwrap_or_else(|| panic!("check {id} missing from the report"))
}

fn from_checks(report: &VerificationReport, ids: &[&str], limit: Option<Duration>) -> Line {
    let checks: Vec<&CheckResult> = ids.iter().map(|id| check(report, id)).collect();
    let ms: u64 = checks.iter().map(|c| c.ms).sum();
    let in_time = limit.is_none_or(|l| u128::from(ms) <= l.as_millis());
    let ok = in_time && checks.iter().all(|c| c.status == Status::Pass);
    let actual: Vec<&str> = checks.iter().map(|c| c.actual.as_str()).collect();
    let limit = limit.map(|l| format!(" (limit {} s)", l.as_secs())).unwrap_or_default();
    Line { ok, text: format!("{} in {ms} ms{limit}: {}", ids.join(" + "), actual.join(" | ")) }
}

fn full_run(dir: &Path) -> (VerificationReport, Duration) {
    let cache = CacheDir::new(dir);
    let t = Instant::now();
    let (ctx, _) = cache.obtain(true).expect("build");
    let build = t.elapsed();
    let report = run_battery(&ctx, &BatteryConfig::default()).expect("battery");
    cache.store_report(&report, ctx.field()).expect("store report");
    (report, build)
}

fn cli_run(dir: &Path) -> VerificationReport {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let args = ["wedge32", "--cache-dir", dir.to_str().unwrap(), "--format", "json", "verify", "--build-missing"];
    let code = wedge32::cli::run(args, &mut out, &mut err);
    assert!(code <= 1, "cli run failed: {}", String::from_utf8_lossy(&err));
    serde_json::from_slice(&out).expect("report json")
}

fn main() -> ExitCode {
    let first = tempfile::tempdir().unwrap();
    let second = tempfile::tempdir().unwrap();

    let t = Instant::now();
    let e6 = RootSystemModel::build_e6().closure().expect("E6 closure");
    let e6_time = t.elapsed();
    let (report, build_time) = full_run(first.path());
    let again = cli_run(second.path());

    let mut lines = Vec::new();
    let e6_line = from_checks(&report, &["e6-order"], None);
    lines.push(Line {
        ok: e6_line.ok && e6.order() == 51_840 && e6_time < Duration::from_secs(60),
        text: format!("{} (standalone closure {} ms, limit 60 s)", e6_line.text, e6_time.as_millis()),
    });
    lines.push(from_checks(&report, &["c3-class"], Some(Duration::from_secs(300))));
    lines.push(from_checks(&report, &["c3-split"], None));
    lines.push(from_checks(&report, &["lift-lemma"], Some(Duration::from_secs(120))));
    lines.push(from_checks(&report, &["reflections"], None));
    let orders = from_checks(&report, &["w-orders"], None);
    lines.push(Line {
        ok: orders.ok && build_time < Duration::from_secs(20 * 60),
        text: format!("{}; full construction {} ms (limit 1200 s)", orders.text, build_time.as_millis()),
    });
    lines.push(from_checks(&report, &["e6-degrees", "w-degrees"], Some(Duration::from_secs(600))));
    lines.push(from_checks(&report, &["character-norm"], None));
    lines.push(from_checks(&report, &["primitivity"], Some(Duration::from_secs(600))));
    lines.push(from_checks(&report, &["order8-profile"], None));
    lines.push(from_checks(&report, &["springer-regular"], Some(Duration::from_secs(120))));
    lines.push(from_checks(&report, &["exterior-laws"], None));
    lines.push(from_checks(&report, &["shephard-todd"], None));

    let differing: Vec<&str> = [E6_FILE, CONSTRUCTION_FILE, W_FILE, REPORT_FILE]
        .into_iter()
        .filter(|name| fs::read(first.path().join(name)).ok() != fs::read(second.path().join(name)).ok())
        .collect();
    let same_report = report.without_timings() == again.without_timings();
    lines.push(Line {
        ok: differing.is_empty() && same_report,
        text: format!(
            "two full runs from empty caches: differing cache files {differing:?}, reports identical without timings: {same_report}"
        ),
    });

    for (i, line) in lines.iter().enumerate() {
        println!("criterion {:>2} {}: {}", i + 1, if line.ok { "PASS" } else { "FAIL" }, line.text);
    }
    let passed = lines.iter().filter(|l| l.ok).count();
    println!("acceptance: {passed}/{} criteria pass", lines.len());
    if passed == lines.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
