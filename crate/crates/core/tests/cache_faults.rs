mod common;

use std::fs;

use wedge32::cache::{
    decode_construction, encode_construction, CacheDir, StageStatus, CONSTRUCTION_FILE, E6_FILE, W_FILE,
};
use wedge32::groups::greedy_closure;
use wedge32::{run_battery, BatteryConfig, MatrixK, Rational, Error};
use wedge32::battery::Status;

fn names(log: &[StageStatus]) -> Vec<String> {
    log.iter()
        .map(|s| match s {
            StageStatus::Loaded(n) => format!("loaded {n}"),
            StageStatus::Built(n) => format!("built {n}"),
            StageStatus::Rebuilt(n, _) => format!("rebuilt {n}"),
        })
        .collect()
}

#[test]
fn corrupted_checksum_rebuilds_only_that_stage() {
    let dir = common::cache_copy();
    let path = dir.path().join(W_FILE);
    let original = fs::read(&path).unwrap();
    let mut bytes = original.clone();
    let last = bytes.len() - 1;
    bytes[last] ^= 0x40;
    fs::write(&path, &bytes).unwrap();

    let cache = CacheDir::new(dir.path());
    let err = cache.obtain(false).unwrap_err();
    assert!(matches!(err, Error::Cache(_)));
    assert!(err.to_string().contains("w.cache") && err.to_string().contains("--build-missing"), "{err}");

    let (ctx, log) = cache.obtain(true).unwrap();
    assert_eq!(names(&log), ["loaded e6.cache", "loaded construction.cache", "rebuilt w.cache"]);
    assert!(matches!(&log[2], StageStatus::Rebuilt(_, why) if why.contains("checksum")));
    assert_eq!(ctx.w.order(), 155_520);
    assert_eq!(fs::read(&path).unwrap(), original);
    assert!(!cache.is_dirty());
}

#[test]
fn truncated_e6_cache_is_rebuilt_alone() {
    let dir = common::cache_copy();
    let path = dir.path().join(E6_FILE);
    let original = fs::read(&path).unwrap();
    fs::write(&path, &original[..original.len() / 2]).unwrap();
    let (_, log) = CacheDir::new(dir.path()).obtain(true).unwrap();
    assert_eq!(names(&log), ["rebuilt e6.cache", "loaded construction.cache", "loaded w.cache"]);
    assert_eq!(fs::read(&path).unwrap(), original);
}

#[test]
fn tampered_transport_is_rejected() {
    let dir = common::cache_copy();
    let path = dir.path().join(CONSTRUCTION_FILE);
    let mut rec = decode_construction(&fs::read(&path).unwrap()).unwrap();
    rec.c = Rational::from(2);
    fs::write(&path, encode_construction(&rec)).unwrap();
    let err = CacheDir::new(dir.path()).obtain(false).unwrap_err();
    assert!(err.to_string().contains("construction.cache"), "{err}");
}

#[test]
fn stale_dirty_marker_is_cleared_by_a_build() {
    let dir = common::cache_copy();
    let cache = CacheDir::new(dir.path());
    fs::write(dir.path().join(".dirty"), b"").unwrap();
    assert!(cache.is_dirty());
    let (_, log) = cache.obtain(true).unwrap();
    assert!(log.iter().all(|s| matches!(s, StageStatus::Loaded(_))));
    assert!(!cache.is_dirty());
    assert_eq!(cache.clean().unwrap(), 3);
}

#[test]
fn smaller_group_in_place_of_w_fails_the_order_check() {
    let mut ctx = common::context().clone();
    let f = ctx.field();
    ctx.w = greedy_closure(MatrixK::identity(4, f), ctx.reflections[..1].iter().cloned(), None, 1000).unwrap();
    assert_eq!(ctx.w.order(), 3);
    let config = BatteryConfig { checks: Some(vec!["orders".into(), "shephard-todd".into()]), ..BatteryConfig::default() };
    let report = run_battery(&ctx, &config).unwrap();
    assert_eq!(report.checks.len(), 2);
    assert!(report.checks.iter().all(|c| c.status == Status::Fail), "{}", report.to_text());
    assert!(!report.passed());
}
