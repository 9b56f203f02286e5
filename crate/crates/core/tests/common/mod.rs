#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::OnceLock;

use wedge32::cache::{CacheDir, CONSTRUCTION_FILE, E6_FILE, W_FILE};
use wedge32::ConstructionContext;

/// Cache shared by the integration test binaries; built on first use.
pub fn shared_dir() -> PathBuf {
    Path::new(env!("CARGO_TARGET_TMPDIR")).join("shared-cache")
}

pub fn context() -> &'static ConstructionContext {
    static CTX: OnceLock<ConstructionContext> = OnceLock::new();
    CTX.get_or_init(|| CacheDir::new(shared_dir()).obtain(true).expect("shared cache").0)
}

/// A private copy of the three stage caches.
pub fn cache_copy() -> tempfile::TempDir {
    context();
    let dir = tempfile::tempdir().unwrap();
    for name in [E6_FILE, CONSTRUCTION_FILE, W_FILE] {
        fs::copy(shared_dir().join(name), dir.path().join(name)).unwrap();
    }
    dir
}

pub fn run_cli(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = wedge32::cli::run(std::iter::once("wedge32").chain(args.iter().copied()), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}
