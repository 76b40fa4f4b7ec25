#![allow(dead_code)]

use std::path::PathBuf;

use saswarm::orlib::load_file;
use saswarm::BenchmarkFile;

/// First three problems of mknap1, bundled with the tests.
pub fn mknap1_head() -> BenchmarkFile {
    load_file(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data/mknap1_head.txt")).unwrap()
}

/// Location of the complete mknap1 file: `$MKNAP1_PATH`, else
/// `data/mknap1.txt` at the workspace root.
pub fn mknap1_path() -> PathBuf {
    match std::env::var_os("MKNAP1_PATH") {
        Some(p) => PathBuf::from(p),
        None => PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/../..")).canonicalize().unwrap().join("data/mknap1.txt"),
    }
}

/// The complete mknap1 file, if present.
pub fn mknap1() -> Option<BenchmarkFile> {
    let p = mknap1_path();
    p.exists().then(|| load_file(&p).expect("mknap1 parses"))
}

/// Every available mknap1 problem: the full file if present, otherwise
/// the bundled head.
pub fn mknap1_problems() -> BenchmarkFile {
    mknap1().unwrap_or_else(mknap1_head)
}
