//! Compile and link a C program against the generated header and the
//! static library. Skipped when no C compiler is on PATH.

use std::path::{Path, PathBuf};
use std::process::Command;

fn has_cc() -> bool {
    Command::new("cc").arg("--version").output().is_ok_and(|o| o.status.success())
}

/// `target/<profile>/`, where cargo places the static library.
fn artifact_dir() -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    exe.parent().and_then(Path::parent).unwrap().to_path_buf()
}

#[test]
fn c_program_links_against_static_library() {
    if !has_cc() {
        eprintln!("skipping: no C compiler");
        return;
    }
    let crate_dir = Path::new(env!("CARGO_MANIFEST_DIR"));
    let lib = artifact_dir().join("libtracktopo_ffi.a");
    assert!(lib.is_file(), "static library missing at {}", lib.display());
    let tmp = tempfile::tempdir().unwrap();
    let exe = tmp.path().join("smoke");
    let status = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-I"])
        .arg(crate_dir.join("include"))
        .arg(crate_dir.join("tests/c/smoke.c"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success(), "C compile failed");
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "smoke exited with {:?}", out.status);
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("ok "));
}
