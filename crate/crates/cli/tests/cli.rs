//! Argument handling of the `sweepjt` binary.

use std::path::Path;
use std::process::Output;

fn run(dir: &Path, args: &[&str]) -> Output {
    std::process::Command::new(env!("CARGO_BIN_EXE_sweepjt"))
        .args(args)
        .current_dir(dir)
        .output()
        .unwrap()
}

fn code(dir: &Path, args: &[&str]) -> i32 {
    run(dir, args).status.code().unwrap()
}

#[test]
fn a_subcommand_is_required() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &[]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Try `sweepjt --help`"));
    assert!(out.stdout.is_empty());
}

#[test]
fn meta_commands_succeed() {
    let dir = tempfile::tempdir().unwrap();
    let version = run(dir.path(), &["-v"]);
    assert_eq!(String::from_utf8_lossy(&version.stdout), format!("sweepjt {}\n", env!("CARGO_PKG_VERSION")));
    assert_eq!(code(dir.path(), &["--license"]), 0);
    let help = run(dir.path(), &["-h"]);
    assert_eq!(help.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&help.stdout).contains("--create"));
}

#[test]
fn misplaced_options_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["-p", "unsubmitted"][..],
        &["-k", "submitted"],
        &["-s", "all", "--signal", "9"],
        &["-s", "all", "-w", "/bin/echo"],
        &["-i", "bogus"],
        &["-s", "7-3x"],
        &["-d", "0"],
        &["--config", "nosuchkey=1", "-s", "all"],
    ] {
        assert_eq!(code(dir.path(), args), 1, "{args:?}");
    }
}

#[test]
fn config_overrides_change_the_suffix() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("p.in"), "LOOPTYPE=LIST, VALUE=a, VALUE=b\n").unwrap();
    let args = ["-c", "p.in", "-w", "/bin/echo", "--config", "job_template_suffix=.job"];
    assert_eq!(code(dir.path(), &args), 0);
    assert!(dir.path().join("0_echo_a.job").is_file());
    assert!(dir.path().join("1_echo_b.job").is_file());
    let deleted = run(dir.path(), &["-d", "0-0", "--config", "job_template_suffix=.job"]);
    assert_eq!(String::from_utf8_lossy(&deleted.stdout), "Deleted 1 job templates\n");
    assert!(!dir.path().join("0_echo_a.job").exists());
}

#[test]
fn finished_local_jobs_cannot_be_killed() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("p.in"), "LOOPTYPE=LIST, VALUE=x\n").unwrap();
    assert_eq!(code(dir.path(), &["-c", "p.in", "-w", "/bin/echo"]), 0);
    assert_eq!(code(dir.path(), &["-s", "all"]), 0);
    assert_eq!(code(dir.path(), &["-k", "all"]), 7);
    assert_eq!(code(dir.path(), &["-p", "all"]), 0);
    assert_eq!(code(dir.path(), &["-p", "all"]), 7);
}
