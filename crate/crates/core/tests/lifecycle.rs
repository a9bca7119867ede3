//! Templates composed, run and cleaned up through the library API.

use std::os::unix::fs::PermissionsExt;
use std::path::Path;

use sweepjt_core::grammar::parse_template_appendix;
use sweepjt_core::jobs::event::INFO_HEADER;
use sweepjt_core::template::discover_templates;
use sweepjt_core::{
    create_templates, parse_parameter_file, BackendKind, BufferConsole, ConfigTable, InfoMode,
    JobManager, Selector, SweepRng, TemplateAppendix,
};

fn compose(dir: &Path, text: &str, worker: &str, appendix: &TemplateAppendix, cfg: &ConfigTable) -> u64 {
    let spec = parse_parameter_file(text, cfg).unwrap();
    let mut c = BufferConsole::default();
    create_templates(dir, &spec, worker, appendix, cfg, &mut SweepRng::new(cfg.rng_seed), &mut c).unwrap()
}

fn names(dir: &Path, cfg: &ConfigTable) -> Vec<String> {
    discover_templates(dir, cfg)
        .unwrap()
        .into_iter()
        .map(|t| t.filename)
        .collect()
}

fn executable(dir: &Path, name: &str, body: &str) {
    let p = dir.join(name);
    std::fs::write(&p, format!("#!/bin/sh\n{body}\n")).unwrap();
    std::fs::set_permissions(&p, std::fs::Permissions::from_mode(0o755)).unwrap();
}

#[test]
fn greetings_run_locally() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ConfigTable::default();
    let text = "LOOPTYPE=LIST, VALUE=hello, VALUE=goodbye, FUNCTION=ucfirst\n\
                LOOPTYPE=LIST, VALUE=world!, VALUE=mars!\n";
    assert_eq!(compose(dir.path(), text, "/bin/echo", &TemplateAppendix::default(), &cfg), 4);
    assert_eq!(
        names(dir.path(), &cfg),
        [
            "0_echo_Hello_world!.jt",
            "1_echo_Hello_mars!.jt",
            "2_echo_Goodbye_world!.jt",
            "3_echo_Goodbye_mars!.jt"
        ]
    );
    let mut c = BufferConsole::default();
    let mut m = JobManager::open(dir.path(), &cfg).unwrap();
    assert_eq!(m.submit(Selector::All, &mut c).unwrap(), 4);
    let outputs: String = names(dir.path(), &cfg)
        .iter()
        .map(|n| std::fs::read_to_string(dir.path().join(n.replace(".jt", ".out"))).unwrap())
        .collect();
    assert_eq!(outputs, "Hello world!\nHello mars!\nGoodbye world!\nGoodbye mars!\n");

    let mut c = BufferConsole::default();
    m.info(InfoMode::Now, &mut c).unwrap();
    let rows: Vec<&str> = c.out.lines().collect();
    assert_eq!(rows[0], INFO_HEADER);
    assert_eq!(rows.len(), 5);
    assert!(rows[1..].iter().all(|r| r.contains(",DISPATCH,DONE,local,") && r.ends_with(",0")));

    assert_eq!(m.purge(Selector::Successful, &mut c).unwrap(), 4);
    assert_eq!(m.delete(Selector::All, &mut c).unwrap(), 4);
    assert!(names(dir.path(), &cfg).is_empty());
}

#[test]
fn worker_exit_status_reaches_selectors() {
    let dir = tempfile::tempdir().unwrap();
    executable(dir.path(), "worker", "echo \"$1^2=$(($1*$1))\"; [ \"$1\" -ne 4 ]");
    let cfg = ConfigTable::default();
    compose(
        dir.path(),
        "LOOPTYPE=RANGE, START=1, END=5, STEP=1, SKIP=3\n",
        "worker",
        &TemplateAppendix::default(),
        &cfg,
    );
    let mut c = BufferConsole::default();
    let mut m = JobManager::open(dir.path(), &cfg).unwrap();
    m.submit(Selector::All, &mut c).unwrap();
    let idx = |v: Vec<sweepjt_core::template::TemplateFile>| v.into_iter().map(|t| t.index).collect::<Vec<_>>();
    assert_eq!(idx(m.select(Selector::Unsuccessful, &mut c).unwrap()), [2]);
    assert_eq!(idx(m.select(Selector::Successful, &mut c).unwrap()), [0, 1, 3]);
    assert_eq!(idx(m.select(Selector::Finished, &mut c).unwrap()), [0, 1, 2, 3]);
    let out = std::fs::read_to_string(dir.path().join("2_worker_4.out")).unwrap();
    assert_eq!(out, "4^2=16\n");
    assert_eq!(m.purge(Selector::Successful, &mut c).unwrap(), 3);
    assert_eq!(idx(m.select(Selector::Unsuccessful, &mut c).unwrap()), [2]);
}

#[test]
fn wildcards_and_appendix() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("worker"), "").unwrap();
    let cfg = ConfigTable::default();
    let text = "LOOPTYPE=LIST, VALUE=Taylor, VALUE=Exact\n\
                LOOPTYPE=EXPRANGE, START=1, END=1E3, STEP=1, SKIP=100\n\
                LOOPTYPE=LIST, VALUE=${JT_ID}.txt\n";
    let appendix = parse_template_appendix("OUTPUT_FILES=${3}\n", &cfg);
    assert_eq!(compose(dir.path(), text, "worker", &appendix, &cfg), 6);
    assert_eq!(
        std::fs::read_to_string(dir.path().join("5_worker_Exact_1000_5.txt.jt")).unwrap(),
        "NAME = 5_worker\n\
         EXECUTABLE = worker\n\
         ARGUMENTS = Exact 1000 5.txt\n\
         STDOUT_FILE = 5_worker_Exact_1000_5.txt.out\n\
         STDERR_FILE = 5_worker_Exact_1000_5.txt.err\n\
         OUTPUT_FILES=5.txt\n"
    );
}

#[test]
fn random_points_are_seeded() {
    let cfg = ConfigTable::default().with_override("rng_seed=42").unwrap();
    let text = "LOOPTYPE=RANGE, START=1000, END=1000, POINTS=8, \\\nFUNCTION=int rand\n";
    let mut runs = Vec::new();
    for _ in 0..2 {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("worker"), "").unwrap();
        assert_eq!(compose(dir.path(), text, "worker", &TemplateAppendix::default(), &cfg), 8);
        let found = names(dir.path(), &cfg);
        for (i, n) in found.iter().enumerate() {
            let rest = n.strip_prefix(&format!("{i}_worker_")).unwrap();
            let k: u64 = rest.strip_suffix(".jt").unwrap().parse().unwrap();
            assert!(k < 1000, "{n}");
        }
        runs.push(found);
    }
    assert_eq!(runs[0], runs[1]);
}

#[test]
fn rendering_is_deterministic() {
    let cfg = ConfigTable::default().with_override("rng_seed=5").unwrap();
    let text = "LOOPTYPE=LIST, VALUE=a, VALUE=b\nLOOPTYPE=RANGE, START=0, END=1, POINTS=3, FUNCTION=sin\n";
    let snapshot = || {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("w"), "").unwrap();
        compose(dir.path(), text, "w", &TemplateAppendix::default(), &cfg);
        names(dir.path(), &cfg)
            .into_iter()
            .map(|n| (std::fs::read(dir.path().join(&n)).unwrap(), n))
            .collect::<Vec<_>>()
    };
    assert_eq!(snapshot(), snapshot());
}

#[test]
fn simulated_grid_learns_between_batches() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("square"), "").unwrap();
    let cfg = ConfigTable {
        backend: BackendKind::Simulated,
        ..ConfigTable::default()
    };
    compose(
        dir.path(),
        "LOOPTYPE=RANGE, START=1, END=5, STEP=1, SKIP=3\n",
        "square",
        &TemplateAppendix::default(),
        &cfg,
    );
    let mut c = BufferConsole::default();
    JobManager::open(dir.path(), &cfg).unwrap().submit(Selector::Range(0, 1), &mut c).unwrap();
    JobManager::open(dir.path(), &cfg).unwrap().submit(Selector::Unsubmitted, &mut c).unwrap();
    let mut c = BufferConsole::default();
    JobManager::open(dir.path(), &cfg).unwrap().info(InfoMode::History, &mut c).unwrap();
    for job in ["0_square,", "1_square,"] {
        let rows: Vec<&str> = c.out.lines().filter(|l| l.starts_with(job)).collect();
        assert_eq!(rows.iter().filter(|r| r.contains(",DISPATCH,EPILOG_FAIL,")).count(), 2);
        assert!(rows.last().unwrap().ends_with(",DISPATCH,DONE,default,gridway.org,0"));
    }
    for job in ["2_square,", "3_square,"] {
        let rows: Vec<&str> = c.out.lines().filter(|l| l.starts_with(job)).collect();
        assert_eq!(rows.len(), 9);
        assert!(rows.iter().all(|r| !r.contains("FAILED") && !r.contains("EPILOG_FAIL")));
    }
}
