use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::NamedTempFile;

fn instance(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../instances")
        .join(name)
}

fn file(contents: &str) -> NamedTempFile {
    let mut f = NamedTempFile::new().unwrap();
    f.write_all(contents.as_bytes()).unwrap();
    f
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_certalgo"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn check_passes_in_every_mode() {
    for mode in ["off", "assert", "log"] {
        let o = run(&["check", "--contracts", mode]);
        assert_eq!(code(&o), 0, "{mode}: {}", stdout(&o));
        assert!(stdout(&o).contains("10/10 fixture groups passed"));
    }
}

#[test]
fn check_names_the_broken_heap_invariant() {
    let o = run(&["check", "--inject-fault", "heap-child-cmp"]);
    assert_eq!(code(&o), 1);
    let out = stdout(&o);
    assert!(out.contains("FAIL  priority_queue"), "{out}");
    assert!(out.contains("heap_delete_max/heapInv"), "{out}");
}

#[test]
fn solve_fixture_instances() {
    let o = run(&[
        "solve",
        "--problem",
        "topsort",
        "--input",
        path(&instance("chain.graph")),
    ]);
    assert_eq!((code(&o), stdout(&o).as_str()), (0, "1 2 3\n"));
    let o = run(&[
        "solve",
        "--problem",
        "euler",
        "--input",
        path(&instance("bowtie.graph")),
    ]);
    assert_eq!((code(&o), stdout(&o).as_str()), (0, "1 2 3 4 5 3 1\n"));
    let o = run(&["solve", "--problem", "match", "--input", path(&instance("test1.match"))]);
    assert_eq!((code(&o), stdout(&o).as_str()), (0, "1 -> 1\n2 -> 2\n"));
    let o = run(&[
        "solve",
        "--problem",
        "placement",
        "--input",
        path(&instance("test1.place")),
    ]);
    assert_eq!((code(&o), stdout(&o).as_str()), (0, "1 -> 2\n2 -> 1\n"));
}

#[test]
fn solve_rejects_bad_input() {
    let cyclic = file("D\ne 1 2\ne 2 1\n");
    let o = run(&[
        "solve",
        "--problem",
        "topsort",
        "--input",
        cyclic.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("cycle"));

    let odd = file("U\ne 1 2\n");
    let o = run(&["solve", "--problem", "euler", "--input", odd.path().to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("evenDegrees"));

    let garbage = file("[proposers]\n1 2\n");
    assert_eq!(
        code(&run(&[
            "solve",
            "--problem",
            "match",
            "--input",
            garbage.path().to_str().unwrap()
        ])),
        2
    );
    assert_eq!(
        code(&run(&["solve", "--problem", "topsort", "--input", "/nonexistent/file"])),
        2
    );
    assert_eq!(
        code(&run(&[
            "solve",
            "--problem",
            "heap",
            "--input",
            path(&instance("chain.graph"))
        ])),
        2
    );
}

#[test]
fn verify_certifies_and_rejects() {
    let chain = instance("chain.graph");
    let good = file("1 2 3\n");
    let bad = file("2 1 3\n");
    let o = run(&[
        "verify",
        "--problem",
        "topsort",
        "--input",
        path(&chain),
        "--solution",
        good.path().to_str().unwrap(),
    ]);
    assert_eq!((code(&o), stdout(&o).as_str()), (0, "certified\n"));
    let o = run(&[
        "verify",
        "--problem",
        "topsort",
        "--input",
        path(&chain),
        "--solution",
        bad.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("points backward"));

    let circuit = file("1 2 3 4 5 3 1\n");
    let o = run(&[
        "verify",
        "--problem",
        "euler",
        "--input",
        path(&instance("bowtie.graph")),
        "--solution",
        circuit.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);

    let unstable = file("1 -> 2\n2 -> 1\n");
    let o = run(&[
        "verify",
        "--problem",
        "match",
        "--input",
        path(&instance("test1.match")),
        "--solution",
        unstable.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 1);

    let unparsable = file("1 two 3\n");
    let o = run(&[
        "verify",
        "--problem",
        "topsort",
        "--input",
        path(&chain),
        "--solution",
        unparsable.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 2);
}

#[test]
fn fuzz_is_deterministic_and_catches_faults() {
    let a = run(&["fuzz", "--problem", "heap", "--seed", "42", "--cases", "500"]);
    let b = run(&["fuzz", "--problem", "heap", "--seed", "42", "--cases", "500"]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(
        code(&run(&["fuzz", "--problem", "match", "--seed", "7", "--cases", "200"])),
        0
    );

    let o = run(&[
        "fuzz",
        "--problem",
        "match",
        "--seed",
        "7",
        "--cases",
        "200",
        "--contracts",
        "off",
        "--inject-fault",
        "gs-skip-rejection",
    ]);
    assert_eq!(code(&o), 1);
    let out = stdout(&o);
    let replay = out.lines().find_map(|l| l.strip_prefix("replay: certalgo ")).unwrap();
    let mut args: Vec<&str> = replay.split_whitespace().collect();
    args.extend(["--contracts", "off", "--inject-fault", "gs-skip-rejection"]);
    let again = run(&args);
    assert_eq!(code(&again), 1, "replay did not reproduce: {}", stdout(&again));
}

#[test]
fn report_counts() {
    let o = run(&["report"]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    assert!(out.lines().count() >= 12, "{out}");
    let total: Vec<&str> = out.lines().last().unwrap().split_whitespace().collect();
    assert_eq!(total[0], "total");
    assert!(total[1].parse::<u64>().unwrap() > 0);
    assert_eq!(total[2], "0");
    assert_eq!(out, stdout(&run(&["report"])));

    let off = stdout(&run(&["report", "--contracts", "off"]));
    assert!(off.lines().last().unwrap().ends_with(" 0          0"), "{off}");

    let faulty = stdout(&run(&["report", "--inject-fault", "heap-child-cmp"]));
    assert_ne!(faulty.lines().last().unwrap().split_whitespace().last(), Some("0"));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(code(&run(&["fuzz", "--problem", "heap"])), 2);
    assert_eq!(code(&run(&["solve", "--problem", "nope", "--input", "x"])), 2);
    assert_eq!(code(&run(&["check", "--contracts", "loud"])), 2);
    assert_eq!(code(&run(&["frobnicate"])), 2);
}
