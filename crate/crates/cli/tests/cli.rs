use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const LINE3: &str = "capcover-instance v1
variant monotonic
points 3
dist
0/1 1/1 2/1
1/1 0/1 1/1
2/1 1/1 0/1
balls 2
0 0 1/1 2
1 2 1/1 2
";

fn capcover(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_capcover")).args(args).current_dir(cwd).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn value<'a>(text: &'a str, key: &str) -> &'a str {
    let prefix = format!("{key} = ");
    text.lines().find_map(|l| l.strip_prefix(prefix.as_str())).unwrap_or_else(|| panic!("no {key} in output"))
}

#[test]
fn generate_writes_a_loadable_instance() {
    let dir = tempfile::tempdir().unwrap();
    let out = capcover(
        &["generate", "--points", "6", "--balls", "4", "--variant", "monotonic", "--seed", "3", "-o", "a.inst"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stderr).contains("seed 3"));
    let text = fs::read_to_string(dir.path().join("a.inst")).unwrap();
    let inst = capcover::instance::parse_instance(&text).unwrap();
    assert_eq!(inst.space().len(), 6);
    assert_eq!(inst.balls().len(), 4);
}

#[test]
fn zero_points_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = capcover(&["generate", "--points", "0", "--balls", "3"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(
        String::from_utf8_lossy(&out.stderr).contains("Usage")
            || String::from_utf8_lossy(&out.stderr).contains("--help")
    );
}

#[test]
fn set_cover_reduction_instance() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("sets.txt"), "0 1\n1 2\n").unwrap();
    let out = capcover(&["generate", "--from-setcover", "sets.txt", "--capacity", "3"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let inst = capcover::instance::parse_instance(&stdout(&out)).unwrap();
    assert_eq!(inst.demand(), &[0, 1, 2]);
    assert_eq!(inst.balls().len(), 2);
    assert!(inst.balls().iter().all(|b| b.capacity == 3));
}

#[test]
fn solve_line3_both_variants() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("line3.inst"), LINE3).unwrap();
    for (variant, beta) in [("monotonic", "5/1"), ("uniform", "2+sqrt5")] {
        let out = capcover(&["solve", "line3.inst", "--variant", variant, "--trace", "t", "-o", "s"], dir.path());
        let text = stdout(&out);
        assert_eq!(out.status.code(), Some(0), "{text}");
        assert_eq!(value(&text, "status"), "pass");
        assert_eq!(value(&text, "variant"), variant);
        assert_eq!(value(&text, "beta-limit"), beta);
        assert!(text.contains("[check integral.declared-expansion]\nstatus = pass"));
        assert!(fs::read_to_string(dir.path().join("t")).unwrap().starts_with("capcover-trace v1"));
        assert!(fs::read_to_string(dir.path().join("s")).unwrap().starts_with("capcover-solution v1"));
    }
}

#[test]
fn uncovered_point_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    // Point 2 lies outside the only ball.
    let text = LINE3.replace("balls 2\n0 0 1/1 2\n1 2 1/1 2\n", "balls 1\n0 0 1/1 3\n");
    fs::write(dir.path().join("u.inst"), text).unwrap();
    let out = capcover(&["solve", "u.inst"], dir.path());
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn bad_alpha_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("line3.inst"), LINE3).unwrap();
    for alpha in ["0", "1/2", "x"] {
        let out = capcover(&["solve", "line3.inst", "--alpha", alpha], dir.path());
        assert_eq!(out.status.code(), Some(2), "alpha {alpha}");
    }
}

fn seeded_dir(dir: &Path, n: u64) {
    for seed in 0..n {
        let variant = if seed % 2 == 0 { "monotonic" } else { "uniform" };
        let name = format!("i{seed:02}.inst");
        let out = capcover(
            &[
                "generate",
                "--points",
                "6",
                "--balls",
                "4",
                "--variant",
                variant,
                "--seed",
                &seed.to_string(),
                "-o",
                &name,
            ],
            dir,
        );
        assert_eq!(out.status.code(), Some(0));
    }
}

fn cell(row: &str, i: usize) -> &str {
    row.split_whitespace().nth(i).unwrap()
}

#[test]
fn compare_ten_seeded_instances() {
    let dir = tempfile::tempdir().unwrap();
    seeded_dir(dir.path(), 10);
    let out = capcover(&["compare", ".", "--csv", "out.csv"], dir.path());
    let text = stdout(&out);
    assert_eq!(out.status.code(), Some(0), "{text}");
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 11);
    assert!(lines[0].starts_with("file"));
    for row in &lines[1..] {
        let opt: usize = cell(row, 5).parse().unwrap();
        let greedy: usize = cell(row, 6).parse().unwrap();
        let pipeline: usize = cell(row, 7).parse().unwrap();
        assert!(pipeline >= opt && greedy >= opt, "{row}");
        assert_eq!(cell(row, 9), "pass");
    }
    let csv = fs::read_to_string(dir.path().join("out.csv")).unwrap();
    assert_eq!(csv.lines().count(), 11);
    assert!(csv.lines().skip(1).all(|l| l.split(',').count() == 10));
}

#[test]
fn compare_empty_directory_prints_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let out = capcover(&["compare", "."], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 1);
    assert!(text.starts_with("file"));
}

#[test]
fn compare_marks_over_budget_rows() {
    let dir = tempfile::tempdir().unwrap();
    seeded_dir(dir.path(), 2);
    let out = capcover(&["compare", ".", "--budget", "3"], dir.path());
    let text = stdout(&out);
    assert_eq!(out.status.code(), Some(0), "{text}");
    for row in text.lines().skip(1) {
        assert_eq!(cell(row, 5), "?");
    }
}

#[test]
fn compare_reports_unreadable_instances_as_rows() {
    let dir = tempfile::tempdir().unwrap();
    seeded_dir(dir.path(), 1);
    fs::write(dir.path().join("zz.inst"), "garbage\n").unwrap();
    let out = capcover(&["compare", "."], dir.path());
    let text = stdout(&out);
    assert_eq!(out.status.code(), Some(1));
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows.len(), 3);
    assert_eq!(cell(rows[1], 9), "pass");
    assert!(rows[2].contains("error"));
}

#[test]
fn identical_invocations_give_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    seeded_dir(dir.path(), 4);
    let a = capcover(&["compare", "."], dir.path());
    let b = capcover(&["compare", ".", "--sequential"], dir.path());
    assert_eq!(a.stdout, b.stdout);
    fs::write(dir.path().join("line3.inst"), LINE3).unwrap();
    let a = capcover(&["solve", "line3.inst"], dir.path());
    let b = capcover(&["solve", "line3.inst"], dir.path());
    assert_eq!(a.stdout, b.stdout);
    let g1 = capcover(&["generate", "--points", "5", "--balls", "5", "--seed", "9"], dir.path());
    let g2 = capcover(&["generate", "--points", "5", "--balls", "5", "--seed", "9"], dir.path());
    assert_eq!(g1.stdout, g2.stdout);
}
