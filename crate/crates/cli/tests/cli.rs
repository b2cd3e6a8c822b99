use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use heisenberg_lab::abelian::FiniteAbelianGroup;
use heisenberg_lab::action::HeisenbergAction;
use heisenberg_lab::numerics::haar_random_unitary;
use heisenberg_lab::repfile::write_rep;
use serde_json::Value;

fn hlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hlab"))
        .args(args)
        .env_remove("HLAB_SEED")
        .output()
        .expect("hlab runs")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("hlab-cli-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is a JSON report")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn verify_finite_passes_and_reports() {
    let out = hlab(&["verify-finite", "--group", "Z2xZ4", "--subgroup", "[(0,2)]"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let report = json(&out);
    assert_eq!(report["suite"], "verify-finite");
    assert_eq!(report["pass"], true);
    let records = report["records"].as_array().unwrap();
    assert!(records
        .iter()
        .any(|r| r["check_id"] == "commutant.canonical"));
    for r in records {
        assert!(
            r["metric_value"].is_number() && r["tolerance"].is_number(),
            "{r}"
        );
    }
    assert!(stderr(&out).contains("PASS commutation.exact_phase"));
}

#[test]
fn duality_suite_passes() {
    let out = hlab(&["duality", "--max-order", "12"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert_eq!(json(&out)["details"]["coverage"]["max_order"], 12);
}

#[test]
fn coarse_grid_notes_the_relaxed_tolerance() {
    let out = hlab(&["verify-real", "--grid-N", "16", "--grid-h", "1/2"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stderr(&out).contains("tolerance relaxed"));
    assert_eq!(json(&out)["details"]["tolerances"]["relaxed"], true);
}

#[test]
fn usage_errors_exit_2() {
    let bad_group = hlab(&["verify-finite", "--group", "Z0"]);
    assert_eq!(bad_group.status.code(), Some(2));
    assert!(
        stderr(&bad_group).contains("position"),
        "{}",
        stderr(&bad_group)
    );

    let odd = hlab(&["verify-real", "--grid-N", "15"]);
    assert_eq!(odd.status.code(), Some(2));

    // half-width Nh/2 = 1/2 cannot hold the Gaussian
    let narrow = hlab(&["verify-real", "--grid-N", "8", "--grid-h", "1/8"]);
    assert_eq!(narrow.status.code(), Some(2), "{}", stderr(&narrow));

    let offgroup = hlab(&["verify-finite", "--group", "Z4", "--subgroup", "[(1,1)]"]);
    assert_eq!(offgroup.status.code(), Some(2));

    let missing = hlab(&["decompose", "/nonexistent/rep.txt"]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn decompose_recovers_multiplicity() {
    let dir = scratch("decompose");
    let g = FiniteAbelianGroup::parse("Z2xZ3").unwrap();
    let rho = HeisenbergAction::canonical(&g)
        .copies(2)
        .conjugate(&haar_random_unitary(12, 3));
    let file = dir.join("rep.txt");
    fs::write(&file, write_rep(&rho)).unwrap();
    let csv = dir.join("csv");
    let report = dir.join("report.json");
    let out = hlab(&[
        "decompose",
        file.to_str().unwrap(),
        "--subgroup",
        "[(1,0)]",
        "--out",
        report.to_str().unwrap(),
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(out.stdout.is_empty());
    let report: Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(report["details"]["multiplicity"], 2);
    assert_eq!(report["environment"]["subgroup"], "[(1,0)]");
    for a in 0..2 {
        let text = fs::read_to_string(csv.join(format!("decompose_intertwiner_{a}.csv"))).unwrap();
        assert_eq!(text.lines().count(), 12);
    }
    let _ = fs::remove_dir_all(dir);
}

#[test]
fn relation_violation_exits_3() {
    let dir = scratch("violation");
    let file = dir.join("bad.txt");
    // V = 1 cannot satisfy VU = −UV
    fs::write(
        &file,
        "group Z2\ndim 2\ntranslation 0\n0 0 1 0\n1 0 0 0\nmodulation 0\n1 0 0 0\n0 0 1 0\n",
    )
    .unwrap();
    let out = hlab(&["decompose", file.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
    assert!(out.stdout.is_empty());

    fs::write(&file, "group Z2\ndim 2\ntranslation 0\n0 0 1\n").unwrap();
    let malformed = hlab(&["decompose", file.to_str().unwrap()]);
    assert_eq!(malformed.status.code(), Some(2));
    assert!(
        stderr(&malformed).contains("position"),
        "{}",
        stderr(&malformed)
    );
    let _ = fs::remove_dir_all(dir);
}

fn schema() -> jsonschema::Validator {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../docs/report.schema.json");
    let schema: Value = serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap();
    jsonschema::validator_for(&schema).expect("schema compiles")
}

#[test]
fn reports_match_the_published_schema() {
    let validator = schema();
    let runs: [&[&str]; 4] = [
        &[
            "verify-finite",
            "--group",
            "Z6",
            "--subgroup",
            "[2]",
            "--include-bases",
        ],
        &["verify-real", "--grid-N", "16", "--grid-h", "1/2"],
        &[
            "verify-product",
            "--group",
            "Z2",
            "--grid-N",
            "16",
            "--grid-h",
            "1/2",
        ],
        &["duality", "--max-order", "8"],
    ];
    for args in runs {
        let out = hlab(args);
        assert_eq!(out.status.code(), Some(0), "{args:?}: {}", stderr(&out));
        let report = json(&out);
        let errors: Vec<String> = validator
            .iter_errors(&report)
            .map(|e| e.to_string())
            .collect();
        assert!(errors.is_empty(), "{args:?}: {errors:?}");
        let all = report["records"]
            .as_array()
            .unwrap()
            .iter()
            .all(|r| r["pass"] == true);
        assert_eq!(report["pass"], all);
    }
}

#[test]
fn reports_are_deterministic_per_seed() {
    let args = ["verify-finite", "--group", "Z2xZ2", "--seed", "7"];
    let (a, b) = (hlab(&args), hlab(&args));
    assert_eq!(a.stdout, b.stdout);
    let other = hlab(&["verify-finite", "--group", "Z2xZ2", "--seed", "8"]);
    assert_eq!(json(&other)["environment"]["seed"], 8);
}
