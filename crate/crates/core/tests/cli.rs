use std::fs;
use std::process::{Command, Output};

use quandle_bilinear::invariant::InvariantReport;

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_quandle-bilinear"))
        .args(args)
        .env("QUANDLE_CATALOG", quandle_bilinear::catalog::BUNDLED_CATALOG)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn invariant_text() {
    let o = cli(&["invariant", "--link", "L2a1", "--quandle", "kei3", "--form", "swap12"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o), "u^16 + 4u^10\n");
}

#[test]
fn invariant_json_round_trips_to_the_text_output() {
    for engine in ["oracle", "propagate", "both"] {
        let base = ["invariant", "--link", "L6a4", "--quandle", "kei3", "--form", "swap12-33", "--engine", engine];
        let text = stdout(&cli(&base));
        let json = cli(&[&base[..], &["--format", "json"]].concat());
        assert_eq!(json.status.code(), Some(0));
        let report = InvariantReport::from_json(&stdout(&json)).unwrap();
        assert_eq!(format!("{}\n", report.polynomial()), text);
        assert_eq!(text, "18u^64 + 9u^40\n");
        assert_eq!(report.counting_invariant, 27);
        assert_eq!(
            (report.link.as_str(), report.quandle.as_str(), report.form.as_str()),
            ("L6a4", "kei3", "swap12-33")
        );
        assert_eq!(report.engine, engine);
    }
}

#[test]
fn batch_reproduces_both_tables() {
    let o = cli(&["batch", "--quandle", "kei3", "--form", "swap12"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let out = stdout(&o);
    assert!(out.contains("u^16 + 4u^10 | L2a1, L6a2, L7a6\n"), "{out}");
    assert!(out.contains("19u^64 + 8u^40 | L6a4\n"), "{out}");
    assert!(out.contains("18 of 18 links match"), "{out}");

    let o = cli(&["batch", "--quandle", "kei3", "--form", "swap12-33"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("5u^10 | L2a1, L6a2, L7a6\n"));
}

#[test]
fn batch_output_is_independent_of_job_count() {
    let one = cli(&["--jobs", "1", "batch", "--quandle", "kei3", "--form", "swap12-33"]);
    let many = cli(&["--jobs", "6", "batch", "--quandle", "kei3", "--form", "swap12-33"]);
    assert_eq!(stdout(&one), stdout(&many));
    let mut a: serde_json::Value = serde_json::from_str(&stdout(&cli(&[
        "--jobs",
        "1",
        "batch",
        "--quandle",
        "kei3",
        "--form",
        "swap12",
        "--format",
        "json",
    ])))
    .unwrap();
    let mut b: serde_json::Value = serde_json::from_str(&stdout(&cli(&[
        "--jobs",
        "5",
        "batch",
        "--quandle",
        "kei3",
        "--form",
        "swap12",
        "--format",
        "json",
    ])))
    .unwrap();
    for v in [&mut a, &mut b] {
        for r in v["results"].as_array_mut().unwrap() {
            r["elapsed_ms"] = 0.into();
        }
    }
    assert_eq!(a, b);
}

#[test]
fn batch_mismatch_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let src = std::path::Path::new(quandle_bilinear::catalog::BUNDLED_CATALOG);
    for sub in ["links", "quandles", "forms", "expected"] {
        fs::create_dir(dir.path().join(sub)).unwrap();
        for e in fs::read_dir(src.join(sub)).unwrap() {
            let p = e.unwrap().path();
            fs::copy(&p, dir.path().join(sub).join(p.file_name().unwrap())).unwrap();
        }
    }
    let table = dir.path().join("expected/swap12.json");
    let text = fs::read_to_string(&table).unwrap().replace("19u^64 + 8u^40", "19u^64 + 8u^41");
    fs::write(&table, text).unwrap();
    let o = cli(&[
        "--catalog",
        dir.path().to_str().unwrap(),
        "batch",
        "--quandle",
        "kei3",
        "--form",
        "swap12",
        "--links",
        "L2a1,L6a4",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("mismatch L6a4: expected 19u^64 + 8u^41, computed 19u^64 + 8u^40"));
}

#[test]
fn form_check_exit_codes() {
    for form in ["swap12", "swap12-33", "zero"] {
        let o = cli(&["form-check", "kei3", form]);
        assert_eq!(o.status.code(), Some(0), "{form}: {}", stderr(&o));
        assert!(stdout(&o).starts_with("valid"));
    }
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.form");
    let text = fs::read_to_string(format!("{}/forms/swap12.form", quandle_bilinear::catalog::BUNDLED_CATALOG)).unwrap();
    // Give block (1,1) a nonzero diagonal.
    fs::write(&bad, text.replacen("B 1 1\n0 1\n", "B 1 1\n1 1\n", 1)).unwrap();
    let o = cli(&["form-check", "kei3", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("axiom (i)"), "{}", stderr(&o));

    let malformed = dir.path().join("malformed.form");
    fs::write(&malformed, "form 3 2 2\nB 1 1\n0 7\n1 0\n").unwrap();
    let o = cli(&["form-check", "kei3", malformed.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("malformed.form"));
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));
}

#[test]
fn quandle_check_exit_codes() {
    let o = cli(&["quandle-check", "kei3"]);
    assert_eq!(stdout(&o), "valid quandle of order 3 (kei)\n");
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.quandle");
    fs::write(&bad, "quandle 2\n2 1\n2 2\n").unwrap();
    let o = cli(&["quandle-check", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("idempot"), "{}", stderr(&o));
}

#[test]
fn input_errors_exit_two() {
    assert_eq!(cli(&["invariant", "--link", "bogus", "--quandle", "kei3", "--form", "swap12"]).status.code(), Some(2));
    assert_eq!(cli(&["invariant", "--link", "L2a1", "--quandle", "kei3", "--form", "nope"]).status.code(), Some(2));
    assert_eq!(cli(&["nonsense"]).status.code(), Some(2));
    assert_eq!(cli(&["--jobs", "0", "catalog-list"]).status.code(), Some(2));
    assert_eq!(cli(&["form-search", "kei3", "--p", "4", "--n", "2"]).status.code(), Some(2));
    // The form was written for a three-element quandle.
    let o = cli(&["form-check", "symplectic-f2", "swap12"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn form_search_prints_valid_forms() {
    let o = cli(&["form-search", "kei3", "--p", "2", "--n", "2", "--allow-large"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert_eq!(out.matches("form 3 2 2").count(), 7);
    assert!(stderr(&o).starts_with("7 forms"));
    let o = cli(&["form-search", "kei3", "--p", "2", "--n", "2", "--allow-large", "--limit", "2"]);
    assert_eq!(stdout(&o).matches("form 3 2 2").count(), 2);
    let o = cli(&["form-search", "kei3", "--p", "2", "--n", "2"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn catalog_list_shows_every_link() {
    let o = cli(&["catalog-list"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let names: Vec<&str> = out.lines().filter(|l| l.starts_with('L')).map(|l| l.split('\t').next().unwrap()).collect();
    assert_eq!(names.len(), 18);
    assert_eq!(names[0], "L2a1");
    assert_eq!(names[17], "L7n2");
    assert!(out.contains("L6a4\t6 crossings\t3 components"), "{out}");
}

#[test]
fn import_pd_matches_catalog_file() {
    let catalog = quandle_bilinear::Catalog::default();
    let entry = catalog.load("L6a4").unwrap();
    let src = entry.file.source.clone().unwrap();
    let signs = quandle_bilinear::diagram::render_signs(src.signs.as_deref().unwrap());
    let o = cli(&[
        "import-pd",
        "--name",
        "L6a4",
        "--pd",
        &src.code,
        &format!("--signs={signs}"),
        "--orientation",
        entry.orientation().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o), fs::read_to_string(&entry.path).unwrap());

    let o = cli(&["import-pd", "--name", "hopf", "--pd", "X[4,1,3,2] X[2,3,1,4]"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("sign"), "{}", stderr(&o));
}

#[test]
fn paths_work_as_well_as_ids() {
    let root = quandle_bilinear::catalog::BUNDLED_CATALOG;
    let o = cli(&[
        "invariant",
        "--link",
        &format!("{root}/variants/trefoil-r2.diagram"),
        "--quandle",
        &format!("{root}/quandles/kei3.quandle"),
        "--form",
        &format!("{root}/forms/swap12.form"),
        "--format",
        "json",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let report = InvariantReport::from_json(&stdout(&o)).unwrap();
    assert_eq!(report.link, "trefoil-r2");
    assert_eq!(report.quandle, "kei3");
}
