use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use elrp_core::instanceio::{parse_instance, serialize_instance};
use elrp_core::mip::read_mps;
use elrp_core::RouteSolution;

fn elrp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_elrp")).args(args).output().expect("binary runs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn gen(dir: &Path, name: &str, customers: usize, seed: u64) -> std::path::PathBuf {
    let path = dir.join(name);
    let out = elrp(&[
        "gen",
        "--customers",
        &customers.to_string(),
        "--stations",
        "2",
        "--seed",
        &seed.to_string(),
        "--out",
        s(&path),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    path
}

#[test]
fn gen_is_deterministic() {
    let a = elrp(&["gen", "--customers", "5", "--stations", "2", "--seed", "7"]);
    let b = elrp(&["gen", "--customers", "5", "--stations", "2", "--seed", "7"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let inst = parse_instance(&a.stdout).unwrap();
    assert_eq!(inst.customers().len(), 5);
    assert_eq!(inst.stations().len(), 2);
    let c = elrp(&["gen", "--customers", "5", "--stations", "2", "--seed", "8"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn gen_count_writes_a_directory() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("set");
    let out = elrp(&["gen", "--customers", "3", "--stations", "1", "--seed", "1", "--count", "3", "--out", s(&target)]);
    assert!(out.status.success());
    assert_eq!(fs::read_dir(&target).unwrap().count(), 3);
    assert_eq!(elrp(&["gen", "--customers", "3", "--stations", "1", "--count", "2"]).status.code(), Some(2));
}

#[test]
fn solve_then_validate() {
    let dir = tempfile::tempdir().unwrap();
    let inst = gen(dir.path(), "i.json", 4, 3);
    let sol = dir.path().join("i.sol.json");
    let out = elrp(&["solve-exact", "--instance", s(&inst), "--out", s(&sol)]);
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = stdout.lines().collect();
    assert_eq!(lines[0], "instance,status,objective,bound,gap,nodes,time_s");
    assert_eq!(lines.len(), 2);
    assert!(lines[1].contains(",optimal,"));

    let out = elrp(&["validate", "--instance", s(&inst), "--solution", s(&sol)]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("feasible objective"));

    // drop the first customer of the first route
    let mut solution = RouteSolution::from_json(&fs::read_to_string(&sol).unwrap()).unwrap();
    let parsed = parse_instance(&fs::read(&inst).unwrap()).unwrap();
    let pos = solution.routes[0].iter().position(|&v| parsed.is_customer(v)).unwrap();
    let removed = solution.routes[0].remove(pos);
    let tampered = dir.path().join("bad.json");
    fs::write(&tampered, solution.to_json()).unwrap();
    let out = elrp(&["validate", "--instance", s(&inst), "--solution", s(&tampered)]);
    assert_eq!(out.status.code(), Some(1));
    let listing = String::from_utf8(out.stdout).unwrap();
    assert!(listing.contains("infeasible"));
    assert!(listing.contains(&format!("customer {removed} visited 0 times")), "{listing}");
}

#[test]
fn exported_models_parse_externally() {
    let dir = tempfile::tempdir().unwrap();
    let inst = gen(dir.path(), "i.json", 4, 5);
    for model in ["m1", "m2", "m3", "m4"] {
        let path = dir.path().join(format!("{model}.mps"));
        let out = elrp(&["build-mip", "--instance", s(&inst), "--model", model, "--out", s(&path)]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        let text = fs::read_to_string(&path).unwrap();
        assert!(mps::Parser::<f64>::parse(&text).is_ok(), "{model}");
        assert!(read_mps(&text).is_ok());
    }
    let lp = dir.path().join("m1.lp");
    let out = elrp(&["build-mip", "--instance", s(&inst), "--model", "m1", "--beta", "2", "--strengthen", "--linear", "--out", s(&lp)]);
    assert_eq!(out.status.code(), Some(0));
    let text = fs::read_to_string(&lp).unwrap();
    assert!(text.starts_with("\\ ") || text.starts_with("Minimize"));
    assert!(text.contains("Subject To"));
}

#[test]
fn compare_charging_csv_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let set = dir.path().join("set");
    fs::create_dir(&set).unwrap();
    for seed in 1..4 {
        gen(&set, &format!("i{seed}.json"), 3, seed);
    }
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    assert!(elrp(&["compare-charging", "--instance", s(&set), "--jobs", "3", "--out", s(&a)]).status.success());
    assert!(elrp(&["compare-charging", "--instance", s(&set), "--out", s(&b)]).status.success());
    let text = fs::read_to_string(&a).unwrap();
    assert_eq!(text, fs::read_to_string(&b).unwrap());
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 4);
    assert!(lines[0].starts_with("instance,status,obj,"));
}

#[test]
fn identical_functions_give_zero_gap() {
    let dir = tempfile::tempdir().unwrap();
    let src = gen(dir.path(), "i.json", 4, 11);
    let linear = parse_instance(&fs::read(&src).unwrap()).unwrap().linearized();
    let path = dir.path().join("linear.json");
    fs::write(&path, serialize_instance(&linear)).unwrap();
    let out = elrp(&["compare-charging", "--instance", s(&path)]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let header: Vec<&str> = text.lines().next().unwrap().split(',').collect();
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    let col = header.iter().position(|h| *h == "nl_g").unwrap();
    assert_eq!(row[col].parse::<f64>().unwrap(), 0.0);
}

#[test]
fn error_exit_codes() {
    assert_eq!(elrp(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(elrp(&["build-mip", "--instance", "x.json"]).status.code(), Some(2));
    assert_eq!(elrp(&["preprocess", "--instance", "/nonexistent/i.json"]).status.code(), Some(1));
    let dir = tempfile::tempdir().unwrap();
    let inst = gen(dir.path(), "i.json", 3, 2);
    let out = elrp(&["compare-charging", "--instance", s(&inst), "--engine", "backend"]);
    assert_eq!(out.status.code(), Some(1));
    let out = Command::new(env!("CARGO_BIN_EXE_elrp"))
        .args(["solve-mip", "--instance", s(&inst), "--model", "m3"])
        .env_remove("ELRP_BACKEND")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn preprocess_and_paths_reports() {
    let dir = tempfile::tempdir().unwrap();
    let inst = gen(dir.path(), "i.json", 4, 9);
    let out = elrp(&["preprocess", "--instance", s(&inst)]);
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(report["infeasible_arcs"].is_array());
    assert_eq!(report["station_escape"].as_object().unwrap().len(), 2);
    let out = elrp(&["paths", "--instance", s(&inst), "--max-stations", "1"]);
    let pairs: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    for p in pairs.as_array().unwrap() {
        assert!(p["after"].as_u64() <= p["before"].as_u64());
        assert!(p["kept"].as_array().unwrap().len() as u64 == p["after"].as_u64().unwrap());
    }
}

#[cfg(unix)]
#[test]
fn solve_mip_reads_backend_output() {
    use std::os::unix::fs::PermissionsExt;
    let dir = tempfile::tempdir().unwrap();
    let inst = gen(dir.path(), "i.json", 3, 4);
    let script = dir.path().join("solver.sh");
    fs::write(&script, "#!/bin/sh\nprintf '@status infeasible\\n' > \"$2\"\n").unwrap();
    fs::set_permissions(&script, fs::Permissions::from_mode(0o755)).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_elrp"))
        .args(["solve-mip", "--instance", s(&inst), "--model", "m3", "--time-limit", "5"])
        .env("ELRP_BACKEND", &script)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().nth(1).unwrap().contains(",infeasible,"), "{text}");
}
