use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn spec_file(name: &str, body: &str) -> PathBuf {
    let path = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name);
    fs::write(&path, body).unwrap();
    path
}

fn surface(name: &str, genus: usize, boundaries: &[usize], plain: &[&str], vortex: &[&str]) -> PathBuf {
    let body = serde_json::json!({
        "genus": genus,
        "boundaries": boundaries,
        "punctures": {"plain": plain, "vortex": vortex},
    });
    spec_file(name, &body.to_string())
}

fn sfl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sfl")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn info() {
    let tri = surface("info_tri.json", 0, &[3], &["P1"], &[]);
    let o = sfl(&["info", tri.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).starts_with("n=3 aleph=3 triangles=3 rk=1"));

    let g2 = surface("info_g2.json", 2, &[1], &[], &[]);
    let o = sfl(&["info", g2.to_str().unwrap()]);
    assert!(stdout(&o).starts_with("n=10 aleph=7 triangles=7 rk=4"), "{}", stdout(&o));

    let closed = surface("info_closed.json", 1, &[], &["P1"], &[]);
    let o = sfl(&["info", closed.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(stdout(&o).contains("boundary nonempty"));

    let broken = spec_file("info_broken.json", "{\"genus\": 0,\n \"boundaries\": [3,\n}");
    let o = sfl(&["info", broken.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));

    let extra = spec_file("info_extra.json", r#"{"genus":0,"boundaries":[3],"punctures":{"plain":[],"vortex":[]},"x":1}"#);
    assert_eq!(code(&sfl(&["info", extra.to_str().unwrap()])), 2);
}

#[test]
fn verify_exit_codes() {
    let digon = surface("verify_digon.json", 0, &[2], &["P1"], &[]);
    let o = sfl(&["verify", digon.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).contains("PASS thin-db: 2/2 close"));
    assert!(!stdout(&o).contains("FAIL"));

    let hexagon = surface("verify_d6.json", 0, &[6], &[], &[]);
    let o = sfl(&["verify", hexagon.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("square: 12/12"));
    assert!(stdout(&o).contains("pentagon: 30/30"));
    assert!(stdout(&o).contains("sym-hex: none found"));

    let o = sfl(&["verify", digon.to_str().unwrap(), "--max-vertices", "1"]);
    assert_eq!(code(&o), 3);

    let vortex = surface("verify_vortex.json", 0, &[3], &[], &["V"]);
    let o = sfl(&["verify", vortex.to_str().unwrap(), "--signed"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).contains("14 vertices"));
}

#[test]
fn aj_rendering() {
    let tri = surface("aj_tri.json", 0, &[3], &["P1"], &[]);
    let o = sfl(&["aj", tri.to_str().unwrap(), "s1 s2 d1"]);
    assert_eq!(stdout(&o).trim(), "(1) = e_1");
    let o = sfl(&["aj", tri.to_str().unwrap(), "z1 d1", "--relative", "P1"]);
    assert_eq!(stdout(&o).trim(), "(0) = 0");
    assert_eq!(code(&sfl(&["aj", tri.to_str().unwrap(), "q7"])), 2);
    assert_eq!(code(&sfl(&["aj", tri.to_str().unwrap(), "d1", "--relative", "P9"])), 2);
}

#[test]
fn qp_and_mutate() {
    let tri = surface("qp_tri.json", 0, &[3], &["P1"], &[]);
    let o = sfl(&["qp", tri.to_str().unwrap(), "--admissible"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["loops"], 1);
    assert_eq!(v["two_cycles"], 1);

    let pent = surface("qp_d5.json", 0, &[5], &[], &[]);
    let o = sfl(&["qp", pent.to_str().unwrap()]);
    let qp_path = spec_file("qp_d5_out.json", &stdout(&o));
    let o = sfl(&["mutate", qp_path.to_str().unwrap(), "--vertex", "1"]);
    assert_eq!(code(&o), 0);
    let m: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(m["arrows"].as_array().unwrap().len(), 1);
    assert_eq!(code(&sfl(&["mutate", qp_path.to_str().unwrap(), "--vertex", "9"])), 2);
}

#[test]
fn presentations() {
    let tri = surface("pres_tri.json", 0, &[3], &["P1"], &[]);
    let o = sfl(&["presentation", tri.to_str().unwrap()]);
    assert!(stdout(&o).contains("s2 d1 = d1 s2"));
    let o = sfl(&["presentation", tri.to_str().unwrap(), "--mt", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["generators"].as_array().unwrap().len(), 3);
    let tags: Vec<&str> = v["relations"].as_array().unwrap().iter().map(|r| r["tag"].as_str().unwrap()).collect();
    assert_eq!(tags.iter().filter(|t| **t == "Sb").count(), 1);
    let mono = surface("pres_mono.json", 0, &[1], &["P1"], &[]);
    assert_eq!(code(&sfl(&["presentation", mono.to_str().unwrap()])), 2);
}

#[test]
fn export_is_deterministic() {
    let square = surface("export_d4.json", 0, &[4], &[], &[]);
    let a = sfl(&["export", square.to_str().unwrap(), "--format", "dot"]);
    let b = sfl(&["export", square.to_str().unwrap(), "--format", "dot"]);
    assert_eq!(a.stdout, b.stdout);
    let dot = stdout(&a);
    assert_eq!(dot.matches("[label=\"").count() - dot.matches("->").count(), 2);

    let tri = surface("export_tri.json", 0, &[3], &["P1"], &[]);
    let out = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("export_tri_graph.json");
    let o = sfl(&["export", tri.to_str().unwrap(), "--format", "json", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["vertices"].as_array().unwrap().len(), 10);
    assert_eq!(v["complete"], true);
}
