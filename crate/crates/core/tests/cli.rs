use std::path::PathBuf;
use std::process::Command;

use conjlim::io::{matrix_from_json, matrix_to_json};
use conjlim::numkit::{d_nm, elementary, ginibre, seeded_rng, Matrix};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_conjlim"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("conjlim-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn write(name: &str, m: &Matrix) -> PathBuf {
    let p = scratch(name);
    std::fs::write(&p, matrix_to_json(m)).unwrap();
    p
}

fn json(out: &std::process::Output) -> serde_json::Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn criteria_kernel_witness() {
    let z = write("z.json", &d_nm(3, 1));
    let a = write("a.json", &elementary(3, 0, 1));
    let v = json(&bin().args(["criteria", "--op", "sker", "--Z"]).arg(&z).arg("--A").arg(&a).output().unwrap());
    assert_eq!(v["member"], false);
    assert_eq!(v["witness"]["data"][1][0], 1.0);
    let d = json(&bin().args(["criteria", "--op", "dim", "--Z"]).arg(&z).output().unwrap());
    assert_eq!(d["dim"], 7);
}

#[test]
fn goodpath_then_simulate() {
    let z = write("gz.json", &d_nm(2, 1));
    let gp = scratch("gp.json");
    let st = bin().args(["goodpath", "--Z"]).arg(&z).arg("--out").arg(&gp).status().unwrap();
    assert!(st.success());
    let a = write("ga.json", &elementary(2, 0, 1));
    let csv = scratch("g.csv");
    let path = format!("goodpath:{}", gp.display());
    let r = json(&bin().args(["simulate", "--path", &path, "--A"]).arg(&a).arg("--csv").arg(&csv).output().unwrap());
    assert_eq!(r["verdict"], "divergent");
    assert_eq!(std::fs::read_to_string(&csv).unwrap().lines().count(), 27);
}

#[test]
fn modifier_ops() {
    let z = write("mz.json", &d_nm(3, 1));
    let h = write("mh.json", &elementary(3, 0, 2));
    let mut rng = seeded_rng(3);
    let a = write("ma.json", &ginibre(3, 3, &mut rng));
    let phi = format!("hadamard:{}", h.display());
    let r = json(&bin().args(["modifier", "--op", "member", "--phi", &phi, "--seed", "42", "--Z"]).arg(&z).arg("--A").arg(&a).output().unwrap());
    assert_eq!(r["verdict"]["member"], true);
    let f = json(&bin().args(["modifier", "--op", "faithful", "--phi", "J", "--seed", "1", "--Z"]).arg(&z).output().unwrap());
    assert_eq!(f["faithful"], true);
    let missing = bin().args(["modifier", "--op", "member", "--phi", "J", "--Z"]).arg(&z).arg("--A").arg(&a).output().unwrap();
    assert!(!missing.status.success());
}

#[test]
fn suite_exit_codes() {
    let ok = bin().args(["suite", "dim-formula", "--seed", "1"]).output().unwrap();
    let v = json(&ok);
    assert_eq!(v["passed"], true);
    assert!(v["cases"][0]["anchor"].as_str().unwrap().contains("n^2"));
    let bad = bin().args(["suite", "unknown", "--seed", "1"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn convert_round_trip() {
    let mut rng = seeded_rng(5);
    let m = ginibre(5, 5, &mut rng);
    let src = write("c.json", &m);
    let csv = scratch("c.csv");
    let back = scratch("back.json");
    assert!(bin().arg("convert").arg(&src).arg("--out").arg(&csv).status().unwrap().success());
    assert!(bin().arg("convert").arg(&csv).arg("--out").arg(&back).status().unwrap().success());
    let r = matrix_from_json(&std::fs::read_to_string(&back).unwrap()).unwrap();
    for (x, y) in m.iter().zip(r.iter()) {
        assert!((x - y).norm() <= 1e-15 * x.norm());
    }
    let bad = scratch("bad.json");
    std::fs::write(&bad, "{\"rows\": 2,\n \"cols\": }").unwrap();
    let out = bin().arg("convert").arg(&bad).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
}
