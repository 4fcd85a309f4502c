use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const HA_EV: f64 = 27.211386245988;

fn qgf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qgf")).args(args).output().unwrap()
}

fn data(file: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/tests/data")
        .join(file)
        .to_string_lossy()
        .into_owned()
}

fn out_dir(tmp: &tempfile::TempDir, name: &str) -> PathBuf {
    tmp.path().join(name)
}

fn json(path: PathBuf) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn csv(path: PathBuf) -> (String, Vec<Vec<f64>>) {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().to_string();
    let rows = lines
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    (header, rows)
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn dimer_reference_energy() {
    let tmp = tempfile::tempdir().unwrap();
    let out = out_dir(&tmp, "dimer");
    let o = qgf(&[
        "vqe",
        "--system",
        "builtin:hubbard_dimer,t=1,U=2",
        "--ansatz",
        "none",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    // bonding orbital doubly occupied: -2t + U/2
    let v = json(out.join("vqe.json"));
    assert!((v["energy_ha"].as_f64().unwrap() + 1.0).abs() < 1e-12);
    assert_eq!(v["converged"], Value::Bool(true));
    let (header, rows) = csv(out.join("vqe_trace.csv"));
    assert_eq!(header, "iteration,energy_ha");
    assert_eq!(rows.len(), 1);
}

#[test]
fn lih_vqe_energy_and_zero_iteration_limit() {
    let tmp = tempfile::tempdir().unwrap();
    let sys = data("lih_sto3g.fcidump");
    let out = out_dir(&tmp, "u1");
    let o = qgf(&[
        "vqe",
        "--system",
        &sys,
        "--ansatz",
        "lih_u1",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let e = json(out.join("vqe.json"))["energy_ev"].as_f64().unwrap();
    assert!((e + 214.3323).abs() < 0.05, "{e}");

    // θ = 0 is the reference determinant; the run is flagged as unconverged
    let out = out_dir(&tmp, "zero");
    let o = qgf(&[
        "vqe",
        "--system",
        &sys,
        "--ansatz",
        "lih_u1",
        "--max-iter",
        "0",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 3);
    let v = json(out.join("vqe.json"));
    assert!((v["energy_ev"].as_f64().unwrap() + 213.9322).abs() < 0.05);
    assert!((v["energy_ha"].as_f64().unwrap() - v["e_rhf_ha"].as_f64().unwrap()).abs() < 1e-10);
    assert_eq!(v["converged"], Value::Bool(false));
}

#[test]
fn single_level_spectrum_is_one_lorentzian() {
    let tmp = tempfile::tempdir().unwrap();
    let out = out_dir(&tmp, "sl");
    let delta = 0.05;
    let o = qgf(&[
        "spectrum",
        "--system",
        "builtin:single_level,eps=-1",
        "--ansatz",
        "fci",
        "--delta-au",
        "0.05",
        "--omega-min-ev",
        "-30",
        "--omega-max-ev",
        "10",
        "--omega-step-ev",
        "0.25",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    // both spin orbitals removable at ε = -1 Ha; with no electron sector
    // the zero of ω sits 0.5 Ha above the hole pole
    let (header, rows) = csv(out.join("spectrum.csv"));
    assert_eq!(header, "omega_ev,A");
    assert_eq!(rows.len(), 161);
    for r in &rows {
        let x = r[0] / HA_EV + 0.5;
        let want = 2.0 * delta / PI / (x * x + delta * delta);
        assert!((r[1] - want).abs() < 1e-9 * want.max(1.0), "{r:?} vs {want}");
    }
    let t = json(out.join("transitions.json"));
    assert_eq!(t["provenance"]["mode"], "exact");
    assert!((t["mu_ha"].as_f64().unwrap() + 0.5).abs() < 1e-12);
}

#[test]
fn sampled_spectrum_records_seed_and_self_energy() {
    let tmp = tempfile::tempdir().unwrap();
    let out = out_dir(&tmp, "s");
    let o = qgf(&[
        "spectrum",
        "--system",
        "builtin:hubbard_dimer,t=1,U=2",
        "--ansatz",
        "fci",
        "--mode",
        "sampled",
        "--nmeas",
        "500",
        "--seed",
        "17",
        "--self-energy",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let t = json(out.join("transitions.json"));
    assert_eq!(t["provenance"]["mode"], "sampled");
    assert_eq!(t["provenance"]["seed"], 17);
    assert_eq!(t["provenance"]["n_meas"], 500);
    let (header, rows) = csv(out.join("self_energy.csv"));
    assert_eq!(header, "omega_ev,re_tr_sigma_ev,im_tr_sigma_ev");
    assert!(!rows.is_empty());
    let cfg = json(out.join("config.json"));
    assert_eq!(cfg["seed"], 17);

    let o = qgf(&[
        "spectrum",
        "--system",
        "builtin:hubbard_dimer",
        "--ansatz",
        "fci",
        "--mode",
        "sampled",
        "--nmeas",
        "10,20",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 2);
}

#[test]
fn gm_study_reruns_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = out_dir(&tmp, name);
        let o = qgf(&[
            "gm-study",
            "--system",
            "builtin:hubbard_dimer,t=1,U=4",
            "--ansatz",
            "fci",
            "--mode",
            "sampled",
            "--nmeas",
            "100,1000",
            "--reps",
            "8",
            "--seed",
            "5",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        out
    };
    let (a, b) = (run("a"), run("b"));
    for f in ["config.json", "gm_scatter.csv", "gm_summary.csv", "gm_reference.json"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
    let (header, rows) = csv(a.join("gm_scatter.csv"));
    assert_eq!(header, "n_meas,repetition,delta_e1_ev,delta_e2_ev");
    assert_eq!(rows.len(), 16);
    assert!(rows.windows(2).any(|w| w[0][2] != w[1][2]));
}

#[test]
fn exact_gm_study_collapses_onto_reference() {
    let tmp = tempfile::tempdir().unwrap();
    let out = out_dir(&tmp, "x");
    let o = qgf(&[
        "gm-study",
        "--system",
        "builtin:hubbard_dimer,t=1,U=2",
        "--ansatz",
        "fci",
        "--reps",
        "3",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let r = json(out.join("gm_reference.json"));
    let e1 = r["exact"]["delta_e1_ev"].as_f64().unwrap();
    let e2 = r["exact"]["delta_e2_ev"].as_f64().unwrap();
    let (_, rows) = csv(out.join("gm_scatter.csv"));
    assert_eq!(rows.len(), 3);
    for row in rows {
        assert!((row[2] - e1).abs() < 1e-7 && (row[3] - e2).abs() < 1e-7);
    }
    // exact dimer ground energy 1 - sqrt(5) Ha for t = 1, U = 2
    let e_gm = r["exact"]["e_gm_ev"].as_f64().unwrap();
    assert!((e_gm / HA_EV - (1.0 - 5f64.sqrt())).abs() < 1e-7);
}

#[test]
fn config_file_fills_in_and_flags_win() {
    let tmp = tempfile::tempdir().unwrap();
    let out = out_dir(&tmp, "cfg");
    let path = tmp.path().join("run.toml");
    fs::write(
        &path,
        format!(
            "system = \"builtin:hubbard_dimer,t=1,U=2\"\nansatz = \"fci\"\nmode = \"sampled\"\nnmeas = [50, 60]\nreps = 2\nseed = 9\nout = {:?}\n",
            out.to_str().unwrap()
        ),
    )
    .unwrap();
    let o = qgf(&["gm-study", "--config", path.to_str().unwrap(), "--seed", "11"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let cfg = json(out.join("config.json"));
    assert_eq!(cfg["seed"], 11);
    assert_eq!(cfg["repetitions"], 2);
    assert_eq!(cfg["n_meas"], serde_json::json!([50, 60]));

    fs::write(&path, "system = \"builtin:single_level\"\nshots = 3\n").unwrap();
    let o = qgf(&["spectrum", "--config", path.to_str().unwrap(), "--ansatz", "fci"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn exit_codes_distinguish_failures() {
    let tmp = tempfile::tempdir().unwrap();
    let out = out_dir(&tmp, "e");
    let out = out.to_str().unwrap();
    let dimer = "builtin:hubbard_dimer,t=1,U=2";
    for (args, want) in [
        (vec!["vqe", "--system", "builtin:nope", "--ansatz", "none"], 2),
        (
            vec!["vqe", "--system", "builtin:hubbard_dimer,t", "--ansatz", "none"],
            2,
        ),
        (vec!["vqe", "--system", dimer, "--ansatz", "none", "--unknown-flag"], 2),
        (
            vec!["spectrum", "--system", dimer, "--ansatz", "fci", "--nmeas", "0"],
            2,
        ),
        (vec!["gm-study", "--system", dimer, "--ansatz", "fci", "--reps", "0"], 2),
        (
            vec!["spectrum", "--system", dimer, "--ansatz", "fci", "--delta-au", "0"],
            2,
        ),
        (
            vec![
                "spectrum",
                "--system",
                dimer,
                "--ansatz",
                "fci",
                "--max-sector-dim",
                "2",
            ],
            4,
        ),
        (vec!["spectrum", "--system", dimer, "--ansatz", "lih_u1"], 1),
    ] {
        let mut args = args;
        args.extend(["--out", out]);
        let o = qgf(&args);
        assert_eq!(code(&o), want, "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
    let bad = tmp.path().join("bad.fcidump");
    fs::write(&bad, "&FCI NORB=2,NELEC=2,\n&END\n  not a number 1 1 0 0\n").unwrap();
    let o = qgf(&[
        "vqe",
        "--system",
        bad.to_str().unwrap(),
        "--ansatz",
        "none",
        "--out",
        out,
    ]);
    assert_eq!(code(&o), 2, "{}", String::from_utf8_lossy(&o.stderr));
}
