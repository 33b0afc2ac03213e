use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const QUICK: &str = r#"
[schedule]
nbar0 = 0.05
[solver]
fock_cutoff = 10
steps_per_drive_period = 100
truncation_margin = 4
"#;

fn eqc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_eqc")).args(args).output().expect("spawn eqc")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn records(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r.records().map(|x| x.unwrap().iter().map(String::from).collect()).collect();
    (header, rows)
}

#[test]
fn gate_sim_with_heating_from_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", &format!("{QUICK}\n[channels]\nheating = \"140 quanta/s\"\n"));
    let out = dir.path().join("r.json");
    let o = eqc(&["gate-sim", "--config", s(&cfg), "--out", s(&out), "--format", "json"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(&out).unwrap()).unwrap();
    let rec = &v[0];
    assert_eq!(rec["channels"], "heating");
    assert_eq!(rec["walsh"], 3);
    let inf = rec["infidelity"].as_f64().unwrap();
    assert!(inf > 1e-6 && inf < 1e-3, "{inf}");
    assert_eq!(rec["gates_passed"], true);
    assert!(rec["config_hash"].as_str().unwrap().len() == 64);
    assert!(String::from_utf8_lossy(&o.stdout).contains("bell_fidelity"));
}

#[test]
fn negative_coherence_time_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", "[channels]\nqubit_decoherence = \"-2 s\"\n");
    let o = eqc(&["gate-sim", "--config", s(&cfg)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("tau"));
}

#[test]
fn unknown_key_and_wrong_unit_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    for (i, text) in ["[solver]\nsteps = 3\n", "[trap]\nomega_a = \"300 m\"\n"].iter().enumerate() {
        let cfg = write(dir.path(), &format!("c{i}.toml"), text);
        let o = eqc(&["gate-sim", "--config", s(&cfg)]);
        assert_eq!(o.status.code(), Some(1), "{text}");
    }
}

#[test]
fn command_in_config_must_match() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", "command = \"budget\"\n");
    let o = eqc(&["trap-calc", "--config", s(&cfg)]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn sweep_csv_has_unit_header() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", QUICK);
    let out = dir.path().join("sweep.csv");
    let o = eqc(&["sweep", "--config", s(&cfg), "--walsh", "3", "--out", s(&out), "--threads", "2"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (header, rows) = records(&out);
    assert_eq!(header[..3], ["magnitude [quanta/s]", "walsh", "infidelity"]);
    assert_eq!(rows.len(), 9);
    let m: Vec<f64> = rows.iter().map(|r| r[0].parse().unwrap()).collect();
    assert!((m[0] - 14.0).abs() < 1e-9 && (m[8] - 1400.0).abs() < 1e-9);
    let inf: Vec<f64> = rows.iter().map(|r| r[2].parse().unwrap()).collect();
    assert!(inf.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn budget_rows_follow_channel_order_and_rerun_is_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", QUICK);
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    for out in [&a, &b] {
        let o = eqc(&["budget", "--config", s(&cfg), "--out", s(out)]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let (header, rows) = records(&a);
    assert_eq!(header[0], "channel");
    let labels: Vec<&str> = rows.iter().map(|r| r[0].as_str()).collect();
    assert_eq!(
        labels[..6],
        [
            "motional heating",
            "trap frequency fluctuation",
            "motional dephasing",
            "gradient inhomogeneity",
            "potential anharmonicity",
            "qubit decoherence",
        ]
    );
    assert_eq!(labels.len(), 7);
    assert!(labels[6].contains("combined"));
}

#[test]
fn trajectory_grid_records() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.toml",
        "[trajectory]\nhorizon = \"1 us\"\nenergy_max = \"1500 K\"\nenergy_points = 3\nphase_points = 4\n",
    );
    let out = dir.path().join("t.csv");
    let o = eqc(&["trajectory", "--config", s(&cfg), "--out", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (header, rows) = records(&out);
    assert_eq!(header[..5], ["energy [eV]", "temperature [K]", "phi [rad]", "storage_time [s]", "lost"]);
    assert_eq!(rows.len(), 12);
    assert_eq!(rows[0][4], "false");
}

#[test]
fn failed_truncation_gate_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.toml",
        "[schedule]\nnbar0 = 1.0\ncalibrate = false\n[solver]\nfock_cutoff = 4\ntail_tolerance = 1.0\nsteps_per_drive_period = 50\n",
    );
    let o = eqc(&["gate-sim", "--config", s(&cfg), "--walsh", "0"]);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("truncation"));
}

#[test]
fn trap_calc_flags_change_output() {
    let base = eqc(&["trap-calc", "--format", "json"]);
    let hot = eqc(&["trap-calc", "--format", "json", "--tank-temperature", "800 mK"]);
    assert!(base.status.success() && hot.status.success());
    let value = |o: &Output, q: &str| {
        let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
        v.as_array()
            .unwrap()
            .iter()
            .find(|r| r["quantity"] == q)
            .unwrap()["value"]
            .as_f64()
            .unwrap()
    };
    let (t0, t1) = (value(&base, "axial temperature"), value(&hot, "axial temperature"));
    assert!((t1 / t0 - 2.0).abs() < 1e-12);
    assert!((value(&base, "cooling time tau_y") - 8.72e-6).abs() < 0.01e-6);
    assert_ne!(
        serde_json::from_slice::<serde_json::Value>(&base.stdout).unwrap()[0]["config_hash"],
        serde_json::from_slice::<serde_json::Value>(&hot.stdout).unwrap()[0]["config_hash"]
    );
}
