use std::path::Path;
use std::process::{Command, Output};

use piston_cli::table::Table;
use piston_core::oracle::read_dump;

fn piston(args: &[&str], env_out: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_piston"));
    cmd.args(args).env_remove("PISTON_OUT_DIR");
    if let Some(dir) = env_out {
        cmd.env("PISTON_OUT_DIR", dir);
    }
    cmd.output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

const FOCK: &str = "
[system]
g_xzpf = 1e-3
omega = 5
omega_m = 0.3
lambda = 1
mass = 1

[left_gas]
family = fock
n = 1

[right_gas]
family = fock
n = 1
theta = 0

[run]
name = fock
t_end = 6
n_steps = 25
engine = analytic
outputs = delta_h_m, g2_lr, dn_xm
";

const COHERENT: &str = "
[system]
g_xzpf = 3.3e3
omega = 20e12
omega_m = 350e3
lambda = 34e9
mass = 45e-12
kappa = 85e3
kappa_m = 1

[left_gas]
family = coherent
mean = 100

[right_gas]
family = coherent
mean = 100
theta = 0

[run]
name = coherent
t_end = 1e-4
n_steps = 11
";

fn read_table(path: &Path) -> Table {
    Table::parse(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn analytic_run_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "fock.cfg", FOCK);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert!(piston(&["run", &cfg, "--out", a.to_str().unwrap()], None)
        .status
        .success());
    let out = piston(
        &["--jobs", "1", "run", &cfg, "--out", b.to_str().unwrap()],
        None,
    );
    assert!(out.status.success());
    let x = std::fs::read(a.join("fock.csv")).unwrap();
    let y = std::fs::read(b.join("fock.csv")).unwrap();
    assert_eq!(x, y);
    assert!(a.join("fock.svg").exists());

    let t = read_table(&a.join("fock.csv"));
    let names: Vec<&str> = t.columns.iter().map(|(n, _)| n.as_str()).collect();
    assert_eq!(names, ["time", "delta_h_m", "g2_lr", "dn_xm"]);
    let time = t.column("time").unwrap();
    assert!(time.windows(2).all(|w| w[1] > w[0]));
    assert!(t
        .metadata
        .iter()
        .any(|(k, v)| k == "config_sha256" && v.len() == 64));
}

#[test]
fn both_engines_add_residual_columns() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "fock.cfg", FOCK);
    let out = piston(
        &["run", &cfg, "--engine", "both", "--dump"],
        Some(dir.path()),
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let t = read_table(&dir.path().join("fock.csv"));
    for obs in ["delta_h_m", "g2_lr", "dn_xm"] {
        let a = t.column(&format!("{obs}_analytic")).unwrap();
        let o = t.column(&format!("{obs}_oracle")).unwrap();
        let r = t.column(&format!("{obs}_residual")).unwrap();
        for k in 0..a.len() {
            assert_eq!(r[k], o[k] - a[k]);
        }
    }
    let mut f = std::fs::File::open(dir.path().join("fock.pstn")).unwrap();
    let (state, time) = read_dump(&mut f).unwrap();
    assert_eq!(time, 6.0);
    assert!(state.normalisation_defect() < 1e-6);
}

#[test]
fn config_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(
        dir.path(),
        "bad.cfg",
        &FOCK.replace("mass = 1", "mass = 1\nmas = 2"),
    );
    let out = piston(&["run", &bad, "--out", dir.path().to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("mas"));

    let invalid = write(
        dir.path(),
        "neg.cfg",
        &FOCK.replace("lambda = 1", "lambda = -1"),
    );
    let out = piston(
        &["run", &invalid, "--out", dir.path().to_str().unwrap()],
        None,
    );
    assert_eq!(out.status.code(), Some(1));

    let missing = dir.path().join("nope.cfg");
    let out = piston(&["run", missing.to_str().unwrap()], Some(dir.path()));
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn oversized_basis_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "big.cfg",
        &FOCK.replace(
            "engine = analytic",
            "engine = oracle\nphoton_cutoff = 40\nphonon_cutoff = 4",
        ),
    );
    let out = piston(&["run", &cfg], Some(dir.path()));
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("cutoff"));
}

#[test]
fn mean_n_sweep_reports_slopes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "coherent.cfg", COHERENT);
    let out = piston(
        &[
            "sweep",
            &cfg,
            "--axis",
            "mean_n",
            "--values",
            "1e2:1e6:9:log",
            "--summary",
            "long_time_transfer",
        ],
        Some(dir.path()),
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let t = read_table(&dir.path().join("coherent_sweep_mean_n.csv"));
    assert_eq!(t.column("mean_n").unwrap().len(), 9);
    let slope: f64 = t
        .footer
        .iter()
        .find(|(k, _)| k == "loglog_slope_long_time_transfer_theta_part")
        .unwrap()
        .1
        .parse()
        .unwrap();
    assert!((slope - 2.0).abs() < 0.02);
}

#[test]
fn theta_sweep_is_monotone() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "coherent.cfg", COHERENT);
    let out = piston(
        &[
            "sweep",
            &cfg,
            "--axis",
            "theta",
            "--values",
            "0:1.5707963267948966:9",
            "--summary",
            "plateau_transfer,g2_time_average",
        ],
        Some(dir.path()),
    );
    assert!(out.status.success());
    let t = read_table(&dir.path().join("coherent_sweep_theta.csv"));
    let e = t.column("plateau_transfer").unwrap();
    assert!(e.windows(2).all(|w| w[1] <= w[0]));
    let g = t.column("g2_time_average").unwrap();
    assert!(g.windows(2).all(|w| w[1] >= w[0]));
}

#[test]
fn non_applicable_axis_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "coherent.cfg", COHERENT);
    for (axis, summary) in [("n_th", "long_time_transfer"), ("g", "bunching")] {
        let out = piston(
            &[
                "sweep",
                &cfg,
                "--axis",
                axis,
                "--values",
                "0:1:3",
                "--summary",
                summary,
            ],
            Some(dir.path()),
        );
        assert_eq!(out.status.code(), Some(1), "{axis}/{summary}");
    }
    let out = piston(
        &[
            "sweep",
            &cfg,
            "--axis",
            "theta",
            "--values",
            "0:1",
            "--summary",
            "bunching",
        ],
        Some(dir.path()),
    );
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn cheap_presets_run_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["fig2", "fig4", "hom", "mu-eta"] {
        let out = piston(&["preset", name], Some(dir.path()));
        assert!(
            out.status.success(),
            "{name}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    for fam in ["fock", "coherent", "thermal"] {
        let t = read_table(&dir.path().join("fig2").join(format!("fig2_{fam}.csv")));
        for th in ["0", "pi_4", "pi_2"] {
            assert!(t.column(&format!("g2_lr_theta_{th}")).is_some());
        }
    }
    let hom = read_table(&dir.path().join("hom/hom.csv"));
    let g = hom.column("g2_lr_theta_0").unwrap();
    // t = π/2 is sample 50 of 101 on [0, π]
    assert!(g[50].abs() < 1e-9);
    let mu = read_table(&dir.path().join("mu-eta/mu_eta.csv"));
    let eta = mu.column("eta_quoted").unwrap();
    assert!(eta[0] != eta[1], "kappa branch should be visible");
    let fig4 = read_table(&dir.path().join("fig4/fig4.csv"));
    assert!(fig4
        .metadata
        .iter()
        .any(|(k, _)| k == "long_time_transfer_theta_0"));

    let out = piston(&["preset", "fig9"], Some(dir.path()));
    assert!(!out.status.success());
}
