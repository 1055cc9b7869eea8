use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_guenterlab"))
}

struct Run {
    dir: TempDir,
    out: Output,
}

impl Run {
    fn out_dir(&self) -> PathBuf {
        self.dir.path().join("out")
    }

    fn code(&self) -> i32 {
        self.out.status.code().unwrap()
    }

    fn stdout(&self) -> String {
        String::from_utf8_lossy(&self.out.stdout).into_owned()
    }

    fn stderr(&self) -> String {
        String::from_utf8_lossy(&self.out.stderr).into_owned()
    }

    fn report(&self) -> Value {
        serde_json::from_str(&std::fs::read_to_string(self.out_dir().join("report.json")).unwrap()).unwrap()
    }
}

fn run_config(config: &str, args: &[&str]) -> Run {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("experiment.toml");
    std::fs::write(&path, config).unwrap();
    let out_dir = dir.path().join("out");
    let out = bin()
        .args(args)
        .arg("--config")
        .arg(&path)
        .arg("--out")
        .arg(&out_dir)
        .env("GUENTERLAB_THREADS", "2")
        .output()
        .unwrap();
    Run { dir, out }
}

const INTERVAL: &str = "ids = [\"P_domain\"]\nshape = { name = \"interval\", nodes = 33 }\n";

#[test]
fn interval_levels_converge_to_inverse_pi() {
    let r = run_config(INTERVAL, &["run", "--levels", "3"]);
    assert_eq!(r.code(), 0, "{}", r.stderr());
    let rep = r.report();
    let levels = rep["experiments"][0]["levels"].as_array().unwrap();
    assert_eq!(levels.len(), 3);
    let target = 1.0 / std::f64::consts::PI;
    let errs: Vec<f64> = levels.iter().map(|l| (l["C"].as_f64().unwrap() - target).abs()).collect();
    assert!(errs[0] > errs[1] && errs[1] > errs[2], "{errs:?}");
    assert!(errs[2] < 1e-3 * target);
    let table = std::fs::read_to_string(r.out_dir().join("convergence.txt")).unwrap();
    assert_eq!(table.lines().filter(|l| l.trim_start().starts_with(char::is_numeric)).count(), 3);
    let csv = std::fs::read_to_string(r.out_dir().join("constants.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
    assert!(r.out_dir().join("witnesses/P_domain.csv").exists());
}

#[test]
fn sphere_korn_records_three_dimensional_kernel() {
    let r =
        run_config("ids = [\"KornI_surf\"]\nshape = { name = \"sphere\", subdivisions = 1 }\nlevels = 1\n", &["run"]);
    assert_eq!(r.code(), 0, "{}", r.stderr());
    let e = &r.report()["experiments"][0];
    assert_eq!(e["kernel"][0]["dim"], 3);
    assert!(e["levels"][0]["C"].as_f64().unwrap().is_finite());
    assert_eq!(e["verification"]["pass"], true);
    let kernel_csv = std::fs::read_to_string(r.out_dir().join("kernels/KornI_surf.csv")).unwrap();
    assert_eq!(kernel_csv.lines().next().unwrap().split(',').count(), 1 + 3 * 3);
}

#[test]
fn empty_id_list_is_a_config_error() {
    let r = run_config("seed = 1\nids = []\n", &["estimate"]);
    assert_eq!(r.code(), 2);
    let err = r.stderr();
    assert!(err.contains(":2:") && err.contains("`ids`"), "{err}");
}

#[test]
fn unknown_keys_and_ids_are_hard_errors() {
    let r = run_config("ids = [\"P_domain\"]\nsede = 3\n", &["estimate"]);
    assert_eq!(r.code(), 2);
    assert!(r.stderr().contains(":2:") && r.stderr().contains("sede"), "{}", r.stderr());
    let r = run_config("ids = [\"P_domian\"]\n", &["estimate"]);
    assert_eq!(r.code(), 2);
    assert!(r.stderr().contains("P_domian"), "{}", r.stderr());
}

fn without_timestamp(path: &Path) -> String {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.contains("\"timestamp\""))
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn identical_config_and_seed_give_identical_reports() {
    let config = "ids = [\"F_domain\", \"Sup_P0\"]\nshape = { name = \"box\", nodes = 9 }\nlevels = 2\nsamples = 30\n";
    let a = run_config(config, &["run", "--seed", "7"]);
    let b = run_config(config, &["run", "--seed", "7"]);
    assert_eq!(a.code(), 0, "{}", a.stderr());
    // the out path is echoed in the header; align it before comparing
    let norm =
        |r: &Run| without_timestamp(&r.out_dir().join("report.json")).replace(&r.dir.path().display().to_string(), "");
    assert_eq!(norm(&a), norm(&b));
    let c = run_config(config, &["run", "--seed", "8"]);
    assert_ne!(norm(&a), norm(&c));
    for f in ["constants.csv", "convergence.txt", "witnesses/F_domain.csv"] {
        assert_eq!(std::fs::read(a.out_dir().join(f)).unwrap(), std::fs::read(b.out_dir().join(f)).unwrap(), "{f}");
    }
}

#[test]
fn too_small_constant_fails_with_named_check() {
    let r = run_config(&format!("{INTERVAL}constants = {{ P_domain = 0.1 }}\nlevels = 1\n"), &["verify"]);
    assert_eq!(r.code(), 1);
    assert!(r.stderr().starts_with("FAIL P_domain/verify"), "{}", r.stderr());
    let rep = r.report();
    assert_eq!(rep["pass"], false);
    assert_eq!(rep["experiments"][0]["constant_source"], "config");
    let witness = std::fs::read_to_string(r.out_dir().join("witnesses/P_domain.csv")).unwrap();
    assert!(witness.starts_with("node,x1,value"));
}

#[test]
fn report_subcommand_rerenders_stored_json() {
    let r = run_config(INTERVAL, &["run", "--levels", "2"]);
    assert_eq!(r.code(), 0);
    let again = r.dir.path().join("again");
    let out = bin().arg("report").arg(r.out_dir().join("report.json")).arg("--out").arg(&again).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&out.stdout), r.stdout());
    for f in ["constants.csv", "convergence.txt"] {
        assert_eq!(std::fs::read(again.join(f)).unwrap(), std::fs::read(r.out_dir().join(f)).unwrap());
    }
}

#[test]
fn non_quadratic_exponent_reports_a_lower_bound() {
    let r = run_config(&format!("{INTERVAL}p = 3\nlevels = 1\n"), &["run"]);
    assert_eq!(r.code(), 0, "{}", r.stderr());
    let e = &r.report()["experiments"][0];
    assert_eq!(e["levels"][0]["kind"], "lower_bound");
    assert!(e["verification"].is_null());
    let r = run_config(&format!("{INTERVAL}p = 3\nlevels = 1\nconstants = {{ P_domain = 10.0 }}\n"), &["run"]);
    assert_eq!(r.code(), 0, "{}", r.stderr());
    assert_eq!(r.report()["experiments"][0]["verification"]["p"], 3.0);
}

#[test]
fn user_regions_replace_defaults() {
    let config = "ids = [\"F_domain\"]\nshape = { name = \"box\", nodes = 9 }\nlevels = 1\n\
                  [[regions]]\nname = \"lower_left\"\npredicate = \"x1 == 0 and x2 <= 0.5\"\n";
    let r = run_config(config, &["estimate"]);
    assert_eq!(r.code(), 0, "{}", r.stderr());
    let region = &r.report()["experiments"][0]["regions"][0];
    assert_eq!(region["name"], "lower_left");
    assert_eq!(region["nodes"], 5);
    let r = run_config(&config.replace("x2 <= 0.5", "x3 <= 0.5"), &["estimate"]);
    assert_eq!(r.code(), 2);
    assert!(r.stderr().contains("x3"), "{}", r.stderr());
}

#[test]
fn kernel_subcommand_needs_deformation_ids() {
    let r = run_config(INTERVAL, &["kernel"]);
    assert_eq!(r.code(), 2);
    assert!(r.stderr().contains("P_domain"));
    let r = run_config("ids = [\"KornII\"]\nshape = { name = \"box\", nodes = 9 }\nlevels = 1\n", &["kernel"]);
    assert_eq!(r.code(), 0, "{}", r.stderr());
    let k = &r.report()["experiments"][0]["kernel"][0];
    assert_eq!((k["dim"].as_u64(), k["continuation"]["rank"].as_u64()), (Some(3), Some(3)));
}

#[test]
fn thread_cap_must_be_positive() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.toml");
    std::fs::write(&path, INTERVAL).unwrap();
    let out = bin()
        .arg("estimate")
        .arg("--config")
        .arg(&path)
        .arg("--out")
        .arg(dir.path())
        .env("GUENTERLAB_THREADS", "0")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("GUENTERLAB_THREADS"));
}

#[test]
fn list_names_every_registered_id() {
    let out = bin().arg("list").output().unwrap();
    let text = String::from_utf8_lossy(&out.stdout);
    for id in ["P_domain", "Sup_P0", "Wm_P0_2", "CylFlatK_P0", "KornII_surf"] {
        assert!(text.contains(id), "{id}");
    }
    for shape in ["interval", "box", "circle", "sphere", "torus"] {
        assert!(text.contains(shape));
    }
}

#[test]
fn quiet_suppresses_tables() {
    let r = run_config(INTERVAL, &["estimate", "--quiet", "--levels", "1"]);
    assert_eq!(r.code(), 0);
    assert!(r.stdout().is_empty());
}

#[test]
fn shipped_configs_run() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    let mut n = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let config = std::fs::read_to_string(entry.unwrap().path()).unwrap();
        let r = run_config(&config, &["run", "--levels", "1"]);
        assert_eq!(r.code(), 0, "{}", r.stderr());
        n += 1;
    }
    assert_eq!(n, 3);
}
