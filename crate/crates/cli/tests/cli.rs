use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use qtbattery::protocol::{gamma_eff, optimal_coupling};
use qtbattery_cli::output::Table;
use qtbattery_cli::ExperimentConfig;

const SMALL: &str = r#"
[battery]
kind = "uniform"
n = 6

[charger]
detuning_h = 0.1
detuning_e = 0.01
drive = 0.005
gamma_hg = 0.1
gamma_eg = 0.01
coupling = "optimal:0"

[run]
engine = "both"
horizon = 400.0
points = 41
"#;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_qtbattery"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    let text = format!("{text}\n[output]\ndirectory = {:?}\nstem = {:?}\n", dir.to_str().unwrap(), name.trim_end_matches(".toml"));
    std::fs::write(&path, text).unwrap();
    path
}

fn table(path: &Path) -> Table {
    Table::parse(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn values(t: &Table, col: &str) -> Vec<f64> {
    t.column(col).unwrap().into_iter().map(|v| v.unwrap()).collect()
}

fn repo_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

#[test]
fn sample_configs_round_trip() {
    let mut seen = 0;
    for entry in std::fs::read_dir(repo_root().join("configs")).unwrap() {
        let path = entry.unwrap().path();
        let cfg = ExperimentConfig::load(&path).unwrap();
        let again = ExperimentConfig::from_toml_str(&cfg.to_toml_string()).unwrap();
        assert_eq!(cfg, again, "{}", path.display());
        cfg.resolve().unwrap();
        seen += 1;
    }
    assert!(seen >= 3);
}

#[test]
fn zero_horizon_gives_one_row() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "zero.toml", &SMALL.replace("horizon = 400.0", "horizon = 0.0").replace("engine = \"both\"", "engine = \"full\""));
    let out = run(&["run", cfg.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let t = table(&dir.path().join("zero_full.csv"));
    assert_eq!(t.rows.len(), 1);
    assert_eq!(values(&t, "t"), vec![0.0]);
    assert_eq!(values(&t, "p_0"), vec![1.0]);
    assert_eq!(values(&t, "qutrit_ground_population"), vec![1.0]);
    assert_eq!(values(&t, "ergotropy_over_EB"), vec![0.0]);
}

#[test]
fn both_engines_agree_and_reruns_are_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "small.toml", SMALL);
    let first = run(&["run", cfg.to_str().unwrap()]);
    assert!(first.status.success(), "{}", String::from_utf8_lossy(&first.stderr));
    let full_path = dir.path().join("small_full.csv");
    let eff_path = dir.path().join("small_effective.csv");
    let full_bytes = std::fs::read(&full_path).unwrap();
    let eff_bytes = std::fs::read(&eff_path).unwrap();

    let (full, eff) = (table(&full_path), table(&eff_path));
    let expected_columns = "t,gamma_eg_t,delta_E_over_EB,ergotropy_over_EB,p_0,p_1,p_2,p_3,p_4,p_5,p_6,most_populated_level,qutrit_ground_population";
    assert_eq!(full.columns.join(","), expected_columns);
    assert_eq!(full.rows.len(), 41);
    let worst = values(&full, "delta_E_over_EB").iter().zip(values(&eff, "delta_E_over_EB")).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(worst / 6.0 <= 0.05, "{worst}");
    assert!(eff.column("qutrit_ground_population").unwrap().iter().all(Option::is_none));
    let text = String::from_utf8(full_bytes.clone()).unwrap();
    assert!(text.starts_with("# format: qtbattery-csv/1 trajectory\n"));
    assert!(text.lines().any(|l| l.starts_with("# config_sha256: ") && l.len() == "# config_sha256: ".len() + 64));

    let second = run(&["run", cfg.to_str().unwrap()]);
    assert!(second.status.success());
    assert_eq!(std::fs::read(&full_path).unwrap(), full_bytes);
    assert_eq!(std::fs::read(&eff_path).unwrap(), eff_bytes);
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write_config(dir.path(), "bad.toml", &SMALL.replace("drive = 0.005", "drive = -0.005"));
    let out = run(&["run", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("charger.drive"));

    assert_eq!(run(&["run", "/nonexistent/config.toml"]).status.code(), Some(1));
    assert_eq!(run(&["reproduce", "fig11"]).status.code(), Some(1));

    // The output directory is a regular file, so writing fails at run time.
    let blocker = dir.path().join("blocker");
    std::fs::write(&blocker, "").unwrap();
    let cfg = write_config(dir.path(), "blocked.toml", &SMALL.replace("horizon = 400.0", "horizon = 0.0"));
    let out = run(&["run", cfg.to_str().unwrap(), "--out-dir", blocker.join("sub").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn validate_reports_every_check() {
    let out = run(&["validate", "--draws", "40"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("name,measured,bound,pass"));
    let rows: Vec<&str> = lines.collect();
    assert!(rows.len() >= 10);
    assert!(rows.iter().all(|r| r.ends_with(",pass")));
    assert!(rows.iter().any(|r| r.starts_with("resolvent_vs_closed_form,")));
}

#[test]
fn sweep_rows_follow_input_order_for_any_worker_count() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "sweep.toml", &SMALL.replace("engine = \"both\"", "engine = \"effective\""));
    let path = |w: &str| dir.path().join(format!("sweep_{w}.csv"));
    for w in ["1", "4"] {
        let out = run(&["sweep", cfg.to_str().unwrap(), "--axis", "beta", "--values", "inf,0.5,2,1", "--workers", w, "--out", path(w).to_str().unwrap()]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let one = std::fs::read_to_string(path("1")).unwrap();
    assert_eq!(one, std::fs::read_to_string(path("4")).unwrap());
    let t = Table::parse(&one).unwrap();
    assert_eq!(values(&t, "beta")[1..], [0.5, 2.0, 1.0]);
    assert!(values(&t, "beta")[0].is_infinite());

    let bad = run(&["sweep", cfg.to_str().unwrap(), "--axis", "delta", "--values", "1"]);
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn single_value_sweep_matches_run_summary() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "single.toml", &SMALL.replace("engine = \"both\"", "engine = \"effective\""));
    let out = run(&["run", cfg.to_str().unwrap()]);
    let summary = String::from_utf8(out.stdout).unwrap();
    let run_row = summary.lines().nth(1).unwrap().split_once(',').unwrap().1.to_string();

    let sweep_path = dir.path().join("s.csv");
    let out = run(&["sweep", cfg.to_str().unwrap(), "--axis", "n_opt", "--values", "0", "--out", sweep_path.to_str().unwrap()]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&sweep_path).unwrap();
    let row = text.lines().last().unwrap();
    assert_eq!(row.split_once(',').unwrap().1, run_row);
}

#[test]
fn quench_time_sweep_has_a_plateau() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(repo_root().join("configs/oscillator_quench.toml")).unwrap();
    let text = text.split("[output]").next().unwrap().to_string() + "[tolerances]\nrel = 1e-8\nabs = 1e-10\n";
    let cfg = write_config(dir.path(), "tau.toml", &text);
    let out_path = dir.path().join("tau.csv");
    let out = run(&["sweep", cfg.to_str().unwrap(), "--axis", "tau", "--values", "100,300,500,600,700,800,900,1000,1500,2000", "--out", out_path.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let t = table(&out_path);
    let tau = values(&t, "tau");
    let sat = values(&t, "saturation_gamma_eg_t");
    let plateau: Vec<f64> = tau.iter().zip(&sat).filter(|(t, _)| (500.0..=1000.0).contains(*t)).map(|(_, s)| *s).collect();
    let (lo, hi) = plateau.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &x| (a.min(x), b.max(x)));
    assert!((hi - lo) / lo <= 0.15, "{plateau:?}");
    assert!(sat[0] > hi && *sat.last().unwrap() > hi, "{sat:?}");
}

#[test]
fn spin_landscape_matches_the_rate_formula() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["reproduce", "fig4", "--out-dir", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let t = table(&dir.path().join("fig4_rate_landscape.csv"));
    let meta: toml::Table = toml::from_str(&std::fs::read_to_string(dir.path().join("fig4_metadata.toml")).unwrap()).unwrap();
    assert_eq!(meta["figure"].as_str(), Some("fig4"));

    let spin = qtbattery::BatteryModel::large_spin(50, 1.0).unwrap();
    let base = qtbattery::presets::reference_charger(1.0, 0.1, false).unwrap();
    let (g, level, rate) = (values(&t, "g"), values(&t, "level"), values(&t, "gamma_eff"));
    assert_eq!(g.len(), 200 * 50);
    let c = base.rates();
    for k in (0..g.len()).step_by(97) {
        let n = level[k] as usize;
        let a = spin.ladder_coeff(n);
        let dt = qtbattery::C64::new(base.detuning_h(), -(c.hg + c.he) / 2.0);
        let de = qtbattery::C64::new(base.detuning_e(), -c.eg / 2.0);
        let d = dt * de - g[k] * g[k] * a * a;
        let want = c.eg * base.drive().powi(2) * g[k].powi(2) * a * a / d.norm_sqr();
        assert!((rate[k] - want).abs() <= 1e-10 * want, "row {k}");
        assert!((rate[k] - gamma_eff(&spin, &base.with_coupling(g[k]).unwrap(), n).unwrap()).abs() <= 1e-10 * want);
    }
    let opt = table(&dir.path().join("fig4_optimal_coupling.csv"));
    let g_opt = values(&opt, "g_opt");
    let want = optimal_coupling(&spin, &base, 25).unwrap();
    assert!((g_opt[25] - want).abs() < 1e-10 * want);
}

#[test]
fn quench_figure_effective_only() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["reproduce", "fig8", "--effective-only", "--out-dir", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let t = table(&dir.path().join("fig8_saturation_time.csv"));
    assert_eq!(t.rows.len(), 21);
    assert!(t.column("gamma_eg_tau").unwrap()[0].is_none());
    for name in ["fig8_no_quench_effective.csv", "fig8_quench_500_1000_effective.csv", "fig8_metadata.toml"] {
        assert!(dir.path().join(name).exists(), "{name}");
    }
}

#[test]
fn plot_writes_svg() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "plot.toml", &SMALL.replace("engine = \"both\"", "engine = \"effective\""));
    assert!(run(&["run", cfg.to_str().unwrap()]).status.success());
    let svg = dir.path().join("e.svg");
    let csv = dir.path().join("plot_effective.csv");
    let out = run(&["plot", csv.to_str().unwrap(), "--out", svg.to_str().unwrap(), "--y", "delta_E_over_EB"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(std::fs::read_to_string(&svg).unwrap().contains("<svg"));
    let out = run(&["plot", csv.to_str().unwrap(), "--out", svg.to_str().unwrap(), "--y", "nope"]);
    assert_eq!(out.status.code(), Some(1));
}
