use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use heatkernel::scenario::{run_scenario, ScenarioConfig};
use heatkernel_cli::config::{load_config, parse_config};
use heatkernel_cli::CliError;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn baseline_text() -> String {
    std::fs::read_to_string(configs().join("paper_baseline.toml")).unwrap()
}

fn heatkernel(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_heatkernel"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("HEATKERNEL_OUT")
        .output()
        .unwrap()
}

fn with_threads(n: usize, args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_heatkernel"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env("RAYON_NUM_THREADS", n.to_string())
        .output()
        .unwrap()
}

fn config_error(text: &str) -> String {
    match parse_config(text) {
        Err(CliError::Config(m)) => m,
        other => panic!("expected a config error, got {other:?}"),
    }
}

#[test]
fn shipped_baseline_matches_the_engine_baseline() {
    let cfg = load_config(&configs().join("paper_baseline.toml")).unwrap();
    assert_eq!(cfg.seed, Some(2013));
    let loaded = cfg.contagion.unwrap().scenario(2013, 1).unwrap();
    let reference = ScenarioConfig::paper_baseline();
    let (mut a, mut b) = (Vec::new(), Vec::new());
    run_scenario(&loaded).unwrap().write_csv(&mut a).unwrap();
    run_scenario(&reference).unwrap().write_csv(&mut b).unwrap();
    assert!(a == b, "shipped config and built-in baseline differ");
    assert_eq!(loaded.exposures.row(0), &[1.0, 0.0, 0.57, 0.49]);
}

#[test]
fn family_gamma_at_most_one_is_rejected_with_its_path() {
    let text = baseline_text().replacen("gamma = 2.0", "gamma = 1.0", 1);
    let msg = config_error(&text);
    assert!(msg.contains("contagion.countries[0].f0f1") && msg.contains("gamma"), "{msg}");
}

#[test]
fn probabilities_summing_below_one_are_rejected() {
    let text = baseline_text().replacen("probs = [0.7, 0.2, 0.05, 0.05]", "probs = [0.7, 0.2, 0.05, 0.04]", 1);
    let msg = config_error(&text);
    assert!(msg.contains("contagion.countries[0].brownian_prior"), "{msg}");
}

#[test]
fn unknown_keys_and_schema_versions_are_rejected() {
    let msg = config_error(&baseline_text().replacen("sigma = 0.5", "sigma = 0.5\nsigmaa = 0.5", 1));
    assert!(msg.contains("sigmaa"), "{msg}");
    let msg = config_error(&baseline_text().replacen("schema = 1", "schema = 2", 1));
    assert!(msg.contains("schema"), "{msg}");
}

#[test]
fn model_config_validates_instruments() {
    let text = std::fs::read_to_string(configs().join("quadratic.toml")).unwrap();
    assert!(parse_config(&text).is_ok());
    let msg = config_error(&text.replace("strike = 0.995", "strike = -1.0"));
    assert!(msg.contains("price.instruments[1]"), "{msg}");
}

#[test]
fn contagion_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("paper_baseline.toml");
    let cfg = cfg.to_str().unwrap();
    let (d1, d2) = (dir.path().join("a"), dir.path().join("b"));
    assert_eq!(heatkernel(&["--config", cfg, "--paths", "3", "contagion"], &d1).status.code(), Some(0));
    assert_eq!(heatkernel(&["--config", cfg, "--paths", "3", "contagion"], &d2).status.code(), Some(0));
    let a = std::fs::read(d1.join("contagion.csv")).unwrap();
    assert_eq!(a, std::fs::read(d2.join("contagion.csv")).unwrap());
    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with("path,t,country,P,y,s\n"));
    assert_eq!(text.lines().count(), 1 + 3 * 500 * 4);
}

#[test]
fn output_does_not_depend_on_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("quadratic.toml");
    let args = ["--config", cfg.to_str().unwrap(), "--paths", "16", "simulate"];
    let (d1, d4) = (dir.path().join("one"), dir.path().join("four"));
    assert_eq!(with_threads(1, &args, &d1).status.code(), Some(0));
    assert_eq!(with_threads(4, &args, &d4).status.code(), Some(0));
    assert_eq!(std::fs::read(d1.join("simulate.csv")).unwrap(), std::fs::read(d4.join("simulate.csv")).unwrap());
}

#[test]
fn plots_are_deterministic_with_one_series_per_country() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("paper_baseline.toml");
    assert_eq!(heatkernel(&["--config", cfg.to_str().unwrap(), "contagion"], dir.path()).status.code(), Some(0));
    let csv = dir.path().join("contagion.csv");
    let (p1, p2) = (dir.path().join("p1"), dir.path().join("p2"));
    assert_eq!(heatkernel(&["plot", csv.to_str().unwrap()], &p1).status.code(), Some(0));
    assert_eq!(heatkernel(&["plot", csv.to_str().unwrap()], &p2).status.code(), Some(0));
    for name in ["yield.svg", "spread.svg", "price.svg"] {
        let svg = std::fs::read_to_string(p1.join(name)).unwrap();
        assert_eq!(svg, std::fs::read_to_string(p2.join(name)).unwrap());
        assert_eq!(svg.matches("<polyline").count(), 4);
        for country in ["GER", "FRA", "ESP", "ITA"] {
            assert!(svg.contains(&format!(">{country}</text>")));
        }
    }
}

#[test]
fn empty_csv_is_an_error_and_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("empty.csv");
    std::fs::write(&csv, "path,t,country,P,y,s\n").unwrap();
    let out = dir.path().join("plots");
    let run = heatkernel(&["plot", csv.to_str().unwrap()], &out);
    assert_eq!(run.status.code(), Some(2));
    assert!(!out.join("yield.svg").exists());
    std::fs::write(&csv, "a,b\n1,2\n").unwrap();
    assert_eq!(heatkernel(&["plot", csv.to_str().unwrap()], &out).status.code(), Some(2));
}

#[test]
fn stochastic_commands_require_a_seed() {
    let dir = tempfile::tempdir().unwrap();
    let run = heatkernel(&["contagion"], dir.path());
    assert_eq!(run.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&run.stderr).contains("seed"));
    assert_eq!(heatkernel(&["--seed", "1", "--paths", "0", "contagion"], dir.path()).status.code(), Some(2));
}

#[test]
fn verify_passes_and_writes_a_report() {
    let dir = tempfile::tempdir().unwrap();
    let run = heatkernel(&["--seed", "5", "verify", "--criteria", "1,2,7"], dir.path());
    assert_eq!(run.status.code(), Some(0), "{}", String::from_utf8_lossy(&run.stdout));
    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["seed"], 5);
    assert!(report["checks"].as_array().unwrap().iter().all(|c| c["pass"] == true));
    assert_eq!(heatkernel(&["--seed", "5", "--tol", "bogus=1", "verify", "--criteria", "2"], dir.path()).status.code(), Some(2));
}

#[test]
fn verify_fails_under_the_broken_sign_control() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("broken.toml");
    std::fs::write(&cfg, "schema = 1\nseed = 3\n\n[verify]\nbreak_b_sign = true\n").unwrap();
    let run = heatkernel(&["--config", cfg.to_str().unwrap(), "--paths", "20000", "verify", "--criteria", "3"], dir.path());
    let stdout = String::from_utf8_lossy(&run.stdout);
    assert_eq!(run.status.code(), Some(1), "{stdout}");
    assert!(stdout.contains("FAIL [3] deflated bond martingale (b sign flipped)"), "{stdout}");
}
