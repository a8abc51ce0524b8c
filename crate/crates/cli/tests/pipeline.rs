use sar_cli::config::{ScenarioConfig, Stage};
use sar_cli::manifest::{RunManifest, StageStatus};
use sar_cli::pipeline::{self, QualityFile, Workspace};
use sar_cli::{main_with, with_threads};
use std::path::{Path, PathBuf};

fn crate_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn golden_config() -> PathBuf {
    crate_dir().join("scenarios/stripmap-cr-grid.toml")
}

/// Set `SARPIPE_BLESS=1` to rewrite committed references.
fn bless() -> bool {
    std::env::var_os("SARPIPE_BLESS").is_some()
}

fn run_golden(dir: &Path, threads: usize) -> RunManifest {
    let ws = Workspace::open(&golden_config(), None, Some(dir.to_path_buf())).unwrap();
    with_threads(Some(threads), || ws.run_all()).unwrap().unwrap()
}

const SMALL: &str = r#"
name = "small"
seed = 3
output_dir = "out"

[geometry]
incidence = 30.0

[chirp]
bandwidth = 100e6

[plan]
duration = 0.6

[[targets.points]]
azimuth = 0.0
range = 0.0
rcs = 1000.0

[[targets.points]]
azimuth = 0.05
range = 150.0
rcs = 1000.0

[noise]
model = "off"

[product]
quantization = "peak"

[quality]
plots = false
"#;

fn write_scenario(dir: &Path, text: &str) -> PathBuf {
    let p = dir.join("scenario.toml");
    std::fs::write(&p, text).unwrap();
    p
}

fn args(cmd: &str, cfg: &Path) -> Vec<String> {
    vec!["sarpipe".into(), cmd.into(), "--config".into(), cfg.display().to_string()]
}

#[test]
fn golden_scenario_reproduces_committed_manifest() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let ma = run_golden(a.path(), 1);
    let mb = run_golden(b.path(), 2);
    assert_eq!(ma, mb, "thread count changed the artifacts");
    let bytes = |d: &Path| std::fs::read(d.join("manifest.json")).unwrap();
    assert_eq!(bytes(a.path()), bytes(b.path()));
    for art in &ma.artifacts {
        assert_eq!(
            std::fs::read(a.path().join(&art.path)).unwrap(),
            std::fs::read(b.path().join(&art.path)).unwrap(),
            "{}",
            art.path
        );
    }

    let stages: Vec<_> = ma.stages.iter().map(|s| (s.stage.as_str(), s.status)).collect();
    let names = ["simulate", "focus", "slc", "grd", "analyze", "calibrate", "nesz", "ambiguity", "report"];
    assert_eq!(stages, names.map(|n| (n, StageStatus::Ok)));
    for f in ["slc.cf32", "grd.i16", "quality.json", "report.md", "plots/irf_004.png"] {
        assert!(ma.artifacts.iter().any(|x| x.path == f), "{f}");
    }
    let q: QualityFile = pipeline::read_json(&a.path().join(pipeline::QUALITY)).unwrap();
    assert_eq!(q.statistics.unwrap().count, 9);

    let reference = crate_dir().join("scenarios/stripmap-cr-grid.manifest.json");
    if bless() {
        std::fs::copy(a.path().join("manifest.json"), &reference).unwrap();
    }
    let committed: RunManifest = serde_json::from_str(&std::fs::read_to_string(&reference).unwrap()).unwrap();
    assert_eq!(ma, committed);
}

#[test]
fn prf_below_two_kilohertz_is_rejected_at_load() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_scenario(dir.path(), &SMALL.replace("duration = 0.6", "duration = 0.6\nprf = 1000.0"));
    assert_eq!(main_with(args("run", &cfg)), 2);
    assert!(!dir.path().join("out").exists());
}

#[test]
fn load_time_bounds_and_unknown_keys() {
    let base = ScenarioConfig::from_toml(SMALL).unwrap();
    let check = |f: &dyn Fn(&mut ScenarioConfig)| {
        let mut c = base.clone();
        f(&mut c);
        c.resolve(Path::new(".")).unwrap_err().exit_code()
    };
    assert_eq!(check(&|c| c.chirp.bandwidth = 400e6), 2);
    assert_eq!(check(&|c| c.geometry.incidence = 40.0), 2);
    assert_eq!(check(&|c| c.focus.processed_doppler_bandwidth = 4200.0), 2);
    assert_eq!(check(&|c| c.quality.oversample = 8), 2);
    assert!(ScenarioConfig::from_toml(&format!("{SMALL}\nextra = 1\n")).is_err());
}

#[test]
fn standalone_stages_match_a_full_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_scenario(dir.path(), SMALL);
    assert_eq!(main_with(args("run", &cfg)), 0);
    let full = RunManifest::load(&dir.path().join("out")).unwrap().unwrap();

    let other = tempfile::tempdir().unwrap();
    for cmd in ["simulate", "focus", "slc", "grd", "analyze", "ambiguity", "report"] {
        let mut a = args(cmd, &cfg);
        a.extend(["--output-dir".into(), other.path().display().to_string()]);
        assert_eq!(main_with(a), 0, "{cmd}");
    }
    let step = RunManifest::load(other.path()).unwrap().unwrap();
    assert_eq!(full.artifacts, step.artifacts);
    assert!(step.verify(other.path()).is_empty());
    // two targets: no calibration stage by default
    assert!(full.stages.iter().all(|s| s.stage != "calibrate"));
}

#[test]
fn seed_override_changes_noise_only() {
    let dir = tempfile::tempdir().unwrap();
    let text = SMALL.replace("model = \"off\"", "model = \"thermal\"");
    let cfg = write_scenario(dir.path(), &text);
    let raw_hash = |seed: u64| {
        let out = dir.path().join(format!("s{seed}"));
        let ws = Workspace::open(&cfg, Some(seed), Some(out.clone())).unwrap();
        ws.run_single(Stage::Simulate).unwrap();
        let m = RunManifest::load(&out).unwrap().unwrap();
        assert_eq!(m.seed, seed);
        m.artifacts.into_iter().find(|a| a.path == pipeline::RAW).unwrap().sha256
    };
    assert_eq!(raw_hash(5), raw_hash(5));
    assert_ne!(raw_hash(5), raw_hash(6));
}

#[test]
fn failures_carry_stage_and_exit_code() {
    // focusing without a raw file is an I/O failure
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_scenario(dir.path(), SMALL);
    assert_eq!(main_with(args("focus", &cfg)), 7);
    let m = RunManifest::load(&dir.path().join("out")).unwrap().unwrap();
    assert_eq!(m.stages[0].stage, "focus");
    assert_eq!(m.stages[0].code.as_deref(), Some("IO"));

    // a target far outside the beam fails the simulation; later stages skip
    let far = SMALL.replace("range = 150.0", "range = 60000.0");
    let d2 = tempfile::tempdir().unwrap();
    let cfg = write_scenario(d2.path(), &far);
    assert_eq!(main_with(args("run", &cfg)), 3);
    let m = RunManifest::load(&d2.path().join("out")).unwrap().unwrap();
    assert_eq!(m.stages[0].status, StageStatus::Failed);
    assert_eq!(m.stages[0].exit_code, Some(3));
    assert!(m.stages[1..].iter().all(|s| s.status == StageStatus::Skipped));

    // range-Doppler cannot focus Spotlight
    let spot = SMALL.replace("[chirp]", "[focus]\nalgorithm = \"range_doppler\"\n[chirp]")
        .replace("incidence = 30.0", "incidence = 30.0\nmode = \"spotlight\"");
    let d3 = tempfile::tempdir().unwrap();
    assert_eq!(main_with(args("run", &write_scenario(d3.path(), &spot))), 2);
}

#[test]
fn verify_detects_tampering() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_scenario(dir.path(), SMALL);
    assert_eq!(main_with(args("ambiguity", &cfg)), 0);
    assert_eq!(main_with(args("verify", &cfg)), 0);
    std::fs::write(dir.path().join("out").join(pipeline::AMBIGUITY), "{}").unwrap();
    assert_eq!(main_with(args("verify", &cfg)), 7);
}

#[test]
fn published_schema_is_current() {
    let path = crate_dir().join("../../docs/config.schema.json");
    let schema = ScenarioConfig::schema();
    if bless() {
        std::fs::write(&path, &schema).unwrap();
    }
    assert_eq!(std::fs::read_to_string(&path).unwrap(), schema);
    assert_eq!(main_with(["sarpipe", "schema"]), 0);
    // usage errors exit as configuration errors
    assert_eq!(main_with(["sarpipe", "frobnicate"]), 2);
}
