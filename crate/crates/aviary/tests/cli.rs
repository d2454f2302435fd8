use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use aviary::manifest::Manifest;

const SHORT_SCENE: &str = r#"{
  "scene": { "duration_s": 3, "seed": 5 },
  "species": [
    { "name": "Wren", "freq_range": [2000, 4000], "duration_range": [0.1, 0.3],
      "trill_rate_range": [3, 6], "bird_count": 2 },
    { "name": "Owl", "freq_range": [300, 600], "duration_range": [0.4, 0.6],
      "trill_rate_range": [1, 2], "bird_count": 1 }
  ]
}"#;

fn aviary(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aviary"))
        .args(args)
        .env_remove("AVIARY_OUTPUT_DIR")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

fn manifest(dir: &Path) -> Manifest {
    serde_json::from_slice(&fs::read(dir.join("manifest.json")).unwrap()).unwrap()
}

#[test]
fn validate_reports_the_bundled_scene() {
    let cfg = concat!(env!("CARGO_MANIFEST_DIR"), "/assets/table1.json");
    let out = aviary(&["validate", "-c", cfg]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(String::from_utf8_lossy(&out.stdout).contains("5 species, 7 birds, 20 s at 44100 Hz"));
}

#[test]
fn config_errors_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let broken = write_config(dir.path(), "broken.json", "{\n  \"scene\": {,\n}");
    let out = aviary(&["validate", "-c", &broken]);
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("line 2"), "{}", stderr(&out));

    let inverted = write_config(dir.path(), "inv.json", &SHORT_SCENE.replace("[300, 600]", "[600, 300]"));
    let out = aviary(&["validate", "-c", &inverted]);
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("Owl") && stderr(&out).contains("freq_range"), "{}", stderr(&out));

    let cfg = write_config(dir.path(), "ok.json", SHORT_SCENE);
    let out = aviary(&["analyze", &cfg, "--window", "1000"]);
    assert_eq!(code(&out), 3, "{}", stderr(&out));
}

#[test]
fn io_errors_exit_4() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.json");
    let out = aviary(&["render", "-c", missing.to_str().unwrap(), "-o", dir.path().to_str().unwrap()]);
    assert_eq!(code(&out), 4);
    assert!(stderr(&out).contains("nope.json"));

    let cfg = write_config(dir.path(), "ok.json", SHORT_SCENE);
    let blocker = dir.path().join("file");
    fs::write(&blocker, b"x").unwrap();
    let out = aviary(&["render", "-c", &cfg, "-o", blocker.join("sub").to_str().unwrap()]);
    assert_eq!(code(&out), 4, "{}", stderr(&out));

    let out = aviary(&["plot", dir.path().to_str().unwrap()]);
    assert_eq!(code(&out), 4);
    assert!(stderr(&out).contains("manifest.json"));
}

#[test]
fn format_errors_exit_6_and_usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let not_wav = write_config(dir.path(), "x.wav", "RIFF but not really");
    let out = aviary(&["analyze", &not_wav]);
    assert_eq!(code(&out), 6, "{}", stderr(&out));
    assert!(stderr(&out).contains("x.wav"));

    assert_eq!(code(&aviary(&["frobnicate"])), 2);
    assert_eq!(code(&aviary(&["render", "-c", "x.json", "-o", "y", "--pan-mode", "wide"])), 2);
}

#[test]
fn manifest_alone_reproduces_the_render() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "scene.json", &SHORT_SCENE.replace("\"seed\": 5", "\"sample_rate\": 22050"));
    let a = dir.path().join("a");
    let out = aviary(&["render", "-c", &cfg, "-o", a.to_str().unwrap(), "--solo-tracks"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let first = manifest(&a);
    assert!(first.seed_generated);
    assert_eq!(first.config.scene.seed, Some(first.seed));
    assert_eq!(first.config.species[0].pause_range, Some([0.5, 2.0]));
    for bird in 0..3 {
        assert!(first.outputs.contains_key(&format!("bird_{bird}.wav")));
    }

    let b = dir.path().join("b");
    let from_manifest = a.join("manifest.json");
    let out = aviary(&["render", "-c", from_manifest.to_str().unwrap(), "-o", b.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let second = manifest(&b);
    assert_eq!(second.outputs, first.outputs);
    assert_eq!(fs::read(a.join("soundscape.wav")).unwrap(), fs::read(b.join("soundscape.wav")).unwrap());
}

#[test]
fn flags_override_the_config_and_are_recorded() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "scene.json", SHORT_SCENE);
    let base = dir.path().join("base");
    let other = dir.path().join("other");
    assert_eq!(code(&aviary(&["render", "-c", &cfg, "-o", base.to_str().unwrap()])), 0);
    let out = aviary(&["render", "-c", &cfg, "-o", other.to_str().unwrap(), "--seed", "6", "--pan-mode", "remapped"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let m = manifest(&other);
    assert_eq!(m.seed, 6);
    assert_eq!(m.config.scene.pan_mode.as_deref(), Some("remapped"));
    assert_ne!(m.outputs["soundscape.wav"], manifest(&base).outputs["soundscape.wav"]);
}

#[test]
fn output_dir_comes_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "scene.json", SHORT_SCENE);
    let target = dir.path().join("from-env");
    let out = Command::new(env!("CARGO_BIN_EXE_aviary"))
        .args(["render", "-c", &cfg])
        .env("AVIARY_OUTPUT_DIR", &target)
        .output()
        .unwrap();
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(target.join("soundscape.wav").is_file());
}

#[test]
fn render_analyze_plot_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "scene.json", SHORT_SCENE);
    let run = dir.path().join("run");
    let run_s = run.to_str().unwrap();
    assert_eq!(code(&aviary(&["render", "-c", &cfg, "-o", run_s])), 0);
    let out = aviary(&["analyze", run_s, "--window", "1024", "--hop", "256", "--csv"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    for f in ["spectrogram_L.bin", "spectrogram_R.bin", "spectrogram_diff.bin", "spectrogram_L.csv", "track_L.csv", "track_R.csv", "channel_diff.bin", "analysis.json"] {
        assert!(run.join(f).is_file(), "{f}");
    }
    let out = aviary(&["plot", run_s, "--db-range", "-120,60"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let plots: serde_json::Value = serde_json::from_slice(&fs::read(run.join("plots.json")).unwrap()).unwrap();
    let files: Vec<&str> = plots.as_array().unwrap().iter().map(|p| p["file"].as_str().unwrap()).collect();
    for f in ["trajectories.svg", "timeline.svg", "waveform_compare.svg", "spectrogram_L.ppm", "spectrogram_R.ppm", "spectrogram_diff.ppm", "bird_2_spectrogram.ppm"] {
        assert!(files.contains(&f), "{f} missing from {files:?}");
    }
    let left = plots.as_array().unwrap().iter().find(|p| p["file"] == "spectrogram_L.ppm").unwrap();
    assert_eq!(left["range_db"], serde_json::json!([-120.0, 60.0]));
}
