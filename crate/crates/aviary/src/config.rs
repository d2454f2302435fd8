//! Scene configuration files.
//!
//! A config is a JSON document with `scene`, `species`, and optional `trajectory`
//! and `outputs` sections. Ranges are two-element arrays `[min, max]`. Unknown keys
//! are rejected. [`parse_config`] fills every default in, and [`ResolvedConfig::to_file`]
//! writes them back out so a run manifest records exactly what was used.

use std::fmt;

use aviary_core::schedule::{Bounds, TrajectoryDefaults};
use aviary_core::{ChirpParams, PanMode, ParamRange, SceneConfig, SpeciesProfile};
use serde::{Deserialize, Serialize};

pub const DEFAULT_SAMPLE_RATE: u32 = 44100;

/// The bundled reference scene: five species, seven birds, 20 s at 44.1 kHz.
pub const TABLE1_JSON: &str = include_str!("../assets/table1.json");

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("schema error at line {line}, column {column}: {message}")]
    Schema {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid config: {0}")]
    Invalid(String),
}

impl From<serde_json::Error> for ConfigError {
    fn from(e: serde_json::Error) -> Self {
        use serde_json::error::Category;
        let (line, column) = (e.line(), e.column());
        // serde_json appends " at line L column C"; drop it, we report it ourselves.
        let message = e.to_string();
        let message = match message.rfind(" at line ") {
            Some(i) => message[..i].to_string(),
            None => message,
        };
        match e.classify() {
            Category::Data => ConfigError::Schema {
                line,
                column,
                message,
            },
            _ => ConfigError::Syntax {
                line,
                column,
                message,
            },
        }
    }
}

pub type Range2 = [f64; 2];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub scene: SceneSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trajectory: Option<TrajectorySection>,
    pub species: Vec<SpeciesSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outputs: Option<OutputsSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneSection {
    pub duration_s: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_rate: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pan_mode: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounds: Option<BoundsSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsSection {
    pub x: Range2,
    pub y: Range2,
    pub z: Range2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrajectorySection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<Range2>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate: Option<Range2>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub randomize_phase: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpeciesSection {
    pub name: String,
    pub freq_range: Range2,
    pub duration_range: Range2,
    pub trill_rate_range: Range2,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pause_range: Option<Range2>,
    pub bird_count: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trill_amp: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub env_exponent: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputsSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solo_tracks: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub event_log: Option<Vec<EventLogFormat>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plots: Option<Vec<PlotKind>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EventLogFormat {
    Jsonl,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlotKind {
    Trajectory3d,
    WaveformCompare,
    Timeline,
    Spectrogram,
    TimelineSpectrogram,
}

impl PlotKind {
    pub const ALL: [PlotKind; 5] = [
        PlotKind::Trajectory3d,
        PlotKind::WaveformCompare,
        PlotKind::Timeline,
        PlotKind::Spectrogram,
        PlotKind::TimelineSpectrogram,
    ];
}

impl fmt::Display for PlotKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).expect("unit enum serializes");
        f.write_str(s.as_str().unwrap_or_default())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outputs {
    pub solo_tracks: bool,
    pub event_log: Vec<EventLogFormat>,
    pub plots: Vec<PlotKind>,
}

impl Default for Outputs {
    fn default() -> Self {
        Self {
            solo_tracks: false,
            event_log: vec![EventLogFormat::Jsonl, EventLogFormat::Csv],
            plots: PlotKind::ALL.to_vec(),
        }
    }
}

/// A validated config with every default filled in.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedConfig {
    pub scene: SceneConfig,
    pub seed: u64,
    /// True when the seed did not come from the file.
    pub seed_generated: bool,
    pub outputs: Outputs,
}

fn range(r: Range2) -> ParamRange {
    ParamRange::new(r[0], r[1])
}

fn pair(r: ParamRange) -> Range2 {
    [r.min, r.max]
}

/// Seed drawn from process entropy, used when the config has none.
pub fn entropy_seed() -> u64 {
    use std::hash::{BuildHasher, Hasher};
    let mut h = std::collections::hash_map::RandomState::new().build_hasher();
    h.write_u128(
        std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_nanos())
            .unwrap_or_default(),
    );
    h.finish()
}

impl ConfigFile {
    pub fn resolve(&self, entropy: impl FnOnce() -> u64) -> Result<ResolvedConfig, ConfigError> {
        let scene = &self.scene;
        let pan_mode = match &scene.pan_mode {
            Some(s) => s
                .parse::<PanMode>()
                .map_err(|_| ConfigError::Invalid(format!(
                    "scene.pan_mode: {s:?} is not one of paper-literal, remapped"
                )))?,
            None => PanMode::default(),
        };
        let bounds = match &scene.bounds {
            Some(b) => Bounds {
                x: range(b.x),
                y: range(b.y),
                z: range(b.z),
            },
            None => Bounds::default(),
        };
        let defaults = TrajectoryDefaults::default();
        let trajectory = match &self.trajectory {
            Some(t) => TrajectoryDefaults {
                amplitude: t.amplitude.map(range).unwrap_or(defaults.amplitude),
                rate: t.rate.map(range).unwrap_or(defaults.rate),
                randomize_phase: t.randomize_phase.unwrap_or(defaults.randomize_phase),
            },
            None => defaults,
        };
        let species = self
            .species
            .iter()
            .map(|s| SpeciesProfile {
                name: s.name.clone(),
                freq_range: range(s.freq_range),
                duration_range: range(s.duration_range),
                trill_rate_range: range(s.trill_rate_range),
                pause_range: s.pause_range.map(range).unwrap_or(SpeciesProfile::DEFAULT_PAUSE),
                bird_count: s.bird_count,
                trill_amp: s.trill_amp.unwrap_or(ChirpParams::DEFAULT_TRILL_AMP),
                env_exponent: s.env_exponent.unwrap_or(ChirpParams::DEFAULT_ENV_EXPONENT),
            })
            .collect();
        let scene_cfg = SceneConfig {
            duration_s: scene.duration_s,
            sample_rate: scene.sample_rate.unwrap_or(DEFAULT_SAMPLE_RATE),
            pan_mode,
            bounds,
            trajectory,
            species,
        };
        scene_cfg.validate().map_err(|e| match e {
            aviary_core::Error::Config(msg) => ConfigError::Invalid(msg),
            other => ConfigError::Invalid(other.to_string()),
        })?;

        let outputs = match &self.outputs {
            Some(o) => {
                let d = Outputs::default();
                Outputs {
                    solo_tracks: o.solo_tracks.unwrap_or(d.solo_tracks),
                    event_log: o.event_log.clone().unwrap_or(d.event_log),
                    plots: o.plots.clone().unwrap_or(d.plots),
                }
            }
            None => Outputs::default(),
        };
        let (seed, seed_generated) = match scene.seed {
            Some(s) => (s, false),
            None => (entropy(), true),
        };
        Ok(ResolvedConfig {
            scene: scene_cfg,
            seed,
            seed_generated,
            outputs,
        })
    }
}

impl ResolvedConfig {
    /// Fully explicit config file equivalent to this resolved config.
    pub fn to_file(&self) -> ConfigFile {
        let s = &self.scene;
        ConfigFile {
            scene: SceneSection {
                duration_s: s.duration_s,
                sample_rate: Some(s.sample_rate),
                seed: Some(self.seed),
                pan_mode: Some(s.pan_mode.as_str().to_string()),
                bounds: Some(BoundsSection {
                    x: pair(s.bounds.x),
                    y: pair(s.bounds.y),
                    z: pair(s.bounds.z),
                }),
            },
            trajectory: Some(TrajectorySection {
                amplitude: Some(pair(s.trajectory.amplitude)),
                rate: Some(pair(s.trajectory.rate)),
                randomize_phase: Some(s.trajectory.randomize_phase),
            }),
            species: s
                .species
                .iter()
                .map(|p| SpeciesSection {
                    name: p.name.clone(),
                    freq_range: pair(p.freq_range),
                    duration_range: pair(p.duration_range),
                    trill_rate_range: pair(p.trill_rate_range),
                    pause_range: Some(pair(p.pause_range)),
                    bird_count: p.bird_count,
                    trill_amp: Some(p.trill_amp),
                    env_exponent: Some(p.env_exponent),
                })
                .collect(),
            outputs: Some(OutputsSection {
                solo_tracks: Some(self.outputs.solo_tracks),
                event_log: Some(self.outputs.event_log.clone()),
                plots: Some(self.outputs.plots.clone()),
            }),
        }
    }

    /// Display label for a bird, e.g. `Bird B 2`.
    pub fn bird_label(&self, species_id: usize, ordinal: usize) -> String {
        format!("{} {ordinal}", self.scene.species[species_id].name)
    }
}

pub fn parse_config_file(text: &str) -> Result<ConfigFile, ConfigError> {
    Ok(serde_json::from_str(text)?)
}

/// Parse and validate a config, drawing a seed from entropy if none is given.
pub fn parse_config(text: &str) -> Result<ResolvedConfig, ConfigError> {
    parse_config_file(text)?.resolve(entropy_seed)
}

/// The bundled reference scene.
pub fn table1() -> ResolvedConfig {
    parse_config(TABLE1_JSON).expect("bundled table1.json is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal(extra_species: &str) -> String {
        format!(
            r#"{{
  "scene": {{ "duration_s": 5, "seed": 1 }},
  "species": [
    {{ "name": "Wren", "freq_range": [2000, 4000], "duration_range": [0.1, 0.2],
      "trill_rate_range": [3, 4], "bird_count": 1 {extra_species} }}
  ]
}}"#
        )
    }

    #[test]
    fn bundled_scene_matches_reference() {
        let cfg = table1();
        assert_eq!(cfg.scene.species.len(), 5);
        assert_eq!(cfg.scene.total_birds(), 7);
        assert_eq!(cfg.scene.duration_s, 20.0);
        assert_eq!(cfg.scene.sample_rate, 44100);
        assert_eq!(cfg.seed, 42);
        let mut reference = aviary_core::schedule::reference_scene();
        reference.pan_mode = cfg.scene.pan_mode;
        assert_eq!(cfg.scene, reference);
    }

    #[test]
    fn defaults_are_filled_and_echoed() {
        let cfg = parse_config(&minimal("")).unwrap();
        let sp = &cfg.scene.species[0];
        assert_eq!(sp.pause_range, ParamRange::new(0.5, 2.0));
        assert_eq!(sp.trill_amp, 0.05);
        assert_eq!(sp.env_exponent, 2.0);
        assert_eq!(cfg.scene.sample_rate, 44100);
        assert_eq!(cfg.scene.pan_mode, PanMode::HalfAngle);

        let echoed = serde_json::to_string(&cfg.to_file()).unwrap();
        assert!(echoed.contains(r#""pause_range":[0.5,2.0]"#), "{echoed}");
        assert!(echoed.contains(r#""pan_mode":"paper-literal""#));
        let again = parse_config(&echoed).unwrap();
        assert_eq!(again, cfg);
    }

    #[test]
    fn inverted_range_names_species_and_field() {
        let text = minimal("").replace("[2000, 4000]", "[4000, 2000]");
        match parse_config(&text) {
            Err(ConfigError::Invalid(msg)) => {
                assert!(msg.contains("Wren") && msg.contains("freq_range"), "{msg}")
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = minimal(r#", "colour": "brown""#);
        match parse_config(&text) {
            Err(ConfigError::Schema { line, message, .. }) => {
                assert_eq!(line, 5);
                assert!(message.contains("colour"), "{message}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn syntax_errors_carry_position() {
        match parse_config("{\n  \"scene\": { \"duration_s\": 5,, }\n}") {
            Err(ConfigError::Syntax { line, column, .. }) => {
                assert_eq!(line, 2);
                assert!(column > 0);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn semantic_errors() {
        let text = minimal("").replace("\"duration_s\": 5", "\"duration_s\": -1");
        assert!(matches!(parse_config(&text), Err(ConfigError::Invalid(m)) if m.contains("duration_s")));

        let text = minimal("").replace("\"seed\": 1", "\"seed\": 1, \"sample_rate\": 4000");
        assert!(matches!(parse_config(&text), Err(ConfigError::Invalid(m)) if m.contains("sample_rate")));

        let text = minimal("").replace("\"seed\": 1", "\"seed\": 1, \"pan_mode\": \"wide\"");
        assert!(matches!(parse_config(&text), Err(ConfigError::Invalid(m)) if m.contains("pan_mode")));

        let text = r#"{"scene": {"duration_s": 5}, "species": []}"#;
        assert!(matches!(parse_config(text), Err(ConfigError::Invalid(m)) if m.contains("species")));
    }

    #[test]
    fn missing_seed_is_generated_and_recorded() {
        let text = minimal("").replace("\"seed\": 1", "\"sample_rate\": 48000");
        let cfg = parse_config_file(&text).unwrap().resolve(|| 987654321).unwrap();
        assert_eq!(cfg.seed, 987654321);
        assert!(cfg.seed_generated);
        assert_eq!(cfg.to_file().scene.seed, Some(987654321));
    }

    #[test]
    fn plot_kind_names() {
        assert_eq!(PlotKind::Trajectory3d.to_string(), "trajectory3d");
        assert_eq!(PlotKind::TimelineSpectrogram.to_string(), "timeline_spectrogram");
    }
}
