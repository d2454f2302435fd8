//! The render → analyze → plot pipeline and its on-disk layout.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::thread;

use aviary_core::analysis::{
    activity_summary, channel, channel_difference_waveform, diff_spectrogram, stft, stft_stereo,
    to_db, track_peak_frequency, Channel, FrequencyTrack, Scale, Spectrogram, DEFAULT_EPSILON,
    DEFAULT_HOP, DEFAULT_TRACK_THRESHOLD_DB, DEFAULT_WINDOW,
};
use aviary_core::mix::{mix, normalize, render_bird_track, render_tracks};
use aviary_core::schedule::build_scene;
use aviary_core::{BirdTrack, Normalized, SceneScore, StereoBuffer};
use serde::{Deserialize, Serialize};

use crate::config::{table1, ConfigError, EventLogFormat, PlotKind, ResolvedConfig};
use crate::error::{AppError, Result};
use crate::export;
use crate::manifest::{sha256_hex, Manifest, MANIFEST_FILE};
use crate::plot::{self, BirdStyle, Palette, Projection};
use crate::wav::{decode_wav, encode_wav};

pub const WAV_FILE: &str = "soundscape.wav";
pub const EVENTS_JSONL: &str = "events.jsonl";
pub const EVENTS_CSV: &str = "events.csv";
pub const ANALYSIS_FILE: &str = "analysis.json";
pub const PLOTS_FILE: &str = "plots.json";

pub fn solo_wav_name(bird_id: usize) -> String {
    format!("bird_{bird_id}.wav")
}

/// Worker count; `0` means one per available core.
pub fn resolve_jobs(jobs: usize) -> usize {
    if jobs > 0 {
        jobs
    } else {
        thread::available_parallelism().map_or(1, |n| n.get())
    }
}

/// An in-memory render.
#[derive(Debug, Clone)]
pub struct Rendered {
    pub score: SceneScore,
    pub tracks: Vec<BirdTrack>,
    pub mix: Normalized,
}

/// Render per-bird tracks on up to `jobs` threads, then mix in bird id order.
/// The result does not depend on `jobs`.
pub fn render(cfg: &ResolvedConfig, jobs: usize) -> Result<Rendered> {
    let score = build_scene(&cfg.scene, cfg.seed)?;
    let mode = cfg.scene.pan_mode;
    let jobs = resolve_jobs(jobs).min(score.birds.len()).max(1);
    let tracks = if jobs == 1 {
        render_tracks(&score, mode)?
    } else {
        let chunk = score.birds.len().div_ceil(jobs);
        thread::scope(|s| {
            let handles: Vec<_> = score
                .birds
                .chunks(chunk)
                .map(|birds| {
                    let score = &score;
                    s.spawn(move || {
                        birds
                            .iter()
                            .map(|b| {
                                render_bird_track(score.events_for(b.bird_id), score, mode)
                                    .map(|buffer| BirdTrack { bird_id: b.bird_id, buffer })
                            })
                            .collect::<aviary_core::Result<Vec<_>>>()
                    })
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("render worker panicked"))
                .collect::<aviary_core::Result<Vec<Vec<_>>>>()
        })?
        .into_iter()
        .flatten()
        .collect()
    };
    let mix = normalize(mix(&tracks)?);
    Ok(Rendered { score, tracks, mix })
}

fn write(dir: &Path, name: &str, bytes: &[u8]) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, bytes).map_err(|e| AppError::io(path, e))
}

fn read(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| AppError::io(path, e))
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| AppError::io(dir, e))
}

#[derive(Debug)]
pub struct RenderReport {
    pub manifest: Manifest,
    pub rendered: Rendered,
}

/// Render a scene and write the WAV, event logs, optional solo tracks and the manifest.
pub fn run_render(cfg: &ResolvedConfig, out_dir: &Path, jobs: usize) -> Result<RenderReport> {
    create_dir(out_dir)?;
    let rendered = render(cfg, jobs)?;
    let mut manifest = Manifest::new(cfg);
    manifest.events = rendered.score.events.len();
    manifest.peak = rendered.mix.peak;
    manifest.silent = rendered.mix.is_silent();
    if manifest.silent {
        let msg = format!(
            "scene is silent ({} events in {} s); wrote an all-zero WAV",
            manifest.events, cfg.scene.duration_s
        );
        log::warn!("{msg}");
        manifest.warnings.push(msg);
    }
    if cfg.seed_generated {
        log::info!("no seed configured; drew seed {} from entropy", cfg.seed);
    }

    let wav = encode_wav(&rendered.mix.buffer);
    write(out_dir, WAV_FILE, &wav)?;
    manifest.record(WAV_FILE, &wav);

    let records = export::event_records(&rendered.score, cfg);
    for format in &cfg.outputs.event_log {
        let (name, bytes) = match format {
            EventLogFormat::Jsonl => (EVENTS_JSONL, export::events_jsonl(&records)),
            EventLogFormat::Csv => (EVENTS_CSV, export::events_csv(&records)),
        };
        write(out_dir, name, &bytes)?;
        manifest.record(name, &bytes);
    }

    if cfg.outputs.solo_tracks {
        for track in &rendered.tracks {
            let solo = normalize(track.buffer.clone());
            let bytes = encode_wav(&solo.buffer);
            let name = solo_wav_name(track.bird_id);
            write(out_dir, &name, &bytes)?;
            manifest.record(&name, &bytes);
        }
    }

    write(out_dir, MANIFEST_FILE, &manifest.to_json())?;
    log::info!(
        "rendered {} events from {} birds into {}",
        manifest.events,
        manifest.birds,
        out_dir.display()
    );
    Ok(RenderReport { manifest, rendered })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyzeOptions {
    pub window: usize,
    pub hop: usize,
    /// Also write long-format spectrogram CSVs (large).
    pub csv: bool,
}

impl Default for AnalyzeOptions {
    fn default() -> Self {
        Self {
            window: DEFAULT_WINDOW,
            hop: DEFAULT_HOP,
            csv: false,
        }
    }
}

impl AnalyzeOptions {
    fn validate(&self) -> Result<()> {
        if !self.window.is_power_of_two() || self.window < 2 {
            return Err(ConfigError::Invalid(format!(
                "window: {} is not a power of two >= 2",
                self.window
            ))
            .into());
        }
        if self.hop == 0 || self.hop > self.window {
            return Err(ConfigError::Invalid(format!(
                "hop: {} is outside [1, window = {}]",
                self.hop, self.window
            ))
            .into());
        }
        Ok(())
    }
}

/// Spectral analysis of one stereo buffer.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub left_db: Spectrogram,
    pub right_db: Spectrogram,
    pub diff_db: Spectrogram,
    pub track_left: FrequencyTrack,
    pub track_right: FrequencyTrack,
}

pub fn analyze_buffer(buffer: &StereoBuffer, window: usize, hop: usize) -> Result<Analysis> {
    let left_db = to_db(&stft(&channel(buffer, Channel::Left), window, hop)?, DEFAULT_EPSILON)?;
    let right_db = to_db(&stft(&channel(buffer, Channel::Right), window, hop)?, DEFAULT_EPSILON)?;
    let diff_db = diff_spectrogram(&left_db, &right_db)?;
    Ok(Analysis {
        track_left: track_peak_frequency(&left_db, DEFAULT_TRACK_THRESHOLD_DB),
        track_right: track_peak_frequency(&right_db, DEFAULT_TRACK_THRESHOLD_DB),
        left_db,
        right_db,
        diff_db,
    })
}

/// dB spectrogram of a bird's solo track with both channels pooled, so the
/// spectrum does not depend on where the bird was panned.
pub fn solo_spectrogram(track: &StereoBuffer, window: usize, hop: usize) -> Result<Spectrogram> {
    Ok(to_db(&stft_stereo(track, window, hop)?, DEFAULT_EPSILON)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrogramStats {
    pub min: f64,
    pub max: f64,
}

impl SpectrogramStats {
    fn of(spec: &Spectrogram) -> Self {
        Self {
            min: spec.min_value(),
            max: spec.max_value(),
        }
    }
}

/// Contents of `analysis.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisIndex {
    pub source: String,
    pub source_sha256: String,
    pub sample_rate: u32,
    pub samples: usize,
    pub window: usize,
    pub hop: usize,
    pub epsilon: f64,
    pub floor_db: f64,
    pub threshold_db: f64,
    pub frames: usize,
    pub bins: usize,
    pub bin_width: f64,
    pub left: SpectrogramStats,
    pub right: SpectrogramStats,
    pub diff: SpectrogramStats,
    pub active_frames_left: usize,
    pub active_frames_right: usize,
    pub outputs: BTreeMap<String, String>,
}

/// Analyze a WAV file, or the `soundscape.wav` of a run directory. Results go to
/// `out_dir`, defaulting to the directory holding the WAV.
pub fn run_analyze(input: &Path, out_dir: Option<&Path>, opts: &AnalyzeOptions) -> Result<AnalysisIndex> {
    opts.validate()?;
    let wav_path = if input.is_dir() {
        input.join(WAV_FILE)
    } else {
        input.to_path_buf()
    };
    let out_dir: PathBuf = match out_dir {
        Some(d) => d.to_path_buf(),
        None => wav_path
            .parent()
            .map(Path::to_path_buf)
            .unwrap_or_else(|| PathBuf::from(".")),
    };
    create_dir(&out_dir)?;
    let bytes = read(&wav_path)?;
    let buffer = decode_wav(&bytes).map_err(|source| AppError::Wav {
        path: wav_path.clone(),
        source,
    })?;
    if buffer.len() < opts.window {
        return Err(AppError::Format(format!(
            "{}: {} frames is shorter than one {}-sample analysis window",
            wav_path.display(),
            buffer.len(),
            opts.window
        )));
    }
    let a = analyze_buffer(&buffer, opts.window, opts.hop)?;
    let mut outputs = BTreeMap::new();
    let mut emit = |name: &str, bytes: Vec<u8>| -> Result<()> {
        write(&out_dir, name, &bytes)?;
        outputs.insert(name.to_string(), sha256_hex(&bytes));
        Ok(())
    };
    emit("spectrogram_L.bin", export::spectrogram_bytes(&a.left_db))?;
    emit("spectrogram_R.bin", export::spectrogram_bytes(&a.right_db))?;
    emit("spectrogram_diff.bin", export::spectrogram_bytes(&a.diff_db))?;
    emit("track_L.csv", export::track_csv(&a.track_left))?;
    emit("track_R.csv", export::track_csv(&a.track_right))?;
    let diff = channel_difference_waveform(&buffer);
    emit("channel_diff.bin", export::matrix_bytes(1, diff.len(), &diff.samples))?;
    if opts.csv {
        for (name, spec) in [
            ("spectrogram_L.csv", &a.left_db),
            ("spectrogram_R.csv", &a.right_db),
            ("spectrogram_diff.csv", &a.diff_db),
        ] {
            let mut buf = Vec::new();
            export::spectrogram_csv(spec, &mut buf).expect("in-memory write");
            emit(name, buf)?;
        }
    }

    let floor_db = match a.left_db.scale {
        Scale::Decibels { floor_db } => floor_db,
        _ => unreachable!("to_db yields decibels"),
    };
    let index = AnalysisIndex {
        source: wav_path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default(),
        source_sha256: sha256_hex(&bytes),
        sample_rate: buffer.sample_rate,
        samples: buffer.len(),
        window: opts.window,
        hop: opts.hop,
        epsilon: DEFAULT_EPSILON,
        floor_db,
        threshold_db: DEFAULT_TRACK_THRESHOLD_DB,
        frames: a.left_db.frames(),
        bins: a.left_db.bins(),
        bin_width: a.left_db.bin_width(),
        left: SpectrogramStats::of(&a.left_db),
        right: SpectrogramStats::of(&a.right_db),
        diff: SpectrogramStats::of(&a.diff_db),
        active_frames_left: a.track_left.active_count(),
        active_frames_right: a.track_right.active_count(),
        outputs,
    };
    let mut json = serde_json::to_vec_pretty(&index).expect("index serializes");
    json.push(b'\n');
    write(&out_dir, ANALYSIS_FILE, &json)?;
    Ok(index)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlotOptions {
    /// Display range of channel and per-bird spectrograms, dB.
    pub spectrogram_range: (f64, f64),
    pub path_samples: usize,
    pub jobs: usize,
}

impl Default for PlotOptions {
    fn default() -> Self {
        Self {
            spectrogram_range: plot::SPECTROGRAM_RANGE_DB,
            path_samples: plot::DEFAULT_PATH_SAMPLES,
            jobs: 0,
        }
    }
}

/// One line of `plots.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotEntry {
    pub kind: PlotKind,
    pub file: String,
    pub width: usize,
    pub height: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub range_db: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub palette: Option<Palette>,
    pub sha256: String,
}

fn read_manifest(run_dir: &Path) -> Result<Manifest> {
    let path = run_dir.join(MANIFEST_FILE);
    let text = read(&path)?;
    serde_json::from_slice(&text)
        .map_err(|e| AppError::Format(format!("{}: {e}", path.display())))
}

fn load_spectrogram(run_dir: &Path, name: &str, index: &AnalysisIndex, scale: Scale) -> Result<Spectrogram> {
    let path = run_dir.join(name);
    let (rows, cols, cells) = export::read_matrix(&read(&path)?)
        .map_err(|e| AppError::Format(format!("{}: {e}", path.display())))?;
    if rows != index.frames || cols != index.bins {
        return Err(AppError::Format(format!(
            "{}: {rows}x{cols} does not match {ANALYSIS_FILE} ({}x{})",
            path.display(),
            index.frames,
            index.bins
        )));
    }
    Ok(Spectrogram::from_cells(index.sample_rate, index.window, index.hop, cells, scale)?)
}

fn svg_size(doc: &str) -> (usize, usize) {
    let attr = |name: &str| -> usize {
        let key = format!(" {name}=\"");
        doc.find(&key)
            .and_then(|i| doc[i + key.len()..].split('"').next())
            .and_then(|v| v.parse::<f64>().ok())
            .map_or(0, |v| v as usize)
    };
    (attr("width"), attr("height"))
}

/// Emit the configured plot set for a run directory, analysing it first if needed.
pub fn run_plot(run_dir: &Path, opts: &PlotOptions) -> Result<Vec<PlotEntry>> {
    let manifest = read_manifest(run_dir)?;
    let cfg = manifest.resolved_config()?;
    if !run_dir.join(ANALYSIS_FILE).exists() {
        run_analyze(run_dir, None, &AnalyzeOptions::default())?;
    }
    let index_path = run_dir.join(ANALYSIS_FILE);
    let index: AnalysisIndex = serde_json::from_slice(&read(&index_path)?)
        .map_err(|e| AppError::Format(format!("{}: {e}", index_path.display())))?;

    let wav_path = run_dir.join(WAV_FILE);
    let wav_bytes = read(&wav_path)?;
    if manifest.outputs.get(WAV_FILE) != Some(&sha256_hex(&wav_bytes)) {
        log::warn!("{} does not match the hash in {MANIFEST_FILE}", wav_path.display());
    }
    let buffer = decode_wav(&wav_bytes).map_err(|source| AppError::Wav {
        path: wav_path.clone(),
        source,
    })?;

    let rendered = render(&cfg, opts.jobs)?;
    let score = &rendered.score;
    let summary = activity_summary(&score.events);
    let styles: Vec<BirdStyle> = score
        .birds
        .iter()
        .map(|b| BirdStyle {
            bird_id: b.bird_id,
            species_id: b.species_id,
            label: cfg.bird_label(b.species_id, b.ordinal),
        })
        .collect();

    let mut entries = Vec::new();
    let mut emit = |kind: PlotKind, file: String, bytes: Vec<u8>, size: (usize, usize), range: Option<(f64, f64)>, palette: Option<Palette>| -> Result<()> {
        write(run_dir, &file, &bytes)?;
        entries.push(PlotEntry {
            kind,
            file,
            width: size.0,
            height: size.1,
            range_db: range.map(|(lo, hi)| [lo, hi]),
            palette,
            sha256: sha256_hex(&bytes),
        });
        Ok(())
    };
    let mut emit_svg = |kind: PlotKind, file: &str, doc: String| {
        let size = svg_size(&doc);
        emit(kind, file.to_string(), doc.into_bytes(), size, None, None)
    };

    let needs_solo = cfg
        .outputs
        .plots
        .iter()
        .any(|k| matches!(k, PlotKind::Spectrogram | PlotKind::TimelineSpectrogram));
    // Solo spectra share the mix's normalization so bird levels stay comparable.
    let solo: Vec<(usize, Spectrogram)> = if needs_solo && buffer.len() >= index.window {
        let scale = if rendered.mix.is_silent() { 1.0 } else { rendered.mix.peak };
        rendered
            .tracks
            .iter()
            .map(|t| {
                let mut b = t.buffer.clone();
                b.left.iter_mut().chain(b.right.iter_mut()).for_each(|s| *s /= scale);
                solo_spectrogram(&b, index.window, index.hop).map(|s| (t.bird_id, s))
            })
            .collect::<Result<_>>()?
    } else {
        Vec::new()
    };

    let mut svgs: Vec<(PlotKind, String, String)> = Vec::new();
    let mut rasters: Vec<(String, plot::Ppm, (f64, f64), Palette)> = Vec::new();
    for &kind in &cfg.outputs.plots {
        match kind {
            PlotKind::Trajectory3d => {
                for (file, projection) in [
                    ("trajectories.svg", Projection::Oblique),
                    ("trajectories_xy.svg", Projection::Xy),
                    ("trajectories_xz.svg", Projection::Xz),
                    ("trajectories_yz.svg", Projection::Yz),
                ] {
                    let doc = plot::plot_trajectories(score, &styles, opts.path_samples, projection)
                        .map_err(AppError::Format)?;
                    svgs.push((kind, file.into(), doc));
                }
            }
            PlotKind::WaveformCompare => {
                let diff = channel_difference_waveform(&buffer);
                svgs.push((kind, "waveform_compare.svg".into(), plot::plot_waveform_compare(&buffer, &diff)));
            }
            PlotKind::Timeline => {
                svgs.push((kind, "timeline.svg".into(), plot::plot_timeline(&summary, &styles, score.duration)));
            }
            PlotKind::TimelineSpectrogram => {
                let tracks: Vec<(usize, FrequencyTrack)> = solo
                    .iter()
                    .map(|(id, s)| (*id, track_peak_frequency(s, DEFAULT_TRACK_THRESHOLD_DB)))
                    .collect();
                let freq_max = cfg
                    .scene
                    .species
                    .iter()
                    .map(|s| s.freq_range.max * (1.0 + s.trill_amp))
                    .fold(0.0, f64::max);
                svgs.push((
                    kind,
                    "timeline_spectrogram.svg".into(),
                    plot::plot_timeline_spectrogram(&summary, &styles, &tracks, score.duration, freq_max),
                ));
            }
            PlotKind::Spectrogram => {
                let range = opts.spectrogram_range;
                let floor = Scale::Decibels { floor_db: index.floor_db };
                for (file, name, r, palette, scale) in [
                    ("spectrogram_L.ppm", "spectrogram_L.bin", range, Palette::Viridis, floor),
                    ("spectrogram_R.ppm", "spectrogram_R.bin", range, Palette::Viridis, floor),
                    ("spectrogram_diff.ppm", "spectrogram_diff.bin", plot::DIFF_RANGE_DB, Palette::RedBlue, Scale::Difference),
                ] {
                    let spec = load_spectrogram(run_dir, name, &index, scale)?;
                    let img = plot::render_spectrogram_image(&spec, r, palette).map_err(AppError::Format)?;
                    rasters.push((file.into(), img, r, palette));
                }
                for (id, spec) in &solo {
                    let img = plot::render_spectrogram_image(spec, range, Palette::Viridis).map_err(AppError::Format)?;
                    rasters.push((format!("bird_{id}_spectrogram.ppm"), img, range, Palette::Viridis));
                }
            }
        }
    }
    for (kind, file, doc) in svgs {
        emit_svg(kind, &file, doc)?;
    }
    for (file, img, range, palette) in rasters {
        emit(PlotKind::Spectrogram, file, img.to_bytes(), (img.width, img.height), Some(range), Some(palette))?;
    }

    let mut json = serde_json::to_vec_pretty(&entries).expect("plot index serializes");
    json.push(b'\n');
    write(run_dir, PLOTS_FILE, &json)?;
    Ok(entries)
}

#[derive(Debug)]
pub struct DemoReport {
    pub render: RenderReport,
    pub analysis: AnalysisIndex,
    pub plots: Vec<PlotEntry>,
}

/// The bundled reference scene, end to end.
pub fn run_demo(out_dir: &Path, jobs: usize) -> Result<DemoReport> {
    let cfg = table1();
    let render = run_render(&cfg, out_dir, jobs)?;
    let analysis = run_analyze(out_dir, None, &AnalyzeOptions::default())?;
    let plots = run_plot(out_dir, &PlotOptions { jobs, ..PlotOptions::default() })?;
    Ok(DemoReport {
        render,
        analysis,
        plots,
    })
}
