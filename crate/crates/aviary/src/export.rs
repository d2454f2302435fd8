//! Event logs, spectrogram matrices and frequency-track tables.

use std::io::Write;

use aviary_core::analysis::{FrequencyTrack, Spectrogram};
use aviary_core::SceneScore;
use serde::{Deserialize, Serialize};

use crate::config::ResolvedConfig;

/// One line of `events.jsonl` / one row of `events.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventRecord {
    pub species: String,
    pub species_id: usize,
    pub bird: usize,
    pub bird_label: String,
    pub onset: f64,
    pub duration: f64,
    pub f0: f64,
    pub f1: f64,
    pub trill_rate: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

pub fn event_records(score: &SceneScore, config: &ResolvedConfig) -> Vec<EventRecord> {
    score
        .events
        .iter()
        .map(|e| {
            let bird = &score.birds[e.bird_id];
            EventRecord {
                species: config.scene.species[e.species_id].name.clone(),
                species_id: e.species_id,
                bird: e.bird_id,
                bird_label: config.bird_label(bird.species_id, bird.ordinal),
                onset: e.onset,
                duration: e.params.duration(),
                f0: e.params.f0(),
                f1: e.params.f1(),
                trill_rate: e.params.trill_rate(),
                x: e.position.x,
                y: e.position.y,
                z: e.position.z,
            }
        })
        .collect()
}

pub fn events_jsonl(records: &[EventRecord]) -> Vec<u8> {
    let mut out = Vec::new();
    for r in records {
        serde_json::to_writer(&mut out, r).expect("records serialize");
        out.push(b'\n');
    }
    out
}

pub fn events_csv(records: &[EventRecord]) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in records {
        w.serialize(r).expect("records serialize");
    }
    w.into_inner().expect("in-memory writer")
}

pub fn read_events_jsonl(text: &str) -> serde_json::Result<Vec<EventRecord>> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(serde_json::from_str)
        .collect()
}

/// Binary matrix layout: a 16-byte header of four little-endian fields
/// (`b"AVMX"`, rows `u32`, cols `u32`, dtype tag `u32`) followed by row-major
/// cells. Tag [`DTYPE_F64`] means each cell is an `f64` LE.
pub const MATRIX_MAGIC: &[u8; 4] = b"AVMX";
pub const DTYPE_F64: u32 = 1;

pub fn matrix_bytes(rows: usize, cols: usize, cells: &[f64]) -> Vec<u8> {
    assert_eq!(rows * cols, cells.len(), "matrix shape mismatch");
    let mut out = Vec::with_capacity(16 + 8 * cells.len());
    out.extend_from_slice(MATRIX_MAGIC);
    out.extend_from_slice(&(rows as u32).to_le_bytes());
    out.extend_from_slice(&(cols as u32).to_le_bytes());
    out.extend_from_slice(&DTYPE_F64.to_le_bytes());
    for v in cells {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

/// Parse a binary matrix into `(rows, cols, cells)`.
pub fn read_matrix(bytes: &[u8]) -> Result<(usize, usize, Vec<f64>), String> {
    if bytes.len() < 16 || &bytes[0..4] != MATRIX_MAGIC {
        return Err("not an AVMX matrix".into());
    }
    let word = |at: usize| u32::from_le_bytes(bytes[at..at + 4].try_into().unwrap()) as usize;
    let (rows, cols, tag) = (word(4), word(8), word(12) as u32);
    if tag != DTYPE_F64 {
        return Err(format!("unsupported dtype tag {tag}"));
    }
    let body = &bytes[16..];
    if body.len() != rows * cols * 8 {
        return Err(format!(
            "matrix body is {} bytes, expected {} for {rows}x{cols}",
            body.len(),
            rows * cols * 8
        ));
    }
    let cells = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok((rows, cols, cells))
}

/// Spectrogram as a frames x bins matrix.
pub fn spectrogram_bytes(spec: &Spectrogram) -> Vec<u8> {
    matrix_bytes(spec.frames(), spec.bins(), &spec.values)
}

/// Long-format CSV: `frame_time,freq_hz,value`.
pub fn spectrogram_csv(spec: &Spectrogram, out: &mut impl Write) -> std::io::Result<()> {
    writeln!(out, "frame_time,freq_hz,value")?;
    for (k, t) in spec.frame_times.iter().enumerate() {
        for (f, v) in spec.bin_freqs.iter().zip(spec.frame(k)) {
            writeln!(out, "{t},{f},{v}")?;
        }
    }
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
struct TrackRow {
    time: f64,
    active: bool,
    freq_hz: Option<f64>,
    peak_db: f64,
}

pub fn track_csv(track: &FrequencyTrack) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for ((&time, freq), &peak_db) in track.times.iter().zip(&track.peak_freq).zip(&track.peak_db) {
        w.serialize(TrackRow {
            time,
            active: freq.is_some(),
            freq_hz: *freq,
            peak_db,
        })
        .expect("rows serialize");
    }
    w.into_inner().expect("in-memory writer")
}

pub fn read_track_csv(bytes: &[u8]) -> csv::Result<FrequencyTrack> {
    let mut track = FrequencyTrack {
        times: Vec::new(),
        peak_freq: Vec::new(),
        peak_db: Vec::new(),
    };
    for row in csv::Reader::from_reader(bytes).deserialize() {
        let row: TrackRow = row?;
        track.times.push(row.time);
        track.peak_freq.push(row.freq_hz);
        track.peak_db.push(row.peak_db);
    }
    Ok(track)
}
