//! Track rendering, summation and peak normalization.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::chirp::synth_chirp;
use crate::error::{Error, Result};
use crate::schedule::{ChirpEvent, SceneScore};
use crate::spatial::{spatialize_chirp, PanMode};

#[derive(Debug, Clone, PartialEq)]
pub struct StereoBuffer {
    pub sample_rate: u32,
    pub left: Vec<f64>,
    pub right: Vec<f64>,
}

impl StereoBuffer {
    pub fn silent(sample_rate: u32, frames: usize) -> Self {
        Self {
            sample_rate,
            left: vec![0.0; frames],
            right: vec![0.0; frames],
        }
    }

    /// Frame count (samples per channel).
    pub fn len(&self) -> usize {
        self.left.len()
    }

    pub fn is_empty(&self) -> bool {
        self.left.is_empty()
    }

    /// Largest absolute sample over both channels.
    pub fn peak(&self) -> f64 {
        self.left
            .iter()
            .chain(&self.right)
            .fold(0.0f64, |m, s| m.max(s.abs()))
    }

    pub fn energy(&self) -> f64 {
        self.left
            .iter()
            .zip(&self.right)
            .map(|(l, r)| l * l + r * r)
            .sum()
    }
}

/// One bird's rendered contribution, tagged for ordered mixing.
#[derive(Debug, Clone, PartialEq)]
pub struct BirdTrack {
    pub bird_id: usize,
    pub buffer: StereoBuffer,
}

/// Render every event of one bird into a buffer spanning the whole scene.
pub fn render_bird_track<'a, I>(events: I, score: &SceneScore, mode: PanMode) -> Result<StereoBuffer>
where
    I: IntoIterator<Item = &'a ChirpEvent>,
{
    let frames = score.frames();
    let fs = f64::from(score.sample_rate);
    let mut track = StereoBuffer::silent(score.sample_rate, frames);
    for event in events {
        let mono = synth_chirp(&event.params, score.sample_rate)?;
        let chirp = spatialize_chirp(&mono, &event.position, mode)?;
        let offset = libm::round(event.onset * fs) as usize;
        let end = offset + chirp.len();
        if event.onset < 0.0 || end > frames {
            return Err(Error::Contract(format!(
                "bird {} event at {} s spans samples {offset}..{end}, scene has {frames}",
                event.bird_id, event.onset
            )));
        }
        for (dst, src) in track.left[offset..end].iter_mut().zip(&chirp.left) {
            *dst += src;
        }
        for (dst, src) in track.right[offset..end].iter_mut().zip(&chirp.right) {
            *dst += src;
        }
    }
    Ok(track)
}

/// Render every bird of a score, in bird id order.
pub fn render_tracks(score: &SceneScore, mode: PanMode) -> Result<Vec<BirdTrack>> {
    score
        .birds
        .iter()
        .map(|b| {
            render_bird_track(score.events_for(b.bird_id), score, mode).map(|buffer| BirdTrack {
                bird_id: b.bird_id,
                buffer,
            })
        })
        .collect()
}

/// Sample-wise sum of all tracks, always accumulated in ascending bird id order.
pub fn mix(tracks: &[BirdTrack]) -> Result<StereoBuffer> {
    let first = tracks
        .first()
        .ok_or_else(|| Error::Contract("mix needs at least one track".into()))?;
    let (rate, frames) = (first.buffer.sample_rate, first.buffer.len());
    let mut order: Vec<&BirdTrack> = tracks.iter().collect();
    order.sort_by_key(|t| t.bird_id);
    let mut out = StereoBuffer::silent(rate, frames);
    for t in order {
        let b = &t.buffer;
        if b.sample_rate != rate || b.len() != frames || b.right.len() != frames {
            return Err(Error::Contract(format!(
                "track of bird {} is {} frames at {} Hz, expected {frames} at {rate} Hz",
                t.bird_id,
                b.len(),
                b.sample_rate
            )));
        }
        for (o, s) in out.left.iter_mut().zip(&b.left) {
            *o += s;
        }
        for (o, s) in out.right.iter_mut().zip(&b.right) {
            *o += s;
        }
    }
    Ok(out)
}

/// Result of [`normalize`].
#[derive(Debug, Clone, PartialEq)]
pub struct Normalized {
    pub buffer: StereoBuffer,
    /// Peak before normalization.
    pub peak: f64,
}

impl Normalized {
    /// True when the input had no non-zero sample and was passed through unchanged.
    pub fn is_silent(&self) -> bool {
        self.peak == 0.0
    }
}

/// Divide every sample by the peak absolute value over both channels.
pub fn normalize(buffer: StereoBuffer) -> Normalized {
    let peak = buffer.peak();
    if peak == 0.0 || !peak.is_finite() {
        return Normalized { buffer, peak };
    }
    let mut buffer = buffer;
    // Division rather than multiplication by 1/peak: x / x is exactly 1.
    for s in buffer.left.iter_mut().chain(buffer.right.iter_mut()) {
        *s /= peak;
    }
    Normalized { buffer, peak }
}
