//! Spectral and temporal measurements on rendered audio.
//!
//! Frame `k` of an STFT covers samples `[k*hop, k*hop + window)`, and its time stamp
//! is the window centre `(k*hop + window/2) / sample_rate`. The window is periodic
//! Hann, `w[j] = 0.5 - 0.5 cos(2*pi*j/window)`. Only frames that fit entirely inside
//! the signal are produced; there is no padding.

mod activity;
pub mod fft;

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::TAU;

pub use activity::{activity_summary, ActivitySummary, BirdActivity, SpeciesStats};
pub use fft::{Complex, Fft};

use crate::chirp::MonoBuffer;
use crate::error::{Error, Result};
use crate::mix::StereoBuffer;

pub const DEFAULT_WINDOW: usize = 2048;
pub const DEFAULT_HOP: usize = 512;
/// Added to magnitudes before taking logs; `20*log10(1e-16) = -320 dB`.
pub const DEFAULT_EPSILON: f64 = 1e-16;
/// Activity threshold for peak tracking, relative to the loudest cell.
pub const DEFAULT_TRACK_THRESHOLD_DB: f64 = -60.0;

/// What the cells of a [`Spectrogram`] hold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scale {
    /// Linear STFT magnitude.
    Magnitude,
    /// `20*log10(magnitude + eps)`; every cell is at least `floor_db`.
    Decibels { floor_db: f64 },
    /// Cell-wise difference of two dB spectrograms.
    Difference,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrogram {
    pub sample_rate: u32,
    pub window_size: usize,
    pub hop: usize,
    pub frame_times: Vec<f64>,
    pub bin_freqs: Vec<f64>,
    /// Frame-major cells: `values[frame * bins + bin]`.
    pub values: Vec<f64>,
    pub scale: Scale,
}

impl Spectrogram {
    pub fn frames(&self) -> usize {
        self.frame_times.len()
    }

    pub fn bins(&self) -> usize {
        self.bin_freqs.len()
    }

    pub fn bin_width(&self) -> f64 {
        f64::from(self.sample_rate) / self.window_size as f64
    }

    pub fn frame(&self, k: usize) -> &[f64] {
        let b = self.bins();
        &self.values[k * b..(k + 1) * b]
    }

    pub fn get(&self, frame: usize, bin: usize) -> f64 {
        self.values[frame * self.bins() + bin]
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Rebuild a spectrogram from its grid parameters and frame-major cells,
    /// e.g. after reading an exported matrix.
    pub fn from_cells(
        sample_rate: u32,
        window_size: usize,
        hop: usize,
        values: Vec<f64>,
        scale: Scale,
    ) -> Result<Spectrogram> {
        let bins = window_size / 2 + 1;
        if window_size == 0 || hop == 0 || !values.len().is_multiple_of(bins) {
            return Err(Error::Contract(alloc::format!(
                "{} cells do not fill rows of {bins} bins",
                values.len()
            )));
        }
        let (frame_times, bin_freqs) = grid(sample_rate, window_size, hop, values.len() / bins);
        Ok(Spectrogram {
            sample_rate,
            window_size,
            hop,
            frame_times,
            bin_freqs,
            values,
            scale,
        })
    }

    fn same_grid(&self, other: &Spectrogram) -> bool {
        self.sample_rate == other.sample_rate
            && self.window_size == other.window_size
            && self.hop == other.hop
            && self.frames() == other.frames()
            && self.bins() == other.bins()
    }
}

fn grid(sample_rate: u32, window_size: usize, hop: usize, frames: usize) -> (Vec<f64>, Vec<f64>) {
    let fs = f64::from(sample_rate);
    let times = (0..frames)
        .map(|k| (k * hop) as f64 / fs + window_size as f64 / (2.0 * fs))
        .collect();
    let freqs = (0..window_size / 2 + 1)
        .map(|b| b as f64 * fs / window_size as f64)
        .collect();
    (times, freqs)
}

/// Periodic Hann window.
pub fn hann(window: usize) -> Vec<f64> {
    (0..window)
        .map(|j| 0.5 - 0.5 * libm::cos(TAU * j as f64 / window as f64))
        .collect()
}

/// Magnitude STFT of a mono signal.
pub fn stft(mono: &MonoBuffer, window_size: usize, hop: usize) -> Result<Spectrogram> {
    let fft = Fft::new(window_size).ok_or(Error::Domain {
        what: "window_size",
        value: window_size as f64,
        domain: "powers of two",
    })?;
    if hop == 0 || hop > window_size {
        return Err(Error::Domain {
            what: "hop",
            value: hop as f64,
            domain: "(0, window_size]",
        });
    }
    if mono.len() < window_size {
        return Err(Error::TooShort {
            len: mono.len(),
            window: window_size,
        });
    }
    let frames = 1 + (mono.len() - window_size) / hop;
    let bins = window_size / 2 + 1;
    let win = hann(window_size);
    let mut values = Vec::with_capacity(frames * bins);
    let mut buf = vec![Complex::ZERO; window_size];
    for k in 0..frames {
        let chunk = &mono.samples[k * hop..k * hop + window_size];
        for ((dst, &x), &w) in buf.iter_mut().zip(chunk).zip(&win) {
            *dst = Complex::new(x * w, 0.0);
        }
        fft.process(&mut buf);
        values.extend(buf[..bins].iter().map(Complex::norm));
    }
    let (frame_times, bin_freqs) = grid(mono.sample_rate, window_size, hop, frames);
    Ok(Spectrogram {
        sample_rate: mono.sample_rate,
        window_size,
        hop,
        frame_times,
        bin_freqs,
        values,
        scale: Scale::Magnitude,
    })
}

/// Magnitude STFT of a stereo signal with both channels pooled:
/// `sqrt(|L|^2 + |R|^2)` per cell. Under an equal-power pan law this equals the
/// spectrum of the unpanned (attenuated) source, whatever the gains' signs.
pub fn stft_stereo(buffer: &StereoBuffer, window_size: usize, hop: usize) -> Result<Spectrogram> {
    let left = stft(&channel(buffer, Channel::Left), window_size, hop)?;
    let right = stft(&channel(buffer, Channel::Right), window_size, hop)?;
    Ok(Spectrogram {
        values: left
            .values
            .iter()
            .zip(&right.values)
            .map(|(l, r)| libm::sqrt(l * l + r * r))
            .collect(),
        ..left
    })
}

/// Convert magnitudes to decibels, `20*log10(m + epsilon)`.
pub fn to_db(spec: &Spectrogram, epsilon: f64) -> Result<Spectrogram> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::Domain {
            what: "epsilon",
            value: epsilon,
            domain: "(0, inf)",
        });
    }
    let floor_db = db(0.0, epsilon);
    Ok(Spectrogram {
        values: spec.values.iter().map(|&m| db(m, epsilon)).collect(),
        scale: Scale::Decibels { floor_db },
        ..spec.clone()
    })
}

fn db(magnitude: f64, epsilon: f64) -> f64 {
    20.0 * libm::log10(magnitude + epsilon)
}

/// Cell-wise `left - right`. No display clipping is applied.
pub fn diff_spectrogram(left: &Spectrogram, right: &Spectrogram) -> Result<Spectrogram> {
    if !left.same_grid(right) {
        return Err(Error::Contract(alloc::format!(
            "spectrogram shapes differ: {}x{} vs {}x{}",
            left.frames(),
            left.bins(),
            right.frames(),
            right.bins()
        )));
    }
    Ok(Spectrogram {
        values: left
            .values
            .iter()
            .zip(&right.values)
            .map(|(l, r)| l - r)
            .collect(),
        scale: Scale::Difference,
        ..left.clone()
    })
}

/// Per-frame spectral peak. Inactive frames carry `freq = None`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyTrack {
    pub times: Vec<f64>,
    pub peak_freq: Vec<Option<f64>>,
    pub peak_db: Vec<f64>,
}

impl FrequencyTrack {
    pub fn active(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.times
            .iter()
            .zip(&self.peak_freq)
            .filter_map(|(&t, f)| f.map(|f| (t, f)))
    }

    pub fn active_count(&self) -> usize {
        self.peak_freq.iter().filter(|f| f.is_some()).count()
    }
}

/// Argmax bin per frame of a dB spectrogram.
///
/// A frame is active when its peak lies strictly above the spectrogram's dB floor
/// and within `threshold_db` (a negative offset) of the loudest cell overall.
pub fn track_peak_frequency(spec_db: &Spectrogram, threshold_db: f64) -> FrequencyTrack {
    let floor = match spec_db.scale {
        Scale::Decibels { floor_db } => floor_db,
        _ => f64::NEG_INFINITY,
    };
    let global = spec_db.max_value();
    let gate = global + threshold_db;
    let mut track = FrequencyTrack {
        times: spec_db.frame_times.clone(),
        peak_freq: Vec::with_capacity(spec_db.frames()),
        peak_db: Vec::with_capacity(spec_db.frames()),
    };
    for k in 0..spec_db.frames() {
        let (bin, peak) = spec_db
            .frame(k)
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (b, &v)| {
                if v > best.1 {
                    (b, v)
                } else {
                    best
                }
            });
        let active = peak > floor && peak >= gate;
        track.peak_freq.push(active.then(|| spec_db.bin_freqs[bin]));
        track.peak_db.push(peak);
    }
    track
}

/// Left minus right, sample by sample.
pub fn channel_difference_waveform(buffer: &StereoBuffer) -> MonoBuffer {
    MonoBuffer::new(
        buffer.sample_rate,
        buffer
            .left
            .iter()
            .zip(&buffer.right)
            .map(|(l, r)| l - r)
            .collect(),
    )
}

/// Which channel of a stereo buffer to analyse.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Channel {
    Left,
    Right,
}

pub fn channel(buffer: &StereoBuffer, which: Channel) -> MonoBuffer {
    let samples = match which {
        Channel::Left => buffer.left.clone(),
        Channel::Right => buffer.right.clone(),
    };
    MonoBuffer::new(buffer.sample_rate, samples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chirp::{synth_chirp, sweep_frequency, envelope, ChirpParams};
    use crate::spatial::{spatialize_chirp, PanMode, Position};
    use rand_core::{RngCore, SeedableRng};

    /// Direct evaluation of the DFT definition on one windowed frame.
    fn dft_magnitudes(frame: &[f64]) -> Vec<f64> {
        let n = frame.len();
        (0..=n / 2)
            .map(|k| {
                let (mut re, mut im) = (0.0, 0.0);
                for (j, &x) in frame.iter().enumerate() {
                    // reduce jk mod n to keep the argument small and exact
                    let phase = -TAU * ((j * k) % n) as f64 / n as f64;
                    re += x * libm::cos(phase);
                    im += x * libm::sin(phase);
                }
                libm::hypot(re, im)
            })
            .collect()
    }

    fn tone(freq: f64, len: usize) -> MonoBuffer {
        MonoBuffer::new(
            44100,
            (0..len)
                .map(|k| libm::sin(TAU * freq * k as f64 / 44100.0))
                .collect(),
        )
    }

    #[test]
    fn one_khz_peaks_at_bin_46() {
        let spec = stft(&tone(1000.0, 8192), 2048, 512).unwrap();
        assert_eq!(spec.bins(), 1025);
        assert_eq!(spec.frames(), 13);
        for k in 0..spec.frames() {
            let frame = spec.frame(k);
            let peak = (0..frame.len())
                .max_by(|&a, &b| frame[a].total_cmp(&frame[b]))
                .unwrap();
            assert_eq!(peak, 46);
        }
        // Independent check of the same frame by definition.
        let win = hann(2048);
        let windowed: Vec<f64> = tone(1000.0, 2048).samples.iter().zip(&win).map(|(x, w)| x * w).collect();
        let direct = dft_magnitudes(&windowed);
        let peak = (0..direct.len()).max_by(|&a, &b| direct[a].total_cmp(&direct[b])).unwrap();
        assert_eq!(peak, 46);
    }

    #[test]
    fn fast_transform_matches_definition() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
        let samples: Vec<f64> = (0..2048 * 3)
            .map(|_| (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0)
            .collect();
        let mono = MonoBuffer::new(44100, samples.clone());
        let spec = stft(&mono, 2048, 2048).unwrap();
        let win = hann(2048);
        for k in 0..spec.frames() {
            let windowed: Vec<f64> = samples[k * 2048..(k + 1) * 2048]
                .iter()
                .zip(&win)
                .map(|(x, w)| x * w)
                .collect();
            let direct = dft_magnitudes(&windowed);
            let scale = direct.iter().copied().fold(0.0, f64::max);
            for (a, b) in spec.frame(k).iter().zip(&direct) {
                assert!((a - b).abs() <= 1e-9 * scale, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn parseval_on_one_frame() {
        let mono = tone(3333.0, 2048);
        let spec = stft(&mono, 2048, 512).unwrap();
        let win = hann(2048);
        let time_energy: f64 = mono.samples.iter().zip(&win).map(|(x, w)| (x * w) * (x * w)).sum();
        let f = spec.frame(0);
        let n = 2048;
        let mut freq_energy = f[0] * f[0] + f[n / 2] * f[n / 2];
        for m in &f[1..n / 2] {
            freq_energy += 2.0 * m * m;
        }
        freq_energy /= n as f64;
        assert!((freq_energy - time_energy).abs() < 1e-6 * time_energy);
    }

    #[test]
    fn silence_has_zero_magnitude_and_floor_db() {
        let mono = MonoBuffer::new(44100, vec![0.0; 4096]);
        let spec = stft(&mono, 2048, 512).unwrap();
        assert!(spec.values.iter().all(|&m| m == 0.0));
        let db = to_db(&spec, DEFAULT_EPSILON).unwrap();
        assert!(db.values.iter().all(|&v| v == -320.0));
        assert_eq!(db.scale, Scale::Decibels { floor_db: -320.0 });
        assert_eq!(track_peak_frequency(&db, -60.0).active_count(), 0);
    }

    #[test]
    fn stft_rejects_bad_arguments() {
        let mono = tone(1000.0, 4096);
        assert!(stft(&mono, 1000, 100).is_err());
        assert!(stft(&mono, 1024, 0).is_err());
        assert!(stft(&mono, 1024, 2048).is_err());
        assert!(matches!(stft(&tone(1000.0, 100), 2048, 512), Err(Error::TooShort { .. })));
    }

    #[test]
    fn bin_spacing() {
        let spec = stft(&tone(1000.0, 4096), 2048, 512).unwrap();
        for pair in spec.bin_freqs.windows(2) {
            assert!((pair[1] - pair[0] - 44100.0 / 2048.0).abs() < 1e-9);
        }
        assert_eq!(spec.frame_times[0], 1024.0 / 44100.0);
    }

    #[test]
    fn db_examples() {
        let spec = Spectrogram {
            sample_rate: 8,
            window_size: 4,
            hop: 4,
            frame_times: vec![0.25],
            bin_freqs: vec![0.0, 2.0, 4.0],
            values: vec![1.0, 0.0, 10.0],
            scale: Scale::Magnitude,
        };
        let db = to_db(&spec, 1e-16).unwrap();
        assert_eq!(db.values[0], 0.0);
        assert_eq!(db.values[1], -320.0);
        assert!((db.values[2] - 20.0).abs() < 1e-12);
        assert!(to_db(&spec, 0.0).is_err());
    }

    #[test]
    fn diff_examples() {
        let mono = tone(2500.0, 6000);
        let db = to_db(&stft(&mono, 1024, 256).unwrap(), DEFAULT_EPSILON).unwrap();
        let d = diff_spectrogram(&db, &db).unwrap();
        assert!(d.values.iter().all(|&v| v == 0.0));

        let silent = to_db(&stft(&MonoBuffer::new(44100, vec![0.0; 6000]), 1024, 256).unwrap(), DEFAULT_EPSILON).unwrap();
        let d = diff_spectrogram(&db, &silent).unwrap();
        for (v, l) in d.values.iter().zip(&db.values) {
            assert_eq!(*v, l + 320.0);
        }

        let other = to_db(&stft(&mono, 2048, 256).unwrap(), DEFAULT_EPSILON).unwrap();
        assert!(diff_spectrogram(&db, &other).is_err());
    }

    #[test]
    fn hard_left_source_has_non_negative_diff() {
        let p = ChirpParams::new(2000.0, 3000.0, 0.3, 4.0, 0.05, 2.0).unwrap();
        let mono = synth_chirp(&p, 44100).unwrap();
        let stereo = spatialize_chirp(&mono, &Position::ORIGIN, PanMode::HalfAngle).unwrap();
        let l = to_db(&stft(&channel(&stereo, Channel::Left), 2048, 512).unwrap(), DEFAULT_EPSILON).unwrap();
        let r = to_db(&stft(&channel(&stereo, Channel::Right), 2048, 512).unwrap(), DEFAULT_EPSILON).unwrap();
        let d = diff_spectrogram(&l, &r).unwrap();
        let mut active = 0;
        for (cell, lv) in d.values.iter().zip(&l.values) {
            if *lv > -320.0 {
                active += 1;
                assert!(*cell > 0.0);
            }
        }
        assert!(active > 0);
    }

    #[test]
    fn constant_tone_track() {
        let p = ChirpParams::new(2000.0, 2000.0, 0.5, 3.0, 0.0, 2.0).unwrap();
        let mono = synth_chirp(&p, 44100).unwrap();
        let db = to_db(&stft(&mono, 2048, 512).unwrap(), DEFAULT_EPSILON).unwrap();
        let track = track_peak_frequency(&db, DEFAULT_TRACK_THRESHOLD_DB);
        let bin = db.bin_width();
        assert!(track.active_count() > 0);
        for (_, f) in track.active() {
            assert!((f - 2000.0).abs() <= bin, "{f}");
        }
    }

    #[test]
    fn sweep_is_recovered_within_one_bin() {
        let p = ChirpParams::sweep(1500.0, 6000.0, 0.8).unwrap();
        let mono = synth_chirp(&p, 44100).unwrap();
        let db = to_db(&stft(&mono, 2048, 512).unwrap(), DEFAULT_EPSILON).unwrap();
        let track = track_peak_frequency(&db, DEFAULT_TRACK_THRESHOLD_DB);
        let (mut considered, mut hits) = (0, 0);
        for (k, &t) in track.times.iter().enumerate() {
            if t > p.duration() || envelope(&p, t).unwrap() <= 0.5 {
                continue;
            }
            considered += 1;
            let expect = sweep_frequency(&p, t).unwrap();
            if let Some(f) = track.peak_freq[k] {
                if (f - expect).abs() <= db.bin_width() {
                    hits += 1;
                }
            }
        }
        assert!(considered > 10);
        assert!(hits as f64 >= 0.95 * considered as f64, "{hits}/{considered}");
    }

    #[test]
    fn channel_difference_examples() {
        let b = StereoBuffer { sample_rate: 10, left: vec![0.5, -0.25], right: vec![0.5, -0.25] };
        assert!(channel_difference_waveform(&b).samples.iter().all(|&s| s == 0.0));
        let b = StereoBuffer { sample_rate: 10, left: vec![0.5, -0.25], right: vec![0.0, 0.0] };
        assert_eq!(channel_difference_waveform(&b).samples, b.left);

        let p = ChirpParams::new(2000.0, 3000.0, 0.1, 4.0, 0.05, 2.0).unwrap();
        let mono = synth_chirp(&p, 44100).unwrap();
        let centred = spatialize_chirp(&mono, &Position::new(0.0, 2.0, 0.0), PanMode::HalfAngle).unwrap();
        assert!(channel_difference_waveform(&centred).samples.iter().all(|s| s.abs() < 1e-12));
    }

    #[test]
    fn pooled_stereo_matches_unpanned_source() {
        let p = ChirpParams::new(1000.0, 2500.0, 0.2, 5.0, 0.05, 2.0).unwrap();
        let mono = synth_chirp(&p, 44100).unwrap();
        let reference = stft(&mono, 1024, 256).unwrap();
        // theta = -pi/2: the two half-angle gains have opposite signs, so L + R cancels.
        let panned = spatialize_chirp(&mono, &Position::new(0.0, -1.0, 0.0), PanMode::HalfAngle).unwrap();
        let pooled = stft_stereo(&panned, 1024, 256).unwrap();
        let peak = reference.max_value();
        for (a, b) in pooled.values.iter().zip(&reference.values) {
            assert!((a - 0.5 * b).abs() <= 1e-9 * peak);
        }
    }

    #[test]
    fn grid_is_rebuilt_from_cells() {
        let mono = MonoBuffer::new(8000, (0..4096).map(|k| (k as f64 * 0.3).sin()).collect());
        let spec = to_db(&stft(&mono, 512, 128).unwrap(), DEFAULT_EPSILON).unwrap();
        let back = Spectrogram::from_cells(8000, 512, 128, spec.values.clone(), spec.scale).unwrap();
        assert_eq!(back, spec);
        assert!(Spectrogram::from_cells(8000, 512, 128, vec![0.0; 5], Scale::Magnitude).is_err());
    }
}
