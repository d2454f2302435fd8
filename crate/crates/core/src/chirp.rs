//! Single-chirp synthesis.
//!
//! A chirp sweeps linearly from `f0` to `f1` over `duration` seconds. A sinusoidal
//! trill multiplies the sweep by `1 + a*sin(2*pi*r*t)`, the phase is the running
//! integral of that instantaneous frequency, and a `sin^n(pi*t/T)` envelope fades
//! the tone in and out.

use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};

use crate::error::{Error, Result};

/// Spectral and temporal recipe for one chirp.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChirpParams {
    f0: f64,
    f1: f64,
    duration: f64,
    trill_rate: f64,
    trill_amp: f64,
    env_exponent: f64,
}

impl ChirpParams {
    pub const DEFAULT_TRILL_AMP: f64 = 0.05;
    pub const DEFAULT_ENV_EXPONENT: f64 = 2.0;

    pub fn new(
        f0: f64,
        f1: f64,
        duration: f64,
        trill_rate: f64,
        trill_amp: f64,
        env_exponent: f64,
    ) -> Result<Self> {
        fn positive(what: &'static str, value: f64) -> Result<()> {
            if value.is_finite() && value > 0.0 {
                Ok(())
            } else {
                Err(Error::Domain {
                    what,
                    value,
                    domain: "(0, inf)",
                })
            }
        }
        positive("f0", f0)?;
        positive("f1", f1)?;
        positive("duration", duration)?;
        positive("env_exponent", env_exponent)?;
        if !(trill_rate.is_finite() && trill_rate >= 0.0) {
            return Err(Error::Domain {
                what: "trill_rate",
                value: trill_rate,
                domain: "[0, inf)",
            });
        }
        if !(0.0..1.0).contains(&trill_amp) {
            return Err(Error::Domain {
                what: "trill_amp",
                value: trill_amp,
                domain: "[0, 1)",
            });
        }
        Ok(Self {
            f0,
            f1,
            duration,
            trill_rate,
            trill_amp,
            env_exponent,
        })
    }

    /// A pure sweep: no trill, default envelope.
    pub fn sweep(f0: f64, f1: f64, duration: f64) -> Result<Self> {
        Self::new(f0, f1, duration, 0.0, 0.0, Self::DEFAULT_ENV_EXPONENT)
    }

    pub fn f0(&self) -> f64 {
        self.f0
    }

    pub fn f1(&self) -> f64 {
        self.f1
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn trill_rate(&self) -> f64 {
        self.trill_rate
    }

    pub fn trill_amp(&self) -> f64 {
        self.trill_amp
    }

    pub fn env_exponent(&self) -> f64 {
        self.env_exponent
    }

    /// Upper bound of the instantaneous frequency over the whole chirp.
    pub fn max_frequency(&self) -> f64 {
        self.f0.max(self.f1) * (1.0 + self.trill_amp)
    }

    fn check_time(&self, t: f64) -> Result<()> {
        if (0.0..=self.duration).contains(&t) {
            Ok(())
        } else {
            Err(Error::Domain {
                what: "t",
                value: t,
                domain: "[0, duration]",
            })
        }
    }

    #[inline]
    fn sweep_unchecked(&self, t: f64) -> f64 {
        self.f0 + (self.f1 - self.f0) * t / self.duration
    }

    #[inline]
    fn trill_unchecked(&self, t: f64) -> f64 {
        self.sweep_unchecked(t) * (1.0 + self.trill_amp * libm::sin(TAU * self.trill_rate * t))
    }

    #[inline]
    fn envelope_unchecked(&self, t: f64) -> f64 {
        // Folding around T/2 makes both endpoints exactly zero.
        let x = t / self.duration;
        let s = libm::sin(PI * x.min(1.0 - x)).max(0.0);
        if self.env_exponent == 2.0 {
            s * s
        } else {
            libm::pow(s, self.env_exponent)
        }
    }
}

/// Mono samples at a fixed rate.
#[derive(Debug, Clone, PartialEq)]
pub struct MonoBuffer {
    pub sample_rate: u32,
    pub samples: Vec<f64>,
}

impl MonoBuffer {
    pub fn new(sample_rate: u32, samples: Vec<f64>) -> Self {
        Self {
            sample_rate,
            samples,
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|s| s * s).sum()
    }
}

/// Linear sweep frequency `f0 + (f1 - f0) * t / T`.
pub fn sweep_frequency(params: &ChirpParams, t: f64) -> Result<f64> {
    params.check_time(t)?;
    Ok(params.sweep_unchecked(t))
}

/// Sweep frequency with trill modulation applied.
pub fn trill_frequency(params: &ChirpParams, t: f64) -> Result<f64> {
    params.check_time(t)?;
    Ok(params.trill_unchecked(t))
}

/// Amplitude envelope `sin^n(pi * t / T)`.
pub fn envelope(params: &ChirpParams, t: f64) -> Result<f64> {
    params.check_time(t)?;
    Ok(params.envelope_unchecked(t))
}

/// Closed-form instantaneous phase `2*pi * integral_0^t f_trill`.
///
/// The trill term integrates by parts:
/// `int_0^t (f0 + k*tau) sin(w*tau) dtau
///   = f0 (1 - cos wt)/w - k t cos(wt)/w + k sin(wt)/w^2`
/// with `k = (f1 - f0)/T`, `w = 2*pi*r`.
pub fn chirp_phase(params: &ChirpParams, t: f64) -> Result<f64> {
    params.check_time(t)?;
    let k = (params.f1 - params.f0) / params.duration;
    let sweep = params.f0 * t + 0.5 * k * t * t;
    let trill = if params.trill_rate > 0.0 && params.trill_amp > 0.0 {
        let w = TAU * params.trill_rate;
        let (s, c) = libm::sincos(w * t);
        params.f0 * (1.0 - c) / w - k * t * c / w + k * s / (w * w)
    } else {
        0.0
    };
    Ok(TAU * (sweep + params.trill_amp * trill))
}

/// Number of samples a chirp occupies: `round(T * sample_rate)`.
pub fn chirp_len(duration: f64, sample_rate: u32) -> usize {
    libm::round(duration * f64::from(sample_rate)) as usize
}

fn check_nyquist(params: &ChirpParams, sample_rate: u32) -> Result<()> {
    let nyquist = 0.5 * f64::from(sample_rate);
    let top = params.max_frequency();
    if top > nyquist {
        return Err(Error::Nyquist {
            frequency: top,
            nyquist,
        });
    }
    Ok(())
}

/// Discrete phase accumulated by the trapezoidal rule on the grid `t_k = k / fs`.
///
/// Returns `len + 1` values: entry `k` is the phase at `t_k`, the extra last entry is
/// the phase at the end of the buffer (`t = len / fs`).
pub fn phase_track(params: &ChirpParams, sample_rate: u32) -> Result<Vec<f64>> {
    check_nyquist(params, sample_rate)?;
    let n = chirp_len(params.duration, sample_rate);
    let fs = f64::from(sample_rate);
    let half_step = TAU / (2.0 * fs);
    let mut phase = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    let mut prev = params.trill_unchecked(0.0);
    phase.push(acc);
    for k in 1..=n {
        let f = params.trill_unchecked(k as f64 / fs);
        acc += half_step * (prev + f);
        prev = f;
        phase.push(acc);
    }
    Ok(phase)
}

/// Synthesize one chirp: sample `k` is `A(t_k) * sin(phi[k])`.
pub fn synth_chirp(params: &ChirpParams, sample_rate: u32) -> Result<MonoBuffer> {
    let phase = phase_track(params, sample_rate)?;
    let fs = f64::from(sample_rate);
    let n = phase.len() - 1;
    let samples = phase[..n]
        .iter()
        .enumerate()
        .map(|(k, &phi)| params.envelope_unchecked(k as f64 / fs) * libm::sin(phi))
        .collect();
    Ok(MonoBuffer::new(sample_rate, samples))
}
