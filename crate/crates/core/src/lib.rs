//! Deterministic multi-species bird soundscape synthesis.
//!
//! This crate is `no_std` (with `alloc`) and holds the whole signal path:
//!
//! - [`chirp`] - linear sweep + trill FM chirps with a `sin^n` envelope
//! - [`spatial`] - sinusoidal 3D trajectories, inverse-distance attenuation and
//!   equal-power panning
//! - [`schedule`] - seeded expansion of species profiles into a score of chirp events
//! - [`mix`] - per-bird track rendering, fixed-order summation and peak normalization
//! - [`analysis`] - radix-2 FFT, STFT spectrograms, dB conversion, peak tracking and
//!   activity summaries
//!
//! All floating point math goes through `libm`, so results do not depend on the
//! platform's `std` math library. Given the same [`schedule::SceneConfig`] and seed the
//! rendered samples are bit-identical.
//!
//! File formats, configuration files and the command line live in the `aviary` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod analysis;
pub mod chirp;
pub mod error;
pub mod mix;
pub mod rng;
pub mod schedule;
pub mod spatial;

pub use chirp::{ChirpParams, MonoBuffer};
pub use error::{Error, Result};
pub use mix::{BirdTrack, Normalized, StereoBuffer};
pub use schedule::{Bird, ChirpEvent, ParamRange, SceneConfig, SceneScore, SpeciesProfile};
pub use spatial::{PanGains, PanMode, Position, Trajectory};
