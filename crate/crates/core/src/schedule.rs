//! Expansion of species profiles into a seeded score of chirp events.
//!
//! Bird ids are assigned in species order (species 0's birds first). Each bird draws
//! from its own [`Stream`](crate::rng::Stream) keyed by `(seed, bird_id)`, in this
//! order:
//!
//! 1. base position `x, y, z` (uniform in the scene bounds)
//! 2. motion amplitude per axis, then motion rate per axis
//! 3. motion phase per axis, only when phase randomization is enabled
//! 4. first onset, uniform in `[0, pause_max]`
//! 5. per chirp: `f0, f1, duration, trill_rate`, then the following pause
//!
//! Appending a species therefore never changes the schedule of existing birds.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::TAU;

use crate::chirp::{chirp_len, ChirpParams};
use crate::error::{Error, Result};
use crate::rng::Stream;
use crate::spatial::{position_at, PanMode, Position, Trajectory};

/// Closed interval `[min, max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamRange {
    pub min: f64,
    pub max: f64,
}

impl ParamRange {
    pub const fn new(min: f64, max: f64) -> Self {
        Self { min, max }
    }

    pub const fn fixed(value: f64) -> Self {
        Self {
            min: value,
            max: value,
        }
    }

    pub fn contains(&self, v: f64) -> bool {
        v >= self.min && v <= self.max
    }

    pub fn span(&self) -> f64 {
        self.max - self.min
    }

    fn sample(&self, rng: &mut Stream) -> f64 {
        rng.uniform(self.min, self.max)
    }

    fn check_ordered(&self, field: &str) -> Result<()> {
        if !(self.min.is_finite() && self.max.is_finite()) {
            return Err(Error::Config(format!("{field}: bounds must be finite")));
        }
        if self.min > self.max {
            return Err(Error::Config(format!(
                "{field}: min {} > max {}",
                self.min, self.max
            )));
        }
        Ok(())
    }

    fn check_positive(&self, field: &str) -> Result<()> {
        self.check_ordered(field)?;
        if self.min <= 0.0 {
            return Err(Error::Config(format!("{field}: min must be > 0")));
        }
        Ok(())
    }

    fn check_non_negative(&self, field: &str) -> Result<()> {
        self.check_ordered(field)?;
        if self.min < 0.0 {
            return Err(Error::Config(format!("{field}: min must be >= 0")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpeciesProfile {
    pub name: String,
    pub freq_range: ParamRange,
    pub duration_range: ParamRange,
    pub trill_rate_range: ParamRange,
    pub pause_range: ParamRange,
    pub bird_count: usize,
    pub trill_amp: f64,
    pub env_exponent: f64,
}

impl SpeciesProfile {
    pub const DEFAULT_PAUSE: ParamRange = ParamRange::new(0.5, 2.0);

    pub fn validate(&self) -> Result<()> {
        let field = |f: &str| format!("species {:?}: {f}", self.name);
        self.freq_range.check_positive(&field("freq_range"))?;
        self.duration_range.check_positive(&field("duration_range"))?;
        self.trill_rate_range.check_positive(&field("trill_rate_range"))?;
        self.pause_range.check_non_negative(&field("pause_range"))?;
        if self.bird_count == 0 {
            return Err(Error::Config(field("bird_count must be >= 1")));
        }
        if !(0.0..1.0).contains(&self.trill_amp) {
            return Err(Error::Config(field("trill_amp must lie in [0, 1)")));
        }
        if !(self.env_exponent.is_finite() && self.env_exponent > 0.0) {
            return Err(Error::Config(field("env_exponent must be > 0")));
        }
        Ok(())
    }
}

/// Axis-aligned box that initial bird positions are drawn from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    pub x: ParamRange,
    pub y: ParamRange,
    pub z: ParamRange,
}

impl Default for Bounds {
    fn default() -> Self {
        Self {
            x: ParamRange::new(-1.0, 1.0),
            y: ParamRange::new(-1.0, 1.0),
            z: ParamRange::new(0.3, 1.5),
        }
    }
}

/// Ranges that per-bird trajectory parameters are drawn from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryDefaults {
    pub amplitude: ParamRange,
    pub rate: ParamRange,
    pub randomize_phase: bool,
}

impl Default for TrajectoryDefaults {
    fn default() -> Self {
        Self {
            amplitude: ParamRange::new(0.2, 0.8),
            rate: ParamRange::new(0.01, 0.1),
            randomize_phase: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneConfig {
    pub duration_s: f64,
    pub sample_rate: u32,
    pub pan_mode: PanMode,
    pub bounds: Bounds,
    pub trajectory: TrajectoryDefaults,
    pub species: Vec<SpeciesProfile>,
}

impl SceneConfig {
    pub const MIN_SAMPLE_RATE: u32 = 8000;

    pub fn validate(&self) -> Result<()> {
        if !(self.duration_s.is_finite() && self.duration_s > 0.0) {
            return Err(Error::Config(format!(
                "scene.duration_s: {} must be > 0",
                self.duration_s
            )));
        }
        if self.sample_rate < Self::MIN_SAMPLE_RATE {
            return Err(Error::Config(format!(
                "scene.sample_rate: {} must be >= {}",
                self.sample_rate,
                Self::MIN_SAMPLE_RATE
            )));
        }
        if self.species.is_empty() {
            return Err(Error::Config("species: list must not be empty".into()));
        }
        self.bounds.x.check_ordered("scene.bounds.x")?;
        self.bounds.y.check_ordered("scene.bounds.y")?;
        self.bounds.z.check_ordered("scene.bounds.z")?;
        self.trajectory
            .amplitude
            .check_non_negative("trajectory.amplitude")?;
        self.trajectory.rate.check_non_negative("trajectory.rate")?;
        if self.trajectory.rate.max > Trajectory::MAX_RATE {
            return Err(Error::Config(format!(
                "trajectory.rate: max {} exceeds {} Hz",
                self.trajectory.rate.max,
                Trajectory::MAX_RATE
            )));
        }
        let nyquist = 0.5 * f64::from(self.sample_rate);
        for s in &self.species {
            s.validate()?;
            let top = s.freq_range.max * (1.0 + s.trill_amp);
            if top > nyquist {
                return Err(Error::Config(format!(
                    "species {:?}: freq_range max {} Hz with trill reaches {top} Hz, above Nyquist {nyquist} Hz",
                    s.name, s.freq_range.max
                )));
            }
        }
        Ok(())
    }

    pub fn total_birds(&self) -> usize {
        self.species.iter().map(|s| s.bird_count).sum()
    }

    /// Number of frames in the rendered scene.
    pub fn frames(&self) -> usize {
        chirp_len(self.duration_s, self.sample_rate)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChirpEvent {
    pub species_id: usize,
    pub bird_id: usize,
    pub onset: f64,
    pub params: ChirpParams,
    pub position: Position,
}

impl ChirpEvent {
    /// End of the half-open interval `[onset, onset + duration)`.
    pub fn end(&self) -> f64 {
        self.onset + self.params.duration()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Bird {
    pub bird_id: usize,
    pub species_id: usize,
    /// 1-based index of the bird within its species.
    pub ordinal: usize,
    pub trajectory: Trajectory,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneScore {
    pub duration: f64,
    pub sample_rate: u32,
    pub seed: u64,
    pub birds: Vec<Bird>,
    pub events: Vec<ChirpEvent>,
}

impl SceneScore {
    pub fn frames(&self) -> usize {
        chirp_len(self.duration, self.sample_rate)
    }

    pub fn events_for(&self, bird_id: usize) -> impl Iterator<Item = &ChirpEvent> + '_ {
        self.events.iter().filter(move |e| e.bird_id == bird_id)
    }
}

/// Draw one chirp's parameters from a species profile.
pub fn sample_chirp_params(species: &SpeciesProfile, rng: &mut Stream) -> Result<ChirpParams> {
    let f0 = species.freq_range.sample(rng);
    let f1 = species.freq_range.sample(rng);
    let duration = species.duration_range.sample(rng);
    let trill_rate = species.trill_rate_range.sample(rng);
    ChirpParams::new(
        f0,
        f1,
        duration,
        trill_rate,
        species.trill_amp,
        species.env_exponent,
    )
}

/// Draw a trajectory for one bird.
pub fn sample_trajectory(
    bounds: &Bounds,
    defaults: &TrajectoryDefaults,
    rng: &mut Stream,
) -> Trajectory {
    let base = Position::new(
        bounds.x.sample(rng),
        bounds.y.sample(rng),
        bounds.z.sample(rng),
    );
    let mut amplitude = [0.0; 3];
    for a in &mut amplitude {
        *a = defaults.amplitude.sample(rng);
    }
    let mut rate = [0.0; 3];
    for r in &mut rate {
        *r = defaults.rate.sample(rng);
    }
    let mut phase = [0.0; 3];
    if defaults.randomize_phase {
        for p in &mut phase {
            *p = TAU * rng.unit();
        }
    }
    Trajectory {
        base,
        amplitude,
        rate,
        phase,
    }
}

/// Sequential chirp schedule for one bird.
///
/// Stops as soon as the next chirp would end after `scene_duration`, either in
/// continuous time or once onset and length are rounded to samples.
pub fn schedule_bird(
    species: &SpeciesProfile,
    species_id: usize,
    bird_id: usize,
    trajectory: &Trajectory,
    scene_duration: f64,
    sample_rate: u32,
    rng: &mut Stream,
) -> Result<Vec<ChirpEvent>> {
    let frames = chirp_len(scene_duration, sample_rate);
    let fs = f64::from(sample_rate);
    let mut events = Vec::new();
    let mut onset = rng.uniform(0.0, species.pause_range.max);
    loop {
        let params = sample_chirp_params(species, rng)?;
        let end_sample = libm::round(onset * fs) as usize + chirp_len(params.duration(), sample_rate);
        if onset + params.duration() > scene_duration || end_sample > frames {
            break;
        }
        events.push(ChirpEvent {
            species_id,
            bird_id,
            onset,
            params,
            position: position_at(trajectory, onset),
        });
        onset += params.duration() + species.pause_range.sample(rng);
    }
    Ok(events)
}

/// Build the complete score for a scene. Pure in `(config, seed)`.
pub fn build_scene(config: &SceneConfig, seed: u64) -> Result<SceneScore> {
    config.validate()?;
    let mut birds = Vec::with_capacity(config.total_birds());
    let mut events = Vec::new();
    let mut bird_id = 0;
    for (species_id, species) in config.species.iter().enumerate() {
        for ordinal in 1..=species.bird_count {
            let mut rng = Stream::for_bird(seed, bird_id);
            let trajectory = sample_trajectory(&config.bounds, &config.trajectory, &mut rng);
            events.extend(schedule_bird(
                species,
                species_id,
                bird_id,
                &trajectory,
                config.duration_s,
                config.sample_rate,
                &mut rng,
            )?);
            birds.push(Bird {
                bird_id,
                species_id,
                ordinal,
                trajectory,
            });
            bird_id += 1;
        }
    }
    events.sort_by(|a, b| a.onset.total_cmp(&b.onset).then(a.bird_id.cmp(&b.bird_id)));
    Ok(SceneScore {
        duration: config.duration_s,
        sample_rate: config.sample_rate,
        seed,
        birds,
        events,
    })
}

/// The five-species scene of the reference experiment: 20 s at 44.1 kHz.
pub fn reference_scene() -> SceneConfig {
    let species = |name: &str, freq: (f64, f64), dur: (f64, f64), trill: (f64, f64), count| {
        SpeciesProfile {
            name: name.into(),
            freq_range: ParamRange::new(freq.0, freq.1),
            duration_range: ParamRange::new(dur.0, dur.1),
            trill_rate_range: ParamRange::new(trill.0, trill.1),
            pause_range: SpeciesProfile::DEFAULT_PAUSE,
            bird_count: count,
            trill_amp: ChirpParams::DEFAULT_TRILL_AMP,
            env_exponent: ChirpParams::DEFAULT_ENV_EXPONENT,
        }
    };
    SceneConfig {
        duration_s: 20.0,
        sample_rate: 44100,
        pan_mode: PanMode::default(),
        bounds: Bounds::default(),
        trajectory: TrajectoryDefaults::default(),
        species: alloc::vec![
            species("Bird A", (400.0, 1200.0), (0.6, 1.0), (5.0, 10.0), 1),
            species("Bird B", (3000.0, 8000.0), (0.6, 1.0), (2.0, 6.0), 2),
            species("Bird C", (2000.0, 10000.0), (0.1, 0.3), (4.0, 7.0), 1),
            species("Bird D", (1000.0, 4000.0), (0.2, 0.4), (1.0, 3.0), 1),
            species("Bird E", (3500.0, 7500.0), (0.1, 0.3), (2.0, 7.0), 2),
        ],
    }
}
