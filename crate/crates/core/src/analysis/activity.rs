use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::schedule::ChirpEvent;

/// Chirp intervals `[onset, onset + duration)` of one bird.
#[derive(Debug, Clone, PartialEq)]
pub struct BirdActivity {
    pub bird_id: usize,
    pub species_id: usize,
    pub intervals: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpeciesStats {
    pub species_id: usize,
    pub count: usize,
    pub mean_duration: f64,
    /// Mean gap between consecutive chirps of the same bird; `None` when no bird of
    /// the species chirped twice.
    pub mean_pause: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ActivitySummary {
    /// Sorted by bird id.
    pub birds: Vec<BirdActivity>,
    /// Sorted by species id.
    pub species: Vec<SpeciesStats>,
}

impl ActivitySummary {
    pub fn is_empty(&self) -> bool {
        self.birds.is_empty()
    }

    pub fn bird(&self, bird_id: usize) -> Option<&BirdActivity> {
        self.birds.iter().find(|b| b.bird_id == bird_id)
    }
}

pub fn activity_summary(events: &[ChirpEvent]) -> ActivitySummary {
    let mut birds: BTreeMap<usize, BirdActivity> = BTreeMap::new();
    for e in events {
        birds
            .entry(e.bird_id)
            .or_insert_with(|| BirdActivity {
                bird_id: e.bird_id,
                species_id: e.species_id,
                intervals: Vec::new(),
            })
            .intervals
            .push((e.onset, e.end()));
    }

    // (count, duration sum, pause count, pause sum)
    let mut acc: BTreeMap<usize, (usize, f64, usize, f64)> = BTreeMap::new();
    for bird in birds.values_mut() {
        bird.intervals.sort_by(|a, b| a.0.total_cmp(&b.0));
        let entry = acc.entry(bird.species_id).or_default();
        for &(start, end) in &bird.intervals {
            entry.0 += 1;
            entry.1 += end - start;
        }
        for pair in bird.intervals.windows(2) {
            entry.2 += 1;
            entry.3 += pair[1].0 - pair[0].1;
        }
    }

    ActivitySummary {
        birds: birds.into_values().collect(),
        species: acc
            .into_iter()
            .map(|(species_id, (n, dur, np, pause))| SpeciesStats {
                species_id,
                count: n,
                mean_duration: dur / n as f64,
                mean_pause: (np > 0).then(|| pause / np as f64),
            })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chirp::ChirpParams;
    use crate::schedule::{build_scene, reference_scene};
    use crate::spatial::Position;
    use alloc::vec;

    fn event(bird: usize, species: usize, onset: f64, dur: f64) -> ChirpEvent {
        ChirpEvent {
            species_id: species,
            bird_id: bird,
            onset,
            params: ChirpParams::sweep(1000.0, 1000.0, dur).unwrap(),
            position: Position::ORIGIN,
        }
    }

    #[test]
    fn empty_events() {
        assert!(activity_summary(&[]).is_empty());
        assert!(activity_summary(&[]).species.is_empty());
    }

    #[test]
    fn single_events_have_no_pause() {
        let s = activity_summary(&[event(0, 0, 1.0, 0.5), event(1, 1, 2.0, 0.25)]);
        assert_eq!(s.birds.len(), 2);
        assert_eq!(s.birds[0].intervals, vec![(1.0, 1.5)]);
        for st in &s.species {
            assert_eq!(st.count, 1);
            assert_eq!(st.mean_pause, None);
        }
    }

    #[test]
    fn pauses_are_within_bird() {
        let s = activity_summary(&[
            event(0, 0, 0.0, 1.0),
            event(1, 0, 0.5, 1.0),
            event(0, 0, 2.0, 1.0),
            event(1, 0, 4.5, 1.0),
        ]);
        let st = &s.species[0];
        assert_eq!(st.count, 4);
        assert_eq!(st.mean_duration, 1.0);
        // gaps: bird 0 -> 1.0, bird 1 -> 3.0
        assert_eq!(st.mean_pause, Some(2.0));
    }

    #[test]
    fn reference_scene_means_follow_ranges() {
        let cfg = reference_scene();
        let score = build_scene(&cfg, 42).unwrap();
        let s = activity_summary(&score.events);
        for bird in &s.birds {
            let range = cfg.species[bird.species_id].duration_range;
            let mean = bird.intervals.iter().map(|(a, b)| b - a).sum::<f64>()
                / bird.intervals.len() as f64;
            assert!(range.contains(mean) || (mean - range.min).abs() < 1e-12 || (mean - range.max).abs() < 1e-12);
        }
        let total: usize = s.species.iter().map(|st| st.count).sum();
        assert_eq!(total, score.events.len());
    }
}
