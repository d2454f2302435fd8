//! Figures: SVG line plots and PPM spectrogram images.

pub mod palette;
pub mod raster;
pub mod svg;

use aviary_core::analysis::{ActivitySummary, FrequencyTrack};
use aviary_core::spatial::position_at;
use aviary_core::{MonoBuffer, Position, SceneScore, StereoBuffer};

pub use palette::{qualitative, Palette};
pub use raster::{render_spectrogram_image, Ppm};
use svg::Svg;

/// Display range of channel spectrograms, in dB.
pub const SPECTROGRAM_RANGE_DB: (f64, f64) = (-320.0, -100.0);
/// Display range of the left-minus-right spectrogram, in dB.
pub const DIFF_RANGE_DB: (f64, f64) = (-20.0, 20.0);
pub const MAX_WAVEFORM_COLUMNS: usize = 4000;
pub const DEFAULT_PATH_SAMPLES: usize = 400;

/// Rotation about the vertical axis for the oblique trajectory view.
pub const OBLIQUE_AZIMUTH_DEG: f64 = 45.0;
/// Tilt of the oblique view above the horizontal plane.
pub const OBLIQUE_ELEVATION_DEG: f64 = 30.0;

/// How scene coordinates are flattened onto the page.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Projection {
    /// Orthographic: rotate by [`OBLIQUE_AZIMUTH_DEG`] about z, then tilt by
    /// [`OBLIQUE_ELEVATION_DEG`]. `u = x cos a - y sin a`,
    /// `v = (x sin a + y cos a) sin e + z cos e`.
    Oblique,
    Xy,
    Xz,
    Yz,
}

impl Projection {
    pub fn project(&self, p: &Position) -> (f64, f64) {
        match self {
            Projection::Oblique => {
                let (a, e) = (
                    OBLIQUE_AZIMUTH_DEG.to_radians(),
                    OBLIQUE_ELEVATION_DEG.to_radians(),
                );
                let u = p.x * a.cos() - p.y * a.sin();
                let v = (p.x * a.sin() + p.y * a.cos()) * e.sin() + p.z * e.cos();
                (u, v)
            }
            Projection::Xy => (p.x, p.y),
            Projection::Xz => (p.x, p.z),
            Projection::Yz => (p.y, p.z),
        }
    }

    fn axis_names(&self) -> (&'static str, &'static str) {
        match self {
            Projection::Oblique => ("", ""),
            Projection::Xy => ("x", "y"),
            Projection::Xz => ("x", "z"),
            Projection::Yz => ("y", "z"),
        }
    }

    fn title(&self) -> &'static str {
        match self {
            Projection::Oblique => "Bird trajectories (3D, orthographic)",
            Projection::Xy => "Bird trajectories, x-y plane",
            Projection::Xz => "Bird trajectories, x-z plane",
            Projection::Yz => "Bird trajectories, y-z plane",
        }
    }
}

/// Label and colour for one bird.
#[derive(Debug, Clone, PartialEq)]
pub struct BirdStyle {
    pub bird_id: usize,
    pub species_id: usize,
    pub label: String,
}

/// Maps a data rectangle onto a pixel rectangle (y grows downwards on the page).
struct Frame {
    x0: f64,
    y0: f64,
    w: f64,
    h: f64,
    xmin: f64,
    xmax: f64,
    ymin: f64,
    ymax: f64,
}

impl Frame {
    fn x(&self, v: f64) -> f64 {
        self.x0 + (v - self.xmin) / (self.xmax - self.xmin) * self.w
    }

    fn y(&self, v: f64) -> f64 {
        self.y0 + self.h - (v - self.ymin) / (self.ymax - self.ymin) * self.h
    }
}

fn padded(lo: f64, hi: f64) -> (f64, f64) {
    let span = (hi - lo).max(1e-6);
    (lo - 0.08 * span, hi + 0.08 * span)
}

/// Trajectory plot. Moving birds become one polyline with `samples_per_path`
/// vertices each; stationary birds become a single point marker.
pub fn plot_trajectories(
    score: &SceneScore,
    styles: &[BirdStyle],
    samples_per_path: usize,
    projection: Projection,
) -> Result<String, String> {
    if samples_per_path < 2 {
        return Err("samples_per_path must be at least 2".into());
    }
    let paths: Vec<Vec<(f64, f64)>> = score
        .birds
        .iter()
        .map(|b| {
            (0..samples_per_path)
                .map(|i| {
                    let t = score.duration * i as f64 / (samples_per_path - 1) as f64;
                    projection.project(&position_at(&b.trajectory, t))
                })
                .collect()
        })
        .collect();
    let (mut umin, mut umax, mut vmin, mut vmax) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for &(u, v) in paths.iter().flatten() {
        umin = umin.min(u);
        umax = umax.max(u);
        vmin = vmin.min(v);
        vmax = vmax.max(v);
    }
    let (umin, umax) = padded(umin, umax);
    let (vmin, vmax) = padded(vmin, vmax);

    let (width, height) = (820.0, 620.0);
    let frame = Frame {
        x0: 60.0,
        y0: 50.0,
        w: 560.0,
        h: 520.0,
        xmin: umin,
        xmax: umax,
        ymin: vmin,
        ymax: vmax,
    };
    let mut doc = Svg::new(width, height);
    doc.text(width / 2.0, 28.0, 16.0, "middle", projection.title());
    doc.rect(frame.x0, frame.y0, frame.w, frame.h, "#fafafa", None);

    doc.group("axes");
    let (hx, vy) = projection.axis_names();
    if projection == Projection::Oblique {
        for (name, tip) in [
            ("x", Position::new(1.0, 0.0, 0.0)),
            ("y", Position::new(0.0, 1.0, 0.0)),
            ("z", Position::new(0.0, 0.0, 1.0)),
        ] {
            let (u, v) = projection.project(&tip);
            let (ox, oy) = (frame.x(0.0), frame.y(0.0));
            doc.line(ox, oy, frame.x(u), frame.y(v), "#999999", 1.0);
            doc.text(frame.x(u), frame.y(v) - 4.0, 11.0, "middle", name);
        }
    } else {
        doc.line(frame.x0, frame.y(0.0), frame.x0 + frame.w, frame.y(0.0), "#cccccc", 1.0);
        doc.line(frame.x(0.0), frame.y0, frame.x(0.0), frame.y0 + frame.h, "#cccccc", 1.0);
        doc.text(frame.x0 + frame.w / 2.0, frame.y0 + frame.h + 30.0, 12.0, "middle", hx);
        doc.text(frame.x0 - 30.0, frame.y0 + frame.h / 2.0, 12.0, "middle", vy);
        for (v, label) in [(umin, umin), (umax, umax)] {
            doc.text(frame.x(v), frame.y0 + frame.h + 14.0, 10.0, "middle", &format!("{label:.2}"));
        }
        for (v, label) in [(vmin, vmin), (vmax, vmax)] {
            doc.text(frame.x0 - 4.0, frame.y(v), 10.0, "end", &format!("{label:.2}"));
        }
    }
    doc.end_group();

    doc.group("listener");
    let (lx, ly) = (frame.x(0.0), frame.y(0.0));
    doc.line(lx - 6.0, ly - 6.0, lx + 6.0, ly + 6.0, "#000000", 2.0);
    doc.line(lx - 6.0, ly + 6.0, lx + 6.0, ly - 6.0, "#000000", 2.0);
    doc.text(lx + 8.0, ly + 14.0, 11.0, "start", "listener");
    doc.end_group();

    doc.group("paths");
    for (bird, path) in score.birds.iter().zip(&paths) {
        let color = qualitative(bird.bird_id);
        if bird.trajectory.is_stationary() {
            let (u, v) = path[0];
            doc.circle(frame.x(u), frame.y(v), 5.0, color, Some("stationary"));
        } else {
            let pts: Vec<(f64, f64)> = path.iter().map(|&(u, v)| (frame.x(u), frame.y(v))).collect();
            doc.polyline(&pts, color, 1.8, Some("trajectory"));
        }
    }
    doc.end_group();

    doc.group("legend");
    for (i, bird) in score.birds.iter().enumerate() {
        let label = styles
            .iter()
            .find(|s| s.bird_id == bird.bird_id)
            .map(|s| s.label.clone())
            .unwrap_or_else(|| format!("bird {}", bird.bird_id));
        let y = 70.0 + 22.0 * i as f64;
        doc.rect(640.0, y - 10.0, 14.0, 14.0, qualitative(bird.bird_id), Some("legend"));
        doc.text(662.0, y + 2.0, 12.0, "start", &label);
    }
    doc.end_group();
    Ok(doc.finish())
}

/// Activity timeline: one lane per bird, one rectangle per chirp, species colours.
pub fn plot_timeline(summary: &ActivitySummary, lanes: &[BirdStyle], duration: f64) -> String {
    let lane_h = 34.0;
    let (left, top) = (110.0, 50.0);
    let plot_w = 860.0;
    let height = top + lane_h * lanes.len() as f64 + 60.0;
    let width = left + plot_w + 30.0;
    let frame = Frame {
        x0: left,
        y0: top,
        w: plot_w,
        h: lane_h * lanes.len() as f64,
        xmin: 0.0,
        xmax: duration.max(1e-9),
        ymin: 0.0,
        ymax: 1.0,
    };
    let mut doc = Svg::new(width, height);
    doc.text(width / 2.0, 28.0, 16.0, "middle", "Bird chirp activity timelines");

    doc.group("lanes");
    for (i, lane) in lanes.iter().enumerate() {
        let y = top + lane_h * i as f64;
        let shade = if i % 2 == 0 { "#f4f4f4" } else { "#ffffff" };
        doc.rect(left, y, plot_w, lane_h, shade, Some("lane"));
        doc.text(left - 8.0, y + lane_h / 2.0 + 4.0, 12.0, "end", &lane.label);
    }
    doc.end_group();

    doc.group("events");
    for (i, lane) in lanes.iter().enumerate() {
        let y = top + lane_h * i as f64 + 6.0;
        let Some(activity) = summary.bird(lane.bird_id) else {
            continue;
        };
        for &(start, end) in &activity.intervals {
            let x = frame.x(start);
            doc.rect(
                x,
                y,
                frame.x(end) - x,
                lane_h - 12.0,
                qualitative(lane.species_id),
                Some(&format!("event species-{}", lane.species_id)),
            );
        }
    }
    doc.end_group();

    time_axis(&mut doc, &frame, duration);
    doc.finish()
}

fn time_axis(doc: &mut Svg, frame: &Frame, duration: f64) {
    doc.group("time-axis");
    let base = frame.y0 + frame.h;
    doc.line(frame.x0, base, frame.x0 + frame.w, base, "#000000", 1.0);
    let step = if duration > 10.0 { 2.0 } else if duration > 2.0 { 0.5 } else { 0.1 };
    let ticks = (duration / step).floor() as usize;
    for i in 0..=ticks {
        let t = i as f64 * step;
        let x = frame.x(t);
        doc.line(x, base, x, base + 5.0, "#000000", 1.0);
        doc.text(x, base + 18.0, 10.0, "middle", &format!("{t:.1}"));
    }
    doc.text(frame.x0 + frame.w / 2.0, base + 36.0, 12.0, "middle", "time (s)");
    doc.end_group();
}

/// Min/max envelope columns of a signal.
pub fn downsample_min_max(samples: &[f64], max_columns: usize) -> Vec<(f64, f64)> {
    let n = samples.len();
    let cols = n.min(max_columns);
    (0..cols)
        .map(|c| {
            let (a, b) = (c * n / cols, ((c + 1) * n / cols).max(c * n / cols + 1));
            samples[a..b]
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &s| (lo.min(s), hi.max(s)))
        })
        .collect()
}

/// Left, right and left-minus-right waveforms on a shared time axis and amplitude scale.
pub fn plot_waveform_compare(buffer: &StereoBuffer, diff: &MonoBuffer) -> String {
    let panels: [(&str, &str, &[f64], &str); 3] = [
        ("panel-left", "Left channel", &buffer.left, "#1f77b4"),
        ("panel-right", "Right channel", &buffer.right, "#d62728"),
        ("panel-diff", "Left - right", &diff.samples, "#2ca02c"),
    ];
    let scale = panels
        .iter()
        .flat_map(|p| p.2.iter())
        .fold(0.0f64, |m, s| m.max(s.abs()))
        .max(1e-12);
    let duration = buffer.len() as f64 / f64::from(buffer.sample_rate.max(1));
    let (left, top, plot_w, panel_h, gap) = (80.0, 50.0, 1000.0, 160.0, 30.0);
    let width = left + plot_w + 30.0;
    let height = top + 3.0 * panel_h + 2.0 * gap + 60.0;
    let mut doc = Svg::new(width, height);
    doc.text(width / 2.0, 28.0, 16.0, "middle", "Stereo waveforms and channel difference");

    let mut last = None;
    for (i, (id, title, samples, color)) in panels.iter().enumerate() {
        let y0 = top + i as f64 * (panel_h + gap);
        let frame = Frame {
            x0: left,
            y0,
            w: plot_w,
            h: panel_h,
            xmin: 0.0,
            xmax: duration.max(1e-9),
            ymin: -scale,
            ymax: scale,
        };
        doc.group(id);
        doc.rect(left, y0, plot_w, panel_h, "#fafafa", Some("panel"));
        doc.line(left, frame.y(0.0), left + plot_w, frame.y(0.0), "#cccccc", 1.0);
        doc.text(left + 6.0, y0 + 14.0, 11.0, "start", title);
        doc.text(left - 6.0, frame.y(scale) + 4.0, 9.0, "end", &format!("{scale:.2}"));
        doc.text(left - 6.0, frame.y(-scale) + 4.0, 9.0, "end", &format!("{:.2}", -scale));
        let cols = downsample_min_max(samples, MAX_WAVEFORM_COLUMNS);
        let mut d = String::new();
        for (c, (lo, hi)) in cols.iter().enumerate() {
            let x = left + (c as f64 + 0.5) / cols.len().max(1) as f64 * plot_w;
            d.push_str(&format!(
                "M{} {}L{} {}",
                svg::num(x),
                svg::num(frame.y(*lo)),
                svg::num(x),
                svg::num(frame.y(*hi))
            ));
        }
        if d.is_empty() {
            d = format!("M{} {}", svg::num(left), svg::num(frame.y(0.0)));
        }
        doc.path(&d, color, 1.0);
        doc.end_group();
        last = Some(frame);
    }
    if let Some(frame) = last {
        time_axis(&mut doc, &frame, duration);
    }
    doc.finish()
}

/// Per-bird lanes combining chirp rectangles with the bird's peak-frequency ridge.
pub fn plot_timeline_spectrogram(
    summary: &ActivitySummary,
    lanes: &[BirdStyle],
    tracks: &[(usize, FrequencyTrack)],
    duration: f64,
    freq_max: f64,
) -> String {
    let lane_h = 90.0;
    let (left, top, plot_w) = (110.0, 50.0, 860.0);
    let width = left + plot_w + 30.0;
    let height = top + lane_h * lanes.len() as f64 + 60.0;
    let mut doc = Svg::new(width, height);
    doc.text(width / 2.0, 28.0, 16.0, "middle", "Per-bird timelines with frequency ridges");
    let mut frame = Frame {
        x0: left,
        y0: top,
        w: plot_w,
        h: lane_h * lanes.len() as f64,
        xmin: 0.0,
        xmax: duration.max(1e-9),
        ymin: 0.0,
        ymax: freq_max.max(1.0),
    };
    for (i, lane) in lanes.iter().enumerate() {
        let y0 = top + lane_h * i as f64;
        let lane_frame = Frame {
            y0: y0 + 4.0,
            h: lane_h - 8.0,
            ..frame
        };
        doc.group(&format!("bird-{}", lane.bird_id));
        doc.rect(left, y0, plot_w, lane_h, if i % 2 == 0 { "#f4f4f4" } else { "#ffffff" }, Some("lane"));
        doc.text(left - 8.0, y0 + lane_h / 2.0 + 4.0, 12.0, "end", &lane.label);
        if let Some(activity) = summary.bird(lane.bird_id) {
            for &(start, end) in &activity.intervals {
                let x = frame.x(start);
                doc.rect(x, y0 + 2.0, frame.x(end) - x, lane_h - 4.0, "#dde6f0", Some("event"));
            }
        }
        if let Some((_, track)) = tracks.iter().find(|(id, _)| *id == lane.bird_id) {
            let color = qualitative(lane.species_id);
            let mut run: Vec<(f64, f64)> = Vec::new();
            for (&t, f) in track.times.iter().zip(&track.peak_freq) {
                match f {
                    Some(f) => run.push((lane_frame.x(t), lane_frame.y(*f))),
                    None => flush_ridge(&mut doc, &mut run, color),
                }
            }
            flush_ridge(&mut doc, &mut run, color);
        }
        doc.text(left + 2.0, y0 + 12.0, 9.0, "start", &format!("{:.0} Hz", freq_max));
        doc.end_group();
    }
    frame.h = lane_h * lanes.len() as f64;
    time_axis(&mut doc, &frame, duration);
    doc.finish()
}

fn flush_ridge(doc: &mut Svg, run: &mut Vec<(f64, f64)>, color: &str) {
    match run.len() {
        0 => {}
        1 => doc.circle(run[0].0, run[0].1, 1.5, color, Some("ridge")),
        _ => doc.polyline(run, color, 1.5, Some("ridge")),
    }
    run.clear();
}
