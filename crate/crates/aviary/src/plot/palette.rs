//! Colour maps.

use serde::{Deserialize, Serialize};

/// Qualitative colours assigned by index (species or bird).
pub const QUALITATIVE: [&str; 10] = [
    "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948", "#b07aa1", "#ff9da7",
    "#9c755f", "#17becf",
];

pub fn qualitative(index: usize) -> &'static str {
    QUALITATIVE[index % QUALITATIVE.len()]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Palette {
    /// Sequential dark-purple to yellow.
    Viridis,
    /// Diverging blue (negative) through white to red (positive).
    RedBlue,
}

const VIRIDIS: [[f64; 3]; 5] = [
    [68.0, 1.0, 84.0],
    [59.0, 82.0, 139.0],
    [33.0, 145.0, 140.0],
    [94.0, 201.0, 98.0],
    [253.0, 231.0, 37.0],
];

const RED_BLUE: [[f64; 3]; 5] = [
    [5.0, 48.0, 97.0],
    [67.0, 147.0, 195.0],
    [247.0, 247.0, 247.0],
    [214.0, 96.0, 77.0],
    [103.0, 0.0, 31.0],
];

impl Palette {
    fn anchors(&self) -> &'static [[f64; 3]; 5] {
        match self {
            Palette::Viridis => &VIRIDIS,
            Palette::RedBlue => &RED_BLUE,
        }
    }

    /// Colour of palette index `i` in `0..=255`.
    pub fn color(&self, i: u8) -> [u8; 3] {
        let anchors = self.anchors();
        let pos = f64::from(i) / 255.0 * (anchors.len() - 1) as f64;
        let lo = (pos.floor() as usize).min(anchors.len() - 2);
        let frac = pos - lo as f64;
        let mut rgb = [0u8; 3];
        for (c, out) in rgb.iter_mut().enumerate() {
            let v = anchors[lo][c] + (anchors[lo + 1][c] - anchors[lo][c]) * frac;
            *out = v.round() as u8;
        }
        rgb
    }
}

/// Linear map of `value` onto `0..=255` over `[lo, hi]`, clipped outside.
pub fn palette_index(value: f64, lo: f64, hi: f64) -> u8 {
    if value.is_nan() {
        return 0;
    }
    let x = ((value - lo) / (hi - lo)).clamp(0.0, 1.0);
    (x * 255.0).round() as u8
}
