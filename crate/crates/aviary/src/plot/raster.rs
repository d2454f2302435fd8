use aviary_core::analysis::Spectrogram;

use super::palette::{palette_index, Palette};

/// Binary PPM (`P6`) image, 8 bits per channel.
#[derive(Debug, Clone, PartialEq)]
pub struct Ppm {
    pub width: usize,
    pub height: usize,
    /// Row-major RGB triples, top row first.
    pub pixels: Vec<u8>,
}

impl Ppm {
    pub fn pixel(&self, x: usize, y: usize) -> [u8; 3] {
        let i = 3 * (y * self.width + x);
        [self.pixels[i], self.pixels[i + 1], self.pixels[i + 2]]
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = format!("P6\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.pixels);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Option<Ppm> {
        // Header is three newline-terminated lines in the form written above.
        let mut fields = Vec::new();
        let mut at = 0;
        while fields.len() < 3 {
            let end = at + bytes[at..].iter().position(|&b| b == b'\n')?;
            fields.push(std::str::from_utf8(&bytes[at..end]).ok()?.to_string());
            at = end + 1;
        }
        if fields[0] != "P6" || fields[2] != "255" {
            return None;
        }
        let mut dims = fields[1].split(' ');
        let width: usize = dims.next()?.parse().ok()?;
        let height: usize = dims.next()?.parse().ok()?;
        let pixels = bytes[at..].to_vec();
        (pixels.len() == width * height * 3).then_some(Ppm {
            width,
            height,
            pixels,
        })
    }
}

/// One pixel per (frame, bin) cell: time runs left to right, frequency bottom to top.
pub fn render_spectrogram_image(
    spec: &Spectrogram,
    range: (f64, f64),
    palette: Palette,
) -> Result<Ppm, String> {
    let (lo, hi) = range;
    if lo.is_nan() || hi.is_nan() || lo >= hi {
        return Err(format!("display range [{lo}, {hi}] is empty"));
    }
    let (width, height) = (spec.frames(), spec.bins());
    let lut: Vec<[u8; 3]> = (0..=255u8).map(|i| palette.color(i)).collect();
    let mut pixels = Vec::with_capacity(width * height * 3);
    for row in 0..height {
        let bin = height - 1 - row;
        for frame in 0..width {
            let rgb = lut[palette_index(spec.get(frame, bin), lo, hi) as usize];
            pixels.extend_from_slice(&rgb);
        }
    }
    Ok(Ppm {
        width,
        height,
        pixels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use aviary_core::analysis::Scale;

    fn spec(values: Vec<f64>, frames: usize, bins: usize) -> Spectrogram {
        Spectrogram {
            sample_rate: 8,
            window_size: 2 * (bins - 1),
            hop: 1,
            frame_times: (0..frames).map(|k| k as f64).collect(),
            bin_freqs: (0..bins).map(|b| b as f64).collect(),
            values,
            scale: Scale::Decibels { floor_db: -320.0 },
        }
    }

    #[test]
    fn floor_is_uniform_lowest_colour() {
        let img = render_spectrogram_image(&spec(vec![-320.0; 12], 4, 3), (-320.0, -100.0), Palette::Viridis).unwrap();
        assert_eq!((img.width, img.height), (4, 3));
        let low = Palette::Viridis.color(0);
        for y in 0..3 {
            for x in 0..4 {
                assert_eq!(img.pixel(x, y), low);
            }
        }
    }

    #[test]
    fn high_bins_are_on_top() {
        // frame 0: bin 0 quiet, bin 2 loud
        let s = spec(vec![-320.0, -200.0, -100.0], 1, 3);
        let img = render_spectrogram_image(&s, (-320.0, -100.0), Palette::Viridis).unwrap();
        assert_eq!(img.pixel(0, 0), Palette::Viridis.color(255));
        assert_eq!(img.pixel(0, 2), Palette::Viridis.color(0));
    }

    #[test]
    fn empty_range_is_rejected() {
        assert!(render_spectrogram_image(&spec(vec![0.0; 2], 1, 2), (0.0, 0.0), Palette::RedBlue).is_err());
    }

    #[test]
    fn ppm_round_trip() {
        let img = render_spectrogram_image(&spec(vec![-5.0, 3.0, 20.0, -20.0], 2, 2), (-20.0, 20.0), Palette::RedBlue).unwrap();
        let bytes = img.to_bytes();
        assert!(bytes.starts_with(b"P6\n2 2\n255\n"));
        assert_eq!(Ppm::from_bytes(&bytes).unwrap(), img);
    }
}
