//! 16-bit stereo PCM RIFF/WAVE encoding and decoding.
//!
//! Samples are quantized symmetrically, `q = round(clamp(s, -1, 1) * 32767)`, so
//! `-32768` is never written. The decoder accepts any chunk order and skips chunks
//! it does not know (`LIST`, `fact`, ...).

use aviary_core::StereoBuffer;

pub const FULL_SCALE: f64 = 32767.0;
const FORMAT_PCM: u16 = 1;
const CHANNELS: u16 = 2;
const BITS_PER_SAMPLE: u16 = 16;
const BLOCK_ALIGN: u16 = CHANNELS * BITS_PER_SAMPLE / 8;
const HEADER_LEN: usize = 44;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum WavError {
    #[error("truncated file: {0}")]
    Truncated(&'static str),
    #[error("bad {field}: expected {expected}, found {found}")]
    BadField {
        field: &'static str,
        expected: String,
        found: String,
    },
    #[error("missing {0} chunk")]
    MissingChunk(&'static str),
    #[error("data chunk of {0} bytes is not a whole number of frames")]
    PartialFrame(usize),
}

fn quantize(s: f64) -> i16 {
    (s.clamp(-1.0, 1.0) * FULL_SCALE).round() as i16
}

/// Encode a stereo buffer as a canonical 44-byte-header WAV file.
pub fn encode_wav(buffer: &StereoBuffer) -> Vec<u8> {
    let frames = buffer.len();
    let data_len = frames * BLOCK_ALIGN as usize;
    let byte_rate = buffer.sample_rate * u32::from(BLOCK_ALIGN);
    let mut out = Vec::with_capacity(HEADER_LEN + data_len);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&((36 + data_len) as u32).to_le_bytes());
    out.extend_from_slice(b"WAVE");
    out.extend_from_slice(b"fmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&FORMAT_PCM.to_le_bytes());
    out.extend_from_slice(&CHANNELS.to_le_bytes());
    out.extend_from_slice(&buffer.sample_rate.to_le_bytes());
    out.extend_from_slice(&byte_rate.to_le_bytes());
    out.extend_from_slice(&BLOCK_ALIGN.to_le_bytes());
    out.extend_from_slice(&BITS_PER_SAMPLE.to_le_bytes());
    out.extend_from_slice(b"data");
    out.extend_from_slice(&(data_len as u32).to_le_bytes());
    for (l, r) in buffer.left.iter().zip(&buffer.right) {
        out.extend_from_slice(&quantize(*l).to_le_bytes());
        out.extend_from_slice(&quantize(*r).to_le_bytes());
    }
    out
}

fn u16_at(b: &[u8], at: usize) -> u16 {
    u16::from_le_bytes([b[at], b[at + 1]])
}

fn u32_at(b: &[u8], at: usize) -> u32 {
    u32::from_le_bytes([b[at], b[at + 1], b[at + 2], b[at + 3]])
}

fn expect(field: &'static str, expected: impl ToString, found: impl ToString) -> WavError {
    WavError::BadField {
        field,
        expected: expected.to_string(),
        found: found.to_string(),
    }
}

/// Decode a 16-bit stereo PCM WAV file. Samples are scaled by `1 / 32767`.
pub fn decode_wav(bytes: &[u8]) -> Result<StereoBuffer, WavError> {
    if bytes.len() < 12 {
        return Err(WavError::Truncated("RIFF header"));
    }
    if &bytes[0..4] != b"RIFF" {
        return Err(expect("RIFF id", "RIFF", String::from_utf8_lossy(&bytes[0..4])));
    }
    if &bytes[8..12] != b"WAVE" {
        return Err(expect("form type", "WAVE", String::from_utf8_lossy(&bytes[8..12])));
    }

    let mut sample_rate = None;
    let mut data = None;
    let mut at = 12;
    while at + 8 <= bytes.len() {
        let id = &bytes[at..at + 4];
        let len = u32_at(bytes, at + 4) as usize;
        let body = at + 8;
        let end = body.checked_add(len).ok_or(WavError::Truncated("chunk"))?;
        if end > bytes.len() {
            return Err(WavError::Truncated(if id == b"data" { "data chunk" } else { "chunk" }));
        }
        match id {
            b"fmt " => {
                if len < 16 {
                    return Err(WavError::Truncated("fmt chunk"));
                }
                let fmt = &bytes[body..end];
                let format = u16_at(fmt, 0);
                if format != FORMAT_PCM {
                    return Err(expect("audio format", FORMAT_PCM, format));
                }
                let channels = u16_at(fmt, 2);
                if channels != CHANNELS {
                    return Err(expect("channel count", CHANNELS, channels));
                }
                let bits = u16_at(fmt, 14);
                if bits != BITS_PER_SAMPLE {
                    return Err(expect("bits per sample", BITS_PER_SAMPLE, bits));
                }
                let align = u16_at(fmt, 12);
                if align != BLOCK_ALIGN {
                    return Err(expect("block align", BLOCK_ALIGN, align));
                }
                let rate = u32_at(fmt, 4);
                if rate == 0 {
                    return Err(expect("sample rate", "> 0", rate));
                }
                let byte_rate = u32_at(fmt, 8);
                if byte_rate != rate * u32::from(BLOCK_ALIGN) {
                    return Err(expect("byte rate", rate * u32::from(BLOCK_ALIGN), byte_rate));
                }
                sample_rate = Some(rate);
            }
            b"data" => data = Some(&bytes[body..end]),
            _ => {}
        }
        // chunks are padded to even length
        at = end + (len & 1);
    }

    let sample_rate = sample_rate.ok_or(WavError::MissingChunk("fmt "))?;
    let data = data.ok_or(WavError::MissingChunk("data"))?;
    if data.len() % BLOCK_ALIGN as usize != 0 {
        return Err(WavError::PartialFrame(data.len()));
    }
    let frames = data.len() / BLOCK_ALIGN as usize;
    let mut left = Vec::with_capacity(frames);
    let mut right = Vec::with_capacity(frames);
    for frame in data.chunks_exact(BLOCK_ALIGN as usize) {
        left.push(f64::from(i16::from_le_bytes([frame[0], frame[1]])) / FULL_SCALE);
        right.push(f64::from(i16::from_le_bytes([frame[2], frame[3]])) / FULL_SCALE);
    }
    Ok(StereoBuffer {
        sample_rate,
        left,
        right,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn stereo(left: Vec<f64>, right: Vec<f64>) -> StereoBuffer {
        StereoBuffer {
            sample_rate: 44100,
            left,
            right,
        }
    }

    #[test]
    fn one_second_payload() {
        let bytes = encode_wav(&StereoBuffer::silent(44100, 44100));
        assert_eq!(bytes.len(), 44 + 176_400);
        assert_eq!(u32_at(&bytes, 40), 176_400);
    }

    #[test]
    fn header_fields() {
        let bytes = encode_wav(&stereo(vec![0.0; 3], vec![0.0; 3]));
        assert_eq!(&bytes[0..4], b"RIFF");
        assert_eq!(u32_at(&bytes, 4), 36 + 12);
        assert_eq!(&bytes[8..16], b"WAVEfmt ");
        assert_eq!(u32_at(&bytes, 16), 16);
        assert_eq!(u16_at(&bytes, 20), 1);
        assert_eq!(u16_at(&bytes, 22), 2);
        assert_eq!(u32_at(&bytes, 24), 44100);
        assert_eq!(u32_at(&bytes, 28), 176_400);
        assert_eq!(u16_at(&bytes, 32), 4);
        assert_eq!(u16_at(&bytes, 34), 16);
        assert_eq!(&bytes[36..40], b"data");
    }

    #[test]
    fn quantization_is_symmetric() {
        let bytes = encode_wav(&stereo(vec![1.0, 2.0], vec![-1.0, -7.0]));
        let s = |at| i16::from_le_bytes([bytes[at], bytes[at + 1]]);
        assert_eq!(s(44), 32767);
        assert_eq!(s(46), -32767);
        assert_eq!(s(48), 32767);
        assert_eq!(s(50), -32767);
    }

    #[test]
    fn rejects_malformed_input() {
        let good = encode_wav(&stereo(vec![0.1, 0.2], vec![0.3, 0.4]));

        assert_eq!(decode_wav(&good[..8]), Err(WavError::Truncated("RIFF header")));

        let mut bad = good.clone();
        bad[0..4].copy_from_slice(b"RIFX");
        assert!(matches!(decode_wav(&bad), Err(WavError::BadField { field: "RIFF id", .. })));

        let mut bad = good.clone();
        bad[20] = 3; // IEEE float
        assert!(matches!(decode_wav(&bad), Err(WavError::BadField { field: "audio format", .. })));

        let mut bad = good.clone();
        bad[22] = 1;
        assert!(matches!(decode_wav(&bad), Err(WavError::BadField { field: "channel count", .. })));

        let mut bad = good.clone();
        bad[34] = 24;
        assert!(matches!(decode_wav(&bad), Err(WavError::BadField { field: "bits per sample", .. })));

        assert_eq!(decode_wav(&good[..40]), Err(WavError::MissingChunk("data")));
        let mut no_fmt = good[..12].to_vec();
        no_fmt.extend_from_slice(&good[36..]);
        assert_eq!(decode_wav(&no_fmt), Err(WavError::MissingChunk("fmt ")));
        assert!(matches!(decode_wav(&good[..good.len() - 2]), Err(WavError::Truncated(_))));
    }

    #[test]
    fn skips_unknown_chunks() {
        let good = encode_wav(&stereo(vec![0.5, -0.5], vec![0.25, 0.0]));
        let mut with_list = good[..36].to_vec();
        with_list.extend_from_slice(b"LIST");
        with_list.extend_from_slice(&3u32.to_le_bytes());
        with_list.extend_from_slice(b"abc\0");
        with_list.extend_from_slice(&good[36..]);
        let riff_len = (with_list.len() - 8) as u32;
        with_list[4..8].copy_from_slice(&riff_len.to_le_bytes());
        assert_eq!(decode_wav(&with_list).unwrap(), decode_wav(&good).unwrap());
    }

    proptest! {
        #[test]
        fn round_trip_within_one_step(samples in proptest::collection::vec((-1.5..1.5f64, -1.5..1.5f64), 0..300)) {
            let (left, right): (Vec<f64>, Vec<f64>) = samples.into_iter().unzip();
            let buf = stereo(left, right);
            let back = decode_wav(&encode_wav(&buf)).unwrap();
            prop_assert_eq!(back.sample_rate, 44100);
            prop_assert_eq!(back.len(), buf.len());
            for (a, b) in buf.left.iter().chain(&buf.right).zip(back.left.iter().chain(&back.right)) {
                prop_assert!((a.clamp(-1.0, 1.0) - b).abs() <= 1.0 / FULL_SCALE);
            }
        }
    }
}
