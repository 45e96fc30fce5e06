//! RIFF/WAVE reading and writing.
//!
//! Reads 16/24/32-bit integer and 32/64-bit float PCM, including
//! `WAVE_FORMAT_EXTENSIBLE` headers. Writes 32- or 64-bit float. Samples are
//! exchanged as planar `f64` channels; integer PCM is scaled to [-1, 1).

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;

const FORMAT_PCM: u16 = 1;
const FORMAT_FLOAT: u16 = 3;
const FORMAT_EXTENSIBLE: u16 = 0xFFFE;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleFormat {
    Int16,
    Int24,
    Int32,
    Float32,
    Float64,
}

impl SampleFormat {
    pub fn bits(self) -> u16 {
        match self {
            SampleFormat::Int16 => 16,
            SampleFormat::Int24 => 24,
            SampleFormat::Int32 | SampleFormat::Float32 => 32,
            SampleFormat::Float64 => 64,
        }
    }

    pub fn is_float(self) -> bool {
        matches!(self, SampleFormat::Float32 | SampleFormat::Float64)
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "i16" => SampleFormat::Int16,
            "i24" => SampleFormat::Int24,
            "i32" => SampleFormat::Int32,
            "f32" => SampleFormat::Float32,
            "f64" => SampleFormat::Float64,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WavSpec {
    pub sample_rate: u32,
    pub channels: u16,
    pub format: SampleFormat,
}

#[derive(Debug, thiserror::Error)]
pub enum WavError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("not a RIFF/WAVE file")]
    NotWave,
    #[error("unsupported encoding: {0}")]
    Unsupported(String),
    #[error("malformed file: {0}")]
    Malformed(&'static str),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Audio {
    pub spec: WavSpec,
    /// One `Vec` per channel.
    pub channels: Vec<Vec<f64>>,
}

impl Audio {
    pub fn frames(&self) -> usize {
        self.channels.first().map_or(0, Vec::len)
    }
}

fn u16_at(b: &[u8], i: usize) -> u16 {
    u16::from_le_bytes([b[i], b[i + 1]])
}

fn u32_at(b: &[u8], i: usize) -> u32 {
    u32::from_le_bytes([b[i], b[i + 1], b[i + 2], b[i + 3]])
}

pub fn read_wav(path: impl AsRef<Path>) -> Result<Audio, WavError> {
    read_wav_from(BufReader::new(File::open(path)?))
}

pub fn read_wav_from(mut r: impl Read) -> Result<Audio, WavError> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.len() < 12 || &bytes[0..4] != b"RIFF" || &bytes[8..12] != b"WAVE" {
        return Err(WavError::NotWave);
    }
    let mut pos = 12;
    let mut spec = None;
    let mut data: Option<&[u8]> = None;
    while pos + 8 <= bytes.len() {
        let id = &bytes[pos..pos + 4];
        let size = u32_at(&bytes, pos + 4) as usize;
        let body_start = pos + 8;
        let body_end = body_start.saturating_add(size).min(bytes.len());
        let body = &bytes[body_start..body_end];
        match id {
            b"fmt " => spec = Some(parse_fmt(body)?),
            b"data" => data = Some(body),
            _ => {}
        }
        // chunks are padded to even sizes
        pos = body_start.saturating_add(size).saturating_add(size & 1);
    }
    let spec = spec.ok_or(WavError::Malformed("missing fmt chunk"))?;
    let data = data.ok_or(WavError::Malformed("missing data chunk"))?;
    let width = spec.format.bits() as usize / 8;
    let nch = spec.channels as usize;
    let frames = data.len() / (width * nch);
    let mut channels = vec![Vec::with_capacity(frames); nch];
    for f in 0..frames {
        for (c, ch) in channels.iter_mut().enumerate() {
            let i = (f * nch + c) * width;
            let s = &data[i..i + width];
            let v = match spec.format {
                SampleFormat::Int16 => i16::from_le_bytes([s[0], s[1]]) as f64 / 32768.0,
                SampleFormat::Int24 => {
                    let raw = i32::from_le_bytes([0, s[0], s[1], s[2]]) >> 8;
                    raw as f64 / 8_388_608.0
                }
                SampleFormat::Int32 => i32::from_le_bytes([s[0], s[1], s[2], s[3]]) as f64 / 2_147_483_648.0,
                SampleFormat::Float32 => f32::from_le_bytes([s[0], s[1], s[2], s[3]]) as f64,
                SampleFormat::Float64 => f64::from_le_bytes(s.try_into().expect("8-byte sample")),
            };
            ch.push(v);
        }
    }
    Ok(Audio { spec, channels })
}

fn parse_fmt(b: &[u8]) -> Result<WavSpec, WavError> {
    if b.len() < 16 {
        return Err(WavError::Malformed("short fmt chunk"));
    }
    let mut tag = u16_at(b, 0);
    let channels = u16_at(b, 2);
    let sample_rate = u32_at(b, 4);
    let bits = u16_at(b, 14);
    if tag == FORMAT_EXTENSIBLE {
        if b.len() < 26 {
            return Err(WavError::Malformed("short extensible fmt chunk"));
        }
        // first two bytes of the sub-format GUID carry the format tag
        tag = u16_at(b, 24);
    }
    if channels == 0 {
        return Err(WavError::Malformed("zero channels"));
    }
    let format = match (tag, bits) {
        (FORMAT_PCM, 16) => SampleFormat::Int16,
        (FORMAT_PCM, 24) => SampleFormat::Int24,
        (FORMAT_PCM, 32) => SampleFormat::Int32,
        (FORMAT_FLOAT, 32) => SampleFormat::Float32,
        (FORMAT_FLOAT, 64) => SampleFormat::Float64,
        _ => return Err(WavError::Unsupported(format!("format tag {tag}, {bits} bits"))),
    };
    Ok(WavSpec {
        sample_rate,
        channels,
        format,
    })
}

/// Writes planar channels as float PCM (`Float32` or `Float64`).
pub fn write_wav(
    path: impl AsRef<Path>,
    sample_rate: u32,
    channels: &[Vec<f64>],
    format: SampleFormat,
) -> Result<(), WavError> {
    let mut w = BufWriter::new(File::create(path)?);
    write_wav_to(&mut w, sample_rate, channels, format)?;
    w.flush()?;
    Ok(())
}

pub fn write_wav_to(
    mut w: impl Write,
    sample_rate: u32,
    channels: &[Vec<f64>],
    format: SampleFormat,
) -> Result<(), WavError> {
    if !format.is_float() {
        return Err(WavError::Unsupported("only float output is written".into()));
    }
    if channels.is_empty() || channels.len() > u16::MAX as usize {
        return Err(WavError::Malformed("channel count out of range"));
    }
    let frames = channels[0].len();
    if channels.iter().any(|c| c.len() != frames) {
        return Err(WavError::Malformed("channels differ in length"));
    }
    let nch = channels.len() as u16;
    let width = format.bits() / 8;
    let block_align = nch * width;
    let data_len = frames as u64 * block_align as u64;
    // fmt (18 with cbSize) + fact (4)
    let riff_len = 4 + (8 + 18) + (8 + 4) + 8 + data_len;
    if riff_len > u32::MAX as u64 {
        return Err(WavError::Unsupported("file exceeds 4 GiB".into()));
    }
    let mut h = Vec::with_capacity(58);
    h.extend_from_slice(b"RIFF");
    h.extend_from_slice(&(riff_len as u32).to_le_bytes());
    h.extend_from_slice(b"WAVE");
    h.extend_from_slice(b"fmt ");
    h.extend_from_slice(&18u32.to_le_bytes());
    h.extend_from_slice(&FORMAT_FLOAT.to_le_bytes());
    h.extend_from_slice(&nch.to_le_bytes());
    h.extend_from_slice(&sample_rate.to_le_bytes());
    h.extend_from_slice(&(sample_rate * block_align as u32).to_le_bytes());
    h.extend_from_slice(&block_align.to_le_bytes());
    h.extend_from_slice(&format.bits().to_le_bytes());
    h.extend_from_slice(&0u16.to_le_bytes());
    h.extend_from_slice(b"fact");
    h.extend_from_slice(&4u32.to_le_bytes());
    h.extend_from_slice(&(frames as u32).to_le_bytes());
    h.extend_from_slice(b"data");
    h.extend_from_slice(&(data_len as u32).to_le_bytes());
    w.write_all(&h)?;
    let mut buf = Vec::with_capacity(block_align as usize * 1024);
    for f in 0..frames {
        for c in channels {
            match format {
                SampleFormat::Float32 => buf.extend_from_slice(&(c[f] as f32).to_le_bytes()),
                _ => buf.extend_from_slice(&c[f].to_le_bytes()),
            }
        }
        if buf.len() >= block_align as usize * 1024 {
            w.write_all(&buf)?;
            buf.clear();
        }
    }
    w.write_all(&buf)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn roundtrip(channels: &[Vec<f64>], format: SampleFormat) -> Audio {
        let mut bytes = Vec::new();
        write_wav_to(&mut bytes, 48000, channels, format).unwrap();
        read_wav_from(bytes.as_slice()).unwrap()
    }

    #[test]
    fn float_roundtrips_are_exact() {
        let ch = vec![vec![0.25, -1.0, 0.1], vec![1e-7, 0.5, -0.75]];
        let a = roundtrip(&ch, SampleFormat::Float64);
        assert_eq!(a.channels, ch);
        assert_eq!(a.spec.channels, 2);
        let a = roundtrip(&ch, SampleFormat::Float32);
        for (x, y) in a.channels.iter().flatten().zip(ch.iter().flatten()) {
            assert_eq!(*x, *y as f32 as f64);
        }
        assert_eq!(a.spec.format, SampleFormat::Float32);
    }

    fn pcm_header(tag: u16, channels: u16, bits: u16, data: &[u8], extensible: bool) -> Vec<u8> {
        let mut fmt = Vec::new();
        fmt.extend_from_slice(&(if extensible { FORMAT_EXTENSIBLE } else { tag }).to_le_bytes());
        fmt.extend_from_slice(&channels.to_le_bytes());
        fmt.extend_from_slice(&44100u32.to_le_bytes());
        fmt.extend_from_slice(&(44100 * (bits as u32 / 8) * channels as u32).to_le_bytes());
        fmt.extend_from_slice(&(bits / 8 * channels).to_le_bytes());
        fmt.extend_from_slice(&bits.to_le_bytes());
        if extensible {
            fmt.extend_from_slice(&22u16.to_le_bytes());
            fmt.extend_from_slice(&bits.to_le_bytes());
            fmt.extend_from_slice(&0u32.to_le_bytes());
            fmt.extend_from_slice(&tag.to_le_bytes());
            fmt.extend_from_slice(&[0; 14]);
        }
        let mut b = Vec::new();
        b.extend_from_slice(b"RIFF");
        b.extend_from_slice(&((4 + 8 + fmt.len() + 8 + data.len()) as u32).to_le_bytes());
        b.extend_from_slice(b"WAVE");
        b.extend_from_slice(b"fmt ");
        b.extend_from_slice(&(fmt.len() as u32).to_le_bytes());
        b.extend_from_slice(&fmt);
        b.extend_from_slice(b"data");
        b.extend_from_slice(&(data.len() as u32).to_le_bytes());
        b.extend_from_slice(data);
        b
    }

    #[test]
    fn reads_integer_pcm() {
        let data: Vec<u8> = [16384i16, -32768].iter().flat_map(|v| v.to_le_bytes()).collect();
        let a = read_wav_from(pcm_header(1, 1, 16, &data, false).as_slice()).unwrap();
        assert_eq!(a.channels, vec![vec![0.5, -1.0]]);
        let data = [0x00, 0x00, 0x40, 0x00, 0x00, 0xC0];
        let a = read_wav_from(pcm_header(1, 2, 24, &data, true).as_slice()).unwrap();
        assert_eq!(a.channels, vec![vec![0.5], vec![-0.5]]);
    }

    #[test]
    fn rejects_unsupported() {
        let e = read_wav_from(pcm_header(1, 1, 8, &[0, 1], false).as_slice()).unwrap_err();
        assert!(matches!(e, WavError::Unsupported(_)));
        assert!(matches!(
            read_wav_from(&b"RIFX...."[..]).unwrap_err(),
            WavError::NotWave
        ));
        assert!(write_wav_to(Vec::new(), 48000, &[vec![0.0]], SampleFormat::Int16).is_err());
    }
}
