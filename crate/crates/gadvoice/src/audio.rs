//! WAV decoding and encoding.
//!
//! Accepted input is RIFF/WAVE holding 16-bit integer PCM or 32-bit float
//! samples in one or two channels. 16-bit samples are scaled by 1/32768 and
//! stereo is averaged to mono.

use std::io::{Read, Seek, Write};
use std::path::Path;

use gadvoice_core::Signal;
use hound::{SampleFormat, WavReader, WavSpec, WavWriter};

use crate::{Error, Result};

fn container_error(path: &Path, e: hound::Error) -> Error {
    match e {
        hound::Error::IoError(source) => Error::io(path, source),
        hound::Error::Unsupported => Error::UnsupportedEncoding {
            path: path.into(),
            msg: "format tag is neither PCM nor IEEE float".into(),
        },
        other => Error::MalformedContainer {
            path: path.into(),
            msg: other.to_string(),
        },
    }
}

pub fn read_wav(path: impl AsRef<Path>) -> Result<Signal> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    decode_wav(std::io::BufReader::new(file), path)
}

/// Decodes from any reader; `path` is only used in error messages.
pub fn decode_wav<R: Read>(reader: R, path: &Path) -> Result<Signal> {
    let mut wav = WavReader::new(reader).map_err(|e| container_error(path, e))?;
    let spec = wav.spec();
    let unsupported = |msg: String| Error::UnsupportedEncoding { path: path.into(), msg };
    if !(1..=2).contains(&spec.channels) {
        return Err(unsupported(format!("{} channels", spec.channels)));
    }
    let interleaved: Vec<f64> = match (spec.sample_format, spec.bits_per_sample) {
        (SampleFormat::Int, 16) => wav
            .samples::<i16>()
            .map(|s| s.map(|v| v as f64 / 32768.0))
            .collect::<std::result::Result<_, _>>(),
        (SampleFormat::Float, 32) => wav
            .samples::<f32>()
            .map(|s| s.map(f64::from))
            .collect::<std::result::Result<_, _>>(),
        (format, bits) => return Err(unsupported(format!("{bits}-bit {format:?}"))),
    }
    .map_err(|e| container_error(path, e))?;

    let samples: Vec<f64> = if spec.channels == 2 {
        interleaved.chunks_exact(2).map(|p| 0.5 * (p[0] + p[1])).collect()
    } else {
        interleaved
    };
    if samples.is_empty() {
        return Err(Error::EmptyAudio(path.into()));
    }
    Signal::new(samples, spec.sample_rate).map_err(|_| Error::MalformedContainer {
        path: path.into(),
        msg: "non-finite sample or zero sample rate".into(),
    })
}

/// 16-bit mono PCM. Samples are rounded after scaling by 32768 and clipped
/// to the representable range, so a decoded PCM16 file re-encodes exactly.
pub fn write_wav_pcm16(path: impl AsRef<Path>, s: &Signal) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    encode_pcm16(std::io::BufWriter::new(file), s).map_err(|e| container_error(path, e))
}

pub fn encode_pcm16<W: Write + Seek>(writer: W, s: &Signal) -> std::result::Result<(), hound::Error> {
    let spec = WavSpec {
        channels: 1,
        sample_rate: s.sample_rate(),
        bits_per_sample: 16,
        sample_format: SampleFormat::Int,
    };
    let mut w = WavWriter::new(writer, spec)?;
    for &v in s.samples() {
        w.write_sample((v * 32768.0).round().clamp(-32768.0, 32767.0) as i16)?;
    }
    w.finalize()
}
