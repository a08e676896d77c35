//! Binary PGM (P5) frame files named `<bus>_<timestamp>.pgm`.

use std::io::Cursor;
use std::path::{Path, PathBuf};

use image::codecs::pnm::{PnmDecoder, PnmEncoder, PnmSubtype, SampleEncoding};
use image::{ExtendedColorType, ImageDecoder, ImageEncoder};
use thiserror::Error;

use crate::vision::{Frame, VisionError};

#[derive(Debug, Error)]
pub enum PgmError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}: not an 8-bit binary graymap")]
    Format(String),
    #[error("{0}: expected a file name of the form <bus>_<timestamp>.pgm")]
    FileName(String),
    #[error(transparent)]
    Frame(#[from] VisionError),
}

/// Splits `<bus>_<timestamp>.pgm` into its parts. The bus id may itself contain underscores.
pub fn parse_frame_name(path: &Path) -> Result<(String, u64), PgmError> {
    let bad = || PgmError::FileName(path.display().to_string());
    let name = path.file_name().and_then(|n| n.to_str()).ok_or_else(bad)?;
    let stem = name.strip_suffix(".pgm").ok_or_else(bad)?;
    let (bus, ts) = stem.rsplit_once('_').ok_or_else(bad)?;
    if bus.is_empty() {
        return Err(bad());
    }
    Ok((bus.to_string(), ts.parse().map_err(|_| bad())?))
}

pub fn frame_file_name(bus_id: &str, timestamp: u64) -> String {
    format!("{bus_id}_{timestamp}.pgm")
}

pub fn decode(bytes: &[u8], timestamp: u64, label: &str) -> Result<Frame, PgmError> {
    let decoder = PnmDecoder::new(Cursor::new(bytes)).map_err(|_| PgmError::Format(label.into()))?;
    if decoder.color_type() != image::ColorType::L8 || !bytes.starts_with(b"P5") {
        return Err(PgmError::Format(label.into()));
    }
    let (w, h) = decoder.dimensions();
    let mut pixels = vec![0u8; decoder.total_bytes() as usize];
    decoder.read_image(&mut pixels).map_err(|_| PgmError::Format(label.into()))?;
    Ok(Frame::new(w as usize, h as usize, pixels, timestamp)?)
}

pub fn encode(frame: &Frame) -> Vec<u8> {
    let mut out = Vec::new();
    PnmEncoder::new(&mut out)
        .with_subtype(PnmSubtype::Graymap(SampleEncoding::Binary))
        .write_image(frame.pixels(), frame.width() as u32, frame.height() as u32, ExtendedColorType::L8)
        .expect("in-memory encode");
    out
}

/// Reads a frame, taking its timestamp from the file name.
pub fn read_frame(path: &Path) -> Result<Frame, PgmError> {
    let (_, ts) = parse_frame_name(path)?;
    let bytes = std::fs::read(path).map_err(|source| PgmError::Io { path: path.into(), source })?;
    decode(&bytes, ts, &path.display().to_string())
}

/// Writes `frame` into `dir` as `<bus>_<timestamp>.pgm` and returns the path.
pub fn write_frame(dir: &Path, bus_id: &str, frame: &Frame) -> Result<PathBuf, PgmError> {
    let path = dir.join(frame_file_name(bus_id, frame.timestamp()));
    std::fs::write(&path, encode(frame)).map_err(|source| PgmError::Io { path: path.clone(), source })?;
    Ok(path)
}
