//! File formats: manifests, PNG images, response/score logs and region dumps.

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;
use traceforge_core::probes::{RegionDump, DUMP_SCHEMA};
use traceforge_core::raster::CanvasImage;
use traceforge_core::task::{DatasetManifest, MANIFEST_FORMAT};

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: malformed JSON: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
    #[error("{path}: expected format {expected:?}, found {found:?}")]
    Version { path: PathBuf, expected: &'static str, found: String },
    #[error("{path}: invalid dump: {reason}")]
    Dump { path: PathBuf, reason: String },
    #[error("{path}: PNG encoding failed: {reason}")]
    Png { path: PathBuf, reason: String },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> IoError + '_ {
    move |source| IoError::Io { path: path.to_path_buf(), source }
}

fn json_err(path: &Path) -> impl FnOnce(serde_json::Error) -> IoError + '_ {
    move |source| IoError::Json { path: path.to_path_buf(), source }
}

pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<(), IoError> {
    let mut text = serde_json::to_string_pretty(value).map_err(json_err(path))?;
    text.push('\n');
    fs::write(path, text).map_err(io_err(path))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, IoError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(json_err(path))
}

fn check_version(value: &serde_json::Value, key: &str, expected: &'static str, path: &Path) -> Result<(), IoError> {
    let found = value.get(key).and_then(|v| v.as_str()).unwrap_or("");
    if found == expected {
        Ok(())
    } else {
        Err(IoError::Version { path: path.to_path_buf(), expected, found: found.into() })
    }
}

pub fn write_manifest(m: &DatasetManifest, path: &Path) -> Result<(), IoError> {
    write_json(m, path)
}

pub fn read_manifest(path: &Path) -> Result<DatasetManifest, IoError> {
    let value: serde_json::Value = read_json(path)?;
    check_version(&value, "format", MANIFEST_FORMAT, path)?;
    serde_json::from_value(value).map_err(json_err(path))
}

/// 8-bit RGB PNG, no alpha.
pub fn encode_png(img: &CanvasImage) -> Result<Vec<u8>, String> {
    let mut buf = Vec::new();
    {
        let mut enc = png::Encoder::new(&mut buf, img.width, img.height);
        enc.set_color(png::ColorType::Rgb);
        enc.set_depth(png::BitDepth::Eight);
        let mut w = enc.write_header().map_err(|e| e.to_string())?;
        w.write_image_data(&img.data).map_err(|e| e.to_string())?;
    }
    Ok(buf)
}

pub fn write_png(img: &CanvasImage, path: &Path) -> Result<(), IoError> {
    let bytes = encode_png(img).map_err(|reason| IoError::Png { path: path.to_path_buf(), reason })?;
    fs::write(path, bytes).map_err(io_err(path))
}

pub fn read_png(path: &Path) -> Result<CanvasImage, IoError> {
    let bad = |reason: String| IoError::Png { path: path.to_path_buf(), reason };
    let file = File::open(path).map_err(io_err(path))?;
    let mut dec = png::Decoder::new(BufReader::new(file))
        .read_info()
        .map_err(|e| bad(e.to_string()))?;
    let mut data = vec![0; dec.output_buffer_size().ok_or_else(|| bad("image too large".into()))?];
    let info = dec.next_frame(&mut data).map_err(|e| bad(e.to_string()))?;
    if info.color_type != png::ColorType::Rgb || info.bit_depth != png::BitDepth::Eight {
        return Err(bad("expected 8-bit RGB".into()));
    }
    data.truncate(info.buffer_size());
    Ok(CanvasImage { width: info.width, height: info.height, data })
}

/// Reads JSON Lines. A final line without a trailing newline that fails to
/// parse is treated as an interrupted write and skipped.
pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, IoError> {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(io_err(path)(e)),
    };
    let complete = text.ends_with('\n');
    let lines: Vec<&str> = text.lines().collect();
    let mut out = Vec::with_capacity(lines.len());
    for (i, line) in lines.iter().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str(line) {
            Ok(v) => out.push(v),
            Err(_) if i + 1 == lines.len() && !complete => break,
            Err(e) => return Err(json_err(path)(e)),
        }
    }
    Ok(out)
}

/// Drops a trailing partial line so appends start on a fresh line.
pub fn truncate_partial_line(path: &Path) -> Result<(), IoError> {
    let bytes = match fs::read(path) {
        Ok(b) => b,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(()),
        Err(e) => return Err(io_err(path)(e)),
    };
    if bytes.is_empty() || bytes.ends_with(b"\n") {
        return Ok(());
    }
    let keep = bytes.iter().rposition(|&b| b == b'\n').map_or(0, |i| i + 1);
    let f = fs::OpenOptions::new().write(true).open(path).map_err(io_err(path))?;
    f.set_len(keep as u64).map_err(io_err(path))
}

pub fn write_jsonl<T: Serialize>(items: &[T], path: &Path) -> Result<(), IoError> {
    let f = File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(f);
    for it in items {
        serde_json::to_writer(&mut w, it).map_err(json_err(path))?;
        w.write_all(b"\n").map_err(io_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

pub fn read_dump(path: &Path) -> Result<RegionDump, IoError> {
    let value: serde_json::Value = read_json(path)?;
    check_version(&value, "schema", DUMP_SCHEMA, path)?;
    let dump: RegionDump = serde_json::from_value(value).map_err(json_err(path))?;
    dump.validate().map_err(|e| IoError::Dump { path: path.to_path_buf(), reason: e.to_string() })?;
    Ok(dump)
}

/// All `*.json` dumps in `dir`, sorted by file name.
pub fn read_dumps(dir: &Path) -> Result<Vec<RegionDump>, IoError> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(io_err(dir))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .collect();
    paths.sort();
    paths.iter().map(|p| read_dump(p)).collect()
}

/// Line count of a text file, for quick log checks.
pub fn count_lines(path: &Path) -> Result<usize, IoError> {
    let f = File::open(path).map_err(io_err(path))?;
    Ok(BufReader::new(f).lines().count())
}
