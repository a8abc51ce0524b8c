//! Binary rasters with JSON sidecars.
//!
//! A raster at `path` is accompanied by `path.json`. Complex rasters are
//! interleaved little-endian f32 `(re, im)` pairs; GRD rasters are
//! little-endian i16. Both are row-major, azimuth lines first.

use crate::error::Error;
use crate::focus::FocusedImage;
use crate::products::{GrdProduct, ProductMetadata, SlcProduct};
use crate::rawsim::RawDataMatrix;
use crate::Complex64;
use ndarray::Array2;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SampleType {
    /// Interleaved little-endian f32 real and imaginary parts.
    Cf32Le,
    I16Le,
}

impl SampleType {
    pub fn bytes(self) -> usize {
        match self {
            SampleType::Cf32Le => 8,
            SampleType::I16Le => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Raw,
    Focused,
    Slc,
    Grd,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sidecar<T> {
    pub kind: Kind,
    pub format_version: u32,
    pub rows: usize,
    pub cols: usize,
    pub sample_type: SampleType,
    pub meta: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlcSidecar {
    pub range_spacing: f64,
    pub azimuth_spacing: f64,
    pub metadata: ProductMetadata,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrdSidecar {
    pub ground_spacing: f64,
    pub azimuth_spacing: f64,
    pub looks: (usize, usize),
    pub metadata: ProductMetadata,
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

fn fmt_err(m: impl Into<String>) -> Error {
    Error::Format(m.into())
}

pub fn encode_complex(a: &Array2<Complex64>) -> Vec<u8> {
    let mut out = Vec::with_capacity(a.len() * 8);
    for z in a.iter() {
        out.extend_from_slice(&(z.re as f32).to_le_bytes());
        out.extend_from_slice(&(z.im as f32).to_le_bytes());
    }
    out
}

pub fn decode_complex(bytes: &[u8], rows: usize, cols: usize) -> Result<Array2<Complex64>, Error> {
    if bytes.len() != rows * cols * 8 {
        return Err(fmt_err(format!(
            "expected {} bytes for {rows}x{cols} cf32, found {}",
            rows * cols * 8,
            bytes.len()
        )));
    }
    let v: Vec<Complex64> = bytes
        .chunks_exact(8)
        .map(|c| {
            let re = f32::from_le_bytes([c[0], c[1], c[2], c[3]]);
            let im = f32::from_le_bytes([c[4], c[5], c[6], c[7]]);
            Complex64::new(re as f64, im as f64)
        })
        .collect();
    Array2::from_shape_vec((rows, cols), v).map_err(|e| fmt_err(e.to_string()))
}

pub fn encode_i16(a: &Array2<i16>) -> Vec<u8> {
    a.iter().flat_map(|v| v.to_le_bytes()).collect()
}

pub fn decode_i16(bytes: &[u8], rows: usize, cols: usize) -> Result<Array2<i16>, Error> {
    if bytes.len() != rows * cols * 2 {
        return Err(fmt_err(format!(
            "expected {} bytes for {rows}x{cols} i16, found {}",
            rows * cols * 2,
            bytes.len()
        )));
    }
    let v: Vec<i16> = bytes
        .chunks_exact(2)
        .map(|c| i16::from_le_bytes([c[0], c[1]]))
        .collect();
    Array2::from_shape_vec((rows, cols), v).map_err(|e| fmt_err(e.to_string()))
}

fn write_pair<T: Serialize>(path: &Path, data: &[u8], sidecar: &Sidecar<T>) -> Result<(), Error> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(data)?;
    w.flush()?;
    let json = serde_json::to_string_pretty(sidecar).map_err(|e| fmt_err(e.to_string()))?;
    std::fs::write(sidecar_path(path), json + "\n")?;
    Ok(())
}

fn read_pair<T: DeserializeOwned>(path: &Path, kind: Kind) -> Result<(Vec<u8>, Sidecar<T>), Error> {
    let text = std::fs::read_to_string(sidecar_path(path))?;
    let sidecar: Sidecar<T> = serde_json::from_str(&text).map_err(|e| fmt_err(e.to_string()))?;
    if sidecar.kind != kind {
        return Err(fmt_err(format!("expected a {kind:?} sidecar, found {:?}", sidecar.kind)));
    }
    if sidecar.format_version != FORMAT_VERSION {
        return Err(fmt_err(format!("unsupported format version {}", sidecar.format_version)));
    }
    let mut data = Vec::new();
    BufReader::new(File::open(path)?).read_to_end(&mut data)?;
    Ok((data, sidecar))
}

fn sidecar<T>(kind: Kind, dim: (usize, usize), sample_type: SampleType, meta: T) -> Sidecar<T> {
    Sidecar {
        kind,
        format_version: FORMAT_VERSION,
        rows: dim.0,
        cols: dim.1,
        sample_type,
        meta,
    }
}

pub fn write_raw(path: &Path, raw: &RawDataMatrix) -> Result<(), Error> {
    let s = sidecar(Kind::Raw, raw.samples.dim(), SampleType::Cf32Le, raw);
    write_pair(path, &encode_complex(&raw.samples), &s)
}

pub fn read_raw(path: &Path) -> Result<RawDataMatrix, Error> {
    let (data, s) = read_pair::<RawDataMatrix>(path, Kind::Raw)?;
    let mut raw = s.meta;
    raw.samples = decode_complex(&data, s.rows, s.cols)?;
    Ok(raw)
}

pub fn write_focused(path: &Path, img: &FocusedImage) -> Result<(), Error> {
    let s = sidecar(Kind::Focused, img.pixels.dim(), SampleType::Cf32Le, img);
    write_pair(path, &encode_complex(&img.pixels), &s)
}

pub fn read_focused(path: &Path) -> Result<FocusedImage, Error> {
    let (data, s) = read_pair::<FocusedImage>(path, Kind::Focused)?;
    let mut img = s.meta;
    img.pixels = decode_complex(&data, s.rows, s.cols)?;
    Ok(img)
}

pub fn write_slc(path: &Path, slc: &SlcProduct) -> Result<(), Error> {
    let meta = SlcSidecar {
        range_spacing: slc.range_spacing,
        azimuth_spacing: slc.azimuth_spacing,
        metadata: slc.metadata.clone(),
    };
    let s = sidecar(Kind::Slc, slc.pixels.dim(), SampleType::Cf32Le, meta);
    write_pair(path, &encode_complex(&slc.pixels), &s)
}

pub fn read_slc(path: &Path) -> Result<SlcProduct, Error> {
    let (data, s) = read_pair::<SlcSidecar>(path, Kind::Slc)?;
    Ok(SlcProduct {
        pixels: decode_complex(&data, s.rows, s.cols)?,
        range_spacing: s.meta.range_spacing,
        azimuth_spacing: s.meta.azimuth_spacing,
        metadata: s.meta.metadata,
    })
}

pub fn write_grd(path: &Path, grd: &GrdProduct) -> Result<(), Error> {
    let meta = GrdSidecar {
        ground_spacing: grd.ground_spacing,
        azimuth_spacing: grd.azimuth_spacing,
        looks: grd.looks,
        metadata: grd.metadata.clone(),
    };
    let s = sidecar(Kind::Grd, grd.pixels.dim(), SampleType::I16Le, meta);
    write_pair(path, &encode_i16(&grd.pixels), &s)
}

pub fn read_grd(path: &Path) -> Result<GrdProduct, Error> {
    let (data, s) = read_pair::<GrdSidecar>(path, Kind::Grd)?;
    Ok(GrdProduct {
        pixels: decode_i16(&data, s.rows, s.cols)?,
        ground_spacing: s.meta.ground_spacing,
        azimuth_spacing: s.meta.azimuth_spacing,
        looks: s.meta.looks,
        metadata: s.meta.metadata,
    })
}
