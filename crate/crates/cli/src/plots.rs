//! Write-only PNG figures.
//!
//! Figures carry their numbers as PNG text chunks rather than rendered
//! labels, so e.g. `pngcheck -t` or any metadata viewer shows the values.

use crate::error::PipelineError;
use ndarray::ArrayView2;
use sar_core::quality::{CutAxis, IrfChip, IrfReport};
use std::io::BufWriter;
use std::path::Path;

const PANEL_W: usize = 512;
const PANEL_H: usize = 200;
/// dB below peak at the bottom of an IRF panel.
const FLOOR_DB: f64 = -45.0;

struct Canvas {
    w: usize,
    h: usize,
    rgb: Vec<u8>,
}

impl Canvas {
    fn new(w: usize, h: usize) -> Self {
        Self {
            w,
            h,
            rgb: vec![255; w * h * 3],
        }
    }

    fn put(&mut self, x: usize, y: usize, c: [u8; 3]) {
        if x < self.w && y < self.h {
            let k = 3 * (y * self.w + x);
            self.rgb[k..k + 3].copy_from_slice(&c);
        }
    }

    fn hline(&mut self, y: usize, x0: usize, x1: usize, c: [u8; 3], dashed: bool) {
        for x in x0..x1 {
            if !dashed || (x / 4) % 2 == 0 {
                self.put(x, y, c);
            }
        }
    }

    fn vline(&mut self, x: usize, y0: usize, y1: usize, c: [u8; 3]) {
        let (a, b) = if y0 <= y1 { (y0, y1) } else { (y1, y0) };
        for y in a..=b {
            self.put(x, y, c);
        }
    }
}

fn write_png(path: &Path, w: usize, h: usize, color: png::ColorType, data: &[u8], text: &[(String, String)]) -> Result<(), PipelineError> {
    let io = |e: png::EncodingError| PipelineError::Io(format!("{}: {e}", path.display()));
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    let file = std::fs::File::create(path)?;
    let mut enc = png::Encoder::new(BufWriter::new(file), w as u32, h as u32);
    enc.set_color(color);
    enc.set_depth(png::BitDepth::Eight);
    for (k, v) in text {
        enc.add_text_chunk(k.clone(), v.clone()).map_err(io)?;
    }
    let mut writer = enc.write_header().map_err(io)?;
    writer.write_image_data(data).map_err(io)?;
    writer.finish().map_err(io)?;
    Ok(())
}

fn draw_cut(cv: &mut Canvas, top: usize, p: &[f64], c: usize, pslr: f64) {
    let peak = p[c].max(f64::MIN_POSITIVE);
    let y_of = |db: f64| -> usize {
        let f = (db.max(FLOOR_DB) / FLOOR_DB).clamp(0.0, 1.0);
        top + 4 + (f * (PANEL_H - 8) as f64).round() as usize
    };
    let grid = [200, 200, 200];
    for db in [-10.0, -20.0, -30.0, -40.0] {
        cv.hline(y_of(db), 0, PANEL_W, grid, false);
    }
    cv.hline(y_of(-3.0), 0, PANEL_W, [40, 160, 40], true);
    cv.hline(y_of(pslr), 0, PANEL_W, [200, 40, 40], true);
    cv.hline(top + PANEL_H - 1, 0, PANEL_W, [0, 0, 0], false);
    let n = p.len();
    let mut last: Option<usize> = None;
    for x in 0..PANEL_W {
        let k = ((x as f64 + 0.5) * n as f64 / PANEL_W as f64) as usize;
        let y = y_of(10.0 * (p[k.min(n - 1)] / peak).max(1e-30).log10());
        match last {
            Some(ly) => cv.vline(x, ly, y, [20, 40, 160]),
            None => cv.put(x, y, [20, 40, 160]),
        }
        last = Some(y);
    }
}

/// Range (top) and azimuth (bottom) power cuts in dB with the -3 dB and
/// PSLR levels marked.
pub fn irf_cuts(path: &Path, label: &str, chip: &IrfChip, report: &IrfReport) -> Result<(), PipelineError> {
    let mut cv = Canvas::new(PANEL_W, 2 * PANEL_H);
    let (pr, _) = chip.cut(CutAxis::Range);
    let (pa, _) = chip.cut(CutAxis::Azimuth);
    draw_cut(&mut cv, 0, &pr, chip.peak_index.1, report.pslr_range);
    draw_cut(&mut cv, PANEL_H, &pa, chip.peak_index.0, report.pslr_azimuth);
    let text = [
        ("Title".to_string(), label.to_string()),
        ("Layout".into(), format!("top range, bottom azimuth; 0 to {FLOOR_DB} dB")),
        ("PSLR range dB".into(), format!("{:.2}", report.pslr_range)),
        ("PSLR azimuth dB".into(), format!("{:.2}", report.pslr_azimuth)),
        ("ISLR range dB".into(), format!("{:.2}", report.islr_range)),
        ("ISLR azimuth dB".into(), format!("{:.2}", report.islr_azimuth)),
        ("Resolution range m".into(), format!("{:.3}", report.resolution_range)),
        ("Resolution azimuth m".into(), format!("{:.3}", report.resolution_azimuth)),
    ];
    write_png(path, cv.w, cv.h, png::ColorType::Rgb, &cv.rgb, &text)
}

/// Block-averaged grayscale of `data` in dB over `dynamic_range` below
/// its maximum, at most `max_side` pixels per side.
pub fn heatmap_db(path: &Path, label: &str, data: ArrayView2<f64>, dynamic_range: f64, max_side: usize) -> Result<(), PipelineError> {
    let (h, w) = data.dim();
    if h == 0 || w == 0 {
        return Err(PipelineError::Io(format!("{}: empty image", path.display())));
    }
    let step = h.max(w).div_ceil(max_side).max(1);
    let (oh, ow) = (h.div_ceil(step), w.div_ceil(step));
    let mut blocks = vec![0.0; oh * ow];
    for ((i, j), v) in data.indexed_iter() {
        blocks[(i / step) * ow + j / step] += v.max(0.0);
    }
    let top = blocks.iter().cloned().fold(0.0, f64::max);
    let px: Vec<u8> = blocks
        .iter()
        .map(|&b| {
            if top <= 0.0 || b <= 0.0 {
                return 0;
            }
            let db = 10.0 * (b / top).log10();
            (255.0 * (1.0 + db / dynamic_range).clamp(0.0, 1.0)).round() as u8
        })
        .collect();
    let text = [
        ("Title".to_string(), label.to_string()),
        ("Scale".into(), format!("power, 0 to -{dynamic_range} dB, {step}x{step} block mean")),
    ];
    write_png(path, ow, oh, png::ColorType::Grayscale, &px, &text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;

    #[test]
    fn heatmap_block_means_to_grayscale() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("h.png");
        let a = Array2::from_shape_fn((10, 30), |(_, j)| if j < 15 { 1.0 } else { 0.01 });
        heatmap_db(&path, "t", a.view(), 40.0, 15).unwrap();
        let dec = png::Decoder::new(std::io::BufReader::new(std::fs::File::open(&path).unwrap()));
        let mut reader = dec.read_info().unwrap();
        let mut buf = vec![0; reader.output_buffer_size().unwrap()];
        let info = reader.next_frame(&mut buf).unwrap();
        assert_eq!((info.width, info.height), (15, 5));
        // -20 dB at 40 dB dynamic range is mid-gray
        assert_eq!(buf[0], 255);
        assert_eq!(buf[14], 128);
    }
}
