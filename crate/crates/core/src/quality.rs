//! Impulse-response extraction and measurement (PSLR, ISLR, resolution),
//! campaign statistics and relative radiometric accuracy.

use crate::error::QualityError;
use crate::fft::fft2;
use crate::products::SlcProduct;
use crate::{db10, Complex64};
use ndarray::{s, Array2, ArrayView2};
use serde::{Deserialize, Serialize};
use std::sync::OnceLock;

pub const DEFAULT_OVERSAMPLE: usize = 32;
pub const MIN_OVERSAMPLE: usize = 16;
pub const DEFAULT_CHIP: usize = 64;

/// Reported ISLR when no sidelobe energy is present (dB).
pub const ISLR_FLOOR_DB: f64 = -100.0;

/// Paper-convention theoretical ISLR the K_TIMES_RES policy is calibrated to.
pub const SINC_ISLR_TARGET_DB: f64 = -5.03;

/// ISLR integration half-span in resolution cells.
pub const ISLR_SPAN_CELLS: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum CutAxis {
    Range,
    Azimuth,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum MainlobePolicy {
    FirstNull,
    /// Mainlobe is `|x| <= k * resolution`.
    KTimesRes { k: f64 },
}

impl Default for MainlobePolicy {
    fn default() -> Self {
        MainlobePolicy::KTimesRes { k: calibrated_k() }
    }
}

/// Oversampled chip around one point response.
#[derive(Debug, Clone)]
pub struct IrfChip {
    pub pixels: Array2<Complex64>,
    /// Source pixel spacings (m).
    pub azimuth_spacing: f64,
    pub range_spacing: f64,
    pub oversample_factor: usize,
    /// Interpolated peak in source pixel coordinates (row, column).
    pub peak_position: (f64, f64),
    /// Peak sample in `pixels`.
    pub peak_index: (usize, usize),
}

impl IrfChip {
    pub fn transpose(&self) -> IrfChip {
        IrfChip {
            pixels: self.pixels.t().to_owned(),
            azimuth_spacing: self.range_spacing,
            range_spacing: self.azimuth_spacing,
            oversample_factor: self.oversample_factor,
            peak_position: (self.peak_position.1, self.peak_position.0),
            peak_index: (self.peak_index.1, self.peak_index.0),
        }
    }

    pub fn scaled(&self, g: Complex64) -> IrfChip {
        IrfChip {
            pixels: self.pixels.mapv(|z| z * g),
            ..self.clone()
        }
    }

    pub fn peak_power(&self) -> f64 {
        self.pixels[self.peak_index].norm_sqr()
    }

    /// Power along the cut through the peak and the sample spacing (m).
    pub fn cut(&self, axis: CutAxis) -> (Vec<f64>, f64) {
        let (i, j) = self.peak_index;
        let os = self.oversample_factor as f64;
        match axis {
            CutAxis::Range => (
                self.pixels.row(i).iter().map(|z| z.norm_sqr()).collect(),
                self.range_spacing / os,
            ),
            CutAxis::Azimuth => (
                self.pixels.column(j).iter().map(|z| z.norm_sqr()).collect(),
                self.azimuth_spacing / os,
            ),
        }
    }

    /// Area of one source pixel (m^2).
    pub fn pixel_area(&self) -> f64 {
        self.azimuth_spacing * self.range_spacing
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IrfReport {
    pub pslr_range: f64,
    pub pslr_azimuth: f64,
    pub islr_range: f64,
    pub islr_azimuth: f64,
    pub resolution_range: f64,
    pub resolution_azimuth: f64,
    pub peak_position: (f64, f64),
    pub peak_power: f64,
}

fn mainlobe_extent(p: &[f64], c: usize, level: f64) -> (usize, usize) {
    let mut l = c;
    while l > 0 && p[l] >= level {
        l -= 1;
    }
    let mut r = c;
    while r + 1 < p.len() && p[r] >= level {
        r += 1;
    }
    (c - l, r - c)
}

/// Bin nearest the circular power centroid along each axis of a spectrum.
fn spectral_centroid(spec: &Array2<Complex64>) -> (usize, usize) {
    let centroid = |n: usize, power: &dyn Fn(usize) -> f64| {
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 0..n {
            acc += Complex64::from_polar(power(k), 2.0 * std::f64::consts::PI * k as f64 / n as f64);
        }
        if acc.norm() == 0.0 {
            return 0;
        }
        let f = acc.arg().rem_euclid(2.0 * std::f64::consts::PI) / (2.0 * std::f64::consts::PI);
        ((f * n as f64).round() as usize) % n
    };
    let (r, c) = spec.dim();
    let ki = centroid(r, &|k| spec.row(k).iter().map(|z| z.norm_sqr()).sum());
    let kj = centroid(c, &|k| spec.column(k).iter().map(|z| z.norm_sqr()).sum());
    (ki, kj)
}

/// Cut, oversample and re-centre the response nearest `approx_peak`.
pub fn extract_irf_view(
    image: ArrayView2<Complex64>,
    azimuth_spacing: f64,
    range_spacing: f64,
    approx_peak: (usize, usize),
    chip_size: usize,
    oversample: usize,
) -> Result<IrfChip, QualityError> {
    if oversample < MIN_OVERSAMPLE {
        return Err(QualityError::OversampleTooLow(oversample));
    }
    let (rows, cols) = image.dim();
    if rows == 0 || cols == 0 || chip_size < 8 {
        return Err(QualityError::EmptyImage);
    }
    // snap to the local maximum within 2 pixels
    let (ai, aj) = approx_peak;
    let mut best = (ai.min(rows - 1), aj.min(cols - 1));
    let mut bv = -1.0;
    for i in ai.saturating_sub(2)..=(ai + 2).min(rows - 1) {
        for j in aj.saturating_sub(2)..=(aj + 2).min(cols - 1) {
            let v = image[(i, j)].norm_sqr();
            if v > bv {
                bv = v;
                best = (i, j);
            }
        }
    }
    let n = chip_size & !1;
    let half = n / 2;
    let (pi, pj) = best;
    if pi < half || pj < half || pi + half > rows || pj + half > cols {
        return Err(QualityError::PeakOnEdge);
    }
    if pi == 0 || pj == 0 || pi + 1 >= rows || pj + 1 >= cols {
        return Err(QualityError::PeakOnEdge);
    }
    let chip = image.slice(s![pi - half..pi + half, pj - half..pj + half]).to_owned();

    // reject other strong responses outside this one's mainlobe structure
    let peak = chip[(half, half)].norm_sqr();
    let row: Vec<f64> = chip.row(half).iter().map(|z| z.norm_sqr()).collect();
    let col: Vec<f64> = chip.column(half).iter().map(|z| z.norm_sqr()).collect();
    let (rl, rr) = mainlobe_extent(&row, half, 0.1 * peak);
    let (cl, cr) = mainlobe_extent(&col, half, 0.1 * peak);
    let ext_j = (rl.max(rr) as f64 * 1.5).ceil() as usize + 1;
    let ext_i = (cl.max(cr) as f64 * 1.5).ceil() as usize + 1;
    for ((i, j), z) in chip.indexed_iter() {
        let outside = i.abs_diff(half) > ext_i || j.abs_diff(half) > ext_j;
        if outside && z.norm_sqr() > 0.1 * peak {
            return Err(QualityError::MultiplePeaks);
        }
    }

    let m = n * oversample;
    let mut spec = chip.clone();
    fft2(&mut spec, false);
    // zero-pad around the spectral centroid of each axis so that carrier
    // offsets (focused images keep a range carrier) interpolate correctly
    let (k0i, k0j) = spectral_centroid(&spec);
    let mut big = Array2::<Complex64>::zeros((m, m));
    let place = |k: usize, k0: usize| -> Vec<(usize, f64)> {
        // signed offset from the centroid bin
        let d = (k + n - k0) % n;
        let dst = |off: isize| ((k0 as isize + off).rem_euclid(m as isize)) as usize;
        if d < half {
            vec![(dst(d as isize), 1.0)]
        } else if d > half {
            vec![(dst(d as isize - n as isize), 1.0)]
        } else {
            vec![(dst(half as isize), 0.5), (dst(-(half as isize)), 0.5)]
        }
    };
    for ki in 0..n {
        for kj in 0..n {
            for &(di, wi) in &place(ki, k0i) {
                for &(dj, wj) in &place(kj, k0j) {
                    big[(di, dj)] += spec[(ki, kj)] * (wi * wj);
                }
            }
        }
    }
    fft2(&mut big, true);
    let gain = (oversample * oversample) as f64;
    big.mapv_inplace(|z| z * gain);

    let (mi, mj) = crate::focus::argmax(&big);
    let p = |i: isize, j: isize| {
        let ii = (mi as isize + i).rem_euclid(m as isize) as usize;
        let jj = (mj as isize + j).rem_euclid(m as isize) as usize;
        big[(ii, jj)].norm_sqr()
    };
    let (di, dj) = quadratic_peak(&p);
    let pos = (
        (pi - half) as f64 + (mi as f64 + di) / oversample as f64,
        (pj - half) as f64 + (mj as f64 + dj) / oversample as f64,
    );
    // circular re-centring on the interpolated peak sample
    let c = m / 2;
    let mut centred = Array2::<Complex64>::zeros((m, m));
    for ((i, j), z) in big.indexed_iter() {
        let ii = (i + m + c - mi) % m;
        let jj = (j + m + c - mj) % m;
        centred[(ii, jj)] = *z;
    }
    Ok(IrfChip {
        pixels: centred,
        azimuth_spacing,
        range_spacing,
        oversample_factor: oversample,
        peak_position: pos,
        peak_index: (c, c),
    })
}

/// Chip from an SLC product.
pub fn extract_irf(slc: &SlcProduct, approx_peak: (usize, usize), chip_size: usize, oversample: usize) -> Result<IrfChip, QualityError> {
    extract_irf_view(
        slc.pixels.view(),
        slc.azimuth_spacing,
        slc.range_spacing,
        approx_peak,
        chip_size,
        oversample,
    )
}

/// Stationary point of a quadratic fitted to the 3x3 neighbourhood.
fn quadratic_peak(p: &dyn Fn(isize, isize) -> f64) -> (f64, f64) {
    let f = |i, j| p(i, j);
    let dx = 0.5 * (f(1, 0) - f(-1, 0));
    let dy = 0.5 * (f(0, 1) - f(0, -1));
    let dxx = f(1, 0) - 2.0 * f(0, 0) + f(-1, 0);
    let dyy = f(0, 1) - 2.0 * f(0, 0) + f(0, -1);
    let dxy = 0.25 * (f(1, 1) - f(1, -1) - f(-1, 1) + f(-1, -1));
    let det = dxx * dyy - dxy * dxy;
    if det.abs() < 1e-300 {
        return (0.0, 0.0);
    }
    let ox = -(dyy * dx - dxy * dy) / det;
    let oy = -(dxx * dy - dxy * dx) / det;
    (ox.clamp(-1.0, 1.0), oy.clamp(-1.0, 1.0))
}

/// Vertex of the parabola through three equally spaced samples.
fn parabola(a: f64, b: f64, c: f64) -> (f64, f64) {
    let den = a - 2.0 * b + c;
    if den.abs() < 1e-300 {
        return (0.0, b);
    }
    let off = (0.5 * (a - c) / den).clamp(-1.0, 1.0);
    (off, b - 0.25 * (a - c) * off)
}

fn nulls(p: &[f64], c: usize) -> (Option<usize>, Option<usize>) {
    let mut r = c;
    while r + 1 < p.len() && p[r + 1] < p[r] {
        r += 1;
    }
    let right = (r + 1 < p.len()).then_some(r);
    let mut l = c;
    while l > 0 && p[l - 1] < p[l] {
        l -= 1;
    }
    let left = (l > 0).then_some(l);
    (left, right)
}

/// Highest sidelobe beyond the first nulls relative to the mainlobe (dB).
pub fn pslr_of_cut(p: &[f64], c: usize) -> Result<f64, QualityError> {
    let (l, r) = nulls(p, c);
    let main = if c > 0 && c + 1 < p.len() {
        parabola(p[c - 1], p[c], p[c + 1]).1
    } else {
        p[c]
    };
    let mut best: Option<f64> = None;
    let mut consider = |k: usize| {
        if k > 0 && k + 1 < p.len() && p[k] >= p[k - 1] && p[k] >= p[k + 1] {
            let v = parabola(p[k - 1], p[k], p[k + 1]).1;
            best = Some(best.map_or(v, |b: f64| b.max(v)));
        }
    };
    if let Some(r) = r {
        (r + 1..p.len()).for_each(&mut consider);
    }
    if let Some(l) = l {
        (0..l).for_each(&mut consider);
    }
    let side = best.ok_or(QualityError::NoSidelobeFound)?;
    Ok(db10(side / main))
}

/// −3 dB full width in samples, by linear interpolation of power.
pub fn width_of_cut(p: &[f64], c: usize) -> Result<f64, QualityError> {
    let half = 0.5 * p[c];
    let mut r = c;
    while p[r] > half {
        r += 1;
        if r >= p.len() {
            return Err(QualityError::MainlobeClipped);
        }
    }
    let xr = (r - 1) as f64 + (p[r - 1] - half) / (p[r - 1] - p[r]);
    let mut l = c;
    while p[l] > half {
        if l == 0 {
            return Err(QualityError::MainlobeClipped);
        }
        l -= 1;
    }
    let xl = (l + 1) as f64 - (p[l + 1] - half) / (p[l + 1] - p[l]);
    Ok(xr - xl)
}

/// Trapezoidal integral of the linearly interpolated samples over `[a, b]`.
fn integrate(p: &[f64], a: f64, b: f64) -> f64 {
    let at = |x: f64| {
        let i = (x.floor() as usize).min(p.len() - 2);
        let f = x - i as f64;
        (1.0 - f) * p[i] + f * p[i + 1]
    };
    let (a, b) = (a.max(0.0), b.min((p.len() - 1) as f64));
    if b <= a {
        return 0.0;
    }
    let (ia, ib) = (a.ceil() as usize, b.floor() as usize);
    if ia > ib {
        return 0.5 * (at(a) + at(b)) * (b - a);
    }
    let mut sum = 0.5 * (at(a) + p[ia]) * (ia as f64 - a) + 0.5 * (p[ib] + at(b)) * (b - ib as f64);
    for k in ia..ib {
        sum += 0.5 * (p[k] + p[k + 1]);
    }
    sum
}

/// ISLR of a power cut sampled so that one resolution cell is `res` samples.
pub fn islr_of_cut(p: &[f64], c: usize, res: f64, policy: MainlobePolicy) -> Result<f64, QualityError> {
    let span = ISLR_SPAN_CELLS * res;
    if c as f64 - span < 0.0 || c as f64 + span > (p.len() - 1) as f64 {
        return Err(QualityError::SpanExceedsChip);
    }
    let cf = c as f64;
    let (a, b) = match policy {
        MainlobePolicy::FirstNull => {
            let (l, r) = nulls(p, c);
            (l.unwrap_or(0) as f64, r.unwrap_or(p.len() - 1) as f64)
        }
        MainlobePolicy::KTimesRes { k } => (cf - k * res, cf + k * res),
    };
    let main = integrate(p, a, b);
    let side = integrate(p, cf - span, cf + span) - main;
    if side <= 1e-10 * main {
        return Ok(ISLR_FLOOR_DB);
    }
    Ok(db10(side / main))
}

pub fn measure_pslr(chip: &IrfChip, axis: CutAxis) -> Result<f64, QualityError> {
    let (p, _) = chip.cut(axis);
    let c = cut_centre(chip, axis);
    pslr_of_cut(&p, c)
}

pub fn measure_resolution(chip: &IrfChip, axis: CutAxis) -> Result<f64, QualityError> {
    let (p, dx) = chip.cut(axis);
    Ok(width_of_cut(&p, cut_centre(chip, axis))? * dx)
}

pub fn measure_islr(chip: &IrfChip, axis: CutAxis, policy: MainlobePolicy) -> Result<f64, QualityError> {
    let (p, _) = chip.cut(axis);
    let c = cut_centre(chip, axis);
    let res = width_of_cut(&p, c)?;
    islr_of_cut(&p, c, res, policy)
}

fn cut_centre(chip: &IrfChip, axis: CutAxis) -> usize {
    match axis {
        CutAxis::Range => chip.peak_index.1,
        CutAxis::Azimuth => chip.peak_index.0,
    }
}

/// Full report with the default ISLR policy.
pub fn measure_irf(chip: &IrfChip) -> Result<IrfReport, QualityError> {
    let policy = MainlobePolicy::default();
    Ok(IrfReport {
        pslr_range: measure_pslr(chip, CutAxis::Range)?,
        pslr_azimuth: measure_pslr(chip, CutAxis::Azimuth)?,
        islr_range: measure_islr(chip, CutAxis::Range, policy)?,
        islr_azimuth: measure_islr(chip, CutAxis::Azimuth, policy)?,
        resolution_range: measure_resolution(chip, CutAxis::Range)?,
        resolution_azimuth: measure_resolution(chip, CutAxis::Azimuth)?,
        peak_position: chip.peak_position,
        peak_power: chip.peak_power(),
    })
}

fn sinc_energy(a: f64, b: f64) -> f64 {
    // composite Simpson on sinc^2
    let n = 20_000;
    let h = (b - a) / n as f64;
    let f = |x: f64| crate::sinc(x).powi(2);
    let mut s = f(a) + f(b);
    for k in 1..n {
        let x = a + k as f64 * h;
        s += if k % 2 == 1 { 4.0 } else { 2.0 } * f(x);
    }
    s * h / 3.0
}

/// Half-power width of sinc^2 in null-spacing units.
fn sinc_width() -> f64 {
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if crate::sinc(mid).powi(2) > 0.5 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo + hi
}

/// ISLR of an ideal sinc with a `|x| <= k res` mainlobe.
pub fn sinc_islr_k(k: f64) -> f64 {
    let res = sinc_width();
    let span = ISLR_SPAN_CELLS * res;
    let main = sinc_energy(0.0, k * res);
    let total = sinc_energy(0.0, span);
    db10((total - main) / main)
}

/// ISLR of an ideal sinc with a first-null mainlobe.
pub fn sinc_islr_first_null() -> f64 {
    let span = ISLR_SPAN_CELLS * sinc_width();
    let main = sinc_energy(0.0, 1.0);
    let total = sinc_energy(0.0, span);
    db10((total - main) / main)
}

/// Mainlobe factor `k` for which an ideal sinc gives the −5.03 dB ISLR.
pub fn calibrated_k() -> f64 {
    static K: OnceLock<f64> = OnceLock::new();
    *K.get_or_init(|| {
        // ISLR decreases as k grows
        let (mut lo, mut hi) = (0.2, 1.2);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if sinc_islr_k(mid) > SINC_ISLR_TARGET_DB {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

impl MeanStd {
    pub fn of(v: &[f64]) -> MeanStd {
        let n = v.len() as f64;
        let mean = v.iter().sum::<f64>() / n;
        let var = if v.len() > 1 {
            v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        MeanStd {
            mean,
            std: var.sqrt(),
        }
    }
}

impl std::fmt::Display for MeanStd {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:.2} ± {:.2}", self.mean, self.std)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QualityStatistics {
    pub count: usize,
    pub pslr_range: MeanStd,
    pub pslr_azimuth: MeanStd,
    pub islr_range: MeanStd,
    pub islr_azimuth: MeanStd,
    pub resolution_range: MeanStd,
    pub resolution_azimuth: MeanStd,
}

impl QualityStatistics {
    /// Rows in the layout of an IRF statistics table.
    pub fn to_table(&self) -> String {
        let rows = [
            ("Rg PSLR [dB]", self.pslr_range),
            ("Az PSLR [dB]", self.pslr_azimuth),
            ("Rg ISLR [dB]", self.islr_range),
            ("Az ISLR [dB]", self.islr_azimuth),
            ("Rg resolution [m]", self.resolution_range),
            ("Az resolution [m]", self.resolution_azimuth),
        ];
        let mut out = format!("{:<20} {}\n", "Parameter", format!("N = {}", self.count));
        for (name, v) in rows {
            out.push_str(&format!("{name:<20} {v}\n"));
        }
        out
    }
}

pub fn aggregate_reports(reports: &[IrfReport]) -> Result<QualityStatistics, QualityError> {
    if reports.len() < 2 {
        return Err(QualityError::TooFew(reports.len()));
    }
    let col = |f: fn(&IrfReport) -> f64| MeanStd::of(&reports.iter().map(f).collect::<Vec<_>>());
    Ok(QualityStatistics {
        count: reports.len(),
        pslr_range: col(|r| r.pslr_range),
        pslr_azimuth: col(|r| r.pslr_azimuth),
        islr_range: col(|r| r.islr_range),
        islr_azimuth: col(|r| r.islr_azimuth),
        resolution_range: col(|r| r.resolution_range),
        resolution_azimuth: col(|r| r.resolution_azimuth),
    })
}

/// Background-corrected response energy in source-pixel units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChipEnergy {
    pub energy: f64,
    /// Mean background power per source pixel.
    pub background: f64,
    /// Background relative to peak (dB).
    pub background_db: f64,
}

/// Integrated energy of the chip minus an annulus background estimate.
/// The annulus is the outer quarter of the chip with the peak row and
/// column bands excluded.
pub fn integrated_energy(chip: &IrfChip) -> ChipEnergy {
    let m = chip.pixels.nrows();
    let os = chip.oversample_factor;
    let c = m / 2;
    let inner = (3 * m) / 8;
    let band = 2 * os;
    let (mut total, mut bg, mut nbg) = (0.0, 0.0, 0usize);
    for ((i, j), z) in chip.pixels.indexed_iter() {
        let p = z.norm_sqr();
        total += p;
        let di = i.abs_diff(c);
        let dj = j.abs_diff(c);
        if di.max(dj) >= inner && di > band && dj > band {
            bg += p;
            nbg += 1;
        }
    }
    let bg_mean = if nbg > 0 { bg / nbg as f64 } else { 0.0 };
    let scale = (os * os) as f64;
    let energy = (total - bg_mean * (m * m) as f64) / scale;
    ChipEnergy {
        energy,
        background: bg_mean,
        background_db: if bg_mean > 0.0 {
            db10(bg_mean / chip.peak_power())
        } else {
            f64::NEG_INFINITY
        },
    }
}

/// Standard deviation (dB) of the per-target energy-to-rcs ratio.
pub fn relative_radiometric_accuracy(chips: &[IrfChip], true_rcs: &[f64]) -> Result<f64, QualityError> {
    if chips.len() < 2 || chips.len() != true_rcs.len() {
        return Err(QualityError::TooFew(chips.len().min(true_rcs.len())));
    }
    let errs: Vec<f64> = chips
        .iter()
        .zip(true_rcs)
        .map(|(c, s)| db10(integrated_energy(c).energy * c.pixel_area() / s))
        .collect();
    Ok(MeanStd::of(&errs).std)
}
