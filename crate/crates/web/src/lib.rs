//! WebAssembly bindings for the static demo page in `www/`.
//!
//! Each operation is a plain Rust function returning a serializable
//! struct, plus a `#[wasm_bindgen]` wrapper that hands JSON to the page.

use ndarray::Array2;
use sar_core::calibration::{estimate_aasr, estimate_rasr_at_wavelength, platform_velocity, simulate_aasr};
use sar_core::geometry::AcquisitionGeometry;
use sar_core::quality::*;
use sar_core::scenario::{center_range, stripmap_plan};
use sar_core::signal::{generate_chirp, matched_filter, slant_resolution, ChirpParams, WindowSpec};
use sar_core::{sinc, Complex64};
use serde::Serialize;
use wasm_bindgen::prelude::*;

const FLOOR_DB: f64 = -60.0;

#[derive(Debug, Clone, Serialize)]
pub struct IrfCut {
    /// Slant-range offsets from the peak (m).
    pub offset_m: Vec<f64>,
    /// Power relative to the peak, floored at -60 dB.
    pub power_db: Vec<f64>,
    pub resolution_m: f64,
    pub nominal_resolution_m: f64,
    pub pslr_db: f64,
    pub islr_db: f64,
}

fn window_of(coefficient: f64) -> Result<WindowSpec, String> {
    let w = if coefficient >= 1.0 {
        WindowSpec::uniform()
    } else {
        WindowSpec::raised_cosine(coefficient)
    };
    w.validate().map_err(|e| e.to_string())?;
    Ok(w)
}

/// Range impulse response of a compressed X-band chirp.
pub fn irf_cut(bandwidth_mhz: f64, window_coefficient: f64, oversample: usize) -> Result<IrfCut, String> {
    let p = ChirpParams::x_band(bandwidth_mhz * 1e6, 2e-6);
    p.validate().map_err(|e| e.to_string())?;
    let window = window_of(window_coefficient)?;
    let chirp = generate_chirp(&p).map_err(|e| e.to_string())?;
    let lead = 128;
    let mut echo = vec![Complex64::new(0.0, 0.0); chirp.len() + 2 * lead];
    echo[lead..lead + chirp.len()].copy_from_slice(&chirp);
    let out = matched_filter(&echo, &p, &window).map_err(|e| e.to_string())?;
    let (peak, _) = out
        .samples
        .iter()
        .enumerate()
        .fold((0, 0.0), |b, (i, z)| if z.norm() > b.1 { (i, z.norm()) } else { b });
    let half = 64usize;
    if peak < half || peak + half > out.samples.len() {
        return Err("compressed pulse too close to the record edge".into());
    }
    // a point response in azimuth so the 2-D chip tools apply
    let img = Array2::from_shape_fn((96, 2 * half), |(i, j)| out.samples[peak + j - half] * sinc(i as f64 - 48.0));
    let chip = extract_irf_view(img.view(), 1.0, p.range_spacing(), (48, half), 64, oversample).map_err(|e| e.to_string())?;
    let (cut, dx) = chip.cut(CutAxis::Range);
    let c = chip.peak_index.1;
    let res = measure_resolution(&chip, CutAxis::Range).map_err(|e| e.to_string())?;
    let span = ((12.0 * res / dx) as usize).min(c).min(cut.len() - 1 - c);
    let top = cut[c];
    let idx = c - span..=c + span;
    Ok(IrfCut {
        offset_m: idx.clone().map(|k| (k as f64 - c as f64) * dx).collect(),
        power_db: idx.map(|k| (10.0 * (cut[k] / top).log10()).max(FLOOR_DB)).collect(),
        resolution_m: res,
        nominal_resolution_m: slant_resolution(p.bandwidth, &window).map_err(|e| e.to_string())?,
        pslr_db: measure_pslr(&chip, CutAxis::Range).map_err(|e| e.to_string())?,
        islr_db: measure_islr(&chip, CutAxis::Range, MainlobePolicy::default()).map_err(|e| e.to_string())?,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct Ambiguities {
    pub aasr_db: f64,
    pub aasr_simulated_db: f64,
    pub rasr_db: f64,
    /// Two-way azimuth pattern against Doppler frequency.
    pub doppler_hz: Vec<f64>,
    pub pattern_db: Vec<f64>,
}

/// Ambiguity ratios of a 300 MHz Stripmap collection.
pub fn ambiguities(prf: f64, processed_bandwidth: f64, incidence: f64) -> Result<Ambiguities, String> {
    if !(processed_bandwidth > 0.0 && processed_bandwidth < prf) {
        return Err("processed bandwidth must be positive and below the PRF".into());
    }
    let mut plan = stripmap_plan(incidence, 300e6, 1.0).map_err(|e| e.to_string())?;
    plan.prf = prf;
    plan.validate().map_err(|e| e.to_string())?;
    let v = platform_velocity(&plan);
    let lambda = plan.wavelength();
    let rc = center_range(&plan).map_err(|e| e.to_string())?;
    let n = 401;
    let f_max = 2.5 * prf;
    let doppler_hz: Vec<f64> = (0..n).map(|k| -f_max + 2.0 * f_max * k as f64 / (n - 1) as f64).collect();
    let pattern_db = doppler_hz
        .iter()
        .map(|f| {
            let s = (lambda * f / (2.0 * v)).clamp(-1.0, 1.0);
            (10.0 * plan.antenna.azimuth_two_way(s.asin(), lambda).log10()).max(FLOOR_DB)
        })
        .collect();
    Ok(Ambiguities {
        aasr_db: estimate_aasr(&plan.antenna, prf, processed_bandwidth, v),
        aasr_simulated_db: simulate_aasr(&plan.antenna, prf, processed_bandwidth, v, lambda, rc),
        rasr_db: estimate_rasr_at_wavelength(&plan.antenna, &plan.geom, prf, lambda).map_err(|e| e.to_string())?,
        doppler_hz,
        pattern_db,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct GroundCurve {
    pub incidence_deg: Vec<f64>,
    pub slant_km: Vec<f64>,
    pub ground_km: Vec<f64>,
    /// Numerical d(ground)/d(slant).
    pub derivative: Vec<f64>,
    pub inverse_sine: Vec<f64>,
}

/// Slant to ground mapping of the nominal orbit between two incidences.
pub fn ground_curve(incidence_lo: f64, incidence_hi: f64, points: usize) -> Result<GroundCurve, String> {
    if !(incidence_lo > 0.0 && incidence_hi > incidence_lo && incidence_hi < 80.0 && points >= 2) {
        return Err("need 0 < low < high < 80 degrees and at least two points".into());
    }
    let geom = AcquisitionGeometry::stripmap(25.0);
    let proj = geom.projection_at(geom.orbit.epoch).map_err(|e| e.to_string())?;
    let mut c = GroundCurve {
        incidence_deg: Vec::new(),
        slant_km: Vec::new(),
        ground_km: Vec::new(),
        derivative: Vec::new(),
        inverse_sine: Vec::new(),
    };
    for k in 0..points {
        let inc = incidence_lo + (incidence_hi - incidence_lo) * k as f64 / (points - 1) as f64;
        let r = proj.slant_range_for_incidence(inc.to_radians()).map_err(|e| e.to_string())?;
        let g = |s: f64| proj.slant_to_ground(s).map_err(|e| e.to_string());
        c.incidence_deg.push(inc);
        c.slant_km.push(r / 1e3);
        c.ground_km.push(g(r)? / 1e3);
        c.derivative.push((g(r + 1.0)? - g(r - 1.0)?) / 2.0);
        c.inverse_sine.push(1.0 / inc.to_radians().sin());
    }
    Ok(c)
}

fn to_js<T: Serialize>(r: Result<T, String>) -> Result<String, JsError> {
    let v = r.map_err(|e| JsError::new(&e))?;
    serde_json::to_string(&v).map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen(js_name = irfCut)]
pub fn irf_cut_js(bandwidth_mhz: f64, window_coefficient: f64, oversample: usize) -> Result<String, JsError> {
    to_js(irf_cut(bandwidth_mhz, window_coefficient, oversample))
}

#[wasm_bindgen(js_name = ambiguities)]
pub fn ambiguities_js(prf: f64, processed_bandwidth: f64, incidence: f64) -> Result<String, JsError> {
    to_js(ambiguities(prf, processed_bandwidth, incidence))
}

#[wasm_bindgen(js_name = groundCurve)]
pub fn ground_curve_js(incidence_lo: f64, incidence_hi: f64, points: usize) -> Result<String, JsError> {
    to_js(ground_curve(incidence_lo, incidence_hi, points))
}
