//! WebAssembly bindings for the static demo page in `www/`.
//!
//! Each export returns a flat `Float64Array`; the stride is documented per
//! function. Errors surface as JS exceptions carrying the library message.

use num_complex::Complex64;
use wasm_bindgen::prelude::*;

use postselect::detection::{self, DetectorModel};
use postselect::fidelity::closed_form_fc;
use postselect::scenarios::{self, probe_information};
use postselect::DenominatorSign;

const ARM_DIM: usize = 48;
const PROBE_DIM: usize = 40;

fn js(e: postselect::Error) -> JsError {
    JsError::new(&e.to_string())
}

fn grid(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    let n = steps.max(2);
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

/// Stride 3: `gain, f_c, p_zero`.
pub fn gain_curve_native(alpha: f64, eta: f64, g_max: f64, steps: usize) -> postselect::Result<Vec<f64>> {
    let arm = scenarios::comparison_output_evolved(alpha, ARM_DIM)?.second_marginal();
    let mut out = Vec::new();
    for g in grid(1.0, g_max, steps) {
        let d = DetectorModel::new(eta, g)?;
        out.extend([g, closed_form_fc(alpha, eta, g, DenominatorSign::Plus)?, detection::predictive_prob(&d, 0, &arm)?]);
    }
    Ok(out)
}

/// Stride 4: `alpha, chi_raw, chi_att, chi_ampatt`.
pub fn information_curve_native(eta: f64, gain: f64, alpha_max: f64, steps: usize) -> postselect::Result<Vec<f64>> {
    let mut out = Vec::new();
    for a in grid(0.0, alpha_max, steps) {
        let (raw, att, amp_att) = probe_information(a, eta, gain, PROBE_DIM)?;
        out.extend([a, raw, att, amp_att]);
    }
    Ok(out)
}

/// Stride 5: `|t|, p20, p10, p00, f_c` for the balanced splitter `r = i|t|`.
pub fn two_photon_curve_native(steps: usize) -> postselect::Result<Vec<f64>> {
    let mut out = Vec::new();
    for x in grid(0.02, 0.5f64.sqrt(), steps) {
        let (p20, p10, p00) = scenarios::two_photon_formula(Complex64::new(x, 0.0), Complex64::new(0.0, x))?;
        out.extend([x, p20, p10, p00, p20 / (p20 + p10 + p00)]);
    }
    Ok(out)
}

#[wasm_bindgen]
pub fn gain_curve(alpha: f64, eta: f64, g_max: f64, steps: usize) -> Result<Vec<f64>, JsError> {
    gain_curve_native(alpha, eta, g_max, steps).map_err(js)
}

#[wasm_bindgen]
pub fn information_curve(eta: f64, gain: f64, alpha_max: f64, steps: usize) -> Result<Vec<f64>, JsError> {
    information_curve_native(eta, gain, alpha_max, steps).map_err(js)
}

#[wasm_bindgen]
pub fn two_photon_curve(steps: usize) -> Result<Vec<f64>, JsError> {
    two_photon_curve_native(steps).map_err(js)
}
