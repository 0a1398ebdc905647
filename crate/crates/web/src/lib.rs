//! Browser bindings for the demo page in `www/`.
//!
//! Every export returns a flat `Float64Array`; grids are row-major with the
//! first listed axis slow.

use qinfo_core::experiment::{lambda_rate_optimum_with, lambda_surface, LambdaRateConfig};
use qinfo_core::grid::BlochGrid;
use qinfo_core::measurement::selected_information;
use qinfo_core::states::{mixed_family, overlap_information, pure_family};
use qinfo_core::Result;
use wasm_bindgen::prelude::*;

fn js(r: Result<Vec<f64>>) -> std::result::Result<Vec<f64>, JsError> {
    r.map_err(|e| JsError::new(&e.to_string()))
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

pub fn coherent_surface(
    gamma1: f64,
    gamma2: f64,
    max_total_rate_t: f64,
    n_t: usize,
    n_angle: usize,
) -> Result<Vec<f64>> {
    let ts = linspace(0.0, max_total_rate_t / (gamma1 + gamma2), n_t);
    let thetas = linspace(0.0, std::f64::consts::PI, n_angle);
    Ok(lambda_surface(gamma1, gamma2, &ts, &thetas)?
        .into_iter()
        .map(|p| p.coherent_information)
        .collect())
}

/// `[rate, t, θ]` at the optimum for input `I/2`.
pub fn best_rate(gamma1: f64, gamma2: f64) -> Result<Vec<f64>> {
    let cfg = LambdaRateConfig {
        n_t: 32,
        n_theta: 16,
        ..LambdaRateConfig::default()
    };
    let r = lambda_rate_optimum_with(gamma1, gamma2, &cfg)?;
    Ok(vec![r.best_value, r.best_params["t"], r.best_params["theta"]])
}

/// Selected information over `χ ∈ [0, 1]` (slow) and `ϑ ∈ [0, π]`.
pub fn selected_surface(mixed: bool, q: f64, n_chi: usize, n_vartheta: usize, resolution: usize) -> Result<Vec<f64>> {
    let rho = if mixed { mixed_family(q)? } else { pure_family(q)? };
    let grid = BlochGrid::new(resolution, 2 * resolution)?;
    let mut out = Vec::with_capacity(n_chi * n_vartheta);
    for chi in linspace(0.0, 1.0, n_chi) {
        for v in linspace(0.0, std::f64::consts::PI, n_vartheta) {
            out.push(selected_information(&rho, chi, v, &grid)?);
        }
    }
    Ok(out)
}

/// `I(D)` for `D = 2 ..= max_dim`.
pub fn overlap_curve(max_dim: u32) -> Result<Vec<f64>> {
    (2..=u64::from(max_dim)).map(overlap_information).collect()
}

#[wasm_bindgen(js_name = lambdaSurface)]
pub fn lambda_surface_js(
    gamma1: f64,
    gamma2: f64,
    max_total_rate_t: f64,
    n_t: usize,
    n_angle: usize,
) -> std::result::Result<Vec<f64>, JsError> {
    js(coherent_surface(gamma1, gamma2, max_total_rate_t, n_t, n_angle))
}

#[wasm_bindgen(js_name = lambdaRate)]
pub fn lambda_rate_js(gamma1: f64, gamma2: f64) -> std::result::Result<Vec<f64>, JsError> {
    js(best_rate(gamma1, gamma2))
}

#[wasm_bindgen(js_name = selectedSurface)]
pub fn selected_surface_js(
    mixed: bool,
    q: f64,
    n_chi: usize,
    n_vartheta: usize,
    resolution: usize,
) -> std::result::Result<Vec<f64>, JsError> {
    js(selected_surface(mixed, q, n_chi, n_vartheta, resolution))
}

#[wasm_bindgen(js_name = overlapCurve)]
pub fn overlap_curve_js(max_dim: u32) -> std::result::Result<Vec<f64>, JsError> {
    js(overlap_curve(max_dim))
}
