//! WebAssembly bindings for the static demo page in `www/`.
//!
//! Every export returns a JSON string or an error message, so the same
//! functions are exercised by native tests.

use serde_json::{json, Value};
use topoquant::expr::{parse, Bindings};
use topoquant::geometry::MechanicalSystem;
use topoquant::integrate::{density_field, integrate_reduced, turning_point, GridSpec};
use topoquant::spectrum::{spectrum_table, topological_number, OscillatorParams};
use wasm_bindgen::prelude::*;

/// Largest level the page may request; keeps the table readable.
pub const MAX_LEVEL: u32 = 200;
/// Largest heatmap resolution per axis.
pub const MAX_CELLS: usize = 512;

fn opt(x: Option<f64>) -> Value {
    x.map_or(Value::Null, |v| json!(v))
}

/// Spectrum rows `n = 0..=n_max` as `{"rows": [{n, E, a, C, q0, residual}]}`.
#[wasm_bindgen(js_name = spectrumTable)]
pub fn spectrum_json(n_max: u32, b: f64, hbar: f64, omega: f64) -> Result<String, String> {
    if n_max > MAX_LEVEL {
        return Err(format!("n_max is limited to {MAX_LEVEL}"));
    }
    let params = OscillatorParams::from_omega(1.0, omega, b, hbar).map_err(|e| e.to_string())?;
    let rows = spectrum_table(&params, i64::from(n_max)).map_err(|e| e.to_string())?;
    let rows: Vec<Value> = rows
        .iter()
        .map(|r| {
            json!({
                "n": r.n,
                "E": r.energy,
                "a": r.turning_point,
                "C": r.c,
                "q0": opt(r.q0),
                "residual": opt(r.residual),
            })
        })
        .collect();
    Ok(json!({ "rows": rows }).to_string())
}

/// Parses `"k=1, w=0.5"` into bindings; blank input binds nothing.
pub fn parse_params(text: &str) -> Result<Bindings, String> {
    let mut bindings = Bindings::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (name, value) = item.split_once('=').ok_or_else(|| format!("expected name=value, got `{item}`"))?;
        let value: f64 = value.trim().parse().map_err(|_| format!("`{}` is not a number", value.trim()))?;
        bindings.set(name.trim(), value);
    }
    Ok(bindings)
}

/// Samples one field (`"rho"`, `"K"` or `"phi"`) over `[-half, half]^2`.
///
/// Returns `{"cells", "half", "values", "min", "max", "inside"}` where
/// `values` is row-major in `q2` (bottom row first) and `null` outside the
/// allowed region.
#[wasm_bindgen(js_name = densityGrid)]
#[allow(clippy::too_many_arguments)]
pub fn density_json(
    potential: &str,
    params: &str,
    energy: f64,
    mass: f64,
    half: f64,
    cells: usize,
    epsilon: f64,
    field: &str,
) -> Result<String, String> {
    if cells > MAX_CELLS {
        return Err(format!("at most {MAX_CELLS} cells per axis"));
    }
    let expr = parse(potential).map_err(|e| format!("potential: {e}"))?;
    let system = MechanicalSystem::isotropic(2, mass, expr, parse_params(params)?, energy).map_err(|e| e.to_string())?;
    let surface = system.surface().map_err(|e| e.to_string())?;
    let grid = GridSpec::square(half, cells, epsilon).map_err(|e| e.to_string())?;
    let samples = density_field(&surface, &grid).map_err(|e| e.to_string())?;
    let pick = |c: &topoquant::integrate::FieldCell| match field {
        "rho" => Ok(c.density),
        "K" => Ok(c.curvature),
        "phi" => Ok(c.phi),
        other => Err(format!("unknown field `{other}`")),
    };
    let mut values = Vec::with_capacity(samples.len());
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for c in &samples {
        let v = pick(c)?;
        if let Some(x) = v {
            lo = lo.min(x);
            hi = hi.max(x);
        }
        values.push(opt(v));
    }
    let inside = samples.iter().filter(|c| c.inside).count();
    let (lo, hi) = if inside == 0 { (Value::Null, Value::Null) } else { (json!(lo), json!(hi)) };
    Ok(json!({
        "cells": cells,
        "half": half,
        "values": values,
        "min": lo,
        "max": hi,
        "inside": inside,
    })
    .to_string())
}

/// Reduced oscillator integral at `q0 = ratio * a` next to its closed form.
#[wasm_bindgen(js_name = reducedIntegral)]
pub fn reduced_json(k: f64, energy: f64, b: f64, ratio: f64, tol: f64) -> Result<String, String> {
    if !(k > 0.0 && energy > 0.0) {
        return Err("k and E must be positive".into());
    }
    let a = turning_point(k, energy);
    let q0 = ratio * a;
    let result = integrate_reduced(k, energy, b, q0, tol).map_err(|e| e.to_string())?;
    let closed = topological_number(b, k, energy, q0).map_err(|e| e.to_string())?;
    Ok(json!({
        "a": a,
        "q0": q0,
        "value": result.value,
        "error": result.error,
        "evaluations": result.evaluations,
        "closed_form": closed,
    })
    .to_string())
}
