//! Browser bindings for the demo page in `www/`.
//!
//! Three operations, each returning a flat `Float64Array`:
//! a singular-series profile over a range of shifts, the curve `|J_ℓ(α)|`
//! with the major arcs for a chosen `(X, E)`, and prime counts against their
//! predictions.

use wasm_bindgen::prelude::*;

use progavg_core::counts::sweep_error_records;
use progavg_core::expsum::{build_arcs, sample_j_ell_grid};
use progavg_core::series::SeriesTables;
use progavg_core::PolynomialSpec;

const MAX_SHIFTS: i64 = 5000;
const MAX_CUTOFF: f64 = 1e6;
const MAX_GRID: usize = 1 << 16;
const MAX_COUNT_X: u64 = 10_000_000_000;
const MAX_COUNT_Y: u64 = 2000;

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

/// `[𝔖(u_lo), 𝔖'(u_lo), 𝔖(u_lo+1), 𝔖'(u_lo+1), ...]` as Euler products at `cutoff`.
pub fn series_profile_values(ell: u32, u_lo: i64, u_hi: i64, cutoff: f64) -> Result<Vec<f64>, String> {
    if u_hi < u_lo || u_hi - u_lo >= MAX_SHIFTS {
        return Err(format!("need u_lo <= u_hi with at most {MAX_SHIFTS} shifts"));
    }
    if !(2.0..=MAX_CUTOFF).contains(&cutoff) {
        return Err(format!("cutoff must lie in [2, {MAX_CUTOFF}]"));
    }
    let tables = SeriesTables::for_products(cutoff as u64);
    let mut out = Vec::with_capacity(2 * (u_hi - u_lo + 1) as usize);
    for u in u_lo..=u_hi {
        if u == 0 {
            out.extend([f64::NAN, f64::NAN]);
            continue;
        }
        let spec = PolynomialSpec::new(ell, u).map_err(err)?;
        out.push(tables.sigma_full(&spec, cutoff).map_err(err)?.value);
        out.push(tables.sigma_prime_full(&spec, cutoff).map_err(err)?.value);
    }
    Ok(out)
}

/// `|J_ℓ(k/n, z)|` for `k = 0..n`.
pub fn j_ell_curve_values(ell: u32, z: f64, n: usize) -> Result<Vec<f64>, String> {
    if n == 0 || n > MAX_GRID {
        return Err(format!("grid size must lie in [1, {MAX_GRID}]"));
    }
    let samples = sample_j_ell_grid(ell, z, n).map_err(err)?;
    Ok(samples.iter().map(|v| v.norm()).collect())
}

/// Major arcs as `[lo, hi, q, a, lo, hi, q, a, ...]`.
pub fn major_arc_values(x: u64, exponent: f64) -> Result<Vec<f64>, String> {
    let partition = build_arcs(x, exponent).map_err(err)?;
    Ok(partition
        .major
        .iter()
        .flat_map(|arc| [arc.lo, arc.hi, arc.q as f64, arc.a as f64])
        .collect())
}

/// `[count(1), prediction(1), count(2), prediction(2), ...]` for
/// `Σ_{m^ℓ <= X} Λ(m^ℓ+u)` against `𝔖'_ℓ(u)·⌊X^{1/ℓ}⌋`.
pub fn count_values(ell: u32, x: u64, y: u64, cutoff: f64) -> Result<Vec<f64>, String> {
    if x > MAX_COUNT_X || y > MAX_COUNT_Y {
        return Err(format!("need X <= {MAX_COUNT_X} and y <= {MAX_COUNT_Y}"));
    }
    if !(2.0..=MAX_CUTOFF).contains(&cutoff) {
        return Err(format!("cutoff must lie in [2, {MAX_CUTOFF}]"));
    }
    let records = sweep_error_records(ell, x, y, cutoff, true).map_err(err)?;
    Ok(records.iter().flat_map(|r| [r.count, r.prediction]).collect())
}

fn js<T>(r: Result<T, String>) -> Result<T, JsError> {
    r.map_err(|e| JsError::new(&e))
}

/// JavaScript numbers arrive as doubles; accept only exact integers.
fn integer(name: &str, v: f64) -> Result<i64, String> {
    if v.fract() != 0.0 || v.abs() > 9.007_199_254_740_991e15 {
        return Err(format!("{name} must be an integer, got {v}"));
    }
    Ok(v as i64)
}

fn natural(name: &str, v: f64) -> Result<u64, String> {
    let n = integer(name, v)?;
    u64::try_from(n).map_err(|_| format!("{name} must be non-negative, got {v}"))
}

#[wasm_bindgen]
pub fn series_profile(ell: u32, u_lo: f64, u_hi: f64, cutoff: f64) -> Result<Vec<f64>, JsError> {
    js(integer("u_lo", u_lo)
        .and_then(|lo| Ok((lo, integer("u_hi", u_hi)?)))
        .and_then(|(lo, hi)| series_profile_values(ell, lo, hi, cutoff)))
}

#[wasm_bindgen]
pub fn j_ell_curve(ell: u32, z: f64, n: usize) -> Result<Vec<f64>, JsError> {
    js(j_ell_curve_values(ell, z, n))
}

#[wasm_bindgen]
pub fn major_arcs(x: f64, exponent: f64) -> Result<Vec<f64>, JsError> {
    js(natural("X", x).and_then(|x| major_arc_values(x, exponent)))
}

#[wasm_bindgen]
pub fn counts(ell: u32, x: f64, y: f64, cutoff: f64) -> Result<Vec<f64>, JsError> {
    js(natural("X", x)
        .and_then(|x| Ok((x, natural("y", y)?)))
        .and_then(|(x, y)| count_values(ell, x, y, cutoff)))
}
