//! WebAssembly bindings for the browser demo. The `*_text` functions hold the logic and are
//! callable from native code; the exported wrappers turn errors into JS exceptions.

use semiflow::abel::LinearizationModel;
use semiflow::classify::{classification_json, classify};
use semiflow::conjugation::bfid_report_for;
use semiflow::flow::{integrate, trajectory_json};
use semiflow::ode::OdeOptions;
use semiflow::plot::{phase_portrait, seed_ring, PlotOptions};
use semiflow::report::{complex, to_json_string};
use semiflow::{catalog, Error, FunctionExpr, C64};
use serde_json::json;
use wasm_bindgen::prelude::*;

fn source(f_or_id: &str) -> Result<FunctionExpr, Error> {
    match f_or_id.strip_prefix('@') {
        Some(id) => Ok(catalog::get(id)?.f()),
        None => FunctionExpr::parse(f_or_id),
    }
}

fn message(e: Error) -> String {
    format!("{}: {e}", e.kind())
}

/// Phase portrait of `-f` with `seeds` trajectories; `bfid` adds the domain outlines.
/// `f` is an expression in `z`, or `@id` for a catalog entry.
pub fn portrait_text(f: &str, density: usize, seeds: usize, bfid: bool) -> Result<String, String> {
    let f = source(f).map_err(message)?;
    let opts = PlotOptions { density: density.clamp(2, 40), seeds: seed_ring(seeds.min(64)), ..PlotOptions::default() };
    if bfid {
        let m = LinearizationModel::new(&f).map_err(message)?;
        let certs = bfid_report_for(&m).map_err(message)?;
        phase_portrait(&f, &opts, Some((&m, &certs))).map_err(message)
    } else {
        phase_portrait(&f, &opts, None).map_err(message)
    }
}

pub fn classify_text(f: &str) -> Result<String, String> {
    let f = source(f).map_err(message)?;
    let p = classify(&f).map_err(message)?;
    Ok(to_json_string(&classification_json(&p, None)))
}

/// Trajectory summary plus the sampled points as `[t, re, im]` triples.
pub fn trace_text(f: &str, re: f64, im: f64, t: f64) -> Result<String, String> {
    let f = source(f).map_err(message)?;
    let tr = integrate(&f, C64::new(re, im), t, &OdeOptions::default()).map_err(message)?;
    let pts: Vec<_> = tr.samples.iter().map(|(t, p)| json!([t, p.z.re, p.z.im])).collect();
    let mut v = trajectory_json(&tr);
    v["points"] = pts.into();
    v["z0"] = complex(C64::new(re, im));
    Ok(to_json_string(&v))
}

#[wasm_bindgen]
pub fn portrait(f: &str, density: usize, seeds: usize, bfid: bool) -> Result<String, JsValue> {
    portrait_text(f, density, seeds, bfid).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = classifyGenerator)]
pub fn classify_generator(f: &str) -> Result<String, JsValue> {
    classify_text(f).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn trace(f: &str, re: f64, im: f64, t: f64) -> Result<String, JsValue> {
    trace_text(f, re, im, t).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = catalogList)]
pub fn catalog_list() -> String {
    to_json_string(&catalog::list_json())
}
