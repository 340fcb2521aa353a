//! wasm-bindgen exports for the static demo page in `www/`. Every export
//! returns a JSON string; errors surface as thrown strings.

use richset::arithfun::{discrepancy, leveque_bound, Poly, TorusSample};
use richset::density::{checkpoints, lower_density_profile};
use richset::finitefield::{kth_power_subgroup, witness_translate, Field};
use richset::registry::parse_set;
use richset::Result;
use serde_json::json;
use wasm_bindgen::prelude::*;

const MAX_PROFILE: u64 = 2_000_000;
const MAX_SAMPLE: u64 = 200_000;
const MAX_FIELD: u64 = 4096;

fn js(r: Result<String>) -> std::result::Result<String, JsValue> {
    r.map_err(|e| JsValue::from_str(&e.to_string()))
}

pub fn profile_json(descriptor: &str, n_max: u64) -> Result<String> {
    let set = parse_set(descriptor)?;
    let pts = lower_density_profile(set.as_ref(), n_max.min(MAX_PROFILE))?;
    Ok(serde_json::to_string(&pts)?)
}

pub fn discrepancy_json(poly: &str, n_max: u64, h: u64) -> Result<String> {
    let p = Poly::parse(poly)?;
    let mut rows = Vec::new();
    for n in checkpoints(n_max.min(MAX_SAMPLE)).into_iter().filter(|&n| n >= 10) {
        let s = TorusSample::from_poly(&p, n);
        let d = discrepancy(&s)?;
        let b = leveque_bound(&s, h)?;
        rows.push(json!({ "n": n, "d": d, "bound": b.bound }));
    }
    Ok(serde_json::to_string(&rows)?)
}

/// For each nonzero `x`: whether `x^k + F` lies in the nonzero k-th powers.
pub fn witness_map_json(q: u64, k: u64, f: &str) -> Result<String> {
    if q > MAX_FIELD {
        return Err(richset::Error::InvalidArgument(format!("q must be at most {MAX_FIELD}")));
    }
    let field = Field::with_order(q)?;
    let f: Vec<u32> = f
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<u32>().map_err(|_| richset::Error::Parse(format!("field element {s:?}"))))
        .collect::<Result<_>>()?;
    let sub = kth_power_subgroup(&field, k)?;
    let first = witness_translate(&field, k, &f, 1)?;
    let hits: Vec<bool> = (1..q as u32)
        .map(|x| {
            let xk = field.pow(x, k);
            f.iter().all(|&v| sub.contains(field.add(xk, v)))
        })
        .collect();
    Ok(serde_json::to_string(&json!({ "q": q, "index": q.div_ceil(sub.len().max(1) as u64), "first": first, "hits": hits }))?)
}

#[wasm_bindgen]
pub fn density_profile(descriptor: &str, n_max: u32) -> std::result::Result<String, JsValue> {
    js(profile_json(descriptor, n_max as u64))
}

#[wasm_bindgen]
pub fn discrepancy_series(poly: &str, n_max: u32, h: u32) -> std::result::Result<String, JsValue> {
    js(discrepancy_json(poly, n_max as u64, h as u64))
}

#[wasm_bindgen]
pub fn witness_map(q: u32, k: u32, f: &str) -> std::result::Result<String, JsValue> {
    js(witness_map_json(q as u64, k as u64, f))
}
