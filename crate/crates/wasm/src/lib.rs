//! Browser bindings for the demo page in `www/`.
//!
//! Each export takes plain strings and numbers and returns a JSON string.
//! The logic lives in ordinary functions so it can be tested natively.

use std::time::Duration;

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use locaray::{
    construct, enumerate_interactions, locate_fault, search::Phase, search::ProbeKind, verify, AnnealParams,
    ArrayFile, Interaction, RowSet, SearchBudget, Strategy, SutModel, TestArray,
};

/// The page runs on the main thread; keep searches small.
const MAX_INTERACTIONS: usize = 20_000;
const MEMORY_BUDGET: u64 = 64 << 20;
const MAX_LISTED: usize = 20;

fn interaction_json(it: &Interaction) -> Value {
    json!({
        "label": it.to_string(),
        // 1-based factor numbers, 0-based values.
        "pairs": it.pairs().iter().map(|&(f, v)| json!([f + 1, v])).collect::<Vec<_>>(),
    })
}

fn array_json(a: &TestArray) -> Value {
    json!(a.rows().map(|r| r.to_vec()).collect::<Vec<_>>())
}

fn parse_array(text: &str) -> Result<ArrayFile, String> {
    ArrayFile::parse(text).map_err(|e| e.to_string())
}

pub fn generate_json(
    model: &str,
    strength: usize,
    seed: u64,
    strategy: &str,
    timeout_s: f64,
) -> Result<Value, String> {
    let model: SutModel = model.parse().map_err(|e: locaray::Error| e.to_string())?;
    let strategy: Strategy = strategy.parse().map_err(|e: locaray::Error| e.to_string())?;
    let count = enumerate_interactions(&model, strength)
        .map_err(|e| e.to_string())?
        .len();
    if count > MAX_INTERACTIONS {
        return Err(format!(
            "{count} interactions is too many for the browser demo (limit {MAX_INTERACTIONS}); use the command-line tool"
        ));
    }
    let timeout = Duration::try_from_secs_f64(timeout_s)
        .ok()
        .filter(|d| !d.is_zero())
        .ok_or("timeout must be a positive number of seconds")?;
    let params = AnnealParams {
        strategy,
        memory_budget: MEMORY_BUDGET,
        ..Default::default()
    };
    let budget = SearchBudget {
        timeout: Some(timeout),
        seed,
        ..Default::default()
    };
    let r = construct(&model, strength, &params, &budget).map_err(|e| e.to_string())?;
    let history: Vec<Value> = r
        .history
        .iter()
        .map(|p| {
            json!({
                "size": p.size,
                "phase": match p.phase { Phase::Binary => "binary", Phase::Shrink => "shrink" },
                "found": p.outcome == ProbeKind::Found,
                "timed_out": p.outcome == ProbeKind::TimedOut,
            })
        })
        .collect();
    let (array, text, verified) = match &r.array {
        Some(a) => {
            let ok = verify(a, strength).map_err(|e| e.to_string())?.is_locating_1bar;
            (array_json(a), ArrayFile::new(a.clone(), strength).to_string(), ok)
        }
        None => (Value::Null, String::new(), false),
    };
    Ok(json!({
        "model": model.to_string(),
        "domains": model.values(),
        "strength": strength,
        "interactions": count,
        "bounds": [r.bounds.0, r.bounds.1],
        "rows": r.rows(),
        "array": array,
        "text": text,
        "verified": verified,
        "timed_out": r.timed_out,
        "elapsed_ms": r.elapsed.as_secs_f64() * 1000.0,
        "history": history,
    }))
}

pub fn verify_json(text: &str, strength: Option<usize>) -> Result<Value, String> {
    let file = parse_array(text)?;
    let t = strength.unwrap_or(file.strength);
    let r = verify(&file.array, t).map_err(|e| e.to_string())?;
    let collisions: Vec<Value> = r
        .collisions()
        .filter(|(_, _, rows)| !rows.is_empty())
        .take(MAX_LISTED)
        .map(|(a, b, rows)| {
            json!({
                "first": interaction_json(a),
                "second": interaction_json(b),
                "rows": rows.one_based(),
            })
        })
        .collect();
    Ok(json!({
        "model": file.array.model().to_string(),
        "domains": file.array.model().values(),
        "strength": t,
        "array": array_json(&file.array),
        "is_covering": r.is_covering,
        "is_locating_exact1": r.is_locating_exact1,
        "is_locating_1bar": r.is_locating_1bar,
        "uncovered_count": r.uncovered.len(),
        "uncovered": r.uncovered.iter().take(MAX_LISTED).map(interaction_json).collect::<Vec<_>>(),
        "collision_count": r.collision_count(),
        "collisions": collisions,
    }))
}

pub fn locate_json(text: &str, failing: &str, strength: Option<usize>) -> Result<Value, String> {
    let file = parse_array(text)?;
    let t = strength.unwrap_or(file.strength);
    let numbers = failing
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<usize>()
                .map_err(|_| format!("`{s}` is not a row number"))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let rows = RowSet::from_one_based(numbers, file.array.num_rows()).map_err(|e| e.to_string())?;
    let found = locate_fault(&file.array, &rows, t).map_err(|e| e.to_string())?;
    Ok(json!({
        "failing": rows.one_based(),
        "matches": found.iter().map(interaction_json).collect::<Vec<_>>(),
    }))
}

fn export(r: Result<Value, String>) -> Result<String, JsError> {
    r.map(|v| v.to_string()).map_err(|e| JsError::new(&e))
}

/// Searches for a small locating array. Returns JSON.
#[wasm_bindgen]
pub fn generate(
    model: &str,
    strength: usize,
    seed: u64,
    strategy: &str,
    timeout_s: f64,
) -> Result<String, JsError> {
    export(generate_json(model, strength, seed, strategy, timeout_s))
}

/// Checks an array in the text file format. A strength of 0 means the one
/// recorded in the text. Returns JSON.
#[wasm_bindgen(js_name = verifyArray)]
pub fn verify_array(text: &str, strength: usize) -> Result<String, JsError> {
    export(verify_json(text, (strength > 0).then_some(strength)))
}

/// Finds the interactions whose covering rows equal `failing`, a list of
/// 1-based row numbers. Returns JSON.
#[wasm_bindgen]
pub fn locate(text: &str, failing: &str, strength: usize) -> Result<String, JsError> {
    export(locate_json(text, failing, (strength > 0).then_some(strength)))
}
