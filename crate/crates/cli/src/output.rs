//! Emission helpers: JSON reports carry a timestamp; data files never do.

use serde_json::{Map, Value};

/// Builds the common report envelope. The timestamp is the only
/// non-deterministic field in any output.
pub fn envelope(command: &str) -> Map<String, Value> {
    let mut map = Map::new();
    map.insert("command".into(), Value::String(command.into()));
    map.insert(
        "timestamp".into(),
        Value::String(chrono::Utc::now().to_rfc3339()),
    );
    map
}

pub fn print_json(map: Map<String, Value>) {
    println!(
        "{}",
        serde_json::to_string_pretty(&Value::Object(map)).expect("report is serializable")
    );
}

pub fn float(x: f64) -> Value {
    serde_json::Number::from_f64(x)
        .map(Value::Number)
        .unwrap_or(Value::Null)
}

pub fn floats(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|&x| float(x)).collect())
}
