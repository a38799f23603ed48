use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::{json, Value};

use crate::{Cli, Format};

pub const SCHEMA: u32 = 1;

fn timestamp() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

/// `{"schema": 1, "config": ..., "timestamp": ..., "result": ...}`.
pub fn json_envelope(cli: &Cli, result: impl Serialize) -> String {
    let mut v = json!({
        "schema": SCHEMA,
        "config": cli,
    });
    if !cli.no_timestamp {
        v["timestamp"] = json!(timestamp());
    }
    v["result"] = serde_json::to_value(result).expect("results serialise");
    let mut s = serde_json::to_string_pretty(&v).expect("results serialise");
    s.push('\n');
    s
}

/// Comment lines echoing the configuration, then the table.
pub fn csv_document(cli: &Cli, table: &str) -> String {
    let mut s = format!(
        "# schema: {SCHEMA}\n# config: {}\n",
        serde_json::to_string(cli).expect("config serialises")
    );
    if !cli.no_timestamp {
        s.push_str(&format!("# timestamp: {}\n", timestamp()));
    }
    s.push_str(table);
    s
}

pub fn render(cli: &Cli, result: impl Serialize, table: impl FnOnce() -> String) -> String {
    match cli.format.unwrap_or(Format::Json) {
        Format::Json => json_envelope(cli, result),
        Format::Csv => csv_document(cli, &table()),
    }
}

/// The configuration echoed in a CSV document, if `text` is one.
pub fn strip_csv_header(text: &str) -> Option<Value> {
    text.lines()
        .find_map(|l| l.strip_prefix("# config: "))
        .and_then(|c| serde_json::from_str(c).ok())
}

/// Shortest representation that parses back to the same `f64`.
pub fn float(x: f64) -> String {
    format!("{x:?}")
}
