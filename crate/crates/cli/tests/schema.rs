//! The sweep JSON we emit must validate against the schema we ship, and the
//! schema must actually have teeth — documents with missing fields, wrong
//! types, stray properties, or a foreign schema version have to be rejected.
//!
//! The checker below interprets exactly the constructs the shipped schema
//! uses (`type`, `const`, `required`, `properties`, `additionalProperties`,
//! `items`, union types), so the schema file itself stays the single source
//! of truth instead of being duplicated into assertions.

use phlab_cli::config::ExperimentConfig;
use phlab_cli::emit;
use phlab_cli::sweep::{sweep_k, SweepRow};
use serde_json::Value;

const SCHEMA: &str = include_str!("../schema/sweep.schema.json");

/// Validate `value` against the schema node, returning every violation as a
/// `path: message` line.
fn check(schema: &Value, value: &Value, path: &str, errors: &mut Vec<String>) {
    if let Some(expected) = schema.get("const") {
        if value != expected {
            errors.push(format!("{path}: expected const {expected}, got {value}"));
        }
    }
    if let Some(ty) = schema.get("type") {
        let allowed: Vec<&str> = match ty {
            Value::String(s) => vec![s.as_str()],
            Value::Array(names) => names.iter().filter_map(Value::as_str).collect(),
            other => panic!("malformed schema type at {path}: {other}"),
        };
        if !allowed.iter().any(|name| matches_type(value, name)) {
            errors.push(format!("{path}: expected type {allowed:?}, got {value}"));
            return; // structural checks below presuppose the right shape
        }
    }
    if let Some(required) = schema.get("required").and_then(Value::as_array) {
        for name in required.iter().filter_map(Value::as_str) {
            if value.get(name).is_none() {
                errors.push(format!("{path}: missing required property `{name}`"));
            }
        }
    }
    if let Some(object) = value.as_object() {
        let properties = schema.get("properties").and_then(Value::as_object);
        for (name, child) in object {
            match properties.and_then(|p| p.get(name)) {
                Some(child_schema) => {
                    check(child_schema, child, &format!("{path}/{name}"), errors);
                }
                None => {
                    if schema.get("additionalProperties") == Some(&Value::Bool(false)) {
                        errors.push(format!("{path}: unexpected property `{name}`"));
                    }
                }
            }
        }
    }
    if let (Some(items), Some(array)) = (schema.get("items"), value.as_array()) {
        for (i, item) in array.iter().enumerate() {
            check(items, item, &format!("{path}/{i}"), errors);
        }
    }
}

fn matches_type(value: &Value, name: &str) -> bool {
    match name {
        "object" => value.is_object(),
        "array" => value.is_array(),
        "string" => value.is_string(),
        "number" => value.is_number(),
        // serde_json serializes 5_i64 as 5, never 5.0, so i64/u64 checks are
        // the right integer test for documents we produced ourselves.
        "integer" => value.is_i64() || value.is_u64(),
        "boolean" => value.is_boolean(),
        "null" => value.is_null(),
        other => panic!("unknown type name in schema: {other}"),
    }
}

fn violations(document: &Value) -> Vec<String> {
    let schema: Value = serde_json::from_str(SCHEMA).expect("shipped schema parses");
    let mut errors = Vec::new();
    check(&schema, document, "$", &mut errors);
    errors
}

/// A real sweep document: one healthy row, one row carrying nulls and an
/// error message (k below the family minimum), exercising both branches of
/// every nullable column.
fn emitted_document() -> Value {
    let mut config = ExperimentConfig::default();
    config.family.k_min = 5;
    config.family.k_max = 5;
    config.monte_carlo.n_seeds = 4;
    config.monte_carlo.n_iters = 300;
    config.quadrature.cells_per_axis = 16;
    config.certifier.n_points = 64;
    config.certifier.n_dirs = 8;
    config.return_time.n_samples = 128;
    let mut rows = sweep_k(&config);
    rows.push(phlab_cli::sweep::sweep_row(4, &config));
    serde_json::from_str(&emit::json_string(&rows)).unwrap()
}

#[test]
fn emitted_sweep_json_validates() {
    let doc = emitted_document();
    let errors = violations(&doc);
    assert!(errors.is_empty(), "schema violations:\n{}", errors.join("\n"));
    assert_eq!(doc["rows"].as_array().unwrap().len(), 2);
    assert!(doc["rows"][1]["error"].is_string(), "second row carries its error");
}

#[test]
fn empty_table_validates() {
    let doc: Value =
        serde_json::from_str(&emit::json_string(&Vec::<SweepRow>::new())).unwrap();
    assert!(violations(&doc).is_empty());
}

#[test]
fn missing_field_is_rejected() {
    let mut doc = emitted_document();
    doc["rows"][0].as_object_mut().unwrap().remove("sigma_c");
    let errors = violations(&doc);
    assert!(
        errors.iter().any(|e| e.contains("missing required property `sigma_c`")),
        "got: {errors:?}"
    );
}

#[test]
fn wrong_type_is_rejected() {
    let mut doc = emitted_document();
    doc["rows"][0]["k"] = Value::from("five");
    let errors = violations(&doc);
    assert!(errors.iter().any(|e| e.contains("$/rows/0/k")), "got: {errors:?}");
}

#[test]
fn fractional_k_is_rejected() {
    let mut doc = emitted_document();
    doc["rows"][0]["k"] = Value::from(5.5);
    assert!(!violations(&doc).is_empty());
}

#[test]
fn stray_property_is_rejected() {
    let mut doc = emitted_document();
    doc["rows"][0]["surprise"] = Value::from(1);
    let errors = violations(&doc);
    assert!(
        errors.iter().any(|e| e.contains("unexpected property `surprise`")),
        "got: {errors:?}"
    );
}

#[test]
fn foreign_schema_version_is_rejected() {
    let mut doc = emitted_document();
    doc["schema_version"] = Value::from("2");
    let errors = violations(&doc);
    assert!(errors.iter().any(|e| e.contains("expected const")), "got: {errors:?}");
}

#[test]
fn null_is_not_a_valid_row_list() {
    let doc: Value = serde_json::json!({"schema_version": "1", "rows": null});
    assert!(!violations(&doc).is_empty());
}
