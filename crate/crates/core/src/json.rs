//! Deterministic JSON/CSV scalar formatting shared by all serializers.

/// 17 significant digits in scientific notation; `-0.0` prints as `0`.
pub fn float(x: f64) -> String {
    if x == 0.0 {
        return "0.0000000000000000e0".to_string();
    }
    format!("{x:.16e}")
}

/// JSON string literal with escaping.
pub fn string(s: &str) -> String {
    serde_json::to_string(s).expect("string serialization is infallible")
}

/// CSV field, quoted only when it contains a separator or quote.
pub fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
