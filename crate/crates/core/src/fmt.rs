//! Deterministic float formatting shared by the CSV writers.

/// Shortest representation that round-trips to the same `f64`.
/// Non-finite values are written as `nan`, `inf` or `-inf`.
pub fn float(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        ryu::Buffer::new().format_finite(x).to_string()
    }
}

/// Joins a row of floats with commas.
pub fn row(values: &[f64]) -> String {
    values.iter().map(|&v| float(v)).collect::<Vec<_>>().join(",")
}
